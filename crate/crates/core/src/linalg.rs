//! Dense square matrices, LU with partial pivoting (via faer) and a 1-norm
//! condition estimate.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::lu::partial_pivoting::{factor, solve};
use faer::perm::PermRef;
use faer::{MatMut, MatRef, Par};
use thiserror::Error;

use crate::exec::Execution;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular to working precision (pivot {index} is {pivot:e})")]
    Singular { index: usize, pivot: f64 },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Column-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        DenseMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_column_major(n: usize, data: Vec<f64>) -> Result<Self, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(DenseMatrix { n, data })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = DenseMatrix::zeros(n);
        for j in 0..n {
            for i in 0..n {
                m.data[j * n + i] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n, "vector length must match the matrix");
        let mut y = vec![0.0; self.n];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (yi, a) in y.iter_mut().zip(self.column(j)) {
                *yi += a * xj;
            }
        }
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.n)
            .map(|j| self.column(j).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Factors a copy of the matrix.
    pub fn lu(&self, exec: Execution) -> Result<LuFactors, LinalgError> {
        LuFactors::new(self.clone(), exec)
    }
}

fn par_for(exec: Execution) -> Par {
    if exec.is_parallel() {
        Par::rayon(0)
    } else {
        Par::Seq
    }
}

/// Packed LU factors `P A = L U` of a square matrix.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
    perm_inv: Vec<usize>,
    norm1: f64,
    par: Par,
}

impl LuFactors {
    /// Factors `a` in place.
    pub fn new(mut a: DenseMatrix, exec: Execution) -> Result<Self, LinalgError> {
        if a.data.iter().any(|x| !x.is_finite()) {
            return Err(LinalgError::NonFinite);
        }
        let n = a.n;
        let norm1 = a.norm1();
        let par = par_for(exec);
        let mut perm = vec![0usize; n];
        let mut perm_inv = vec![0usize; n];
        {
            let mat = MatMut::from_column_major_slice_mut(&mut a.data, n, n);
            let mut buf = MemBuffer::new(factor::lu_in_place_scratch::<usize, f64>(
                n,
                n,
                par,
                Default::default(),
            ));
            factor::lu_in_place(
                mat,
                &mut perm,
                &mut perm_inv,
                par,
                MemStack::new(&mut buf),
                Default::default(),
            );
        }
        let umax = (0..n).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
        for i in 0..n {
            let p = a.get(i, i);
            if !(p.abs() > n as f64 * f64::EPSILON * umax) {
                return Err(LinalgError::Singular { index: i, pivot: p });
            }
        }
        Ok(LuFactors {
            lu: a,
            perm,
            perm_inv,
            norm1,
            par,
        })
    }

    pub fn n(&self) -> usize {
        self.lu.n
    }

    fn run(&self, b: &mut [f64], transpose: bool) {
        let n = self.n();
        assert_eq!(b.len(), n, "right-hand side length must match the matrix");
        let lu = MatRef::from_column_major_slice(&self.lu.data, n, n);
        let rhs = MatMut::from_column_major_slice_mut(b, n, 1);
        // SAFETY: perm and perm_inv come from the factorization and are
        // mutually inverse permutations of 0..n.
        let perm = unsafe { PermRef::new_unchecked(&self.perm, &self.perm_inv, n) };
        let mut buf = MemBuffer::new(solve::solve_in_place_scratch::<usize, f64>(n, 1, self.par));
        let stack = MemStack::new(&mut buf);
        if transpose {
            solve::solve_transpose_in_place(lu, lu, perm, rhs, self.par, stack);
        } else {
            solve::solve_in_place(lu, lu, perm, rhs, self.par, stack);
        }
    }

    /// Overwrites `b` with `A^{-1} b`.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        self.run(b, false);
    }

    /// Overwrites `b` with `A^{-T} b`.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        self.run(b, true);
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Estimate of the 1-norm condition number `‖A‖₁ ‖A^{-1}‖₁`.
    ///
    /// Hager's power iteration for `‖A^{-1}‖₁` with Higham's extra
    /// alternating-sign test vector; a lower bound that is usually within a
    /// small factor of the true value.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n();
        if n == 0 {
            return 0.0;
        }
        let norm1 = |v: &[f64]| v.iter().map(|x| x.abs()).sum::<f64>();
        let mut x = vec![1.0 / n as f64; n];
        let mut est = 0.0;
        for iter in 0..5 {
            let mut y = x.clone();
            self.solve_in_place(&mut y);
            let new_est = norm1(&y);
            if iter > 0 && new_est <= est {
                break;
            }
            est = new_est;
            let mut z: Vec<f64> = y
                .iter()
                .map(|v| if *v >= 0.0 { 1.0 } else { -1.0 })
                .collect();
            self.solve_transpose_in_place(&mut z);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold((0, -1.0), |acc, c| if c.1 > acc.1 { c } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
            if iter > 0 && zmax <= ztx {
                break;
            }
            x = vec![0.0; n];
            x[j] = 1.0;
        }
        let mut b: Vec<f64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * (1.0 + i as f64 / (n.max(2) - 1) as f64)
            })
            .collect();
        self.solve_in_place(&mut b);
        let alt = 2.0 * norm1(&b) / (3.0 * n as f64);
        self.norm1 * est.max(alt)
    }
}
