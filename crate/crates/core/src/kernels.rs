//! Fundamental solution of the Laplacian in R^n (n >= 3), surface measures of
//! unit spheres, Gegenbauer polynomials, and the eigenvalues of the on-sphere
//! single layer operator on zonal densities.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{Adaptive, QuadratureError};

/// Highest Gegenbauer degree the solvers will ever request.
pub const MAX_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum KernelError {
    #[error("dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("fundamental solution is singular at the origin")]
    SingularPoint,
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("Gegenbauer degree {0} exceeds the cap of {MAX_DEGREE}")]
    DegreeTooHigh(usize),
    #[error("sphere radius must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("eigenvalue quadrature for degree {degree} did not converge: {source}")]
    Quadrature {
        degree: usize,
        #[source]
        source: QuadratureError,
    },
}

/// Ambient space dimension, always at least 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self, KernelError> {
        if n < 3 {
            return Err(KernelError::DimensionTooSmall(n));
        }
        Ok(Dimension(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    pub fn is_even(self) -> bool {
        self.0.is_multiple_of(2)
    }

    /// Gegenbauer index (n - 2) / 2 for zonal expansions on S^{n-1}.
    pub fn nu(self) -> f64 {
        (self.0 as f64 - 2.0) / 2.0
    }
}

impl TryFrom<usize> for Dimension {
    type Error = KernelError;
    fn try_from(n: usize) -> Result<Self, Self::Error> {
        Dimension::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

/// A point of R^n.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    /// Point at distance `r` from the origin whose direction makes cosine `t`
    /// with the last coordinate axis, tilted into the first coordinate.
    pub fn polar(n: Dimension, r: f64, t: f64) -> Self {
        let mut c = vec![0.0; n.get()];
        let t = t.clamp(-1.0, 1.0);
        c[0] = r * (1.0 - t * t).sqrt();
        c[n.get() - 1] = r * t;
        Point(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scaled(&self, s: f64) -> Point {
        Point(self.0.iter().map(|x| s * x).collect())
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        self.0.iter().zip(other).map(|(a, b)| a * b).sum()
    }

    pub fn check_dim(&self, n: Dimension) -> Result<(), KernelError> {
        if self.dim() != n.get() {
            return Err(KernelError::DimensionMismatch {
                expected: n.get(),
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Γ(n/2) for integer n >= 1, by the half-integer recurrence.
fn gamma_half(n: usize) -> f64 {
    let (mut g, mut x) = if n.is_multiple_of(2) {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    let target = n as f64 / 2.0;
    while x < target - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

/// (n-1)-dimensional measure of the unit sphere in R^n, 2 π^{n/2} / Γ(n/2).
pub fn surface_measure_unit_sphere(n: Dimension) -> f64 {
    sphere_measure(n.get())
}

/// Same as [`surface_measure_unit_sphere`] without the n >= 3 restriction;
/// the zonal reduction needs ω_{n-2} which is 2 for n = 3.
pub(crate) fn sphere_measure(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / gamma_half(n)
}

/// S_n as a function of |x|.
pub fn fundamental_solution_radial(n: Dimension, r: f64) -> f64 {
    let nn = n.get() as f64;
    r.powf(2.0 - nn) / ((2.0 - nn) * surface_measure_unit_sphere(n))
}

/// S_n(x) = |x|^{2-n} / ((2-n) s_n).
pub fn fundamental_solution(n: Dimension, x: &Point) -> Result<f64, KernelError> {
    x.check_dim(n)?;
    let r = x.norm();
    if r == 0.0 {
        return Err(KernelError::SingularPoint);
    }
    Ok(fundamental_solution_radial(n, r))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GegenbauerParams {
    pub nu: f64,
    pub l: usize,
}

impl GegenbauerParams {
    pub fn for_dimension(n: Dimension, l: usize) -> Self {
        GegenbauerParams { nu: n.nu(), l }
    }
}

/// C_l^{(ν)}(t) by forward three-term recurrence.
pub fn gegenbauer_eval(p: GegenbauerParams, t: f64) -> f64 {
    let nu = p.nu;
    if p.l == 0 {
        return 1.0;
    }
    let mut c0 = 1.0;
    let mut c1 = 2.0 * nu * t;
    for k in 2..=p.l {
        let kf = k as f64;
        let c2 = (2.0 * (kf + nu - 1.0) * t * c1 - (kf + 2.0 * nu - 2.0) * c0) / kf;
        c0 = c1;
        c1 = c2;
    }
    c1
}

/// C_l^{(ν)}(1) = (2ν)_l / l!.
pub fn gegenbauer_at_one(p: GegenbauerParams) -> f64 {
    (0..p.l).fold(1.0, |acc, k| {
        acc * (2.0 * p.nu + k as f64) / (k as f64 + 1.0)
    })
}

/// Zonal basis function normalized to 1 at the pole: C_l(t) / C_l(1).
pub fn zonal(n: Dimension, l: usize, t: f64) -> f64 {
    let p = GegenbauerParams::for_dimension(n, l);
    gegenbauer_eval(p, t) / gegenbauer_at_one(p)
}

/// Values of all normalized zonal functions of degree 0..=max_l at `t`.
pub fn zonal_all(n: Dimension, max_l: usize, t: f64) -> Vec<f64> {
    let nu = n.nu();
    let mut out = Vec::with_capacity(max_l + 1);
    let (mut c0, mut c1) = (1.0, 2.0 * nu * t);
    let mut n1 = 2.0 * nu;
    out.push(1.0);
    if max_l >= 1 {
        out.push(c1 / n1);
    }
    for k in 2..=max_l {
        let kf = k as f64;
        let c2 = (2.0 * (kf + nu - 1.0) * t * c1 - (kf + 2.0 * nu - 2.0) * c0) / kf;
        let n2 = n1 * (2.0 * nu + kf - 1.0) / kf;
        out.push(c2 / n2);
        c0 = c1;
        c1 = c2;
        n1 = n2;
    }
    out
}

/// Eigenvalue λ_l(n, a) of the single layer on the sphere of radius `a`
/// acting on the normalized zonal density of degree `l`.
///
/// Evaluated at the pole by adaptive quadrature of the polar-angle
/// reduction. The distance to the pole is computed as 2a sin(ϑ/2), which is
/// the cancellation-free form of a sqrt(2 - 2 cos ϑ).
pub fn sphere_single_layer_eigenvalue(n: Dimension, a: f64, l: usize) -> Result<f64, KernelError> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(KernelError::BadRadius(a));
    }
    if l > MAX_DEGREE {
        return Err(KernelError::DegreeTooHigh(l));
    }
    let nn = n.get() as f64;
    let omega = sphere_measure(n.get() - 1);
    let params = GegenbauerParams::for_dimension(n, l);
    let norm = gegenbauer_at_one(params);
    let jac = a.powf(nn - 1.0) * omega;
    let integrand = |th: f64| {
        let d = 2.0 * a * (0.5 * th).sin();
        let s = th.sin();
        let kernel = d.powf(2.0 - nn) / ((2.0 - nn) * surface_measure_unit_sphere(n));
        kernel * gegenbauer_eval(params, th.cos()) / norm * jac * s.powf(nn - 2.0)
    };
    Adaptive::default()
        .integrate(0.0, PI, integrand)
        .map_err(|source| KernelError::Quadrature { degree: l, source })
}

/// λ_l for l = 0..=max_l.
pub fn sphere_single_layer_eigenvalues(
    n: Dimension,
    a: f64,
    max_l: usize,
) -> Result<Vec<f64>, KernelError> {
    (0..=max_l)
        .map(|l| sphere_single_layer_eigenvalue(n, a, l))
        .collect()
}
