//! Piecewise-constant collocation for single-layer densities in R^3.
//!
//! Two assemblies of the same Dirichlet problem are provided. [`assemble`]
//! keeps the hole density on the unit-scale inner surface and carries the
//! rescaling `x = εy` inside the kernel, which yields the block system
//!
//! ```text
//! [ θ V_ii        K_io(ε) ] [μ^i]   [B^i[ε]]
//! [ ε K_oi(ε)     V_oo    ] [μ^o] = [B^o[ε]]
//! ```
//!
//! with θ = sgn ε. [`direct_solve`] instead places the hole density on the
//! physically scaled surface and solves a plain single-layer system.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{self, Execution};
use crate::linalg::{DenseMatrix, LinalgError, LuFactors};
use crate::mesh3::{
    closest_point_on_triangle, scale_signed, GeometryPair, MeshError, TriMesh, Vec3,
};
use crate::poly::EpsPoly;
use crate::quadrature::TRIANGLE7;
use crate::spectral::Theta;
use crate::{Dimension, Frame};

/// Near-field subdivision depth.
pub const MAX_NEAR_FIELD_DEPTH: u32 = 4;
/// Subdivide while the target is closer than this many triangle diameters.
pub const NEAR_FIELD_FACTOR: f64 = 3.0;
/// Relative residual accepted from the dense solve.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BemError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("eps = {eps} is not admissible: clearance {clearance:e} below the minimum {clearance_min:e}")]
    Inadmissible {
        eps: f64,
        clearance: f64,
        clearance_min: f64,
    },
    #[error("near-field quadrature budget exceeded: target at distance {distance:e} from a panel of diameter {diameter:e}")]
    NearFieldBudget { distance: f64, diameter: f64 },
    #[error("solve residual {residual:e} exceeds the tolerance {RESIDUAL_TOLERANCE:e}")]
    Residual { residual: f64 },
    #[error("point {point:?} ({frame:?} frame) is outside the domain")]
    Outside { point: [f64; 3], frame: Frame },
    #[error("point {point:?} ({frame:?} frame) is {distance:e} from a surface; at least {required:e} is needed for accurate evaluation")]
    TooClose {
        point: [f64; 3],
        frame: Frame,
        distance: f64,
        required: f64,
    },
    #[error(
        "density lengths ({got_inner}, {got_outer}) do not match the meshes ({inner}, {outer})"
    )]
    DensityLength {
        got_inner: usize,
        got_outer: usize,
        inner: usize,
        outer: usize,
    },
}

/// `x^p[0] y^p[1] z^p[2]` times a polynomial in ε.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub powers: [u32; 3],
    pub coeff: EpsPoly,
}

impl Monomial {
    pub fn new(powers: [u32; 3], coeff: EpsPoly) -> Self {
        Monomial { powers, coeff }
    }

    pub fn degree(&self) -> u32 {
        self.powers.iter().sum()
    }

    fn eval(&self, eps: f64, x: &Vec3) -> f64 {
        let c = self.coeff.eval(eps);
        if c == 0.0 {
            return 0.0;
        }
        c * x.x.powi(self.powers[0] as i32)
            * x.y.powi(self.powers[1] as i32)
            * x.z.powi(self.powers[2] as i32)
    }
}

/// Polynomial boundary data with ε-polynomial coefficients. Inner data are
/// functions of the unit-scale variable y on the inner surface.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CartesianDataFamily {
    pub inner: Vec<Monomial>,
    pub outer: Vec<Monomial>,
}

impl CartesianDataFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_inner(mut self, powers: [u32; 3], coeff: EpsPoly) -> Self {
        self.inner.push(Monomial::new(powers, coeff));
        self
    }

    pub fn with_outer(mut self, powers: [u32; 3], coeff: EpsPoly) -> Self {
        self.outer.push(Monomial::new(powers, coeff));
        self
    }

    pub fn constant(c: f64) -> Self {
        Self::new()
            .with_inner([0; 3], EpsPoly::constant(c))
            .with_outer([0; 3], EpsPoly::constant(c))
    }

    /// Value ε on the hole and 0 on the outer surface.
    pub fn hole_value_eps() -> Self {
        Self::new().with_inner([0; 3], EpsPoly::identity())
    }

    pub fn eval_inner(&self, eps: f64, y: &Vec3) -> f64 {
        self.inner.iter().map(|m| m.eval(eps, y)).sum()
    }

    pub fn eval_outer(&self, eps: f64, x: &Vec3) -> f64 {
        self.outer.iter().map(|m| m.eval(eps, x)).sum()
    }

    pub fn is_eps_independent(&self) -> bool {
        self.inner
            .iter()
            .chain(&self.outer)
            .all(|m| m.coeff.coeffs().len() <= 1)
    }

    /// Same contract as [`crate::spectral::ZonalDataFamily::reflection_parity`]
    /// with the monomial degree in place of the zonal degree.
    pub fn reflection_parity(&self, frame: Frame) -> Option<i8> {
        let mut allowed = [true, true];
        let mut visit = |m: &Monomial, flips: bool| {
            let l = if flips { m.degree() as usize } else { 0 };
            for (k, &c) in m.coeff.coeffs().iter().enumerate() {
                if c != 0.0 {
                    allowed[if (k + l) % 2 == 0 { 1 } else { 0 }] = false;
                }
            }
        };
        for m in &self.inner {
            visit(m, frame == Frame::Macroscopic);
        }
        for m in &self.outer {
            visit(m, frame == Frame::Microscopic);
        }
        match allowed {
            [true, _] => Some(1),
            [false, true] => Some(-1),
            [false, false] => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BemOptions {
    pub exec: Execution,
    /// Evaluation points must be farther than this many local triangle
    /// diameters from both surfaces.
    pub clearance_factor: f64,
}

impl Default for BemOptions {
    fn default() -> Self {
        BemOptions {
            exec: Execution::default(),
            clearance_factor: 2.0,
        }
    }
}

/// The collocation system for one ε.
#[derive(Clone, Debug)]
pub struct AssembledSystem {
    pub eps: f64,
    pub theta: Theta,
    pub n_inner: usize,
    pub n_outer: usize,
    pub matrix: DenseMatrix,
    pub rhs: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityPair {
    pub mu_i: Vec<f64>,
    pub mu_o: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct BemSolution {
    pub eps: f64,
    pub theta: Theta,
    pub densities: DensityPair,
    pub condition: f64,
    pub residual: f64,
}

/// −1/(4π|x|).
fn kernel(r: f64) -> f64 {
    -1.0 / (4.0 * PI * r)
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: Vec3,
    b: Vec3,
    c: Vec3,
    centroid: Vec3,
    diameter: f64,
}

impl Panel {
    fn new(a: Vec3, b: Vec3, c: Vec3) -> Self {
        Panel {
            a,
            b,
            c,
            centroid: (a + b + c) / 3.0,
            diameter: (b - a).norm().max((c - b).norm()).max((a - c).norm()),
        }
    }

    fn area(&self) -> f64 {
        0.5 * (self.b - self.a).cross(&(self.c - self.a)).norm()
    }

    fn smooth(&self, x: &Vec3) -> f64 {
        let area = self.area();
        TRIANGLE7
            .iter()
            .map(|(l, w)| {
                let p = self.a * l[0] + self.b * l[1] + self.c * l[2];
                w * kernel((x - p).norm())
            })
            .sum::<f64>()
            * area
    }

    fn distance(&self, x: &Vec3) -> f64 {
        (x - closest_point_on_triangle(x, &self.a, &self.b, &self.c)).norm()
    }

    /// ∫ S_3(x − y) dσ_y over the panel for x off the panel.
    fn potential(&self, x: &Vec3, depth: u32) -> Result<f64, BemError> {
        let far = NEAR_FIELD_FACTOR * self.diameter;
        if (x - self.centroid).norm() - self.diameter >= far {
            return Ok(self.smooth(x));
        }
        let d = self.distance(x);
        if d >= far {
            return Ok(self.smooth(x));
        }
        if depth >= MAX_NEAR_FIELD_DEPTH {
            if d < 0.1 * self.diameter {
                return Err(BemError::NearFieldBudget {
                    distance: d,
                    diameter: self.diameter,
                });
            }
            return Ok(self.smooth(x));
        }
        let ab = (self.a + self.b) * 0.5;
        let bc = (self.b + self.c) * 0.5;
        let ca = (self.c + self.a) * 0.5;
        let mut s = 0.0;
        for p in [
            Panel::new(self.a, ab, ca),
            Panel::new(ab, self.b, bc),
            Panel::new(ca, bc, self.c),
            Panel::new(ab, bc, ca),
        ] {
            s += p.potential(x, depth + 1)?;
        }
        Ok(s)
    }

    /// The panel's potential at its own centroid, in closed form.
    fn self_potential(&self) -> f64 {
        kernel(1.0) * flat_triangle_inverse_distance(&self.centroid, &self.a, &self.b, &self.c)
    }
}

/// ∫_T 1/|x − y| dσ_y for x in the plane of T:
/// Σ_edges d_e · ln((R⁺ + s⁺)/(R⁻ + s⁻)), with d_e the signed distance from
/// x to the edge line (positive towards the interior) and s∓ the endpoint
/// coordinates along the edge measured from the foot of the perpendicular.
pub fn flat_triangle_inverse_distance(x: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    let normal = (b - a).cross(&(c - a)).normalize();
    let mut sum = 0.0;
    for (p, q) in [(a, b), (b, c), (c, a)] {
        let len = (q - p).norm();
        let t = (q - p) / len;
        // in-plane unit vector pointing into the triangle
        let m = normal.cross(&t);
        let d = (x - p).dot(&m);
        let s_minus = (p - x).dot(&t);
        let s_plus = (q - x).dot(&t);
        let r_minus = (p - x).norm();
        let r_plus = (q - x).norm();
        if d.abs() < 1e-300 {
            continue;
        }
        sum += d * ((r_plus + s_plus) / (r_minus + s_minus)).ln();
    }
    sum
}

fn panels(mesh: &TriMesh) -> Vec<Panel> {
    (0..mesh.len())
        .map(|t| {
            let [a, b, c] = mesh.corners(t);
            Panel::new(a, b, c)
        })
        .collect()
}

/// Fills a two-block-by-two-block collocation matrix column by column.
///
/// Column j carries the density of `cols[j]`; it sees row k at
/// `targets[block(j)][k]`, scaled by `coef[block(k)][block(j)]`. Diagonal
/// entries use the closed-form self-potential.
fn assemble_columns(
    exec: Execution,
    cols: &[Panel],
    split: usize,
    targets: [&[Vec3]; 2],
    coef: [[f64; 2]; 2],
) -> Result<DenseMatrix, BemError> {
    let n = cols.len();
    let mut m = DenseMatrix::zeros(n);
    let mut failures: Vec<Option<BemError>> = vec![None; n];
    let errs = std::sync::Mutex::new(&mut failures);
    exec::fill_chunks(exec, m.as_mut_slice(), n.max(1), |j, col| {
        let cb = usize::from(j >= split);
        let panel = &cols[j];
        for (k, entry) in col.iter_mut().enumerate() {
            let rb = usize::from(k >= split);
            let v = if k == j {
                Ok(panel.self_potential())
            } else {
                panel.potential(&targets[cb][k], 0)
            };
            match v {
                Ok(v) => *entry = coef[rb][cb] * v,
                Err(e) => {
                    errs.lock().expect("error slot poisoned")[j].get_or_insert(e);
                    return;
                }
            }
        }
    });
    match failures.into_iter().flatten().next() {
        Some(e) => Err(e),
        None => Ok(m),
    }
}

fn check_admissible(pair: &GeometryPair, eps: f64) -> Result<(), BemError> {
    let rep = pair.admissibility(eps);
    if !rep.admissible {
        return Err(BemError::Inadmissible {
            eps,
            clearance: rep.clearance,
            clearance_min: rep.clearance_min,
        });
    }
    Ok(())
}

fn rhs(pair: &GeometryPair, data: &CartesianDataFamily, eps: f64) -> Vec<f64> {
    pair.inner
        .centroids()
        .iter()
        .map(|y| data.eval_inner(eps, y))
        .chain(
            pair.outer
                .centroids()
                .iter()
                .map(|x| data.eval_outer(eps, x)),
        )
        .collect()
}

pub fn assemble(
    pair: &GeometryPair,
    data: &CartesianDataFamily,
    eps: f64,
    opts: &BemOptions,
) -> Result<AssembledSystem, BemError> {
    assemble_with_theta(pair, data, eps, theta_for(eps), opts)
}

fn theta_for(eps: f64) -> Theta {
    Theta::for_eps(Dimension::new(3).expect("3 is a valid dimension"), eps)
}

/// Assembles with an explicit θ; anything but sgn ε gives a system whose
/// solution does not satisfy the inner boundary condition.
pub fn assemble_with_theta(
    pair: &GeometryPair,
    data: &CartesianDataFamily,
    eps: f64,
    theta: Theta,
    opts: &BemOptions,
) -> Result<AssembledSystem, BemError> {
    check_admissible(pair, eps)?;
    let n_inner = pair.inner.len();
    let n_outer = pair.outer.len();
    let mut cols = panels(&pair.inner);
    cols.extend(panels(&pair.outer));

    // rows as seen by inner panels: y_k, then x_k / ε
    let seen_by_inner: Vec<Vec3> = pair
        .inner
        .centroids()
        .iter()
        .copied()
        .chain(pair.outer.centroids().iter().map(|x| x / eps))
        .collect();
    // rows as seen by outer panels: ε y_k, then x_k
    let seen_by_outer: Vec<Vec3> = pair
        .inner
        .centroids()
        .iter()
        .map(|y| y * eps)
        .chain(pair.outer.centroids().iter().copied())
        .collect();
    // ε ∫ S(x − εy) dσ_y = sgn(ε) ∫ S(x/ε − y) dσ_y
    let sgn = eps.signum();
    let coef = [[theta.value(), 1.0], [sgn, 1.0]];
    let matrix = assemble_columns(
        opts.exec,
        &cols,
        n_inner,
        [&seen_by_inner, &seen_by_outer],
        coef,
    )?;
    Ok(AssembledSystem {
        eps,
        theta,
        n_inner,
        n_outer,
        matrix,
        rhs: rhs(pair, data, eps),
    })
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).fold(0.0, f64::max)
}

/// LU solve with one step of iterative refinement.
fn lu_solve(
    matrix: &DenseMatrix,
    b: &[f64],
    exec: Execution,
) -> Result<(Vec<f64>, f64, f64), BemError> {
    let lu = LuFactors::new(matrix.clone(), exec)?;
    let condition = lu.condition_estimate();
    let mut x = lu.solve(b);
    let residual_of = |x: &[f64]| -> Vec<f64> {
        matrix
            .matvec(x)
            .iter()
            .zip(b)
            .map(|(ax, bi)| ax - bi)
            .collect()
    };
    let mut r = residual_of(&x);
    let mut dx = r.clone();
    lu.solve_in_place(&mut dx);
    for (xi, d) in x.iter_mut().zip(&dx) {
        *xi -= d;
    }
    r = residual_of(&x);
    let scale = max_abs(b);
    let residual = if scale > 0.0 {
        max_abs(&r) / scale
    } else {
        max_abs(&r)
    };
    if !(residual <= RESIDUAL_TOLERANCE) {
        return Err(BemError::Residual { residual });
    }
    Ok((x, condition, residual))
}

pub fn solve(sys: &AssembledSystem, exec: Execution) -> Result<BemSolution, BemError> {
    let (x, condition, residual) = lu_solve(&sys.matrix, &sys.rhs, exec)?;
    let (mu_i, mu_o) = x.split_at(sys.n_inner);
    Ok(BemSolution {
        eps: sys.eps,
        theta: sys.theta,
        densities: DensityPair {
            mu_i: mu_i.to_vec(),
            mu_o: mu_o.to_vec(),
        },
        condition,
        residual,
    })
}

/// Assemble with θ = sgn ε and solve.
pub fn solve_family(
    pair: &GeometryPair,
    data: &CartesianDataFamily,
    eps: f64,
    opts: &BemOptions,
) -> Result<BemSolution, BemError> {
    solve(&assemble(pair, data, eps, opts)?, opts.exec)
}

/// Largest deviation from the inner data of the representation formula
/// evaluated at the inner collocation points.
///
/// At `x = εy_k` the hole layer contributes `sgn(ε) V_ii μ^i` whatever θ the
/// system was assembled with, so the stored θ-scaled block is rescaled by
/// `sgn(ε)/θ`.
pub fn inner_trace_residual(sys: &AssembledSystem, dens: &DensityPair) -> f64 {
    let ni = sys.n_inner;
    let ratio = sys.eps.signum() / sys.theta.value();
    let mut worst: f64 = 0.0;
    for k in 0..ni {
        let mut u = 0.0;
        for (j, m) in dens.mu_i.iter().enumerate() {
            u += ratio * sys.matrix.get(k, j) * m;
        }
        for (j, m) in dens.mu_o.iter().enumerate() {
            u += sys.matrix.get(k, ni + j) * m;
        }
        worst = worst.max((u - sys.rhs[k]).abs());
    }
    worst
}

fn check_densities(pair: &GeometryPair, d: &DensityPair) -> Result<(), BemError> {
    if d.mu_i.len() != pair.inner.len() || d.mu_o.len() != pair.outer.len() {
        return Err(BemError::DensityLength {
            got_inner: d.mu_i.len(),
            got_outer: d.mu_o.len(),
            inner: pair.inner.len(),
            outer: pair.outer.len(),
        });
    }
    Ok(())
}

/// Rejects points outside Ω(ε) or too close to either surface. `x` is
/// macroscopic; `hole` is the hole surface at unit scale, mapped by ε.
fn check_point(
    outer: &TriMesh,
    hole: &TriMesh,
    eps: f64,
    x: &Vec3,
    shown: &Vec3,
    frame: Frame,
    factor: f64,
) -> Result<(), BemError> {
    let y = x / eps;
    if !outer.contains(x) || hole.contains(&y) {
        return Err(BemError::Outside {
            point: [shown.x, shown.y, shown.z],
            frame,
        });
    }
    let (d_o, t_o) = outer.distance_to(x);
    let (d_i, t_i) = hole.distance_to(&y);
    let checks = [
        (d_o, factor * outer.diameters()[t_o]),
        (d_i * eps.abs(), factor * hole.diameters()[t_i] * eps.abs()),
    ];
    for (distance, required) in checks {
        if distance <= required {
            let s = if frame == Frame::Microscopic {
                1.0 / eps.abs()
            } else {
                1.0
            };
            return Err(BemError::TooClose {
                point: [shown.x, shown.y, shown.z],
                frame,
                distance: distance * s,
                required: required * s,
            });
        }
    }
    Ok(())
}

/// Evaluates `u(x) = ε ∫ S(x − εy) μ^i(y) dσ_y + ∫ S(x − z) μ^o(z) dσ_z`; the
/// microscopic frame evaluates at x = ε·point.
pub fn eval_field(
    pair: &GeometryPair,
    sol: &BemSolution,
    point: &Vec3,
    frame: Frame,
    opts: &BemOptions,
) -> Result<f64, BemError> {
    check_densities(pair, &sol.densities)?;
    let eps = sol.eps;
    let x = match frame {
        Frame::Macroscopic => *point,
        Frame::Microscopic => point * eps,
    };
    check_point(
        &pair.outer,
        &pair.inner,
        eps,
        &x,
        point,
        frame,
        opts.clearance_factor,
    )?;
    // both frames go through x, so microscopic q and macroscopic εq agree bit for bit
    let y = x / eps;
    let mut u = 0.0;
    for (p, m) in panels(&pair.inner).iter().zip(&sol.densities.mu_i) {
        u += eps.signum() * m * p.potential(&y, 0)?;
    }
    for (p, m) in panels(&pair.outer).iter().zip(&sol.densities.mu_o) {
        u += m * p.potential(&x, 0)?;
    }
    Ok(u)
}

/// The same Dirichlet problem assembled on the physical hole surface.
#[derive(Clone, Debug)]
pub struct DirectSolution {
    pub eps: f64,
    pub hole: TriMesh,
    pub mu_hole: Vec<f64>,
    pub mu_outer: Vec<f64>,
    pub condition: f64,
    pub residual: f64,
}

pub fn direct_solve(
    pair: &GeometryPair,
    data: &CartesianDataFamily,
    eps: f64,
    opts: &BemOptions,
) -> Result<DirectSolution, BemError> {
    check_admissible(pair, eps)?;
    let hole = scale_signed(&pair.inner, eps)?;
    let nh = hole.len();
    let mut cols = panels(&hole);
    cols.extend(panels(&pair.outer));
    let targets: Vec<Vec3> = hole
        .centroids()
        .iter()
        .chain(pair.outer.centroids())
        .copied()
        .collect();
    let matrix = assemble_columns(opts.exec, &cols, nh, [&targets, &targets], [[1.0; 2]; 2])?;
    let b: Vec<f64> = hole
        .centroids()
        .iter()
        .map(|x| data.eval_inner(eps, &(x / eps)))
        .chain(
            pair.outer
                .centroids()
                .iter()
                .map(|x| data.eval_outer(eps, x)),
        )
        .collect();
    let (x, condition, residual) = lu_solve(&matrix, &b, opts.exec)?;
    let (h, o) = x.split_at(nh);
    Ok(DirectSolution {
        eps,
        hole,
        mu_hole: h.to_vec(),
        mu_outer: o.to_vec(),
        condition,
        residual,
    })
}

impl DirectSolution {
    /// Macroscopic field value at `x`.
    pub fn eval(&self, pair: &GeometryPair, x: &Vec3, opts: &BemOptions) -> Result<f64, BemError> {
        check_point(
            &pair.outer,
            &pair.inner,
            self.eps,
            x,
            x,
            Frame::Macroscopic,
            opts.clearance_factor,
        )?;
        let mut u = 0.0;
        for (p, m) in panels(&self.hole).iter().zip(&self.mu_hole) {
            u += m * p.potential(x, 0)?;
        }
        for (p, m) in panels(&pair.outer).iter().zip(&self.mu_outer) {
            u += m * p.potential(x, 0)?;
        }
        Ok(u)
    }
}

/// Asymmetry of the V_ii and V_oo blocks: the plain relative measure
/// `max |A_kl − A_lk| / max |A|` and the area-weighted one, which compares
/// the panel averages `A_kl / |T_l|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockAsymmetry {
    pub raw: f64,
    pub area_weighted: f64,
}

pub fn v_block_asymmetry(sys: &AssembledSystem, pair: &GeometryPair) -> BlockAsymmetry {
    let mut raw: f64 = 0.0;
    let mut weighted: f64 = 0.0;
    let mut scale: f64 = 0.0;
    let mut wscale: f64 = 0.0;
    let blocks = [
        (0, sys.n_inner, pair.inner.areas()),
        (sys.n_inner, sys.n_outer, pair.outer.areas()),
    ];
    for (off, len, areas) in blocks {
        for k in 0..len {
            for l in 0..len {
                let a = sys.matrix.get(off + k, off + l);
                let b = sys.matrix.get(off + l, off + k);
                scale = scale.max(a.abs());
                raw = raw.max((a - b).abs());
                wscale = wscale.max((a / areas[l]).abs());
                weighted = weighted.max((a / areas[l] - b / areas[k]).abs());
            }
        }
    }
    BlockAsymmetry {
        raw: raw / scale,
        area_weighted: weighted / wscale,
    }
}
