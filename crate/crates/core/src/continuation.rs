//! Signed ε sweeps, power-series fits on the positive side and the tests
//! built on them: extrapolation to negative ε, parity of the fitted series,
//! and the ε = 0 microscopic limit.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bem3::{self, BemOptions, CartesianDataFamily};
use crate::exec::{self, Execution};
use crate::mesh3::{is_point_symmetric, GeometryPair, Vec3};
use crate::spectral::{self, SphereProblem, Theta, ZonalDataFamily};
use crate::{Dimension, Frame, Point};

/// Fits whose design matrix is worse conditioned than this are refused.
pub const FIT_CONDITION_LIMIT: f64 = 1e10;

/// Outer radius of the default sphere geometry (unit hole). With a unit
/// outer ball the even-n families carry ε-series tails that a degree-8 fit
/// on {0.05..0.3} cannot resolve, and extrapolation error lands between the
/// verdict thresholds.
pub const DEFAULT_OUTER_RADIUS: f64 = 50.0;

/// Unit hole inside the ball of radius [`DEFAULT_OUTER_RADIUS`].
pub fn default_spheres(n: Dimension) -> SphereProblem {
    SphereProblem::new(n, 1.0, DEFAULT_OUTER_RADIUS).expect("default radii are valid")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("grid is empty")]
    EmptyGrid,
    #[error("grid contains eps = 0; the ε = 0 system is only used by the limit check")]
    ZeroInGrid,
    #[error("grid is not strictly increasing at index {0}")]
    NotMonotone(usize),
    #[error("grid value {0} is not finite")]
    NonFinite(f64),
    #[error("fit needs an entirely positive grid (found {0})")]
    NotPositive(f64),
    #[error("degree {degree} needs at least {} grid points, found {points}", degree + 2)]
    DegreeTooHigh { degree: usize, points: usize },
    #[error(
        "least-squares design matrix is ill-conditioned ({condition:e} > {FIT_CONDITION_LIMIT:e})"
    )]
    IllConditionedFit { condition: f64 },
    #[error("negative grid does not mirror the fitted grid (|{negative}| vs {positive})")]
    GridMismatch { negative: f64, positive: f64 },
    #[error("sweep and fit disagree on the number of targets ({sweep} vs {fit})")]
    TargetMismatch { sweep: usize, fit: usize },
    #[error("target {index} is invalid: {reason}")]
    BadTarget { index: usize, reason: String },
    #[error("solve failed at eps = {eps}: {message}")]
    SolveFailed { eps: f64, message: String },
    #[error("solve at eps = {eps} produced a non-finite value for target {target}")]
    NonFiniteValue { eps: f64, target: usize },
    #[error("operation needs {0}")]
    Unsupported(&'static str),
}

/// A concrete family of Dirichlet problems indexed by ε.
#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Problem {
    Spectral {
        geometry: SphereProblem,
        data: ZonalDataFamily,
    },
    Bem {
        geometry: GeometryPair,
        data: CartesianDataFamily,
        options: BemOptions,
    },
}

impl Problem {
    pub fn dimension(&self) -> Dimension {
        match self {
            Problem::Spectral { geometry, .. } => geometry.n,
            Problem::Bem { .. } => Dimension::new(3).expect("3 is a valid dimension"),
        }
    }

    pub fn solver_id(&self) -> &'static str {
        match self {
            Problem::Spectral { .. } => "spectral-density-modes",
            Problem::Bem { .. } => "bem3-collocation",
        }
    }

    /// Data whose coefficients do not depend on ε.
    pub fn data_is_eps_independent(&self) -> bool {
        match self {
            Problem::Spectral { data, .. } => data.is_eps_independent(),
            Problem::Bem { data, .. } => data.is_eps_independent(),
        }
    }

    /// Whether the hypotheses of the series-parity result hold for this
    /// frame and ζ: n even, the relevant surface symmetric under x ↦ −x
    /// (inner for the macroscopic frame, outer for the microscopic one), and
    /// the data reflection condition with parity ζ.
    pub fn symmetry_hypothesis(&self, frame: Frame, zeta: i8) -> bool {
        if !self.dimension().is_even() {
            return false;
        }
        let (symmetric, parity) = match self {
            Problem::Spectral { data, .. } => (true, data.reflection_parity(frame)),
            Problem::Bem { geometry, data, .. } => {
                let surface = match frame {
                    Frame::Macroscopic => &geometry.inner,
                    Frame::Microscopic => &geometry.outer,
                };
                (is_point_symmetric(surface), data.reflection_parity(frame))
            }
        };
        symmetric && parity == Some(zeta)
    }

    fn solve_at(
        &self,
        eps: f64,
        targets: &[TargetSet],
    ) -> Result<(Vec<Vec<f64>>, f64), ContinuationError> {
        let failed = |e: &dyn std::fmt::Display| ContinuationError::SolveFailed {
            eps,
            message: e.to_string(),
        };
        match self {
            Problem::Spectral { geometry, data } => {
                let sol = spectral::solve_densities(geometry, data, eps).map_err(|e| failed(&e))?;
                let values = targets
                    .iter()
                    .map(|set| {
                        set.points
                            .iter()
                            .map(|p| {
                                spectral::eval_solution(&sol, geometry, p, set.frame)
                                    .map_err(|e| failed(&e))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((values, sol.condition()))
            }
            Problem::Bem {
                geometry,
                data,
                options,
            } => {
                let sol =
                    bem3::solve_family(geometry, data, eps, options).map_err(|e| failed(&e))?;
                let values = targets
                    .iter()
                    .map(|set| {
                        set.points
                            .iter()
                            .map(|p| {
                                let x = to_vec3(p);
                                bem3::eval_field(geometry, &sol, &x, set.frame, options)
                                    .map_err(|e| failed(&e))
                            })
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((values, sol.condition))
            }
        }
    }
}

fn to_vec3(p: &Point) -> Vec3 {
    let c = p.coords();
    Vec3::new(c[0], c[1], c[2])
}

/// Observation points in one frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetSet {
    pub frame: Frame,
    pub points: Vec<Point>,
}

impl TargetSet {
    pub fn new(frame: Frame, points: Vec<Point>) -> Self {
        TargetSet { frame, points }
    }

    /// Checks the frame-independent conditions: right dimension, macroscopic
    /// points away from the origin and inside the outer domain, microscopic
    /// points outside the inner domain. Admissibility for each ε is checked
    /// by the solvers during the sweep.
    pub fn check(&self, problem: &Problem) -> Result<(), ContinuationError> {
        let n = problem.dimension().get();
        for (index, p) in self.points.iter().enumerate() {
            let bad = |reason: String| ContinuationError::BadTarget { index, reason };
            if p.dim() != n {
                return Err(bad(format!("has {} coordinates, expected {n}", p.dim())));
            }
            if p.coords().iter().any(|x| !x.is_finite()) {
                return Err(bad("has non-finite coordinates".into()));
            }
            let (inside_outer, inside_inner) = match problem {
                Problem::Spectral { geometry, .. } => {
                    (p.norm() < geometry.r_outer, p.norm() <= geometry.r_inner)
                }
                Problem::Bem { geometry, .. } => {
                    let x = to_vec3(p);
                    (geometry.outer.contains(&x), geometry.inner.contains(&x))
                }
            };
            match self.frame {
                Frame::Macroscopic => {
                    if p.norm() < 1e-12 {
                        return Err(bad(
                            "macroscopic targets must stay away from the origin".into()
                        ));
                    }
                    if !inside_outer {
                        return Err(bad(
                            "macroscopic target lies outside the outer domain".into()
                        ));
                    }
                }
                Frame::Microscopic => {
                    if inside_inner {
                        return Err(bad("microscopic target lies inside the inner domain".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// The default positive grid {0.05, 0.075, ..., 0.3}.
pub fn default_grid() -> Vec<f64> {
    linspace(0.05, 0.3, 11)
}

/// −grid, sorted increasingly.
pub fn mirrored(grid: &[f64]) -> Vec<f64> {
    let mut g: Vec<f64> = grid.iter().map(|e| -e).collect();
    g.sort_by(f64::total_cmp);
    g
}

pub fn check_grid(grid: &[f64]) -> Result<(), ContinuationError> {
    if grid.is_empty() {
        return Err(ContinuationError::EmptyGrid);
    }
    for (i, &e) in grid.iter().enumerate() {
        if !e.is_finite() {
            return Err(ContinuationError::NonFinite(e));
        }
        if e == 0.0 {
            return Err(ContinuationError::ZeroInGrid);
        }
        if i > 0 && e <= grid[i - 1] {
            return Err(ContinuationError::NotMonotone(i));
        }
    }
    Ok(())
}

/// Field values of one target set over a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: Vec<f64>,
    pub frame: Frame,
    pub points: Vec<Point>,
    /// `values[k][j]`: value at `grid[k]` for target `j`.
    pub values: Vec<Vec<f64>>,
    pub conditions: Vec<f64>,
    pub solver: String,
}

impl SweepResult {
    pub fn column(&self, target: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[target]).collect()
    }

    pub fn value_scale(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }
}

/// One solve per ε; the result has one [`SweepResult`] per target set.
pub fn sweep(
    problem: &Problem,
    grid: &[f64],
    targets: &[TargetSet],
    exec: Execution,
) -> Result<Vec<SweepResult>, ContinuationError> {
    check_grid(grid)?;
    for t in targets {
        t.check(problem)?;
    }
    // BEM solves parallelize internally and hold large matrices
    let outer = match problem {
        Problem::Spectral { .. } => exec,
        Problem::Bem { .. } => Execution::Sequential,
    };
    let solved = exec::try_map_indexed(outer, grid.len(), |k| problem.solve_at(grid[k], targets))?;
    for (k, (values, _)) in solved.iter().enumerate() {
        for set in values {
            if let Some(j) = set.iter().position(|v| !v.is_finite()) {
                return Err(ContinuationError::NonFiniteValue {
                    eps: grid[k],
                    target: j,
                });
            }
        }
    }
    let conditions: Vec<f64> = solved.iter().map(|(_, c)| *c).collect();
    Ok(targets
        .iter()
        .enumerate()
        .map(|(s, set)| SweepResult {
            grid: grid.to_vec(),
            frame: set.frame,
            points: set.points.clone(),
            values: solved.iter().map(|(v, _)| v[s].clone()).collect(),
            conditions: conditions.clone(),
            solver: problem.solver_id().to_string(),
        })
        .collect())
}

/// Least-squares polynomial per target in the scaled variable s = ε / eps_scale.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSeriesFit {
    pub grid: Vec<f64>,
    pub frame: Frame,
    pub eps_scale: f64,
    pub degree: usize,
    /// `coeffs[j][i]`: coefficient of s^i for target j.
    pub coeffs: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    /// Largest residual over targets.
    pub residual: f64,
    pub condition: f64,
}

impl PowerSeriesFit {
    pub fn eval(&self, target: usize, eps: f64) -> f64 {
        let s = eps / self.eps_scale;
        self.coeffs[target]
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * s + c)
    }

    /// Coefficients rescaled to the unscaled variable ε.
    pub fn unscaled_coeffs(&self, target: usize) -> Vec<f64> {
        self.coeffs[target]
            .iter()
            .enumerate()
            .map(|(i, c)| c / self.eps_scale.powi(i as i32))
            .collect()
    }
}

pub fn fit_series(sweep: &SweepResult, degree: usize) -> Result<PowerSeriesFit, ContinuationError> {
    check_grid(&sweep.grid)?;
    if let Some(&e) = sweep.grid.iter().find(|&&e| e <= 0.0) {
        return Err(ContinuationError::NotPositive(e));
    }
    let m = sweep.grid.len();
    if degree + 2 > m {
        return Err(ContinuationError::DegreeTooHigh { degree, points: m });
    }
    let eps_scale = sweep.grid[m - 1];
    let v = DMatrix::from_fn(m, degree + 1, |i, j| {
        (sweep.grid[i] / eps_scale).powi(j as i32)
    });
    let svd = v.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = smax / smin;
    if !(condition <= FIT_CONDITION_LIMIT) {
        return Err(ContinuationError::IllConditionedFit { condition });
    }
    let targets = sweep.values.first().map_or(0, |r| r.len());
    let mut coeffs = Vec::with_capacity(targets);
    let mut residuals = Vec::with_capacity(targets);
    for j in 0..targets {
        let b = DVector::from_vec(sweep.column(j));
        let c = svd
            .solve(&b, 0.0)
            .expect("both singular vector sets were computed");
        let r = (&v * &c - &b).amax();
        coeffs.push(c.iter().copied().collect());
        residuals.push(r);
    }
    Ok(PowerSeriesFit {
        grid: sweep.grid.clone(),
        frame: sweep.frame,
        eps_scale,
        degree,
        residual: residuals.iter().copied().fold(0.0, f64::max),
        coeffs,
        residuals,
        condition,
    })
}

/// Verdict thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub atol: f64,
    pub rtol_break: f64,
    pub continues_factor: f64,
    pub breaks_factor: f64,
    /// Forbidden-parity coefficients count as vanishing below this fraction
    /// of the largest coefficient.
    pub symmetry_rtol: f64,
}

impl Thresholds {
    pub fn spectral() -> Self {
        Thresholds {
            atol: 1e-9,
            rtol_break: 0.1,
            continues_factor: 10.0,
            breaks_factor: 100.0,
            symmetry_rtol: 1e-8,
        }
    }

    pub fn bem() -> Self {
        Thresholds {
            atol: 1e-3,
            ..Thresholds::spectral()
        }
    }

    pub fn for_problem(problem: &Problem) -> Self {
        match problem {
            Problem::Spectral { .. } => Thresholds::spectral(),
            Problem::Bem { .. } => Thresholds::bem(),
        }
    }
}

pub const SPECTRAL_DEGREE: usize = 8;
pub const BEM_DEGREE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Continues,
    Breaks,
    Inconclusive,
}

impl Verdict {
    /// CONTINUES when `error ≤ continues_factor·residual + atol`; BREAKS when
    /// `error ≥ breaks_factor·residual` and `error ≥ rtol_break·scale`.
    pub fn classify(max_error: f64, residual: f64, value_scale: f64, t: &Thresholds) -> Verdict {
        if max_error <= t.continues_factor * residual + t.atol {
            Verdict::Continues
        } else if max_error >= t.breaks_factor * residual && max_error >= t.rtol_break * value_scale
        {
            Verdict::Breaks
        } else {
            Verdict::Inconclusive
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Continues => "CONTINUES",
            Verdict::Breaks => "BREAKS",
            Verdict::Inconclusive => "INCONCLUSIVE",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuationReport {
    pub frame: Frame,
    pub positive_residual: f64,
    pub negative_grid: Vec<f64>,
    /// `extrapolated[k][j]` is the fitted series at `negative_grid[k]`.
    pub extrapolated: Vec<Vec<f64>>,
    pub computed: Vec<Vec<f64>>,
    /// Largest error over targets for each negative ε.
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub value_scale: f64,
    pub verdict: Verdict,
    pub thresholds: Thresholds,
}

pub fn test_continuation(
    fit: &PowerSeriesFit,
    negative: &SweepResult,
    thresholds: &Thresholds,
) -> Result<ContinuationReport, ContinuationError> {
    check_grid(&negative.grid)?;
    if negative.grid.len() != fit.grid.len() {
        return Err(ContinuationError::GridMismatch {
            negative: negative.grid.first().copied().unwrap_or(f64::NAN),
            positive: fit.grid.first().copied().unwrap_or(f64::NAN),
        });
    }
    let mirror = mirrored(&negative.grid);
    for (n, p) in mirror.iter().zip(&fit.grid) {
        if (n - p).abs() > 1e-12 * p.abs() {
            return Err(ContinuationError::GridMismatch {
                negative: *n,
                positive: *p,
            });
        }
    }
    let targets = fit.coeffs.len();
    if negative.values.first().map_or(0, |r| r.len()) != targets {
        return Err(ContinuationError::TargetMismatch {
            sweep: negative.values.first().map_or(0, |r| r.len()),
            fit: targets,
        });
    }
    let extrapolated: Vec<Vec<f64>> = negative
        .grid
        .iter()
        .map(|&e| (0..targets).map(|j| fit.eval(j, e)).collect())
        .collect();
    let errors: Vec<f64> = extrapolated
        .iter()
        .zip(&negative.values)
        .map(|(x, v)| {
            x.iter()
                .zip(v)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    let value_scale = negative.value_scale();
    Ok(ContinuationReport {
        frame: negative.frame,
        positive_residual: fit.residual,
        negative_grid: negative.grid.clone(),
        extrapolated,
        computed: negative.values.clone(),
        errors,
        max_error,
        value_scale,
        verdict: Verdict::classify(max_error, fit.residual, value_scale, thresholds),
        thresholds: *thresholds,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub frame: Frame,
    pub zeta: i8,
    pub hypothesis_checked: bool,
    /// Largest |c_i| with i of the parity the series must not contain.
    pub forbidden_max: f64,
    pub largest: f64,
    pub relative: f64,
    /// `None` when the hypothesis was not verified: no claim is made.
    pub vanishes: Option<bool>,
}

/// Parity of the fitted series: with ζ = +1 only even powers may appear,
/// with ζ = −1 only odd ones.
pub fn test_symmetry(
    fit: &PowerSeriesFit,
    zeta: i8,
    hypothesis_checked: bool,
    thresholds: &Thresholds,
) -> SymmetryReport {
    let allowed = if zeta == 1 { 0 } else { 1 };
    let mut forbidden_max: f64 = 0.0;
    let mut largest: f64 = 0.0;
    for c in &fit.coeffs {
        for (i, v) in c.iter().enumerate() {
            largest = largest.max(v.abs());
            if i % 2 != allowed {
                forbidden_max = forbidden_max.max(v.abs());
            }
        }
    }
    let relative = if largest > 0.0 {
        forbidden_max / largest
    } else {
        0.0
    };
    SymmetryReport {
        frame: fit.frame,
        zeta,
        hypothesis_checked,
        forbidden_max,
        largest,
        relative,
        vanishes: hypothesis_checked.then_some(relative <= thresholds.symmetry_rtol),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitCheckReport {
    pub fit_residual: f64,
    /// Constant term of the microscopic series per target.
    pub c0: Vec<f64>,
    /// θ v[μ^i](q) + v[μ^o](0) from the ε = 0 system.
    pub limit: Vec<f64>,
    pub gaps: Vec<f64>,
    pub max_gap: f64,
}

/// Compares the extrapolated ε → 0 value of the microscopic series with the
/// field of the ε = 0 system (θ = +1, since the grid is positive).
pub fn microscopic_limit_check(
    problem: &Problem,
    grid: &[f64],
    targets: &TargetSet,
    degree: usize,
    exec: Execution,
) -> Result<LimitCheckReport, ContinuationError> {
    let Problem::Spectral { geometry, data } = problem else {
        return Err(ContinuationError::Unsupported("sphere geometry"));
    };
    if targets.frame != Frame::Microscopic {
        return Err(ContinuationError::Unsupported("microscopic targets"));
    }
    let sw = sweep(problem, grid, std::slice::from_ref(targets), exec)?;
    let fit = fit_series(&sw[0], degree)?;
    let lim = spectral::solve_limit_system(geometry, data, Theta::Plus).map_err(|e| {
        ContinuationError::SolveFailed {
            eps: 0.0,
            message: e.to_string(),
        }
    })?;
    let limit = targets
        .points
        .iter()
        .map(|q| {
            lim.microscopic_field(geometry, q)
                .map_err(|e| ContinuationError::SolveFailed {
                    eps: 0.0,
                    message: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let c0: Vec<f64> = fit.coeffs.iter().map(|c| c[0]).collect();
    let gaps: Vec<f64> = c0.iter().zip(&limit).map(|(a, b)| (a - b).abs()).collect();
    Ok(LimitCheckReport {
        fit_residual: fit.residual,
        max_gap: gaps.iter().copied().fold(0.0, f64::max),
        c0,
        limit,
        gaps,
    })
}

/// Fit on `grid`, sweep its mirror image, and classify.
pub fn continuation_experiment(
    problem: &Problem,
    grid: &[f64],
    targets: &TargetSet,
    degree: usize,
    thresholds: &Thresholds,
    exec: Execution,
) -> Result<(SweepResult, SweepResult, PowerSeriesFit, ContinuationReport), ContinuationError> {
    let pos = sweep(problem, grid, std::slice::from_ref(targets), exec)?.remove(0);
    let neg = sweep(
        problem,
        &mirrored(grid),
        std::slice::from_ref(targets),
        exec,
    )?
    .remove(0);
    let fit = fit_series(&pos, degree)?;
    let report = test_continuation(&fit, &neg, thresholds)?;
    Ok((pos, neg, fit, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::EpsPoly;

    fn sweep_of(grid: &[f64], f: impl Fn(f64) -> f64) -> SweepResult {
        SweepResult {
            grid: grid.to_vec(),
            frame: Frame::Macroscopic,
            points: vec![Point::new(vec![0.5, 0.0, 0.0])],
            values: grid.iter().map(|&e| vec![f(e)]).collect(),
            conditions: vec![1.0; grid.len()],
            solver: "test".into(),
        }
    }

    #[test]
    fn exact_quadratic_fit() {
        let s = sweep_of(&default_grid(), |e| e * e);
        let fit = fit_series(&s, 2).unwrap();
        let c = &fit.coeffs[0];
        assert!(c[0].abs() < 1e-13 && c[1].abs() < 1e-13);
        assert!((c[2] - 0.09).abs() < 1e-13);
        assert!(fit.residual < 1e-12);
        assert!((fit.unscaled_coeffs(0)[2] - 1.0).abs() < 1e-11);
    }

    #[test]
    fn fit_preconditions() {
        let s = sweep_of(&default_grid(), |e| e);
        assert!(matches!(
            fit_series(&s, 10),
            Err(ContinuationError::DegreeTooHigh { .. })
        ));
        let neg = sweep_of(&mirrored(&default_grid()), |e| e);
        assert!(matches!(
            fit_series(&neg, 2),
            Err(ContinuationError::NotPositive(_))
        ));
        let tight = sweep_of(&linspace(1.0, 1.0 + 1e-5, 12), |e| e);
        assert!(matches!(
            fit_series(&tight, 9),
            Err(ContinuationError::IllConditionedFit { .. })
        ));
    }

    #[test]
    fn grid_validation() {
        assert_eq!(check_grid(&[]), Err(ContinuationError::EmptyGrid));
        assert_eq!(
            check_grid(&[-0.1, 0.0, 0.1]),
            Err(ContinuationError::ZeroInGrid)
        );
        assert_eq!(
            check_grid(&[0.1, 0.1]),
            Err(ContinuationError::NotMonotone(1))
        );
        assert_eq!(mirrored(&[0.1, 0.2]), vec![-0.2, -0.1]);
    }

    #[test]
    fn verdict_rules() {
        let t = Thresholds::spectral();
        assert_eq!(Verdict::classify(0.0, 0.0, 1.0, &t), Verdict::Continues);
        assert_eq!(Verdict::classify(0.5, 1e-12, 1.0, &t), Verdict::Breaks);
        assert_eq!(
            Verdict::classify(1e-6, 1e-12, 1.0, &t),
            Verdict::Inconclusive
        );
        // large error but also a large residual: not a clean break
        assert_eq!(Verdict::classify(0.5, 0.01, 1.0, &t), Verdict::Inconclusive);
    }

    #[test]
    fn mismatched_grid_is_rejected() {
        let pos = sweep_of(&default_grid(), |e| e);
        let fit = fit_series(&pos, 2).unwrap();
        let neg = sweep_of(&mirrored(&linspace(0.05, 0.31, 11)), |e| e);
        assert!(matches!(
            test_continuation(&fit, &neg, &Thresholds::spectral()),
            Err(ContinuationError::GridMismatch { .. })
        ));
    }

    #[test]
    fn symmetry_without_hypothesis_makes_no_claim() {
        let fit = fit_series(&sweep_of(&default_grid(), |e| 1.0 + e), 2).unwrap();
        let r = test_symmetry(&fit, 1, false, &Thresholds::spectral());
        assert_eq!(r.vanishes, None);
        assert!(r.relative > 0.1);
        let r = test_symmetry(&fit, 1, true, &Thresholds::spectral());
        assert_eq!(r.vanishes, Some(false));
    }

    #[test]
    fn example_sweep_values() {
        let n = Dimension::new(3).unwrap();
        let problem = Problem::Spectral {
            geometry: SphereProblem::unit(n),
            data: ZonalDataFamily::new().with_inner(0, EpsPoly::constant(1.0)),
        };
        let targets = TargetSet::new(Frame::Macroscopic, vec![Point::polar(n, 0.75, 0.2)]);
        let sw = sweep(
            &problem,
            &[0.25],
            std::slice::from_ref(&targets),
            Execution::Sequential,
        )
        .unwrap();
        assert!((sw[0].values[0][0] - 1.0 / 9.0).abs() < 1e-13);
        let bad = TargetSet::new(Frame::Microscopic, vec![Point::polar(n, 0.5, 0.0)]);
        assert!(matches!(
            bad.check(&problem),
            Err(ContinuationError::BadTarget { index: 0, .. })
        ));
        let err = sweep(&problem, &[0.25, 0.8], &[targets], Execution::Sequential).unwrap_err();
        assert!(matches!(err, ContinuationError::SolveFailed { eps, .. } if eps == 0.8));
    }
}
