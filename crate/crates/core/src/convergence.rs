//! Mesh refinement studies for the collocation solver.
//!
//! Concentric spheres with data built from powers of z have an exact answer
//! from the mode solver; anything else is judged by three-level Richardson
//! extrapolation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bem3::{self, BemError, BemOptions, CartesianDataFamily};
use crate::kernels::zonal;
use crate::mesh3::{self, GeometryPair, MeshError, MeshStats, TriMesh, Vec3};
use crate::poly::EpsPoly;
use crate::quadrature::GaussLegendre;
use crate::spectral::{self, SpectralError, SphereProblem, ZonalDataFamily};
use crate::{Dimension, Frame, Point};

#[derive(Debug, Error)]
pub enum ConvergenceError {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error("level {subdivisions}: {source}")]
    Bem { subdivisions: u32, source: BemError },
    #[error("oracle: {0}")]
    Oracle(#[from] SpectralError),
    #[error("no targets given")]
    NoTargets,
    #[error("eps = {eps} is not admissible for the coarsest mesh pair (|eps| must stay below {eps_max})")]
    Inadmissible { eps: f64, eps_max: f64 },
    #[error("successive refinements did not change any target value; no order can be estimated")]
    Stagnant,
}

/// A closed surface that can be produced at any refinement level.
#[derive(Clone, Debug)]
pub enum SurfaceSpec {
    Sphere {
        radius: f64,
    },
    Ellipsoid {
        a: f64,
        b: f64,
        c: f64,
    },
    /// Refined by midpoint subdivision; level 0 is the mesh itself.
    Polyhedron(TriMesh),
}

impl SurfaceSpec {
    pub fn build(&self, level: u32) -> Result<TriMesh, MeshError> {
        match self {
            SurfaceSpec::Sphere { radius } => mesh3::icosphere(*radius, level),
            SurfaceSpec::Ellipsoid { a, b, c } => mesh3::ellipsoid(*a, *b, *c, level),
            SurfaceSpec::Polyhedron(m) => {
                if level > mesh3::MAX_SUBDIVISIONS {
                    return Err(MeshError::SubdivisionBudget { requested: level });
                }
                (0..level).try_fold(m.clone(), |acc, _| mesh3::refine(&acc))
            }
        }
    }

    fn sphere_radius(&self) -> Option<f64> {
        match self {
            SurfaceSpec::Sphere { radius } => Some(*radius),
            SurfaceSpec::Ellipsoid { a, b, c } if a == b && b == c => Some(*a),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ConvergenceSetup {
    pub inner: SurfaceSpec,
    pub outer: SurfaceSpec,
    pub data: CartesianDataFamily,
    pub eps: f64,
    pub frame: Frame,
    pub targets: Vec<Vec3>,
    pub options: BemOptions,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Reference {
    /// Exact values from the mode solver.
    Oracle,
    Richardson,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementLevel {
    pub subdivisions: u32,
    pub unknowns: usize,
    /// Mean edge length of the outer mesh; both meshes refine together, so
    /// this tracks the ratio between levels.
    pub h: f64,
    pub inner_mesh: MeshStats,
    pub outer_mesh: MeshStats,
    pub values: Vec<f64>,
    pub condition: f64,
    /// Largest |value − reference| over targets, divided by the largest
    /// |reference|. Oracle studies only.
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub eps: f64,
    pub frame: Frame,
    pub reference: Reference,
    pub levels: Vec<RefinementLevel>,
    /// Exact values (oracle) or Richardson-extrapolated values.
    pub reference_values: Vec<f64>,
    /// Orders between consecutive levels (oracle) or per target (Richardson).
    pub partial_orders: Vec<f64>,
    pub observed_order: f64,
    /// Half the spread of the partial orders.
    pub order_uncertainty: f64,
}

/// Runs the same solve at `base`, `base + 1` and `base + 2` subdivisions.
pub fn convergence_study(
    setup: &ConvergenceSetup,
    base: u32,
) -> Result<ConvergenceReport, ConvergenceError> {
    if setup.targets.is_empty() {
        return Err(ConvergenceError::NoTargets);
    }
    let oracle = sphere_oracle(setup)?;
    let mut levels = Vec::with_capacity(3);
    for s in base..base + 3 {
        levels.push(solve_level(setup, s)?);
    }
    let h: Vec<f64> = levels.iter().map(|l| l.h).collect();
    let report = |reference, reference_values, partial_orders: Vec<f64>, observed_order, levels| {
        let (lo, hi) = partial_orders
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &p| {
                (a.min(p), b.max(p))
            });
        ConvergenceReport {
            eps: setup.eps,
            frame: setup.frame,
            reference,
            levels,
            reference_values,
            order_uncertainty: if partial_orders.len() > 1 {
                0.5 * (hi - lo)
            } else {
                0.0
            },
            partial_orders,
            observed_order,
        }
    };
    match oracle {
        Some(exact) => {
            let scale = exact
                .iter()
                .map(|v| v.abs())
                .fold(0.0, f64::max)
                .max(f64::MIN_POSITIVE);
            for level in &mut levels {
                let err = level
                    .values
                    .iter()
                    .zip(&exact)
                    .map(|(v, e)| (v - e).abs())
                    .fold(0.0, f64::max);
                level.relative_error = Some(err / scale);
            }
            let e: Vec<f64> = levels
                .iter()
                .map(|l| l.relative_error.unwrap_or(f64::NAN))
                .collect();
            let partial = (0..2)
                .map(|i| (e[i] / e[i + 1]).ln() / (h[i] / h[i + 1]).ln())
                .collect();
            let slope = log_slope(&h, &e);
            Ok(report(Reference::Oracle, exact, partial, slope, levels))
        }
        None => {
            let ratio = ((h[0] / h[1]) * (h[1] / h[2])).sqrt();
            let mut orders = Vec::new();
            let mut extrapolated = Vec::with_capacity(setup.targets.len());
            for j in 0..setup.targets.len() {
                let v: Vec<f64> = levels.iter().map(|l| l.values[j]).collect();
                let (d1, d2) = (v[1] - v[0], v[2] - v[1]);
                if d1 == 0.0 || d2 == 0.0 {
                    extrapolated.push(v[2]);
                    continue;
                }
                let p = (d1 / d2).abs().ln() / ratio.ln();
                orders.push(p);
                extrapolated.push(v[2] + d2 / (ratio.powf(p) - 1.0));
            }
            if orders.is_empty() {
                return Err(ConvergenceError::Stagnant);
            }
            let mut sorted = orders.clone();
            sorted.sort_by(f64::total_cmp);
            let m = sorted.len();
            let median = if m % 2 == 1 {
                sorted[m / 2]
            } else {
                0.5 * (sorted[m / 2 - 1] + sorted[m / 2])
            };
            Ok(report(
                Reference::Richardson,
                extrapolated,
                orders,
                median,
                levels,
            ))
        }
    }
}

fn solve_level(setup: &ConvergenceSetup, s: u32) -> Result<RefinementLevel, ConvergenceError> {
    let pair = GeometryPair::new(setup.inner.build(s)?, setup.outer.build(s)?)?;
    if setup.eps.abs() >= pair.eps_max {
        return Err(ConvergenceError::Inadmissible {
            eps: setup.eps,
            eps_max: pair.eps_max,
        });
    }
    let bem = |source| ConvergenceError::Bem {
        subdivisions: s,
        source,
    };
    let sol = bem3::solve_family(&pair, &setup.data, setup.eps, &setup.options).map_err(bem)?;
    let values = setup
        .targets
        .iter()
        .map(|x| bem3::eval_field(&pair, &sol, x, setup.frame, &setup.options))
        .collect::<Result<Vec<_>, _>>()
        .map_err(bem)?;
    Ok(RefinementLevel {
        subdivisions: s,
        unknowns: pair.inner.len() + pair.outer.len(),
        h: pair.outer.mean_edge_length(),
        inner_mesh: pair.inner.stats(),
        outer_mesh: pair.outer.stats(),
        values,
        condition: sol.condition,
        relative_error: None,
    })
}

/// Least-squares slope of log e against log h.
fn log_slope(h: &[f64], e: &[f64]) -> f64 {
    let x: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Exact target values when both surfaces are spheres about the origin and
/// every monomial is a pure power of z.
fn sphere_oracle(setup: &ConvergenceSetup) -> Result<Option<Vec<f64>>, ConvergenceError> {
    let (Some(ri), Some(ro)) = (setup.inner.sphere_radius(), setup.outer.sphere_radius()) else {
        return Ok(None);
    };
    let zonal_only =
        |ms: &[bem3::Monomial]| ms.iter().all(|m| m.powers[0] == 0 && m.powers[1] == 0);
    if !zonal_only(&setup.data.inner) || !zonal_only(&setup.data.outer) {
        return Ok(None);
    }
    let n = Dimension::new(3).expect("3 is a valid dimension");
    let prob = SphereProblem::new(n, ri, ro)?;
    let mut data = ZonalDataFamily::new();
    for (l, p) in project_powers_of_z(&setup.data.inner, ri) {
        data = data.with_inner(l, p);
    }
    for (l, p) in project_powers_of_z(&setup.data.outer, ro) {
        data = data.with_outer(l, p);
    }
    let sol = spectral::solve_densities(&prob, &data, setup.eps)?;
    setup
        .targets
        .iter()
        .map(|x| {
            spectral::eval_solution(&sol, &prob, &Point::new(vec![x.x, x.y, x.z]), setup.frame)
        })
        .collect::<Result<Vec<_>, _>>()
        .map(Some)
        .map_err(ConvergenceError::from)
}

/// Legendre coefficients of Σ c_k(ε) z^k restricted to the sphere of radius
/// `radius`, where z = radius · t.
fn project_powers_of_z(monomials: &[bem3::Monomial], radius: f64) -> Vec<(usize, EpsPoly)> {
    let n = Dimension::new(3).expect("3 is a valid dimension");
    let max_k = monomials
        .iter()
        .map(|m| m.powers[2] as usize)
        .max()
        .unwrap_or(0);
    let rule = GaussLegendre::new(max_k + 2);
    let mut out = Vec::new();
    for l in 0..=max_k {
        let mut coeffs: Vec<f64> = Vec::new();
        for m in monomials {
            let k = m.powers[2] as i32;
            let w = (2 * l + 1) as f64 / 2.0
                * rule.integrate(-1.0, 1.0, |t| t.powi(k) * zonal(n, l, t))
                * radius.powi(k);
            if w.abs() < 1e-14 {
                continue;
            }
            if coeffs.len() < m.coeff.coeffs().len() {
                coeffs.resize(m.coeff.coeffs().len(), 0.0);
            }
            for (acc, c) in coeffs.iter_mut().zip(m.coeff.coeffs()) {
                *acc += w * c;
            }
        }
        let p = EpsPoly::new(coeffs);
        if !p.is_zero() {
            out.push((l, p));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_projection_of_powers() {
        // z² = (1 + 2 P_2) / 3 on the unit sphere; on radius 2 scale by 4
        let m = vec![bem3::Monomial::new([0, 0, 2], EpsPoly::constant(1.0))];
        let p = project_powers_of_z(&m, 2.0);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].0, 0);
        assert!((p[0].1.eval(0.3) - 4.0 / 3.0).abs() < 1e-14);
        assert_eq!(p[1].0, 2);
        assert!((p[1].1.eval(0.3) - 8.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn polyhedra_refine_in_place() {
        let base = mesh3::icosphere(1.0, 0).unwrap();
        let spec = SurfaceSpec::Polyhedron(base.clone());
        assert_eq!(spec.build(0).unwrap(), base);
        assert_eq!(spec.build(2).unwrap().len(), 320);
        assert!((spec.build(2).unwrap().total_area() - base.total_area()).abs() < 1e-12);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let h = [0.4, 0.2, 0.1];
        let e: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        assert!((log_slope(&h, &e) - 2.0).abs() < 1e-12);
    }

    fn sphere_setup(data: CartesianDataFamily, eps: f64) -> ConvergenceSetup {
        ConvergenceSetup {
            inner: SurfaceSpec::Sphere { radius: 1.0 },
            outer: SurfaceSpec::Sphere { radius: 2.0 },
            data,
            eps,
            frame: Frame::Macroscopic,
            targets: vec![Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.6, 0.0, -0.8)],
            options: BemOptions {
                clearance_factor: 0.5,
                ..BemOptions::default()
            },
        }
    }

    #[test]
    fn coarse_sphere_study_uses_the_oracle() {
        let r = convergence_study(&sphere_setup(CartesianDataFamily::hole_value_eps(), 0.3), 1)
            .unwrap();
        assert_eq!(r.reference, Reference::Oracle);
        let errs: Vec<f64> = r.levels.iter().map(|l| l.relative_error.unwrap()).collect();
        assert!(errs[2] < errs[1] && errs[1] < errs[0], "{errs:?}");
        assert!(r.observed_order > 1.0, "{r:?}");
    }

    #[test]
    fn reflected_hole_with_odd_data() {
        // z on the hole: for ε < 0 the physical boundary value flips sign
        let data = CartesianDataFamily::new().with_inner([0, 0, 1], EpsPoly::constant(1.0));
        let r = convergence_study(&sphere_setup(data, -0.3), 1).unwrap();
        let errs: Vec<f64> = r.levels.iter().map(|l| l.relative_error.unwrap()).collect();
        assert!(errs[2] < errs[0] && errs[2] < 0.05, "{errs:?}");
    }

    #[test]
    fn ellipsoid_falls_back_to_richardson() {
        let mut setup = sphere_setup(CartesianDataFamily::hole_value_eps(), 0.3);
        setup.inner = SurfaceSpec::Ellipsoid {
            a: 1.2,
            b: 1.0,
            c: 0.8,
        };
        let r = convergence_study(&setup, 1).unwrap();
        assert_eq!(r.reference, Reference::Richardson);
        assert_eq!(r.partial_orders.len(), 2);
        assert!(r.observed_order.is_finite() && r.order_uncertainty >= 0.0);
        assert!(r.levels.iter().all(|l| l.relative_error.is_none()));
    }
}
