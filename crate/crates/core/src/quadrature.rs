//! One-dimensional Gauss–Legendre rules and an adaptive bisection driver.

use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error(
        "adaptive quadrature exceeded its budget of {budget} panels (best estimate {estimate:e})"
    )]
    BudgetExceeded { budget: usize, estimate: f64 },
    #[error("integrand returned a non-finite value at t = {at}")]
    NonFinite { at: f64 },
}

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `m`-point rule by Newton iteration on P_m.
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    /// Applies the rule on [a, b].
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

fn legendre_with_derivative(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if m == 0 {
        return (1.0, 0.0);
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Adaptive composite Gauss–Legendre integration by interval bisection.
///
/// A panel is accepted once splitting it changes its contribution by less
/// than `rel_tol` times the running estimate of the whole integral.
#[derive(Clone, Debug)]
pub struct Adaptive {
    rule: GaussLegendre,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Adaptive {
    fn default() -> Self {
        Adaptive {
            rule: GaussLegendre::new(16),
            rel_tol: 1e-12,
            max_panels: 4096,
        }
    }
}

impl Adaptive {
    pub fn with_tolerance(rel_tol: f64) -> Self {
        Adaptive {
            rel_tol,
            ..Adaptive::default()
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        mut f: F,
    ) -> Result<f64, QuadratureError> {
        let mut checked = |t: f64| -> Result<f64, QuadratureError> {
            let v = f(t);
            if v.is_finite() {
                Ok(v)
            } else {
                Err(QuadratureError::NonFinite { at: t })
            }
        };
        let mut panel = |lo: f64, hi: f64| -> Result<f64, QuadratureError> {
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (lo + hi);
            let mut s = 0.0;
            for (x, w) in self.rule.nodes.iter().zip(&self.rule.weights) {
                s += w * checked(mid + half * x)?;
            }
            Ok(s * half)
        };

        let whole = panel(a, b)?;
        let mut stack = vec![(a, b, whole)];
        let mut accepted = 0.0;
        let mut estimate = whole;
        let mut panels = 1usize;
        while let Some((lo, hi, coarse)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = panel(lo, mid)?;
            let right = panel(mid, hi)?;
            panels += 2;
            let fine = left + right;
            estimate += fine - coarse;
            let scale = estimate.abs().max(f64::MIN_POSITIVE);
            if (fine - coarse).abs() <= self.rel_tol * scale {
                accepted += fine;
            } else {
                if panels > self.max_panels {
                    return Err(QuadratureError::BudgetExceeded {
                        budget: self.max_panels,
                        estimate,
                    });
                }
                stack.push((mid, hi, right));
                stack.push((lo, mid, left));
            }
        }
        Ok(accepted)
    }
}

const A1: f64 = 0.059_715_871_789_769_82;
const B1: f64 = 0.470_142_064_105_115_1;
const A2: f64 = 0.797_426_985_353_087_3;
const B2: f64 = 0.101_286_507_323_456_3;
const W0: f64 = 0.225;
const W1: f64 = 0.132_394_152_788_506_2;
const W2: f64 = 0.125_939_180_544_827_1;
/// Seven-point rule on triangles, exact for polynomials of degree ≤ 5.
/// Barycentric nodes; the weights sum to one, so multiply by the area.
pub const TRIANGLE7: [([f64; 3], f64); 7] = [
    ([1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0], W0),
    ([A1, B1, B1], W1),
    ([B1, A1, B1], W1),
    ([B1, B1, A1], W1),
    ([A2, B2, B2], W2),
    ([B2, A2, B2], W2),
    ([B2, B2, A2], W2),
];
