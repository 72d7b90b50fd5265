//! Polynomials in the perturbation parameter ε.

use serde::{Deserialize, Serialize};

/// `c[0] + c[1] ε + c[2] ε² + ...`
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EpsPoly(Vec<f64>);

impl EpsPoly {
    pub fn new(coeffs: Vec<f64>) -> Self {
        let mut p = EpsPoly(coeffs);
        p.trim();
        p
    }

    pub fn constant(c: f64) -> Self {
        EpsPoly::new(vec![c])
    }

    /// The identity map ε ↦ ε.
    pub fn identity() -> Self {
        EpsPoly::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn eval(&self, eps: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * eps + c)
    }

    /// Parity class of the polynomial: `Some(1)` when even, `Some(-1)` when
    /// odd, `None` when it mixes both. The zero polynomial is both; it
    /// reports `Some(0)`.
    pub fn parity(&self) -> Option<i8> {
        let has_even = self.0.iter().step_by(2).any(|&c| c != 0.0);
        let has_odd = self.0.iter().skip(1).step_by(2).any(|&c| c != 0.0);
        match (has_even, has_odd) {
            (false, false) => Some(0),
            (true, false) => Some(1),
            (false, true) => Some(-1),
            (true, true) => None,
        }
    }

    fn trim(&mut self) {
        while self.0.last() == Some(&0.0) {
            self.0.pop();
        }
    }
}
