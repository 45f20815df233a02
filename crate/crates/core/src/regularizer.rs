use serde::{Deserialize, Serialize};

use crate::linalg::norm_sq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RegKind {
    #[default]
    None,
    L1,
    #[serde(rename = "l2")]
    SquaredL2,
}

/// 𝓡(x): nothing, λ‖x‖₁, or (λ/2)‖x‖².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Regularizer {
    pub kind: RegKind,
    pub lambda: f64,
}

impl Default for Regularizer {
    fn default() -> Self {
        Self::none()
    }
}

impl Regularizer {
    pub fn new(kind: RegKind, lambda: f64) -> Self {
        Self { kind, lambda }
    }

    pub fn none() -> Self {
        Self {
            kind: RegKind::None,
            lambda: 0.0,
        }
    }

    pub fn l1(lambda: f64) -> Self {
        Self::new(RegKind::L1, lambda)
    }

    pub fn squared_l2(lambda: f64) -> Self {
        Self::new(RegKind::SquaredL2, lambda)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        match self.kind {
            RegKind::None => 0.0,
            RegKind::L1 => self.lambda * x.iter().map(|v| v.abs()).sum::<f64>(),
            RegKind::SquaredL2 => 0.5 * self.lambda * norm_sq(x),
        }
    }

    /// λ for L1, 0 otherwise.
    pub fn l1_weight(&self) -> f64 {
        match self.kind {
            RegKind::L1 => self.lambda,
            _ => 0.0,
        }
    }

    /// λ for squared L2, 0 otherwise.
    pub fn l2_weight(&self) -> f64 {
        match self.kind {
            RegKind::SquaredL2 => self.lambda,
            _ => 0.0,
        }
    }
}
