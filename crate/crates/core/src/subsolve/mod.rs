//! Solvers for the update subproblem
//!
//! ```text
//! argmin_x  f(x; x̄) + (1/τ)·D_h(x, x̄)
//! ```
//!
//! The model data arrives in a [`SubproblemSpec`]: either a linear part
//! (additive-composite models) or a set of affine rows under an absolute
//! value (prox-linear models), plus a regularizer and an optional box floor.

mod oracle;
mod pdhg;
mod poisson;
mod quartic;

use thiserror::Error;

use crate::kernel::{KernelError, KernelKind, KernelSpec};
use crate::linalg::dot;
use crate::model::SubproblemKind;
use crate::regularizer::{RegKind, Regularizer};

pub use oracle::{oracle_minimize, OracleSolution, ORACLE_MAX_DIM};
pub use pdhg::{pdhg_solve, pdhg_solve_warm, DualScaling, PdhgConfig, PdhgOutcome};
pub use poisson::poisson_step;
pub use quartic::{bpg_step_quartic, quartic_radial_scale};
pub(crate) use quartic::radial_solve;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SubproblemError {
    #[error("misconfigured subproblem: {0}")]
    Misconfigured(String),
    #[error("step size tau = {tau} too large: denominator at coordinate {index} is {denominator}")]
    StepTooLarge {
        tau: f64,
        index: usize,
        denominator: f64,
    },
    #[error("inner solver diverged at iteration {iteration}")]
    Diverged { iteration: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("oracle failed: {0}")]
    OracleFailed(String),
}

/// Piecewise-linear model data: `weight · Σ_i |offsets_i + ⟨rows_i, x − center⟩|`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRows {
    pub rows: Vec<Vec<f64>>,
    pub offsets: Vec<f64>,
    pub weight: f64,
}

impl AffineRows {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn value(&self, x: &[f64], center: &[f64]) -> f64 {
        let s: f64 = self
            .rows
            .iter()
            .zip(&self.offsets)
            .map(|(row, c)| {
                let lin: f64 = row.iter().zip(x).zip(center).map(|((k, xi), ci)| k * (xi - ci)).sum();
                (c + lin).abs()
            })
            .sum();
        self.weight * s
    }
}

/// One update subproblem in solver-agnostic form.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSpec {
    pub center: Vec<f64>,
    pub tau: f64,
    pub kernel: KernelSpec,
    /// ∇f₁(center) for additive-composite models.
    pub linear_part: Option<Vec<f64>>,
    pub affine: Option<AffineRows>,
    pub reg: Regularizer,
    /// ε of the box `x ≥ ε`.
    pub box_floor: Option<f64>,
}

impl SubproblemSpec {
    pub fn dimension(&self) -> usize {
        self.center.len()
    }

    pub fn kind(&self) -> Result<SubproblemKind, SubproblemError> {
        match (self.kernel.kind, &self.linear_part, &self.affine) {
            (KernelKind::QuarticPlusQuadratic, Some(_), None) => Ok(SubproblemKind::ClosedFormQuartic),
            (KernelKind::Burg, Some(_), None) => Ok(SubproblemKind::ClosedFormBurg),
            (KernelKind::Euclidean, Some(_), None) => Ok(SubproblemKind::ClosedFormEuclidean),
            (KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic, None, Some(_)) => {
                Ok(SubproblemKind::PiecewiseLinearPdhg)
            }
            _ => Err(SubproblemError::Misconfigured(format!(
                "no solver for kernel {:?} with linear part {} and affine rows {}",
                self.kernel.kind,
                self.linear_part.is_some(),
                self.affine.is_some()
            ))),
        }
    }

    pub(crate) fn validate(&self) -> Result<(), SubproblemError> {
        let n = self.dimension();
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(SubproblemError::Misconfigured(format!("tau must be positive, got {}", self.tau)));
        }
        if self.kernel.dimension != n {
            return Err(SubproblemError::Misconfigured("kernel dimension differs from center".into()));
        }
        if let Some(g) = &self.linear_part {
            if g.len() != n {
                return Err(SubproblemError::Misconfigured("linear part has wrong length".into()));
            }
        }
        if let Some(a) = &self.affine {
            if a.offsets.len() != a.rows.len() || a.rows.iter().any(|r| r.len() != n) {
                return Err(SubproblemError::Misconfigured("affine rows have inconsistent shape".into()));
            }
        }
        if !(self.reg.lambda >= 0.0) {
            return Err(SubproblemError::Misconfigured("lambda must be nonnegative".into()));
        }
        self.kernel.check_interior(&self.center)?;
        Ok(())
    }

    /// Subproblem objective, up to the constant f₁(center):
    /// ⟨g, x − x̄⟩ + weight·Σ|…| + 𝓡(x) + (1/τ)D_h(x, x̄), and +∞ off the box.
    pub fn objective(&self, x: &[f64]) -> Result<f64, SubproblemError> {
        if let Some(floor) = self.box_floor {
            if x.iter().any(|&v| !(v >= floor)) {
                return Ok(f64::INFINITY);
            }
        }
        let mut val = self.reg.value(x) + self.kernel.bregman(x, &self.center)? / self.tau;
        if let Some(g) = &self.linear_part {
            val += dot(g, x) - dot(g, &self.center);
        }
        if let Some(a) = &self.affine {
            val += a.value(x, &self.center);
        }
        Ok(val)
    }
}

/// Elementwise soft-thresholding `sign(v)·max(|v| − γ, 0)`.
pub fn prox_l1(v: &[f64], gamma: f64) -> Vec<f64> {
    v.iter().map(|&vi| soft(vi, gamma)).collect()
}

#[inline]
pub(crate) fn soft(v: f64, gamma: f64) -> f64 {
    if v > gamma {
        v - gamma
    } else if v < -gamma {
        v + gamma
    } else {
        0.0
    }
}

/// Proximal gradient step `prox_{τ𝓡}(x̄ − τg)` for the Euclidean kernel.
pub fn euclidean_step(spec: &SubproblemSpec) -> Result<Vec<f64>, SubproblemError> {
    if spec.kernel.kind != KernelKind::Euclidean || spec.affine.is_some() || spec.box_floor.is_some() {
        return Err(SubproblemError::Misconfigured(
            "Euclidean step needs the Euclidean kernel, a linear part and no box".into(),
        ));
    }
    let g = spec
        .linear_part
        .as_ref()
        .ok_or_else(|| SubproblemError::Misconfigured("Euclidean step needs a linear part".into()))?;
    spec.validate()?;
    let tau = spec.tau;
    let lambda = spec.reg.lambda;
    Ok(spec
        .center
        .iter()
        .zip(g)
        .map(|(c, gi)| {
            let v = c - tau * gi;
            match spec.reg.kind {
                RegKind::None => v,
                RegKind::L1 => soft(v, tau * lambda),
                RegKind::SquaredL2 => v / (1.0 + tau * lambda),
            }
        })
        .collect())
}

/// Result of one subproblem solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemSolution {
    pub x: Vec<f64>,
    /// Achieved inner residual; exactly 0 for closed forms.
    pub residual: f64,
    /// Final dual iterate of PDHG, reusable as a warm start.
    pub dual: Option<Vec<f64>>,
    pub inner_iterations: usize,
}

/// Dispatches on the subproblem shape.
pub fn solve(
    spec: &SubproblemSpec,
    inner: &PdhgConfig,
    warm_dual: Option<&[f64]>,
) -> Result<SubproblemSolution, SubproblemError> {
    match spec.kind()? {
        SubproblemKind::ClosedFormQuartic => Ok(SubproblemSolution {
            x: bpg_step_quartic(spec)?,
            residual: 0.0,
            dual: None,
            inner_iterations: 0,
        }),
        SubproblemKind::ClosedFormBurg => Ok(SubproblemSolution {
            x: poisson_step(spec)?,
            residual: 0.0,
            dual: None,
            inner_iterations: 0,
        }),
        SubproblemKind::ClosedFormEuclidean => Ok(SubproblemSolution {
            x: euclidean_step(spec)?,
            residual: 0.0,
            dual: None,
            inner_iterations: 0,
        }),
        SubproblemKind::PiecewiseLinearPdhg => {
            let out = pdhg_solve_warm(spec, inner, warm_dual)?;
            Ok(SubproblemSolution {
                x: out.x,
                residual: out.residual,
                dual: Some(out.dual),
                inner_iterations: out.iterations,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(prox_l1(&[3.0], 1.0), vec![2.0]);
        assert_eq!(prox_l1(&[0.5], 1.0), vec![0.0]);
        assert_eq!(prox_l1(&[-3.0], 1.0), vec![-2.0]);
        assert_eq!(prox_l1(&[1.5, -0.2, 7.0], 0.0), vec![1.5, -0.2, 7.0]);
    }

    #[test]
    fn euclidean_step_is_prox_gradient() {
        let mut spec = SubproblemSpec {
            center: vec![1.0, -2.0],
            tau: 0.5,
            kernel: KernelSpec::euclidean(2),
            linear_part: Some(vec![1.0, 1.0]),
            affine: None,
            reg: Regularizer::none(),
            box_floor: None,
        };
        assert_eq!(euclidean_step(&spec).unwrap(), vec![0.5, -2.5]);
        spec.reg = Regularizer::l1(1.0);
        assert_eq!(euclidean_step(&spec).unwrap(), vec![0.0, -2.0]);
        spec.reg = Regularizer::squared_l2(2.0);
        assert_eq!(euclidean_step(&spec).unwrap(), vec![0.25, -1.25]);
    }

    #[test]
    fn kind_detection() {
        let base = SubproblemSpec {
            center: vec![1.0],
            tau: 0.1,
            kernel: KernelSpec::quartic(1),
            linear_part: Some(vec![0.0]),
            affine: None,
            reg: Regularizer::none(),
            box_floor: None,
        };
        assert_eq!(base.kind().unwrap(), SubproblemKind::ClosedFormQuartic);
        let mut eu = base.clone();
        eu.kernel = KernelSpec::euclidean(1);
        assert_eq!(eu.kind().unwrap(), SubproblemKind::ClosedFormEuclidean);
        let mut bad = base.clone();
        bad.kernel = KernelSpec::boltzmann_shannon(1);
        assert!(matches!(bad.kind(), Err(SubproblemError::Misconfigured(_))));
        assert!(matches!(bpg_step_quartic(&bad), Err(SubproblemError::Misconfigured(_))));
    }
}
