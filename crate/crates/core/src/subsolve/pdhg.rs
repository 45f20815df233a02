//! Primal-dual hybrid gradient for piecewise-linear model subproblems
//!
//! ```text
//! min_x  w·‖K(x − x̄) + c‖₁ + 𝓡(x) + (1/τ)·D_h(x, x̄)
//! ```
//!
//! written as the saddle problem `min_x max_{‖y‖∞ ≤ w} G(x) + ⟨Kx, y⟩ −
//! F*(y)` with `G = 𝓡 + (1/τ)D_h(·, x̄)` and `F*(y) = −⟨c − Kx̄, y⟩` on the
//! box. Iteration (θ = 1):
//!
//! ```text
//! y⁺ = Π_box(y + Σ_d·(K x̃ + c − Kx̄))
//! x⁺ = prox_{σ_p G}(x − σ_p·Kᵀy⁺)
//! x̃  = 2x⁺ − x
//! ```
//!
//! `Σ_d` is either the scalar σ_d or a fixed diagonal with entries
//! proportional to 1/‖K_i‖². The latter keeps nearly vanishing rows from
//! crawling across the dual box; the primal step stays scalar so the quartic
//! prox remains radial.

use serde::{Deserialize, Serialize};

use crate::kernel::KernelKind;
use crate::linalg::{all_finite, dot, norm};
use crate::regularizer::RegKind;

use super::{radial_solve, soft, SubproblemError, SubproblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PdhgConfig {
    /// Stop once the primal plus dual residual drops below this.
    pub tol: f64,
    pub max_iters: usize,
    /// Power iterations used to estimate ‖K‖.
    pub power_iters: usize,
    /// σ_p·σ_d·‖K‖² = step_scale².
    pub step_scale: f64,
    /// σ_p / σ_d.
    pub primal_weight: f64,
    /// Keep the per-iteration residuals in the outcome.
    pub record_history: bool,
    pub dual_scaling: DualScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualScaling {
    /// σ_p = σ_d = step_scale/‖K‖ (up to primal_weight).
    Scalar,
    /// σ_d,i ∝ 1/‖K_i‖², with σ_p chosen so that σ_p·‖Σ_d^{1/2}K‖² = step_scale².
    #[default]
    Rows,
}

impl Default for PdhgConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_iters: 2000,
            power_iters: 30,
            step_scale: 0.95,
            primal_weight: 1e-3,
            record_history: false,
            dual_scaling: DualScaling::Rows,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdhgOutcome {
    pub x: Vec<f64>,
    pub dual: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
}

/// Rows with ‖K_i‖² at or below this are treated as zero.
const ZERO_ROW: f64 = 1e-280;

struct Operator<'a> {
    rows: &'a [Vec<f64>],
    n: usize,
}

impl Operator<'_> {
    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| dot(r, x)).collect()
    }

    fn apply_t(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (r, yi) in self.rows.iter().zip(y) {
            for (o, k) in out.iter_mut().zip(r) {
                *o += yi * k;
            }
        }
        out
    }

    /// Power iteration on KᵀK from a fixed nonsymmetric start vector.
    fn norm_estimate(&self, iters: usize) -> f64 {
        let mut v: Vec<f64> = (0..self.n).map(|i| 1.0 + 0.1 * i as f64).collect();
        let mut est = 0.0;
        for _ in 0..iters.max(1) {
            let nv = norm(&v);
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|a| *a /= nv);
            let kv = self.apply(&v);
            est = norm(&kv);
            v = self.apply_t(&kv);
        }
        est
    }
}

/// prox_{σG}(v) with G(x) = 𝓡(x) + (1/τ)D_h(x, x̄).
fn prox_g(spec: &SubproblemSpec, grad_center: &[f64], sigma: f64, v: &[f64]) -> Vec<f64> {
    let tau = spec.tau;
    let lambda = spec.reg.lambda;
    match spec.kernel.kind {
        KernelKind::Euclidean => {
            let alpha = 1.0 / tau + 1.0 / sigma;
            spec.center
                .iter()
                .zip(v)
                .map(|(c, vi)| {
                    let m = (c / tau + vi / sigma) / alpha;
                    match spec.reg.kind {
                        RegKind::None => m,
                        RegKind::L1 => soft(m, lambda / alpha),
                        RegKind::SquaredL2 => alpha * m / (alpha + lambda),
                    }
                })
                .collect()
        }
        _ => {
            // (‖x‖² + 1 + τ/σ)x + τ∂𝓡(x) ∋ ∇h(x̄) + (τ/σ)v
            let a = 1.0 + tau / sigma;
            let q: Vec<f64> = grad_center
                .iter()
                .zip(v)
                .map(|(g, vi)| g + tau / sigma * vi)
                .collect();
            match spec.reg.kind {
                RegKind::None => radial_solve(&q, a),
                RegKind::L1 => {
                    let p: Vec<f64> = q.iter().map(|&qi| soft(qi, tau * lambda)).collect();
                    radial_solve(&p, a)
                }
                RegKind::SquaredL2 => radial_solve(&q, a + tau * lambda),
            }
        }
    }
}

pub fn pdhg_solve(spec: &SubproblemSpec, cfg: &PdhgConfig) -> Result<PdhgOutcome, SubproblemError> {
    pdhg_solve_warm(spec, cfg, None)
}

/// PDHG started from `x = x̄` and the given dual iterate (zero when absent or
/// of the wrong length).
pub fn pdhg_solve_warm(
    spec: &SubproblemSpec,
    cfg: &PdhgConfig,
    warm_dual: Option<&[f64]>,
) -> Result<PdhgOutcome, SubproblemError> {
    let affine = spec.affine.as_ref().ok_or_else(|| {
        SubproblemError::Misconfigured("PDHG needs affine rows".into())
    })?;
    if !matches!(
        spec.kernel.kind,
        KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic
    ) {
        return Err(SubproblemError::Misconfigured(format!(
            "PDHG supports the Euclidean and quartic kernels, got {:?}",
            spec.kernel.kind
        )));
    }
    if spec.linear_part.is_some() || spec.box_floor.is_some() {
        return Err(SubproblemError::Misconfigured(
            "PDHG subproblems take neither a linear part nor a box".into(),
        ));
    }
    spec.validate()?;

    let n = spec.dimension();
    let m = affine.len();
    let w = affine.weight;
    let op = Operator { rows: &affine.rows, n };
    let grad_center = spec.kernel.grad(&spec.center)?;

    // shifted offsets: K x + shift = c + K(x − x̄)
    let kc = op.apply(&spec.center);
    let shift: Vec<f64> = affine.offsets.iter().zip(&kc).map(|(c, k)| c - k).collect();

    let r = cfg.primal_weight.sqrt();
    let (sigma_p, sigma_d) = match cfg.dual_scaling {
        DualScaling::Scalar => {
            let knorm = op.norm_estimate(cfg.power_iters) * 1.01;
            if knorm > 0.0 {
                let base = cfg.step_scale / knorm;
                (base * r, vec![base / r; m])
            } else {
                (spec.tau, vec![1.0; m])
            }
        }
        DualScaling::Rows => {
            let inv: Vec<f64> = affine
                .rows
                .iter()
                .map(|row| {
                    let s = dot(row, row);
                    if s > ZERO_ROW { 1.0 / s } else { 0.0 }
                })
                .collect();
            let scaled: Vec<Vec<f64>> = affine
                .rows
                .iter()
                .zip(&inv)
                .map(|(row, d)| row.iter().map(|k| k * d.sqrt()).collect())
                .collect();
            let knorm = Operator { rows: &scaled, n }.norm_estimate(cfg.power_iters) * 1.01;
            if knorm > 0.0 {
                let c = cfg.step_scale / (r * knorm);
                // zero rows get an infinite step, i.e. exact maximization
                let sd = inv.iter().map(|&d| if d > 0.0 { c * d } else { f64::INFINITY }).collect();
                (cfg.step_scale * r / knorm, sd)
            } else {
                (spec.tau, vec![f64::INFINITY; m])
            }
        }
    };

    let mut x = spec.center.clone();
    let mut x_bar = x.clone();
    let mut y = match warm_dual {
        Some(d) if d.len() == m => d.iter().map(|v| v.clamp(-w, w)).collect(),
        _ => vec![0.0; m],
    };
    let mut history = Vec::new();
    let mut residual = f64::INFINITY;
    let mut iterations = 0;

    for it in 1..=cfg.max_iters.max(1) {
        iterations = it;
        let kxb = op.apply(&x_bar);
        let y_new: Vec<f64> = y
            .iter()
            .zip(&kxb)
            .zip(&shift)
            .zip(&sigma_d)
            .map(|(((&yi, k), s), &sd)| {
                let v = k + s;
                if sd.is_finite() {
                    (yi + sd * v).clamp(-w, w)
                } else if v > 0.0 {
                    w
                } else if v < 0.0 {
                    -w
                } else {
                    yi
                }
            })
            .collect();
        let kty = op.apply_t(&y_new);
        let v: Vec<f64> = x.iter().zip(&kty).map(|(xi, k)| xi - sigma_p * k).collect();
        let x_new = prox_g(spec, &grad_center, sigma_p, &v);
        if !all_finite(&x_new) || !all_finite(&y_new) {
            return Err(SubproblemError::Diverged { iteration: it });
        }

        // (x − x⁺)/σ_p ∈ ∂G(x⁺) + Kᵀy⁺ and
        // (y − y⁺)/σ_d + K(x̃ − x⁺) ∈ ∂F*(y⁺) − Kx⁺
        let primal: f64 = x
            .iter()
            .zip(&x_new)
            .map(|(a, b)| ((a - b) / sigma_p).powi(2))
            .sum::<f64>()
            .sqrt();
        let dx: Vec<f64> = x_bar.iter().zip(&x_new).map(|(a, b)| a - b).collect();
        let kdx = op.apply(&dx);
        let dual: f64 = y
            .iter()
            .zip(&y_new)
            .zip(&kdx)
            .zip(&sigma_d)
            .map(|(((a, b), k), sd)| ((a - b) / sd + k).powi(2))
            .sum::<f64>()
            .sqrt();
        residual = primal + dual;
        if cfg.record_history {
            history.push(residual);
        }

        x_bar = x_new.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
        x = x_new;
        y = y_new;
        if residual <= cfg.tol {
            break;
        }
    }

    Ok(PdhgOutcome {
        x,
        dual: y,
        residual,
        iterations,
        history,
    })
}
