//! Model functions and the two-sided model approximation bound.
//!
//! A [`ModelProblem`] couples an objective `f` with a family of models
//! `f(·; x̄)` and a kernel `h` such that
//!
//! ```text
//! −L_lower·D_h(x, x̄) ≤ f(x) − f(x; x̄) ≤ L̄·D_h(x, x̄)
//! ```
//!
//! for every `x` in the domain and every center `x̄` in `int dom h`. The
//! samplers in this module can only falsify that bound, never prove it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::kernel::{KernelError, KernelSpec};
use crate::linalg::{norm, norm_sq};
use crate::subsolve::SubproblemSpec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("coordinate {index} = {value} violates the constraint x >= {floor}")]
    Infeasible { index: usize, value: f64, floor: f64 },
    #[error("expected a vector of length {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("could not draw a feasible sample after {0} attempts")]
    Sampling(usize),
}

/// Closed domain of the objective, as seen by samplers and the solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Whole,
    /// Coordinatewise box `x ≥ floor`.
    Floor(f64),
}

impl Domain {
    pub fn check(&self, x: &[f64]) -> Result<(), ModelError> {
        if let Domain::Floor(floor) = *self {
            for (index, &value) in x.iter().enumerate() {
                if !(value >= floor) {
                    return Err(ModelError::Infeasible { index, value, floor });
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SubproblemKind {
    ClosedFormQuartic,
    ClosedFormBurg,
    ClosedFormEuclidean,
    PiecewiseLinearPdhg,
}

pub trait ModelProblem {
    fn dimension(&self) -> usize;

    fn kernel(&self) -> KernelSpec;

    /// L̄ in the upper model bound.
    fn map_upper(&self) -> f64;

    /// L_lower in the lower model bound.
    fn map_lower(&self) -> f64;

    fn domain(&self) -> Domain {
        Domain::Whole
    }

    fn objective(&self, x: &[f64]) -> Result<f64, ModelError>;

    /// f(x; center).
    fn model(&self, x: &[f64], center: &[f64]) -> Result<f64, ModelError>;

    /// An element of ∂_center f(x; center); `None` for families where the
    /// model is not differentiable in its center.
    fn center_subgradient(
        &self,
        _x: &[f64],
        _center: &[f64],
    ) -> Option<Result<Vec<f64>, ModelError>> {
        None
    }

    /// Data of `argmin_x f(x; center) + (1/tau)·D_h(x, center)`.
    fn subproblem(&self, center: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError>;

    fn subproblem_kind(&self) -> SubproblemKind;
}

pub fn model_value<P: ModelProblem + ?Sized>(
    p: &P,
    x: &[f64],
    center: &[f64],
) -> Result<f64, ModelError> {
    p.model(x, center)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapResidualReport {
    pub samples: usize,
    /// max over samples of max(0, f − f(·;x̄) − L̄·D) / (1 + |f|)
    pub worst_upper_violation: f64,
    /// max over samples of max(0, −L_lower·D − (f − f(·;x̄))) / (1 + |f|)
    pub worst_lower_violation: f64,
}

impl MapResidualReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.worst_upper_violation <= tol && self.worst_lower_violation <= tol
    }
}

const MAX_REDRAWS: usize = 100;

/// Uniform sample from the ball of `radius` around `origin`.
fn sample_ball(rng: &mut ChaCha8Rng, origin: &[f64], radius: f64) -> Vec<f64> {
    let n = origin.len();
    let mut dir: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let len = norm(&dir).max(f64::MIN_POSITIVE);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / n as f64);
    for (d, o) in dir.iter_mut().zip(origin) {
        *d = o + r * *d / len;
    }
    dir
}

/// Draws a point in `domain ∩ ball(radius)` whose kernel interior check
/// passes. Box domains get the ball shifted so that it sits inside the box.
pub fn sample_point<P: ModelProblem + ?Sized>(
    p: &P,
    rng: &mut ChaCha8Rng,
    radius: f64,
) -> Result<Vec<f64>, ModelError> {
    let n = p.dimension();
    let origin = match p.domain() {
        Domain::Whole => vec![0.0; n],
        Domain::Floor(floor) => vec![floor + radius; n],
    };
    let kernel = p.kernel();
    for _ in 0..MAX_REDRAWS {
        let x = sample_ball(rng, &origin, radius);
        if p.domain().check(&x).is_ok() && kernel.check_interior(&x).is_ok() {
            return Ok(x);
        }
    }
    Err(ModelError::Sampling(MAX_REDRAWS))
}

/// Samples `n_samples` pairs and reports the worst violations of the model
/// bound using the problem's own constants.
pub fn map_residual_check<P: ModelProblem + ?Sized>(
    p: &P,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<MapResidualReport, ModelError> {
    map_residual_check_with(p, p.map_upper(), p.map_lower(), n_samples, radius, seed)
}

/// Like [`map_residual_check`] but with caller-supplied constants. The sample
/// stream only depends on `seed`, so reports for different constants are
/// directly comparable.
pub fn map_residual_check_with<P: ModelProblem + ?Sized>(
    p: &P,
    upper: f64,
    lower: f64,
    n_samples: usize,
    radius: f64,
    seed: u64,
) -> Result<MapResidualReport, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let kernel = p.kernel();
    let mut report = MapResidualReport {
        samples: n_samples,
        worst_upper_violation: 0.0,
        worst_lower_violation: 0.0,
    };
    for _ in 0..n_samples {
        let x = sample_point(p, &mut rng, radius)?;
        let center = sample_point(p, &mut rng, radius)?;
        let f = p.objective(&x)?;
        let gap = f - p.model(&x, &center)?;
        let d = kernel.bregman(&x, &center)?;
        let scale = 1.0 + f.abs();
        let up = (gap - upper * d).max(0.0) / scale;
        let low = (-lower * d - gap).max(0.0) / scale;
        report.worst_upper_violation = report.worst_upper_violation.max(up);
        report.worst_lower_violation = report.worst_lower_violation.max(low);
    }
    Ok(report)
}

/// g(x) = ‖x‖⁴ − 1 for the running example f = |g|.
fn running_inner(x: &[f64]) -> f64 {
    let s = norm_sq(x);
    s * s - 1.0
}

/// f(x) = |‖x‖⁴ − 1|.
pub fn running_example_objective(x: &[f64]) -> f64 {
    running_inner(x).abs()
}

/// f(x; c) = |g(c) + ⟨∇g(c), x − c⟩| with ∇g(c) = 4‖c‖²c.
pub fn running_example_model(x: &[f64], center: &[f64]) -> f64 {
    let s = norm_sq(center);
    let lin: f64 = x
        .iter()
        .zip(center)
        .map(|(xi, ci)| 4.0 * s * ci * (xi - ci))
        .sum();
    (running_inner(center) + lin).abs()
}

/// ω_c(t) = 24‖c‖²t² + 8t⁴ with t = ‖x − c‖.
pub fn growth_bound_running_example(x: &[f64], center: &[f64]) -> f64 {
    let t2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
    24.0 * norm_sq(center) * t2 + 8.0 * t2 * t2
}

/// max over sampled unit directions d of
/// |[f(c + s·d) − f(c)] − [f(c + s·d; c) − f(c; c)]| / s.
pub fn first_order_consistency<P: ModelProblem + ?Sized>(
    p: &P,
    center: &[f64],
    directions: usize,
    step: f64,
    seed: u64,
) -> Result<f64, ModelError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = p.dimension();
    let f0 = p.objective(center)?;
    let m0 = p.model(center, center)?;
    let mut worst: f64 = 0.0;
    for _ in 0..directions {
        let mut d: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let len = norm(&d);
        d.iter_mut().for_each(|v| *v /= len);
        let x: Vec<f64> = center.iter().zip(&d).map(|(c, di)| c + step * di).collect();
        let df = p.objective(&x)? - f0;
        let dm = p.model(&x, center)? - m0;
        worst = worst.max((df - dm).abs() / step);
    }
    Ok(worst)
}
