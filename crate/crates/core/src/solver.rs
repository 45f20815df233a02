//! Model BPG outer loop, backtracking on L̄, trace recording and the descent
//! certificate.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{norm, sub};
use crate::model::{Domain, ModelError, ModelProblem};
use crate::subsolve::{solve, PdhgConfig, SubproblemError};

/// Most consecutive step halvings (or L̄ scalings) attempted in one iteration.
pub const MAX_SCALINGS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("iteration {iteration}: {source}")]
    Subproblem {
        iteration: usize,
        #[source]
        source: SubproblemError,
    },
    #[error("iteration {iteration}: {source}")]
    Model {
        iteration: usize,
        #[source]
        source: ModelError,
    },
    #[error("iteration {iteration}: no admissible step after {halvings} step-size halvings")]
    StepSize { iteration: usize, halvings: usize },
    #[error("iteration {iteration}: backtracking did not accept L after {scalings} scalings (last L = {last_l:e})")]
    Backtracking {
        iteration: usize,
        scalings: usize,
        last_l: f64,
    },
    #[error("{0}")]
    Unsupported(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timing {
    /// Monotonic wall clock, sampled once per outer iteration.
    Wall,
    /// Report zero; keeps exported traces byte-reproducible.
    #[default]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// τ = tau_fraction / L̄.
    pub tau_fraction: f64,
    pub max_iters: usize,
    /// Stop once ‖x_{k+1} − x_k‖ / max(1, ‖x_k‖) drops to this.
    pub move_tol: f64,
    pub backtracking: bool,
    /// Backtracking scale factor.
    pub nu: f64,
    /// Initial L̄ guess for backtracking; ignored otherwise.
    #[serde(rename = "L_init", alias = "l_init")]
    pub l_init: f64,
    /// Seeds the default starting point.
    pub seed: u64,
    pub inner: PdhgConfig,
    /// Keep x_k in every trace row.
    pub record_iterates: bool,
    pub timing: Timing,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tau_fraction: 0.99,
            max_iters: 1000,
            move_tol: 1e-9,
            backtracking: false,
            nu: 2.0,
            l_init: 1.0,
            seed: 0,
            inner: PdhgConfig::default(),
            record_iterates: true,
            timing: Timing::None,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolveError> {
        if !(self.tau_fraction > 0.0 && self.tau_fraction < 1.0) {
            return Err(SolveError::Config(format!(
                "tau_fraction must lie in (0, 1), got {}",
                self.tau_fraction
            )));
        }
        if !(self.move_tol >= 0.0) {
            return Err(SolveError::Config("move_tol must be nonnegative".into()));
        }
        if !(self.nu > 1.0) || !self.nu.is_finite() {
            return Err(SolveError::Config(format!("nu must exceed 1, got {}", self.nu)));
        }
        if !(self.l_init > 0.0) || !self.l_init.is_finite() {
            return Err(SolveError::Config(format!("L_init must be positive, got {}", self.l_init)));
        }
        if !(self.inner.tol > 0.0) || self.inner.max_iters == 0 {
            return Err(SolveError::Config("inner tolerance and iteration budget must be positive".into()));
        }
        Ok(())
    }
}

/// One outer iteration. Row 0 describes the starting point.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    pub x: Option<Vec<f64>>,
    pub f: f64,
    /// F(x_k, x_{k−1}); f(x_0) on row 0.
    pub lyapunov: f64,
    /// D_h(x_k, x_{k−1}); 0 on row 0.
    pub breg_step: f64,
    /// L̄ used to produce x_k.
    pub l_k: f64,
    pub tau_k: f64,
    pub inner_residual: f64,
    pub time_s: f64,
}

impl TraceRow {
    /// ε_k = 1/τ_k − L̄_k.
    pub fn epsilon(&self) -> f64 {
        1.0 / self.tau_k - self.l_k
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IterateTrace {
    pub rows: Vec<TraceRow>,
}

pub const CSV_HEADER: &str = "iter,time_s,f,lyapunov,breg_step,L_k,tau_k,inner_residual";

impl IterateTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn max_inner_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.inner_residual).fold(0.0, f64::max)
    }

    /// Header plus one line per row, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.k, r.time_s, r.f, r.lyapunov, r.breg_step, r.l_k, r.tau_k, r.inner_residual
            );
        }
        out
    }
}

/// F(x, center) = f(x; center) + L̄·D_h(x, center).
pub fn lyapunov<P: ModelProblem + ?Sized>(
    p: &P,
    x: &[f64],
    center: &[f64],
    l_bar: f64,
) -> Result<f64, ModelError> {
    let d = p.kernel().bregman(x, center)?;
    Ok(p.model(x, center)? + l_bar * d)
}

/// Standard normal draw for unconstrained problems, all ones projected onto
/// the box for box-constrained ones.
pub fn default_x0<P: ModelProblem + ?Sized>(p: &P, seed: u64) -> Vec<f64> {
    let n = p.dimension();
    match p.domain() {
        Domain::Whole => {
            // separate stream from the instance generators sharing the seed
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(1);
            (0..n).map(|_| rng.sample(StandardNormal)).collect()
        }
        Domain::Floor(eps) => vec![1.0f64.max(eps); n],
    }
}

/// A trial point produced for a given L̄.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub x: Vec<f64>,
    pub tau: f64,
    pub inner_residual: f64,
    pub dual: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BacktrackOutcome {
    pub l: f64,
    pub candidate: Candidate,
    /// Number of times L̄ was multiplied by ν.
    pub scalings: usize,
}

/// Starting from `l_prev`, multiplies L̄ by `nu` until the candidate satisfies
/// f(x⁺) ≤ f(x⁺; x_k) + L̄·D_h(x⁺, x_k). A provider returning `Ok(None)`
/// (inadmissible step) counts as a failed trial.
pub fn backtrack_l<P, F>(
    p: &P,
    x_k: &[f64],
    mut provider: F,
    l_prev: f64,
    nu: f64,
) -> Result<BacktrackOutcome, SolveError>
where
    P: ModelProblem + ?Sized,
    F: FnMut(f64) -> Result<Option<Candidate>, SolveError>,
{
    if !(nu > 1.0) || !(l_prev > 0.0) {
        return Err(SolveError::Config(format!("backtracking needs nu > 1 and L > 0, got nu={nu}, L={l_prev}")));
    }
    let kernel = p.kernel();
    let model_err = |source| SolveError::Model { iteration: 0, source };
    let mut l = l_prev;
    for scalings in 0..=MAX_SCALINGS {
        if let Some(cand) = provider(l)? {
            let fx = p.objective(&cand.x).map_err(model_err)?;
            let model = p.model(&cand.x, x_k).map_err(model_err)?;
            let d = kernel.bregman(&cand.x, x_k).map_err(|e| model_err(e.into()))?;
            let slack = 1e-12 * (1.0 + fx.abs());
            if fx <= model + l * d + slack {
                return Ok(BacktrackOutcome {
                    l,
                    candidate: cand,
                    scalings,
                });
            }
        }
        if scalings < MAX_SCALINGS {
            l *= nu;
        }
    }
    Err(SolveError::Backtracking {
        iteration: 0,
        scalings: MAX_SCALINGS,
        last_l: l,
    })
}

fn with_iteration(e: SolveError, k: usize) -> SolveError {
    match e {
        SolveError::Model { source, .. } => SolveError::Model { iteration: k, source },
        SolveError::Subproblem { source, .. } => SolveError::Subproblem { iteration: k, source },
        SolveError::Backtracking { scalings, last_l, .. } => SolveError::Backtracking {
            iteration: k,
            scalings,
            last_l,
        },
        SolveError::StepSize { halvings, .. } => SolveError::StepSize { iteration: k, halvings },
        other => other,
    }
}

/// Solves the subproblem at `center` with step `tau`; `None` when the step is
/// inadmissible for the closed form.
pub fn candidate<P: ModelProblem + ?Sized>(
    p: &P,
    center: &[f64],
    tau: f64,
    inner: &PdhgConfig,
    warm: Option<&[f64]>,
) -> Result<Option<Candidate>, SolveError> {
    let spec = p
        .subproblem(center, tau)
        .map_err(|source| SolveError::Model { iteration: 0, source })?;
    match solve(&spec, inner, warm) {
        Ok(sol) => Ok(Some(Candidate {
            x: sol.x,
            tau,
            inner_residual: sol.residual,
            dual: sol.dual,
        })),
        Err(SubproblemError::StepTooLarge { .. }) => Ok(None),
        Err(source) => Err(SolveError::Subproblem { iteration: 0, source }),
    }
}

/// Constant-L̄ step with τ halving on inadmissible steps.
fn constant_step<P: ModelProblem + ?Sized>(
    p: &P,
    center: &[f64],
    tau: f64,
    inner: &PdhgConfig,
    warm: Option<&[f64]>,
) -> Result<Candidate, SolveError> {
    let mut t = tau;
    for _ in 0..=MAX_SCALINGS {
        if let Some(c) = candidate(p, center, t, inner, warm)? {
            return Ok(c);
        }
        t *= 0.5;
    }
    Err(SolveError::StepSize {
        iteration: 0,
        halvings: MAX_SCALINGS,
    })
}

/// Runs Model BPG from `x0`.
pub fn run<P: ModelProblem + ?Sized>(
    p: &P,
    cfg: &SolverConfig,
    x0: &[f64],
) -> Result<IterateTrace, SolveError> {
    cfg.validate()?;
    let n = p.dimension();
    if x0.len() != n {
        return Err(SolveError::Model {
            iteration: 0,
            source: ModelError::DimensionMismatch {
                expected: n,
                got: x0.len(),
            },
        });
    }
    let model_err = |k: usize| move |source: ModelError| SolveError::Model { iteration: k, source };
    p.domain().check(x0).map_err(model_err(0))?;
    let kernel = p.kernel();
    kernel.check_interior(x0).map_err(|e| model_err(0)(e.into()))?;

    let start = Instant::now();
    let clock = || match cfg.timing {
        Timing::Wall => start.elapsed().as_secs_f64(),
        Timing::None => 0.0,
    };

    let mut l_bar = if cfg.backtracking { cfg.l_init } else { p.map_upper() };
    if !(l_bar > 0.0) || !l_bar.is_finite() {
        return Err(SolveError::Config(format!("L must be positive and finite, got {l_bar}")));
    }
    let f0 = p.objective(x0).map_err(model_err(0))?;
    let mut trace = IterateTrace::default();
    trace.rows.push(TraceRow {
        k: 0,
        x: cfg.record_iterates.then(|| x0.to_vec()),
        f: f0,
        lyapunov: f0,
        breg_step: 0.0,
        l_k: l_bar,
        tau_k: cfg.tau_fraction / l_bar,
        inner_residual: 0.0,
        time_s: clock(),
    });

    let mut x = x0.to_vec();
    let mut warm: Option<Vec<f64>> = None;
    for k in 1..=cfg.max_iters {
        let warm_ref = warm.as_deref();
        let cand = if cfg.backtracking {
            let out = backtrack_l(
                p,
                &x,
                |l| candidate(p, &x, cfg.tau_fraction / l, &cfg.inner, warm_ref),
                l_bar,
                cfg.nu,
            )
            .map_err(|e| with_iteration(e, k))?;
            l_bar = out.l;
            out.candidate
        } else {
            constant_step(p, &x, cfg.tau_fraction / l_bar, &cfg.inner, warm_ref)
                .map_err(|e| with_iteration(e, k))?
        };
        let next = cand.x;
        p.domain().check(&next).map_err(model_err(k))?;
        let d = kernel.bregman(&next, &x).map_err(|e| model_err(k)(e.into()))?;
        let f = p.objective(&next).map_err(model_err(k))?;
        let lyap = p.model(&next, &x).map_err(model_err(k))? + l_bar * d;
        let moved = norm(&sub(&next, &x)) / norm(&x).max(1.0);
        trace.rows.push(TraceRow {
            k,
            x: cfg.record_iterates.then(|| next.clone()),
            f,
            lyapunov: lyap,
            breg_step: d,
            l_k: l_bar,
            tau_k: cand.tau,
            inner_residual: cand.inner_residual,
            time_s: clock(),
        });
        warm = cand.dual;
        x = next;
        if moved <= cfg.move_tol {
            break;
        }
    }
    Ok(trace)
}

/// Outcome of one family of inequalities in the certificate. The margin is
/// `rhs − lhs` before slack; an inequality passes when margin ≥ −slack.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub passed: bool,
    pub worst_margin: f64,
    /// Row index of the worst margin.
    pub worst_at: usize,
}

impl InequalityReport {
    fn new() -> Self {
        Self {
            passed: true,
            worst_margin: f64::INFINITY,
            worst_at: 0,
        }
    }

    fn record(&mut self, margin: f64, at: usize, slack: f64) {
        if margin < self.worst_margin || margin.is_nan() {
            self.worst_margin = margin;
            self.worst_at = at;
        }
        if !(margin >= -slack) {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateReport {
    pub slack: f64,
    /// f(x_{k+1}) ≤ f(x_k) − ε_k·D_h(x_{k+1}, x_k)
    pub function_descent: InequalityReport,
    /// F(x_{k+1}, x_k) ≤ F(x_k, x_{k−1}) − ε_k·D_h(x_{k+1}, x_k)
    pub lyapunov_descent: InequalityReport,
    /// min_k D_h(x_{k+1}, x_k) ≤ (F_first − F_last) / (ε_low·n)
    pub complexity: InequalityReport,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.function_descent.passed && self.lyapunov_descent.passed && self.complexity.passed
    }
}

/// Default slack: 1e-9·(1 + |F|) at the start, widened by the largest inner
/// residual times the trace length when the subproblems were solved inexactly.
pub fn default_slack(trace: &IterateTrace) -> f64 {
    let f_first = trace.rows.first().map_or(0.0, |r| r.lyapunov);
    1e-9 * (1.0 + f_first.abs()) + trace.max_inner_residual() * trace.len() as f64
}

/// Checks the three descent inequalities along a trace.
pub fn descent_certificate(trace: &IterateTrace, slack: f64) -> CertificateReport {
    let mut rep = CertificateReport {
        slack,
        function_descent: InequalityReport::new(),
        lyapunov_descent: InequalityReport::new(),
        complexity: InequalityReport::new(),
    };
    let rows = &trace.rows;
    if rows.len() < 2 {
        for r in [&mut rep.function_descent, &mut rep.lyapunov_descent, &mut rep.complexity] {
            r.worst_margin = 0.0;
        }
        return rep;
    }
    let mut eps_low = f64::INFINITY;
    let mut min_d = f64::INFINITY;
    for k in 1..rows.len() {
        let (prev, cur) = (&rows[k - 1], &rows[k]);
        let eps = cur.epsilon();
        eps_low = eps_low.min(eps);
        min_d = min_d.min(cur.breg_step);
        rep.function_descent
            .record(prev.f - eps * cur.breg_step - cur.f, k, slack);
        rep.lyapunov_descent
            .record(prev.lyapunov - eps * cur.breg_step - cur.lyapunov, k, slack);
    }
    let n = (rows.len() - 1) as f64;
    let drop = rows[0].lyapunov - rows[rows.len() - 1].lyapunov;
    let bound = drop / (eps_low * n);
    rep.complexity.record(bound - min_d, rows.len() - 1, slack);
    rep
}

/// Empirical constant of the relative-error bound: the largest ratio over the
/// trace of
///
/// ‖ξ + L̄(∇h(x⁺) − ∇h(x))‖ + ‖∂_c f(x⁺; x) − L̄∇²h(x)(x⁺ − x)‖ over ‖x⁺ − x‖,
///
/// with ξ = −(∇h(x⁺) − ∇h(x))/τ. Zero moves contribute 0.
pub fn relative_error_diagnostic<P: ModelProblem + ?Sized>(
    p: &P,
    trace: &IterateTrace,
) -> Result<f64, SolveError> {
    let kernel = p.kernel();
    let mut worst = 0.0f64;
    for k in 1..trace.rows.len() {
        let (prev, cur) = (&trace.rows[k - 1], &trace.rows[k]);
        let (Some(x), Some(xn)) = (&prev.x, &cur.x) else {
            return Err(SolveError::Unsupported("trace does not record iterates".into()));
        };
        let sub_grad = match p.center_subgradient(xn, x) {
            None => {
                return Err(SolveError::Unsupported(
                    "model is not differentiable in its center".into(),
                ))
            }
            Some(r) => r.map_err(|source| SolveError::Model { iteration: k, source })?,
        };
        let kerr = |e: crate::kernel::KernelError| SolveError::Model {
            iteration: k,
            source: e.into(),
        };
        let dx = sub(xn, x);
        let step = norm(&dx);
        if step == 0.0 {
            continue;
        }
        let dgrad = sub(&kernel.grad(xn).map_err(kerr)?, &kernel.grad(x).map_err(kerr)?);
        let coef = cur.l_k - 1.0 / cur.tau_k;
        let first = coef.abs() * norm(&dgrad);
        let hd = kernel.hess_apply(x, &dx).map_err(kerr)?;
        let second: Vec<f64> = sub_grad.iter().zip(&hd).map(|(s, h)| s - cur.l_k * h).collect();
        worst = worst.max((first + norm(&second)) / step);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::model::SubproblemKind;
    use crate::problems::{gen_phase_retrieval, gen_poisson, PhaseRetrievalM1, PoissonProblem};
    use crate::regularizer::{RegKind, Regularizer};
    use crate::subsolve::SubproblemSpec;

    /// f(x) = ½·Σ q_i x_i² with the Euclidean kernel; L⋆ = max q_i.
    struct Quadratic {
        q: Vec<f64>,
        l: f64,
    }

    impl ModelProblem for Quadratic {
        fn dimension(&self) -> usize {
            self.q.len()
        }
        fn kernel(&self) -> KernelSpec {
            KernelSpec::euclidean(self.q.len())
        }
        fn map_upper(&self) -> f64 {
            self.l
        }
        fn map_lower(&self) -> f64 {
            self.l
        }
        fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
            Ok(0.5 * self.q.iter().zip(x).map(|(q, v)| q * v * v).sum::<f64>())
        }
        fn model(&self, x: &[f64], c: &[f64]) -> Result<f64, ModelError> {
            let fc = self.objective(c)?;
            Ok(fc + self.q.iter().zip(x).zip(c).map(|((q, xi), ci)| q * ci * (xi - ci)).sum::<f64>())
        }
        fn subproblem(&self, c: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError> {
            Ok(SubproblemSpec {
                center: c.to_vec(),
                tau,
                kernel: self.kernel(),
                linear_part: Some(self.q.iter().zip(c).map(|(q, v)| q * v).collect()),
                affine: None,
                reg: Regularizer::none(),
                box_floor: None,
            })
        }
        fn subproblem_kind(&self) -> SubproblemKind {
            SubproblemKind::ClosedFormEuclidean
        }
    }

    #[test]
    fn lyapunov_at_center_is_objective() {
        let inst = gen_phase_retrieval(3, 12, 4, Regularizer::l1(0.1), 0.0).unwrap();
        let p = PhaseRetrievalM1::new(inst);
        let x = default_x0(&p, 1);
        let f = p.objective(&x).unwrap();
        assert!((lyapunov(&p, &x, &x, 5.0).unwrap() - f).abs() <= 1e-12 * (1.0 + f.abs()));
        let y: Vec<f64> = x.iter().map(|v| v + 0.3).collect();
        assert_eq!(lyapunov(&p, &y, &x, 0.0).unwrap(), p.model(&y, &x).unwrap());
    }

    #[test]
    fn fixed_point_gives_two_rows() {
        let p = Quadratic { q: vec![1.0, 2.0], l: 2.0 };
        let trace = run(&p, &SolverConfig::default(), &[0.0, 0.0]).unwrap();
        assert_eq!(trace.len(), 2);
        assert_eq!(trace.rows[1].x.as_deref(), Some(&[0.0, 0.0][..]));
        let rep = descent_certificate(&trace, 0.0);
        assert!(rep.passed());
        assert_eq!(rep.function_descent.worst_margin, 0.0);
        assert_eq!(rep.lyapunov_descent.worst_margin, 0.0);
        assert_eq!(rep.complexity.worst_margin, 0.0);
        assert_eq!(relative_error_diagnostic(&p, &trace), Err(SolveError::Unsupported(
            "model is not differentiable in its center".into()
        )));
    }

    #[test]
    fn zero_budget_keeps_only_start() {
        let p = Quadratic { q: vec![1.0], l: 1.0 };
        let cfg = SolverConfig {
            max_iters: 0,
            ..SolverConfig::default()
        };
        let trace = run(&p, &cfg, &[3.0]).unwrap();
        assert_eq!(trace.len(), 1);
        assert_eq!(trace.to_csv().lines().count(), 2);
    }

    #[test]
    fn quadratic_run_is_certified() {
        let p = Quadratic { q: vec![0.5, 1.0, 4.0], l: 4.0 };
        let trace = run(&p, &SolverConfig::default(), &[1.0, -2.0, 3.0]).unwrap();
        assert!(trace.last().unwrap().f < 1e-12);
        let rep = descent_certificate(&trace, default_slack(&trace));
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn backtracking_accepts_immediately_when_valid() {
        let p = Quadratic { q: vec![1.0, 3.0], l: 3.0 };
        let x = [1.0, 1.0];
        let cfg = SolverConfig::default();
        let out = backtrack_l(&p, &x, |l| candidate(&p, &x, cfg.tau_fraction / l, &cfg.inner, None), 5.0, 2.0).unwrap();
        assert_eq!(out.l, 5.0);
        assert_eq!(out.scalings, 0);
        let direct = candidate(&p, &x, cfg.tau_fraction / 5.0, &cfg.inner, None).unwrap().unwrap();
        assert_eq!(out.candidate.x, direct.x);
    }

    #[test]
    fn backtracking_gives_up() {
        let p = Quadratic { q: vec![1.0], l: 1.0 };
        let err = backtrack_l(&p, &[1.0], |_| Ok(None), 1.0, 2.0).unwrap_err();
        assert!(matches!(err, SolveError::Backtracking { scalings: MAX_SCALINGS, .. }));
    }

    #[test]
    fn phase_retrieval_m1_descends() {
        let inst = gen_phase_retrieval(0, 50, 10, Regularizer::none(), 0.0).unwrap();
        let p = PhaseRetrievalM1::new(inst);
        let cfg = SolverConfig {
            max_iters: 500,
            ..SolverConfig::default()
        };
        let trace = run(&p, &cfg, &default_x0(&p, 0)).unwrap();
        assert!(trace.rows[1].f < trace.rows[0].f);
        assert!(descent_certificate(&trace, default_slack(&trace)).passed());
        let c = relative_error_diagnostic(&p, &trace).unwrap();
        assert!(c.is_finite());
    }

    #[test]
    fn poisson_stays_feasible() {
        let inst = gen_poisson(0, 50, 10, 1e-8, Regularizer::new(RegKind::L1, 0.1), 0.0).unwrap();
        let p = PoissonProblem::new(inst);
        let cfg = SolverConfig {
            max_iters: 300,
            ..SolverConfig::default()
        };
        let trace = run(&p, &cfg, &default_x0(&p, 0)).unwrap();
        for row in &trace.rows {
            assert!(row.x.as_ref().unwrap().iter().all(|&v| v >= 1e-8));
        }
        assert!(descent_certificate(&trace, default_slack(&trace)).passed());
    }

    #[test]
    fn runs_are_deterministic() {
        let inst = gen_poisson(4, 20, 5, 1e-8, Regularizer::none(), 0.1).unwrap();
        let p = PoissonProblem::new(inst);
        let cfg = SolverConfig {
            max_iters: 50,
            ..SolverConfig::default()
        };
        let a = run(&p, &cfg, &default_x0(&p, 0)).unwrap();
        let b = run(&p, &cfg, &default_x0(&p, 0)).unwrap();
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn config_validation() {
        let bad = SolverConfig {
            tau_fraction: 1.0,
            ..SolverConfig::default()
        };
        assert!(matches!(bad.validate(), Err(SolveError::Config(_))));
        let json = serde_json::to_string(&SolverConfig::default()).unwrap();
        assert!(json.contains("\"L_init\""));
        let back: SolverConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SolverConfig::default());
    }
}
