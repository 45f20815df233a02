//! Phase retrieval, robust phase retrieval and Poisson linear inverse
//! problems: instance generation, objectives, models and their constants.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kernel::KernelSpec;
use crate::linalg::{dot, matvec, norm_sq, quad_form};
use crate::model::{Domain, ModelError, ModelProblem, SubproblemKind};
use crate::regularizer::{RegKind, Regularizer};
use crate::subsolve::{AffineRows, SubproblemSpec};

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_EPSILON: f64 = 1e-8;
pub const DEFAULT_M: usize = 50;
pub const DEFAULT_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InstanceError {
    #[error("instance must have M >= 1 and N >= 1 (got M={m}, N={n})")]
    Empty { m: usize, n: usize },
    #[error("field `{field}`: expected length {expected}, got {got}")]
    Shape {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix {index} is not symmetric (asymmetry {asym:e})")]
    NotSymmetric { index: usize, asym: f64 },
    #[error("matrix {index} is not PSD (min eigenvalue {min_eig:e})")]
    NotPsd { index: usize, min_eig: f64 },
    #[error("row {index}: {reason}")]
    BadRow { index: usize, reason: &'static str },
    #[error("column {index} has zero sum")]
    ZeroColumn { index: usize },
    #[error("{0}")]
    BadValue(&'static str),
}

// ---------------------------------------------------------------------------
// Phase retrieval
// ---------------------------------------------------------------------------

/// Sampling matrices `A_i` (row-major N×N) and measurements `b_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseRetrievalInstance {
    pub n: usize,
    pub matrices: Vec<Vec<f64>>,
    pub measurements: Vec<f64>,
    pub reg: RegKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<f64>>,
}

fn min_max_eig(a: &[f64], n: usize) -> (f64, f64) {
    let m = DMatrix::from_row_slice(n, n, a);
    let eig = SymmetricEigen::new(m).eigenvalues;
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn frobenius(a: &[f64]) -> f64 {
    norm_sq(a).sqrt()
}

impl PhaseRetrievalInstance {
    pub fn m(&self) -> usize {
        self.measurements.len()
    }

    pub fn regularizer(&self) -> Regularizer {
        Regularizer::new(self.reg, self.lambda)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let (m, n) = (self.m(), self.n);
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty { m, n });
        }
        if self.matrices.len() != m {
            return Err(InstanceError::Shape {
                field: "matrices",
                expected: m,
                got: self.matrices.len(),
            });
        }
        if !(self.lambda >= 0.0) {
            return Err(InstanceError::BadValue("lambda must be nonnegative"));
        }
        for (index, a) in self.matrices.iter().enumerate() {
            if a.len() != n * n {
                return Err(InstanceError::Shape {
                    field: "matrices[i]",
                    expected: n * n,
                    got: a.len(),
                });
            }
            let mut asym: f64 = 0.0;
            for i in 0..n {
                for j in 0..n {
                    asym = asym.max((a[i * n + j] - a[j * n + i]).abs());
                }
            }
            if asym > 1e-12 {
                return Err(InstanceError::NotSymmetric { index, asym });
            }
            let (min_eig, _) = min_max_eig(a, n);
            if min_eig < -1e-10 {
                return Err(InstanceError::NotPsd { index, min_eig });
            }
        }
        Ok(())
    }

    /// `r_i = xᵀA_i x − b_i` and `A_i x` for every measurement.
    fn residuals(&self, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
        let n = self.n;
        let ax: Vec<Vec<f64>> = self.matrices.iter().map(|a| matvec(a, n, x)).collect();
        let r = ax
            .iter()
            .zip(&self.measurements)
            .map(|(axi, b)| dot(x, axi) - b)
            .collect();
        (r, ax)
    }

    /// Smooth part f₁(x) = (1/M)Σ(xᵀA_i x − b_i)².
    pub fn smooth_value(&self, x: &[f64]) -> f64 {
        let m = self.m() as f64;
        self.matrices
            .iter()
            .zip(&self.measurements)
            .map(|(a, b)| {
                let r = quad_form(a, self.n, x) - b;
                r * r
            })
            .sum::<f64>()
            / m
    }

    /// ∇f₁(x) = (1/M)Σ 4 r_i A_i x.
    pub fn smooth_grad(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m() as f64;
        let (r, ax) = self.residuals(x);
        let mut g = vec![0.0; self.n];
        for (ri, axi) in r.iter().zip(&ax) {
            for (gj, aj) in g.iter_mut().zip(axi) {
                *gj += 4.0 * ri * aj / m;
            }
        }
        g
    }

    /// ∇²f₁(c)·d = (1/M)Σ [4 r_i A_i d + 8 ⟨A_i c, d⟩ A_i c].
    pub fn smooth_hess_apply(&self, c: &[f64], d: &[f64]) -> Vec<f64> {
        let m = self.m() as f64;
        let n = self.n;
        let (r, ac) = self.residuals(c);
        let mut out = vec![0.0; n];
        for ((a, ri), aci) in self.matrices.iter().zip(&r).zip(&ac) {
            let ad = matvec(a, n, d);
            let s = dot(aci, d);
            for j in 0..n {
                out[j] += (4.0 * ri * ad[j] + 8.0 * s * aci[j]) / m;
            }
        }
        out
    }
}

/// Rank-one Gaussian sampling matrices `A_i = g_i g_iᵀ`, measurements
/// `b_i = x⋆ᵀA_i x⋆·(1 + noise·ξ_i)` for a hidden standard-normal `x⋆`.
pub fn gen_phase_retrieval(
    seed: u64,
    m: usize,
    n: usize,
    reg: Regularizer,
    noise: f64,
) -> Result<PhaseRetrievalInstance, InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::Empty { m, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    let mut matrices = Vec::with_capacity(m);
    let mut measurements = Vec::with_capacity(m);
    for _ in 0..m {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = g[i] * g[j];
            }
        }
        let clean = dot(&g, &planted).powi(2);
        let xi: f64 = rng.sample(StandardNormal);
        let b = if noise == 0.0 {
            clean
        } else {
            clean * (1.0 + noise * xi)
        };
        matrices.push(a);
        measurements.push(b);
    }
    Ok(PhaseRetrievalInstance {
        n,
        matrices,
        measurements,
        reg: reg.kind,
        lambda: reg.lambda,
        planted: Some(planted),
    })
}

/// (1/M)Σ(xᵀA_i x − b_i)² + 𝓡(x).
pub fn phase_retrieval_objective(inst: &PhaseRetrievalInstance, x: &[f64]) -> f64 {
    inst.smooth_value(x) + inst.regularizer().value(x)
}

/// Additive-composite model: the linearisation of f₁ around `center` plus 𝓡.
pub fn model_m1(inst: &PhaseRetrievalInstance, x: &[f64], center: &[f64]) -> f64 {
    let m = inst.m() as f64;
    let (r, ac) = inst.residuals(center);
    let s: f64 = r
        .iter()
        .zip(&ac)
        .map(|(ri, aci)| {
            let lin: f64 = aci.iter().zip(x).zip(center).map(|((a, xi), ci)| a * (xi - ci)).sum();
            ri * ri + 4.0 * ri * lin
        })
        .sum();
    s / m + inst.regularizer().value(x)
}

/// Prox-linear model: each squared residual is linearised separately and
/// kept under an absolute value, exploiting nonnegativity of the loss.
pub fn model_m2(inst: &PhaseRetrievalInstance, x: &[f64], center: &[f64]) -> f64 {
    let m = inst.m() as f64;
    let (r, ac) = inst.residuals(center);
    let s: f64 = r
        .iter()
        .zip(&ac)
        .map(|(ri, aci)| {
            let lin: f64 = aci.iter().zip(x).zip(center).map(|((a, xi), ci)| a * (xi - ci)).sum();
            (ri * ri + 4.0 * ri * lin).abs()
        })
        .sum();
    s / m + inst.regularizer().value(x)
}

/// L₀ = Σ_i (3‖A_i‖_F² + ‖A_i‖_F·|b_i|).
pub fn phase_retrieval_l0(inst: &PhaseRetrievalInstance) -> f64 {
    inst.matrices
        .iter()
        .zip(&inst.measurements)
        .map(|(a, b)| {
            let fro = frobenius(a);
            3.0 * fro * fro + fro * b.abs()
        })
        .sum()
}

/// Model constant actually used with the quartic kernel. `L₀` bounds the
/// curvature of ¼Σ(xᵀA_i x − b_i)²; the loss here is (1/M)Σ(…)², i.e. 4/M
/// times that, so for M < 4 the constant is scaled up accordingly.
pub fn phase_retrieval_map_constant(inst: &PhaseRetrievalInstance) -> f64 {
    phase_retrieval_l0(inst) * (4.0 / inst.m() as f64).max(1.0)
}

/// (1/M)Σ|xᵀA_i x − b_i| + 𝓡(x).
pub fn robust_pr_objective(inst: &PhaseRetrievalInstance, x: &[f64]) -> f64 {
    let m = inst.m() as f64;
    let s: f64 = inst
        .matrices
        .iter()
        .zip(&inst.measurements)
        .map(|(a, b)| (quad_form(a, inst.n, x) - b).abs())
        .sum();
    s / m + inst.regularizer().value(x)
}

/// (1/M)Σ|r_i(c) + ⟨2A_i c, x − c⟩| + 𝓡(x).
pub fn robust_pr_model(inst: &PhaseRetrievalInstance, x: &[f64], center: &[f64]) -> f64 {
    let m = inst.m() as f64;
    let (r, ac) = inst.residuals(center);
    let s: f64 = r
        .iter()
        .zip(&ac)
        .map(|(ri, aci)| {
            let lin: f64 = aci.iter().zip(x).zip(center).map(|((a, xi), ci)| a * (xi - ci)).sum();
            (ri + 2.0 * lin).abs()
        })
        .sum();
    s / m + inst.regularizer().value(x)
}

/// L₁ = 2Σ_i λ_max(A_i) / M.
pub fn robust_pr_l1(inst: &PhaseRetrievalInstance) -> f64 {
    let s: f64 = inst
        .matrices
        .iter()
        .map(|a| min_max_eig(a, inst.n).1.max(0.0))
        .sum();
    2.0 * s / inst.m() as f64
}

/// Standard phase retrieval with the additive-composite model and the
/// quartic kernel; subproblems have a closed form.
#[derive(Debug, Clone)]
pub struct PhaseRetrievalM1 {
    pub inst: PhaseRetrievalInstance,
    pub constant: f64,
}

impl PhaseRetrievalM1 {
    pub fn new(inst: PhaseRetrievalInstance) -> Self {
        let constant = phase_retrieval_map_constant(&inst);
        Self { inst, constant }
    }
}

/// Standard phase retrieval with the prox-linear model; subproblems go
/// through PDHG.
#[derive(Debug, Clone)]
pub struct PhaseRetrievalM2 {
    pub inst: PhaseRetrievalInstance,
    pub constant: f64,
}

impl PhaseRetrievalM2 {
    pub fn new(inst: PhaseRetrievalInstance) -> Self {
        let constant = phase_retrieval_map_constant(&inst);
        Self { inst, constant }
    }
}

/// L1-loss phase retrieval with the Euclidean kernel.
#[derive(Debug, Clone)]
pub struct RobustPhaseRetrieval {
    pub inst: PhaseRetrievalInstance,
    pub constant: f64,
}

impl RobustPhaseRetrieval {
    pub fn new(inst: PhaseRetrievalInstance) -> Self {
        let constant = robust_pr_l1(&inst);
        Self { inst, constant }
    }
}

fn check_len(x: &[f64], n: usize) -> Result<(), ModelError> {
    if x.len() != n {
        return Err(ModelError::DimensionMismatch {
            expected: n,
            got: x.len(),
        });
    }
    Ok(())
}

impl ModelProblem for PhaseRetrievalM1 {
    fn dimension(&self) -> usize {
        self.inst.n
    }
    fn kernel(&self) -> KernelSpec {
        KernelSpec::quartic(self.inst.n)
    }
    fn map_upper(&self) -> f64 {
        self.constant
    }
    fn map_lower(&self) -> f64 {
        self.constant
    }
    fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        Ok(phase_retrieval_objective(&self.inst, x))
    }
    fn model(&self, x: &[f64], center: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        check_len(center, self.inst.n)?;
        Ok(model_m1(&self.inst, x, center))
    }
    fn center_subgradient(
        &self,
        x: &[f64],
        center: &[f64],
    ) -> Option<Result<Vec<f64>, ModelError>> {
        let d: Vec<f64> = x.iter().zip(center).map(|(a, b)| a - b).collect();
        Some(Ok(self.inst.smooth_hess_apply(center, &d)))
    }
    fn subproblem(&self, center: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError> {
        check_len(center, self.inst.n)?;
        Ok(SubproblemSpec {
            center: center.to_vec(),
            tau,
            kernel: self.kernel(),
            linear_part: Some(self.inst.smooth_grad(center)),
            affine: None,
            reg: self.inst.regularizer(),
            box_floor: None,
        })
    }
    fn subproblem_kind(&self) -> SubproblemKind {
        SubproblemKind::ClosedFormQuartic
    }
}

impl ModelProblem for PhaseRetrievalM2 {
    fn dimension(&self) -> usize {
        self.inst.n
    }
    fn kernel(&self) -> KernelSpec {
        KernelSpec::quartic(self.inst.n)
    }
    fn map_upper(&self) -> f64 {
        self.constant
    }
    fn map_lower(&self) -> f64 {
        self.constant
    }
    fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        Ok(phase_retrieval_objective(&self.inst, x))
    }
    fn model(&self, x: &[f64], center: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        check_len(center, self.inst.n)?;
        Ok(model_m2(&self.inst, x, center))
    }
    fn subproblem(&self, center: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError> {
        check_len(center, self.inst.n)?;
        let (r, ac) = self.inst.residuals(center);
        let rows = r
            .iter()
            .zip(&ac)
            .map(|(ri, aci)| aci.iter().map(|a| 4.0 * ri * a).collect())
            .collect();
        let offsets = r.iter().map(|ri| ri * ri).collect();
        Ok(SubproblemSpec {
            center: center.to_vec(),
            tau,
            kernel: self.kernel(),
            linear_part: None,
            affine: Some(AffineRows {
                rows,
                offsets,
                weight: 1.0 / self.inst.m() as f64,
            }),
            reg: self.inst.regularizer(),
            box_floor: None,
        })
    }
    fn subproblem_kind(&self) -> SubproblemKind {
        SubproblemKind::PiecewiseLinearPdhg
    }
}

impl ModelProblem for RobustPhaseRetrieval {
    fn dimension(&self) -> usize {
        self.inst.n
    }
    fn kernel(&self) -> KernelSpec {
        KernelSpec::euclidean(self.inst.n)
    }
    fn map_upper(&self) -> f64 {
        self.constant
    }
    fn map_lower(&self) -> f64 {
        self.constant
    }
    fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        Ok(robust_pr_objective(&self.inst, x))
    }
    fn model(&self, x: &[f64], center: &[f64]) -> Result<f64, ModelError> {
        check_len(x, self.inst.n)?;
        check_len(center, self.inst.n)?;
        Ok(robust_pr_model(&self.inst, x, center))
    }
    fn subproblem(&self, center: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError> {
        check_len(center, self.inst.n)?;
        let (r, ac) = self.inst.residuals(center);
        let rows = ac
            .iter()
            .map(|aci| aci.iter().map(|a| 2.0 * a).collect())
            .collect();
        Ok(SubproblemSpec {
            center: center.to_vec(),
            tau,
            kernel: self.kernel(),
            linear_part: None,
            affine: Some(AffineRows {
                rows,
                offsets: r,
                weight: 1.0 / self.inst.m() as f64,
            }),
            reg: self.inst.regularizer(),
            box_floor: None,
        })
    }
    fn subproblem_kind(&self) -> SubproblemKind {
        SubproblemKind::PiecewiseLinearPdhg
    }
}

// ---------------------------------------------------------------------------
// Poisson linear inverse problems
// ---------------------------------------------------------------------------

/// Nonnegative rows `a_i`, positive counts `b_i` and the floor ε of
/// `C_ε = {x : x_i ≥ ε}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoissonInstance {
    pub n: usize,
    pub rows: Vec<Vec<f64>>,
    pub counts: Vec<f64>,
    pub epsilon: f64,
    pub reg: RegKind,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Vec<f64>>,
}

impl PoissonInstance {
    pub fn m(&self) -> usize {
        self.counts.len()
    }

    pub fn regularizer(&self) -> Regularizer {
        Regularizer::new(self.reg, self.lambda)
    }

    pub fn validate(&self) -> Result<(), InstanceError> {
        let (m, n) = (self.m(), self.n);
        if m == 0 || n == 0 {
            return Err(InstanceError::Empty { m, n });
        }
        if self.rows.len() != m {
            return Err(InstanceError::Shape {
                field: "rows",
                expected: m,
                got: self.rows.len(),
            });
        }
        if !(self.epsilon > 0.0) {
            return Err(InstanceError::BadValue("epsilon must be positive"));
        }
        if !(self.lambda >= 0.0) {
            return Err(InstanceError::BadValue("lambda must be nonnegative"));
        }
        let mut colsum = vec![0.0; n];
        for (index, (row, &b)) in self.rows.iter().zip(&self.counts).enumerate() {
            if row.len() != n {
                return Err(InstanceError::Shape {
                    field: "rows[i]",
                    expected: n,
                    got: row.len(),
                });
            }
            if row.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                return Err(InstanceError::BadRow {
                    index,
                    reason: "entries must be finite and nonnegative",
                });
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(InstanceError::BadRow {
                    index,
                    reason: "row is identically zero",
                });
            }
            if !(b > 0.0) {
                return Err(InstanceError::BadRow {
                    index,
                    reason: "count must be positive",
                });
            }
            for (c, v) in colsum.iter_mut().zip(row) {
                *c += v;
            }
        }
        if let Some(index) = colsum.iter().position(|&c| c <= 0.0) {
            return Err(InstanceError::ZeroColumn { index });
        }
        Ok(())
    }

    fn check_feasible(&self, x: &[f64]) -> Result<(), ModelError> {
        check_len(x, self.n)?;
        Domain::Floor(self.epsilon).check(x)
    }

    fn smooth_unchecked(&self, x: &[f64]) -> f64 {
        self.rows
            .iter()
            .zip(&self.counts)
            .map(|(a, b)| {
                let ax = dot(a, x);
                ax - b * ax.ln()
            })
            .sum()
    }

    fn grad_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (a, b) in self.rows.iter().zip(&self.counts) {
            let w = 1.0 - b / dot(a, x);
            for (gj, aj) in g.iter_mut().zip(a) {
                *gj += w * aj;
            }
        }
        g
    }
}

/// Entries of `a_i` uniform on [0, 1] with a repair pass that keeps every row
/// and column nonzero; planted `x⋆` uniform on [0.5, 1.5]; `b_i = ⟨a_i, x⋆⟩`
/// optionally perturbed multiplicatively (and kept positive).
pub fn gen_poisson(
    seed: u64,
    m: usize,
    n: usize,
    epsilon: f64,
    reg: Regularizer,
    noise: f64,
) -> Result<PoissonInstance, InstanceError> {
    if m == 0 || n == 0 {
        return Err(InstanceError::Empty { m, n });
    }
    if !(epsilon > 0.0) {
        return Err(InstanceError::BadValue("epsilon must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planted: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut rows: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| rng.random::<f64>()).collect())
        .collect();
    for row in rows.iter_mut() {
        if row.iter().all(|&v| v == 0.0) {
            let j = rng.random_range(0..n);
            row[j] = 1.0;
        }
    }
    for j in 0..n {
        if rows.iter().all(|r| r[j] == 0.0) {
            let i = rng.random_range(0..m);
            rows[i][j] = 1.0;
        }
    }
    let counts = rows
        .iter()
        .map(|a| {
            let clean = dot(a, &planted);
            let xi: f64 = rng.sample(StandardNormal);
            if noise == 0.0 {
                clean
            } else {
                (clean * (1.0 + noise * xi)).max(1e-3 * clean)
            }
        })
        .collect();
    Ok(PoissonInstance {
        n,
        rows,
        counts,
        epsilon,
        reg: reg.kind,
        lambda: reg.lambda,
        planted: Some(planted),
    })
}

/// f₁(x) + 𝓡(x) for `x ∈ C_ε`.
pub fn poisson_objective(inst: &PoissonInstance, x: &[f64]) -> Result<f64, ModelError> {
    inst.check_feasible(x)?;
    Ok(inst.smooth_unchecked(x) + inst.regularizer().value(x))
}

/// ∇f₁(x) = Σ_i (1 − b_i/⟨a_i, x⟩)·a_i for `x ∈ C_ε`.
pub fn poisson_grad_smooth(inst: &PoissonInstance, x: &[f64]) -> Result<Vec<f64>, ModelError> {
    inst.check_feasible(x)?;
    Ok(inst.grad_unchecked(x))
}

/// L = Σ_i b_i.
pub fn poisson_l(inst: &PoissonInstance) -> f64 {
    inst.counts.iter().sum()
}

/// Poisson problem with the linearised model and the Burg kernel.
#[derive(Debug, Clone)]
pub struct PoissonProblem {
    pub inst: PoissonInstance,
    pub constant: f64,
}

impl PoissonProblem {
    pub fn new(inst: PoissonInstance) -> Self {
        let constant = poisson_l(&inst);
        Self { inst, constant }
    }
}

impl ModelProblem for PoissonProblem {
    fn dimension(&self) -> usize {
        self.inst.n
    }
    fn kernel(&self) -> KernelSpec {
        KernelSpec::burg(self.inst.n)
    }
    fn map_upper(&self) -> f64 {
        self.constant
    }
    fn map_lower(&self) -> f64 {
        self.constant
    }
    fn domain(&self) -> Domain {
        Domain::Floor(self.inst.epsilon)
    }
    fn objective(&self, x: &[f64]) -> Result<f64, ModelError> {
        poisson_objective(&self.inst, x)
    }
    fn model(&self, x: &[f64], center: &[f64]) -> Result<f64, ModelError> {
        self.inst.check_feasible(x)?;
        self.inst.check_feasible(center)?;
        let g = self.inst.grad_unchecked(center);
        let lin: f64 = g.iter().zip(x).zip(center).map(|((gi, xi), ci)| gi * (xi - ci)).sum();
        Ok(self.inst.smooth_unchecked(center) + lin + self.inst.regularizer().value(x))
    }
    fn center_subgradient(
        &self,
        x: &[f64],
        center: &[f64],
    ) -> Option<Result<Vec<f64>, ModelError>> {
        // ∇²f₁(c)(x − c) = Σ b_i ⟨a_i, x − c⟩ / ⟨a_i, c⟩² · a_i
        Some((|| {
            self.inst.check_feasible(x)?;
            self.inst.check_feasible(center)?;
            let mut out = vec![0.0; self.inst.n];
            for (a, b) in self.inst.rows.iter().zip(&self.inst.counts) {
                let ac = dot(a, center);
                let ad: f64 = a.iter().zip(x).zip(center).map(|((ai, xi), ci)| ai * (xi - ci)).sum();
                let w = b * ad / (ac * ac);
                for (o, ai) in out.iter_mut().zip(a) {
                    *o += w * ai;
                }
            }
            Ok(out)
        })())
    }
    fn subproblem(&self, center: &[f64], tau: f64) -> Result<SubproblemSpec, ModelError> {
        let g = poisson_grad_smooth(&self.inst, center)?;
        Ok(SubproblemSpec {
            center: center.to_vec(),
            tau,
            kernel: self.kernel(),
            linear_part: Some(g),
            affine: None,
            reg: self.inst.regularizer(),
            box_floor: Some(self.inst.epsilon),
        })
    }
    fn subproblem_kind(&self) -> SubproblemKind {
        SubproblemKind::ClosedFormBurg
    }
}
