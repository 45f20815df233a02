//! Slow, high-accuracy reference minimizer for subproblems. Used by tests to
//! check the closed forms and PDHG; it shares no solution path with them.
//!
//! * separable kernels without affine rows: per-coordinate bisection on the
//!   (one-sided) derivatives;
//! * quartic kernel without affine rows: proximal gradient with backtracking;
//! * affine rows: accelerated projected gradient ascent on the dual, followed
//!   by an active-set Newton polish of the primal. The dual value is a
//!   certified lower bound on the optimum.

use nalgebra::{DMatrix, DVector};

use crate::kernel::KernelKind;
use crate::linalg::{dot, norm, norm_sq};

use super::{soft, SubproblemError, SubproblemSpec};

pub const ORACLE_MAX_DIM: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Certified lower bound on the optimal value, where available.
    pub lower_bound: Option<f64>,
}

pub fn oracle_minimize(spec: &SubproblemSpec, tol: f64) -> Result<OracleSolution, SubproblemError> {
    let n = spec.dimension();
    if n > ORACLE_MAX_DIM {
        return Err(SubproblemError::OracleFailed(format!(
            "dimension {n} exceeds the oracle limit {ORACLE_MAX_DIM}"
        )));
    }
    spec.validate()?;
    let x = match (&spec.affine, spec.kernel.kind) {
        (None, KernelKind::QuarticPlusQuadratic) => return prox_gradient(spec, tol),
        (None, _) => separable(spec)?,
        (Some(_), KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic) => {
            if spec.box_floor.is_some() {
                return Err(SubproblemError::OracleFailed("affine rows with a box are not supported".into()));
            }
            return dual_ascent(spec, tol);
        }
        (Some(_), k) => {
            return Err(SubproblemError::OracleFailed(format!("affine rows with {k:?} kernel")));
        }
    };
    let objective = spec.objective(&x)?;
    Ok(OracleSolution {
        x,
        objective,
        lower_bound: None,
    })
}

// ---------------------------------------------------------------------------
// separable kernels
// ---------------------------------------------------------------------------

fn scalar_h_prime(kind: KernelKind, t: f64) -> f64 {
    match kind {
        KernelKind::Euclidean => t,
        KernelKind::Burg => -1.0 / t,
        KernelKind::BoltzmannShannon => 1.0 + t.ln(),
        KernelKind::QuarticPlusQuadratic => unreachable!("quartic kernel is not separable"),
    }
}

fn separable(spec: &SubproblemSpec) -> Result<Vec<f64>, SubproblemError> {
    let kind = spec.kernel.kind;
    let l1 = spec.reg.l1_weight();
    let l2 = spec.reg.l2_weight();
    let tau = spec.tau;
    let zero = vec![0.0; spec.dimension()];
    let g = spec.linear_part.as_deref().unwrap_or(&zero);
    let positive_domain = matches!(kind, KernelKind::Burg | KernelKind::BoltzmannShannon);

    let mut out = Vec::with_capacity(g.len());
    for (&c, &gj) in spec.center.iter().zip(g) {
        let hc = scalar_h_prime(kind, c);
        let base = |t: f64| gj + l2 * t + (scalar_h_prime(kind, t) - hc) / tau;
        let d_right = |t: f64| base(t) + if t >= 0.0 { l1 } else { -l1 };
        let d_left = |t: f64| base(t) + if t > 0.0 { l1 } else { -l1 };

        let floor = spec.box_floor;
        if let Some(f) = floor {
            if d_right(f) >= 0.0 {
                out.push(f);
                continue;
            }
        }
        // bracket [lo, hi] with d_right(lo) < 0 < d_left(hi)
        let mut lo = match floor {
            Some(f) => f,
            None if positive_domain => c,
            None => c - 1.0,
        };
        let mut guard = 0;
        while d_right(lo) >= 0.0 {
            lo = if positive_domain { lo * 0.5 } else { lo - 2.0 * (1.0 + lo.abs()) };
            guard += 1;
            if guard > 2000 {
                return Err(SubproblemError::OracleFailed("could not bracket from below".into()));
            }
        }
        let mut hi = c.max(lo) + 1.0;
        guard = 0;
        while d_left(hi) <= 0.0 {
            hi = hi + 2.0 * (1.0 + hi.abs());
            guard += 1;
            if guard > 2000 {
                return Err(SubproblemError::OracleFailed("could not bracket from above".into()));
            }
        }
        for _ in 0..400 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if d_right(mid) < 0.0 {
                lo = mid;
            } else if d_left(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
                hi = mid;
                break;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// quartic kernel, additive-composite model
// ---------------------------------------------------------------------------

/// Smooth part S(x) = ⟨g, x − x̄⟩ + (λ₂/2)‖x‖² + (1/τ)D_h(x, x̄) and its gradient.
struct Smooth<'a> {
    spec: &'a SubproblemSpec,
    g: Vec<f64>,
    grad_center: Vec<f64>,
    l2: f64,
}

impl<'a> Smooth<'a> {
    fn new(spec: &'a SubproblemSpec) -> Result<Self, SubproblemError> {
        let n = spec.dimension();
        Ok(Self {
            spec,
            g: spec.linear_part.clone().unwrap_or_else(|| vec![0.0; n]),
            grad_center: quartic_or_euclid_grad(spec.kernel.kind, &spec.center),
            l2: spec.reg.l2_weight(),
        })
    }

    fn value(&self, x: &[f64]) -> Result<f64, SubproblemError> {
        Ok(dot(&self.g, x) - dot(&self.g, &self.spec.center)
            + 0.5 * self.l2 * norm_sq(x)
            + self.spec.kernel.bregman(x, &self.spec.center)? / self.spec.tau)
    }

    fn grad(&self, x: &[f64]) -> Vec<f64> {
        let gh = quartic_or_euclid_grad(self.spec.kernel.kind, x);
        (0..x.len())
            .map(|i| self.g[i] + self.l2 * x[i] + (gh[i] - self.grad_center[i]) / self.spec.tau)
            .collect()
    }

    fn hessian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = x.len();
        let mut h = DMatrix::<f64>::identity(n, n) * self.l2;
        match self.spec.kernel.kind {
            KernelKind::QuarticPlusQuadratic => {
                let s = norm_sq(x) + 1.0;
                for i in 0..n {
                    for j in 0..n {
                        let mut v = 2.0 * x[i] * x[j];
                        if i == j {
                            v += s;
                        }
                        h[(i, j)] += v / self.spec.tau;
                    }
                }
            }
            _ => {
                for i in 0..n {
                    h[(i, i)] += 1.0 / self.spec.tau;
                }
            }
        }
        h
    }

    /// Strong convexity modulus (both kernels have ∇²h ⪰ I).
    fn mu(&self) -> f64 {
        1.0 / self.spec.tau + self.l2
    }
}

fn quartic_or_euclid_grad(kind: KernelKind, x: &[f64]) -> Vec<f64> {
    match kind {
        KernelKind::QuarticPlusQuadratic => {
            let s = norm_sq(x) + 1.0;
            x.iter().map(|v| s * v).collect()
        }
        _ => x.to_vec(),
    }
}

fn prox_gradient(spec: &SubproblemSpec, tol: f64) -> Result<OracleSolution, SubproblemError> {
    let smooth = Smooth::new(spec)?;
    let l1 = spec.reg.l1_weight();
    let mut x = spec.center.clone();
    let mut step = spec.tau;
    let stop = (tol * 1e-4).max(1e-15);
    for _ in 0..200_000 {
        let gx = smooth.grad(&x);
        let mut accepted = None;
        for _ in 0..100 {
            let cand: Vec<f64> = x
                .iter()
                .zip(&gx)
                .map(|(xi, gi)| soft(xi - step * gi, step * l1))
                .collect();
            let d: Vec<f64> = cand.iter().zip(&x).map(|(a, b)| a - b).collect();
            // curvature along d from gradients; function values cancel near the minimum
            let gc = smooth.grad(&cand);
            let curv: f64 = gc.iter().zip(&gx).zip(&d).map(|((a, b), di)| (a - b) * di).sum();
            if curv <= norm_sq(&d) / (2.0 * step) {
                accepted = Some((cand, norm(&d)));
                break;
            }
            step *= 0.5;
        }
        let (cand, moved) = accepted
            .ok_or_else(|| SubproblemError::OracleFailed("backtracking did not terminate".into()))?;
        x = cand;
        if moved <= stop * (1.0 + norm(&x)) {
            let objective = spec.objective(&x)?;
            return Ok(OracleSolution {
                x,
                objective,
                lower_bound: None,
            });
        }
        step *= 1.5;
    }
    Err(SubproblemError::OracleFailed("proximal gradient budget exhausted".into()))
}

// ---------------------------------------------------------------------------
// affine rows: dual ascent + active-set polish
// ---------------------------------------------------------------------------

/// Nonsmooth part written as Σ_r |α_r + ⟨β_r, x⟩| over the model rows and,
/// for L1, the scaled coordinate rows.
struct AbsRows {
    alpha: Vec<f64>,
    beta: Vec<Vec<f64>>,
}

impl AbsRows {
    fn new(spec: &SubproblemSpec) -> Self {
        let affine = spec.affine.as_ref().expect("affine rows present");
        let w = affine.weight;
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for (row, c) in affine.rows.iter().zip(&affine.offsets) {
            alpha.push(w * (c - dot(row, &spec.center)));
            beta.push(row.iter().map(|k| w * k).collect());
        }
        let l1 = spec.reg.l1_weight();
        if l1 > 0.0 {
            let n = spec.dimension();
            for j in 0..n {
                let mut e = vec![0.0; n];
                e[j] = l1;
                alpha.push(0.0);
                beta.push(e);
            }
        }
        Self { alpha, beta }
    }

    fn bt_y(&self, y: &[f64], n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for (b, yi) in self.beta.iter().zip(y) {
            for (o, bj) in out.iter_mut().zip(b) {
                *o += yi * bj;
            }
        }
        out
    }

    fn residual(&self, x: &[f64]) -> Vec<f64> {
        self.alpha.iter().zip(&self.beta).map(|(a, b)| a + dot(b, x)).collect()
    }
}

/// x(y) = argmin S(x) + ⟨u, x⟩ by damped Newton (exact for Euclidean).
fn inner_argmin(smooth: &Smooth, u: &[f64], start: &[f64]) -> Vec<f64> {
    let mut x = start.to_vec();
    for _ in 0..100 {
        let g: Vec<f64> = smooth.grad(&x).iter().zip(u).map(|(a, b)| a + b).collect();
        if norm(&g) <= 1e-15 * (1.0 + norm(&x)) {
            break;
        }
        let h = smooth.hessian(&x);
        let dx = match h.cholesky() {
            Some(ch) => ch.solve(&DVector::from_vec(g.clone())),
            None => break,
        };
        let step: Vec<f64> = dx.iter().cloned().collect();
        for (xi, d) in x.iter_mut().zip(&step) {
            *xi -= d;
        }
        if norm(&step) <= 1e-16 * (1.0 + norm(&x)) {
            break;
        }
    }
    x
}

fn dual_value(smooth: &Smooth, rows: &AbsRows, y: &[f64], x: &[f64]) -> Result<f64, SubproblemError> {
    let r = rows.residual(x);
    Ok(smooth.value(x)? + dot(y, &r))
}

fn dual_ascent(spec: &SubproblemSpec, tol: f64) -> Result<OracleSolution, SubproblemError> {
    let n = spec.dimension();
    let smooth = Smooth::new(spec)?;
    let rows = AbsRows::new(spec);
    let r = rows.alpha.len();
    let fro: f64 = rows.beta.iter().map(|b| norm_sq(b)).sum();
    let lip = (fro / smooth.mu()).max(1e-300);
    let eta = 1.0 / lip;

    let mut y = vec![0.0; r];
    let mut z = y.clone();
    let mut t = 1.0f64;
    let mut x_warm = spec.center.clone();
    let mut best_dual = f64::NEG_INFINITY;
    let mut best_y = y.clone();
    let mut prev_val = f64::NEG_INFINITY;

    for _ in 0..400_000 {
        let xz = inner_argmin(&smooth, &rows.bt_y(&z, n), &x_warm);
        let grad = rows.residual(&xz);
        let y_new: Vec<f64> = z
            .iter()
            .zip(&grad)
            .map(|(zi, gi)| (zi + eta * gi).clamp(-1.0, 1.0))
            .collect();
        let x_new = inner_argmin(&smooth, &rows.bt_y(&y_new, n), &xz);
        let val = dual_value(&smooth, &rows, &y_new, &x_new)?;
        if val > best_dual {
            best_dual = val;
            best_y = y_new.clone();
        }
        let moved = y_new.iter().zip(&y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        // adaptive restart on non-ascent
        let t_new = if val < prev_val {
            1.0
        } else {
            0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt())
        };
        let mom = if val < prev_val { 0.0 } else { (t - 1.0) / t_new };
        z = y_new
            .iter()
            .zip(&y)
            .map(|(a, b)| (a + mom * (a - b)).clamp(-1.0, 1.0))
            .collect();
        y = y_new;
        t = t_new;
        prev_val = val;
        x_warm = x_new;
        if moved <= 1e-15 {
            break;
        }
    }

    // candidates: x(y*) and active-set polishes at several thresholds
    let x_dual = inner_argmin(&smooth, &rows.bt_y(&best_y, n), &x_warm);
    let mut best_x = x_dual.clone();
    let mut best_obj = spec.objective(&best_x)?;
    for delta in [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12] {
        if let Some((cand, y_kkt)) = polish(&smooth, &rows, &best_y, &x_dual, delta) {
            let obj = spec.objective(&cand)?;
            if obj < best_obj {
                best_obj = obj;
                best_x = cand.clone();
            }
            // clamped multipliers are dual feasible, so any of them bounds
            let y_feas: Vec<f64> = y_kkt.iter().map(|v| v.clamp(-1.0, 1.0)).collect();
            let x_y = inner_argmin(&smooth, &rows.bt_y(&y_feas, n), &cand);
            best_dual = best_dual.max(dual_value(&smooth, &rows, &y_feas, &x_y)?);
        }
    }
    let gap = best_obj - best_dual;
    if !(gap <= tol * (1.0 + best_obj.abs())) {
        return Err(SubproblemError::OracleFailed(format!(
            "duality gap {gap:e} above tolerance {tol:e}"
        )));
    }
    Ok(OracleSolution {
        x: best_x,
        objective: best_obj,
        lower_bound: Some(best_dual),
    })
}

/// Rows with |y_r| < 1 − δ are forced to zero, the rest enter linearly with
/// sign(y_r); the resulting equality-constrained smooth problem is solved by
/// Newton steps on its KKT system. Returns the point and the full multiplier
/// vector (signs on the linear rows, KKT multipliers on the zero rows).
fn polish(
    smooth: &Smooth,
    rows: &AbsRows,
    y: &[f64],
    start: &[f64],
    delta: f64,
) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = start.len();
    let mut lin = vec![0.0; n];
    let mut eq_rows: Vec<(&Vec<f64>, f64)> = Vec::new();
    let mut eq_index = Vec::new();
    let mut y_out: Vec<f64> = y.iter().map(|v| v.signum()).collect();
    for (r, ((b, a), yi)) in rows.beta.iter().zip(&rows.alpha).zip(y).enumerate() {
        if yi.abs() < 1.0 - delta {
            eq_rows.push((b, *a));
            eq_index.push(r);
        } else {
            let s = yi.signum();
            for (l, bj) in lin.iter_mut().zip(b) {
                *l += s * bj;
            }
        }
    }
    let p = eq_rows.len();
    let mut x = start.to_vec();
    for _ in 0..50 {
        let g: Vec<f64> = smooth.grad(&x).iter().zip(&lin).map(|(a, b)| a + b).collect();
        let h = smooth.hessian(&x);
        let mut kkt = DMatrix::<f64>::zeros(n + p, n + p);
        let mut rhs = DVector::<f64>::zeros(n + p);
        for i in 0..n {
            for j in 0..n {
                kkt[(i, j)] = h[(i, j)];
            }
            rhs[i] = -g[i];
        }
        for (k, (b, a)) in eq_rows.iter().enumerate() {
            for j in 0..n {
                kkt[(n + k, j)] = b[j];
                kkt[(j, n + k)] = b[j];
            }
            rhs[n + k] = -(a + dot(b, &x));
        }
        let sol = kkt.svd(true, true).solve(&rhs, 1e-14).ok()?;
        let dx: Vec<f64> = (0..n).map(|i| sol[i]).collect();
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
        for (k, &r) in eq_index.iter().enumerate() {
            y_out[r] = sol[n + k];
        }
        if norm(&dx) <= 1e-15 * (1.0 + norm(&x)) {
            break;
        }
    }
    if x.iter().chain(&y_out).all(|v| v.is_finite()) {
        Some((x, y_out))
    } else {
        None
    }
}
