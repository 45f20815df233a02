//! Closed-form update for h(x) = ¼‖x‖⁴ + ½‖x‖².
//!
//! ∇h(x) = (‖x‖² + 1)·x is radial, so the optimality condition
//! `∇h(x) + τ∂𝓡(x) ∋ ∇h(x̄) − τg` collapses (after the regularizer's prox)
//! to `(‖x‖² + a)·x = p` for some vector `p` and scalar `a > 0`. Writing
//! `x = (t/a)·p` turns that into the scalar cubic `s·t³ + t − 1 = 0` with
//! `s = ‖p‖²/a³`, which has exactly one root in (0, 1].

use crate::kernel::KernelKind;
use crate::linalg::norm_sq;
use crate::regularizer::RegKind;

use super::{prox_l1, SubproblemError, SubproblemSpec};

/// Unique positive root of `s·t³ + t − 1 = 0` for `s ≥ 0`.
pub fn quartic_radial_scale(s: f64) -> f64 {
    if !(s > 0.0) {
        return 1.0;
    }
    // φ(t) = s t³ + t − 1 is convex increasing on t ≥ 0 with φ(0) = −1 and
    // φ(min(1, s^{-1/3})) ≥ 0, so Newton from the right decreases
    // monotonically onto the root. Bisection takes over if that ever breaks.
    let phi = |t: f64| s * t * t * t + t - 1.0;
    let mut lo = 0.0f64;
    let mut hi = 1.0f64.min(s.cbrt().recip());
    let mut t = hi;
    for _ in 0..100 {
        let f = phi(t);
        if f == 0.0 {
            return t;
        }
        if f > 0.0 {
            hi = hi.min(t);
        } else {
            lo = lo.max(t);
        }
        let df = 3.0 * s * t * t + 1.0;
        let mut next = t - f / df;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * t.max(f64::MIN_POSITIVE) {
            t = next;
            break;
        }
        t = next;
    }
    t
}

/// Solves `(‖x‖² + a)·x = p` for `a > 0`.
pub(crate) fn radial_solve(p: &[f64], a: f64) -> Vec<f64> {
    let s = norm_sq(p) / (a * a * a);
    let t = quartic_radial_scale(s);
    p.iter().map(|v| t * v / a).collect()
}

/// Exact minimizer of `⟨g, x⟩ + 𝓡(x) + (1/τ)D_h(x, x̄)` for the quartic kernel.
pub fn bpg_step_quartic(spec: &SubproblemSpec) -> Result<Vec<f64>, SubproblemError> {
    if spec.kernel.kind != KernelKind::QuarticPlusQuadratic {
        return Err(SubproblemError::Misconfigured(format!(
            "closed-form quartic step needs the quartic kernel, got {:?}",
            spec.kernel.kind
        )));
    }
    let g = spec.linear_part.as_ref().ok_or_else(|| {
        SubproblemError::Misconfigured("closed-form quartic step needs a linear part".into())
    })?;
    if spec.affine.is_some() || spec.box_floor.is_some() {
        return Err(SubproblemError::Misconfigured(
            "closed-form quartic step supports neither affine rows nor box constraints".into(),
        ));
    }
    spec.validate()?;
    let tau = spec.tau;
    let grad_center = spec.kernel.grad(&spec.center)?;
    let q: Vec<f64> = grad_center.iter().zip(g).map(|(h, gi)| h - tau * gi).collect();
    let x = match spec.reg.kind {
        RegKind::None => radial_solve(&q, 1.0),
        RegKind::L1 => radial_solve(&prox_l1(&q, tau * spec.reg.lambda), 1.0),
        RegKind::SquaredL2 => radial_solve(&q, 1.0 + tau * spec.reg.lambda),
    };
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::regularizer::Regularizer;

    /// Bisection oracle for the cubic on [0, 1].
    fn bisect(s: f64) -> f64 {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if s * mid * mid * mid + mid - 1.0 > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn radial_scale_examples() {
        assert_eq!(quartic_radial_scale(0.0), 1.0);
        let t2 = quartic_radial_scale(2.0);
        assert!((t2 - bisect(2.0)).abs() < 1e-12);
        assert!((t2 - 0.58975).abs() < 1e-5);
        let tb = quartic_radial_scale(1e6);
        assert!((tb - bisect(1e6)).abs() < 1e-12);
        assert!((tb - 0.00997).abs() < 1e-5);
    }

    #[test]
    fn radial_scale_residual_sweep() {
        let mut s = 1e-12;
        while s <= 1e6 {
            let t = quartic_radial_scale(s);
            assert!(t > 0.0 && t <= 1.0);
            assert!((s * t * t * t + t - 1.0).abs() <= 1e-11, "s={s}");
            s *= 1.37;
        }
    }

    #[test]
    fn radial_solve_satisfies_equation() {
        let p = [3.0, -1.0, 0.5];
        for a in [0.5, 1.0, 7.0] {
            let x = radial_solve(&p, a);
            let c = norm_sq(&x) + a;
            for (xi, pi) in x.iter().zip(&p) {
                assert!((c * xi - pi).abs() < 1e-12);
            }
        }
    }

    fn spec_1d(center: f64, tau: f64, g: f64, reg: Regularizer) -> SubproblemSpec {
        SubproblemSpec {
            center: vec![center],
            tau,
            kernel: KernelSpec::quartic(1),
            linear_part: Some(vec![g]),
            affine: None,
            reg,
            box_floor: None,
        }
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let spec = SubproblemSpec {
            center: vec![0.4, -1.3, 2.0],
            tau: 0.3,
            kernel: KernelSpec::quartic(3),
            linear_part: Some(vec![0.0; 3]),
            affine: None,
            reg: Regularizer::none(),
            box_floor: None,
        };
        let x = bpg_step_quartic(&spec).unwrap();
        for (a, b) in x.iter().zip(&spec.center) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_step_matches_golden_section() {
        let spec = spec_1d(1.0, 0.1, 4.0, Regularizer::none());
        let x = bpg_step_quartic(&spec).unwrap()[0];
        // golden-section on the scalar subproblem
        let obj = |t: f64| spec.objective(&[t]).unwrap();
        let (mut a, mut b) = (-5.0f64, 5.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if obj(c) < obj(d) {
                b = d;
            } else {
                a = c;
            }
        }
        assert!((x - 0.5 * (a + b)).abs() < 1e-8, "{x} vs {}", 0.5 * (a + b));
    }
}
