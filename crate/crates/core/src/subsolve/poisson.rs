//! Closed-form update for the Burg kernel on `C_ε = {x ≥ ε}`.
//!
//! The subproblem separates over coordinates; each one is convex on x > 0,
//! so the constrained minimizer is the unconstrained stationary point
//! clipped at ε.

use crate::kernel::KernelKind;
use crate::regularizer::RegKind;

use super::{SubproblemError, SubproblemSpec};

pub fn poisson_step(spec: &SubproblemSpec) -> Result<Vec<f64>, SubproblemError> {
    if spec.kernel.kind != KernelKind::Burg {
        return Err(SubproblemError::Misconfigured(format!(
            "Poisson step needs the Burg kernel, got {:?}",
            spec.kernel.kind
        )));
    }
    let grad = spec
        .linear_part
        .as_ref()
        .ok_or_else(|| SubproblemError::Misconfigured("Poisson step needs a gradient".into()))?;
    let eps = spec
        .box_floor
        .ok_or_else(|| SubproblemError::Misconfigured("Poisson step needs the floor epsilon".into()))?;
    if !(eps > 0.0) {
        return Err(SubproblemError::Misconfigured("epsilon must be positive".into()));
    }
    if spec.affine.is_some() {
        return Err(SubproblemError::Misconfigured("Poisson step has no affine rows".into()));
    }
    spec.validate()?;
    if let Some(i) = spec.center.iter().position(|&v| v < eps) {
        return Err(SubproblemError::Misconfigured(format!(
            "center coordinate {i} = {} lies below epsilon",
            spec.center[i]
        )));
    }

    let tau = spec.tau;
    let lambda = spec.reg.lambda;
    let too_large = |index: usize, denominator: f64| SubproblemError::StepTooLarge {
        tau,
        index,
        denominator,
    };
    let mut out = Vec::with_capacity(spec.center.len());
    for (i, (&xb, &g)) in spec.center.iter().zip(grad).enumerate() {
        let base = 1.0 + tau * g * xb;
        let next = match spec.reg.kind {
            RegKind::None => {
                if !(base > 0.0) {
                    return Err(too_large(i, base));
                }
                xb / base
            }
            RegKind::L1 => {
                let den = base + tau * lambda * xb;
                if !(den > 0.0) {
                    return Err(too_large(i, den));
                }
                xb / den
            }
            RegKind::SquaredL2 => {
                let den = base + tau * lambda * eps;
                if !(den > 0.0) {
                    return Err(too_large(i, den));
                }
                if lambda == 0.0 {
                    xb / base
                } else {
                    // positive root of λτx̄·x² + (1 + τx̄g)·x − x̄ = 0; the
                    // rationalised form avoids cancellation when base > 0
                    let c = 4.0 * lambda * tau * xb * xb;
                    let root = (base * base + c).sqrt();
                    if base > 0.0 {
                        2.0 * xb / (root + base)
                    } else {
                        (root - base) / (2.0 * lambda * tau * xb)
                    }
                }
            }
        };
        if !next.is_finite() {
            return Err(too_large(i, base));
        }
        out.push(next.max(eps));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
    use crate::regularizer::Regularizer;

    fn spec_1d(xb: f64, tau: f64, g: f64, reg: Regularizer) -> SubproblemSpec {
        SubproblemSpec {
            center: vec![xb],
            tau,
            kernel: KernelSpec::burg(1),
            linear_part: Some(vec![g]),
            affine: None,
            reg,
            box_floor: Some(1e-8),
        }
    }

    fn golden(spec: &SubproblemSpec) -> f64 {
        let obj = |t: f64| spec.objective(&[t]).unwrap();
        let (mut a, mut b) = (1e-8f64, 10.0f64);
        let r = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..300 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if obj(c) < obj(d) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn no_reg_example() {
        let spec = spec_1d(1.0, 0.5, 1.0, Regularizer::none());
        let x = poisson_step(&spec).unwrap()[0];
        assert!((x - 1.0 / 1.5).abs() < 1e-15);
        assert!((x - 0.666667).abs() < 1e-6);
        assert!((x - golden(&spec)).abs() < 1e-8);
    }

    #[test]
    fn stationary_center() {
        let spec = spec_1d(0.37, 0.5, 0.0, Regularizer::none());
        assert_eq!(poisson_step(&spec).unwrap(), vec![0.37]);
    }

    #[test]
    fn l1_example() {
        let spec = spec_1d(1.0, 0.5, 1.0, Regularizer::l1(0.1));
        let x = poisson_step(&spec).unwrap()[0];
        assert!((x - 1.0 / 1.55).abs() < 1e-15);
        assert!((x - 0.645161).abs() < 1e-6);
        assert!((x - golden(&spec)).abs() < 1e-8);
    }

    #[test]
    fn l2_matches_golden_section() {
        for g in [-1.5, 0.0, 2.0] {
            let spec = spec_1d(1.3, 0.4, g, Regularizer::squared_l2(0.7));
            let x = poisson_step(&spec).unwrap()[0];
            assert!((x - golden(&spec)).abs() < 1e-7, "g={g}: {x}");
        }
    }

    #[test]
    fn clips_at_epsilon() {
        // huge positive gradient drives the coordinate toward zero
        let spec = spec_1d(1.0, 1.0, 1e12, Regularizer::none());
        assert_eq!(poisson_step(&spec).unwrap(), vec![1e-8]);
    }

    #[test]
    fn inadmissible_step_is_signalled() {
        let spec = spec_1d(1.0, 1.0, -2.0, Regularizer::none());
        assert!(matches!(
            poisson_step(&spec),
            Err(SubproblemError::StepTooLarge { index: 0, .. })
        ));
    }
}
