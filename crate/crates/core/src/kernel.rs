//! Legendre kernels and the Bregman distances they generate.
//!
//! Four kernels ship with the crate:
//!
//! | kind                   | h(x)                         | dom h      |
//! |------------------------|------------------------------|------------|
//! | `Euclidean`            | ½‖x‖²                        | ℝᴺ         |
//! | `Burg`                 | −Σ log xᵢ                    | ℝᴺ₊₊       |
//! | `BoltzmannShannon`     | Σ xᵢ log xᵢ  (0 log 0 = 0)   | ℝᴺ₊        |
//! | `QuarticPlusQuadratic` | ¼‖x‖⁴ + ½‖x‖²                | ℝᴺ         |
//!
//! Further kernels can be added by extending [`KernelKind`]; every match in
//! this module is exhaustive so the compiler lists the places to fill in.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, norm_sq};

/// Coordinates of a Burg argument below this are rejected instead of letting
/// `-1/x` overflow.
pub const BURG_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KernelKind {
    Euclidean,
    Burg,
    BoltzmannShannon,
    QuarticPlusQuadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub dimension: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("{kind:?} kernel expects dimension {expected}, got {got}")]
    DimensionMismatch {
        kind: KernelKind,
        expected: usize,
        got: usize,
    },
    #[error("{kind:?} kernel: coordinate {index} = {value} lies outside dom h")]
    OutsideDomain {
        kind: KernelKind,
        index: usize,
        value: f64,
    },
    #[error("{kind:?} kernel: coordinate {index} = {value} is not in the interior of dom h")]
    NotInterior {
        kind: KernelKind,
        index: usize,
        value: f64,
    },
}

/// A Bregman distance value together with the kernel that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BregmanEval {
    pub value: f64,
    pub generated_by: KernelSpec,
}

impl KernelSpec {
    pub fn new(kind: KernelKind, dimension: usize) -> Self {
        Self { kind, dimension }
    }

    pub fn euclidean(dimension: usize) -> Self {
        Self::new(KernelKind::Euclidean, dimension)
    }

    pub fn burg(dimension: usize) -> Self {
        Self::new(KernelKind::Burg, dimension)
    }

    pub fn boltzmann_shannon(dimension: usize) -> Self {
        Self::new(KernelKind::BoltzmannShannon, dimension)
    }

    pub fn quartic(dimension: usize) -> Self {
        Self::new(KernelKind::QuarticPlusQuadratic, dimension)
    }

    /// True when dom h is all of ℝᴺ.
    pub fn full_domain(&self) -> bool {
        matches!(
            self.kind,
            KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic
        )
    }

    fn check_dim(&self, x: &[f64]) -> Result<(), KernelError> {
        if x.len() != self.dimension {
            return Err(KernelError::DimensionMismatch {
                kind: self.kind,
                expected: self.dimension,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// Checks `x ∈ dom h`.
    pub fn check_domain(&self, x: &[f64]) -> Result<(), KernelError> {
        self.check_dim(x)?;
        let bad = |index: usize, value: f64| KernelError::OutsideDomain {
            kind: self.kind,
            index,
            value,
        };
        for (i, &v) in x.iter().enumerate() {
            let ok = match self.kind {
                KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic => v.is_finite(),
                KernelKind::Burg => v.is_finite() && v >= BURG_FLOOR,
                KernelKind::BoltzmannShannon => v.is_finite() && v >= 0.0,
            };
            if !ok {
                return Err(bad(i, v));
            }
        }
        Ok(())
    }

    /// Checks `x ∈ int dom h`.
    pub fn check_interior(&self, x: &[f64]) -> Result<(), KernelError> {
        self.check_dim(x)?;
        for (i, &v) in x.iter().enumerate() {
            let ok = match self.kind {
                KernelKind::Euclidean | KernelKind::QuarticPlusQuadratic => v.is_finite(),
                KernelKind::Burg => v.is_finite() && v >= BURG_FLOOR,
                KernelKind::BoltzmannShannon => v.is_finite() && v > 0.0,
            };
            if !ok {
                return Err(KernelError::NotInterior {
                    kind: self.kind,
                    index: i,
                    value: v,
                });
            }
        }
        Ok(())
    }

    /// h(x).
    pub fn value(&self, x: &[f64]) -> Result<f64, KernelError> {
        self.check_domain(x)?;
        Ok(match self.kind {
            KernelKind::Euclidean => 0.5 * norm_sq(x),
            KernelKind::Burg => -x.iter().map(|v| v.ln()).sum::<f64>(),
            KernelKind::BoltzmannShannon => x
                .iter()
                .map(|&v| if v == 0.0 { 0.0 } else { v * v.ln() })
                .sum(),
            KernelKind::QuarticPlusQuadratic => {
                let s = norm_sq(x);
                0.25 * s * s + 0.5 * s
            }
        })
    }

    /// ∇h(x), defined on the interior of the domain only.
    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>, KernelError> {
        self.check_interior(x)?;
        Ok(match self.kind {
            KernelKind::Euclidean => x.to_vec(),
            KernelKind::Burg => x.iter().map(|v| -1.0 / v).collect(),
            KernelKind::BoltzmannShannon => x.iter().map(|v| 1.0 + v.ln()).collect(),
            KernelKind::QuarticPlusQuadratic => {
                let c = norm_sq(x) + 1.0;
                x.iter().map(|v| c * v).collect()
            }
        })
    }

    /// ∇²h(x)·v.
    pub fn hess_apply(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>, KernelError> {
        self.check_interior(x)?;
        self.check_dim(v)?;
        Ok(match self.kind {
            KernelKind::Euclidean => v.to_vec(),
            KernelKind::Burg => x.iter().zip(v).map(|(xi, vi)| vi / (xi * xi)).collect(),
            KernelKind::BoltzmannShannon => x.iter().zip(v).map(|(xi, vi)| vi / xi).collect(),
            KernelKind::QuarticPlusQuadratic => {
                let c = norm_sq(x) + 1.0;
                let xv = dot(x, v);
                x.iter()
                    .zip(v)
                    .map(|(xi, vi)| c * vi + 2.0 * xv * xi)
                    .collect()
            }
        })
    }

    /// D_h(x, y) via the kernel-specific closed form.
    ///
    /// Requires `x ∈ dom h` and `y ∈ int dom h`. The closed forms are arranged
    /// as sums of nonnegative terms so the result does not go negative through
    /// cancellation.
    pub fn bregman(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        self.check_domain(x)?;
        self.check_interior(y)?;
        Ok(match self.kind {
            KernelKind::Euclidean => 0.5 * sq_dist(x, y),
            KernelKind::Burg => x
                .iter()
                .zip(y)
                .map(|(xi, yi)| {
                    let d = xi / yi - 1.0;
                    d - d.ln_1p()
                })
                .sum(),
            KernelKind::BoltzmannShannon => x
                .iter()
                .zip(y)
                .map(|(&xi, &yi)| {
                    if xi == 0.0 {
                        yi
                    } else {
                        xi * (xi.ln() - yi.ln()) - (xi - yi)
                    }
                })
                .sum(),
            KernelKind::QuarticPlusQuadratic => {
                // ½‖x−y‖² + ¼(‖x‖²−‖y‖²)² + ½‖y‖²‖x−y‖²
                let d2 = sq_dist(x, y);
                let nx = norm_sq(x);
                let ny = norm_sq(y);
                0.5 * d2 + 0.25 * (nx - ny) * (nx - ny) + 0.5 * ny * d2
            }
        })
    }

    pub fn bregman_eval(&self, x: &[f64], y: &[f64]) -> Result<BregmanEval, KernelError> {
        Ok(BregmanEval {
            value: self.bregman(x, y)?,
            generated_by: *self,
        })
    }

    /// D_h(x, y) = h(x) − h(y) − ⟨x − y, ∇h(y)⟩ evaluated literally.
    pub fn bregman_generic(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        let hx = self.value(x)?;
        let hy = self.value(y)?;
        let gy = self.grad(y)?;
        let lin: f64 = x.iter().zip(y).zip(&gy).map(|((a, b), g)| (a - b) * g).sum();
        Ok(hx - hy - lin)
    }

    /// Residual of the three point identity
    /// D(x,u) − D(x,v) − D(v,u) = ⟨x − v, ∇h(v) − ∇h(u)⟩,
    /// evaluated with the generic formula so it cross-checks [`Self::bregman`].
    pub fn three_point_residual(&self, x: &[f64], u: &[f64], v: &[f64]) -> Result<f64, KernelError> {
        self.check_domain(x)?;
        self.check_interior(u)?;
        self.check_interior(v)?;
        let dxu = self.bregman_generic(x, u)?;
        let dxv = self.bregman_generic(x, v)?;
        let dvu = self.bregman_generic(v, u)?;
        let gu = self.grad(u)?;
        let gv = self.grad(v)?;
        let inner: f64 = x
            .iter()
            .zip(v)
            .zip(gv.iter().zip(&gu))
            .map(|((xi, vi), (gvi, gui))| (xi - vi) * (gvi - gui))
            .sum();
        Ok((dxu - dxv - dvu - inner).abs())
    }
}

fn sq_dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum()
}

pub fn kernel_value(k: &KernelSpec, x: &[f64]) -> Result<f64, KernelError> {
    k.value(x)
}

pub fn kernel_grad(k: &KernelSpec, x: &[f64]) -> Result<Vec<f64>, KernelError> {
    k.grad(x)
}

pub fn kernel_hess_apply(k: &KernelSpec, x: &[f64], v: &[f64]) -> Result<Vec<f64>, KernelError> {
    k.hess_apply(x, v)
}

pub fn bregman(k: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
    k.bregman(x, y)
}

pub fn three_point_residual(
    k: &KernelSpec,
    x: &[f64],
    u: &[f64],
    v: &[f64],
) -> Result<f64, KernelError> {
    k.three_point_residual(x, u, v)
}
