//! Model-based Bregman proximal gradient (Model BPG) for nonconvex,
//! nonsmooth composite problems, with certified descent diagnostics.

pub mod cli;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod problems;
pub mod regularizer;
pub mod solver;
pub mod subsolve;

pub use kernel::{KernelError, KernelKind, KernelSpec};
pub use model::{ModelError, ModelProblem};
pub use regularizer::{RegKind, Regularizer};
