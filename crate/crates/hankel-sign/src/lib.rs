//! Sign-definiteness of Hankel integral operators `(Hf)(t) = ∫ h(t+s) f(s) ds`.
//!
//! The crate computes the sign-function `s(x)` of a kernel through the Mellin
//! chain h → a → b → s, applies the closed-form eigenvalue-count rules, and
//! checks them against Galerkin and collocation discretizations.

pub mod discretize;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod quad;
pub mod run;
pub mod signdef;
pub mod specfun;
pub mod transforms;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Axis, Cplx, GridFunction};
pub use kernels::KernelSpec;
