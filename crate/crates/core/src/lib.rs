//! Intermediate asymptotics of the capillary-driven thin film equation.
//!
//! * [`kernel`]: the Green's function and its universal self-similar profile φ.
//! * [`linear`]: spectral evolution of the linearised equation.
//! * [`nonlinear`]: positivity-preserving implicit solver for the full equation.
//! * [`similarity`]: rescaling, distances to φ, and the convergence bound.
//! * [`config`], [`run`], [`io`], [`units`]: the command-line layer.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod config;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernel;
pub mod linear;
pub mod nonlinear;
pub mod par;
pub mod profile;
pub mod quadrature;
pub mod run;
pub mod similarity;
pub mod units;

pub use error::{Error, Result};
pub use grid::{Field, FieldKind, Grid1D};
pub use kernel::{KernelMethod, KernelSpec, SimilarityExponents};
pub use nonlinear::{NonlinearConfig, StepDiagnostics};
pub use par::Execution;
pub use profile::{ProfileSpec, Shape};
pub use similarity::{ConvergenceReport, Normalisation, RescaledProfile};
