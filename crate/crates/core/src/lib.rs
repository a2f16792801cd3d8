//! Algebraic separation of variables for Lax matrices.
//!
//! * [`kernel`]: polynomials, matrices, roots, resultants, quadrature, ODEs.
//! * [`rational`]: matrix polynomials, the (a,b) bracket family, spectral curves,
//!   divisor coordinates, flows and linearizing integrals.
//! * [`theta`]: theta functions and the basic section of the rank-r bundle.
//! * [`elliptic`]: quasi-periodic Lax matrices on an elliptic curve and their divisors.
//! * [`harness`]: instance documents, reports and the acceptance matrix behind the CLI.

pub mod config;
pub mod elliptic;
pub mod error;
pub mod harness;
pub mod kernel;
pub mod rational;
pub mod theta;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use kernel::C64;
