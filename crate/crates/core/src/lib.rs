//! Calculus and function theory on the quantum unit disk.
//!
//! Two engines share one [`QContext`]: an exact symbolic engine over
//! normal-ordered polynomials ([`polalg`]) and a numeric engine over finite
//! truncations in the canonical basis ([`opmat`]). On top of them sit the
//! analytic model on the weighted Bergman space ([`bergman`]) and the
//! holomorphic and harmonic function theory ([`function_theory`]).

pub mod bergman;
pub mod boundary;
pub mod cli;
pub mod error;
pub mod function_theory;
pub mod gauss;
mod linalg;
pub mod opmat;
pub mod polalg;
pub mod qnum;
pub mod verify;

pub use boundary::BoundaryFunction;
pub use error::{QDiskError, Result};
pub use gauss::GaussRat;
pub use polalg::{LaplaceOrder, NormalPoly};
pub use qnum::{QContext, Tolerances};
