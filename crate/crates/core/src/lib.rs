//! Passive-scalar decay in shear flows.
//!
//! The crate evolves `f_t + b(y) f_x - nu f_yy = 0` on `T x D` mode by mode
//! in `x`, checks the solver against exact and dense references, measures
//! enhanced-dissipation timescales over `nu`-sweeps, and evaluates the
//! Besov-type quotient norms and inequalities that control the decay.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod discretize;
pub mod error;
pub mod harness;
pub mod norms;
pub mod oracle;
pub mod profiles;
pub mod solver;
pub mod tridiag;

pub use discretize::{BoundaryCondition, DiffusionOperator, Grid};
pub use error::{Error, Result};
pub use profiles::{predicted_exponent, ShearProfile};
pub use solver::{evolve, EvolveOptions, ModeField, Trajectory, YScheme};
