//! Quotient norms along `d_x`, `y d_x` and `d_y`, their Littlewood-Paley
//! characterization in `x`, and numerical checks of the inequalities that
//! tie them to the energy quantities.
//!
//! Solver output is measured through sharp dyadic blocks in the x-mode
//! index. The finite-difference definitions are only evaluated on synthetic
//! fields on `T x R`, which are stored as [`ModeField`]s on a dirichlet grid
//! over a symmetric y-box and must vanish near its ends.
//!
//! [`ModeField`]: crate::solver::ModeField

mod gevrey;
mod inequalities;
mod lp;
mod quotient;
mod spacetime;

pub use gevrey::{gevrey_bisect, gevrey_monitor, GevreyCurve, GEVREY_BOUND};
pub use inequalities::{
    calibration_family, family_norms, verify, verify_bracket_inequality, verify_interpolation_inequality,
    verify_prop_subelliptic, verify_sample_subelliptic, FamilyMember, FieldNorms, Inequality,
    PropReport, RatioStats, SPREAD_LIMIT,
};
pub use lp::{
    block_index, fractional_poincare_check, log_convexity_ratio, poincare_constant, q_norm_x,
    LpDecomposition, PoincareReport,
};
pub use quotient::{
    default_sigmas, q_norm_finite_difference, touches_boundary, yx_hminus1_norm, Direction,
};
pub use spacetime::SpaceTimeField;
