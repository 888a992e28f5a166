//! Small-signal analysis: equilibrium solving, exact linearization of the
//! synchronous-frame converter model, eigenvalue tables, transfer functions,
//! and classical stability margins.

pub mod freq;
pub mod linear;
pub mod model;

pub use freq::{dc_compensator_response, g_ol, margins, Margins, TransferFunction};
pub use linear::{eigenvalues, linearize, linearize_at, LinearModel};
pub use model::{
    analytic_jacobian, equilibrium_solve, finite_difference_jacobian, nonlinear_f, GridCondition,
    Mode, OperatingPoint, SmallSignalParams,
};
