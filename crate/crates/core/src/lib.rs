//! Exact work/heat statistics for many-spin quantum Otto engines whose
//! working medium couples to the baths either collectively (through the
//! total angular momentum) or spin by spin.
//!
//! The crate is organized bottom-up:
//!
//! * [`spectra`]: collective angular-momentum blocks and model spectra.
//! * [`steady_state`]: Gibbs populations per block and block mixtures.
//! * [`thermo`]: energy variance and heat capacity, exact and asymptotic.
//! * [`work_stats`]: two-point-measurement work/heat distributions,
//!   their moments, and the closed-form characteristic function.
//! * [`metrics`]: reliability, entropy production and uncertainty bounds.
//! * [`dynamics`]: collective rate equations inside one angular-momentum block.
//! * [`sweep`]: parameter grids, scaling fits and contour extraction.
//! * [`validate`]: the oracle suites behind `otto validate`.
//!
//! Units: ħ = k_B = 1 throughout.

pub mod dynamics;
mod error;
pub mod exec;
mod half;
pub mod io;
pub mod metrics;
pub mod spectra;
pub mod steady_state;
pub mod sum;
pub mod sweep;
pub mod thermo;
pub mod validate;
pub mod work_stats;

pub use error::{Error, Result};
pub use exec::Execution;
pub use half::HalfInt;
