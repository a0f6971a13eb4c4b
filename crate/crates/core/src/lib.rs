//! Safe circumnavigation of a hostile target by a constant-speed unicycle,
//! steered by a barrier-Lyapunov turn-rate law that needs only range and
//! range rate.
//!
//! - [`params`]: radii geometry and derived design constants
//! - [`dynamics`]: Cartesian and polar kinematics
//! - [`controller`]: the turn-rate laws and the range-rate estimator
//! - [`sim`]: fixed-step closed-loop simulator with crossing events
//! - [`analysis`]: linearization and trajectory audits
//! - [`diffdrive`]: wheel-speed conversion and saturation checks
//! - [`cli`]: config files, output bundles and the command implementations

pub mod analysis;
pub mod cli;
pub mod controller;
pub mod diffdrive;
pub mod dynamics;
pub mod error;
pub mod params;
pub mod sim;

pub use error::{Error, GeometryError, Result};
