//! Weighted-particle solver for the gyro-averaged Vlasov–Poisson system in
//! the two-dimensional finite Larmor radius regime, together with a solver
//! for the stiff ε-scaled system it approximates.

pub mod app;
pub mod diagnostics;
pub mod ensemble;
pub mod error;
pub mod full;
pub mod geometry;
pub mod kernel;
pub mod limit;
mod stepping;

pub use ensemble::{Ensemble, Frame, Particle, PhysicalParams, TrajectoryRecord};
pub use error::{ConfigError, Error, Result};
pub use geometry::{perp, rotate, Vec2};
