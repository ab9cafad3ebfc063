//! Path planning for constant-speed-through-water vehicles (ocean gliders and
//! similar) in time-varying two-dimensional current fields.
//!
//! The crate is organised bottom-up:
//!
//! - [`flow_field`]: analytic current fields with exact partial derivatives.
//! - [`graph`]: immutable geometric grid graphs with n-sector connectivity.
//! - [`cost`]: edge travel time through the current and cross-track area.
//! - [`zermelo`]: heading-rate law, optimal-course prediction and shooting.
//! - [`search`]: the time-varying Dijkstra/A* family with successor gating.
//! - [`departure`]: optimal departure time detection.
//! - [`validation`]: independent oracles used by tests and the CLI.
//! - [`fixtures`]: the bundled meandering-jet scenarios.

pub mod cost;
pub mod counters;
pub mod departure;
pub mod error;
pub mod fixtures;
pub mod flow_field;
pub mod geom;
pub mod graph;
pub mod search;
pub mod validation;
pub mod zermelo;

pub use counters::Tally;
pub use error::{Error, Result};
pub use geom::{wrap_angle, Vec2};
