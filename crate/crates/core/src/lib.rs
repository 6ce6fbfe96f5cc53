//! Counterfactual explanations for LiDAR-driven navigation policies.
//!
//! Given a base scan, a goal, and a policy model, the search evolves a set of
//! circle and rectangle obstacles whose simulated returns, merged into the
//! base scan, push the model's action into a requested interval.
//!
//! Conventions used throughout: the sensor sits at the origin of its own
//! frame facing +x; ray `i` of `n` has heading `2πi/n`, counter-clockwise;
//! a ray that hits nothing reads exactly `max_range`.

pub mod cfe;
pub mod error;
pub mod ga;
pub mod geometry;
pub mod model;
pub mod par;
pub mod scan;

pub use error::{Error, Result};
