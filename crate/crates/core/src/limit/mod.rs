//! The gyro-averaged (ε → 0) particle dynamics.

pub mod fields;
mod gates;
pub mod integrator;
pub mod tree;

pub use fields::{
    acceleration_field, field_at, fields, potential_excluding, potential_tilde, velocity_field,
    FieldSample,
};
pub use integrator::{integrate, step, step_by, IntegratorConfig, Scheme, Summation};
pub use tree::{build_tree, fast_velocity_field, fast_velocity_fields, QuadTree, TreeOptions};
