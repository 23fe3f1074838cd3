//! Recourse verification over discrete feature spaces.
//!
//! An [`ActionSetSpec`] describes which changes a person can make to their
//! features. From it the crate enumerates reachable sets, decides whether a
//! classifier offers recourse at a point, and audits whole datasets.

pub mod actionset;
pub mod audit;
pub mod models;
pub mod point;
pub mod reachable;
pub mod solver;
pub mod verify;

pub use actionset::{parse_action_set, serialize_action_set, ActionSetSpec, ConstraintSpec, FeatureSpec, Sign, ValueType};
pub use point::{Action, Point};
