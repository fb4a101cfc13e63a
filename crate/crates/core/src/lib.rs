//! Generalized probabilistic theories over polyhedral cones: state spaces,
//! tensor products, and information-processing tasks on them.

pub mod bitcommit;
pub mod composite;
pub mod error;
pub mod geometry;
pub mod infotasks;
pub mod statespace;
pub mod teleport;

pub use composite::{BipartiteState, CompositeKind, CompositeSpace};
pub use error::{GptError, Result};
pub use geometry::{Cone, Flt, Matrix, Rat, Scalar, ScalarMode, Vector};
pub use statespace::{Effect, Observable, PositiveMap, StateSpace};
