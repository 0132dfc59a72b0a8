//! Simulation and verification laboratory for last-passage percolation with
//! inhomogeneous exponential weights.
//!
//! The crate computes exact quantities from the model's limit-shape calculus
//! (shape function, critical directions, Busemann marginal rates, competition
//! interface and second-class customer laws) and checks them against Monte
//! Carlo simulation of passage times, geodesics, competition interfaces, and
//! coupled particle systems.

pub mod busemann;
pub mod competition;
pub mod environment;
pub mod error;
pub mod ext;
pub mod lattice;
pub mod lpp;
pub mod particles;
pub mod rng;
pub mod shape;
pub mod stationary;
pub mod stats;

pub use environment::{Environment, EnvironmentSpec, MeasureSpec, ParameterSequence, RecipeSpec, SubProbabilityMeasure};
pub use error::{Error, Result};
pub use ext::ExtReal;
pub use lattice::{LatticePath, PathKind, Rect, Site};
pub use lpp::{PassageField, WeightField};
pub use stats::{EmpiricalSample, TestReport};
