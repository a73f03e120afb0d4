//! Lazy primal-dual online learners for online convex optimization with
//! time-varying constraints and untrusted predictions of the upcoming cost
//! and constraint functions.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix it to one precision.

pub mod analysis;
pub mod driver;
pub mod error;
pub mod learner;
pub mod linalg;
pub mod predictors;
pub mod problem;
pub mod scalar;
pub mod sets;
pub mod solver;

pub use driver::{simulate, Trace};
pub use error::{LlpError, Result};
pub use learner::{build_learner, LearnerConfig, OnlineLearner, RoundRecord, Variant};
pub use predictors::{PredictionBundle, Predictor};
pub use problem::{Environment, ProblemBounds, RoundOracle};
pub use scalar::Scalar;
pub use sets::ConvexSet;

pub type LearnerConfig64 = LearnerConfig<f64>;
pub type LearnerConfig32 = LearnerConfig<f32>;
pub type Trace64 = Trace<f64>;
pub type Trace32 = Trace<f32>;
pub type RoundRecord64 = RoundRecord<f64>;
pub type RoundRecord32 = RoundRecord<f32>;
pub type ConvexSet64 = ConvexSet<f64>;
pub type ConvexSet32 = ConvexSet<f32>;
pub type Predictor64 = Predictor<f64>;
pub type Predictor32 = Predictor<f32>;
