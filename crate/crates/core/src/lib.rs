//! Simulation of hierarchical federated learning over a LEO constellation:
//! satellites train locally, propagate models along their orbital ring, and a
//! scheduled sink per orbit exchanges the orbit's partial model with a single
//! ground station. A sequential star-topology baseline runs on the same
//! scenario for comparison.
//!
//! The orbital, link and learning math is generic over [`Scalar`] (`f32` or
//! `f64`); the event simulator and scheduler run on `f64` seconds. The `*64`
//! aliases below name the concrete types the simulator uses.

pub mod error;
pub mod fl;
pub mod link;
pub mod orbital;
pub mod report;
pub mod scalar;
pub mod scenario;
pub mod scheduler;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ConstellationSpec64 = orbital::ConstellationSpec<f64>;
pub type GroundStation64 = orbital::GroundStation<f64>;
pub type PhysicalConstants64 = orbital::PhysicalConstants<f64>;
pub type AccessWindow64 = orbital::AccessWindow<f64>;
pub type AccessTable64 = orbital::AccessTable<f64>;
pub type LinkBudget64 = link::LinkBudget<f64>;
pub type ModelState64 = fl::ModelState<f64>;
pub type Dataset64 = fl::Dataset<f64>;
pub type DataShard64 = fl::DataShard<f64>;
pub type TrainingConfig64 = fl::TrainingConfig<f64>;

pub type ModelState32 = fl::ModelState<f32>;
pub type Dataset32 = fl::Dataset<f32>;
