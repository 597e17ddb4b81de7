//! Surrogate-assisted design of fin-ray soft fingers: a grid dataset from a
//! stand-in FEM oracle, an MLP surrogate, and NSGA-II over the surrogate.

pub mod dataset;
pub mod design_space;
pub mod error;
pub mod mlp;
pub mod nsga2;
pub mod oracle;
pub mod pareto;
pub mod rng;
pub mod runner;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type DesignPointF64 = design_space::DesignPoint<f64>;
pub type DesignSpaceF64 = design_space::DesignSpace<f64>;
pub type DatasetF64 = dataset::Dataset<f64>;
pub type MlpModelF64 = mlp::MlpModel<f64>;
pub type DesignSolutionF64 = pareto::DesignSolution<f64>;

pub type DesignPointF32 = design_space::DesignPoint<f32>;
pub type DesignSpaceF32 = design_space::DesignSpace<f32>;
pub type DatasetF32 = dataset::Dataset<f32>;
pub type MlpModelF32 = mlp::MlpModel<f32>;
pub type DesignSolutionF32 = pareto::DesignSolution<f32>;
