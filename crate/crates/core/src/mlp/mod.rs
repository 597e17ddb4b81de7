//! From-scratch multilayer-perceptron surrogate.

mod adam;
mod metrics;
mod model;
mod network;
mod search;
mod train;

pub use adam::Adam;
pub use metrics::{regression_metrics, Metrics};
pub use model::{
    evaluate_metrics, load_model, normalize_rows, save_model, MlpConfig, MlpModel, Prediction,
    INPUT_WIDTH, OUTPUT_WIDTH,
};
pub use network::{Activation, Dropout, Gradients, Layer, Network, Trace};
pub use search::{compare_candidates, grid_search, mean_curve, ScoreRow, SearchOutcome, SearchSpace};
pub use train::{curve_csv, train, train_on, LossPoint, TrainOutcome};
