//! Linear classification head over provision embeddings: training loop,
//! prediction, metrics, stratified cross-validation and soft-voting
//! ensembles.

mod cv;
mod ensemble;
mod head;
mod loss;
mod metrics;
mod table;

pub use cv::{cross_validate, stratified_folds, CrossValidation, CvSummary, MeanStd};
pub use ensemble::ensemble_predict;
pub use head::{predict, train_head, LinearHead, Prediction, TrainConfig};
pub use loss::{cross_entropy_loss, softmax, PROB_FLOOR};
pub use metrics::{compute_metrics, ClassMetrics, MetricsReport};
pub use table::{percent, render_metrics_table, ModelScores};
