//! A two-branch message-passing network over the source and sink line
//! graphs of a directed graph, trained to approximate its degree-0 and
//! degree-1 persistence diagrams and to predict a graph label.

pub mod error;
pub mod gradcheck;
pub mod io;
pub mod loss;
pub mod model;
pub mod tape;
pub mod train;

pub use error::{NnError, Result};
pub use gradcheck::{gradient_check, GradCheckReport};
pub use io::{load_model, load_model_as, save_model};
pub use loss::{
    batch_gradient, batch_loss, joint_loss, point_wd, sample_gradient, sample_loss, target_points,
    Sample,
};
pub use model::{
    argmax, init_features, predict, predict_label, predict_pd0, predict_pd1, sslgnn_forward,
    GraphInput, ModelConfig, ModelState, Pooling, Prediction,
};
pub use train::{
    constant_baseline_wd0, evaluate, split_indices, train, train_split, EpochRecord, Evaluation,
    History, TrainConfig,
};
