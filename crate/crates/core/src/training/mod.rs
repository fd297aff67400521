//! Burn-in, student initialization, the teacher-reference-student stage,
//! and run persistence.

mod augment;
mod checkpoint;
mod config;
mod optim;
mod trainer;

pub use augment::{augment, augment_features, AugmentParams, Strength};
pub use checkpoint::{
    decode_params, encode_params, load_checkpoint, load_params, save_checkpoint, save_params,
};
pub use config::{ComponentToggles, TrainConfig};
pub use optim::Adam;
pub use trainer::{
    ema_update, ema_update_in_place, metrics_csv_string, parse_metrics_csv, train,
    train_supervised, write_metrics_csv, EpochMetrics, Stage, SupervisedOutcome, Trainer,
    TrainOutcome, TrsState, METRICS_HEADER,
};
