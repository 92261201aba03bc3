//! Training, evaluation and reports.

mod config;
mod metrics;
mod report;
mod trainer;

pub use config::{TrainConfig, CONFIG_KEYS};
pub use metrics::{
    evaluate, ood_eval, ood_shuffle_seed, predict_all, shuffled_split, Cell, Metrics, OodResult,
    OraclePredictor, Predictor, TrainedModel,
};
pub use report::{emit_report, read_report, tsv_path, Condition, Report, ReportError, TSV_HEADER};
pub use trainer::{train, train_with_progress, EpochSummary, History, TrainError, TrainOutcome};
