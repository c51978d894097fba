//! Evaluation: classification scoring, flow fidelity and the behavioural
//! statistics (repeated-measures ANOVA, Friedman, paired and Welch t).

mod classification;
mod flow_error;
mod hypothesis;
mod responses;
pub mod special;

pub use classification::{confusion_matrix, top1_accuracy, transfer_score, ConfusionMatrix, Dataset, PredictionRecord};
pub use flow_error::{endpoint_error, FlowError};
pub use hypothesis::{
    friedman_test, midranks, paired_t_test, rm_anova, sample_variance, welch_t_test, AnovaResult, FriedmanResult, TTest,
};
pub use responses::{accuracy_by_condition, AccuracyMatrix, ResponseRow, ResponseTable};
