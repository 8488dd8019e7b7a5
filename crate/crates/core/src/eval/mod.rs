//! Classification metrics, ROC and precision-recall curves, and the
//! question-answer trust family (trust density, trust spectrum,
//! NetTrustScore).

mod curves;
mod metrics;
mod trust;

pub use curves::{pr_curve, roc_curve, Curve};
pub use metrics::{
    classification_metrics, multiclass_accuracy, BinaryConfusion, BinaryMetrics, ConfusionMatrix,
};
pub use trust::{
    net_trust_score, qa_trust, trust_density, trust_spectrum, DensityCurve, TrustConfig, TrustRecord,
    TrustReport,
};
