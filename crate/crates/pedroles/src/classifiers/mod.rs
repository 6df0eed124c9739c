//! The four role-prediction methods: random forest over TF-IDF, the
//! multi-label centroid classifier, k-nearest neighbors over BoSEC features,
//! and the keyphrase baseline.

pub mod cen;
pub mod forest;
pub mod keyphrase;
pub mod knn;

pub use cen::{cen_fit, cen_predict, CenDistance, CenModel};
pub use forest::{rf_fit, rf_predict, ForestModel, RfParams};
pub use keyphrase::{keyphrase_predict, KeyphraseRules};
pub use knn::{knn_predict, manhattan, KnnConfig, LabeledPoint};
