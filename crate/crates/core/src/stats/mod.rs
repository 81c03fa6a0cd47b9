//! Statistical procedures used by the analyses and the index pipeline.

pub mod gompertz;
pub mod ks;
mod linreg;
pub mod loglog;
pub mod pca;
pub mod power_law;
pub mod stepwise;
pub mod time;

pub use gompertz::{fit_gompertz, linearize_gompertz, GompertzFit, LinearizedGompertz};
pub use ks::{average_ranks, ks_exponential_test, ks_two_sample, spearman, ExpTestResult};
pub use loglog::{
    classify_languages, fit_loglog_ols, fit_speakers_models, LanguageCategory, LogLogOlsFit,
    SpeakerModelPoint,
};
pub use pca::{pca_varimax, PcaResult};
pub use power_law::{fit_power_law, positive_counts, zipf_residual_sigma, PowerLawFit};
pub use stepwise::{stepwise_select, StepwiseResult};
pub use time::{decimal_year, normalize_time, TimeNormalization};

#[allow(unused_imports)]
pub(crate) use linreg::{mean, pearson};
