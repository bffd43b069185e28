//! Split-integrity auditing for benchmark datasets.
//!
//! The toolkit checks whether a dataset's train and test splits look like
//! draws from one distribution. Two disjoint train subsets and one test
//! subset are embedded, summarized as Gaussians and compared with the
//! Fréchet distance; a within-train distance that is much smaller than the
//! train-to-test distance flags a mismatch. Companion pieces compute the
//! Inception Score from classifier probabilities, build a stratified remix
//! of the two splits, and probe likelihood (bits per dimension) ordering with
//! a Gaussian mixture density model.

pub mod audit;
pub mod cli;
pub mod density;
pub mod embed;
pub mod error;
pub mod ingest;
pub mod metrics;
pub mod prng;
pub mod reference;
pub mod remix;
pub mod report;
pub mod stats;
pub mod synth;

pub use audit::{audit, sample_subsets, AuditConfig, AuditReport, DecisionRule, SubsetTriple, Verdict};
pub use density::{bpd, fit_gmm, BpdResult, CovarianceKind, GmmConfig, GmmModel};
pub use embed::{embed_reference, EmbedderConfig, FeatureMatrix};
pub use error::{Error, Result};
pub use ingest::{Dataset, ProbMatrix};
pub use metrics::{inception_score, IsResult};
pub use remix::{apply_plan, remix, RemixPlan, SourceSplit};
pub use stats::{frechet, sqrt_psd, summarize, GaussianSummary};
pub use synth::{gen_features, inject_mismatch, GeneratorSpec, MismatchMode};
