//! Multilingual detection of AI-generated and AI-rephrased text from
//! stylometric and statistical features.
//!
//! The pipeline runs corpus → [`textproc`] → [`features`] (with
//! [`providers`] for external capabilities) → [`classifiers`] → [`eval`].

pub mod classifiers;
pub mod corpus;
pub mod detector;
pub mod error;
pub mod eval;
pub mod features;
pub mod matrix;
pub mod providers;
pub mod synth;
pub mod textproc;

pub use classifiers::{Model, ModelKind, TrainConfig};
pub use corpus::{Document, Label, Language, SplitPlan, Task};
pub use detector::{Detection, Detector};
pub use error::{Error, Result};
pub use eval::{EvalReport, GridSpec};
pub use features::{Category, FeatureSet, FeatureVector, FittedVectorizer};
pub use matrix::Matrix;
pub use providers::{ProviderConfig, ProviderSet, ProvidersConfig};
pub use textproc::{LanguagePack, TokenizedDocument};
