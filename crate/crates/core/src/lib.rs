//! Stance monitoring for vaccination discourse on social media.
//!
//! The pipeline runs from raw message files to trained classifiers:
//!
//! * [`corpus`] loads messages and drops retweets, URL messages and blacklisted topics.
//! * [`annotation`] turns per-annotator judgments into strict/lax/one labeled data
//!   under four labeling schemes.
//! * [`agreement`] measures inter-annotator reliability.
//! * [`features`] tokenizes messages and builds binary n-gram vectors.
//! * [`models`] trains multinomial naive Bayes and linear SVM classifiers.
//! * [`baselines`] provides the lexicon polarity and random baselines.
//! * [`evaluation`] runs cross-validation, sweeps, learning curves and ensembles.
//! * [`synthetic`] generates the bundled, lexically separable demo corpus.

pub mod agreement;
pub mod annotation;
pub mod baselines;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod models;
pub mod pipeline;
pub mod synthetic;

pub use error::{Error, Result};
