//! Reading-proficiency scoring from eye movements.
//!
//! The pipeline runs from word-aligned fixation records to two outputs:
//! a stand-alone score (cosine similarity of a reader's standardized gaze
//! features to the mean native-reader vector) and ridge-regression
//! predictions of external test scores.
//!
//! - [`corpus`]: data model and CSV ingestion
//! - [`measures`]: per-word FF / FP / TF / RP durations, skips, reading speed
//! - [`langmodel`]: word frequencies and trigram surprisal (modified Kneser-Ney)
//! - [`features`]: WP-coefficient, syntactic-cluster, transition and
//!   fixed-context feature sets, with reading-speed normalization
//! - [`scoring`]: Z-scaling, native prototype, EyeScore, ridge prediction,
//!   cross-validation, splits, baselines and split-half consistency
//! - [`simulate`]: synthetic readers with known generative parameters

pub mod corpus;
pub mod error;
pub mod features;
pub mod langmodel;
pub mod linalg;
pub mod measures;
pub mod scoring;
pub mod simulate;

pub use error::{Error, ErrorKind, Result};
