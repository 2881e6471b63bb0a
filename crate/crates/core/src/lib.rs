//! Semantic role labeling toolkit.
//!
//! The pipeline around a pluggable scoring model:
//!
//! - [`corpus`]: CoNLL column and XML readers, the CoNLL writer, cleaning rules
//!   and dataset statistics;
//! - [`tagging`]: the IOB label space and constrained Viterbi decoding of
//!   per-token emission scores;
//! - [`eval`]: span scoring, unlabeled scoring and error decomposition;
//! - [`stratify`]: iterative stratified k-fold splits and validation carving;
//! - [`experiment`]: fold runs, aggregation into result tables and model selection.

pub mod corpus;
pub mod eval;
pub mod experiment;
pub mod stratify;
pub mod tagging;

/// Version tags of the on-disk formats, printed by `srl --version`.
pub const CONLL_FORMAT_VERSION: u32 = 1;
pub const EMISSION_FORMAT_VERSION: u32 = 1;
pub const RUN_RECORD_FORMAT_VERSION: u32 = 1;
