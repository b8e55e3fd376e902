//! Headline part-of-speech tagging by annotation projection.
//!
//! The crate covers the whole pipeline: reading treebanks and headline/lead
//! pairs, projecting tags from tagged lead sentences onto aligned headlines,
//! training single- and multi-domain BiGRU-CRF taggers, and evaluating them
//! with accuracy, confusion and paired bootstrap statistics.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod model;
pub mod projection;
pub mod rng;
pub mod synthetic;
pub mod tag;
pub mod training;

pub use error::{Error, Result};
pub use tag::PosTag;
