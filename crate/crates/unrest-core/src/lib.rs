//! Forecasting toolkit for predicting, per region per day, whether a mass
//! protest will occur, driven by behavioral features extracted from a
//! geo-tagged short-message corpus plus event-specific regional features.
//!
//! The pipeline runs: signal scan -> corpus cleansing -> per-tweet text
//! analysis -> (region x day) feature matrix -> progressively retrained
//! classifier -> daily confusion reports and pooled ROC curves. A seeded
//! synthetic generator produces desk-scale corpora with planted signal so
//! the whole pipeline is testable end to end.

pub mod corpus;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod featmat;
pub mod models;
pub mod region;
pub mod selection;
pub mod signals;
pub mod textfeat;

pub use error::{Error, Result};
