//! Gradient boosting over labelled graph paths.
//!
//! Graphs are read from the TU-Dortmund text layout ([`tudata`]); candidate
//! paths are counted from anchor nodes ([`paths`]) and grown lazily as the
//! boosting loop ([`boosting`]) selects them.

pub mod anchors;
pub mod cli;
pub mod boosting;
pub mod error;
pub mod eval;
pub mod features;
pub mod fixtures;
pub mod graph;
pub mod learners;
pub mod paths;
pub mod tudata;

pub use anchors::{AnchorConfig, AnchorMode};
pub use boosting::{importance, predict, train, BoostConfig, BoostModel, ImportanceReport, ImportanceVariant, Prediction};
pub use error::{Error, Result};
pub use features::{AttributeMode, CountMatrix};
pub use graph::{Dataset, Graph, LabelAlphabet, LabelId, Task};
pub use paths::{AnchorSet, LabelledPath};
pub use tudata::{load_dataset, LoadOptions, LoadReport};
