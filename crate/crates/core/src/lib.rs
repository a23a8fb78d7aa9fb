//! Robustness of overlapping and non-overlapping community detection against
//! a single node that adds edges to evade an analyst's triage.
//!
//! The analyst ranks communities by mean node temperature and inspects them
//! hottest first; an attacker controlling one target node adds edges to push
//! the target down that ordering. [`game`] plays the two sides against each
//! other across the detectors in [`detect`] and the strategies in [`attack`].

pub mod attack;
pub mod detect;
pub mod error;
pub mod game;
pub mod graph;
pub mod linalg;
pub mod seed;
pub mod synth;
pub mod triage;

pub use error::{Error, Result};
pub use graph::{EdgeOverlay, Graph, NodeId};
pub use triage::{CommunityCover, LabelMap, Temperature, TemperatureMap};
