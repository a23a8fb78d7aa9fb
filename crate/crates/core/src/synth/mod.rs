//! Synthetic benchmark graphs with controllable label homophily and
//! class-dependent binary attributes.

mod attributes;
mod generators;
mod labels;

pub use attributes::{
    build_attribute_profile, generate_attributes, glrt_accuracy, AttributeCurve, AttributeMatrix,
    AttributeProfile, ATTRIBUTE_COUNT,
};
pub use generators::{generate, generate_raw, Model, ModelParams, SynthConfig, SynthGraph};
pub use labels::{
    laplacian_bisection, reduce_homophily, swap_to_reduce, HomophilyRun, StopReason, Swap,
};
