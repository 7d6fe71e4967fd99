//! Rapidly mixing samplers for lattice points `(S + Z^d) ∩ mP` in dilated
//! rational polytopes, built as zig-zag products of an `m`-independent base
//! graph with certified random expanders.
//!
//! The pipeline: describe the problem as a [`ModelInstance`] (directly or via
//! [`algstat::reduce_to_model`]), [`prepare_base`] once, then
//! [`build_sampler`] for each dilation `m` and walk it.

pub mod algstat;
pub mod bundle;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod instance;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{HalfspaceSystem, OffsetSet, PolytopeSpec, Rational, RationalPoint};
pub use graph::{MoveSet, PortEnd, RotationGraph};
pub use instance::ModelInstance;
pub use sampler::{
    build_sampler, prepare_base, PreparedBase, SampleOptions, SamplerGraph, Strategy,
};
pub use spectral::{second_eigenvalue, SpectralReport};
