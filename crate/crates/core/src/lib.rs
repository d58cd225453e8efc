//! Zone-Conduit modelling of firewalled networks: path enumeration through a
//! path-set semiring, closure of the adjacency matrix, and mapping of
//! zone-to-zone policy onto individual firewall interfaces.

pub mod algebra;
pub mod closure;
pub mod document;
pub mod mapper;
pub mod matrix;
pub mod pipeline;
pub mod policy;
pub mod synth;
pub mod topology;

pub use algebra::{
    concat_path, DevicePath, DirectedDevice, PathSet, PhysicalDevice, Semiring, ZoneId,
};
pub use matrix::{Matrix, PathMatrix};
pub use pipeline::{what_if, Change, Compiled, Options};

/// Any failure along the topology → model → closure → mapping pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Topology(#[from] topology::TopologyError),
    #[error(transparent)]
    Policy(#[from] policy::PolicyParseError),
    #[error(transparent)]
    Model(#[from] topology::ModelError),
    #[error(transparent)]
    Closure(#[from] closure::ClosureError),
    #[error(transparent)]
    Map(#[from] mapper::MapError),
    #[error(transparent)]
    Document(#[from] document::DocumentError),
    #[error("no firewall named {0}")]
    UnknownDevice(String),
}
