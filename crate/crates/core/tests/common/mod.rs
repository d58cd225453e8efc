#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use zcmap::closure::right_iterate;
use zcmap::topology::{
    adjacency_matrix, build_model, transitivity_matrix, NetworkTopology, ZoneConduitModel,
};
use zcmap::{Compiled, DevicePath, Options, PathMatrix};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

/// The four-zone example network, with or without zone 4 carrying transit.
pub fn ring(z4_transitive: bool) -> Compiled {
    let policy = if z4_transitive {
        "ring-transitive.policy"
    } else {
        "ring-z4-non-transitive.policy"
    };
    Compiled::from_sources(
        read("ring.graphml").as_bytes(),
        &read(policy),
        Options::default(),
    )
    .unwrap()
}

pub fn closure_of(
    topology: &NetworkTopology,
    transitivity: &BTreeMap<String, bool>,
) -> (ZoneConduitModel, PathMatrix) {
    let model = build_model(topology, transitivity, false).unwrap();
    let astar = right_iterate(&adjacency_matrix(&model), &transitivity_matrix(&model)).unwrap();
    (model, astar)
}

/// Every path of every cell, ε included.
pub fn universe(astar: &PathMatrix) -> Vec<DevicePath> {
    let mut out: Vec<DevicePath> = astar
        .rows()
        .flatten()
        .flat_map(|s| s.iter().cloned())
        .collect();
    out.sort();
    out.dedup();
    out
}

pub fn cell_text(m: &PathMatrix) -> Vec<Vec<String>> {
    m.rows()
        .map(|r| r.iter().map(|s| s.to_string()).collect())
        .collect()
}
