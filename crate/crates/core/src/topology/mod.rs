//! Network topology ingestion and the Zone-Conduit model derived from it.

mod graphml;
mod model;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use graphml::{parse_topology, write_topology};
pub use model::{
    adjacency_matrix, build_model, identity_matrix, transitivity_matrix, ModelError, Zone,
    ZoneConduitModel, FIREWALL_ZONE_INTERFACE,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("malformed GraphML document: {0}")]
    Malformed(String),
    #[error("topology schema error: {0}")]
    Schema(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Zone,
    Firewall,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Display name; zones and devices are referred to by this name.
    pub name: String,
}

/// One firewall interface attached to one zone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub firewall: String,
    pub interface: String,
    pub zone: String,
}

/// Zones, firewalls and the firewall-to-zone links between them.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct NetworkTopology {
    nodes: Vec<Node>,
    links: Vec<Link>,
}

impl NetworkTopology {
    /// Validates and assembles a topology. Links refer to nodes by id.
    pub fn new(nodes: Vec<Node>, links: Vec<Link>) -> Result<Self, TopologyError> {
        let schema = |m: String| Err(TopologyError::Schema(m));
        let mut kinds = BTreeMap::new();
        let mut names = BTreeSet::new();
        for node in &nodes {
            if kinds.insert(node.id.as_str(), node.kind).is_some() {
                return schema(format!("duplicate node id {}", node.id));
            }
            if !names.insert((node.kind, node.name.as_str())) {
                return schema(format!("duplicate {:?} name {}", node.kind, node.name));
            }
        }
        let mut interfaces = BTreeSet::new();
        let mut attachments = BTreeSet::new();
        for link in &links {
            match (
                kinds.get(link.firewall.as_str()),
                kinds.get(link.zone.as_str()),
            ) {
                (Some(NodeKind::Firewall), Some(NodeKind::Zone)) => {}
                (None, _) => {
                    return schema(format!("link references unknown node {}", link.firewall))
                }
                (_, None) => return schema(format!("link references unknown node {}", link.zone)),
                _ => {
                    return schema(format!(
                        "link {}-{} must join a firewall to a zone",
                        link.firewall, link.zone
                    ))
                }
            }
            if !interfaces.insert((link.firewall.as_str(), link.interface.as_str())) {
                return schema(format!(
                    "interface {} of firewall {} appears on more than one link",
                    link.interface, link.firewall
                ));
            }
            // A firewall reaching one zone through two interfaces is not modeled.
            if !attachments.insert((link.firewall.as_str(), link.zone.as_str())) {
                return schema(format!(
                    "firewall {} is linked to zone {} more than once",
                    link.firewall, link.zone
                ));
            }
        }
        Ok(Self { nodes, links })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn zones(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Zone)
    }

    pub fn firewalls(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.kind == NodeKind::Firewall)
    }

    /// Copy of this topology with the named firewall and its links removed.
    /// Returns `None` when no firewall has that name.
    pub fn without_firewall(&self, name: &str) -> Option<NetworkTopology> {
        let node = self
            .firewalls()
            .find(|n| n.name == name || n.id == name)?
            .clone();
        Some(Self {
            nodes: self
                .nodes
                .iter()
                .filter(|n| n.id != node.id)
                .cloned()
                .collect(),
            links: self
                .links
                .iter()
                .filter(|l| l.firewall != node.id)
                .cloned()
                .collect(),
        })
    }
}
