//! GraphML reading and writing for zone/firewall topologies.
//!
//! Nodes declare `kind` (`zone` or `firewall`) and an optional `name`; edges
//! join one firewall to one zone and carry the firewall-side `interface`.
//! Data keys are resolved through their `attr.name`, so key ids are free.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Link, NetworkTopology, Node, NodeKind, TopologyError};

const KIND: &str = "kind";
const NAME: &str = "name";
const INTERFACE: &str = "interface";

fn position(doc: &roxmltree::Document<'_>, node: roxmltree::Node<'_, '_>) -> String {
    let pos = doc.text_pos_at(node.range().start);
    format!("line {}", pos.row)
}

fn schema(
    doc: &roxmltree::Document<'_>,
    node: roxmltree::Node<'_, '_>,
    msg: String,
) -> TopologyError {
    TopologyError::Schema(format!("{}: {msg}", position(doc, node)))
}

/// Reads a topology from a GraphML document.
pub fn parse_topology(document: &[u8]) -> Result<NetworkTopology, TopologyError> {
    let text = std::str::from_utf8(document)
        .map_err(|e| TopologyError::Malformed(format!("document is not UTF-8: {e}")))?;
    let doc =
        roxmltree::Document::parse(text).map_err(|e| TopologyError::Malformed(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "graphml" {
        return Err(TopologyError::Malformed(format!(
            "root element is <{}>, expected <graphml>",
            root.tag_name().name()
        )));
    }

    let mut key_names: HashMap<&str, &str> = HashMap::new();
    for key in root.children().filter(|n| n.has_tag_name("key")) {
        if let (Some(id), Some(name)) = (key.attribute("id"), key.attribute("attr.name")) {
            key_names.insert(id, name);
        }
    }
    let data_of = |node: roxmltree::Node<'_, '_>, wanted: &str| -> Option<String> {
        node.children()
            .filter(|c| c.has_tag_name("data"))
            .find(|c| {
                c.attribute("key")
                    .map(|k| key_names.get(k).copied().unwrap_or(k) == wanted)
                    .unwrap_or(false)
            })
            .map(|c| c.text().unwrap_or("").trim().to_string())
    };

    let graph = root
        .children()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| TopologyError::Malformed("document has no <graph> element".into()))?;

    let mut nodes = Vec::new();
    for node in graph.children().filter(|n| n.has_tag_name("node")) {
        let id = node
            .attribute("id")
            .ok_or_else(|| schema(&doc, node, "node without id".into()))?;
        let kind = match data_of(node, KIND).as_deref() {
            Some("zone") => NodeKind::Zone,
            Some("firewall") => NodeKind::Firewall,
            Some(other) => {
                return Err(schema(
                    &doc,
                    node,
                    format!("node {id} has unknown kind {other:?}"),
                ))
            }
            None => return Err(schema(&doc, node, format!("node {id} has no kind"))),
        };
        let name = data_of(node, NAME)
            .filter(|n| !n.is_empty())
            .unwrap_or_else(|| id.to_string());
        nodes.push(Node {
            id: id.to_string(),
            kind,
            name,
        });
    }

    let kinds: HashMap<&str, NodeKind> = nodes.iter().map(|n| (n.id.as_str(), n.kind)).collect();
    let mut links = Vec::new();
    for edge in graph.children().filter(|n| n.has_tag_name("edge")) {
        let (Some(source), Some(target)) = (edge.attribute("source"), edge.attribute("target"))
        else {
            return Err(schema(&doc, edge, "edge without source/target".into()));
        };
        let kind_of = |id: &str| {
            kinds
                .get(id)
                .copied()
                .ok_or_else(|| schema(&doc, edge, format!("edge references unknown node {id}")))
        };
        let (firewall, zone) = match (kind_of(source)?, kind_of(target)?) {
            (NodeKind::Firewall, NodeKind::Zone) => (source, target),
            (NodeKind::Zone, NodeKind::Firewall) => (target, source),
            (NodeKind::Zone, NodeKind::Zone) => {
                return Err(schema(
                    &doc,
                    edge,
                    format!("zone-zone edge {source}-{target}"),
                ))
            }
            (NodeKind::Firewall, NodeKind::Firewall) => {
                return Err(schema(
                    &doc,
                    edge,
                    format!("firewall-firewall edge {source}-{target}"),
                ))
            }
        };
        let interface = data_of(edge, INTERFACE)
            .filter(|i| !i.is_empty())
            .ok_or_else(|| {
                schema(
                    &doc,
                    edge,
                    format!("edge {source}-{target} has no interface"),
                )
            })?;
        links.push(Link {
            firewall: firewall.to_string(),
            interface,
            zone: zone.to_string(),
        });
    }

    NetworkTopology::new(nodes, links)
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Writes a topology as GraphML that [`parse_topology`] reads back unchanged.
pub fn write_topology(topology: &NetworkTopology) -> String {
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    out.push_str("  <key id=\"d0\" for=\"node\" attr.name=\"kind\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"d1\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n");
    out.push_str("  <key id=\"d2\" for=\"edge\" attr.name=\"interface\" attr.type=\"string\"/>\n");
    out.push_str("  <graph id=\"G\" edgedefault=\"undirected\">\n");
    for node in topology.nodes() {
        let kind = match node.kind {
            NodeKind::Zone => "zone",
            NodeKind::Firewall => "firewall",
        };
        let _ = writeln!(
            out,
            "    <node id=\"{}\"><data key=\"d0\">{kind}</data><data key=\"d1\">{}</data></node>",
            escape(&node.id),
            escape(&node.name)
        );
    }
    for (i, link) in topology.links().iter().enumerate() {
        let _ = writeln!(
            out,
            "    <edge id=\"e{i}\" source=\"{}\" target=\"{}\"><data key=\"d2\">{}</data></edge>",
            escape(&link.firewall),
            escape(&link.zone),
            escape(&link.interface)
        );
    }
    out.push_str("  </graph>\n</graphml>\n");
    out
}
