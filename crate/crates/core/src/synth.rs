//! Synthetic topologies and rule sets for tests and benchmarks.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::ZoneId;
use crate::matrix::PathMatrix;
use crate::policy::{Bandwidth, Context, PolicyRule, PolicyValue, Protocol, QosValue, ServiceSet};
use crate::topology::{Link, NetworkTopology, Node, NodeKind, ZoneConduitModel};

fn zone(name: String) -> Node {
    Node {
        id: name.clone(),
        kind: NodeKind::Zone,
        name,
    }
}

fn firewall(name: String) -> Node {
    Node {
        id: name.clone(),
        kind: NodeKind::Firewall,
        name,
    }
}

fn attach(links: &mut Vec<Link>, fw: &str, zones: &[String]) {
    for (k, z) in zones.iter().enumerate() {
        links.push(Link {
            firewall: fw.to_string(),
            interface: format!("eth{k}"),
            zone: z.clone(),
        });
    }
}

/// `zones` zones `Z1..`, `firewalls` firewalls `F1..`, each attached to
/// between 2 and `max_arity` distinct zones (none when fewer than 2 zones).
pub fn random_topology<R: Rng>(
    rng: &mut R,
    zones: usize,
    firewalls: usize,
    max_arity: usize,
) -> NetworkTopology {
    let names: Vec<String> = (1..=zones).map(|k| format!("Z{k}")).collect();
    let mut nodes: Vec<Node> = names.iter().cloned().map(zone).collect();
    let mut links = Vec::new();
    if zones >= 2 {
        let top = max_arity.clamp(2, zones);
        for f in 1..=firewalls {
            let name = format!("F{f}");
            let arity = rng.gen_range(2..=top);
            let chosen: Vec<String> = names.choose_multiple(rng, arity).cloned().collect();
            attach(&mut links, &name, &chosen);
            nodes.push(firewall(name));
        }
    }
    NetworkTopology::new(nodes, links).expect("generated topology is well formed")
}

/// Marks each zone transitive with probability `p`.
pub fn random_transitivity<R: Rng>(
    rng: &mut R,
    topology: &NetworkTopology,
    p: f64,
) -> BTreeMap<String, bool> {
    topology
        .zones()
        .map(|z| (z.name.clone(), rng.gen_bool(p)))
        .collect()
}

/// A topology in the ranges used by the equivalence tests: up to 7 zones, up
/// to 12 firewalls of arity 2 or 3, random transitivity.
pub fn random_case<R: Rng>(rng: &mut R) -> (NetworkTopology, BTreeMap<String, bool>) {
    let zones = rng.gen_range(1..=7);
    let firewalls = rng.gen_range(0..=12);
    let topology = random_topology(rng, zones, firewalls, 3);
    let transitivity = random_transitivity(rng, &topology, 0.5);
    (topology, transitivity)
}

pub fn random_services<R: Rng>(rng: &mut R) -> ServiceSet {
    let mut out = ServiceSet::empty();
    for _ in 0..rng.gen_range(1..=3) {
        let protocol = *Protocol::ALL.choose(rng).expect("nonempty");
        let lo = rng.gen_range(1..=1024);
        let item = match rng.gen_range(0..4) {
            0 => ServiceSet::range(protocol, lo, lo + rng.gen_range(1..=64)),
            1 => ServiceSet::protocol(protocol),
            _ => ServiceSet::port(protocol, lo),
        };
        out = out.union(&item);
    }
    out
}

pub fn random_value<R: Rng>(rng: &mut R, ctx: Context) -> PolicyValue {
    match ctx {
        Context::Security => PolicyValue::Security(random_services(rng)),
        Context::Measurement => PolicyValue::Measurement(random_services(rng)),
        Context::Qos => PolicyValue::Qos(QosValue {
            bandwidth: Bandwidth::megabytes(rng.gen_range(1..=100)),
            services: random_services(rng),
        }),
    }
}

/// Ordered zone pairs with at least one path in `astar`.
pub fn reachable_pairs(astar: &PathMatrix) -> Vec<(ZoneId, ZoneId)> {
    let n = astar.dim();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !astar.get(i, j).is_empty())
        .map(|(i, j)| (ZoneId(i), ZoneId(j)))
        .collect()
}

/// Up to `count` rules on distinct reachable pairs.
pub fn random_rules<R: Rng>(
    rng: &mut R,
    ctx: Context,
    model: &ZoneConduitModel,
    astar: &PathMatrix,
    count: usize,
) -> Vec<PolicyRule> {
    let pairs = reachable_pairs(astar);
    pairs
        .choose_multiple(rng, count.min(pairs.len()))
        .map(|&(i, j)| {
            PolicyRule::new(
                &model.zone(i).name,
                &model.zone(j).name,
                random_value(rng, ctx),
            )
        })
        .collect()
}

/// A 21-zone plant network: an enterprise zone, five transitive site hubs
/// joined over two backbone firewalls, and three non-transitive cell zones
/// behind each site firewall. Site 0 has a redundant firewall.
pub fn scada_like() -> (NetworkTopology, BTreeMap<String, bool>) {
    let enterprise = "Enterprise".to_string();
    let hubs: Vec<String> = (0..5).map(|s| format!("Site{s}")).collect();
    let mut nodes = vec![zone(enterprise.clone())];
    nodes.extend(hubs.iter().cloned().map(zone));
    let mut links = Vec::new();
    let mut transitivity = BTreeMap::from([(enterprise.clone(), true)]);
    for (s, hub) in hubs.iter().enumerate() {
        transitivity.insert(hub.clone(), true);
        let mut attached = vec![hub.clone()];
        for c in 0..3 {
            let cell = format!("Site{s}-Cell{c}");
            transitivity.insert(cell.clone(), false);
            nodes.push(zone(cell.clone()));
            attached.push(cell);
        }
        let fw = format!("SiteFW{s}");
        attach(&mut links, &fw, &attached);
        nodes.push(firewall(fw));
        if s == 0 {
            attach(&mut links, "SiteFW0b", &attached);
            nodes.push(firewall("SiteFW0b".into()));
        }
    }
    let backbones = [
        ("CoreFW1", [&enterprise, &hubs[0], &hubs[1], &hubs[2]]),
        ("CoreFW2", [&enterprise, &hubs[2], &hubs[3], &hubs[4]]),
    ];
    for (fw, zones) in backbones {
        let zones: Vec<String> = zones.into_iter().cloned().collect();
        attach(&mut links, fw, &zones);
        nodes.push(firewall(fw.into()));
    }
    let topology = NetworkTopology::new(nodes, links).expect("plant topology is well formed");
    (topology, transitivity)
}
