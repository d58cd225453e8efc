use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::{NetworkTopology, NodeKind};
use crate::algebra::{DevicePath, DirectedDevice, PathSet, PhysicalDevice, ZoneId};
use crate::matrix::PathMatrix;

/// Interface name given to a firewall's side of its own Firewall-Zone.
pub const FIREWALL_ZONE_INTERFACE: &str = "(local)";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown zone {0}")]
    UnknownZone(String),
    #[error("invalid device: {0}")]
    Device(#[from] crate::algebra::AlgebraError),
    #[error("zone name {0} is already taken")]
    NameClash(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Zone {
    pub id: ZoneId,
    pub name: String,
    pub transitive: bool,
    /// Set for the per-firewall zones added on request.
    pub firewall_zone: bool,
}

/// Zones, devices and the directed devices on every primary conduit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZoneConduitModel {
    zones: Vec<Zone>,
    devices: Vec<PhysicalDevice>,
    conduits: BTreeMap<(ZoneId, ZoneId), Vec<DirectedDevice>>,
}

impl ZoneConduitModel {
    pub fn zone_count(&self) -> usize {
        self.zones.len()
    }

    pub fn zones(&self) -> &[Zone] {
        &self.zones
    }

    pub fn zone(&self, id: ZoneId) -> &Zone {
        &self.zones[id.index()]
    }

    pub fn zone_id(&self, name: &str) -> Option<ZoneId> {
        self.zones.iter().find(|z| z.name == name).map(|z| z.id)
    }

    pub fn is_transitive(&self, id: ZoneId) -> bool {
        self.zones[id.index()].transitive
    }

    pub fn devices(&self) -> &[PhysicalDevice] {
        &self.devices
    }

    pub fn device(&self, id: &str) -> Option<&PhysicalDevice> {
        self.devices.iter().find(|d| d.id() == id)
    }

    /// Directed conduits keyed by ordered zone pair; each value is nonempty.
    pub fn conduits(&self) -> &BTreeMap<(ZoneId, ZoneId), Vec<DirectedDevice>> {
        &self.conduits
    }

    pub fn conduit(&self, from: ZoneId, to: ZoneId) -> &[DirectedDevice] {
        self.conduits
            .get(&(from, to))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn directed_devices(&self) -> impl Iterator<Item = &DirectedDevice> {
        self.conduits.values().flatten()
    }

    /// Directed devices leaving `zone`.
    pub fn outgoing(&self, zone: ZoneId) -> impl Iterator<Item = &DirectedDevice> {
        self.conduits
            .range((zone, ZoneId(0))..=(zone, ZoneId(usize::MAX)))
            .flat_map(|(_, v)| v.iter())
    }
}

/// Derives the Zone-Conduit model of a topology.
///
/// Zones missing from `transitivity` are non-transitive. A firewall attached
/// to `k` zones yields a directed device for each of the `k(k-1)` ordered
/// zone pairs. With `add_firewall_zones`, every firewall additionally gets a
/// zone of its own, reachable from each of its attached zones.
pub fn build_model(
    topology: &NetworkTopology,
    transitivity: &BTreeMap<String, bool>,
    add_firewall_zones: bool,
) -> Result<ZoneConduitModel, ModelError> {
    let mut zones: Vec<Zone> = Vec::new();
    let mut zone_of_node: HashMap<&str, ZoneId> = HashMap::new();
    for node in topology.zones() {
        let id = ZoneId(zones.len());
        zone_of_node.insert(node.id.as_str(), id);
        zones.push(Zone {
            id,
            name: node.name.clone(),
            transitive: false,
            firewall_zone: false,
        });
    }

    // (zone, interface) attachments per firewall node, in document order.
    let mut attached: BTreeMap<&str, Vec<(ZoneId, &str)>> = BTreeMap::new();
    for link in topology.links() {
        attached
            .entry(link.firewall.as_str())
            .or_default()
            .push((zone_of_node[link.zone.as_str()], link.interface.as_str()));
    }

    let mut devices = Vec::new();
    let mut conduits: BTreeMap<(ZoneId, ZoneId), Vec<DirectedDevice>> = BTreeMap::new();
    for node in topology
        .nodes()
        .iter()
        .filter(|n| n.kind == NodeKind::Firewall)
    {
        let mut links = attached.get(node.id.as_str()).cloned().unwrap_or_default();
        let mut interfaces: Vec<&str> = links.iter().map(|(_, i)| *i).collect();
        if add_firewall_zones {
            let name = format!("fw-{}", node.name);
            if zones.iter().any(|z| z.name == name) {
                return Err(ModelError::NameClash(name));
            }
            let id = ZoneId(zones.len());
            zones.push(Zone {
                id,
                name,
                transitive: false,
                firewall_zone: true,
            });
            interfaces.push(FIREWALL_ZONE_INTERFACE);
            links.push((id, FIREWALL_ZONE_INTERFACE));
        }
        let device = PhysicalDevice::new(&node.name, &interfaces)?;
        for &(from, ingress) in &links {
            for &(to, egress) in &links {
                if from != to {
                    let t = device.orient(from, to, ingress, egress)?;
                    conduits.entry((from, to)).or_default().push(t);
                }
            }
        }
        devices.push(device);
    }
    for list in conduits.values_mut() {
        list.sort();
    }

    for (name, &flag) in transitivity {
        let zone = zones
            .iter_mut()
            .find(|z| &z.name == name)
            .ok_or_else(|| ModelError::UnknownZone(name.clone()))?;
        zone.transitive = flag;
    }

    Ok(ZoneConduitModel {
        zones,
        devices,
        conduits,
    })
}

/// `A(i,i) = {ε}`; `A(i,j)` holds one single-step path per directed device on conduit `(i,j)`.
pub fn adjacency_matrix(model: &ZoneConduitModel) -> PathMatrix {
    PathMatrix::from_fn(model.zone_count(), |i, j| {
        if i == j {
            PathSet::one()
        } else {
            model
                .conduit(ZoneId(i), ZoneId(j))
                .iter()
                .cloned()
                .map(DevicePath::single)
                .collect()
        }
    })
}

/// Diagonal matrix holding `{ε}` exactly at transitive zones.
pub fn transitivity_matrix(model: &ZoneConduitModel) -> PathMatrix {
    PathMatrix::from_fn(model.zone_count(), |i, j| {
        if i == j && model.is_transitive(ZoneId(i)) {
            PathSet::one()
        } else {
            PathSet::zero()
        }
    })
}

pub fn identity_matrix(model: &ZoneConduitModel) -> PathMatrix {
    PathMatrix::identity(model.zone_count())
}
