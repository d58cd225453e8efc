//! Topology + policy in, closure and assignments out; plus what-if re-runs.

use std::collections::BTreeSet;

use crate::algebra::PathSet;
use crate::closure::right_iterate;
use crate::document::parse_assignments;
use crate::mapper::{
    map_policy, map_rule, provisioning_notes, verify_assignments, DeviceAssignment, MapError,
    MapOptions, VerificationReport,
};
use crate::matrix::PathMatrix;
use crate::policy::{parse_policy, Context, Policy, PolicyRule};
use crate::topology::{
    adjacency_matrix, build_model, parse_topology, transitivity_matrix, NetworkTopology,
    ZoneConduitModel,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Options {
    /// Give every firewall a non-transitive zone of its own.
    pub firewall_zones: bool,
    pub map: MapOptions,
}

/// A policy compiled against a topology: the model and its closure.
#[derive(Debug, Clone)]
pub struct Compiled {
    pub topology: NetworkTopology,
    pub policy: Policy,
    pub model: ZoneConduitModel,
    pub astar: PathMatrix,
    pub options: Options,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MapOutput {
    pub assignments: Vec<DeviceAssignment>,
    pub notes: Vec<String>,
}

/// Mapping that keeps going past rules with no path.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LenientMap {
    pub assignments: BTreeSet<DeviceAssignment>,
    pub unreachable: BTreeSet<PolicyRule>,
}

impl Compiled {
    pub fn new(topology: NetworkTopology, policy: Policy, options: Options) -> Result<Self, Error> {
        let model = build_model(&topology, &policy.transitivity, options.firewall_zones)?;
        let astar = right_iterate(&adjacency_matrix(&model), &transitivity_matrix(&model))?;
        Ok(Self {
            topology,
            policy,
            model,
            astar,
            options,
        })
    }

    pub fn from_sources(graphml: &[u8], policy: &str, options: Options) -> Result<Self, Error> {
        Self::new(parse_topology(graphml)?, parse_policy(policy)?, options)
    }

    /// `A*(src, dst)` by zone name.
    pub fn paths(&self, src: &str, dst: &str) -> Result<&PathSet, Error> {
        let zone = |name: &str| {
            self.model
                .zone_id(name)
                .ok_or_else(|| Error::Map(MapError::UnknownZone(name.to_string())))
        };
        let (i, j) = (zone(src)?, zone(dst)?);
        Ok(self.astar.get(i.index(), j.index()))
    }

    /// Maps every rule; the first unreachable rule aborts.
    pub fn map(&self) -> Result<MapOutput, Error> {
        let mut all = BTreeSet::new();
        for ctx in self.policy.contexts() {
            let rules: Vec<PolicyRule> = self.policy.rules_for(ctx).cloned().collect();
            all.extend(map_policy(
                ctx,
                &rules,
                &self.astar,
                &self.model,
                self.options.map,
            )?);
        }
        let qos: Vec<PolicyRule> = self.policy.rules_for(Context::Qos).cloned().collect();
        Ok(MapOutput {
            assignments: all.into_iter().collect(),
            notes: provisioning_notes(&qos, &self.astar, &self.model),
        })
    }

    pub fn map_lenient(&self) -> Result<LenientMap, Error> {
        let mut out = LenientMap::default();
        for rule in &self.policy.rules {
            match map_rule(
                rule.context(),
                rule,
                &self.astar,
                &self.model,
                self.options.map,
            ) {
                Ok(placed) => out.assignments.extend(placed),
                Err(MapError::UnreachablePair(rule)) => {
                    out.unreachable.insert(*rule);
                }
                Err(e) => return Err(e.into()),
            }
        }
        Ok(out)
    }

    /// One report per context present in the policy or in `existing`.
    pub fn verify(&self, existing: &[DeviceAssignment]) -> Result<Vec<VerificationReport>, Error> {
        let contexts: BTreeSet<Context> = self
            .policy
            .contexts()
            .into_iter()
            .chain(existing.iter().map(|a| a.rule.context()))
            .collect();
        contexts
            .into_iter()
            .map(|ctx| {
                let rules: Vec<PolicyRule> = self.policy.rules_for(ctx).cloned().collect();
                verify_assignments(ctx, &rules, &self.astar, &self.model, existing)
                    .map_err(Error::from)
            })
            .collect()
    }

    pub fn verify_document(&self, text: &str) -> Result<Vec<VerificationReport>, Error> {
        self.verify(&parse_assignments(text)?)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Change {
    SetTransitive(String),
    SetNonTransitive(String),
    DropDevice(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WhatIfDiff {
    pub removed: Vec<DeviceAssignment>,
    pub added: Vec<DeviceAssignment>,
    pub newly_unreachable: Vec<PolicyRule>,
    pub resolved: Vec<PolicyRule>,
}

impl WhatIfDiff {
    pub fn is_empty(&self) -> bool {
        self.removed.is_empty()
            && self.added.is_empty()
            && self.newly_unreachable.is_empty()
            && self.resolved.is_empty()
    }
}

/// Recompiles `base` with `changes` applied and diffs the two mappings.
pub fn what_if(base: &Compiled, changes: &[Change]) -> Result<WhatIfDiff, Error> {
    let mut topology = base.topology.clone();
    let mut policy = base.policy.clone();
    for change in changes {
        match change {
            Change::SetTransitive(zone) => {
                policy.transitivity.insert(zone.clone(), true);
            }
            Change::SetNonTransitive(zone) => {
                policy.transitivity.insert(zone.clone(), false);
            }
            Change::DropDevice(id) => {
                topology = topology
                    .without_firewall(id)
                    .ok_or_else(|| Error::UnknownDevice(id.clone()))?;
            }
        }
    }
    let after = Compiled::new(topology, policy, base.options)?;
    let (old, new) = (base.map_lenient()?, after.map_lenient()?);
    Ok(WhatIfDiff {
        removed: old
            .assignments
            .difference(&new.assignments)
            .cloned()
            .collect(),
        added: new
            .assignments
            .difference(&old.assignments)
            .cloned()
            .collect(),
        newly_unreachable: new
            .unreachable
            .difference(&old.unreachable)
            .cloned()
            .collect(),
        resolved: old
            .unreachable
            .difference(&new.unreachable)
            .cloned()
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOPO: &str = r#"<graphml>
  <key id="k" for="node" attr.name="kind"/>
  <key id="i" for="edge" attr.name="interface"/>
  <graph edgedefault="undirected">
    <node id="Z1"><data key="k">zone</data></node>
    <node id="Z2"><data key="k">zone</data></node>
    <node id="Z3"><data key="k">zone</data></node>
    <node id="X"><data key="k">firewall</data></node>
    <node id="Y"><data key="k">firewall</data></node>
    <edge source="X" target="Z1"><data key="i">x1</data></edge>
    <edge source="X" target="Z2"><data key="i">x2</data></edge>
    <edge source="Y" target="Z2"><data key="i">y2</data></edge>
    <edge source="Y" target="Z3"><data key="i">y3</data></edge>
  </graph>
</graphml>"#;

    fn compiled(policy: &str) -> Compiled {
        Compiled::from_sources(TOPO.as_bytes(), policy, Options::default()).unwrap()
    }

    #[test]
    fn map_then_verify_is_clean() {
        let c = compiled("zone Z2 transitive\nsecurity Z1 -> Z3 : tcp/22\n");
        let out = c.map().unwrap();
        assert_eq!(out.assignments.len(), 2);
        let reports = c.verify(&out.assignments).unwrap();
        assert!(reports.iter().all(VerificationReport::is_clean));
    }

    #[test]
    fn strict_map_fails_on_unreachable_rule() {
        let c = compiled("security Z1 -> Z3 : tcp/22\n");
        assert!(matches!(
            c.map(),
            Err(Error::Map(MapError::UnreachablePair(_)))
        ));
        assert_eq!(c.map_lenient().unwrap().unreachable.len(), 1);
    }

    #[test]
    fn what_if_transitivity_and_device_loss() {
        let c = compiled("security Z1 -> Z3 : tcp/22\nsecurity Z1 -> Z2 : tcp/80\n");
        assert!(what_if(&c, &[]).unwrap().is_empty());

        let opened = what_if(&c, &[Change::SetTransitive("Z2".into())]).unwrap();
        assert_eq!(opened.added.len(), 2);
        assert_eq!(opened.resolved.len(), 1);
        assert!(opened.removed.is_empty());

        let dropped = what_if(&c, &[Change::DropDevice("X".into())]).unwrap();
        assert_eq!(dropped.removed.len(), 1);
        assert_eq!(dropped.newly_unreachable.len(), 1);
        assert_eq!(dropped.newly_unreachable[0].dst, "Z2");

        assert!(matches!(
            what_if(&c, &[Change::DropDevice("Nope".into())]),
            Err(Error::UnknownDevice(_))
        ));
    }
}
