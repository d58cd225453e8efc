//! Placement of policy rules on (device, interface, direction) and auditing
//! of existing placements.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{DirectedDevice, PathSet, ZoneId};
use crate::matrix::PathMatrix;
use crate::policy::{
    derive_end_to_end, CompositionError, Context, PolicyRule, PolicyValue, QosValue,
};
use crate::topology::ZoneConduitModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    Inbound,
    Outbound,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Inbound => "inbound",
            Direction::Outbound => "outbound",
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Direction::Inbound => Direction::Outbound,
            Direction::Outbound => Direction::Inbound,
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inbound" | "in" => Ok(Direction::Inbound),
            "outbound" | "out" => Ok(Direction::Outbound),
            other => Err(format!("unknown direction {other:?}")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Where a directed device's rule is placed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DirectionConvention {
    /// Inbound on the interface facing the source zone.
    #[default]
    IngressInbound,
    /// Outbound on the interface facing the destination zone.
    EgressOutbound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MeasurementStrategy {
    /// Every arbiter of every path.
    #[default]
    All,
    /// Only the first arbiter of each path.
    FirstArbiter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MapOptions {
    pub direction: DirectionConvention,
    pub measurement: MeasurementStrategy,
}

/// One rule placed on one interface of one device, in one direction.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeviceAssignment {
    pub device: String,
    pub interface: String,
    pub direction: Direction,
    pub rule: PolicyRule,
}

impl DeviceAssignment {
    /// Whether this placement filters the traffic carried by `t`.
    pub fn realizes(&self, t: &DirectedDevice) -> bool {
        self.device == t.device()
            && match self.direction {
                Direction::Inbound => self.interface == t.ingress(),
                Direction::Outbound => self.interface == t.egress(),
            }
    }
}

impl fmt::Display for DeviceAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {}",
            self.device, self.interface, self.direction, self.rule
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MapError {
    #[error("unknown zone {0}")]
    UnknownZone(String),
    #[error("no valid path for rule `{0}`; the policy cannot be implemented")]
    UnreachablePair(Box<PolicyRule>),
    #[error("rule `{rule}` does not belong to the {expected} context")]
    ContextMismatch {
        expected: Context,
        rule: Box<PolicyRule>,
    },
    #[error(transparent)]
    Composition(#[from] CompositionError),
}

fn resolve(model: &ZoneConduitModel, name: &str) -> Result<ZoneId, MapError> {
    model
        .zone_id(name)
        .ok_or_else(|| MapError::UnknownZone(name.to_string()))
}

fn rule_paths<'a>(
    ctx: Context,
    rule: &PolicyRule,
    astar: &'a PathMatrix,
    model: &ZoneConduitModel,
) -> Result<&'a PathSet, MapError> {
    if rule.context() != ctx {
        return Err(MapError::ContextMismatch {
            expected: ctx,
            rule: Box::new(rule.clone()),
        });
    }
    let (src, dst) = (resolve(model, &rule.src)?, resolve(model, &rule.dst)?);
    let paths = astar.get(src.index(), dst.index());
    if paths.is_empty() {
        return Err(MapError::UnreachablePair(Box::new(rule.clone())));
    }
    Ok(paths)
}

fn place(
    t: &DirectedDevice,
    rule: &PolicyRule,
    convention: DirectionConvention,
) -> DeviceAssignment {
    let (interface, direction) = match convention {
        DirectionConvention::IngressInbound => (t.ingress(), Direction::Inbound),
        DirectionConvention::EgressOutbound => (t.egress(), Direction::Outbound),
    };
    DeviceAssignment {
        device: t.device().to_string(),
        interface: interface.to_string(),
        direction,
        rule: rule.clone(),
    }
}

/// Placements for one rule, deduplicated and sorted.
pub fn map_rule(
    ctx: Context,
    rule: &PolicyRule,
    astar: &PathMatrix,
    model: &ZoneConduitModel,
    options: MapOptions,
) -> Result<BTreeSet<DeviceAssignment>, MapError> {
    let paths = rule_paths(ctx, rule, astar, model)?;
    let first_only =
        ctx == Context::Measurement && options.measurement == MeasurementStrategy::FirstArbiter;
    let mut out = BTreeSet::new();
    for path in paths {
        let steps = if first_only {
            &path.steps()[..path.len().min(1)]
        } else {
            path.steps()
        };
        for t in steps {
            out.insert(place(t, rule, options.direction));
        }
    }
    Ok(out)
}

/// Maps every rule of `ctx` onto the devices of its paths in `astar`.
///
/// Security and QoS rules go on all arbiters of all paths; measurement rules
/// follow `options.measurement`. QoS bandwidth is replicated, not split.
pub fn map_policy(
    ctx: Context,
    rules: &[PolicyRule],
    astar: &PathMatrix,
    model: &ZoneConduitModel,
    options: MapOptions,
) -> Result<Vec<DeviceAssignment>, MapError> {
    let per_rule: Vec<BTreeSet<DeviceAssignment>> = rules
        .par_iter()
        .map(|rule| map_rule(ctx, rule, astar, model, options))
        .collect::<Result<_, _>>()?;
    let all: BTreeSet<DeviceAssignment> = per_rule.into_iter().flatten().collect();
    Ok(all.into_iter().collect())
}

/// Notes on QoS rules whose guarantee ends up provisioned on several paths.
pub fn provisioning_notes(
    rules: &[PolicyRule],
    astar: &PathMatrix,
    model: &ZoneConduitModel,
) -> Vec<String> {
    let mut notes = Vec::new();
    for rule in rules {
        let PolicyValue::Qos(q) = &rule.value else {
            continue;
        };
        let Ok(paths) = rule_paths(Context::Qos, rule, astar, model) else {
            continue;
        };
        if paths.len() > 1 {
            notes.push(format!(
                "`{rule}`: {} replicated on {} paths; up to {} provisioned",
                q.bandwidth,
                paths.len(),
                q.bandwidth.scaled(paths.len() as u64)
            ));
        }
    }
    notes
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Classification {
    Correct,
    IncorrectFirewall,
    IncorrectInterface,
    IncorrectDirection,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Correct => "correct",
            Classification::IncorrectFirewall => "incorrect-firewall",
            Classification::IncorrectInterface => "incorrect-interface",
            Classification::IncorrectDirection => "incorrect-direction",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClassCounts {
    pub incorrect_firewall: usize,
    pub incorrect_interface: usize,
    pub incorrect_direction: usize,
    pub correct: usize,
}

impl ClassCounts {
    pub fn record(&mut self, class: Classification) {
        match class {
            Classification::Correct => self.correct += 1,
            Classification::IncorrectFirewall => self.incorrect_firewall += 1,
            Classification::IncorrectInterface => self.incorrect_interface += 1,
            Classification::IncorrectDirection => self.incorrect_direction += 1,
        }
    }

    pub fn errors(&self) -> usize {
        self.incorrect_firewall + self.incorrect_interface + self.incorrect_direction
    }

    pub fn total(&self) -> usize {
        self.errors() + self.correct
    }

    pub fn add(&mut self, other: &ClassCounts) {
        self.incorrect_firewall += other.incorrect_firewall;
        self.incorrect_interface += other.incorrect_interface;
        self.incorrect_direction += other.incorrect_direction;
        self.correct += other.correct;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AuditedAssignment {
    pub assignment: DeviceAssignment,
    pub class: Classification,
}

/// A zone pair whose derived end-to-end policy misses the intended one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyDelta {
    pub src: String,
    pub dst: String,
    pub intended: PolicyValue,
    pub derived: PolicyValue,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub context: Context,
    pub audited: Vec<AuditedAssignment>,
    pub counts: ClassCounts,
    pub deltas: Vec<PolicyDelta>,
}

impl VerificationReport {
    pub fn is_clean(&self) -> bool {
        self.counts.errors() == 0 && self.deltas.is_empty()
    }
}

/// Classifies one placement against the paths of its rule's zone pair.
pub fn classify(assignment: &DeviceAssignment, paths: &PathSet) -> Classification {
    let occurrences: Vec<&DirectedDevice> = paths
        .iter()
        .flat_map(|p| p.steps())
        .filter(|t| t.device() == assignment.device)
        .collect();
    if occurrences.is_empty() {
        return Classification::IncorrectFirewall;
    }
    let on_interface = occurrences
        .iter()
        .any(|t| t.ingress() == assignment.interface || t.egress() == assignment.interface);
    if !on_interface {
        return Classification::IncorrectInterface;
    }
    if occurrences.iter().any(|t| assignment.realizes(t)) {
        Classification::Correct
    } else {
        Classification::IncorrectDirection
    }
}

/// Several entries for the same zone pair on one directed device.
fn combine_entries(ctx: Context, values: &[&PolicyValue]) -> PolicyValue {
    let mut iter = values.iter();
    let Some(first) = iter.next() else {
        return ctx.unassigned();
    };
    iter.fold((*first).clone(), |acc, v| match (acc, v) {
        (PolicyValue::Security(a), PolicyValue::Security(b)) => PolicyValue::Security(a.union(b)),
        (PolicyValue::Measurement(a), PolicyValue::Measurement(b)) => {
            PolicyValue::Measurement(a.union(b))
        }
        // Reservations on one device do not stack; the largest applies.
        (PolicyValue::Qos(a), PolicyValue::Qos(b)) => PolicyValue::Qos(QosValue {
            bandwidth: std::cmp::max(a.bandwidth, b.bandwidth),
            services: a.services.union(&b.services),
        }),
        (acc, _) => acc,
    })
}

/// Audits `existing` placements of `ctx` rules against the paths in `astar`
/// and compares the end-to-end policy they produce with `rules`.
pub fn verify_assignments(
    ctx: Context,
    rules: &[PolicyRule],
    astar: &PathMatrix,
    model: &ZoneConduitModel,
    existing: &[DeviceAssignment],
) -> Result<VerificationReport, MapError> {
    let mut intended: BTreeMap<(ZoneId, ZoneId), &PolicyRule> = BTreeMap::new();
    for rule in rules {
        rule_paths(ctx, rule, astar, model)?;
        intended.insert(
            (resolve(model, &rule.src)?, resolve(model, &rule.dst)?),
            rule,
        );
    }

    let mut audited = Vec::new();
    let mut counts = ClassCounts::default();
    let mut placed: BTreeMap<(ZoneId, ZoneId), Vec<&DeviceAssignment>> = BTreeMap::new();
    for a in existing.iter().filter(|a| a.rule.context() == ctx) {
        let pair = (resolve(model, &a.rule.src)?, resolve(model, &a.rule.dst)?);
        let class = classify(a, astar.get(pair.0.index(), pair.1.index()));
        counts.record(class);
        if class == Classification::Correct {
            placed.entry(pair).or_default().push(a);
        }
        audited.push(AuditedAssignment {
            assignment: a.clone(),
            class,
        });
    }

    let n = model.zone_count();
    let mut deltas = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pair = (ZoneId(i), ZoneId(j));
            let want = intended
                .get(&pair)
                .map(|r| r.value.clone())
                .unwrap_or_else(|| ctx.unassigned());
            let on_pair = placed.get(&pair).map(Vec::as_slice).unwrap_or(&[]);
            let paths = astar.get(i, j);
            let derived = if paths.is_empty() {
                ctx.unassigned()
            } else {
                let lookup = |t: &DirectedDevice| {
                    let values: Vec<&PolicyValue> = on_pair
                        .iter()
                        .filter(|a| a.realizes(t))
                        .map(|a| &a.rule.value)
                        .collect();
                    Some(combine_entries(ctx, &values))
                };
                derive_end_to_end(ctx, lookup, paths)?
            };
            if !derived.satisfies(&want) {
                deltas.push(PolicyDelta {
                    src: model.zone(pair.0).name.clone(),
                    dst: model.zone(pair.1).name.clone(),
                    intended: want,
                    derived,
                });
            }
        }
    }

    Ok(VerificationReport {
        context: ctx,
        audited,
        counts,
        deltas,
    })
}
