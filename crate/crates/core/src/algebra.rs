//! Directed devices, device paths and the idempotent semiring of path sets.
//!
//! A [`DevicePath`] is a sequence of [`DirectedDevice`] steps that chains from
//! zone to zone, never revisits a zone and never uses the same physical device
//! twice. Sets of such paths form a semiring under union and validity-checked
//! concatenation, with [`PathSet::zero`] (no paths) and [`PathSet::one`] (the
//! empty path only) as the identities.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("directed device {device} has identical source and destination zone {zone}")]
    SameZone { device: String, zone: ZoneId },
    #[error("directed device {device} uses interface {interface} for both ingress and egress")]
    SameInterface { device: String, interface: String },
    #[error("device {device} has no interface named {interface}")]
    UnknownInterface { device: String, interface: String },
    #[error("device {device} declares interface {interface} more than once")]
    DuplicateInterface { device: String, interface: String },
    #[error("path step {index} does not start where the previous step ends")]
    BrokenChain { index: usize },
    #[error("path visits zone {0} more than once")]
    RepeatedZone(ZoneId),
    #[error("path uses device {0} more than once")]
    RepeatedDevice(String),
}

/// Index of a zone in the zone table of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ZoneId(pub usize);

impl ZoneId {
    pub fn index(self) -> usize {
        self.0
    }

    /// One-based label used in the textual path form (`A12` is zone 1 to zone 2).
    pub fn label(self) -> usize {
        self.0 + 1
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// A physical policy arbiter (e.g. a firewall) and its interfaces.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysicalDevice {
    id: Arc<str>,
    interfaces: Vec<Arc<str>>,
}

impl PhysicalDevice {
    pub fn new<I, S>(id: &str, interfaces: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut seen = BTreeSet::new();
        let mut list = Vec::new();
        for name in interfaces {
            let name = name.as_ref();
            if !seen.insert(name.to_string()) {
                return Err(AlgebraError::DuplicateInterface {
                    device: id.to_string(),
                    interface: name.to_string(),
                });
            }
            list.push(Arc::from(name));
        }
        Ok(Self {
            id: Arc::from(id),
            interfaces: list,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn interfaces(&self) -> impl Iterator<Item = &str> {
        self.interfaces.iter().map(|i| &**i)
    }

    pub fn has_interface(&self, name: &str) -> bool {
        self.interfaces.iter().any(|i| &**i == name)
    }

    /// Orients this device along the directed conduit `from -> to`.
    pub fn orient(
        &self,
        from: ZoneId,
        to: ZoneId,
        ingress: &str,
        egress: &str,
    ) -> Result<DirectedDevice, AlgebraError> {
        for iface in [ingress, egress] {
            if !self.has_interface(iface) {
                return Err(AlgebraError::UnknownInterface {
                    device: self.id.to_string(),
                    interface: iface.to_string(),
                });
            }
        }
        let ingress = self.interfaces.iter().find(|i| &***i == ingress).cloned();
        let egress = self.interfaces.iter().find(|i| &***i == egress).cloned();
        DirectedDevice::build(
            self.id.clone(),
            from,
            to,
            ingress.expect("checked above"),
            egress.expect("checked above"),
        )
    }
}

#[derive(Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct DirectedInner {
    device: Arc<str>,
    from: ZoneId,
    to: ZoneId,
    ingress: Arc<str>,
    egress: Arc<str>,
}

/// A physical device filtering traffic on one directed conduit `from -> to`.
///
/// Cloning is cheap; the value is shared behind an `Arc`.
#[derive(Clone)]
pub struct DirectedDevice(Arc<DirectedInner>);

impl DirectedDevice {
    pub fn new(
        device: &str,
        from: ZoneId,
        to: ZoneId,
        ingress: &str,
        egress: &str,
    ) -> Result<Self, AlgebraError> {
        Self::build(
            Arc::from(device),
            from,
            to,
            Arc::from(ingress),
            Arc::from(egress),
        )
    }

    fn build(
        device: Arc<str>,
        from: ZoneId,
        to: ZoneId,
        ingress: Arc<str>,
        egress: Arc<str>,
    ) -> Result<Self, AlgebraError> {
        if from == to {
            return Err(AlgebraError::SameZone {
                device: device.to_string(),
                zone: from,
            });
        }
        if ingress == egress {
            return Err(AlgebraError::SameInterface {
                device: device.to_string(),
                interface: ingress.to_string(),
            });
        }
        Ok(Self(Arc::new(DirectedInner {
            device,
            from,
            to,
            ingress,
            egress,
        })))
    }

    /// Identifier of the underlying physical device.
    pub fn device(&self) -> &str {
        &self.0.device
    }

    pub fn from_zone(&self) -> ZoneId {
        self.0.from
    }

    pub fn to_zone(&self) -> ZoneId {
        self.0.to
    }

    /// Interface facing `from_zone`.
    pub fn ingress(&self) -> &str {
        &self.0.ingress
    }

    /// Interface facing `to_zone`.
    pub fn egress(&self) -> &str {
        &self.0.egress
    }

    /// The same device oriented the other way, interfaces swapped.
    pub fn reversed(&self) -> Self {
        Self(Arc::new(DirectedInner {
            device: self.0.device.clone(),
            from: self.0.to,
            to: self.0.from,
            ingress: self.0.egress.clone(),
            egress: self.0.ingress.clone(),
        }))
    }

    fn same_physical(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0.device, &other.0.device) || self.0.device == other.0.device
    }
}

impl PartialEq for DirectedDevice {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for DirectedDevice {}

impl std::hash::Hash for DirectedDevice {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.hash(state)
    }
}

impl PartialOrd for DirectedDevice {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for DirectedDevice {
    fn cmp(&self, other: &Self) -> Ordering {
        if Arc::ptr_eq(&self.0, &other.0) {
            return Ordering::Equal;
        }
        self.0.cmp(&other.0)
    }
}

impl fmt::Debug for DirectedDevice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}>{}]", self, self.ingress(), self.egress())
    }
}

impl fmt::Display for DirectedDevice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = (self.from_zone().label(), self.to_zone().label());
        if a < 10 && b < 10 {
            write!(f, "{}{}{}", self.device(), a, b)
        } else {
            write!(f, "{}({},{})", self.device(), a, b)
        }
    }
}

/// A chained, zone-elementary, device-distinct sequence of directed devices.
/// The empty sequence is the path ε.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct DevicePath {
    steps: Vec<DirectedDevice>,
}

impl DevicePath {
    /// The empty path ε.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(step: DirectedDevice) -> Self {
        Self { steps: vec![step] }
    }

    /// Builds a path, checking chaining, zone-elementarity and device-distinctness.
    pub fn new(steps: Vec<DirectedDevice>) -> Result<Self, AlgebraError> {
        for (index, pair) in steps.windows(2).enumerate() {
            if pair[0].to_zone() != pair[1].from_zone() {
                return Err(AlgebraError::BrokenChain { index: index + 1 });
            }
        }
        let path = Self { steps };
        let mut zones = BTreeSet::new();
        for zone in path.zones() {
            if !zones.insert(zone) {
                return Err(AlgebraError::RepeatedZone(zone));
            }
        }
        let mut devices = BTreeSet::new();
        for step in &path.steps {
            if !devices.insert(step.device()) {
                return Err(AlgebraError::RepeatedDevice(step.device().to_string()));
            }
        }
        Ok(path)
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[DirectedDevice] {
        &self.steps
    }

    pub fn source(&self) -> Option<ZoneId> {
        self.steps.first().map(DirectedDevice::from_zone)
    }

    pub fn target(&self) -> Option<ZoneId> {
        self.steps.last().map(DirectedDevice::to_zone)
    }

    /// Zone sequence visited by the path; empty for ε.
    pub fn zones(&self) -> impl Iterator<Item = ZoneId> + '_ {
        self.steps
            .first()
            .map(DirectedDevice::from_zone)
            .into_iter()
            .chain(self.steps.iter().map(DirectedDevice::to_zone))
    }

    /// Zones strictly between source and target.
    pub fn intermediate_zones(&self) -> impl Iterator<Item = ZoneId> + '_ {
        let n = self.steps.len();
        self.steps
            .iter()
            .take(n.saturating_sub(1))
            .map(DirectedDevice::to_zone)
    }

    /// Validity-checked concatenation; `None` is the invalid product.
    pub fn concat(&self, other: &DevicePath) -> Option<DevicePath> {
        if self.is_empty() {
            return Some(other.clone());
        }
        if other.is_empty() {
            return Some(self.clone());
        }
        if self.target() != other.source() {
            return None;
        }
        for step in &other.steps {
            let to = step.to_zone();
            if self.zones().any(|z| z == to) {
                return None;
            }
            if self.steps.iter().any(|s| s.same_physical(step)) {
                return None;
            }
        }
        let mut steps = Vec::with_capacity(self.steps.len() + other.steps.len());
        steps.extend(self.steps.iter().cloned());
        steps.extend(other.steps.iter().cloned());
        Some(DevicePath { steps })
    }
}

impl PartialOrd for DevicePath {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical order: zone sequence first, then device ids, then full step identity.
impl Ord for DevicePath {
    fn cmp(&self, other: &Self) -> Ordering {
        self.zones()
            .cmp(other.zones())
            .then_with(|| {
                self.steps
                    .iter()
                    .map(DirectedDevice::device)
                    .cmp(other.steps.iter().map(DirectedDevice::device))
            })
            .then_with(|| self.steps.cmp(&other.steps))
    }
}

impl fmt::Display for DevicePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return f.write_str("ε");
        }
        for step in &self.steps {
            write!(f, "{step}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DevicePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Concatenates two paths; `None` when the product is invalid.
pub fn concat_path(a: &DevicePath, b: &DevicePath) -> Option<DevicePath> {
    a.concat(b)
}

/// Operations of a semiring `(S, +, ·, 0, 1)`.
pub trait Semiring: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, other: &Self) -> Self;
    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    /// `acc = acc + self · other`.
    fn times_into(&self, other: &Self, acc: &mut Self) {
        *acc = acc.plus(&self.times(other));
    }
}

/// A finite set of device paths, ordered canonically.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct PathSet {
    paths: BTreeSet<DevicePath>,
}

impl PathSet {
    /// The empty set (no path).
    pub fn zero() -> Self {
        Self::default()
    }

    /// The set holding only ε.
    pub fn one() -> Self {
        Self::singleton(DevicePath::empty())
    }

    pub fn singleton(path: DevicePath) -> Self {
        let mut paths = BTreeSet::new();
        paths.insert(path);
        Self { paths }
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.paths.len() == 1 && self.paths.iter().next().is_some_and(DevicePath::is_empty)
    }

    pub fn contains(&self, path: &DevicePath) -> bool {
        self.paths.contains(path)
    }

    pub fn iter(&self) -> impl Iterator<Item = &DevicePath> {
        self.paths.iter()
    }

    pub fn insert(&mut self, path: DevicePath) -> bool {
        self.paths.insert(path)
    }

    pub fn is_subset(&self, other: &PathSet) -> bool {
        self.paths.is_subset(&other.paths)
    }

    pub fn union(&self, other: &PathSet) -> PathSet {
        let mut out = self.clone();
        out.paths.extend(other.paths.iter().cloned());
        out
    }

    /// `{ x·y | x ∈ self, y ∈ other, x·y valid }`.
    pub fn concat(&self, other: &PathSet) -> PathSet {
        let mut out = PathSet::zero();
        self.concat_into(other, &mut out);
        out
    }

    fn concat_into(&self, other: &PathSet, acc: &mut PathSet) {
        for x in &self.paths {
            for y in &other.paths {
                if let Some(p) = x.concat(y) {
                    acc.paths.insert(p);
                }
            }
        }
    }
}

impl Semiring for PathSet {
    fn zero() -> Self {
        PathSet::zero()
    }

    fn one() -> Self {
        PathSet::one()
    }

    fn plus(&self, other: &Self) -> Self {
        self.union(other)
    }

    fn times(&self, other: &Self) -> Self {
        self.concat(other)
    }

    fn is_zero(&self) -> bool {
        self.is_empty()
    }

    fn times_into(&self, other: &Self, acc: &mut Self) {
        self.concat_into(other, acc)
    }
}

impl FromIterator<DevicePath> for PathSet {
    fn from_iter<T: IntoIterator<Item = DevicePath>>(iter: T) -> Self {
        Self {
            paths: iter.into_iter().collect(),
        }
    }
}

impl IntoIterator for PathSet {
    type Item = DevicePath;
    type IntoIter = std::collections::btree_set::IntoIter<DevicePath>;

    fn into_iter(self) -> Self::IntoIter {
        self.paths.into_iter()
    }
}

impl<'a> IntoIterator for &'a PathSet {
    type Item = &'a DevicePath;
    type IntoIter = std::collections::btree_set::Iter<'a, DevicePath>;

    fn into_iter(self) -> Self::IntoIter {
        self.paths.iter()
    }
}

impl fmt::Display for PathSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, path) in self.paths.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{path}")?;
        }
        f.write_str("}")
    }
}

impl fmt::Debug for PathSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub fn concat_sets(a: &PathSet, b: &PathSet) -> PathSet {
    a.concat(b)
}

pub fn union_sets(a: &PathSet, b: &PathSet) -> PathSet {
    a.union(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dd(device: &str, from: usize, to: usize) -> DirectedDevice {
        DirectedDevice::new(
            device,
            ZoneId(from - 1),
            ZoneId(to - 1),
            &format!("e{from}"),
            &format!("e{to}"),
        )
        .unwrap()
    }

    fn p(steps: &[DirectedDevice]) -> DevicePath {
        DevicePath::new(steps.to_vec()).unwrap()
    }

    fn set(paths: &[DevicePath]) -> PathSet {
        paths.iter().cloned().collect()
    }

    #[test]
    fn two_step_concatenation() {
        let ac = concat_path(&p(&[dd("A", 1, 2)]), &p(&[dd("C", 2, 3)])).unwrap();
        assert_eq!(ac.to_string(), "A12C23");
        assert_eq!(ac.source(), Some(ZoneId(0)));
        assert_eq!(ac.target(), Some(ZoneId(2)));
    }

    #[test]
    fn same_physical_device_twice_is_invalid() {
        assert!(concat_path(&p(&[dd("A", 1, 3)]), &p(&[dd("A", 3, 2)])).is_none());
    }

    #[test]
    fn epsilon_is_two_sided_identity() {
        let a = p(&[dd("A", 1, 2)]);
        assert_eq!(concat_path(&DevicePath::empty(), &a), Some(a.clone()));
        assert_eq!(concat_path(&a, &DevicePath::empty()), Some(a));
    }

    #[test]
    fn broken_chain_is_invalid() {
        assert!(concat_path(&p(&[dd("A", 1, 2)]), &p(&[dd("F", 3, 4)])).is_none());
    }

    #[test]
    fn return_to_start_zone_is_invalid() {
        let out = p(&[dd("A", 1, 2)]);
        let back = p(&[dd("B", 2, 1)]);
        assert!(concat_path(&out, &back).is_none());
    }

    #[test]
    fn path_constructor_checks_invariants() {
        assert_eq!(
            DevicePath::new(vec![dd("A", 1, 2), dd("C", 3, 4)]),
            Err(AlgebraError::BrokenChain { index: 1 })
        );
        assert_eq!(
            DevicePath::new(vec![dd("A", 1, 2), dd("C", 2, 1)]),
            Err(AlgebraError::RepeatedZone(ZoneId(0)))
        );
        assert_eq!(
            DevicePath::new(vec![dd("A", 1, 2), dd("A", 2, 3)]),
            Err(AlgebraError::RepeatedDevice("A".into()))
        );
    }

    #[test]
    fn directed_device_invariants() {
        assert!(DirectedDevice::new("A", ZoneId(0), ZoneId(0), "e0", "e1").is_err());
        assert!(DirectedDevice::new("A", ZoneId(0), ZoneId(1), "e0", "e0").is_err());
        let fw = PhysicalDevice::new("A", ["e0", "e1"]).unwrap();
        assert!(fw.orient(ZoneId(0), ZoneId(1), "e0", "e9").is_err());
        let t = fw.orient(ZoneId(0), ZoneId(1), "e0", "e1").unwrap();
        let r = t.reversed();
        assert_eq!((r.ingress(), r.egress()), ("e1", "e0"));
        assert_eq!(r.reversed(), t);
        assert!(PhysicalDevice::new("A", ["e0", "e0"]).is_err());
    }

    #[test]
    fn parallel_devices_times_parallel_devices() {
        let a = set(&[p(&[dd("A", 1, 2)]), p(&[dd("B", 1, 2)])]);
        let b = set(&[p(&[dd("C", 2, 3)]), p(&[dd("D", 2, 3)])]);
        assert_eq!(
            concat_sets(&a, &b).to_string(),
            "{A12C23, A12D23, B12C23, B12D23}"
        );
    }

    #[test]
    fn zero_absorbs_and_invalid_products_vanish() {
        let a = set(&[p(&[dd("A", 1, 2)])]);
        assert_eq!(concat_sets(&a, &PathSet::zero()), PathSet::zero());
        assert_eq!(concat_sets(&PathSet::zero(), &a), PathSet::zero());
        let a13 = set(&[p(&[dd("A", 1, 3)])]);
        let a32 = set(&[p(&[dd("A", 3, 2)])]);
        assert_eq!(concat_sets(&a13, &a32), PathSet::zero());
    }

    #[test]
    fn union_examples() {
        let a = set(&[p(&[dd("A", 1, 2)])]);
        let b = set(&[p(&[dd("B", 1, 2)])]);
        assert_eq!(union_sets(&a, &b).to_string(), "{A12, B12}");
        assert_eq!(union_sets(&a, &a), a);

        let via2 = concat_sets(
            &set(&[p(&[dd("A", 1, 2)]), p(&[dd("B", 1, 2)])]),
            &set(&[p(&[dd("C", 2, 3)]), p(&[dd("D", 2, 3)])]),
        );
        let via4 = set(&[
            p(&[dd("E", 1, 4), dd("F", 4, 3)]),
            p(&[dd("E", 1, 4), dd("G", 4, 3)]),
        ]);
        let both_sides = union_sets(&via2, &via4);
        assert_eq!(both_sides.len(), 6);
        assert_eq!(
            both_sides.to_string(),
            "{A12C23, A12D23, B12C23, B12D23, E14F43, E14G43}"
        );
    }

    #[test]
    fn concat_is_not_commutative() {
        let a = set(&[p(&[dd("A", 1, 2)])]);
        let c = set(&[p(&[dd("C", 2, 3)])]);
        assert_ne!(concat_sets(&a, &c), concat_sets(&c, &a));
    }

    #[test]
    fn canonical_text_for_distinguished_values() {
        assert_eq!(PathSet::zero().to_string(), "{}");
        assert_eq!(PathSet::one().to_string(), "{ε}");
        assert!(PathSet::one().is_one());
        assert!(!PathSet::zero().is_one());
    }

    #[test]
    fn wide_zone_labels_are_delimited() {
        let t = DirectedDevice::new("fw", ZoneId(9), ZoneId(2), "a", "b").unwrap();
        assert_eq!(t.to_string(), "fw(10,3)");
    }

    #[test]
    fn canonical_order_is_by_zone_sequence_first() {
        let s = set(&[
            p(&[dd("A", 1, 4)]),
            p(&[dd("Z", 1, 2)]),
            p(&[dd("B", 1, 2), dd("C", 2, 3)]),
        ]);
        assert_eq!(s.to_string(), "{Z12, B12C23, A14}");
    }
}
