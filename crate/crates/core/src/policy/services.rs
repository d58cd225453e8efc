//! Service predicates: sets of (protocol, port range) pairs in normal form.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Protocol {
    Tcp,
    Udp,
    Icmp,
}

impl Protocol {
    pub const ALL: [Protocol; 3] = [Protocol::Tcp, Protocol::Udp, Protocol::Icmp];

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Tcp => "tcp",
            Protocol::Udp => "udp",
            Protocol::Icmp => "icmp",
        }
    }
}

const FULL: (u16, u16) = (0, u16::MAX);

/// A set of services. Ranges are closed, sorted, disjoint and non-adjacent
/// per protocol, so structural equality is set equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct ServiceSet {
    ranges: BTreeMap<Protocol, Vec<(u16, u16)>>,
}

fn normalize(mut ranges: Vec<(u16, u16)>) -> Vec<(u16, u16)> {
    ranges.sort_unstable();
    let mut out: Vec<(u16, u16)> = Vec::with_capacity(ranges.len());
    for (lo, hi) in ranges {
        match out.last_mut() {
            Some(last) if u32::from(lo) <= u32::from(last.1) + 1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

fn intersect(a: &[(u16, u16)], b: &[(u16, u16)]) -> Vec<(u16, u16)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

impl ServiceSet {
    /// Deny-all: no service.
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every port of every protocol.
    pub fn any() -> Self {
        Self {
            ranges: Protocol::ALL.iter().map(|&p| (p, vec![FULL])).collect(),
        }
    }

    pub fn range(protocol: Protocol, lo: u16, hi: u16) -> Self {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        Self {
            ranges: BTreeMap::from([(protocol, vec![(lo, hi)])]),
        }
    }

    pub fn port(protocol: Protocol, port: u16) -> Self {
        Self::range(protocol, port, port)
    }

    pub fn protocol(protocol: Protocol) -> Self {
        Self::range(protocol, FULL.0, FULL.1)
    }

    pub fn tcp(port: u16) -> Self {
        Self::port(Protocol::Tcp, port)
    }

    pub fn udp(port: u16) -> Self {
        Self::port(Protocol::Udp, port)
    }

    pub fn is_empty(&self) -> bool {
        self.ranges.is_empty()
    }

    pub fn is_any(&self) -> bool {
        *self == Self::any()
    }

    pub fn ranges(&self) -> impl Iterator<Item = (Protocol, u16, u16)> + '_ {
        self.ranges
            .iter()
            .flat_map(|(&p, rs)| rs.iter().map(move |&(lo, hi)| (p, lo, hi)))
    }

    pub fn contains(&self, protocol: Protocol, port: u16) -> bool {
        self.ranges
            .get(&protocol)
            .is_some_and(|rs| rs.iter().any(|&(lo, hi)| lo <= port && port <= hi))
    }

    pub fn union(&self, other: &ServiceSet) -> ServiceSet {
        let mut ranges = self.ranges.clone();
        for (p, rs) in &other.ranges {
            let merged = ranges.entry(*p).or_default();
            merged.extend_from_slice(rs);
            *merged = normalize(std::mem::take(merged));
        }
        Self { ranges }
    }

    pub fn intersection(&self, other: &ServiceSet) -> ServiceSet {
        let ranges = self
            .ranges
            .iter()
            .filter_map(|(p, a)| {
                let b = other.ranges.get(p)?;
                let common = intersect(a, b);
                (!common.is_empty()).then_some((*p, common))
            })
            .collect();
        Self { ranges }
    }

    pub fn is_subset(&self, other: &ServiceSet) -> bool {
        self.intersection(other) == *self
    }
}

impl fmt::Display for ServiceSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("none");
        }
        if self.is_any() {
            return f.write_str("any");
        }
        let mut first = true;
        for (p, lo, hi) in self.ranges() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            match (lo, hi) {
                FULL => write!(f, "{}/any", p.as_str())?,
                (lo, hi) if lo == hi => write!(f, "{}/{lo}", p.as_str())?,
                (lo, hi) => write!(f, "{}/{lo}-{hi}", p.as_str())?,
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid service {text:?}: {reason}")]
pub struct ServiceParseError {
    pub text: String,
    pub reason: String,
}

fn parse_one(item: &str) -> Result<ServiceSet, ServiceParseError> {
    let err = |reason: &str| ServiceParseError {
        text: item.to_string(),
        reason: reason.to_string(),
    };
    match item {
        "any" => return Ok(ServiceSet::any()),
        "none" => return Ok(ServiceSet::empty()),
        _ => {}
    }
    let (proto, ports) = item
        .split_once('/')
        .ok_or_else(|| err("expected <proto>/<port|lo-hi|any>"))?;
    let protocol = match proto {
        "tcp" => Protocol::Tcp,
        "udp" => Protocol::Udp,
        "icmp" => Protocol::Icmp,
        "any" if ports == "any" => return Ok(ServiceSet::any()),
        _ => return Err(err("unknown protocol")),
    };
    let port = |s: &str| s.parse::<u16>().map_err(|_| err("port must be 0-65535"));
    if ports == "any" {
        return Ok(ServiceSet::protocol(protocol));
    }
    match ports.split_once('-') {
        Some((lo, hi)) => {
            let (lo, hi) = (port(lo)?, port(hi)?);
            if lo > hi {
                return Err(err("range bounds are reversed"));
            }
            Ok(ServiceSet::range(protocol, lo, hi))
        }
        None => Ok(ServiceSet::port(protocol, port(ports)?)),
    }
}

/// Parses a comma-separated list such as `tcp/22, tcp/8000-8080, udp/any`.
impl FromStr for ServiceSet {
    type Err = ServiceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut out = ServiceSet::empty();
        let mut seen = false;
        for item in s.split(',').map(str::trim) {
            if item.is_empty() {
                return Err(ServiceParseError {
                    text: s.to_string(),
                    reason: "empty service entry".into(),
                });
            }
            out = out.union(&parse_one(item)?);
            seen = true;
        }
        if !seen {
            return Err(ServiceParseError {
                text: s.to_string(),
                reason: "no services".into(),
            });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> ServiceSet {
        text.parse().unwrap()
    }

    #[test]
    fn overlapping_and_adjacent_ranges_merge() {
        assert_eq!(s("tcp/10-20, tcp/15-30, tcp/31"), s("tcp/10-31"));
        assert_eq!(s("tcp/10-20, tcp/15-30").to_string(), "tcp/10-30");
        assert_eq!(s("tcp/0-65535, udp/any, icmp/any"), ServiceSet::any());
        assert_eq!(s("any/any"), ServiceSet::any());
    }

    #[test]
    fn set_operations() {
        let web = s("tcp/80, tcp/443");
        let ssh = s("tcp/22");
        assert_eq!(web.union(&ssh).to_string(), "tcp/22, tcp/80, tcp/443");
        assert_eq!(s("tcp/22, tcp/80").intersection(&ssh), ssh);
        assert!(web.intersection(&ssh).is_empty());
        assert_eq!(
            s("tcp/1-100").intersection(&s("tcp/50-200, udp/60")),
            s("tcp/50-100")
        );
        assert!(ssh.is_subset(&ServiceSet::any()));
        assert!(ServiceSet::empty().is_subset(&ssh));
        assert!(!web.is_subset(&ssh));
    }

    #[test]
    fn display_round_trips() {
        for text in [
            "any",
            "none",
            "tcp/22",
            "tcp/any, udp/53",
            "tcp/1-5, icmp/any",
        ] {
            assert_eq!(s(text).to_string(), text);
        }
    }

    #[test]
    fn parse_errors() {
        for bad in [
            "",
            "tcp",
            "ftp/21",
            "tcp/70000",
            "tcp/9-3",
            "tcp/22,,tcp/80",
            "tcp/x",
        ] {
            assert!(bad.parse::<ServiceSet>().is_err(), "{bad}");
        }
    }
}
