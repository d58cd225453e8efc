//! Policy values of each context and their serial (⊗) and parallel (⊕) composition.
//!
//! | context     | ⊗ (series)   | ⊕ (parallel) |
//! |-------------|--------------|--------------|
//! | security    | intersection | union        |
//! | qos         | min          | sum          |
//! | measurement | union        | intersection |

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use thiserror::Error;

use super::services::ServiceSet;
use crate::algebra::{DirectedDevice, PathSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Context {
    Security,
    Qos,
    Measurement,
}

impl Context {
    pub const ALL: [Context; 3] = [Context::Security, Context::Qos, Context::Measurement];

    /// Keyword used in policy files and documents.
    pub fn keyword(self) -> &'static str {
        match self {
            Context::Security => "security",
            Context::Qos => "qos",
            Context::Measurement => "measure",
        }
    }

    pub fn from_keyword(word: &str) -> Option<Context> {
        Context::ALL.into_iter().find(|c| c.keyword() == word)
    }

    /// Neutral element of [`compose_serial`].
    pub fn serial_identity(self) -> PolicyValue {
        match self {
            Context::Security => PolicyValue::Security(ServiceSet::any()),
            Context::Measurement => PolicyValue::Measurement(ServiceSet::empty()),
            Context::Qos => PolicyValue::Qos(QosValue {
                bandwidth: Bandwidth::Unbounded,
                services: ServiceSet::any(),
            }),
        }
    }

    /// Neutral element of [`compose_parallel`].
    pub fn parallel_identity(self) -> PolicyValue {
        match self {
            Context::Security => PolicyValue::Security(ServiceSet::empty()),
            Context::Measurement => PolicyValue::Measurement(ServiceSet::any()),
            Context::Qos => PolicyValue::Qos(QosValue {
                bandwidth: Bandwidth::ZERO,
                services: ServiceSet::any(),
            }),
        }
    }

    /// Policy of a device that carries no rule: permit nothing, collect
    /// nothing, guarantee nothing.
    pub fn unassigned(self) -> PolicyValue {
        match self {
            Context::Security => PolicyValue::Security(ServiceSet::empty()),
            Context::Measurement => PolicyValue::Measurement(ServiceSet::empty()),
            Context::Qos => PolicyValue::Qos(QosValue {
                bandwidth: Bandwidth::ZERO,
                services: ServiceSet::any(),
            }),
        }
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// A bandwidth in MB/s: a non-negative rational, or unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bandwidth {
    Finite(Ratio<u128>),
    Unbounded,
}

impl Bandwidth {
    pub const ZERO: Bandwidth = Bandwidth::Finite(Ratio::new_raw(0, 1));

    pub fn megabytes(value: u64) -> Self {
        Bandwidth::Finite(Ratio::from_integer(u128::from(value)))
    }

    pub fn min(self, other: Self) -> Self {
        std::cmp::min(self, other)
    }

    pub fn sum(self, other: Self) -> Self {
        match (self, other) {
            (Bandwidth::Finite(a), Bandwidth::Finite(b)) => Bandwidth::Finite(a + b),
            _ => Bandwidth::Unbounded,
        }
    }

    pub fn scaled(self, factor: u64) -> Self {
        match self {
            Bandwidth::Finite(a) => Bandwidth::Finite(a * Ratio::from_integer(u128::from(factor))),
            Bandwidth::Unbounded => Bandwidth::Unbounded,
        }
    }
}

impl PartialOrd for Bandwidth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Bandwidth {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Bandwidth::Finite(a), Bandwidth::Finite(b)) => a.cmp(b),
            (Bandwidth::Finite(_), Bandwidth::Unbounded) => Ordering::Less,
            (Bandwidth::Unbounded, Bandwidth::Finite(_)) => Ordering::Greater,
            (Bandwidth::Unbounded, Bandwidth::Unbounded) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Bandwidth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let value = match self {
            Bandwidth::Unbounded => return f.write_str("unbounded"),
            Bandwidth::Finite(v) => v,
        };
        let whole = value.to_integer();
        let mut frac = value.fract();
        if frac == Ratio::from_integer(0) {
            return write!(f, "{whole}MB/s");
        }
        let mut digits = String::new();
        // Parsed values have at most six decimals; sums and minima keep that.
        while frac != Ratio::from_integer(0) && digits.len() < 12 {
            frac *= Ratio::from_integer(10);
            digits.push(char::from(b'0' + frac.to_integer() as u8));
            frac = frac.fract();
        }
        if frac == Ratio::from_integer(0) {
            write!(f, "{whole}.{digits}MB/s")
        } else {
            write!(f, "{}/{}MB/s", value.numer(), value.denom())
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid bandwidth {0:?}: expected <number>MB/s with at most six decimals")]
pub struct BandwidthParseError(pub String);

/// Parses `30MB/s`, `12.5 MB/s` or a bare number (taken as MB/s).
impl FromStr for Bandwidth {
    type Err = BandwidthParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || BandwidthParseError(s.to_string());
        let number = s.trim().trim_end_matches("MB/s").trim();
        let (whole, frac) = number.split_once('.').unwrap_or((number, ""));
        if whole.is_empty() || frac.len() > 6 || whole.len() > 15 {
            return Err(err());
        }
        if !whole
            .bytes()
            .chain(frac.bytes())
            .all(|b| b.is_ascii_digit())
        {
            return Err(err());
        }
        let whole: u128 = whole.parse().map_err(|_| err())?;
        let scale = 10u128.pow(frac.len() as u32);
        let frac: u128 = if frac.is_empty() {
            0
        } else {
            frac.parse().map_err(|_| err())?
        };
        Ok(Bandwidth::Finite(Ratio::new(whole * scale + frac, scale)))
    }
}

/// A bandwidth guarantee for a class of traffic.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QosValue {
    pub bandwidth: Bandwidth,
    pub services: ServiceSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyValue {
    Security(ServiceSet),
    Qos(QosValue),
    Measurement(ServiceSet),
}

impl PolicyValue {
    pub fn context(&self) -> Context {
        match self {
            PolicyValue::Security(_) => Context::Security,
            PolicyValue::Qos(_) => Context::Qos,
            PolicyValue::Measurement(_) => Context::Measurement,
        }
    }

    /// The context's natural order: `⊆` on service sets; for QoS, `≤` on
    /// bandwidth together with `⊆` on the covered services.
    pub fn le(&self, other: &PolicyValue) -> bool {
        match (self, other) {
            (PolicyValue::Security(a), PolicyValue::Security(b))
            | (PolicyValue::Measurement(a), PolicyValue::Measurement(b)) => a.is_subset(b),
            (PolicyValue::Qos(a), PolicyValue::Qos(b)) => {
                a.bandwidth <= b.bandwidth && a.services.is_subset(&b.services)
            }
            _ => false,
        }
    }

    /// Whether a derived end-to-end value implements the intended one. QoS
    /// accepts any guarantee at least as large on the same services; the
    /// other contexts require equality.
    pub fn satisfies(&self, intended: &PolicyValue) -> bool {
        match (self, intended) {
            (PolicyValue::Qos(d), PolicyValue::Qos(i)) => {
                d.services == i.services && d.bandwidth >= i.bandwidth
            }
            _ => self == intended,
        }
    }

    /// Text form as written after the `:` of a policy rule.
    pub fn body(&self) -> String {
        match self {
            PolicyValue::Security(s) => s.to_string(),
            PolicyValue::Measurement(s) => format!("collect {s}"),
            PolicyValue::Qos(q) => format!("{} min {}", q.services, q.bandwidth),
        }
    }

    /// Parses the text after the `:` of a rule for the given context.
    pub fn parse_body(context: Context, body: &str) -> Result<PolicyValue, String> {
        let body = body.trim();
        match context {
            Context::Security => body
                .parse()
                .map(PolicyValue::Security)
                .map_err(|e| e.to_string()),
            Context::Measurement => {
                let rest = body
                    .strip_prefix("collect")
                    .filter(|r| r.starts_with(char::is_whitespace))
                    .ok_or_else(|| "measurement rule must read `collect <services>`".to_string())?;
                rest.parse()
                    .map(PolicyValue::Measurement)
                    .map_err(|e| e.to_string())
            }
            Context::Qos => {
                let (services, bandwidth) = body
                    .rsplit_once(" min ")
                    .ok_or_else(|| "qos rule must read `<service> min <number>MB/s`".to_string())?;
                Ok(PolicyValue::Qos(QosValue {
                    services: services
                        .parse()
                        .map_err(|e: super::ServiceParseError| e.to_string())?,
                    bandwidth: bandwidth
                        .parse()
                        .map_err(|e: BandwidthParseError| e.to_string())?,
                }))
            }
        }
    }
}

impl fmt::Display for PolicyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.context(), self.body())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompositionError {
    #[error("cannot compose {found} policy in {expected} context")]
    ContextMismatch { expected: Context, found: Context },
    #[error("no policy known for directed device {0}")]
    MissingDevicePolicy(String),
    #[error("no path carries the traffic")]
    EmptyPathSet,
}

fn check(ctx: Context, values: [&PolicyValue; 2]) -> Result<(), CompositionError> {
    for v in values {
        if v.context() != ctx {
            return Err(CompositionError::ContextMismatch {
                expected: ctx,
                found: v.context(),
            });
        }
    }
    Ok(())
}

/// `p ⊗ q`: policy of two arbiters in series.
pub fn compose_serial(
    ctx: Context,
    p: &PolicyValue,
    q: &PolicyValue,
) -> Result<PolicyValue, CompositionError> {
    check(ctx, [p, q])?;
    Ok(match (p, q) {
        (PolicyValue::Security(a), PolicyValue::Security(b)) => {
            PolicyValue::Security(a.intersection(b))
        }
        (PolicyValue::Measurement(a), PolicyValue::Measurement(b)) => {
            PolicyValue::Measurement(a.union(b))
        }
        (PolicyValue::Qos(a), PolicyValue::Qos(b)) => PolicyValue::Qos(QosValue {
            bandwidth: a.bandwidth.min(b.bandwidth),
            services: a.services.intersection(&b.services),
        }),
        _ => unreachable!("contexts checked"),
    })
}

/// `p ⊕ q`: policy of two arbiters (or paths) in parallel.
pub fn compose_parallel(
    ctx: Context,
    p: &PolicyValue,
    q: &PolicyValue,
) -> Result<PolicyValue, CompositionError> {
    check(ctx, [p, q])?;
    Ok(match (p, q) {
        (PolicyValue::Security(a), PolicyValue::Security(b)) => PolicyValue::Security(a.union(b)),
        (PolicyValue::Measurement(a), PolicyValue::Measurement(b)) => {
            PolicyValue::Measurement(a.intersection(b))
        }
        (PolicyValue::Qos(a), PolicyValue::Qos(b)) => PolicyValue::Qos(QosValue {
            bandwidth: a.bandwidth.sum(b.bandwidth),
            services: a.services.intersection(&b.services),
        }),
        _ => unreachable!("contexts checked"),
    })
}

/// End-to-end policy of a path set: `⊕` over paths of `⊗` over each path's
/// devices in order. The empty path contributes the `⊗` identity.
pub fn derive_end_to_end<F>(
    ctx: Context,
    lookup: F,
    paths: &PathSet,
) -> Result<PolicyValue, CompositionError>
where
    F: Fn(&DirectedDevice) -> Option<PolicyValue>,
{
    let mut total: Option<PolicyValue> = None;
    for path in paths {
        let mut serial = ctx.serial_identity();
        for step in path.steps() {
            let value = lookup(step)
                .ok_or_else(|| CompositionError::MissingDevicePolicy(step.to_string()))?;
            serial = compose_serial(ctx, &serial, &value)?;
        }
        total = Some(match total {
            None => serial,
            Some(acc) => compose_parallel(ctx, &acc, &serial)?,
        });
    }
    total.ok_or(CompositionError::EmptyPathSet)
}
