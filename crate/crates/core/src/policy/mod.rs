//! Policy contexts, composition operators and the line-oriented policy file.
//!
//! ```text
//! # comment
//! zone Z4 non-transitive
//! security Z1 -> Z3 : tcp/22, tcp/8000-8080
//! qos Z1 -> Z3 : tcp/80 min 30MB/s
//! measure Z1 -> Z3 : collect tcp/443
//! ```

mod services;
mod value;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use services::{Protocol, ServiceParseError, ServiceSet};
pub use value::{
    compose_parallel, compose_serial, derive_end_to_end, Bandwidth, BandwidthParseError,
    CompositionError, Context, PolicyValue, QosValue,
};

/// An intended policy between an ordered pair of zones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PolicyRule {
    pub src: String,
    pub dst: String,
    pub value: PolicyValue,
}

impl PolicyRule {
    pub fn new(src: &str, dst: &str, value: PolicyValue) -> Self {
        Self {
            src: src.to_string(),
            dst: dst.to_string(),
            value,
        }
    }

    pub fn context(&self) -> Context {
        self.value.context()
    }
}

impl fmt::Display for PolicyRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} -> {} : {}",
            self.context(),
            self.src,
            self.dst,
            self.value.body()
        )
    }
}

/// Zone transitivity declarations and rules from one policy file.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Policy {
    pub transitivity: BTreeMap<String, bool>,
    pub rules: Vec<PolicyRule>,
}

impl Policy {
    pub fn rules_for(&self, ctx: Context) -> impl Iterator<Item = &PolicyRule> {
        self.rules.iter().filter(move |r| r.context() == ctx)
    }

    /// Contexts that have at least one rule, in fixed order.
    pub fn contexts(&self) -> Vec<Context> {
        Context::ALL
            .into_iter()
            .filter(|c| self.rules.iter().any(|r| r.context() == *c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct PolicyParseError {
    pub line: usize,
    pub message: String,
}

/// Parses `<kw> <src> -> <dst> : <body>` into a rule.
pub fn parse_rule(text: &str) -> Result<PolicyRule, String> {
    let (head, body) = text
        .split_once(':')
        .ok_or_else(|| "expected `<context> <src> -> <dst> : <value>`".to_string())?;
    let words: Vec<&str> = head.split_whitespace().collect();
    let [kw, src, arrow, dst] = words[..] else {
        return Err("expected `<context> <src> -> <dst> : <value>`".into());
    };
    if arrow != "->" {
        return Err(format!("expected `->` between zones, found {arrow:?}"));
    }
    let ctx = Context::from_keyword(kw).ok_or_else(|| format!("unknown rule kind {kw:?}"))?;
    if src == dst {
        return Err(format!("rule from {src} to itself"));
    }
    let value = PolicyValue::parse_body(ctx, body)?;
    Ok(PolicyRule::new(src, dst, value))
}

pub fn parse_policy(text: &str) -> Result<Policy, PolicyParseError> {
    let mut policy = Policy::default();
    let mut seen = BTreeSet::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let fail = |message: String| PolicyParseError { line, message };
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let words: Vec<&str> = content.split_whitespace().collect();
        if words[0] == "zone" {
            let flag = match words[..] {
                [_, _, "transitive"] => true,
                [_, _, "non-transitive"] => false,
                _ => {
                    return Err(fail(
                        "expected `zone <name> transitive|non-transitive`".into(),
                    ))
                }
            };
            if policy
                .transitivity
                .insert(words[1].to_string(), flag)
                .is_some()
            {
                return Err(fail(format!("zone {} declared twice", words[1])));
            }
            continue;
        }
        let rule = parse_rule(content).map_err(fail)?;
        if !seen.insert((rule.context(), rule.src.clone(), rule.dst.clone())) {
            return Err(fail(format!(
                "duplicate {} rule for {} -> {}",
                rule.context(),
                rule.src,
                rule.dst
            )));
        }
        policy.rules.push(rule);
    }
    Ok(policy)
}
