//! Verdict domains: join-semilattices ordering verdicts by specificity.
//!
//! `leq(a, b)` reads "`a` is at least as specific as `b`". Meets are partial:
//! [`VerdictDomain::meet`] returns `None` where the greatest lower bound would
//! be the sentinel bottom, so an undefined verdict can never be stored.

mod bdd;
mod boolexpr;
mod config;
mod faults;
mod lifted;
mod truth;

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bdd::{BddStore, NodeId};
pub use boolexpr::{BoolDomain, BoolFn};
pub use config::{Backend, ConfigDomain, ConfigSet, Configuration, FeatureModel};
pub use faults::{FaultDomain, FaultSet};
pub use lifted::{Lifted, Possibilities};
pub use truth::{Truth, Truth3, Truth5};

/// A join-semilattice of verdicts.
pub trait VerdictDomain: Clone + Send + Sync + Debug {
    type Verdict: Clone + Eq + Ord + Hash + Debug + Send + Sync;

    fn leq(&self, a: &Self::Verdict, b: &Self::Verdict) -> bool;

    fn join(&self, a: &Self::Verdict, b: &Self::Verdict) -> Self::Verdict;

    /// Greatest lower bound, or `None` when no lower bound exists.
    fn meet(&self, a: &Self::Verdict, b: &Self::Verdict) -> Option<Self::Verdict>;

    /// The least specific verdict, if the domain has one.
    fn top(&self) -> Option<Self::Verdict>;

    /// Canonical textual form; equal strings iff equal verdicts.
    fn canonical(&self, v: &Self::Verdict) -> String;

    /// Parses the canonical form (and, where convenient, friendlier spellings).
    fn parse_verdict(&self, text: &str) -> Result<Self::Verdict, DomainError>;

    fn metadata(&self) -> DomainMeta;

    /// Number of valid configurations, for configuration domains.
    fn count(&self, _v: &Self::Verdict) -> Option<u128> {
        None
    }

    /// Canonical forms of the individual possibilities, for lifted domains.
    fn members(&self, _v: &Self::Verdict) -> Option<Vec<String>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("empty join")]
    EmptyJoin,
    #[error("invalid verdict {text:?}: {reason}")]
    InvalidVerdict { text: String, reason: String },
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("domain too large: {0}")]
    TooLarge(String),
}

impl DomainError {
    pub(crate) fn invalid(text: &str, reason: impl Into<String>) -> Self {
        DomainError::InvalidVerdict {
            text: text.to_string(),
            reason: reason.into(),
        }
    }
}

/// Domain description stored alongside serialized monitors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainMeta {
    Config {
        features: Vec<String>,
        validity: String,
        /// Number of valid configurations, as a decimal string.
        universe: String,
    },
    Faults {
        classes: Vec<String>,
    },
    BoolExpr {
        events: Vec<String>,
    },
    Truth3,
    Truth5,
    Lifted {
        inner: Box<DomainMeta>,
    },
}

/// Least upper bound of a non-empty collection of verdicts.
pub fn join_all<'a, D: VerdictDomain>(
    domain: &D,
    verdicts: impl IntoIterator<Item = &'a D::Verdict>,
) -> Result<D::Verdict, DomainError>
where
    D::Verdict: 'a,
{
    let mut iter = verdicts.into_iter();
    let first = iter.next().ok_or(DomainError::EmptyJoin)?.clone();
    Ok(iter.fold(first, |acc, v| domain.join(&acc, v)))
}

/// Greatest lower bound of a non-empty collection; `None` if undefined.
pub fn meet_all<'a, D: VerdictDomain>(
    domain: &D,
    verdicts: impl IntoIterator<Item = &'a D::Verdict>,
) -> Result<Option<D::Verdict>, DomainError>
where
    D::Verdict: 'a,
{
    let mut iter = verdicts.into_iter();
    let mut acc = iter.next().ok_or(DomainError::EmptyJoin)?.clone();
    for v in iter {
        match domain.meet(&acc, v) {
            Some(m) => acc = m,
            None => return Ok(None),
        }
    }
    Ok(Some(acc))
}

/// Meet where `None` stands for the (possibly absent) top element.
pub(crate) fn meet_opt<D: VerdictDomain>(
    domain: &D,
    acc: Option<&D::Verdict>,
    v: &D::Verdict,
) -> Option<D::Verdict> {
    match acc {
        None => Some(v.clone()),
        Some(a) => domain.meet(a, v),
    }
}

/// Splits a `{a, b, {c}}`-style list body at top-level commas.
pub(crate) fn split_top_level(body: &str) -> Vec<&str> {
    let mut parts = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in body.char_indices() {
        match c {
            '{' | '[' | '(' => depth += 1,
            '}' | ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(body[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    let last = body[start..].trim();
    if !last.is_empty() || !parts.is_empty() {
        parts.push(last);
    }
    parts
}

pub(crate) fn strip_delims(text: &str, open: char, close: char) -> Option<&str> {
    let t = text.trim();
    t.strip_prefix(open)?.strip_suffix(close)
}
