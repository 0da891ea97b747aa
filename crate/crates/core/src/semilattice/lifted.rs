use std::collections::BTreeSet;

use super::{split_top_level, strip_delims, DomainError, DomainMeta, VerdictDomain};

/// A finite set of inner verdicts kept as separate possibilities.
pub type Possibilities<V> = BTreeSet<V>;

/// Possibility lifting of an inner domain: finite verdict sets under inclusion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lifted<D> {
    inner: D,
}

impl<D: VerdictDomain> Lifted<D> {
    pub fn new(inner: D) -> Self {
        Lifted { inner }
    }

    pub fn inner(&self) -> &D {
        &self.inner
    }

    pub fn singleton(v: D::Verdict) -> Possibilities<D::Verdict> {
        BTreeSet::from([v])
    }

    fn sorted_members(&self, v: &Possibilities<D::Verdict>) -> Vec<String> {
        let mut members: Vec<String> = v.iter().map(|x| self.inner.canonical(x)).collect();
        members.sort();
        members
    }
}

impl<D: VerdictDomain> VerdictDomain for Lifted<D> {
    type Verdict = Possibilities<D::Verdict>;

    fn leq(&self, a: &Self::Verdict, b: &Self::Verdict) -> bool {
        a.is_subset(b)
    }

    fn join(&self, a: &Self::Verdict, b: &Self::Verdict) -> Self::Verdict {
        a.union(b).cloned().collect()
    }

    fn meet(&self, a: &Self::Verdict, b: &Self::Verdict) -> Option<Self::Verdict> {
        let m: BTreeSet<_> = a.intersection(b).cloned().collect();
        (!m.is_empty()).then_some(m)
    }

    fn top(&self) -> Option<Self::Verdict> {
        None
    }

    fn canonical(&self, v: &Self::Verdict) -> String {
        format!("{{{}}}", self.sorted_members(v).join(", "))
    }

    fn parse_verdict(&self, text: &str) -> Result<Self::Verdict, DomainError> {
        let body = strip_delims(text, '{', '}')
            .ok_or_else(|| DomainError::invalid(text, "expected {v, ...}"))?;
        split_top_level(body)
            .into_iter()
            .map(|part| self.inner.parse_verdict(part))
            .collect()
    }

    fn metadata(&self) -> DomainMeta {
        DomainMeta::Lifted {
            inner: Box::new(self.inner.metadata()),
        }
    }

    fn members(&self, v: &Self::Verdict) -> Option<Vec<String>> {
        Some(self.sorted_members(v))
    }
}
