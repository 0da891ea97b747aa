use std::sync::Arc;

use super::{split_top_level, strip_delims, DomainError, DomainMeta, VerdictDomain};

/// A set of fault classes, one bit per class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FaultSet(pub u64);

impl FaultSet {
    pub const EMPTY: FaultSet = FaultSet(0);

    pub fn singleton(class: usize) -> FaultSet {
        FaultSet(1 << class)
    }

    pub fn contains(self, class: usize) -> bool {
        self.0 >> class & 1 == 1
    }

    pub fn union(self, other: FaultSet) -> FaultSet {
        FaultSet(self.0 | other.0)
    }

    pub fn intersection(self, other: FaultSet) -> FaultSet {
        FaultSet(self.0 & other.0)
    }

    pub fn is_superset(self, other: FaultSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn classes(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |i| self.contains(*i))
    }
}

/// Fault-class sets ordered by reverse inclusion: more faults is more specific.
///
/// Join is intersection and meet is union, so the meet always exists and
/// the empty set is the top element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaultDomain {
    classes: Arc<Vec<String>>,
}

impl FaultDomain {
    pub const MAX_CLASSES: usize = 64;

    pub fn new(classes: Vec<String>) -> Result<Self, DomainError> {
        if classes.len() > Self::MAX_CLASSES {
            return Err(DomainError::TooLarge(format!(
                "{} fault classes (at most {})",
                classes.len(),
                Self::MAX_CLASSES
            )));
        }
        Ok(FaultDomain {
            classes: Arc::new(classes),
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c == name)
    }

    pub fn set_of(&self, names: &[&str]) -> Result<FaultSet, DomainError> {
        names.iter().try_fold(FaultSet::EMPTY, |acc, n| {
            let i = self
                .class_index(n)
                .ok_or_else(|| DomainError::UnknownName(n.to_string()))?;
            Ok(acc.union(FaultSet::singleton(i)))
        })
    }
}

impl VerdictDomain for FaultDomain {
    type Verdict = FaultSet;

    fn leq(&self, a: &FaultSet, b: &FaultSet) -> bool {
        a.is_superset(*b)
    }

    fn join(&self, a: &FaultSet, b: &FaultSet) -> FaultSet {
        a.intersection(*b)
    }

    fn meet(&self, a: &FaultSet, b: &FaultSet) -> Option<FaultSet> {
        Some(a.union(*b))
    }

    fn top(&self) -> Option<FaultSet> {
        Some(FaultSet::EMPTY)
    }

    fn canonical(&self, v: &FaultSet) -> String {
        let names: Vec<&str> = v.classes().map(|i| self.classes[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }

    fn parse_verdict(&self, text: &str) -> Result<FaultSet, DomainError> {
        let body = strip_delims(text, '{', '}')
            .ok_or_else(|| DomainError::invalid(text, "expected {class,...}"))?;
        let names: Vec<&str> = split_top_level(body).into_iter().filter(|s| !s.is_empty()).collect();
        self.set_of(&names)
    }

    fn metadata(&self) -> DomainMeta {
        DomainMeta::Faults {
            classes: self.classes.to_vec(),
        }
    }
}
