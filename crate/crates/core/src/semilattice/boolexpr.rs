use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use fixedbitset::FixedBitSet;

use super::{DomainError, DomainMeta, VerdictDomain};
use crate::formula::Formula;

/// A boolean function over the basic events, as its truth table.
///
/// Bit `a` is set iff assignment `a` (bit `i` = event `i` occurred)
/// satisfies the function.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BoolFn(FixedBitSet);

impl BoolFn {
    pub fn satisfied_by(&self, assignment: u32) -> bool {
        self.0.contains(assignment as usize)
    }

    pub fn assignments(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.ones().map(|a| a as u32)
    }

    pub fn is_false(&self) -> bool {
        self.0.is_clear()
    }

    /// Whether every satisfying assignment of `self` satisfies `other`.
    pub fn implies(&self, other: &BoolFn) -> bool {
        self.0.is_subset(&other.0)
    }
}

/// Boolean expressions over basic fault events, ordered by implication.
///
/// Join is disjunction and meet is conjunction. The unsatisfiable
/// expression is not a verdict, so a conjunction equivalent to `false` is
/// an undefined meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoolDomain {
    events: Arc<Vec<String>>,
}

impl BoolDomain {
    pub const MAX_EVENTS: usize = 16;

    pub fn new(events: Vec<String>) -> Result<Self, DomainError> {
        if events.len() > Self::MAX_EVENTS {
            return Err(DomainError::TooLarge(format!(
                "{} basic events (at most {})",
                events.len(),
                Self::MAX_EVENTS
            )));
        }
        Ok(BoolDomain {
            events: Arc::new(events),
        })
    }

    pub fn events(&self) -> &[String] {
        &self.events
    }

    pub fn event_index(&self, name: &str) -> Option<usize> {
        self.events.iter().position(|e| e == name)
    }

    fn assignments_count(&self) -> usize {
        1 << self.events.len()
    }

    pub fn from_formula(&self, f: &Formula) -> Result<BoolFn, DomainError> {
        if let Some(v) = f.unknown_variable(|v| self.event_index(v).is_some()) {
            return Err(DomainError::UnknownName(v));
        }
        let mut bits = FixedBitSet::with_capacity(self.assignments_count());
        for a in 0..self.assignments_count() {
            if f.eval(&|v| a >> self.event_index(v).unwrap() & 1 == 1) {
                bits.insert(a);
            }
        }
        Ok(BoolFn(bits))
    }

    pub fn parse_fn(&self, text: &str) -> Result<BoolFn, DomainError> {
        let f = Formula::parse(text).map_err(|e| DomainError::invalid(text, e.to_string()))?;
        self.from_formula(&f)
    }

    /// Prime implicants as (care mask, value) pairs.
    fn prime_implicants(&self, f: &BoolFn) -> Vec<(u32, u32)> {
        let full = (self.assignments_count() - 1) as u32;
        let mut level: HashSet<(u32, u32)> = f.assignments().map(|a| (full, a)).collect();
        let mut primes = Vec::new();
        while !level.is_empty() {
            let mut next = HashSet::new();
            let mut merged = HashSet::new();
            for &(care, value) in &level {
                let mut bits = care;
                while bits != 0 {
                    let bit = bits & bits.wrapping_neg();
                    bits &= bits - 1;
                    if level.contains(&(care, value ^ bit)) {
                        merged.insert((care, value));
                        next.insert((care & !bit, value & !bit));
                    }
                }
            }
            primes.extend(level.iter().filter(|c| !merged.contains(c)).copied());
            level = next;
        }
        primes
    }

    fn render_cube(&self, care: u32, value: u32) -> String {
        let lits: Vec<String> = (0..self.events.len())
            .filter(|i| care >> i & 1 == 1)
            .map(|i| {
                if value >> i & 1 == 1 {
                    self.events[i].clone()
                } else {
                    format!("!{}", self.events[i])
                }
            })
            .collect();
        if lits.is_empty() {
            "true".to_string()
        } else {
            lits.join(" & ")
        }
    }
}

impl VerdictDomain for BoolDomain {
    type Verdict = BoolFn;

    fn leq(&self, a: &BoolFn, b: &BoolFn) -> bool {
        a.implies(b)
    }

    fn join(&self, a: &BoolFn, b: &BoolFn) -> BoolFn {
        let mut r = a.0.clone();
        r.union_with(&b.0);
        BoolFn(r)
    }

    fn meet(&self, a: &BoolFn, b: &BoolFn) -> Option<BoolFn> {
        let mut r = a.0.clone();
        r.intersect_with(&b.0);
        (!r.is_clear()).then_some(BoolFn(r))
    }

    fn top(&self) -> Option<BoolFn> {
        let mut bits = FixedBitSet::with_capacity(self.assignments_count());
        bits.insert_range(..);
        Some(BoolFn(bits))
    }

    /// The disjunction of all prime implicants, sorted.
    fn canonical(&self, v: &BoolFn) -> String {
        if v.is_false() {
            return "false".to_string();
        }
        let cubes: BTreeSet<String> = self
            .prime_implicants(v)
            .into_iter()
            .map(|(care, value)| self.render_cube(care, value))
            .collect();
        cubes.into_iter().collect::<Vec<_>>().join(" | ")
    }

    fn parse_verdict(&self, text: &str) -> Result<BoolFn, DomainError> {
        let f = self.parse_fn(text)?;
        if f.is_false() {
            return Err(DomainError::invalid(text, "unsatisfiable expression"));
        }
        Ok(f)
    }

    fn metadata(&self) -> DomainMeta {
        DomainMeta::BoolExpr {
            events: self.events.to_vec(),
        }
    }
}
