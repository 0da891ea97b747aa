//! The serialized monitor: a deterministic VTS with canonical verdicts.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{DeterministicVts, Mode};
use crate::model::{ActionId, Alphabet, StateId};
use crate::semilattice::{DomainError, DomainMeta, VerdictDomain};

pub const ARTIFACT_FORMAT: &str = "vtsynth-monitor";
pub const ARTIFACT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArtifactError {
    #[error("malformed monitor artifact: {0}")]
    Json(String),
    #[error("invalid monitor artifact: {0}")]
    Invalid(String),
    #[error("artifact verdict: {0}")]
    Domain(#[from] DomainError),
}

/// Where a monitor came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    pub model_sha256: String,
    /// Stages with their parameters, in application order.
    pub stages: Vec<String>,
    /// Digest over the model bytes and the stage list.
    pub hash: String,
}

impl Provenance {
    pub fn new(model: &[u8], stages: Vec<String>) -> Self {
        let model_sha256 = hex::encode(Sha256::digest(model));
        let mut h = Sha256::new();
        h.update(model);
        for s in &stages {
            h.update([0u8]);
            h.update(s.as_bytes());
        }
        Provenance {
            model_sha256,
            stages,
            hash: hex::encode(h.finalize()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactState {
    pub verdict: String,
    /// Configurations in the verdict, as a decimal string.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<String>,
    /// Individual possibilities of a lifted verdict.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<Vec<String>>,
    /// Successor per action, in alphabet order.
    pub next: Vec<Option<u32>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorArtifact {
    pub format: String,
    pub version: u32,
    pub domain: DomainMeta,
    pub actions: Vec<String>,
    pub mode: Mode,
    pub monotonic: bool,
    pub initial: u32,
    pub states: Vec<ArtifactState>,
    pub provenance: Provenance,
}

impl MonitorArtifact {
    pub fn new<D: VerdictDomain>(d: &DeterministicVts<D>, mode: Mode, provenance: Provenance) -> Self {
        let dom = d.domain();
        let states = d
            .states()
            .map(|q| {
                let v = d.verdict(q);
                ArtifactState {
                    verdict: dom.canonical(v),
                    count: dom.count(v).map(|c| c.to_string()),
                    members: dom.members(v),
                    next: d.row(q).iter().map(|t| t.map(|t| t.0)).collect(),
                }
            })
            .collect();
        MonitorArtifact {
            format: ARTIFACT_FORMAT.to_string(),
            version: ARTIFACT_VERSION,
            domain: dom.metadata(),
            actions: d.alphabet().names().to_vec(),
            mode,
            monotonic: d.is_monotonic(),
            initial: d.initial().0,
            states,
            provenance,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, ArtifactError> {
        let a: MonitorArtifact = serde_json::from_str(text).map_err(|e| ArtifactError::Json(e.to_string()))?;
        a.validate()?;
        Ok(a)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("artifact serializes");
        s.push('\n');
        s
    }

    fn validate(&self) -> Result<(), ArtifactError> {
        let bad = |m: String| Err(ArtifactError::Invalid(m));
        if self.format != ARTIFACT_FORMAT {
            return bad(format!("unexpected format {:?}", self.format));
        }
        if self.version != ARTIFACT_VERSION {
            return bad(format!("unsupported version {}", self.version));
        }
        if self.states.is_empty() {
            return bad("no states".into());
        }
        let n = self.states.len() as u32;
        if self.initial >= n {
            return bad(format!("initial state {} out of range", self.initial));
        }
        Alphabet::new(self.actions.iter().cloned()).map_err(|e| ArtifactError::Invalid(e.to_string()))?;
        for (i, s) in self.states.iter().enumerate() {
            if s.next.len() != self.actions.len() {
                return bad(format!("state {i} has {} successors for {} actions", s.next.len(), self.actions.len()));
            }
            if let Some(t) = s.next.iter().flatten().find(|&&t| t >= n) {
                return bad(format!("state {i} has successor {t} out of range"));
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_transitions(&self) -> usize {
        self.states.iter().map(|s| s.next.iter().flatten().count()).sum()
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(|i| ActionId(i as u32))
    }

    pub fn step(&self, q: u32, a: ActionId) -> Option<u32> {
        self.states[q as usize].next[a.index()]
    }

    /// Rebuilds the typed monitor, given a domain matching the metadata.
    pub fn to_deterministic<D: VerdictDomain>(&self, domain: D) -> Result<DeterministicVts<D>, ArtifactError> {
        if domain.metadata() != self.domain {
            return Err(ArtifactError::Invalid("domain does not match the artifact".into()));
        }
        let verdicts = self
            .states
            .iter()
            .map(|s| domain.parse_verdict(&s.verdict))
            .collect::<Result<Vec<_>, _>>()?;
        let next = self
            .states
            .iter()
            .flat_map(|s| s.next.iter().map(|t| t.map(StateId)))
            .collect();
        let alphabet = std::sync::Arc::new(Alphabet::new(self.actions.iter().cloned()).expect("validated"));
        Ok(DeterministicVts::from_table(domain, alphabet, StateId(self.initial), next, verdicts))
    }

    /// Graph description of the monitor.
    pub fn to_dot(&self) -> String {
        let labels: Vec<String> = self.states.iter().map(|s| s.verdict.clone()).collect();
        let edges = self.states.iter().enumerate().flat_map(|(q, s)| {
            s.next.iter().enumerate().filter_map(move |(a, t)| {
                t.map(|t| (StateId(q as u32), self.actions[a].as_str(), StateId(t)))
            })
        });
        crate::dot::render(&[StateId(self.initial)], &labels, edges)
    }
}
