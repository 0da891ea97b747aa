//! Verdict domains rebuilt from artifact metadata.

use crate::formula::Formula;
use crate::semilattice::{
    Backend, BoolDomain, ConfigDomain, DomainError, DomainMeta, FaultDomain, FeatureModel, Lifted, Truth3, Truth5,
    VerdictDomain,
};
use crate::synth::{modal_query, modal_query_faults, ModalQuery, SynthError};

/// Any domain an artifact can be over, for operations that need more than
/// canonical strings.
#[derive(Debug, Clone)]
pub enum DynDomain {
    Config(ConfigDomain),
    Faults(FaultDomain),
    BoolExpr(BoolDomain),
    Truth3(Truth3),
    Truth5(Truth5),
    LiftedConfig(Lifted<ConfigDomain>),
    LiftedFaults(Lifted<FaultDomain>),
    LiftedBoolExpr(Lifted<BoolDomain>),
    LiftedTruth3(Lifted<Truth3>),
    LiftedTruth5(Lifted<Truth5>),
}

macro_rules! each {
    ($self:expr, $d:ident => $body:expr) => {
        match $self {
            DynDomain::Config($d) => $body,
            DynDomain::Faults($d) => $body,
            DynDomain::BoolExpr($d) => $body,
            DynDomain::Truth3($d) => $body,
            DynDomain::Truth5($d) => $body,
            DynDomain::LiftedConfig($d) => $body,
            DynDomain::LiftedFaults($d) => $body,
            DynDomain::LiftedBoolExpr($d) => $body,
            DynDomain::LiftedTruth3($d) => $body,
            DynDomain::LiftedTruth5($d) => $body,
        }
    };
}

fn config(features: &[String], validity: &str) -> Result<ConfigDomain, DomainError> {
    let validity = Formula::parse(validity).map_err(|e| DomainError::invalid(validity, e.to_string()))?;
    ConfigDomain::new(FeatureModel::new(features.to_vec(), Some(validity)), Backend::Auto)
}

impl DynDomain {
    pub fn from_meta(meta: &DomainMeta) -> Result<Self, DomainError> {
        Ok(match meta {
            DomainMeta::Config { features, validity, .. } => DynDomain::Config(config(features, validity)?),
            DomainMeta::Faults { classes } => DynDomain::Faults(FaultDomain::new(classes.clone())?),
            DomainMeta::BoolExpr { events } => DynDomain::BoolExpr(BoolDomain::new(events.clone())?),
            DomainMeta::Truth3 => DynDomain::Truth3(Truth3),
            DomainMeta::Truth5 => DynDomain::Truth5(Truth5),
            DomainMeta::Lifted { inner } => match &**inner {
                DomainMeta::Config { features, validity, .. } => {
                    DynDomain::LiftedConfig(Lifted::new(config(features, validity)?))
                }
                DomainMeta::Faults { classes } => DynDomain::LiftedFaults(Lifted::new(FaultDomain::new(classes.clone())?)),
                DomainMeta::BoolExpr { events } => DynDomain::LiftedBoolExpr(Lifted::new(BoolDomain::new(events.clone())?)),
                DomainMeta::Truth3 => DynDomain::LiftedTruth3(Lifted::new(Truth3)),
                DomainMeta::Truth5 => DynDomain::LiftedTruth5(Lifted::new(Truth5)),
                DomainMeta::Lifted { .. } => {
                    return Err(DomainError::invalid("lifted", "nested lifting is not supported"));
                }
            },
        })
    }

    /// Order on canonical verdict strings.
    pub fn leq(&self, a: &str, b: &str) -> Result<bool, DomainError> {
        each!(self, d => Ok(d.leq(&d.parse_verdict(a)?, &d.parse_verdict(b)?)))
    }

    /// Re-canonicalizes a verdict string.
    pub fn canonical(&self, v: &str) -> Result<String, DomainError> {
        each!(self, d => Ok(d.canonical(&d.parse_verdict(v)?)))
    }

    /// Evaluates a necessary/possible query on a diagnosis.
    pub fn query(&self, verdict: &str, q: &ModalQuery) -> Result<bool, SynthError> {
        match self {
            DynDomain::LiftedBoolExpr(d) => modal_query(d, &d.parse_verdict(verdict)?, q),
            DynDomain::LiftedFaults(d) => modal_query_faults(d, &d.parse_verdict(verdict)?, q),
            _ => Err(SynthError::Domain(DomainError::invalid(
                verdict,
                "modal queries need a lifted fault-class or event diagnosis",
            ))),
        }
    }
}
