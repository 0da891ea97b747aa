//! The configuration verdict domain: non-empty sets of valid configurations
//! ordered by inclusion.
//!
//! Two interchangeable backends sit behind [`ConfigDomain`]: an explicit
//! bitset over the enumerated valid configurations, and a symbolic one that
//! keeps every set as a reduced ordered BDD conjoined with the validity
//! constraint.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use fixedbitset::FixedBitSet;
use parking_lot::Mutex;
use rand::Rng;

use super::bdd::{BddStore, NodeId};
use super::{split_top_level, strip_delims, DomainError, DomainMeta, VerdictDomain};
use crate::formula::Formula;

/// A configuration, as a bitmask over features in declaration order.
pub type Configuration = u128;

/// Sets with at most this many configurations serialize as explicit lists.
const LIST_LIMIT: u128 = 4096;

const EXPLICIT_MAX_FEATURES: usize = 24;
const AUTO_EXPLICIT_FEATURES: usize = 16;

/// Features and the constraint selecting the valid configurations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureModel {
    pub features: Vec<String>,
    pub validity: Formula,
}

impl FeatureModel {
    /// A feature model whose validity defaults to "at least one feature".
    pub fn new(features: Vec<String>, validity: Option<Formula>) -> Self {
        let validity = validity.unwrap_or_else(|| {
            Formula::Or(features.iter().map(|f| Formula::var(f.as_str())).collect())
        });
        FeatureModel { features, validity }
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }

    pub fn is_valid(&self, config: Configuration) -> bool {
        self.validity
            .eval(&|v| self.feature_index(v).is_some_and(|i| config >> i & 1 == 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Explicit,
    Symbolic,
    /// Explicit for small feature counts, symbolic otherwise.
    #[default]
    Auto,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConfigSet {
    Explicit(FixedBitSet),
    Symbolic(NodeId),
}

enum Repr {
    Explicit {
        configs: Vec<Configuration>,
        index: HashMap<Configuration, usize>,
    },
    Symbolic {
        store: Mutex<BddStore>,
        valid: NodeId,
        size: u128,
    },
}

struct Universe {
    model: FeatureModel,
    repr: Repr,
}

#[derive(Clone)]
pub struct ConfigDomain {
    universe: Arc<Universe>,
}

impl fmt::Debug for ConfigDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConfigDomain")
            .field("features", &self.universe.model.features)
            .field("validity", &self.universe.model.validity.to_string())
            .field("backend", &self.backend())
            .finish()
    }
}

impl PartialEq for ConfigDomain {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.universe, &other.universe)
    }
}

impl ConfigDomain {
    pub fn new(model: FeatureModel, backend: Backend) -> Result<Self, DomainError> {
        if let Some(v) = model.validity.unknown_variable(|v| model.feature_index(v).is_some()) {
            return Err(DomainError::UnknownName(v));
        }
        if model.features.len() > BddStore::MAX_VARS {
            return Err(DomainError::TooLarge(format!(
                "{} features (at most {})",
                model.features.len(),
                BddStore::MAX_VARS
            )));
        }
        let explicit = match backend {
            Backend::Explicit => true,
            Backend::Symbolic => false,
            Backend::Auto => model.features.len() <= AUTO_EXPLICIT_FEATURES,
        };
        let repr = if explicit {
            if model.features.len() > EXPLICIT_MAX_FEATURES {
                return Err(DomainError::TooLarge(format!(
                    "{} features cannot be enumerated explicitly",
                    model.features.len()
                )));
            }
            let configs: Vec<Configuration> = (0..1u128 << model.features.len())
                .filter(|&c| model.is_valid(c))
                .collect();
            let index = configs.iter().enumerate().map(|(i, &c)| (c, i)).collect();
            Repr::Explicit { configs, index }
        } else {
            let mut store = BddStore::new(model.features.len());
            let valid = store
                .from_formula(&model.validity, &|v| model.feature_index(v))
                .expect("validity variables checked above");
            let size = store.count(valid);
            Repr::Symbolic {
                store: Mutex::new(store),
                valid,
                size,
            }
        };
        let domain = ConfigDomain {
            universe: Arc::new(Universe { model, repr }),
        };
        if domain.universe_size() == 0 {
            return Err(DomainError::invalid(
                &domain.universe.model.validity.to_string(),
                "no valid configuration",
            ));
        }
        Ok(domain)
    }

    pub fn feature_model(&self) -> &FeatureModel {
        &self.universe.model
    }

    pub fn backend(&self) -> Backend {
        match self.universe.repr {
            Repr::Explicit { .. } => Backend::Explicit,
            Repr::Symbolic { .. } => Backend::Symbolic,
        }
    }

    /// |Conf|.
    pub fn universe_size(&self) -> u128 {
        match &self.universe.repr {
            Repr::Explicit { configs, .. } => configs.len() as u128,
            Repr::Symbolic { size, .. } => *size,
        }
    }

    /// The set of all valid configurations.
    pub fn full(&self) -> ConfigSet {
        match &self.universe.repr {
            Repr::Explicit { configs, .. } => {
                let mut bits = FixedBitSet::with_capacity(configs.len());
                bits.insert_range(..);
                ConfigSet::Explicit(bits)
            }
            Repr::Symbolic { valid, .. } => ConfigSet::Symbolic(*valid),
        }
    }

    /// Valid configurations satisfying `f`; `Ok(None)` if there are none.
    pub fn from_formula(&self, f: &Formula) -> Result<Option<ConfigSet>, DomainError> {
        let model = &self.universe.model;
        if let Some(v) = f.unknown_variable(|v| model.feature_index(v).is_some()) {
            return Err(DomainError::UnknownName(v));
        }
        Ok(match &self.universe.repr {
            Repr::Explicit { configs, .. } => {
                let mut bits = FixedBitSet::with_capacity(configs.len());
                for (i, &c) in configs.iter().enumerate() {
                    if f.eval(&|v| c >> model.feature_index(v).unwrap() & 1 == 1) {
                        bits.insert(i);
                    }
                }
                (!bits.is_clear()).then_some(ConfigSet::Explicit(bits))
            }
            Repr::Symbolic { store, valid, .. } => {
                let mut store = store.lock();
                let n = store.from_formula(f, &|v| model.feature_index(v)).unwrap();
                let n = store.and(n, *valid);
                (n != NodeId::FALSE).then_some(ConfigSet::Symbolic(n))
            }
        })
    }

    /// The set of the given configurations, each of which must be valid.
    pub fn from_configs(&self, configs: &[Configuration]) -> Result<Option<ConfigSet>, DomainError> {
        for &c in configs {
            if !self.universe.model.is_valid(c) {
                return Err(DomainError::invalid(&self.format_config(c), "configuration is not valid"));
            }
        }
        Ok(match &self.universe.repr {
            Repr::Explicit { configs: all, index } => {
                let mut bits = FixedBitSet::with_capacity(all.len());
                for c in configs {
                    bits.insert(index[c]);
                }
                (!bits.is_clear()).then_some(ConfigSet::Explicit(bits))
            }
            Repr::Symbolic { store, .. } => {
                let mut store = store.lock();
                let mut acc = NodeId::FALSE;
                for &c in configs {
                    let m = store.minterm(c);
                    acc = store.or(acc, m);
                }
                (acc != NodeId::FALSE).then_some(ConfigSet::Symbolic(acc))
            }
        })
    }

    /// Parses `{f1,f2}`: exactly the listed features enabled.
    pub fn parse_config(&self, text: &str) -> Result<Configuration, DomainError> {
        let body = strip_delims(text, '{', '}')
            .ok_or_else(|| DomainError::invalid(text, "expected a configuration {feature,...}"))?;
        let mut mask = 0;
        for name in split_top_level(body).into_iter().filter(|s| !s.is_empty()) {
            let i = self
                .universe
                .model
                .feature_index(name)
                .ok_or_else(|| DomainError::UnknownName(name.to_string()))?;
            mask |= 1 << i;
        }
        Ok(mask)
    }

    pub fn format_config(&self, config: Configuration) -> String {
        let names: Vec<&str> = self
            .universe
            .model
            .features
            .iter()
            .enumerate()
            .filter(|(i, _)| config >> i & 1 == 1)
            .map(|(_, f)| f.as_str())
            .collect();
        format!("{{{}}}", names.join(","))
    }

    pub fn contains(&self, set: &ConfigSet, config: Configuration) -> bool {
        match (&self.universe.repr, set) {
            (Repr::Explicit { index, .. }, ConfigSet::Explicit(bits)) => {
                index.get(&config).is_some_and(|&i| bits.contains(i))
            }
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(n)) => store.lock().eval(*n, config),
            _ => backend_mismatch(),
        }
    }

    /// Members of `set` in ascending mask order.
    pub fn configurations(&self, set: &ConfigSet) -> Vec<Configuration> {
        match (&self.universe.repr, set) {
            (Repr::Explicit { configs, .. }, ConfigSet::Explicit(bits)) => {
                bits.ones().map(|i| configs[i]).collect()
            }
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(n)) => store.lock().models(*n),
            _ => backend_mismatch(),
        }
    }

    /// All valid configurations in ascending mask order.
    pub fn all_configurations(&self) -> Vec<Configuration> {
        self.configurations(&self.full())
    }

    /// A uniformly random valid configuration.
    pub fn sample(&self, rng: &mut impl Rng) -> Configuration {
        match &self.universe.repr {
            Repr::Explicit { configs, .. } => configs[rng.random_range(0..configs.len())],
            Repr::Symbolic { store, valid, .. } => store.lock().sample(*valid, rng).expect("non-empty universe"),
        }
    }

    /// A formula describing `set`, as a disjunction of diagram paths.
    pub fn to_formula(&self, set: &ConfigSet) -> Formula {
        let features = &self.universe.model.features;
        let cube = |lits: &[(u32, bool)]| -> Formula {
            let parts: Vec<Formula> = lits
                .iter()
                .map(|&(v, b)| {
                    let var = Formula::var(features[v as usize].as_str());
                    if b {
                        var
                    } else {
                        Formula::Not(Box::new(var))
                    }
                })
                .collect();
            match parts.len() {
                0 => Formula::Const(true),
                1 => parts.into_iter().next().unwrap(),
                _ => Formula::And(parts),
            }
        };
        let cubes: Vec<Vec<(u32, bool)>> = match (&self.universe.repr, set) {
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(n)) => store.lock().cubes(*n),
            (Repr::Explicit { .. }, ConfigSet::Explicit(_)) => self
                .configurations(set)
                .into_iter()
                .map(|c| (0..features.len() as u32).map(|v| (v, c >> v & 1 == 1)).collect())
                .collect(),
            _ => backend_mismatch(),
        };
        let mut disjuncts: Vec<Formula> = cubes.iter().map(|c| cube(c)).collect();
        match disjuncts.len() {
            0 => Formula::Const(false),
            1 => disjuncts.pop().unwrap(),
            _ => Formula::Or(disjuncts),
        }
    }
}

fn backend_mismatch() -> ! {
    panic!("configuration set used with a domain of a different backend")
}

impl VerdictDomain for ConfigDomain {
    type Verdict = ConfigSet;

    fn leq(&self, a: &ConfigSet, b: &ConfigSet) -> bool {
        match (&self.universe.repr, a, b) {
            (Repr::Explicit { .. }, ConfigSet::Explicit(a), ConfigSet::Explicit(b)) => a.is_subset(b),
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(a), ConfigSet::Symbolic(b)) => {
                store.lock().implies(*a, *b)
            }
            _ => backend_mismatch(),
        }
    }

    fn join(&self, a: &ConfigSet, b: &ConfigSet) -> ConfigSet {
        match (&self.universe.repr, a, b) {
            (Repr::Explicit { .. }, ConfigSet::Explicit(a), ConfigSet::Explicit(b)) => {
                let mut r = a.clone();
                r.union_with(b);
                ConfigSet::Explicit(r)
            }
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(a), ConfigSet::Symbolic(b)) => {
                ConfigSet::Symbolic(store.lock().or(*a, *b))
            }
            _ => backend_mismatch(),
        }
    }

    fn meet(&self, a: &ConfigSet, b: &ConfigSet) -> Option<ConfigSet> {
        match (&self.universe.repr, a, b) {
            (Repr::Explicit { .. }, ConfigSet::Explicit(a), ConfigSet::Explicit(b)) => {
                let mut r = a.clone();
                r.intersect_with(b);
                (!r.is_clear()).then_some(ConfigSet::Explicit(r))
            }
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(a), ConfigSet::Symbolic(b)) => {
                let n = store.lock().and(*a, *b);
                (n != NodeId::FALSE).then_some(ConfigSet::Symbolic(n))
            }
            _ => backend_mismatch(),
        }
    }

    fn top(&self) -> Option<ConfigSet> {
        Some(self.full())
    }

    fn canonical(&self, v: &ConfigSet) -> String {
        if self.count(v).unwrap() <= LIST_LIMIT {
            let configs: Vec<String> = self
                .configurations(v)
                .into_iter()
                .map(|c| self.format_config(c))
                .collect();
            format!("[{}]", configs.join(","))
        } else {
            self.to_formula(v).to_string()
        }
    }

    /// Accepts `[{f1},{f1,f2}]` lists or feature formulas.
    fn parse_verdict(&self, text: &str) -> Result<ConfigSet, DomainError> {
        let set = if let Some(body) = strip_delims(text, '[', ']') {
            let configs = split_top_level(body)
                .into_iter()
                .filter(|s| !s.is_empty())
                .map(|c| self.parse_config(c))
                .collect::<Result<Vec<_>, _>>()?;
            self.from_configs(&configs)?
        } else {
            let f = Formula::parse(text).map_err(|e| DomainError::invalid(text, e.to_string()))?;
            self.from_formula(&f)?
        };
        set.ok_or_else(|| DomainError::invalid(text, "empty configuration set"))
    }

    fn metadata(&self) -> DomainMeta {
        DomainMeta::Config {
            features: self.universe.model.features.clone(),
            validity: self.universe.model.validity.to_string(),
            universe: self.universe_size().to_string(),
        }
    }

    fn count(&self, v: &ConfigSet) -> Option<u128> {
        Some(match (&self.universe.repr, v) {
            (Repr::Explicit { .. }, ConfigSet::Explicit(bits)) => bits.count_ones(..) as u128,
            (Repr::Symbolic { store, .. }, ConfigSet::Symbolic(n)) => store.lock().count(*n),
            _ => backend_mismatch(),
        })
    }
}
