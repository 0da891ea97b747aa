use serde::{Deserialize, Serialize};

use super::{DomainError, DomainMeta, VerdictDomain};

/// Truth values of the three- and five-valued monitoring domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Truth {
    True,
    PossiblyTrue,
    Unknown,
    PossiblyFalse,
    False,
}

impl Truth {
    pub fn name(self) -> &'static str {
        match self {
            Truth::True => "t",
            Truth::PossiblyTrue => "tp",
            Truth::Unknown => "?",
            Truth::PossiblyFalse => "fp",
            Truth::False => "f",
        }
    }

    pub fn from_name(name: &str) -> Option<Truth> {
        Some(match name.trim() {
            "t" | "true" => Truth::True,
            "tp" => Truth::PossiblyTrue,
            "?" => Truth::Unknown,
            "fp" => Truth::PossiblyFalse,
            "f" | "false" => Truth::False,
            _ => return None,
        })
    }

    /// Chain position: 0 for definite, 1 for presumptive, 2 for `?`.
    fn height(self) -> u8 {
        match self {
            Truth::True | Truth::False => 0,
            Truth::PossiblyTrue | Truth::PossiblyFalse => 1,
            Truth::Unknown => 2,
        }
    }

    /// `Some(true)` on the true side, `Some(false)` on the false side.
    fn side(self) -> Option<bool> {
        match self {
            Truth::True | Truth::PossiblyTrue => Some(true),
            Truth::False | Truth::PossiblyFalse => Some(false),
            Truth::Unknown => None,
        }
    }

    // t ⊑ tp ⊑ ? and f ⊑ fp ⊑ ?.
    fn leq(self, other: Truth) -> bool {
        other == Truth::Unknown || (self.side() == other.side() && self.height() <= other.height())
    }

    fn join(self, other: Truth) -> Truth {
        if self.leq(other) {
            other
        } else if other.leq(self) {
            self
        } else {
            Truth::Unknown
        }
    }

    fn meet(self, other: Truth) -> Option<Truth> {
        if self.leq(other) {
            Some(self)
        } else if other.leq(self) {
            Some(other)
        } else {
            None
        }
    }
}

/// `{t, ?, f}` with `t` and `f` incomparable below `?`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Truth3;

/// `{t, tp, ?, fp, f}` ordered as two chains below `?`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Truth5;

macro_rules! truth_domain {
    ($ty:ty, $meta:expr, $allowed:expr) => {
        impl VerdictDomain for $ty {
            type Verdict = Truth;

            fn leq(&self, a: &Truth, b: &Truth) -> bool {
                a.leq(*b)
            }

            fn join(&self, a: &Truth, b: &Truth) -> Truth {
                a.join(*b)
            }

            fn meet(&self, a: &Truth, b: &Truth) -> Option<Truth> {
                a.meet(*b)
            }

            fn top(&self) -> Option<Truth> {
                Some(Truth::Unknown)
            }

            fn canonical(&self, v: &Truth) -> String {
                v.name().to_string()
            }

            fn parse_verdict(&self, text: &str) -> Result<Truth, DomainError> {
                let allowed: &[Truth] = $allowed;
                Truth::from_name(text)
                    .filter(|t| allowed.contains(t))
                    .ok_or_else(|| DomainError::invalid(text, "not a truth value of this domain"))
            }

            fn metadata(&self) -> DomainMeta {
                $meta
            }
        }
    };
}

truth_domain!(
    Truth3,
    DomainMeta::Truth3,
    &[Truth::True, Truth::Unknown, Truth::False]
);
truth_domain!(
    Truth5,
    DomainMeta::Truth5,
    &[
        Truth::True,
        Truth::PossiblyTrue,
        Truth::Unknown,
        Truth::PossiblyFalse,
        Truth::False
    ]
);
