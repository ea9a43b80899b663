//! Guard limits on factorial-cost enumerations and symbolic degree.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Largest n for which all n! permutations may be enumerated.
    pub max_perm_n: usize,
    /// Largest n for injection enumeration.
    pub max_injection_n: usize,
    /// Largest m + |v| for symbolic moment computation.
    pub max_symbolic_degree: usize,
    /// Largest m + |v| when a permutation oracle is involved.
    pub max_oracle_degree: usize,
    /// Largest trace or matrix power a context will produce.
    pub max_power: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_perm_n: 10,
            max_injection_n: 12,
            max_symbolic_degree: 10,
            max_oracle_degree: 8,
            max_power: 64,
        }
    }
}

impl Limits {
    /// Defaults overridden by `WMM_MAX_PERM_N`, `WMM_MAX_INJECTION_N`,
    /// `WMM_MAX_DEGREE`, `WMM_MAX_ORACLE_DEGREE` and `WMM_MAX_POWER`.
    pub fn from_env() -> Result<Self> {
        let mut l = Limits::default();
        let read = |key: &str, slot: &mut usize| -> Result<()> {
            if let Ok(v) = std::env::var(key) {
                *slot = v
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("{key} must be a non-negative integer")))?;
            }
            Ok(())
        };
        read("WMM_MAX_PERM_N", &mut l.max_perm_n)?;
        read("WMM_MAX_INJECTION_N", &mut l.max_injection_n)?;
        read("WMM_MAX_DEGREE", &mut l.max_symbolic_degree)?;
        read("WMM_MAX_ORACLE_DEGREE", &mut l.max_oracle_degree)?;
        read("WMM_MAX_POWER", &mut l.max_power)?;
        Ok(l)
    }

    pub fn check(what: &'static str, value: usize, limit: usize) -> Result<()> {
        if value > limit {
            Err(Error::GuardLimit { what, value, limit })
        } else {
            Ok(())
        }
    }
}
