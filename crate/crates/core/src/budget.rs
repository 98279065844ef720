//! Limits on exhaustive enumerations and linear system sizes.

use crate::error::{Error, Result};

/// Default ceiling for brute-force enumerations.
pub const DEFAULT_ENUMERATION: u128 = 1 << 24;
/// Default ceiling for the number of matrix entries in one linear system.
pub const DEFAULT_CELLS: u128 = 1 << 24;

/// Size limits. `OBSLAB_BUDGET` (a positive integer) overrides the enumeration limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    pub enumeration: u128,
    pub cells: u128,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            enumeration: DEFAULT_ENUMERATION,
            cells: DEFAULT_CELLS,
        }
    }
}

impl Budget {
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Some(v) = std::env::var("OBSLAB_BUDGET").ok().and_then(|s| s.trim().parse::<u128>().ok()) {
            if v > 0 {
                b.enumeration = v;
            }
        }
        b
    }

    pub fn with_enumeration(mut self, limit: u128) -> Self {
        self.enumeration = limit;
        self
    }

    pub fn check(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.enumeration {
            return Err(Error::BudgetExceeded {
                what: what.to_string(),
                needed,
                limit: self.enumeration,
            });
        }
        Ok(())
    }

    pub fn check_cells(&self, what: &str, needed: u128) -> Result<()> {
        if needed > self.cells {
            return Err(Error::BudgetExceeded {
                what: what.to_string(),
                needed,
                limit: self.cells,
            });
        }
        Ok(())
    }
}
