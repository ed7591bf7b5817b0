//! Size caps for bases, classes and full Fock spaces.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Environment variable overriding [`Limits::max_dim`].
pub const MAX_DIM_ENV: &str = "PERMWALK_MAX_DIM";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest site count accepted for a single particle-number sector.
    pub max_sites: usize,
    /// Largest site count accepted when the full `2^N` Fock space is built.
    pub max_fock_sites: usize,
    /// Largest number of basis states in any one space.
    pub max_dim: u128,
    /// Largest conjugacy class an iterator will walk.
    pub max_class_size: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_sites: 20,
            max_fock_sites: 14,
            max_dim: 10_000_000,
            max_class_size: 10_000_000,
        }
    }
}

static CURRENT: OnceLock<Limits> = OnceLock::new();

impl Limits {
    /// Defaults with `max_dim` taken from `PERMWALK_MAX_DIM` when it parses.
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(dim) = std::env::var(MAX_DIM_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<u128>().ok())
        {
            limits.max_dim = dim;
        }
        limits
    }

    /// Process-wide limits used by the convenience constructors.
    ///
    /// Initialized from the environment on first use unless [`Limits::install`]
    /// ran earlier.
    pub fn current() -> Limits {
        *CURRENT.get_or_init(Limits::from_env)
    }

    /// Installs process-wide limits. Returns false if limits were already fixed.
    pub fn install(self) -> bool {
        CURRENT.set(self).is_ok()
    }

    pub fn check_sites(&self, n_sites: usize) -> Result<()> {
        if n_sites == 0 || n_sites > self.max_sites {
            return Err(Error::TooManySites { n_sites, max: self.max_sites });
        }
        Ok(())
    }

    pub fn check_dim(&self, dim: u128) -> Result<()> {
        if dim > self.max_dim {
            return Err(Error::DimensionOverflow { dim, cap: self.max_dim });
        }
        Ok(())
    }
}

/// Binomial coefficient `C(n, k)`, zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}
