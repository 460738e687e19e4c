//! Resource caps shared by the exhaustive searches.

use std::env;

/// Environment variable overriding [`Limits::max_states`].
pub const MAX_STATES_ENV: &str = "MULTIVERSE_KIT_MAX_STATES";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest state space (worlds of a model, states of a toy multiverse).
    pub max_states: usize,
    /// Largest family of statements enumerated as subsets of a state space.
    pub max_statements: usize,
    /// Largest `worlds × variables` product for exhaustive valuation sweeps.
    pub max_valuation_bits: usize,
    /// Largest world count for frame enumeration.
    pub max_frame_worlds: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: 4096,
            max_statements: 65536,
            max_valuation_bits: 24,
            max_frame_worlds: 5,
        }
    }
}

impl Limits {
    /// Defaults, with the state cap taken from `MULTIVERSE_KIT_MAX_STATES`
    /// when set. The statement cap scales with it (16 statements per state).
    pub fn from_env() -> Self {
        let mut limits = Limits::default();
        if let Some(n) = env::var(MAX_STATES_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
        {
            limits.max_states = n;
            limits.max_statements = n.saturating_mul(16);
        }
        limits
    }
}
