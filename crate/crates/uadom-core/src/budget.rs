//! Explicit resource budgets. Exceeding a budget is a hard error, never a
//! silent truncation.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Cap on exhaustive assignment sweeps (identity checks, array sweeps).
    pub max_assignments: u64,
    /// Cap on enumerated operation tables per model search.
    pub max_models: u64,
    /// Cap on term-graph nodes in a coproduct presentation.
    pub max_nodes: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_assignments: 100_000_000,
            max_models: 50_000_000,
            max_nodes: 100_000,
        }
    }
}

impl Budget {
    pub fn with_max_nodes(mut self, max_nodes: usize) -> Self {
        self.max_nodes = max_nodes;
        self
    }

    pub fn with_max_models(mut self, max_models: u64) -> Self {
        self.max_models = max_models;
        self
    }

    pub fn with_max_assignments(mut self, max_assignments: u64) -> Self {
        self.max_assignments = max_assignments;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize, Deserialize)]
#[error("budget exceeded: {resource} needs {needed}, limit {limit}")]
pub struct BudgetExceeded {
    pub resource: &'static str,
    pub needed: u64,
    pub limit: u64,
}

impl BudgetExceeded {
    pub fn new(resource: &'static str, needed: u64, limit: u64) -> Self {
        BudgetExceeded {
            resource,
            needed,
            limit,
        }
    }
}

/// Checked `base^exp` guarded against a budget limit.
pub fn checked_assignment_count(
    base: usize,
    exp: usize,
    limit: u64,
) -> Result<u64, BudgetExceeded> {
    let mut total: u64 = 1;
    for _ in 0..exp {
        total = total
            .checked_mul(base as u64)
            .filter(|&t| t <= limit)
            .ok_or_else(|| BudgetExceeded::new("assignments", u64::MAX, limit))?;
    }
    Ok(total)
}
