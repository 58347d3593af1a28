//! Three-valued outcomes and search caps.
//!
//! Deciders in this crate are exact but capped: a search that would
//! exceed its cap returns [`Verdict::Undecided`] with the reason, never a
//! guessed boolean.

use serde::{Deserialize, Serialize};

/// Outcome of a capped decision procedure. `Holds` and `Fails` carry
/// evidence; `Undecided` means a cap stopped the search before it could
/// settle the question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum Verdict<Y, N> {
    Holds(Y),
    Fails(N),
    Undecided(String),
}

impl<Y, N> Verdict<Y, N> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_undecided(&self) -> bool {
        matches!(self, Verdict::Undecided(_))
    }

    /// Map the positive payload, keeping the other arms.
    pub fn map_holds<Z>(self, f: impl FnOnce(Y) -> Z) -> Verdict<Z, N> {
        match self {
            Verdict::Holds(y) => Verdict::Holds(f(y)),
            Verdict::Fails(n) => Verdict::Fails(n),
            Verdict::Undecided(r) => Verdict::Undecided(r),
        }
    }
}

/// Caps for the exhaustive freeness searches. Exceeding a cap yields
/// `Undecided`, so results are exact whenever they are decisive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchCap {
    /// Largest subset the order-and-colour search will attempt.
    pub max_elements: usize,
    /// Largest subset the all-orders (strong freeness) search will attempt.
    pub max_elements_strong: usize,
    /// Largest colour count the searches will attempt.
    pub max_kappa: u32,
    /// Step budget across one decision (search tree nodes).
    pub max_steps: u64,
}

impl SearchCap {
    /// Default cap: exhaustive up to 8 elements and 4 colours.
    pub fn small() -> Self {
        SearchCap {
            max_elements: 8,
            max_elements_strong: 7,
            max_kappa: 4,
            max_steps: 4_000_000,
        }
    }

    /// Roomier cap for longer runs.
    pub fn medium() -> Self {
        SearchCap {
            max_elements: 10,
            max_elements_strong: 8,
            max_kappa: 6,
            max_steps: 64_000_000,
        }
    }

    /// Cap sized from a single knob: subsets up to `n` elements.
    pub fn custom(n: usize) -> Self {
        SearchCap {
            max_elements: n,
            max_elements_strong: n.min(9),
            max_kappa: 8,
            max_steps: 64_000_000,
        }
    }
}

impl Default for SearchCap {
    fn default() -> Self {
        SearchCap::small()
    }
}

/// How a universally quantified scan covered its domain. Sampled scans
/// can refute (a found counterexample is real) but their positive answer
/// is only as strong as the sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanGrade {
    Exhaustive,
    Sampled { tried: u64 },
}
