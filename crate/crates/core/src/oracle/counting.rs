//! Exact symbol-frequency counts on the full 2-shift.

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

/// Slack used by every "deviation of at least δ" test in the crate.
pub const DEVIATION_TOL: f64 = 1e-12;

/// `|mean - center| >= delta`, with [`DEVIATION_TOL`] slack so that exact rational
/// boundaries such as `15/20 - 1/2 = 1/4` count as deviating.
pub fn deviates(mean: f64, center: f64, delta: f64) -> bool {
    (mean - center).abs() >= delta - DEVIATION_TOL
}

/// A condition on the frequency of symbol 0 in a binary word.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FreqCondition {
    AtLeast { threshold: f64 },
    AtMost { threshold: f64 },
    /// `|freq - center| >= delta`.
    Deviation { center: f64, delta: f64 },
}

impl FreqCondition {
    pub fn holds(&self, freq: f64) -> bool {
        match *self {
            FreqCondition::AtLeast { threshold } => freq >= threshold - DEVIATION_TOL,
            FreqCondition::AtMost { threshold } => freq <= threshold + DEVIATION_TOL,
            FreqCondition::Deviation { center, delta } => deviates(freq, center, delta),
        }
    }
}

/// Number of binary words of length `n` whose symbol-0 frequency satisfies `cond`.
pub fn binomial_count(n: usize, cond: FreqCondition) -> BigUint {
    let mut total = BigUint::from(0u32);
    let mut c = BigUint::from(1u32);
    for j in 0..=n {
        if cond.holds(j as f64 / n.max(1) as f64) {
            total += &c;
        }
        // C(n, j+1) = C(n, j) (n - j) / (j + 1)
        c = c * (n - j) / (j + 1);
    }
    total
}
