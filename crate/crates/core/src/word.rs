//! Symbolic words and admissibility with respect to a 0/1 transition matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Symbol = u8;

/// A finite word over the alphabet `{0, .., k-1}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn new(symbols: Vec<Symbol>) -> Self {
        Word(symbols)
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Cyclic left rotation by `k` places: `(w_k, .., w_{n-1}, w_0, .., w_{k-1})`.
    pub fn rotate(&self, k: usize) -> Word {
        let mut v = self.0.clone();
        if !v.is_empty() {
            let k = k % v.len();
            v.rotate_left(k);
        }
        Word(v)
    }

    /// Lexicographically smallest cyclic rotation.
    pub fn min_rotation(&self) -> Word {
        (0..self.len().max(1))
            .map(|k| self.rotate(k))
            .min()
            .unwrap_or_else(|| self.clone())
    }

    /// Smallest `p` dividing `len` with `w` equal to its rotation by `p`.
    pub fn primitive_period(&self) -> usize {
        let n = self.len();
        (1..=n)
            .find(|&p| n.is_multiple_of(p) && (0..n).all(|i| self.0[i] == self.0[(i + p) % n]))
            .unwrap_or(n)
    }

    /// The first `m` symbols of the periodic extension `www...`.
    pub fn cyclic_prefix(&self, start: usize, m: usize) -> Vec<Symbol> {
        let n = self.len();
        (0..m).map(|j| self.0[(start + j) % n]).collect()
    }

    pub fn count(&self, symbol: Symbol) -> usize {
        self.0.iter().filter(|&&s| s == symbol).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join("."))
        }
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

/// Square 0/1 admissibility matrix: symbol `j` may follow symbol `i` iff `allows(i, j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionMatrix {
    k: usize,
    allowed: Vec<bool>,
}

impl TransitionMatrix {
    pub fn new(rows: &[Vec<u8>]) -> Result<Self> {
        let k = rows.len();
        if k == 0 || k > Symbol::MAX as usize {
            return Err(Error::InvalidSystem(format!("alphabet size {k} out of range")));
        }
        let mut allowed = Vec::with_capacity(k * k);
        for row in rows {
            if row.len() != k {
                return Err(Error::InvalidSystem("transition matrix is not square".into()));
            }
            for &v in row {
                match v {
                    0 => allowed.push(false),
                    1 => allowed.push(true),
                    _ => return Err(Error::InvalidSystem(format!("transition entry {v} is not 0/1"))),
                }
            }
        }
        let t = TransitionMatrix { k, allowed };
        for i in 0..k {
            if !(0..k).any(|j| t.allows(i, j)) {
                return Err(Error::InvalidSystem(format!("row {i} of the transition matrix is zero")));
            }
            if !(0..k).any(|j| t.allows(j, i)) {
                return Err(Error::InvalidSystem(format!("column {i} of the transition matrix is zero")));
            }
        }
        Ok(t)
    }

    pub fn full(k: usize) -> Self {
        TransitionMatrix { k, allowed: vec![true; k * k] }
    }

    /// `[[1, 1], [1, 0]]`: the symbol 1 may not follow itself.
    pub fn golden_mean() -> Self {
        TransitionMatrix { k: 2, allowed: vec![true, true, true, false] }
    }

    pub fn size(&self) -> usize {
        self.k
    }

    #[inline]
    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.allowed[i * self.k + j]
    }

    pub fn is_full(&self) -> bool {
        self.allowed.iter().all(|&a| a)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        (0..self.k)
            .map(|i| (0..self.k).map(|j| self.allows(i, j) as u8).collect())
            .collect()
    }

    pub fn is_admissible(&self, w: &[Symbol]) -> bool {
        w.iter().all(|&s| (s as usize) < self.k)
            && w.windows(2).all(|p| self.allows(p[0] as usize, p[1] as usize))
    }

    /// Admissible as the period of a periodic sequence (the wrap-around transition included).
    pub fn is_cyclically_admissible(&self, w: &[Symbol]) -> bool {
        !w.is_empty()
            && self.is_admissible(w)
            && self.allows(w[w.len() - 1] as usize, w[0] as usize)
    }

    /// All admissible words of length `len` in lexicographic order.
    pub fn words(&self, len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(len);
        self.extend_words(&mut cur, len, &mut |w| out.push(Word::from(w)));
        out
    }

    fn extend_words(&self, cur: &mut Vec<Symbol>, len: usize, f: &mut dyn FnMut(&[Symbol])) {
        if cur.len() == len {
            f(cur);
            return;
        }
        for s in 0..self.k {
            if cur.last().is_none_or(|&p| self.allows(p as usize, s)) {
                cur.push(s as Symbol);
                self.extend_words(cur, len, f);
                cur.pop();
            }
        }
    }

    /// Visits, in lexicographic order, every cyclically admissible word of length `n`
    /// that starts with `prefix`.
    pub fn for_each_periodic_word<F>(&self, prefix: &[Symbol], n: usize, f: &mut F) -> Result<()>
    where
        F: FnMut(&[Symbol]) -> Result<()>,
    {
        let mut cur = prefix.to_vec();
        self.periodic_dfs(&mut cur, n, f)
    }

    fn periodic_dfs<F>(&self, cur: &mut Vec<Symbol>, n: usize, f: &mut F) -> Result<()>
    where
        F: FnMut(&[Symbol]) -> Result<()>,
    {
        if cur.len() == n {
            if self.allows(cur[n - 1] as usize, cur[0] as usize) {
                f(cur)?;
            }
            return Ok(());
        }
        for s in 0..self.k {
            if cur.last().is_none_or(|&p| self.allows(p as usize, s)) {
                cur.push(s as Symbol);
                self.periodic_dfs(cur, n, f)?;
                cur.pop();
            }
        }
        Ok(())
    }

    /// Number of admissible words of length `len` (saturating).
    pub fn word_count(&self, len: usize) -> u128 {
        if len == 0 {
            return 1;
        }
        let mut v = vec![1u128; self.k];
        for _ in 1..len {
            v = (0..self.k)
                .map(|i| {
                    (0..self.k)
                        .filter(|&j| self.allows(i, j))
                        .fold(0u128, |acc, j| acc.saturating_add(v[j]))
                })
                .collect();
        }
        v.into_iter().fold(0u128, |a, b| a.saturating_add(b))
    }

    /// `trace(A^n)`: the number of cyclically admissible words of length `n` (saturating).
    pub fn periodic_word_count(&self, n: usize) -> u128 {
        let k = self.k;
        let a: Vec<u128> = self.allowed.iter().map(|&b| b as u128).collect();
        let mut p = a.clone();
        for _ in 1..n {
            let mut q = vec![0u128; k * k];
            for i in 0..k {
                for l in 0..k {
                    if p[i * k + l] == 0 {
                        continue;
                    }
                    for j in 0..k {
                        if a[l * k + j] != 0 {
                            q[i * k + j] = q[i * k + j].saturating_add(p[i * k + l]);
                        }
                    }
                }
            }
            p = q;
        }
        (0..k).fold(0u128, |acc, i| acc.saturating_add(p[i * k + i]))
    }
}
