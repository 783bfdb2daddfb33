//! Concrete dynamical systems and potentials.
//!
//! Phase space for maps is `[0, 1)`. A map is given by an ordered list of monotone
//! branches whose domains partition `[0, 1)`; each branch is left-closed, so a point on a
//! shared endpoint belongs to the branch on its right. Every built-in map is full-branch
//! (each branch maps its closed domain onto `[0, 1]`), so the symbolic model is the full
//! shift on as many symbols as there are branches.
//!
//! Subshifts of finite type carry no coordinates; they may carry per-symbol
//! log-expansion values that stand in for `log|f'|` when expansion is needed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{Symbol, TransitionMatrix, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SystemKind {
    IntervalMarkovMap,
    SubshiftFiniteType,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    Increasing,
    Decreasing,
}

/// Metric used on phase space for separated sets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Circle,
    Interval,
}

/// Closed-form branch formulas. Values are "lifted": the branch maps its closed domain
/// onto `[0, 1]` before reduction mod 1.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum BranchFormula {
    /// `slope * x + intercept`
    Affine { slope: f64, intercept: f64 },
    /// `x + x^(1+s) - lift`
    Intermittent { s: f64, lift: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSpec {
    pub lo: f64,
    pub hi: f64,
    pub formula: BranchFormula,
    pub orientation: Orientation,
}

impl BranchSpec {
    /// Lifted value and derivative of the branch formula (no domain check).
    #[inline]
    pub fn lifted(&self, x: f64) -> (f64, f64) {
        match self.formula {
            BranchFormula::Affine { slope, intercept } => (slope * x + intercept, slope),
            BranchFormula::Intermittent { s, lift } => {
                let xs = x.powf(s);
                (x + x * xs - lift, 1.0 + (1.0 + s) * xs)
            }
        }
    }

    /// The point of the closed domain mapped (lifted) to `y`, with `dx/dy`.
    pub fn inverse(&self, y: f64) -> (f64, f64) {
        let x = match self.formula {
            BranchFormula::Affine { slope, intercept } => (y - intercept) / slope,
            BranchFormula::Intermittent { s, lift } => {
                let target = y + lift;
                // x + x^(1+s) is convex and increasing: Newton from the right converges
                // monotonically.
                let mut x = target.min(self.hi);
                for _ in 0..100 {
                    let xs = x.powf(s);
                    let g = x + x * xs - target;
                    if g <= 0.0 {
                        break;
                    }
                    let step = g / (1.0 + (1.0 + s) * xs);
                    let next = x - step;
                    if next >= x || step <= x * 1e-17 {
                        x = next.min(x);
                        break;
                    }
                    x = next;
                }
                x
            }
        };
        let x = x.clamp(self.lo, self.hi);
        let (_, d) = self.lifted(x);
        (x, 1.0 / d)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// A concrete dynamical system.
#[derive(Clone, Debug, PartialEq)]
pub struct SystemSpec {
    pub kind: SystemKind,
    pub name: String,
    pub branches: Vec<BranchSpec>,
    pub transition: TransitionMatrix,
    /// Hölder exponent of the derivative (metadata).
    pub modulus: f64,
    pub topology: Topology,
    /// Per-symbol log-expansion for subshifts (the designated geometric weight).
    pub log_expansion: Option<Vec<f64>>,
}

/// Reduce a lifted value into `[0, 1)`.
#[inline]
fn wrap(v: f64) -> f64 {
    let y = v.rem_euclid(1.0);
    if y >= 1.0 {
        0.0
    } else {
        y
    }
}

impl SystemSpec {
    /// `x -> 2x mod 1`.
    pub fn doubling() -> Self {
        SystemSpec {
            kind: SystemKind::IntervalMarkovMap,
            name: "doubling".into(),
            branches: vec![
                BranchSpec {
                    lo: 0.0,
                    hi: 0.5,
                    formula: BranchFormula::Affine { slope: 2.0, intercept: 0.0 },
                    orientation: Orientation::Increasing,
                },
                BranchSpec {
                    lo: 0.5,
                    hi: 1.0,
                    formula: BranchFormula::Affine { slope: 2.0, intercept: -1.0 },
                    orientation: Orientation::Increasing,
                },
            ],
            transition: TransitionMatrix::full(2),
            modulus: 1.0,
            topology: Topology::Circle,
            log_expansion: None,
        }
    }

    /// `x -> s * min(x, 1 - x)`, `0 < s <= 2`. Only `s = 2` is full-branch.
    pub fn tent(s: f64) -> Result<Self> {
        if !(s > 0.0 && s <= 2.0) {
            return Err(Error::InvalidSystem(format!("tent slope {s} outside (0, 2]")));
        }
        Ok(SystemSpec {
            kind: SystemKind::IntervalMarkovMap,
            name: format!("tent_{s}"),
            branches: vec![
                BranchSpec {
                    lo: 0.0,
                    hi: 0.5,
                    formula: BranchFormula::Affine { slope: s, intercept: 0.0 },
                    orientation: Orientation::Increasing,
                },
                BranchSpec {
                    lo: 0.5,
                    hi: 1.0,
                    formula: BranchFormula::Affine { slope: -s, intercept: s },
                    orientation: Orientation::Decreasing,
                },
            ],
            transition: TransitionMatrix::full(2),
            modulus: 1.0,
            topology: Topology::Interval,
            log_expansion: None,
        })
    }

    /// Manneville–Pomeau map `x -> x + x^(1+s) mod 1`, `0 < s < 1`; neutral fixed point at 0.
    pub fn manneville_pomeau(s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::InvalidSystem(format!("Manneville-Pomeau exponent {s} outside (0, 1)")));
        }
        // c + c^(1+s) = 1
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m + m.powf(1.0 + s) < 1.0 {
                a = m;
            } else {
                b = m;
            }
        }
        let c = 0.5 * (a + b);
        Ok(SystemSpec {
            kind: SystemKind::IntervalMarkovMap,
            name: format!("manpo_{s}"),
            branches: vec![
                BranchSpec {
                    lo: 0.0,
                    hi: c,
                    formula: BranchFormula::Intermittent { s, lift: 0.0 },
                    orientation: Orientation::Increasing,
                },
                BranchSpec {
                    lo: c,
                    hi: 1.0,
                    formula: BranchFormula::Intermittent { s, lift: 1.0 },
                    orientation: Orientation::Increasing,
                },
            ],
            transition: TransitionMatrix::full(2),
            modulus: s,
            topology: Topology::Circle,
            log_expansion: None,
        })
    }

    pub fn subshift(transition: TransitionMatrix, log_expansion: Option<Vec<f64>>) -> Result<Self> {
        if let Some(w) = &log_expansion {
            if w.len() != transition.size() {
                return Err(Error::InvalidSystem(format!(
                    "{} geometric weights for an alphabet of size {}",
                    w.len(),
                    transition.size()
                )));
            }
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidSystem("geometric weights must be finite".into()));
            }
        }
        Ok(SystemSpec {
            kind: SystemKind::SubshiftFiniteType,
            name: "sft".into(),
            branches: Vec::new(),
            transition,
            modulus: 1.0,
            topology: Topology::Interval,
            log_expansion,
        })
    }

    /// Golden-mean shift, optionally with the same log-expansion on both symbols.
    pub fn golden_mean(log_expansion: Option<f64>) -> Self {
        let mut s = Self::subshift(TransitionMatrix::golden_mean(), log_expansion.map(|v| vec![v; 2]))
            .expect("golden mean is valid");
        s.name = "golden_mean".into();
        s
    }

    pub fn full_shift(k: usize, log_expansion: Option<f64>) -> Self {
        let mut s = Self::subshift(TransitionMatrix::full(k), log_expansion.map(|v| vec![v; k]))
            .expect("full shift is valid");
        s.name = format!("full_shift_{k}");
        s
    }

    pub fn is_map(&self) -> bool {
        self.kind == SystemKind::IntervalMarkovMap
    }

    pub fn alphabet_size(&self) -> usize {
        self.transition.size()
    }

    /// Every branch maps its closed domain onto `[0, 1]`.
    pub fn is_full_branch(&self) -> bool {
        self.is_map()
            && self.branches.iter().all(|b| {
                let (u, _) = b.lifted(b.lo);
                let (v, _) = b.lifted(b.hi);
                (u.min(v)).abs() < 1e-12 && (u.max(v) - 1.0).abs() < 1e-12
            })
    }

    pub fn branch_index(&self, x: f64) -> Result<usize> {
        if !self.is_map() {
            return Err(Error::NotAMap);
        }
        if !(0.0..1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        // Left-closed branches: the last branch whose lower endpoint is <= x.
        Ok(self.branches.iter().rposition(|b| b.lo <= x).unwrap_or(0))
    }

    /// Per-symbol log-expansion of a subshift.
    pub fn symbol_log_expansion(&self, s: Symbol) -> Result<f64> {
        self.log_expansion
            .as_ref()
            .map(|w| w[s as usize])
            .ok_or(Error::MissingGeometricWeights)
    }

    /// Whether `x` is an interior branch endpoint where one-sided derivatives disagree.
    fn is_kink(&self, x: f64, j: usize) -> bool {
        if j == 0 || x != self.branches[j].lo {
            return false;
        }
        let left = self.branches[j - 1].lifted(x).1;
        let right = self.branches[j].lifted(x).1;
        (left - right).abs() > 1e-12
    }
}

/// `(f(x), f'(x))`.
pub fn evaluate_map(sys: &SystemSpec, x: f64) -> Result<(f64, f64)> {
    let j = sys.branch_index(x)?;
    let (v, d) = sys.branches[j].lifted(x);
    Ok((wrap(v), d))
}

/// Branch indices of `x, f(x), .., f^{n-1}(x)`.
pub fn itinerary(sys: &SystemSpec, x: f64, n: usize) -> Result<Word> {
    let mut out = Vec::with_capacity(n);
    let mut y = x;
    for k in 0..n {
        let j = sys.branch_index(y)?;
        out.push(j as Symbol);
        if k + 1 < n {
            y = wrap(sys.branches[j].lifted(y).0);
        }
    }
    Ok(Word::new(out))
}

/// `log|f'(x)|`, refusing non-differentiable branch endpoints.
pub fn log_derivative(sys: &SystemSpec, x: f64) -> Result<f64> {
    let j = sys.branch_index(x)?;
    if sys.is_kink(x, j) {
        return Err(Error::DerivativeUnavailable(x));
    }
    Ok(sys.branches[j].lifted(x).1.abs().ln())
}

/// Closed interval coded by `word` (full-branch maps only).
pub fn cylinder_interval(sys: &SystemSpec, word: &[Symbol]) -> Result<(f64, f64)> {
    if !sys.is_map() {
        return Err(Error::NotAMap);
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    for &s in word.iter().rev() {
        let br = sys
            .branches
            .get(s as usize)
            .ok_or_else(|| Error::Inadmissible(Word::from(word).to_string()))?;
        let u = br.inverse(a).0;
        let v = br.inverse(b).0;
        a = u.min(v);
        b = u.max(v);
    }
    Ok((a, b))
}

/// Closed-form test functions on `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AnalyticFormula {
    Identity,
    /// Indicator of `[lo, hi)`.
    Indicator { lo: f64, hi: f64 },
    /// `cos(2π k x)`
    Cosine { frequency: f64 },
}

impl AnalyticFormula {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            AnalyticFormula::Identity => x,
            AnalyticFormula::Indicator { lo, hi } => ((lo <= x) && (x < hi)) as u8 as f64,
            AnalyticFormula::Cosine { frequency } => (2.0 * std::f64::consts::PI * frequency * x).cos(),
        }
    }
}

/// A potential that depends only on the first `depth` symbols of the itinerary.
///
/// Values are indexed by the admissible `depth`-words of the transition matrix in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderTable {
    depth: usize,
    k: usize,
    words: Vec<Word>,
    values: Vec<f64>,
    dense: Vec<u32>,
}

impl CylinderTable {
    pub fn new(transition: &TransitionMatrix, depth: usize, values: Vec<f64>) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidPotential("cylinder depth must be at least 1".into()));
        }
        let k = transition.size();
        let dense_len = (k as u128).checked_pow(depth as u32).filter(|&n| n <= 1 << 24).ok_or_else(|| {
            Error::InvalidPotential(format!("cylinder depth {depth} too large for alphabet {k}"))
        })? as usize;
        let words = transition.words(depth);
        if words.len() != values.len() {
            return Err(Error::InvalidPotential(format!(
                "cylinder table has {} values but there are {} admissible {}-words",
                values.len(),
                words.len(),
                depth
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("cylinder values must be finite".into()));
        }
        let mut dense = vec![u32::MAX; dense_len];
        for (i, w) in words.iter().enumerate() {
            dense[Self::code(k, w.symbols())] = i as u32;
        }
        Ok(CylinderTable { depth, k, words, values, dense })
    }

    /// Table from a closure over admissible words.
    pub fn from_fn(transition: &TransitionMatrix, depth: usize, f: impl Fn(&[Symbol]) -> f64) -> Result<Self> {
        let values = transition.words(depth).iter().map(|w| f(w.symbols())).collect();
        Self::new(transition, depth, values)
    }

    /// Indicator of the cylinder `[word]`.
    pub fn indicator(transition: &TransitionMatrix, word: &[Symbol]) -> Result<Self> {
        Self::from_fn(transition, word.len(), |w| (w == word) as u8 as f64)
    }

    fn code(k: usize, w: &[Symbol]) -> usize {
        w.iter().fold(0usize, |acc, &s| acc * k + s as usize)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Index of an admissible word of length `depth`.
    pub fn index_of(&self, w: &[Symbol]) -> Option<usize> {
        if w.len() != self.depth || w.iter().any(|&s| s as usize >= self.k) {
            return None;
        }
        let i = self.dense[Self::code(self.k, w)];
        (i != u32::MAX).then_some(i as usize)
    }

    /// Value on the cylinder given by the first `depth` symbols of `w`.
    pub fn value(&self, w: &[Symbol]) -> Result<f64> {
        let prefix = w
            .get(..self.depth)
            .ok_or_else(|| Error::InvalidArgument(format!("word shorter than cylinder depth {}", self.depth)))?;
        self.index_of(prefix)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::Inadmissible(Word::from(prefix).to_string()))
    }

    /// The same function as a table of depth `depth >= self.depth`.
    pub fn lift(&self, transition: &TransitionMatrix, depth: usize) -> Result<Self> {
        if depth < self.depth {
            return Err(Error::InvalidArgument("cannot lower cylinder depth".into()));
        }
        Self::from_fn(transition, depth, |w| {
            self.value(w).expect("prefix of an admissible word is admissible")
        })
    }

    pub fn plus(&self, other: &CylinderTable, transition: &TransitionMatrix) -> Result<Self> {
        let d = self.depth.max(other.depth);
        let a = self.lift(transition, d)?;
        let b = other.lift(transition, d)?;
        let values = a.values.iter().zip(&b.values).map(|(x, y)| x + y).collect();
        Self::new(transition, d, values)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v *= c);
        t
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Potentials `φ : Λ -> R`.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    Constant(f64),
    Cylinder(CylinderTable),
    /// `φ_t = -t log|f'|`; on subshifts `-t` times the symbol's log-expansion.
    Geometric { t: f64 },
    Analytic(AnalyticFormula),
}

/// Where to evaluate a potential.
#[derive(Clone, Copy, Debug)]
pub enum Location<'a> {
    Point(f64),
    /// A symbolic sequence long enough for the potential's depth.
    Word(&'a [Symbol]),
}

impl Potential {
    pub fn zero() -> Self {
        Potential::Constant(0.0)
    }

    /// Cylinder depth needed to evaluate from symbols, if symbolic evaluation applies.
    pub fn symbolic_depth(&self) -> usize {
        match self {
            Potential::Cylinder(t) => t.depth(),
            _ => 1,
        }
    }
}

pub fn evaluate_potential(phi: &Potential, sys: &SystemSpec, at: Location<'_>) -> Result<f64> {
    match (phi, at) {
        (Potential::Constant(c), _) => Ok(*c),
        (Potential::Cylinder(t), Location::Word(w)) => t.value(w),
        (Potential::Cylinder(t), Location::Point(x)) => {
            let w = itinerary(sys, x, t.depth())?;
            t.value(w.symbols())
        }
        (Potential::Geometric { t }, Location::Point(x)) => Ok(-t * log_derivative(sys, x)?),
        (Potential::Geometric { t }, Location::Word(w)) => {
            let s = *w.first().ok_or_else(|| Error::InvalidArgument("empty word".into()))?;
            if sys.is_map() {
                // Piecewise-affine branches have a constant derivative per symbol.
                match sys.branches.get(s as usize).map(|b| b.formula) {
                    Some(BranchFormula::Affine { slope, .. }) => Ok(-t * slope.abs().ln()),
                    _ => Err(Error::InvalidArgument(
                        "geometric potential of a non-affine branch needs a point".into(),
                    )),
                }
            } else {
                Ok(-t * sys.symbol_log_expansion(s)?)
            }
        }
        (Potential::Analytic(f), Location::Point(x)) => {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::OutOfDomain(x));
            }
            Ok(f.eval(x))
        }
        (Potential::Analytic(_), Location::Word(_)) => {
            Err(Error::InvalidArgument("analytic potentials need a point".into()))
        }
    }
}

/// The potential as a cylinder table, when it is one (exactly) on `sys`.
pub fn to_cylinder(sys: &SystemSpec, phi: &Potential) -> Option<CylinderTable> {
    let tr = &sys.transition;
    match phi {
        Potential::Constant(c) => CylinderTable::from_fn(tr, 1, |_| *c).ok(),
        Potential::Cylinder(t) => Some(t.clone()),
        Potential::Geometric { .. } => {
            CylinderTable::from_fn(tr, 1, |w| evaluate_potential(phi, sys, Location::Word(w)).unwrap_or(f64::NAN))
                .ok()
        }
        Potential::Analytic(AnalyticFormula::Indicator { lo, hi }) if sys.is_map() => indicator_table(sys, *lo, *hi),
        Potential::Analytic(_) => None,
    }
}

/// Deepest cylinder partition searched when matching an interval indicator.
const INDICATOR_MAX_DEPTH: usize = 10;

/// `1_[lo,hi)` as a cylinder table when `[lo,hi)` is a union of cylinders of some depth.
fn indicator_table(sys: &SystemSpec, lo: f64, hi: f64) -> Option<CylinderTable> {
    const TOL: f64 = 1e-15;
    'depth: for m in 1..=INDICATOR_MAX_DEPTH {
        let words = sys.transition.words(m);
        let mut values = Vec::with_capacity(words.len());
        for w in &words {
            let (a, b) = cylinder_interval(sys, w.symbols()).ok()?;
            if a >= lo - TOL && b <= hi + TOL {
                values.push(1.0);
            } else if b <= lo + TOL || a >= hi - TOL {
                values.push(0.0);
            } else {
                continue 'depth;
            }
        }
        return CylinderTable::new(&sys.transition, m, values).ok();
    }
    None
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extremum {
    Min,
    Max,
}

const GRID_POINTS: usize = 1 << 16;

/// `min_Λ φ` or `sup_Λ φ`.
///
/// Exact for cylinder-type potentials (every admissible word is realized in Λ). For the
/// rest, a 2^16-point grid over the closed branch domains followed by golden-section
/// refinement to 1e-9 around the best grid point.
pub fn potential_extremum(sys: &SystemSpec, phi: &Potential, which: Extremum) -> Result<f64> {
    let pick = |a: f64, b: f64| match which {
        Extremum::Min => a.min(b),
        Extremum::Max => a.max(b),
    };
    if let Some(t) = to_cylinder(sys, phi) {
        if t.values().iter().all(|v| v.is_finite()) {
            return Ok(match which {
                Extremum::Min => t.min(),
                Extremum::Max => t.max(),
            });
        }
    }
    if !sys.is_map() {
        return match phi {
            Potential::Geometric { .. } => Err(Error::MissingGeometricWeights),
            _ => Err(Error::InvalidPotential("potential cannot be evaluated on a subshift".into())),
        };
    }
    let sign = if which == Extremum::Min { 1.0 } else { -1.0 };
    let mut best = match which {
        Extremum::Min => f64::INFINITY,
        Extremum::Max => f64::NEG_INFINITY,
    };
    let per_branch = GRID_POINTS / sys.branches.len();
    for br in &sys.branches {
        // values on the closed branch domain via the branch's own formula
        let g = |x: f64| -> f64 {
            match phi {
                Potential::Geometric { t } => -t * br.lifted(x).1.abs().ln(),
                Potential::Analytic(f) => f.eval(x),
                _ => unreachable!("cylinder-type handled above"),
            }
        };
        let h = (br.hi - br.lo) / per_branch as f64;
        let mut arg = 0usize;
        let mut val = f64::INFINITY;
        for i in 0..=per_branch {
            let x = if i == per_branch { br.hi } else { br.lo + h * i as f64 };
            let v = sign * g(x);
            if v < val {
                val = v;
                arg = i;
            }
        }
        let mut a = (br.lo + h * (arg as f64 - 1.0)).max(br.lo);
        let mut b = (br.lo + h * (arg as f64 + 1.0)).min(br.hi);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (sign * g(c), sign * g(d));
        while b - a > 1e-9 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = sign * g(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = sign * g(d);
            }
        }
        let refined = val.min(fc).min(fd);
        best = pick(best, sign * refined);
    }
    Ok(best)
}

/// `max(|min φ|, |max φ|)`.
pub fn sup_norm(sys: &SystemSpec, phi: &Potential) -> Result<f64> {
    let lo = potential_extremum(sys, phi, Extremum::Min)?;
    let hi = potential_extremum(sys, phi, Extremum::Max)?;
    Ok(lo.abs().max(hi.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    #[test]
    fn map_examples() {
        let d = SystemSpec::doubling();
        let (y, dy) = evaluate_map(&d, 0.3).unwrap();
        assert!((y - 0.6).abs() < 1e-15 && dy == 2.0);

        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        assert_eq!(evaluate_map(&mp, 0.0).unwrap(), (0.0, 1.0));

        let t = SystemSpec::tent(2.0).unwrap();
        assert_eq!(evaluate_map(&t, 0.75).unwrap(), (0.5, -2.0));
    }

    #[test]
    fn domain_errors() {
        let d = SystemSpec::doubling();
        assert_eq!(evaluate_map(&d, 1.0), Err(Error::OutOfDomain(1.0)));
        assert!(matches!(evaluate_map(&d, -0.1), Err(Error::OutOfDomain(_))));
        assert!(matches!(evaluate_map(&d, f64::NAN), Err(Error::OutOfDomain(_))));
        let g = SystemSpec::golden_mean(None);
        assert_eq!(evaluate_map(&g, 0.2), Err(Error::NotAMap));
    }

    #[test]
    fn endpoints_resolve_to_the_right_hand_branch() {
        let d = SystemSpec::doubling();
        assert_eq!(d.branch_index(0.5).unwrap(), 1);
        assert_eq!(evaluate_map(&d, 0.5).unwrap().0, 0.0);
        let t = SystemSpec::tent(2.0).unwrap();
        // T(1/2) = 1 ≡ 0
        assert_eq!(evaluate_map(&t, 0.5).unwrap(), (0.0, -2.0));
    }

    #[test]
    fn potential_examples() {
        let d = SystemSpec::doubling();
        let c = Potential::Constant(-0.7);
        assert_eq!(evaluate_potential(&c, &d, Location::Point(0.42)).unwrap(), -0.7);
        let g = Potential::Geometric { t: 1.0 };
        for x in [0.1, 0.3, 0.5, 0.9] {
            assert!((evaluate_potential(&g, &d, Location::Point(x)).unwrap() + LN_2).abs() < 1e-15);
        }
        let cyl = Potential::Cylinder(CylinderTable::new(&d.transition, 1, vec![1.25, -3.0]).unwrap());
        assert_eq!(evaluate_potential(&cyl, &d, Location::Point(0.3)).unwrap(), 1.25);
        assert_eq!(evaluate_potential(&cyl, &d, Location::Point(0.7)).unwrap(), -3.0);
    }

    #[test]
    fn geometric_potential_undefined_at_tent_kink() {
        let t = SystemSpec::tent(2.0).unwrap();
        let g = Potential::Geometric { t: 1.0 };
        assert_eq!(
            evaluate_potential(&g, &t, Location::Point(0.5)),
            Err(Error::DerivativeUnavailable(0.5))
        );
        // the doubling map is differentiable on the circle at 1/2
        let d = SystemSpec::doubling();
        assert!(evaluate_potential(&g, &d, Location::Point(0.5)).is_ok());
    }

    #[test]
    fn itinerary_examples() {
        let d = SystemSpec::doubling();
        assert_eq!(itinerary(&d, 0.3, 3).unwrap(), Word::new(vec![0, 1, 0]));
        assert_eq!(itinerary(&d, 0.0, 4).unwrap(), Word::new(vec![0, 0, 0, 0]));
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        assert_eq!(itinerary(&mp, 1.0 - 1e-12, 1).unwrap(), Word::new(vec![1]));
    }

    #[test]
    fn partition_property() {
        let systems = [
            SystemSpec::doubling(),
            SystemSpec::tent(2.0).unwrap(),
            SystemSpec::manneville_pomeau(0.5).unwrap(),
        ];
        for sys in &systems {
            for i in 0..10_000 {
                let x = (i as f64 + 0.37) / 10_000.0;
                let n = sys.branches.iter().filter(|b| b.contains(x)).count();
                assert_eq!(n, 1, "{} at {x}", sys.name);
            }
            assert!(sys.is_full_branch());
        }
        assert!(!SystemSpec::tent(1.5).unwrap().is_full_branch());
    }

    #[test]
    fn derivative_bounds() {
        let d = SystemSpec::doubling();
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        for i in 0..10_000 {
            let x = i as f64 / 10_000.0;
            assert!(evaluate_map(&d, x).unwrap().1 >= 1.0);
            let dm = evaluate_map(&mp, x).unwrap().1;
            if i == 0 {
                assert_eq!(dm, 1.0);
            } else {
                assert!(dm > 1.0);
            }
        }
    }

    #[test]
    fn inverse_branches_invert() {
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        for br in &mp.branches {
            for i in 0..=100 {
                let y = i as f64 / 100.0;
                let (x, _) = br.inverse(y);
                assert!(x >= br.lo && x <= br.hi);
                assert!((br.lifted(x).0 - y).abs() < 1e-14, "y={y} x={x}");
            }
        }
    }

    #[test]
    fn cylinder_intervals() {
        let d = SystemSpec::doubling();
        let (a, b) = cylinder_interval(&d, &[0, 1, 1]).unwrap();
        assert!((a - 0.375).abs() < 1e-15 && (b - 0.5).abs() < 1e-15);
        let t = SystemSpec::tent(2.0).unwrap();
        let (a, b) = cylinder_interval(&t, &[1, 1]).unwrap();
        // [1/2,1) then the right branch: T(x) in [1/2,1] iff x in [1/2, 3/4]
        assert!((a - 0.5).abs() < 1e-15 && (b - 0.75).abs() < 1e-15);
    }

    #[test]
    fn extrema() {
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let g = Potential::Geometric { t: 1.0 };
        let lo = potential_extremum(&mp, &g, Extremum::Min).unwrap();
        // sup |f'| = 1 + 1.5 = 2.5 at x -> 1
        assert!((lo + 2.5f64.ln()).abs() < 1e-9, "{lo}");
        let hi = potential_extremum(&mp, &g, Extremum::Max).unwrap();
        assert!(hi.abs() < 1e-9);
        let id = Potential::Analytic(AnalyticFormula::Identity);
        let d = SystemSpec::doubling();
        assert!(potential_extremum(&d, &id, Extremum::Min).unwrap().abs() < 1e-12);
        assert!((potential_extremum(&d, &id, Extremum::Max).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cylinder_table_validation() {
        let g = TransitionMatrix::golden_mean();
        // admissible 2-words: 00, 01, 10
        assert!(CylinderTable::new(&g, 2, vec![0.0; 4]).is_err());
        let t = CylinderTable::new(&g, 2, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(t.value(&[1, 0, 1]).unwrap(), 3.0);
        assert!(t.value(&[1, 1]).is_err());
        let lifted = t.lift(&g, 3).unwrap();
        assert_eq!(lifted.values().len(), 5);
        assert_eq!(lifted.value(&[0, 1, 0]).unwrap(), 2.0);
    }

    #[test]
    fn interval_indicators_become_cylinder_tables() {
        let d = SystemSpec::doubling();
        let ind = |lo, hi| Potential::Analytic(AnalyticFormula::Indicator { lo, hi });
        assert_eq!(to_cylinder(&d, &ind(0.0, 0.5)).unwrap().values(), &[1.0, 0.0]);
        assert_eq!(to_cylinder(&d, &ind(0.25, 0.5)).unwrap().values(), &[0.0, 1.0, 0.0, 0.0]);
        assert!(to_cylinder(&d, &ind(0.0, 0.3)).is_none());
        let tent = SystemSpec::tent(2.0).unwrap();
        // the second depth-2 cylinder of the tent map is [1/4, 1/2)
        assert_eq!(to_cylinder(&tent, &ind(0.25, 0.5)).unwrap().values(), &[0.0, 1.0, 0.0, 0.0]);
    }
}
