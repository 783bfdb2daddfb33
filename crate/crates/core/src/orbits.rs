//! Periodic points of `f^n`, their Lyapunov exponents and Birkhoff sums, and
//! certificates of membership in the expanding sets `EFix(f^n, α, ℓ)`.
//!
//! A period-`n` point is found inside the cylinder of its word as the fixed point of the
//! composed inverse branches `G_w = g_{w_0} ∘ .. ∘ g_{w_{n-1}}`. `G_w` maps `[0, 1]` into
//! the closed cylinder and is monotone, so `G_w(x) - x` changes sign exactly once and a
//! bracketing Newton iteration always succeeds, including at the neutral fixed point of
//! an intermittent map where plain iteration of `G_w` stalls.
//!
//! The orbit is reconstructed by applying inverse branches backwards from `x`; every step
//! is a contraction, so all orbit points carry round-off level error. The residual
//! reported is the largest one-step closure defect `|f(x_k) - x_{k+1}|`. The `n`-fold
//! composite `|f^n(x) - x|` is not used because it amplifies round-off by `|(f^n)'(x)|`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::systems::{Potential, SystemSpec, Topology};
use crate::word::{Symbol, Word};

/// Largest accepted one-step closure defect after refinement.
pub const POLISH_TOL: f64 = 1e-12;
/// Default cap on the number of admissible words enumerated for one period.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

const INVERSE_ITERATIONS: usize = 200;
const NEWTON_STEPS: usize = 50;
/// Distance below which an orbit point counts as sitting on the right end of its branch.
const ENDPOINT_TOL: f64 = 1e-14;
/// `λ₁(x) >= α` is tested with this absolute slack (equality cases are admitted).
const LYAPUNOV_TOL: f64 = 1e-12;
/// Relative slack when rounding `1/C` up to an integer.
const CEIL_REL_TOL: f64 = 1e-12;

/// The expansion scale `ℓ`, possibly infinite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ell {
    Finite(u64),
    Infinite,
}

impl Ell {
    pub fn is_finite(&self) -> bool {
        matches!(self, Ell::Finite(_))
    }
}

impl fmt::Display for Ell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ell::Finite(v) => write!(f, "{v}"),
            Ell::Infinite => write!(f, "inf"),
        }
    }
}

impl FromStr for Ell {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") || s == "∞" {
            return Ok(Ell::Infinite);
        }
        match s.parse::<u64>() {
            Ok(v) if v >= 1 => Ok(Ell::Finite(v)),
            _ => Err(Error::InvalidArgument(format!("ell must be an integer >= 1 or \"inf\", got {s:?}"))),
        }
    }
}

impl Serialize for Ell {
    fn serialize<S: Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
        match self {
            Ell::Finite(v) => s.serialize_u64(*v),
            Ell::Infinite => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Ell {
    fn deserialize<D: Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            N(u64),
            S(String),
        }
        match Raw::deserialize(d)? {
            Raw::N(v) if v >= 1 => Ok(Ell::Finite(v)),
            Raw::N(v) => Err(serde::de::Error::custom(format!("ell must be >= 1, got {v}"))),
            Raw::S(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `(α, ℓ_min)`: the least `ℓ` with `x ∈ EFix(f^n, α, ℓ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCertificate {
    pub alpha: f64,
    pub ell_min: Ell,
}

/// One fixed point of `f^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicPointRecord {
    pub word: Word,
    /// Coordinate (maps only).
    pub x: Option<f64>,
    /// `log|f'(f^i(x))|`, or per-symbol log-expansion on subshifts with geometric weights.
    pub log_deriv_per_step: Option<Vec<f64>>,
    pub lyapunov: Option<f64>,
    /// `S_n φ(x)` for each requested potential, in request order.
    pub birkhoff: Vec<f64>,
    pub certificate: Option<ExpansionCertificate>,
}

impl PeriodicPointRecord {
    pub fn period(&self) -> usize {
        self.word.len()
    }
}

/// A located periodic orbit of a map.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicOrbit {
    pub word: Word,
    /// `x_0, .., x_{n-1}` with `x_k` in the branch `w_k`.
    pub points: Vec<f64>,
    pub log_derivs: Vec<f64>,
    /// Largest one-step closure defect.
    pub residual: f64,
}

#[inline]
fn phase_distance(topology: Topology, a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    match topology {
        Topology::Circle => d.min(1.0 - d),
        Topology::Interval => d,
    }
}

fn composed_inverse(sys: &SystemSpec, word: &[Symbol], y: f64) -> (f64, f64) {
    let mut x = y;
    let mut dx = 1.0;
    for &s in word.iter().rev() {
        let (u, du) = sys.branches[s as usize].inverse(x);
        x = u;
        dx *= du;
    }
    (x, dx)
}

fn check_map_word(sys: &SystemSpec, word: &[Symbol]) -> Result<()> {
    if !sys.is_map() {
        return Err(Error::NotAMap);
    }
    if !sys.is_full_branch() {
        return Err(Error::InvalidSystem(format!(
            "{} is not full-branch; periodic points are located only for Markov maps",
            sys.name
        )));
    }
    if !sys.transition.is_cyclically_admissible(word) {
        return Err(Error::Inadmissible(Word::from(word).to_string()));
    }
    Ok(())
}

/// A few Newton steps on `G_w(x) - x`, each kept only if it shrinks the defect.
fn newton_polish(sys: &SystemSpec, word: &[Symbol], mut x: f64) -> f64 {
    for _ in 0..3 {
        let (g, dg) = composed_inverse(sys, word, x);
        let hx = g - x;
        if hx == 0.0 {
            break;
        }
        let cand = x - hx / (dg - 1.0);
        if !(0.0..=1.0).contains(&cand) || (composed_inverse(sys, word, cand).0 - cand).abs() >= hx.abs() {
            break;
        }
        x = cand;
    }
    x
}

/// Solves `G_w(x) = x` on `[0, 1]`.
fn solve_cylinder_fixed_point(sys: &SystemSpec, word: &[Symbol]) -> Result<f64> {
    let h = |x: f64| composed_inverse(sys, word, x).0 - x;

    // contraction phase
    let mut x = 0.5;
    for _ in 0..INVERSE_ITERATIONS {
        let next = composed_inverse(sys, word, x).0;
        let done = (next - x).abs() <= 2e-16;
        x = next;
        if done {
            return Ok(newton_polish(sys, word, x));
        }
    }

    // bracketing Newton on h(x) = G(x) - x: h(0) >= 0 >= h(1), h strictly decreasing
    let (mut a, mut b) = (0.0f64, 1.0f64);
    if h(a) == 0.0 {
        return Ok(a);
    }
    if h(b) == 0.0 {
        return Ok(b);
    }
    for _ in 0..NEWTON_STEPS {
        let (g, dg) = composed_inverse(sys, word, x);
        let hx = g - x;
        if hx == 0.0 {
            return Ok(x);
        }
        if hx > 0.0 {
            a = x;
        } else {
            b = x;
        }
        let mut next = x - hx / (dg - 1.0);
        if !(next > a && next < b) {
            next = 0.5 * (a + b);
        }
        if (next - x).abs() <= 1e-17 || b - a <= 4e-16 {
            return Ok(next);
        }
        x = next;
    }
    // plain bisection always terminates in 1-D
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            return Ok(m);
        }
        let hm = h(m);
        if hm == 0.0 {
            return Ok(m);
        }
        if hm > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    let m = 0.5 * (a + b);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(Error::NoConvergence(Word::from(word).to_string()))
    }
}

/// The periodic orbit coded by `word`, or `None` when the fixed point of the closed
/// cylinder sits on the right end of a branch domain. Such a point belongs to a different
/// cylinder under the left-closed convention (for the doubling map, the word `1^n` codes
/// `x = 1 ≡ 0`, already coded by `0^n`), so the word carries no periodic point of its own.
pub fn periodic_orbit(sys: &SystemSpec, word: &[Symbol]) -> Result<Option<PeriodicOrbit>> {
    check_map_word(sys, word)?;
    let n = word.len();
    let x0 = solve_cylinder_fixed_point(sys, word)?;
    let mut points = vec![0.0; n];
    points[0] = x0;
    let mut y = x0;
    for k in (1..n).rev() {
        y = sys.branches[word[k] as usize].inverse(y).0;
        points[k] = y;
    }
    for (k, &p) in points.iter().enumerate() {
        let br = &sys.branches[word[k] as usize];
        if br.hi - p <= ENDPOINT_TOL || p >= 1.0 {
            return Ok(None);
        }
    }
    let mut residual = 0.0f64;
    let mut log_derivs = Vec::with_capacity(n);
    for k in 0..n {
        let br = &sys.branches[word[k] as usize];
        let (v, d) = br.lifted(points[k]);
        residual = residual.max(phase_distance(sys.topology, v.rem_euclid(1.0), points[(k + 1) % n]));
        log_derivs.push(d.abs().ln());
    }
    if !(residual <= POLISH_TOL) {
        return Err(Error::NoConvergence(Word::from(word).to_string()));
    }
    Ok(Some(PeriodicOrbit { word: Word::from(word), points, log_derivs, residual }))
}

/// The unique `x` with itinerary `word` and `f^n(x) = x`.
pub fn locate_periodic(sys: &SystemSpec, word: &[Symbol]) -> Result<f64> {
    periodic_orbit(sys, word)?.map(|o| o.points[0]).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "word {} codes a branch endpoint identified with another cylinder",
            Word::from(word)
        ))
    })
}

/// `S_n φ` along a periodic orbit given by its word and, for maps, its points.
pub fn birkhoff_sum(
    phi: &Potential,
    word: &[Symbol],
    points: Option<&[f64]>,
    log_derivs: Option<&[f64]>,
) -> Result<f64> {
    let n = word.len();
    match phi {
        Potential::Constant(c) => Ok(c * n as f64),
        Potential::Cylinder(t) => {
            let m = t.depth();
            let mut buf = vec![0 as Symbol; m];
            let mut s = 0.0;
            for i in 0..n {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = word[(i + j) % n];
                }
                s += t.value(&buf)?;
            }
            Ok(s)
        }
        Potential::Geometric { t } => {
            let l = log_derivs.ok_or(Error::MissingGeometricWeights)?;
            Ok(-t * l.iter().sum::<f64>())
        }
        Potential::Analytic(f) => {
            let p = points.ok_or(Error::NotAMap)?;
            Ok(p.iter().map(|&x| f.eval(x)).sum())
        }
    }
}

/// Exact finite reduction of the expansion condition on a periodic orbit.
///
/// With `L_j` the per-step log-expansion and `n` the period: if `λ₁ = mean(L) >= α` then
/// for `k = qn + r` the `k`-step growth from any orbit point is at least
/// `e^{qnλ₁}` times an `r`-step growth, so `min_{i<n, 1<=k<=n} e^{S_{i,k} - kα}` is the
/// worst case over all `k`; `ℓ_min` is the ceiling of its reciprocal.
pub fn certificate_from_logs(logs: &[f64], alpha: f64) -> ExpansionCertificate {
    let n = logs.len();
    let lyap = logs.iter().sum::<f64>() / n as f64;
    if n == 0 || lyap < alpha - LYAPUNOV_TOL {
        return ExpansionCertificate { alpha, ell_min: Ell::Infinite };
    }
    let mut prefix = Vec::with_capacity(2 * n + 1);
    prefix.push(0.0);
    for j in 0..2 * n {
        let p = prefix[j] + logs[j % n];
        prefix.push(p);
    }
    let mut deficit = f64::NEG_INFINITY;
    for i in 0..n {
        for k in 1..=n {
            let d = k as f64 * alpha - (prefix[i + k] - prefix[i]);
            deficit = deficit.max(d);
        }
    }
    ExpansionCertificate { alpha, ell_min: ell_from_deficit(deficit) }
}

/// `max(1, ceil(e^deficit))` with round-off slack.
pub(crate) fn ell_from_deficit(deficit: f64) -> Ell {
    let bound = deficit.exp() * (1.0 - CEIL_REL_TOL);
    if bound <= 1.0 {
        Ell::Finite(1)
    } else if bound >= u64::MAX as f64 {
        Ell::Finite(u64::MAX)
    } else {
        Ell::Finite(bound.ceil() as u64)
    }
}

/// Certificate for a record; records without expansion data get `ℓ_min = ∞`.
pub fn certify(record: &PeriodicPointRecord, alpha: f64) -> ExpansionCertificate {
    match &record.log_deriv_per_step {
        Some(l) => certificate_from_logs(l, alpha),
        None => ExpansionCertificate { alpha, ell_min: Ell::Infinite },
    }
}

fn make_record(sys: &SystemSpec, word: &[Symbol], potentials: &[Potential]) -> Result<Option<PeriodicPointRecord>> {
    let n = word.len() as f64;
    if sys.is_map() {
        let Some(orbit) = periodic_orbit(sys, word)? else {
            return Ok(None);
        };
        let birkhoff = potentials
            .iter()
            .map(|p| birkhoff_sum(p, word, Some(&orbit.points), Some(&orbit.log_derivs)))
            .collect::<Result<Vec<_>>>()?;
        let lyap = orbit.log_derivs.iter().sum::<f64>() / n;
        Ok(Some(PeriodicPointRecord {
            word: orbit.word,
            x: Some(orbit.points[0]),
            log_deriv_per_step: Some(orbit.log_derivs),
            lyapunov: Some(lyap),
            birkhoff,
            certificate: None,
        }))
    } else {
        let logs = sys
            .log_expansion
            .as_ref()
            .map(|w| word.iter().map(|&s| w[s as usize]).collect::<Vec<f64>>());
        let birkhoff = potentials
            .iter()
            .map(|p| birkhoff_sum(p, word, None, logs.as_deref()))
            .collect::<Result<Vec<_>>>()?;
        let lyapunov = logs.as_ref().map(|l| l.iter().sum::<f64>() / n);
        Ok(Some(PeriodicPointRecord {
            word: Word::from(word),
            x: None,
            log_deriv_per_step: logs,
            lyapunov,
            birkhoff,
            certificate: None,
        }))
    }
}

/// Validates `n` and the budget; returns the admissible-word count.
pub fn check_budget(sys: &SystemSpec, n: usize, budget: u128) -> Result<u128> {
    if n == 0 {
        return Err(Error::InvalidArgument("period n must be at least 1".into()));
    }
    let count = sys.transition.periodic_word_count(n);
    if count > budget {
        return Err(Error::BudgetExceeded { count, budget });
    }
    Ok(count)
}

/// Admissible prefixes used to split the word space into independent partitions.
fn partitions(sys: &SystemSpec, n: usize) -> Vec<Word> {
    let mut p = 0;
    while p < n && sys.transition.word_count(p) < 256 {
        p += 1;
    }
    if p == 0 {
        vec![Word::new(Vec::new())]
    } else {
        sys.transition.words(p)
    }
}

/// Streams every fixed point of `f^n` into per-partition accumulators.
///
/// Partitions are fixed-length word prefixes in lexicographic order, each folded
/// sequentially; the returned accumulators are in partition order, so merging them in
/// order is independent of the thread count.
pub fn fold_periodic_points<A, I, F>(
    sys: &SystemSpec,
    n: usize,
    potentials: &[Potential],
    budget: u128,
    init: I,
    fold: F,
) -> Result<Vec<A>>
where
    A: Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, PeriodicPointRecord) -> Result<()> + Sync,
{
    check_budget(sys, n, budget)?;
    if sys.is_map() {
        check_map_word(sys, &vec![0; n])?;
    }
    let parts = partitions(sys, n);
    parts
        .par_iter()
        .map(|prefix| {
            let mut acc = init();
            sys.transition.for_each_periodic_word(prefix.symbols(), n, &mut |w| {
                if let Some(rec) = make_record(sys, w, potentials)? {
                    fold(&mut acc, rec)?;
                }
                Ok(())
            })?;
            Ok(acc)
        })
        .collect()
}

/// All fixed points of `f^n` (every rotation), ordered lexicographically by word.
pub fn enumerate_fixed(
    sys: &SystemSpec,
    n: usize,
    potentials: &[Potential],
    budget: u128,
) -> Result<Vec<PeriodicPointRecord>> {
    let parts = fold_periodic_points(sys, n, potentials, budget, Vec::new, |acc, r| {
        acc.push(r);
        Ok(())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

pub(crate) fn check_alpha(sys: &SystemSpec, alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")));
    }
    if !sys.is_map() && sys.log_expansion.is_none() {
        return Err(Error::MissingGeometricWeights);
    }
    Ok(())
}

/// `EFix(f^n, α, ℓ)`: fixed points of `f^n` with finite `ℓ_min <= ℓ`; `ℓ = ∞` gives the
/// union over all finite `ℓ`.
pub fn efix(
    sys: &SystemSpec,
    n: usize,
    alpha: f64,
    ell: Ell,
    potentials: &[Potential],
    budget: u128,
) -> Result<Vec<PeriodicPointRecord>> {
    check_alpha(sys, alpha)?;
    let parts = fold_periodic_points(sys, n, potentials, budget, Vec::new, |acc, mut r| {
        let cert = certify(&r, alpha);
        if cert.ell_min.is_finite() && cert.ell_min <= ell {
            r.certificate = Some(cert);
            acc.push(r);
        }
        Ok(())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// Like [`enumerate_fixed`] but every record carries its certificate at `alpha`.
pub fn enumerate_certified(
    sys: &SystemSpec,
    n: usize,
    alpha: f64,
    potentials: &[Potential],
    budget: u128,
) -> Result<Vec<PeriodicPointRecord>> {
    check_alpha(sys, alpha)?;
    let parts = fold_periodic_points(sys, n, potentials, budget, Vec::new, |acc, mut r| {
        r.certificate = Some(certify(&r, alpha));
        acc.push(r);
        Ok(())
    })?;
    Ok(parts.into_iter().flatten().collect())
}

/// One periodic orbit represented by the rotation with the smallest word.
#[derive(Clone, Debug, PartialEq)]
pub struct OrbitClass {
    pub representative: PeriodicPointRecord,
    /// Primitive period `p`.
    pub period: usize,
    /// `n / p`: how many times the primitive word repeats.
    pub multiplicity: usize,
}

/// Collapses point records to one representative per orbit.
pub fn collapse_orbits(records: &[PeriodicPointRecord]) -> Vec<OrbitClass> {
    records
        .iter()
        .filter(|r| r.word == r.word.min_rotation())
        .map(|r| {
            let p = r.word.primitive_period();
            OrbitClass { representative: r.clone(), period: p, multiplicity: r.period() / p }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::CylinderTable;
    use std::f64::consts::LN_2;

    fn w(s: &[u8]) -> Vec<u8> {
        s.to_vec()
    }

    #[test]
    fn locate_examples() {
        let d = SystemSpec::doubling();
        let x = locate_periodic(&d, &w(&[0, 1, 0])).unwrap();
        assert!((x - 2.0 / 7.0).abs() < 1e-15, "{x}");
        assert_eq!(locate_periodic(&d, &w(&[0, 0, 0])).unwrap(), 0.0);
        assert!(periodic_orbit(&d, &w(&[1, 1, 1])).unwrap().is_none());

        // The right branch is [c, 1) with c + c^{3/2} = 1. Its lifted fixed point solves
        // x^{3/2} = 1, i.e. x = 1, which is identified with the neutral point 0, so the
        // word (1) codes no point of its own.
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let (mut a, mut b) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m.powf(1.5) - (1.0 - m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        assert!((mp.branches[1].lo - a).abs() < 1e-14);
        assert!(periodic_orbit(&mp, &w(&[1])).unwrap().is_none());
        assert!(locate_periodic(&mp, &w(&[1])).is_err());
        let o = periodic_orbit(&mp, &w(&[0, 1])).unwrap().unwrap();
        assert!(o.points[0] < a && o.points[1] >= a);
        assert_eq!(locate_periodic(&mp, &w(&[0, 0, 0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn inadmissible_and_sft_words() {
        let d = SystemSpec::doubling();
        assert!(matches!(locate_periodic(&d, &w(&[0, 2])), Err(Error::Inadmissible(_))));
        let g = SystemSpec::golden_mean(None);
        assert_eq!(locate_periodic(&g, &w(&[0, 1])), Err(Error::NotAMap));
        let t = SystemSpec::tent(1.5).unwrap();
        assert!(matches!(locate_periodic(&t, &w(&[0])), Err(Error::InvalidSystem(_))));
    }

    #[test]
    fn enumerate_examples() {
        let d = SystemSpec::doubling();
        let recs = enumerate_fixed(&d, 3, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(recs.len(), 7);
        let mut xs: Vec<f64> = recs.iter().map(|r| r.x.unwrap()).collect();
        xs.sort_by(f64::total_cmp);
        for (j, x) in xs.iter().enumerate() {
            assert!((x - j as f64 / 7.0).abs() < 1e-15);
        }

        let g = SystemSpec::golden_mean(None);
        assert_eq!(enumerate_fixed(&g, 4, &[], DEFAULT_BUDGET).unwrap().len(), 7);

        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let recs = enumerate_fixed(&mp, 1, &[], DEFAULT_BUDGET).unwrap();
        // degree-2 circle map: 2^n - 1 fixed points of f^n, the neutral one included
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].x, Some(0.0));
        assert_eq!(recs[0].lyapunov, Some(0.0));
        let recs = enumerate_fixed(&mp, 2, &[], DEFAULT_BUDGET).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs[1].lyapunov.unwrap() > 0.0);
    }

    #[test]
    fn record_invariants() {
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        for r in enumerate_fixed(&mp, 8, &[], DEFAULT_BUDGET).unwrap() {
            let l = r.log_deriv_per_step.as_ref().unwrap();
            let mean = l.iter().sum::<f64>() / l.len() as f64;
            assert!((mean - r.lyapunov.unwrap()).abs() < 1e-12);
            let o = periodic_orbit(&mp, r.word.symbols()).unwrap().unwrap();
            assert!(o.residual <= POLISH_TOL);
            // itinerary of the located point is the word
            let it = crate::systems::itinerary(&mp, r.x.unwrap(), r.period()).unwrap();
            assert_eq!(it, r.word);
        }
    }

    #[test]
    fn budget_is_enforced() {
        let d = SystemSpec::doubling();
        assert_eq!(
            enumerate_fixed(&d, 5, &[], 16),
            Err(Error::BudgetExceeded { count: 32, budget: 16 })
        );
        assert!(enumerate_fixed(&d, 0, &[], 16).is_err());
    }

    #[test]
    fn certificate_examples() {
        let d = SystemSpec::doubling();
        for r in enumerate_fixed(&d, 4, &[], DEFAULT_BUDGET).unwrap() {
            assert_eq!(certify(&r, 0.5).ell_min, Ell::Finite(1));
            assert_eq!(certify(&r, LN_2).ell_min, Ell::Finite(1));
            assert_eq!(certify(&r, 0.7).ell_min, Ell::Infinite);
        }
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let recs = enumerate_fixed(&mp, 1, &[], DEFAULT_BUDGET).unwrap();
        for alpha in [1e-6, 0.01, 0.5] {
            assert_eq!(certify(&recs[0], alpha).ell_min, Ell::Infinite);
        }
    }

    #[test]
    fn certificate_hand_computed() {
        // logs (0, 2), alpha = 0.5: worst window is k=1 at the zero step: e^{0.5} -> ceil 2
        let c = certificate_from_logs(&[0.0, 2.0], 0.5);
        assert_eq!(c.ell_min, Ell::Finite(2));
        // mean 1.0 < 1.5
        assert_eq!(certificate_from_logs(&[0.0, 2.0], 1.5).ell_min, Ell::Infinite);
    }

    #[test]
    fn efix_examples() {
        let d = SystemSpec::doubling();
        assert_eq!(efix(&d, 5, 0.5, Ell::Finite(1), &[], DEFAULT_BUDGET).unwrap().len(), 31);
        for ell in [1, 10, 1000] {
            assert!(efix(&d, 5, 1.0, Ell::Finite(ell), &[], DEFAULT_BUDGET).unwrap().is_empty());
        }
        assert!(efix(&d, 5, 1.0, Ell::Infinite, &[], DEFAULT_BUDGET).unwrap().is_empty());

        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let all = enumerate_fixed(&mp, 2, &[], DEFAULT_BUDGET).unwrap();
        let kept = efix(&mp, 2, 0.05, Ell::Finite(1000), &[], DEFAULT_BUDGET).unwrap();
        let dropped: Vec<_> = all.iter().filter(|r| !kept.iter().any(|k| k.word == r.word)).collect();
        assert_eq!(dropped.len(), 1);
        assert_eq!(dropped[0].word, Word::new(vec![0, 0]));
    }

    #[test]
    fn efix_requires_positive_alpha_and_weights() {
        let d = SystemSpec::doubling();
        assert!(efix(&d, 3, 0.0, Ell::Finite(1), &[], DEFAULT_BUDGET).is_err());
        let g = SystemSpec::golden_mean(None);
        assert_eq!(efix(&g, 3, 0.5, Ell::Finite(1), &[], DEFAULT_BUDGET), Err(Error::MissingGeometricWeights));
        let gw = SystemSpec::golden_mean(Some(LN_2));
        assert_eq!(efix(&gw, 4, 0.5, Ell::Finite(1), &[], DEFAULT_BUDGET).unwrap().len(), 7);
    }

    #[test]
    fn birkhoff_sums_on_records() {
        let d = SystemSpec::doubling();
        let cyl = Potential::Cylinder(CylinderTable::new(&d.transition, 1, vec![1.0, 0.0]).unwrap());
        let pots = [Potential::Constant(0.25), cyl, Potential::Geometric { t: 1.0 }];
        for r in enumerate_fixed(&d, 6, &pots, DEFAULT_BUDGET).unwrap() {
            assert!((r.birkhoff[0] - 1.5).abs() < 1e-15);
            assert_eq!(r.birkhoff[1], r.word.count(0) as f64);
            assert!((r.birkhoff[2] + 6.0 * LN_2).abs() < 1e-12);
        }
    }

    #[test]
    fn orbit_collapse() {
        let d = SystemSpec::doubling();
        let recs = enumerate_fixed(&d, 4, &[], DEFAULT_BUDGET).unwrap();
        let orbits = collapse_orbits(&recs);
        // 15 points: 0000, 0101(p=2), and 3 primitive orbits of period 4
        assert_eq!(orbits.len(), 5);
        let total: usize = orbits.iter().map(|o| o.period).sum();
        assert_eq!(total, 15);
        let two = orbits.iter().find(|o| o.representative.word == Word::new(vec![0, 1, 0, 1])).unwrap();
        assert_eq!((two.period, two.multiplicity), (2, 2));
    }

    #[test]
    fn ell_parsing() {
        assert_eq!("inf".parse::<Ell>().unwrap(), Ell::Infinite);
        assert_eq!("4".parse::<Ell>().unwrap(), Ell::Finite(4));
        assert!("0".parse::<Ell>().is_err());
        assert!(Ell::Finite(u64::MAX) < Ell::Infinite);
        let v: Vec<Ell> = serde_json::from_str("[1, \"inf\", 8]").unwrap();
        assert_eq!(v, vec![Ell::Finite(1), Ell::Infinite, Ell::Finite(8)]);
    }
}
