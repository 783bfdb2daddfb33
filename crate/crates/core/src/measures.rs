//! Finitely supported measures on periodic points, reference equilibrium states, and a
//! truncated weak* metric between them.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{MarkovMeasure, MarkovModel};
use crate::orbits::{efix, periodic_orbit, Ell};
use crate::systems::{
    cylinder_interval, evaluate_potential, sup_norm, to_cylinder, AnalyticFormula, CylinderTable, Location,
    Potential, SystemSpec,
};
use crate::thermo::LogSumExp;
use crate::word::{Symbol, Word};

/// Cylinder depth of the midpoint rule used to integrate non-cylinder functions against
/// reference measures.
pub const QUADRATURE_DEPTH: usize = 14;
const NORMALIZATION_TOL: f64 = 1e-12;

/// A periodic point carrying a probability weight.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Atom {
    /// Itinerary over one period (possibly a repeated primitive word).
    pub word: Word,
    pub x: Option<f64>,
    pub log_derivs: Option<Vec<f64>>,
    pub weight: f64,
}

impl Atom {
    /// The atom at `f^k` of this one.
    fn shifted(&self, sys: &SystemSpec, k: usize, weight: f64) -> Result<Atom> {
        let word = self.word.rotate(k);
        let x = match self.x {
            Some(_) => Some(
                periodic_orbit(sys, word.symbols())?
                    .ok_or_else(|| Error::InvalidArgument(format!("word {word} codes no periodic point")))?
                    .points[0],
            ),
            None => None,
        };
        let log_derivs = self.log_derivs.as_ref().map(|l| {
            let mut l = l.clone();
            let n = l.len();
            l.rotate_left(k % n.max(1));
            l
        });
        Ok(Atom { word, x, log_derivs, weight })
    }

    fn evaluate(&self, sys: &SystemSpec, psi: &Potential) -> Result<f64> {
        match psi {
            Potential::Constant(c) => Ok(*c),
            Potential::Cylinder(t) => t.value(&self.word.cyclic_prefix(0, t.depth())),
            Potential::Geometric { t } => {
                let l = self.log_derivs.as_ref().ok_or(Error::MissingGeometricWeights)?;
                Ok(-t * l[0])
            }
            Potential::Analytic(_) => {
                let x = self.x.ok_or(Error::NotAMap)?;
                evaluate_potential(psi, sys, Location::Point(x))
            }
        }
    }
}

/// How a measure was built.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    SigmaN { n: usize, alpha: f64, ell: Ell, potential_id: String },
    OmegaX { word: String },
    MuN { n: usize, base: String },
    Dirac { word: String },
    Reference { name: String },
}

/// Anything that can be integrated against potentials and has cylinder masses.
pub trait CylinderMeasure {
    fn cylinder_mass(&self, w: &[Symbol]) -> f64;
    fn integrate(&self, sys: &SystemSpec, psi: &Potential) -> Result<f64>;
    /// Kolmogorov-Sinai entropy, when known in closed form.
    fn entropy(&self) -> Option<f64> {
        None
    }
}

/// A probability measure on finitely many periodic points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedOrbitMeasure {
    pub atoms: Vec<Atom>,
    pub provenance: Provenance,
    /// `log A(E_n)` for `σ_n`.
    pub log_normalizer: Option<f64>,
}

impl WeightedOrbitMeasure {
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    fn check_normalized(self) -> Result<Self> {
        let t = self.total_weight();
        // naive summation error grows with the number of atoms
        let tol = NORMALIZATION_TOL + 4.0 * self.atoms.len() as f64 * f64::EPSILON;
        if (t - 1.0).abs() > tol {
            return Err(Error::InvalidArgument(format!("weights sum to {t}, not 1")));
        }
        Ok(self)
    }

    fn label(&self) -> String {
        match &self.provenance {
            Provenance::SigmaN { n, alpha, ell, potential_id } => format!("sigma_{n}(alpha={alpha},ell={ell},{potential_id})"),
            Provenance::OmegaX { word } => format!("omega({word})"),
            Provenance::MuN { n, base } => format!("mu_{n}({base})"),
            Provenance::Dirac { word } => format!("delta({word})"),
            Provenance::Reference { name } => name.clone(),
        }
    }
}

impl CylinderMeasure for WeightedOrbitMeasure {
    fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        self.atoms
            .iter()
            .filter(|a| {
                let s = a.word.symbols();
                !s.is_empty() && w.iter().enumerate().all(|(j, &c)| s[j % s.len()] == c)
            })
            .map(|a| a.weight)
            .sum()
    }

    fn integrate(&self, sys: &SystemSpec, psi: &Potential) -> Result<f64> {
        let mut s = 0.0;
        for a in &self.atoms {
            s += a.weight * a.evaluate(sys, psi)?;
        }
        Ok(s)
    }

    fn entropy(&self) -> Option<f64> {
        Some(0.0)
    }
}

/// `σ_n(EFix(f^n, α, ℓ))`: weights `exp S_nφ(x) / A(E_n)`.
pub fn sigma_n(
    sys: &SystemSpec,
    phi: &Potential,
    potential_id: &str,
    n: usize,
    alpha: f64,
    ell: Ell,
    budget: u128,
) -> Result<WeightedOrbitMeasure> {
    let recs = efix(sys, n, alpha, ell, std::slice::from_ref(phi), budget)?;
    if recs.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut lse = LogSumExp::default();
    for r in &recs {
        lse.push(r.birkhoff[0]);
    }
    let log_a = lse.log().expect("nonempty");
    let mut atoms: Vec<Atom> = recs
        .into_iter()
        .map(|r| Atom { weight: (r.birkhoff[0] - log_a).exp(), word: r.word, x: r.x, log_derivs: r.log_deriv_per_step })
        .collect();
    let total: f64 = atoms.iter().map(|a| a.weight).sum();
    atoms.iter_mut().for_each(|a| a.weight /= total);
    WeightedOrbitMeasure {
        atoms,
        provenance: Provenance::SigmaN { n, alpha, ell, potential_id: potential_id.to_string() },
        log_normalizer: Some(log_a),
    }
    .check_normalized()
}

fn atom_for_word(sys: &SystemSpec, word: &[Symbol]) -> Result<Atom> {
    if sys.is_map() {
        let o = periodic_orbit(sys, word)?
            .ok_or_else(|| Error::InvalidArgument(format!("word {} codes no periodic point", Word::from(word))))?;
        Ok(Atom { word: o.word, x: Some(o.points[0]), log_derivs: Some(o.log_derivs), weight: 1.0 })
    } else {
        if !sys.transition.is_cyclically_admissible(word) {
            return Err(Error::Inadmissible(Word::from(word).to_string()));
        }
        let logs = sys.log_expansion.as_ref().map(|w| word.iter().map(|&s| w[s as usize]).collect());
        Ok(Atom { word: Word::from(word), x: None, log_derivs: logs, weight: 1.0 })
    }
}

/// Point mass at the periodic point coded by `word`.
pub fn dirac(sys: &SystemSpec, word: &[Symbol]) -> Result<WeightedOrbitMeasure> {
    Ok(WeightedOrbitMeasure {
        atoms: vec![atom_for_word(sys, word)?],
        provenance: Provenance::Dirac { word: Word::from(word).to_string() },
        log_normalizer: None,
    })
}

/// `ω_x = (1/n)(δ_x + .. + δ_{f^{n-1} x})` for the periodic point coded by `word`.
pub fn omega_x(sys: &SystemSpec, word: &[Symbol]) -> Result<WeightedOrbitMeasure> {
    let mut m = mu_n_time_average(sys, &dirac(sys, word)?, word.len())?;
    m.provenance = Provenance::OmegaX { word: Word::from(word).to_string() };
    Ok(m)
}

/// `(1/n) Σ_{i<n} f^i_* ν`, with atoms at the same point merged.
pub fn mu_n_time_average(sys: &SystemSpec, nu: &WeightedOrbitMeasure, n: usize) -> Result<WeightedOrbitMeasure> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut merged: BTreeMap<Word, Atom> = BTreeMap::new();
    for a in &nu.atoms {
        for i in 0..n {
            let w = a.weight / n as f64;
            let key = a.word.rotate(i);
            if let Some(existing) = merged.get_mut(&key) {
                existing.weight += w;
            } else {
                merged.insert(key, a.shifted(sys, i, w)?);
            }
        }
    }
    WeightedOrbitMeasure {
        atoms: merged.into_values().collect(),
        provenance: Provenance::MuN { n, base: nu.label() },
        log_normalizer: None,
    }
    .check_normalized()
}

/// `∫ψ dμ`.
pub fn integrate(sys: &SystemSpec, mu: &dyn CylinderMeasure, psi: &Potential) -> Result<f64> {
    mu.integrate(sys, psi)
}

/// A reference equilibrium state: a Markov measure on the symbolic coding.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceMeasure {
    pub name: String,
    pub measure: MarkovMeasure,
}

impl ReferenceMeasure {
    /// Equilibrium state of a cylinder-type potential.
    pub fn gibbs(sys: &SystemSpec, phi: &Potential, name: &str) -> Result<Self> {
        Ok(ReferenceMeasure { name: name.to_string(), measure: MarkovModel::for_potential(sys, phi)?.gibbs()? })
    }

    /// Lebesgue measure as the equilibrium state of `-log|f'|` (piecewise-affine full-branch maps).
    pub fn lebesgue(sys: &SystemSpec) -> Result<Self> {
        if !sys.is_map() {
            return Err(Error::NotAMap);
        }
        Self::gibbs(sys, &Potential::Geometric { t: 1.0 }, "lebesgue")
    }

    /// Measure of maximal entropy.
    pub fn parry(sys: &SystemSpec) -> Result<Self> {
        Ok(ReferenceMeasure { name: "parry".into(), measure: MarkovMeasure::parry(&sys.transition)? })
    }

    pub fn bernoulli(sys: &SystemSpec, p: &[f64]) -> Result<Self> {
        if !sys.transition.is_full() || p.len() != sys.alphabet_size() {
            return Err(Error::InvalidArgument("Bernoulli reference needs a full shift of matching size".into()));
        }
        Ok(ReferenceMeasure { name: "bernoulli".into(), measure: MarkovMeasure::bernoulli(p)? })
    }
}

impl CylinderMeasure for ReferenceMeasure {
    fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        self.measure.cylinder_mass(w)
    }

    fn entropy(&self) -> Option<f64> {
        Some(self.measure.entropy())
    }

    fn integrate(&self, sys: &SystemSpec, psi: &Potential) -> Result<f64> {
        if let Some(t) = to_cylinder(sys, psi) {
            return Ok(self.measure.integrate_table(&t));
        }
        if !sys.is_map() {
            return Err(Error::NotAMap);
        }
        // midpoint rule on the depth-QUADRATURE_DEPTH cylinders
        let mut s = 0.0;
        for w in sys.transition.words(QUADRATURE_DEPTH) {
            let mass = self.measure.cylinder_mass(w.symbols());
            if mass == 0.0 {
                continue;
            }
            let (a, b) = cylinder_interval(sys, w.symbols())?;
            s += mass * evaluate_potential(psi, sys, Location::Point(0.5 * (a + b)))?;
        }
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TestFunction {
    pub name: String,
    pub potential: Potential,
    pub sup_norm: f64,
}

/// Ordered test functions `ψ_1, .., ψ_M` for the truncated metric.
#[derive(Clone, Debug, PartialEq)]
pub struct TestFunctionFamily {
    pub members: Vec<TestFunction>,
}

impl TestFunctionFamily {
    /// Indicators of all admissible cylinders of depth 1 to 4, then `x ↦ x` on maps.
    pub fn default_for(sys: &SystemSpec) -> Result<Self> {
        let mut members = Vec::new();
        for depth in 1..=4 {
            for w in sys.transition.words(depth) {
                let t = CylinderTable::indicator(&sys.transition, w.symbols())?;
                members.push(TestFunction { name: format!("1[{w}]"), potential: Potential::Cylinder(t), sup_norm: 1.0 });
            }
        }
        if sys.is_map() {
            members.push(TestFunction {
                name: "x".into(),
                potential: Potential::Analytic(AnalyticFormula::Identity),
                sup_norm: 1.0,
            });
        }
        Ok(TestFunctionFamily { members })
    }

    pub fn new(sys: &SystemSpec, named: Vec<(String, Potential)>) -> Result<Self> {
        let members = named
            .into_iter()
            .map(|(name, potential)| {
                let sup_norm = sup_norm(sys, &potential)?;
                if !(sup_norm > 0.0) {
                    return Err(Error::InvalidPotential(format!("test function {name} vanishes identically")));
                }
                Ok(TestFunction { name, potential, sup_norm })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TestFunctionFamily { members })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn truncated(&self, m: usize) -> Self {
        TestFunctionFamily { members: self.members[..m.min(self.members.len())].to_vec() }
    }

    /// `Σ_{i > M} 2 · 2^{-i}`: the largest contribution of omitted terms.
    pub fn truncation_bound(&self) -> f64 {
        2f64.powi(1 - self.members.len() as i32)
    }
}

/// `Σ_i |∫ψ_i dμ - ∫ψ_i dν| / (2^i ‖ψ_i‖)`, `i = 1..M`.
pub fn weak_star_distance(
    sys: &SystemSpec,
    mu: &dyn CylinderMeasure,
    nu: &dyn CylinderMeasure,
    family: &TestFunctionFamily,
) -> Result<f64> {
    let mut d = 0.0;
    let mut scale = 1.0;
    for f in &family.members {
        scale *= 0.5;
        let diff = (mu.integrate(sys, &f.potential)? - nu.integrate(sys, &f.potential)?).abs();
        d += scale * diff / f.sup_norm;
    }
    Ok(d)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BowenRow {
    pub n: usize,
    pub ell: Ell,
    /// `log A(E_n)`; absent when `E_n` is empty.
    pub log_a: Option<f64>,
    pub distance: Option<f64>,
    pub integrals: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BowenReport {
    pub reference: String,
    pub test_functions: Vec<String>,
    pub reference_integrals: Vec<f64>,
    pub rows: Vec<BowenRow>,
    /// Distances strictly decrease along the schedule from `n = DECREASE_FROM` on.
    pub decreasing: bool,
    pub truncation_bound: f64,
}

pub const DECREASE_FROM: usize = 8;

/// `(n, ℓ)` pairs with `n` increasing by one and `ℓ` doubling at each step.
pub fn diagonal_schedule(n_min: usize, n_max: usize, ell0: u64) -> Vec<(usize, Ell)> {
    (n_min..=n_max)
        .enumerate()
        .map(|(i, n)| (n, Ell::Finite(ell0.saturating_mul(1u64.checked_shl(i as u32).unwrap_or(u64::MAX)).max(1))))
        .collect()
}

/// Weak* distances from `σ_n(EFix(f^n, α, ℓ))` to `reference` along a schedule.
#[allow(clippy::too_many_arguments)]
pub fn bowen_convergence_report(
    sys: &SystemSpec,
    phi: &Potential,
    potential_id: &str,
    alpha: f64,
    schedule: &[(usize, Ell)],
    reference: &ReferenceMeasure,
    family: &TestFunctionFamily,
    budget: u128,
) -> Result<BowenReport> {
    let reference_integrals =
        family.members.iter().map(|f| reference.integrate(sys, &f.potential)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(schedule.len());
    for &(n, ell) in schedule {
        match sigma_n(sys, phi, potential_id, n, alpha, ell, budget) {
            Ok(s) => {
                let integrals =
                    family.members.iter().map(|f| s.integrate(sys, &f.potential)).collect::<Result<Vec<_>>>()?;
                let mut d = 0.0;
                let mut scale = 1.0;
                for ((f, a), b) in family.members.iter().zip(&integrals).zip(&reference_integrals) {
                    scale *= 0.5;
                    d += scale * (a - b).abs() / f.sup_norm;
                }
                rows.push(BowenRow { n, ell, log_a: s.log_normalizer, distance: Some(d), integrals });
            }
            Err(Error::EmptySet) => rows.push(BowenRow { n, ell, log_a: None, distance: None, integrals: vec![] }),
            Err(e) => return Err(e),
        }
    }
    let tail: Vec<f64> = rows.iter().filter(|r| r.n >= DECREASE_FROM).filter_map(|r| r.distance).collect();
    let decreasing = tail.windows(2).all(|w| w[1] < w[0]);
    Ok(BowenReport {
        reference: reference.name.clone(),
        test_functions: family.members.iter().map(|f| f.name.clone()).collect(),
        reference_integrals,
        rows,
        decreasing,
        truncation_bound: family.truncation_bound(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpandingVerdict {
    pub per_atom: Vec<bool>,
    /// `(1/(q p)) Σ_{j<p} log|(f^q)'(f^j x)|` per atom.
    pub exponents: Vec<f64>,
    pub all: bool,
}

/// Whether every atom's orbit has `q`-step expansion exponent at least `beta`.
pub fn f_expanding_test(mu: &WeightedOrbitMeasure, q: usize, beta: f64) -> Result<ExpandingVerdict> {
    if q == 0 {
        return Err(Error::InvalidArgument("q must be at least 1".into()));
    }
    let mut per_atom = Vec::with_capacity(mu.atoms.len());
    let mut exponents = Vec::with_capacity(mu.atoms.len());
    for a in &mu.atoms {
        let l = a.log_derivs.as_ref().ok_or(Error::NotAMap)?;
        let p = l.len();
        let mut s = 0.0;
        for j in 0..p {
            for k in 0..q {
                s += l[(j + k) % p];
            }
        }
        let e = s / (q * p) as f64;
        exponents.push(e);
        per_atom.push(e >= beta);
    }
    let all = per_atom.iter().all(|&b| b);
    Ok(ExpandingVerdict { per_atom, exponents, all })
}
