//! Rate functions as concave duals of pressure, generalized entropy, and large-deviation
//! counts over expanding periodic points.

use std::collections::HashMap;

use num_bigint::BigUint;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::CylinderMeasure;
use crate::oracle::legendre::tilted;
use crate::oracle::{
    binomial_count, deviates, exact_pressure, legendre_endpoint, legendre_rate, FreqCondition, MarkovModel,
    PressureMethod,
};
use crate::orbits::{certify, check_alpha, fold_periodic_points, Ell};
use crate::systems::{to_cylinder, CylinderTable, Potential, SystemSpec};
use crate::word::{TransitionMatrix, Word};

/// Default box bound on dual coefficients.
pub const DEFAULT_BOX: f64 = 30.0;
/// Projected-gradient norm at which the dual ascent stops.
pub const GRADIENT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 10_000;
const ARMIJO: f64 = 1e-4;
/// Evaluations of the dual differ by pressure round-off; steps within this of the
/// Armijo line are accepted.
const DUAL_NOISE: f64 = 1e-12;
const RANGE_TOL: f64 = 1e-12;

/// Depth-`m` cylinder potentials with coefficients in `[-B, B]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualSearchSpace {
    depth: usize,
    bound: f64,
    words: Vec<Word>,
}

impl DualSearchSpace {
    pub fn new(transition: &TransitionMatrix, depth: usize, bound: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidArgument("dual depth must be at least 1".into()));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return Err(Error::InvalidArgument(format!("box bound must be positive, got {bound}")));
        }
        Ok(DualSearchSpace { depth, bound, words: transition.words(depth) })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn dimension(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }
}

fn common_table(sys: &SystemSpec, a: &Potential, b: &Potential) -> Result<CylinderTable> {
    let (Some(ta), Some(tb)) = (to_cylinder(sys, a), to_cylinder(sys, b)) else {
        return Err(Error::OracleUnavailable("the sum needs two cylinder-type potentials".into()));
    };
    ta.plus(&tb, &sys.transition)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QValue {
    pub value: f64,
    #[serde(flatten)]
    pub method: PressureMethod,
}

/// `Q_φ(ψ) = P_top(φ + ψ) - P_top(φ)`.
pub fn q_functional(sys: &SystemSpec, phi: &Potential, psi: &Potential) -> Result<QValue> {
    let base = exact_pressure(sys, phi)?;
    if let Potential::Constant(c) = psi {
        return Ok(QValue { value: *c, method: base.method });
    }
    let sum = exact_pressure(sys, &Potential::Cylinder(common_table(sys, phi, psi)?))?;
    Ok(QValue { value: sum.value - base.value, method: sum.method })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateReport {
    pub depth: usize,
    pub bound: f64,
    /// `max G` over the search space: a lower bound on `I_φ(μ)`.
    pub i_lower: f64,
    pub words: Vec<String>,
    pub psi_star: Vec<f64>,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// `ĥ` upper approximation, for generalized-entropy runs.
    pub h_hat: Option<f64>,
    /// `P(φ) - h_μ - ∫φ dμ` when the entropy of `μ` is known.
    pub oracle: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AscentOptions {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for AscentOptions {
    fn default() -> Self {
        AscentOptions { max_iter: DEFAULT_MAX_ITER, tol: GRADIENT_TOL }
    }
}

/// `G(ψ) = ∫ψ dμ - Q_φ(ψ)` on a depth-`m` search space, with its exact gradient.
struct Dual<'a> {
    model: MarkovModel,
    phi_edges: Vec<f64>,
    coord: Vec<usize>,
    target: Vec<f64>,
    p_phi: f64,
    space: &'a DualSearchSpace,
    transition: &'a TransitionMatrix,
}

impl<'a> Dual<'a> {
    fn new(sys: &'a SystemSpec, phi: &Potential, mu: &dyn CylinderMeasure, space: &'a DualSearchSpace) -> Result<Self> {
        let table = to_cylinder(sys, phi)
            .ok_or_else(|| Error::OracleUnavailable("the rate function needs a cylinder-type potential".into()))?;
        let depth = table.depth().max(space.depth).max(2);
        let model = MarkovModel::from_cylinder(&sys.transition, &table.lift(&sys.transition, depth)?)?;
        let phi_edges: Vec<f64> = model.edges().iter().map(|e| e.log_weight).collect();
        let index: HashMap<&[u8], usize> = space.words.iter().enumerate().map(|(i, w)| (w.symbols(), i)).collect();
        let coord = model.edges().iter().map(|e| index[&e.word.symbols()[..space.depth]]).collect();
        let target = space.words.iter().map(|w| mu.cylinder_mass(w.symbols())).collect();
        let p_phi = model.pressure()?;
        Ok(Dual { model, phi_edges, coord, target, p_phi, space, transition: &sys.transition })
    }

    fn value_grad(&self, psi: &[f64]) -> Result<(f64, Vec<f64>)> {
        let w: Vec<f64> = self.phi_edges.iter().zip(&self.coord).map(|(p, &c)| p + psi[c]).collect();
        let tilted = self.model.with_weights(&w)?;
        let p = tilted.pressure()?;
        let gibbs = tilted.gibbs()?.word_masses(self.transition, self.space.depth);
        let lin: f64 = psi.iter().zip(&self.target).map(|(a, b)| a * b).sum();
        let grad = self.target.iter().zip(&gibbs).map(|(a, b)| a - b).collect();
        Ok((lin - (p - self.p_phi), grad))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn projected_step(x: &[f64], g: &[f64], s: f64, bound: f64) -> Vec<f64> {
    x.iter().zip(g).map(|(a, b)| (a + s * b).clamp(-bound, bound)).collect()
}

fn projected_gradient_norm(x: &[f64], g: &[f64], bound: f64) -> f64 {
    projected_step(x, g, 1.0, bound).iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// Lower bound on `I_φ(μ)` by box-constrained projected gradient ascent on the concave
/// dual, with Barzilai-Borwein steps and Armijo backtracking.
pub fn rate_function(
    sys: &SystemSpec,
    phi: &Potential,
    mu: &dyn CylinderMeasure,
    space: &DualSearchSpace,
    opts: AscentOptions,
) -> Result<RateReport> {
    let dual = Dual::new(sys, phi, mu, space)?;
    let b = space.bound;
    let mut x = vec![0.0; space.dimension()];
    let (mut f, mut g) = dual.value_grad(&x)?;
    let mut step = 1.0;
    let mut iterations = 0;
    loop {
        let pg = projected_gradient_norm(&x, &g, b);
        if pg <= opts.tol {
            let oracle = match mu.entropy() {
                Some(h) => Some(dual.p_phi - h - mu.integrate(sys, phi)?),
                None => None,
            };
            return Ok(RateReport {
                depth: space.depth,
                bound: b,
                i_lower: f,
                words: space.words.iter().map(|w| w.to_string()).collect(),
                psi_star: x,
                gradient_norm: pg,
                iterations,
                h_hat: None,
                oracle,
            });
        }
        if iterations >= opts.max_iter {
            return Err(Error::NonConvergence { iterations, partial: f });
        }
        iterations += 1;
        let mut s = step;
        let mut accepted = None;
        for _ in 0..60 {
            let xn = projected_step(&x, &g, s, b);
            let d: Vec<f64> = xn.iter().zip(&x).map(|(a, c)| a - c).collect();
            let (fv, gv) = dual.value_grad(&xn)?;
            if fv >= f + ARMIJO * dot(&g, &d) - DUAL_NOISE * (1.0 + f.abs()) {
                accepted = Some((xn, fv, gv));
                break;
            }
            s *= 0.5;
        }
        let Some((xn, fv, gv)) = accepted else {
            return Err(Error::NonConvergence { iterations, partial: f });
        };
        let sx: Vec<f64> = xn.iter().zip(&x).map(|(a, c)| a - c).collect();
        let sg: Vec<f64> = gv.iter().zip(&g).map(|(a, c)| a - c).collect();
        let curv = -dot(&sx, &sg);
        step = if curv > 0.0 { (dot(&sx, &sx) / curv).clamp(1e-8, 1e8) } else { 1.0 };
        x = xn;
        f = fv;
        g = gv;
    }
}

/// [`rate_function`] at each depth in `depths`, to exhibit stabilization in `m`.
pub fn rate_refinement(
    sys: &SystemSpec,
    phi: &Potential,
    mu: &dyn CylinderMeasure,
    depths: &[usize],
    bound: f64,
    opts: AscentOptions,
) -> Result<Vec<RateReport>> {
    depths
        .iter()
        .map(|&m| rate_function(sys, phi, mu, &DualSearchSpace::new(&sys.transition, m, bound)?, opts))
        .collect()
}

/// `ĥ_ν = -max_ψ (∫ψ dν - P_top(ψ)) = h_top - I_0(ν)`, over the search space; restricting
/// `ψ` can only raise the value, so it is an upper approximation.
pub fn generalized_entropy(
    sys: &SystemSpec,
    nu: &dyn CylinderMeasure,
    space: &DualSearchSpace,
    opts: AscentOptions,
) -> Result<RateReport> {
    let zero = Potential::zero();
    let mut r = rate_function(sys, &zero, nu, space, opts)?;
    let h_top = exact_pressure(sys, &zero)?.value;
    r.h_hat = Some(h_top - r.i_lower);
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdCount {
    pub n: usize,
    /// Points of `EFix(f^n, α, ℓ)` whose Birkhoff average deviates from `v` by at least `δ`.
    pub count: u128,
    /// `(1/n) log max(count, 1)`.
    pub rate: f64,
    /// `card EFix(f^n, α, ℓ)`.
    pub efix_size: u128,
}

/// Exact count of `x ∈ EFix(f^n, α, ℓ)` with `|S_nφ(x)/n - v| >= δ`.
#[allow(clippy::too_many_arguments)]
pub fn ld_count(
    sys: &SystemSpec,
    phi: &Potential,
    v: f64,
    delta: f64,
    alpha: f64,
    ell: Ell,
    n: usize,
    budget: u128,
) -> Result<LdCount> {
    Ok(ld_counts(sys, phi, v, &[delta], alpha, ell, n, budget)?.remove(0))
}

/// [`ld_count`] for several `δ` from one enumeration of `EFix(f^n, α, ℓ)`.
#[allow(clippy::too_many_arguments)]
pub fn ld_counts(
    sys: &SystemSpec,
    phi: &Potential,
    v: f64,
    deltas: &[f64],
    alpha: f64,
    ell: Ell,
    n: usize,
    budget: u128,
) -> Result<Vec<LdCount>> {
    check_alpha(sys, alpha)?;
    if let Some(d) = deltas.iter().find(|d| !(**d >= 0.0)) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {d}")));
    }
    let k = deltas.len();
    let parts = fold_periodic_points(sys, n, std::slice::from_ref(phi), budget, || (vec![0u128; k], 0u128), |acc, r| {
        let cert = certify(&r, alpha);
        if cert.ell_min.is_finite() && cert.ell_min <= ell {
            acc.1 += 1;
            let mean = r.birkhoff[0] / n as f64;
            for (c, &d) in acc.0.iter_mut().zip(deltas) {
                if deviates(mean, v, d) {
                    *c += 1;
                }
            }
        }
        Ok(())
    })?;
    let mut counts = vec![0u128; k];
    let mut efix_size = 0;
    for (c, e) in parts {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        efix_size += e;
    }
    Ok(counts
        .into_iter()
        .map(|count| LdCount { n, count, rate: (count.max(1) as f64).ln() / n as f64, efix_size })
        .collect())
}

/// The binomial count of binary `n`-words whose 0-frequency deviates from `center` by at
/// least `delta`, minus the word `1ⁿ` when it qualifies.
///
/// Counting rule for the doubling map: `1ⁿ` would code the point `1`, which is the
/// fixed point `0` (already coded by `0ⁿ`), so it is not a fixed point of its own and
/// `card Fix(f^n) = 2ⁿ - 1`.
pub fn doubling_deviation_count(n: usize, center: f64, delta: f64) -> BigUint {
    let total = binomial_count(n, FreqCondition::Deviation { center, delta });
    if deviates(0.0, center, delta) {
        total - 1u32
    } else {
        total
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LdBound {
    /// `sup{h_ν : |∫φ dν - v| >= δ}`.
    pub value: f64,
    /// Constrained entropy on the side `∫φ dν >= v + δ`; absent when unachievable.
    pub upper_side: Option<f64>,
    pub lower_side: Option<f64>,
    /// Mean of `φ` under the measure of maximal entropy.
    pub unconstrained_mean: f64,
}

/// Right side of the large-deviation upper bound, through the Legendre transform of
/// `t ↦ P_top(tφ)`.
///
/// The constrained entropy `H(c) = sup{h_ν : ∫φ dν = c}` is concave in `c` with its
/// maximum at the unconstrained mean `m₀`, so `sup_{c >= v+δ} H(c) = H(max(v+δ, m₀))`,
/// and symmetrically below.
pub fn ld_bound(sys: &SystemSpec, phi: &Potential, v: f64, delta: f64) -> Result<LdBound> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be nonnegative, got {delta}")));
    }
    let table = to_cylinder(sys, phi)
        .ok_or_else(|| Error::OracleUnavailable("the Legendre route needs a cylinder-type potential".into()))?;
    let depth = table.depth().max(2);
    let zero = CylinderTable::from_fn(&sys.transition, depth, |_| 0.0)?;
    let model = MarkovModel::from_cylinder(&sys.transition, &zero)?;
    let g = model.edge_values(&table)?;
    let (min, max) = model.mean_range(&g)?;
    let (_, m0) = tilted(&model, &g, 0.0)?;
    let side = |c: f64, upper: bool| -> Result<Option<f64>> {
        let (beyond, at_edge) = if upper {
            (c > max + RANGE_TOL, c >= max - RANGE_TOL)
        } else {
            (c < min - RANGE_TOL, c <= min + RANGE_TOL)
        };
        if beyond {
            Ok(None)
        } else if at_edge {
            legendre_endpoint(&model, &g, c.clamp(min, max), upper).map(Some)
        } else {
            legendre_rate(&model, &g, c).map(|l| Some(l.value))
        }
    };
    let upper_side = side((v + delta).max(m0), true)?;
    let lower_side = side((v - delta).min(m0), false)?;
    let value = match (upper_side, lower_side) {
        (None, None) => return Err(Error::BoundIsMinusInfinity),
        (a, b) => a.unwrap_or(f64::NEG_INFINITY).max(b.unwrap_or(f64::NEG_INFINITY)),
    };
    Ok(LdBound { value, upper_side, lower_side, unconstrained_mean: m0 })
}
