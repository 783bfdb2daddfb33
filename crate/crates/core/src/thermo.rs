//! Periodic-orbit pressure: the partition sums `Q_EP` over expanding periodic points,
//! their growth rates `P_EP`, the gap `α(φ)`, and the low-variation test.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::{self, OraclePressure};
use crate::orbits::{certify, check_budget, fold_periodic_points, Ell};
use crate::systems::{potential_extremum, Extremum, Potential, SystemSpec};

/// Streaming `log Σ e^{v_i}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
    count: u128,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp { max: f64::NEG_INFINITY, sum: 0.0, count: 0 }
    }
}

impl LogSumExp {
    pub fn push(&mut self, v: f64) {
        self.count += 1;
        if v > self.max {
            self.sum = self.sum * (self.max - v).exp() + 1.0;
            self.max = v;
        } else {
            self.sum += (v - self.max).exp();
        }
    }

    pub fn merge(&mut self, other: &LogSumExp) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let m = self.max.max(other.max);
        self.sum = self.sum * (self.max - m).exp() + other.sum * (other.max - m).exp();
        self.max = m;
        self.count += other.count;
    }

    pub fn count(&self) -> u128 {
        self.count
    }

    /// `None` for the empty sum.
    pub fn log(&self) -> Option<f64> {
        (self.count > 0).then(|| self.max + self.sum.ln())
    }
}

/// `Q_EP(φ, α, ℓ, n)` in log form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QepValue {
    pub log_value: f64,
    /// True when `EFix` was empty and `exp(n min φ)` was used.
    pub fallback: bool,
    /// `card EFix(f^n, α, ℓ)`.
    pub count: u128,
}

impl QepValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("alpha must be positive, got {alpha}")))
    }
}

/// `Q_EP` at one period for every `ℓ` in `ells`, from a single enumeration.
pub fn q_ep_multi(
    sys: &SystemSpec,
    phi: &Potential,
    alpha: f64,
    ells: &[Ell],
    n: usize,
    budget: u128,
) -> Result<Vec<QepValue>> {
    check_alpha(alpha)?;
    check_budget(sys, n, budget)?;
    if !sys.is_map() && sys.log_expansion.is_none() {
        return Err(Error::MissingGeometricWeights);
    }
    let parts = fold_periodic_points(
        sys,
        n,
        std::slice::from_ref(phi),
        budget,
        || vec![LogSumExp::default(); ells.len()],
        |acc, rec| {
            let cert = certify(&rec, alpha);
            if cert.ell_min.is_finite() {
                for (a, &ell) in acc.iter_mut().zip(ells) {
                    if cert.ell_min <= ell {
                        a.push(rec.birkhoff[0]);
                    }
                }
            }
            Ok(())
        },
    )?;
    let mut total = vec![LogSumExp::default(); ells.len()];
    for p in &parts {
        for (t, a) in total.iter_mut().zip(p) {
            t.merge(a);
        }
    }
    let mut min_phi = None;
    total
        .iter()
        .map(|t| match t.log() {
            Some(v) => Ok(QepValue { log_value: v, fallback: false, count: t.count() }),
            None => {
                let m = match min_phi {
                    Some(m) => m,
                    None => {
                        let m = potential_extremum(sys, phi, Extremum::Min)?;
                        min_phi = Some(m);
                        m
                    }
                };
                Ok(QepValue { log_value: n as f64 * m, fallback: true, count: 0 })
            }
        })
        .collect()
}

/// `Σ_{x ∈ EFix(f^n, α, ℓ)} exp S_nφ(x)`, or `exp(n min φ)` when the set is empty.
pub fn q_ep(sys: &SystemSpec, phi: &Potential, alpha: f64, ell: Ell, n: usize, budget: u128) -> Result<QepValue> {
    Ok(q_ep_multi(sys, phi, alpha, &[ell], n, budget)?[0])
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureRow {
    pub n: usize,
    pub ell: Ell,
    pub log_q_ep: f64,
    pub q_ep: f64,
    pub rate: f64,
    pub count: u128,
    pub fallback: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EllEstimate {
    pub ell: Ell,
    /// Largest rate over the tail `n > 2 n_max / 3`.
    pub p_ep: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureReport {
    pub alpha: f64,
    pub n_max: usize,
    pub rows: Vec<PressureRow>,
    pub p_ep_per_ell: Vec<EllEstimate>,
    /// Estimate at the largest `ℓ`.
    pub p_ep_limit: f64,
    pub monotone_in_ell: bool,
    /// `(n, ℓ, ℓ')` with `ℓ < ℓ'` but `Q_EP` smaller at `ℓ'` (both sets nonempty).
    pub monotonicity_violations: Vec<(usize, Ell, Ell)>,
    /// Least-squares slope of rate against `1/n` over the tail, at the largest `ℓ`.
    pub tail_slope: f64,
    pub tail_start: usize,
    pub extrapolation: &'static str,
}

pub const EXTRAPOLATION_CONVENTION: &str =
    "per-ell maximum of rates over n > 2*n_max/3, reported at the largest ell";

/// Rows for `n = 1..=n_max` and every `ℓ`, with the tail-maximum convention.
pub fn p_ep(
    sys: &SystemSpec,
    phi: &Potential,
    alpha: f64,
    ells: &[Ell],
    n_max: usize,
    budget: u128,
) -> Result<PressureReport> {
    if ells.is_empty() || ells.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("ell list must be nonempty and strictly ascending".into()));
    }
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    check_budget(sys, n_max, budget)?;
    let mut rows = Vec::with_capacity(n_max * ells.len());
    let mut violations = Vec::new();
    for n in 1..=n_max {
        let qs = q_ep_multi(sys, phi, alpha, ells, n, budget)?;
        for i in 1..qs.len() {
            if !qs[i - 1].fallback && !qs[i].fallback && qs[i].log_value < qs[i - 1].log_value {
                violations.push((n, ells[i - 1], ells[i]));
            }
        }
        for (q, &ell) in qs.iter().zip(ells) {
            rows.push(PressureRow {
                n,
                ell,
                log_q_ep: q.log_value,
                q_ep: q.value(),
                rate: q.log_value / n as f64,
                count: q.count,
                fallback: q.fallback,
            });
        }
    }
    let tail_start = 2 * n_max / 3 + 1;
    let p_ep_per_ell: Vec<EllEstimate> = ells
        .iter()
        .map(|&ell| EllEstimate {
            ell,
            p_ep: rows
                .iter()
                .filter(|r| r.ell == ell && r.n >= tail_start)
                .map(|r| r.rate)
                .fold(f64::NEG_INFINITY, f64::max),
        })
        .collect();
    let monotone_in_ell = violations.is_empty() && p_ep_per_ell.windows(2).all(|w| w[0].p_ep <= w[1].p_ep);
    let last = *ells.last().expect("nonempty");
    let tail: Vec<(f64, f64)> =
        rows.iter().filter(|r| r.ell == last && r.n >= tail_start).map(|r| (1.0 / r.n as f64, r.rate)).collect();
    Ok(PressureReport {
        alpha,
        n_max,
        p_ep_limit: p_ep_per_ell.last().expect("nonempty").p_ep,
        p_ep_per_ell,
        rows,
        monotone_in_ell,
        monotonicity_violations: violations,
        tail_slope: slope(&tail),
        tail_start,
        extrapolation: EXTRAPOLATION_CONVENTION,
    })
}

fn slope(points: &[(f64, f64)]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Where `P_top(φ)` came from.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PressureSource {
    Oracle(OraclePressure),
    /// A periodic-orbit estimate supplied by the caller.
    Hint { value: f64 },
}

impl PressureSource {
    pub fn value(&self) -> f64 {
        match self {
            PressureSource::Oracle(p) => p.value,
            PressureSource::Hint { value } => *value,
        }
    }
}

fn top_pressure(sys: &SystemSpec, phi: &Potential, hint: Option<f64>) -> Result<(PressureSource, Option<String>)> {
    match oracle::pressure(sys, phi) {
        Ok(p) => Ok((PressureSource::Oracle(p), None)),
        Err(Error::OracleUnavailable(reason)) => match hint {
            Some(value) => Ok((
                PressureSource::Hint { value },
                Some(format!("oracle unavailable ({reason}); using the supplied P_EP estimate")),
            )),
            None => Err(Error::OracleUnavailable(reason)),
        },
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaReport {
    pub alpha: f64,
    pub p_top: PressureSource,
    /// Largest periodic-orbit average `(1/n) S_nφ` for `n <= n_max`.
    pub b_max: f64,
    pub b_max_word: String,
    /// `b_max` only bounds the ergodic supremum from below, so `alpha` is an upper estimate.
    pub b_max_is_lower_bound: bool,
    pub warning: Option<String>,
}

/// `α(φ) = P_top(φ) - sup_ν ∫φ dν`, the supremum estimated over periodic orbits.
pub fn alpha_of_phi(
    sys: &SystemSpec,
    phi: &Potential,
    n_max: usize,
    pressure_hint: Option<f64>,
    budget: u128,
) -> Result<AlphaReport> {
    let (p_top, warning) = top_pressure(sys, phi, pressure_hint)?;
    let mut best = f64::NEG_INFINITY;
    let mut best_word = String::new();
    for n in 1..=n_max {
        let parts = fold_periodic_points(
            sys,
            n,
            std::slice::from_ref(phi),
            budget,
            || (f64::NEG_INFINITY, String::new()),
            |acc, rec| {
                let avg = rec.birkhoff[0] / n as f64;
                if avg > acc.0 {
                    *acc = (avg, rec.word.to_string());
                }
                Ok(())
            },
        )?;
        for (v, w) in parts {
            if v > best {
                best = v;
                best_word = w;
            }
        }
    }
    Ok(AlphaReport {
        alpha: p_top.value() - best,
        p_top,
        b_max: best,
        b_max_word: best_word,
        b_max_is_lower_bound: true,
        warning,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LowVariation {
    pub holds: bool,
    /// `P_top(φ) - ρ h_top - max φ`.
    pub margin: f64,
    pub p_top: PressureSource,
    pub h_top: f64,
    pub max_phi: f64,
    pub warning: Option<String>,
}

/// Strict margin below which the inequality is treated as failing (equality cases).
pub const LOW_VARIATION_TOL: f64 = 1e-12;

/// `max φ < P_top(φ) - ρ h_top`.
pub fn low_variation_check(
    sys: &SystemSpec,
    phi: &Potential,
    rho: f64,
    pressure_hint: Option<f64>,
) -> Result<LowVariation> {
    let (p_top, warning) = top_pressure(sys, phi, pressure_hint)?;
    let h_top = oracle::topological_entropy(sys)?;
    let max_phi = potential_extremum(sys, phi, Extremum::Max)?;
    let margin = p_top.value() - rho * h_top - max_phi;
    Ok(LowVariation { holds: margin > LOW_VARIATION_TOL, margin, p_top, h_top, max_phi, warning })
}
