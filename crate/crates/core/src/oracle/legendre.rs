//! Constrained maxima `sup{h_ν + ∫φ dν : ∫g dν = c}` as `inf_t (P(φ + t g) - t c)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::oracle::markov::MarkovModel;

/// Bisection stops once the bracket on `t` is this narrow.
pub const T_TOL: f64 = 1e-10;
const MAX_BRACKET_DOUBLINGS: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendreValue {
    pub value: f64,
    /// Minimizing tilt `t*`.
    pub t: f64,
    pub iterations: usize,
}

/// Tilted pressure `P(φ + t g)` and the Gibbs mean of `g` at tilt `t`.
pub fn tilted(model: &MarkovModel, g: &[f64], t: f64) -> Result<(f64, f64)> {
    let w: Vec<f64> = model.edges().iter().zip(g).map(|(e, gi)| e.log_weight + t * gi).collect();
    let m = model.with_weights(&w)?;
    let gibbs = m.gibbs()?;
    let mean = gibbs.edge_masses().iter().zip(g).map(|(a, b)| a * b).sum();
    Ok((m.pressure()?, mean))
}

/// The Legendre value at target mean `c`, strictly inside the cycle-mean range of `g`.
pub fn legendre_rate(model: &MarkovModel, g: &[f64], c: f64) -> Result<LegendreValue> {
    if g.len() != model.edges().len() {
        return Err(Error::InvalidArgument("observable needs one value per edge".into()));
    }
    let (min, max) = model.mean_range(g)?;
    if !(c > min && c < max) {
        return Err(Error::TargetUnachievable { target: c, min, max });
    }
    let mean_at = |t: f64| tilted(model, g, t).map(|(_, m)| m);
    // the Gibbs mean is increasing in t
    let m0 = mean_at(0.0)?;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let mut iterations = 1;
    if m0 < c {
        let mut step = 1.0;
        for _ in 0..MAX_BRACKET_DOUBLINGS {
            hi = step;
            iterations += 1;
            if mean_at(hi)? >= c {
                break;
            }
            lo = hi;
            step *= 2.0;
        }
    } else if m0 > c {
        let mut step = 1.0;
        for _ in 0..MAX_BRACKET_DOUBLINGS {
            lo = -step;
            iterations += 1;
            if mean_at(lo)? <= c {
                break;
            }
            hi = lo;
            step *= 2.0;
        }
    }
    while hi - lo > T_TOL {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        if mean_at(mid)? < c {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let (p, _) = tilted(model, g, t)?;
    Ok(LegendreValue { value: p - t * c, t, iterations })
}

/// `lim_{t -> ±∞} (P(φ + t g) - t c)` at an endpoint `c` of the achievable range: the
/// largest value of `h_ν + ∫φ dν` over measures maximizing (or minimizing) `∫g dν`.
pub fn legendre_endpoint(model: &MarkovModel, g: &[f64], c: f64, upper: bool) -> Result<f64> {
    let sign = if upper { 1.0 } else { -1.0 };
    let mut t = 1.0f64;
    let mut prev = f64::INFINITY;
    for _ in 0..40 {
        let (p, _) = tilted(model, g, sign * t)?;
        let v = p - sign * t * c;
        if (prev - v).abs() <= 1e-12 {
            return Ok(v);
        }
        prev = v;
        t *= 2.0;
    }
    Ok(prev)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::CylinderTable;
    use crate::word::TransitionMatrix;
    use std::f64::consts::LN_2;

    fn entropy2(p: f64) -> f64 {
        -(p * p.ln() + (1.0 - p) * (1.0 - p).ln())
    }

    fn setup(tr: &TransitionMatrix, sym: u8) -> (MarkovModel, Vec<f64>) {
        let zero = CylinderTable::new(tr, 1, vec![0.0; tr.size()]).unwrap();
        let model = MarkovModel::from_cylinder(tr, &zero).unwrap();
        let g = model.edge_values(&CylinderTable::indicator(tr, &[sym]).unwrap()).unwrap();
        (model, g)
    }

    #[test]
    fn full_shift_examples() {
        let (m, g) = setup(&TransitionMatrix::full(2), 0);
        assert!((legendre_rate(&m, &g, 0.5).unwrap().value - LN_2).abs() < 1e-12);
        let v = legendre_rate(&m, &g, 0.75).unwrap().value;
        assert!((v - entropy2(0.75)).abs() < 1e-12, "{v}");
        assert!(matches!(legendre_rate(&m, &g, 1.0), Err(Error::TargetUnachievable { .. })));
        assert!(legendre_endpoint(&m, &g, 1.0, true).unwrap().abs() < 1e-9);
    }

    #[test]
    fn golden_mean_at_parry_mean() {
        let tr = TransitionMatrix::golden_mean();
        let (m, g) = setup(&tr, 1);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let c = 1.0 / (phi * phi + 1.0);
        let v = legendre_rate(&m, &g, c).unwrap();
        assert!((v.value - phi.ln()).abs() < 1e-12);
        assert!(v.t.abs() < 1e-9);
    }
}
