//! Independent ground truth: transfer-matrix pressure and Gibbs states, separated-set
//! pressure, Legendre transforms, exact counts, and a Ulam estimator.

pub mod counting;
pub mod legendre;
pub mod markov;
pub mod separated;
pub mod ulam;

use serde::Serialize;

pub use counting::{binomial_count, deviates, FreqCondition};
pub use legendre::{legendre_endpoint, legendre_rate, LegendreValue};
pub use markov::{Edge, MarkovMeasure, MarkovModel};
pub use separated::{separated_set_growth, separated_set_pressure, separated_set_pressures};
pub use ulam::{ulam_pressure, UlamEstimate};

use crate::error::{Error, Result};
use crate::systems::{Potential, SystemSpec};

/// Bins used when the transfer-matrix oracle does not apply.
pub const DEFAULT_ULAM_BINS: usize = 8192;

/// `log λ` of the transfer matrix of `model`.
pub fn sft_pressure(model: &MarkovModel) -> Result<f64> {
    model.pressure()
}

/// Equilibrium state of the weights of `model`.
pub fn sft_gibbs(model: &MarkovModel) -> Result<MarkovMeasure> {
    model.gibbs()
}

/// How a pressure value was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum PressureMethod {
    TransferMatrix { depth: usize },
    Ulam { bins: usize, order: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OraclePressure {
    pub value: f64,
    #[serde(flatten)]
    pub method: PressureMethod,
}

/// Exact `P_top(φ)` for cylinder-type potentials on the symbolic coding of `sys`.
///
/// For full-branch maps the coding is one-to-one off a countable set, so the symbolic
/// pressure is the pressure of the map.
pub fn exact_pressure(sys: &SystemSpec, phi: &Potential) -> Result<OraclePressure> {
    let model = MarkovModel::for_potential(sys, phi)?;
    Ok(OraclePressure { value: model.pressure()?, method: PressureMethod::TransferMatrix { depth: model.depth() } })
}

/// Exact pressure when available, otherwise the Ulam estimate on a map.
pub fn pressure(sys: &SystemSpec, phi: &Potential) -> Result<OraclePressure> {
    match exact_pressure(sys, phi) {
        Err(Error::OracleUnavailable(reason)) => {
            if !sys.is_map() {
                return Err(Error::OracleUnavailable(reason));
            }
            let e = ulam_pressure(sys, phi, DEFAULT_ULAM_BINS)?;
            Ok(OraclePressure { value: e.value, method: PressureMethod::Ulam { bins: e.bins, order: e.order } })
        }
        other => other,
    }
}

/// `h_top`: pressure of the zero potential.
pub fn topological_entropy(sys: &SystemSpec) -> Result<f64> {
    exact_pressure(sys, &Potential::zero()).map(|p| p.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::CylinderTable;
    use proptest::prelude::*;
    use std::f64::consts::LN_2;

    #[test]
    fn pressure_routes() {
        let d = SystemSpec::doubling();
        let p = pressure(&d, &Potential::Geometric { t: 1.0 }).unwrap();
        assert!(p.value.abs() < 1e-13);
        assert_eq!(p.method, PressureMethod::TransferMatrix { depth: 2 });
        let mp = SystemSpec::manneville_pomeau(0.5).unwrap();
        let p = pressure(&mp, &Potential::Geometric { t: 0.0 }).unwrap();
        assert!(matches!(p.method, PressureMethod::Ulam { .. }));
        assert!((p.value - LN_2).abs() < 0.02);
        assert!((topological_entropy(&SystemSpec::tent(2.0).unwrap()).unwrap() - LN_2).abs() < 1e-13);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        // variational principle against a grid of Bernoulli measures
        #[test]
        fn variational_principle(a in -2.0f64..2.0, b in -2.0f64..2.0) {
            let d = SystemSpec::doubling();
            let t = CylinderTable::new(&d.transition, 1, vec![a, b]).unwrap();
            let p = exact_pressure(&d, &Potential::Cylinder(t)).unwrap().value;
            let mut best = f64::NEG_INFINITY;
            // refine around the analytic optimum with a 10^3 grid on a shrinking window
            let (mut lo, mut hi) = (1e-9, 1.0 - 1e-9);
            for _ in 0..6 {
                let mut arg = lo;
                for i in 0..=1000 {
                    let q = lo + (hi - lo) * i as f64 / 1000.0;
                    let h = -(q * q.ln() + (1.0 - q) * (1.0 - q).ln());
                    let v = h + q * a + (1.0 - q) * b;
                    if v > best { best = v; arg = q; }
                }
                let w = (hi - lo) / 100.0;
                lo = (arg - w).max(1e-12);
                hi = (arg + w).min(1.0 - 1e-12);
            }
            prop_assert!((p - best).abs() < 1e-6, "{} vs {}", p, best);
        }
    }
}
