//! Pressure from weighted maximal `(n, ε)`-separated sets of a map.

use crate::error::{Error, Result};
use crate::systems::{evaluate_map, evaluate_potential, Location, Potential, SystemSpec, Topology};

/// Number of candidate points `(i + 1/2) / N`.
pub const SEPARATED_GRID: usize = 1 << 20;

fn dist(topology: Topology, a: f64, b: f64) -> f64 {
    let d = (a - b).abs();
    match topology {
        Topology::Circle => d.min(1.0 - d),
        Topology::Interval => d,
    }
}

/// Orbit segments `x, f(x), .., f^{n-1}(x)` of a maximal `(n, ε)`-separated subset of the
/// grid, built greedily in increasing `x`.
///
/// Two points are `ε`-close in `d_n` only if they are `ε`-close at time 0, so a candidate
/// is compared just with the members inside its `ε`-window, newest first (the nearest,
/// hence the likeliest to reject it), plus the wrap-around window on the circle.
pub fn separated_set(sys: &SystemSpec, n: usize, eps: f64, grid: usize) -> Result<Vec<Vec<f64>>> {
    if !sys.is_map() {
        return Err(Error::NotAMap);
    }
    if n == 0 || !(eps > 0.0) || grid == 0 {
        return Err(Error::InvalidArgument("need n >= 1, eps > 0 and a nonempty grid".into()));
    }
    let topo = sys.topology;
    let mut members: Vec<Vec<f64>> = Vec::new();
    let mut orbit = vec![0.0; n];
    for i in 0..grid {
        let x = (i as f64 + 0.5) / grid as f64;
        orbit[0] = x;
        for k in 1..n {
            orbit[k] = evaluate_map(sys, orbit[k - 1])?.0;
        }
        let close = |m: &Vec<f64>| m.iter().zip(&orbit).all(|(a, b)| dist(topo, *a, *b) <= eps);
        let mut rejected = false;
        for m in members.iter().rev() {
            if x - m[0] > eps {
                break;
            }
            if close(m) {
                rejected = true;
                break;
            }
        }
        if !rejected && topo == Topology::Circle {
            for m in members.iter() {
                if m[0] + 1.0 - x > eps {
                    break;
                }
                if close(m) {
                    rejected = true;
                    break;
                }
            }
        }
        if !rejected {
            members.push(orbit.clone());
        }
    }
    Ok(members)
}

fn log_partition(sys: &SystemSpec, phi: &Potential, members: &[Vec<f64>]) -> Result<f64> {
    let sums = members
        .iter()
        .map(|orb| {
            orb.iter().try_fold(0.0, |acc, &y| Ok::<f64, Error>(acc + evaluate_potential(phi, sys, Location::Point(y))?))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mx = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(mx + sums.iter().map(|s| (s - mx).exp()).sum::<f64>().ln())
}

/// `(1/n) log Σ_{x ∈ F_n(ε)} exp S_nφ(x)` on the default grid.
pub fn separated_set_pressure(sys: &SystemSpec, phi: &Potential, n: usize, eps: f64) -> Result<f64> {
    let members = separated_set(sys, n, eps, SEPARATED_GRID)?;
    Ok(log_partition(sys, phi, &members)? / n as f64)
}

/// [`separated_set_pressure`] for several potentials sharing one separated set.
pub fn separated_set_pressures(sys: &SystemSpec, phis: &[Potential], n: usize, eps: f64) -> Result<Vec<f64>> {
    let members = separated_set(sys, n, eps, SEPARATED_GRID)?;
    phis.iter().map(|phi| Ok(log_partition(sys, phi, &members)? / n as f64)).collect()
}

/// `log Z_n - log Z_{n-1}`: the one-step growth of the separated-set partition sums.
///
/// The `(1/n) log Z_n` estimator carries an additive `log(C/ε)/n` offset from the
/// subexponential factor of the separated-set cardinality; the ratio cancels it.
pub fn separated_set_growth(sys: &SystemSpec, phi: &Potential, n: usize, eps: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidArgument("growth needs n >= 2".into()));
    }
    let a = log_partition(sys, phi, &separated_set(sys, n, eps, SEPARATED_GRID)?)?;
    let b = log_partition(sys, phi, &separated_set(sys, n - 1, eps, SEPARATED_GRID)?)?;
    Ok(a - b)
}
