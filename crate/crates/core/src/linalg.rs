//! Sparse nonnegative matrices: Perron eigendata, irreducibility, period, and extremal
//! cycle means.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Relative residual at which power iteration stops.
pub const PERRON_TOL: f64 = 1e-13;
const PERRON_MAX_ITERS: usize = 1_000_000;
/// Power steps tried before switching to dense inverse iteration on small matrices.
const POWER_STEPS_BEFORE_DENSE: usize = 20_000;
/// Largest dimension handled by the dense fallback.
const DENSE_MAX_DIM: usize = 2048;
const DENSE_MAX_ITERS: usize = 200;

/// Square matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, mut entries: Vec<(usize, usize, f64)>) -> Self {
        entries.sort_by_key(|e| (e.0, e.1));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(entries.len());
        let mut val: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            assert!(i < n && j < n, "entry ({i}, {j}) outside a {n}x{n} matrix");
            if last == Some((i, j)) {
                *val.last_mut().expect("previous entry") += v;
                continue;
            }
            row_ptr[i + 1] += 1;
            col.push(j);
            val.push(v);
            last = Some((i, j));
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        SparseMatrix { n, row_ptr, col, val }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.col.len()
    }

    /// `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col[r.clone()].iter().copied().zip(self.val[r].iter().copied())
    }

    /// `y = A x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut t = Vec::with_capacity(self.nnz());
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                t.push((j, i, v));
            }
        }
        SparseMatrix::from_triplets(self.n, t)
    }

    fn reach(&self, start: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.n];
        let mut q = VecDeque::new();
        level[start] = Some(0);
        q.push_back(start);
        while let Some(u) = q.pop_front() {
            let lu = level[u].expect("queued nodes have a level");
            for (v, w) in self.row(u) {
                if w > 0.0 && level[v].is_none() {
                    level[v] = Some(lu + 1);
                    q.push_back(v);
                }
            }
        }
        level
    }

    /// Strong connectivity of the positive-entry graph.
    pub fn is_irreducible(&self) -> bool {
        if self.n == 0 {
            return false;
        }
        self.reach(0).iter().all(Option::is_some) && self.transpose().reach(0).iter().all(Option::is_some)
    }

    /// Period of an irreducible matrix: gcd of `level(u) + 1 - level(v)` over edges.
    pub fn period(&self) -> usize {
        let level = self.reach(0);
        let mut g = 0usize;
        for u in 0..self.n {
            let Some(lu) = level[u] else { continue };
            for (v, w) in self.row(u) {
                if w <= 0.0 {
                    continue;
                }
                if let Some(lv) = level[v] {
                    g = gcd(g, (lu as i64 + 1 - lv as i64).unsigned_abs() as usize);
                }
            }
        }
        g.max(1)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Perron eigendata of an irreducible nonnegative matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Perron {
    pub lambda: f64,
    /// Right eigenvector, `Σ r = 1`.
    pub right: Vec<f64>,
    /// Left eigenvector, normalized so that `l · r = 1`.
    pub left: Vec<f64>,
    pub iterations: usize,
}

/// Leading eigenvalue and eigenvector by power iteration on `A + σI`.
///
/// The shift `σ` is zero for aperiodic matrices. For periodic ones the spectrum has
/// several eigenvalues of maximal modulus and the shift makes `λ + σ` strictly dominant.
fn power_iteration(a: &SparseMatrix, shift: f64) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.dim();
    let mut x = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    let max_iters = if n <= DENSE_MAX_DIM { POWER_STEPS_BEFORE_DENSE } else { PERRON_MAX_ITERS };
    for it in 1..=max_iters {
        a.mul_vec(&x, &mut y);
        // Rayleigh-type estimate for positive vectors
        let ax: f64 = y.iter().sum();
        let xs: f64 = x.iter().sum();
        lambda = ax / xs;
        let mut res = 0.0f64;
        let mut xmax = 0.0f64;
        for i in 0..n {
            res = res.max((y[i] - lambda * x[i]).abs());
            xmax = xmax.max(x[i].abs());
        }
        if res <= PERRON_TOL * lambda * xmax {
            return Ok((lambda, x, it));
        }
        let norm: f64 = y.iter().zip(&x).map(|(yi, xi)| yi + shift * xi).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NonConvergence { iterations: it, partial: lambda });
        }
        for i in 0..n {
            x[i] = (y[i] + shift * x[i]) / norm;
        }
    }
    if n <= DENSE_MAX_DIM {
        return inverse_iteration(a, x).map(|(l, v, it)| (l, v, it + max_iters));
    }
    Err(Error::NonConvergence { iterations: max_iters, partial: lambda })
}

/// Collatz-Wielandt bounds `min (Ax)_i / x_i <= λ <= max (Ax)_i / x_i` for positive `x`.
fn cw_bounds(a: &SparseMatrix, x: &[f64], y: &mut [f64]) -> (f64, f64) {
    a.mul_vec(x, y);
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (yi, xi) in y.iter().zip(x) {
        let r = yi / xi;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    (lo, hi)
}

/// Solves `m z = b` in place by Gaussian elimination with partial pivoting.
fn dense_solve(mut m: Vec<f64>, n: usize, b: &mut [f64]) -> Option<()> {
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i * n + k].abs().total_cmp(&m[j * n + k].abs()))?;
        if m[p * n + k] == 0.0 {
            return None;
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            b.swap(k, p);
        }
        let piv = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            if f != 0.0 {
                for j in k..n {
                    m[i * n + j] -= f * m[k * n + j];
                }
                b[i] -= f * b[k];
            }
        }
    }
    for k in (0..n).rev() {
        let mut s = b[k];
        for j in k + 1..n {
            s -= m[k * n + j] * b[j];
        }
        b[k] = s / m[k * n + k];
    }
    Some(())
}

/// Inverse iteration with `(σI - A)^{-1}`, `σ` just above the Collatz-Wielandt upper bound.
///
/// For `σ > λ` the inverse of the M-matrix `σI - A` is positive, so iterates stay positive
/// and the bounds bracket `λ` at every step; they close quickly even when `A` is nearly
/// periodic and power iteration stalls.
fn inverse_iteration(a: &SparseMatrix, start: Vec<f64>) -> Result<(f64, Vec<f64>, usize)> {
    let n = a.dim();
    let mut x: Vec<f64> = start.iter().map(|v| v.max(f64::MIN_POSITIVE)).collect();
    let mut y = vec![0.0; n];
    let (mut lo, mut hi) = cw_bounds(a, &x, &mut y);
    for it in 1..=DENSE_MAX_ITERS {
        if hi - lo <= PERRON_TOL * hi {
            break;
        }
        let sigma = hi * (1.0 + 4.0 * f64::EPSILON) + f64::MIN_POSITIVE;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = sigma;
            for (j, v) in a.row(i) {
                m[i * n + j] -= v;
            }
        }
        let mut z = x.clone();
        if dense_solve(m, n, &mut z).is_none() || z.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::NonConvergence { iterations: it, partial: 0.5 * (lo + hi) });
        }
        let s: f64 = z.iter().sum();
        x = z.into_iter().map(|v| v / s).collect();
        let (l, h) = cw_bounds(a, &x, &mut y);
        if h - l >= hi - lo && it > 1 {
            // no further progress at working precision
            lo = lo.max(l);
            hi = hi.min(h);
            break;
        }
        lo = l;
        hi = h;
    }
    let lambda = 0.5 * (lo + hi);
    a.mul_vec(&x, &mut y);
    let xmax = x.iter().copied().fold(0.0f64, f64::max);
    let res = y.iter().zip(&x).map(|(yi, xi)| (yi - lambda * xi).abs()).fold(0.0f64, f64::max);
    if res <= 1e3 * PERRON_TOL * lambda * xmax {
        Ok((lambda, x, DENSE_MAX_ITERS))
    } else {
        Err(Error::NonConvergence { iterations: DENSE_MAX_ITERS, partial: lambda })
    }
}

/// Perron eigendata of an irreducible nonnegative matrix.
pub fn perron(a: &SparseMatrix) -> Result<Perron> {
    if !a.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let scale = a.val.iter().copied().fold(0.0f64, f64::max);
    let shift = if a.period() > 1 { scale } else { 0.0 };
    let (lambda, mut right, it_r) = power_iteration(a, shift)?;
    let (_, mut left, it_l) = power_iteration(&a.transpose(), shift)?;
    let rs: f64 = right.iter().sum();
    right.iter_mut().for_each(|v| *v /= rs);
    let dot: f64 = left.iter().zip(&right).map(|(l, r)| l * r).sum();
    left.iter_mut().for_each(|v| *v /= dot);
    Ok(Perron { lambda, right, left, iterations: it_r.max(it_l) })
}

/// A weighted directed edge.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeightedEdge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// `(min, max)` mean edge weight over cycles of the graph (Karp).
pub fn cycle_mean_range(n: usize, edges: &[WeightedEdge]) -> Result<(f64, f64)> {
    let max = karp_max_mean(n, edges)?;
    let neg: Vec<WeightedEdge> = edges.iter().map(|e| WeightedEdge { weight: -e.weight, ..*e }).collect();
    let min = -karp_max_mean(n, &neg)?;
    Ok((min, max))
}

fn karp_max_mean(n: usize, edges: &[WeightedEdge]) -> Result<f64> {
    if n == 0 || edges.is_empty() {
        return Err(Error::InvalidArgument("graph has no cycles".into()));
    }
    // d[k][v]: heaviest walk with exactly k edges ending at v, from any start
    let mut d = vec![vec![f64::NEG_INFINITY; n]; n + 1];
    d[0].iter_mut().for_each(|v| *v = 0.0);
    for k in 1..=n {
        let (prev, cur) = d.split_at_mut(k);
        let prev = &prev[k - 1];
        let cur = &mut cur[0];
        for e in edges {
            let cand = prev[e.from] + e.weight;
            if cand > cur[e.to] {
                cur[e.to] = cand;
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    for v in 0..n {
        if d[n][v] == f64::NEG_INFINITY {
            continue;
        }
        let mut worst = f64::INFINITY;
        for k in 0..n {
            if d[k][v] > f64::NEG_INFINITY {
                worst = worst.min((d[n][v] - d[k][v]) / (n - k) as f64);
            }
        }
        best = best.max(worst);
    }
    if best.is_finite() {
        Ok(best)
    } else {
        Err(Error::InvalidArgument("graph has no cycles".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(rows: &[&[f64]]) -> SparseMatrix {
        let n = rows.len();
        let mut t = Vec::new();
        for (i, r) in rows.iter().enumerate() {
            for (j, &v) in r.iter().enumerate() {
                if v != 0.0 {
                    t.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(n, t)
    }

    #[test]
    fn golden_ratio() {
        let a = dense(&[&[1.0, 1.0], &[1.0, 0.0]]);
        let p = perron(&a).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((p.lambda - phi).abs() < 1e-13);
        assert!(p.right.iter().all(|&v| v > 0.0));
        let dot: f64 = p.left.iter().zip(&p.right).map(|(l, r)| l * r).sum();
        assert!((dot - 1.0).abs() < 1e-14);
    }

    #[test]
    fn periodic_matrix_converges() {
        let a = dense(&[&[0.0, 2.0], &[0.5, 0.0]]);
        assert_eq!(a.period(), 2);
        let p = perron(&a).unwrap();
        assert!((p.lambda - 1.0).abs() < 1e-12, "{}", p.lambda);
    }

    #[test]
    fn reducible_rejected() {
        let a = dense(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert_eq!(perron(&a), Err(Error::NotIrreducible));
    }

    #[test]
    fn karp_on_small_graph() {
        // cycles: self-loop at 0 (w=1), 0->1->0 (mean 3)
        let e = [
            WeightedEdge { from: 0, to: 0, weight: 1.0 },
            WeightedEdge { from: 0, to: 1, weight: 2.0 },
            WeightedEdge { from: 1, to: 0, weight: 4.0 },
        ];
        let (lo, hi) = cycle_mean_range(2, &e).unwrap();
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }

    #[test]
    fn duplicates_sum() {
        let a = SparseMatrix::from_triplets(1, vec![(0, 0, 1.0), (0, 0, 2.0)]);
        assert_eq!(a.nnz(), 1);
        let mut y = [0.0];
        a.mul_vec(&[1.0], &mut y);
        assert_eq!(y[0], 3.0);
    }

    #[test]
    fn nearly_periodic_matrix_converges() {
        // a 3-cycle with a faint self-loop: aperiodic, but power iteration barely contracts
        let eps = 1e-9;
        let a = dense(&[&[eps, 1.0, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        assert_eq!(a.period(), 1);
        let p = perron(&a).unwrap();
        // root of λ³ - ελ² - 1
        let mut l = 1.0f64;
        for _ in 0..50 {
            l -= (l * l * l - eps * l * l - 1.0) / (3.0 * l * l - 2.0 * eps * l);
        }
        assert!((p.lambda - l).abs() < 1e-13, "{} vs {l}", p.lambda);
        let mut y = vec![0.0; 3];
        a.mul_vec(&p.right, &mut y);
        for (yi, ri) in y.iter().zip(&p.right) {
            assert!((yi - p.lambda * ri).abs() < 1e-12);
        }
    }
}
