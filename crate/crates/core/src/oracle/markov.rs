//! Weighted transition graphs on higher-block presentations and their Perron data:
//! exact pressure, Gibbs (Markov) measures, and cylinder masses.

use crate::error::{Error, Result};
use crate::linalg::{cycle_mean_range, perron, SparseMatrix, WeightedEdge};
use crate::systems::{to_cylinder, CylinderTable, Potential, SystemSpec};
use crate::word::{Symbol, TransitionMatrix, Word};

/// One edge of a [`MarkovModel`]: an admissible `depth`-word.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub word: Word,
    pub log_weight: f64,
}

/// A weighted graph whose states are admissible `(depth - 1)`-words and whose edges are
/// admissible `depth`-words, so that a depth-`m` cylinder potential with `m <= depth`
/// becomes an edge weight.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovModel {
    depth: usize,
    transition: TransitionMatrix,
    states: Vec<Word>,
    edges: Vec<Edge>,
}

fn state_index(states: &[Word], w: &[Symbol]) -> Option<usize> {
    states.binary_search_by(|s| s.symbols().cmp(w)).ok()
}

impl MarkovModel {
    /// The `k x k` form: states are symbols, `w[i][j]` is the log-weight of `i -> j`.
    pub fn from_matrix(transition: &TransitionMatrix, weights: &[Vec<f64>]) -> Result<Self> {
        let k = transition.size();
        if weights.len() != k || weights.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidArgument("weight matrix shape differs from the transition matrix".into()));
        }
        let mut edges = Vec::new();
        for (i, row) in weights.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if transition.allows(i, j) {
                    if !w.is_finite() {
                        return Err(Error::InvalidPotential(format!("weight ({i}, {j}) is not finite")));
                    }
                    edges.push(Edge { from: i, to: j, word: Word::new(vec![i as Symbol, j as Symbol]), log_weight: w });
                }
            }
        }
        let states = (0..k).map(|s| Word::new(vec![s as Symbol])).collect();
        Ok(MarkovModel { depth: 2, transition: transition.clone(), states, edges })
    }

    /// Model of a cylinder potential on the subshift of `transition`.
    pub fn from_cylinder(transition: &TransitionMatrix, table: &CylinderTable) -> Result<Self> {
        let depth = table.depth().max(2);
        let states = transition.words(depth - 1);
        let edges = transition
            .words(depth)
            .into_iter()
            .map(|w| {
                let s = w.symbols();
                let from = state_index(&states, &s[..depth - 1]).expect("prefix is admissible");
                let to = state_index(&states, &s[1..]).expect("suffix is admissible");
                let log_weight = table.value(s)?;
                Ok(Edge { from, to, word: w, log_weight })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarkovModel { depth, transition: transition.clone(), states, edges })
    }

    /// Model of `φ` on the symbolic coding of `sys`; cylinder-type potentials only.
    pub fn for_potential(sys: &SystemSpec, phi: &Potential) -> Result<Self> {
        let table = to_cylinder(sys, phi).ok_or_else(|| {
            Error::OracleUnavailable(format!("potential {phi:?} is not locally constant on {}", sys.name))
        })?;
        Self::from_cylinder(&sys.transition, &table)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn transition(&self) -> &TransitionMatrix {
        &self.transition
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Same graph, log-weights replaced.
    pub fn with_weights(&self, log_weights: &[f64]) -> Result<Self> {
        if log_weights.len() != self.edges.len() {
            return Err(Error::InvalidArgument("one log-weight per edge required".into()));
        }
        if log_weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidPotential("log-weights must be finite".into()));
        }
        let mut m = self.clone();
        for (e, &w) in m.edges.iter_mut().zip(log_weights) {
            e.log_weight = w;
        }
        Ok(m)
    }

    /// A cylinder table of depth `<= depth` evaluated on every edge.
    pub fn edge_values(&self, table: &CylinderTable) -> Result<Vec<f64>> {
        if table.depth() > self.depth {
            return Err(Error::InvalidArgument(format!(
                "observable depth {} exceeds model depth {}",
                table.depth(),
                self.depth
            )));
        }
        self.edges.iter().map(|e| table.value(e.word.symbols())).collect()
    }

    fn max_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.log_weight).fold(f64::NEG_INFINITY, f64::max)
    }

    fn scaled_matrix(&self) -> (SparseMatrix, f64) {
        let wmax = self.max_weight();
        let t = self.edges.iter().map(|e| (e.from, e.to, (e.log_weight - wmax).exp())).collect();
        (SparseMatrix::from_triplets(self.states.len(), t), wmax)
    }

    pub fn is_irreducible(&self) -> bool {
        self.scaled_matrix().0.is_irreducible()
    }

    pub fn is_aperiodic(&self) -> bool {
        let (m, _) = self.scaled_matrix();
        m.is_irreducible() && m.period() == 1
    }

    /// `log λ` of `M_e = e^{w_e}`: the topological pressure of the weight potential.
    pub fn pressure(&self) -> Result<f64> {
        let (m, wmax) = self.scaled_matrix();
        Ok(perron(&m)?.lambda.ln() + wmax)
    }

    /// Equilibrium state of the weight potential.
    pub fn gibbs(&self) -> Result<MarkovMeasure> {
        let (m, wmax) = self.scaled_matrix();
        let p = perron(&m)?;
        let lambda = p.lambda;
        let prob: Vec<f64> = self
            .edges
            .iter()
            .map(|e| (e.log_weight - wmax).exp() * p.right[e.to] / (lambda * p.right[e.from]))
            .collect();
        let pi: Vec<f64> = p.left.iter().zip(&p.right).map(|(l, r)| l * r).collect();
        let log_lambda = lambda.ln() + wmax;
        let mut measure = MarkovMeasure::assemble(self, prob, pi)?;
        let mean_weight: f64 =
            measure.edge_masses().iter().zip(&self.edges).map(|(m, e)| m * e.log_weight).sum();
        measure.entropy = log_lambda - mean_weight;
        Ok(measure)
    }

    /// `(min, max)` cycle means of per-edge values.
    pub fn mean_range(&self, values: &[f64]) -> Result<(f64, f64)> {
        let edges: Vec<WeightedEdge> = self
            .edges
            .iter()
            .zip(values)
            .map(|(e, &v)| WeightedEdge { from: e.from, to: e.to, weight: v })
            .collect();
        cycle_mean_range(self.states.len(), &edges)
    }
}

/// A shift-invariant Markov measure on a higher-block presentation.
#[derive(Clone, Debug, PartialEq)]
pub struct MarkovMeasure {
    depth: usize,
    k: usize,
    states: Vec<Word>,
    edge_from: Vec<usize>,
    edge_to: Vec<usize>,
    prob: Vec<f64>,
    pi: Vec<f64>,
    /// `next[state * k + symbol]`: the edge appending `symbol`, or `usize::MAX`.
    next: Vec<usize>,
    entropy: f64,
}

impl MarkovMeasure {
    fn assemble(model: &MarkovModel, prob: Vec<f64>, pi: Vec<f64>) -> Result<Self> {
        let k = model.transition.size();
        let mut next = vec![usize::MAX; model.states.len() * k];
        for (i, e) in model.edges.iter().enumerate() {
            let last = *e.word.symbols().last().expect("edges are nonempty words") as usize;
            next[e.from * k + last] = i;
        }
        let mut m = MarkovMeasure {
            depth: model.depth,
            k,
            states: model.states.clone(),
            edge_from: model.edges.iter().map(|e| e.from).collect(),
            edge_to: model.edges.iter().map(|e| e.to).collect(),
            prob,
            pi,
            next,
            entropy: 0.0,
        };
        m.entropy = m.entropy_from_probabilities();
        Ok(m)
    }

    /// Stationary chain with the given edge probabilities on the graph of `model`.
    pub fn from_edge_probabilities(model: &MarkovModel, prob: Vec<f64>) -> Result<Self> {
        if prob.len() != model.edges.len() || prob.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidArgument("edge probabilities must be positive, one per edge".into()));
        }
        let n = model.states.len();
        let mut row_sum = vec![0.0; n];
        for (e, p) in model.edges.iter().zip(&prob) {
            row_sum[e.from] += p;
        }
        if row_sum.iter().any(|s| (s - 1.0).abs() > 1e-12) {
            return Err(Error::InvalidArgument("edge probabilities out of each state must sum to 1".into()));
        }
        let t = model.edges.iter().zip(&prob).map(|(e, &p)| (e.from, e.to, p)).collect();
        let pr = perron(&SparseMatrix::from_triplets(n, t))?;
        let total: f64 = pr.left.iter().sum();
        let pi = pr.left.iter().map(|v| v / total).collect();
        Self::assemble(model, prob, pi)
    }

    /// Stationary Markov chain on the symbols of `transition` with `p[i][j] = P(j | i)`.
    pub fn from_stochastic(transition: &TransitionMatrix, p: &[Vec<f64>]) -> Result<Self> {
        let zeros: Vec<Vec<f64>> = vec![vec![0.0; transition.size()]; transition.size()];
        let model = MarkovModel::from_matrix(transition, &zeros)?;
        let prob = model.edges.iter().map(|e| p[e.from][e.to]).collect();
        Self::from_edge_probabilities(&model, prob)
    }

    /// Bernoulli measure on the full shift.
    pub fn bernoulli(p: &[f64]) -> Result<Self> {
        let k = p.len();
        if k == 0 || (p.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("Bernoulli weights must sum to 1".into()));
        }
        Self::from_stochastic(&TransitionMatrix::full(k), &vec![p.to_vec(); k])
    }

    /// Measure of maximal entropy of an irreducible subshift.
    pub fn parry(transition: &TransitionMatrix) -> Result<Self> {
        let zeros: Vec<Vec<f64>> = vec![vec![0.0; transition.size()]; transition.size()];
        MarkovModel::from_matrix(transition, &zeros)?.gibbs()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn alphabet_size(&self) -> usize {
        self.k
    }

    pub fn states(&self) -> &[Word] {
        &self.states
    }

    pub fn stationary(&self) -> &[f64] {
        &self.pi
    }

    pub fn edge_probabilities(&self) -> &[f64] {
        &self.prob
    }

    /// `π_from · P_e` per edge, the measure of each `depth`-cylinder.
    pub fn edge_masses(&self) -> Vec<f64> {
        self.edge_from.iter().zip(&self.prob).map(|(&i, p)| self.pi[i] * p).collect()
    }

    /// Kolmogorov-Sinai entropy.
    pub fn entropy(&self) -> f64 {
        self.entropy
    }

    /// `-Σ π_i P_ij log P_ij`.
    pub fn entropy_from_probabilities(&self) -> f64 {
        -self.edge_masses().iter().zip(&self.prob).map(|(m, p)| m * p.ln()).sum::<f64>()
    }

    /// `π P - π` in sup-norm.
    pub fn stationarity_defect(&self) -> f64 {
        let mut flow = vec![0.0; self.pi.len()];
        for (e, m) in self.edge_masses().iter().enumerate() {
            flow[self.edge_to[e]] += m;
        }
        flow.iter().zip(&self.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Measure of the cylinder `[w]`.
    pub fn cylinder_mass(&self, w: &[Symbol]) -> f64 {
        let s = self.depth - 1;
        if w.iter().any(|&c| c as usize >= self.k) {
            return 0.0;
        }
        if w.len() < s {
            let lo = self.states.partition_point(|st| st.symbols() < w);
            return self.states[lo..]
                .iter()
                .zip(&self.pi[lo..])
                .take_while(|(st, _)| st.symbols().starts_with(w))
                .map(|(_, p)| p)
                .sum();
        }
        let Some(mut cur) = state_index(&self.states, &w[..s]) else {
            return 0.0;
        };
        let mut mass = self.pi[cur];
        for &c in &w[s..] {
            let e = self.next[cur * self.k + c as usize];
            if e == usize::MAX {
                return 0.0;
            }
            mass *= self.prob[e];
            cur = self.edge_to[e];
        }
        mass
    }

    /// `∫ t dμ` for a cylinder table.
    pub fn integrate_table(&self, table: &CylinderTable) -> f64 {
        table
            .words()
            .iter()
            .zip(table.values())
            .map(|(w, v)| v * self.cylinder_mass(w.symbols()))
            .sum()
    }

    /// Masses of all admissible `m`-words of `transition`, in lexicographic order.
    pub fn word_masses(&self, transition: &TransitionMatrix, m: usize) -> Vec<f64> {
        transition.words(m).iter().map(|w| self.cylinder_mass(w.symbols())).collect()
    }
}
