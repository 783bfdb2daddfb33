//! Experiment configuration: a JSON document with every default made explicit on
//! resolution.

use serde::{Deserialize, Serialize};

use crate::measures::{omega_x, CylinderMeasure, ReferenceMeasure};
use crate::orbits::{Ell, DEFAULT_BUDGET};
use crate::systems::{AnalyticFormula, CylinderTable, Potential, SystemSpec};
use crate::word::{Symbol, TransitionMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Orbits,
    Pressure,
    Bowen,
    Ldp,
    Rate,
    Oracle,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Orbits => "orbits",
            Task::Pressure => "pressure",
            Task::Bowen => "bowen",
            Task::Ldp => "ldp",
            Task::Rate => "rate",
            Task::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Doubling,
    Tent {
        #[serde(default = "two")]
        s: f64,
    },
    #[serde(rename = "manpo")]
    ManPo {
        #[serde(default = "half")]
        s: f64,
    },
    GoldenMean {
        #[serde(default)]
        log_expansion: Option<f64>,
    },
    FullShift {
        #[serde(default = "two_symbols")]
        k: usize,
        #[serde(default)]
        log_expansion: Option<f64>,
    },
    Sft {
        transition: Vec<Vec<u8>>,
        #[serde(default)]
        log_expansion: Option<Vec<f64>>,
    },
}

fn two() -> f64 {
    2.0
}
fn half() -> f64 {
    0.5
}
fn two_symbols() -> usize {
    2
}

impl SystemConfig {
    pub fn build(&self) -> crate::Result<SystemSpec> {
        match self {
            SystemConfig::Doubling => Ok(SystemSpec::doubling()),
            SystemConfig::Tent { s } => SystemSpec::tent(*s),
            SystemConfig::ManPo { s } => SystemSpec::manneville_pomeau(*s),
            SystemConfig::GoldenMean { log_expansion } => Ok(SystemSpec::golden_mean(*log_expansion)),
            SystemConfig::FullShift { k, log_expansion } => {
                if *k < 2 {
                    return Err(crate::Error::InvalidSystem("a full shift needs at least 2 symbols".into()));
                }
                Ok(SystemSpec::full_shift(*k, *log_expansion))
            }
            SystemConfig::Sft { transition, log_expansion } => {
                SystemSpec::subshift(TransitionMatrix::new(transition)?, log_expansion.clone())
            }
        }
    }
}

/// Potential blocks; formula ids follow the system registry ("const", "cyl", "geom").
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    Const {
        c: f64,
    },
    Cyl {
        depth: usize,
        values: Vec<f64>,
    },
    Geom {
        t: f64,
    },
    Identity,
    Indicator {
        lo: f64,
        hi: f64,
    },
    Cosine {
        frequency: f64,
    },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Const { c: 0.0 }
    }
}

impl PotentialConfig {
    pub fn build(&self, sys: &SystemSpec) -> crate::Result<Potential> {
        Ok(match self {
            PotentialConfig::Const { c } => Potential::Constant(*c),
            PotentialConfig::Cyl { depth, values } => {
                Potential::Cylinder(CylinderTable::new(&sys.transition, *depth, values.clone())?)
            }
            PotentialConfig::Geom { t } => Potential::Geometric { t: *t },
            PotentialConfig::Identity => Potential::Analytic(AnalyticFormula::Identity),
            PotentialConfig::Indicator { lo, hi } => Potential::Analytic(AnalyticFormula::Indicator { lo: *lo, hi: *hi }),
            PotentialConfig::Cosine { frequency } => Potential::Analytic(AnalyticFormula::Cosine { frequency: *frequency }),
        })
    }
}

/// Reference measures for the `bowen` and `rate` tasks.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ReferenceConfig {
    /// Equilibrium state of the configured potential.
    #[default]
    Gibbs,
    Lebesgue,
    Parry,
    Bernoulli {
        p: Vec<f64>,
    },
    /// Uniform measure on the periodic orbit coded by `word`.
    Orbit {
        word: Vec<Symbol>,
    },
}

/// A built reference: a Markov measure or a periodic-orbit measure.
pub enum BuiltReference {
    Markov(ReferenceMeasure),
    Orbit(crate::measures::WeightedOrbitMeasure),
}

impl BuiltReference {
    pub fn as_measure(&self) -> &dyn CylinderMeasure {
        match self {
            BuiltReference::Markov(m) => m,
            BuiltReference::Orbit(m) => m,
        }
    }

    pub fn name(&self) -> String {
        match self {
            BuiltReference::Markov(m) => m.name.clone(),
            BuiltReference::Orbit(_) => "orbit".into(),
        }
    }
}

impl ReferenceConfig {
    pub fn build(&self, sys: &SystemSpec, phi: &Potential) -> crate::Result<BuiltReference> {
        Ok(match self {
            ReferenceConfig::Gibbs => BuiltReference::Markov(ReferenceMeasure::gibbs(sys, phi, "gibbs")?),
            ReferenceConfig::Lebesgue => BuiltReference::Markov(ReferenceMeasure::lebesgue(sys)?),
            ReferenceConfig::Parry => BuiltReference::Markov(ReferenceMeasure::parry(sys)?),
            ReferenceConfig::Bernoulli { p } => BuiltReference::Markov(ReferenceMeasure::bernoulli(sys, p)?),
            ReferenceConfig::Orbit { word } => BuiltReference::Orbit(omega_x(sys, word)?),
        })
    }
}

fn default_potential_id() -> String {
    "phi".into()
}
fn default_alpha() -> f64 {
    0.5
}
fn default_ell() -> Vec<Ell> {
    vec![Ell::Finite(1), Ell::Finite(4), Ell::Finite(16), Ell::Finite(64), Ell::Infinite]
}
fn default_n_min() -> usize {
    1
}
fn default_n_max() -> usize {
    12
}
fn default_delta() -> Vec<f64> {
    vec![0.15, 0.25]
}
fn default_depths() -> Vec<usize> {
    vec![1, 2, 3, 4]
}
fn default_box() -> f64 {
    crate::deviations::DEFAULT_BOX
}
fn default_max_iter() -> usize {
    crate::deviations::DEFAULT_MAX_ITER
}
fn default_ell0() -> u64 {
    1
}
fn default_budget() -> u64 {
    DEFAULT_BUDGET as u64
}
fn default_ulam_bins() -> usize {
    crate::oracle::DEFAULT_ULAM_BINS
}
fn default_output_dir() -> String {
    "out".into()
}

/// One experiment. Every field has a default except `system`; the resolved form written
/// next to the results spells all of them out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub task: Option<Task>,
    pub system: SystemConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default = "default_potential_id")]
    pub potential_id: String,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_ell")]
    pub ell: Vec<Ell>,
    #[serde(default = "default_n_min")]
    pub n_min: usize,
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    /// `orbits`: report orbit classes instead of points.
    #[serde(default)]
    pub collapse_orbits: bool,
    #[serde(default = "default_delta")]
    pub delta: Vec<f64>,
    /// `ldp`: the mean `v`; when absent, the mean under the measure of maximal entropy.
    #[serde(default)]
    pub center: Option<f64>,
    #[serde(default = "default_depths")]
    pub depths: Vec<usize>,
    #[serde(default = "default_box")]
    pub box_bound: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub reference: ReferenceConfig,
    /// `bowen`: `ℓ` at `n = n_min`, doubled at each later `n`.
    #[serde(default = "default_ell0")]
    pub ell0: u64,
    #[serde(default = "default_ulam_bins")]
    pub ulam_bins: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: String,
}

/// A configuration that cannot describe a valid run.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct SchemaError(pub String);

/// Flag overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub alpha: Option<f64>,
    pub ell: Option<Vec<Ell>>,
    pub n_min: Option<usize>,
    pub n_max: Option<usize>,
    pub delta: Option<Vec<f64>>,
    pub depths: Option<Vec<usize>>,
    pub potential: Option<PotentialConfig>,
    pub budget: Option<u64>,
    pub seed: Option<u64>,
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, SchemaError> {
        serde_json::from_str(text).map_err(|e| SchemaError(format!("invalid config: {e}")))
    }

    /// Applies `task` and the overrides, then validates.
    pub fn resolve(mut self, task: Task, o: Overrides) -> Result<Self, SchemaError> {
        match self.task {
            Some(t) if t != task => {
                return Err(SchemaError(format!(
                    "config is for task {:?} but subcommand {:?} was given",
                    t.name(),
                    task.name()
                )))
            }
            _ => self.task = Some(task),
        }
        if let Some(v) = o.alpha {
            self.alpha = v;
        }
        if let Some(v) = o.ell {
            self.ell = v;
        }
        if let Some(v) = o.n_min {
            self.n_min = v;
        }
        if let Some(v) = o.n_max {
            self.n_max = v;
        }
        if let Some(v) = o.delta {
            self.delta = v;
        }
        if let Some(v) = o.depths {
            self.depths = v;
        }
        if let Some(v) = o.potential {
            self.potential = v;
        }
        if let Some(v) = o.budget {
            self.budget = v;
        }
        if let Some(v) = o.seed {
            self.seed = v;
        }
        if let Some(v) = o.output_dir {
            self.output_dir = v;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn task(&self) -> Task {
        self.task.expect("resolved configs carry a task")
    }

    fn validate(&self) -> Result<(), SchemaError> {
        let bad = |m: String| Err(SchemaError(m));
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.ell.is_empty() {
            return bad("ell must list at least one value".into());
        }
        if self.n_min == 0 || self.n_max < self.n_min {
            return bad(format!("need 1 <= n_min <= n_max, got {}..{}", self.n_min, self.n_max));
        }
        if self.delta.is_empty() || self.delta.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return bad("delta must list nonnegative values".into());
        }
        if self.depths.is_empty() || self.depths.contains(&0) {
            return bad("depths must list positive values".into());
        }
        if !(self.box_bound > 0.0 && self.box_bound.is_finite()) {
            return bad(format!("box_bound must be positive, got {}", self.box_bound));
        }
        if self.max_iter == 0 || self.ulam_bins == 0 || self.ell0 == 0 || self.budget == 0 {
            return bad("max_iter, ulam_bins, ell0 and budget must be positive".into());
        }
        if self.output_dir.is_empty() {
            return bad("output_dir must not be empty".into());
        }
        let sys = self.system.build().map_err(|e| SchemaError(format!("system: {e}")))?;
        self.potential.build(&sys).map_err(|e| SchemaError(format!("potential: {e}")))?;
        Ok(())
    }

    /// Canonical JSON of the resolved configuration.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_written_back() {
        let c = ExperimentConfig::from_json(r#"{"system": {"kind": "doubling"}}"#).unwrap();
        let r = c.resolve(Task::Pressure, Overrides::default()).unwrap();
        let text = r.to_json();
        for key in ["\"alpha\"", "\"ell\"", "\"budget\"", "\"reference\"", "\"task\": \"pressure\"", "\"inf\""] {
            assert!(text.contains(key), "{key} missing from {text}");
        }
        let again = ExperimentConfig::from_json(&text).unwrap().resolve(Task::Pressure, Overrides::default()).unwrap();
        assert_eq!(again, r);
    }

    #[test]
    fn schema_violations() {
        let unknown = r#"{"system": {"kind": "doubling"}, "alpah": 0.5}"#;
        assert!(ExperimentConfig::from_json(unknown).is_err());
        let c = ExperimentConfig::from_json(r#"{"system": {"kind": "doubling"}, "alpha": -1}"#).unwrap();
        assert!(c.resolve(Task::Pressure, Overrides::default()).is_err());
        let c = ExperimentConfig::from_json(r#"{"system": {"kind": "manpo", "s": 1.5}}"#).unwrap();
        assert!(c.resolve(Task::Orbits, Overrides::default()).is_err());
        let c = ExperimentConfig::from_json(r#"{"task": "rate", "system": {"kind": "doubling"}}"#).unwrap();
        assert!(c.resolve(Task::Ldp, Overrides::default()).is_err());
        let c = ExperimentConfig::from_json(
            r#"{"system": {"kind": "doubling"}, "potential": {"kind": "cyl", "depth": 1, "values": [1]}}"#,
        )
        .unwrap();
        assert!(c.resolve(Task::Oracle, Overrides::default()).is_err());
    }

    #[test]
    fn overrides_win() {
        let c = ExperimentConfig::from_json(r#"{"system": {"kind": "golden_mean"}, "alpha": 0.3}"#).unwrap();
        let o = Overrides { alpha: Some(0.2), ell: Some(vec![Ell::Infinite]), n_max: Some(9), ..Default::default() };
        let r = c.resolve(Task::Pressure, o).unwrap();
        assert_eq!((r.alpha, r.ell.clone(), r.n_max), (0.2, vec![Ell::Infinite], 9));
    }
}
