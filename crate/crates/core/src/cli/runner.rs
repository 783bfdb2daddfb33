//! Executes a resolved experiment into in-memory artifacts, then writes them.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use super::config::{BuiltReference, ExperimentConfig, SchemaError, Task};
use crate::deviations::{
    generalized_entropy, ld_bound, ld_counts, rate_function, AscentOptions, DualSearchSpace, LdCount,
};
use crate::error::Error;
use crate::measures::{bowen_convergence_report, diagonal_schedule, TestFunctionFamily};
use crate::oracle::{exact_pressure, topological_entropy, ulam_pressure, MarkovMeasure, MarkovModel, OraclePressure, PressureMethod};
use crate::orbits::{collapse_orbits, enumerate_certified, Ell};
use crate::systems::{to_cylinder, CylinderTable, Potential, SystemSpec};
use crate::thermo::{alpha_of_phi, p_ep};

pub const RESOLVED_CONFIG: &str = "resolved-config.json";
pub const RESULTS_JSON: &str = "results.json";
pub const RESULTS_CSV: &str = "results.csv";
pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Run(#[from] Error),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for schema violations, 3 for an exceeded budget, 4 for a missing oracle, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema(_) => 2,
            CliError::Run(Error::BudgetExceeded { .. }) => 3,
            CliError::Run(Error::OracleUnavailable(_)) => 4,
            _ => 1,
        }
    }
}

/// Files of one run, in write order.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifacts {
    pub files: Vec<(String, Vec<u8>)>,
}

/// Numbers in CSV cells: 17 significant digits.
fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        // print -0 as 0
        format!("{:.16e}", v + 0.0)
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

struct Table {
    w: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(header)?;
        Ok(Table { w })
    }

    fn row(&mut self, cells: Vec<String>) -> Result<(), CliError> {
        self.w.write_record(cells)?;
        Ok(())
    }

    fn finish(self) -> Result<Vec<u8>, CliError> {
        self.w.into_inner().map_err(|e| CliError::Csv(e.into_error().into()))
    }
}

fn to_json_bytes<T: Serialize>(v: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("results serialize");
    s.push('\n');
    s.into_bytes()
}

struct Ctx {
    cfg: ExperimentConfig,
    sys: SystemSpec,
    phi: Potential,
}

impl Ctx {
    fn budget(&self) -> u128 {
        self.cfg.budget as u128
    }
}

/// Runs the experiment and returns every artifact except the manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, CliError> {
    let sys = cfg.system.build().map_err(|e| SchemaError(format!("system: {e}")))?;
    let phi = cfg.potential.build(&sys).map_err(|e| SchemaError(format!("potential: {e}")))?;
    let ctx = Ctx { cfg: cfg.clone(), sys, phi };
    let (summary, csv) = match cfg.task() {
        Task::Orbits => run_orbits(&ctx)?,
        Task::Pressure => run_pressure(&ctx)?,
        Task::Bowen => run_bowen(&ctx)?,
        Task::Ldp => run_ldp(&ctx)?,
        Task::Rate => run_rate(&ctx)?,
        Task::Oracle => run_oracle(&ctx)?,
    };
    Ok(Artifacts {
        files: vec![
            (RESOLVED_CONFIG.into(), cfg.to_json().into_bytes()),
            (RESULTS_JSON.into(), to_json_bytes(&summary)),
            (RESULTS_CSV.into(), csv),
        ],
    })
}

fn run_orbits(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let mut summary = Vec::new();
    let mut t = if cfg.collapse_orbits {
        Table::new(&["n", "word", "period", "multiplicity", "x", "lyapunov", "birkhoff", "ell_min"])?
    } else {
        Table::new(&["n", "word", "x", "lyapunov", "birkhoff", "ell_min"])?
    };
    for n in cfg.n_min..=cfg.n_max {
        let recs = enumerate_certified(&ctx.sys, n, cfg.alpha, std::slice::from_ref(&ctx.phi), ctx.budget())?;
        let ell_min = |r: &crate::orbits::PeriodicPointRecord| r.certificate.map(|c| c.ell_min).unwrap_or(Ell::Infinite);
        let efix: Vec<Value> = cfg
            .ell
            .iter()
            .map(|&ell| {
                let c = recs.iter().filter(|r| ell_min(r).is_finite() && ell_min(r) <= ell).count();
                json!({ "ell": ell, "count": c })
            })
            .collect();
        if cfg.collapse_orbits {
            let classes = collapse_orbits(&recs);
            summary.push(json!({ "n": n, "points": recs.len(), "orbits": classes.len(), "efix": efix }));
            for c in classes {
                let r = &c.representative;
                t.row(vec![
                    n.to_string(),
                    r.word.to_string(),
                    c.period.to_string(),
                    c.multiplicity.to_string(),
                    opt_num(r.x),
                    opt_num(r.lyapunov),
                    num(r.birkhoff[0]),
                    ell_min(r).to_string(),
                ])?;
            }
        } else {
            summary.push(json!({ "n": n, "points": recs.len(), "efix": efix }));
            for r in &recs {
                t.row(vec![
                    n.to_string(),
                    r.word.to_string(),
                    opt_num(r.x),
                    opt_num(r.lyapunov),
                    num(r.birkhoff[0]),
                    ell_min(r).to_string(),
                ])?;
            }
        }
    }
    Ok((json!({ "task": "orbits", "alpha": cfg.alpha, "per_n": summary }), t.finish()?))
}

/// Exact pressure when the potential is cylinder-type, otherwise Ulam on maps.
fn oracle_pressure(ctx: &Ctx) -> Result<OraclePressure, Error> {
    match exact_pressure(&ctx.sys, &ctx.phi) {
        Err(Error::OracleUnavailable(_)) if ctx.sys.is_map() => {
            let e = ulam_pressure(&ctx.sys, &ctx.phi, ctx.cfg.ulam_bins)?;
            Ok(OraclePressure { value: e.value, method: PressureMethod::Ulam { bins: e.bins, order: e.order } })
        }
        other => other,
    }
}

fn run_pressure(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let report = p_ep(&ctx.sys, &ctx.phi, cfg.alpha, &cfg.ell, cfg.n_max, ctx.budget())?;
    let oracle = match oracle_pressure(ctx) {
        Ok(p) => Some(p),
        Err(Error::OracleUnavailable(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut t = Table::new(&["n", "ell", "log_q_ep", "q_ep", "rate", "count", "fallback"])?;
    for r in &report.rows {
        t.row(vec![
            r.n.to_string(),
            r.ell.to_string(),
            num(r.log_q_ep),
            num(r.q_ep),
            num(r.rate),
            r.count.to_string(),
            r.fallback.to_string(),
        ])?;
    }
    let summary = json!({
        "task": "pressure",
        "p_ep_limit": report.p_ep_limit,
        "oracle_pressure": oracle,
        "report": report,
    });
    Ok((summary, t.finish()?))
}

fn run_bowen(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let BuiltReference::Markov(reference) = cfg.reference.build(&ctx.sys, &ctx.phi)? else {
        return Err(Error::InvalidArgument("the bowen task needs a Markov reference measure".into()).into());
    };
    let family = TestFunctionFamily::default_for(&ctx.sys)?;
    let schedule = diagonal_schedule(cfg.n_min, cfg.n_max, cfg.ell0);
    let report = bowen_convergence_report(
        &ctx.sys,
        &ctx.phi,
        &cfg.potential_id,
        cfg.alpha,
        &schedule,
        &reference,
        &family,
        ctx.budget(),
    )?;
    let mut header = vec!["n".to_string(), "ell".into(), "log_a".into(), "distance".into()];
    header.extend(report.test_functions.iter().map(|f| format!("int {f}")));
    let mut t = Table::new(&header.iter().map(String::as_str).collect::<Vec<_>>())?;
    for r in &report.rows {
        let mut cells = vec![r.n.to_string(), r.ell.to_string(), opt_num(r.log_a), opt_num(r.distance)];
        cells.extend(r.integrals.iter().map(|v| num(*v)));
        cells.resize(header.len(), String::new());
        t.row(cells)?;
    }
    Ok((json!({ "task": "bowen", "report": report }), t.finish()?))
}

fn run_ldp(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let center = match cfg.center {
        Some(v) => v,
        None => ld_bound(&ctx.sys, &ctx.phi, 0.0, 0.0)?.unconstrained_mean,
    };
    let mut t = Table::new(&["delta", "n", "count", "rate", "bound", "efix_size"])?;
    let ell = *cfg.ell.iter().max().expect("validated nonempty");
    let mut bounds = Vec::with_capacity(cfg.delta.len());
    for &delta in &cfg.delta {
        bounds.push(match ld_bound(&ctx.sys, &ctx.phi, center, delta) {
            Ok(b) => Some(b),
            Err(Error::BoundIsMinusInfinity) => None,
            Err(e) => return Err(e.into()),
        });
    }
    let mut counts: Vec<Vec<LdCount>> = vec![Vec::new(); cfg.delta.len()];
    for n in cfg.n_min..=cfg.n_max {
        let row = ld_counts(&ctx.sys, &ctx.phi, center, &cfg.delta, cfg.alpha, ell, n, ctx.budget())?;
        for (acc, c) in counts.iter_mut().zip(row) {
            acc.push(c);
        }
    }
    let mut per_delta = Vec::with_capacity(cfg.delta.len());
    for ((&delta, bound), rows) in cfg.delta.iter().zip(bounds).zip(counts) {
        let value = bound.as_ref().map(|b| b.value).unwrap_or(f64::NEG_INFINITY);
        for c in &rows {
            t.row(vec![
                num(delta),
                c.n.to_string(),
                c.count.to_string(),
                num(c.rate),
                num(value),
                c.efix_size.to_string(),
            ])?;
        }
        per_delta.push(json!({
            "delta": delta,
            "bound": bound,
            "bound_is_minus_infinity": bound.is_none(),
            "counts": rows,
        }));
    }
    let summary = json!({ "task": "ldp", "center": center, "alpha": cfg.alpha, "ell": ell, "per_delta": per_delta });
    Ok((summary, t.finish()?))
}

fn run_rate(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let reference = cfg.reference.build(&ctx.sys, &ctx.phi)?;
    let mu = reference.as_measure();
    let opts = AscentOptions { max_iter: cfg.max_iter, ..Default::default() };
    let mut t = Table::new(&["depth", "dimension", "i_lower", "gradient_norm", "iterations", "oracle", "h_hat"])?;
    let mut rates = Vec::new();
    let mut entropies = Vec::new();
    for &m in &cfg.depths {
        let space = DualSearchSpace::new(&ctx.sys.transition, m, cfg.box_bound)?;
        let r = rate_function(&ctx.sys, &ctx.phi, mu, &space, opts)?;
        let h = generalized_entropy(&ctx.sys, mu, &space, opts)?;
        t.row(vec![
            m.to_string(),
            space.dimension().to_string(),
            num(r.i_lower),
            num(r.gradient_norm),
            r.iterations.to_string(),
            opt_num(r.oracle),
            opt_num(h.h_hat),
        ])?;
        rates.push(r);
        entropies.push(h);
    }
    let summary = json!({
        "task": "rate",
        "reference": reference.name(),
        "rate": rates,
        "generalized_entropy": entropies,
    });
    Ok((summary, t.finish()?))
}

fn run_oracle(ctx: &Ctx) -> Result<(Value, Vec<u8>), CliError> {
    let cfg = &ctx.cfg;
    let pressure = oracle_pressure(ctx)?;
    let h_top = topological_entropy(&ctx.sys)?;
    let alpha = match alpha_of_phi(&ctx.sys, &ctx.phi, cfg.n_max, None, ctx.budget()) {
        Ok(a) => Some(a),
        Err(Error::MissingGeometricWeights) => None,
        Err(e) => return Err(e.into()),
    };
    let depth = *cfg.depths.iter().max().expect("validated nonempty");
    let mut t = Table::new(&["word", "gibbs_mass", "parry_mass"])?;
    let parry = MarkovMeasure::parry(&ctx.sys.transition)?;
    let mut mean_range = None;
    if let Some(table) = to_cylinder(&ctx.sys, &ctx.phi) {
        let model = MarkovModel::for_potential(&ctx.sys, &ctx.phi)?;
        let gibbs = model.gibbs()?;
        let zero = CylinderTable::from_fn(&ctx.sys.transition, model.depth(), |_| 0.0)?;
        let flat = MarkovModel::from_cylinder(&ctx.sys.transition, &zero)?;
        mean_range = Some(flat.mean_range(&flat.edge_values(&table)?)?);
        for w in ctx.sys.transition.words(depth) {
            t.row(vec![w.to_string(), num(gibbs.cylinder_mass(w.symbols())), num(parry.cylinder_mass(w.symbols()))])?;
        }
    }
    let summary = json!({
        "task": "oracle",
        "pressure": pressure,
        "topological_entropy": h_top,
        "potential_mean_range": mean_range,
        "alpha_of_phi": alpha,
    });
    Ok((summary, t.finish()?))
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// The run manifest: versions, hashes of every artifact, and wall time.
pub fn manifest(cfg: &ExperimentConfig, artifacts: &Artifacts, wall_seconds: f64) -> Vec<u8> {
    let files: Vec<Value> =
        artifacts.files.iter().map(|(name, bytes)| json!({ "name": name, "sha256": sha256_hex(bytes) })).collect();
    to_json_bytes(&json!({
        "tool": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "task": cfg.task().name(),
        "seed": cfg.seed,
        "parameter_hash": sha256_hex(cfg.to_json().as_bytes()),
        "files": files,
        "threads": rayon::current_num_threads(),
        "wall_time_seconds": wall_seconds,
    }))
}

/// Writes the artifacts and the manifest into `dir`.
pub fn write_artifacts(dir: &Path, artifacts: &Artifacts, manifest: &[u8]) -> Result<(), CliError> {
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| CliError::Io { path, source }
    };
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    for (name, bytes) in &artifacts.files {
        let p = dir.join(name);
        std::fs::write(&p, bytes).map_err(io(&p))?;
    }
    let p = dir.join(MANIFEST);
    std::fs::write(&p, manifest).map_err(io(&p))
}

/// Runs `cfg` and writes its outputs; nothing is written when the run fails.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<PathBuf, CliError> {
    let start = Instant::now();
    let artifacts = run(cfg)?;
    let m = manifest(cfg, &artifacts, start.elapsed().as_secs_f64());
    let dir = PathBuf::from(&cfg.output_dir);
    write_artifacts(&dir, &artifacts, &m)?;
    Ok(dir)
}
