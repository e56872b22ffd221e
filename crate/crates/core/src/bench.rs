//! Batch experiments over generated instance families.
//!
//! Every generated instance is first solved with Shor; instances Shor solves
//! are counted and set aside, the rest are solved with each configured
//! relaxation. A cell keeps generating until `count` instances survive.
//! Results are one CSV row per (instance, relaxation) and a JSON summary per `(n, m)` cell with solve counts, times and the gap-closure
//! cross-table grouped by the Kron/Beta solved status.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::{evaluate, gap_closure, RelaxationReport};
use crate::error::{Error, Result};
use crate::generators::{generate_one, Family};
use crate::instances::Instance;
use crate::relaxations::{BuildOptions, RelaxationKind};
use crate::solver::{Backend, SolverOptions};

pub const CSV_HEADER: [&str; 15] = [
    "instance_id",
    "family",
    "n",
    "m",
    "seed",
    "relaxation",
    "status",
    "r_star",
    "v_feasible",
    "relative_gap",
    "eig_ratio",
    "solved",
    "rlt_activity",
    "build_ms",
    "solve_ms",
];

/// Solver settings as they appear in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub max_iter: u32,
    pub time_limit_s: f64,
    pub backend: Option<String>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverOptions::default();
        SolverConfig { rel_tol: d.rel_tol, max_iter: d.max_iter, time_limit_s: d.time_limit_s, backend: None }
    }
}

impl SolverConfig {
    pub fn options(&self) -> Result<SolverOptions> {
        let mut o = SolverOptions { rel_tol: self.rel_tol, max_iter: self.max_iter, time_limit_s: self.time_limit_s, ..Default::default() };
        if let Some(b) = &self.backend {
            o = o.with_backend(b.parse::<Backend>()?);
        }
        o.validate()?;
        Ok(o)
    }
}

fn default_count() -> usize {
    100
}

fn default_relaxations() -> Vec<String> {
    vec!["kron".into(), "beta".into()]
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

fn default_workers() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: Family,
    pub dims: Vec<(usize, usize)>,
    /// Instances per cell that survive the Shor filter.
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default)]
    pub master_seed: u64,
    /// Run after Shor on the instances Shor leaves unsolved (`kron`, `beta`,
    /// `beta0`).
    #[serde(default = "default_relaxations")]
    pub relaxations: Vec<String>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default = "default_workers")]
    pub workers: usize,
}

impl ExperimentConfig {
    pub fn new(family: Family, dims: Vec<(usize, usize)>, count: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            family,
            dims,
            count,
            master_seed,
            relaxations: default_relaxations(),
            solver: SolverConfig::default(),
            output_dir: default_output(),
            workers: default_workers(),
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let cfg: Self = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid("count must be at least 1"));
        }
        if self.dims.is_empty() {
            return Err(Error::invalid("dims must list at least one (n, m) pair"));
        }
        for &(n, m) in &self.dims {
            self.family.check_dims(n, m)?;
        }
        for r in &self.relaxations {
            if !matches!(r.as_str(), "kron" | "beta" | "beta0") {
                return Err(Error::invalid(format!("unknown relaxation '{r}' (expected kron, beta or beta0)")));
            }
            if r == "beta0" && self.family != Family::Linear {
                return Err(Error::invalid("beta0 applies to the linear family only"));
            }
        }
        self.solver.options()?;
        Ok(())
    }
}

/// All reports for one generated instance.
#[derive(Clone, Debug)]
pub struct InstanceOutcome {
    pub instance_id: String,
    pub n: usize,
    pub m: usize,
    pub seed: u64,
    pub instance: Instance<f64>,
    pub shor: Option<RelaxationReport>,
    /// Relaxations beyond Shor, keyed by short name; empty unless kept.
    pub reports: BTreeMap<String, RelaxationReport>,
    pub error: Option<String>,
}

impl InstanceOutcome {
    /// Shor produced a usable bound and did not solve the instance.
    pub fn kept(&self) -> bool {
        self.shor.as_ref().is_some_and(|s| s.has_bound() && s.v_feasible.is_finite() && !s.solved)
    }

    pub fn solved(&self, name: &str) -> bool {
        self.reports.get(name).is_some_and(|r| r.solved)
    }

    /// Smallest feasible value among the extracted points of all relaxations.
    pub fn v_best(&self) -> Option<f64> {
        self.shor
            .iter()
            .chain(self.reports.values())
            .map(|r| r.v_feasible)
            .filter(|v| v.is_finite())
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Gap closure of relaxation `name`, `None` if unavailable or Shor-exact.
    pub fn closure(&self, name: &str) -> Option<f64> {
        let s = self.shor.as_ref()?.r_star;
        let r = self.reports.get(name)?;
        if !r.has_bound() {
            return None;
        }
        gap_closure(s, r.r_star, self.v_best()?)
    }
}

fn run_instance(family: Family, n: usize, m: usize, cfg: &ExperimentConfig, opts: &SolverOptions, index: u64) -> InstanceOutcome {
    let instance_id = format!("{family}-n{n}-m{m}-{index:04}");
    let inst = match generate_one(family, n, m, cfg.master_seed, index) {
        Ok(i) => i,
        Err(e) => {
            return InstanceOutcome {
                instance_id,
                n,
                m,
                seed: 0,
                instance: Instance::Linear(crate::catalog::linear_example().0),
                shor: None,
                reports: BTreeMap::new(),
                error: Some(e.to_string()),
            }
        }
    };
    let seed = inst.provenance().seed;
    let mut out = InstanceOutcome { instance_id: instance_id.clone(), n, m, seed, instance: inst, shor: None, reports: BTreeMap::new(), error: None };
    let run = |kind: RelaxationKind, inst: &Instance<f64>| -> Result<RelaxationReport> {
        let mut r = evaluate(inst, kind, BuildOptions::default(), opts)?;
        r.instance_id = instance_id.clone();
        r.w = None;
        Ok(r)
    };
    let shor_kind = RelaxationKind::shor_for(family == Family::Linear);
    match run(shor_kind, &out.instance) {
        Ok(r) => out.shor = Some(r),
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    }
    if !out.kept() {
        return out;
    }
    for name in &cfg.relaxations {
        let kind = match RelaxationKind::resolve(name, &out.instance) {
            Ok(k) => k,
            Err(e) => {
                out.error = Some(e.to_string());
                continue;
            }
        };
        match run(kind, &out.instance) {
            Ok(r) => {
                out.reports.insert(name.clone(), r);
            }
            Err(e) => out.error = Some(format!("{name}: {e}")),
        }
    }
    out
}

/// Status pair `(Kron solved, Beta solved)` rows of the cross-table.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ClosureCell {
    pub kron: &'static str,
    pub beta: &'static str,
    pub instances: usize,
    /// Instances whose Shor bound equals the best feasible value; excluded
    /// from the averages.
    pub shor_exact: usize,
    pub mean_closure_kron: Option<f64>,
    pub mean_closure_beta: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CellSummary {
    pub n: usize,
    pub m: usize,
    pub generated: usize,
    pub solved_by_shor: usize,
    pub failures: usize,
    /// Instances left after the Shor filter.
    pub instances: usize,
    pub solved: BTreeMap<String, usize>,
    pub solve_time_s: BTreeMap<String, f64>,
    pub build_time_s: BTreeMap<String, f64>,
    pub gap_closure: Vec<ClosureCell>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// The four Kron/Beta status groups, in the order unsolved/unsolved,
/// unsolved/solved, solved/unsolved, solved/solved.
pub fn closure_table<'a>(outcomes: impl IntoIterator<Item = &'a InstanceOutcome> + Clone) -> Vec<ClosureCell> {
    let label = |b: bool| if b { "solved" } else { "unsolved" };
    [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(ks, bs)| {
            let group: Vec<&InstanceOutcome> = outcomes
                .clone()
                .into_iter()
                .filter(|o| o.kept() && o.reports.contains_key("kron") && o.reports.contains_key("beta"))
                .filter(|o| o.solved("kron") == ks && o.solved("beta") == bs)
                .collect();
            let shor_exact = group.iter().filter(|o| o.closure("kron").is_none() && o.closure("beta").is_none()).count();
            let ck: Vec<f64> = group.iter().filter_map(|o| o.closure("kron")).collect();
            let cb: Vec<f64> = group.iter().filter_map(|o| o.closure("beta")).collect();
            ClosureCell {
                kron: label(ks),
                beta: label(bs),
                instances: group.len(),
                shor_exact,
                mean_closure_kron: mean(&ck),
                mean_closure_beta: mean(&cb),
            }
        })
        .collect()
}

fn summarize(n: usize, m: usize, outcomes: &[&InstanceOutcome], names: &[String]) -> CellSummary {
    let mut s = CellSummary { n, m, generated: outcomes.len(), ..Default::default() };
    let add_time = |s: &mut CellSummary, name: &str, r: &RelaxationReport| {
        *s.solve_time_s.entry(name.to_string()).or_insert(0.0) += r.wall_time_s;
        *s.build_time_s.entry(name.to_string()).or_insert(0.0) += r.build_time_s;
    };
    for o in outcomes {
        if let Some(r) = &o.shor {
            add_time(&mut s, "shor", r);
        }
        match &o.shor {
            Some(r) if r.solved => s.solved_by_shor += 1,
            _ if o.kept() => s.instances += 1,
            _ => s.failures += 1,
        }
        for (name, r) in &o.reports {
            add_time(&mut s, name, r);
        }
    }
    for name in names {
        let count = outcomes.iter().filter(|o| o.kept() && o.solved(name)).count();
        s.solved.insert(name.clone(), count);
    }
    if names.iter().any(|n| n == "kron") && names.iter().any(|n| n == "beta") {
        s.gap_closure = closure_table(outcomes.iter().copied());
    }
    s
}

#[derive(Clone, Debug, Serialize)]
pub struct TableSummary {
    pub family: Family,
    pub count: usize,
    pub master_seed: u64,
    pub relaxations: Vec<String>,
    pub cells: Vec<CellSummary>,
    /// Cross-table over all cells together.
    pub gap_closure: Vec<ClosureCell>,
}

#[derive(Clone, Debug)]
pub struct TableResult {
    pub config: ExperimentConfig,
    pub outcomes: Vec<InstanceOutcome>,
    pub summary: TableSummary,
}

/// Upper bound on generated instances per kept instance before a cell gives up.
pub const MAX_ATTEMPTS_PER_KEPT: usize = 1000;

/// Generates instances of one cell in index order until `cfg.count` of them
/// survive the Shor filter. Work is fanned out in chunks, and everything past
/// the `count`-th kept instance is discarded, so the result does not depend
/// on the worker count.
fn run_cell(cfg: &ExperimentConfig, opts: &SolverOptions, n: usize, m: usize) -> Vec<InstanceOutcome> {
    let chunk = (2 * cfg.count).max(8 * cfg.workers.max(1)) as u64;
    let limit = (cfg.count * MAX_ATTEMPTS_PER_KEPT) as u64;
    let mut out: Vec<InstanceOutcome> = Vec::new();
    let mut kept = 0;
    let mut next = 0u64;
    while kept < cfg.count && next < limit {
        let end = (next + chunk).min(limit);
        let batch: Vec<InstanceOutcome> =
            (next..end).into_par_iter().map(|i| run_instance(cfg.family, n, m, cfg, opts, i)).collect();
        for o in batch {
            if kept == cfg.count {
                break;
            }
            kept += o.kept() as usize;
            out.push(o);
        }
        next = end;
    }
    if kept < cfg.count {
        log::warn!("{} ({n}, {m}): only {kept} of {} instances survived the Shor filter", cfg.family, cfg.count);
    }
    out
}

/// Runs every cell of the config on a pool of `workers` threads. Results do
/// not depend on the worker count except for timings.
pub fn run_table(cfg: &ExperimentConfig) -> Result<TableResult> {
    cfg.validate()?;
    let mut opts = cfg.solver.options()?;
    opts.threads = 1;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::invalid(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<InstanceOutcome> =
        pool.install(|| cfg.dims.iter().flat_map(|&(n, m)| run_cell(cfg, &opts, n, m)).collect());
    for o in &outcomes {
        if let Some(e) = &o.error {
            log::warn!("{}: {e}", o.instance_id);
        }
    }
    let cells = cfg
        .dims
        .iter()
        .map(|&(n, m)| {
            let group: Vec<&InstanceOutcome> = outcomes.iter().filter(|o| o.n == n && o.m == m).collect();
            summarize(n, m, &group, &cfg.relaxations)
        })
        .collect();
    let has_pair = cfg.relaxations.iter().any(|r| r == "kron") && cfg.relaxations.iter().any(|r| r == "beta");
    let summary = TableSummary {
        family: cfg.family,
        count: cfg.count,
        master_seed: cfg.master_seed,
        relaxations: cfg.relaxations.clone(),
        cells,
        gap_closure: if has_pair { closure_table(outcomes.iter()) } else { Vec::new() },
    };
    Ok(TableResult { config: cfg.clone(), outcomes, summary })
}

/// `%.12g`-style formatting, independent of locale.
pub fn fmt_g12(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s }
    };
    if (-5..12).contains(&exp) {
        trim(format!("{v:.*}", (11 - exp).max(0) as usize))
    } else {
        format!("{}e{}{:02}", trim(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn report_row(o: &InstanceOutcome, family: Family, name: &str, r: &RelaxationReport) -> Vec<String> {
    vec![
        o.instance_id.clone(),
        family.to_string(),
        o.n.to_string(),
        o.m.to_string(),
        o.seed.to_string(),
        name.to_string(),
        r.status.as_str().to_string(),
        fmt_g12(r.r_star),
        fmt_g12(r.v_feasible),
        fmt_g12(r.relative_gap),
        fmt_g12(r.eig_ratio),
        r.solved.to_string(),
        r.rlt_activity.map(fmt_g12).unwrap_or_default(),
        format!("{:.3}", 1e3 * r.build_time_s),
        format!("{:.3}", 1e3 * r.wall_time_s),
    ]
}

impl TableResult {
    /// CSV rows in instance order: Shor first, then the configured relaxations.
    pub fn rows(&self) -> Vec<Vec<String>> {
        let mut rows = Vec::new();
        for o in &self.outcomes {
            if let Some(r) = &o.shor {
                rows.push(report_row(o, self.config.family, "shor", r));
            }
            for name in &self.config.relaxations {
                if let Some(r) = o.reports.get(name) {
                    rows.push(report_row(o, self.config.family, name, r));
                }
            }
        }
        rows
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        for row in self.rows() {
            w.write_record(&row).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("CSV fields are UTF-8"))
    }

    /// Recounts the summary from the CSV rows.
    pub fn check_consistency(&self) -> Result<()> {
        let rows = self.rows();
        for cell in &self.summary.cells {
            let in_cell = |r: &&Vec<String>| r[2] == cell.n.to_string() && r[3] == cell.m.to_string();
            let shor_rows: Vec<&Vec<String>> = rows.iter().filter(in_cell).filter(|r| r[5] == "shor").collect();
            let shor_solved = shor_rows.iter().filter(|r| r[11] == "true").count();
            if shor_solved != cell.solved_by_shor {
                return Err(Error::invalid(format!("cell ({}, {}): Shor count differs from the rows", cell.n, cell.m)));
            }
            for (name, &count) in &cell.solved {
                let from_rows = rows.iter().filter(in_cell).filter(|r| &r[5] == name && r[11] == "true").count();
                if from_rows != count {
                    return Err(Error::invalid(format!("cell ({}, {}): {name} count differs from the rows", cell.n, cell.m)));
                }
            }
        }
        Ok(())
    }

    /// Writes `results.csv` and `summary.json` to the configured directory.
    pub fn write(&self, dir: &Path) -> Result<()> {
        self.check_consistency()?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("results.csv"), self.to_csv()?)?;
        let mut json = serde_json::to_string_pretty(&self.summary)?;
        json.push('\n');
        std::fs::write(dir.join("summary.json"), json)?;
        Ok(())
    }
}

/// The hard-coded reference problems runnable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExampleName {
    LinearEx,
    BallEx,
    Counterexample,
}

impl ExampleName {
    pub const ALL: [ExampleName; 3] = [ExampleName::LinearEx, ExampleName::BallEx, ExampleName::Counterexample];

    pub fn as_str(self) -> &'static str {
        match self {
            ExampleName::LinearEx => "linear_ex",
            ExampleName::BallEx => "ball_ex",
            ExampleName::Counterexample => "counterexample",
        }
    }
}

impl std::str::FromStr for ExampleName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown example '{s}' (expected linear_ex, ball_ex or counterexample)")))
    }
}

/// One relaxation of an example next to its reference value.
#[derive(Clone, Debug, Serialize)]
pub struct ExampleEntry {
    pub relaxation: String,
    pub value: f64,
    pub reference: Option<f64>,
    pub x: Vec<f64>,
    pub solved: bool,
    pub wall_time_s: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExampleReport {
    pub name: ExampleName,
    pub entries: Vec<ExampleEntry>,
    pub x_reference: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<crate::verify::CounterexampleReport>,
}

/// Allowed deviation of example values and points from their references.
pub const EXAMPLE_TOL: f64 = 1e-3;

impl ExampleReport {
    /// Every value within [`EXAMPLE_TOL`] of its reference, the Beta point
    /// within the same distance of the reference point, and for the
    /// counterexample every verification check.
    pub fn passed(&self) -> bool {
        if let Some(c) = &self.counterexample {
            return c.passed();
        }
        let values = self.entries.iter().all(|e| e.reference.is_none_or(|r| (e.value - r).abs() <= EXAMPLE_TOL));
        let point = match (&self.x_reference, self.entries.last()) {
            (Some(xr), Some(e)) => e.x.len() == xr.len() && e.x.iter().zip(xr).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= EXAMPLE_TOL,
            _ => true,
        };
        values && point
    }
}

impl std::fmt::Display for ExampleReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.name.as_str())?;
        for e in &self.entries {
            let reference = e.reference.map(|r| format!(" (reference {r})")).unwrap_or_default();
            writeln!(f, "  {:<13} {:>12.6}{reference}  solved={}  x={:?}", e.relaxation, e.value, e.solved, e.x)?;
        }
        if let Some(c) = &self.counterexample {
            writeln!(f, "  r* = {:.6}  v* = {:.6}  (printed M̂: r* = {:.6}, v* = {:.6})", c.r_star, c.v_star, c.printed.r_star, c.printed.v_star)?;
            for chk in &c.checks {
                writeln!(f, "  [{}] {}: {}", if chk.passed { "ok" } else { "FAIL" }, chk.name, chk.detail)?;
            }
        }
        Ok(())
    }
}

fn example_entries(inst: &Instance<f64>, refs: &[(RelaxationKind, f64)], opts: &SolverOptions) -> Result<Vec<ExampleEntry>> {
    refs.iter()
        .map(|&(kind, reference)| {
            let r = evaluate(inst, kind, BuildOptions::default(), opts)?;
            Ok(ExampleEntry {
                relaxation: kind.as_str().to_string(),
                value: r.r_star,
                reference: Some(reference),
                x: r.x_extracted,
                solved: r.solved,
                wall_time_s: r.build_time_s + r.wall_time_s,
            })
        })
        .collect()
}

/// Solves a reference example with Kron and Beta (or, for the
/// counterexample, runs its full verification).
pub fn run_example(name: ExampleName, opts: &SolverOptions) -> Result<ExampleReport> {
    match name {
        ExampleName::LinearEx => {
            let (inst, r) = crate::catalog::linear_example();
            let refs = [(RelaxationKind::KronLinear, r.kron), (RelaxationKind::BetaLinear, r.beta)];
            let entries = example_entries(&inst.into(), &refs, opts)?;
            Ok(ExampleReport { name, entries, x_reference: Some(r.x_star), counterexample: None })
        }
        ExampleName::BallEx => {
            let (inst, r) = crate::catalog::ball_example();
            let refs = [(RelaxationKind::KronBalls, r.kron), (RelaxationKind::BetaBalls, r.beta)];
            let entries = example_entries(&inst.into(), &refs, opts)?;
            Ok(ExampleReport { name, entries, x_reference: Some(r.x_star), counterexample: None })
        }
        ExampleName::Counterexample => {
            let c = crate::verify::verify_counterexample(opts)?;
            let entries = vec![ExampleEntry {
                relaxation: RelaxationKind::BetaLinear.as_str().to_string(),
                value: c.r_star,
                reference: Some(1.0),
                x: c.w_star[1..c.w_star.len() - 1].to_vec(),
                solved: false,
                wall_time_s: c.wall_time_s,
            }];
            Ok(ExampleReport { name, entries, x_reference: None, counterexample: Some(c) })
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::invalid(format!("CSV: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g12_formatting() {
        assert_eq!(fmt_g12(0.0), "0");
        assert_eq!(fmt_g12(-2.4672), "-2.4672");
        assert_eq!(fmt_g12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_g12(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_g12(1e-7), "1e-07");
        assert_eq!(fmt_g12(f64::INFINITY), "inf");
        assert_eq!(fmt_g12(f64::NAN), "nan");
    }

    #[test]
    fn config_validation() {
        let ok = ExperimentConfig::new(Family::Linear, vec![(2, 2)], 1, 0);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.dims = vec![(2, 3)];
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.count = 0;
        assert!(bad.validate().is_err());
        let mut bad = ExperimentConfig::new(Family::Maxnorm, vec![(2, 5)], 1, 0);
        bad.relaxations.push("beta0".into());
        assert!(bad.validate().is_err());
        let parsed: ExperimentConfig =
            serde_json::from_str(r#"{"family":"martinez","dims":[[2,2]],"count":3}"#).unwrap();
        assert_eq!(parsed.count, 3);
        assert_eq!(parsed.relaxations, vec!["kron", "beta"]);
        assert!(serde_json::from_str::<ExperimentConfig>(r#"{"family":"linear","dims":[],"bogus":1}"#).is_err());
    }

    #[test]
    fn small_table_is_consistent_and_deterministic() {
        let mut cfg = ExperimentConfig::new(Family::Linear, vec![(2, 2)], 6, 5);
        cfg.relaxations.push("beta0".into());
        let a = run_table(&cfg).unwrap();
        a.check_consistency().unwrap();
        cfg.workers = 3;
        let b = run_table(&cfg).unwrap();
        let strip = |t: &TableResult| -> Vec<Vec<String>> { t.rows().into_iter().map(|r| r[..13].to_vec()).collect() };
        assert_eq!(strip(&a), strip(&b));
        let cell = &a.summary.cells[0];
        assert_eq!(cell.instances, 6);
        assert_eq!(cell.instances + cell.solved_by_shor + cell.failures, cell.generated);
        assert!(a.outcomes.last().unwrap().kept());
        assert!(a.to_csv().unwrap().starts_with(&CSV_HEADER.join(",")));
    }
}
