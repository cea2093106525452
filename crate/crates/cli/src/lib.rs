//! Subcommand implementations behind the `memodyn` binary.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use memodyn::analysis::{analyze, AnalysisOptions, AnalysisReport};
use memodyn::equivalence::{equivalence_report, read_period_csv, EquivalenceReport};
use memodyn::integrator::column_index;
use memodyn::netlist::{emit_netlist, NetlistSpec};
use memodyn::newtonian::{verify_all, ResidualReport};
use memodyn::{Model, Options, State, Traj};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Validation(String),
    #[error("{0}")]
    Numerical(String),
    #[error(transparent)]
    Core(#[from] memodyn::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {msg}")]
    Config { path: PathBuf, msg: String },
}

impl CliError {
    /// 2 for bad input, 3 for numerical trouble.
    pub fn exit_code(&self) -> u8 {
        use memodyn::Error as E;
        match self {
            CliError::Numerical(_) => 3,
            CliError::Core(E::StiffnessFailure { .. } | E::Divergence { .. } | E::TooManySteps { .. } | E::NonOscillatory) => 3,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    pub trajectory: Option<PathBuf>,
    pub report: Option<PathBuf>,
    pub netlist: Option<PathBuf>,
    pub sweep: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetlistBase {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "C")]
    pub c: f64,
}

impl Default for NetlistBase {
    fn default() -> Self {
        Self { r: 1e5, c: 1e-5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSamples {
    pub samples: usize,
    /// Parameter name to `[low, high)`.
    pub ranges: BTreeMap<String, [f64; 2]>,
}

/// Grid axes are expanded in key order, the first key varying slowest;
/// random samples follow the grid points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub grid: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub random: Option<RandomSamples>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: Model,
    /// Core initial state `[x, y, z, w]`; the MMO model takes `x/eta` here.
    #[serde(default)]
    pub initial: [f64; 4],
    #[serde(default = "default_integrator")]
    pub integrator: Options,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default)]
    pub output: OutputPaths,
    #[serde(default)]
    pub netlist: NetlistBase,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

fn default_integrator() -> Options {
    Options::adaptive(0.0, 200.0, 0.01, 1e-10, 1e-12)
}

impl Default for RunConfig {
    /// The MMO demo set from rest.
    fn default() -> Self {
        Self {
            circuit: Model::Mmo(memodyn::MmoParams::demo()),
            initial: [0.0; 4],
            integrator: default_integrator(),
            analysis: AnalysisOptions::default(),
            output: OutputPaths::default(),
            netlist: NetlistBase::default(),
            seed: 0,
            sweep: None,
        }
    }
}

impl RunConfig {
    pub fn from_json(text: &str, path: &Path) -> CliResult<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            // serde_json already appends the line and column
            CliError::Config { path: path.to_path_buf(), msg: format!("key `{}`: {}", e.path(), e.inner()) }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> CliResult<()> {
        self.circuit.validate()?;
        self.integrator.validate()?;
        if !self.initial.iter().all(|v| v.is_finite()) {
            return Err(CliError::Validation("initial state must be finite".into()));
        }
        Ok(())
    }

    pub fn initial_state(&self) -> State {
        State::from_core(self.initial)
    }
}

/// Written next to each trajectory as `<stem>.manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub samples: usize,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    /// Every sample equals the initial state.
    pub equilibrium: bool,
}

pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.json")
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> CliResult<()>) -> CliResult<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w)?;
    w.flush().map_err(io_err(path))
}

fn write_json<S: Serialize>(value: &S, out: Option<&Path>) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    match out {
        Some(p) => fs::write(p, text + "\n").map_err(io_err(p)),
        None => write_stdout(&(text + "\n")),
    }
}

fn write_stdout(text: &str) -> CliResult<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(io_err(Path::new("<stdout>")))
}

pub fn is_equilibrium(traj: &Traj) -> bool {
    let first = traj.states[0].to_array();
    traj.states.iter().all(|s| s.to_array() == first)
}

pub struct SimulateOutcome {
    pub trajectory: Traj,
    pub manifest: Manifest,
}

pub fn simulate(cfg: &RunConfig) -> CliResult<SimulateOutcome> {
    let (traj, stats) = memodyn::integrator::integrate_with_stats(&cfg.circuit, cfg.initial_state(), &cfg.integrator)?;
    let manifest = Manifest {
        tool: "memodyn".into(),
        version: VERSION.into(),
        config: cfg.clone(),
        samples: traj.len(),
        accepted_steps: stats.accepted,
        rejected_steps: stats.rejected,
        equilibrium: is_equilibrium(&traj),
    };
    Ok(SimulateOutcome { trajectory: traj, manifest })
}

/// Resolves `--plot-cols` names to trajectory column indices.
pub fn plot_columns(spec: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|name| column_index(name).ok_or_else(|| CliError::Validation(format!("unknown plot column `{name}`"))))
        .collect()
}

pub fn cmd_simulate(cfg: &RunConfig, out: Option<&Path>, plot_cols: Option<&str>) -> CliResult<Manifest> {
    let out = out
        .or(cfg.output.trajectory.as_deref())
        .ok_or_else(|| CliError::Validation("simulate needs --out or output.trajectory".into()))?;
    let cols = plot_cols.map(plot_columns).transpose()?;
    let SimulateOutcome { trajectory, manifest } = simulate(cfg)?;
    write_file(out, |w| Ok(trajectory.write_csv(w)?))?;
    write_json(&manifest, Some(&manifest_path(out)))?;
    if let Some(cols) = cols {
        let dat = out.with_extension("dat");
        write_file(&dat, |w| Ok(trajectory.write_plot_columns(w, &cols)?))?;
    }
    if manifest.equilibrium {
        eprintln!("equilibrium: trajectory stays at its initial state");
    }
    Ok(manifest)
}

/// Config from `--config`, else from the manifest next to the CSV.
pub fn config_for(csv: &Path, config: Option<&Path>) -> CliResult<RunConfig> {
    if let Some(p) = config {
        return RunConfig::load(p);
    }
    let mp = manifest_path(csv);
    if !mp.exists() {
        return Err(CliError::Validation(format!(
            "no --config given and no manifest at {}",
            mp.display()
        )));
    }
    let text = fs::read_to_string(&mp).map_err(io_err(&mp))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| CliError::Config { path: mp.clone(), msg: e.to_string() })?;
    m.config.validate()?;
    Ok(m.config)
}

pub fn load_trajectory(csv: &Path, model: Model) -> CliResult<Traj> {
    let f = File::open(csv).map_err(io_err(csv))?;
    Ok(Traj::read_csv(BufReader::new(f), model)?)
}

/// Exit status follows the embedded checks: converged period and closed loop.
pub fn cmd_analyze(csv: &Path, cfg: &RunConfig, out: Option<&Path>) -> CliResult<AnalysisReport<f64>> {
    let traj = load_trajectory(csv, cfg.circuit.clone())?;
    let report = analyze(&traj, &cfg.analysis)?;
    write_json(&report, out.or(cfg.output.report.as_deref()))?;
    if !(report.converged && report.closed) {
        return Err(CliError::Numerical(report.warnings.join("; ")));
    }
    Ok(report)
}

pub fn cmd_verify(csv: &Path, cfg: &RunConfig, out: Option<&Path>) -> CliResult<Vec<ResidualReport>> {
    let traj = load_trajectory(csv, cfg.circuit.clone())?;
    let reports = verify_all(&traj)?;
    write_json(&reports, out.or(cfg.output.report.as_deref()))?;
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.claim_id).collect();
    if !failed.is_empty() {
        return Err(CliError::Numerical(format!("residual above tolerance: {}", failed.join(", "))));
    }
    Ok(reports)
}

pub fn cmd_equivalent(csv: &Path, out: Option<&Path>) -> CliResult<EquivalenceReport> {
    let f = File::open(csv).map_err(io_err(csv))?;
    let p = read_period_csv(BufReader::new(f))?;
    let report = equivalence_report(&p.v, &p.i, p.period())?;
    write_json(&report, out)?;
    if !report.checks.pass {
        return Err(CliError::Numerical("equivalence checks failed".into()));
    }
    Ok(report)
}

pub fn netlist_text(cfg: &RunConfig) -> CliResult<String> {
    let Model::Mmo(p) = &cfg.circuit else {
        return Err(CliError::Validation("netlist needs the mmo circuit".into()));
    };
    let spec = NetlistSpec::new(p.clone(), cfg.netlist.r, cfg.netlist.c);
    Ok(emit_netlist(&spec)?)
}

pub fn cmd_netlist(cfg: &RunConfig, out: Option<&Path>) -> CliResult<String> {
    let deck = netlist_text(cfg)?;
    match out.or(cfg.output.netlist.as_deref()) {
        Some(p) => fs::write(p, &deck).map_err(io_err(p))?,
        None => write_stdout(&deck)?,
    }
    Ok(deck)
}

/// One sweep point: named overrides applied to the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub values: Vec<(String, f64)>,
}

/// Sets a circuit parameter by name. `g[k]` addresses polynomial
/// coefficient `k`; `x0`, `y0`, `z0`, `w0` set the initial state.
pub fn apply_param(cfg: &mut RunConfig, name: &str, value: f64) -> CliResult<()> {
    let ic = ["x0", "y0", "z0", "w0"];
    if let Some(k) = ic.iter().position(|n| *n == name) {
        cfg.initial[k] = value;
        return Ok(());
    }
    let unknown = || CliError::Validation(format!("unknown sweep parameter `{name}`"));
    let mut v = serde_json::to_value(&cfg.circuit).expect("models serialize");
    let params = v.get_mut("params").and_then(|p| p.as_object_mut()).ok_or_else(unknown)?;
    if let Some(idx) = name.strip_prefix("g[").and_then(|s| s.strip_suffix(']')) {
        let k: usize = idx.parse().map_err(|_| unknown())?;
        let g = params.get_mut("g").and_then(|g| g.as_array_mut()).ok_or_else(unknown)?;
        if g.len() <= k {
            g.resize(k + 1, serde_json::json!(0.0));
        }
        g[k] = serde_json::json!(value);
    } else {
        let slot = params.get_mut(name).filter(|s| s.is_number()).ok_or_else(unknown)?;
        *slot = serde_json::json!(value);
    }
    cfg.circuit = serde_json::from_value(v).map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(())
}

pub fn sweep_points(spec: &SweepSpec, seed: u64) -> CliResult<Vec<SweepPoint>> {
    let mut points = vec![SweepPoint { values: Vec::new() }];
    for (name, values) in &spec.grid {
        if values.is_empty() || !values.iter().all(|v| v.is_finite()) {
            return Err(CliError::Validation(format!("grid axis `{name}` needs finite values")));
        }
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |&v| {
                    let mut q = p.clone();
                    q.values.push((name.clone(), v));
                    q
                })
            })
            .collect();
    }
    if spec.grid.is_empty() && spec.random.is_some() {
        points.clear();
    }
    if let Some(r) = &spec.random {
        for (name, [lo, hi]) in &r.ranges {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(CliError::Validation(format!("range of `{name}` must be finite with low <= high")));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..r.samples {
            let values = r
                .ranges
                .iter()
                .map(|(name, [lo, hi])| (name.clone(), if lo == hi { *lo } else { rng.gen_range(*lo..*hi) }))
                .collect();
            points.push(SweepPoint { values });
        }
    }
    Ok(points)
}

/// Result of one sweep point; failures are kept as a status string.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub point: SweepPoint,
    pub status: String,
    pub period: Option<f64>,
    pub converged: Option<bool>,
    pub signature: Option<Vec<(usize, usize)>>,
    pub residual_max: Option<f64>,
    pub worst_claim: Option<&'static str>,
}

pub fn run_point(base: &RunConfig, index: usize, point: &SweepPoint) -> SweepRow {
    let mut row = SweepRow {
        index,
        point: point.clone(),
        status: "ok".into(),
        period: None,
        converged: None,
        signature: None,
        residual_max: None,
        worst_claim: None,
    };
    let mut cfg = base.clone();
    for (name, v) in &point.values {
        if let Err(e) = apply_param(&mut cfg, name, *v) {
            row.status = e.to_string();
            return row;
        }
    }
    let traj = match cfg.validate().and_then(|_| simulate(&cfg)) {
        Ok(o) => o.trajectory,
        Err(e) => {
            row.status = e.to_string();
            return row;
        }
    };
    match verify_all(&traj) {
        Ok(reports) => {
            if let Some(w) = reports.iter().max_by(|a, b| a.normalized_max.total_cmp(&b.normalized_max)) {
                row.residual_max = Some(w.normalized_max);
                row.worst_claim = Some(w.claim_id);
            }
        }
        Err(e) => row.status = e.to_string(),
    }
    match analyze(&traj, &cfg.analysis) {
        Ok(r) => {
            row.period = Some(r.period);
            row.converged = Some(r.converged);
            row.signature = Some(r.signature);
        }
        Err(e) if row.status == "ok" => row.status = e.to_string(),
        Err(_) => {}
    }
    row
}

pub fn signature_string(sig: &[(usize, usize)]) -> String {
    sig.iter().map(|(l, s)| format!("{l}^{s}")).collect::<Vec<_>>().join(" ")
}

/// Runs every point on a pool of `threads` workers (0 picks the core
/// count); rows come back in point order.
pub fn sweep(base: &RunConfig, points: &[SweepPoint], threads: usize) -> CliResult<Vec<SweepRow>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    Ok(pool.install(|| points.par_iter().enumerate().map(|(i, p)| run_point(base, i, p)).collect()))
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], names: &[String], out: W) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(out);
    let to_err = |e: csv::Error| CliError::Validation(e.to_string());
    let mut header = vec!["index".to_string()];
    header.extend(names.iter().cloned());
    header.extend(["status", "T", "converged", "signature", "residual_max", "worst_claim"].map(String::from));
    w.write_record(&header).map_err(to_err)?;
    for r in rows {
        let mut rec = vec![r.index.to_string()];
        for n in names {
            let v = r.point.values.iter().find(|(k, _)| k == n).map(|(_, v)| v.to_string());
            rec.push(v.unwrap_or_default());
        }
        rec.push(r.status.clone());
        rec.push(r.period.map(|v| v.to_string()).unwrap_or_default());
        rec.push(r.converged.map(|v| v.to_string()).unwrap_or_default());
        rec.push(r.signature.as_deref().map(signature_string).unwrap_or_default());
        rec.push(r.residual_max.map(|v| format!("{v:e}")).unwrap_or_default());
        rec.push(r.worst_claim.unwrap_or_default().to_string());
        w.write_record(&rec).map_err(to_err)?;
    }
    w.flush().map_err(|e| CliError::Validation(e.to_string()))
}

pub fn cmd_sweep(cfg: &RunConfig, out: Option<&Path>, threads: usize, seed: Option<u64>) -> CliResult<Vec<SweepRow>> {
    let spec = cfg.sweep.clone().unwrap_or_default();
    let points = sweep_points(&spec, seed.unwrap_or(cfg.seed))?;
    let mut names: Vec<String> = spec.grid.keys().cloned().collect();
    if let Some(r) = &spec.random {
        names.extend(r.ranges.keys().filter(|k| !spec.grid.contains_key(*k)).cloned());
    }
    // reject bad names before spending time on the pool
    let mut probe = cfg.clone();
    for n in &names {
        apply_param(&mut probe, n, 1.0)?;
    }
    let rows = sweep(cfg, &points, threads)?;
    match out.or(cfg.output.sweep.as_deref()) {
        Some(p) => write_file(p, |w| write_sweep_csv(&rows, &names, w))?,
        None => write_sweep_csv(&rows, &names, std::io::stdout().lock())?,
    }
    Ok(rows)
}
