//! Command configurations and their execution.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, ensure, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use wernerlab::certify::{
    chsh_horodecki, dc_threshold, fef, fef2_exact, filtered_delta, one_distillable, ppt_min_eig,
    werner_delta, CertName, Verdict,
};
use wernerlab::extend::{critical_weight, extension, ExtensionQuery, Flavor};
use wernerlab::filterops::{filtered_weight, rotated_filtered_state};
use wernerlab::pipeline::{run_pipeline, PipelineOptions, PipelineReport};
use wernerlab::qmat::{phi_plus, uhlmann_fidelity, Side};
use wernerlab::random::derive_seed;
use wernerlab::solver::{self, SolverOptions};
use wernerlab::states::{depol_for_fidelity, noisy_surrogate, werner, NoiseSpec};
use wernerlab::steer::{seesaw_bell, sr_state_lower_bound, BellFunctional};
use wernerlab::tomo::{
    mle_reconstruct, qubit_frame, qutrit_bases, simulate_counts, CountsMeta, CountsRecord, MLE_MAX_ITER, MLE_TOL,
};
use wernerlab::Density;

use crate::config::ListSpec;
use crate::output::{fmt12, task_seed, RunManifest, Table};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Ppt,
    Distill,
    Fef,
    Chsh,
    Sr,
    Dc,
    Extend,
    Tomo,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Ppt => "ppt",
            Task::Distill => "distill",
            Task::Fef => "fef",
            Task::Chsh => "chsh",
            Task::Sr => "sr",
            Task::Dc => "dc",
            Task::Extend => "extend",
            Task::Tomo => "tomo",
        }
    }
}

/// Which of the unfiltered and filtered states a sweep covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Filtered {
    No,
    Yes,
    Both,
}

impl Filtered {
    fn flags(self) -> Vec<bool> {
        match self {
            Filtered::No => vec![false],
            Filtered::Yes => vec![true],
            Filtered::Both => vec![false, true],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub task: Task,
    pub d: ListSpec,
    pub v: ListSpec,
    pub k: ListSpec,
    pub flavor: Vec<String>,
    pub side: Vec<String>,
    pub restarts: usize,
    pub settings: ListSpec,
    pub filtered: Filtered,
    pub shots: u64,
    pub seed: u64,
    pub sdp_tol: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            task: Task::Ppt,
            d: ListSpec::Numbers(vec![3.0]),
            v: ListSpec::text("0:0.05:0.5"),
            k: ListSpec::Numbers(vec![2.0]),
            flavor: vec!["SE".into()],
            side: vec!["B".into()],
            restarts: 32,
            settings: ListSpec::Numbers(vec![2.0, 3.0]),
            filtered: Filtered::Both,
            shots: 10_000,
            seed: 1,
            sdp_tol: 1e-7,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub v: f64,
    pub depol: f64,
    pub coherent_eps: f64,
    pub noise_seed: u64,
    /// When set, overrides `depol` with the weight reaching this fidelity.
    pub target_fidelity: Option<f64>,
    pub seed: u64,
    pub shots: u64,
    pub bootstrap: usize,
    pub restarts: usize,
    pub sr_settings: usize,
    pub sr_restarts: usize,
    /// Certificates that must pass on the filtered state.
    pub require: Vec<CertName>,
    /// Certificates that must pass on the unfiltered state.
    pub require_before: Vec<CertName>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let o = PipelineOptions::default();
        Self {
            v: 0.0,
            depol: 0.02,
            coherent_eps: 0.02,
            noise_seed: 1,
            target_fidelity: None,
            seed: 1,
            shots: o.shots,
            bootstrap: o.bootstrap,
            restarts: o.restarts,
            sr_settings: o.sr_settings,
            sr_restarts: o.sr_restarts,
            require: Vec::new(),
            require_before: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendTableConfig {
    pub d: ListSpec,
    pub k: ListSpec,
    pub v: ListSpec,
    pub flavor: Vec<String>,
    pub side: Vec<String>,
    /// Also write `critical.csv` with `v_t` from the `v = 0` runs.
    pub critical: bool,
    pub sdp_tol: f64,
    pub seed: u64,
}

impl Default for ExtendTableConfig {
    fn default() -> Self {
        Self {
            d: ListSpec::Numbers(vec![3.0]),
            k: ListSpec::Numbers(vec![2.0, 3.0]),
            v: ListSpec::text("0:0.05:0.45"),
            flavor: vec!["SE".into()],
            side: vec!["B".into()],
            critical: true,
            sdp_tol: 1e-7,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TomoDemoConfig {
    pub v: f64,
    pub shots: u64,
    pub seed: u64,
    /// Reconstruct the filtered two-qubit state instead.
    pub filtered: bool,
    pub depol: f64,
    pub coherent_eps: f64,
    /// Reconstruct from an existing counts CSV (sidecar JSON next to it).
    pub counts: Option<PathBuf>,
}

impl Default for TomoDemoConfig {
    fn default() -> Self {
        Self { v: 0.3, shots: 10_000, seed: 1, filtered: false, depol: 0.0, coherent_eps: 0.0, counts: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    pub program: PathBuf,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        let o = SolverOptions::default();
        Self { program: PathBuf::new(), tol: o.tol, max_iter: o.max_iter, seed: o.seed }
    }
}

/// Effective configuration of any command, as stored in manifests.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Sweep(SweepConfig),
    Pipeline(PipelineConfig),
    ExtendTable(ExtendTableConfig),
    TomoDemo(TomoDemoConfig),
    Solve(SolveConfig),
}

/// Whether a run met its verdict requirements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success,
    VerdictFailure,
}

impl CommandConfig {
    fn name(&self) -> &'static str {
        match self {
            CommandConfig::Sweep(_) => "sweep",
            CommandConfig::Pipeline(_) => "pipeline",
            CommandConfig::ExtendTable(_) => "extend-table",
            CommandConfig::TomoDemo(_) => "tomo-demo",
            CommandConfig::Solve(_) => "solve",
        }
    }

    fn seed(&self) -> u64 {
        match self {
            CommandConfig::Sweep(c) => c.seed,
            CommandConfig::Pipeline(c) => c.seed,
            CommandConfig::ExtendTable(c) => c.seed,
            CommandConfig::TomoDemo(c) => c.seed,
            CommandConfig::Solve(c) => c.seed,
        }
    }

    /// Runs the command, writing outputs and `manifest.json` to `out`.
    /// Without `out`, the main result goes to stdout and no manifest is
    /// written.
    pub fn run(&self, out: Option<&Path>) -> Result<Outcome> {
        if let Some(dir) = out {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        }
        let mut manifest = RunManifest::new(self.name(), serde_json::to_value(self)?, self.seed())?;
        let outcome = match self {
            CommandConfig::Sweep(c) => run_sweep(c, out, &mut manifest)?,
            CommandConfig::Pipeline(c) => run_pipeline_cmd(c, out, &mut manifest)?,
            CommandConfig::ExtendTable(c) => run_extend_table(c, out, &mut manifest)?,
            CommandConfig::TomoDemo(c) => run_tomo_demo(c, out, &mut manifest)?,
            CommandConfig::Solve(c) => run_solve(c, out, &mut manifest)?,
        };
        if let Some(dir) = out {
            manifest.write(dir)?;
        }
        Ok(outcome)
    }
}

fn emit(table: &Table, name: &str, out: Option<&Path>, manifest: &mut RunManifest) -> Result<()> {
    match out {
        Some(dir) => {
            table.write(&dir.join(name))?;
            manifest.outputs.push(name.into());
        }
        None => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(&table.header)?;
            for r in &table.rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

fn emit_json<T: Serialize>(value: &T, name: &str, out: Option<&Path>, manifest: &mut RunManifest) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(dir) => {
            std::fs::write(dir.join(name), text)?;
            manifest.outputs.push(name.into());
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn parse_side(s: &str) -> Result<Side> {
    match s {
        "A" | "a" => Ok(Side::A),
        "B" | "b" => Ok(Side::B),
        _ => bail!("side must be A or B, got {s:?}"),
    }
}

fn side_name(s: Side) -> &'static str {
    match s {
        Side::A => "A",
        Side::B => "B",
    }
}

fn verdict(v: Verdict) -> String {
    match v {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
    .into()
}

fn check_v(vs: &[f64]) -> Result<()> {
    ensure!(vs.iter().all(|v| (0.0..=1.0).contains(v)), "v grid must lie in [0, 1]");
    Ok(())
}

fn check_d(ds: &[usize]) -> Result<()> {
    ensure!(ds.iter().all(|&d| d >= 2), "dimensions must be at least 2");
    Ok(())
}

/// Row index `i` of a task gets seed `seed XOR i`.
fn run_sweep(c: &SweepConfig, out: Option<&Path>, manifest: &mut RunManifest) -> Result<Outcome> {
    let name = c.task.name();
    let seed = task_seed(c.seed, name);
    manifest.task_seeds.insert(name.into(), seed);
    let start = Instant::now();
    let vs = c.v.values()?;
    check_v(&vs)?;
    let ds = c.d.integers()?;
    check_d(&ds)?;
    let grid: Vec<(usize, f64)> = ds.iter().flat_map(|&d| vs.iter().map(move |&v| (d, v))).collect();
    let row_seed = |i: usize| derive_seed(seed, i as u64);

    let table = match c.task {
        Task::Ppt => {
            let mut t = Table::new(&["d", "v", "seed", "min_eig", "verdict"]);
            for (i, &(d, v)) in grid.iter().enumerate() {
                let cert = ppt_min_eig(&werner(d, v)?)?;
                t.push(vec![d.to_string(), fmt12(v), row_seed(i).to_string(), fmt12(cert.value), verdict(cert.verdict)]);
            }
            t
        }
        Task::Distill => {
            let mut t = Table::new(&["d", "v", "seed", "restarts", "value", "verdict"]);
            let rows = grid
                .par_iter()
                .enumerate()
                .map(|(i, &(d, v))| {
                    let cert = one_distillable(&werner(d, v)?, c.restarts, row_seed(i))?;
                    Ok(vec![d.to_string(), fmt12(v), row_seed(i).to_string(), c.restarts.to_string(), fmt12(cert.value), verdict(cert.verdict)])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        Task::Fef => {
            let mut t = Table::new(&["d", "v", "filtered", "seed", "restarts", "value", "identity_bound", "threshold", "verdict"]);
            let jobs: Vec<(usize, f64, bool)> =
                grid.iter().flat_map(|&(d, v)| c.filtered.flags().into_iter().map(move |f| (d, v, f))).collect();
            let rows = jobs
                .par_iter()
                .enumerate()
                .map(|(i, &(d, v, filt))| {
                    let rho: Density = if filt { werner(2, filtered_weight(d, v))? } else { werner(d, v)? };
                    let dd = rho.dim_a();
                    let phi = phi_plus(dd);
                    let idb = rho.matrix().sandwich(&phi, &phi).re;
                    let mut cert = fef(&rho, c.restarts, row_seed(i))?;
                    if dd == 2 {
                        cert.value = fef2_exact(&rho)?;
                        cert.verdict = if cert.value > 0.5 + 1e-9 { Verdict::Pass } else { Verdict::Fail };
                    }
                    Ok(vec![
                        d.to_string(),
                        fmt12(v),
                        filt.to_string(),
                        row_seed(i).to_string(),
                        c.restarts.to_string(),
                        fmt12(cert.value),
                        fmt12(idb),
                        fmt12(cert.threshold),
                        verdict(cert.verdict),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        Task::Chsh => {
            let mut t = Table::new(&["d", "v", "seed", "v_filtered", "chsh", "seesaw", "restarts", "verdict"]);
            let f = BellFunctional::chsh();
            let rows = grid
                .par_iter()
                .enumerate()
                .map(|(i, &(d, v))| {
                    let vp = filtered_weight(d, v);
                    let rho: Density = werner(2, vp)?;
                    let cert = chsh_horodecki(&rho)?;
                    let ss = seesaw_bell(&rho, &f, 2, 2, c.restarts.max(1), row_seed(i))?;
                    Ok(vec![
                        d.to_string(),
                        fmt12(v),
                        row_seed(i).to_string(),
                        fmt12(vp),
                        fmt12(cert.value),
                        fmt12(ss.value),
                        c.restarts.to_string(),
                        verdict(cert.verdict),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
        Task::Sr => {
            let mut t = Table::new(&["d", "v", "n_s", "filtered", "seed", "sr", "gap", "restarts"]);
            let ns = c.settings.integers()?;
            let jobs: Vec<(usize, f64, usize, bool)> = grid
                .iter()
                .flat_map(|&(d, v)| ns.iter().flat_map(move |&n| c.filtered.flags().into_iter().map(move |f| (d, v, n, f))))
                .collect();
            for (i, &(d, v, n, filt)) in jobs.iter().enumerate() {
                let rho: Density = if filt { werner(2, filtered_weight(d, v))? } else { werner(d, v)? };
                let b = sr_state_lower_bound(&rho, n, rho.dim_a(), c.restarts, row_seed(i))?;
                t.push(vec![
                    d.to_string(),
                    fmt12(v),
                    n.to_string(),
                    filt.to_string(),
                    row_seed(i).to_string(),
                    fmt12(b.value),
                    fmt12(b.gap),
                    c.restarts.to_string(),
                ]);
            }
            t
        }
        Task::Dc => {
            let mut t = Table::new(&["d", "v", "seed", "delta_werner", "delta_filtered", "v_dc"]);
            for &d in &ds {
                let vdc = dc_threshold(d, 1e-10)?;
                for &v in &vs {
                    let i = t.rows.len();
                    t.push(vec![
                        d.to_string(),
                        fmt12(v),
                        row_seed(i).to_string(),
                        fmt12(werner_delta(d, v)),
                        fmt12(filtered_delta(d, v)),
                        fmt12(vdc),
                    ]);
                }
            }
            t
        }
        Task::Extend => {
            let cfg = ExtendTableConfig {
                d: c.d.clone(),
                k: c.k.clone(),
                v: c.v.clone(),
                flavor: c.flavor.clone(),
                side: c.side.clone(),
                critical: false,
                sdp_tol: c.sdp_tol,
                seed: c.seed,
            };
            extension_rows(&cfg, seed)?.0
        }
        Task::Tomo => {
            let mut t = Table::new(&["d", "v", "filtered", "seed", "shots", "fidelity", "iterations"]);
            ensure!(ds == [3], "tomography sweeps use the qutrit frame, d = 3");
            let jobs: Vec<(f64, bool)> = vs.iter().flat_map(|&v| c.filtered.flags().into_iter().map(move |f| (v, f))).collect();
            let rows = jobs
                .par_iter()
                .enumerate()
                .map(|(i, &(v, filt))| {
                    let (rho, frame) =
                        if filt { (rotated_filtered_state(v)?, qubit_frame()) } else { (werner(3, v)?, qutrit_bases()) };
                    let counts = simulate_counts(&rho, &frame, c.shots, row_seed(i), "sweep")?;
                    let r = mle_reconstruct(&counts, MLE_MAX_ITER, MLE_TOL)?;
                    let fid = uhlmann_fidelity(r.state.matrix(), rho.matrix())?;
                    Ok(vec![
                        "3".into(),
                        fmt12(v),
                        filt.to_string(),
                        row_seed(i).to_string(),
                        c.shots.to_string(),
                        fmt12(fid),
                        r.iterations.to_string(),
                    ])
                })
                .collect::<Result<Vec<_>>>()?;
            rows.into_iter().for_each(|r| t.push(r));
            t
        }
    };
    manifest.wall_times.insert(name.into(), start.elapsed().as_secs_f64());
    emit(&table, &format!("{name}.csv"), out, manifest)?;
    Ok(Outcome::Success)
}

/// `(d, k, side, flavor, t*)` of a run at `v = 0`.
type ZeroWeightRun = (usize, usize, Side, Flavor, f64);

/// Extension table rows and the runs at `v = 0`.
fn extension_rows(c: &ExtendTableConfig, seed: u64) -> Result<(Table, Vec<ZeroWeightRun>)> {
    let ds = c.d.integers()?;
    check_d(&ds)?;
    let ks = c.k.integers()?;
    ensure!(ks.iter().all(|&k| k >= 2), "k must be at least 2");
    let vs = c.v.values()?;
    check_v(&vs)?;
    let flavors = c.flavor.iter().map(|f| f.parse::<Flavor>()).collect::<wernerlab::Result<Vec<_>>>()?;
    let sides = c.side.iter().map(|s| parse_side(s)).collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for &d in &ds {
        for &k in &ks {
            for &side in &sides {
                for &flavor in &flavors {
                    for &v in &vs {
                        jobs.push((d, k, side, flavor, v));
                    }
                }
            }
        }
    }
    let opts = SolverOptions::with_tol(c.sdp_tol);
    let results = jobs
        .par_iter()
        .map(|&(d, k, side, flavor, v)| {
            let q = ExtensionQuery::new(werner(d, v)?, k, side, flavor);
            Ok(extension(&q, Some(&opts))?)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(&["d", "k", "side", "flavor", "v", "seed", "t_star", "gap", "status"]);
    let mut at_zero = Vec::new();
    for (i, (&(d, k, side, flavor, v), r)) in jobs.iter().zip(&results).enumerate() {
        t.push(vec![
            d.to_string(),
            k.to_string(),
            side_name(side).into(),
            flavor.to_string(),
            fmt12(v),
            derive_seed(seed, i as u64).to_string(),
            fmt12(r.t_star),
            fmt12(r.gap),
            r.status.to_string(),
        ]);
        if v == 0.0 {
            at_zero.push((d, k, side, flavor, r.t_star));
        }
    }
    Ok((t, at_zero))
}

fn run_extend_table(c: &ExtendTableConfig, out: Option<&Path>, manifest: &mut RunManifest) -> Result<Outcome> {
    let seed = task_seed(c.seed, "extend");
    manifest.task_seeds.insert("extend".into(), seed);
    let start = Instant::now();
    let (table, at_zero) = extension_rows(c, seed)?;
    manifest.wall_times.insert("extend".into(), start.elapsed().as_secs_f64());
    emit(&table, "extend.csv", out, manifest)?;
    if c.critical {
        ensure!(!at_zero.is_empty(), "critical weights need v = 0 in the grid");
        let mut t = Table::new(&["d", "k", "side", "flavor", "seed", "t_star_v0", "v_t"]);
        for &(d, k, side, flavor, t0) in &at_zero {
            t.push(vec![
                d.to_string(),
                k.to_string(),
                side_name(side).into(),
                flavor.to_string(),
                seed.to_string(),
                fmt12(t0),
                fmt12(critical_weight(t0, d)),
            ]);
        }
        emit(&t, "critical.csv", out, manifest)?;
    }
    Ok(Outcome::Success)
}

fn run_pipeline_cmd(c: &PipelineConfig, out: Option<&Path>, manifest: &mut RunManifest) -> Result<Outcome> {
    ensure!((0.0..=1.0).contains(&c.v), "v must lie in [0, 1]");
    let seed = task_seed(c.seed, "pipeline");
    manifest.task_seeds.insert("pipeline".into(), seed);
    let noise = match c.target_fidelity {
        Some(f) => depol_for_fidelity(&werner(3, c.v)?, f, c.coherent_eps, c.noise_seed)?,
        None => NoiseSpec { depol: c.depol, coherent_eps: c.coherent_eps, seed: c.noise_seed },
    };
    let opts = PipelineOptions {
        shots: c.shots,
        bootstrap: c.bootstrap,
        restarts: c.restarts,
        sr_settings: c.sr_settings,
        sr_restarts: c.sr_restarts,
    };
    let start = Instant::now();
    let report = run_pipeline(c.v, &noise, seed, &opts)?;
    manifest.wall_times.insert("pipeline".into(), start.elapsed().as_secs_f64());
    emit_json(&report, "report.json", out, manifest)?;
    let failed = unmet_requirements(&report, c);
    if failed.is_empty() {
        Ok(Outcome::Success)
    } else {
        for f in &failed {
            eprintln!("requirement not met: {f}");
        }
        Ok(Outcome::VerdictFailure)
    }
}

fn unmet_requirements(report: &PipelineReport, c: &PipelineConfig) -> Vec<String> {
    let mut out = Vec::new();
    for (after, names) in [(false, &c.require_before), (true, &c.require)] {
        for &n in names {
            let stage = if after { "filtered" } else { "unfiltered" };
            match report.certificate(after, n) {
                Some(cert) if cert.verdict == Verdict::Pass => {}
                Some(cert) => out.push(format!("{n:?} on {stage} state: {:?} (value {})", cert.verdict, cert.value)),
                None => out.push(format!("{n:?} is not computed on the {stage} state")),
            }
        }
    }
    out
}

#[derive(Serialize)]
struct TomoSummary {
    state_tag: String,
    shots: u64,
    seed: u64,
    fidelity: Option<f64>,
    iterations: usize,
    converged: bool,
    log_likelihood: f64,
    state: wernerlab::io::StateDoc,
}

fn run_tomo_demo(c: &TomoDemoConfig, out: Option<&Path>, manifest: &mut RunManifest) -> Result<Outcome> {
    let seed = task_seed(c.seed, "tomo");
    manifest.task_seeds.insert("tomo".into(), seed);
    let start = Instant::now();
    let (counts, ideal) = match &c.counts {
        Some(path) => {
            let meta_path = path.with_extension("json");
            let meta: CountsMeta = serde_json::from_str(
                &std::fs::read_to_string(&meta_path).with_context(|| format!("reading {}", meta_path.display()))?,
            )?;
            let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
            (CountsRecord::read_csv(file, &meta)?, None)
        }
        None => {
            ensure!((0.0..=1.0).contains(&c.v), "v must lie in [0, 1]");
            let noise = NoiseSpec { depol: c.depol, coherent_eps: c.coherent_eps, seed };
            let prepared = noisy_surrogate(&werner(3, c.v)?, &noise)?;
            let (rho, frame, ideal, tag) = if c.filtered {
                let fa = wernerlab::filterops::qubit_projection(3, (1, 2), Side::A)?;
                let fb = wernerlab::filterops::qubit_projection(3, (1, 2), Side::B)?;
                let (f, _) = wernerlab::filterops::apply_filter(&prepared, &fa, &fb)?;
                let f = f.conjugate_by(&wernerlab::filterops::filter_rotation());
                (f, qubit_frame(), rotated_filtered_state(c.v)?, format!("W3f({})", fmt12(c.v)))
            } else {
                (prepared, qutrit_bases(), werner(3, c.v)?, format!("W3({})", fmt12(c.v)))
            };
            (simulate_counts(&rho, &frame, c.shots, seed, &tag)?, Some(ideal))
        }
    };
    let r = mle_reconstruct(&counts, MLE_MAX_ITER, MLE_TOL)?;
    manifest.wall_times.insert("tomo".into(), start.elapsed().as_secs_f64());
    let fidelity = ideal.map(|i| uhlmann_fidelity(r.state.matrix(), i.matrix())).transpose()?;
    if let Some(dir) = out {
        let mut buf = Vec::new();
        counts.write_csv(&mut buf)?;
        std::fs::write(dir.join("counts.csv"), buf)?;
        std::fs::write(dir.join("counts.json"), serde_json::to_string_pretty(&counts.meta())? + "\n")?;
        manifest.outputs.extend(["counts.csv".to_string(), "counts.json".to_string()]);
    }
    let summary = TomoSummary {
        state_tag: counts.state_tag.clone(),
        shots: counts.shots,
        seed: counts.seed,
        fidelity,
        iterations: r.iterations,
        converged: r.converged,
        log_likelihood: *r.log_likelihood.last().expect("initial value recorded"),
        state: (&r.state).into(),
    };
    emit_json(&summary, "reconstruction.json", out, manifest)?;
    Ok(Outcome::Success)
}

#[derive(Serialize)]
struct SolveSummary {
    status: solver::Status,
    primal_obj: f64,
    dual_obj: f64,
    gap: f64,
    primal_residual: f64,
    dual_residual: f64,
    iterations: usize,
    x: Vec<f64>,
}

fn run_solve(c: &SolveConfig, out: Option<&Path>, manifest: &mut RunManifest) -> Result<Outcome> {
    let text = std::fs::read_to_string(&c.program).with_context(|| format!("reading {}", c.program.display()))?;
    let program = solver::io::load(&text)?;
    let opts = SolverOptions { tol: c.tol, max_iter: c.max_iter, seed: c.seed, ..SolverOptions::default() };
    let start = Instant::now();
    let sol = solver::solve(&program, &opts)?;
    manifest.wall_times.insert("solve".into(), start.elapsed().as_secs_f64());
    let summary = SolveSummary {
        status: sol.status,
        primal_obj: sol.primal_obj,
        dual_obj: sol.dual_obj,
        gap: sol.gap,
        primal_residual: sol.primal_residual,
        dual_residual: sol.dual_residual,
        iterations: sol.iterations,
        x: sol.x,
    };
    emit_json(&summary, "solution.json", out, manifest)?;
    Ok(Outcome::Success)
}

/// Re-runs the configuration stored in a manifest.
pub fn replay(manifest: &Path, out: Option<&Path>) -> Result<Outcome> {
    let m = RunManifest::read(manifest)?;
    let cfg: CommandConfig = serde_json::from_value(m.config).context("manifest config")?;
    cfg.run(out)
}

