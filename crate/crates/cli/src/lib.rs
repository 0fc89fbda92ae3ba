//! Campaign drivers behind the `nohair` binary.
//!
//! Each subcommand reads a strict JSON config, evaluates independent
//! instances on a worker pool, and writes its files in instance order so
//! that the output does not depend on the number of workers.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use nohair::channel::{embed_family_as_horizon, ChannelFamilySpec};
use nohair::entangled::{der_bound_check, factorization_residual, SchmidtInput};
use nohair::exec::{map_indexed, Schedule};
use nohair::metrics::DiamondOptions;
use nohair::tradeoff::{
    compute_epsilon, fit_points, pivot_radius, ScalingFit, ScalingPoint, TradeoffReport, Verdict,
    VerifyConfig,
};
use nohair::{diamond_distance, HorizonModel, SeededRng};

use config::{DiamondFile, EntangleFile, Preset, SweepFile, VerifyFile};
use output::{Manifest, VerdictCounts};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] nohair::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    InsufficientData(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::InsufficientData(_) => 3,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io { path: path.to_path_buf(), source }
    }
}

/// Options that come from the command line rather than the config file.
#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out: PathBuf,
    pub workers: usize,
}

/// Result of a subcommand.
#[derive(Clone, Debug)]
pub struct RunSummary {
    pub command: &'static str,
    pub out: PathBuf,
    pub verdicts: VerdictCounts,
    pub exit_code: i32,
    pub notes: Vec<String>,
}

/// One row of `results.csv` for `verify` and `sweep`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRecord {
    pub family: String,
    pub param: Option<f64>,
    pub dim_f: usize,
    pub dim_bh: usize,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub dmax_lower: f64,
    pub bound: f64,
    pub ratio: f64,
    pub fid_floor: f64,
    pub pivot_radius: f64,
    pub verdict: Verdict,
    pub stream_id: u64,
}

impl SweepRecord {
    fn new(family: String, param: Option<f64>, model: &HorizonModel, r: &TradeoffReport, stream_id: u64) -> Self {
        Self {
            family,
            param,
            dim_f: model.dim_f(),
            dim_bh: model.dim_bh(),
            eps_lower: r.epsilon_lower,
            eps_upper: r.epsilon_upper,
            dmax_lower: r.dmax_lower,
            bound: r.bound_value,
            ratio: r.ratio(),
            fid_floor: r.fidelity_floor,
            pivot_radius: r.pivot_radius,
            verdict: r.verdict,
            stream_id,
        }
    }
}

/// A verified instance with its full report.
#[derive(Clone, Debug)]
pub struct Instance {
    pub record: SweepRecord,
    pub report: TradeoffReport,
}

fn run_on_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn verify_config(tol: f64, restarts: usize, samples: usize, pivot_samples: usize) -> VerifyConfig {
    let mut c = VerifyConfig { tol, restarts, samples, ..VerifyConfig::default() };
    c.pivot.samples = pivot_samples;
    c.diamond.variational.restarts = restarts;
    // instances are the unit of parallel work
    c.diamond.variational.schedule = Schedule::Sequential;
    c
}

fn dims_for(k: usize, dim_f: &[usize], dim_bh: &[usize]) -> (usize, usize) {
    let combos = dim_f.len() * dim_bh.len();
    let c = k % combos;
    (dim_f[c / dim_bh.len()], dim_bh[c % dim_bh.len()])
}

/// Model of campaign instance `stream_id`; `seed` and `stream_id` regenerate it.
pub fn instance_model(preset: Preset, seed: u64, stream_id: u64, dim_f: usize, dim_bh: usize) -> nohair::Result<HorizonModel> {
    let mut rng = SeededRng::new(seed, stream_id).fork(0);
    match preset {
        Preset::Random => HorizonModel::random(dim_f, dim_bh, &mut rng),
        Preset::Ideal => HorizonModel::ideal(dim_f, dim_bh, &mut rng),
    }
}

/// Evaluates every model of a `verify` campaign.
pub fn verify_instances(cfg: &VerifyFile, workers: usize) -> Result<Vec<Instance>, CliError> {
    cfg.validate()?;
    let config = verify_config(cfg.tolerance, cfg.restarts, cfg.samples, cfg.pivot_samples);
    let results = run_on_pool(workers, || {
        map_indexed(cfg.models, Schedule::Parallel, |k| -> nohair::Result<Instance> {
            let (f, bh) = dims_for(k, &cfg.dim_f, &cfg.dim_bh);
            let stream = k as u64;
            let model = instance_model(cfg.preset, cfg.seed, stream, f, bh)?;
            let report = nohair::tradeoff::verify_tradeoff(&model, &config, &SeededRng::new(cfg.seed, stream).fork(1))?;
            let record = SweepRecord::new(cfg.preset.name().to_string(), None, &model, &report, stream);
            Ok(Instance { record, report })
        })
    })?;
    Ok(results.into_iter().collect::<nohair::Result<Vec<_>>>()?)
}

fn counts<'a>(verdicts: impl Iterator<Item = &'a Verdict>) -> VerdictCounts {
    let mut c = VerdictCounts::default();
    for v in verdicts {
        match v {
            Verdict::Pass => c.pass += 1,
            Verdict::Fail => c.fail += 1,
            Verdict::Indeterminate => c.indeterminate += 1,
        }
    }
    c
}

fn write_frontier(out: &Path, records: &[SweepRecord], outputs: &mut Vec<String>) -> Result<(), CliError> {
    let points: Vec<(f64, f64, Verdict)> = records.iter().map(|r| (r.eps_upper, r.dmax_lower, r.verdict)).collect();
    output::write_text(&out.join("frontier.dat"), &output::frontier_dat(&points))?;
    output::write_text(&out.join("frontier.svg"), &output::frontier_svg(&points))?;
    outputs.extend(["frontier.dat".to_string(), "frontier.svg".to_string()]);
    Ok(())
}

pub fn cmd_verify(cfg: &VerifyFile, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let instances = verify_instances(cfg, opts.workers)?;
    let records: Vec<SweepRecord> = instances.iter().map(|i| i.record.clone()).collect();
    output::prepare_dir(&opts.out)?;
    output::write_csv(&opts.out.join("results.csv"), &records)?;
    let mut outputs = vec!["results.csv".to_string()];
    write_frontier(&opts.out, &records, &mut outputs)?;
    let verdicts = counts(records.iter().map(|r| &r.verdict));
    let manifest = Manifest::new("verify", cfg, cfg.seed, started, records.iter().map(|r| r.stream_id).collect(), verdicts, outputs)?;
    manifest.write(&opts.out)?;
    Ok(RunSummary {
        command: "verify",
        out: opts.out.clone(),
        verdicts,
        exit_code: if verdicts.fail > 0 { 1 } else { 0 },
        notes: Vec::new(),
    })
}

/// Evaluates every parameter of a `sweep`.
pub fn sweep_instances(cfg: &SweepFile, workers: usize) -> Result<Vec<Instance>, CliError> {
    cfg.validate()?;
    let config = verify_config(cfg.tolerance, cfg.restarts, cfg.samples, cfg.pivot_samples);
    let results = run_on_pool(workers, || {
        map_indexed(cfg.params.len(), Schedule::Parallel, |k| -> nohair::Result<Instance> {
            let param = cfg.params[k];
            let model = embed_family_as_horizon(&ChannelFamilySpec::new(cfg.family, cfg.dim, param)?)?;
            let stream = k as u64;
            let report = nohair::tradeoff::verify_tradeoff(&model, &config, &SeededRng::new(cfg.seed, stream).fork(1))?;
            let record = SweepRecord::new(cfg.family.name().to_string(), Some(param), &model, &report, stream);
            Ok(Instance { record, report })
        })
    })?;
    Ok(results.into_iter().collect::<nohair::Result<Vec<_>>>()?)
}

/// Log–log fit over the certified, strictly positive points of a sweep.
pub fn sweep_fit(cfg: &SweepFile, instances: &[Instance]) -> nohair::Result<ScalingFit> {
    let points = instances
        .iter()
        .map(|i| {
            let r = &i.report;
            ScalingPoint {
                param: i.record.param.unwrap_or(f64::NAN),
                epsilon_lower: r.epsilon_lower,
                epsilon_upper: r.epsilon_upper,
                dmax_lower: r.dmax_lower,
                ratio: r.ratio(),
                certified: r.epsilon_certified,
                fitted: r.epsilon_certified && r.epsilon_upper > 0.0 && r.dmax_lower > 0.0 && i.record.param != Some(0.0),
            }
        })
        .collect();
    fit_points(cfg.family, cfg.dim, points)
}

pub fn cmd_sweep(cfg: &SweepFile, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let instances = sweep_instances(cfg, opts.workers)?;
    let records: Vec<SweepRecord> = instances.iter().map(|i| i.record.clone()).collect();
    output::prepare_dir(&opts.out)?;
    output::write_csv(&opts.out.join("results.csv"), &records)?;
    let mut outputs = vec!["results.csv".to_string()];
    write_frontier(&opts.out, &records, &mut outputs)?;
    let verdicts = counts(records.iter().map(|r| &r.verdict));
    let mut notes = Vec::new();
    let fit = sweep_fit(cfg, &instances);
    let mut exit_code = if verdicts.fail > 0 { 1 } else { 0 };
    match fit {
        Ok(fit) => {
            output::write_json(&opts.out.join("fit.json"), &output::FitFile::from(&fit))?;
            outputs.push("fit.json".to_string());
            notes.push(format!("slope {:.4} (r² {:.4})", fit.slope, fit.r_squared));
        }
        Err(nohair::Error::InsufficientData { got, need }) => {
            notes.push(format!("fit refused: {got} certified points, need {need}"));
            if exit_code == 0 {
                exit_code = 3;
            }
        }
        Err(e) => return Err(e.into()),
    }
    let manifest = Manifest::new("sweep", cfg, cfg.seed, started, records.iter().map(|r| r.stream_id).collect(), verdicts, outputs)?;
    manifest.write(&opts.out)?;
    Ok(RunSummary { command: "sweep", out: opts.out.clone(), verdicts, exit_code, notes })
}

/// One row of the `entangle` results.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntangleRecord {
    pub instance: usize,
    pub dim_f: usize,
    pub dim_bh: usize,
    pub spectrum_a: String,
    pub spectrum_b: String,
    pub eps_lower: f64,
    pub eps_upper: f64,
    pub der: f64,
    pub reference_distance: f64,
    pub rhs: f64,
    pub residual_a: f64,
    pub residual_b: f64,
    /// `√(2·eps_upper)`
    pub residual_bound: f64,
    pub pivot_converged: bool,
    pub verdict: Verdict,
    pub stream_id: u64,
}

fn spectrum_label(l: &[f64]) -> String {
    l.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn spectrum_pairs(spectra: &[Vec<f64>], dim_f: usize) -> Vec<(Vec<f64>, Vec<f64>)> {
    let usable: Vec<&Vec<f64>> = spectra.iter().filter(|s| s.len() <= dim_f).collect();
    let mut pairs = Vec::new();
    for i in 0..usable.len() {
        for j in (i + 1)..usable.len() {
            if usable[i].len() == usable[j].len() {
                pairs.push((usable[i].clone(), usable[j].clone()));
            }
        }
    }
    if pairs.is_empty() {
        pairs.extend(usable.iter().map(|s| ((*s).clone(), (*s).clone())));
    }
    pairs
}

pub fn entangle_records(cfg: &EntangleFile, workers: usize) -> Result<Vec<EntangleRecord>, CliError> {
    cfg.validate()?;
    let results = run_on_pool(workers, || {
        map_indexed(cfg.instances, Schedule::Parallel, |k| -> nohair::Result<Vec<EntangleRecord>> {
            let (f, bh) = dims_for(k, &cfg.dim_f, &cfg.dim_bh);
            let stream = k as u64;
            let model = instance_model(cfg.preset, cfg.seed, stream, f, bh)?;
            let rng = SeededRng::new(cfg.seed, stream);
            let mut diamond = DiamondOptions::default();
            diamond.variational.restarts = cfg.restarts;
            diamond.variational.schedule = Schedule::Sequential;
            diamond.variational.rng = rng.fork(1);
            let eps = compute_epsilon(&model, cfg.tolerance, &diamond)?;
            let pivot_opts = nohair::tradeoff::PivotOptions { samples: cfg.pivot_samples, ..Default::default() };
            let pivot = pivot_radius(&model, &pivot_opts, &rng.fork(3))?;
            let mut pairs = spectrum_pairs(&cfg.spectra, f);
            let mut spectra_rng = rng.fork(6);
            for _ in 0..cfg.random_pairs {
                let a = SchmidtInput::random(f, &mut spectra_rng)?;
                let b = SchmidtInput::random(f, &mut spectra_rng)?;
                pairs.push((a.lambdas().to_vec(), b.lambdas().to_vec()));
            }
            let residual_bound = (2.0 * eps.upper.max(0.0)).sqrt();
            let mut rows = Vec::with_capacity(pairs.len());
            for (la, lb) in pairs {
                let (a, b) = (SchmidtInput::new(la.clone())?, SchmidtInput::new(lb.clone())?);
                let check = der_bound_check(&model, &a, &b, eps.upper)?;
                let residual_a = factorization_residual(&model, &a, &pivot.pivot)?;
                let residual_b = factorization_residual(&model, &b, &pivot.pivot)?;
                let residuals_ok = !pivot.converged
                    || (residual_a <= residual_bound + 1e-6 && residual_b <= residual_bound + 1e-6);
                let verdict = if !eps.certified {
                    Verdict::Indeterminate
                } else if check.holds && residuals_ok {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                rows.push(EntangleRecord {
                    instance: k,
                    dim_f: f,
                    dim_bh: bh,
                    spectrum_a: spectrum_label(&la),
                    spectrum_b: spectrum_label(&lb),
                    eps_lower: eps.lower,
                    eps_upper: eps.upper,
                    der: check.der,
                    reference_distance: check.reference_distance,
                    rhs: check.rhs,
                    residual_a,
                    residual_b,
                    residual_bound,
                    pivot_converged: pivot.converged,
                    verdict,
                    stream_id: stream,
                });
            }
            Ok(rows)
        })
    })?;
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn cmd_entangle(cfg: &EntangleFile, opts: &RunOptions) -> Result<RunSummary, CliError> {
    let started = Instant::now();
    let rows = entangle_records(cfg, opts.workers)?;
    output::prepare_dir(&opts.out)?;
    output::write_csv(&opts.out.join("results.csv"), &rows)?;
    let verdicts = counts(rows.iter().map(|r| &r.verdict));
    let mut streams: Vec<u64> = rows.iter().map(|r| r.stream_id).collect();
    streams.dedup();
    let manifest = Manifest::new("entangle", cfg, cfg.seed, started, streams, verdicts, vec!["results.csv".into()])?;
    manifest.write(&opts.out)?;
    Ok(RunSummary {
        command: "entangle",
        out: opts.out.clone(),
        verdicts,
        exit_code: if verdicts.fail > 0 { 1 } else { 0 },
        notes: Vec::new(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DiamondOutput {
    pub lower: f64,
    pub upper: f64,
    pub gap: f64,
    pub certified: bool,
    pub tolerance: f64,
    pub admm_iterations: usize,
    pub variational_iterations: usize,
    /// Witness on `in ⊗ ref`, row-major, as `[re, im]` pairs.
    pub witness_dims: Vec<usize>,
    pub witness_amplitudes: Vec<[f64; 2]>,
}

pub fn diamond_output(cfg: &DiamondFile) -> Result<DiamondOutput, CliError> {
    let (a, b) = cfg.validate()?;
    let mut opts = DiamondOptions::default();
    opts.variational.restarts = cfg.restarts;
    opts.variational.rng = SeededRng::new(cfg.seed, 0);
    let r = diamond_distance(&a, &b, cfg.tolerance, &opts)?;
    Ok(DiamondOutput {
        lower: r.lower,
        upper: r.upper,
        gap: r.gap,
        certified: r.certified,
        tolerance: cfg.tolerance,
        admm_iterations: r.admm_iterations,
        variational_iterations: r.variational_iterations,
        witness_dims: r.witness_state.layout().dims().to_vec(),
        witness_amplitudes: r.witness_state.amplitudes().iter().map(|z| [z.re, z.im]).collect(),
    })
}

pub fn cmd_diamond(cfg: &DiamondFile, opts: &RunOptions) -> Result<(RunSummary, DiamondOutput), CliError> {
    let started = Instant::now();
    let result = diamond_output(cfg)?;
    output::prepare_dir(&opts.out)?;
    output::write_json(&opts.out.join("diamond.json"), &result)?;
    let manifest = Manifest::new("diamond", cfg, cfg.seed, started, vec![0], VerdictCounts::default(), vec!["diamond.json".into()])?;
    manifest.write(&opts.out)?;
    let note = if result.certified {
        format!("½‖A − B‖◇ ∈ [{:.9}, {:.9}]", result.lower, result.upper)
    } else {
        format!("uncertified: [{:.9}, {:.9}], gap {:.3e}", result.lower, result.upper, result.gap)
    };
    let summary = RunSummary {
        command: "diamond",
        out: opts.out.clone(),
        verdicts: VerdictCounts::default(),
        exit_code: 0,
        notes: vec![note],
    };
    Ok((summary, result))
}
