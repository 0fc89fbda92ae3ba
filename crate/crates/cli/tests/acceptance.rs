//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL` line on stderr.

use std::io::Write;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use nohair::channel::make_family;
use nohair::entangled::{der_bound_check, factorization_residual, SchmidtInput};
use nohair::metrics::trace_distance_raw;
use nohair::random::random_unit_vector;
use nohair::tradeoff::{compute_epsilon, lemma1_check, pivot_radius, scaling_fit, PivotOptions, VerifyConfig};
use nohair::{diamond_distance, Channel, ChannelFamily, ChannelFamilySpec, DiamondOptions, HorizonModel, SeededRng};
use nohair_cli::config::VerifyFile;
use nohair_cli::{verify_instances, Instance};

const SEED: u64 = 20_240_601;

fn report(n: usize, pass: bool, detail: &str) {
    let line = format!("criterion {n}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let mut err = std::io::stderr().lock();
    let _ = err.write_all(line.as_bytes());
    let _ = err.flush();
    assert!(pass, "criterion {n} failed: {detail}");
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// The 1000-model random campaign shared by criteria 2, 3 and 4.
fn campaign() -> &'static (Vec<Instance>, Duration) {
    static CAMPAIGN: OnceLock<(Vec<Instance>, Duration)> = OnceLock::new();
    CAMPAIGN.get_or_init(|| {
        let cfg: VerifyFile = nohair_cli::config::parse(&format!(
            r#"{{"seed": {SEED}, "models": 1000, "dim_f": [2], "dim_bh": [2, 4], "preset": "random"}}"#
        ))
        .unwrap();
        let t = Instant::now();
        let instances = verify_instances(&cfg, workers()).unwrap();
        (instances, t.elapsed())
    })
}

#[test]
fn criterion_1_exact_no_hair_on_ideal_models() {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    let mut bridged: f64 = 0.0;
    let mut count = 0;
    for k in 0..50u64 {
        let (f, bh) = ([2, 3][(k % 2) as usize], [2, 4][((k / 2) % 2) as usize]);
        let rng = SeededRng::new(SEED, k);
        let model = HorizonModel::ideal(f, bh, &mut rng.fork(0)).unwrap();
        let out = lemma1_check(&model, 200, &rng.fork(1), 1e-9, 1e-6).unwrap();
        worst = worst.max(out.residual);
        bridged = bridged.max(out.bridge_residual);
        count += 1;
    }
    let elapsed = t.elapsed().as_secs_f64();
    report(
        1,
        count == 50 && worst <= 1e-9 && bridged <= 1e-9 && elapsed <= 30.0,
        &format!("{count} models, max residual {worst:.2e}, max bridge leg {bridged:.2e}, {elapsed:.1} s"),
    );
}

#[test]
fn criterion_2_tradeoff_inequality_campaign() {
    let (instances, elapsed) = campaign();
    let mut bound_violations = 0;
    let mut form_violations = 0;
    let mut worst_ratio: f64 = 0.0;
    for i in instances {
        let r = &i.record;
        if r.dmax_lower > 2.0 * (2.0 * r.eps_upper).sqrt() + 1e-7 {
            bound_violations += 1;
        }
        if r.eps_upper < r.dmax_lower * r.dmax_lower / 8.0 - 1e-7 {
            form_violations += 1;
        }
        worst_ratio = worst_ratio.max(r.ratio);
    }
    let indeterminate = instances.iter().filter(|i| !i.report.epsilon_certified).count();
    report(
        2,
        instances.len() == 1000 && bound_violations == 0 && form_violations == 0 && elapsed.as_secs_f64() <= 1800.0,
        &format!(
            "{} models, {bound_violations} bound and {form_violations} epsilon-form violations, max ratio {worst_ratio:.4}, \
             {indeterminate} uncertified, {:.0} s",
            instances.len(),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_3_fidelity_chain_campaign() {
    let (instances, _) = campaign();
    let violations = instances.iter().filter(|i| i.record.eps_upper < 1.0 - i.record.fid_floor - 1e-7).count();
    let min_margin = instances
        .iter()
        .map(|i| i.record.eps_upper - (1.0 - i.record.fid_floor))
        .fold(f64::INFINITY, f64::min);
    report(
        3,
        instances.len() == 1000 && violations == 0,
        &format!("{} models, {violations} violations, min margin {min_margin:.3e}", instances.len()),
    );
}

#[test]
fn criterion_4_pivot_bounds_campaign() {
    let (instances, _) = campaign();
    let converged: Vec<&Instance> = instances.iter().filter(|i| i.report.pivot_converged).collect();
    let radius_violations = converged
        .iter()
        .filter(|i| i.report.pivot_radius > (2.0 * i.report.epsilon_upper).sqrt() + 1e-6)
        .count();
    let triangle_violations = converged
        .iter()
        .filter(|i| i.report.dmax_lower > 2.0 * i.report.pivot_radius + 1e-6)
        .count();
    let fraction = converged.len() as f64 / instances.len() as f64;
    report(
        4,
        radius_violations == 0 && triangle_violations == 0 && fraction >= 0.95,
        &format!(
            "{}/{} converged, {radius_violations} radius and {triangle_violations} triangle violations",
            converged.len(),
            instances.len()
        ),
    );
}

/// Largest `½‖((A − B) ⊗ id)(ψ)‖₁` over random pure witnesses on `in ⊗ ref`.
fn witness_grid(a: &Channel, b: &Channel, count: usize, rng: &mut SeededRng) -> f64 {
    let d = a.dim_in();
    let mut best: f64 = 0.0;
    for _ in 0..count {
        let v = random_unit_vector(d * d, rng);
        let rho = &v * v.adjoint();
        let dist = trace_distance_raw(&a.apply_extended(&rho, d).unwrap(), &b.apply_extended(&rho, d).unwrap());
        best = best.max(dist);
    }
    best
}

#[test]
fn criterion_5_diamond_solver_validation() {
    let t = Instant::now();
    let mut ok = true;
    let mut details = Vec::new();
    let mut rng = SeededRng::new(SEED, 5);
    for p in [0.1, 0.5, 1.0] {
        let a = make_family(&ChannelFamilySpec::new(ChannelFamily::Depolarizing, 2, p).unwrap()).unwrap();
        let b = Channel::identity(2);
        let mut opts = DiamondOptions::default();
        opts.variational.rng = rng.fork(p.to_bits());
        let r = diamond_distance(&a, &b, 1e-6, &opts).unwrap();
        let expected = 0.75 * p;
        let grid = witness_grid(&a, &b, 100_000, &mut rng);
        let agree = (r.upper - r.lower).abs() <= 1e-6;
        let closed = (r.lower - expected).abs() <= 1e-6 && (r.upper - expected).abs() <= 1e-6;
        let oracle = grid <= r.upper + 1e-9 && grid >= 0.9 * expected;
        ok &= agree && closed && oracle;
        details.push(format!("p={p}: [{:.9}, {:.9}] vs {expected}, grid {grid:.6}", r.lower, r.upper));
    }
    let elapsed = t.elapsed().as_secs_f64();
    ok &= elapsed <= 60.0;
    details.push(format!("{elapsed:.1} s"));
    report(5, ok, &details.join("; "));
}

#[test]
fn criterion_6_linear_scaling_in_p() {
    let t = Instant::now();
    let params: Vec<f64> = (0..7).map(|k| 10f64.powf(-3.0 + k as f64 / 3.0)).collect();
    let config = VerifyConfig::default();
    let mut ok = true;
    let mut details = Vec::new();
    for (k, (family, tolerance)) in [
        (ChannelFamily::Depolarizing, 0.1),
        (ChannelFamily::Dephasing, 0.1),
        (ChannelFamily::AmplitudeDamping, 0.15),
    ]
    .into_iter()
    .enumerate()
    {
        let fit = scaling_fit(family, 2, &params, &config, &SeededRng::new(SEED, 600 + k as u64)).unwrap();
        let used = fit.points.iter().filter(|p| p.fitted).count();
        let max_ratio = fit.points.iter().map(|p| p.ratio).fold(0.0, f64::max);
        let slope_ok = (fit.slope - 1.0).abs() <= tolerance;
        ok &= slope_ok && used >= 5 && max_ratio <= 1.0;
        details.push(format!(
            "{}: slope {:.4} (target 1 ± {tolerance}), {used} points, max ratio {max_ratio:.4}",
            family.name(),
            fit.slope
        ));
    }
    let elapsed = t.elapsed().as_secs_f64();
    ok &= elapsed <= 600.0;
    details.push(format!("{elapsed:.1} s"));
    report(6, ok, &details.join("; "));
}

#[test]
fn criterion_7_entangled_reference_bounds() {
    let t = Instant::now();
    let pivot_opts = PivotOptions::default();

    // factorization on ideal models
    let mut worst_residual: f64 = 0.0;
    let mut worst_eps: f64 = 0.0;
    for k in 0..50u64 {
        let rng = SeededRng::new(SEED, 700 + k);
        let f = [2, 3][(k % 2) as usize];
        let model = HorizonModel::ideal(f, 2, &mut rng.fork(0)).unwrap();
        let mut opts = DiamondOptions::default();
        opts.variational.rng = rng.fork(1);
        let eps = compute_epsilon(&model, 1e-6, &opts).unwrap();
        worst_eps = worst_eps.max(eps.upper);
        let pivot = pivot_radius(&model, &pivot_opts, &rng.fork(2)).unwrap();
        let input = SchmidtInput::random(f, &mut rng.fork(3)).unwrap();
        worst_residual = worst_residual.max(factorization_residual(&model, &input, &pivot.pivot).unwrap());
    }
    let factorization_ok = worst_eps <= 1e-9 && worst_residual <= 1e-8;

    // der bound on random models
    let mut der_pass = 0;
    let mut der_total = 0;
    let mut worst_slack = f64::INFINITY;
    for k in 0..500u64 {
        let rng = SeededRng::new(SEED, 1000 + k);
        let bh = [2, 4][(k % 2) as usize];
        let model = HorizonModel::random(2, bh, &mut rng.fork(0)).unwrap();
        let mut opts = DiamondOptions::default();
        opts.variational.rng = rng.fork(1);
        let eps = compute_epsilon(&model, 1e-6, &opts).unwrap();
        let mut srng = rng.fork(2);
        let a = SchmidtInput::random(2, &mut srng).unwrap();
        let b = SchmidtInput::random(2, &mut srng).unwrap();
        let check = der_bound_check(&model, &a, &b, eps.upper).unwrap();
        der_total += 1;
        if check.holds {
            der_pass += 1;
        }
        worst_slack = worst_slack.min(check.rhs - check.der);
    }

    // Bell against product on the canonical ideal model
    let model = HorizonModel::canonical_ideal(2, 2).unwrap();
    let mut opts = DiamondOptions::default();
    opts.variational.rng = SeededRng::new(SEED, 799);
    let eps = compute_epsilon(&model, 1e-6, &opts).unwrap();
    let bell = SchmidtInput::maximally_entangled(2).unwrap();
    let product = SchmidtInput::new(vec![1.0, 0.0]).unwrap();
    let canon = der_bound_check(&model, &bell, &product, eps.upper).unwrap();
    let canonical_ok = (canon.der - 0.5).abs() <= 1e-9 && (canon.rhs - 0.5).abs() <= 1e-9;

    let elapsed = t.elapsed().as_secs_f64();
    report(
        7,
        factorization_ok && der_pass == 500 && der_total == 500 && canonical_ok && elapsed <= 600.0,
        &format!(
            "50 inputs at max eps {worst_eps:.2e}: max residual {worst_residual:.2e}; der {der_pass}/{der_total} pass, \
             min slack {worst_slack:.3e}; Bell vs product der {:.12} rhs {:.12}; {elapsed:.1} s",
            canon.der, canon.rhs
        ),
    );
}

#[test]
fn criterion_8_reproducible_results_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut blobs = Vec::new();
    let runs: [(&str, &str, usize); 6] = [
        ("verify", r#"{"seed": 7, "models": 24, "dim_f": [2, 3], "dim_bh": [2]}"#, 1),
        ("verify", r#"{"seed": 7, "models": 24, "dim_f": [2, 3], "dim_bh": [2]}"#, 4),
        ("sweep", r#"{"seed": 7, "family": "amplitude_damping", "params": [0.01, 0.1, 0.5]}"#, 1),
        ("sweep", r#"{"seed": 7, "family": "amplitude_damping", "params": [0.01, 0.1, 0.5]}"#, 3),
        ("entangle", r#"{"seed": 7, "instances": 4, "dim_f": [2], "spectra": [[0.5, 0.5], [0.8, 0.2]], "random_pairs": 1}"#, 1),
        ("entangle", r#"{"seed": 7, "instances": 4, "dim_f": [2], "spectra": [[0.5, 0.5], [0.8, 0.2]], "random_pairs": 1}"#, 2),
    ];
    for (k, (cmd, cfg, w)) in runs.iter().enumerate() {
        let path = dir.path().join(format!("cfg{k}.json"));
        std::fs::write(&path, cfg).unwrap();
        let out = dir.path().join(format!("out{k}"));
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_nohair"))
            .args([*cmd, "--quiet", "--workers", &w.to_string(), "--config"])
            .arg(&path)
            .arg("--out")
            .arg(&out)
            .status()
            .unwrap();
        assert!(matches!(status.code(), Some(0 | 1 | 3)), "{cmd} exited with {status}");
        blobs.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    let identical = blobs.chunks(2).all(|pair| pair[0] == pair[1] && !pair[0].is_empty());
    report(8, identical, "verify, sweep and entangle results.csv compared at different worker counts");
}
