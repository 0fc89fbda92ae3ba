//! ε, the interior fidelity floor, D_max, the pivot radius, the exact
//! no-hair check and the trade-off verdicts for a [`HorizonModel`].

mod exterior;
mod scaling;

pub use exterior::{compute_dmax, distance_to_pivot, pivot_radius, DmaxOutcome, PivotOptions, PivotOutcome};
pub use scaling::{evaluate_family, fit_loglog, fit_points, scaling_fit, LogLogFit, ScalingFit, ScalingPoint, MIN_FIT_POINTS};

use serde::{Deserialize, Serialize};

use crate::channel::HorizonModel;
use crate::metrics::{diamond_distance, fidelity_to_pure_raw, trace_distance_raw, DiamondOptions};
use crate::random::{random_unit_vector, SeededRng, StreamId};
use crate::{CVec, Error, Result, C64};

/// Slack on the trade-off, ε-form and fidelity-chain checks.
pub const INEQUALITY_SLACK: f64 = 1e-7;
/// Slack on the two pivot checks.
pub const PIVOT_SLACK: f64 = 1e-6;

/// `2√(2ε)`.
pub fn tradeoff_bound(epsilon: f64) -> f64 {
    2.0 * (2.0 * epsilon.max(0.0)).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpsilonBracket {
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

/// `½‖N_I − Ad_V‖◇`, bracketed.
pub fn compute_epsilon(model: &HorizonModel, tol: f64, opts: &DiamondOptions) -> Result<EpsilonBracket> {
    let r = diamond_distance(&model.interior_channel(), &model.ideal_channel(), tol, opts)?;
    Ok(EpsilonBracket { lower: r.lower, upper: r.upper, certified: r.certified })
}

/// `F_I(ψ) = ⟨ψ|V† ρ_I(ψ) V|ψ⟩`.
pub fn interior_fidelity(model: &HorizonModel, psi: &CVec) -> Result<f64> {
    let rho_i = model.rho_i(psi)?;
    let target = model.embedding().matrix() * psi;
    Ok(fidelity_to_pure_raw(&rho_i, &target))
}

/// The states scanned by [`fidelity_floor`]: `samples` Haar draws, the `F`
/// basis, and `(|i⟩ + e^{iφ}|j⟩)/√2` for `φ ∈ {0, π/2, π, 3π/2}`.
pub fn fidelity_probe_states(dim_f: usize, samples: usize, rng: &mut SeededRng) -> Vec<CVec> {
    let mut states: Vec<CVec> = (0..samples).map(|_| random_unit_vector(dim_f, rng)).collect();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim_f {
        let mut e = CVec::zeros(dim_f);
        e[i] = C64::new(1.0, 0.0);
        states.push(e);
        for j in (i + 1)..dim_f {
            for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)] {
                let mut v = CVec::zeros(dim_f);
                v[i] = C64::new(s, 0.0);
                v[j] = phase * s;
                states.push(v);
            }
        }
    }
    states
}

/// Minimum of [`interior_fidelity`] over [`fidelity_probe_states`].
pub fn fidelity_floor(model: &HorizonModel, samples: usize, rng: &mut SeededRng) -> Result<f64> {
    let mut floor = 1.0f64;
    for psi in fidelity_probe_states(model.dim_f(), samples, rng) {
        floor = floor.min(interior_fidelity(model, &psi)?);
    }
    Ok(floor)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// ε could not be certified; no inequality is judged.
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub tol: f64,
    /// Random starts of the D_max ascent per sector.
    pub restarts: usize,
    /// Haar samples for the fidelity floor.
    pub samples: usize,
    pub pivot: PivotOptions,
    pub lemma1_pairs: usize,
    /// The exact no-hair residual is computed when `epsilon_upper` is at most this.
    pub lemma1_threshold: f64,
    pub diamond: DiamondOptions,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            restarts: 32,
            samples: 256,
            pivot: PivotOptions::default(),
            lemma1_pairs: 200,
            lemma1_threshold: 1e-9,
            diamond: DiamondOptions::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TradeoffReport {
    pub epsilon_lower: f64,
    pub epsilon_upper: f64,
    pub epsilon_certified: bool,
    pub dmax_lower: f64,
    pub pivot_radius: f64,
    pub pivot_converged: bool,
    pub pivot_deficit: f64,
    pub fidelity_floor: f64,
    /// `2√(2·epsilon_upper)`
    pub bound_value: f64,
    /// `dmax_lower ≤ bound_value`
    pub inequality_holds: bool,
    /// `epsilon_upper ≥ dmax_lower²/8`
    pub epsilon_form_holds: bool,
    /// `epsilon_upper ≥ 1 − fidelity_floor`
    pub fidelity_chain_holds: bool,
    /// `dmax_lower ≤ 2·pivot_radius`
    pub triangle_holds: bool,
    /// `pivot_radius ≤ √(2·epsilon_upper)`; absent when the pivot search did not converge.
    pub pivot_bound_holds: Option<bool>,
    pub lemma1_residual: Option<f64>,
    pub verdict: Verdict,
    pub rng_provenance: Vec<StreamId>,
}

impl TradeoffReport {
    /// `dmax_lower² / (8·epsilon_upper)`; infinite when ε vanishes and D does not.
    pub fn ratio(&self) -> f64 {
        tradeoff_ratio(self.dmax_lower, self.epsilon_upper)
    }
}

pub fn tradeoff_ratio(dmax: f64, epsilon: f64) -> f64 {
    let num = dmax * dmax / 8.0;
    if epsilon > 0.0 {
        num / epsilon
    } else if num > 0.0 {
        f64::INFINITY
    } else {
        0.0
    }
}

/// Runs every check on one model. Sub-computations draw from forks of `rng`
/// (diamond witness 1, D_max 2, pivot 3, fidelity 4, no-hair pairs 5).
pub fn verify_tradeoff(model: &HorizonModel, config: &VerifyConfig, rng: &SeededRng) -> Result<TradeoffReport> {
    let streams: Vec<SeededRng> = (1..=5).map(|k| rng.fork(k)).collect();
    let mut diamond = config.diamond.clone();
    diamond.variational.rng = streams[0].clone();
    let eps = compute_epsilon(model, config.tol, &diamond)?;

    let dmax = compute_dmax(model, config.restarts, &streams[1])?;

    let mut pivot_opts = config.pivot.clone();
    pivot_opts.seeds.push(dmax.witness.0.amplitudes().clone());
    pivot_opts.seeds.push(dmax.witness.1.amplitudes().clone());
    let pivot = pivot_radius(model, &pivot_opts, &streams[2])?;

    let floor = fidelity_floor(model, config.samples, &mut streams[3].clone())?;

    let lemma1_residual = if eps.certified && eps.upper <= config.lemma1_threshold {
        Some(lemma1_residual(model, config.lemma1_pairs, &streams[4])?.residual)
    } else {
        None
    };

    let bound_value = tradeoff_bound(eps.upper);
    let inequality_holds = dmax.dmax_lower <= bound_value + INEQUALITY_SLACK;
    let epsilon_form_holds = eps.upper >= dmax.dmax_lower * dmax.dmax_lower / 8.0 - INEQUALITY_SLACK;
    let fidelity_chain_holds = eps.upper >= 1.0 - floor - INEQUALITY_SLACK;
    let triangle_holds = dmax.dmax_lower <= 2.0 * pivot.radius + PIVOT_SLACK;
    let pivot_bound_holds =
        pivot.converged.then(|| pivot.radius <= (2.0 * eps.upper.max(0.0)).sqrt() + PIVOT_SLACK);

    let verdict = if !eps.certified {
        Verdict::Indeterminate
    } else if inequality_holds
        && epsilon_form_holds
        && fidelity_chain_holds
        && triangle_holds
        && pivot_bound_holds.unwrap_or(true)
    {
        Verdict::Pass
    } else {
        Verdict::Fail
    };

    Ok(TradeoffReport {
        epsilon_lower: eps.lower,
        epsilon_upper: eps.upper,
        epsilon_certified: eps.certified,
        dmax_lower: dmax.dmax_lower,
        pivot_radius: pivot.radius,
        pivot_converged: pivot.converged,
        pivot_deficit: pivot.deficit,
        fidelity_floor: floor,
        bound_value,
        inequality_holds,
        epsilon_form_holds,
        fidelity_chain_holds,
        triangle_holds,
        pivot_bound_holds,
        lemma1_residual,
        verdict,
        rng_provenance: std::iter::once(rng.descriptor()).chain(streams.iter().map(|s| s.descriptor())).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma1Outcome {
    /// Largest exterior trace distance over all sampled pairs and bridge legs.
    pub residual: f64,
    /// Largest leg `½‖ρ_E(ψ_k) − ρ_E(ψ₊)‖₁` over orthogonal pairs routed through `ψ₊`.
    pub bridge_residual: f64,
    pub pairs: usize,
    pub epsilon_upper: Option<f64>,
}

/// Exact no-hair check on a (near-)ideal model. Errors with
/// [`Error::Precondition`] when the certified `ε` exceeds `threshold`.
pub fn lemma1_check(
    model: &HorizonModel,
    pair_count: usize,
    rng: &SeededRng,
    threshold: f64,
    tol: f64,
) -> Result<Lemma1Outcome> {
    let mut opts = DiamondOptions::default();
    opts.variational.rng = rng.fork(0);
    let eps = compute_epsilon(model, tol, &opts)?;
    if eps.upper > threshold {
        return Err(Error::Precondition(format!(
            "model is not ideal: epsilon upper bound {:.3e} exceeds {threshold:.3e}",
            eps.upper
        )));
    }
    let mut out = lemma1_residual(model, pair_count, &rng.fork(1))?;
    out.epsilon_upper = Some(eps.upper);
    Ok(out)
}

/// Pairs per sector: random pairs, random orthogonal pairs, and every basis
/// pair; each orthogonal pair is also routed through `(|ψ₀⟩ + |ψ₁⟩)/√2`.
fn lemma1_residual(model: &HorizonModel, pair_count: usize, rng: &SeededRng) -> Result<Lemma1Outcome> {
    let f = model.dim_f();
    let mut rng = rng.clone();
    let mut residual = 0.0f64;
    let mut bridge_residual = 0.0f64;
    let mut pairs = 0;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for sector in model.sectors() {
        let n = sector.len();
        let lift = |v: &CVec| {
            let mut out = CVec::zeros(f);
            for (j, &idx) in sector.iter().enumerate() {
                out[idx] = v[j];
            }
            out
        };
        let mut orthogonal: Vec<(CVec, CVec)> = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let mut a = CVec::zeros(n);
                a[i] = C64::new(1.0, 0.0);
                let mut b = CVec::zeros(n);
                b[j] = C64::new(1.0, 0.0);
                orthogonal.push((lift(&a), lift(&b)));
            }
        }
        for k in 0..pair_count {
            let a = random_unit_vector(n, &mut rng);
            let b = random_unit_vector(n, &mut rng);
            if k % 2 == 1 && n >= 2 {
                let b = &b - &a * a.dotc(&b);
                let b = b.unscale(b.norm());
                orthogonal.push((lift(&a), lift(&b)));
            } else {
                let d = trace_distance_raw(&model.rho_e(&lift(&a))?, &model.rho_e(&lift(&b))?);
                residual = residual.max(d);
                pairs += 1;
            }
        }
        for (a, b) in orthogonal {
            let plus = (&a + &b) * C64::new(s, 0.0);
            let (ra, rb, rp) = (model.rho_e(&a)?, model.rho_e(&b)?, model.rho_e(&plus)?);
            let legs = trace_distance_raw(&ra, &rp).max(trace_distance_raw(&rp, &rb));
            bridge_residual = bridge_residual.max(legs);
            residual = residual.max(legs).max(trace_distance_raw(&ra, &rb));
            pairs += 1;
        }
    }
    Ok(Lemma1Outcome { residual, bridge_residual, pairs, epsilon_upper: None })
}
