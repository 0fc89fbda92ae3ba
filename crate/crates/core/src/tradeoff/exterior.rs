//! Optimization over exterior reduced states `ρ_E(ψ) = Σ_a W_a ψψ† W_a†`,
//! where `W_a` is the block of the Stinespring isometry for interior index `a`.

use serde::Serialize;

use crate::channel::HorizonModel;
use crate::random::{ginibre, random_unit_vector, SeededRng};
use crate::spectral::{hermitian_sign, hermitian_trace_norm, outer, project_density, trace, HermEig};
use crate::tensor::{DensityOp, PureStateVec, SubsystemLayout};
use crate::{CMat, CVec, Result, C64};

const ASCENT_MAX_ITER: usize = 500;
const ASCENT_TOL: f64 = 1e-13;

#[derive(Clone, Debug)]
pub(crate) struct ExteriorMap {
    blocks: Vec<CMat>,
    dim_e: usize,
}

impl ExteriorMap {
    pub(crate) fn new(model: &HorizonModel) -> Self {
        let w = model.stinespring();
        let dim_e = model.dim_e();
        let blocks = (0..model.dim_i()).map(|a| w.rows(a * dim_e, dim_e).into_owned()).collect();
        Self { blocks, dim_e }
    }

    /// Same map restricted to the span of the given `F` basis indices.
    fn restrict(&self, columns: &[usize]) -> Self {
        let blocks = self.blocks.iter().map(|b| b.select_columns(columns)).collect();
        Self { blocks, dim_e: self.dim_e }
    }

    fn dim_f(&self) -> usize {
        self.blocks[0].ncols()
    }

    pub(crate) fn state(&self, psi: &CVec) -> CMat {
        let mut rho = CMat::zeros(self.dim_e, self.dim_e);
        for b in &self.blocks {
            let v = b * psi;
            rho += &v * v.adjoint();
        }
        rho
    }

    /// `G(S) = Σ_a W_a† S W_a`, so that `Tr[S ρ_E(ψ)] = ⟨ψ|G(S)|ψ⟩`.
    fn pullback(&self, s: &CMat) -> CMat {
        let f = self.dim_f();
        let mut g = CMat::zeros(f, f);
        for b in &self.blocks {
            g += b.adjoint() * s * b;
        }
        crate::spectral::hermitian_part(&g)
    }
}

fn sign_of(m: &CMat) -> (CMat, f64) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    hermitian_sign(m, 1e-14 * scale.max(1e-300))
}

fn random_sign(dim: usize, rng: &mut SeededRng) -> CMat {
    let g = ginibre(dim, dim, rng);
    sign_of(&(&g + g.adjoint())).0
}

struct PairAscent {
    value: f64,
    psi: CVec,
    phi: CVec,
}

/// Alternating ascent on `½ Tr[S(ρ_E(ψ) − ρ_E(φ))]`: the sign `S` and the
/// extremal eigenvectors of `G(S)` are updated in turn. The value never decreases.
fn pair_ascent(map: &ExteriorMap, start: &CMat) -> PairAscent {
    let eig = HermEig::new(&map.pullback(start));
    let mut psi = eig.vector(eig.values.len() - 1);
    let mut phi = eig.vector(0);
    let mut best = PairAscent { value: 0.0, psi: psi.clone(), phi: phi.clone() };
    for _ in 0..ASCENT_MAX_ITER {
        let (s, norm) = sign_of(&(map.state(&psi) - map.state(&phi)));
        let value = 0.5 * norm;
        let improved = value - best.value;
        if value >= best.value {
            best = PairAscent { value, psi: psi.clone(), phi: phi.clone() };
        }
        if improved <= ASCENT_TOL * value.max(1.0) {
            break;
        }
        let eig = HermEig::new(&map.pullback(&s));
        psi = eig.vector(eig.values.len() - 1);
        phi = eig.vector(0);
    }
    best
}

fn basis_vec(dim: usize, i: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[i] = C64::new(1.0, 0.0);
    v
}

/// Lower bound on the largest exterior trace distance over same-charge pairs.
#[derive(Clone, Debug, Serialize)]
pub struct DmaxOutcome {
    pub dmax_lower: f64,
    #[serde(skip)]
    pub witness: (PureStateVec, PureStateVec),
    /// Index into `HorizonModel::sectors` of the best sector.
    pub sector: usize,
    pub starts: usize,
}

/// Multi-start pair ascent within each charge sector. Starts are every
/// basis pair of the sector, the superpositions `(|i⟩ ± |j⟩)/√2` and
/// `(|i⟩ ± i|j⟩)/√2` against each other, and `restarts` random signs.
pub fn compute_dmax(model: &HorizonModel, restarts: usize, rng: &SeededRng) -> Result<DmaxOutcome> {
    let full = ExteriorMap::new(model);
    let dim_f = model.dim_f();
    let layout = model.input_layout().restrict(&[0])?;
    let mut best: Option<(f64, CVec, CVec, usize)> = None;
    let mut starts = 0;
    for (k, sector) in model.sectors().iter().enumerate() {
        let n = sector.len();
        let lift = |v: &CVec| {
            let mut out = CVec::zeros(dim_f);
            for (j, &idx) in sector.iter().enumerate() {
                out[idx] = v[j];
            }
            out
        };
        if n < 2 {
            let e = basis_vec(dim_f, sector[0]);
            if best.is_none() {
                best = Some((0.0, e.clone(), e, k));
            }
            continue;
        }
        let map = full.restrict(sector);
        let mut seeds = Vec::new();
        let s2 = std::f64::consts::FRAC_1_SQRT_2;
        for i in 0..n {
            for j in (i + 1)..n {
                let (ei, ej) = (basis_vec(n, i), basis_vec(n, j));
                seeds.push((ei.clone(), ej.clone()));
                for phase in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
                    let plus = (&ei + &ej * phase) * C64::new(s2, 0.0);
                    let minus = (&ei - &ej * phase) * C64::new(s2, 0.0);
                    seeds.push((plus, minus));
                }
            }
        }
        let mut signs: Vec<CMat> =
            seeds.iter().map(|(a, b)| sign_of(&(map.state(a) - map.state(b))).0).collect();
        let mut sector_rng = rng.fork(k as u64);
        for _ in 0..restarts {
            signs.push(random_sign(full.dim_e, &mut sector_rng));
        }
        for s in &signs {
            starts += 1;
            let run = pair_ascent(&map, s);
            if best.as_ref().is_none_or(|b| run.value > b.0) {
                best = Some((run.value, lift(&run.psi), lift(&run.phi), k));
            }
        }
    }
    let (dmax_lower, psi, phi, sector) = best.expect("a model has at least one sector");
    Ok(DmaxOutcome {
        dmax_lower,
        witness: (PureStateVec::normalized(psi, layout.clone())?, PureStateVec::normalized(phi, layout)?),
        sector,
        starts,
    })
}

#[derive(Clone, Debug)]
pub struct PivotOptions {
    /// Random inner-maximization starts in the final evaluation.
    pub samples: usize,
    pub max_outer: usize,
    /// Outer iterations without improvement of the best radius before stopping.
    pub stall: usize,
    /// Extra inner-maximization starts, e.g. the D_max witnesses.
    pub seeds: Vec<CVec>,
}

impl Default for PivotOptions {
    fn default() -> Self {
        Self { samples: 32, max_outer: 200, stall: 40, seeds: Vec::new() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PivotOutcome {
    pub radius: f64,
    #[serde(skip)]
    pub pivot: DensityOp,
    /// `1 − Tr σ̃` before normalization.
    pub deficit: f64,
    pub converged: bool,
    pub outer_iterations: usize,
    pub inner_starts: usize,
}

/// Inner maximization of `½‖ρ_E(ψ) − σ‖₁` from one start. Monotone.
fn inner_ascent(map: &ExteriorMap, sigma: &CMat, start: &CVec) -> (f64, CVec, CMat) {
    let mut psi = start.clone();
    let mut best = (f64::NEG_INFINITY, psi.clone(), CMat::zeros(map.dim_e, map.dim_e));
    for _ in 0..ASCENT_MAX_ITER {
        let (s, norm) = sign_of(&(map.state(&psi) - sigma));
        let value = 0.5 * norm;
        let improved = value - best.0;
        if value >= best.0 {
            best = (value, psi.clone(), s.clone());
        }
        if improved <= ASCENT_TOL * value.max(1.0) {
            break;
        }
        let eig = HermEig::new(&map.pullback(&s));
        psi = eig.vector(eig.values.len() - 1);
    }
    best
}

fn inner_max(map: &ExteriorMap, sigma: &CMat, starts: &[CVec]) -> (f64, CVec, CMat) {
    starts
        .iter()
        .map(|s| inner_ascent(map, sigma, s))
        .reduce(|a, b| if b.0 > a.0 { b } else { a })
        .expect("at least one start")
}

/// Approximate 1-center of the exterior image: `min_σ max_ψ ½‖ρ_E(ψ) − σ‖₁`.
///
/// The outer loop takes projected subgradient steps on `σ` from the image of
/// the maximally mixed input and from pure candidates (top eigenvectors of
/// exterior images); the inner maximum is a multi-start ascent over `ψ`
/// that keeps a working set of maximizers. The reported radius is the inner
/// maximum at the best pivot, evaluated with `samples` extra random starts
/// plus the seeds, so it is an upper bound on the 1-center radius whenever
/// that inner maximum is exact.
pub fn pivot_radius(model: &HorizonModel, opts: &PivotOptions, rng: &SeededRng) -> Result<PivotOutcome> {
    let map = ExteriorMap::new(model);
    let f = model.dim_f();
    let mut rng = rng.fork(0);

    let mut pool: Vec<CVec> = (0..f).map(|i| basis_vec(f, i)).collect();
    pool.extend(opts.seeds.iter().cloned());
    for _ in 0..4 {
        pool.push(random_unit_vector(f, &mut rng));
    }
    let mut inner_starts = 0;

    let mut candidates = Vec::new();
    let mut average = CMat::zeros(map.dim_e, map.dim_e);
    for i in 0..f {
        average += map.state(&basis_vec(f, i));
    }
    average.unscale_mut(f as f64);
    for rho in std::iter::once(average.clone()).chain((0..f).map(|i| map.state(&basis_vec(f, i)))) {
        let eig = HermEig::new(&rho);
        candidates.push(outer(&eig.vector(eig.values.len() - 1)));
    }
    candidates.insert(0, average);

    let mut best_sigma = candidates[0].clone();
    let mut best_value = f64::INFINITY;
    for sigma in &candidates {
        inner_starts += pool.len();
        let (v, _, _) = inner_max(&map, sigma, &pool);
        if v < best_value {
            best_value = v;
            best_sigma = sigma.clone();
        }
    }

    let mut sigma = best_sigma.clone();
    let mut since_best = 0;
    let mut outer_iterations = 0;
    let mut converged = false;
    let mut running = CMat::zeros(map.dim_e, map.dim_e);
    let mut weight = 0.0;
    for t in 0..opts.max_outer {
        outer_iterations = t + 1;
        let fresh = random_unit_vector(f, &mut rng);
        let mut starts = pool.clone();
        starts.push(fresh);
        inner_starts += starts.len();
        let (value, psi, s) = inner_max(&map, &sigma, &starts);
        if !pool.iter().any(|p| (p.dotc(&psi)).norm() > 1.0 - 1e-9) {
            pool.push(psi);
            if pool.len() > f + opts.seeds.len() + 12 {
                pool.remove(f + opts.seeds.len());
            }
        }
        if value < best_value - 1e-12 * best_value.max(1.0) {
            best_value = value;
            best_sigma = sigma.clone();
            since_best = 0;
        } else {
            since_best += 1;
        }
        if value <= 1e-14 || since_best >= opts.stall {
            converged = true;
            break;
        }
        // the subgradient of σ ↦ ½‖ρ − σ‖₁ is −S/2; step toward the farthest image
        let step = best_value / (s.norm().max(1e-300) * ((t + 1) as f64).sqrt());
        let w = 1.0 / ((t + 1) as f64).sqrt();
        running += &sigma * C64::new(w, 0.0);
        weight += w;
        sigma = project_density(&(&sigma + &s * C64::new(step, 0.0)));
    }
    if weight > 0.0 {
        candidates.push(project_density(&running.unscale(weight)));
    }
    candidates.push(best_sigma);

    let mut final_starts = pool;
    final_starts.extend(opts.seeds.iter().cloned());
    for _ in 0..opts.samples {
        final_starts.push(random_unit_vector(f, &mut rng));
    }
    let mut result: Option<(f64, CMat)> = None;
    for sigma in candidates {
        inner_starts += final_starts.len();
        let (v, _, _) = inner_max(&map, &sigma, &final_starts);
        if result.as_ref().is_none_or(|r| v < r.0) {
            result = Some((v, sigma));
        }
    }
    let (radius, sigma) = result.expect("candidate list is nonempty");
    let tr = trace(&sigma).re;
    let deficit = (1.0 - tr).max(0.0);
    let layout = SubsystemLayout::single(map.dim_e);
    let pivot = DensityOp::new(sigma.unscale(tr), layout)?;
    Ok(PivotOutcome { radius, pivot, deficit, converged, outer_iterations, inner_starts })
}

/// `½‖ρ_E(ψ) − σ‖₁` for an explicit pivot.
pub fn distance_to_pivot(model: &HorizonModel, psi: &CVec, pivot: &CMat) -> Result<f64> {
    let rho = model.rho_e(psi)?;
    Ok(0.5 * hermitian_trace_norm(&(rho - pivot)))
}
