//! Lower bound on `½‖A − B‖◇` by maximizing the output trace distance over
//! pure inputs on `in ⊗ ref` with `dim ref = dim in`.

use std::collections::VecDeque;

use crate::exec::{map_indexed, Schedule};
use crate::random::{random_unit_vector, SeededRng};
use crate::spectral::{hermitian_sign, HermEig};
use crate::tensor::tensor_product;
use crate::{CMat, CVec, C64};

#[derive(Clone, Debug)]
pub struct VariationalOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop when the relative improvement over `window` steps drops below this.
    pub rel_improvement: f64,
    pub window: usize,
    pub rng: SeededRng,
    pub schedule: Schedule,
}

impl Default for VariationalOptions {
    fn default() -> Self {
        Self {
            restarts: 32,
            max_iter: 2_000,
            rel_improvement: 1e-10,
            window: 50,
            rng: SeededRng::new(0, 0),
            schedule: Schedule::Parallel,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VariationalOutcome {
    pub value: f64,
    pub witness: CVec,
    pub iterations: usize,
}

/// Objective `½‖Σ Ak ψψ† Ak† − Σ Bl ψψ† Bl†‖₁` over extended Kraus operators.
struct Objective {
    plus: Vec<CMat>,
    minus: Vec<CMat>,
    dim: usize,
}

impl Objective {
    fn new(a: &[CMat], b: &[CMat], dim_ref: usize) -> Self {
        let id = CMat::identity(dim_ref, dim_ref);
        let ext = |ops: &[CMat]| ops.iter().map(|k| tensor_product(k, &id)).collect::<Vec<_>>();
        let plus = ext(a);
        let dim = plus[0].ncols();
        Self { plus, minus: ext(b), dim }
    }

    fn output(&self, psi: &CVec) -> CMat {
        let m = self.plus[0].nrows();
        let mut x = CMat::zeros(m, m);
        for k in &self.plus {
            let phi = k * psi;
            x += &phi * phi.adjoint();
        }
        for k in &self.minus {
            let phi = k * psi;
            x -= &phi * phi.adjoint();
        }
        x
    }

    /// Value at `psi` and the ascent operator `G(S)` for the sign `S` of the output.
    fn value_and_operator(&self, psi: &CVec) -> (f64, CMat) {
        let x = self.output(psi);
        let scale = x.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let (sign, norm) = hermitian_sign(&x, 1e-14 * scale.max(1e-300));
        let mut g = CMat::zeros(self.dim, self.dim);
        for k in &self.plus {
            g += k.adjoint() * &sign * k;
        }
        for k in &self.minus {
            g -= k.adjoint() * &sign * k;
        }
        (0.5 * norm, g)
    }

    fn value(&self, psi: &CVec) -> f64 {
        0.5 * crate::spectral::hermitian_trace_norm(&self.output(psi))
    }
}

fn ascend(obj: &Objective, start: CVec, opts: &VariationalOptions) -> VariationalOutcome {
    let mut psi = start;
    let mut value = obj.value(&psi);
    let mut step = 1.0;
    let mut history: VecDeque<f64> = VecDeque::with_capacity(opts.window + 1);
    let mut iterations = 0;
    while iterations < opts.max_iter {
        iterations += 1;
        let (_, g) = obj.value_and_operator(&psi);
        // block step: the best input for the current sign is the top eigenvector
        let top = HermEig::new(&crate::spectral::hermitian_part(&g));
        let candidate = top.vector(top.values.len() - 1);
        let v = obj.value(&candidate);
        if v > value {
            psi = candidate;
            value = v;
        } else {
            // projected gradient on the sphere, halving the step until it helps
            let gpsi = &g * &psi;
            let along = psi.dotc(&gpsi);
            let grad = gpsi - &psi * along;
            if grad.norm() > 0.0 {
                while step > 1e-14 {
                    let trial = &psi + &grad * C64::new(step, 0.0);
                    let trial = trial.unscale(trial.norm());
                    let v = obj.value(&trial);
                    if v > value {
                        psi = trial;
                        value = v;
                        step = (step * 2.0).min(1e3);
                        break;
                    }
                    step *= 0.5;
                }
            }
        }
        history.push_back(value);
        if history.len() > opts.window {
            let old = history.pop_front().unwrap_or(0.0);
            if value - old <= opts.rel_improvement * value.abs().max(1e-300) {
                break;
            }
        }
    }
    VariationalOutcome { value, witness: psi, iterations }
}

/// Multi-start maximization of `½‖((A − B) ⊗ id)(|ψ⟩⟨ψ|)‖₁`.
///
/// `a` and `b` are Kraus sets with equal input and output dimensions. The
/// first start is the maximally entangled state; the others are Haar draws
/// from independent forks of `opts.rng`.
pub fn maximize_output_distance(a: &[CMat], b: &[CMat], opts: &VariationalOptions) -> VariationalOutcome {
    let dim_in = a[0].ncols();
    let obj = Objective::new(a, b, dim_in);
    let restarts = opts.restarts.max(1);
    let outcomes = map_indexed(restarts, opts.schedule, |k| {
        let start = if k == 0 {
            let s = 1.0 / (dim_in as f64).sqrt();
            CVec::from_fn(dim_in * dim_in, |idx, _| {
                if idx / dim_in == idx % dim_in {
                    C64::new(s, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        } else {
            random_unit_vector(dim_in * dim_in, &mut opts.rng.fork(k as u64))
        };
        ascend(&obj, start, opts)
    });
    let iterations = outcomes.iter().map(|o| o.iterations).sum();
    let best = outcomes
        .into_iter()
        .reduce(|best, o| if o.value > best.value { o } else { best })
        .expect("at least one restart");
    VariationalOutcome { iterations, ..best }
}

/// Single ascent from a given input on `in ⊗ ref`.
pub fn refine_output_distance(a: &[CMat], b: &[CMat], start: CVec, opts: &VariationalOptions) -> VariationalOutcome {
    let dim_in = a[0].ncols();
    let obj = Objective::new(a, b, dim_in);
    let start = start.unscale(start.norm());
    ascend(&obj, start, opts)
}
