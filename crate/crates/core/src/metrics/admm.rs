//! Upper bound on `½‖A − B‖◇` for a difference of channels from the dual
//! program
//!
//! ```text
//! minimize λ_max(Tr_out Z)  subject to  Z ⪰ 0,  Z ⪰ J,
//! ```
//!
//! where `J` is the Choi matrix of `A − B` on `out ⊗ in`. Every feasible
//! `Z` certifies an upper bound, so the solver output is repaired into an
//! exactly feasible point by an identity shift before it is reported.
//!
//! The program is solved by over-relaxed ADMM on the splitting
//! `P₁ = Z ∈ PSD`, `P₂ = Z − J ∈ PSD`, `S = Tr_out Z` with cost `λ_max(S)`.

use crate::spectral::{eye, project_density, project_psd, prox_max_eigenvalue, HermEig};
use crate::tensor::{partial_trace_raw, tensor_product};
use crate::CMat;

#[derive(Clone, Debug)]
pub struct AdmmOptions {
    pub max_iter: usize,
    /// Over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Stop once the certified value is within this of `target`.
    pub gap: f64,
    /// Known lower bound used only for the stopping test.
    pub target: Option<f64>,
    pub check_every: usize,
}

impl Default for AdmmOptions {
    fn default() -> Self {
        Self { max_iter: 200_000, relaxation: 1.6, gap: 1e-7, target: None, check_every: 25 }
    }
}

#[derive(Clone, Debug)]
pub struct AdmmOutcome {
    /// Certified upper bound from a feasible dual point.
    pub upper: f64,
    /// The feasible point achieving `upper`.
    pub certificate: CMat,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    /// Residuals fell below the stall threshold or the target gap was met.
    pub converged: bool,
    /// Multiplier of `S = Tr_out Z`, projected onto density matrices: an
    /// estimate of the optimal input marginal of the primal program.
    pub input_state: CMat,
}

struct Marginal {
    dim_out: usize,
    dim_in: usize,
}

impl Marginal {
    fn apply(&self, z: &CMat) -> CMat {
        partial_trace_raw(z, &[self.dim_out, self.dim_in], &[1]).expect("layout matches by construction")
    }

    fn adjoint(&self, s: &CMat) -> CMat {
        tensor_product(&eye(self.dim_out), s)
    }
}

fn frob2(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

/// Value of `z` after shifting it into the feasible set.
fn certify(z: &CMat, j: &CMat, tr: &Marginal) -> (f64, CMat) {
    let h = crate::spectral::hermitian_part(z);
    let t = (-HermEig::new(&h).min()).max(-HermEig::new(&(&h - j)).min()).max(0.0);
    let n = h.nrows();
    let feasible = if t > 0.0 { &h + eye(n).scale(t) } else { h };
    let value = HermEig::new(&tr.apply(&feasible)).max();
    (value, feasible)
}

pub fn dual_certificate(j: &CMat, dim_out: usize, dim_in: usize, opts: &AdmmOptions) -> AdmmOutcome {
    let tr = Marginal { dim_out, dim_in };
    let alpha = opts.relaxation;
    let n = j.nrows();

    let mut p1 = project_psd(j);
    let mut p2 = &p1 - j;
    let mut s = tr.apply(&p1);
    let mut u1 = CMat::zeros(n, n);
    let mut u2 = CMat::zeros(n, n);
    let mut u3 = CMat::zeros(dim_in, dim_in);
    let mut beta = 1.0;

    // J₊ is feasible: J₊ ⪰ 0 and J₊ − J = J₋ ⪰ 0
    let (mut best, mut certificate) = certify(&p1, j, &tr);
    let mut r_norm = f64::INFINITY;
    let mut s_norm = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    let shrink = 1.0 / (2.0 + dim_out as f64);
    let scale = 1.0 + frob2(j).sqrt();

    let done = |best: f64| opts.target.is_some_and(|t| best - t <= opts.gap);
    if done(best) {
        converged = true;
    }

    while !converged && iterations < opts.max_iter {
        iterations += 1;
        // Z-update: (2 + T*T) Z = R, inverted with Woodbury since T T* = dim_out
        let r = (&p1 - &u1) + (j + &p2 - &u2) + tr.adjoint(&(&s - &u3));
        let z = (&r - tr.adjoint(&tr.apply(&r)).scale(shrink)).scale(0.5);
        let tz = tr.apply(&z);

        let hat1 = z.scale(alpha) + p1.scale(1.0 - alpha);
        let hat2 = (&z - j).scale(alpha) + p2.scale(1.0 - alpha);
        let hat3 = tz.scale(alpha) + s.scale(1.0 - alpha);

        let p1_new = project_psd(&(&hat1 + &u1));
        let p2_new = project_psd(&(&hat2 + &u2));
        let s_new = prox_max_eigenvalue(&(&hat3 + &u3), 1.0 / beta);

        u1 += &hat1 - &p1_new;
        u2 += &hat2 - &p2_new;
        u3 += &hat3 - &s_new;

        r_norm = (frob2(&(&z - &p1_new)) + frob2(&(&z - j - &p2_new)) + frob2(&(&tz - &s_new))).sqrt();
        s_norm = beta
            * (frob2(&(&p1_new - &p1)) + frob2(&(&p2_new - &p2)) + frob2(&tr.adjoint(&(&s_new - &s)))).sqrt();
        p1 = p1_new;
        p2 = p2_new;
        s = s_new;

        if iterations % opts.check_every == 0 {
            for candidate in [&z, &p1] {
                let (value, feasible) = certify(candidate, j, &tr);
                if value < best {
                    best = value;
                    certificate = feasible;
                }
            }
            if done(best) || (r_norm < 1e-13 * scale && s_norm < 1e-13 * scale) {
                converged = true;
            }
            // residual balancing
            if r_norm > 10.0 * s_norm {
                beta *= 2.0;
                u1 = u1.scale(0.5);
                u2 = u2.scale(0.5);
                u3 = u3.scale(0.5);
            } else if s_norm > 10.0 * r_norm {
                beta *= 0.5;
                u1 = u1.scale(2.0);
                u2 = u2.scale(2.0);
                u3 = u3.scale(2.0);
            }
        }
    }

    AdmmOutcome {
        upper: best.max(0.0),
        certificate,
        iterations,
        primal_residual: r_norm,
        dual_residual: s_norm,
        converged,
        input_state: project_density(&u3.scale(beta)),
    }
}
