//! Infallers entangled with an outside reference `R`.
//!
//! The input is `|Φ⟩_FR = Σ_i √λ_i |f_i⟩|r_i⟩` with `dim R` equal to the
//! Schmidt length; the model acts as `U ⊗ 1_R`.

use serde::Serialize;

use crate::channel::HorizonModel;
use crate::metrics::trace_distance_raw;
use crate::random::SeededRng;
use crate::spectral::hermitian_defect;
use crate::tensor::{bipartite_marginals, tensor_product, DensityOp, PureStateVec, Role, SubsystemLayout};
use crate::{CMat, CVec, Error, Result, C64};

/// Tolerance on `Σλ = 1` and on basis unitarity.
pub const SCHMIDT_TOL: f64 = 1e-12;
/// Slack on the entangled-reference bound.
pub const DER_SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtInput {
    lambdas: Vec<f64>,
    /// Unitary on `F` whose columns are `|f_i⟩`; computational basis when absent.
    f_basis: Option<CMat>,
    /// Unitary on `R` whose columns are `|r_i⟩`.
    r_basis: Option<CMat>,
}

fn check_unitary(u: &CMat, dim: usize, what: &str) -> Result<()> {
    if u.shape() != (dim, dim) {
        return Err(Error::DimensionMismatch(format!("{what} basis is {:?}, expected {dim}×{dim}", u.shape())));
    }
    let defect = (u.adjoint() * u - CMat::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if defect > 1e-10 {
        return Err(Error::InvalidParameter(format!("{what} basis is not unitary (defect {defect:.3e})")));
    }
    Ok(())
}

impl SchmidtInput {
    pub fn new(lambdas: Vec<f64>) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(Error::InvalidParameter("empty Schmidt spectrum".into()));
        }
        if let Some(l) = lambdas.iter().find(|l| !(**l >= 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParameter(format!("Schmidt coefficient {l} is not a nonnegative number")));
        }
        let total: f64 = lambdas.iter().sum();
        if (total - 1.0).abs() > SCHMIDT_TOL {
            return Err(Error::InvalidParameter(format!("Schmidt coefficients sum to {total}")));
        }
        Ok(Self { lambdas, f_basis: None, r_basis: None })
    }

    /// `λ = (1/n, …, 1/n)`.
    pub fn maximally_entangled(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Dirichlet(1, …, 1) spectrum of length `n`.
    pub fn random(n: usize, rng: &mut SeededRng) -> Result<Self> {
        let raw: Vec<f64> = (0..n).map(|_| -rng.uniform().max(f64::MIN_POSITIVE).ln()).collect();
        let total: f64 = raw.iter().sum();
        let mut lambdas: Vec<f64> = raw.iter().map(|x| x / total).collect();
        let head: f64 = lambdas[..n - 1].iter().sum();
        lambdas[n - 1] = (1.0 - head).max(0.0);
        Self::new(lambdas)
    }

    pub fn with_f_basis(mut self, u: CMat) -> Result<Self> {
        let dim = u.nrows();
        check_unitary(&u, dim, "F")?;
        if dim < self.lambdas.len() {
            return Err(Error::DimensionMismatch(format!("F basis of dimension {dim} for {} coefficients", self.len())));
        }
        self.f_basis = Some(u);
        Ok(self)
    }

    pub fn with_r_basis(mut self, u: CMat) -> Result<Self> {
        check_unitary(&u, self.lambdas.len(), "R")?;
        self.r_basis = Some(u);
        Ok(self)
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    /// Schmidt length, which is also `dim R`.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    fn f_vector(&self, i: usize, dim_f: usize) -> CVec {
        match &self.f_basis {
            Some(u) => u.column(i).into_owned(),
            None => {
                let mut v = CVec::zeros(dim_f);
                v[i] = C64::new(1.0, 0.0);
                v
            }
        }
    }

    fn r_vector(&self, i: usize) -> CVec {
        match &self.r_basis {
            Some(u) => u.column(i).into_owned(),
            None => {
                let mut v = CVec::zeros(self.len());
                v[i] = C64::new(1.0, 0.0);
                v
            }
        }
    }

    /// `ρ_R = Σ λ_i |r_i⟩⟨r_i|`.
    pub fn rho_r(&self) -> CMat {
        let n = self.len();
        let mut rho = CMat::zeros(n, n);
        for (i, &l) in self.lambdas.iter().enumerate() {
            let r = self.r_vector(i);
            rho += (&r * r.adjoint()).scale(l);
        }
        rho
    }

    fn check_model(&self, model: &HorizonModel) -> Result<()> {
        let f = model.dim_f();
        if self.len() > f {
            return Err(Error::DimensionMismatch(format!("Schmidt length {} exceeds dim F = {f}", self.len())));
        }
        if let Some(u) = &self.f_basis {
            if u.nrows() != f {
                return Err(Error::DimensionMismatch(format!("F basis of dimension {} for dim F = {f}", u.nrows())));
            }
        }
        Ok(())
    }
}

/// `Ψ_tot = Σ_i √λ_i (W_N|f_i⟩) ⊗ |r_i⟩` on `I ⊗ E ⊗ R`.
pub fn joint_state(model: &HorizonModel, input: &SchmidtInput) -> Result<PureStateVec> {
    input.check_model(model)?;
    let w = model.stinespring();
    let n = input.len();
    let mut psi = CVec::zeros(w.nrows() * n);
    for (i, &l) in input.lambdas.iter().enumerate() {
        if l == 0.0 {
            continue;
        }
        let image = &w * input.f_vector(i, model.dim_f());
        let term = crate::tensor::tensor_vec(&image, &input.r_vector(i));
        psi.axpy(C64::new(l.sqrt(), 0.0), &term, C64::new(1.0, 0.0));
    }
    let layout = SubsystemLayout::labeled(&[(Role::I, model.dim_i()), (Role::E, model.dim_e()), (Role::R, n)])?;
    PureStateVec::normalized(psi, layout)
}

/// `ρ_ER = Tr_I |Ψ_tot⟩⟨Ψ_tot|`.
pub fn er_state(model: &HorizonModel, input: &SchmidtInput) -> Result<DensityOp> {
    let psi = joint_state(model, input)?;
    let (_, er) = bipartite_marginals(psi.amplitudes(), model.dim_i(), model.dim_e() * input.len());
    let layout = SubsystemLayout::labeled(&[(Role::E, model.dim_e()), (Role::R, input.len())])?;
    DensityOp::new(er, layout)
}

/// `½‖ρ_ER − σ̃ ⊗ ρ_R‖₁` against an exterior pivot `σ̃`, with `ρ_R` the
/// reference marginal of `ρ_ER`.
pub fn factorization_residual(model: &HorizonModel, input: &SchmidtInput, pivot: &DensityOp) -> Result<f64> {
    if pivot.dim() != model.dim_e() {
        return Err(Error::DimensionMismatch(format!("pivot of dimension {} for dim E = {}", pivot.dim(), model.dim_e())));
    }
    let er = er_state(model, input)?;
    let rho_r = er.partial_trace(&[1])?;
    let product = tensor_product(pivot.matrix(), rho_r.matrix());
    Ok(trace_distance_raw(er.matrix(), &product))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerCheck {
    /// `½‖ρ_ER(a) − ρ_ER(b)‖₁`
    pub der: f64,
    /// `½‖ρ_R(a) − ρ_R(b)‖₁`
    pub reference_distance: f64,
    /// `2√(2ε) + reference_distance`
    pub rhs: f64,
    pub holds: bool,
}

impl DerCheck {
    /// The part of `der` not already present in the reference.
    pub fn new_distinguishability(&self) -> f64 {
        self.der - self.reference_distance
    }
}

/// Compares the `(E, R)` states of two inputs of equal Schmidt length against
/// the reference's own distinguishability plus `2√(2·epsilon_upper)`.
pub fn der_bound_check(model: &HorizonModel, a: &SchmidtInput, b: &SchmidtInput, epsilon_upper: f64) -> Result<DerCheck> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!("Schmidt lengths {} and {} differ", a.len(), b.len())));
    }
    let (ea, eb) = (er_state(model, a)?, er_state(model, b)?);
    let der = trace_distance_raw(ea.matrix(), eb.matrix());
    let reference_distance = trace_distance_raw(&a.rho_r(), &b.rho_r());
    let rhs = crate::tradeoff::tradeoff_bound(epsilon_upper) + reference_distance;
    Ok(DerCheck { der, reference_distance, rhs, holds: der <= rhs + DER_SLACK })
}

/// Largest entry of `ρ_R(ρ_ER) − Σλ|r⟩⟨r|`.
pub fn reference_marginal_defect(model: &HorizonModel, input: &SchmidtInput) -> Result<f64> {
    let er = er_state(model, input)?;
    let marginal = er.partial_trace(&[1])?;
    let diff = marginal.matrix() - input.rho_r();
    debug_assert!(hermitian_defect(&diff) < 1e-9);
    Ok(diff.iter().map(|z| z.norm()).fold(0.0, f64::max))
}
