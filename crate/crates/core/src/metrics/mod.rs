//! Distinguishability functionals.

mod admm;
mod diamond;
mod variational;

pub use admm::{dual_certificate, AdmmOptions, AdmmOutcome};
pub use diamond::{diamond_distance, DiamondOptions, DiamondResult};
pub use variational::{maximize_output_distance, refine_output_distance, VariationalOptions, VariationalOutcome};

use serde::Serialize;

use crate::spectral::hermitian_trace_norm;
use crate::tensor::{DensityOp, PureStateVec};
use crate::{CMat, Error, Result};

/// Slack in the Fuchs–van de Graaf check.
pub const FVDG_SLACK: f64 = 1e-9;

/// `½‖a − b‖₁` on raw Hermitian matrices.
pub fn trace_distance_raw(a: &CMat, b: &CMat) -> f64 {
    0.5 * hermitian_trace_norm(&(a - b))
}

/// `½‖a − b‖₁`, clamped to `[0, 1]`.
pub fn trace_distance(a: &DensityOp, b: &DensityOp) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!("states of dimension {} and {}", a.dim(), b.dim())));
    }
    Ok(trace_distance_raw(a.matrix(), b.matrix()).clamp(0.0, 1.0))
}

/// `⟨ψ|ρ|ψ⟩`.
pub fn fidelity_to_pure(rho: &DensityOp, psi: &PureStateVec) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(format!("state of dimension {} and vector of {}", rho.dim(), psi.dim())));
    }
    Ok(fidelity_to_pure_raw(rho.matrix(), psi.amplitudes()))
}

pub fn fidelity_to_pure_raw(rho: &CMat, psi: &crate::CVec) -> f64 {
    psi.dotc(&(rho * psi)).re.clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FvdgCheck {
    /// `1 − ⟨ψ|ρ|ψ⟩`
    pub fid_gap: f64,
    /// `½‖ρ − |ψ⟩⟨ψ|‖₁`
    pub td: f64,
    pub holds: bool,
}

/// Checks `1 − ⟨ψ|ρ|ψ⟩ ≤ ½‖ρ − |ψ⟩⟨ψ|‖₁`.
pub fn fvdg_check(rho: &DensityOp, psi: &PureStateVec) -> Result<FvdgCheck> {
    let fid_gap = 1.0 - fidelity_to_pure(rho, psi)?;
    let td = trace_distance(rho, &psi.to_density())?;
    Ok(FvdgCheck { fid_gap, td, holds: fid_gap <= td + FVDG_SLACK })
}
