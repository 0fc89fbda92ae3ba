use serde::Serialize;

use super::admm::{dual_certificate, AdmmOptions};
use super::variational::{maximize_output_distance, refine_output_distance, VariationalOptions};
use crate::spectral::HermEig;
use crate::CVec;
use crate::channel::Channel;
use crate::tensor::{PureStateVec, SubsystemLayout};
use crate::{Error, Result};

/// Largest input dimension for which the convex certificate is attempted.
pub const MAX_CERTIFIED_DIM_IN: usize = 16;

#[derive(Clone, Debug, Default)]
pub struct DiamondOptions {
    pub variational: VariationalOptions,
    pub admm: AdmmOptions,
}

/// Bracket `lower ≤ ½‖a − b‖◇ ≤ upper`.
#[derive(Clone, Debug, Serialize)]
pub struct DiamondResult {
    /// Output distance achieved by `witness_state`.
    pub lower: f64,
    /// Value of a feasible point of the dual program.
    pub upper: f64,
    pub gap: f64,
    #[serde(skip)]
    pub witness_state: PureStateVec,
    pub certified: bool,
    pub admm_iterations: usize,
    pub variational_iterations: usize,
}

/// Half the diamond distance between two channels, bracketed by two
/// independent evaluators: a multi-start variational witness (`lower`) and a
/// dual certificate of the convex program (`upper`). The result is
/// `certified` when `upper − lower ≤ tol`.
pub fn diamond_distance(a: &Channel, b: &Channel, tol: f64, opts: &DiamondOptions) -> Result<DiamondResult> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch(format!(
            "channels {}→{} and {}→{}",
            a.dim_in(),
            a.dim_out(),
            b.dim_in(),
            b.dim_out()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let dim_in = a.dim_in();
    let (ka, kb) = (a.kraus(), b.kraus());
    let var = maximize_output_distance(&ka, &kb, &opts.variational);
    let mut lower = var.value.max(0.0);
    let mut witness = var.witness;
    let mut variational_iterations = var.iterations;
    let witness_layout = SubsystemLayout::unlabeled(&[dim_in, dim_in])?;

    if dim_in > MAX_CERTIFIED_DIM_IN {
        // ½‖·‖◇ never exceeds 1 for a difference of channels
        return Ok(DiamondResult {
            lower,
            upper: 1.0,
            gap: 1.0 - lower,
            witness_state: PureStateVec::normalized(witness, witness_layout)?,
            certified: false,
            admm_iterations: 0,
            variational_iterations,
        });
    }

    let j = a.choi() - b.choi();
    let admm_opts = AdmmOptions { target: Some(lower), gap: 0.5 * tol, ..opts.admm.clone() };
    let dual = dual_certificate(&j, a.dim_out(), dim_in, &admm_opts);
    let upper = dual.upper.min(1.0);
    if upper - lower > tol {
        // purifications of the input marginal suggested by the dual multiplier
        let root = HermEig::new(&dual.input_state).reconstruct_with(|v| v.max(0.0).sqrt());
        for m in [root.clone(), root.map(|z| z.conj())] {
            let start = CVec::from_fn(dim_in * dim_in, |k, _| m[(k / dim_in, k % dim_in)]);
            let polished = refine_output_distance(&ka, &kb, start, &opts.variational);
            variational_iterations += polished.iterations;
            if polished.value > lower {
                lower = polished.value;
                witness = polished.witness;
            }
        }
    }
    let gap = upper - lower;
    Ok(DiamondResult {
        lower,
        upper,
        gap,
        witness_state: PureStateVec::normalized(witness, witness_layout)?,
        certified: gap <= tol,
        admm_iterations: dual.iterations,
        variational_iterations,
    })
}
