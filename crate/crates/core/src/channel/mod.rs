//! Quantum channels in Kraus, Choi and Stinespring form.
//!
//! Conventions: the Choi matrix lives on `out ⊗ in` and equals
//! `Σ_ij N(|i⟩⟨j|) ⊗ |i⟩⟨j|`; a Stinespring isometry maps `in` into
//! `out ⊗ env` (output factor first).

mod families;
mod horizon;

pub use families::{make_family, ChannelFamily, ChannelFamilySpec};
pub use horizon::{complete_to_unitary, embed_family_as_horizon, ideal_infall, HorizonModel, IsometricEmbedding, ModelDims};

use crate::spectral::{eye, max_abs, HermEig};
use crate::tensor::partial_trace_raw;
use crate::{CMat, Error, Result, C64};

/// Tolerance for the CPTP and isometry checks.
pub const CPTP_TOL: f64 = 1e-10;
/// Kraus operators with Frobenius norm at or below this are dropped when a
/// minimal dilation is built.
pub const KRAUS_DROP_TOL: f64 = 1e-12;
/// Choi eigenvalues at or below this are treated as zero rank.
const CHOI_RANK_TOL: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Kraus(Vec<CMat>),
    /// `(dim_out·dim_in)²` matrix on `out ⊗ in`.
    Choi(CMat),
    /// `(dim_out·dim_env) × dim_in` isometry.
    Stinespring(CMat),
}

/// A completely positive trace-preserving map.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    repr: Representation,
    dim_in: usize,
    dim_out: usize,
    dim_env: usize,
}

impl Channel {
    pub fn from_kraus(ops: Vec<CMat>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::NotCptp("empty Kraus set".into()))?;
        let (dim_out, dim_in) = first.shape();
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::NotCptp("zero-dimensional Kraus operator".into()));
        }
        if ops.iter().any(|k| k.shape() != (dim_out, dim_in)) {
            return Err(Error::DimensionMismatch("Kraus operators have different shapes".into()));
        }
        let completeness = ops.iter().fold(CMat::zeros(dim_in, dim_in), |acc, k| acc + k.adjoint() * k);
        let defect = max_abs(&(completeness - eye(dim_in)));
        if defect > CPTP_TOL {
            return Err(Error::NotCptp(format!("Σ K†K deviates from the identity by {defect:.3e}")));
        }
        let dim_env = ops.len();
        Ok(Self { repr: Representation::Kraus(ops), dim_in, dim_out, dim_env })
    }

    pub fn from_choi(choi: CMat, dim_in: usize, dim_out: usize) -> Result<Self> {
        let n = dim_in * dim_out;
        if choi.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!(
                "Choi matrix is {:?}, expected {n}x{n}",
                choi.shape()
            )));
        }
        let choi = crate::spectral::hermitize(&choi).map_err(|e| Error::NotCptp(e.to_string()))?;
        let eig = HermEig::new(&choi);
        if eig.min() < -CPTP_TOL {
            return Err(Error::NotCptp(format!("Choi matrix has eigenvalue {:.3e}", eig.min())));
        }
        let marginal = partial_trace_raw(&choi, &[dim_out, dim_in], &[1])?;
        let defect = max_abs(&(marginal - eye(dim_in)));
        if defect > CPTP_TOL {
            return Err(Error::NotCptp(format!("input marginal deviates from the identity by {defect:.3e}")));
        }
        let dim_env = eig.values.iter().filter(|&&v| v > CHOI_RANK_TOL).count().max(1);
        Ok(Self { repr: Representation::Choi(choi), dim_in, dim_out, dim_env })
    }

    pub fn from_stinespring(isometry: CMat, dim_out: usize, dim_env: usize) -> Result<Self> {
        if dim_out == 0 || dim_env == 0 || isometry.nrows() != dim_out * dim_env {
            return Err(Error::DimensionMismatch(format!(
                "isometry has {} rows, expected {dim_out}·{dim_env}",
                isometry.nrows()
            )));
        }
        let dim_in = isometry.ncols();
        let defect = max_abs(&(isometry.adjoint() * &isometry - eye(dim_in)));
        if defect > CPTP_TOL {
            return Err(Error::NotCptp(format!("W†W deviates from the identity by {defect:.3e}")));
        }
        Ok(Self { repr: Representation::Stinespring(isometry), dim_in, dim_out, dim_env })
    }

    /// The identity channel on `C^dim`.
    pub fn identity(dim: usize) -> Self {
        Self::from_kraus(vec![eye(dim)]).expect("identity is CPTP")
    }

    /// `ρ ↦ UρU†`.
    pub fn unitary(u: CMat) -> Result<Self> {
        Self::from_kraus(vec![u])
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// Environment dimension of the stored (or minimal, for Choi) dilation.
    pub fn dim_env(&self) -> usize {
        self.dim_env
    }

    pub fn kraus(&self) -> Vec<CMat> {
        match &self.repr {
            Representation::Kraus(ops) => ops.clone(),
            Representation::Stinespring(w) => stinespring_to_kraus(w, self.dim_out, self.dim_env),
            Representation::Choi(j) => choi_to_kraus(j, self.dim_in, self.dim_out),
        }
    }

    pub fn choi(&self) -> CMat {
        match &self.repr {
            Representation::Choi(j) => j.clone(),
            _ => kraus_to_choi(&self.kraus()),
        }
    }

    /// Stinespring isometry together with its environment dimension.
    pub fn stinespring(&self) -> (CMat, usize) {
        match &self.repr {
            Representation::Stinespring(w) => (w.clone(), self.dim_env),
            _ => {
                let ops: Vec<CMat> = self.kraus().into_iter().filter(|k| k.norm() > KRAUS_DROP_TOL).collect();
                let env = ops.len();
                (kraus_to_stinespring(&ops), env)
            }
        }
    }

    pub fn to_kraus(&self) -> Channel {
        let ops = self.kraus();
        Channel { dim_env: ops.len(), repr: Representation::Kraus(ops), ..*self }
    }

    pub fn to_choi(&self) -> Channel {
        Channel { repr: Representation::Choi(self.choi()), ..*self }
    }

    pub fn to_stinespring(&self) -> Channel {
        let (w, env) = self.stinespring();
        Channel { repr: Representation::Stinespring(w), dim_env: env, ..*self }
    }

    /// Applies the channel to an operator on the input space.
    pub fn apply(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "input is {:?}, channel expects {}x{}",
                rho.shape(),
                self.dim_in,
                self.dim_in
            )));
        }
        Ok(match &self.repr {
            Representation::Kraus(ops) => {
                ops.iter().fold(CMat::zeros(self.dim_out, self.dim_out), |acc, k| acc + k * rho * k.adjoint())
            }
            Representation::Stinespring(w) => {
                let big = w * rho * w.adjoint();
                partial_trace_raw(&big, &[self.dim_out, self.dim_env], &[0])?
            }
            Representation::Choi(j) => {
                let lifted = j * crate::tensor::tensor_product(&eye(self.dim_out), &rho.transpose());
                partial_trace_raw(&lifted, &[self.dim_out, self.dim_in], &[0])?
            }
        })
    }

    /// Channel `in → env` obtained by tracing the output factor of the
    /// Stinespring dilation instead of the environment.
    pub fn complementary(&self) -> Channel {
        let (w, env) = self.stinespring();
        let out = self.dim_out;
        let swapped = CMat::from_fn(env * out, self.dim_in, |row, i| {
            let (k, a) = (row / out, row % out);
            w[(a * env + k, i)]
        });
        Channel { repr: Representation::Stinespring(swapped), dim_in: self.dim_in, dim_out: env, dim_env: out }
    }

    /// `self ⊗ id_dim`, applied with the identity on the right factor.
    pub fn apply_extended(&self, rho: &CMat, dim_ref: usize) -> Result<CMat> {
        let n = self.dim_in * dim_ref;
        if rho.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("input is {:?}, expected {n}x{n}", rho.shape())));
        }
        let id = eye(dim_ref);
        let ops = self.kraus();
        let m = self.dim_out * dim_ref;
        Ok(ops.iter().fold(CMat::zeros(m, m), |acc, k| {
            let kk = crate::tensor::tensor_product(k, &id);
            acc + &kk * rho * kk.adjoint()
        }))
    }
}

pub fn kraus_to_choi(ops: &[CMat]) -> CMat {
    let (dim_out, dim_in) = ops[0].shape();
    let n = dim_out * dim_in;
    let mut j = CMat::zeros(n, n);
    for k in ops {
        // |K⟩⟩ = Σ K_ai |a⟩⊗|i⟩
        let v = crate::CVec::from_fn(n, |idx, _| k[(idx / dim_in, idx % dim_in)]);
        j += &v * v.adjoint();
    }
    j
}

pub fn choi_to_kraus(choi: &CMat, dim_in: usize, dim_out: usize) -> Vec<CMat> {
    let eig = HermEig::new(choi);
    let mut ops: Vec<CMat> = eig
        .values
        .iter()
        .enumerate()
        .rev()
        .filter(|(_, &v)| v > CHOI_RANK_TOL)
        .map(|(k, &v)| {
            let s = v.sqrt();
            CMat::from_fn(dim_out, dim_in, |a, i| eig.vectors[(a * dim_in + i, k)] * s)
        })
        .collect();
    if ops.is_empty() {
        ops.push(CMat::zeros(dim_out, dim_in));
    }
    ops
}

pub fn kraus_to_stinespring(ops: &[CMat]) -> CMat {
    let (dim_out, dim_in) = ops[0].shape();
    let env = ops.len();
    CMat::from_fn(dim_out * env, dim_in, |row, i| {
        let (a, k) = (row / env, row % env);
        ops[k][(a, i)]
    })
}

pub fn stinespring_to_kraus(w: &CMat, dim_out: usize, dim_env: usize) -> Vec<CMat> {
    (0..dim_env)
        .map(|k| CMat::from_fn(dim_out, w.ncols(), |a, i| w[(a * dim_env + k, i)]))
        .collect()
}

/// Largest entry-wise deviation between two channels over the matrix units
/// `|i⟩⟨j|` of the input.
pub fn action_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.dim_in() != b.dim_in() || a.dim_out() != b.dim_out() {
        return Err(Error::DimensionMismatch("channels act on different spaces".into()));
    }
    let n = a.dim_in();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let mut unit = CMat::zeros(n, n);
            unit[(i, j)] = C64::new(1.0, 0.0);
            worst = worst.max(max_abs(&(a.apply(&unit)? - b.apply(&unit)?)));
        }
    }
    Ok(worst)
}
