//! Multipartite layouts, states, tensor products and partial traces.
//!
//! Factors are ordered row-major: for dims `[d0, d1, ..]` the basis vector
//! `|i0⟩⊗|i1⟩⊗..` sits at index `i0·(d1·d2·..) + i1·(d2·..) + ..`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::spectral::{hermitize, outer, trace, HermEig};
use crate::{CMat, CVec, Error, Result, C64};

pub const TRACE_TOL: f64 = 1e-10;
pub const NEGATIVITY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    /// Infalling system.
    F,
    /// Black hole before the infall.
    BH,
    /// Interior.
    I,
    /// Exterior.
    E,
    /// External reference entangled with the infaller.
    R,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::F => "F",
            Role::BH => "BH",
            Role::I => "I",
            Role::E => "E",
            Role::R => "R",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    roles: Vec<Option<Role>>,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>, roles: Vec<Option<Role>>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidLayout("a layout needs at least one factor".into()));
        }
        if dims.len() != roles.len() {
            return Err(Error::InvalidLayout(format!("{} dims but {} roles", dims.len(), roles.len())));
        }
        if let Some(k) = dims.iter().position(|&d| d == 0) {
            return Err(Error::InvalidLayout(format!("factor {k} has dimension 0")));
        }
        let labeled: Vec<Role> = roles.iter().flatten().copied().collect();
        for (i, r) in labeled.iter().enumerate() {
            if labeled[i + 1..].contains(r) {
                return Err(Error::InvalidLayout(format!("role {r} assigned twice")));
            }
        }
        Ok(Self { dims, roles })
    }

    pub fn labeled(factors: &[(Role, usize)]) -> Result<Self> {
        Self::new(factors.iter().map(|f| f.1).collect(), factors.iter().map(|f| Some(f.0)).collect())
    }

    pub fn unlabeled(dims: &[usize]) -> Result<Self> {
        Self::new(dims.to_vec(), vec![None; dims.len()])
    }

    /// One unlabeled factor.
    pub fn single(dim: usize) -> Self {
        Self::unlabeled(&[dim]).expect("positive dimension")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn roles(&self) -> &[Option<Role>] {
        &self.roles
    }

    pub fn num_factors(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn index_of(&self, role: Role) -> Option<usize> {
        self.roles.iter().position(|r| *r == Some(role))
    }

    pub fn dim_of(&self, role: Role) -> Option<usize> {
        self.index_of(role).map(|k| self.dims[k])
    }

    /// Layout restricted to the kept factors, in ascending factor order.
    pub fn restrict(&self, keep: &[usize]) -> Result<Self> {
        let keep = normalize_keep(keep, self.dims.len())?;
        Self::new(keep.iter().map(|&k| self.dims[k]).collect(), keep.iter().map(|&k| self.roles[k]).collect())
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let mut roles = self.roles.clone();
        roles.extend_from_slice(&other.roles);
        Self::new(dims, roles)
    }
}

fn normalize_keep(keep: &[usize], factors: usize) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::InvalidParameter("partial trace must keep at least one factor".into()));
    }
    if let Some(&index) = keep.iter().find(|&&k| k >= factors) {
        return Err(Error::IndexOutOfRange { index, factors });
    }
    let mut keep = keep.to_vec();
    keep.sort_unstable();
    keep.dedup();
    Ok(keep)
}

/// Kronecker product `a ⊗ b`.
pub fn tensor_product(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn tensor_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

/// Offsets of every multi-index over `factors` into a row-major space.
fn offsets(dims: &[usize], strides: &[usize], factors: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &k in factors {
        let mut next = Vec::with_capacity(out.len() * dims[k]);
        for &base in &out {
            for i in 0..dims[k] {
                next.push(base + i * strides[k]);
            }
        }
        out = next;
    }
    out
}

/// Partial trace of a raw matrix over every factor not listed in `keep`.
pub fn partial_trace_raw(m: &CMat, dims: &[usize], keep: &[usize]) -> Result<CMat> {
    let keep = normalize_keep(keep, dims.len())?;
    let total: usize = dims.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but the layout has dimension {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();
    let kept_off = offsets(dims, &strides, &keep);
    let traced_off = offsets(dims, &strides, &traced);
    let n = kept_off.len();
    Ok(CMat::from_fn(n, n, |a, b| {
        let (ra, rb) = (kept_off[a], kept_off[b]);
        traced_off.iter().map(|&t| m[(ra + t, rb + t)]).sum()
    }))
}

/// Reduced states of a bipartite pure vector on `A ⊗ B`: returns
/// `(Tr_B |v⟩⟨v|, Tr_A |v⟩⟨v|)`.
pub fn bipartite_marginals(v: &CVec, dim_a: usize, dim_b: usize) -> (CMat, CMat) {
    // row a, column b holds the amplitude of |a⟩|b⟩
    let m = CMat::from_fn(dim_a, dim_b, |a, b| v[a * dim_b + b]);
    let rho_a = &m * m.adjoint();
    let rho_b = m.transpose() * m.map(|z| z.conj());
    (rho_a, rho_b)
}

/// Validated density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityOp {
    matrix: CMat,
    layout: SubsystemLayout,
}

impl DensityOp {
    /// Unit-trace state.
    pub fn new(matrix: CMat, layout: SubsystemLayout) -> Result<Self> {
        Self::with_trace(matrix, layout, 1.0)
    }

    /// State with a declared (possibly sub-unit) trace.
    pub fn with_trace(matrix: CMat, layout: SubsystemLayout, expected_trace: f64) -> Result<Self> {
        if matrix.nrows() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "matrix dimension {} does not match layout dimension {}",
                matrix.nrows(),
                layout.total_dim()
            )));
        }
        let matrix = hermitize(&matrix)?;
        let tr = trace(&matrix).re;
        if (tr - expected_trace).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from {expected_trace}")));
        }
        let min = HermEig::new(&matrix).min();
        if min < -NEGATIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix, layout })
    }

    /// Single-factor state.
    pub fn from_matrix(matrix: CMat) -> Result<Self> {
        let n = matrix.nrows();
        Self::new(matrix, SubsystemLayout::single(n))
    }

    pub fn from_pure(psi: &PureStateVec) -> Self {
        Self { matrix: outer(psi.amplitudes()), layout: psi.layout().clone() }
    }

    pub fn maximally_mixed(layout: SubsystemLayout) -> Self {
        let n = layout.total_dim();
        Self { matrix: CMat::identity(n, n).unscale(n as f64), layout }
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        trace(&self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        HermEig::new(&self.matrix).values
    }

    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOp> {
        let reduced = partial_trace_raw(&self.matrix, self.layout.dims(), keep)?;
        let layout = self.layout.restrict(keep)?;
        Ok(DensityOp { matrix: crate::spectral::hermitian_part(&reduced), layout })
    }

    pub fn tensor(&self, other: &DensityOp) -> Result<DensityOp> {
        Ok(DensityOp {
            matrix: tensor_product(&self.matrix, &other.matrix),
            layout: self.layout.tensor(&other.layout)?,
        })
    }
}

/// Convenience wrapper around [`DensityOp::partial_trace`].
pub fn partial_trace(rho: &DensityOp, keep: &[usize]) -> Result<DensityOp> {
    rho.partial_trace(keep)
}

/// Normalized pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct PureStateVec {
    amplitudes: CVec,
    layout: SubsystemLayout,
}

impl PureStateVec {
    pub fn new(amplitudes: CVec, layout: SubsystemLayout) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a layout of dimension {}",
                amplitudes.len(),
                layout.total_dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { amplitudes, layout })
    }

    /// Rescales `amplitudes` to unit norm first.
    pub fn normalized(amplitudes: CVec, layout: SubsystemLayout) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm), layout)
    }

    pub fn basis(index: usize, layout: SubsystemLayout) -> Result<Self> {
        let n = layout.total_dim();
        if index >= n {
            return Err(Error::IndexOutOfRange { index, factors: n });
        }
        let mut v = CVec::zeros(n);
        v[index] = C64::new(1.0, 0.0);
        Self::new(v, layout)
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn to_density(&self) -> DensityOp {
        DensityOp::from_pure(self)
    }

    pub fn tensor(&self, other: &PureStateVec) -> Result<PureStateVec> {
        Ok(PureStateVec {
            amplitudes: tensor_vec(&self.amplitudes, &other.amplitudes),
            layout: self.layout.tensor(&other.layout)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eye, max_abs, trace_norm};
    use crate::random::{ginibre, SeededRng};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_density(n: usize, rng: &mut SeededRng) -> CMat {
        let g = ginibre(n, n, rng);
        let m = &g * g.adjoint();
        let t = trace(&m);
        m.unscale(t.re)
    }

    #[test]
    fn kron_examples() {
        assert_eq!(tensor_product(&eye(2), &eye(2)), eye(4));
        let zero = CVec::from_vec(vec![c(1.0), c(0.0)]);
        let one = CVec::from_vec(vec![c(0.0), c(1.0)]);
        let e1 = tensor_vec(&zero, &one);
        assert_eq!(e1, CVec::from_vec(vec![c(0.0), c(1.0), c(0.0), c(0.0)]));
        let x = CMat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let out = tensor_product(&x, &eye(2)) * tensor_vec(&zero, &zero);
        assert_eq!(out, tensor_vec(&one, &zero));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bell = CVec::from_vec(vec![c(s), c(0.0), c(0.0), c(s)]);
        let layout = SubsystemLayout::unlabeled(&[2, 2]).unwrap();
        let rho = DensityOp::from_pure(&PureStateVec::new(bell, layout).unwrap());
        let a = rho.partial_trace(&[0]).unwrap();
        assert!(max_abs(&(a.matrix() - eye(2).scale(0.5))) < 1e-15);
        assert_eq!(rho.partial_trace(&[0, 1]).unwrap().matrix(), rho.matrix());
    }

    #[test]
    fn product_state_marginals() {
        let mut rng = SeededRng::new(1, 1);
        let (ra, rb, rc) = (random_density(2, &mut rng), random_density(3, &mut rng), random_density(2, &mut rng));
        let m = tensor_product(&tensor_product(&ra, &rb), &rc);
        let dims = [2, 3, 2];
        assert!(max_abs(&(partial_trace_raw(&m, &dims, &[0]).unwrap() - &ra)) < 1e-14);
        assert!(max_abs(&(partial_trace_raw(&m, &dims, &[1]).unwrap() - &rb)) < 1e-14);
        assert!(max_abs(&(partial_trace_raw(&m, &dims, &[2, 0]).unwrap() - tensor_product(&ra, &rc))) < 1e-14);
        let full = partial_trace_raw(&m, &dims, &[0, 1, 2]).unwrap();
        assert_eq!(full, m);
    }

    #[test]
    fn partial_trace_errors() {
        let m = eye(4);
        assert_eq!(
            partial_trace_raw(&m, &[2, 2], &[2]),
            Err(Error::IndexOutOfRange { index: 2, factors: 2 })
        );
        assert!(partial_trace_raw(&m, &[2, 2], &[]).is_err());
        assert!(partial_trace_raw(&m, &[2, 3], &[0]).is_err());
    }

    #[test]
    fn marginals_match_partial_trace() {
        let mut rng = SeededRng::new(4, 0);
        let v = crate::random::random_unit_vector(6, &mut rng);
        let (a, b) = bipartite_marginals(&v, 2, 3);
        let m = outer(&v);
        assert!(max_abs(&(partial_trace_raw(&m, &[2, 3], &[0]).unwrap() - a)) < 1e-14);
        assert!(max_abs(&(partial_trace_raw(&m, &[2, 3], &[1]).unwrap() - b)) < 1e-14);
    }

    #[test]
    fn density_validation() {
        let layout = SubsystemLayout::single(2);
        assert!(DensityOp::new(eye(2).scale(0.5), layout.clone()).is_ok());
        assert!(DensityOp::new(eye(2), layout.clone()).is_err());
        let neg = CMat::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(DensityOp::new(neg, layout.clone()).is_err());
        assert!(DensityOp::with_trace(eye(2).scale(0.4), layout, 0.8).is_ok());
    }

    #[test]
    fn layout_validation() {
        assert!(SubsystemLayout::labeled(&[(Role::I, 2), (Role::I, 3)]).is_err());
        assert!(SubsystemLayout::unlabeled(&[2, 0]).is_err());
        let l = SubsystemLayout::labeled(&[(Role::I, 2), (Role::E, 3)]).unwrap();
        assert_eq!(l.total_dim(), 6);
        assert_eq!(l.dim_of(Role::E), Some(3));
        assert_eq!(l.restrict(&[1]).unwrap().dims(), &[3]);
    }

    #[test]
    fn trace_norm_is_multiplicative() {
        let mut rng = SeededRng::new(8, 8);
        for (n, m) in [(2, 2), (2, 3), (3, 3)] {
            for _ in 0..20 {
                let a = crate::spectral::hermitian_part(&ginibre(n, n, &mut rng));
                let b = crate::spectral::hermitian_part(&ginibre(m, m, &mut rng));
                let lhs = trace_norm(&tensor_product(&a, &b)).unwrap();
                let rhs = trace_norm(&a).unwrap() * trace_norm(&b).unwrap();
                assert!((lhs - rhs).abs() <= 1e-10);
            }
        }
    }
}
