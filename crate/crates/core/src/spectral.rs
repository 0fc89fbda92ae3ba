//! Hermitian spectral decompositions and the norms built on them.

use nalgebra::SymmetricEigen;

use crate::{CMat, CVec, Error, Result, C64};

/// Asymmetry above which a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermEig {
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMat,
}

impl HermEig {
    pub fn new(m: &CMat) -> Self {
        assert!(m.is_square(), "eigendecomposition of a non-square matrix");
        let n = m.nrows();
        if n == 0 {
            return Self { values: vec![], vectors: CMat::zeros(0, 0) };
        }
        let eig = SymmetricEigen::new(m.clone());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> CVec {
        self.vectors.column(k).into_owned()
    }

    /// `Q f(Λ) Q†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMat {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let s = f(v);
            for r in 0..n {
                scaled[(r, c)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entry of `|M − M†|`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if !m.is_square() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `(M + M†)/2` without checks.
pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Symmetrizes `m` when its asymmetry is within [`HERMITIAN_TOL`] and
/// rejects it otherwise.
pub fn hermitize(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_TOL {
        return Err(Error::InvalidState(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    Ok(hermitian_part(m))
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> Result<f64> {
    if !m.is_square() {
        return Err(Error::NonSquare { rows: m.nrows(), cols: m.ncols() });
    }
    if m.nrows() == 0 {
        return Ok(0.0);
    }
    if hermitian_defect(m) <= HERMITIAN_TOL {
        return Ok(hermitian_trace_norm(m));
    }
    let sv = m.clone().singular_values();
    Ok(sv.iter().sum())
}

/// Sum of absolute eigenvalues of the Hermitian part of `m`.
pub fn hermitian_trace_norm(m: &CMat) -> f64 {
    HermEig::new(&hermitian_part(m)).values.iter().map(|v| v.abs()).sum()
}

/// Sign of a Hermitian matrix: `P₊ − P₋`, with eigenvalues of magnitude
/// below `zero_tol` mapped to zero. Returns the trace norm alongside.
pub fn hermitian_sign(m: &CMat, zero_tol: f64) -> (CMat, f64) {
    let eig = HermEig::new(&hermitian_part(m));
    let norm = eig.values.iter().map(|v| v.abs()).sum();
    let sign = eig.reconstruct_with(|v| {
        if v > zero_tol {
            1.0
        } else if v < -zero_tol {
            -1.0
        } else {
            0.0
        }
    });
    (sign, norm)
}

/// Nearest positive semidefinite matrix in Frobenius norm.
pub fn project_psd(m: &CMat) -> CMat {
    HermEig::new(&hermitian_part(m)).reconstruct_with(|v| v.max(0.0))
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - 1.0) / (k as f64 + 1.0);
        if v - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Nearest density matrix (unit trace, PSD) in Frobenius norm.
pub fn project_density(m: &CMat) -> CMat {
    let eig = HermEig::new(&hermitian_part(m));
    let p = project_simplex(&eig.values);
    let diag = HermEig { values: p, vectors: eig.vectors };
    diag.reconstruct_with(|v| v)
}

/// Proximal map of `tau · λ_max` on Hermitian matrices.
pub fn prox_max_eigenvalue(m: &CMat, tau: f64) -> CMat {
    let eig = HermEig::new(&hermitian_part(m));
    let scaled: Vec<f64> = eig.values.iter().map(|v| v / tau).collect();
    let p = project_simplex(&scaled);
    let values = eig.values.iter().zip(&p).map(|(v, q)| v - tau * q).collect();
    HermEig { values, vectors: eig.vectors }.reconstruct_with(|v| v)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Identity matrix of dimension `n`.
pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// `|v⟩⟨v|`.
pub fn outer(v: &CVec) -> CMat {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, SeededRng};

    fn random_hermitian(n: usize, rng: &mut SeededRng) -> CMat {
        let g = crate::random::ginibre(n, n, rng);
        hermitian_part(&g)
    }

    #[test]
    fn eigen_reconstructs_up_to_dim_64() {
        let mut rng = SeededRng::new(3, 0);
        for n in [1, 2, 3, 7, 16, 33, 64] {
            let m = random_hermitian(n, &mut rng);
            let eig = HermEig::new(&m);
            let back = eig.reconstruct_with(|v| v);
            assert!(max_abs(&(back - &m)) <= 1e-10, "n = {n}");
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&CMat::zeros(3, 3)).unwrap(), 0.0);
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(0.5, 0.0), C64::new(-0.5, 0.0)]));
        assert!((trace_norm(&d).unwrap() - 1.0).abs() < 1e-15);
        let mut rng = SeededRng::new(5, 1);
        for dim in [1, 2, 5, 9] {
            let u = haar_unitary(dim, &mut rng);
            assert!((trace_norm(&u).unwrap() - dim as f64).abs() < 1e-10);
        }
    }

    #[test]
    fn trace_norm_rejects_non_square() {
        let m = CMat::zeros(2, 3);
        assert_eq!(trace_norm(&m), Err(Error::NonSquare { rows: 2, cols: 3 }));
    }

    #[test]
    fn hermitize_guard() {
        let mut m = eye(2);
        m[(0, 1)] = C64::new(1e-13, 0.0);
        let h = hermitize(&m).unwrap();
        assert_eq!(h[(0, 1)], h[(1, 0)].conj());
        m[(0, 1)] = C64::new(1e-6, 0.0);
        assert!(hermitize(&m).is_err());
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_simplex(&[3.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_simplex(&[0.5, 0.5, 0.5, 0.5]);
        assert!(p.iter().all(|v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn prox_of_max_eigenvalue_lowers_the_top() {
        let d = CMat::from_diagonal(&CVec::from_vec(vec![C64::new(3.0, 0.0), C64::new(1.0, 0.0)]));
        let p = prox_max_eigenvalue(&d, 1.0);
        assert!((p[(0, 0)].re - 2.0).abs() < 1e-12);
        assert!((p[(1, 1)].re - 1.0).abs() < 1e-12);
    }
}
