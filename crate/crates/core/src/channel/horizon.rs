use std::collections::BTreeMap;

use super::{make_family, Channel, ChannelFamilySpec, CPTP_TOL};
use crate::random::{haar_unitary, SeededRng};
use crate::spectral::{eye, max_abs};
use crate::tensor::{bipartite_marginals, tensor_product, PureStateVec, Role, SubsystemLayout};
use crate::{CMat, CVec, Error, Result, C64};

const UNITARY_TOL: f64 = 1e-12;

/// Isometry `V: H_F → H_I` describing ideal infall.
#[derive(Clone, Debug, PartialEq)]
pub struct IsometricEmbedding {
    matrix: CMat,
}

impl IsometricEmbedding {
    pub fn new(matrix: CMat) -> Result<Self> {
        let n = matrix.ncols();
        if matrix.nrows() < n || n == 0 {
            return Err(Error::DimensionMismatch(format!(
                "an isometry needs rows ≥ cols ≥ 1, got {:?}",
                matrix.shape()
            )));
        }
        let defect = max_abs(&(matrix.adjoint() * &matrix - eye(n)));
        if defect > CPTP_TOL {
            return Err(Error::InvalidParameter(format!("V†V deviates from the identity by {defect:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self { matrix: eye(dim) }
    }

    /// `|i⟩ ↦ |i⟩`, padding `C^dim_f` into `C^dim_i`.
    pub fn padded(dim_f: usize, dim_i: usize) -> Result<Self> {
        Self::new(CMat::from_fn(dim_i, dim_f, |r, c| if r == c { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }))
    }

    /// Haar-random isometry (first columns of a Haar unitary).
    pub fn random(dim_f: usize, dim_i: usize, rng: &mut SeededRng) -> Result<Self> {
        if dim_i < dim_f {
            return Err(Error::DimensionMismatch(format!("cannot embed dim {dim_f} into dim {dim_i}")));
        }
        let u = haar_unitary(dim_i, rng);
        Self::new(u.columns(0, dim_f).into_owned())
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn dim_f(&self) -> usize {
        self.matrix.ncols()
    }

    pub fn dim_i(&self) -> usize {
        self.matrix.nrows()
    }

    /// `Ad_V` dilated as `|ψ⟩ ↦ V|ψ⟩ ⊗ |0⟩_E` with `dim_env` environment levels.
    pub fn ideal_channel(&self, dim_env: usize) -> Channel {
        ideal_infall(self, dim_env)
    }
}

/// The ideal infall channel `ρ ↦ VρV†` with environment vector `|0⟩`.
pub fn ideal_infall(v: &IsometricEmbedding, dim_env: usize) -> Channel {
    let env = dim_env.max(1);
    let w = CMat::from_fn(v.dim_i() * env, v.dim_f(), |row, i| {
        if row % env == 0 {
            v.matrix[(row / env, i)]
        } else {
            C64::new(0.0, 0.0)
        }
    });
    Channel::from_stinespring(w, v.dim_i(), env).expect("V ⊗ |0⟩ is an isometry")
}

/// Extends the columns of `w` (an isometry into `C^n`) to an `n × n`
/// unitary whose column `positions[k]` is `w[:, k]`. The remaining columns
/// come from Gram–Schmidt over the standard basis, so the completion is
/// deterministic.
pub fn complete_to_unitary(w: &CMat, positions: &[usize]) -> Result<CMat> {
    let n = w.nrows();
    if positions.len() != w.ncols() || positions.iter().any(|&p| p >= n) {
        return Err(Error::DimensionMismatch("completion positions do not match the isometry".into()));
    }
    let mut basis: Vec<CVec> = (0..w.ncols()).map(|k| w.column(k).into_owned()).collect();
    for e in 0..n {
        if basis.len() == n {
            break;
        }
        let mut v = CVec::zeros(n);
        v[e] = C64::new(1.0, 0.0);
        for _ in 0..2 {
            for b in &basis {
                let overlap = b.dotc(&v);
                v -= b * overlap;
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            basis.push(v.unscale(norm));
        }
    }
    let mut u = CMat::zeros(n, n);
    let mut fill = basis.iter().skip(w.ncols());
    let mut used = vec![false; n];
    for (k, &p) in positions.iter().enumerate() {
        if used[p] {
            return Err(Error::InvalidParameter(format!("completion position {p} used twice")));
        }
        used[p] = true;
        u.set_column(p, &basis[k]);
    }
    for (col, taken) in used.iter().enumerate() {
        if !taken {
            u.set_column(col, fill.next().expect("Gram–Schmidt spans the full space"));
        }
    }
    Ok(u)
}

/// Finite-dimensional horizon crossing: a global unitary `U` on `F ⊗ BH`,
/// an initial black-hole state `Φ0`, the interior/exterior split of the
/// output, the declared ideal embedding `V` and a charge label per infaller
/// basis state.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizonModel {
    unitary: CMat,
    phi0: PureStateVec,
    input: SubsystemLayout,
    output: SubsystemLayout,
    embedding: IsometricEmbedding,
    charges: Vec<i64>,
}

impl HorizonModel {
    pub fn new(
        unitary: CMat,
        phi0: PureStateVec,
        dims: ModelDims,
        embedding: IsometricEmbedding,
        charges: Vec<i64>,
    ) -> Result<Self> {
        let ModelDims { f, bh, i, e } = dims;
        let n = f * bh;
        if n != i * e {
            return Err(Error::DimensionMismatch(format!("dim F·BH = {n} but dim I·E = {}", i * e)));
        }
        if unitary.shape() != (n, n) {
            return Err(Error::DimensionMismatch(format!("U is {:?}, expected {n}x{n}", unitary.shape())));
        }
        let defect = max_abs(&(unitary.adjoint() * &unitary - eye(n)));
        if defect > UNITARY_TOL {
            return Err(Error::InvalidParameter(format!("U†U deviates from the identity by {defect:.3e}")));
        }
        if phi0.dim() != bh {
            return Err(Error::DimensionMismatch(format!("Φ0 has dimension {}, BH has {bh}", phi0.dim())));
        }
        if embedding.dim_f() != f || embedding.dim_i() != i {
            return Err(Error::DimensionMismatch(format!(
                "V maps {} → {}, model needs {f} → {i}",
                embedding.dim_f(),
                embedding.dim_i()
            )));
        }
        if charges.len() != f {
            return Err(Error::InvalidParameter(format!("{} charge labels for {f} basis states", charges.len())));
        }
        Ok(Self {
            unitary,
            phi0,
            input: SubsystemLayout::labeled(&[(Role::F, f), (Role::BH, bh)])?,
            output: SubsystemLayout::labeled(&[(Role::I, i), (Role::E, e)])?,
            embedding,
            charges,
        })
    }

    /// Haar-random `U`, `Φ0 = |0⟩`, `I = F`, `E = BH`, `V = 1`, one sector.
    pub fn random(dim_f: usize, dim_bh: usize, rng: &mut SeededRng) -> Result<Self> {
        let u = haar_unitary(dim_f * dim_bh, rng);
        Self::new(
            u,
            PureStateVec::basis(0, SubsystemLayout::single(dim_bh))?,
            ModelDims::square(dim_f, dim_bh),
            IsometricEmbedding::identity(dim_f),
            vec![0; dim_f],
        )
    }

    /// `U = V ⊗ H` with Haar-random `V` on `F` and `H` on `BH`, so the
    /// interior channel is exactly `Ad_V` and the exterior holds `H|Φ0⟩`.
    pub fn ideal(dim_f: usize, dim_bh: usize, rng: &mut SeededRng) -> Result<Self> {
        let v = haar_unitary(dim_f, rng);
        let h = haar_unitary(dim_bh, rng);
        Self::new(
            tensor_product(&v, &h),
            PureStateVec::basis(0, SubsystemLayout::single(dim_bh))?,
            ModelDims::square(dim_f, dim_bh),
            IsometricEmbedding::new(v)?,
            vec![0; dim_f],
        )
    }

    /// `U = 1`, `V = 1`: ideal model with exactly representable entries.
    pub fn canonical_ideal(dim_f: usize, dim_bh: usize) -> Result<Self> {
        Self::new(
            eye(dim_f * dim_bh),
            PureStateVec::basis(0, SubsystemLayout::single(dim_bh))?,
            ModelDims::square(dim_f, dim_bh),
            IsometricEmbedding::identity(dim_f),
            vec![0; dim_f],
        )
    }

    /// Qubit swap of `F` into the exterior: the interior always receives
    /// `|0⟩` and the exterior receives the infaller.
    pub fn swap() -> Result<Self> {
        let one = C64::new(1.0, 0.0);
        let mut u = CMat::zeros(4, 4);
        for a in 0..2 {
            for b in 0..2 {
                u[(b * 2 + a, a * 2 + b)] = one;
            }
        }
        Self::new(
            u,
            PureStateVec::basis(0, SubsystemLayout::single(2))?,
            ModelDims::square(2, 2),
            IsometricEmbedding::identity(2),
            vec![0; 2],
        )
    }

    /// Model whose Stinespring isometry `F → I ⊗ E` is `w`. The black hole
    /// gets dimension `dim_i·dim_e / dim_f`, starts in `|0⟩`, and `U` is the
    /// deterministic unitary completion with `U(|i⟩⊗|0⟩) = w|i⟩`.
    pub fn from_stinespring(w: &CMat, dim_i: usize, dim_e: usize, embedding: IsometricEmbedding) -> Result<Self> {
        let f = w.ncols();
        let n = dim_i * dim_e;
        if w.nrows() != n || f == 0 || !n.is_multiple_of(f) {
            return Err(Error::DimensionMismatch(format!(
                "isometry {:?} cannot be completed on F ⊗ BH with dim I·E = {n}",
                w.shape()
            )));
        }
        let bh = n / f;
        let positions: Vec<usize> = (0..f).map(|i| i * bh).collect();
        let u = complete_to_unitary(w, &positions)?;
        Self::new(
            u,
            PureStateVec::basis(0, SubsystemLayout::single(bh))?,
            ModelDims { f, bh, i: dim_i, e: dim_e },
            embedding,
            vec![0; f],
        )
    }

    pub fn with_embedding(&self, embedding: IsometricEmbedding) -> Result<Self> {
        Self::new(self.unitary.clone(), self.phi0.clone(), self.dims(), embedding, self.charges.clone())
    }

    pub fn with_charges(&self, charges: Vec<i64>) -> Result<Self> {
        Self::new(self.unitary.clone(), self.phi0.clone(), self.dims(), self.embedding.clone(), charges)
    }

    pub fn dims(&self) -> ModelDims {
        ModelDims {
            f: self.input.dims()[0],
            bh: self.input.dims()[1],
            i: self.output.dims()[0],
            e: self.output.dims()[1],
        }
    }

    pub fn dim_f(&self) -> usize {
        self.input.dims()[0]
    }

    pub fn dim_bh(&self) -> usize {
        self.input.dims()[1]
    }

    pub fn dim_i(&self) -> usize {
        self.output.dims()[0]
    }

    pub fn dim_e(&self) -> usize {
        self.output.dims()[1]
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn phi0(&self) -> &PureStateVec {
        &self.phi0
    }

    pub fn embedding(&self) -> &IsometricEmbedding {
        &self.embedding
    }

    pub fn charges(&self) -> &[i64] {
        &self.charges
    }

    pub fn input_layout(&self) -> &SubsystemLayout {
        &self.input
    }

    pub fn output_layout(&self) -> &SubsystemLayout {
        &self.output
    }

    /// Basis indices of `F` grouped by charge, in ascending charge order.
    pub fn sectors(&self) -> Vec<Vec<usize>> {
        let mut map: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for (k, &q) in self.charges.iter().enumerate() {
            map.entry(q).or_default().push(k);
        }
        map.into_values().collect()
    }

    /// `W_N|ψ⟩ = U(|ψ⟩ ⊗ |Φ0⟩)`, a `(dim_i·dim_e) × dim_f` isometry.
    pub fn stinespring(&self) -> CMat {
        let (f, bh) = (self.dim_f(), self.dim_bh());
        let phi = self.phi0.amplitudes();
        let mut w = CMat::zeros(self.unitary.nrows(), f);
        for i in 0..f {
            for b in 0..bh {
                if phi[b] != C64::new(0.0, 0.0) {
                    w.column_mut(i).axpy(phi[b], &self.unitary.column(i * bh + b), C64::new(1.0, 0.0));
                }
            }
        }
        w
    }

    /// `N_I(ρ) = Tr_E[U(ρ ⊗ |Φ0⟩⟨Φ0|)U†]`.
    pub fn interior_channel(&self) -> Channel {
        Channel::from_stinespring(self.stinespring(), self.dim_i(), self.dim_e())
            .expect("U(· ⊗ Φ0) is an isometry for unitary U")
    }

    /// `N_E`, the complementary channel of `N_I`.
    pub fn exterior_channel(&self) -> Channel {
        self.interior_channel().complementary()
    }

    /// `Ad_V` dilated into the same exterior with environment vector `|0⟩`.
    pub fn ideal_channel(&self) -> Channel {
        ideal_infall(&self.embedding, self.dim_e())
    }

    /// `Ψ(ψ) = U(ψ ⊗ Φ0)` on `I ⊗ E`.
    pub fn global_state(&self, psi: &CVec) -> Result<CVec> {
        self.check_input(psi)?;
        Ok(self.stinespring() * psi)
    }

    /// `(ρ_I(ψ), ρ_E(ψ))`.
    pub fn reduced_states(&self, psi: &CVec) -> Result<(CMat, CMat)> {
        let global = self.global_state(psi)?;
        Ok(bipartite_marginals(&global, self.dim_i(), self.dim_e()))
    }

    pub fn rho_i(&self, psi: &CVec) -> Result<CMat> {
        Ok(self.reduced_states(psi)?.0)
    }

    pub fn rho_e(&self, psi: &CVec) -> Result<CMat> {
        Ok(self.reduced_states(psi)?.1)
    }

    fn check_input(&self, psi: &CVec) -> Result<()> {
        if psi.len() != self.dim_f() {
            return Err(Error::DimensionMismatch(format!(
                "infaller state has dimension {}, F has {}",
                psi.len(),
                self.dim_f()
            )));
        }
        Ok(())
    }
}

/// Factor dimensions of a [`HorizonModel`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelDims {
    pub f: usize,
    pub bh: usize,
    pub i: usize,
    pub e: usize,
}

impl ModelDims {
    /// `I = F`, `E = BH`.
    pub fn square(f: usize, bh: usize) -> Self {
        Self { f, bh, i: f, e: bh }
    }
}

/// Lifts a family channel to a model whose interior channel equals it and
/// whose ideal embedding is the identity.
pub fn embed_family_as_horizon(spec: &ChannelFamilySpec) -> Result<HorizonModel> {
    let channel = make_family(spec)?;
    let (w, env) = channel.stinespring();
    HorizonModel::from_stinespring(&w, spec.dim, env, IsometricEmbedding::identity(spec.dim))
}
