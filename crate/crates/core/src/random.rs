//! Seeded, counter-based random streams and the Haar samplers built on them.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{CMat, CVec, PureStateVec, SubsystemLayout, C64};

/// Serializable provenance of a random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub seed: u64,
    pub stream_id: u64,
}

/// A random stream identified by `(seed, stream_id)`.
///
/// Two values built from the same pair produce the same draws no matter
/// which thread consumes them, so parallel campaigns hand each task its own
/// stream instead of sharing a generator.
#[derive(Clone, Debug)]
pub struct SeededRng {
    id: StreamId,
    inner: ChaCha8Rng,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SeededRng {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        Self { id: StreamId { seed, stream_id }, inner }
    }

    pub fn seed(&self) -> u64 {
        self.id.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.id.stream_id
    }

    pub fn descriptor(&self) -> StreamId {
        self.id
    }

    /// Independent child stream, a pure function of `(seed, stream_id, tag)`.
    /// Does not consume draws from `self`.
    pub fn fork(&self, tag: u64) -> SeededRng {
        let child_seed = splitmix64(self.id.seed ^ splitmix64(self.id.stream_id));
        SeededRng::new(child_seed, tag)
    }

    pub fn normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Standard complex Gaussian `(x + iy)/√2`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(self.normal() * s, self.normal() * s)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// Ginibre matrix with i.i.d. standard complex Gaussian entries.
pub fn ginibre(rows: usize, cols: usize, rng: &mut SeededRng) -> CMat {
    // column-major fill so the draw order matches the storage order
    let data: Vec<C64> = (0..rows * cols).map(|_| rng.complex_normal()).collect();
    CMat::from_vec(rows, cols, data)
}

/// Haar-distributed unitary: QR of a Ginibre draw with the phases of
/// `diag(R)` moved into `Q`.
pub fn haar_unitary(dim: usize, rng: &mut SeededRng) -> CMat {
    assert!(dim >= 1, "unitary dimension must be positive");
    let z = ginibre(dim, dim, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    q
}

/// Uniformly random unit vector in `C^dim`.
pub fn random_unit_vector(dim: usize, rng: &mut SeededRng) -> CVec {
    assert!(dim >= 1, "vector dimension must be positive");
    loop {
        let v = CVec::from_fn(dim, |_, _| rng.complex_normal());
        let n = v.norm();
        if n > 1e-300 {
            return v.unscale(n);
        }
    }
}

/// Haar-random pure state on a single factor of dimension `dim`.
pub fn random_pure_state(dim: usize, rng: &mut SeededRng) -> PureStateVec {
    let layout = SubsystemLayout::single(dim);
    PureStateVec::new(random_unit_vector(dim, rng), layout)
        .expect("normalized draw always forms a valid state")
}
