//! Finite-dimensional models of a system falling through a horizon, with
//! certified numerics for the relation between interior smoothness and
//! exterior distinguishability.
//!
//! A [`HorizonModel`] fixes a global unitary on `F ⊗ BH`, an initial
//! black-hole state and a split of the output space into interior `I` and
//! exterior `E`. It induces the interior channel `N_I` and its
//! complementary exterior channel `N_E`. The [`tradeoff`] module measures
//! the smoothness parameter `ε = ½‖N_I − Ad_V‖◇`, the maximal exterior
//! distinguishability `D_max`, and checks `D_max ≤ 2√(2ε)`.

pub mod channel;
pub mod entangled;
mod error;
pub mod exec;
pub mod metrics;
pub mod random;
pub mod spectral;
pub mod tensor;
pub mod tradeoff;

pub use channel::{Channel, ChannelFamily, ChannelFamilySpec, HorizonModel, IsometricEmbedding};
pub use error::{Error, Result};
pub use metrics::{diamond_distance, DiamondOptions, DiamondResult};
pub use random::SeededRng;
pub use tensor::{DensityOp, PureStateVec, Role, SubsystemLayout};

/// Dense complex matrix used throughout the crate.
pub type CMat = nalgebra::DMatrix<num_complex::Complex64>;
/// Dense complex column vector.
pub type CVec = nalgebra::DVector<num_complex::Complex64>;
pub use num_complex::Complex64 as C64;
