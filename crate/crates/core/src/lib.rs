//! Exact and numerical real eigenstructure of regular simplex tensors
//! `T = Σ_k v_k^{⊗d}`, where `v_1, …, v_{n+1}` are the equiangular unit
//! vectors of the regular simplex in `ℝⁿ`.
//!
//! The crate is organised bottom-up:
//!
//! * [`frames`] builds the simplex frame and its Gramian.
//! * [`tensor_ops`] contracts the tensor in rank-one-sum form.
//! * [`eigenstructure`] enumerates every normalized eigenpair through the
//!   barycentric reduction.
//! * [`dynamics`] runs tensor power iteration and classifies each eigenvector
//!   by the spectral radius of the power map's Jacobian.
//! * [`oracle`] is an independent brute-force solver for the barycentric
//!   system, used to cross-check the enumeration.
//! * [`basins`] rasterizes domains of attraction on the circle and sphere.
//! * [`verify`] bundles all checks into one deterministic report.

pub mod basins;
pub mod dynamics;
pub mod eigenstructure;
mod error;
pub mod frames;
pub mod linalg;
pub mod oracle;
pub mod output;
pub mod tensor_ops;
pub mod verify;

pub use error::{Error, Result};
pub use frames::SimplexFrame;
pub use tensor_ops::SimplexTensor;
