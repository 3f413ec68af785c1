//! Point-interaction Hamiltonians for a quantum particle coupled to `N`
//! localized spins 1/2 in one or three dimensions.
//!
//! The library is generic over the real scalar ([`scalar::Real`], `f32` or
//! `f64`); the aliases below fix it to `f64`.

pub mod boundary;
pub mod cli;
pub mod complexmath;
pub mod dynamics;
pub mod error;
pub mod krein;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod space;
pub mod spectral;
pub mod spinspace;
pub mod state;

pub use error::{Error, Result};
pub use scalar::{Cx, Real};
pub use space::Dimension;

pub type C64 = Cx<f64>;
pub type Point = space::Point<f64>;
pub type ModelSpec = spinspace::ModelSpec<f64>;
pub type BoundaryPair = boundary::BoundaryPair<f64>;
pub type GammaMatrix = krein::GammaMatrix<f64>;
pub type ResolventKernel = krein::ResolventKernel<f64>;
pub type BoundStateResult = spectral::BoundStateResult<f64>;
pub type GaussianTerm = state::GaussianTerm<f64>;
pub type GaussianPacket = state::GaussianPacket<f64>;
pub type SpinState = state::SpinState<f64>;
pub type SampledState = state::SampledState<f64>;
pub type Grid1 = state::Grid1<f64>;
pub type CMatrix = linalg::CMatrix<f64>;
