//! Equivariant Toeplitz spectral projectors on model Kähler manifolds.
//!
//! The crate builds the level-`k` Hardy spaces of the projective line, the
//! Toeplitz matrices of real symbols on them, and the kernels of their
//! spectral projectors, together with the experiments that compare those
//! kernels with their large-`k` asymptotics.

pub mod chi;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod kernels;
pub mod normalization;
pub mod quadrature;
pub mod sections;
pub mod toeplitz;

pub use chi::{ChiHat, ConstantChiHat, TestFunctionChi};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use experiment::{ExperimentConfig, ExperimentReport};
pub use geometry::{
    circle_act, psi2, rescaled_point, ChartPoint, CirclePoint, ModelId, ModelKahlerSurface, TangentVector,
};
pub use kernels::{
    band_kernel, gamma_k, gk_identity_check, smoothed_kernel, spectral_function, BQuadrature, BandKind, BandSpec,
    GkIdentity, PairWeights,
};
pub use quadrature::QuadratureGrid;
pub use sections::{KernelMethod, KernelValue, SectionBasis};
pub use toeplitz::{build_toeplitz, eigendecompose, lift_first_order, Order, SymbolFunction, ToeplitzSpectrum};
