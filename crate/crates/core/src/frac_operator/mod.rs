//! The half Laplacian `(-Δ)^{1/2}`, by Fourier multiplier and by principal-value quadrature.

pub mod profile;
pub mod pv;
pub mod spectral;

pub use profile::{Constant, Gaussian, RadialProfile, WeightProfile};
pub use pv::{
    frac_laplacian_pv, frac_laplacian_pv_batch, frac_laplacian_pv_radial, normalization_constant,
    sphere_measure, PVQuadratureConfig,
};
pub use spectral::{cordoba_check, frac_laplacian_spectral, SpectralOperator};
