//! Special functions, quadrature and reproducible random streams.

pub mod bessel;
pub mod chi2;
pub mod quad;
pub mod radial;
pub mod rng;

pub use bessel::{bessel_i, bessel_i_scaled, bessel_k, bessel_k_scaled};
pub use chi2::{chi2_cdf, chi2_quantile, chi2_sf, noncentral_chi2_cdf};
pub use quad::{integrate, Integral, QuadratureSpec};
pub use radial::{a_kernel, radial_mass, radial_upper_limit, sphere_area, z_kernel, RadialKernelArgs};
pub use rng::RngStream;
