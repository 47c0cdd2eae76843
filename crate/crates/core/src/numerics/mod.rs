//! Numerical and exact-arithmetic kernels.

pub mod exact;
pub mod matrix;
pub mod quad;
pub mod special;
pub mod svd;
pub mod torus;

pub use exact::{exact_det, exact_kernel_vector, exact_rank, IntMatrix};
pub use matrix::{dot, norm2, norm_inf, RealMatrix, RealVec};
pub use quad::{adaptive_quadrature, integrate_to_infinity, QuadratureResult};
pub use special::{gauss_sd, gaussian_interval_mass, std_normal_cdf, std_normal_quantile};
pub use svd::{op_norm, svd, SvdResult};
pub use torus::torus_norm;
