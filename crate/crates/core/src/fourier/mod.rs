//! Characteristic functions, level sets and Gaussian-space geometry.

pub mod boxes;
pub mod charfn;
pub mod esseen;
pub mod geometry;

pub use boxes::{AxisBox, BoxUnion, Cylinder};
pub use charfn::{char_fn_eval, verify_cos_phi_bounds, verify_fourier_comparison, CharFnSpec};
pub use esseen::{verify_esseen, verify_fourier_inversion, verify_reverse_esseen};
pub use geometry::{
    gaussian_measure_mc, verify_borell_1d, verify_close_points, verify_gauss_bm, verify_gauss_tail, verify_level_triangle,
    verify_slice_bound, LevelSetSpec,
};
