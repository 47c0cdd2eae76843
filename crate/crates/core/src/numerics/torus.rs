/// Distance from `x` to the nearest integer.
#[inline]
pub fn dist_to_int(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Euclidean distance from `x` to the integer lattice, ‖x‖_T.
pub fn torus_norm(x: &[f64]) -> f64 {
    x.iter().map(|&v| dist_to_int(v).powi(2)).sum::<f64>().sqrt()
}

/// ‖λx‖_T without allocating the dilate.
pub fn torus_norm_scaled(x: &[f64], lambda: f64) -> f64 {
    x.iter().map(|&v| dist_to_int(lambda * v).powi(2)).sum::<f64>().sqrt()
}
