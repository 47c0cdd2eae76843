use statrs::distribution::{ContinuousCDF, Normal};
use libm::{erf, erfc};

/// Standard deviation of the Gaussian whose density is e^{−π x²}.
pub fn gauss_sd() -> f64 {
    (2.0 * std::f64::consts::PI).sqrt().recip()
}

/// Φ(x) = P(Z ≤ x) for standard normal Z.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x.is_infinite() {
        return if x > 0.0 { 1.0 } else { 0.0 };
    }
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail 1 − Φ(x), accurate for large x.
pub fn std_normal_sf(x: f64) -> f64 {
    std_normal_cdf(-x)
}

/// Φ⁻¹(p) for p ∈ (0,1); ±∞ at the endpoints.
pub fn std_normal_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(p)
}

/// P(a ≤ G ≤ b) for G ∼ N(0, sd²). Either endpoint may be infinite.
pub fn gaussian_interval_mass(a: f64, b: f64, sd: f64) -> f64 {
    assert!(sd > 0.0, "sd must be positive");
    if !(a < b) {
        return 0.0;
    }
    let za = a / sd;
    let zb = b / sd;
    let m = if za >= 0.0 {
        std_normal_sf(za) - std_normal_sf(zb)
    } else if zb <= 0.0 {
        std_normal_cdf(zb) - std_normal_cdf(za)
    } else {
        // straddles zero: use erf on each half
        let h = |z: f64| if z.is_infinite() { 0.5 } else { 0.5 * erf(z.abs() / std::f64::consts::SQRT_2) };
        h(za) + h(zb)
    };
    m.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::quad::adaptive_quadrature;

    fn density(x: f64, sd: f64) -> f64 {
        (-(x * x) / (2.0 * sd * sd)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
    }

    #[test]
    fn examples() {
        assert_eq!(std_normal_cdf(0.0), 0.5);
        assert!((gaussian_interval_mass(f64::NEG_INFINITY, f64::INFINITY, 0.3) - 1.0).abs() < 1e-15);
        let sd = gauss_sd();
        let q = adaptive_quadrature(|x| (-std::f64::consts::PI * x * x).exp(), -0.5, 0.5, 1e-14).unwrap();
        assert!((gaussian_interval_mass(-0.5, 0.5, sd) - q.value).abs() < 1e-12);
        assert!((q.value - erf(std::f64::consts::PI.sqrt() / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn matches_quadrature_on_grid() {
        for &sd in &[0.2, gauss_sd(), 1.0, 3.0] {
            for i in -12..12 {
                let a = i as f64 * 0.37 * sd;
                let b = a + 0.9 * sd;
                let q = adaptive_quadrature(|x| density(x, sd), a, b, 1e-14).unwrap();
                assert!((gaussian_interval_mass(a, b, sd) - q.value).abs() < 1e-12, "{a} {b} {sd}");
            }
        }
    }

    #[test]
    fn quantile_roundtrip() {
        for &p in &[1e-9, 0.01, 0.3, 0.5, 0.9, 0.999999] {
            assert!((std_normal_cdf(std_normal_quantile(p)) - p).abs() < 1e-12 * p.max(1e-3));
        }
    }
}
