//! Gamma-function family and the sphere areas built from it.

use std::f64::consts::PI;

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

pub fn digamma(x: f64) -> f64 {
    statrs::function::gamma::digamma(x)
}

/// Surface area of the unit sphere `S^k` in `R^{k+1}`, `2 pi^{(k+1)/2} / Gamma((k+1)/2)`.
///
/// `sphere_area(0) == 2` counts the two points of `S^0`.
pub fn sphere_area(k: usize) -> f64 {
    let h = (k as f64 + 1.0) / 2.0;
    2.0 * PI.powf(h) / gamma(h)
}

/// True when `x` is a pole of the gamma function (0, -1, -2, ...).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && (x - x.round()).abs() < 1e-12
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sphere_areas() {
        assert_relative_eq!(sphere_area(0), 2.0, epsilon = 1e-14);
        assert_relative_eq!(sphere_area(1), 2.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(sphere_area(2), 4.0 * PI, epsilon = 1e-13);
        assert_relative_eq!(sphere_area(3), 2.0 * PI * PI, epsilon = 1e-12);
    }

    #[test]
    fn gamma_values() {
        assert_relative_eq!(gamma(0.5), PI.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(gamma(1.5), PI.sqrt() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(digamma(1.0), -0.577_215_664_901_532_9, epsilon = 1e-12);
        // psi(1) - psi(1/2) = 2 log 2
        assert_relative_eq!(digamma(1.0) - digamma(0.5), 2.0 * 2f64.ln(), epsilon = 1e-12);
        assert!(is_gamma_pole(0.0) && is_gamma_pole(-2.0) && !is_gamma_pole(0.5));
    }
}
