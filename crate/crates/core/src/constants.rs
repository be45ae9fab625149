//! Normalizing constants of the transforms, potentials and inversion formulas.

use std::f64::consts::PI;

use crate::error::{HoroError, Result};
use crate::special::{digamma, gamma, sphere_area};

/// True when `x` lies in `{0, 2, 4, ...}`.
pub fn in_even_lattice(x: f64) -> bool {
    x > -1e-9 && (0.5 * x - (0.5 * x).round()).abs() < 1e-9
}

/// `2^{d/2-1} sigma_{d-1} Gamma(d/2)`, the constant of the zonal transform.
pub fn zonal_constant(d: usize) -> f64 {
    let h = 0.5 * d as f64;
    2f64.powf(h - 1.0) * sphere_area(d - 1) * gamma(h)
}

/// `zeta_{n,alpha} = Gamma((n-alpha)/2) / (2^{alpha/2+1} pi^{n/2} Gamma(alpha/2))`.
pub fn zeta(n: usize, alpha: f64) -> Result<f64> {
    let nf = n as f64;
    if !(alpha > 0.0) || in_even_lattice(alpha - nf) {
        return Err(HoroError::Parameter(format!("alpha = {alpha} is excluded for n = {n}")));
    }
    Ok(gamma((nf - alpha) / 2.0) / (2f64.powf(alpha / 2.0 + 1.0) * PI.powf(nf / 2.0) * gamma(alpha / 2.0)))
}

/// `zeta'_n = -2^{-1-n/2} / (pi^{n/2} Gamma(n/2))`, the constant of the logarithmic potential.
pub fn zeta_log(n: usize) -> f64 {
    let nf = n as f64;
    -(2f64.powf(-1.0 - nf / 2.0)) / (PI.powf(nf / 2.0) * gamma(nf / 2.0))
}

/// `c_alpha` of the weighted dual operator.
pub fn c_alpha(n: usize, d: usize, alpha: f64) -> Result<f64> {
    let (nf, df) = (n as f64, d as f64);
    if !(alpha > 0.0) || in_even_lattice(alpha + df - nf) {
        return Err(HoroError::Parameter(format!("alpha = {alpha} is excluded for n = {n}, d = {d}")));
    }
    Ok(gamma((nf - alpha - df) / 2.0)
        / (2f64.powf(alpha / 2.0 + df + 1.0) * PI.powf(df / 2.0) * gamma(alpha / 2.0) * gamma(nf / 2.0)))
}

/// `c_{n,d}` of the logarithmic dual operator at `alpha = n - d`.
pub fn c_log(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    -1.0 / (2f64.powf((nf + df) / 2.0 + 1.0) * PI.powf(df / 2.0) * gamma(nf / 2.0) * gamma((nf - df) / 2.0))
}

/// `c_1 = 2^{d/2} sigma_{d-1} Gamma(alpha/2) Gamma(d/2) / (sigma_{n-1} Gamma((alpha+d)/2))`.
pub fn c1_weighted(n: usize, d: usize, alpha: f64) -> f64 {
    let df = d as f64;
    2f64.powf(df / 2.0) * sphere_area(d - 1) * gamma(alpha / 2.0) * gamma(df / 2.0)
        / (sphere_area(n - 1) * gamma((alpha + df) / 2.0))
}

/// `c~_1 = 2^{d/2} pi^{(d-n)/2} Gamma((n-d)/2)`.
pub fn c1_tilde(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    2f64.powf(df / 2.0) * PI.powf((df - nf) / 2.0) * gamma((nf - df) / 2.0)
}

/// `gamma_{n,d} = (psi(n/2) - psi((n-d)/2)) / (2^{n/2+1} pi^{n/2} Gamma(n/2))`.
pub fn gamma_nd(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    (digamma(nf / 2.0) - digamma((nf - df) / 2.0)) / (2f64.powf(nf / 2.0 + 1.0) * PI.powf(nf / 2.0) * gamma(nf / 2.0))
}

/// `gamma~_{n,d} = gamma_{n,d} / c~_1`.
pub fn gamma_nd_tilde(n: usize, d: usize) -> f64 {
    gamma_nd(n, d) / c1_tilde(n, d)
}

/// `c = 2^d pi^{d/2} Gamma(n/2) / Gamma((n-d)/2)` relating the check operator and `Q^d`.
pub fn fuglede_constant(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    2f64.powf(df) * PI.powf(df / 2.0) * gamma(nf / 2.0) / gamma((nf - df) / 2.0)
}

/// `c = (-1)^{d/2} Gamma((n-d)/2) / (2^d pi^{d/2} Gamma(n/2))` of the even-`d` local inversion.
pub fn even_d_constant(n: usize, d: usize) -> f64 {
    let (nf, df) = (n as f64, d as f64);
    let sign = if (d / 2) % 2 == 0 { 1.0 } else { -1.0 };
    sign * gamma((nf - df) / 2.0) / (2f64.powf(df) * PI.powf(df / 2.0) * gamma(nf / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stated_relations() {
        for n in 2..=6usize {
            for d in 1..n {
                assert_relative_eq!(c1_tilde(n, d), c1_weighted(n, d, (n - d) as f64), max_relative = 1e-12);
                assert_relative_eq!(gamma_nd_tilde(n, d) * c1_tilde(n, d), gamma_nd(n, d), max_relative = 1e-12);
                if d % 2 == 0 {
                    let prod = even_d_constant(n, d) * fuglede_constant(n, d);
                    assert_relative_eq!(prod.abs(), 1.0, max_relative = 1e-12);
                }
                for alpha in [0.5, 1.0, 1.5] {
                    if let (Ok(ca), Ok(z)) = (c_alpha(n, d, alpha), zeta(n, alpha + d as f64)) {
                        assert_relative_eq!(ca, z / c1_weighted(n, d, alpha), max_relative = 1e-12);
                    }
                }
            }
        }
        assert_relative_eq!(even_d_constant(3, 2), -1.0 / (2.0 * PI), max_relative = 1e-14);
    }

    #[test]
    fn log_constant_is_the_residue() {
        // c_alpha (h_alpha - h_{n-d}) -> c_{n,d} h~ as alpha -> n - d
        for (n, d) in [(4usize, 1usize), (2, 1), (4, 2), (6, 3)] {
            let a0 = (n - d) as f64;
            let eps = 1e-6;
            let lim = c_alpha(n, d, a0 + eps).unwrap() * eps / 2.0;
            assert_relative_eq!(lim, c_log(n, d), max_relative = 1e-5);
        }
    }

    #[test]
    fn excluded_parameters() {
        assert!(zeta(3, 3.0).is_err());
        assert!(zeta(3, 5.0).is_err());
        assert!(zeta(3, 1.0).is_ok());
        assert!(c_alpha(3, 1, 2.0).is_err());
        assert!(c_alpha(3, 1, 1.0).is_ok());
        assert!(c_alpha(3, 1, 0.0).is_err());
        assert_relative_eq!(zonal_constant(1), 2f64.sqrt() * PI.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(zonal_constant(2), 2.0 * PI, max_relative = 1e-14);
    }
}
