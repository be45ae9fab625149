//! Fixed product rules on `S^{k}` and on `SO(n)`, normalized to total mass 1.

use std::f64::consts::PI;

use crate::lorentz::Rotation;
use crate::quadrature::gauss_legendre;

/// Nodes and weights of a normalized rule on the unit sphere of `R^m`.
#[derive(Debug, Clone)]
pub struct SphereRule {
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Product rule on `S^{m-1}`: Gauss–Legendre in each polar angle (weight
    /// `sin^{j-1}`), trapezoid in the final azimuth. `order` nodes per angle.
    pub fn new(m: usize, order: usize) -> Self {
        assert!(m >= 1, "sphere of R^0");
        let order = order.max(2);
        if m == 1 {
            return SphereRule { points: vec![vec![1.0], vec![-1.0]], weights: vec![0.5, 0.5] };
        }
        if m == 2 {
            let k = 2 * order;
            let points = (0..k)
                .map(|i| {
                    let a = 2.0 * PI * (i as f64 + 0.5) / k as f64;
                    vec![a.cos(), a.sin()]
                })
                .collect();
            return SphereRule { points, weights: vec![1.0 / k as f64; k] };
        }
        // theta = (sin(phi) omega, cos(phi)), omega on S^{m-2}
        let inner = SphereRule::new(m - 1, order);
        let (x, w) = gauss_legendre(order);
        let power = (m - 2) as f64;
        let mut angles = Vec::with_capacity(order);
        let mut total = 0.0;
        for (xi, wi) in x.iter().zip(&w) {
            let (phi, weight) = if m % 2 == 1 {
                // z = cos(phi) turns the weight into the polynomial (1 - z^2)^{(m-3)/2}
                (xi.acos(), wi * (1.0 - xi * xi).powi((m as i32 - 3) / 2))
            } else {
                let phi = 0.5 * PI * (xi + 1.0);
                (phi, wi * phi.sin().powf(power))
            };
            total += weight;
            angles.push((phi, weight));
        }
        let mut points = Vec::with_capacity(order * inner.points.len());
        let mut weights = Vec::with_capacity(points.capacity());
        for (phi, wphi) in angles {
            let (s, c) = phi.sin_cos();
            for (omega, wo) in inner.points.iter().zip(&inner.weights) {
                let mut p: Vec<f64> = omega.iter().map(|o| s * o).collect();
                p.push(c);
                points.push(p);
                weights.push(wphi / total * wo);
            }
        }
        SphereRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `sum_i w_i f(theta_i)`.
    pub fn average<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }
}

/// A normalized product rule for Haar measure on `SO(n)`.
///
/// Each node is `pole_to(theta) diag(m, 1)` with `theta` from a sphere rule and `m`
/// from the rule on `SO(n-1)`.
#[derive(Debug, Clone)]
pub struct RotationRule {
    pub rotations: Vec<Rotation>,
    pub weights: Vec<f64>,
}

impl RotationRule {
    pub fn new(n: usize, order: usize) -> Self {
        if n == 1 {
            return RotationRule { rotations: vec![Rotation::identity(1)], weights: vec![1.0] };
        }
        let sphere = SphereRule::new(n, order);
        let sub = RotationRule::new(n - 1, order);
        let mut rotations = Vec::with_capacity(sphere.len() * sub.rotations.len());
        let mut weights = Vec::with_capacity(rotations.capacity());
        for (theta, wt) in sphere.points.iter().zip(&sphere.weights) {
            let pole = Rotation::pole_to(theta);
            for (m, wm) in sub.rotations.iter().zip(&sub.weights) {
                let mut block = nalgebra::DMatrix::identity(n, n);
                block.view_mut((0, 0), (n - 1, n - 1)).copy_from(m.matrix());
                rotations.push(pole.compose(&Rotation::from_raw(block)));
                weights.push(wt * wm);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        RotationRule { rotations, weights }
    }

    /// Rule for Haar averages of functions of `k a_t xi0` with `xi0` a `d`-horosphere.
    ///
    /// Such functions are invariant under `k -> k m` for `m` in `SO(n-1-d) x SO(d)`,
    /// so `k = pole_to(theta) diag(m, 1)` only needs `m` on the quotient of
    /// `SO(n-1)`. When one factor is `SO(1)` the quotient is `S^{n-2}`, traced by
    /// the image of the flat (`d = 1`) or normal (`n - 1 - d = 1`) axis.
    pub fn coset(n: usize, d: usize, order: usize) -> Self {
        let p = n - 1 - d;
        let inner: Vec<(Rotation, f64)> = if p == 0 {
            vec![(Rotation::identity(n - 1), 1.0)]
        } else if d == 1 || p == 1 {
            let m = n - 1;
            let mut swap = nalgebra::DMatrix::identity(m, m);
            if d != 1 {
                // carries e_0 to e_{m-1} so that pole_to moves the normal axis
                swap[(0, 0)] = 0.0;
                swap[(m - 1, m - 1)] = 0.0;
                swap[(m - 1, 0)] = 1.0;
                swap[(0, m - 1)] = -1.0;
            }
            let swap = Rotation::from_raw(swap);
            let rule = SphereRule::new(m, order);
            rule.points.iter().zip(&rule.weights).map(|(w, wt)| (Rotation::pole_to(w).compose(&swap), *wt)).collect()
        } else {
            let full = RotationRule::new(n - 1, order);
            full.rotations.into_iter().zip(full.weights).collect()
        };
        let sphere = SphereRule::new(n, order);
        let mut rotations = Vec::with_capacity(sphere.len() * inner.len());
        let mut weights = Vec::with_capacity(rotations.capacity());
        for (theta, wt) in sphere.points.iter().zip(&sphere.weights) {
            let pole = Rotation::pole_to(theta);
            for (m, wm) in &inner {
                let mut block = nalgebra::DMatrix::identity(n, n);
                block.view_mut((0, 0), (n - 1, n - 1)).copy_from(m.matrix());
                rotations.push(pole.compose(&Rotation::from_raw(block)));
                weights.push(wt * wm);
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        RotationRule { rotations, weights }
    }

    pub fn len(&self) -> usize {
        self.rotations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rotations.is_empty()
    }
}

/// Nodes per angle used by the general spherical routes in dimension `n`.
pub fn default_order(n: usize) -> usize {
    match n {
        0..=3 => 40,
        4 => 22,
        5 => 14,
        _ => 10,
    }
}
