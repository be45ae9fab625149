//! The pseudo-Euclidean space `E^{n,1}`, the hyperboloid `H^n` and the Lorentz group.
//!
//! Coordinates are stored 0-based: index `i < n` holds `x_{i+1}` and index `n`
//! holds the time-like coordinate `x_{n+1}`. The origin is `x0 = e_{n+1}`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{HoroError, Result};
use crate::fields::RadialProfile;
use crate::quadrature::{integrate_range, QuadratureSpec};
use crate::special::sphere_area;

/// Largest hyperbolic dimension supported by the stack-allocated point buffers.
pub const MAX_DIM: usize = 8;

/// Tolerances for the group-identity, reassembly and on-sheet checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub group: f64,
    pub reassembly: f64,
    /// Relative to `max(1, x_{n+1}^2)`.
    pub on_sheet: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { group: 1e-10, reassembly: 1e-9, on_sheet: 1e-12 }
    }
}

/// `[x, y] = -x_1 y_1 - ... - x_n y_n + x_{n+1} y_{n+1}` on raw coordinates of equal length.
#[inline]
pub fn form(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() - 1;
    let mut s = x[n] * y[n];
    for i in 0..n {
        s -= x[i] * y[i];
    }
    s
}

fn check_dim(n: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(HoroError::Contract(format!("hyperbolic dimension {n} outside 2..={MAX_DIM}")));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct AmbientVector {
    coords: Vec<f64>,
}

impl AmbientVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(HoroError::Contract("ambient vectors need n + 1 >= 3 coordinates".into()));
        }
        Ok(AmbientVector { coords })
    }

    /// Unit vector `e_{i+1}` of `E^{n,1}` (0-based `i`).
    pub fn basis(n: usize, i: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[i] = 1.0;
        AmbientVector { coords }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }
}

impl From<&HyperbolicPoint> for AmbientVector {
    fn from(p: &HyperbolicPoint) -> Self {
        AmbientVector { coords: p.coords.clone() }
    }
}

/// Bilinear form of signature `(n, 1)`.
pub fn minkowski_form(x: &AmbientVector, y: &AmbientVector) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return Err(HoroError::Contract(format!(
            "dimension mismatch: {} vs {}",
            x.coords.len(),
            y.coords.len()
        )));
    }
    Ok(form(&x.coords, &y.coords))
}

/// A point of the upper sheet `[x, x] = 1`, `x_{n+1} >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperbolicPoint {
    coords: Vec<f64>,
}

impl HyperbolicPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        Self::new_with(coords, &Tolerances::default())
    }

    pub fn new_with(coords: Vec<f64>, tol: &Tolerances) -> Result<Self> {
        if coords.len() < 3 {
            return Err(HoroError::Contract("points need n + 1 >= 3 coordinates".into()));
        }
        let last = coords[coords.len() - 1];
        let q = form(&coords, &coords);
        let scale = last * last;
        if (q - 1.0).abs() > tol.on_sheet * scale.max(1.0) || last < 1.0 - tol.on_sheet {
            return Err(HoroError::Geometry(format!("point not on the upper sheet: [x,x] = {q}, x_(n+1) = {last}")));
        }
        Ok(HyperbolicPoint { coords })
    }

    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        HyperbolicPoint { coords }
    }

    pub fn origin(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n] = 1.0;
        HyperbolicPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len() - 1
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// The time-like coordinate `x_{n+1}`.
    pub fn height(&self) -> f64 {
        self.coords[self.coords.len() - 1]
    }
}

/// A point of the asymptotic cone `[x, x] = 0`, `x_{n+1} > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeVector {
    coords: Vec<f64>,
}

impl ConeVector {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.len() < 3 {
            return Err(HoroError::Contract("cone vectors need n + 1 >= 3 coordinates".into()));
        }
        let last = coords[coords.len() - 1];
        let q = form(&coords, &coords);
        if q.abs() > 1e-12 * last * last || last <= 0.0 {
            return Err(HoroError::Geometry(format!("vector not on the cone: [x,x] = {q}")));
        }
        Ok(ConeVector { coords })
    }

    /// `b0 = (0, ..., 0, 1, 1)`.
    pub fn basic(n: usize) -> Self {
        let mut coords = vec![0.0; n + 1];
        coords[n - 1] = 1.0;
        coords[n] = 1.0;
        ConeVector { coords }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

pub fn geodesic_distance(x: &HyperbolicPoint, y: &HyperbolicPoint) -> Result<f64> {
    if x.coords.len() != y.coords.len() {
        return Err(HoroError::Contract("dimension mismatch".into()));
    }
    let c = form(&x.coords, &y.coords);
    if c < 1.0 - 1e-12 {
        return Err(HoroError::Geometry(format!("[x, y] = {c} < 1: points not both on the upper sheet")));
    }
    Ok(c.max(1.0).acosh())
}

/// `theta sinh r + e_{n+1} cosh r` for a unit `theta` in `R^n`.
pub fn hyperbolic_coords(theta: &[f64], r: f64) -> Result<HyperbolicPoint> {
    check_dim(theta.len())?;
    let norm: f64 = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(HoroError::Contract(format!("direction has norm {norm}, expected 1")));
    }
    if r < 0.0 {
        return Err(HoroError::Contract("radius must be non-negative".into()));
    }
    let (sh, ch) = (r.sinh(), r.cosh());
    let mut coords: Vec<f64> = theta.iter().map(|t| t * sh).collect();
    coords.push(ch);
    Ok(HyperbolicPoint { coords })
}

/// `n_v a_t x0 = (e^{-t} v, sinh t + |v|^2 e^{-t}/2, cosh t + |v|^2 e^{-t}/2)`.
pub fn horospherical_coords(v: &[f64], t: f64) -> HyperbolicPoint {
    let e = (-t).exp();
    let half_sq = 0.5 * v.iter().map(|x| x * x).sum::<f64>() * e;
    let mut coords: Vec<f64> = v.iter().map(|x| x * e).collect();
    coords.push(t.sinh() + half_sq);
    coords.push(t.cosh() + half_sq);
    HyperbolicPoint { coords }
}

/// A rotation of `R^n` (`k^T k = I`, `det k = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Rotation {
    matrix: DMatrix<f64>,
}

impl Rotation {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(HoroError::Contract("rotation matrix must be square".into()));
        }
        let n = matrix.nrows();
        let dev = (matrix.transpose() * &matrix - DMatrix::identity(n, n)).amax();
        if dev > 1e-10 {
            return Err(HoroError::Contract(format!("matrix is not orthogonal (deviation {dev:e})")));
        }
        let det = matrix.determinant();
        if (det - 1.0).abs() > 1e-10 {
            return Err(HoroError::Contract(format!("rotation has determinant {det}")));
        }
        Ok(Rotation { matrix })
    }

    pub(crate) fn from_raw(matrix: DMatrix<f64>) -> Self {
        Rotation { matrix }
    }

    pub fn identity(n: usize) -> Self {
        Rotation { matrix: DMatrix::identity(n, n) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn transpose(&self) -> Self {
        Rotation { matrix: self.matrix.transpose() }
    }

    pub fn compose(&self, other: &Rotation) -> Self {
        Rotation { matrix: &self.matrix * &other.matrix }
    }

    /// Haar-random rotation from the QR factorization of a Gaussian matrix.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        if q.determinant() < 0.0 {
            for i in 0..n {
                q[(i, 0)] = -q[(i, 0)];
            }
        }
        Rotation { matrix: q }
    }

    /// Rotation in the plane of `e_n` and `theta` carrying `e_n` to the unit vector `theta`.
    ///
    /// Fixes the orthogonal complement of that plane; for `theta = -e_n` it
    /// rotates by `pi` in the `(e_{n-1}, e_n)` plane.
    pub fn pole_to(theta: &[f64]) -> Self {
        let n = theta.len();
        let c = theta[n - 1];
        let mut m = DMatrix::identity(n, n);
        let mut u: Vec<f64> = theta.to_vec();
        u[n - 1] = 0.0;
        let s = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        if s < 1e-300 {
            if c < 0.0 {
                m[(n - 1, n - 1)] = -1.0;
                m[(n - 2, n - 2)] = -1.0;
            }
            return Rotation { matrix: m };
        }
        for x in u.iter_mut() {
            *x /= s;
        }
        // R = I + s (u e^T - e u^T) + (c - 1)(u u^T + e e^T)
        for i in 0..n {
            for j in 0..n {
                let ei = if i == n - 1 { 1.0 } else { 0.0 };
                let ej = if j == n - 1 { 1.0 } else { 0.0 };
                m[(i, j)] += s * (u[i] * ej - ei * u[j]) + (c - 1.0) * (u[i] * u[j] + ei * ej);
            }
        }
        Rotation { matrix: m }
    }
}

/// An element of `SO_0(n, 1)`, stored as a dense `(n+1) x (n+1)` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct LorentzElement {
    matrix: DMatrix<f64>,
}

fn signature(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::identity(n + 1, n + 1);
    for i in 0..n {
        j[(i, i)] = -1.0;
    }
    j
}

impl LorentzElement {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        Self::new_with(matrix, &Tolerances::default())
    }

    pub fn new_with(matrix: DMatrix<f64>, tol: &Tolerances) -> Result<Self> {
        let g = LorentzElement { matrix };
        g.validate(tol)?;
        Ok(g)
    }

    pub fn identity(n: usize) -> Self {
        LorentzElement { matrix: DMatrix::identity(n + 1, n + 1) }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Largest entry of `g^T J g - J`.
    pub fn form_defect(&self) -> f64 {
        let j = signature(self.dim());
        (self.matrix.transpose() * &j * &self.matrix - j).amax()
    }

    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if !self.matrix.is_square() || self.matrix.nrows() < 3 {
            return Err(HoroError::Contract("Lorentz matrices must be square of size n + 1 >= 3".into()));
        }
        let scale = self.matrix.amax().max(1.0);
        let defect = self.form_defect();
        if defect > tol.group * scale * scale {
            return Err(HoroError::Contract(format!("matrix does not preserve the form (defect {defect:e})")));
        }
        let det = self.matrix.determinant();
        if (det - 1.0).abs() > tol.group * scale.powi(self.matrix.nrows() as i32) {
            return Err(HoroError::Contract(format!("determinant {det} != 1")));
        }
        let n = self.dim();
        if self.matrix[(n, n)] < 1.0 - tol.group {
            return Err(HoroError::Contract("element does not preserve the upper sheet".into()));
        }
        Ok(())
    }

    pub fn compose(&self, other: &LorentzElement) -> Self {
        LorentzElement { matrix: &self.matrix * &other.matrix }
    }

    /// `g^{-1} = J g^T J`.
    pub fn inverse(&self) -> Self {
        let j = signature(self.dim());
        LorentzElement { matrix: &j * self.matrix.transpose() * &j }
    }

    pub fn apply(&self, p: &HyperbolicPoint) -> HyperbolicPoint {
        let v = &self.matrix * DVector::from_column_slice(&p.coords);
        HyperbolicPoint { coords: v.as_slice().to_vec() }
    }

    /// `g x0`, the last column of the matrix.
    pub fn origin_image(&self) -> HyperbolicPoint {
        let n = self.dim();
        HyperbolicPoint { coords: self.matrix.column(n).iter().copied().collect() }
    }

    /// Writes `g x` into `out` without allocating; `x` and `out` have length `n + 1`.
    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let m = self.matrix.nrows();
        for (i, o) in out.iter_mut().enumerate().take(m) {
            let mut s = 0.0;
            for (j, xj) in x.iter().enumerate().take(m) {
                s += self.matrix[(i, j)] * xj;
            }
            *o = s;
        }
    }

    /// Haar-like random element `n_v a_t k` with `|v_i| <= v_scale`, `|t| <= t_scale`.
    pub fn random<R: Rng + ?Sized>(n: usize, v_scale: f64, t_scale: f64, rng: &mut R) -> Self {
        let v: Vec<f64> = (0..n - 1).map(|_| rng.random_range(-v_scale..=v_scale)).collect();
        let t = rng.random_range(-t_scale..=t_scale);
        let k = Rotation::random(n, rng);
        make_n(&v).compose(&make_a(n, t)).compose(&make_k(&k))
    }
}

/// `n_v` for `v` in `R^{n-1}`.
pub fn make_n(v: &[f64]) -> LorentzElement {
    let n = v.len() + 1;
    let q = 0.5 * v.iter().map(|x| x * x).sum::<f64>();
    let mut m = DMatrix::identity(n + 1, n + 1);
    for (i, &vi) in v.iter().enumerate() {
        m[(i, n - 1)] = -vi;
        m[(i, n)] = vi;
        m[(n - 1, i)] = vi;
        m[(n, i)] = vi;
    }
    m[(n - 1, n - 1)] = 1.0 - q;
    m[(n - 1, n)] = q;
    m[(n, n - 1)] = -q;
    m[(n, n)] = 1.0 + q;
    LorentzElement { matrix: m }
}

/// Hyperbolic rotation by `t` in the `(x_n, x_{n+1})` plane.
pub fn make_a(n: usize, t: f64) -> LorentzElement {
    let mut m = DMatrix::identity(n + 1, n + 1);
    let (sh, ch) = (t.sinh(), t.cosh());
    m[(n - 1, n - 1)] = ch;
    m[(n - 1, n)] = sh;
    m[(n, n - 1)] = sh;
    m[(n, n)] = ch;
    LorentzElement { matrix: m }
}

/// Block embedding `diag(k, 1)` of a rotation of `R^n`.
pub fn make_k(k: &Rotation) -> LorentzElement {
    let n = k.dim();
    let mut m = DMatrix::identity(n + 1, n + 1);
    m.view_mut((0, 0), (n, n)).copy_from(&k.matrix);
    LorentzElement { matrix: m }
}

/// Factors of the Iwasawa decomposition `g = n_v a_t k`.
#[derive(Debug, Clone, PartialEq)]
pub struct IwasawaFactors {
    pub v: Vec<f64>,
    pub t: f64,
    pub k: Rotation,
}

impl IwasawaFactors {
    pub fn reassemble(&self) -> LorentzElement {
        make_n(&self.v).compose(&make_a(self.k.dim(), self.t)).compose(&make_k(&self.k))
    }
}

/// Decomposes `g = n_v a_t k`.
///
/// With `p = g x0` the horospherical chart gives `p_{n+1} - p_n = e^{-t}` and
/// `(p_1, ..., p_{n-1}) = e^{-t} v`; the rotation is `a_{-t} n_{-v} g`.
/// Double precision keeps the extraction accurate for `|t|` up to about 30.
pub fn iwasawa_nak(g: &LorentzElement) -> Result<IwasawaFactors> {
    let n = g.dim();
    let p = g.origin_image();
    let c = p.coords();
    let gap = c[n] - c[n - 1];
    if !(gap > 0.0) {
        return Err(HoroError::Decomposition { residual: f64::INFINITY });
    }
    let t = -gap.ln();
    let et = t.exp();
    let v: Vec<f64> = c[..n - 1].iter().map(|x| x * et).collect();
    let neg_v: Vec<f64> = v.iter().map(|x| -x).collect();
    let rest = make_a(n, -t).compose(&make_n(&neg_v)).compose(g);
    let k = Rotation::from_raw(rest.matrix.view((0, 0), (n, n)).into_owned());
    let factors = IwasawaFactors { v, t, k };
    let residual = (factors.reassemble().matrix - &g.matrix).amax() / g.matrix.amax().max(1.0);
    if residual > 1e-8 {
        return Err(HoroError::Decomposition { residual });
    }
    Ok(factors)
}

/// `sigma_{n-1} int_1^inf f0(s) (s^2 - 1)^{n/2 - 1} ds`, the integral of a zonal function over `H^n`.
pub fn radial_measure_integral(f0: &RadialProfile, n: usize, quad: &QuadratureSpec) -> Result<f64> {
    check_dim(n)?;
    let expo = 0.5 * n as f64 - 1.0;
    let integrand = |s: f64| {
        let v = f0.value(s);
        if v == 0.0 {
            0.0
        } else {
            v * (s * s - 1.0).powf(expo)
        }
    };
    let est = match f0.support_end() {
        Some(end) => integrate_range(integrand, 1.0, end, quad),
        None => {
            if let Some(mu) = f0.decay_mu() {
                if mu <= (n - 1) as f64 {
                    return Err(HoroError::Divergence { value: f64::INFINITY, bound_reached: true });
                }
            }
            integrate_range(integrand, 1.0, f64::INFINITY, quad)
        }
    };
    Ok(sphere_area(n - 1) * est.into_result()?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn form_signature() {
        let n = 3;
        let e_last = AmbientVector::basis(n, n);
        let e1 = AmbientVector::basis(n, 0);
        assert_eq!(minkowski_form(&e_last, &e_last).unwrap(), 1.0);
        assert_eq!(minkowski_form(&e1, &e1).unwrap(), -1.0);
        let x = hyperbolic_coords(&[0.0, 0.6, 0.8], 1.3).unwrap();
        let o = HyperbolicPoint::origin(n);
        assert_relative_eq!(
            minkowski_form(&(&x).into(), &(&o).into()).unwrap(),
            1.3f64.cosh(),
            epsilon = 1e-14
        );
        let short = AmbientVector::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(minkowski_form(&short, &e1), Err(HoroError::Contract(_))));
    }

    #[test]
    fn distance_cases() {
        let o = HyperbolicPoint::origin(4);
        assert_eq!(geodesic_distance(&o, &o).unwrap(), 0.0);
        let x = hyperbolic_coords(&[0.5, 0.5, 0.5, 0.5], 2.25).unwrap();
        assert_relative_eq!(geodesic_distance(&o, &x).unwrap(), 2.25, epsilon = 1e-12);
        let bad = HyperbolicPoint::from_raw(vec![0.0, 0.0, 0.0, 0.0, -1.0]);
        assert!(matches!(geodesic_distance(&o, &bad), Err(HoroError::Geometry(_))));
    }

    #[test]
    fn random_pair_distance_matches_direct_arccosh() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let x = LorentzElement::random(3, 1.0, 1.0, &mut rng).origin_image();
            let y = LorentzElement::random(3, 1.0, 1.0, &mut rng).origin_image();
            let c = x.coords();
            let d = y.coords();
            let direct = (-c[0] * d[0] - c[1] * d[1] - c[2] * d[2] + c[3] * d[3]).acosh();
            assert_relative_eq!(geodesic_distance(&x, &y).unwrap(), direct, epsilon = 1e-10);
        }
    }

    #[test]
    fn hyperbolic_coords_basics() {
        let o = hyperbolic_coords(&[1.0, 0.0, 0.0], 0.0).unwrap();
        assert_eq!(o, HyperbolicPoint::origin(3));
        let p = hyperbolic_coords(&[0.0, 0.0, 1.0], 0.7).unwrap();
        assert_eq!(p.coords(), &[0.0, 0.0, 0.7f64.sinh(), 0.7f64.cosh()]);
        assert_relative_eq!(form(p.coords(), p.coords()), 1.0, epsilon = 1e-14);
        assert!(hyperbolic_coords(&[1.0, 1.0, 0.0], 0.3).is_err());
    }

    #[test]
    fn horospherical_chart_matches_matrix_products() {
        assert_eq!(horospherical_coords(&[0.0, 0.0], 0.0), HyperbolicPoint::origin(3));
        let v = [0.4, -1.1];
        let t = 0.8;
        let p = horospherical_coords(&v, t);
        let q = make_n(&v).compose(&make_a(3, t)).origin_image();
        for (a, b) in p.coords().iter().zip(q.coords()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
        // a_t n_v x0 = (v, sinh t + |v|^2 e^t / 2, cosh t + |v|^2 e^t / 2)
        let r = make_a(3, t).compose(&make_n(&v)).origin_image();
        let h = 0.5 * (v[0] * v[0] + v[1] * v[1]) * t.exp();
        let expected = [v[0], v[1], t.sinh() + h, t.cosh() + h];
        for (a, b) in r.coords().iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn subgroup_factories() {
        assert_eq!(make_n(&[0.0, 0.0]), LorentzElement::identity(3));
        assert_eq!(make_a(3, 0.0), LorentzElement::identity(3));
        assert_eq!(make_k(&Rotation::identity(3)), LorentzElement::identity(3));
        let ab = make_a(4, 0.3).compose(&make_a(4, -1.1));
        assert!((ab.matrix() - make_a(4, -0.8).matrix()).amax() < 1e-14);
        let x = make_a(2, 0.5).origin_image();
        assert_relative_eq!(x.coords()[1], 0.5f64.sinh(), epsilon = 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = Rotation::random(3, &mut rng);
        assert_eq!(make_k(&k).origin_image(), HyperbolicPoint::origin(3));
        let k2 = Rotation::random(3, &mut rng);
        let lhs = make_k(&k).compose(&make_k(&k2));
        assert!((lhs.matrix() - make_k(&k.compose(&k2)).matrix()).amax() < 1e-14);
        assert!(Rotation::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
    }

    #[test]
    fn identity_decomposes_trivially() {
        let f = iwasawa_nak(&LorentzElement::identity(3)).unwrap();
        assert_eq!(f.v, vec![0.0, 0.0]);
        assert_eq!(f.t, 0.0);
        assert!((f.k.matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-15);
    }

    #[test]
    fn pole_rotation_is_a_rotation() {
        let theta = [0.36, -0.48, 0.8];
        let r = Rotation::pole_to(&theta);
        assert!(Rotation::new(r.matrix().clone()).is_ok());
        let col: Vec<f64> = r.matrix().column(2).iter().copied().collect();
        for (a, b) in col.iter().zip(theta) {
            assert_relative_eq!(*a, b, epsilon = 1e-14);
        }
        let r = Rotation::pole_to(&[0.0, 0.0, -1.0]);
        assert!(Rotation::new(r.matrix().clone()).is_ok());
    }

    #[test]
    fn radial_measure_simple_cases() {
        let q = QuadratureSpec::default();
        assert_eq!(radial_measure_integral(&RadialProfile::zero(), 3, &q).unwrap(), 0.0);
        let ind = RadialProfile::from_fn(|s| if s <= 2.0 { 1.0 } else { 0.0 }, Some(2.0), None);
        assert_relative_eq!(
            radial_measure_integral(&ind, 2, &q).unwrap(),
            2.0 * std::f64::consts::PI,
            epsilon = 1e-12
        );
    }
}
