//! `d`-dimensional horospheres `xi = k a_t n_u xi0`.
//!
//! The flat directions of the basic horosphere are the last `d` coordinates of
//! `R^{n-1}` (ambient indices `n-1-d .. n-2`); the parameter `u` lives in the
//! first `n-1-d` coordinates.

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use rand_distr::StandardNormal;

use crate::error::{HoroError, Result};
use crate::lorentz::{
    form, iwasawa_nak, make_a, make_k, make_n, ConeVector, HyperbolicPoint, LorentzElement, Rotation, MAX_DIM,
};

/// A `d`-horosphere in `H^n`, stored through its parameters `(k, t, u)`.
///
/// The parameters are not unique; compare horospheres with [`same_point_set`].
#[derive(Debug, Clone, PartialEq)]
pub struct Horosphere {
    n: usize,
    d: usize,
    k: Rotation,
    t: f64,
    u: Vec<f64>,
    g: LorentzElement,
}

/// The basic horosphere data: dimensions and `b0 = (0, ..., 0, 1, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasicHorosphereSpec {
    pub n: usize,
    pub d: usize,
    pub b0: ConeVector,
}

impl BasicHorosphereSpec {
    pub fn new(n: usize, d: usize) -> Result<Self> {
        check_nd(n, d)?;
        Ok(BasicHorosphereSpec { n, d, b0: ConeVector::basic(n) })
    }
}

pub(crate) fn check_nd(n: usize, d: usize) -> Result<()> {
    if !(2..=MAX_DIM).contains(&n) {
        return Err(HoroError::Contract(format!("n = {n} outside 2..={MAX_DIM}")));
    }
    if d < 1 || d > n - 1 {
        return Err(HoroError::Contract(format!("horosphere dimension d = {d} outside 1..={}", n - 1)));
    }
    Ok(())
}

/// Embeds `u` (length `n-1-d`) into the first block of `R^{n-1}`.
fn embed_u(n: usize, u: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; n - 1];
    v[..u.len()].copy_from_slice(u);
    v
}

/// Embeds `w` (length `d`) into the last block of `R^{n-1}`.
pub fn embed_w(n: usize, w: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; n - 1];
    let off = n - 1 - w.len();
    v[off..].copy_from_slice(w);
    v
}

impl Horosphere {
    pub fn new(n: usize, d: usize, k: Rotation, t: f64, u: Vec<f64>) -> Result<Self> {
        check_nd(n, d)?;
        if k.dim() != n {
            return Err(HoroError::Contract("rotation has the wrong size".into()));
        }
        if u.len() != n - 1 - d {
            return Err(HoroError::Contract(format!("u must have {} coordinates", n - 1 - d)));
        }
        Rotation::new(k.matrix().clone())?;
        Ok(Self::from_parts(n, d, k, t, u))
    }

    fn from_parts(n: usize, d: usize, k: Rotation, t: f64, u: Vec<f64>) -> Self {
        let g = make_k(&k).compose(&make_a(n, t)).compose(&make_n(&embed_u(n, &u)));
        Horosphere { n, d, k, t, u, g }
    }

    /// `a_t n_u xi0` with `k = I`.
    pub fn standard(n: usize, d: usize, t: f64, u: Vec<f64>) -> Result<Self> {
        Self::new(n, d, Rotation::identity(n), t, u)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn d(&self) -> usize {
        self.d
    }
    pub fn k(&self) -> &Rotation {
        &self.k
    }
    pub fn t(&self) -> f64 {
        self.t
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn u_norm(&self) -> f64 {
        self.u.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The group element `k a_t n_u` carrying `xi0` to this horosphere.
    pub fn group_element(&self) -> &LorentzElement {
        &self.g
    }

    /// The point `k a_t n_u n_w x0`, `w` in `R^d`.
    pub fn point(&self, w: &[f64]) -> HyperbolicPoint {
        let mut out = vec![0.0; self.n + 1];
        self.point_into(w, &mut out);
        HyperbolicPoint::from_raw(out)
    }

    /// Writes `k a_t n_u n_w x0` into `out` (length `n + 1`).
    #[inline]
    pub fn point_into(&self, w: &[f64], out: &mut [f64]) {
        let n = self.n;
        let mut base = [0.0; MAX_DIM + 1];
        // n_w x0 = (w embedded, |w|^2/2, 1 + |w|^2/2)
        let q = 0.5 * w.iter().map(|x| x * x).sum::<f64>();
        let off = n - 1 - self.d;
        base[off..off + self.d].copy_from_slice(w);
        base[n - 1] = q;
        base[n] = 1.0 + q;
        self.g.apply_into(&base[..n + 1], out);
    }

    /// `gamma xi` for a Lorentz element `gamma`.
    pub fn transported(&self, gamma: &LorentzElement) -> Result<Self> {
        horosphere_from_group(&gamma.compose(&self.g), self.d)
    }
}

/// The basic horosphere `xi0 = H^{d+1} ∩ {[x, b0] = 1}`.
pub fn basic_horosphere(n: usize, d: usize) -> Result<Horosphere> {
    check_nd(n, d)?;
    Ok(Horosphere::from_parts(n, d, Rotation::identity(n), 0.0, vec![0.0; n - 1 - d]))
}

/// Parameters `(k, t, u)` of `g xi0`.
///
/// Decomposes `g^{-1} = n_v a_t k` so that `g = k^{-1} a_{-t} n_{-v}`; the part of
/// `-v` along the flat directions is absorbed by `xi0`.
pub fn horosphere_from_group(g: &LorentzElement, d: usize) -> Result<Horosphere> {
    let n = g.dim();
    check_nd(n, d)?;
    let f = iwasawa_nak(&g.inverse())?;
    let u: Vec<f64> = f.v[..n - 1 - d].iter().map(|x| -x).collect();
    Ok(Horosphere::from_parts(n, d, f.k.transpose(), -f.t, u))
}

/// Membership test: `y = (k a_t n_u)^{-1} x` must satisfy `[y, b0] = 1` and vanish
/// on the first `n-1-d` coordinates. The tolerance is scaled by `1 + y_{n+1}`.
pub fn contains(xi: &Horosphere, x: &HyperbolicPoint, tol: f64) -> Result<bool> {
    let n = xi.n;
    if x.dim() != n {
        return Err(HoroError::Contract("point and horosphere dimensions differ".into()));
    }
    let y = xi.g.inverse().apply(x);
    let yc = y.coords();
    let scale = 1.0 + yc[n].abs();
    let b0 = ConeVector::basic(n);
    if (form(yc, b0.coords()) - 1.0).abs() > tol * scale {
        return Ok(false);
    }
    Ok(yc[..n - 1 - xi.d].iter().all(|c| c.abs() <= tol * scale))
}

/// `m_{alpha,beta} = diag(alpha, beta, I_2)` with `alpha in O(n-1-d)`, `beta in O(d)`, `det = 1`.
pub fn make_m(alpha: &DMatrix<f64>, beta: &DMatrix<f64>) -> Result<LorentzElement> {
    let p = alpha.nrows();
    let d = beta.nrows();
    let n = p + d + 1;
    let mut m = DMatrix::identity(n + 1, n + 1);
    m.view_mut((0, 0), (p, p)).copy_from(alpha);
    m.view_mut((p, p), (d, d)).copy_from(beta);
    for block in [alpha, beta] {
        let k = block.nrows();
        if k > 0 && (block.transpose() * block - DMatrix::identity(k, k)).amax() > 1e-10 {
            return Err(HoroError::Contract("stabilizer blocks must be orthogonal".into()));
        }
    }
    LorentzElement::new(m)
}

/// Random element of `S(O(n-1-d) x O(d))`, embedded as `m_{alpha,beta}`.
pub fn random_m<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> LorentzElement {
    let p = n - 1 - d;
    let mut alpha = if p > 0 { Rotation::random(p, rng).matrix().clone() } else { DMatrix::zeros(0, 0) };
    let mut beta = Rotation::random(d, rng).matrix().clone();
    // flip both determinants half of the time
    if p > 0 && rng.random_bool(0.5) {
        for i in 0..p {
            alpha[(i, 0)] = -alpha[(i, 0)];
        }
        for i in 0..d {
            beta[(i, 0)] = -beta[(i, 0)];
        }
    }
    make_m(&alpha, &beta).expect("random blocks are orthogonal")
}

/// Checks that `g = m n_v` maps sample points of `xi0` back onto `xi0` and that
/// `m n_v = n_{beta v} m`.
pub fn stabilizer_check(m: &LorentzElement, nv: &LorentzElement, d: usize, samples: usize) -> Result<bool> {
    let n = m.dim();
    let xi0 = basic_horosphere(n, d)?;
    let g = m.compose(nv);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..samples {
        let w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let p = xi0.point(&w);
        if !contains(&xi0, &g.apply(&p), 1e-9)? {
            return Ok(false);
        }
    }
    // commutation with the beta block, when n_v is in N_d and m is block diagonal
    let mm = m.matrix();
    let p = n - 1 - d;
    let v: Vec<f64> = (0..n - 1).map(|i| nv.matrix()[(n, i)]).collect();
    if v[..p].iter().any(|x| x.abs() > 1e-12) {
        return Ok(false);
    }
    let mut beta_v = vec![0.0; n - 1];
    for i in p..n - 1 {
        beta_v[i] = (p..n - 1).map(|j| mm[(i, j)] * v[j]).sum();
    }
    let lhs = m.compose(nv);
    let rhs = make_n(&beta_v).compose(m);
    Ok((lhs.matrix() - rhs.matrix()).amax() < 1e-10)
}

/// `dim Xi_d = (n - d)(d + 2) - 1`.
pub fn xi_dimension(n: usize, d: usize) -> Result<usize> {
    check_nd(n, d)?;
    Ok((n - d) * (d + 2) - 1)
}

/// Sample points `k a_t n_u n_w x0`, `w` standard Gaussian in `R^d`.
pub fn sample_points<R: Rng + ?Sized>(xi: &Horosphere, count: usize, rng: &mut R) -> Vec<HyperbolicPoint> {
    (0..count)
        .map(|_| {
            let w: Vec<f64> = (0..xi.d).map(|_| rng.sample(StandardNormal)).collect();
            xi.point(&w)
        })
        .collect()
}

/// Extensional equality: sample points of each horosphere lie on the other.
pub fn same_point_set(a: &Horosphere, b: &Horosphere, samples: usize, tol: f64) -> Result<bool> {
    if a.n != b.n || a.d != b.d {
        return Ok(false);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xabc);
    for p in sample_points(a, samples, &mut rng) {
        if !contains(b, &p, tol)? {
            return Ok(false);
        }
    }
    for p in sample_points(b, samples, &mut rng) {
        if !contains(a, &p, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_horosphere_parameters() {
        let xi = basic_horosphere(3, 1).unwrap();
        assert_eq!(xi.t(), 0.0);
        assert_eq!(xi.u(), &[0.0]);
        assert_eq!(xi.k(), &Rotation::identity(3));
        assert!(basic_horosphere(3, 3).is_err());
        assert!(basic_horosphere(3, 0).is_err());
        for n in 2..=6 {
            for d in 1..n {
                let xi = basic_horosphere(n, d).unwrap();
                assert!(contains(&xi, &HyperbolicPoint::origin(n), 1e-9).unwrap());
                let w: Vec<f64> = (0..d).map(|i| 0.3 * i as f64 - 0.7).collect();
                let p = make_n(&embed_w(n, &w)).origin_image();
                assert!(contains(&xi, &p, 1e-9).unwrap());
            }
        }
    }

    #[test]
    fn hyperbolic_shift_leaves_the_basic_horosphere() {
        // [a_1 x0, b0] = cosh 1 - sinh 1 = e^{-1}
        let xi = basic_horosphere(3, 1).unwrap();
        let p = make_a(3, 1.0).origin_image();
        assert!((form(p.coords(), ConeVector::basic(3).coords()) - (-1.0f64).exp()).abs() < 1e-14);
        assert!(!contains(&xi, &p, 1e-9).unwrap());
    }

    #[test]
    fn from_group_cases() {
        let xi = horosphere_from_group(&LorentzElement::identity(4), 2).unwrap();
        assert!(same_point_set(&xi, &basic_horosphere(4, 2).unwrap(), 20, 1e-9).unwrap());
        // flat translations are absorbed
        let g = make_n(&embed_w(4, &[0.8, -1.3]));
        let xi = horosphere_from_group(&g, 2).unwrap();
        assert!(xi.u()[0].abs() < 1e-12 && xi.t().abs() < 1e-12);
        // round trip of explicit parameters
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let k = Rotation::random(4, &mut rng);
        let g = make_k(&k).compose(&make_a(4, 0.6)).compose(&make_n(&[0.5, 0.0, 0.0]));
        let xi = horosphere_from_group(&g, 2).unwrap();
        assert!((xi.t() - 0.6).abs() < 1e-10);
        assert!((xi.u()[0] - 0.5).abs() < 1e-10);
        assert!((xi.k().matrix() - k.matrix()).amax() < 1e-10);
    }

    #[test]
    fn stabilizer_membership() {
        let id = LorentzElement::identity(4);
        assert!(stabilizer_check(&id, &id, 2, 10).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 1..4 {
            let m = random_m(4, d, &mut rng);
            let w: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let nv = make_n(&embed_w(4, &w));
            assert!(stabilizer_check(&m, &nv, d, 100).unwrap(), "d = {d}");
        }
        assert!(!stabilizer_check(&make_a(4, 1.0), &id, 2, 10).unwrap());
    }

    #[test]
    fn dimension_formula() {
        assert_eq!(xi_dimension(3, 1).unwrap(), 5);
        assert_eq!(xi_dimension(3, 2).unwrap(), 3);
        for n in 2..=8 {
            assert_eq!(xi_dimension(n, n - 1).unwrap(), n);
            for d in 1..n {
                assert_eq!(xi_dimension(n, d).unwrap() > n, d < n - 1);
            }
        }
        assert!(xi_dimension(4, 4).is_err());
    }
}
