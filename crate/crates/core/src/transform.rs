//! The forward `d`-horospherical transform, spherical means, the mean-value and
//! check operators, and the weighted dual family `H*^alpha`.

use std::cell::{Cell, RefCell};
use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::constants::{c1_weighted, c_alpha, c_log, zonal_constant};
use crate::error::{HoroError, Result};
use crate::fields::{RadialProfile, ScalarField};
use crate::fractional::{rl_integral_minus, Profile1D};
use crate::horosphere::{check_nd, horosphere_from_group, Horosphere};
use crate::lorentz::{
    form, geodesic_distance, make_a, make_k, make_n, radial_measure_integral, HyperbolicPoint, LorentzElement,
    Rotation, MAX_DIM,
};
use crate::quadrature::{
    gauss_kronrod, integrate_left_singular, integrate_range, tanh_sinh, Estimate, QuadratureSpec,
};
use crate::special::{gamma, sphere_area};
use crate::sphere::{default_order, RotationRule, SphereRule};

/// How the values of an image were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    ExactZonal,
    Quadrature,
    User,
}

/// A function on the set of `d`-horospheres of `H^n`.
pub trait HorosphericalImage: Send + Sync {
    fn n(&self) -> usize;
    fn d(&self) -> usize;
    fn eval(&self, xi: &Horosphere) -> Result<f64>;
    fn provenance(&self) -> Provenance;
    /// The function whose transform this is, when known.
    fn source(&self) -> Option<Arc<dyn ScalarField>> {
        None
    }
}

/// The transform `f^` of a field, evaluated on demand.
#[derive(Clone)]
pub struct ForwardImage {
    f: Arc<dyn ScalarField>,
    d: usize,
    quad: QuadratureSpec,
    zonal: Option<RadialProfile>,
}

impl ForwardImage {
    pub fn new(f: Arc<dyn ScalarField>, d: usize, quad: QuadratureSpec) -> Result<Self> {
        check_nd(f.dim(), d)?;
        quad.validate()?;
        let zonal = f.zonal_profile();
        Ok(ForwardImage { f, d, quad, zonal })
    }

    pub fn field(&self) -> &Arc<dyn ScalarField> {
        &self.f
    }
}

impl HorosphericalImage for ForwardImage {
    fn n(&self) -> usize {
        self.f.dim()
    }
    fn d(&self) -> usize {
        self.d
    }
    fn eval(&self, xi: &Horosphere) -> Result<f64> {
        forward(self.f.as_ref(), xi, &self.quad)
    }
    fn provenance(&self) -> Provenance {
        if self.zonal.is_some() {
            Provenance::ExactZonal
        } else {
            Provenance::Quadrature
        }
    }
    fn source(&self) -> Option<Arc<dyn ScalarField>> {
        Some(self.f.clone())
    }
}

type ImageFn = dyn Fn(&Horosphere) -> f64 + Send + Sync;

/// A user-supplied function on horospheres.
#[derive(Clone)]
pub struct FnImage {
    n: usize,
    d: usize,
    f: Arc<ImageFn>,
}

impl FnImage {
    pub fn new<F>(n: usize, d: usize, f: F) -> Result<Self>
    where
        F: Fn(&Horosphere) -> f64 + Send + Sync + 'static,
    {
        check_nd(n, d)?;
        Ok(FnImage { n, d, f: Arc::new(f) })
    }

    pub fn constant(n: usize, d: usize, value: f64) -> Result<Self> {
        Self::new(n, d, move |_| value)
    }

    /// Wraps another image, hiding its source so that only its values are used.
    pub fn opaque(inner: Arc<dyn HorosphericalImage>) -> Self {
        let (n, d) = (inner.n(), inner.d());
        FnImage { n, d, f: Arc::new(move |xi| inner.eval(xi).unwrap_or(f64::NAN)) }
    }
}

impl HorosphericalImage for FnImage {
    fn n(&self) -> usize {
        self.n
    }
    fn d(&self) -> usize {
        self.d
    }
    fn eval(&self, xi: &Horosphere) -> Result<f64> {
        Ok((self.f)(xi))
    }
    fn provenance(&self) -> Provenance {
        Provenance::User
    }
}

/// Caches the values of an image by horosphere parameters.
///
/// Entries are inserted once; concurrent readers see either nothing or the final value.
pub struct MemoizedImage {
    inner: Arc<dyn HorosphericalImage>,
    cache: DashMap<u64, f64>,
}

impl MemoizedImage {
    pub fn new(inner: Arc<dyn HorosphericalImage>) -> Self {
        MemoizedImage { inner, cache: DashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.cache.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cache.is_empty()
    }

    fn key(xi: &Horosphere) -> u64 {
        let mut h = DefaultHasher::new();
        if xi.k().matrix() == Rotation::identity(xi.n()).matrix() || xi.d() == 0 {
            0u8.hash(&mut h);
        } else {
            for x in xi.k().matrix().iter() {
                x.to_bits().hash(&mut h);
            }
        }
        xi.t().to_bits().hash(&mut h);
        for u in xi.u() {
            u.to_bits().hash(&mut h);
        }
        h.finish()
    }
}

impl HorosphericalImage for MemoizedImage {
    fn n(&self) -> usize {
        self.inner.n()
    }
    fn d(&self) -> usize {
        self.inner.d()
    }
    fn eval(&self, xi: &Horosphere) -> Result<f64> {
        // zonal images only see (t, |u|)
        let key = if self.inner.provenance() == Provenance::ExactZonal {
            let mut h = DefaultHasher::new();
            xi.t().to_bits().hash(&mut h);
            xi.u_norm().to_bits().hash(&mut h);
            h.finish()
        } else {
            Self::key(xi)
        };
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let v = self.inner.eval(xi)?;
        self.cache.entry(key).or_insert(v);
        Ok(v)
    }
    fn provenance(&self) -> Provenance {
        self.inner.provenance()
    }
    fn source(&self) -> Option<Arc<dyn ScalarField>> {
        self.inner.source()
    }
}

/// Records failures of inner integrals while an outer quadrature runs.
struct Track {
    ok: Cell<bool>,
    err: RefCell<Option<HoroError>>,
}

impl Track {
    fn new() -> Self {
        Track { ok: Cell::new(true), err: RefCell::new(None) }
    }

    fn val(&self, r: Result<Estimate>) -> f64 {
        match r {
            Ok(e) => {
                if !e.converged {
                    self.ok.set(false);
                }
                e.value
            }
            Err(e) => {
                self.err.borrow_mut().get_or_insert(e);
                0.0
            }
        }
    }

    fn plain(&self, r: Result<f64>) -> f64 {
        self.val(r.map(|v| Estimate { value: v, abs_error: 0.0, evals: 1, converged: true }))
    }

    fn finish(&self, outer: Estimate) -> Result<Estimate> {
        if let Some(e) = self.err.borrow_mut().take() {
            return Err(e);
        }
        Ok(Estimate { converged: outer.converged && self.ok.get(), ..outer })
    }
}

fn sum(a: Estimate, b: Estimate) -> Estimate {
    Estimate {
        value: a.value + b.value,
        abs_error: a.abs_error + b.abs_error,
        evals: a.evals + b.evals,
        converged: a.converged && b.converged,
    }
}

/// A fixed `r_x = n_v a_t` with `r_x x0 = x`, read off the horospherical chart.
pub fn transport(x: &HyperbolicPoint) -> LorentzElement {
    let n = x.dim();
    let c = x.coords();
    let t = -(c[n] - c[n - 1]).ln();
    let et = t.exp();
    let v: Vec<f64> = c[..n - 1].iter().map(|y| y * et).collect();
    make_n(&v).compose(&make_a(n, t))
}

fn is_origin(x: &HyperbolicPoint) -> bool {
    let n = x.dim();
    x.coords()[..n].iter().all(|c| c.abs() < 1e-14)
}

/// `c e^{-td/2} (I^{d/2}_- f0)(eta)`, `eta = cosh t + |u|^2 e^t / 2`: the transform of a
/// zonal field on `k a_t n_u xi0`.
pub fn forward_zonal(f0: &RadialProfile, t: f64, u_norm: f64, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    if d == 0 {
        return Err(HoroError::Contract("d must be at least 1".into()));
    }
    let eta = t.cosh() + 0.5 * u_norm * u_norm * t.exp();
    if !eta.is_finite() {
        // the horosphere has left every compact set
        return Ok(0.0);
    }
    let df = d as f64;
    let rl = rl_integral_minus(&Profile1D::from_radial(f0), eta, 0.5 * df, quad)?;
    Ok(zonal_constant(d) * (-0.5 * t * df).exp() * rl)
}

/// Quadratic form of `w -> [g n_w x0, p]`: returns `(A, a, w*)` with
/// `[g n_w x0, p] = A + (a/2)|w - w*|^2`.
fn horosphere_quadratic(xi: &Horosphere, p: &HyperbolicPoint) -> (f64, f64, Vec<f64>) {
    let n = xi.n();
    let d = xi.d();
    let q = xi.group_element().inverse().apply(p);
    let c = q.coords();
    let a = c[n] - c[n - 1];
    let pw = &c[n - 1 - d..n - 1];
    let pw2: f64 = pw.iter().map(|x| x * x).sum();
    let big_a = (c[n] - pw2 / (2.0 * a)).max(1.0);
    (big_a, a, pw.iter().map(|x| x / a).collect())
}

/// Transform of `f0([y, c])`: `c_d a^{-d/2} (I^{d/2}_- f0)(A)` with the quadratic data above.
pub fn forward_radial(center: &HyperbolicPoint, f0: &RadialProfile, xi: &Horosphere, quad: &QuadratureSpec) -> Result<f64> {
    let d = xi.d();
    let (big_a, a, _) = horosphere_quadratic(xi, center);
    if !(big_a.is_finite() && a.is_finite()) {
        return Ok(0.0);
    }
    let rl = rl_integral_minus(&Profile1D::from_radial(f0), big_a, 0.5 * d as f64, quad)?;
    Ok(zonal_constant(d) * a.powf(-0.5 * d as f64) * rl)
}

/// Nested adaptive integration of `f` over the box `center +- half`.
fn integrate_box<F: Fn(&[f64]) -> f64>(f: &F, center: &[f64], half: f64, quad: &QuadratureSpec) -> Estimate {
    fn level<F: Fn(&[f64]) -> f64>(
        f: &F,
        center: &[f64],
        half: f64,
        quad: &QuadratureSpec,
        j: usize,
        prefix: [f64; MAX_DIM],
        ok: &Cell<bool>,
    ) -> Estimate {
        let dims = center.len();
        let g = |x: f64| {
            let mut w = prefix;
            w[j] = x;
            if j + 1 == dims {
                f(&w[..dims])
            } else {
                let e = level(f, center, half, quad, j + 1, w, ok);
                if !e.converged {
                    ok.set(false);
                }
                e.value
            }
        };
        gauss_kronrod(g, center[j] - half, center[j] + half, 8, quad)
    }
    let ok = Cell::new(true);
    let e = level(f, center, half, quad, 0, [0.0; MAX_DIM], &ok);
    Estimate { converged: e.converged && ok.get(), ..e }
}

/// `int_{R^d} f(k a_t n_u n_w x0) dw` by nested adaptive quadrature.
///
/// The box is centred where the horosphere comes closest to the origin; its
/// half-width is the exact support bound for compactly supported fields and
/// `quad.truncation_radius` otherwise.
pub fn forward_general(f: &dyn ScalarField, xi: &Horosphere, quad: &QuadratureSpec) -> Result<f64> {
    forward_general_est(f, xi, quad)?.into_result()
}

fn forward_general_est(f: &dyn ScalarField, xi: &Horosphere, quad: &QuadratureSpec) -> Result<Estimate> {
    let n = xi.n();
    let d = xi.d();
    if f.dim() != n {
        return Err(HoroError::Contract("field and horosphere dimensions differ".into()));
    }
    quad.validate()?;
    let (big_a, a, center) = horosphere_quadratic(xi, &HyperbolicPoint::origin(n));
    let half = match f.support_radius() {
        Some(r0) => {
            let room = r0.cosh() - big_a;
            if room <= 0.0 {
                return Ok(Estimate::zero());
            }
            (2.0 * room / a).sqrt().min(quad.truncation_radius)
        }
        None => {
            if let Some(mu) = f.decay_mu() {
                if mu <= 0.5 * d as f64 {
                    return Err(HoroError::Divergence { value: f64::INFINITY, bound_reached: false });
                }
            }
            quad.truncation_radius
        }
    };
    let g = |w: &[f64]| {
        let mut out = [0.0; MAX_DIM + 1];
        xi.point_into(w, &mut out[..n + 1]);
        f.eval(&out[..n + 1])
    };
    // the inner box scales like e^{-t}, the integrand is concentrated near `center`
    let box_half = if f.support_radius().is_some() { half } else { half.min(quad.truncation_radius / a.sqrt().max(1e-3)) };
    Ok(integrate_box(&g, &center, box_half, quad))
}

/// Transform of `f` on `xi`, through the fastest exact route available.
pub fn forward(f: &dyn ScalarField, xi: &Horosphere, quad: &QuadratureSpec) -> Result<f64> {
    if let Some(f0) = f.zonal_profile() {
        // zonal values depend on (t, |u|) only
        return forward_zonal(&f0, xi.t(), xi.u_norm(), xi.d(), quad);
    }
    if let Some(r) = f.radial_structure() {
        return forward_radial(&r.center, &r.profile, xi, quad);
    }
    forward_general(f, xi, quad)
}

/// The `s` beyond which `(M_x f)(s)` vanishes, when `f` has compact support.
pub fn mean_support_end(f: &dyn ScalarField, x: &HyperbolicPoint) -> Option<f64> {
    if let Some(r) = f.radial_structure() {
        let end = r.profile.support_end()?;
        let dist = geodesic_distance(x, &r.center).unwrap_or(0.0);
        return Some((end.max(1.0).acosh() + dist).cosh());
    }
    let r0 = f.support_radius()?;
    let dist = geodesic_distance(x, &HyperbolicPoint::origin(x.dim())).unwrap_or(0.0);
    Some((r0 + dist).cosh())
}

/// `(M_x f)(s)`: the normalized average of `f` over `{y : [x, y] = s}`.
///
/// Fields radial about a centre `c` reduce to one angle,
/// `[y, c] = cosh(r - R) + 2 sinh r sinh R sin^2(theta/2)`; other fields use a
/// product rule on `S^{n-1}` transported by [`transport`].
pub fn spherical_mean(f: &dyn ScalarField, x: &HyperbolicPoint, s: f64, quad: &QuadratureSpec) -> Result<f64> {
    spherical_mean_est(f, x, s, quad)?.into_result()
}

pub(crate) fn spherical_mean_est(
    f: &dyn ScalarField,
    x: &HyperbolicPoint,
    s: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let n = x.dim();
    if f.dim() != n {
        return Err(HoroError::Contract("field and point dimensions differ".into()));
    }
    if !(s >= 1.0) {
        return Err(HoroError::Contract(format!("sphere parameter s = {s} must be at least 1")));
    }
    let single = |v: f64| Estimate { value: v, abs_error: 0.0, evals: 1, converged: true };
    if s == 1.0 {
        return Ok(single(f.eval(x.coords())));
    }
    let r = s.acosh();
    let sh = (s * s - 1.0).sqrt();
    if let Some(rs) = f.radial_structure() {
        let big_r = geodesic_distance(x, &rs.center)?;
        if big_r < 1e-14 {
            return Ok(single(rs.profile.value(s)));
        }
        let shr = big_r.sinh();
        let base = (r - big_r).cosh();
        let mut theta_max = std::f64::consts::PI;
        if let Some(end) = rs.profile.support_end() {
            if base >= end {
                return Ok(Estimate::zero());
            }
            let q = (end - base) / (2.0 * sh * shr);
            if q < 1.0 {
                theta_max = 2.0 * q.sqrt().asin();
            }
        }
        let p = n as i32 - 2;
        let g = |th: f64| {
            let h = (0.5 * th).sin();
            rs.profile.value(base + 2.0 * sh * shr * h * h) * th.sin().powi(p)
        };
        let norm = std::f64::consts::PI.sqrt() * gamma((n as f64 - 1.0) / 2.0) / gamma(n as f64 / 2.0);
        let e = gauss_kronrod(g, 0.0, theta_max, 4, quad);
        return Ok(Estimate { value: e.value / norm, abs_error: e.abs_error / norm, ..e });
    }
    spherical_mean_general(f, x, s, default_order(n))
}

/// Product-rule spherical mean; the error estimate compares `order` with `order / 2`.
pub fn spherical_mean_general(f: &dyn ScalarField, x: &HyperbolicPoint, s: f64, order: usize) -> Result<Estimate> {
    let n = x.dim();
    let rx = transport(x);
    let ch = s;
    let sh = (s * s - 1.0).max(0.0).sqrt();
    let eval_rule = |rule: &SphereRule| {
        rule.average(|theta| {
            let mut y = [0.0; MAX_DIM + 1];
            for i in 0..n {
                y[i] = theta[i] * sh;
            }
            y[n] = ch;
            let mut out = [0.0; MAX_DIM + 1];
            rx.apply_into(&y[..n + 1], &mut out[..n + 1]);
            f.eval(&out[..n + 1])
        })
    };
    let fine = SphereRule::new(n, order);
    let coarse = SphereRule::new(n, order.div_ceil(2).max(2));
    let v = eval_rule(&fine);
    let err = (v - eval_rule(&coarse)).abs();
    Ok(Estimate { value: v, abs_error: err, evals: fine.len() + coarse.len(), converged: err <= 1e-4 * v.abs().max(1e-6) })
}

/// Route used to realize K-averages over horospheres.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum KRoute {
    /// Source-backed images use the spherical-mean route, others the Haar rule.
    #[default]
    Auto,
    /// `int_{R^d} (M_x f)(cosh t + |w|^2 e^t / 2) dw`; needs the source field.
    SphericalMean,
    /// Product quadrature over `SO(n)` with `order` nodes per angle.
    Haar { order: usize },
}

/// Nodes per angle of the default Haar rule.
pub fn default_haar_order(n: usize) -> usize {
    match n {
        2 => 64,
        3 => 32,
        4 => 12,
        _ => 5,
    }
}

/// `phi^_x(t) = int_K phi(r_x k a_t xi0) dk` with `dk` of mass 1.
pub fn mean_value(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    mean_value_with(phi, x, t, KRoute::Auto, quad)
}

pub fn mean_value_with(
    phi: &dyn HorosphericalImage,
    x: &HyperbolicPoint,
    t: f64,
    route: KRoute,
    quad: &QuadratureSpec,
) -> Result<f64> {
    mean_value_est(phi, x, t, route, quad)?.into_result()
}

fn mean_value_est(
    phi: &dyn HorosphericalImage,
    x: &HyperbolicPoint,
    t: f64,
    route: KRoute,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let n = phi.n();
    let d = phi.d();
    if x.dim() != n {
        return Err(HoroError::Contract("point and image dimensions differ".into()));
    }
    if phi.provenance() == Provenance::ExactZonal && is_origin(x) {
        let xi = Horosphere::standard(n, d, t, vec![0.0; n - 1 - d])?;
        let v = phi.eval(&xi)?;
        return Ok(Estimate { value: v, abs_error: 0.0, evals: 1, converged: true });
    }
    let route = match route {
        KRoute::Auto if phi.source().is_some() => KRoute::SphericalMean,
        KRoute::Auto => KRoute::Haar { order: default_haar_order(n) },
        r => r,
    };
    match route {
        KRoute::SphericalMean => {
            let f = phi
                .source()
                .ok_or_else(|| HoroError::Contract("the spherical-mean route needs the source field".into()))?;
            mean_value_fubini(f.as_ref(), d, x, t, quad)
        }
        KRoute::Haar { order } => mean_value_haar(phi, x, t, order),
        KRoute::Auto => unreachable!(),
    }
}

/// `sigma_{d-1} int_0^inf rho^{d-1} (M_x f)(cosh t + rho^2 e^t / 2) drho`.
fn mean_value_fubini(f: &dyn ScalarField, d: usize, x: &HyperbolicPoint, t: f64, quad: &QuadratureSpec) -> Result<Estimate> {
    let ch = t.cosh();
    let et = t.exp();
    let end = mean_support_end(f, x);
    let upper = match end {
        Some(e) if e <= ch => return Ok(Estimate::zero()),
        Some(e) => (2.0 * (e - ch) / et).sqrt(),
        None => f64::INFINITY,
    };
    let track = Track::new();
    let p = d as i32 - 1;
    let g = |rho: f64| {
        let s = ch + 0.5 * rho * rho * et;
        let m = track.val(spherical_mean_est(f, x, s, quad));
        if p == 0 {
            m
        } else {
            m * rho.powi(p)
        }
    };
    let e = integrate_range(g, 0.0, upper, quad);
    let e = track.finish(e)?;
    let c = sphere_area(d - 1);
    Ok(Estimate { value: c * e.value, abs_error: c * e.abs_error, ..e })
}

/// Haar product rule on `SO(n)` modulo the stabilizer of `xi0`:
/// `sum_k w_k phi(horosphere of r_x k a_t)`.
pub fn mean_value_haar(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, t: f64, order: usize) -> Result<Estimate> {
    let n = phi.n();
    let d = phi.d();
    let rx = transport(x);
    let at = make_a(n, t);
    let rule = RotationRule::coset(n, d, order);
    // compensated sum; the rule has tens of thousands of nodes
    let (mut total, mut comp) = (0.0f64, 0.0f64);
    for (k, w) in rule.rotations.iter().zip(&rule.weights) {
        let g = rx.compose(&make_k(k)).compose(&at);
        let xi = horosphere_from_group(&g, d)?;
        let term = w * phi.eval(&xi)?;
        let next = total + term;
        comp += if total.abs() >= term.abs() { (total - next) + term } else { (term - next) + total };
        total = next;
    }
    Ok(Estimate { value: total + comp, abs_error: 0.0, evals: rule.len(), converged: true })
}

/// `phi^(x)`: the average of `phi` over the `d`-horospheres through `x`.
pub fn check_operator(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    mean_value(phi, x, 0.0, quad)
}

/// Radial kernels of the dual operators, written in `tau = cosh t - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DualKernel {
    /// `tau^{alpha/2 - 1}`, from `h_alpha`.
    Power(f64),
    /// `tau^{alpha/2 - 1} log tau`, from the logarithmic kernel.
    LogPower(f64),
}

impl DualKernel {
    fn eval(&self, tau: f64) -> f64 {
        match *self {
            DualKernel::Power(a) => tau.powf(0.5 * a - 1.0),
            DualKernel::LogPower(a) => tau.powf(0.5 * a - 1.0) * tau.ln(),
        }
    }
}

/// `int_{K x R} phi(r_x k a_t xi0) k(t) dk dt` for the kernel `e^{td/2} |sinh t| K(cosh t - 1)`.
///
/// Splitting at `t = 0` and substituting `tau = cosh t - 1` gives
/// `int_0^inf K(tau) [e^{dt/2} phi^_x(t) + e^{-dt/2} phi^_x(-t)] dtau`.
pub fn weighted_dual(
    phi: &dyn HorosphericalImage,
    x: &HyperbolicPoint,
    kernel: DualKernel,
    route: KRoute,
    quad: &QuadratureSpec,
) -> Result<f64> {
    weighted_dual_est(phi, x, kernel, route, quad)?.into_result()
}

fn weighted_dual_est(
    phi: &dyn HorosphericalImage,
    x: &HyperbolicPoint,
    kernel: DualKernel,
    route: KRoute,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let d = phi.d() as f64;
    let upper = match phi.source().and_then(|f| mean_support_end(f.as_ref(), x)) {
        Some(e) => e - 1.0,
        None => f64::INFINITY,
    };
    if upper <= 0.0 {
        return Ok(Estimate::zero());
    }
    let track = Track::new();
    let g = |tau: f64| {
        let t = (tau + (tau * (tau + 2.0)).sqrt()).ln_1p();
        let plus = track.val(mean_value_est(phi, x, t, route, quad));
        let minus = track.val(mean_value_est(phi, x, -t, route, quad));
        let b = (0.5 * d * t).exp() * plus + (-0.5 * d * t).exp() * minus;
        if b == 0.0 {
            0.0
        } else {
            kernel.eval(tau) * b
        }
    };
    let e = integrate_left_singular(g, upper, quad);
    track.finish(e)
}

/// `H*^alpha phi(x) = c_alpha int_{K x R} phi(r_x k a_t xi0) h_alpha(t) dk dt`.
pub fn hstar_alpha(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    let c = c_alpha(phi.n(), phi.d(), alpha)?;
    Ok(c * weighted_dual(phi, x, DualKernel::Power(alpha), KRoute::Auto, quad)?)
}

/// The `alpha = n - d` operator with the logarithmic kernel and constant `c_{n,d}`.
pub fn hstar_log(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    let (n, d) = (phi.n(), phi.d());
    let a = (n - d) as f64;
    Ok(c_log(n, d) * weighted_dual(phi, x, DualKernel::LogPower(a), KRoute::Auto, quad)?)
}

/// `int_{H^n} f`, through the radial profile when `f` is radial about a point.
pub fn field_integral(f: &dyn ScalarField, quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    if let Some(r) = f.radial_structure() {
        return radial_measure_integral(&r.profile, n, quad);
    }
    let o = HyperbolicPoint::origin(n);
    let upper = f.support_radius().unwrap_or(f64::INFINITY);
    let track = Track::new();
    let g = |r: f64| {
        let m = track.val(spherical_mean_est(f, &o, r.cosh(), quad));
        m * r.sinh().powi(n as i32 - 1)
    };
    let e = track.finish(integrate_range(g, 0.0, upper, quad))?;
    Ok(sphere_area(n - 1) * e.into_result()?)
}

/// `|int dt int du f^(k a_t n_u xi0) - int f|`; the `u` integral is absent when `d = n - 1`.
pub fn fubini_identity_residual(f: Arc<dyn ScalarField>, k: &Rotation, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    check_nd(n, d)?;
    let phi = ForwardImage::new(f.clone(), d, *quad)?;
    let p = n - 1 - d;
    let zonal = f.zonal_profile();
    let track = Track::new();
    let inner = |t: f64| -> Result<Estimate> {
        if p == 0 {
            let xi = Horosphere::new(n, d, k.clone(), t, vec![])?;
            let v = phi.eval(&xi)?;
            return Ok(Estimate { value: v, abs_error: 0.0, evals: 1, converged: true });
        }
        if let Some(f0) = &zonal {
            let tr = Track::new();
            let g = |rho: f64| tr.plain(forward_zonal(f0, t, rho, d, quad)) * rho.powi(p as i32 - 1);
            let e = tr.finish(integrate_range(g, 0.0, f64::INFINITY, quad))?;
            let c = sphere_area(p - 1);
            return Ok(Estimate { value: c * e.value, abs_error: c * e.abs_error, ..e });
        }
        let tr = Track::new();
        let g = |u: &[f64]| tr.plain(Horosphere::new(n, d, k.clone(), t, u.to_vec()).and_then(|xi| phi.eval(&xi)));
        let half = quad.truncation_radius * (-0.5 * t).exp().min(1.0);
        let e = integrate_box(&g, &vec![0.0; p], half, quad);
        tr.finish(e)
    };
    let g = |t: f64| track.val(inner(t));
    let gm = |t: f64| track.val(inner(-t));
    let e = sum(integrate_range(g, 0.0, f64::INFINITY, quad), integrate_range(gm, 0.0, f64::INFINITY, quad));
    let lhs = track.finish(e)?.into_result()?;
    let rhs = field_integral(f.as_ref(), quad)?;
    Ok((lhs - rhs).abs())
}

/// Both sides of the weighted identity for a zonal field:
/// `int e^{td/2}(cosh t - 1)^{alpha/2-1}|sinh t| int_K f^(k a_t xi0) dk dt` and
/// `c_1 int (x_{n+1}-1)^{(alpha+d-n)/2} (x_{n+1}+1)^{1-n/2} f(x) dx`.
pub fn weighted_zonal_identity_sides(f0: &RadialProfile, n: usize, d: usize, alpha: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    check_nd(n, d)?;
    if !(alpha > 0.0) {
        return Err(HoroError::Parameter("alpha must be positive".into()));
    }
    let df = d as f64;
    let track = Track::new();
    let g = |tau: f64| {
        let t = (tau + (tau * (tau + 2.0)).sqrt()).ln_1p();
        let plus = track.plain(forward_zonal(f0, t, 0.0, d, quad));
        let minus = track.plain(forward_zonal(f0, -t, 0.0, d, quad));
        let b = (0.5 * df * t).exp() * plus + (-0.5 * df * t).exp() * minus;
        if b == 0.0 {
            0.0
        } else {
            tau.powf(0.5 * alpha - 1.0) * b
        }
    };
    let upper = f0.support_end().map_or(f64::INFINITY, |e| e - 1.0);
    let lhs = track.finish(integrate_left_singular(g, upper, quad))?.into_result()?;
    let expo = 0.5 * (alpha + df) - 1.0;
    let h = |tau: f64| {
        let v = f0.value(1.0 + tau);
        if v == 0.0 {
            0.0
        } else {
            v * tau.powf(expo)
        }
    };
    let rhs_int = integrate_left_singular(h, upper, quad).into_result()?;
    let rhs = c1_weighted(n, d, alpha) * sphere_area(n - 1) * rhs_int;
    Ok((lhs, rhs))
}

/// `|LHS - RHS|` of the weighted zonal identity.
pub fn weighted_zonal_identity_residual(f: &dyn ScalarField, d: usize, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    let f0 = f
        .zonal_profile()
        .ok_or_else(|| HoroError::Contract("the weighted identity needs a zonal field".into()))?;
    let (l, r) = weighted_zonal_identity_sides(&f0, f.dim(), d, alpha, quad)?;
    Ok((l - r).abs())
}

/// Truncated `L^p` norm over `{x_{n+1} <= cutoff}` and truncated zonal transform at
/// `eta = 2` (integral up to `s = cutoff`) for the profile `f0`.
pub fn sharpness_probe_profile(
    f0: &RadialProfile,
    p: f64,
    n: usize,
    d: usize,
    cutoff: f64,
    quad: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_nd(n, d)?;
    if !(p >= 1.0) || !(cutoff > std::f64::consts::E) {
        return Err(HoroError::Parameter("need p >= 1 and cutoff > e".into()));
    }
    let expo = 0.5 * n as f64 - 1.0;
    // (1, 2] near the weight and kernel endpoints by tanh-sinh, the rest in log s
    let lp_head = tanh_sinh(|s| f0.value(s).abs().powf(p) * (s * s - 1.0).powf(expo), 1.0, 2.0, quad);
    let lp_tail = gauss_kronrod(
        |y| {
            let s = y.exp();
            f0.value(s).abs().powf(p) * (s * s - 1.0).powf(expo) * s
        },
        2f64.ln(),
        cutoff.ln(),
        16,
        quad,
    );
    let lp = (sphere_area(n - 1) * sum(lp_head, lp_tail).into_result()?).powf(1.0 / p);
    let eta = 2.0;
    let df = d as f64;
    let kern = |s: f64| f0.value(s) * (s - eta).powf(0.5 * df - 1.0);
    let tr_head = tanh_sinh(kern, eta, 3.0, quad);
    let tr_tail = gauss_kronrod(|y| kern(y.exp()) * y.exp(), 3f64.ln(), cutoff.ln(), 16, quad);
    let tr = zonal_constant(d) * sum(tr_head, tr_tail).into_result()? / gamma(0.5 * df);
    Ok((lp, tr))
}

/// [`sharpness_probe_profile`] for the extremal profile of exponent `p`.
pub fn sharpness_probe(p: f64, n: usize, d: usize, cutoff: f64, quad: &QuadratureSpec) -> Result<(f64, f64)> {
    sharpness_probe_profile(&RadialProfile::sharpness(n, p), p, n, d, cutoff, quad)
}

/// `[y, c]` for the centre of a radial field, used by tests and diagnostics.
pub fn radial_argument(y: &HyperbolicPoint, c: &HyperbolicPoint) -> f64 {
    form(y.coords(), c.coords())
}
