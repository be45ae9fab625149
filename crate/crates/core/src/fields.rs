//! Test functions on `H^n`: radial profiles and scalar fields built from them.

use std::fmt;
use std::sync::Arc;

use crate::lorentz::{form, geodesic_distance, HyperbolicPoint, LorentzElement};

type ProfileFn = dyn Fn(f64) -> f64 + Send + Sync;

/// A one-variable profile `f0(s)`, `s >= 1`, with its support and decay metadata.
///
/// Used both for zonal functions `f(x) = f0(x_{n+1})` and for functions radial
/// about an arbitrary centre `c`, `f(x) = f0([x, c])`.
#[derive(Clone)]
pub struct RadialProfile {
    f: Arc<ProfileFn>,
    support_end: Option<f64>,
    decay_mu: Option<f64>,
    label: String,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("label", &self.label)
            .field("support_end", &self.support_end)
            .field("decay_mu", &self.decay_mu)
            .finish()
    }
}

impl RadialProfile {
    /// Wraps a closure. `support_end` is the `s` beyond which it vanishes;
    /// `decay_mu` is a `mu` with `f0(s) = O(s^{-mu})`.
    pub fn from_fn<F>(f: F, support_end: Option<f64>, decay_mu: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        RadialProfile { f: Arc::new(f), support_end, decay_mu, label: "custom".into() }
    }

    pub fn zero() -> Self {
        RadialProfile { f: Arc::new(|_| 0.0), support_end: Some(1.0), decay_mu: None, label: "zero".into() }
    }

    /// `e^{-lambda (s - 1)}`.
    pub fn exponential(lambda: f64) -> Self {
        RadialProfile {
            f: Arc::new(move |s| (-lambda * (s - 1.0)).exp()),
            support_end: None,
            decay_mu: Some(f64::INFINITY),
            label: format!("zonal-exp:{lambda}"),
        }
    }

    /// `e^{-lambda s}`.
    pub fn exponential_unshifted(lambda: f64) -> Self {
        RadialProfile {
            f: Arc::new(move |s| (-lambda * s).exp()),
            support_end: None,
            decay_mu: Some(f64::INFINITY),
            label: format!("exp-unshifted:{lambda}"),
        }
    }

    /// Smooth bump `height * exp(1 - 1 / (1 - q^2))`, `q = (s - 1) / width`, supported on `[1, 1 + width]`.
    pub fn bump(width: f64, height: f64) -> Self {
        RadialProfile {
            f: Arc::new(move |s| {
                let q = (s - 1.0) / width;
                if q.abs() >= 1.0 {
                    0.0
                } else {
                    height * (1.0 - 1.0 / (1.0 - q * q)).exp()
                }
            }),
            support_end: Some(1.0 + width),
            decay_mu: None,
            label: format!("bump:{width}"),
        }
    }

    /// The borderline `L^p` function `(s^2-1)^{(1-n/2)/p} / ((s+1)^{1/p} log(s+1))`.
    pub fn sharpness(n: usize, p: f64) -> Self {
        let a = (1.0 - 0.5 * n as f64) / p;
        RadialProfile {
            f: Arc::new(move |s| {
                if s <= 1.0 {
                    return 0.0;
                }
                (s * s - 1.0).powf(a) / ((s + 1.0).powf(1.0 / p) * (s + 1.0).ln())
            }),
            support_end: None,
            decay_mu: Some(2.0 * (0.5 * n as f64 - 1.0) / p),
            label: format!("sharpness:{p}"),
        }
    }

    /// Linear combination `sum c_i f_i`.
    pub fn combine(terms: Vec<(f64, RadialProfile)>) -> Self {
        let support_end = terms
            .iter()
            .map(|(_, p)| p.support_end)
            .try_fold(1.0f64, |acc, s| s.map(|s| acc.max(s)));
        let decay_mu = terms
            .iter()
            .map(|(_, p)| p.support_end.map(|_| f64::INFINITY).or(p.decay_mu))
            .try_fold(f64::INFINITY, |acc, m| m.map(|m| acc.min(m)));
        let label = terms.iter().map(|(c, p)| format!("{c}*{}", p.label)).collect::<Vec<_>>().join("+");
        RadialProfile {
            f: Arc::new(move |s| terms.iter().map(|(c, p)| c * p.value(s)).sum()),
            support_end,
            decay_mu: if support_end.is_some() { None } else { decay_mu },
            label,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        if let Some(end) = self.support_end {
            if s >= end {
                return 0.0;
            }
        }
        (self.f)(s)
    }

    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }

    pub fn decay_mu(&self) -> Option<f64> {
        if self.support_end.is_some() {
            Some(f64::INFINITY)
        } else {
            self.decay_mu
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A function `f(y) = f0([y, c])` radial about the centre `c`.
#[derive(Debug, Clone)]
pub struct RadialStructure {
    pub center: HyperbolicPoint,
    pub profile: RadialProfile,
}

/// A real function on `H^n`.
///
/// `eval` receives the `n + 1` ambient coordinates of a point on the upper sheet.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    fn eval(&self, x: &[f64]) -> f64;

    /// Geodesic radius about the origin outside of which the field vanishes.
    fn support_radius(&self) -> Option<f64> {
        None
    }

    /// `mu` with `f(x) = O(x_{n+1}^{-mu})`, when known.
    fn decay_mu(&self) -> Option<f64> {
        None
    }

    /// Centre and profile when the field is radial about a point.
    fn radial_structure(&self) -> Option<RadialStructure> {
        None
    }

    /// The profile when the field is zonal (radial about the origin).
    fn zonal_profile(&self) -> Option<RadialProfile> {
        let r = self.radial_structure()?;
        let n = self.dim();
        let c = r.center.coords();
        if c[..n].iter().all(|x| x.abs() < 1e-14) {
            Some(r.profile)
        } else {
            None
        }
    }
}

/// `f(y) = f0([y, c])`; zonal when `c` is the origin.
#[derive(Debug, Clone)]
pub struct RadialField {
    n: usize,
    center: HyperbolicPoint,
    profile: RadialProfile,
    zonal: bool,
}

impl RadialField {
    pub fn zonal(n: usize, profile: RadialProfile) -> Self {
        RadialField { n, center: HyperbolicPoint::origin(n), profile, zonal: true }
    }

    pub fn centered(center: HyperbolicPoint, profile: RadialProfile) -> Self {
        let n = center.dim();
        let zonal = center.coords()[..n].iter().all(|x| *x == 0.0);
        RadialField { n, center, profile, zonal }
    }

    pub fn profile(&self) -> &RadialProfile {
        &self.profile
    }

    pub fn center(&self) -> &HyperbolicPoint {
        &self.center
    }
}

impl ScalarField for RadialField {
    fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn eval(&self, x: &[f64]) -> f64 {
        if self.zonal {
            self.profile.value(x[self.n])
        } else {
            self.profile.value(form(x, self.center.coords()))
        }
    }

    fn support_radius(&self) -> Option<f64> {
        let end = self.profile.support_end()?;
        let offset = geodesic_distance(&self.center, &HyperbolicPoint::origin(self.n)).unwrap_or(0.0);
        Some(end.max(1.0).acosh() + offset)
    }

    fn decay_mu(&self) -> Option<f64> {
        self.profile.decay_mu()
    }

    fn radial_structure(&self) -> Option<RadialStructure> {
        Some(RadialStructure { center: self.center.clone(), profile: self.profile.clone() })
    }
}

type FieldFn = dyn Fn(&[f64]) -> f64 + Send + Sync;

/// A field given by an arbitrary closure, with no structure the fast paths can use.
#[derive(Clone)]
pub struct FnField {
    n: usize,
    f: Arc<FieldFn>,
    support_radius: Option<f64>,
    decay_mu: Option<f64>,
}

impl FnField {
    pub fn new<F>(n: usize, f: F, support_radius: Option<f64>, decay_mu: Option<f64>) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        FnField { n, f: Arc::new(f), support_radius, decay_mu }
    }

    /// Hides the radial structure of `field`, forcing the general quadrature routes.
    pub fn opaque(field: Arc<dyn ScalarField>) -> Self {
        let n = field.dim();
        let support_radius = field.support_radius();
        let decay_mu = field.decay_mu();
        FnField { n, f: Arc::new(move |x| field.eval(x)), support_radius, decay_mu }
    }
}

impl ScalarField for FnField {
    fn dim(&self) -> usize {
        self.n
    }
    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
    fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }
    fn decay_mu(&self) -> Option<f64> {
        self.decay_mu
    }
}

/// `f o g` for a Lorentz element `g`.
#[derive(Clone)]
pub struct TransformedField {
    inner: Arc<dyn ScalarField>,
    g: LorentzElement,
    structure: Option<RadialStructure>,
    support_radius: Option<f64>,
}

impl TransformedField {
    pub fn new(inner: Arc<dyn ScalarField>, g: LorentzElement) -> Self {
        let n = inner.dim();
        let g_inv = g.inverse();
        // [g y, c] = [y, g^{-1} c]
        let structure = inner.radial_structure().map(|r| RadialStructure {
            center: g_inv.apply(&r.center),
            profile: r.profile,
        });
        let shift = geodesic_distance(&g_inv.origin_image(), &HyperbolicPoint::origin(n)).unwrap_or(0.0);
        let support_radius = inner.support_radius().map(|r| r + shift);
        TransformedField { inner, g, structure, support_radius }
    }
}

impl ScalarField for TransformedField {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn eval(&self, x: &[f64]) -> f64 {
        let mut buf = [0.0; crate::lorentz::MAX_DIM + 1];
        let m = x.len();
        self.g.apply_into(x, &mut buf[..m]);
        self.inner.eval(&buf[..m])
    }
    fn support_radius(&self) -> Option<f64> {
        self.support_radius
    }
    fn decay_mu(&self) -> Option<f64> {
        self.inner.decay_mu()
    }
    fn radial_structure(&self) -> Option<RadialStructure> {
        self.structure.clone()
    }
}

/// The zero field on `H^n`.
pub fn zero_field(n: usize) -> RadialField {
    RadialField::zonal(n, RadialProfile::zero())
}
