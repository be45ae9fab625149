//! Right-sided Riemann–Liouville integrals `I^alpha_-` on `[1, inf)`, their inverses
//! `D^{d/2}_-`, and the Abel-type kernel with the extra `1/sqrt(r^2 - 1)` weight.

use std::fmt;
use std::sync::Arc;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::error::{HoroError, Result};
use crate::fields::RadialProfile;
use crate::quadrature::{integrate_left_singular, integrate_range, tanh_sinh, QuadratureSpec};
use crate::special::{gamma, sphere_area};

type Fn1 = dyn Fn(f64) -> f64 + Send + Sync;

#[derive(Clone)]
enum Kind {
    Analytic(Arc<Fn1>),
    Sampled { grid: Arc<Vec<f64>>, values: Arc<Vec<f64>>, degree: usize },
}

/// A function of one variable on `[domain_start, inf)`.
///
/// Either an analytic callable (differentiated by finite differences) or values
/// on a strictly increasing grid (interpolated and differentiated by local
/// polynomials of the given degree, zero beyond the last node).
#[derive(Clone)]
pub struct Profile1D {
    kind: Kind,
    domain_start: f64,
    support_end: Option<f64>,
    decay_mu: Option<f64>,
    step_scale: f64,
}

impl fmt::Debug for Profile1D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.kind {
            Kind::Analytic(_) => "analytic".to_string(),
            Kind::Sampled { grid, degree, .. } => format!("sampled({} nodes, degree {degree})", grid.len()),
        };
        f.debug_struct("Profile1D")
            .field("kind", &kind)
            .field("domain_start", &self.domain_start)
            .field("support_end", &self.support_end)
            .field("decay_mu", &self.decay_mu)
            .finish()
    }
}

impl Profile1D {
    pub fn analytic<F>(f: F, support_end: Option<f64>, decay_mu: Option<f64>) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Profile1D { kind: Kind::Analytic(Arc::new(f)), domain_start: 1.0, support_end, decay_mu, step_scale: 1.0 }
    }

    pub fn from_radial(p: &RadialProfile) -> Self {
        let q = p.clone();
        Self::analytic(move |s| q.value(s), p.support_end(), p.decay_mu())
    }

    pub fn zero() -> Self {
        Self::analytic(|_| 0.0, Some(1.0), None)
    }

    /// Samples on a strictly increasing grid; `degree` is the local interpolation degree.
    pub fn sampled(grid: Vec<f64>, values: Vec<f64>, degree: usize) -> Result<Self> {
        if grid.len() != values.len() || grid.len() < degree + 1 {
            return Err(HoroError::Contract("grid and values must match and exceed the degree".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(HoroError::Contract("grid must be strictly increasing".into()));
        }
        let start = grid[0];
        let end = *grid.last().unwrap();
        Ok(Profile1D {
            kind: Kind::Sampled { grid: Arc::new(grid), values: Arc::new(values), degree },
            domain_start: start,
            support_end: Some(end),
            decay_mu: None,
            step_scale: 1.0,
        })
    }

    /// Samples an analytic profile on `grid`.
    pub fn sample(&self, grid: Vec<f64>, degree: usize) -> Result<Self> {
        let values = grid.iter().map(|&s| self.value(s)).collect();
        Self::sampled(grid, values, degree)
    }

    pub fn with_domain_start(mut self, start: f64) -> Self {
        self.domain_start = start;
        self
    }

    /// Multiplies the default finite-difference steps; larger steps suit noisy
    /// callables such as values produced by quadrature.
    pub fn with_step_scale(mut self, scale: f64) -> Self {
        self.step_scale = scale;
        self
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }
    pub fn support_end(&self) -> Option<f64> {
        self.support_end
    }
    pub fn decay_mu(&self) -> Option<f64> {
        self.decay_mu
    }
    pub fn step_scale(&self) -> f64 {
        self.step_scale
    }
    pub fn is_analytic(&self) -> bool {
        matches!(self.kind, Kind::Analytic(_))
    }
    pub(crate) fn upper_limit(&self) -> f64 {
        self.support_end.unwrap_or(f64::INFINITY)
    }

    pub fn value(&self, s: f64) -> f64 {
        if let Some(end) = self.support_end {
            if s > end {
                return 0.0;
            }
        }
        match &self.kind {
            Kind::Analytic(f) => f(s),
            Kind::Sampled { grid, values, degree } => {
                let (lo, hi) = stencil_range(grid, s, *degree);
                let w = fornberg_weights(s, &grid[lo..hi], 0);
                w.iter().zip(&values[lo..hi]).map(|(a, b)| a * b).sum()
            }
        }
    }

    /// The `m`-th derivative at `s`.
    ///
    /// Analytic profiles use 4th-order finite differences, one-sided near
    /// `domain_start`; sampled profiles differentiate the local interpolant and
    /// need `degree >= m + 2`.
    pub fn derivative(&self, s: f64, m: usize) -> Result<f64> {
        if m == 0 {
            return Ok(self.value(s));
        }
        match &self.kind {
            Kind::Analytic(f) => {
                let h = default_step(m, s) * self.step_scale;
                Ok(fd_derivative(|x| f(x), s, m, h, self.domain_start))
            }
            Kind::Sampled { grid, values, degree } => {
                if *degree < m + 2 {
                    return Err(HoroError::Smoothness(format!(
                        "sampled profile of degree {degree} cannot supply derivative {m}"
                    )));
                }
                if s > *grid.last().unwrap() {
                    return Ok(0.0);
                }
                let (lo, hi) = stencil_range(grid, s, *degree);
                let w = fornberg_weights(s, &grid[lo..hi], m);
                Ok(w.iter().zip(&values[lo..hi]).map(|(a, b)| a * b).sum())
            }
        }
    }

    /// Caches values of an analytic profile.
    ///
    /// Arguments are rounded to 12 decimals before evaluation, so stencils whose
    /// nodes agree up to rounding share values.
    pub fn memoized(&self) -> Profile1D {
        let Kind::Analytic(f) = &self.kind else {
            return self.clone();
        };
        let f = f.clone();
        let cache: Arc<DashMap<i64, f64>> = Arc::new(DashMap::new());
        Profile1D {
            kind: Kind::Analytic(Arc::new(move |s| {
                let key = (s * 1e12).round() as i64;
                if let Some(v) = cache.get(&key) {
                    return *v;
                }
                let v = f(key as f64 * 1e-12);
                cache.insert(key, v);
                v
            })),
            ..self.clone()
        }
    }

    /// `x -> f(x) * g(x)` for an analytic multiplier, keeping support metadata.
    fn map_analytic<G>(&self, g: G) -> Profile1D
    where
        G: Fn(f64, &Profile1D) -> f64 + Send + Sync + 'static,
    {
        let me = self.clone();
        Profile1D {
            kind: Kind::Analytic(Arc::new(move |s| g(s, &me))),
            domain_start: self.domain_start,
            support_end: self.support_end,
            decay_mu: self.decay_mu,
            step_scale: self.step_scale,
        }
    }
}

/// Grid indices `[lo, hi)` of the `degree + 1` nodes nearest `s`.
fn stencil_range(grid: &[f64], s: f64, degree: usize) -> (usize, usize) {
    let k = degree + 1;
    let n = grid.len();
    let pos = grid.partition_point(|&g| g < s);
    let lo = pos.saturating_sub(k / 2).min(n - k);
    (lo, lo + k)
}

/// Finite-difference weights for the `m`-th derivative at `x0` on arbitrary nodes (Fornberg).
pub fn fornberg_weights(x0: f64, nodes: &[f64], m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Default step for the `m`-th derivative: `max(1e-5, 1e-4 s)` for `m = 1`, widened
/// for higher orders so rounding stays below truncation.
pub fn default_step(m: usize, s: f64) -> f64 {
    let base = (1e-4 * s.abs()).max(1e-5);
    match m {
        0 | 1 => base,
        2 => 10.0 * base,
        3 => 50.0 * base,
        _ => 100.0 * base,
    }
}

/// 4th-order finite-difference `m`-th derivative of `f` at `s` with step `h`,
/// never sampling below `lo`.
pub fn fd_derivative<F: Fn(f64) -> f64>(f: F, s: f64, m: usize, h: f64, lo: f64) -> f64 {
    let half = m.div_ceil(2) + 1;
    let mut h = h;
    let room = s - lo;
    if room < half as f64 * h && room >= 0.25 * half as f64 * h {
        h = room / half as f64;
    }
    let nodes: Vec<f64> = if s - half as f64 * h >= lo {
        (-(half as i64)..=half as i64).map(|j| s + j as f64 * h).collect()
    } else {
        // one-sided stencil with m + 4 nodes keeps 4th order; its weights are
        // larger, so the step is widened to hold rounding down
        h *= 1.0 + 0.5 * m as f64;
        let start = (s - lo).max(0.0);
        let back = (start / h).floor().min(2.0) as i64;
        (-back..(m as i64 + 4 - back)).map(|j| s + j as f64 * h).collect()
    };
    let w = fornberg_weights(s, &nodes, m);
    w.iter().zip(&nodes).map(|(wi, x)| wi * f(*x)).sum()
}

/// `(I^alpha_- psi)(r) = Gamma(alpha)^{-1} int_r^inf psi(s) (s - r)^{alpha-1} ds`.
///
/// For `alpha < 1` the substitution `s - r = sigma^2` removes the kernel singularity.
pub fn rl_integral_minus(psi: &Profile1D, r: f64, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(HoroError::Parameter(format!("fractional order {alpha} must be positive")));
    }
    if r < psi.domain_start() - 1e-12 {
        return Err(HoroError::Contract(format!("r = {r} below the profile domain")));
    }
    let end = psi.upper_limit();
    if end.is_infinite() {
        if let Some(mu) = psi.decay_mu() {
            if mu <= alpha {
                return Err(HoroError::Divergence { value: f64::INFINITY, bound_reached: true });
            }
        }
    }
    if end <= r {
        return Ok(0.0);
    }
    let span = end - r;
    let est = if alpha < 1.0 {
        let p = 2.0 * alpha - 1.0;
        let g = |sig: f64| {
            let v = psi.value(r + sig * sig);
            if v == 0.0 {
                0.0
            } else if p == 0.0 {
                2.0 * v
            } else {
                2.0 * v * sig.powf(p)
            }
        };
        if p >= 0.0 {
            integrate_range(g, 0.0, span.sqrt(), quad)
        } else {
            integrate_left_singular(g, span.sqrt(), quad)
        }
    } else {
        let p = alpha - 1.0;
        let g = |tau: f64| {
            let v = psi.value(r + tau);
            if v == 0.0 || p == 0.0 {
                v
            } else {
                v * tau.powf(p)
            }
        };
        if p.fract() == 0.0 {
            integrate_range(g, 0.0, span, quad)
        } else {
            integrate_left_singular(g, span, quad)
        }
    };
    Ok(est.into_result()? / gamma(alpha))
}

/// `2^{d/2} sigma_{d-1} int_1^s phi(r) (r^2 - 1)^{-1/2} (s - r)^{d/2-1} dr`.
///
/// With `r = 1 + (s - 1) sin^2 theta` both endpoint factors disappear and the
/// kernel becomes `2 (s - 1)^{(d-1)/2} cos^{d-1} theta / sqrt(r + 1)`.
pub fn abel_forward_sqrt(phi: &Profile1D, s: f64, d: usize, quad: &QuadratureSpec) -> Result<f64> {
    if d == 0 {
        return Err(HoroError::Contract("d must be at least 1".into()));
    }
    if !(s > 1.0) {
        return Err(HoroError::Contract(format!("s = {s} must exceed 1")));
    }
    let ds = s - 1.0;
    let g = |th: f64| {
        let (sn, cs) = th.sin_cos();
        let r = 1.0 + ds * sn * sn;
        let v = phi.value(r);
        if v == 0.0 {
            0.0
        } else {
            v * cs.powi(d as i32 - 1) / (r + 1.0).sqrt()
        }
    };
    let est = tanh_sinh(g, 0.0, std::f64::consts::FRAC_PI_2, quad);
    let pre = 2f64.powf(0.5 * d as f64) * sphere_area(d - 1) * 2.0 * ds.powf(0.5 * (d as f64 - 1.0));
    Ok(pre * est.into_result()?)
}

/// Which of the two equivalent odd-order formulas to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OddForm {
    /// `(-1)^m s^{1/2} d/ds [s^{1/2} I^{1/2}_- (s^{-1} psi^{(m-1)})]`.
    #[default]
    Standard,
    /// `(-1)^m s^{1/2} (d/ds)^m [s^{m-1/2} I^{1/2}_- (s^{-m} psi)]`.
    Alternate,
}

/// `D^{d/2}_- psi` at `s`.
///
/// Even `d = 2m`: `(-1)^m psi^{(m)}`. Odd `d = 2m - 1`: see [`OddForm`].
pub fn frac_derivative_minus(psi: &Profile1D, s: f64, d: usize, form: OddForm, quad: &QuadratureSpec) -> Result<f64> {
    if d == 0 {
        return Err(HoroError::Contract("d must be at least 1".into()));
    }
    let sign = |m: usize| if m % 2 == 0 { 1.0 } else { -1.0 };
    if d % 2 == 0 {
        let m = d / 2;
        return Ok(sign(m) * psi.derivative(s, m)?);
    }
    let m = d.div_ceil(2);
    if !psi.is_analytic() {
        // the inner derivative must exist before anything is integrated
        psi.derivative(s, m.saturating_sub(1).max(1))?;
    }
    let lo = psi.domain_start();
    let q = *quad;
    let outer_order;
    let g: Box<dyn Fn(f64) -> f64 + Send + Sync> = match form {
        OddForm::Standard => {
            outer_order = 1;
            let inner = psi.map_analytic(move |x, p| {
                let v = if m == 1 { p.value(x) } else { p.derivative(x, m - 1).unwrap_or(f64::NAN) };
                v / x
            });
            Box::new(move |rho: f64| rho.sqrt() * rl_integral_minus(&inner, rho, 0.5, &q).unwrap_or(f64::NAN))
        }
        OddForm::Alternate => {
            outer_order = m;
            let inner = psi.map_analytic(move |x, p| p.value(x) * x.powi(-(m as i32)));
            Box::new(move |rho: f64| {
                rho.powf(m as f64 - 0.5) * rl_integral_minus(&inner, rho, 0.5, &q).unwrap_or(f64::NAN)
            })
        }
    };
    let h = default_step(outer_order, s) * psi.step_scale();
    let dv = fd_derivative(&g, s, outer_order, h, lo);
    if !dv.is_finite() {
        return Err(HoroError::Divergence { value: dv, bound_reached: false });
    }
    Ok(sign(m) * s.sqrt() * dv)
}
