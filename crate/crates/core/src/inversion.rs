//! Potentials `Q^alpha`, the logarithmic `Q^n`, the operator `B`, radial Laplacian
//! polynomials, and the two reconstruction procedures.

use std::f64::consts::PI;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{even_d_constant, gamma_nd, gamma_nd_tilde, in_even_lattice, zeta, zeta_log, zonal_constant};
use crate::error::{HoroError, Result};
use crate::fields::ScalarField;
use crate::fractional::{fornberg_weights, frac_derivative_minus, OddForm, Profile1D};
use crate::horosphere::Horosphere;
use crate::lorentz::{hyperbolic_coords, HyperbolicPoint};
use crate::quadrature::{integrate_left_singular, integrate_range, QuadratureSpec};
use crate::special::sphere_area;
use crate::transform::{
    check_operator, hstar_alpha, hstar_log, mean_support_end, mean_value_with, spherical_mean_est, weighted_dual,
    DualKernel, HorosphericalImage, KRoute,
};

/// `Q^alpha` on `H^n` with its normalizing constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub n: usize,
    pub alpha: f64,
}

impl PotentialSpec {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        let p = PotentialSpec { n, alpha };
        p.zeta()?;
        Ok(p)
    }

    /// `alpha - n` in `{0, 2, 4, ...}`.
    pub fn excluded(&self) -> bool {
        in_even_lattice(self.alpha - self.n as f64)
    }

    pub fn zeta(&self) -> Result<f64> {
        zeta(self.n, self.alpha)
    }
}

/// Which potential-type operator to apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Potential {
    /// `Q^alpha`; `Q(0.0)` is the identity.
    Q(f64),
    /// `Q^n f = zeta'_n int f(y) log([x,y] - 1) ([x,y] + 1)^{1-n/2} dy`.
    QLog,
    /// `B f = zeta'_n int f(y) ([x,y] + 1)^{1-n/2} dy`.
    B,
}

/// The potential at `x`, as a one-dimensional integral of spherical means:
/// `zeta sigma_{n-1} int_0^inf tau^{alpha/2-1} (M_x f)(1 + tau) dtau` and its log and `B` variants.
pub fn potential(f: &dyn ScalarField, x: &HyperbolicPoint, which: Potential, quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    let (constant, expo, log) = match which {
        Potential::Q(a) if a == 0.0 => return Ok(f.eval(x.coords())),
        Potential::Q(a) => (zeta(n, a)?, 0.5 * a - 1.0, false),
        Potential::QLog => (zeta_log(n), 0.5 * n as f64 - 1.0, true),
        Potential::B => (zeta_log(n), 0.5 * n as f64 - 1.0, false),
    };
    let upper = match mean_support_end(f, x) {
        Some(e) => e - 1.0,
        None => f64::INFINITY,
    };
    if upper <= 0.0 {
        return Ok(0.0);
    }
    let mut failure = None;
    let ok = std::cell::Cell::new(true);
    let cell = std::cell::RefCell::new(&mut failure);
    let g = |tau: f64| {
        let m = match spherical_mean_est(f, x, 1.0 + tau, quad) {
            Ok(e) => {
                if !e.converged {
                    ok.set(false);
                }
                e.value
            }
            Err(e) => {
                cell.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        if m == 0.0 {
            return 0.0;
        }
        let k = if expo == 0.0 { 1.0 } else { tau.powf(expo) };
        if log {
            m * k * tau.ln()
        } else {
            m * k
        }
    };
    let est = integrate_left_singular(g, upper, quad);
    drop(cell);
    if let Some(e) = failure {
        return Err(e);
    }
    let v = constant * sphere_area(n - 1) * est.value;
    if !ok.get() || !est.converged {
        return Err(HoroError::Accuracy { estimate: v, error_bound: constant.abs() * est.abs_error });
    }
    Ok(v)
}

pub fn potential_q_alpha(f: &dyn ScalarField, x: &HyperbolicPoint, alpha: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(HoroError::Parameter(format!("alpha = {alpha} must be positive")));
    }
    potential(f, x, Potential::Q(alpha), quad)
}

pub fn potential_q_n_log(f: &dyn ScalarField, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    potential(f, x, Potential::QLog, quad)
}

pub fn operator_b(f: &dyn ScalarField, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    potential(f, x, Potential::B, quad)
}

/// `Phi(x) = gamma_{n,d} int f(y) ([x,y] + 1)^{1-n/2} dy`.
pub fn phi_term_direct(f: &dyn ScalarField, d: usize, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    Ok(gamma_nd(n, d) / zeta_log(n) * operator_b(f, x, quad)?)
}

/// `Phi(x)` from the image alone, `gamma~_{n,d} int phi(r_x k a_t xi0) h_{n-d}(t) dk dt`.
pub fn phi_term_dual(phi: &dyn HorosphericalImage, x: &HyperbolicPoint, quad: &QuadratureSpec) -> Result<f64> {
    let (n, d) = (phi.n(), phi.d());
    let k = DualKernel::Power((n - d) as f64);
    Ok(gamma_nd_tilde(n, d) * weighted_dual(phi, x, k, KRoute::Auto, quad)?)
}

/// The point at distance `acosh s` from the origin along `e_1`.
pub fn radial_probe(n: usize, s: f64) -> Result<HyperbolicPoint> {
    if !(s >= 1.0) {
        return Err(HoroError::Contract(format!("radial probe s = {s} must be at least 1")));
    }
    let mut theta = vec![0.0; n];
    theta[0] = 1.0;
    hyperbolic_coords(&theta, s.acosh())
}

fn lenient(r: Result<f64>) -> f64 {
    match r {
        Ok(v) => v,
        Err(HoroError::Accuracy { estimate, .. }) => estimate,
        Err(_) => f64::NAN,
    }
}

/// `s -> (P f)(x_s)` along the radial probe ray. Only meaningful for zonal `f`.
pub fn potential_profile(f: Arc<dyn ScalarField>, which: Potential, quad: QuadratureSpec) -> Profile1D {
    let n = f.dim();
    Profile1D::analytic(
        move |s| radial_probe(n, s).map_or(f64::NAN, |x| lenient(potential(f.as_ref(), &x, which, &quad))),
        None,
        None,
    )
}

/// `(s^2 - 1) F''(s) + n s F'(s)`, the Beltrami–Laplace operator on `F(x_{n+1})`.
pub fn beltrami_radial(f: &Profile1D, s: f64, n: usize) -> Result<f64> {
    let d2 = f.derivative(s, 2)?;
    let d1 = f.derivative(s, 1)?;
    Ok((s * s - 1.0) * d2 + n as f64 * s * d1)
}

/// Radial Laplacian by a 4th-order stencil of spacing `h`, one-sided near `lo`.
pub fn laplace_stencil<F: Fn(f64) -> f64>(f: &F, s: f64, n: usize, h: f64, lo: f64) -> f64 {
    let nodes: Vec<f64> = if s - 2.0 * h >= lo - 1e-14 {
        (-2..=2).map(|j| s + j as f64 * h).collect()
    } else {
        let back = ((s - lo) / h).floor().clamp(0.0, 2.0) as i64;
        (-back..6 - back).map(|j| s + j as f64 * h).collect()
    };
    let w1 = fornberg_weights(s, &nodes, 1);
    let w2 = fornberg_weights(s, &nodes, 2);
    let (a, b) = (s * s - 1.0, n as f64 * s);
    nodes.iter().zip(w1.iter().zip(&w2)).map(|(x, (u, v))| f(*x) * (a * v + b * u)).sum()
}

/// `sign * constant * prod_i [Delta_H + shifts_i]` on `H^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaplacePolynomial {
    pub n: usize,
    pub shifts: Vec<f64>,
    pub sign: f64,
    pub constant: f64,
}

impl LaplacePolynomial {
    /// `P_ell = (-1)^ell prod_{i=1}^{ell} [Delta_H + i(n-1-i)]`.
    pub fn p_ell(n: usize, ell: usize) -> Result<Self> {
        if ell == 0 {
            return Err(HoroError::Parameter("ell must be at least 1".into()));
        }
        let shifts = (1..=ell).map(|i| (i as f64) * (n as f64 - 1.0 - i as f64)).collect();
        let sign = if ell % 2 == 0 { 1.0 } else { -1.0 };
        Ok(LaplacePolynomial { n, shifts, sign, constant: 1.0 })
    }

    /// `c prod_{i=1}^{d/2} [Delta_H + i(n-1-i)]` of the even-`d` inversion.
    pub fn even_d(n: usize, d: usize) -> Result<Self> {
        if d == 0 || d % 2 == 1 || d >= n {
            return Err(HoroError::Parameter(format!("d = {d} must be even and below n = {n}")));
        }
        let shifts = (1..=d / 2).map(|i| (i as f64) * (n as f64 - 1.0 - i as f64)).collect();
        Ok(LaplacePolynomial { n, shifts, sign: 1.0, constant: even_d_constant(n, d) })
    }

    /// `D_alpha = -Delta_H - alpha(2n - 2 - alpha)/4`.
    pub fn d_alpha(n: usize, alpha: f64) -> Self {
        LaplacePolynomial { n, shifts: vec![alpha * (2.0 * n as f64 - 2.0 - alpha) / 4.0], sign: -1.0, constant: 1.0 }
    }

    /// `-Delta_H`.
    pub fn minus_laplacian(n: usize) -> Self {
        LaplacePolynomial { n, shifts: vec![0.0], sign: -1.0, constant: 1.0 }
    }

    pub fn degree(&self) -> usize {
        self.shifts.len()
    }

    /// The polynomial evaluated at an eigenvalue `lambda` of `Delta_H`.
    pub fn symbol(&self, lambda: f64) -> f64 {
        self.sign * self.constant * self.shifts.iter().map(|c| lambda + c).product::<f64>()
    }

    /// Default stencil spacing, `tol^{1/(2 ell + 4)}` for the quadrature tolerance `tol`.
    pub fn default_step(&self, quad: &QuadratureSpec) -> f64 {
        quad.rel_tolerance.powf(1.0 / (2.0 * self.degree() as f64 + 4.0)).clamp(1e-3, 0.1)
    }
}

/// Applies `p` radially to `f`, one factor at a time, each by [`laplace_stencil`] with spacing `h`.
pub fn apply_laplace_polynomial(p: &LaplacePolynomial, f: &Profile1D, h: f64) -> Result<Profile1D> {
    if !(h > 0.0) {
        return Err(HoroError::Parameter("stencil spacing must be positive".into()));
    }
    if !f.is_analytic() {
        // every factor needs a second derivative of the previous one
        f.derivative(f.domain_start() + h, 2 * p.degree())?;
    }
    let n = p.n;
    let lo = f.domain_start();
    let mut g = f.clone();
    for &c in &p.shifts {
        let prev = g.clone();
        g = Profile1D::analytic(
            move |s| laplace_stencil(&|x| prev.value(x), s, n, h, lo) + c * prev.value(s),
            None,
            None,
        )
        .with_domain_start(lo);
    }
    let k = p.sign * p.constant;
    let out = g.clone();
    Ok(Profile1D::analytic(move |s| k * out.value(s), None, None).with_domain_start(lo))
}

/// How the `s -> 1` limit of the mean-value inversion is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Extrapolation {
    #[default]
    Richardson,
    Linear,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanValueOptions {
    pub extrapolation: Extrapolation,
    /// First node offset: `s_j = 1 + 2^{-j} delta0`.
    pub delta0: f64,
    /// Last node index `J`.
    pub levels: usize,
    /// Accuracy target; extrapolants further apart than `10 * target` abort.
    pub target: f64,
    pub form: OddForm,
    pub route: KRoute,
}

impl Default for MeanValueOptions {
    fn default() -> Self {
        MeanValueOptions {
            extrapolation: Extrapolation::Richardson,
            delta0: 0.2,
            levels: 6,
            target: 1e-3,
            form: OddForm::Standard,
            route: KRoute::Auto,
        }
    }
}

/// Nodes, samples and extrapolants of one mean-value reconstruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanValueResult {
    pub value: f64,
    pub nodes: Vec<f64>,
    pub samples: Vec<f64>,
    pub extrapolants: Vec<f64>,
    pub extrapolation_error: f64,
}

/// `psi_x(r) = c^{-1} e^{td/2} phi^_x(t)` at `t = acosh r`.
pub fn mean_value_profile(phi: Arc<dyn HorosphericalImage>, x: HyperbolicPoint, route: KRoute, quad: QuadratureSpec) -> Profile1D {
    let d = phi.d();
    let c = zonal_constant(d);
    let source = phi.source();
    let support = source.as_ref().and_then(|f| mean_support_end(f.as_ref(), &x));
    let decay = source.as_ref().and_then(|f| f.decay_mu());
    Profile1D::analytic(
        move |r| {
            let t = r.max(1.0).acosh();
            let v = lenient(mean_value_with(phi.as_ref(), &x, t, route, &quad));
            (0.5 * d as f64 * t).exp() * v / c
        },
        support,
        decay,
    )
}

/// `f(x)` from `phi = f^`: `D^{d/2}_- psi_x` sampled at `s_j -> 1` and extrapolated.
pub fn invert_mean_value(
    phi: &Arc<dyn HorosphericalImage>,
    x: &HyperbolicPoint,
    opts: &MeanValueOptions,
    quad: &QuadratureSpec,
) -> Result<f64> {
    Ok(invert_mean_value_detailed(phi, x, opts, quad)?.value)
}

pub fn invert_mean_value_detailed(
    phi: &Arc<dyn HorosphericalImage>,
    x: &HyperbolicPoint,
    opts: &MeanValueOptions,
    quad: &QuadratureSpec,
) -> Result<MeanValueResult> {
    if x.dim() != phi.n() {
        return Err(HoroError::Contract("point and image dimensions differ".into()));
    }
    if !(opts.delta0 > 0.0) || opts.levels == 0 {
        return Err(HoroError::Parameter("need delta0 > 0 and at least one refinement level".into()));
    }
    let d = phi.d();
    let psi = mean_value_profile(phi.clone(), x.clone(), opts.route, *quad);
    let nodes: Vec<f64> = (0..=opts.levels).map(|j| 1.0 + opts.delta0 * 0.5f64.powi(j as i32)).collect();
    let samples = nodes
        .iter()
        .map(|&s| frac_derivative_minus(&psi, s, d, opts.form, quad))
        .collect::<Result<Vec<f64>>>()?;
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(HoroError::Unstable { diagnostics: format!("non-finite sample {bad} in {samples:?}") });
    }
    let extrapolants = match opts.extrapolation {
        Extrapolation::Richardson => richardson_extrapolants(&samples),
        Extrapolation::Linear => {
            let mut e = vec![samples[0]];
            e.extend(samples.windows(2).map(|w| 2.0 * w[1] - w[0]));
            e
        }
        Extrapolation::None => samples.clone(),
    };
    let k = extrapolants.len();
    let value = extrapolants[k - 1];
    // spread of the last three extrapolants; they can drift or oscillate near a support edge
    let tail = &extrapolants[k.saturating_sub(3)..];
    let err = tail.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)) - tail.iter().fold(f64::INFINITY, |m, &v| m.min(v));
    if err > 10.0 * opts.target {
        return Err(HoroError::Unstable {
            diagnostics: format!("extrapolants {extrapolants:?} from samples {samples:?} at s = {nodes:?}"),
        });
    }
    Ok(MeanValueResult { value, nodes, samples, extrapolants, extrapolation_error: err })
}

/// Richardson estimates of increasing order from nodes halving toward the limit.
///
/// Entry `k` is the order-`k` estimate built from the `k + 1` finest samples.
pub fn richardson_extrapolants(samples: &[f64]) -> Vec<f64> {
    let mut col = samples.to_vec();
    let mut out = vec![*col.last().unwrap()];
    for k in 1..samples.len() {
        let f = 2f64.powi(k as i32);
        col = col.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
        out.push(*col.last().unwrap());
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub quadrature: f64,
    pub differentiation: f64,
    pub extrapolation: f64,
}

impl ErrorBudget {
    pub fn total(&self) -> f64 {
        self.quadrature + self.differentiation + self.extrapolation
    }
}

/// Reconstructed and reference values at radial probes `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub probes: Vec<f64>,
    pub reconstructed: Vec<f64>,
    pub reference: Vec<f64>,
    pub sup_error: f64,
    pub budget: ErrorBudget,
}

impl ReconstructionReport {
    pub fn new(probes: Vec<f64>, reconstructed: Vec<f64>, reference: Vec<f64>, budget: ErrorBudget) -> Self {
        let sup_error = reconstructed
            .iter()
            .zip(&reference)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        ReconstructionReport { probes, reconstructed, reference, sup_error, budget }
    }
}

fn reference_values(phi: &dyn HorosphericalImage, probes: &[f64]) -> Result<Vec<f64>> {
    let n = phi.n();
    match phi.source() {
        Some(f) => probes.iter().map(|&s| radial_probe(n, s).map(|x| f.eval(x.coords()))).collect(),
        None => Ok(vec![f64::NAN; probes.len()]),
    }
}

fn check_probes(probes: &[f64]) -> Result<()> {
    if probes.is_empty() {
        return Err(HoroError::Contract("no probes".into()));
    }
    if let Some(s) = probes.iter().find(|s| !(**s >= 1.0)) {
        return Err(HoroError::Contract(format!("radial probe s = {s} must be at least 1")));
    }
    Ok(())
}

/// Applies `p` to `f` at the probes with spacings `h` and `2h`; the difference
/// (over 15, for a 4th-order stencil) is the differentiation budget.
fn apply_and_report(
    p: &LaplacePolynomial,
    f: &Profile1D,
    probes: &[f64],
    reference: Vec<f64>,
    extra: f64,
    quad: &QuadratureSpec,
) -> Result<ReconstructionReport> {
    let h = p.default_step(quad);
    let f = &f.memoized();
    let fine = apply_laplace_polynomial(p, f, h)?;
    let coarse = apply_laplace_polynomial(p, f, 2.0 * h)?;
    let pairs: Vec<(f64, f64, f64)> = probes
        .par_iter()
        .map(|&s| (fine.value(s) + extra, coarse.value(s) + extra, f.value(s)))
        .collect();
    if let Some(bad) = pairs.iter().find(|v| !v.0.is_finite()) {
        return Err(HoroError::Divergence { value: bad.0, bound_reached: false });
    }
    let diff = pairs.iter().map(|(a, b, _)| (a - b).abs() / 15.0).fold(0.0, f64::max);
    let fmax = pairs.iter().map(|v| v.2.abs()).fold(0.0, f64::max);
    let smax = probes.iter().fold(1.0f64, |m, s| m.max(*s));
    let amp = (8.0 * smax * smax / (h * h)).powi(p.degree() as i32) * p.constant.abs();
    let budget = ErrorBudget { quadrature: quad.rel_tolerance * fmax * amp, differentiation: diff, extrapolation: 0.0 };
    Ok(ReconstructionReport::new(probes.to_vec(), pairs.iter().map(|v| v.0).collect(), reference, budget))
}

/// `f = c P(Delta_H) phi^` for even `d`, on radial probes.
pub fn invert_poly_even_d(phi: &Arc<dyn HorosphericalImage>, probes: &[f64], quad: &QuadratureSpec) -> Result<ReconstructionReport> {
    check_probes(probes)?;
    let (n, d) = (phi.n(), phi.d());
    let p = LaplacePolynomial::even_d(n, d)?;
    let q = *quad;
    let ph = phi.clone();
    let check = Profile1D::analytic(
        move |s| radial_probe(n, s).map_or(f64::NAN, |x| lenient(check_operator(ph.as_ref(), &x, &q))),
        None,
        None,
    );
    apply_and_report(&p, &check, probes, reference_values(phi.as_ref(), probes)?, 0.0, quad)
}

/// The polynomial inversion: `P_ell(Delta_H) H*^{2 ell - d} phi` for odd `n`,
/// `-Delta_H H*^1 phi - (1/4 pi) int phi(a_t xi0) dt` for `n = 2`, and
/// `P_{n/2}(Delta_H) H*^{n-d} phi` with the logarithmic kernel for even `n >= 4`.
pub fn invert_poly_general(
    phi: &Arc<dyn HorosphericalImage>,
    ell: usize,
    probes: &[f64],
    quad: &QuadratureSpec,
) -> Result<ReconstructionReport> {
    check_probes(probes)?;
    let (n, d) = (phi.n(), phi.d());
    let q = *quad;
    let ph = phi.clone();
    let reference = reference_values(phi.as_ref(), probes)?;
    if n % 2 == 1 {
        if 2 * ell < d {
            return Err(HoroError::Parameter(format!("ell = {ell} must be at least d/2 = {}", d as f64 / 2.0)));
        }
        if 2 * ell == d {
            return invert_poly_even_d(phi, probes, quad);
        }
        let alpha = (2 * ell - d) as f64;
        let p = LaplacePolynomial::p_ell(n, ell)?;
        let hs = Profile1D::analytic(
            move |s| radial_probe(n, s).map_or(f64::NAN, |x| lenient(hstar_alpha(ph.as_ref(), &x, alpha, &q))),
            None,
            None,
        );
        return apply_and_report(&p, &hs, probes, reference, 0.0, quad);
    }
    let hs = Profile1D::analytic(
        move |s| radial_probe(n, s).map_or(f64::NAN, |x| lenient(hstar_log(ph.as_ref(), &x, &q))),
        None,
        None,
    );
    if n == 2 {
        if ell != 1 {
            return Err(HoroError::Parameter("n = 2 admits only ell = 1".into()));
        }
        // -Delta_H Q^2 f = f + (1/4 pi) int f with the negative zeta'_2
        let correction = -horocycle_line_integral(phi.as_ref(), quad)? / (4.0 * PI);
        return apply_and_report(&LaplacePolynomial::minus_laplacian(2), &hs, probes, reference, correction, quad);
    }
    if ell != n / 2 {
        return Err(HoroError::Parameter(format!("even n = {n} requires ell = n/2 = {}", n / 2)));
    }
    apply_and_report(&LaplacePolynomial::p_ell(n, n / 2)?, &hs, probes, reference, 0.0, quad)
}

/// `int_R phi(a_t xi0) dt`.
pub fn horocycle_line_integral(phi: &dyn HorosphericalImage, quad: &QuadratureSpec) -> Result<f64> {
    let (n, d) = (phi.n(), phi.d());
    let u = vec![0.0; n - 1 - d];
    let g = |t: f64| Horosphere::standard(n, d, t, u.clone()).map_or(f64::NAN, |xi| lenient(phi.eval(&xi)));
    let a = integrate_range(g, 0.0, f64::INFINITY, quad).into_result()?;
    let b = integrate_range(|t| g(-t), 0.0, f64::INFINITY, quad).into_result()?;
    Ok(a + b)
}

fn sup_residual<F: Fn(f64) -> f64 + Sync>(probes: &[f64], r: F) -> Result<f64> {
    check_probes(probes)?;
    let v: Vec<f64> = probes.par_iter().map(|&s| r(s)).collect();
    if let Some(bad) = v.iter().find(|x| !x.is_finite()) {
        return Err(HoroError::Divergence { value: *bad, bound_reached: false });
    }
    Ok(v.into_iter().fold(0.0, f64::max))
}

/// `sup_probes |D_alpha Q^alpha f - Q^{alpha-2} f|` for zonal `f`, with `Q^0 f = f`.
pub fn d_alpha_recursion_residual(f: Arc<dyn ScalarField>, alpha: f64, probes: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    if !(alpha >= 2.0) {
        return Err(HoroError::Parameter("alpha must be at least 2".into()));
    }
    let p = LaplacePolynomial::d_alpha(n, alpha);
    let lhs = apply_laplace_polynomial(&p, &potential_profile(f.clone(), Potential::Q(alpha), *quad).memoized(), p.default_step(quad))?;
    let rhs = potential_profile(f, Potential::Q(alpha - 2.0), *quad);
    sup_residual(probes, |s| (lhs.value(s) - rhs.value(s)).abs())
}

/// `sup |D_n Q^n f - Q^{n-2} f + B f|` with the logarithmic `Q^n`.
///
/// With `zeta'_n < 0` the residue of `zeta_{n,alpha}` at `alpha = n` enters with a minus sign.
pub fn log_recursion_residual(f: Arc<dyn ScalarField>, probes: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    let p = LaplacePolynomial::d_alpha(n, n as f64);
    let lhs = apply_laplace_polynomial(&p, &potential_profile(f.clone(), Potential::QLog, *quad).memoized(), p.default_step(quad))?;
    let q = potential_profile(f.clone(), Potential::Q(n as f64 - 2.0), *quad);
    let b = potential_profile(f, Potential::B, *quad);
    sup_residual(probes, |s| (lhs.value(s) - q.value(s) + b.value(s)).abs())
}

/// `sup |-Delta_H B f - n(n-2)/4 B f| / sup |B f|`.
pub fn b_eigen_residual(f: Arc<dyn ScalarField>, probes: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    let n = f.dim();
    let b = potential_profile(f, Potential::B, *quad).memoized();
    let p = LaplacePolynomial::d_alpha(n, n as f64);
    let lhs = apply_laplace_polynomial(&p, &b, p.default_step(quad))?;
    let num = sup_residual(probes, |s| lhs.value(s).abs())?;
    let den = sup_residual(probes, |s| b.value(s).abs())?;
    if den == 0.0 {
        return Ok(num);
    }
    Ok(num / den)
}

/// For `n = 2`: `sup |-Delta_H Q^2 f - f - (1/4 pi) int f|`, `Q^2` the logarithmic potential.
pub fn n2_identity_residual(f: Arc<dyn ScalarField>, probes: &[f64], quad: &QuadratureSpec) -> Result<f64> {
    if f.dim() != 2 {
        return Err(HoroError::Parameter("the identity is stated for n = 2".into()));
    }
    let total = crate::transform::field_integral(f.as_ref(), quad)?;
    let p = LaplacePolynomial::minus_laplacian(2);
    let lhs = apply_laplace_polynomial(&p, &potential_profile(f.clone(), Potential::QLog, *quad).memoized(), p.default_step(quad))?;
    sup_residual(probes, |s| {
        let x = radial_probe(2, s).map_or(f64::NAN, |x| f.eval(x.coords()));
        (lhs.value(s) - x - total / (4.0 * PI)).abs()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::{FnField, RadialField, RadialProfile};
    use crate::transform::ForwardImage;
    use approx::assert_relative_eq;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::with_tolerances(1e-11, 1e-14)
    }

    #[test]
    fn polynomial_factors() {
        let p = LaplacePolynomial::p_ell(3, 1).unwrap();
        assert_eq!((p.shifts.clone(), p.sign), (vec![1.0], -1.0));
        let p = LaplacePolynomial::p_ell(4, 2).unwrap();
        assert_eq!((p.shifts.clone(), p.sign), (vec![2.0, 2.0], 1.0));
        let e = LaplacePolynomial::even_d(3, 2).unwrap();
        assert_eq!(e.shifts, vec![1.0]);
        assert_relative_eq!(e.constant, -1.0 / (2.0 * PI), max_relative = 1e-14);
        let e = LaplacePolynomial::even_d(5, 2).unwrap();
        assert_eq!(e.shifts, vec![3.0]);
        assert_relative_eq!(e.constant, -1.0 / (6.0 * PI), max_relative = 1e-14);
        // D_2 D_4 = P_2
        let (a, b) = (LaplacePolynomial::d_alpha(5, 2.0), LaplacePolynomial::d_alpha(5, 4.0));
        let p2 = LaplacePolynomial::p_ell(5, 2).unwrap();
        for lam in [-3.0, 0.5, 2.0] {
            assert_relative_eq!(a.symbol(lam) * b.symbol(lam), p2.symbol(lam), max_relative = 1e-14);
        }
        assert!(LaplacePolynomial::even_d(4, 1).is_err());
    }

    #[test]
    fn radial_laplacian_of_linear_coordinate() {
        for n in 2..=5 {
            let f = Profile1D::analytic(|s| s, None, None);
            for s in [1.0, 1.3, 2.5] {
                assert_relative_eq!(beltrami_radial(&f, s, n).unwrap(), n as f64 * s, max_relative = 1e-8);
                assert_relative_eq!(laplace_stencil(&|x| x, s, n, 0.01, 1.0), n as f64 * s, max_relative = 1e-10);
            }
        }
        let c = Profile1D::analytic(|_| 2.0, None, None);
        assert!(beltrami_radial(&c, 1.5, 3).unwrap().abs() < 1e-9);
    }

    #[test]
    fn composed_stencil_matches_eigenvalue() {
        // s = x_{n+1} satisfies Delta s = n s, so P(Delta) s = P(n) s
        let p = LaplacePolynomial::p_ell(4, 2).unwrap();
        let g = apply_laplace_polynomial(&p, &Profile1D::analytic(|s| s, None, None), 0.02).unwrap();
        for s in [1.0, 1.2, 3.0] {
            assert_relative_eq!(g.value(s), p.symbol(4.0) * s, max_relative = 1e-8);
        }
        let z = apply_laplace_polynomial(&p, &Profile1D::zero(), 0.02).unwrap();
        assert_eq!(z.value(1.4), 0.0);
    }

    #[test]
    fn potential_fast_path_matches_sphere_rule() {
        let q = quad();
        let f = RadialField::zonal(3, RadialProfile::exponential(1.0));
        let x = radial_probe(3, 1.4).unwrap();
        let a = potential_q_alpha(&f, &x, 2.0, &q).unwrap();
        let opaque = FnField::opaque(Arc::new(f.clone()));
        let b = potential_q_alpha(&opaque, &x, 2.0, &QuadratureSpec::with_tolerances(1e-8, 1e-12)).unwrap();
        assert!((a - b).abs() < 1e-5 * a.abs(), "{a} vs {b}");
        // at the origin: zeta sigma_2 int tau^0 e^{-tau} dtau
        let o = HyperbolicPoint::origin(3);
        let expect = zeta(3, 2.0).unwrap() * 4.0 * PI;
        assert_relative_eq!(potential_q_alpha(&f, &o, 2.0, &q).unwrap(), expect, max_relative = 1e-10);
        let zero = crate::fields::zero_field(3);
        assert_eq!(potential_q_alpha(&zero, &x, 2.0, &q).unwrap(), 0.0);
        assert!(potential_q_alpha(&f, &x, 3.0, &q).is_err());
    }

    #[test]
    fn log_potential_one_dimensional_oracle() {
        let q = quad();
        let f0 = RadialProfile::bump(1.0, 1.0);
        let f = RadialField::zonal(2, f0.clone());
        let o = HyperbolicPoint::origin(2);
        let g = |tau: f64| f0.value(1.0 + tau) * tau.ln();
        let oracle = zeta_log(2) * 2.0 * PI * crate::quadrature::tanh_sinh(g, 0.0, 1.0, &q).value;
        assert_relative_eq!(potential_q_n_log(&f, &o, &q).unwrap(), oracle, max_relative = 1e-9);
    }

    #[test]
    fn richardson_removes_polynomial_error() {
        let s: Vec<f64> = (0..6).map(|j| 1.0 + 0.2 * 0.5f64.powi(j)).collect();
        let v: Vec<f64> = s.iter().map(|x| 3.0 + 2.0 * (x - 1.0) - 5.0 * (x - 1.0).powi(2)).collect();
        let d = richardson_extrapolants(&v);
        assert!((d[d.len() - 1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mean_value_inversion_zonal_origin() {
        let q = QuadratureSpec::with_tolerances(1e-10, 1e-13);
        let f: Arc<dyn ScalarField> = Arc::new(RadialField::zonal(3, RadialProfile::exponential(1.0)));
        let phi: Arc<dyn HorosphericalImage> = Arc::new(ForwardImage::new(f, 2, q).unwrap());
        let v = invert_mean_value(&phi, &HyperbolicPoint::origin(3), &MeanValueOptions::default(), &q).unwrap();
        assert!((v - 1.0).abs() < 1e-4, "{v}");
        let z: Arc<dyn HorosphericalImage> =
            Arc::new(ForwardImage::new(Arc::new(crate::fields::zero_field(3)), 1, q).unwrap());
        let v = invert_mean_value(&z, &radial_probe(3, 1.3).unwrap(), &MeanValueOptions::default(), &q).unwrap();
        assert_eq!(v, 0.0);
    }
}
