//! C ABI for `horotomo`.
//!
//! Fields and images are opaque handles created by `ht_*_new` style
//! constructors and released by the matching `*_free`. Every fallible call
//! returns an [`HtStatus`]; the message of the last failure on the calling
//! thread is available from [`ht_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;
use std::sync::Arc;

use horotomo::fields::{RadialField, RadialProfile, ScalarField};
use horotomo::horosphere::Horosphere;
use horotomo::inversion::{
    invert_mean_value, invert_poly_even_d, invert_poly_general, potential_q_alpha, radial_probe, MeanValueOptions,
};
use horotomo::lorentz::{hyperbolic_coords, HyperbolicPoint, Rotation};
use horotomo::quadrature::QuadratureSpec;
use horotomo::transform::{ForwardImage, HorosphericalImage};
use horotomo::HoroError;
use nalgebra::DMatrix;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HtStatus {
    Ok = 0,
    NullPointer = 1,
    Contract = 2,
    Geometry = 3,
    Parameter = 4,
    Accuracy = 5,
    Divergence = 6,
    Smoothness = 7,
    Unstable = 8,
    Decomposition = 9,
    Config = 10,
    Io = 11,
    Panic = 12,
}

impl From<&HoroError> for HtStatus {
    fn from(e: &HoroError) -> Self {
        match e {
            HoroError::Contract(_) => HtStatus::Contract,
            HoroError::Geometry(_) => HtStatus::Geometry,
            HoroError::Parameter(_) => HtStatus::Parameter,
            HoroError::Accuracy { .. } => HtStatus::Accuracy,
            HoroError::Divergence { .. } => HtStatus::Divergence,
            HoroError::Smoothness(_) => HtStatus::Smoothness,
            HoroError::Unstable { .. } => HtStatus::Unstable,
            HoroError::Decomposition { .. } => HtStatus::Decomposition,
            HoroError::Config(_) => HtStatus::Config,
            HoroError::Io(_) => HtStatus::Io,
        }
    }
}

/// Quadrature controls; see [`ht_quad_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct HtQuadSpec {
    pub rel_tolerance: f64,
    pub abs_tolerance: f64,
    pub truncation_radius: f64,
    pub max_evals: usize,
}

impl From<HtQuadSpec> for QuadratureSpec {
    fn from(q: HtQuadSpec) -> Self {
        QuadratureSpec {
            rel_tolerance: q.rel_tolerance,
            abs_tolerance: q.abs_tolerance,
            truncation_radius: q.truncation_radius,
            max_evals: q.max_evals,
            ..Default::default()
        }
    }
}

/// A scalar field on hyperbolic space.
pub struct HtField {
    inner: Arc<dyn ScalarField>,
}

/// The horospherical transform of a field.
pub struct HtImage {
    inner: Arc<dyn HorosphericalImage>,
    quad: QuadratureSpec,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), HtStatus>) -> HtStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => HtStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside horotomo".into());
            HtStatus::Panic
        }
    }
}

fn fail(e: HoroError) -> HtStatus {
    let s = HtStatus::from(&e);
    set_error(e.to_string());
    s
}

fn null(what: &str) -> HtStatus {
    set_error(format!("{what} is null"));
    HtStatus::NullPointer
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, HtStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], HtStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

fn boxed_field(f: Arc<dyn ScalarField>, out: *mut *mut HtField) -> Result<(), HtStatus> {
    let out = unsafe { out_ref(out, "out")? };
    *out = Box::into_raw(Box::new(HtField { inner: f }));
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next failing call.
#[no_mangle]
pub extern "C" fn ht_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub extern "C" fn ht_quad_default() -> HtQuadSpec {
    let q = QuadratureSpec::default();
    HtQuadSpec {
        rel_tolerance: q.rel_tolerance,
        abs_tolerance: q.abs_tolerance,
        truncation_radius: q.truncation_radius,
        max_evals: q.max_evals,
    }
}

/// `f(x) = exp(-lambda (cosh r - 1))`, `r` the distance to the origin of `H^n`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_field_zonal_exp(n: usize, lambda: f64, out: *mut *mut HtField) -> HtStatus {
    guard(|| {
        check_dim(n)?;
        boxed_field(Arc::new(RadialField::zonal(n, RadialProfile::exponential(lambda))), out)
    })
}

/// Smooth compactly supported bump in `s = cosh r`, centered at the point at distance `dist` along the last axis.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ht_field_bump(
    n: usize,
    dist: f64,
    width: f64,
    height: f64,
    out: *mut *mut HtField,
) -> HtStatus {
    guard(|| {
        check_dim(n)?;
        let mut theta = vec![0.0; n];
        theta[n - 1] = 1.0;
        let c = hyperbolic_coords(&theta, dist).map_err(fail)?;
        boxed_field(Arc::new(RadialField::centered(c, RadialProfile::bump(width, height))), out)
    })
}

/// Evaluates a field at the hyperboloid point `x` of length `n + 1`.
///
/// # Safety
/// `field` must come from a constructor, `x` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_field_eval(field: *const HtField, x: *const f64, len: usize, out: *mut f64) -> HtStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let x = input(x, len, "x")?;
        let point = HyperbolicPoint::new(x.to_vec()).map_err(fail)?;
        if point.dim() != f.inner.dim() {
            return Err(fail(HoroError::Contract("point has the wrong dimension".into())));
        }
        *out_ref(out, "out")? = f.inner.eval(point.coords());
        Ok(())
    })
}

/// # Safety
/// `field` must come from a constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ht_field_free(field: *mut HtField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// `Q^alpha f` at the point of distance `acosh s` from the origin.
///
/// # Safety
/// `field` must come from a constructor, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ht_potential(
    field: *const HtField,
    alpha: f64,
    s: f64,
    quad: HtQuadSpec,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let x = radial_probe(f.inner.dim(), s).map_err(fail)?;
        *out_ref(out, "out")? = potential_q_alpha(f.inner.as_ref(), &x, alpha, &quad.into()).map_err(fail)?;
        Ok(())
    })
}

/// The `d`-horospherical transform of `field`; the field handle may be freed afterwards.
///
/// # Safety
/// `field` must come from a constructor, `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ht_image_new(
    field: *const HtField,
    d: usize,
    quad: HtQuadSpec,
    out: *mut *mut HtImage,
) -> HtStatus {
    guard(|| {
        let f = field.as_ref().ok_or_else(|| null("field"))?;
        let q: QuadratureSpec = quad.into();
        q.validate().map_err(fail)?;
        let image = ForwardImage::new(f.inner.clone(), d, q).map_err(fail)?;
        *out_ref(out, "out")? = Box::into_raw(Box::new(HtImage { inner: Arc::new(image), quad: q }));
        Ok(())
    })
}

/// Transform value on the horosphere `k a_t n_u xi0`.
///
/// `k` is a row-major `n x n` rotation or null for the identity; `u` holds `n - 1 - d` doubles.
///
/// # Safety
/// Pointers must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn ht_image_eval(
    image: *const HtImage,
    k: *const f64,
    t: f64,
    u: *const f64,
    u_len: usize,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let im = image.as_ref().ok_or_else(|| null("image"))?;
        let (n, d) = (im.inner.n(), im.inner.d());
        let rot = if k.is_null() {
            Rotation::identity(n)
        } else {
            let m = input(k, n * n, "k")?;
            Rotation::new(DMatrix::from_row_slice(n, n, m)).map_err(fail)?
        };
        let u = input(u, u_len, "u")?;
        let xi = Horosphere::new(n, d, rot, t, u.to_vec()).map_err(fail)?;
        *out_ref(out, "out")? = im.inner.eval(&xi).map_err(fail)?;
        Ok(())
    })
}

/// # Safety
/// `image` must come from [`ht_image_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ht_image_free(image: *mut HtImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Mean-value reconstruction of the field at the radial probe `s >= 1`.
///
/// # Safety
/// `image` must come from [`ht_image_new`], `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ht_invert_mean_value(image: *const HtImage, s: f64, out: *mut f64) -> HtStatus {
    guard(|| {
        let im = image.as_ref().ok_or_else(|| null("image"))?;
        let x = radial_probe(im.inner.n(), s).map_err(fail)?;
        *out_ref(out, "out")? = invert_mean_value(&im.inner, &x, &MeanValueOptions::default(), &im.quad).map_err(fail)?;
        Ok(())
    })
}

/// Polynomial reconstruction at `len` radial probes, written to `out`.
///
/// `ell = 0` selects the even-`d` formula; otherwise the general one with `P_ell`.
///
/// # Safety
/// `probes` and `out` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn ht_invert_poly(
    image: *const HtImage,
    ell: usize,
    probes: *const f64,
    len: usize,
    out: *mut f64,
) -> HtStatus {
    guard(|| {
        let im = image.as_ref().ok_or_else(|| null("image"))?;
        let probes = input(probes, len, "probes")?;
        if len > 0 && out.is_null() {
            return Err(null("out"));
        }
        let report = if ell == 0 {
            invert_poly_even_d(&im.inner, probes, &im.quad)
        } else {
            invert_poly_general(&im.inner, ell, probes, &im.quad)
        }
        .map_err(fail)?;
        if len > 0 {
            slice::from_raw_parts_mut(out, len).copy_from_slice(&report.reconstructed);
        }
        Ok(())
    })
}

fn check_dim(n: usize) -> Result<(), HtStatus> {
    if !(2..=horotomo::lorentz::MAX_DIM).contains(&n) {
        return Err(fail(HoroError::Contract(format!("n = {n} unsupported"))));
    }
    Ok(())
}
