//! Command-line driver: experiments, validation suites and plot data.
//!
//! Every run writes a CSV of result rows and a JSON summary next to it.
//! Exit codes: 0 all tolerances met, 1 a tolerance failed, 2 invalid
//! configuration, 3 unstable reconstruction, 4 I/O failure.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::fuglede_constant;
use crate::error::{HoroError, Result};
use crate::fields::{FnField, RadialField, RadialProfile, ScalarField};
use crate::horosphere::Horosphere;
use crate::inversion::{
    b_eigen_residual, d_alpha_recursion_residual, invert_mean_value_detailed, invert_poly_even_d, invert_poly_general,
    log_recursion_residual, n2_identity_residual, potential_q_alpha, radial_probe, Extrapolation, MeanValueOptions,
    ReconstructionReport,
};
use crate::lorentz::{hyperbolic_coords, iwasawa_nak, make_n, LorentzElement, Rotation};
use crate::quadrature::QuadratureSpec;
use crate::transform::{
    forward, forward_general, fubini_identity_residual, mean_value_with, sharpness_probe,
    weighted_zonal_identity_residual, default_haar_order, ForwardImage, HorosphericalImage, KRoute,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TOLERANCE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_UNSTABLE: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "horotomo", version, about = "Horospherical Radon transforms on hyperbolic space")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Transform values on standard horospheres, general quadrature against the exact route.
    Forward(CommonArgs),
    /// Mean-value / fractional-derivative reconstruction at radial probes.
    InvertMv(CommonArgs),
    /// Reconstruction by polynomials of the Beltrami-Laplace operator.
    InvertPoly(CommonArgs),
    /// Identity residuals of a validation suite.
    Validate(CommonArgs),
    /// Truncated L^p norms and transform integrals of the extremal profile.
    Sharpness(CommonArgs),
    /// Plot columns: (s, f, f reconstructed) or (cutoff, truncated integrals).
    EmitPlot(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Fubini,
    Weighted,
    Fuglede,
    Recursion,
    Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PlotMode {
    Reconstruct,
    Sharpness,
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON file with an `ExperimentConfig`; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    /// zonal-exp:L, zonal-bump:W[:H], shifted-bump:R:W[:H], sharpness:P or zero.
    #[arg(long)]
    pub field: Option<String>,
    /// Comma-separated probes: radial `s >= 1`, or `t` values for `forward`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub probes: Option<Vec<f64>>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// JSON summary path; defaults to the output path with a `.json` extension.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    /// Pass threshold on the sup-error or residual.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long, value_enum)]
    pub suite: Option<Suite>,
    #[arg(long, value_enum)]
    pub extrapolation: Option<ExtrapolationArg>,
    #[arg(long)]
    pub ell: Option<usize>,
    /// Sharpness exponent.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub cutoffs: Option<Vec<f64>>,
    /// `|u|` of the horospheres used by `forward`.
    #[arg(long)]
    pub u_norm: Option<f64>,
    #[arg(long, value_enum)]
    pub mode: Option<PlotMode>,
    /// Adds the wall-time column; without it the CSV is reproducible byte for byte.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExtrapolationArg {
    Richardson,
    Linear,
    None,
}

impl From<ExtrapolationArg> for Extrapolation {
    fn from(e: ExtrapolationArg) -> Self {
        match e {
            ExtrapolationArg::Richardson => Extrapolation::Richardson,
            ExtrapolationArg::Linear => Extrapolation::Linear,
            ExtrapolationArg::None => Extrapolation::None,
        }
    }
}

/// Fully resolved settings of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub n: usize,
    pub d: usize,
    pub field: String,
    pub probes: Vec<f64>,
    pub output: PathBuf,
    pub summary: Option<PathBuf>,
    pub seed: u64,
    pub quadrature: QuadratureSpec,
    pub tolerance: Option<f64>,
    pub suite: Suite,
    pub extrapolation: Extrapolation,
    pub ell: Option<usize>,
    pub p: f64,
    pub cutoffs: Vec<f64>,
    pub u_norm: f64,
    pub mode: PlotMode,
    pub timing: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 3,
            d: 1,
            field: "zonal-exp:1.0".into(),
            probes: vec![1.0, 1.2, 1.5, 2.0, 2.5],
            output: PathBuf::from("horotomo.csv"),
            summary: None,
            seed: 0,
            quadrature: QuadratureSpec::with_tolerances(1e-10, 1e-13),
            tolerance: None,
            suite: Suite::Fubini,
            extrapolation: Extrapolation::Richardson,
            ell: None,
            p: 2.0,
            cutoffs: vec![1e4, 1e5, 1e6],
            u_norm: 0.3,
            mode: PlotMode::Reconstruct,
            timing: false,
        }
    }
}

impl ExperimentConfig {
    /// The file config (if any) with flags applied on top.
    pub fn resolve(args: &CommonArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str(&text).map_err(|e| HoroError::Config(format!("{}: {e}", path.display())))?
            }
            None => ExperimentConfig::default(),
        };
        macro_rules! take {
            ($($field:ident),*) => { $(if let Some(v) = &args.$field { c.$field = v.clone().into(); })* };
        }
        take!(n, d, field, probes, output, seed, suite, p, cutoffs, u_norm, mode);
        c.timing |= args.timing;
        if args.summary.is_some() {
            c.summary = args.summary.clone();
        }
        if args.tolerance.is_some() {
            c.tolerance = args.tolerance;
        }
        if args.ell.is_some() {
            c.ell = args.ell;
        }
        if let Some(e) = args.extrapolation {
            c.extrapolation = e.into();
        }
        if let Some(r) = args.rel_tol {
            c.quadrature.rel_tolerance = r;
        }
        if let Some(a) = args.abs_tol {
            c.quadrature.abs_tolerance = a;
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 || self.n > crate::lorentz::MAX_DIM {
            return Err(HoroError::Config(format!("n = {} outside 2..={}", self.n, crate::lorentz::MAX_DIM)));
        }
        if self.d < 1 || self.d >= self.n {
            return Err(HoroError::Config(format!("d = {} must satisfy 1 <= d <= n - 1", self.d)));
        }
        if self.probes.is_empty() {
            return Err(HoroError::Config("probe list is empty".into()));
        }
        if self.probes.iter().any(|p| !p.is_finite()) {
            return Err(HoroError::Config("probes must be finite".into()));
        }
        self.quadrature.validate()?;
        parse_field(self.n, &self.field)?;
        Ok(())
    }

    fn summary_path(&self) -> PathBuf {
        self.summary.clone().unwrap_or_else(|| self.output.with_extension("json"))
    }

    fn radial_probes(&self) -> Result<()> {
        if let Some(s) = self.probes.iter().find(|s| **s < 1.0) {
            return Err(HoroError::Config(format!("radial probe s = {s} must be at least 1")));
        }
        Ok(())
    }
}

/// Builds the test field named by `spec`.
pub fn parse_field(n: usize, spec: &str) -> Result<Arc<dyn ScalarField>> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or_default();
    let nums = parts
        .map(|p| p.parse::<f64>().map_err(|_| HoroError::Config(format!("bad number {p:?} in field {spec:?}"))))
        .collect::<Result<Vec<f64>>>()?;
    let arg = |i: usize, default: Option<f64>| {
        nums.get(i)
            .copied()
            .or(default)
            .ok_or_else(|| HoroError::Config(format!("field {spec:?} is missing parameter {}", i + 1)))
    };
    let field: Arc<dyn ScalarField> = match kind {
        "zero" => Arc::new(crate::fields::zero_field(n)),
        "zonal-exp" => Arc::new(RadialField::zonal(n, RadialProfile::exponential(arg(0, Some(1.0))?))),
        "zonal-bump" => {
            Arc::new(RadialField::zonal(n, RadialProfile::bump(arg(0, Some(1.5))?, arg(1, Some(1.0))?)))
        }
        "shifted-bump" => {
            let mut theta = vec![0.0; n];
            theta[n - 1] = 1.0;
            let c = hyperbolic_coords(&theta, arg(0, None)?)?;
            Arc::new(RadialField::centered(c, RadialProfile::bump(arg(1, Some(1.5))?, arg(2, Some(1.0))?)))
        }
        "sharpness" => Arc::new(RadialField::zonal(n, RadialProfile::sharpness(n, arg(0, None)?))),
        _ => return Err(HoroError::Config(format!("unknown field {spec:?}"))),
    };
    if nums.iter().any(|v| !(*v > 0.0)) && kind != "shifted-bump" {
        return Err(HoroError::Config(format!("field parameters of {spec:?} must be positive")));
    }
    Ok(field)
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub probe_id: usize,
    pub probe: f64,
    pub reference: f64,
    pub computed: f64,
    pub abs_error: f64,
    pub budget_quadrature: f64,
    pub budget_differentiation: f64,
    pub budget_extrapolation: f64,
    pub wall_ms: f64,
}

impl ResultRow {
    fn new(probe_id: usize, probe: f64, reference: f64, computed: f64, budget: [f64; 3], wall_ms: f64) -> Self {
        ResultRow {
            probe_id,
            probe,
            reference,
            computed,
            abs_error: (reference - computed).abs(),
            budget_quadrature: budget[0],
            budget_differentiation: budget[1],
            budget_extrapolation: budget[2],
            wall_ms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    pub config: ExperimentConfig,
    pub sup_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Formats with 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_rows(path: &Path, rows: &[ResultRow], timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "probe_id",
        "probe",
        "reference",
        "computed",
        "abs_error",
        "budget_quadrature",
        "budget_differentiation",
        "budget_extrapolation",
    ];
    if timing {
        header.push("wall_ms");
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![r.probe_id.to_string()];
        rec.extend(
            [
                r.probe,
                r.reference,
                r.computed,
                r.abs_error,
                r.budget_quadrature,
                r.budget_differentiation,
                r.budget_extrapolation,
            ]
            .iter()
            .map(|v| fmt_f64(*v)),
        );
        if timing {
            rec.push(format!("{:.3}", r.wall_ms));
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_table(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt_f64(*v)))?;
    }
    w.flush()?;
    Ok(())
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn report_rows(r: &ReconstructionReport, wall_ms: f64) -> Vec<ResultRow> {
    let b = [r.budget.quadrature, r.budget.differentiation, r.budget.extrapolation];
    let each = wall_ms / r.probes.len() as f64;
    (0..r.probes.len())
        .map(|i| ResultRow::new(i, r.probes[i], r.reference[i], r.reconstructed[i], b, each))
        .collect()
}

fn image(c: &ExperimentConfig) -> Result<(Arc<dyn ScalarField>, Arc<dyn HorosphericalImage>)> {
    let f = parse_field(c.n, &c.field)?;
    let phi: Arc<dyn HorosphericalImage> = Arc::new(ForwardImage::new(f.clone(), c.d, c.quadrature)?);
    Ok((f, phi))
}

fn run_forward(c: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let f = parse_field(c.n, &c.field)?;
    let opaque = FnField::opaque(f.clone());
    let p = c.n - 1 - c.d;
    let mut u = vec![0.0; p];
    if p > 0 {
        u[0] = c.u_norm;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let ks: Vec<Rotation> = c.probes.iter().map(|_| Rotation::random(c.n, &mut rng)).collect();
    c.probes
        .par_iter()
        .enumerate()
        .map(|(i, &t)| {
            let start = Instant::now();
            let xi = Horosphere::new(c.n, c.d, ks[i].clone(), t, u.clone())?;
            let exact = forward(f.as_ref(), &xi, &c.quadrature)?;
            let general = forward_general(&opaque, &xi, &c.quadrature)?;
            let q = c.quadrature.rel_tolerance * exact.abs();
            Ok(ResultRow::new(i, t, exact, general, [q, 0.0, 0.0], ms(start)))
        })
        .collect()
}

fn run_invert_mv(c: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    c.radial_probes()?;
    let (f, phi) = image(c)?;
    let opts = MeanValueOptions { extrapolation: c.extrapolation, ..Default::default() };
    c.probes
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let start = Instant::now();
            let x = radial_probe(c.n, s)?;
            let r = invert_mean_value_detailed(&phi, &x, &opts, &c.quadrature)?;
            let q = c.quadrature.rel_tolerance * r.value.abs().max(1.0);
            Ok(ResultRow::new(i, s, f.eval(x.coords()), r.value, [q, 0.0, r.extrapolation_error], ms(start)))
        })
        .collect()
}

fn run_invert_poly(c: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    c.radial_probes()?;
    let (_, phi) = image(c)?;
    let start = Instant::now();
    let report = if c.d % 2 == 0 && c.ell.is_none() {
        invert_poly_even_d(&phi, &c.probes, &c.quadrature)?
    } else {
        let ell = c.ell.unwrap_or(if c.n % 2 == 1 { c.d.div_ceil(2) } else { c.n / 2 });
        invert_poly_general(&phi, ell, &c.probes, &c.quadrature)?
    };
    Ok(report_rows(&report, ms(start)))
}

fn run_validate(c: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let f = parse_field(c.n, &c.field)?;
    let q = c.quadrature;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    match c.suite {
        Suite::Fubini => {
            let ks: Vec<Rotation> = c.probes.iter().map(|_| Rotation::random(c.n, &mut rng)).collect();
            ks.par_iter()
                .enumerate()
                .map(|(i, k)| {
                    let start = Instant::now();
                    let r = fubini_identity_residual(f.clone(), k, c.d, &q)?;
                    Ok(ResultRow::new(i, c.probes[i], 0.0, r, [0.0; 3], ms(start)))
                })
                .collect()
        }
        Suite::Weighted => c
            .probes
            .par_iter()
            .enumerate()
            .map(|(i, &alpha)| {
                let start = Instant::now();
                let r = weighted_zonal_identity_residual(f.as_ref(), c.d, alpha, &q)?;
                Ok(ResultRow::new(i, alpha, 0.0, r, [0.0; 3], ms(start)))
            })
            .collect(),
        Suite::Fuglede => {
            c.radial_probes()?;
            let phi = ForwardImage::new(f.clone(), c.d, q)?;
            let route = KRoute::Haar { order: default_haar_order(c.n) };
            let konst = fuglede_constant(c.n, c.d);
            c.probes
                .par_iter()
                .enumerate()
                .map(|(i, &s)| {
                    let start = Instant::now();
                    let x = radial_probe(c.n, s)?;
                    let check = mean_value_with(&phi, &x, 0.0, route, &q)?;
                    let pot = konst * potential_q_alpha(f.as_ref(), &x, c.d as f64, &q)?;
                    // relative residual, so that the tolerance is scale free
                    Ok(ResultRow::new(i, s, 0.0, (check - pot).abs() / pot.abs().max(1e-300), [0.0; 3], ms(start)))
                })
                .collect()
        }
        Suite::Recursion => {
            c.radial_probes()?;
            if f.zonal_profile().is_none() {
                return Err(HoroError::Config("the recursion suite needs a zonal field".into()));
            }
            let mut rows = Vec::new();
            let mut push = |label: f64, r: Result<f64>, start: Instant| -> Result<()> {
                rows.push(ResultRow::new(rows.len(), label, 0.0, r?, [0.0; 3], ms(start)));
                Ok(())
            };
            if c.n == 2 {
                push(2.0, n2_identity_residual(f, &c.probes, &q), Instant::now())?;
            } else {
                push(2.0, d_alpha_recursion_residual(f.clone(), 2.0, &c.probes, &q), Instant::now())?;
                push(c.n as f64, log_recursion_residual(f.clone(), &c.probes, &q), Instant::now())?;
                push(0.0, b_eigen_residual(f, &c.probes, &q), Instant::now())?;
            }
            Ok(rows)
        }
        Suite::Group => Ok(c
            .probes
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let start = Instant::now();
                let g = LorentzElement::random(c.n, 2.0, 3.0, &mut rng);
                let v1: Vec<f64> = (0..c.n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let v2: Vec<f64> = (0..c.n - 1).map(|_| rng.random_range(-2.0..2.0)).collect();
                let sum: Vec<f64> = v1.iter().zip(&v2).map(|(a, b)| a + b).collect();
                let n_err = (make_n(&v1).compose(&make_n(&v2)).matrix() - make_n(&sum).matrix()).amax();
                let nak = iwasawa_nak(&g)
                    .map_or(f64::INFINITY, |fac| (fac.reassemble().matrix() - g.matrix()).amax() / g.matrix().amax());
                let worst = g.form_defect().max(n_err).max(nak);
                ResultRow::new(i, p, 0.0, worst, [0.0; 3], ms(start))
            })
            .collect()),
    }
}

fn run_sharpness(c: &ExperimentConfig) -> Result<Vec<Vec<f64>>> {
    c.cutoffs
        .par_iter()
        .map(|&cut| {
            let (lp, tr) = sharpness_probe(c.p, c.n, c.d, cut, &c.quadrature)?;
            Ok(vec![cut, lp, tr])
        })
        .collect()
}

fn default_tolerance(cmd: &str, c: &ExperimentConfig) -> f64 {
    match cmd {
        "forward" => 1e-4,
        "invert-mv" => 1e-2,
        "invert-poly" => 2e-2,
        "validate" => match c.suite {
            Suite::Fubini | Suite::Weighted => 1e-4,
            Suite::Fuglede | Suite::Recursion => 1e-3,
            Suite::Group => 1e-9,
        },
        _ => f64::INFINITY,
    }
}

fn finish(cmd: &str, c: &ExperimentConfig, rows: &[ResultRow]) -> Result<bool> {
    write_rows(&c.output, rows, c.timing)?;
    let sup = rows.iter().map(|r| r.abs_error).fold(0.0, f64::max);
    let tolerance = c.tolerance.unwrap_or_else(|| default_tolerance(cmd, c));
    let pass = sup < tolerance;
    let summary = Summary { command: cmd.into(), config: c.clone(), sup_error: sup, tolerance, pass };
    std::fs::write(c.summary_path(), serde_json::to_string_pretty(&summary)?)?;
    Ok(pass)
}

/// Runs one subcommand and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let (name, args) = match &cli.command {
        Command::Forward(a) => ("forward", a),
        Command::InvertMv(a) => ("invert-mv", a),
        Command::InvertPoly(a) => ("invert-poly", a),
        Command::Validate(a) => ("validate", a),
        Command::Sharpness(a) => ("sharpness", a),
        Command::EmitPlot(a) => ("emit-plot", a),
    };
    let outcome = ExperimentConfig::resolve(args).and_then(|c| execute(name, &c));
    match outcome {
        Ok(true) => EXIT_OK,
        Ok(false) => EXIT_TOLERANCE,
        Err(e) => {
            eprintln!("horotomo {name}: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &HoroError) -> i32 {
    match e {
        HoroError::Io(_) => EXIT_IO,
        HoroError::Unstable { .. } => EXIT_UNSTABLE,
        _ => EXIT_INVALID,
    }
}

fn execute(name: &str, c: &ExperimentConfig) -> Result<bool> {
    match name {
        "forward" => finish(name, c, &run_forward(c)?),
        "invert-mv" => finish(name, c, &run_invert_mv(c)?),
        "invert-poly" => finish(name, c, &run_invert_poly(c)?),
        "validate" => finish(name, c, &run_validate(c)?),
        "sharpness" => {
            let rows = run_sharpness(c)?;
            write_table(&c.output, &["cutoff", "lp_norm", "transform"], &rows)?;
            let summary = serde_json::json!({ "command": name, "config": c, "rows": rows });
            std::fs::write(c.summary_path(), serde_json::to_string_pretty(&summary)?)?;
            Ok(true)
        }
        "emit-plot" => match c.mode {
            PlotMode::Sharpness => {
                let rows = run_sharpness(c)?;
                let pairs: Vec<Vec<f64>> = rows.iter().map(|r| vec![r[0], r[2]]).collect();
                write_table(&c.output, &["cutoff", "truncated_integral"], &pairs)?;
                Ok(true)
            }
            PlotMode::Reconstruct => {
                let rows = run_invert_mv(c)?;
                let cols: Vec<Vec<f64>> = rows.iter().map(|r| vec![r.probe, r.reference, r.computed]).collect();
                write_table(&c.output, &["s", "f", "f_reconstructed"], &cols)?;
                Ok(true)
            }
        },
        _ => Err(HoroError::Config(format!("unknown command {name}"))),
    }
}

/// Caps the rayon pool at `HOROTOMO_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("HOROTOMO_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs() {
        assert!(parse_field(3, "zonal-exp:1.0").unwrap().zonal_profile().is_some());
        assert!(parse_field(3, "shifted-bump:0.5:1.5").unwrap().zonal_profile().is_none());
        assert!(parse_field(3, "zonal-bump").is_ok());
        assert!(parse_field(3, "sharpness").is_err());
        assert!(parse_field(3, "wave:1").is_err());
        assert!(parse_field(3, "zonal-exp:x").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"n": 4, "d": 2, "seed": 9, "probes": [1.5]}"#).unwrap();
        let args = CommonArgs { config: Some(path), d: Some(1), ..Default::default() };
        let c = ExperimentConfig::resolve(&args).unwrap();
        assert_eq!((c.n, c.d, c.seed, c.probes.clone()), (4, 1, 9, vec![1.5]));
        let bad = CommonArgs { probes: Some(vec![]), ..Default::default() };
        assert!(matches!(ExperimentConfig::resolve(&bad), Err(HoroError::Config(_))));
    }

    #[test]
    fn seventeen_digits() {
        assert_eq!(fmt_f64(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }
}
