//! Command-line front end: JSON job configs in, CSV fields and a JSON report out.

pub mod config;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

use crate::algebra::{Matrix, C64};
use crate::error::{Error, Result};
use crate::floquet::{check_diagonal_periodicity, homogeneous_residual, transport_solution, Direction, FloquetDecomposition};
use crate::genfunc::{self, BivariateSeries, Coeff, GfParams, RationalGF};
use crate::hicks::{self, ConsumptionSeed};
use crate::lattice::{MultiIndex, Window};
use crate::recurrence::{
    check_compatibility, fundamental_matrix, format_number, solve_explicit, solve_iterative_parallel, SolutionField,
};
use crate::way_required::{closed_form_chained, solve_path, AffineMap, PathRecurrence, StepMap};

pub use config::{parse_config, JobConfig};
use config::{read_json, IncomeSpec, LayersSpec, Scalars};

#[derive(Parser, Debug)]
#[command(name = "multitime", version, about = "Diagonal recurrences on discrete multitime lattices")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// JSON job description
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (created if missing)
    #[arg(long, global = true)]
    pub out: Option<String>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Residual threshold for the report's `within_tol` flag
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads for diagonal sweeps
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Iterative,
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportDirection {
    Forward,
    Inverse,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Boundary compatibility and, with a period, diagonal periodicity
    Check,
    /// Solve the recurrence on the window
    Solve {
        #[arg(long, value_enum, default_value_t = Method::Iterative)]
        method: Method,
    },
    /// Fundamental matrix on the window
    Phi,
    /// Monodromy, multipliers and the P·B^μ factorisation
    Floquet {
        #[arg(long)]
        period: Option<u64>,
        /// Field CSV to carry between the A- and B-recurrences
        #[arg(long)]
        transport: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = TransportDirection::Forward)]
        direction: TransportDirection,
    },
    /// Samuelson-Hicks income model
    Hicks {
        /// Scalar or comma-separated phase list
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// Extents such as `8x8`
        #[arg(long)]
        window: Option<String>,
        /// JSON file with income layers
        #[arg(long)]
        boundary: Option<PathBuf>,
        #[arg(long)]
        classify: bool,
        #[arg(long)]
        multipliers: bool,
        /// Also solve the (Y, C) consumption system
        #[arg(long)]
        system: bool,
    },
    /// Rational generating function of the two-time model
    Gf {
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        alpha: Option<String>,
        /// JSON file with `row0`, `col0`, `row1`, `col1`
        #[arg(long)]
        layers: Option<PathBuf>,
        #[arg(long)]
        variant: Option<u8>,
        /// Truncation orders such as `8x8`
        #[arg(long)]
        expand: Option<String>,
    },
    /// Path-ordered two-time recurrence
    Way,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Solve { .. } => "solve",
            Command::Phi => "phi",
            Command::Floquet { .. } => "floquet",
            Command::Hicks { .. } => "hicks",
            Command::Gf { .. } => "gf",
            Command::Way => "way",
        }
    }
}

/// Result of one command, also written as `report.json`.
#[derive(Debug)]
pub struct RunReport {
    pub command: String,
    pub inputs: Value,
    pub outputs: Vec<PathBuf>,
    pub residuals: serde_json::Map<String, Value>,
    pub details: serde_json::Map<String, Value>,
    pub warnings: Vec<String>,
    pub failure: Option<String>,
    pub exit_code: i32,
    pub wall_time_s: f64,
}

impl RunReport {
    fn new(command: &str, inputs: Value) -> Self {
        RunReport {
            command: command.into(),
            inputs,
            outputs: Vec::new(),
            residuals: Default::default(),
            details: Default::default(),
            warnings: Vec::new(),
            failure: None,
            exit_code: 0,
            wall_time_s: 0.0,
        }
    }

    fn residual(&mut self, name: &str, value: f64) {
        self.residuals.insert(name.into(), json!(value));
    }

    fn detail(&mut self, name: &str, value: Value) {
        self.details.insert(name.into(), value);
    }

    fn fail(&mut self, message: String) {
        self.failure = Some(message);
        self.exit_code = 1;
    }

    pub fn to_json(&self) -> Value {
        json!({
            "command": self.command,
            "inputs": self.inputs,
            "outputs": self.outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "residuals": self.residuals,
            "details": self.details,
            "warnings": self.warnings,
            "failure": self.failure,
            "exit_code": self.exit_code,
            "wall_time_s": self.wall_time_s,
        })
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

struct Ctx {
    config: JobConfig,
    out: PathBuf,
    tol: f64,
    jobs: usize,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn write_field(&self, report: &mut RunReport, name: &str, field: &SolutionField) -> Result<()> {
        let path = self.path(name);
        field.write_csv(BufWriter::new(File::create(&path)?))?;
        report.outputs.push(path);
        Ok(())
    }

    fn write_rows(&self, report: &mut RunReport, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<()> {
        let path = self.path(name);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        report.outputs.push(path);
        Ok(())
    }
}

/// Runs one command. Errors before any report exists are returned; later
/// failures are folded into the report's exit code.
pub fn run(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    let config = match &cli.global.config {
        Some(p) => parse_config(p)?,
        None => JobConfig::default(),
    };
    // `--out csv` names the format, not a directory.
    let out = match cli.global.out.as_deref() {
        None | Some("csv") => PathBuf::from("."),
        Some(dir) => PathBuf::from(dir),
    };
    std::fs::create_dir_all(&out)?;
    let ctx = Ctx {
        tol: cli.global.tol.unwrap_or(config.tolerances.residual),
        config,
        out,
        jobs: cli.global.jobs.max(1),
    };
    let mut inputs = serde_json::to_value(&ctx.config).map_err(|e| Error::Validation(e.to_string()))?;
    if let Value::Object(map) = &mut inputs {
        map.retain(|_, v| !v.is_null());
    }
    let mut report = RunReport::new(cli.command.name(), inputs);
    let outcome = match &cli.command {
        Command::Check => run_check(&ctx, &mut report),
        Command::Solve { method } => run_solve(&ctx, &mut report, *method),
        Command::Phi => run_phi(&ctx, &mut report),
        Command::Floquet { period, transport, direction } => {
            run_floquet(&ctx, &mut report, *period, transport.as_deref(), *direction)
        }
        Command::Hicks { gamma, alpha, window, boundary, classify, multipliers, system } => run_hicks(
            &ctx,
            &mut report,
            HicksArgs {
                gamma: gamma.as_deref(),
                alpha: alpha.as_deref(),
                window: window.as_deref(),
                boundary: boundary.as_deref(),
                classify: *classify,
                multipliers: *multipliers,
                system: *system,
            },
        ),
        Command::Gf { gamma, alpha, layers, variant, expand } => {
            run_gf(&ctx, &mut report, gamma.as_deref(), alpha.as_deref(), layers.as_deref(), *variant, expand.as_deref())
        }
        Command::Way => run_way(&ctx, &mut report),
    };
    if let Err(e) = outcome {
        report.exit_code = exit_code(&e);
        report.failure = Some(e.to_string());
    }
    let within = report.residuals.values().all(|v| v.as_f64().is_none_or(|r| r <= ctx.tol));
    report.detail("tol", json!(ctx.tol));
    report.detail("within_tol", json!(within));
    let report_path = ctx.path("report.json");
    report.outputs.push(report_path.clone());
    report.wall_time_s = start.elapsed().as_secs_f64();
    let text = serde_json::to_string_pretty(&report.to_json()).map_err(|e| Error::Validation(e.to_string()))?;
    std::fs::write(&report_path, text + "\n")?;
    Ok(report)
}

fn point_json(t: &MultiIndex) -> Value {
    json!(t.components())
}

fn parse_dims(s: &str) -> Result<Vec<u64>> {
    s.split(['x', ','])
        .map(|p| p.trim().parse::<u64>().map_err(|_| Error::Validation(format!("bad extents {s:?}; expected e.g. 8x8"))))
        .collect()
}

fn run_check(ctx: &Ctx, report: &mut RunReport) -> Result<()> {
    let boundary = ctx.config.boundary_data()?;
    let compat = check_compatibility(&boundary);
    let violations: Vec<Value> = compat
        .violations
        .iter()
        .map(|v| json!({"faces": [v.alpha, v.beta], "levels": [v.levels.0, v.levels.1], "point": point_json(&v.point)}))
        .collect();
    report.detail("violations", json!(violations));
    if let Some(v) = compat.violations.first() {
        report.fail(format!("boundary faces {} and {} disagree at {}", v.alpha, v.beta, v.point));
    }
    if let Some(period) = ctx.config.period {
        let check = check_diagonal_periodicity(&ctx.config.coefficient_provider()?, period, &ctx.config.window()?);
        report.detail("periodic", json!(check.periodic));
        if let Some(t) = &check.counterexample {
            report.detail("counterexample", point_json(t));
            report.fail(format!("coefficients are not {period}-diagonal-periodic at {t}"));
        }
    }
    Ok(())
}

fn run_solve(ctx: &Ctx, report: &mut RunReport, method: Method) -> Result<()> {
    let rec = ctx.config.recurrence()?;
    let window = ctx.config.window()?;
    let iterative = solve_iterative_parallel(&rec, &window, ctx.jobs)?;
    let field = match method {
        Method::Iterative => iterative.clone(),
        Method::Explicit => SolutionField::try_from_fn(window.clone(), rec.n(), |t| solve_explicit(&rec, t))?,
    };
    report.residual("interior", field.interior_residual(rec.coefficients(), rec.forcing()));
    if method == Method::Explicit {
        report.residual("explicit_vs_iterative", field.max_relative_error(&iterative, 1e-300)?);
    }
    ctx.write_field(report, "field.csv", &field)
}

fn matrix_rows(t: &MultiIndex, m: &Matrix) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            let z = m[(i, j)];
            let mut r: Vec<String> = t.components().iter().map(|c| c.to_string()).collect();
            r.extend([i.to_string(), j.to_string(), format_number(z.re), format_number(z.im)]);
            rows.push(r);
        }
    }
    rows
}

fn axis_header(prefix: &str, m: usize) -> Vec<String> {
    (1..=m).map(|i| format!("{prefix}t{i}")).collect()
}

fn run_phi(ctx: &Ctx, report: &mut RunReport) -> Result<()> {
    let rec = ctx.config.recurrence()?;
    let window = ctx.config.window()?;
    let a = rec.coefficients();
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for t in window.points() {
        let phi = fundamental_matrix(&rec, &t)?;
        if t.mu() > 0 {
            let prev = fundamental_matrix(&rec, &t.down(1))?;
            worst = worst.max(phi.relative_diff(&(&a.at(&t.down(1)) * &prev)));
        }
        rows.extend(matrix_rows(&t, &phi));
    }
    report.residual("phi_step", worst);
    let mut header = axis_header("", window.dim());
    header.extend(["row", "col", "re", "im"].map(String::from));
    ctx.write_rows(report, "phi.csv", &header, &rows)
}

fn multiplier_rows(base: &MultiIndex, values: &[C64]) -> Vec<Vec<String>> {
    values
        .iter()
        .map(|z| {
            let mut r: Vec<String> = base.components().iter().map(|c| c.to_string()).collect();
            r.extend([format_number(z.re), format_number(z.im), format_number(z.norm())]);
            r
        })
        .collect()
}

fn multiplier_header(m: usize) -> Vec<String> {
    let mut h = axis_header("base_", m);
    h.extend(["re", "im", "modulus"].map(String::from));
    h
}

fn run_floquet(
    ctx: &Ctx,
    report: &mut RunReport,
    period: Option<u64>,
    transport: Option<&Path>,
    direction: TransportDirection,
) -> Result<()> {
    let period = period.or(ctx.config.period).ok_or_else(|| Error::Validation("floquet needs --period or config period".into()))?;
    let a = ctx.config.coefficient_provider()?;
    let window = ctx.config.window()?;
    let check = check_diagonal_periodicity(&a, period, &window);
    report.detail("periodic", json!(check.periodic));
    if let Some(t) = &check.counterexample {
        report.detail("counterexample", point_json(t));
        report.fail(format!("coefficients are not {period}-diagonal-periodic at {t}"));
        return Ok(());
    }
    let fd = FloquetDecomposition::build(&a, period, &window)?;
    report.residual("reconstruction", fd.reconstruction_residual());
    report.residual("p_periodicity", fd.periodicity_residual());
    report.residual("proposition", fd.proposition_residual(&[1, 2, 3])?);
    let mut rows = Vec::new();
    for (base, rec) in fd.records() {
        rows.extend(multiplier_rows(base, &rec.multipliers.values()));
    }
    ctx.write_rows(report, "multipliers.csv", &multiplier_header(window.dim()), &rows)?;
    if let Some(path) = transport {
        let rec = ctx.config.recurrence()?;
        let field = SolutionField::read_csv(File::open(path)?)?;
        let dir = match direction {
            TransportDirection::Forward => Direction::Forward,
            TransportDirection::Inverse => Direction::Inverse,
        };
        let out = transport_solution(&rec, period, &field, dir)?;
        let residual = match direction {
            TransportDirection::Forward => homogeneous_residual(&a, &out),
            TransportDirection::Inverse => homogeneous_residual(&fd.b_provider(), &out),
        };
        report.residual("transport", residual);
        ctx.write_field(report, "transported.csv", &out)?;
    }
    Ok(())
}

struct HicksArgs<'a> {
    gamma: Option<&'a str>,
    alpha: Option<&'a str>,
    window: Option<&'a str>,
    boundary: Option<&'a Path>,
    classify: bool,
    multipliers: bool,
    system: bool,
}

fn flag_scalars(s: Option<&str>) -> Result<Option<Scalars>> {
    s.map(Scalars::parse_flag).transpose()
}

fn run_hicks(ctx: &Ctx, report: &mut RunReport, args: HicksArgs<'_>) -> Result<()> {
    let params = ctx.config.hicks_params(flag_scalars(args.gamma)?.as_ref(), flag_scalars(args.alpha)?.as_ref())?;
    let window = match args.window {
        Some(s) => Window::new(parse_dims(s)?)?,
        None => ctx.config.window()?,
    };
    let income_override: Option<IncomeSpec> = args.boundary.map(read_json).transpose()?;
    let income = ctx.config.income(income_override.as_ref(), &window)?;
    if args.classify {
        let c = hicks::classify(&params)?;
        let roots: Vec<[f64; 2]> = c.roots.roots.iter().map(|z| [z.re, z.im]).collect();
        report.detail(
            "classification",
            json!({
                "discriminant": c.discriminant,
                "root_kind": c.root_kind,
                "roots": roots,
                "stable": c.stable,
                "accelerator_class": c.accelerator_class,
            }),
        );
    }
    let field = hicks::solve_second_order(&params, &income, &window)?;
    ctx.write_field(report, "field.csv", &field)?;
    let mut signs = hicks::negativity_warnings(&field);
    if args.system {
        let seed = match ctx.config.hicks.as_ref().and_then(|h| h.consumption.as_ref()) {
            Some(spec) => ConsumptionSeed::Layers(spec.build(window.dim(), 1)?),
            None => ConsumptionSeed::Derived,
        };
        let sys = hicks::solve_system(&params, &income, &seed, &window)?;
        report.residual("system_vs_scalar", sys.component(0).max_relative_error(&field, 1e-12)?);
        ctx.write_field(report, "system.csv", &sys)?;
        signs = hicks::negativity_warnings(&sys);
    }
    let names = ["Y", "C"];
    report.warnings.extend(
        signs.iter().map(|w| format!("{} = {} < 0 at {}", names.get(w.component).unwrap_or(&"?"), format_number(w.value), w.point)),
    );
    if args.multipliers {
        let mut rows = Vec::new();
        let mut worst = 0.0f64;
        for base in window.diagonal_bases() {
            let hm = hicks::hicks_floquet_multipliers(&params, &base)?;
            worst = worst.max((hm.det - hm.alpha_product).abs() / hm.alpha_product.abs().max(1.0));
            rows.extend(multiplier_rows(&base, &hm.quadratic.roots));
        }
        report.residual("det_vs_alpha_product", worst);
        ctx.write_rows(report, "multipliers.csv", &multiplier_header(window.dim()), &rows)?;
    }
    Ok(())
}

fn gf_json<C: Coeff>(gf: &RationalGF<C>) -> Value {
    let terms = |p: &genfunc::BivariatePolynomial<C>| {
        p.terms_grlex().into_iter().map(|((i, j), c)| json!([i, j, c.to_string()])).collect::<Vec<_>>()
    };
    json!({"numerator": terms(gf.numerator()), "denominator": terms(gf.denominator())})
}

fn coefficient_rows<C: Coeff>(series: &BivariateSeries<C>, render: impl Fn(&C) -> String) -> Vec<Vec<String>> {
    series.cells().map(|(i, j, c)| vec![i.to_string(), j.to_string(), render(c)]).collect()
}

struct GfRun<C: Coeff> {
    gf: RationalGF<C>,
    series: Option<BivariateSeries<C>>,
}

fn build_gf<C: Coeff>(
    p: &GfParams<C>,
    layers: &genfunc::BoundaryLayers<C>,
    variant: u8,
    orders: Option<(usize, usize)>,
) -> Result<GfRun<C>> {
    let gf = match variant {
        1 => genfunc::build_gf_variant1(p, layers)?,
        2 => genfunc::build_gf_variant2(p, layers)?,
        v => return Err(Error::Validation(format!("variant must be 1 or 2, got {v}"))),
    };
    let series = orders.map(|(m, n)| genfunc::expand(&gf, m, n)).transpose()?;
    Ok(GfRun { gf, series })
}

fn run_gf(
    ctx: &Ctx,
    report: &mut RunReport,
    gamma: Option<&str>,
    alpha: Option<&str>,
    layers: Option<&Path>,
    variant: Option<u8>,
    expand: Option<&str>,
) -> Result<()> {
    let block = ctx.config.gf.as_ref();
    let (g, a) = ctx.config.exact_params(flag_scalars(gamma)?.as_ref(), flag_scalars(alpha)?.as_ref())?;
    let hp = hicks::HicksParams::constant(g.to_f64()?, a.to_f64()?)?;
    let layers: LayersSpec = match layers {
        Some(p) => read_json(p)?,
        None => block.and_then(|b| b.layers.clone()).ok_or_else(|| Error::Validation("gf needs --layers or gf.layers".into()))?,
    };
    let variant = variant.or(block.and_then(|b| b.variant)).unwrap_or(1);
    let orders = match expand {
        Some(s) => match parse_dims(s)?.as_slice() {
            [m, n] => Some((*m as usize, *n as usize)),
            _ => return Err(Error::Validation(format!("--expand wants MxN, got {s:?}"))),
        },
        None => block.and_then(|b| b.expand).map(|[m, n]| (m, n)),
    };
    let exact = layers.is_exact() || g.is_exact() || a.is_exact();
    report.detail("exact", json!(exact));
    let (gf_value, rows, residual) = if exact {
        let p = GfParams::new(g.to_rational()?, a.to_rational()?);
        let run = build_gf(&p, &layers.to_rational()?, variant, orders)?;
        let residual = run.series.as_ref().map(|s| genfunc::verify_functional_equation(&run.gf, s).max());
        (gf_json(&run.gf), run.series.as_ref().map(|s| coefficient_rows(s, BigRational::to_string)), residual)
    } else {
        let p = GfParams::from_hicks(&hp)?;
        let run = build_gf(&p, &layers.to_f64()?, variant, orders)?;
        let residual = run.series.as_ref().map(|s| genfunc::verify_functional_equation(&run.gf, s).max());
        (gf_json(&run.gf), run.series.as_ref().map(|s| coefficient_rows(s, |c| format_number(*c))), residual)
    };
    println!("G = {}", render_terms(&gf_value["numerator"]));
    println!("Q = {}", render_terms(&gf_value["denominator"]));
    report.detail("gf", gf_value);
    if let Some(r) = residual {
        report.residual("functional_equation", r);
    }
    if let Some(rows) = rows {
        ctx.write_rows(report, "gf_coefficients.csv", &["m", "n", "coeff"].map(String::from), &rows)?;
    }
    Ok(())
}

fn render_terms(terms: &Value) -> String {
    let parts: Vec<String> = terms
        .as_array()
        .map(|a| {
            a.iter().map(|t| format!("({})·x^{}·y^{}", t[2].as_str().unwrap_or("?"), t[0], t[1])).collect()
        })
        .unwrap_or_default();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

fn run_way(ctx: &Ctx, report: &mut RunReport) -> Result<()> {
    let spec = ctx.config.way.as_ref().ok_or_else(|| Error::Validation("config has no way block".into()))?;
    let mats = spec.steps.iter().map(config::matrix).collect::<Result<Vec<_>>>()?;
    let x0 = config::vector(&spec.x0);
    let steps = match &spec.offsets {
        Some(offsets) => {
            if offsets.len() != mats.len() {
                return Err(Error::DimensionMismatch { expected: mats.len(), found: offsets.len() });
            }
            mats.iter()
                .zip(offsets)
                .map(|(m, o)| AffineMap::new(m.clone(), config::vector(o)).map(StepMap::Affine))
                .collect::<Result<Vec<_>>>()?
        }
        None => mats.iter().map(|m| AffineMap::linear(m.clone()).map(StepMap::Affine)).collect::<Result<Vec<_>>>()?,
    };
    let rec = PathRecurrence::chained(steps, x0.clone())?;
    let t = MultiIndex::new(spec.t.clone())?;
    let walked = solve_path(&rec, &t)?;
    if spec.offsets.is_none() {
        let closed = closed_form_chained(&mats, &x0, &t)?;
        let diff = crate::recurrence::relative_error(&walked, &closed, 1e-300);
        report.residual("closed_form_vs_path", diff);
    }
    let rows: Vec<Vec<String>> =
        walked.iter().enumerate().map(|(k, z)| vec![k.to_string(), format_number(z.re), format_number(z.im)]).collect();
    ctx.write_rows(report, "way.csv", &["component", "re", "im"].map(String::from), &rows)
}
