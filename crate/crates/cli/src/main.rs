//! `mcrt`: plot-ready CSV/JSON for every computation in `mcrt-core`.
//!
//! Exit codes: 0 success, 2 invalid input, 3 a residual or tolerance gate
//! failed (the data is still written), 1 anything else.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use mcrt_core::continuum::{
    consistency_relation_residual, fracdif_residual, history_density, history_density_series, laplace_consistency, moment,
    moment_by_quadrature, ode_residual, rho_hypergeometric, rho_integral, ContinuousHistory, DensityRoute,
    Tolerance, UniversalWeights,
};
use mcrt_core::discrete::{history_tally, rescaled_profile, scaling_exponent, DiscreteHistory, Ensemble};
use mcrt_core::io::{format_decimal, format_rational, format_rational_decimal, CsvTable};
use mcrt_core::models::minimal_weights;
use mcrt_core::shapes::{census_table, shape_weight, Shape};
use mcrt_core::{rat, BigFloat, Error, Precision, Real};

const TWO_FORMULA_GATE: f64 = 1e-10;
const MOMENT_GATE: f64 = 1e-6;
const RESIDUAL_GATE: f64 = 1e-7;
const ODE_GATE: f64 = 1e-8;
const ORACLE_MAX: usize = 8;

#[derive(Parser)]
#[command(name = "mcrt", version, about = "Multicritical random trees: discrete and continuum observables")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal k-th order weights `g_i`, keyed by `i`.
    Weights {
        #[arg(long, value_parser = order)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Exact average profile ρ_N(L) of the minimal model.
    Profile {
        #[arg(long, value_parser = order)]
        k: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Emit (L/s, s ρ_N(L)) with s = (kN)^{(k−1)/k}.
        #[arg(long)]
        rescaled: bool,
        #[command(flatten)]
        out: Output,
    },
    /// ρ(x) from the integral and from the series, and their difference.
    Continuum {
        #[arg(long, value_parser = order)]
        k: usize,
        #[command(flatten)]
        grid: Grid,
        #[command(flatten)]
        out: Output,
    },
    /// Sup distance between rescaled discrete profiles and ρ.
    Converge {
        #[arg(long, value_parser = order)]
        k: usize,
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        n: Vec<u64>,
        #[command(flatten)]
        out: Output,
    },
    /// Census of history shapes with m leaves.
    Shapes {
        #[arg(long, value_parser = order)]
        k: usize,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..=10))]
        m: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Moments ⟨x^b⟩ in closed form and by quadrature.
    Moments {
        #[arg(long, value_parser = order)]
        k: usize,
        #[arg(long = "b-max", default_value_t = 6, value_parser = clap::value_parser!(u64).range(0..=20))]
        b_max: u64,
        #[command(flatten)]
        out: Output,
    },
    /// Weight of one history: a discrete one such as `(((1)(2))L=[2,1,1])`
    /// with `--n`, or a continuum shape such as `(2:*(3:***))` with
    /// `--lengths` or `--x`.
    History {
        #[arg(long, value_parser = order)]
        k: usize,
        #[arg(long)]
        spec: String,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        n: Option<u64>,
        /// Branch lengths in preorder.
        #[arg(long, value_delimiter = ',')]
        lengths: Vec<f64>,
        /// Total length, split evenly over the branches.
        #[arg(long)]
        x: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Residual suite: ODE, fractional equation, leaf addition, size transform, moments.
    Checks {
        #[arg(long, value_parser = order)]
        k: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args)]
struct Grid {
    /// A single point; overrides the range.
    #[arg(long)]
    x: Option<f64>,
    #[arg(long = "x-max", default_value_t = 4.0)]
    x_max: f64,
    #[arg(long, default_value_t = 200)]
    steps: usize,
}

#[derive(Args)]
struct Output {
    /// Working precision of high-precision evaluations, in decimal digits.
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u32).range(16..=2000))]
    precision: u32,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn order(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|_| format!("{s:?} is not an integer"))?;
    if !(2..=32).contains(&k) {
        return Err(format!("k must be between 2 and 32, got {k}"));
    }
    Ok(k)
}

enum Failure {
    Invalid(String),
    Gate(String),
    Other(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOrder(_)
            | Error::InvalidArgument(_)
            | Error::InvalidHistory(_)
            | Error::Parse(_)
            | Error::ZeroPartitionFunction(_)
            | Error::OracleBound { .. }
            | Error::MissingCriticalPoint
            | Error::NotMulticritical { .. }
            | Error::UnaryVertices => Failure::Invalid(e.to_string()),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Other(e.into())
    }
}

type Run<T = ()> = Result<T, Failure>;

/// A table plus the gate verdict that goes with it.
struct Report {
    table: CsvTable,
    failed: Vec<String>,
}

fn emit(out: &Output, text: &str) -> Run {
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render(out: &Output, report: Report) -> Run {
    let text = match out.format.unwrap_or(Format::Csv) {
        Format::Csv => report.table.to_csv(),
        Format::Json => report.table.to_json(),
    };
    emit(out, &text)?;
    if report.failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Gate(report.failed.join("; ")))
    }
}

fn ctx(out: &Output) -> Precision {
    Precision::from_digits(out.precision)
}

fn big(v: f64, c: Precision) -> BigFloat {
    BigFloat::from_f64_in(v, c)
}

fn dec(v: &BigFloat) -> String {
    format_decimal(v.to_f64())
}

fn weights(k: usize, out: &Output) -> Run {
    let w = minimal_weights(k)?;
    match out.format.unwrap_or(Format::Json) {
        Format::Json => emit(out, &format!("{}\n", w.to_json_value()["g"])),
        Format::Csv => {
            let mut t = CsvTable::new(["i", "g", "g_decimal"]);
            for (i, g) in &w.g {
                t.push(vec![i.to_string(), format_rational(g), format_rational_decimal(g)]);
            }
            t.footer("k", k.to_string());
            emit(out, &t.to_csv())
        }
    }
}

fn profile(k: usize, n: usize, rescaled: bool, out: &Output) -> Report {
    let table = match Ensemble::new(&minimal_weights(k).expect("k validated"), n).and_then(|e| e.average_profile(n)) {
        Ok(t) => t,
        Err(e) => return gate_error(e),
    };
    let mut failed = Vec::new();
    if table.total() != rat(1, 1) {
        failed.push(format!("profile sums to {}", format_rational(&table.total())));
    }
    let mut t = if rescaled {
        let mut t = CsvTable::new(["x", "y"]);
        for (x, y) in rescaled_profile::<BigFloat>(&table, k, ctx(out)) {
            t.push(vec![dec(&x), dec(&y)]);
        }
        t.footer("N", n.to_string());
        t.footer("sum", format_rational(&table.total()));
        t
    } else {
        table.to_csv_table()
    };
    t.footer("k", k.to_string());
    Report { table: t, failed }
}

fn gate_error(e: Error) -> Report {
    let mut t = CsvTable::new(["error"]);
    t.push(vec![e.to_string()]);
    Report { table: t, failed: vec![e.to_string()] }
}

fn continuum(k: usize, grid: &Grid, out: &Output) -> Run<Report> {
    let xs: Vec<f64> = match grid.x {
        Some(x) => vec![x],
        None => {
            if grid.steps == 0 || !(grid.x_max > 0.0) {
                return Err(Failure::Invalid("need --steps ≥ 1 and --x-max > 0".into()));
            }
            (0..=grid.steps).map(|i| grid.x_max * i as f64 / grid.steps as f64).collect()
        }
    };
    if xs.iter().any(|x| !(*x >= 0.0)) {
        return Err(Failure::Invalid("x must be non-negative".into()));
    }
    let c = ctx(out);
    let rows: Vec<Result<(f64, BigFloat, BigFloat), Error>> = xs
        .par_iter()
        .map(|&x| {
            let xb = big(x, c);
            let a = rho_integral(k, &xb, TWO_FORMULA_GATE * 1e-2)?.value;
            let b = rho_hypergeometric(k, &xb, Tolerance::Absolute(TWO_FORMULA_GATE * 1e-2))?.value;
            Ok((x, a, b))
        })
        .collect();
    let mut t = CsvTable::new(["x", "rho_integral", "rho_hyper", "abs_diff"]);
    let mut worst = 0.0f64;
    for r in rows {
        let (x, a, b) = r?;
        let d = (a.clone() - b.clone()).abs().to_f64();
        worst = worst.max(d);
        t.push(vec![format_decimal(x), dec(&a), dec(&b), format_decimal(d)]);
    }
    t.footer("k", k.to_string());
    t.footer("max_abs_diff", format_decimal(worst));
    let failed = if worst < TWO_FORMULA_GATE {
        Vec::new()
    } else {
        vec![format!("integral and series differ by {worst:e}, gate {TWO_FORMULA_GATE:e}")]
    };
    Ok(Report { table: t, failed })
}

fn converge(k: usize, sizes: &[usize], out: &Output) -> Run<Report> {
    let c = ctx(out);
    let n_max = *sizes.iter().max().expect("clap requires one size");
    let ens = Ensemble::new(&minimal_weights(k)?, n_max)?;
    let tables = ens.average_profiles(sizes)?;
    let dist: Vec<Result<f64, Error>> = tables
        .par_iter()
        .map(|t| {
            let mut sup = 0.0f64;
            for (x, y) in rescaled_profile::<BigFloat>(t, k, c) {
                let r = rho_hypergeometric(k, &x, Tolerance::Absolute(1e-12))?.value;
                sup = sup.max((y - r).abs().to_f64());
            }
            Ok(sup)
        })
        .collect();
    let dist: Vec<f64> = dist.into_iter().collect::<Result<_, _>>()?;
    let mut t = CsvTable::new(["N", "sup_distance"]);
    for (n, d) in sizes.iter().zip(&dist) {
        t.push(vec![n.to_string(), format_decimal(*d)]);
    }
    t.footer("k", k.to_string());
    let mut failed = Vec::new();
    // only meaningful when the sizes grow
    let increasing = sizes.windows(2).all(|w| w[0] < w[1]);
    if increasing && !dist.windows(2).all(|w| w[1] < w[0]) {
        failed.push("sup distance does not decrease with N".to_string());
    }
    Ok(Report { table: t, failed })
}

fn shapes(k: usize, m: usize) -> Report {
    let t = census_table(k, m);
    let rule = t.footer.iter().find(|(key, _)| key == "sum_rule").map(|(_, v)| v.clone());
    let failed = match rule.as_deref() {
        Some("1") => Vec::new(),
        other => vec![format!("sum rule gives {other:?}")],
    };
    Report { table: t, failed }
}

fn moments(k: usize, b_max: usize, out: &Output) -> Run<Report> {
    let c = ctx(out);
    let quad = moment_by_quadrature::<BigFloat>(k, b_max, c, 1e-12)?;
    let mut t = CsvTable::new(["b", "closed_form", "quadrature", "rel_diff"]);
    let mut worst = 0.0f64;
    for (b, q) in quad.iter().enumerate() {
        let exact = moment::<BigFloat>(k, b, c);
        let rel = ((q.value.clone() - exact.clone()) / exact.clone()).abs().to_f64();
        worst = worst.max(rel);
        t.push(vec![b.to_string(), dec(&exact), dec(&q.value), format_decimal(rel)]);
    }
    t.footer("k", k.to_string());
    let failed = if worst < MOMENT_GATE {
        Vec::new()
    } else {
        vec![format!("moments deviate by {worst:e} relative")]
    };
    Ok(Report { table: t, failed })
}

fn history(k: usize, spec: &str, n: Option<usize>, lengths: &[f64], x: Option<f64>, out: &Output) -> Run<Report> {
    if spec.contains("L=") {
        let h: DiscreteHistory = spec.parse()?;
        let n = n.ok_or_else(|| Failure::Invalid("a discrete history needs --n".into()))?;
        let w = minimal_weights(k)?;
        let weight = Ensemble::new(&w, n)?.history_weight(n, &h)?;
        let mut t = CsvTable::new(["history", "N", "weight", "weight_decimal", "alpha"]);
        t.push(vec![
            h.to_string(),
            n.to_string(),
            format_rational(&weight),
            format_rational_decimal(&weight),
            format_rational(&scaling_exponent(&h, k)),
        ]);
        let mut failed = Vec::new();
        if n <= ORACLE_MAX {
            let oracle = history_tally(&w, n, h.marks())?.get(&h).cloned().unwrap_or_else(|| rat(0, 1));
            t.footer("oracle", format_rational(&oracle));
            if oracle != weight {
                failed.push(format!("enumeration gives {}", format_rational(&oracle)));
            }
        }
        return Ok(Report { table: t, failed });
    }

    let shape: Shape = spec.parse()?;
    let p = shape.branch_counts();
    let branches = shape.branches();
    let c = ctx(out);
    let lengths: Vec<BigFloat> = match (lengths.is_empty(), x) {
        (false, None) => lengths.iter().map(|&l| big(l, c)).collect(),
        (true, Some(total)) => vec![big(total / branches as f64, c); branches],
        _ => return Err(Failure::Invalid("give exactly one of --lengths and --x".into())),
    };
    let h = ContinuousHistory::new(k, p.clone(), lengths)?;
    let tol = TWO_FORMULA_GATE * 1e-2;
    let by_integral = history_density(k, &h, tol)?;
    let by_series = history_density_series(k, &p, &h.total_length(), tol)?;
    let diff = (by_integral.value.clone() - by_series.value.clone()).abs().to_f64();
    let mut t = CsvTable::new(["route", "density", "error"]);
    t.push(vec!["integral".into(), dec(&by_integral.value), format_decimal(by_integral.error)]);
    t.push(vec!["series".into(), dec(&by_series.value), format_decimal(by_series.error)]);
    let counts: Vec<String> = p.iter().map(|(i, c)| format!("p_{i}={c}")).collect();
    t.footer("shape", shape.to_string());
    t.footer("counts", counts.join(" "));
    t.footer("total_length", dec(&h.total_length()));
    t.footer("mu_product", format_rational(&UniversalWeights::new(k).mu_product(&p)));
    t.footer("shape_weight", format_rational(&shape_weight(k, &shape)));
    t.footer("abs_diff", format_decimal(diff));
    let failed = if diff < TWO_FORMULA_GATE {
        Vec::new()
    } else {
        vec![format!("integral and series routes differ by {diff:e}")]
    };
    Ok(Report { table: t, failed })
}

enum Check {
    Ode(f64),
    Fracdif(f64),
    Consistency(BTreeMap<usize, usize>, f64),
    Laplace(BTreeMap<usize, usize>, f64),
    TwoFormula(f64),
    Moments(usize),
}

impl Check {
    fn name(&self) -> (&'static str, String, f64) {
        let p = |q: &BTreeMap<usize, usize>| {
            let s: Vec<String> = q.iter().map(|(i, c)| format!("p_{i}={c}")).collect();
            if s.is_empty() { "p={}".to_string() } else { s.join(" ") }
        };
        match self {
            Check::Ode(x) => ("ode", format!("x={x}"), ODE_GATE),
            Check::Fracdif(x) => ("fracdif", format!("x={x}"), RESIDUAL_GATE),
            Check::Consistency(q, x) => ("leaf_addition", format!("{} x={x}", p(q)), RESIDUAL_GATE),
            Check::Laplace(q, x) => ("size_transform", format!("{} x={x}", p(q)), RESIDUAL_GATE),
            Check::TwoFormula(x) => ("two_formula", format!("x={x}"), TWO_FORMULA_GATE),
            Check::Moments(b) => ("moments", format!("b=0..{b}"), MOMENT_GATE),
        }
    }

    fn run(&self, k: usize, c: Precision) -> Result<f64, Error> {
        let route = DensityRoute::Series;
        Ok(match self {
            Check::Ode(x) => {
                let r = ode_residual(k, &big(*x, c), 1e-12)?;
                r.value.abs().to_f64().max(r.error)
            }
            Check::Fracdif(x) => fracdif_residual(k, &[big(*x, c)], 1e-9)?,
            Check::Consistency(q, x) => consistency_relation_residual(k, q, &big(*x, c), route, 1e-9)?.value.abs().to_f64(),
            Check::Laplace(q, x) => laplace_consistency(k, &big(*x, c), q, route, 1e-9)?.value.abs().to_f64(),
            Check::TwoFormula(x) => {
                let xb = big(*x, c);
                let a = rho_integral(k, &xb, 1e-12)?.value;
                let b = rho_hypergeometric(k, &xb, Tolerance::Absolute(1e-12))?.value;
                (a - b).abs().to_f64()
            }
            Check::Moments(b_max) => {
                let q = moment_by_quadrature::<BigFloat>(k, *b_max, c, 1e-12)?;
                q.iter()
                    .enumerate()
                    .map(|(b, e)| {
                        let exact = moment::<BigFloat>(k, b, c);
                        ((e.value.clone() - exact.clone()) / exact).abs().to_f64()
                    })
                    .fold(0.0, f64::max)
            }
        })
    }
}

fn checks(k: usize, out: &Output) -> Report {
    let c = ctx(out);
    let xs = [0.5, 1.0, 2.0];
    let branch = BTreeMap::from([(k, 1)]);
    let mut suite: Vec<Check> = Vec::new();
    suite.extend(xs.iter().map(|&x| Check::Ode(x)));
    suite.extend(xs.iter().map(|&x| Check::Fracdif(x)));
    suite.extend(xs.iter().map(|&x| Check::Consistency(BTreeMap::new(), x)));
    if k > 2 {
        suite.push(Check::Consistency(BTreeMap::from([(k - 1, 1)]), 1.0));
    }
    suite.extend([0.5, 1.0].iter().map(|&x| Check::Laplace(BTreeMap::new(), x)));
    suite.push(Check::Laplace(branch, 1.0));
    suite.extend(xs.iter().map(|&x| Check::TwoFormula(x)));
    suite.push(Check::Moments(6));

    let results: Vec<Result<f64, Error>> = suite.par_iter().map(|chk| chk.run(k, c)).collect();
    let mut t = CsvTable::new(["check", "case", "value", "tolerance", "status"]);
    let mut failed = Vec::new();
    for (chk, r) in suite.iter().zip(results) {
        let (name, case, tol) = chk.name();
        let (value, ok) = match r {
            Ok(v) => (format_decimal(v), v < tol),
            Err(e) => (e.to_string(), false),
        };
        if !ok {
            failed.push(format!("{name} {case}"));
        }
        t.push(vec![name.into(), case, value, format_decimal(tol), if ok { "pass" } else { "FAIL" }.into()]);
    }
    t.footer("k", k.to_string());
    t.footer("passed", format!("{}/{}", suite.len() - failed.len(), suite.len()));
    Report { table: t, failed }
}

fn dispatch(cli: Cli) -> Run {
    match cli.command {
        Command::Weights { k, out } => weights(k, &out),
        Command::Profile { k, n, rescaled, out } => {
            let report = profile(k, n as usize, rescaled, &out);
            render(&out, report)
        }
        Command::Continuum { k, grid, out } => {
            let report = continuum(k, &grid, &out)?;
            render(&out, report)
        }
        Command::Converge { k, n, out } => {
            let sizes: Vec<usize> = n.iter().map(|&v| v as usize).collect();
            let report = converge(k, &sizes, &out)?;
            if sizes.len() == 1 && out.format != Some(Format::Json) {
                return emit(&out, &format!("{}\n", report.table.rows[0][1]));
            }
            render(&out, report)
        }
        Command::Shapes { k, m, out } => render(&out, shapes(k, m as usize)),
        Command::Moments { k, b_max, out } => {
            let report = moments(k, b_max as usize, &out)?;
            render(&out, report)
        }
        Command::History { k, spec, n, lengths, x, out } => {
            let report = history(k, &spec, n.map(|v| v as usize), &lengths, x, &out)?;
            render(&out, report)
        }
        Command::Checks { k, out } => render(&out, checks(k, &out)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invalid(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Gate(msg)) => {
            eprintln!("gate failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
