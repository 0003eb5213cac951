//! `pss`: verify pseudo-spherical problem files, reconstruct surfaces and
//! merge check reports.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use pseudosphere::catalog::{self, sine_gordon_kink};
use pseudosphere::immerse::{
    export_mesh, immerse, sidecar_path, GridSpec, ImmerseError, Immersion, ImmersionConfig,
    NumericSpec, SolutionSource,
};
use pseudosphere::jetexpr::{normalize, Expr, Rational, Scheme};
use pseudosphere::parser::{parse_expr, parse_problem, ParamBinding, ProblemDef};
use pseudosphere::verify::{Check, Report, Verifier};

const DEFAULT_NUMERIC_DATA: &str = "1 + cos(x)/10";

#[derive(Parser)]
#[command(name = "pss", version, about = "Pseudo-spherical surface toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run symbolic checks on a catalog entry or problem file.
    Verify(VerifyArgs),
    /// Reconstruct the surface of a solution and audit its curvature.
    Immerse(ImmerseArgs),
    /// List the shipped catalog.
    Catalog,
    /// Merge report files written by `verify --report`.
    Report(ReportArgs),
}

#[derive(Args)]
struct VerifyArgs {
    /// Catalog name or path to a `.pssp` file.
    problem: String,
    /// Seed for the randomized zero test.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated checks; defaults to every applicable one.
    #[arg(long, value_delimiter = ',')]
    checks: Vec<String>,
    /// Write the tab-separated summary here.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Bind a parameter, e.g. `--param m0=3/100`.
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
}

#[derive(Args)]
struct ImmerseArgs {
    /// Catalog name or path to a `.pssp` file.
    problem: String,
    /// Closed-form soliton with its parameters, e.g. `alpha=1`.
    #[arg(long, value_name = "NAME=VALUE", group = "source")]
    soliton: Vec<String>,
    /// Constant solution, e.g. `u=0`.
    #[arg(long, value_name = "u=VALUE", group = "source")]
    constant: Option<String>,
    /// Any closed-form solution `u(x, t)`.
    #[arg(long, value_name = "EXPR", group = "source")]
    solution: Option<String>,
    /// Periodic numeric solution from initial or terminal data `u(x)`.
    #[arg(long, value_name = "DATA", num_args = 0..=1, default_missing_value = DEFAULT_NUMERIC_DATA, group = "source")]
    numeric: Option<String>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    t1: Option<f64>,
    #[arg(long = "param", value_name = "NAME=VALUE")]
    params: Vec<String>,
    /// Curvature audit tolerance on `max |K + 1|`.
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Solver substeps per output row (numeric runs).
    #[arg(long)]
    substeps: Option<usize>,
    /// Mesh path; the CSV sidecar is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    paths: Vec<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Error)]
enum CliError {
    /// Bad input or configuration: exit 2.
    #[error("{0}")]
    Config(String),
    /// The run completed and found a problem: exit 1.
    #[error("{0}")]
    Failed(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failed(_) => 1,
        }
    }
}

fn config(e: impl ToString) -> CliError {
    CliError::Config(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Immerse(a) => cmd_immerse(a),
        Command::Catalog => cmd_catalog(),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

struct Loaded {
    problem: ProblemDef,
    solutions: Vec<(String, Expr)>,
}

fn load(arg: &str) -> Result<Loaded, CliError> {
    let path = Path::new(arg);
    if path.is_file() {
        let text = fs::read_to_string(path).map_err(|e| config(format!("{arg}: {e}")))?;
        let problem = parse_problem(&text).map_err(|e| config(format!("{arg}: {e}")))?;
        return Ok(Loaded {
            problem,
            solutions: Vec::new(),
        });
    }
    let entry = catalog::get(arg).map_err(config)?;
    Ok(Loaded {
        problem: entry.problem,
        solutions: entry.solutions,
    })
}

fn split_assignment(s: &str) -> Result<(&str, &str), CliError> {
    s.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| config(format!("expected NAME=VALUE, got `{s}`")))
}

fn exact_value(name: &str, text: &str) -> Result<Rational, CliError> {
    let e = parse_expr(text).map_err(|e| config(format!("{name}: {e}")))?;
    normalize(&e)
        .as_const()
        .cloned()
        .ok_or_else(|| config(format!("{name}: `{text}` is not an exact number")))
}

fn bind_params(problem: &mut ProblemDef, params: &[String]) -> Result<(), CliError> {
    for p in params {
        let (k, v) = split_assignment(p)?;
        let value = exact_value(k, v)?;
        problem.bind(k, value).map_err(config)?;
    }
    Ok(())
}

fn select_checks(problem: &ProblemDef, requested: &[String]) -> Result<Vec<Check>, CliError> {
    if requested.is_empty() {
        let mut out = Vec::new();
        for c in Check::ALL {
            match c.inapplicable(problem) {
                Some(why) => eprintln!("note: skipping {}: {why}", c.name()),
                None => out.push(c),
            }
        }
        return Ok(out);
    }
    let mut out = Vec::new();
    for name in requested {
        let c = Check::from_name(name.trim()).ok_or_else(|| {
            let known: Vec<&str> = Check::ALL.iter().map(|c| c.name()).collect();
            config(format!(
                "unknown check `{name}` (known: {})",
                known.join(", ")
            ))
        })?;
        if let Some(why) = c.inapplicable(problem) {
            return Err(config(format!("check {} cannot run: {why}", c.name())));
        }
        if !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

fn cmd_verify(a: VerifyArgs) -> Result<u8, CliError> {
    let mut problem = load(&a.problem)?.problem;
    bind_params(&mut problem, &a.params)?;
    let checks = select_checks(&problem, &a.checks)?;
    let mut verifier = Verifier::new(&problem.name);
    if let Some(seed) = a.seed {
        verifier = verifier.with_seed(seed);
    }
    let report = verifier.verify_problem(&problem, &checks);
    print!("{}", report.to_text());
    if let Some(path) = &a.report {
        fs::write(path, report.summary())
            .map_err(|e| config(format!("{}: {e}", path.display())))?;
    }
    Ok(if report.has_errors() {
        2
    } else if report.all_passed() {
        0
    } else {
        1
    })
}

fn solution_source(a: &ImmerseArgs, loaded: &Loaded) -> Result<SolutionSource, CliError> {
    if let Some(data) = &a.numeric {
        let mut spec =
            NumericSpec::new(parse_expr(data).map_err(|e| config(format!("--numeric: {e}")))?);
        if let Some(s) = a.substeps {
            spec.substeps = s;
        }
        return Ok(SolutionSource::Numeric(spec));
    }
    if let Some(c) = &a.constant {
        let (k, v) = split_assignment(c)?;
        if k != "u" {
            return Err(config(format!("--constant expects u=VALUE, got `{c}`")));
        }
        let value = parse_expr(v).map_err(|e| config(format!("--constant: {e}")))?;
        return Ok(SolutionSource::ClosedForm(value));
    }
    if let Some(s) = &a.solution {
        let u = parse_expr(s).map_err(|e| config(format!("--solution: {e}")))?;
        return Ok(SolutionSource::ClosedForm(u));
    }
    if a.soliton.is_empty() {
        return Err(config(
            "choose a solution: --soliton, --constant, --solution or --numeric",
        ));
    }
    let base = match loaded.solutions.first() {
        Some((_, u)) => u.clone(),
        None if loaded.problem.equation.scheme() == Scheme::Hyperbolic => sine_gordon_kink(),
        None => return Err(config("this problem has no closed-form soliton")),
    };
    let mut values = Vec::new();
    for s in &a.soliton {
        let (k, v) = split_assignment(s)?;
        values.push((k.to_string(), Expr::constant(exact_value(k, v)?)));
    }
    let u = base.substitute(&|p| values.iter().find(|(k, _)| k == p).map(|(_, v)| v.clone()));
    if let Some(p) = u.params().into_iter().next() {
        return Err(config(format!("soliton parameter `{p}` has no value")));
    }
    Ok(SolutionSource::ClosedForm(u))
}

fn grid_for(a: &ImmerseArgs, numeric: bool) -> Result<GridSpec, CliError> {
    let (x, t, n) = if numeric {
        ((0.0, std::f64::consts::TAU), (0.0, 0.5), 161)
    } else {
        ((0.2, 1.0), (0.2, 1.0), 101)
    };
    GridSpec::new(
        (a.x0.unwrap_or(x.0), a.x1.unwrap_or(x.1)),
        (a.t0.unwrap_or(t.0), a.t1.unwrap_or(t.1)),
        a.nx.unwrap_or(n),
        a.nt.unwrap_or(n),
    )
    .map_err(config)
}

fn audit_text(run: &Immersion, tol: f64) -> String {
    let mut s = String::new();
    let spec = run.surface.spec;
    let c = &run.curvature;
    let _ = writeln!(
        s,
        "grid          {}x{} on [{}, {}] x [{}, {}]",
        spec.nx, spec.nt, spec.x0, spec.x1, spec.t0, spec.t1
    );
    let _ = writeln!(
        s,
        "solution      {:?}, PDE residual {:.3e}",
        run.solution.provenance, run.solution.residual
    );
    if let Some(d) = run.direction {
        let _ = writeln!(s, "marching      {d:?}");
    }
    let _ = writeln!(s, "compatibility max {:.3e}", run.surface.max_compat());
    let _ = writeln!(
        s,
        "frames        orthonormality {:.1e}, determinant {:.1e}",
        run.surface.orthonormality_deviation(),
        run.surface.determinant_deviation()
    );
    let _ = writeln!(
        s,
        "curvature     {} nodes audited, mean K {:.6}",
        c.audited, c.mean
    );
    for (bound, count) in &c.histogram {
        let _ = writeln!(s, "  |K+1| < {bound:.0e}: {count}");
    }
    let verdict = if c.passes(tol) { "PASS" } else { "FAIL" };
    let _ = writeln!(
        s,
        "max |K+1|     {:.3e} (tolerance {tol:.1e}) {verdict}",
        c.max_dev
    );
    s
}

fn cmd_immerse(a: ImmerseArgs) -> Result<u8, CliError> {
    let loaded = load(&a.problem)?;
    let mut problem = loaded.problem.clone();
    bind_params(&mut problem, &a.params)?;
    if problem.params.get("eta") == Some(&ParamBinding::Free) {
        problem
            .bind("eta", Rational::from_integer(1.into()))
            .map_err(config)?;
    }
    let source = solution_source(&a, &loaded)?;
    let grid = grid_for(&a, matches!(source, SolutionSource::Numeric(_)))?;
    let run = match immerse(&problem, &source, &ImmersionConfig::new(grid)) {
        Ok(run) => run,
        Err(e @ ImmerseError::DegenerateRegion { .. }) => {
            println!("mask report: {e}");
            return Err(CliError::Failed("degenerate region".into()));
        }
        Err(
            e @ (ImmerseError::MissingSymbol(_)
            | ImmerseError::InvalidGrid(_)
            | ImmerseError::InvalidSolution(_)
            | ImmerseError::Unsupported(_)
            | ImmerseError::MissingSff),
        ) => return Err(config(e)),
        Err(e) => return Err(CliError::Failed(e.to_string())),
    };
    print!("{}", audit_text(&run, a.tol));
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.obj", problem.name)));
    let mesh = export_mesh(&run.surface, Some(&run.curvature.k), &out)
        .map_err(|e| CliError::Failed(e.to_string()))?;
    println!(
        "mesh          {} ({} vertices, {} faces), audit {}",
        out.display(),
        mesh.vertices,
        mesh.faces,
        sidecar_path(&out).display()
    );
    Ok(if run.curvature.passes(a.tol) { 0 } else { 1 })
}

fn cmd_catalog() -> Result<u8, CliError> {
    for e in catalog::entries().map_err(config)? {
        let p = &e.problem;
        let scheme = match p.equation.scheme() {
            Scheme::Evolution => format!("evolution, order {}", p.equation.order()),
            Scheme::Hyperbolic => "hyperbolic".to_string(),
        };
        let free = p.free_params();
        println!(
            "{}\t{}\t{}\tparams: {}\tsolutions: {}",
            e.name,
            scheme,
            if p.sff.is_some() { "sff" } else { "no sff" },
            if free.is_empty() {
                "-".to_string()
            } else {
                free.join(",")
            },
            if e.solutions.is_empty() {
                "-".to_string()
            } else {
                e.solutions
                    .iter()
                    .map(|(n, _)| n.as_str())
                    .collect::<Vec<_>>()
                    .join(",")
            }
        );
    }
    Ok(0)
}

fn cmd_report(a: ReportArgs) -> Result<u8, CliError> {
    let mut merged = Report::new();
    for path in &a.paths {
        let text =
            fs::read_to_string(path).map_err(|e| config(format!("{}: {e}", path.display())))?;
        let r =
            Report::parse_summary(&text).map_err(|e| config(format!("{}: {e}", path.display())))?;
        merged = merged.merge(r);
    }
    let text = merged.summary();
    match &a.out {
        Some(path) => {
            fs::write(path, text).map_err(|e| config(format!("{}: {e}", path.display())))?
        }
        None => print!("{text}"),
    }
    Ok(0)
}
