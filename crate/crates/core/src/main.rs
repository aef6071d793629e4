use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hermite_mdm::approx1d::{build_ls_approx, eval_expansion, spectral_lower_bound, worst_case_error_l2};
use hermite_mdm::harness::{all_checks, emit, run_study, Format, Problem, StudyConfig, StudyReport};
use hermite_mdm::hermite::{hermite_eval, kernel_eval_product, kernel_value, AnchoredPoint};
use hermite_mdm::mdm::{assemble, plan, worst_case_error_k, MdmPlan, PlanParams, QuadFamily, DEFAULT_MAX_LEVEL};
use hermite_mdm::quad1d::{build_an, worst_case_error_int};
use hermite_mdm::weights::WeightScheme;
use hermite_mdm::{Error, Result};

#[derive(Parser)]
#[command(name = "hermite-mdm", version, about = "Integration and L2-approximation on Hermite spaces")]
struct Cli {
    /// Directory for study outputs; overrides the configured one.
    #[arg(long, global = true, env = "HERMITE_OUT_DIR")]
    out_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate k_j(x, y), or K(x, y) for two anchored points.
    Kernel(KernelArgs),
    /// Build a shifted composite rule and report its worst-case error.
    Quad(QuadArgs),
    /// Build a least-squares approximation and report its worst-case error.
    Approx(ApproxArgs),
    /// Plan inspection, flat-rule export and end-to-end MDM studies.
    #[command(subcommand)]
    Mdm(MdmCommand),
    /// Run a study described by a TOML file.
    Study(StudyArgs),
    /// Run the invariant suites.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct KernelArgs {
    #[arg(long)]
    scheme: String,
    /// Coordinate index for the univariate kernel.
    #[arg(long, default_value_t = 1)]
    j: usize,
    #[arg(long, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y: Option<f64>,
    /// Active coordinates of the first point, as `j:x,j:x,…`.
    #[arg(long, allow_hyphen_values = true)]
    point_x: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    point_y: Option<String>,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    anchor: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct QuadArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 2)]
    r: usize,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    /// Scheme for the error report; defaults to `pg(r)`.
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the rule here instead of printing only the summary.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ApproxArgs {
    #[arg(long)]
    n: usize,
    /// Basis dimension; defaults to n/4.
    #[arg(long)]
    basis: Option<usize>,
    #[arg(long, default_value = "pg(2)")]
    scheme: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Evaluate the approximation of `1 + c·h_nu` at these points.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    eval: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    nu: usize,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    c: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, default_value = "pg(log:2,3)")]
    scheme: String,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 0.8)]
    kappa: f64,
    #[arg(long, default_value_t = 0.6)]
    delta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    anchor: f64,
    #[arg(long)]
    c0: f64,
    #[arg(long)]
    c1: f64,
}

#[derive(Subcommand)]
enum MdmCommand {
    /// Print or write the active set, budgets and constants.
    Plan {
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the flat rule of a plan file and report its worst-case error.
    Assemble {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value_t = 0.2)]
        quad_delta: f64,
        #[arg(long, default_value_t = DEFAULT_MAX_LEVEL)]
        max_level: usize,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an MDM integration (or approximation) study over an ε grid.
    Run {
        #[arg(long, default_value = "pg(log:2,3)")]
        scheme: String,
        #[arg(long, value_delimiter = ',', required = true)]
        sweep: Vec<f64>,
        #[arg(long)]
        approx: bool,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        c0: Option<f64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "mdm")]
        name: String,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    config: PathBuf,
    /// Comma-separated subset of csv, jsonl, plot.
    #[arg(long, value_delimiter = ',', default_value = "csv,jsonl,plot")]
    format: Vec<String>,
}

fn parse_point(anchor: f64, text: &str) -> Result<AnchoredPoint> {
    let mut entries = Vec::new();
    for cell in text.split(',').map(str::trim).filter(|c| !c.is_empty()) {
        let (j, x) = cell
            .split_once(':')
            .ok_or_else(|| Error::InvalidParameter(format!("point entries are 'j:x', got '{cell}'")))?;
        let j = j.parse().map_err(|e| Error::InvalidParameter(format!("coordinate '{j}': {e}")))?;
        let x = x.parse().map_err(|e| Error::InvalidParameter(format!("value '{x}': {e}")))?;
        entries.push((j, x));
    }
    AnchoredPoint::new(anchor, entries)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text)?;
            eprintln!("wrote {}", p.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn kernel(args: KernelArgs) -> Result<()> {
    let scheme: WeightScheme = args.scheme.parse()?;
    let res = match (&args.point_x, &args.point_y, args.x, args.y) {
        (Some(px), Some(py), _, _) => {
            let (px, py) = (parse_point(args.anchor, px)?, parse_point(args.anchor, py)?);
            kernel_eval_product(&scheme, &px, &py, args.tol)?
        }
        (None, None, Some(x), Some(y)) => kernel_value(&scheme, args.j, x, y, args.tol)?,
        _ => return Err(Error::InvalidParameter("give either --x and --y, or --point-x and --point-y".into())),
    };
    println!("value {}\ntail_bound {:e}\nterms {}", res.value, res.tail_bound, res.terms_used);
    Ok(())
}

fn quad(args: QuadArgs) -> Result<()> {
    let scheme: WeightScheme = match &args.scheme {
        Some(s) => s.parse()?,
        None => WeightScheme::polynomial_1d(args.r as f64)?,
    };
    let rule = build_an(args.n, args.r, args.delta)?;
    let rep = worst_case_error_int(&rule, &scheme, 1, args.tol)?;
    if let Some(out) = &args.out {
        write_or_print(Some(out), &rule.to_text(Some(&scheme)))?;
    }
    println!("nodes {} err {:e} tail {:e} scheme {scheme}", rule.len(), rep.err, rep.tail_bound);
    Ok(())
}

fn approx(args: ApproxArgs) -> Result<()> {
    let scheme: WeightScheme = args.scheme.parse()?;
    let basis = args.basis.unwrap_or((args.n / 4).max(1));
    let ap = build_ls_approx(args.n, basis, &scheme, 1, args.seed)?;
    let rep = worst_case_error_l2(&ap, &scheme, 1, None, args.tol)?;
    println!(
        "nodes {} basis {basis} err {:e} tail {:e} lower_bound {:e}",
        ap.len(),
        rep.err,
        rep.tail_bound,
        spectral_lower_bound(&scheme, 1, ap.len())
    );
    if !args.eval.is_empty() {
        let coefficients = ap.apply(|x| 1.0 + args.c * hermite_eval(args.nu, x).expect("degree is a usize"));
        for x in &args.eval {
            println!("{x} {}", eval_expansion(&coefficients, *x));
        }
    }
    if let Some(out) = &args.out {
        write_or_print(Some(out), &ap.to_text())?;
    }
    Ok(())
}

fn build_plan(args: &PlanArgs) -> Result<MdmPlan> {
    let scheme: WeightScheme = args.scheme.parse()?;
    plan(
        &scheme,
        PlanParams { eps: args.eps, kappa: args.kappa, delta: args.delta, a: args.anchor, c0: args.c0, c1: args.c1 },
    )
}

fn finish_study(report: &StudyReport, dir: &Path, name: &str, formats: &[Format]) -> Result<ExitCode> {
    for path in emit(report, dir, name, formats)? {
        eprintln!("wrote {}", path.display());
    }
    println!("{}", serde_json::to_string_pretty(&report.summary).expect("summaries serialize"));
    Ok(match &report.summary.aborted {
        Some(msg) => {
            eprintln!("study aborted: {msg}");
            ExitCode::from(2)
        }
        None => ExitCode::SUCCESS,
    })
}

fn mdm(cmd: MdmCommand, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    match cmd {
        MdmCommand::Plan { plan, out } => {
            write_or_print(out.as_deref(), &build_plan(&plan)?.to_text())?;
        }
        MdmCommand::Assemble { plan, r, quad_delta, max_level, tol, out } => {
            let p = MdmPlan::from_text(&std::fs::read_to_string(&plan)?)?;
            let scheme: WeightScheme = p.scheme_id.parse()?;
            let family = QuadFamily::new(r, quad_delta, p.a, max_level)?;
            let rule = assemble(&p, &family)?;
            let rep = worst_case_error_k(&rule, &scheme, tol)?;
            eprintln!("points {} err {:e} tail {:e}", rule.len(), rep.err, rep.tail_bound);
            write_or_print(out.as_deref(), &rule.to_text())?;
        }
        MdmCommand::Run { scheme, sweep, approx, kappa, delta, c0, c1, seed, name } => {
            let problem = if approx { Problem::MdmApprox } else { Problem::MdmInt };
            let mut cfg =
                StudyConfig::from_toml(&format!("problem = \"{}\"\nscheme = \"\"\nsweep = []\n", problem.name()))?;
            cfg.scheme = scheme;
            cfg.sweep = sweep;
            cfg.seed = seed;
            cfg.mdm.kappa = kappa.unwrap_or(cfg.mdm.kappa);
            cfg.mdm.delta = delta.unwrap_or(cfg.mdm.delta);
            cfg.mdm.c0 = c0;
            cfg.mdm.c1 = c1;
            let report = run_study(&cfg)?;
            let dir = out_dir.unwrap_or(cfg.output.dir);
            return finish_study(&report, &dir, &name, &Format::ALL);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn study(args: StudyArgs, out_dir: Option<PathBuf>) -> Result<ExitCode> {
    let cfg = StudyConfig::load(&args.config)?;
    let formats = args.format.iter().map(|f| f.parse()).collect::<Result<Vec<Format>>>()?;
    let report = run_study(&cfg)?;
    let dir = out_dir.unwrap_or_else(|| cfg.output.dir.clone());
    finish_study(&report, &dir, &cfg.output.name, &formats)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Kernel(a) => kernel(a)?,
        Command::Quad(a) => quad(a)?,
        Command::Approx(a) => approx(a)?,
        Command::Mdm(cmd) => return mdm(cmd, cli.out_dir),
        Command::Study(a) => return study(a, cli.out_dir),
        Command::Check { seed } => {
            let outcomes = all_checks(seed)?;
            for o in &outcomes {
                println!("{}", o.line());
            }
            if outcomes.iter().any(|o| !o.passed) {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
