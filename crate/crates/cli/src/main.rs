//! Command-line front end: load a problem from a builtin fixture or a
//! JSON configuration, run the solve/classify/nad/fixture pipelines, and
//! emit CSV/JSON artifacts.

mod config;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use persuade_core::fixtures::{fixture, run_fixture};
use persuade_core::structure::{
    check_sdpd_conditions, full_disclosure_test, local_nd_sdd_test, pooling_test, twist_scan,
    variational_scan,
};
use persuade_core::{
    build_primal, classify_dippedness, contact_set, default_eps_gamma, duality_gap,
    sand_lever_assign, select_q, solve_lp, value_under, verify_support_optimality,
    AssortativeVerdict, DiscreteProblem, Error as CoreError, Orientation, PreferenceModel, Prior,
};

const EXIT_OK: i32 = 0;
const EXIT_INFEASIBLE: i32 = 2;
const EXIT_TOLERANCE: i32 = 3;
const EXIT_PRECONDITION: i32 = 5;
const EXIT_CONFIG: i32 = 64;

#[derive(Parser)]
#[command(
    name = "persuade",
    version,
    about = "Solver and verification toolkit for one-dimensional persuasion problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the discretized primal LP and emit outcome/dual/contact artifacts.
    Solve(RunArgs),
    /// Run the structural classifiers without solving.
    Classify(RunArgs),
    /// Solve the negative-assortative boundary-value problem.
    Nad(NadArgs),
    /// Run a builtin fixture's oracle checks.
    Fixture(FixtureArgs),
    /// Verify a user-supplied (p, q) certificate against a problem.
    DualCheck(DualCheckArgs),
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected key=value, got `{s}`"))?;
    let v: f64 = v.parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.to_string(), v))
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Builtin fixture id (e1 | rs | quantile | segpair | contest | ...).
    #[arg(long, conflicts_with = "config")]
    fixture: Option<String>,
    /// Path to a JSON problem configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Action-grid size.
    #[arg(long = "grid-a")]
    grid_a: Option<usize>,
    /// State-grid size (densities only; atom priors use their own states).
    #[arg(long = "grid-theta")]
    grid_theta: Option<usize>,
    /// Fixture parameter, repeatable: --param lo=0.2 --param hi=0.5
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Γ-membership tolerance override.
    #[arg(long = "tol-gamma")]
    tol_gamma: Option<f64>,
    /// First-order-condition tolerance override.
    #[arg(long = "tol-foc")]
    tol_foc: Option<f64>,
    /// Obedience tolerance override.
    #[arg(long = "tol-obedience")]
    tol_obedience: Option<f64>,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write artifact curves as CSV.
    #[arg(long = "emit-csv", default_value_t = false)]
    emit_csv: bool,
    /// Worker-thread cap for the classifier scans.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct NadArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Force the orientation instead of inferring it.
    #[arg(long)]
    orientation: Option<String>,
    /// Mesh steps for the shooter.
    #[arg(long, default_value_t = 2000)]
    mesh: usize,
}

#[derive(Args)]
struct FixtureArgs {
    /// Fixture id.
    id: String,
    #[arg(long, default_value_t = 201)]
    resolution: usize,
    #[arg(long = "param", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long = "emit-csv", default_value_t = false)]
    emit_csv: bool,
}

#[derive(Args)]
struct DualCheckArgs {
    #[command(flatten)]
    run: RunArgs,
    /// CSV with header `theta,p`.
    #[arg(long = "certificate-p")]
    certificate_p: PathBuf,
    /// CSV with header `a,q` (extra columns ignored).
    #[arg(long = "certificate-q")]
    certificate_q: PathBuf,
    /// Optional outcome CSV (`a,theta,mass`) to test against Γ.
    #[arg(long)]
    outcome: Option<PathBuf>,
}

struct Failure {
    exit: i32,
    code: String,
    message: String,
}

impl Failure {
    fn new(exit: i32, code: &str, message: impl Into<String>) -> Self {
        Failure {
            exit,
            code: code.into(),
            message: message.into(),
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Failure::new(EXIT_CONFIG, "config", message)
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let exit = match &e {
            CoreError::Infeasible { .. } => EXIT_INFEASIBLE,
            CoreError::UnknownFixture(_)
            | CoreError::Invalid(_)
            | CoreError::GridTooLarge { .. } => EXIT_CONFIG,
            CoreError::AtomPrior => EXIT_PRECONDITION,
            _ => 1,
        };
        Failure::new(exit, "core", e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, "io", e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Nad(args) => cmd_nad(&args),
        Command::Fixture(args) => cmd_fixture(&args),
        Command::DualCheck(args) => cmd_dual_check(&args),
    };
    match result {
        Ok(()) => std::process::exit(EXIT_OK),
        Err(f) => {
            let body = serde_json::json!({
                "error": { "code": f.code, "message": f.message, "exit": f.exit }
            });
            eprintln!("{body}");
            std::process::exit(f.exit);
        }
    }
}

struct Problem {
    model: Arc<PreferenceModel>,
    prior: Prior,
    grids: (usize, usize),
    orientation_hint: Option<Orientation>,
    eps_gamma_default: Option<f64>,
    foc_default: Option<f64>,
    obedience_default: Option<f64>,
}

fn load_problem(args: &RunArgs) -> Result<Problem, Failure> {
    let params: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    if let Some(id) = &args.fixture {
        let fx = fixture(id, &params)?;
        Ok(Problem {
            model: fx.model.clone(),
            prior: fx.prior.clone(),
            grids: (args.grid_a.unwrap_or(101), args.grid_theta.unwrap_or(101)),
            orientation_hint: fx.orientation,
            eps_gamma_default: None,
            foc_default: None,
            obedience_default: None,
        })
    } else if let Some(path) = &args.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let doc: config::ConfigDoc = serde_json::from_str(&text)
            .map_err(|e| Failure::config(format!("bad config: {e}")))?;
        let loaded = config::load(&doc).map_err(Failure::config)?;
        Ok(Problem {
            model: loaded.model,
            prior: loaded.prior,
            grids: (
                args.grid_a.unwrap_or(loaded.grids.0),
                args.grid_theta.unwrap_or(loaded.grids.1),
            ),
            orientation_hint: None,
            eps_gamma_default: loaded.tolerances.eps_gamma,
            foc_default: loaded.tolerances.foc,
            obedience_default: loaded.tolerances.obedience,
        })
    } else {
        Err(Failure::config("one of --fixture or --config is required"))
    }
}

fn write_file(dir: &Path, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), Failure> {
    fs::create_dir_all(dir)?;
    let mut buf = Vec::new();
    write(&mut buf)?;
    fs::write(dir.join(name), buf)?;
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    value: f64,
    dual_value: f64,
    gap: f64,
    status: &'static str,
    iterations: usize,
    support_size: usize,
    support_in_contact_set: bool,
    min_d1_residual: f64,
    eps_gamma: f64,
    outcome_classification: persuade_core::Dippedness,
}

fn cmd_solve(args: &RunArgs) -> Result<(), Failure> {
    let p = load_problem(args)?;
    let problem = DiscreteProblem::from_prior(p.model.clone(), &p.prior, p.grids.0, p.grids.1)?;
    let built = build_primal(&problem)?;
    let sol = solve_lp(&problem, &built)?;
    let gap = duality_gap(&problem, &sol);
    let eps = args.tol_gamma.or(p.eps_gamma_default).unwrap_or_else(|| {
        default_eps_gamma(persuade_core::dual::max_abs_v(
            &p.model,
            &problem.a_grid,
            &problem.theta_grid,
        ))
    });
    let cert = select_q(&sol.dual_row_prices, &p.model, &problem, eps)?;
    let gamma = contact_set(&cert, &p.model, eps);
    let verdict = verify_support_optimality(&sol.outcome, &cert, &p.model, eps);
    let classification =
        classify_dippedness(&sol.outcome.pruned(1e-9).support_points())?.verdict;

    write_file(&args.out, "outcome.csv", |w| sol.outcome.write_csv(w))?;
    write_file(&args.out, "dual.csv", |w| cert.write_q_csv(w))?;
    write_file(&args.out, "prices.csv", |w| cert.write_p_csv(w))?;
    write_file(&args.out, "contact.csv", |w| gamma.write_csv(w))?;
    let dual_value: f64 = sol
        .dual_row_prices
        .iter()
        .zip(&problem.prior_mass)
        .map(|(pp, m)| pp * m)
        .sum();
    let summary = SolveSummary {
        value: sol.value,
        dual_value,
        gap,
        status: "optimal",
        iterations: sol.iterations,
        support_size: sol.outcome.support_size(),
        support_in_contact_set: verdict.pass,
        min_d1_residual: cert.min_d1_residual(&p.model),
        eps_gamma: eps,
        outcome_classification: classification,
    };
    write_file(&args.out, "summary.json", |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&summary).unwrap())
    })?;
    println!("{}", serde_json::to_string(&summary).unwrap());
    if gap > 1e-8 {
        return Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            format!("duality gap {gap:.3e} above 1e-8"),
        ));
    }
    if !verdict.pass {
        return Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            format!(
                "{} outcome entries fall outside the contact set",
                verdict.offending.len()
            ),
        ));
    }
    Ok(())
}

fn cmd_classify(args: &RunArgs) -> Result<(), Failure> {
    let p = load_problem(args)?;
    let a_grid = persuade_core::uniform_grid(p.model.a_range.0, p.model.a_range.1, p.grids.0);
    let theta_grid = match &p.prior {
        Prior::Atoms(pts) => pts.iter().map(|&(t, _)| t).collect(),
        Prior::Density { support, .. } => {
            persuade_core::uniform_grid(support.0, support.1, p.grids.1)
        }
    };
    let report = if args.jobs > 1 {
        // Independent scans on separate workers; deterministic merge.
        std::thread::scope(|scope| -> Result<_, Failure> {
            let model = &p.model;
            let prior = &p.prior;
            let (ag, tg) = (&a_grid, &theta_grid);
            let twist = scope.spawn(move || twist_scan(model, ag, tg, 12));
            let sdpd = scope.spawn(move || check_sdpd_conditions(model, ag, tg));
            let vari = scope.spawn(move || variational_scan(model, ag, tg, 9));
            let fd = scope.spawn(move || full_disclosure_test(model, prior, 99));
            let pool = scope.spawn(move || pooling_test(model, prior, 99));
            let nd = local_nd_sdd_test(model, ag);
            Ok(persuade_core::assemble_report(
                twist.join().expect("twist scan"),
                sdpd.join().expect("sdpd scan"),
                vari.join().expect("variational scan"),
                fd.join().expect("full disclosure test")?,
                pool.join().expect("pooling test")?,
                nd,
            ))
        })?
    } else {
        persuade_core::structure_report(&p.model, &p.prior, &a_grid, &theta_grid, 99)?
    };
    write_file(&args.out, "structure.json", |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&report).unwrap())
    })?;
    println!("{}", serde_json::to_string(&report).unwrap());
    Ok(())
}

#[derive(Serialize)]
struct NadSummary {
    orientation: &'static str,
    a_lo: f64,
    a_hi: f64,
    mesh_nodes: usize,
    matching_residual: f64,
    verify: persuade_core::nad::NadVerifyReport,
    outcome_value: f64,
    outcome_support: usize,
}

fn cmd_nad(args: &NadArgs) -> Result<(), Failure> {
    let p = load_problem(&args.run)?;
    if !p.prior.is_density() {
        return Err(Failure::new(
            EXIT_PRECONDITION,
            "precondition",
            "atom prior rejected: the boundary-value path needs a density (use `solve`)",
        ));
    }
    let orientation = match args.orientation.as_deref() {
        Some("dipped") => Orientation::Dipped,
        Some("peaked") => Orientation::Peaked,
        Some(other) => {
            return Err(Failure::config(format!(
                "unknown orientation `{other}` (dipped|peaked)"
            )))
        }
        None => match p.orientation_hint {
            Some(o) => o,
            None => {
                let a_grid =
                    persuade_core::uniform_grid(p.model.a_range.0, p.model.a_range.1, 33);
                let th_grid = {
                    let (lo, hi) = p.prior.support();
                    persuade_core::uniform_grid(lo, hi, 33)
                };
                let rep =
                    persuade_core::structure_report(&p.model, &p.prior, &a_grid, &th_grid, 33)?;
                match rep.verdict {
                    AssortativeVerdict::StrictDipped | AssortativeVerdict::Dipped => {
                        Orientation::Dipped
                    }
                    AssortativeVerdict::StrictPeaked | AssortativeVerdict::Peaked => {
                        Orientation::Peaked
                    }
                    AssortativeVerdict::Undetermined => {
                        return Err(Failure::new(
                            EXIT_PRECONDITION,
                            "precondition",
                            "assortative verdict undetermined; pass --orientation",
                        ))
                    }
                }
            }
        },
    };
    let pooling = pooling_test(&p.model, &p.prior, 99)?;
    if !pooling.holds_for_all_pairs {
        return Err(Failure::new(
            EXIT_PRECONDITION,
            "precondition",
            format!(
                "pooling condition not found at this resolution for pair {:?}",
                pooling.failing_pair
            ),
        ));
    }
    let sol = persuade_core::nad::nad_shoot_with(&p.model, &p.prior, orientation, args.mesh)?;
    let verify = persuade_core::nad::nad_verify_with(
        &sol,
        &p.model,
        &p.prior,
        args.run.tol_obedience.or(p.obedience_default).unwrap_or(1e-3),
        args.run.tol_foc.or(p.foc_default).unwrap_or(1e-3),
    )?;
    let outcome = sand_lever_assign(&sol, &p.prior, &p.model)?;
    write_file(&args.run.out, "nad.csv", |w| sol.write_csv(w))?;
    write_file(&args.run.out, "nad_outcome.csv", |w| outcome.write_csv(w))?;
    let summary = NadSummary {
        orientation: match orientation {
            Orientation::Dipped => "dipped",
            Orientation::Peaked => "peaked",
        },
        a_lo: sol.a_lo,
        a_hi: sol.a_hi,
        mesh_nodes: sol.mesh.len(),
        matching_residual: sol.matching_residual,
        verify: verify.clone(),
        outcome_value: value_under(&outcome, &p.model),
        outcome_support: outcome.support_size(),
    };
    write_file(&args.run.out, "report.json", |w| {
        writeln!(w, "{}", serde_json::to_string_pretty(&summary).unwrap())
    })?;
    println!("{}", serde_json::to_string(&summary).unwrap());
    if !verify.pass {
        return Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            "nad verification residuals exceed tolerance",
        ));
    }
    Ok(())
}

fn cmd_fixture(args: &FixtureArgs) -> Result<(), Failure> {
    let params: BTreeMap<String, f64> = args.params.iter().cloned().collect();
    let report = run_fixture(&args.id, args.resolution, &params)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap());
    if args.emit_csv {
        emit_fixture_csv(&args.id, &params, args.resolution, &args.out)?;
    }
    if report.pass {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            format!("fixture {} failed at resolution {}", args.id, args.resolution),
        ))
    }
}

fn emit_fixture_csv(
    id: &str,
    params: &BTreeMap<String, f64>,
    resolution: usize,
    out: &Path,
) -> Result<(), Failure> {
    let fx = fixture(id, params)?;
    match (fx.orientation, fx.prior.is_density()) {
        (Some(o), true) => {
            let sol = persuade_core::nad::nad_shoot_with(&fx.model, &fx.prior, o, resolution)?;
            write_file(out, &format!("{id}_nad.csv"), |w| sol.write_csv(w))?;
            let outcome = sand_lever_assign(&sol, &fx.prior, &fx.model)?;
            write_file(out, &format!("{id}_outcome.csv"), |w| outcome.write_csv(w))?;
        }
        _ => {
            if let (Some(pf), Some(qf)) = (&fx.expected_p, &fx.expected_q) {
                let (alo, ahi) = fx.model.a_range;
                let (tlo, thi) = fx.model.theta_range;
                let a_grid = persuade_core::uniform_grid(alo, ahi, resolution);
                let th_grid = persuade_core::uniform_grid(tlo, thi, resolution);
                let cert = persuade_core::dual::certificate_from_functions(
                    &fx.model,
                    &a_grid,
                    &th_grid,
                    |th| pf(th),
                    |a| qf(a),
                )?;
                write_file(out, &format!("{id}_dual.csv"), |w| cert.write_q_csv(w))?;
                write_file(out, &format!("{id}_prices.csv"), |w| cert.write_p_csv(w))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct DualCheckSummary {
    min_d1_residual: f64,
    pairs_checked: usize,
    feasible: bool,
    outcome_entries_checked: usize,
    outcome_in_contact_set: Option<bool>,
}

fn read_two_column_csv(path: &Path) -> Result<Vec<(f64, f64)>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() < 2 {
            return Err(Failure::config(format!("bad CSV row `{line}`")));
        }
        let x: f64 = cols[0]
            .trim()
            .parse()
            .map_err(|e| Failure::config(format!("bad number in `{line}`: {e}")))?;
        let y: f64 = cols[1]
            .trim()
            .parse()
            .map_err(|e| Failure::config(format!("bad number in `{line}`: {e}")))?;
        out.push((x, y));
    }
    Ok(out)
}

fn cmd_dual_check(args: &DualCheckArgs) -> Result<(), Failure> {
    let p = load_problem(&args.run)?;
    let p_rows = read_two_column_csv(&args.certificate_p)?;
    let q_rows = read_two_column_csv(&args.certificate_q)?;
    if p_rows.is_empty() || q_rows.is_empty() {
        return Err(Failure::config("empty certificate file"));
    }
    let tol = args.run.tol_gamma.unwrap_or(1e-8);
    let mut min_res = f64::INFINITY;
    for &(a, q) in &q_rows {
        for &(th, pp) in &p_rows {
            let r = pp - p.model.big_v(a, th) - q * p.model.u(a, th);
            min_res = min_res.min(r);
        }
    }
    let feasible = min_res >= -tol;
    let mut outcome_checked = 0usize;
    let mut outcome_ok = None;
    if let Some(path) = &args.outcome {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::config(format!("cannot read {}: {e}", path.display())))?;
        let eps = args.run.tol_gamma.unwrap_or_else(|| default_eps_gamma(1.0));
        let mut all_in = true;
        let nearest = |rows: &[(f64, f64)], x: f64| -> f64 {
            rows.iter()
                .min_by(|u, v| {
                    (u.0 - x).abs().partial_cmp(&(v.0 - x).abs()).unwrap()
                })
                .map(|&(_, y)| y)
                .unwrap()
        };
        for (i, line) in text.lines().enumerate() {
            if i == 0 || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() < 3 {
                return Err(Failure::config(format!("bad outcome row `{line}`")));
            }
            let a: f64 = cols[0].trim().parse().map_err(|_| Failure::config("bad a"))?;
            let th: f64 = cols[1].trim().parse().map_err(|_| Failure::config("bad theta"))?;
            let mass: f64 = cols[2].trim().parse().map_err(|_| Failure::config("bad mass"))?;
            if mass <= 0.0 {
                continue;
            }
            outcome_checked += 1;
            let r = nearest(&p_rows, th) - p.model.big_v(a, th)
                - nearest(&q_rows, a) * p.model.u(a, th);
            if r.abs() > eps {
                all_in = false;
            }
        }
        outcome_ok = Some(all_in);
    }
    let summary = DualCheckSummary {
        min_d1_residual: min_res,
        pairs_checked: p_rows.len() * q_rows.len(),
        feasible,
        outcome_entries_checked: outcome_checked,
        outcome_in_contact_set: outcome_ok,
    };
    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
    if !feasible {
        return Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            format!("certificate violates (D1) by {min_res:.3e}"),
        ));
    }
    if outcome_ok == Some(false) {
        return Err(Failure::new(
            EXIT_TOLERANCE,
            "tolerance",
            "outcome support leaves the certificate's contact set",
        ));
    }
    Ok(())
}
