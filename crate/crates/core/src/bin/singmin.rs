use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use singmin::experiments::{
    classify_asymptotics, estimate_mu, geometric_q_grid, is_monotone, reconcile_mu_with, verify_identities,
    VerifyConfig,
};
use singmin::field_ops::{log_mean, sup_norm};
use singmin::io::{self, RunManifest};
use singmin::solver::{self, SolverConfig};
use singmin::{make_domain, Error, GridDomain, ShapeSpec};

#[derive(Parser)]
#[command(name = "singmin", version, about = "Singular minimization constant of the p-Laplacian on planar grid domains")]
struct Cli {
    /// Seed for random restarts and test fields; SINGMIN_SEED takes precedence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for reports, tables and the run manifest.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 20_000)]
    max_iter: usize,
    #[arg(long, global = true, default_value_t = 4)]
    multistart: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite.
    Verify {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        /// Grid resolution of the unit disk used by the grid checks.
        #[arg(long, default_value_t = 64.0)]
        resolution: f64,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Closed-form checks only.
        #[arg(long)]
        quick: bool,
    },
    /// Solve one problem on one domain.
    Solve {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum)]
        task: Task,
        #[arg(long)]
        q: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        /// Field CSV (default: <out-dir>/field.csv).
        #[arg(long)]
        field_out: Option<PathBuf>,
        /// Summary JSON (default: <out-dir>/summary.json).
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Sweep q toward 0 and reconcile μ.
    Sweep {
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        q_from: f64,
        #[arg(long, default_value_t = 0.005)]
        q_to: f64,
        #[arg(long, default_value_t = 0.5)]
        q_factor: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeKind {
    Disk,
    Rect,
    Square,
    Lshape,
    Mask,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Torsion,
    LambdaQ,
    Mu,
    Singular,
}

#[derive(Args)]
struct DomainArgs {
    #[arg(long, value_enum, default_value = "disk")]
    shape: ShapeKind,
    /// Disk radius.
    #[arg(long, default_value_t = 1.0)]
    r: f64,
    /// Width (rectangle, square side, L-shape).
    #[arg(long, default_value_t = 1.0)]
    w: f64,
    #[arg(long)]
    height: Option<f64>,
    /// Side of the square removed from the L-shape's upper-right corner.
    #[arg(long, default_value_t = 0.5)]
    cut: f64,
    /// Mask file of '.' and '#' rows.
    #[arg(long)]
    mask: Option<PathBuf>,
    /// Nodes per unit length.
    #[arg(long, default_value_t = 64.0)]
    resolution: f64,
    /// Grid spacing; overrides --resolution.
    #[arg(long)]
    h: Option<f64>,
}

impl DomainArgs {
    fn spec(&self) -> Result<ShapeSpec, Error> {
        let res = self.h.map(|h| 1.0 / h).unwrap_or(self.resolution);
        let height = self.height.unwrap_or(self.w);
        Ok(match self.shape {
            ShapeKind::Disk => ShapeSpec::disk(self.r, res),
            ShapeKind::Rect => ShapeSpec::rect(self.w, height, res),
            ShapeKind::Square => ShapeSpec::square(self.w, res),
            ShapeKind::Lshape => ShapeSpec::lshape(self.w, height, self.cut, res),
            ShapeKind::Mask => {
                let path = self.mask.clone().ok_or_else(|| Error::InvalidArgument("--shape mask needs --mask".into()))?;
                ShapeSpec::mask_file(path, res)
            }
        })
    }

    fn domain(&self) -> Result<Arc<GridDomain>, Error> {
        Ok(Arc::new(make_domain(&self.spec()?)?))
    }
}

/// Exit codes: 0 pass, 1 check or solver failure, 2 usage or I/O.
enum Failure {
    Check(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Io(_) | Error::Parse(_) | Error::EmptyDomain => Failure::Usage(e.to_string()),
            other => Failure::Check(other.to_string()),
        }
    }
}

fn write(path: &Path, text: &str, manifest: &mut RunManifest) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    manifest.outputs.push(path.display().to_string());
    Ok(())
}

fn check_p(p: f64) -> Result<(), Failure> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("p must be > 1, got {p}")))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Check(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let seed = match std::env::var("SINGMIN_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Usage(format!("SINGMIN_SEED is not an integer: {s}")))?,
        Err(_) => cli.seed,
    };
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::Usage("--workers must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Usage(format!("cannot size the worker pool: {e}")))?;
    }
    fs::create_dir_all(&cli.out_dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", cli.out_dir.display())))?;
    let cfg = SolverConfig { tol_rel: cli.tol, max_iter: cli.max_iter, multistart: cli.multistart, seed, ..SolverConfig::default() };
    cfg.validate()?;
    let out = cli.out_dir.clone();
    match cli.command {
        Command::Verify { n, p, resolution, samples, quick } => {
            check_p(p)?;
            if n != 2 {
                return Err(Failure::Usage(format!("the grid checks are two-dimensional; got --n {n}")));
            }
            let vcfg = VerifyConfig { p, resolution, samples, seed, quick, solver: cfg };
            let mut manifest = RunManifest::new("verify", serde_json::to_value(&vcfg).unwrap(), seed);
            let report = verify_identities(&vcfg)?;
            write(&out.join("verify.json"), &io::versioned_json(&report)?, &mut manifest)?;
            write(&out.join("verify.md"), &io::identity_markdown(&report), &mut manifest)?;
            for c in &report.checks {
                println!("{} {}", if c.passed { "pass" } else { "FAIL" }, c.name);
            }
            let passed = report.passed();
            let n_pass = report.checks.iter().filter(|c| c.passed).count();
            manifest.finish(passed, format!("{n_pass}/{} checks pass", report.checks.len()));
            println!("{}", manifest.summary);
            finish_manifest(&out, manifest).map(|_| passed)
        }
        Command::Solve { domain, p, task, q, lambda, field_out, summary, svg } => {
            check_p(p)?;
            let summary_path = summary.unwrap_or_else(|| out.join("summary.json"));
            let field_path = field_out.unwrap_or_else(|| out.join("field.csv"));
            let config = json!({ "domain": domain.spec()?, "p": p, "q": q, "lambda": lambda, "solver": cfg });
            let mut manifest = RunManifest::new("solve", config, seed);
            let d = domain.domain()?;
            let result = solve(&d, p, task, q, lambda, &cfg);
            let (field, mut body, passed) = match result {
                Ok(r) => r,
                Err(Failure::Check(msg)) => {
                    let diag = json!({ "task": task_name(task), "error": msg });
                    write(&summary_path, &io::versioned_json(&diag)?, &mut manifest)?;
                    manifest.finish(false, msg.clone());
                    finish_manifest(&out, manifest)?;
                    return Err(Failure::Check(msg));
                }
                Err(e) => return Err(e),
            };
            body["volume"] = json!(d.volume);
            body["h"] = json!(d.h);
            write(&field_path, &io::field_csv(&field)?, &mut manifest)?;
            if let Some(path) = svg {
                write(&path, &io::field_svg(&field, &format!("{} p={p}", task_name(task))), &mut manifest)?;
            }
            write(&summary_path, &io::versioned_json(&body)?, &mut manifest)?;
            println!("{}", serde_json::to_string_pretty(&body).unwrap());
            manifest.finish(passed, format!("{} solved", task_name(task)));
            finish_manifest(&out, manifest).map(|_| passed)
        }
        Command::Sweep { domain, p, q_from, q_to, q_factor } => {
            check_p(p)?;
            let grid = geometric_q_grid(q_from, q_to, q_factor)?;
            let config = json!({ "domain": domain.spec()?, "p": p, "q_grid": grid, "solver": cfg });
            let mut manifest = RunManifest::new("sweep", config, seed);
            let d = domain.domain()?;
            let report = reconcile_mu_with(&d, p, &grid, &cfg)?;
            write(&out.join("sweep.csv"), &io::sweep_csv(&report.records), &mut manifest)?;
            write(&out.join("mu.json"), &io::versioned_json(&report)?, &mut manifest)?;
            write(&out.join("mu.md"), &io::mu_markdown(&report), &mut manifest)?;
            let monotone = is_monotone(&report.records);
            let bounds = report.records.iter().all(|r| r.bound_x4b_ok && r.bound_a1_ok);
            let classification = classify_asymptotics(&d, p, &report.records).ok();
            if let Some(c) = &classification {
                write(&out.join("classification.json"), &io::versioned_json(c)?, &mut manifest)?;
                println!("lambda {}, sup norm {} (predicted {}, {})", c.lambda_observed, c.sup_observed, c.lambda_predicted, c.sup_predicted);
            }
            let est = estimate_mu(&report.records).ok();
            println!(
                "mu: sweep {:.8} direct {:.8} singular {:.8} (spread {:.2e}){}",
                report.mu_sweep,
                report.mu_direct,
                report.mu_singular,
                report.spread,
                est.map(|e| format!(", smallest q {} gives {:.8}", e.smallest_q, e.smallest_q_value)).unwrap_or_default()
            );
            println!("monotone {monotone}, bounds {bounds}");
            let passed = monotone && bounds;
            manifest.finish(passed, format!("monotone {monotone}, bounds {bounds}, consistent {}", report.consistent));
            finish_manifest(&out, manifest).map(|_| passed)
        }
    }
}

fn finish_manifest(out: &Path, mut manifest: RunManifest) -> Result<(), Failure> {
    let path = out.join("manifest.json");
    manifest.outputs.push(path.display().to_string());
    let text = io::versioned_json(&manifest)?;
    fs::write(&path, text).map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))
}

fn task_name(task: Task) -> &'static str {
    match task {
        Task::Torsion => "torsion",
        Task::LambdaQ => "lambda-q",
        Task::Mu => "mu",
        Task::Singular => "singular",
    }
}

fn solve(
    d: &Arc<GridDomain>,
    p: f64,
    task: Task,
    q: Option<f64>,
    lambda: Option<f64>,
    cfg: &SolverConfig,
) -> Result<(singmin::ScalarField, Value, bool), Failure> {
    Ok(match task {
        Task::Torsion => {
            let f = solver::solve_torsion(d, p, cfg)?;
            let body = json!({ "task": "torsion", "p": p, "sup_norm": sup_norm(&f) });
            (f, body, true)
        }
        Task::LambdaQ => {
            let q = q.ok_or_else(|| Failure::Usage("--task lambda-q needs --q".into()))?;
            let r = solver::minimize_lambda_q(d, p, q, cfg)?;
            let body = json!({
                "task": "lambda-q", "p": p, "q": q,
                "Lambda_q": r.objective, "log_lambda_q": r.log_lambda_q,
                "iterations": r.iterations, "restarts_agreeing": r.restarts_agreeing,
                "sup_norm": sup_norm(&r.field),
            });
            (r.field, body, true)
        }
        Task::Mu => {
            let r = solver::minimize_mu(d, p, cfg)?;
            let body = json!({
                "task": "mu", "p": p, "mu": r.objective, "log_mean": log_mean(&r.field).log_value,
                "iterations": r.iterations, "restarts_agreeing": r.restarts_agreeing,
                "sup_norm": sup_norm(&r.field),
            });
            (r.field, body, true)
        }
        Task::Singular => {
            let lam = lambda.ok_or_else(|| Failure::Usage("--task singular needs --lambda".into()))?;
            let s = solver::solve_singular(d, p, lam, cfg)?;
            let mu = solver::mu_from_singular(&s.field, lam, p, d.volume)?;
            let body = json!({
                "task": "singular", "p": p, "lambda": lam, "sup_norm": sup_norm(&s.field),
                "mu": mu, "iterations": s.iterations,
                "lower_bracket_ok": s.lower_ok, "upper_bracket_ok": s.upper_ok,
                "lower_coefficient": s.lower_coefficient, "upper_bound": s.upper_bound,
            });
            let ok = s.lower_ok && s.upper_ok;
            (s.field, body, ok)
        }
    })
}
