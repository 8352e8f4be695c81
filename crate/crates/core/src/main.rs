//! Batch front-end: solve a single configuration, run convergence and
//! boundary-scaling studies, or run the identity verification suite.
//!
//! Exit codes: 0 on success, 1 on validation errors (including malformed
//! flags), 2 on numerical failure.

use biharm::analysis::{
    boundary_scaling_study, convergence_study, manufactured_pair, verify_suite,
};
use biharm::error::Error;
use biharm::norms::h2h_norm;
use biharm::ops::BcScheme;
use biharm::report::{ConvergenceReport, ReportFormat, RunConfig};
use biharm::solve::{solve, CgOptions};
use biharm::GridSpec;
use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::process::ExitCode;
use std::str::FromStr;

#[derive(Parser)]
#[command(
    name = "biharm",
    version,
    about = "clamped fourth-order finite differences on the unit cube",
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Space dimension n
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Manufactured case name
    #[arg(long, default_value = "sine4")]
    case: String,
    /// Boundary scheme: centered | one-sided
    #[arg(long, default_value = "centered")]
    scheme: String,
    /// Relative CG residual target
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// CG iteration cap (defaults scale with m)
    #[arg(long)]
    maxit: Option<usize>,
    /// Use the diagonal (Jacobi) preconditioner
    #[arg(long, default_value_t = false)]
    jacobi: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one configuration and print a solution summary.
    Solve {
        #[command(flatten)]
        common: CommonOpts,
        /// Grid resolution (h = 1/m)
        #[arg(long, default_value_t = 16)]
        m: i64,
    },
    /// Run a convergence ladder and emit a report.
    Study {
        #[command(flatten)]
        common: CommonOpts,
        /// Comma-separated resolution ladder, e.g. 8,16,32,64
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        m: Vec<i64>,
        /// Output path (stdout when omitted)
        #[arg(long)]
        out: Option<String>,
        /// Output format: csv | json
        #[arg(long, default_value = "csv")]
        format: String,
        /// Worker threads for ladder entries
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// JSON config file supplying defaults for all of the above
        #[arg(long)]
        config: Option<String>,
    },
    /// Run the identity and operator probe suite.
    Verify {
        /// Space dimension n
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Grid resolution
        #[arg(long, default_value_t = 8)]
        m: i64,
        /// Probe seed
        #[arg(long, default_value_t = 7)]
        seed: u64,
    },
    /// Fractional boundary-seminorm scaling study.
    BoundaryScaling {
        /// Space dimension n
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Manufactured case name
        #[arg(long, default_value = "sine4")]
        case: String,
        /// Comma-separated resolution ladder
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        m: Vec<i64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CgFailure { .. } | Error::ConstructionDefect(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Solve { common, m } => {
            let scheme = BcScheme::from_str(&common.scheme)?;
            let case = manufactured_pair(&common.case, common.dim)?;
            let grid = GridSpec::new(common.dim, m)?;
            let opts = CgOptions {
                tol: common.tol,
                maxit: common
                    .maxit
                    .unwrap_or_else(|| CgOptions::defaults_for(m).maxit),
                jacobi: false,
            };
            let source = case.source();
            let out = solve(&source, &grid, scheme, opts)?;
            let exact = case.sample_u(&grid);
            let err = h2h_norm(&exact.sub(&out.field)?);
            println!(
                "case={} scheme={} n={} m={} cg_iters={} residual={:.3e} error_h2h={:.16e}",
                case.name,
                scheme.name(),
                common.dim,
                m,
                out.iterations,
                out.residual,
                err
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Study {
            common,
            m,
            out,
            format,
            jobs,
            config,
        } => {
            // config file supplies values; explicit flags take precedence
            let file_cfg: Option<RunConfig> = match &config {
                Some(path) => Some(serde_json::from_str(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            let cfg = merge_config(common, m, out, format, jobs, file_cfg)?;
            let scheme = BcScheme::from_str(&cfg.scheme)?;
            let case = manufactured_pair(&cfg.case, cfg.dim)?;
            let report = run_study_jobs(&cfg, scheme, &case)?;
            let text = report.emit(cfg.format)?;
            match &cfg.out {
                Some(path) => std::fs::write(path, text)?,
                None => {
                    std::io::stdout().write_all(text.as_bytes())?;
                }
            }
            if let Some(f) = &report.failure {
                eprintln!("numerical failure: {f}");
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { dim, m, seed } => {
            println!("probe suite on n = {dim}, m = {m}, seed = {seed}");
            let lines = verify_suite(dim, m, seed)?;
            let mut ok = true;
            for l in &lines {
                ok &= l.pass;
                println!(
                    "{:<42} {:>12.3e}  (threshold {:>9.1e})  {}",
                    l.name,
                    l.value,
                    l.threshold,
                    if l.pass { "PASS" } else { "FAIL" }
                );
            }
            if ok {
                println!("all probes passed");
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("identity residual above tolerance");
                Ok(ExitCode::from(2))
            }
        }
        Command::BoundaryScaling { dim, case, m } => {
            let case = manufactured_pair(&case, dim)?;
            let rep = boundary_scaling_study(&case, dim, &m)?;
            println!("m,h,centered_norm,one_sided_norm");
            for e in &rep.entries {
                println!(
                    "{},{:.16e},{:.16e},{:.16e}",
                    e.m, e.h, e.centered_norm, e.one_sided_norm
                );
            }
            println!("# centered_rate={:.16e}", rep.centered_rate);
            println!("# one_sided_rate={:.16e}", rep.one_sided_rate);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn merge_config(
    common: CommonOpts,
    m: Vec<i64>,
    out: Option<String>,
    format: String,
    jobs: usize,
    file: Option<RunConfig>,
) -> Result<RunConfig, Error> {
    let mut cfg = file.unwrap_or(RunConfig {
        dim: common.dim,
        m_list: m.clone(),
        scheme: common.scheme.clone(),
        case: common.case.clone(),
        tol: common.tol,
        maxit: common.maxit,
        out: None,
        format: ReportFormat::from_str(&format)?,
        seed: 7,
        jobs: None,
    });
    // explicit flags override file values
    let defaults = CommonOpts {
        dim: 2,
        case: "sine4".into(),
        scheme: "centered".into(),
        tol: 1e-10,
        maxit: None,
        jacobi: false,
    };
    if common.dim != defaults.dim {
        cfg.dim = common.dim;
    }
    if common.case != defaults.case {
        cfg.case = common.case;
    }
    if common.scheme != defaults.scheme {
        cfg.scheme = common.scheme;
    }
    if common.tol != defaults.tol {
        cfg.tol = common.tol;
    }
    if common.maxit.is_some() {
        cfg.maxit = common.maxit;
    }
    if m != vec![8, 16, 32, 64] {
        cfg.m_list = m;
    }
    if out.is_some() {
        cfg.out = out;
    }
    if format != "csv" {
        cfg.format = ReportFormat::from_str(&format)?;
    }
    if jobs != 1 {
        cfg.jobs = Some(jobs);
    }
    if cfg.jobs.is_none() {
        if let Ok(env_jobs) = std::env::var("BIHARM_JOBS") {
            cfg.jobs = env_jobs.parse().ok();
        }
    }
    Ok(cfg)
}

/// Run the ladder, optionally fanning entries out to a scoped worker pool;
/// the report is assembled in ladder order regardless of completion order.
fn run_study_jobs(
    cfg: &RunConfig,
    scheme: BcScheme,
    case: &biharm::analysis::ManufacturedCase,
) -> Result<ConvergenceReport, Error> {
    let jobs = cfg.jobs.unwrap_or(1).max(1);
    if jobs == 1 || cfg.m_list.len() <= 1 {
        return convergence_study(case, cfg.dim, scheme, &cfg.m_list, cfg.tol, cfg.maxit);
    }
    // a pool of `jobs` workers draining the ladder; one single-entry study
    // per ladder point, stitched back together in ladder order
    let next = std::sync::atomic::AtomicUsize::new(0);
    let results: std::sync::Mutex<Vec<Option<Result<ConvergenceReport, Error>>>> =
        std::sync::Mutex::new((0..cfg.m_list.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..jobs.min(cfg.m_list.len()) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                if k >= cfg.m_list.len() {
                    break;
                }
                let r = convergence_study(
                    case,
                    cfg.dim,
                    scheme,
                    &cfg.m_list[k..=k],
                    cfg.tol,
                    cfg.maxit,
                );
                results.lock().unwrap()[k] = Some(r);
            });
        }
    });
    let mut entries = Vec::new();
    let mut failure = None;
    for r in results.into_inner().unwrap() {
        let rep = r.expect("worker filled every slot")?;
        entries.extend(rep.entries);
        if failure.is_none() {
            failure = rep.failure;
        }
    }
    let errors: Vec<f64> = entries.iter().map(|e| e.error_h2h).collect();
    let hs: Vec<f64> = entries.iter().map(|e| e.h).collect();
    let degenerate = errors.iter().any(|&e| e <= 1e-14) || errors.len() < 2;
    Ok(ConvergenceReport {
        case: case.name.clone(),
        scheme: scheme.name().to_string(),
        pairwise_rates: if degenerate {
            Vec::new()
        } else {
            biharm::analysis::pairwise_rates(&errors, &hs)
        },
        fitted_rate: if degenerate {
            0.0
        } else {
            biharm::analysis::fit_rate(&errors, &hs)?
        },
        entries,
        failure,
    })
}
