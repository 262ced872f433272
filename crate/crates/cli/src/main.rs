//! `logse`: command-line front end for the convergence harness.
//!
//! Exit codes: 0 success, 1 bad input, 2 solver blow-up, 3 failed check.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use logse::analytic::{solve_gaussian_ode, GaussianParams};
use logse::harness::{
    self, default_eps_ref, parse_pairs, Case, ExperimentConfig, Reference, StudyOutput,
};
use logse::{Error, RegVariant};
use num_complex::Complex64;

#[derive(Parser, Debug)]
#[command(
    name = "logse",
    version,
    about = "Finite-difference lab for the logarithmic Schrodinger equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// One run: conserved-quantity series and the final error.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Steps between conserved-quantity samples
        #[arg(long)]
        monitor_stride: Option<usize>,
    },
    /// Case I error table over eps = 0.001/4^m and h = tau = 0.1/2^k.
    Table1 {
        #[command(flatten)]
        common: Common,
        /// Largest k and m
        #[arg(long, default_value_t = 5)]
        kmax: usize,
    },
    /// Regularized-versus-unregularized error against eps.
    ConvEps {
        #[command(flatten)]
        common: Common,
    },
    /// Energy error against eps.
    ConvEnergy {
        #[command(flatten)]
        common: Common,
    },
    /// Model error over time for several eps.
    Evolve {
        #[command(flatten)]
        common: Common,
        /// Number of equal time intervals sampled in [0, T]
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Fixed-eps convergence under linked (h, tau) refinement.
    ConvTau {
        #[command(flatten)]
        common: Common,
    },
    /// Integrate the Gaussian width/phase ODEs and check the stationary case.
    GaussonCheck {
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Complex, e.g. `1`, `0.5+2i`
        #[arg(long, allow_hyphen_values = true)]
        a0: String,
        #[arg(long, allow_hyphen_values = true)]
        b0: String,
        #[arg(long = "T", default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat `key = value` file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    /// 1 or 2
    #[arg(long)]
    case: Option<u8>,
    /// log, linear-eps or squared-eps
    #[arg(long)]
    variant: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    #[arg(long, conflicts_with = "eps_list")]
    eps: Option<String>,
    /// Comma-separated
    #[arg(long)]
    eps_list: Option<String>,
    /// Mesh size, or comma-separated list
    #[arg(long)]
    h: Option<String>,
    /// Time step, or comma-separated list
    #[arg(long)]
    tau: Option<String>,
    /// Use h, h/2, ..., h/2^K
    #[arg(long)]
    hk: Option<u32>,
    /// Use tau, tau/2, ..., tau/2^K
    #[arg(long)]
    tk: Option<u32>,
    /// Evaluation (final) time
    #[arg(long = "T")]
    t_end: Option<String>,
    /// `a,b`
    #[arg(long, allow_hyphen_values = true)]
    domain: Option<String>,
    /// analytic, fine-grid or none
    #[arg(long)]
    reference: Option<String>,
    /// Reference refinement multiple
    #[arg(long)]
    ref_scale: Option<String>,
    /// Regularization of the reference that stands in for the unregularized equation
    #[arg(long)]
    eps_ref: Option<String>,
    /// analytic or discrete
    #[arg(long)]
    first_step: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Defaults to LOGSE_THREADS, else the number of CPUs
    #[arg(long)]
    threads: Option<String>,
    /// Accepted for compatibility; runs are deterministic
    #[arg(long)]
    seed: Option<u64>,
    /// Write every evaluated field as `x,re,im` CSV into this directory
    #[arg(long)]
    dump_fields: Option<PathBuf>,
}

enum Failure {
    Input(String),
    BlowUp(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_blow_up() || matches!(e, Error::Singularity { .. }) {
            Failure::BlowUp(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn halvings(base: &str, k: u32) -> Result<String, Failure> {
    let b: f64 = base
        .split(',')
        .next()
        .unwrap_or("")
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("`{base}` is not a number")))?;
    Ok((0..=k)
        .map(|i| (b / 2f64.powi(i as i32)).to_string())
        .collect::<Vec<_>>()
        .join(","))
}

/// Builds the configuration: preset for the subcommand, then the config file,
/// then the flags.
fn configure(
    common: &Common,
    preset: impl Fn(Case, RegVariant) -> ExperimentConfig,
) -> Result<ExperimentConfig, Failure> {
    let file_pairs = match &common.config {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Input(format!("{}: {e}", p.display())))?;
            parse_pairs(&text)?
        }
        None => Vec::new(),
    };
    let lookup = |key: &str| {
        file_pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.clone())
    };
    let case_num = match common.case {
        Some(n) => n,
        None => match lookup("case") {
            Some(v) => v
                .parse()
                .map_err(|_| Failure::Input(format!("case: `{v}` is not 1 or 2")))?,
            None => 1,
        },
    };
    let case = Case::from_number(case_num)?;
    let variant: RegVariant = match common.variant.clone().or_else(|| lookup("variant")) {
        Some(v) => v.parse()?,
        None => RegVariant::LinearEps,
    };
    let mut cfg = preset(case, variant);
    for (k, v) in &file_pairs {
        cfg.set(k, v)?;
    }

    let mut set = |key: &str, value: Option<String>| -> Result<(), Failure> {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
        Ok(())
    };
    set("case", common.case.map(|c| c.to_string()))?;
    set("variant", common.variant.clone())?;
    set("lambda", common.lambda.clone())?;
    set(
        "eps_list",
        common.eps.clone().or_else(|| common.eps_list.clone()),
    )?;
    set("h_list", common.h.clone())?;
    set("tau_list", common.tau.clone())?;
    set("t_eval", common.t_end.clone())?;
    set("domain", common.domain.clone())?;
    set("reference", common.reference.clone())?;
    set("ref_scale", common.ref_scale.clone())?;
    set("eps_ref", common.eps_ref.clone())?;
    set("first_step", common.first_step.clone())?;
    set("threads", common.threads.clone())?;
    set("out", common.out.as_ref().map(|p| p.display().to_string()))?;
    set(
        "dump_fields",
        common.dump_fields.as_ref().map(|p| p.display().to_string()),
    )?;
    if let Some(k) = common.hk {
        let base = cfg.h_list[0].to_string();
        cfg.set("h_list", &halvings(&base, k)?)?;
    }
    if let Some(k) = common.tk {
        let base = cfg.tau_list[0].to_string();
        cfg.set("tau_list", &halvings(&base, k)?)?;
    }
    // a new eps list moves the default eps_ref with it unless one was given
    let eps_changed = common.eps.is_some()
        || common.eps_list.is_some()
        || lookup("eps_list").is_some()
        || lookup("eps").is_some();
    let eps_ref_given = common.eps_ref.is_some() || lookup("eps_ref").is_some();
    if let Reference::FineGrid {
        scale,
        eps_ref: Some(_),
    } = cfg.reference
    {
        if eps_changed && !eps_ref_given {
            cfg.reference = Reference::FineGrid {
                scale,
                eps_ref: Some(default_eps_ref(&cfg.eps_list)),
            };
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(out: &StudyOutput, cfg: &ExperimentConfig) -> Result<(), Failure> {
    match &cfg.output_path {
        Some(p) => out.write(p)?,
        None => {
            let stdout = io::stdout();
            harness::write_csv_to(stdout.lock(), &out.rows)?;
        }
    }
    let mut err = io::stderr().lock();
    for f in &out.fits {
        let _ = writeln!(err, "{} = {:.4}", f.label, f.value);
    }
    if out.any_failed() {
        let n = out.rows.iter().filter(|r| r.failed()).count();
        return Err(Failure::BlowUp(format!(
            "{n} row(s) FAILED: solver blow-up"
        )));
    }
    Ok(())
}

fn gausson_check(lambda: f64, a0: &str, b0: &str, t_end: f64, dt: f64) -> Result<(), Failure> {
    let parse = |name: &str, s: &str| -> Result<Complex64, Failure> {
        s.trim().parse::<Complex64>().map_err(|_| {
            Failure::Input(format!(
                "{name}: `{s}` is not a complex number (e.g. 1, 0.5+2i)"
            ))
        })
    };
    let (a0, b0) = (parse("a0", a0)?, parse("b0", b0)?);
    let p = GaussianParams::new(a0, b0, 0.0, lambda)?;
    let traj = solve_gaussian_ode(&p, t_end, dt)?;
    let phi0 = lambda * (b0.norm_sqr().ln() - 1.0);
    let k = traj.len() - 1;
    println!("r(T) = {:.15}", traj.r[k]);
    println!("phi(T) = {:.15}", traj.phi[k]);
    let stationary = a0.im == 0.0 && a0.re == -lambda;
    if !stationary {
        println!("a0 != -lambda: no stationary prediction to check");
        return Ok(());
    }
    let r_err = traj.r.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    let phi_err = traj
        .times
        .iter()
        .zip(&traj.phi)
        .map(|(t, ph)| (ph - phi0 * t).abs())
        .fold(0.0, f64::max);
    println!("phi0 = {phi0:.15}");
    println!("max |r - 1| = {r_err:.3e}");
    println!("max |phi - phi0 t| = {phi_err:.3e}");
    if r_err <= 1e-10 && phi_err <= 1e-10 {
        println!("PASS");
        Ok(())
    } else {
        Err(Failure::Check("stationary Gausson check failed".into()))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Simulate {
            common,
            monitor_stride,
        } => {
            let mut cfg = configure(&common, |c, v| {
                let mut cfg = ExperimentConfig::new(c);
                cfg.variant = v;
                cfg
            })?;
            if monitor_stride.is_some() {
                cfg.monitor_stride = monitor_stride.map(|s| s.max(1));
            }
            emit(&harness::simulate(&cfg)?, &cfg)
        }
        Command::Table1 { common, kmax } => {
            let cfg = configure(&common, |_, _| ExperimentConfig::table1(kmax))?;
            let t = harness::run_table1(&cfg)?;
            eprint!("{}", t.render());
            emit(&t.study, &cfg)
        }
        Command::ConvEps { common } => {
            let cfg = configure(&common, ExperimentConfig::eps_convergence)?;
            emit(&harness::run_eps_convergence(&cfg)?, &cfg)
        }
        Command::ConvEnergy { common } => {
            let cfg = configure(&common, |c, _| ExperimentConfig::energy_convergence(c))?;
            emit(&harness::run_energy_convergence(&cfg)?, &cfg)
        }
        Command::Evolve { common, samples } => {
            let mut cfg = configure(&common, |c, _| ExperimentConfig::time_evolution(c))?;
            if let Some(s) = samples {
                cfg.samples = s;
                cfg.validate()?;
            }
            emit(&harness::run_time_evolution(&cfg)?, &cfg)
        }
        Command::ConvTau { common } => {
            let cfg = configure(&common, |_, _| ExperimentConfig::tau_sweep())?;
            emit(&harness::run_tau_sweep(&cfg)?, &cfg)
        }
        Command::GaussonCheck {
            lambda,
            a0,
            b0,
            t_end,
            dt,
        } => gausson_check(lambda, &a0, &b0, t_end, dt),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::BlowUp(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
