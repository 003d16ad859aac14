use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use towerlab_core::lab::{self, parse_family, Analysis, ComplexSource, Diagnostics, RunConfig, TowerSource};

/// Betti numbers, spectra and determinants along towers of finite covers.
///
/// Exit codes: 0 when every asserted invariant holds, 1 on input errors,
/// 2 on invariant violations.
#[derive(Parser)]
#[command(name = "towerlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses listed in a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rational and mod-p Betti numbers, Kazhdan gaps, universal coefficients.
    Betti(Quick),
    /// Spectral measures of reduced Laplacians.
    Spectrum(Quick),
    /// Exact against L² moments.
    Converge(Quick),
    /// Fuglede–Kadison determinant certificates.
    Fkdet(Quick),
    /// Mod-p monotonicity with the local-ring cross-check.
    Modp(Quick),
    /// Residual exponent fit along p-power towers.
    Padic(Quick),
    /// Rank gradient of a wedge of circles.
    Rankgrad(Quick),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Reject unknown fields instead of warning.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct Quick {
    /// Builtin (`circle`, `wedge:D`, `torus:N`, `lls:D:P`) or a complex file.
    #[arg(long)]
    complex: String,
    /// Family (`reduction`, `abelianized`, `heisenberg`) or a tower file.
    #[arg(long)]
    tower: Option<String>,
    #[arg(long, value_delimiter = ',')]
    degree: Vec<usize>,
    /// Tower prime; every value is also used as a coefficient field.
    #[arg(long, value_delimiter = ',')]
    p: Vec<u64>,
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    depth: Option<usize>,
    /// Explicit diagonal moduli, e.g. `2,3,4`.
    #[arg(long, value_delimiter = ',')]
    moduli: Vec<u64>,
    /// Refine builtin towers to steps of index p.
    #[arg(long)]
    refine: bool,
    #[command(flatten)]
    common: Common,
}

fn is_builtin(s: &str) -> bool {
    s.parse::<towerlab_core::BuiltinComplex>().is_ok()
}

fn quick_config(analysis: Analysis, q: &Quick) -> RunConfig {
    let complex = if is_builtin(&q.complex) {
        ComplexSource {
            builtin: Some(q.complex.clone()),
            file: None,
        }
    } else {
        ComplexSource {
            builtin: None,
            file: Some(PathBuf::from(&q.complex)),
        }
    };
    let mut tower = TowerSource {
        refine: q.refine,
        ..TowerSource::default()
    };
    if let Some(t) = &q.tower {
        if parse_family(t).is_ok() {
            tower.family = Some(t.clone());
        } else {
            tower.file = Some(PathBuf::from(t));
        }
    }
    if let Some(&p) = q.p.first() {
        tower.p = p;
    }
    if let Some(d) = q.depth {
        tower.depth = d;
    }
    if !q.moduli.is_empty() {
        tower.moduli = Some(q.moduli.clone());
    }
    let mut cfg = RunConfig {
        complex,
        tower,
        degrees: q.degree.clone(),
        primes: q.p.clone(),
        analyses: vec![analysis],
        ..RunConfig::default()
    };
    if let Some(k) = q.kmax {
        cfg.kmax = k;
    }
    cfg
}

fn execute(cli: Cli) -> anyhow::Result<i32> {
    let (cfg, common) = match &cli.command {
        Command::Run { config, common } => {
            let mut diag = if common.strict {
                Diagnostics::strict()
            } else {
                Diagnostics::lax()
            };
            let cfg = RunConfig::from_path(config, &mut diag)?;
            for w in &diag.warnings {
                eprintln!("warning: {w}");
            }
            (cfg, common)
        }
        Command::Betti(q) => (quick_config(Analysis::Betti, q), &q.common),
        Command::Spectrum(q) => (quick_config(Analysis::Spectrum, q), &q.common),
        Command::Converge(q) => (quick_config(Analysis::Converge, q), &q.common),
        Command::Fkdet(q) => (quick_config(Analysis::Fkdet, q), &q.common),
        Command::Modp(q) => (quick_config(Analysis::Modp, q), &q.common),
        Command::Padic(q) => (quick_config(Analysis::Padic, q), &q.common),
        Command::Rankgrad(q) => (quick_config(Analysis::Rankgrad, q), &q.common),
    };
    let mut cfg = cfg;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let mut diag = if common.strict {
        Diagnostics::strict()
    } else {
        Diagnostics::lax()
    };
    let outcome = lab::run(&cfg, &mut diag, common.out.as_deref()).context("run failed")?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    print!("{}", outcome.summary);
    println!("wrote {} files to {}", outcome.files.len(), display(&outcome.out_dir));
    Ok(outcome.exit_code())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { lab::EXIT_INPUT } else { lab::EXIT_OK };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(lab::EXIT_INPUT as u8)
        }
    }
}
