//! `prandtl-lab`: run the canned experiments and write their artifacts.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use prandtl_lab::config::RunConfig;
use prandtl_lab::LabError;

mod report;

#[derive(Debug, Parser)]
#[command(name = "prandtl-lab", version, about = "Growing modes and ill-posedness experiments for the linearized Prandtl equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML); defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory for artifacts and the manifest.
    #[arg(long, global = true, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
    /// Seed recorded in the configuration (synthetic-noise checks only).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Dispersion eigenvalue, shear-layer profile and jump identities.
    Eigen,
    /// Heat flow of each profile and its critical path.
    Heat,
    /// Assembled growing modes: norms, jumps, divergence identity.
    Mode,
    /// Residual plateau across eps and the decay obstruction.
    ResidualScan,
    /// Growth rates of the evolved mode data against sqrt(k).
    GrowthScan,
    /// Probe ratio across wavenumbers above and below the measured rate.
    IllposednessProbe,
    /// Everything above.
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eigen => "eigen",
            Command::Heat => "heat",
            Command::Mode => "mode",
            Command::ResidualScan => "residual-scan",
            Command::GrowthScan => "growth-scan",
            Command::IllposednessProbe => "illposedness-probe",
            Command::All => "all",
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;
const EXIT_ACCEPTANCE: u8 = 4;

fn fail(code: u8, kind: &str, message: &str) -> ExitCode {
    let body = serde_json::json!({ "error": { "kind": kind, "message": message }, "exit_code": code });
    eprintln!("{body}");
    ExitCode::from(code)
}

fn lab_fail(e: &LabError) -> ExitCode {
    let code = if e.is_config() { EXIT_CONFIG } else { EXIT_NUMERICAL };
    fail(code, e.kind(), &e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(EXIT_CONFIG, "Usage", e.to_string().trim()),
    };
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => return lab_fail(&e),
        },
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail(EXIT_CONFIG, "InvalidParameter", "--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(EXIT_CONFIG, "InvalidParameter", &e.to_string());
        }
    }
    match report::run(cli.command, &cfg, &cli.out) {
        Ok(checks) => {
            for c in &checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            println!("artifacts: {}", cli.out.join("manifest.json").display());
            if checks.iter().all(|c| c.pass) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ACCEPTANCE)
            }
        }
        Err(e) => lab_fail(&e),
    }
}
