use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sovkit::harness::{
    cmd_accept, cmd_elliptic, cmd_flow, cmd_sov, cmd_spectral, cmd_theta, load_json, parse_bracket, EllipticDocument,
    ExperimentConfig, FlowOptions, HarnessError, LaxDocument, Outcome, ThetaDocument, EXIT_ACCEPTANCE,
};
use sovkit::rational::BracketSpec;
use sovkit::C64;

/// Separation of variables for rational and elliptic Lax matrices.
#[derive(Parser)]
#[command(name = "sovkit", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// instance document (JSON); the experiment config for `accept`
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// `linear`, `quadratic`, inline JSON `{"a": [...], "b": [re, im]}` or a file
    #[arg(long, global = true)]
    bracket: Option<String>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// multiplies every tolerance
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
    #[arg(long, global = true, env = "SOVKIT_OUT", default_value = "sovkit-out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 4)]
    workers: usize,
}

#[derive(Subcommand)]
enum Command {
    /// spectral curve, genus and Hamiltonian/Casimir split
    Spectral,
    /// divisor coordinates and their brackets
    Sov,
    /// Hamiltonian flow and its linearizing coordinates
    Flow {
        /// generating coefficient `k,l` of xi^k z^l
        #[arg(long, value_parser = parse_pair)]
        ham: Option<(usize, usize)>,
        #[arg(long, default_value_t = 1.0)]
        t_max: f64,
        #[arg(long, default_value_t = 9)]
        samples: usize,
        /// base point `re,im` of the Abelian integrals
        #[arg(long, value_parser = parse_complex, default_value = "2.5,2.5")]
        base: C64,
    },
    /// theta-function and basic-section relations
    Theta,
    /// divisor of an elliptic Lax matrix
    Elliptic,
    /// the full acceptance matrix
    Accept {
        /// criteria to run, e.g. `--suite 7 --suite 8`; all by default
        #[arg(long = "suite")]
        suites: Vec<u8>,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected k,l")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn parse_complex(s: &str) -> Result<C64, String> {
    let (a, b) = s.split_once(',').ok_or("expected re,im")?;
    Ok(C64::new(a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn required(input: &Option<PathBuf>) -> Result<&Path, HarnessError> {
    input
        .as_deref()
        .ok_or_else(|| HarnessError::schema("--input", "this subcommand needs an instance document"))
}

fn bracket(arg: &Option<String>) -> Result<BracketSpec, HarnessError> {
    arg.as_deref().map_or(Ok(BracketSpec::linear()), parse_bracket)
}

fn run(cli: Cli) -> Result<Outcome, HarnessError> {
    let c = &cli.common;
    let seed = c.seed.unwrap_or(ExperimentConfig::default().seed);
    let tol_scale = c.tol_scale.unwrap_or(1.0);
    if !(tol_scale.is_finite() && tol_scale > 0.0) {
        return Err(HarnessError::schema("--tol-scale", "must be positive"));
    }
    match cli.command {
        Command::Spectral => cmd_spectral(&load_json::<LaxDocument>(required(&c.input)?)?, &c.out),
        Command::Sov => {
            let doc: LaxDocument = load_json(required(&c.input)?)?;
            cmd_sov(&doc, &bracket(&c.bracket)?, seed, tol_scale, &c.out)
        }
        Command::Flow { ham, t_max, samples, base } => {
            let doc: LaxDocument = load_json(required(&c.input)?)?;
            let opts = FlowOptions {
                hamiltonian: ham,
                t_max,
                samples,
                base,
            };
            cmd_flow(&doc, &bracket(&c.bracket)?, &opts, seed, tol_scale, &c.out)
        }
        Command::Theta => {
            let doc = match &c.input {
                Some(p) => load_json::<ThetaDocument>(p)?,
                None => ThetaDocument::default(),
            };
            cmd_theta(&doc, seed, tol_scale, &c.out)
        }
        Command::Elliptic => cmd_elliptic(&load_json::<EllipticDocument>(required(&c.input)?)?, seed, tol_scale, &c.out),
        Command::Accept { suites } => {
            let mut config = match &c.input {
                Some(p) => load_json::<ExperimentConfig>(p)?,
                None => ExperimentConfig::default(),
            };
            if let Some(s) = c.seed {
                config.seed = s;
            }
            if let Some(t) = c.tol_scale {
                config.tol_scale = t;
            }
            if !suites.is_empty() {
                config.suites = suites;
            }
            let out = config.out.clone().unwrap_or_else(|| c.out.clone());
            config.out = None;
            cmd_accept(&config, c.workers, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(outcome) => {
            for m in &outcome.messages {
                println!("{m}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_ACCEPTANCE as u8)
            }
        }
        Err(e) => {
            eprintln!("sovkit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
