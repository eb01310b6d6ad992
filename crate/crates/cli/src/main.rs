use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mindisc::optimality::DEFAULT_P_GRID;
use mindisc_cli::{
    cmd_certify, cmd_optimize, cmd_validate, CliError, EnsembleSource, Init, PovmSource, RunConfig,
};

/// Minimum-error measurement optimizer and optimality certifier.
#[derive(Parser)]
#[command(name = "mindisc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check ensemble (and optional measurement) invariants.
    Validate(Common),
    /// Bound the distance of a given measurement from optimal.
    Certify(Common),
    /// Compute an optimal measurement.
    Optimize(Common),
}

#[derive(Args)]
struct Common {
    /// Ensemble JSON file.
    #[arg(required_unless_present_any = ["example_shifted", "example_random"])]
    input: Option<PathBuf>,

    /// Use the m-state shifted-basis ensemble instead of a file.
    #[arg(long, value_name = "M", conflicts_with_all = ["input", "example_random"])]
    example_shifted: Option<usize>,

    /// Use a random D-dimensional ensemble of M states (see --seed).
    #[arg(long, value_name = "DxM", value_parser = parse_dims, conflicts_with = "input")]
    example_random: Option<(usize, usize)>,

    /// Measurement JSON file (certify, validate, or optimize --init file).
    #[arg(long)]
    povm: Option<PathBuf>,

    /// Use the shifted measurement M_k = |k+1><k+1| (with --example-shifted).
    #[arg(long, conflicts_with = "povm")]
    povm_shifted: bool,

    #[arg(long, default_value_t = 1e-8)]
    tol: f64,

    #[arg(long)]
    max_iters: Option<usize>,

    /// Use the fixed step length t_max instead of exact line search.
    #[arg(long)]
    no_line_search: bool,

    #[arg(long, value_enum, default_value_t = Init::Uniform)]
    init: Init,

    /// Comma-separated mass thresholds for the gap upper bound.
    #[arg(long, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (d, m) = s
        .split_once(['x', 'X', ','])
        .ok_or_else(|| format!("expected DxM, got `{s}`"))?;
    let d = d.trim().parse().map_err(|e| format!("bad dimension: {e}"))?;
    let m = m.trim().parse().map_err(|e| format!("bad state count: {e}"))?;
    Ok((d, m))
}

impl Common {
    fn into_config(self) -> RunConfig {
        let ensemble = match (self.input, self.example_shifted, self.example_random) {
            (Some(path), _, _) => EnsembleSource::File(path),
            (None, Some(m), _) => EnsembleSource::Shifted(m),
            (None, None, Some((d, m))) => EnsembleSource::Random { d, m },
            (None, None, None) => unreachable!("clap enforces an ensemble source"),
        };
        let povm = match (self.povm, self.povm_shifted) {
            (Some(path), _) => Some(PovmSource::File(path)),
            (None, true) => Some(PovmSource::Shifted),
            (None, false) => None,
        };
        RunConfig {
            ensemble,
            povm,
            tol: self.tol,
            max_iters: self.max_iters,
            line_search: !self.no_line_search,
            init: self.init,
            p_grid: self.p_grid.unwrap_or_else(|| DEFAULT_P_GRID.to_vec()),
            output_dir: self.out,
            seed: self.seed,
        }
    }
}

fn report_checks(title: &str, report: &mindisc::model::ValidationReport) {
    println!("{title}:");
    for c in &report.checks {
        let status = if c.passed { "ok  " } else { "FAIL" };
        println!("  {status} {:<16} residual {:.3e} (tol {:.1e})  {}", c.name, c.residual, c.tolerance, c.detail);
    }
}

fn execute(command: Command) -> Result<u8, CliError> {
    match command {
        Command::Validate(args) => {
            let outcome = cmd_validate(&args.into_config())?;
            report_checks("ensemble", &outcome.ensemble);
            if let Some(p) = &outcome.povm {
                report_checks("measurement", p);
            }
            Ok(if outcome.passed() { 0 } else { 2 })
        }
        Command::Certify(args) => {
            let cfg = args.into_config();
            let c = cmd_certify(&cfg)?;
            println!("p_succ        {:.12}", c.p_succ);
            println!("gap interval  [{:.6e}, {:.6e}]", c.gap_lower, c.gap_upper);
            println!("alpha         {:.6e}  (p = {}, dim = {})", c.alpha_scalar, c.p_used, c.dim_used);
            println!("wrote {}", cfg.output_dir.join("certificate.json").display());
            Ok(0)
        }
        Command::Optimize(args) => {
            let cfg = args.into_config();
            let out = cmd_optimize(&cfg)?;
            let c = &out.certificate;
            println!(
                "{} after {} steps",
                out.trace.termination_reason.as_str(),
                out.trace.steps.len()
            );
            println!("p_succ        {:.12}", c.p_succ);
            println!("t_max         {:.3e}", out.trace.final_t_max);
            println!("gap interval  [{:.6e}, {:.6e}]", c.gap_lower, c.gap_upper);
            println!("wrote trace.csv, final_povm.json, certificate.json to {}", cfg.output_dir.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
