use std::process::ExitCode;

use clap::{Parser, Subcommand};
use illpose::harness::{self, config::Experiment, HarnessError, RunOutcome};

/// Numerical experiments on ill-posedness of cubic half-wave and fractional NLS.
///
/// Parameters are passed as `--key value` after the subcommand, or through
/// `--config <file>` with `[general]` and per-experiment sections. The output
/// directory is `--out`, else `ILLPOSE_OUT`, else `illpose-out`.
#[derive(Parser)]
#[command(name = "illpose", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Szegő traveling-wave pair: vanishing initial distance, order-one later distance
    UcSzego(Params),
    /// Half-wave flow against rescaled Szegő waves
    UcNhw(Params),
    /// Focusing traveling-wave pair in L²
    #[command(alias = "uc-l2-focusing")]
    UcL2(Params),
    /// Trilinear Duhamel term against ε
    C3(Params),
    /// Szegő approximation of the half-wave flow in H^s, s > 1/2
    Approx(Params),
    /// Norm-inflation sweep in N
    Inflate(Params),
    /// Picard iterates: exact window and support growth
    PicardAudit(Params),
    /// Feasibility map over (β, s)
    RegionMap(Params),
    /// Every experiment on a thread pool (`--suite default|quick`, `--threads n`)
    #[command(alias = "run")]
    Suite(Params),
}

#[derive(clap::Args)]
struct Params {
    #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
    args: Vec<String>,
}

fn report(exp: Experiment, r: &Result<RunOutcome, HarnessError>) -> u8 {
    match r {
        Ok(o) => {
            print!("{}", o.report.summary());
            eprintln!("{exp}: {:.2?}, {} files", o.report.wall_clock, o.files.len());
            u8::from(!o.report.passed())
        }
        Err(e) => {
            eprintln!("{exp}: {e}");
            e.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (exp, params) = match cli.command {
        Command::UcSzego(p) => (Experiment::UcSzego, p),
        Command::UcNhw(p) => (Experiment::UcNhw, p),
        Command::UcL2(p) => (Experiment::UcL2, p),
        Command::C3(p) => (Experiment::C3, p),
        Command::Approx(p) => (Experiment::Approx, p),
        Command::Inflate(p) => (Experiment::Inflate, p),
        Command::PicardAudit(p) => (Experiment::PicardAudit, p),
        Command::RegionMap(p) => (Experiment::RegionMap, p),
        Command::Suite(p) => {
            return match harness::run_suite(&p.args) {
                Ok(results) => {
                    let code = results.iter().map(|(e, r)| report(*e, r)).max().unwrap_or(0);
                    ExitCode::from(code.min(1))
                }
                Err(e) => {
                    eprintln!("suite: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            };
        }
    };
    let r = harness::run_experiment(exp, &params.args);
    ExitCode::from(report(exp, &r))
}
