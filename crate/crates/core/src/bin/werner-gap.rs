use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use werner_gap::entanglement::werner_entanglement_boundary;
use werner_gap::region::{
    check_point, parse_angle, run_lp, scan, verify_mimic, write_csv, write_json, LpSettings, OutputFormat,
    ScanConfig, ScanDocument,
};
use werner_gap::states::werner_thresholds;
use werner_gap::Error;

/// Entanglement, local models and Bell violation for noisy two-qubit states.
#[derive(Parser)]
#[command(name = "werner-gap", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a grid over ξ in [0, π/4] and p in [0, 1].
    Scan(ScanArgs),
    /// Classify one point and print the quantities behind it.
    Check(PointArgs),
    /// Search measurement settings for the smallest critical visibility.
    Lp(LpArgs),
    /// Compare the separable mimic with the quantum correlations.
    MimicVerify(MimicArgs),
    /// Werner-state thresholds and PPT boundary.
    Werner(WernerArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct ScanArgs {
    /// ξ steps by p steps.
    #[arg(long, default_value = "100x100", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Also run the settings search with this many settings per side.
    #[arg(long)]
    settings: Option<usize>,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PointArgs {
    #[arg(long)]
    p: f64,
    /// Radians, or with a `pi` suffix such as `0.25pi`.
    #[arg(long, value_parser = angle_arg)]
    xi: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct LpArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = angle_arg)]
    xi: f64,
    #[arg(long, default_value_t = 2)]
    settings: usize,
    #[arg(long, default_value_t = 50)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MimicArgs {
    #[arg(long)]
    p: f64,
    #[arg(long, value_parser = angle_arg)]
    xi: f64,
    /// Monte-Carlo rounds per sampled pair; 0 skips sampling.
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WernerArgs {
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn angle_arg(s: &str) -> Result<f64, String> {
    parse_angle(s).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("grid {s:?} is not of the form NxM"))?;
    let n = a.trim().parse().map_err(|_| format!("bad grid size {a:?}"))?;
    let m = b.trim().parse().map_err(|_| format!("bad grid size {b:?}"))?;
    Ok((n, m))
}

enum Failure {
    Lib(Error),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Lib(Error::Precondition(_)) => 3,
        Failure::Lib(Error::Numerical(_) | Error::NotHermitian(_)) => 4,
        Failure::Lib(_) => 2,
        Failure::Io(_) => 1,
    }
}

fn open_out(path: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(value: &T, path: &Option<PathBuf>) -> Result<(), Failure> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WernerReport {
    d: usize,
    p_ent: f64,
    p_lhv: f64,
    gap: f64,
    ppt_boundary: f64,
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Scan(a) => {
            let config = ScanConfig {
                output_format: match a.format {
                    Format::Csv => OutputFormat::Csv,
                    Format::Json => OutputFormat::Json,
                },
                seed: a.seed,
                lp_settings: a.settings.map(|m| LpSettings {
                    m,
                    restarts: a.restarts,
                }),
                ..ScanConfig::full(a.grid.0, a.grid.1)
            };
            let points = scan(&config)?;
            let mut out = open_out(&a.out)?;
            match config.output_format {
                OutputFormat::Csv => write_csv(&points, &mut out)?,
                OutputFormat::Json => write_json(&ScanDocument::new(config, points), &mut out)?,
            }
            out.flush()?;
        }
        Command::Check(a) => emit_json(&check_point(a.p, a.xi)?, &a.out)?,
        Command::Lp(a) => emit_json(&run_lp(a.p, a.xi, a.settings, a.restarts, a.seed)?, &a.out)?,
        Command::MimicVerify(a) => emit_json(&verify_mimic(a.p, a.xi, a.samples, a.seed)?, &a.out)?,
        Command::Werner(a) => {
            let t = werner_thresholds(a.d)?;
            let report = WernerReport {
                d: a.d,
                p_ent: t.p_ent,
                p_lhv: t.p_lhv,
                gap: t.gap(),
                ppt_boundary: werner_entanglement_boundary(a.d)?,
            };
            emit_json(&report, &a.out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let code = exit_code(&f);
            match &f {
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Io(e) => eprintln!("error: {e}"),
            }
            ExitCode::from(code)
        }
    }
}
