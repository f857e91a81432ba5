use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use riskshare::commands::{self, exit_code, Output};
use riskshare::config::{EngineKind, RunConfig};

/// Risk sharing prices for non-replicable claims.
#[derive(Parser)]
#[command(name = "riskshare", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Risk sharing price, optimal losses and lambda bounds as JSON.
    Price(Common),
    /// Reservation price curves on the loss grid as CSV.
    Curves(Common),
    /// Risk sharing prices over a lambda grid as CSV.
    Sweep(Common),
    /// Non-traded asset model.
    Mz {
        #[command(subcommand)]
        command: MzCommand,
    },
}

#[derive(Subcommand)]
enum MzCommand {
    /// Indifference and risk sharing prices at (t, y) as JSON.
    Price(Common),
    /// PDE price field over (t, y) as CSV.
    Field(Common),
    /// Optimal trading time: stopping region as CSV, V(0, y0) as JSON.
    Stop(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
    #[arg(long)]
    paths: Option<usize>,
    /// PDE grid as `ny,nt`.
    #[arg(long, value_parser = parse_grid)]
    grid: Option<(usize, usize)>,
    /// Allow trading only at the horizon (`mz stop`).
    #[arg(long)]
    terminal_only: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Mc,
    Pde,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected ny,nt")?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| e.to_string());
    Ok((parse(a)?, parse(b)?))
}

fn load(c: &Common) -> Result<RunConfig> {
    let text = std::fs::read_to_string(&c.config)
        .with_context(|| format!("reading {}", c.config.display()))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(seed) = c.seed {
        cfg.options.seed = seed;
    }
    if let Some(e) = c.engine {
        cfg.options.engine = match e {
            Engine::Mc => EngineKind::Mc,
            Engine::Pde => EngineKind::Pde,
        };
    }
    if let Some(p) = c.paths {
        cfg.options.paths = p;
    }
    if let Some(g) = c.grid {
        cfg.options.grid = g;
    }
    cfg.options.terminal_only |= c.terminal_only;
    cfg.validate()?;
    Ok(cfg)
}

/// A reader closing the pipe early (`| head`) is not an error.
fn write_stdout(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).context("writing stdout"),
        _ => Ok(()),
    }
}

fn emit(out: Output, path: Option<&PathBuf>) -> Result<()> {
    if let Some(csv) = out.csv {
        match path {
            Some(p) => {
                std::fs::write(p, csv).with_context(|| format!("writing {}", p.display()))?
            }
            None if out.json.is_none() => write_stdout(&csv)?,
            None => {}
        }
    }
    if let Some(json) = out.json {
        write_stdout(&(serde_json::to_string_pretty(&json)? + "\n"))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let (common, f): (&Common, fn(&RunConfig) -> Result<Output>) = match &cli.command {
        Command::Price(c) => (c, commands::price),
        Command::Curves(c) => (c, commands::curves),
        Command::Sweep(c) => (c, commands::sweep),
        Command::Mz { command } => match command {
            MzCommand::Price(c) => (c, commands::mz_price),
            MzCommand::Field(c) => (c, commands::mz_field),
            MzCommand::Stop(c) => (c, commands::mz_stop),
        },
    };
    let cfg = load(common)?;
    emit(f(&cfg)?, common.out.as_ref())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // usage errors are invalid input (3); help and version succeed
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
