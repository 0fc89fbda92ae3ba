use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nohair_cli::config::{self, DiamondFile, EntangleFile, SweepFile, VerifyFile};
use nohair_cli::{CliError, RunOptions, RunSummary};

#[derive(Parser)]
#[command(name = "nohair", version, about = "Certified checks of the horizon no-hair trade-off")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides `output_dir` in the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `seed` in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Random-model campaign of the trade-off checks.
    Verify,
    /// Channel-family sweep with a log–log scaling fit.
    Sweep,
    /// Entangled-reference bounds.
    Entangle,
    /// Diamond distance between two inline channels.
    Diamond,
}

struct Style {
    colour: bool,
}

impl Style {
    fn paint(&self, text: &str, code: &str) -> String {
        if self.colour {
            format!("\x1b[{code}m{text}\x1b[0m")
        } else {
            text.to_string()
        }
    }
}

fn output_dir(cli: &Cli, from_config: &Option<PathBuf>) -> PathBuf {
    cli.out.clone().or_else(|| from_config.clone()).unwrap_or_else(|| PathBuf::from("runs"))
}

fn run(cli: &Cli) -> Result<(RunSummary, Option<String>), CliError> {
    let path = cli.config.as_ref().ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let workers = cli.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        return Err(CliError::Config("--workers must be at least 1".into()));
    }
    match cli.command {
        Command::Verify => {
            let mut cfg: VerifyFile = config::load(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            let opts = RunOptions { out: output_dir(cli, &cfg.output_dir), workers };
            Ok((nohair_cli::cmd_verify(&cfg, &opts)?, None))
        }
        Command::Sweep => {
            let mut cfg: SweepFile = config::load(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            let opts = RunOptions { out: output_dir(cli, &cfg.output_dir), workers };
            Ok((nohair_cli::cmd_sweep(&cfg, &opts)?, None))
        }
        Command::Entangle => {
            let mut cfg: EntangleFile = config::load(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            let opts = RunOptions { out: output_dir(cli, &cfg.output_dir), workers };
            Ok((nohair_cli::cmd_entangle(&cfg, &opts)?, None))
        }
        Command::Diamond => {
            let mut cfg: DiamondFile = config::load(path)?;
            cfg.seed = cli.seed.unwrap_or(cfg.seed);
            let opts = RunOptions { out: output_dir(cli, &cfg.output_dir), workers };
            let (summary, result) = nohair_cli::cmd_diamond(&cfg, &opts)?;
            let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Config(e.to_string()))?;
            Ok((summary, Some(json)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let style = Style { colour: std::env::var_os("NO_COLOR").is_none() && std::io::stderr().is_terminal() };
    match run(&cli) {
        Ok((summary, json)) => {
            if let Some(json) = json {
                println!("{json}");
            }
            if !cli.quiet {
                let v = summary.verdicts;
                if v.total() > 0 {
                    eprintln!(
                        "{}: {} instances, {} pass, {} fail, {} indeterminate",
                        summary.command,
                        v.total(),
                        style.paint(&v.pass.to_string(), "32"),
                        style.paint(&v.fail.to_string(), if v.fail > 0 { "31" } else { "0" }),
                        v.indeterminate
                    );
                }
                for note in &summary.notes {
                    eprintln!("{}: {note}", summary.command);
                }
                eprintln!("{}: results in {}", summary.command, summary.out.display());
            }
            ExitCode::from(summary.exit_code as u8)
        }
        Err(e) => {
            eprintln!("{} {e}", style.paint("error:", "31"));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
