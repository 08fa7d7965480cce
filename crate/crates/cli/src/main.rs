use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use maxwell_klein::cli_io::{self, Command};
use maxwell_klein::{Error, ErrorKind};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    SweepTransmission,
    LzOracle,
    Evolve,
    IonEvolve,
    Crosscheck,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::SweepTransmission => Command::SweepTransmission,
            Cmd::LzOracle => Command::LzOracle,
            Cmd::Evolve => Command::Evolve,
            Cmd::IonEvolve => Command::IonEvolve,
            Cmd::Crosscheck => Command::Crosscheck,
        }
    }
}

/// Klein tunneling of pseudospin-1 particles: closed-form, swept-ODE,
/// wave-packet and trapped-ion routes.
///
/// Exit codes: 0 success, 2 configuration error, 3 numerical guard tripped,
/// 4 I/O error.
#[derive(Debug, Parser)]
#[command(version, about)]
struct Args {
    command: Cmd,
    /// `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Primary output CSV (overrides `output` in the file).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads for sweeps; 0 uses all cores.
    #[arg(long)]
    threads: Option<usize>,
}

fn execute(args: &Args) -> Result<Vec<PathBuf>, Error> {
    let text = std::fs::read_to_string(&args.config).map_err(|source| Error::Io {
        context: format!("reading {}", args.config.display()),
        source,
    })?;
    let mut config = cli_io::parse_config_for(args.command.into(), &text)?;
    if let Some(out) = &args.output {
        config = config.with_output(out);
    }
    if let Some(n) = args.threads {
        config = config.with_threads(n);
    }
    cli_io::run(&config)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() {
                ErrorKind::Config.exit_code()
            } else {
                0
            };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match execute(&args) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let kind = e.kind();
            eprintln!("error[{}]: {e}", kind.tag());
            ExitCode::from(kind.exit_code() as u8)
        }
    }
}
