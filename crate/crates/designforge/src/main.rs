use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSubcommand};
use designforge::{parse_pairs, ConfigError, ExperimentConfig, RunError, Subcommand};

#[derive(Parser)]
#[command(name = "designforge", version, about = "Seeded experiments on random combinatorial designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand)]
enum Command {
    /// Success rate against p for a list colouring or builder target.
    Threshold(Common),
    /// Monte Carlo spreadness report for the spread sampler.
    Spreadness(Common),
    /// Build and validate one Steiner triple system.
    Sts(Common),
    /// Build and validate one 1-factorization of K_2n.
    Onef(Common),
    /// Latin square from random lists.
    Latin(Common),
    /// Round statistics of one pseudo-matching run.
    Nibble(Common),
    /// Success rate against k for uniform k-lists on K_n,n.
    Klist(Common),
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// One value or a comma list.
    #[arg(long)]
    n: Option<String>,
    /// One value or a comma list.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

fn load(sub: Subcommand, c: &Common) -> Result<ExperimentConfig, RunError> {
    let mut pairs = match &c.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
            parse_pairs(&text)?
        }
        None => Default::default(),
    };
    let mut set = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    };
    set("seed", c.seed.map(|x| x.to_string()));
    set("out", c.out.as_ref().map(|x| x.display().to_string()));
    set("n", c.n.clone());
    set("p", c.p.clone());
    set("trials", c.trials.map(|x| x.to_string()));
    Ok(ExperimentConfig::from_pairs(sub, &pairs)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (sub, common) = match &cli.command {
        Command::Threshold(c) => (Subcommand::Threshold, c),
        Command::Spreadness(c) => (Subcommand::Spreadness, c),
        Command::Sts(c) => (Subcommand::Sts, c),
        Command::Onef(c) => (Subcommand::Onef, c),
        Command::Latin(c) => (Subcommand::Latin, c),
        Command::Nibble(c) => (Subcommand::Nibble, c),
        Command::Klist(c) => (Subcommand::Klist, c),
    };
    let result = load(sub, common).and_then(|cfg| designforge::run(&cfg));
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("designforge {}: {e}", sub.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
