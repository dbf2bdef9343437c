use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use parapos_core::scenario::{builtin, list_scenarios, load_config, RunOptions, ScenarioConfig};
use parapos_core::Error;
use rayon::prelude::*;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "parapos", version, about = "Run reaction-diffusion verification scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more scenarios, given as config paths or built-in names.
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
        /// Output root; each scenario writes into `<DIR>/<name>`. PARAPOS_OUT takes precedence.
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Overrides the sampling seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of scenarios run concurrently (default: core count).
        #[arg(long)]
        workers: Option<usize>,
        #[arg(short, long)]
        verbose: bool,
    },
    /// List the built-in scenarios.
    List,
    /// Check a config without running it.
    Validate { config: String },
}

fn resolve(arg: &str) -> Result<(ScenarioConfig, PathBuf), Error> {
    let path = Path::new(arg);
    if path.exists() {
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        return Ok((load_config(path)?, base));
    }
    if arg.ends_with(".json") {
        return Err(Error::Config { pointer: "/".into(), message: format!("{arg}: file not found") });
    }
    Ok((builtin(arg)?, PathBuf::new()))
}

fn run(configs: &[String], out: PathBuf, seed: Option<u64>, workers: Option<usize>, verbose: bool) -> u8 {
    let out = std::env::var_os("PARAPOS_OUT").map(PathBuf::from).unwrap_or(out);
    let mut jobs = Vec::new();
    for arg in configs {
        match resolve(arg) {
            Ok(job) => jobs.push(job),
            Err(e) => {
                eprintln!("{arg}: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let mut names: Vec<&str> = jobs.iter().map(|(c, _)| c.name.as_str()).collect();
    names.sort_unstable();
    if names.windows(2).any(|w| w[0] == w[1]) {
        eprintln!("scenario names in a batch must be distinct");
        return EXIT_CONFIG;
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        if k == 0 {
            eprintln!("--workers must be at least 1");
            return EXIT_CONFIG;
        }
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("cannot start worker pool: {e}");
            return EXIT_RUNTIME;
        }
    };

    let codes: Vec<u8> = pool.install(|| {
        jobs.par_iter()
            .map(|(cfg, base)| {
                let dir = out.join(&cfg.name);
                eprintln!("[{}] running into {}", cfg.name, dir.display());
                let opts = RunOptions { out_dir: dir, seed, base_dir: base.clone(), verbose };
                match parapos_core::scenario::run_scenario(cfg, &opts) {
                    Ok(m) => {
                        for v in &m.verdicts {
                            eprintln!("[{}] {:<22} {:?}  {}", cfg.name, v.tag, v.verdict, v.detail);
                        }
                        if let Some(err) = &m.error {
                            eprintln!("[{}] error: {err}", cfg.name);
                        }
                        eprintln!("[{}] exit {}", cfg.name, m.exit_code());
                        m.exit_code() as u8
                    }
                    Err(e) => {
                        eprintln!("[{}] {e}", cfg.name);
                        EXIT_RUNTIME
                    }
                }
            })
            .collect()
    });
    codes.into_iter().max().unwrap_or(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Run { configs, out, seed, workers, verbose } => run(&configs, out, seed, workers, verbose),
        Command::List => {
            for (name, desc) in list_scenarios() {
                println!("{name}\t{desc}");
            }
            0
        }
        Command::Validate { config } => match resolve(&config) {
            Ok((cfg, _)) => {
                println!("{}: ok", cfg.name);
                0
            }
            Err(e) => {
                eprintln!("{config}: {e}");
                EXIT_CONFIG
            }
        },
    };
    ExitCode::from(code)
}
