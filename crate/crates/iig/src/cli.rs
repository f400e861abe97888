use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::commands;
use crate::config::RunConfig;
use crate::emit;
use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "iig", version, about = "Incremental informative path planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grow one planner tree on a world and select a path.
    Plan(Common),
    /// Run an exploration mission until the map entropy bound is met.
    Explore(Common),
    /// Plan over a wireless signal surface and score the reconstruction.
    Monitor(Common),
    /// Sweep beam count or range over several seeds.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Seeds per setting.
        #[arg(long)]
        seeds: Option<usize>,
        /// `beams` or `range`.
        #[arg(long)]
        sweep: Option<String>,
    },
    /// Print the full default configuration.
    Defaults,
}

#[derive(Debug, Args)]
struct Common {
    /// Configuration file (`key = value` with `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// World file, overriding `world.file`.
    #[arg(long)]
    world: Option<String>,
    /// Override one key, as `section.key=value`. Repeatable.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
}

impl Common {
    /// Configuration plus the directory relative paths in it resolve against.
    fn load(&self) -> Result<(RunConfig, PathBuf)> {
        let (mut config, base) = match &self.config {
            Some(path) => {
                let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
                (RunConfig::load(path)?, base)
            }
            None => (RunConfig::default(), PathBuf::new()),
        };
        for o in &self.overrides {
            let (key, value) = o
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set expects section.key=value, found {o:?}")))?;
            config.set(key.trim(), value.trim())?;
        }
        if let Some(seed) = self.seed {
            config.run.seed = seed;
        }
        if let Some(world) = &self.world {
            let cwd = std::env::current_dir().map_err(|e| CliError::io(".", e))?;
            config.world.file = cwd.join(world).to_string_lossy().into_owned();
        }
        if let Some(out) = &self.out {
            config.run.output = out.to_string_lossy().into_owned();
        }
        Ok((config, base))
    }
}

fn run(cli: Cli) -> Result<()> {
    let (config, files) = match &cli.command {
        Command::Defaults => {
            print!("{}", RunConfig::default().render());
            return Ok(());
        }
        Command::Plan(c) => {
            let (config, base) = c.load()?;
            let files = commands::plan(&config, &base)?;
            (config, files)
        }
        Command::Explore(c) => {
            let (config, base) = c.load()?;
            let files = commands::explore(&config, &base)?;
            (config, files)
        }
        Command::Monitor(c) => {
            let (config, base) = c.load()?;
            let files = commands::monitor(&config, &base)?;
            (config, files)
        }
        Command::Bench { common, seeds, sweep } => {
            let (mut config, base) = common.load()?;
            if let Some(s) = seeds {
                config.bench.seeds = *s;
            }
            if let Some(s) = sweep {
                config.set("bench.sweep", s)?;
            }
            let rows = commands::bench_rows(&config, &base, |r| {
                eprintln!(
                    "setting {} seed {}: {} nodes, {} samples, converged {}",
                    r.setting, r.seed, r.nodes, r.samples, r.converged
                );
            })?;
            let text = commands::bench_csv(&config, &rows);
            (config, vec![("bench.csv", text)])
        }
    };
    let dir = PathBuf::from(&config.run.output);
    emit::write_files(&dir, &files)?;
    for (name, _) in &files {
        println!("{}", dir.join(name).display());
    }
    Ok(())
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("iig: {e}");
            e.exit_code()
        }
    }
}
