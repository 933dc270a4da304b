use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use usvwave_harness::{compare, load_config, run, HarnessError, Override};

#[derive(Parser)]
#[command(name = "usvwave", version, about = "USV wave estimation, prediction and landing scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write log.csv and metrics.csv.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set planner.follow.hover_height=2.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<Override>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write one SVG per pose state.
        #[arg(long)]
        plots: bool,
    },
    /// Run several configurations on the same seeds and tabulate RMSE.
    Compare {
        #[arg(required = true, num_args = 2..)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<Override>,
        /// Write the table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Parse and validate a config without running it.
    Validate {
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<Override>,
    },
}

fn label(path: &std::path::Path, variant: &str, taken: &[(String, usvwave_sim::ScenarioConfig)]) -> String {
    let stem = path.file_stem().map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned());
    let base = format!("{stem}:{variant}");
    let dupes = taken.iter().filter(|(l, _)| l == &base || l.starts_with(&format!("{base}#"))).count();
    if dupes == 0 {
        base
    } else {
        format!("{base}#{}", dupes + 1)
    }
}

fn main_inner(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            overrides,
            out,
            plots,
        } => {
            let output = run(&config, &overrides, &out, plots)?;
            print!("{}", output.metrics.to_csv_string());
            for f in &output.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Compare {
            configs,
            seeds,
            overrides,
            csv,
        } => {
            let mut loaded = Vec::new();
            for path in &configs {
                let cfg = load_config(path, &overrides)?;
                let l = label(path, cfg.variant.name(), &loaded);
                loaded.push((l, cfg));
            }
            let table = compare(&loaded, seeds)?;
            print!("{}", table.render());
            if let Some(path) = csv {
                table.save(&path)?;
            }
        }
        Command::Validate { config, overrides } => {
            let cfg = load_config(&config, &overrides)?;
            println!(
                "{}: ok (task {}, variant {}, {} s)",
                config.display(),
                cfg.task.name(),
                cfg.variant.name(),
                cfg.duration
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
