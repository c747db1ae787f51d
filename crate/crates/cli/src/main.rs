mod config;
mod presets;
mod run;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;

use config::{apply_override, ConfigError, ExperimentConfig};
use run::RunError;

/// Simulates photons in coupled waveguide networks under pure dephasing.
#[derive(Parser)]
#[command(name = "dephasing", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Experiment config (JSON). A previous run's manifest.json also works.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in experiment, see `list-presets`.
    #[arg(long)]
    preset: Option<String>,
    /// Override a config field, e.g. `--set oracle.M=500`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed for trajectory sampling.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for trajectory sampling (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the built-in presets.
    ListPresets,
}

fn load(cli: &Cli) -> Result<(ExperimentConfig, dephasing::Network, Option<String>), RunError> {
    let (mut doc, preset, base) = match (&cli.config, &cli.preset) {
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|source| ConfigError::Read { path: path.clone(), source })?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
            // a manifest keeps the preset it came from
            let preset = doc.get("preset").and_then(Value::as_str).map(str::to_string);
            (doc, preset, run::base_dir(Some(path)))
        }
        (None, Some(name)) => {
            let p = presets::find(name).ok_or_else(|| ConfigError::UnknownPreset(name.clone()))?;
            (p.config(), Some(name.clone()), run::base_dir(None))
        }
        _ => return Err(ConfigError::Parse("give --config PATH or --preset NAME".into()).into()),
    };
    if doc.get("config").is_some() && doc.get("mode").is_none() {
        doc = doc["config"].take();
    }
    for spec in &cli.overrides {
        apply_override(&mut doc, spec)?;
    }
    if let Some(out) = &cli.out {
        apply_override(&mut doc, &format!("output_dir={}", Value::String(out.display().to_string())))?;
    }
    if let Some(seed) = cli.seed {
        apply_override(&mut doc, &format!("oracle.seed={seed}"))?;
    }
    let (cfg, net) = ExperimentConfig::from_value(doc)?.resolve(&base)?;
    Ok((cfg, net, preset))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(Command::ListPresets) = cli.command {
        let mut stdout = std::io::stdout().lock();
        for p in presets::PRESETS {
            // a closed pipe (e.g. `| head`) is not an error
            if writeln!(stdout, "{:<30} {}", p.name, p.description).is_err() {
                break;
            }
        }
        return ExitCode::SUCCESS;
    }
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = load(&cli).and_then(|(cfg, net, preset)| {
        let files = run::run(&cfg, &net, preset.as_deref())?;
        Ok((cfg.output_dir, files))
    });
    match result {
        Ok((dir, files)) => {
            println!("wrote {} files to {}", files.len(), dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
