use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conflict_lens::pipeline::{
    self, Comparison, PredictOptions, ReproduceOptions, RunManifest, SimulateOptions,
};
use conflict_lens::{Profile, Result, SeriesKey};

#[derive(Parser)]
#[command(
    name = "conflict-lens",
    version,
    about = "Detect and predict conflicts between RAN control applications"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the slicing simulator and write profiles and traces.
    Simulate {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        agents: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Run all agents together instead of one at a time.
        #[arg(long)]
        concurrent: bool,
        #[arg(long, env = "CONFLICT_LENS_SEED")]
        seed: Option<u64>,
        #[arg(long)]
        label: Option<String>,
    },
    /// Write one ECDF TSV per series of a profile.
    Profile {
        profile: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        label: Option<String>,
    },
    /// Compare two profiles and print the severity index.
    Conflict {
        profile_a: PathBuf,
        profile_b: PathBuf,
        /// KPM keys as variable:slice, comma separated.
        #[arg(long, value_delimiter = ',')]
        kpm_keys: Option<Vec<SeriesKey>>,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Predict concurrent distributions from individual profiles.
    Predict {
        #[arg(required = true)]
        profiles: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        periods: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        offsets: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        holds: Option<Vec<f64>>,
        #[arg(long)]
        measured: Option<PathBuf>,
        #[arg(long, default_value = "predicted")]
        label: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Distances between two step-CDF files or two profiles.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Optional JSON output path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Profile, predict, measure and compare the built-in deployments.
    Reproduce {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, env = "CONFLICT_LENS_SEED")]
        seed: Option<u64>,
    },
}

fn manifest_dir(path: &Path) -> &Path {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
}

fn finish(manifest: RunManifest, dir: &Path) -> Result<()> {
    manifest.verify()?;
    manifest.write_into(dir)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Cmd::Simulate {
            config,
            agents,
            out,
            concurrent,
            seed,
            label,
        } => {
            let opts = SimulateOptions {
                config,
                agents,
                out_dir: out.clone(),
                concurrent,
                seed,
                label,
            };
            finish(pipeline::simulate(&opts)?, &out)
        }
        Cmd::Profile {
            profile,
            out,
            label,
        } => {
            for (key, n) in pipeline::sparse_series(&Profile::read(&profile)?) {
                eprintln!("warning: {key} has only {n} samples");
            }
            finish(
                pipeline::profile_ecdfs(&profile, &out, label.as_deref())?,
                &out,
            )
        }
        Cmd::Conflict {
            profile_a,
            profile_b,
            kpm_keys,
            out,
        } => {
            let (report, manifest) =
                pipeline::conflict(&profile_a, &profile_b, kpm_keys.as_deref(), &out)?;
            println!("{:.4}", report.severity);
            finish(manifest, manifest_dir(&out))
        }
        Cmd::Predict {
            profiles,
            periods,
            offsets,
            holds,
            measured,
            label,
            out,
        } => {
            let opts = PredictOptions {
                profiles,
                periods,
                offsets,
                holds,
                measured,
                label,
                out_dir: out.clone(),
            };
            let (report, manifest) = pipeline::predict_files(&opts)?;
            if let Some(cmp) = &report.comparison {
                for (key, d) in cmp {
                    println!("{key}\t{}\t{}", d.ks, d.int);
                }
            }
            finish(manifest, &out)
        }
        Cmd::Compare { a, b, out } => {
            let (comparison, manifest) = pipeline::compare(&a, &b, out.as_deref())?;
            match comparison {
                Comparison::Cdf(d) => println!("{}\t{}", d.ks, d.int),
                Comparison::Profiles(map) => {
                    for (key, d) in map {
                        println!("{key}\t{}\t{}", d.ks, d.int);
                    }
                }
            }
            match out {
                Some(path) => finish(manifest, manifest_dir(&path)),
                None => Ok(()),
            }
        }
        Cmd::Reproduce { out, seed } => {
            let mut opts = ReproduceOptions::new(&out);
            if let Some(seed) = seed {
                opts.scenario.seed = seed;
            }
            let (summary, manifest) = pipeline::reproduce(&opts)?;
            print!("{}", summary.to_tsv());
            finish(manifest, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let msg = err.to_string().replace('\n', " ");
            eprintln!("error: {}: {msg}", err.kind());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
