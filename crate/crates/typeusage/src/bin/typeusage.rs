//! Thin command-line front end over the library; every subcommand maps
//! one-to-one onto a `report`/`facts`/`metrics` function.
//!
//! Exit codes: 0 success (including empty results), 1 usage error,
//! 2 input error.

use std::io::BufRead;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use typeusage::facts::EcosystemStore;
use typeusage::report::{self, MapFormat, RunConfig};
use typeusage::{divmap, metrics};

#[derive(Parser)]
#[command(name = "typeusage", version, about = "JVM type-usage extraction and API diversity metrics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract type-usage facts from Jar files and loose .class files.
    Extract {
        /// Input jars / class files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Facts output file (line-delimited JSON).
        #[arg(short, long)]
        output: PathBuf,
        /// Record calls whose receiver is `this`.
        #[arg(long)]
        include_this: bool,
        /// Emit instances for constructed objects never stored in a variable.
        #[arg(long)]
        include_temps: bool,
    },
    /// Aggregate facts files into a store snapshot.
    Aggregate {
        /// Facts files.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Store snapshot output file.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Print the metrics of one class as JSON.
    Metrics {
        #[arg(long)]
        store: PathBuf,
        /// Class binary name, e.g. java/lang/StringBuilder.
        #[arg(long)]
        class: String,
    },
    /// Emit the API diversity map of a class.
    Map {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        class: String,
        /// Minimum ecosystem abundance for a kind to appear.
        #[arg(long, default_value_t = 150)]
        threshold: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Dot)]
        format: OutputFormat,
    },
    /// Write the report tables for a store.
    Report {
        #[arg(long)]
        store: PathBuf,
        /// Report output directory.
        #[arg(short, long)]
        out: PathBuf,
        /// Diversity cut for the "very diverse" histogram subset.
        #[arg(long, default_value_t = 100)]
        min_diversity: u64,
        /// Restrict table2.csv to the k classes used by the most projects.
        #[arg(long)]
        top_k_by_project_count: Option<usize>,
    },
    /// Spearman correlation and discordant-pair fraction of a two-column CSV.
    Spearman {
        /// CSV file with two numeric columns (header optional).
        input: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Dot,
    Json,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is a success, bad usage is exit 1
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Extract { inputs, output, include_this, include_temps } => {
            let mut config = RunConfig::new(inputs, output);
            config.include_this = include_this;
            config.include_temps = include_temps;
            let summary = report::cmd_extract(&config)?;
            println!("{}", serde_json::to_string(&summary)?);
        }
        Command::Aggregate { inputs, output } => {
            let mut store = EcosystemStore::new();
            let mut skipped = 0;
            for input in inputs {
                let reader = std::io::BufReader::new(std::fs::File::open(&input)?);
                let (partial, bad) = EcosystemStore::aggregate_lines(reader)?;
                skipped += bad;
                // facts files may share projects (re-sharded corpora), so fold
                // record-wise instead of merge()
                store = fold_stores(store, partial);
            }
            store.save(&output)?;
            println!(
                "{{\"projects\":{},\"kinds\":{},\"specimens\":{},\"linesSkipped\":{}}}",
                store.projects().count(),
                store.kind_count(),
                store.total_specimens(),
                skipped
            );
        }
        Command::Metrics { store, class } => {
            let store = EcosystemStore::load(&store)?;
            let m = metrics::class_metrics(&store, &class)?;
            println!("{}", serde_json::to_string_pretty(&m)?);
        }
        Command::Map { store, class, threshold, format } => {
            let store = EcosystemStore::load(&store)?;
            let format = match format {
                OutputFormat::Dot => MapFormat::Dot,
                OutputFormat::Json => MapFormat::Json,
            };
            match report::cmd_map(&store, &class, threshold, format) {
                Ok(text) => print!("{text}"),
                Err(divmap::MapError::UnknownClass(c)) => {
                    return Err(format!("unknown class {c}").into())
                }
            }
        }
        Command::Report { store, out, min_diversity, top_k_by_project_count } => {
            let store = EcosystemStore::load(&store)?;
            report::cmd_report(&store, &out, min_diversity, top_k_by_project_count)?;
        }
        Command::Spearman { input } => {
            let (x, y) = read_two_columns(&input)?;
            let rho = metrics::spearman(&x, &y)?;
            let discordant = metrics::discordant_fraction(&x, &y)?;
            println!("{{\"spearman\":{rho},\"discordantFraction\":{discordant}}}");
        }
    }
    Ok(())
}

fn fold_stores(a: EcosystemStore, b: EcosystemStore) -> EcosystemStore {
    match EcosystemStore::merge(&a, &b) {
        Ok(merged) => merged,
        Err(_) => {
            // overlapping projects: replay b's counts into a
            let mut out = a;
            for project in b.projects().map(str::to_owned).collect::<Vec<_>>() {
                for class in b.classes().map(str::to_owned).collect::<Vec<_>>() {
                    for (kind, count) in b.class_kind_counts_in_project(&class, &project) {
                        out.add_kind_count(&project, kind.clone(), count);
                    }
                }
            }
            out
        }
    }
}

fn read_two_columns(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>), Box<dyn std::error::Error>> {
    let reader = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut parts = trimmed.split(',');
        let (a, b) = (parts.next().unwrap_or(""), parts.next().unwrap_or(""));
        match (a.trim().parse::<f64>(), b.trim().parse::<f64>()) {
            (Ok(a), Ok(b)) => {
                x.push(a);
                y.push(b);
            }
            _ if i == 0 => {} // header row
            _ => return Err(format!("line {}: expected two numeric columns", i + 1).into()),
        }
    }
    Ok((x, y))
}
