//! Corpus runs and report generation.
//!
//! These functions back the CLI one-to-one; they are also the integration
//! surface the test suites drive. All outputs are deterministic: inputs are
//! sorted, map iteration is ordered, re-running on identical inputs produces
//! byte-identical files.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::extract::{extract_class, ExtractConfig};
use crate::facts::{self, dedup_jars, EcosystemStore, FactRecord, FactsError};
use crate::jar::{self, JarError};
use crate::metrics::{self, MetricsError};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("no parseable inputs")]
    NoParseableInputs,
    #[error(transparent)]
    Jar(#[from] JarError),
    #[error(transparent)]
    Facts(#[from] FactsError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Run configuration with the defaults the figures use: map threshold 150,
/// high-diversity cut at 100 kinds, `this` and temporaries excluded.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub output_path: PathBuf,
    pub include_this: bool,
    pub include_temps: bool,
    pub map_threshold: u64,
    pub min_diversity_filter: u64,
}

impl RunConfig {
    pub fn new(inputs: Vec<PathBuf>, output_path: PathBuf) -> Self {
        RunConfig {
            inputs,
            output_path,
            include_this: false,
            include_temps: false,
            map_threshold: 150,
            min_diversity_filter: 100,
        }
    }

    fn extract_config(&self) -> ExtractConfig {
        ExtractConfig { include_this: self.include_this, include_temps: self.include_temps }
    }
}

#[derive(Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExtractSummary {
    pub inputs: usize,
    pub projects_retained: usize,
    pub classes_parsed: usize,
    pub class_entries_skipped: usize,
    pub methods_skipped: usize,
    pub instances: usize,
}

enum ProjectInput {
    Jar(jar::JarContents),
    LooseClass(crate::classfile::ClassFile),
}

/// Extracts facts from the configured inputs into the output file:
/// deduplicates jars first, then extracts each retained project and writes
/// one facts line per instance.
pub fn cmd_extract(config: &RunConfig) -> Result<ExtractSummary, ReportError> {
    let mut inputs = config.inputs.clone();
    inputs.sort();

    let mut projects: Vec<(String, BTreeSet<String>, ProjectInput)> = Vec::new();
    for path in &inputs {
        if path.extension().is_some_and(|e| e == "class") {
            let Ok(bytes) = std::fs::read(path) else { continue };
            let Ok(class) = crate::classfile::parse_class(&bytes) else { continue };
            let names = BTreeSet::from([class.binary_name.clone()]);
            projects.push((
                path.display().to_string(),
                names,
                ProjectInput::LooseClass(class),
            ));
        } else {
            let Ok(contents) = jar::parse_jar(path) else { continue };
            projects.push((
                path.display().to_string(),
                contents.class_names(),
                ProjectInput::Jar(contents),
            ));
        }
    }
    if projects.is_empty() {
        return Err(ReportError::NoParseableInputs);
    }

    let keyed: Vec<(String, BTreeSet<String>)> =
        projects.iter().map(|(p, n, _)| (p.clone(), n.clone())).collect();
    let retained = dedup_jars(&keyed);

    let mut summary = ExtractSummary {
        inputs: projects.len(),
        projects_retained: retained.len(),
        ..Default::default()
    };

    let extract_config = config.extract_config();
    let mut records: Vec<FactRecord> = Vec::new();
    for &idx in &retained {
        let (path, names, input) = &projects[idx];
        let project = facts::project_id(Path::new(path), names);
        let classes: Vec<&crate::classfile::ClassFile> = match input {
            ProjectInput::Jar(contents) => {
                summary.class_entries_skipped += contents.skipped;
                contents.classes.iter().map(|(_, c)| c).collect()
            }
            ProjectInput::LooseClass(class) => vec![class],
        };
        summary.classes_parsed += classes.len();
        let extractions: Vec<_> = classes
            .par_iter()
            .map(|class| extract_class(class, &project, &extract_config))
            .collect();
        for extraction in extractions {
            summary.methods_skipped += extraction.methods_skipped;
            for inst in &extraction.instances {
                records.push(FactRecord::from(inst));
            }
        }
    }
    summary.instances = records.len();

    let mut out = std::io::BufWriter::new(std::fs::File::create(&config.output_path)?);
    facts::write_facts(&mut out, &records)?;
    out.flush()?;
    Ok(summary)
}

#[derive(Debug, Serialize)]
struct FiveNumber {
    min: f64,
    q1: f64,
    median: f64,
    q3: f64,
    max: f64,
}

impl From<(f64, f64, f64, f64, f64)> for FiveNumber {
    fn from((min, q1, median, q3, max): (f64, f64, f64, f64, f64)) -> Self {
        FiveNumber { min, q1, median, q3, max }
    }
}

/// Writes the report tables into `out_dir`:
/// `table2.csv`, `boxplot_stats.json`, `dominance_hist.csv`,
/// `diversity_vs_dominance.csv`, `entropy_vs_maxentropy.csv`.
///
/// `top_k_by_project_count` restricts `table2.csv` to the k classes used by
/// the most projects (the stratified-sampling aid); the distribution files
/// always cover every class.
pub fn cmd_report(
    store: &EcosystemStore,
    out_dir: &Path,
    min_diversity_filter: u64,
    top_k_by_project_count: Option<usize>,
) -> Result<(), ReportError> {
    std::fs::create_dir_all(out_dir)?;
    let classes: Vec<&str> = store.classes().collect();
    let all_metrics: Vec<metrics::ClassMetrics> = classes
        .iter()
        .map(|c| metrics::class_metrics(store, c))
        .collect::<Result<_, _>>()?;

    // table2.csv
    let table_rows: Vec<&metrics::ClassMetrics> = match top_k_by_project_count {
        None => all_metrics.iter().collect(),
        Some(k) => {
            let mut ranked: Vec<(usize, &metrics::ClassMetrics)> = all_metrics
                .iter()
                .map(|m| (store.class_project_count(&m.receiver_type), m))
                .collect();
            ranked.sort_by(|a, b| {
                b.0.cmp(&a.0).then_with(|| a.1.receiver_type.cmp(&b.1.receiver_type))
            });
            let mut rows: Vec<&metrics::ClassMetrics> =
                ranked.into_iter().take(k).map(|(_, m)| m).collect();
            rows.sort_by(|a, b| a.receiver_type.cmp(&b.receiver_type));
            rows
        }
    };
    let mut table2 = String::new();
    table2.push_str("class,diversity,usedMethodCount");
    for n in 1..=10 {
        table2.push_str(&format!(",|TU|={n}"));
    }
    table2.push_str(",|TU|>10\n");
    for m in &table_rows {
        table2.push_str(&format!(
            "{},{},{}",
            m.receiver_type, m.diversity_ecosystem, m.used_method_count
        ));
        for n in 1..=10u64 {
            table2.push_str(&format!(",{}", m.tu_size_histogram.get(&n).copied().unwrap_or(0)));
        }
        let overflow: u64 =
            m.tu_size_histogram.iter().filter(|(&size, _)| size > 10).map(|(_, &c)| c).sum();
        table2.push_str(&format!(",{overflow}\n"));
    }
    std::fs::write(out_dir.join("table2.csv"), table2)?;

    // boxplot_stats.json
    let abundances: Vec<u64> = all_metrics.iter().map(|m| m.abundance_ecosystem).collect();
    let diversities: Vec<u64> = all_metrics.iter().map(|m| m.diversity_ecosystem).collect();
    #[derive(Serialize)]
    struct BoxplotStats {
        abundance: Option<FiveNumber>,
        diversity: Option<FiveNumber>,
    }
    let stats = BoxplotStats {
        abundance: metrics::distribution_summary(&abundances).ok().map(Into::into),
        diversity: metrics::distribution_summary(&diversities).ok().map(Into::into),
    };
    let mut json = serde_json::to_string_pretty(&stats).expect("stats serialize");
    json.push('\n');
    std::fs::write(out_dir.join("boxplot_stats.json"), json)?;

    // dominance_hist.csv
    let all_bins = metrics::dominance_histogram(store, None);
    let diverse_bins = metrics::dominance_histogram(store, Some(min_diversity_filter));
    let mut hist = String::from("binLow,binHigh,allClasses,diverseClasses\n");
    for i in 0..10 {
        hist.push_str(&format!(
            "{:.1},{:.1},{},{}\n",
            i as f64 / 10.0,
            (i + 1) as f64 / 10.0,
            all_bins[i],
            diverse_bins[i]
        ));
    }
    std::fs::write(out_dir.join("dominance_hist.csv"), hist)?;

    // diversity_vs_dominance.csv
    let mut dvd = String::from("class,diversity,dominance\n");
    for m in &all_metrics {
        dvd.push_str(&format!("{},{},{}\n", m.receiver_type, m.diversity_ecosystem, m.dominance));
    }
    std::fs::write(out_dir.join("diversity_vs_dominance.csv"), dvd)?;

    // entropy_vs_maxentropy.csv
    let mut evm = String::from("class,entropy,maxEntropy\n");
    for m in &all_metrics {
        evm.push_str(&format!("{},{},{}\n", m.receiver_type, m.entropy, m.max_entropy));
    }
    std::fs::write(out_dir.join("entropy_vs_maxentropy.csv"), evm)?;

    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapFormat {
    Dot,
    Json,
}

/// Renders the diversity map of one class. An empty graph (no kind meets the
/// threshold) is a success, not an error.
pub fn cmd_map(
    store: &EcosystemStore,
    class: &str,
    threshold: u64,
    format: MapFormat,
) -> Result<String, crate::divmap::MapError> {
    let map = crate::divmap::build_map(store, class, threshold)?;
    Ok(match format {
        MapFormat::Dot => crate::divmap::emit_dot(&map),
        MapFormat::Json => crate::divmap::emit_json(&map),
    })
}
