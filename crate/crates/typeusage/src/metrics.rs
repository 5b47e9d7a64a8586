//! Ecology-inspired diversity metrics over an ecosystem store.
//!
//! Abundance counts specimens, diversity counts kinds (richness), dominance
//! is the maximum kind frequency, entropy is Shannon entropy of the kind
//! frequency distribution in bits, with max-entropy log2(diversity) at
//! uniformity.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::facts::EcosystemStore;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("unknown class {0}")]
    UnknownClass(String),
    #[error("unknown project {0}")]
    UnknownProject(String),
    #[error("empty input")]
    EmptyInput,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("degenerate input: zero rank variance")]
    DegenerateInput,
}

/// Per-class metrics record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub receiver_type: String,
    pub abundance_ecosystem: u64,
    pub diversity_ecosystem: u64,
    /// Maximum kind frequency, in [0, 1].
    pub dominance: f64,
    /// Shannon entropy of the kind frequency distribution, in bits.
    pub entropy: f64,
    /// log2(diversity): the entropy ceiling at uniformity.
    pub max_entropy: f64,
    /// Distinct call signatures across all kinds of the class.
    pub used_method_count: u64,
    /// call-set size -> number of kinds of that size.
    pub tu_size_histogram: BTreeMap<u64, u64>,
}

/// Computes every per-class metric in one pass over the class kinds.
pub fn class_metrics(store: &EcosystemStore, class: &str) -> Result<ClassMetrics, MetricsError> {
    let kinds = store.class_kind_counts(class);
    if kinds.is_empty() {
        return Err(MetricsError::UnknownClass(class.to_owned()));
    }
    let abundance: u64 = kinds.iter().map(|(_, c)| c).sum();
    let diversity = kinds.len() as u64;
    let mut dominance: f64 = 0.0;
    let mut entropy = 0.0;
    let mut used_methods: BTreeSet<&str> = BTreeSet::new();
    let mut histogram: BTreeMap<u64, u64> = BTreeMap::new();
    for (kind, count) in &kinds {
        let freq = *count as f64 / abundance as f64;
        dominance = dominance.max(freq);
        if freq > 0.0 {
            entropy -= freq * freq.log2();
        }
        for call in &kind.calls {
            used_methods.insert(call);
        }
        *histogram.entry(kind.calls.len() as u64).or_insert(0) += 1;
    }
    Ok(ClassMetrics {
        receiver_type: class.to_owned(),
        abundance_ecosystem: abundance,
        diversity_ecosystem: diversity,
        dominance,
        entropy,
        max_entropy: (diversity as f64).log2(),
        used_method_count: used_methods.len() as u64,
        tu_size_histogram: histogram,
    })
}

/// `(abundance, diversity)` of a class restricted to one project. A project
/// with no instances of the class yields `(0, 0)`.
pub fn per_project_metrics(
    store: &EcosystemStore,
    class: &str,
    project: &str,
) -> Result<(u64, u64), MetricsError> {
    if !store.has_project(project) {
        return Err(MetricsError::UnknownProject(project.to_owned()));
    }
    let kinds = store.class_kind_counts_in_project(class, project);
    let abundance = kinds.iter().map(|(_, c)| c).sum();
    Ok((abundance, kinds.len() as u64))
}

/// Five-number summary `(min, q1, median, q3, max)`.
///
/// Quartiles use linear interpolation between closest ranks: the p-quantile
/// of n sorted values is taken at fractional rank p*(n-1).
pub fn distribution_summary(values: &[u64]) -> Result<(f64, f64, f64, f64, f64), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::EmptyInput);
    }
    let mut sorted: Vec<f64> = values.iter().map(|&v| v as f64).collect();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let q = |p: f64| -> f64 {
        let rank = p * (sorted.len() - 1) as f64;
        let lo = rank.floor() as usize;
        let hi = rank.ceil() as usize;
        let frac = rank - lo as f64;
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    };
    Ok((sorted[0], q(0.25), q(0.5), q(0.75), sorted[sorted.len() - 1]))
}

/// Dominance histogram: ten bins of width 0.1 over [0, 1]; a dominance of
/// exactly 1.0 falls in the last bin. `min_diversity` restricts to classes
/// with at least that many kinds (the "very diverse" subset).
pub fn dominance_histogram(store: &EcosystemStore, min_diversity: Option<u64>) -> [u64; 10] {
    let mut bins = [0u64; 10];
    for class in store.classes() {
        let m = class_metrics(store, class).expect("classes() only yields known classes");
        if let Some(min) = min_diversity {
            if m.diversity_ecosystem < min {
                continue;
            }
        }
        let bin = ((m.dominance * 10.0).floor() as usize).min(9);
        bins[bin] += 1;
    }
    bins
}

fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        // ranks are 1-based; tied values share the average rank
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut dx = 0.0;
    let mut dy = 0.0;
    for (a, b) in x.iter().zip(y) {
        num += (a - mx) * (b - my);
        dx += (a - mx).powi(2);
        dy += (b - my).powi(2);
    }
    if dx == 0.0 || dy == 0.0 {
        return Err(MetricsError::DegenerateInput);
    }
    Ok(num / (dx * dy).sqrt())
}

/// Spearman rank correlation: Pearson correlation of the rank vectors, with
/// tied values receiving average (fractional) ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricsError::EmptyInput);
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Fraction of unordered pairs (i, j) with (x_i - x_j)(y_i - y_j) < 0.
/// Ties in either coordinate count as non-discordant.
pub fn discordant_fraction(x: &[f64], y: &[f64]) -> Result<f64, MetricsError> {
    if x.len() != y.len() {
        return Err(MetricsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(MetricsError::EmptyInput);
    }
    let n = x.len();
    let mut discordant = 0u64;
    let mut total = 0u64;
    for i in 0..n {
        for j in i + 1..n {
            total += 1;
            if (x[i] - x[j]) * (y[i] - y[j]) < 0.0 {
                discordant += 1;
            }
        }
    }
    Ok(discordant as f64 / total as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::TypeUsageKind;

    fn store_with_counts(class: &str, counts: &[u64]) -> EcosystemStore {
        let mut store = EcosystemStore::new();
        for (i, &count) in counts.iter().enumerate() {
            store.add_kind_count(
                "p1",
                TypeUsageKind {
                    receiver_type: class.to_owned(),
                    calls: vec![format!("m{i}()V")],
                },
                count,
            );
        }
        store
    }

    #[test]
    fn closed_form_three_kinds() {
        let store = store_with_counts("T", &[600, 300, 100]);
        let m = class_metrics(&store, "T").unwrap();
        assert_eq!(m.abundance_ecosystem, 1000);
        assert_eq!(m.diversity_ecosystem, 3);
        assert!((m.dominance - 0.6).abs() < 1e-12);
        let expected = -(0.6f64 * 0.6f64.log2() + 0.3 * 0.3f64.log2() + 0.1 * 0.1f64.log2());
        assert!((m.entropy - expected).abs() < 1e-9);
        assert!((m.entropy - 1.295).abs() < 1e-3);
        assert!((m.max_entropy - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn degenerate_single_kind() {
        let store = store_with_counts("T", &[7]);
        let m = class_metrics(&store, "T").unwrap();
        assert_eq!(m.dominance, 1.0);
        assert_eq!(m.entropy, 0.0);
        assert_eq!(m.max_entropy, 0.0);
    }

    #[test]
    fn uniform_four_kinds_hits_max_entropy() {
        let store = store_with_counts("T", &[5, 5, 5, 5]);
        let m = class_metrics(&store, "T").unwrap();
        assert_eq!(m.entropy, 2.0);
        assert_eq!(m.max_entropy, 2.0);
    }

    #[test]
    fn unknown_class_is_an_error() {
        let store = store_with_counts("T", &[1]);
        assert_eq!(
            class_metrics(&store, "U"),
            Err(MetricsError::UnknownClass("U".into()))
        );
    }

    #[test]
    fn per_project_zero_for_absent_class() {
        let store = store_with_counts("T", &[3]);
        assert_eq!(per_project_metrics(&store, "U", "p1").unwrap(), (0, 0));
        assert!(per_project_metrics(&store, "T", "nope").is_err());
    }

    #[test]
    fn per_project_counts() {
        let mut store = store_with_counts("T", &[2, 1]);
        store.add_kind_count(
            "p2",
            TypeUsageKind { receiver_type: "T".into(), calls: vec!["m0()V".into()] },
            5,
        );
        assert_eq!(per_project_metrics(&store, "T", "p1").unwrap(), (3, 2));
        assert_eq!(per_project_metrics(&store, "T", "p2").unwrap(), (5, 1));
    }

    #[test]
    fn summary_odd_count() {
        let (min, q1, med, q3, max) = distribution_summary(&[1, 2, 3, 4, 5]).unwrap();
        assert_eq!((min, q1, med, q3, max), (1.0, 2.0, 3.0, 4.0, 5.0));
    }

    #[test]
    fn summary_single_value() {
        let (min, q1, med, q3, max) = distribution_summary(&[4]).unwrap();
        assert_eq!((min, q1, med, q3, max), (4.0, 4.0, 4.0, 4.0, 4.0));
    }

    #[test]
    fn summary_empty_is_error() {
        assert_eq!(distribution_summary(&[]), Err(MetricsError::EmptyInput));
    }

    #[test]
    fn dominance_bins() {
        let mut store = EcosystemStore::new();
        // one class with a single kind: dominance 1.0 -> last bin
        store.add_kind_count(
            "p",
            TypeUsageKind { receiver_type: "A".into(), calls: vec!["m()V".into()] },
            3,
        );
        // two classes with dominance 0.05 and 1/12 -> first bin
        for (class, n) in [("B", 20u64), ("C", 12)] {
            for i in 0..n {
                store.add_kind_count(
                    "p",
                    TypeUsageKind {
                        receiver_type: class.into(),
                        calls: vec![format!("m{i}()V")],
                    },
                    1,
                );
            }
        }
        let bins = dominance_histogram(&store, None);
        assert_eq!(bins[0], 2);
        assert_eq!(bins[9], 1);
        assert_eq!(bins.iter().sum::<u64>(), 3);
        // filter by diversity >= 12 keeps B and C only
        let filtered = dominance_histogram(&store, Some(12));
        assert_eq!(filtered.iter().sum::<u64>(), 2);
    }

    #[test]
    fn spearman_monotone_and_reversed() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_with_ties_matches_hand_ranks() {
        // x = [1,2,2,3] -> ranks [1, 2.5, 2.5, 4]; y = [1,3,2,4] -> ranks [1,3,2,4]
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        let expected = pearson(&[1.0, 2.5, 2.5, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert!((rho - expected).abs() < 1e-12);
    }

    #[test]
    fn spearman_errors() {
        assert!(matches!(
            spearman(&[1.0], &[1.0, 2.0]),
            Err(MetricsError::LengthMismatch(1, 2))
        ));
        assert_eq!(
            spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(MetricsError::DegenerateInput)
        );
    }

    #[test]
    fn discordant_extremes() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let up = [1.0, 2.0, 3.0, 4.0];
        let down = [4.0, 3.0, 2.0, 1.0];
        assert_eq!(discordant_fraction(&x, &up).unwrap(), 0.0);
        assert_eq!(discordant_fraction(&x, &down).unwrap(), 1.0);
    }

    #[test]
    fn ties_are_not_discordant() {
        let x = [1.0, 1.0, 2.0];
        let y = [5.0, 1.0, 3.0];
        // pair (0,1): x tie -> concordant-ish; (0,2): down; (1,2): up
        assert!((discordant_fraction(&x, &y).unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }
}
