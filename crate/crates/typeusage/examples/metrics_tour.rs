//! Walks through the per-class diversity metrics on a seeded store.
//!
//!     cargo run --example metrics_tour

use typeusage::facts::{EcosystemStore, TypeUsageKind};
use typeusage::metrics::{
    class_metrics, distribution_summary, dominance_histogram, spearman,
};

fn seed(store: &mut EcosystemStore, class: &str, calls: &[&str], count: u64) {
    let mut calls: Vec<String> = calls.iter().map(|s| s.to_string()).collect();
    calls.sort();
    let kind = TypeUsageKind { receiver_type: class.into(), calls };
    store.add_kind_count("demo", kind, count);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut store = EcosystemStore::new();
    // a diverse class: many ways to use it
    seed(&mut store, "text/Builder", &["append()V"], 600);
    seed(&mut store, "text/Builder", &["append()V", "render()V"], 300);
    seed(&mut store, "text/Builder", &["<init>()V", "append()V", "render()V"], 100);
    // a monotonous one: a single usage pattern
    seed(&mut store, "io/Flag", &["isSet()Z"], 500);

    for class in ["text/Builder", "io/Flag"] {
        let m = class_metrics(&store, class)?;
        println!("{}", serde_json::to_string_pretty(&m)?);
    }

    let abundances: Vec<u64> = store
        .classes()
        .map(|c| class_metrics(&store, c).unwrap().abundance_ecosystem)
        .collect();
    let (min, q1, median, q3, max) = distribution_summary(&abundances)?;
    println!("abundance spread: min {min} q1 {q1} median {median} q3 {q3} max {max}");

    println!("dominance histogram (0.1 bins): {:?}", dominance_histogram(&store, None));

    let x = [1.0, 2.0, 3.0, 4.0];
    let y = [2.0, 8.0, 9.0, 30.0];
    println!("spearman of a monotone sample: {}", spearman(&x, &y)?);
    Ok(())
}
