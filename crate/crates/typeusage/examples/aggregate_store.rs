//! Round-trips facts through the line-delimited format and a store snapshot.
//!
//!     cargo run --example aggregate_store

use std::io::BufReader;

use typeusage::classgen::samples;
use typeusage::extract::{extract_class, ExtractConfig};
use typeusage::facts::{write_facts, EcosystemStore, FactRecord};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let class = typeusage::classfile::parse_class(&samples::file_lister_class())?;
    let records: Vec<FactRecord> = ["app-1", "app-2"]
        .iter()
        .flat_map(|project| {
            extract_class(&class, project, &ExtractConfig::default())
                .instances
                .iter()
                .map(FactRecord::from)
                .collect::<Vec<_>>()
        })
        .collect();

    let mut facts = Vec::new();
    write_facts(&mut facts, records.iter())?;
    println!("--- facts ---\n{}", String::from_utf8(facts.clone())?);

    let (store, skipped) = EcosystemStore::aggregate_lines(BufReader::new(facts.as_slice()))?;
    println!("skipped lines: {skipped}");
    println!(
        "projects: {:?}, kinds: {}, specimens: {}",
        store.projects().collect::<Vec<_>>(),
        store.kind_count(),
        store.total_specimens()
    );

    let dir = std::env::temp_dir().join("typeusage-example-store");
    std::fs::create_dir_all(&dir)?;
    let snapshot = dir.join("store.jsonl");
    store.save(&snapshot)?;
    let reloaded = EcosystemStore::load(&snapshot)?;
    assert_eq!(store, reloaded);
    println!("snapshot round-tripped via {}", snapshot.display());
    Ok(())
}
