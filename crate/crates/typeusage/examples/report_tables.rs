//! Runs the full pipeline on a synthetic corpus and writes the report tables.
//!
//!     cargo run --example report_tables

use std::io::BufReader;

use typeusage::classgen::{samples, write_jar, ClassBuilder};
use typeusage::facts::EcosystemStore;
use typeusage::report::{cmd_extract, cmd_report, RunConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("typeusage-example-report");
    std::fs::create_dir_all(&dir)?;

    let lister = samples::file_lister_class();
    let mut other = ClassBuilder::new("util/Probe");
    other.default_constructor();
    other.method("touch", "(Ljava/io/File;)V", |a| {
        a.aload(1);
        a.invokevirtual("java/io/File", "exists", "()Z");
        a.pop();
        a.vreturn();
    });
    let probe = other.build();

    let j1 = dir.join("one.jar");
    let j2 = dir.join("two.jar");
    write_jar(&j1, &[("FileLister.class", &lister)])?;
    write_jar(&j2, &[("FileLister.class", &lister), ("util/Probe.class", &probe)])?;

    let facts = dir.join("facts.jsonl");
    let summary = cmd_extract(&RunConfig::new(vec![j1, j2], facts.clone()))?;
    println!("{}", serde_json::to_string_pretty(&summary)?);

    let reader = BufReader::new(std::fs::File::open(&facts)?);
    let (store, _) = EcosystemStore::aggregate_lines(reader)?;

    let out = dir.join("reports");
    cmd_report(&store, &out, 100, None)?;
    for entry in std::fs::read_dir(&out)? {
        let path = entry?.path();
        println!("--- {} ---", path.display());
        print!("{}", std::fs::read_to_string(&path)?);
    }
    Ok(())
}
