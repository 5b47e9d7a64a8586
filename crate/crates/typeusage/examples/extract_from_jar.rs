//! Synthesizes a small jar, then extracts its type-usages.
//!
//!     cargo run --example extract_from_jar

use typeusage::classgen::{samples, write_jar};
use typeusage::extract::{extract_class, ExtractConfig};
use typeusage::jar::parse_jar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("typeusage-example-extract");
    std::fs::create_dir_all(&dir)?;
    let jar_path = dir.join("demo.jar");
    let class = samples::file_lister_class();
    write_jar(&jar_path, &[("FileLister.class", &class)])?;
    println!("wrote {}", jar_path.display());

    let contents = parse_jar(&jar_path)?;
    println!("classes: {:?}, unreadable entries: {}", contents.class_names(), contents.skipped);

    for (_, class) in &contents.classes {
        let result = extract_class(class, "demo", &ExtractConfig::default());
        for inst in &result.instances {
            println!(
                "{} {} {} : {} -> {:?}",
                inst.enclosing_method,
                inst.kind,
                inst.variable_id,
                inst.receiver_type,
                inst.calls.iter().map(|c| c.render()).collect::<Vec<_>>()
            );
        }
    }
    Ok(())
}
