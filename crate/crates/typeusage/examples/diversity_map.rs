//! Builds the API diversity map of a class and prints it as Graphviz DOT.
//!
//!     cargo run --example diversity_map | dot -Tpng > map.png

use typeusage::divmap::{build_map, connected_components, emit_dot};
use typeusage::facts::{EcosystemStore, TypeUsageKind};

fn seed(store: &mut EcosystemStore, calls: &[&str], count: u64) {
    let mut calls: Vec<String> = calls.iter().map(|s| s.to_string()).collect();
    calls.sort();
    let kind = TypeUsageKind { receiver_type: "text/Builder".into(), calls };
    store.add_kind_count("demo", kind, count);
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const INIT: &str = "<init>()V";
    const APPEND: &str = "append(Ljava/lang/String;)V";
    const RENDER: &str = "render()Ljava/lang/String;";
    const LENGTH: &str = "length()I";

    let mut store = EcosystemStore::new();
    seed(&mut store, &[APPEND], 5000);
    seed(&mut store, &[RENDER], 800);
    seed(&mut store, &[INIT, APPEND], 3000);
    seed(&mut store, &[APPEND, RENDER], 1500);
    seed(&mut store, &[INIT, APPEND, RENDER], 2400);
    seed(&mut store, &[INIT, APPEND, LENGTH], 300);
    seed(&mut store, &[LENGTH], 40); // below threshold, filtered out

    let map = build_map(&store, "text/Builder", 150)?;
    eprintln!(
        "{} nodes, {} edges, components: {:?}",
        map.nodes.len(),
        map.edges.len(),
        connected_components(&map)
    );
    print!("{}", emit_dot(&map));
    Ok(())
}
