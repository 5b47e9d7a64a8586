//! API diversity maps.
//!
//! The map of a class shows its kinds (abundance-filtered) as nodes, with an
//! edge from x to y when the call set of x is a strict subset of the call set
//! of y. Only cover edges (the transitive reduction) are kept; layers group
//! nodes by call-set size, largest first, which is how the maps are laid out.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::facts::EcosystemStore;

#[derive(Debug, Error, PartialEq)]
pub enum MapError {
    #[error("unknown class {0}")]
    UnknownClass(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MapNode {
    pub key: String,
    pub calls: Vec<String>,
    pub abundance: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityMap {
    pub class: String,
    pub threshold: u64,
    /// Sorted by key.
    pub nodes: Vec<MapNode>,
    /// Cover edges (from, to): calls(from) is a strict subset of calls(to).
    pub edges: Vec<(String, String)>,
    /// Node keys grouped by call-set size, largest size first.
    pub layers: Vec<Vec<String>>,
}

fn strict_subset(a: &[String], b: &[String]) -> bool {
    if a.len() >= b.len() {
        return false;
    }
    let b_set: BTreeSet<&str> = b.iter().map(|s| s.as_str()).collect();
    a.iter().all(|c| b_set.contains(c.as_str()))
}

/// Builds the diversity map of a class: kinds with abundance >= threshold,
/// cover edges of the strict-subset order, size-descending layers.
///
/// A map with zero nodes is a valid result, not an error.
pub fn build_map(
    store: &EcosystemStore,
    class: &str,
    threshold: u64,
) -> Result<DiversityMap, MapError> {
    if !store.has_class(class) {
        return Err(MapError::UnknownClass(class.to_owned()));
    }
    let mut nodes: Vec<MapNode> = store
        .class_kind_counts(class)
        .into_iter()
        .filter(|(_, count)| *count >= threshold)
        .map(|(kind, count)| MapNode {
            key: kind.key(),
            calls: kind.calls.clone(),
            abundance: count,
        })
        .collect();
    nodes.sort_by(|a, b| a.key.cmp(&b.key));

    let n = nodes.len();
    let mut subset = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                subset[i][j] = strict_subset(&nodes[i].calls, &nodes[j].calls);
            }
        }
    }
    // cover edges: drop i->j when some k sits strictly between
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if subset[i][j] && !(0..n).any(|k| subset[i][k] && subset[k][j]) {
                edges.push((nodes[i].key.clone(), nodes[j].key.clone()));
            }
        }
    }
    edges.sort();

    let mut by_size: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for node in &nodes {
        by_size.entry(node.calls.len()).or_default().push(node.key.clone());
    }
    let layers: Vec<Vec<String>> = by_size.into_values().rev().collect();

    Ok(DiversityMap { class: class.to_owned(), threshold, nodes, edges, layers })
}

/// Weakly connected components of the map. Isolated nodes are singleton
/// components; an empty map has zero components.
pub fn connected_components(map: &DiversityMap) -> Vec<Vec<String>> {
    let index: BTreeMap<&str, usize> =
        map.nodes.iter().enumerate().map(|(i, n)| (n.key.as_str(), i)).collect();
    let mut adjacency = vec![Vec::new(); map.nodes.len()];
    for (from, to) in &map.edges {
        let (a, b) = (index[from.as_str()], index[to.as_str()]);
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut seen = vec![false; map.nodes.len()];
    let mut components = Vec::new();
    for start in 0..map.nodes.len() {
        if seen[start] {
            continue;
        }
        let mut component = Vec::new();
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(i) = stack.pop() {
            component.push(map.nodes[i].key.clone());
            for &j in &adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        component.sort();
        components.push(component);
    }
    components
}

fn call_name(rendered: &str) -> &str {
    let name = rendered.split('(').next().unwrap_or(rendered);
    if name == "<init>" {
        "init"
    } else {
        name
    }
}

fn node_label(node: &MapNode) -> String {
    let names: Vec<&str> = node.calls.iter().map(|c| call_name(c)).collect();
    format!("{} [{}]", names.join(", "), node.abundance)
}

/// Renders the map in DOT graph description format. Output is deterministic:
/// nodes sorted by (layer, key), one rank constraint per layer, largest call
/// sets on top.
pub fn emit_dot(map: &DiversityMap) -> String {
    let mut ids: BTreeMap<&str, String> = BTreeMap::new();
    let mut out = String::new();
    out.push_str(&format!(
        "digraph \"{}\" {{\n  rankdir=BT;\n  node [shape=box];\n",
        map.class
    ));
    let mut counter = 0usize;
    for layer in &map.layers {
        for key in layer {
            ids.insert(key, format!("n{counter}"));
            counter += 1;
        }
    }
    let by_key: BTreeMap<&str, &MapNode> =
        map.nodes.iter().map(|n| (n.key.as_str(), n)).collect();
    for layer in &map.layers {
        for key in layer {
            let node = by_key[key.as_str()];
            out.push_str(&format!(
                "  {} [label=\"{}\"];\n",
                ids[key.as_str()],
                node_label(node)
            ));
        }
    }
    for (i, layer) in map.layers.iter().enumerate() {
        let rank = if i == 0 && map.layers.len() > 1 { "max" } else { "same" };
        let members: Vec<&str> = layer.iter().map(|k| ids[k.as_str()].as_str()).collect();
        out.push_str(&format!("  {{ rank={}; {}; }}\n", rank, members.join("; ")));
    }
    for (from, to) in &map.edges {
        out.push_str(&format!("  {} -> {};\n", ids[from.as_str()], ids[to.as_str()]));
    }
    out.push_str("}\n");
    out
}

/// JSON export mirroring the DOT content one-to-one.
pub fn emit_json(map: &DiversityMap) -> String {
    serde_json::to_string_pretty(map).expect("map serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::facts::TypeUsageKind;

    fn seed(store: &mut EcosystemStore, class: &str, calls: &[&str], count: u64) {
        store.add_kind_count(
            "p",
            TypeUsageKind {
                receiver_type: class.into(),
                calls: calls.iter().map(|s| s.to_string()).collect(),
            },
            count,
        );
    }

    #[test]
    fn chain_keeps_only_cover_edges() {
        let mut store = EcosystemStore::new();
        seed(&mut store, "T", &["a()V"], 200);
        seed(&mut store, "T", &["a()V", "b()V"], 150);
        seed(&mut store, "T", &["a()V", "b()V", "c()V"], 150);
        let map = build_map(&store, "T", 150).unwrap();
        assert_eq!(map.nodes.len(), 3);
        assert_eq!(map.edges.len(), 2);
        // no direct {a} -> {a,b,c}
        let small = "T#a()V";
        let big = "T#a()V,b()V,c()V";
        assert!(!map.edges.contains(&(small.to_string(), big.to_string())));
    }

    #[test]
    fn single_node_no_edges() {
        let mut store = EcosystemStore::new();
        seed(&mut store, "T", &["a()V"], 10);
        seed(&mut store, "T", &["b()V"], 1);
        let map = build_map(&store, "T", 5).unwrap();
        assert_eq!(map.nodes.len(), 1);
        assert!(map.edges.is_empty());
        assert_eq!(map.layers, vec![vec!["T#a()V".to_string()]]);
    }

    #[test]
    fn unknown_class_errors_empty_map_does_not() {
        let mut store = EcosystemStore::new();
        seed(&mut store, "T", &["a()V"], 3);
        assert!(build_map(&store, "U", 1).is_err());
        let empty = build_map(&store, "T", 100).unwrap();
        assert!(empty.nodes.is_empty());
        assert!(connected_components(&empty).is_empty());
    }

    #[test]
    fn disjoint_families_are_separate_components() {
        let mut store = EcosystemStore::new();
        seed(&mut store, "T", &["a()V"], 5);
        seed(&mut store, "T", &["a()V", "b()V"], 5);
        seed(&mut store, "T", &["x()V"], 5);
        seed(&mut store, "T", &["x()V", "y()V"], 5);
        let map = build_map(&store, "T", 1).unwrap();
        assert_eq!(connected_components(&map).len(), 2);
    }

    #[test]
    fn dot_is_deterministic_and_renders_init() {
        let mut store = EcosystemStore::new();
        seed(&mut store, "T", &["<init>()V", "go()V"], 7);
        let map = build_map(&store, "T", 1).unwrap();
        let a = emit_dot(&map);
        let b = emit_dot(&map);
        assert_eq!(a, b);
        assert!(a.contains("init, go [7]"));
        assert!(a.starts_with("digraph"));
    }
}
