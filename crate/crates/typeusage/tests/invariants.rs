//! Property-based invariants over generated inputs.

use std::collections::BTreeSet;
use std::io::BufReader;

use proptest::prelude::*;

use typeusage::classfile::parse_descriptor;
use typeusage::extract::UsageKind;
use typeusage::facts::{write_facts, EcosystemStore, FactRecord, TypeUsageKind};
use typeusage::metrics::{class_metrics, spearman};

/// A compact fact spec: (class id, non-empty call bitmask, project id).
fn record(spec: (u8, u8, u8), seq: usize) -> FactRecord {
    let (class, mask, project) = spec;
    let calls: Vec<String> = (0..8)
        .filter(|b| mask & (1 << b) != 0)
        .map(|b| format!("m{b}()V"))
        .collect();
    let class = format!("lib/C{}", class % 6);
    FactRecord {
        jar: format!("p{}", project % 4),
        class: class.clone(),
        method: format!("use{seq}()V"),
        kind: UsageKind::Local,
        var: format!("v{seq}"),
        receiver_type: class,
        type_inferred: false,
        calls,
    }
}

fn records(specs: &[(u8, u8, u8)]) -> Vec<FactRecord> {
    specs.iter().enumerate().map(|(i, &s)| record(s, i)).collect()
}

fn specs() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
    prop::collection::vec((any::<u8>(), 1u8..=255, any::<u8>()), 1..120)
}

proptest! {
    /// Aggregation ignores record order.
    #[test]
    fn aggregate_is_order_insensitive(specs in specs(), seed in any::<u64>()) {
        let recs = records(&specs);
        let store = EcosystemStore::aggregate(recs.iter());

        let mut shuffled = recs.clone();
        let mut state = seed | 1;
        for i in (1..shuffled.len()).rev() {
            // xorshift is plenty for a permutation
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            shuffled.swap(i, (state as usize) % (i + 1));
        }
        let reordered = EcosystemStore::aggregate(shuffled.iter());
        prop_assert_eq!(store, reordered);
    }

    /// Aggregating per-project shards and merging equals one global pass.
    #[test]
    fn sharded_merge_equals_single_pass(specs in specs()) {
        let recs = records(&specs);
        let whole = EcosystemStore::aggregate(recs.iter());

        let projects: BTreeSet<&str> = recs.iter().map(|r| r.jar.as_str()).collect();
        let mut merged = EcosystemStore::new();
        for p in projects {
            let shard = EcosystemStore::aggregate(recs.iter().filter(|r| r.jar == p));
            merged = EcosystemStore::merge(&merged, &shard).unwrap();
        }
        prop_assert_eq!(whole, merged);
    }

    /// Facts survive a write/parse round trip.
    #[test]
    fn facts_round_trip(specs in specs()) {
        let recs = records(&specs);
        let mut buf = Vec::new();
        write_facts(&mut buf, recs.iter()).unwrap();
        let (store, skipped) =
            EcosystemStore::aggregate_lines(BufReader::new(buf.as_slice())).unwrap();
        prop_assert_eq!(skipped, 0);
        prop_assert_eq!(store, EcosystemStore::aggregate(recs.iter()));
    }

    /// Entropy never exceeds its uniform-distribution ceiling.
    #[test]
    fn entropy_at_most_max_entropy(counts in prop::collection::vec(1u64..=10_000, 1..40)) {
        let mut store = EcosystemStore::new();
        for (i, &c) in counts.iter().enumerate() {
            let kind = TypeUsageKind {
                receiver_type: "X".into(),
                calls: vec![format!("m{i}()V")],
            };
            store.add_kind_count("p", kind, c);
        }
        let m = class_metrics(&store, "X").unwrap();
        prop_assert!(m.entropy <= m.max_entropy + 1e-9);
        prop_assert!(m.dominance >= 1.0 / m.diversity_ecosystem as f64 - 1e-9);
        prop_assert!(m.dominance <= 1.0);
    }

    /// Spearman only sees ranks: strictly increasing transforms change nothing.
    #[test]
    fn spearman_is_rank_invariant(
        points in prop::collection::vec((-1000i32..1000, -1000i32..1000), 3..60)
    ) {
        let x: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
        let y: Vec<f64> = points.iter().map(|p| p.1 as f64).collect();
        let x_t: Vec<f64> = x.iter().map(|v| v * 3.0 + 7.0).collect();
        let y_t: Vec<f64> = y.iter().map(|v| v.exp2()).collect();
        match (spearman(&x, &y), spearman(&x_t, &y_t)) {
            (Ok(a), Ok(b)) => prop_assert!((a - b).abs() < 1e-9),
            // constant columns degenerate the same way on both sides
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "asymmetric results {a:?} vs {b:?}"),
        }
    }

    /// Method descriptors print back to their source text.
    #[test]
    fn descriptor_round_trip(desc in descriptor_strategy()) {
        let parsed = parse_descriptor(&desc).unwrap();
        prop_assert_eq!(parsed.to_string(), desc);
    }
}

fn field_type_strategy() -> impl Strategy<Value = String> {
    let base = prop_oneof![
        Just("B".to_owned()),
        Just("C".to_owned()),
        Just("D".to_owned()),
        Just("F".to_owned()),
        Just("I".to_owned()),
        Just("J".to_owned()),
        Just("S".to_owned()),
        Just("Z".to_owned()),
        "[a-zA-Z][a-zA-Z0-9]{0,6}(/[a-zA-Z][a-zA-Z0-9]{0,6}){0,2}"
            .prop_map(|n| format!("L{n};")),
    ];
    (0usize..3, base).prop_map(|(dims, base)| format!("{}{}", "[".repeat(dims), base))
}

fn descriptor_strategy() -> impl Strategy<Value = String> {
    let ret = prop_oneof![Just("V".to_owned()), field_type_strategy()];
    (prop::collection::vec(field_type_strategy(), 0..5), ret)
        .prop_map(|(params, ret)| format!("({}){}", params.concat(), ret))
}
