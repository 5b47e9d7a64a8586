//! Facts persistence and aggregation.
//!
//! Two on-disk formats, both line-delimited UTF-8 JSON, both stable contracts
//! for third-party frontends:
//!
//! * facts file: one record per line with fields `jar`, `class`, `method`,
//!   `kind`, `var`, `type`, `typeInferred`, `calls` (sorted array of
//!   "name+descriptor" strings);
//! * store snapshot: a versioned header record followed by count records
//!   sorted by (project, type, calls).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::extract::{TypeUsageInstance, UsageKind};

#[derive(Debug, Error)]
pub enum FactsError {
    #[error("malformed record at line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("stores overlap: project {project} appears in both operands")]
    Overlap { project: String },
    #[error("snapshot format error: {0}")]
    BadSnapshot(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One line of the facts file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactRecord {
    pub jar: String,
    pub class: String,
    pub method: String,
    pub kind: UsageKind,
    pub var: String,
    #[serde(rename = "type")]
    pub receiver_type: String,
    #[serde(rename = "typeInferred")]
    pub type_inferred: bool,
    pub calls: Vec<String>,
}

impl From<&TypeUsageInstance> for FactRecord {
    fn from(inst: &TypeUsageInstance) -> Self {
        FactRecord {
            jar: inst.project_id.clone(),
            class: inst.class_name.clone(),
            method: inst.enclosing_method.clone(),
            kind: inst.kind,
            var: inst.variable_id.clone(),
            receiver_type: inst.receiver_type.clone(),
            type_inferred: inst.type_inferred,
            calls: inst.calls.iter().map(|c| c.render()).collect(),
        }
    }
}

impl FactRecord {
    fn validate(&self, line: usize) -> Result<(), FactsError> {
        if self.calls.is_empty() {
            return Err(FactsError::MalformedRecord {
                line,
                reason: "empty calls array".into(),
            });
        }
        if self.calls.windows(2).any(|w| w[0] >= w[1]) {
            return Err(FactsError::MalformedRecord {
                line,
                reason: "calls array not sorted and duplicate-free".into(),
            });
        }
        Ok(())
    }
}

/// Writes facts as one JSON object per line.
pub fn write_facts<'a, W: Write>(
    out: &mut W,
    records: impl IntoIterator<Item = &'a FactRecord>,
) -> Result<(), FactsError> {
    for record in records {
        serde_json::to_writer(&mut *out, record)
            .map_err(|e| FactsError::BadSnapshot(e.to_string()))?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// The aggregated identity: receiver type plus canonical call set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypeUsageKind {
    pub receiver_type: String,
    /// Sorted canonical call renderings.
    pub calls: Vec<String>,
}

impl TypeUsageKind {
    pub fn key(&self) -> String {
        format!("{}#{}", self.receiver_type, self.calls.join(","))
    }
}

/// The corpus database: projects, kinds, per-project and ecosystem counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EcosystemStore {
    projects: BTreeSet<String>,
    per_project: BTreeMap<(String, String), u64>,
    ecosystem: BTreeMap<String, u64>,
    class_index: BTreeMap<String, BTreeSet<String>>,
    kinds: BTreeMap<String, TypeUsageKind>,
}

impl EcosystemStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, record: &FactRecord) {
        let kind = TypeUsageKind {
            receiver_type: record.receiver_type.clone(),
            calls: record.calls.clone(),
        };
        self.add_kind_count(&record.jar, kind, 1);
    }

    /// Adds `count` specimens of a kind observed in `project`.
    pub fn add_kind_count(&mut self, project: &str, kind: TypeUsageKind, count: u64) {
        if count == 0 {
            return;
        }
        let key = kind.key();
        self.projects.insert(project.to_owned());
        *self.per_project.entry((project.to_owned(), key.clone())).or_insert(0) += count;
        *self.ecosystem.entry(key.clone()).or_insert(0) += count;
        self.class_index.entry(kind.receiver_type.clone()).or_default().insert(key.clone());
        self.kinds.entry(key).or_insert(kind);
    }

    pub fn projects(&self) -> impl Iterator<Item = &str> {
        self.projects.iter().map(|s| s.as_str())
    }

    pub fn has_project(&self, project: &str) -> bool {
        self.projects.contains(project)
    }

    pub fn classes(&self) -> impl Iterator<Item = &str> {
        self.class_index.keys().map(|s| s.as_str())
    }

    pub fn has_class(&self, class: &str) -> bool {
        self.class_index.contains_key(class)
    }

    pub fn kind(&self, key: &str) -> Option<&TypeUsageKind> {
        self.kinds.get(key)
    }

    /// Kind keys of a class, sorted, with their ecosystem counts.
    pub fn class_kind_counts(&self, class: &str) -> Vec<(&TypeUsageKind, u64)> {
        match self.class_index.get(class) {
            None => Vec::new(),
            Some(keys) => keys
                .iter()
                .map(|k| (&self.kinds[k], self.ecosystem[k]))
                .collect(),
        }
    }

    /// Kind keys of a class restricted to one project.
    pub fn class_kind_counts_in_project(
        &self,
        class: &str,
        project: &str,
    ) -> Vec<(&TypeUsageKind, u64)> {
        match self.class_index.get(class) {
            None => Vec::new(),
            Some(keys) => keys
                .iter()
                .filter_map(|k| {
                    self.per_project
                        .get(&(project.to_owned(), k.clone()))
                        .map(|&c| (&self.kinds[k], c))
                })
                .collect(),
        }
    }

    /// Number of distinct projects in which the class is observed.
    pub fn class_project_count(&self, class: &str) -> usize {
        match self.class_index.get(class) {
            None => 0,
            Some(keys) => {
                let mut projects = BTreeSet::new();
                for ((project, key), _) in &self.per_project {
                    if keys.contains(key) {
                        projects.insert(project.as_str());
                    }
                }
                projects.len()
            }
        }
    }

    pub fn total_specimens(&self) -> u64 {
        self.ecosystem.values().sum()
    }

    pub fn kind_count(&self) -> usize {
        self.kinds.len()
    }

    /// Builds a store from a facts stream; malformed lines are skipped and
    /// counted, matching the corpus-level skip policy.
    pub fn aggregate_lines<R: BufRead>(reader: R) -> Result<(EcosystemStore, usize), FactsError> {
        let mut store = EcosystemStore::new();
        let mut skipped = 0;
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Result<FactRecord, _> = serde_json::from_str(&line);
            match parsed {
                Ok(record) => match record.validate(i + 1) {
                    Ok(()) => store.add(&record),
                    Err(_) => skipped += 1,
                },
                Err(_) => skipped += 1,
            }
        }
        Ok((store, skipped))
    }

    pub fn aggregate<'a>(records: impl IntoIterator<Item = &'a FactRecord>) -> EcosystemStore {
        let mut store = EcosystemStore::new();
        for r in records {
            store.add(r);
        }
        store
    }

    /// Pointwise sum of two stores built from disjoint project partitions.
    pub fn merge(a: &EcosystemStore, b: &EcosystemStore) -> Result<EcosystemStore, FactsError> {
        if let Some(shared) = a.projects.intersection(&b.projects).next() {
            return Err(FactsError::Overlap { project: shared.clone() });
        }
        let mut out = a.clone();
        for ((project, key), count) in &b.per_project {
            let kind = b.kinds[key].clone();
            out.add_kind_count(project, kind, *count);
        }
        Ok(out)
    }

    pub fn save(&self, path: &Path) -> Result<(), FactsError> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let header = SnapshotHeader { format: STORE_FORMAT.into(), version: STORE_VERSION };
        serde_json::to_writer(&mut out, &header)
            .map_err(|e| FactsError::BadSnapshot(e.to_string()))?;
        out.write_all(b"\n")?;
        for ((project, key), count) in &self.per_project {
            let kind = &self.kinds[key];
            let record = SnapshotRecord {
                project: project.clone(),
                receiver_type: kind.receiver_type.clone(),
                calls: kind.calls.clone(),
                count: *count,
            };
            serde_json::to_writer(&mut out, &record)
                .map_err(|e| FactsError::BadSnapshot(e.to_string()))?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<EcosystemStore, FactsError> {
        let reader = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = reader.lines();
        let header_line = lines
            .next()
            .ok_or_else(|| FactsError::BadSnapshot("empty snapshot".into()))??;
        let header: SnapshotHeader = serde_json::from_str(&header_line)
            .map_err(|e| FactsError::BadSnapshot(format!("bad header: {e}")))?;
        if header.format != STORE_FORMAT || header.version != STORE_VERSION {
            return Err(FactsError::BadSnapshot(format!(
                "unsupported snapshot {}/{}",
                header.format, header.version
            )));
        }
        let mut store = EcosystemStore::new();
        for (i, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SnapshotRecord = serde_json::from_str(&line).map_err(|e| {
                FactsError::MalformedRecord { line: i + 2, reason: e.to_string() }
            })?;
            store.add_kind_count(
                &record.project,
                TypeUsageKind { receiver_type: record.receiver_type, calls: record.calls },
                record.count,
            );
        }
        Ok(store)
    }
}

const STORE_FORMAT: &str = "typeusage-store";
const STORE_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct SnapshotHeader {
    format: String,
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct SnapshotRecord {
    project: String,
    #[serde(rename = "type")]
    receiver_type: String,
    calls: Vec<String>,
    count: u64,
}

/// Content identity of a jar: SHA-256 over the newline-joined sorted list of
/// class binary names.
pub fn jar_identity(class_names: &BTreeSet<String>) -> String {
    let mut hasher = Sha256::new();
    let mut first = true;
    for name in class_names {
        if !first {
            hasher.update(b"\n");
        }
        hasher.update(name.as_bytes());
        first = false;
    }
    format!("{:x}", hasher.finalize())
}

/// Stable project identity: jar basename plus a short content hash.
pub fn project_id(path: &Path, class_names: &BTreeSet<String>) -> String {
    let base = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    format!("{}-{}", base, &jar_identity(class_names)[..8])
}

/// Collapses jars with identical class-name sets, keeping the
/// lexicographically smallest path of each group. Returns the retained
/// indices into `jars`, in input order.
pub fn dedup_jars(jars: &[(String, BTreeSet<String>)]) -> Vec<usize> {
    let mut best: BTreeMap<String, usize> = BTreeMap::new();
    for (i, (path, names)) in jars.iter().enumerate() {
        let identity = jar_identity(names);
        match best.get(&identity) {
            Some(&j) if jars[j].0 <= *path => {}
            _ => {
                best.insert(identity, i);
            }
        }
    }
    let mut retained: Vec<usize> = best.into_values().collect();
    retained.sort_unstable();
    retained
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(list: &[&str]) -> BTreeSet<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identical_class_sets_collapse() {
        let jars = vec![
            ("b.jar".to_string(), names(&["A", "B"])),
            ("a.jar".to_string(), names(&["A", "B"])),
        ];
        let retained = dedup_jars(&jars);
        assert_eq!(retained, vec![1]); // a.jar sorts before b.jar
    }

    #[test]
    fn superset_does_not_collapse() {
        let jars = vec![
            ("a.jar".to_string(), names(&["A", "B"])),
            ("b.jar".to_string(), names(&["A", "B", "C"])),
        ];
        assert_eq!(dedup_jars(&jars), vec![0, 1]);
    }

    #[test]
    fn three_copies_keep_smallest_path() {
        let jars = vec![
            ("z/lib.jar".to_string(), names(&["A"])),
            ("m/lib.jar".to_string(), names(&["A"])),
            ("a/lib.jar".to_string(), names(&["A"])),
        ];
        assert_eq!(dedup_jars(&jars), vec![2]);
    }

    #[test]
    fn aggregate_counts_same_kind() {
        let record = FactRecord {
            jar: "p1".into(),
            class: "Foo".into(),
            method: "m()V".into(),
            kind: UsageKind::Local,
            var: "x:1:0".into(),
            receiver_type: "java/io/File".into(),
            type_inferred: false,
            calls: vec!["isDirectory()Z".into()],
        };
        let records = vec![record.clone(), record.clone(), record.clone(), record];
        let store = EcosystemStore::aggregate(&records);
        let counts = store.class_kind_counts("java/io/File");
        assert_eq!(counts.len(), 1);
        assert_eq!(counts[0].1, 4);
    }

    #[test]
    fn different_call_sets_are_different_kinds() {
        let mut a = FactRecord {
            jar: "p1".into(),
            class: "Foo".into(),
            method: "m()V".into(),
            kind: UsageKind::Local,
            var: "x:1:0".into(),
            receiver_type: "T".into(),
            type_inferred: false,
            calls: vec!["a()V".into()],
        };
        let b = FactRecord { calls: vec!["b()V".into()], ..a.clone() };
        a.var = "y:2:0".into();
        let store = EcosystemStore::aggregate(&[a, b]);
        assert_eq!(store.class_kind_counts("T").len(), 2);
    }

    #[test]
    fn merge_identity_and_commutativity() {
        let a = FactRecord {
            jar: "p1".into(),
            class: "Foo".into(),
            method: "m()V".into(),
            kind: UsageKind::Local,
            var: "x".into(),
            receiver_type: "T".into(),
            type_inferred: true,
            calls: vec!["a()V".into()],
        };
        let b = FactRecord { jar: "p2".into(), calls: vec!["b()V".into()], ..a.clone() };
        let sa = EcosystemStore::aggregate(&[a]);
        let sb = EcosystemStore::aggregate(&[b]);
        let empty = EcosystemStore::new();
        assert_eq!(EcosystemStore::merge(&sa, &empty).unwrap(), sa);
        assert_eq!(
            EcosystemStore::merge(&sa, &sb).unwrap(),
            EcosystemStore::merge(&sb, &sa).unwrap()
        );
    }

    #[test]
    fn merge_rejects_shared_project() {
        let a = FactRecord {
            jar: "p1".into(),
            class: "Foo".into(),
            method: "m()V".into(),
            kind: UsageKind::Local,
            var: "x".into(),
            receiver_type: "T".into(),
            type_inferred: true,
            calls: vec!["a()V".into()],
        };
        let sa = EcosystemStore::aggregate(&[a.clone()]);
        let sb = EcosystemStore::aggregate(&[a]);
        assert!(matches!(
            EcosystemStore::merge(&sa, &sb),
            Err(FactsError::Overlap { .. })
        ));
    }

    #[test]
    fn malformed_lines_are_skipped_and_counted() {
        let input = concat!(
            r#"{"jar":"p","class":"C","method":"m()V","kind":"local","var":"x","type":"T","typeInferred":false,"calls":["a()V"]}"#,
            "\n",
            "not json\n",
            r#"{"jar":"p","class":"C","method":"m()V","kind":"local","var":"x","type":"T","typeInferred":false,"calls":[]}"#,
            "\n",
        );
        let (store, skipped) =
            EcosystemStore::aggregate_lines(std::io::Cursor::new(input)).unwrap();
        assert_eq!(skipped, 2);
        assert_eq!(store.total_specimens(), 1);
    }
}
