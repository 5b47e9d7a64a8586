//! Jar (zip) container scanning.

use std::collections::BTreeSet;
use std::io::Read;
use std::path::Path;

use thiserror::Error;

use crate::classfile::{parse_class, ClassFile};

#[derive(Debug, Error)]
pub enum JarError {
    #[error("unreadable archive {path}: {reason}")]
    UnreadableArchive { path: String, reason: String },
}

/// Result of scanning one jar: parsed classes in archive order, plus the
/// number of `.class` entries that failed to parse.
#[derive(Debug)]
pub struct JarContents {
    pub classes: Vec<(String, ClassFile)>,
    pub skipped: usize,
}

impl JarContents {
    /// The set of class binary names, the identity used for deduplication.
    pub fn class_names(&self) -> BTreeSet<String> {
        self.classes.iter().map(|(_, c)| c.binary_name.clone()).collect()
    }
}

/// Parses every `.class` entry of a jar. Non-class entries are ignored;
/// malformed class entries are skipped and counted, never fatal for the
/// archive as a whole.
pub fn parse_jar(path: &Path) -> Result<JarContents, JarError> {
    let unreadable = |reason: String| JarError::UnreadableArchive {
        path: path.display().to_string(),
        reason,
    };
    let file = std::fs::File::open(path).map_err(|e| unreadable(e.to_string()))?;
    let mut archive = zip::ZipArchive::new(file).map_err(|e| unreadable(e.to_string()))?;

    let mut classes = Vec::new();
    let mut skipped = 0;
    for i in 0..archive.len() {
        let mut entry = match archive.by_index(i) {
            Ok(e) => e,
            Err(_) => {
                skipped += 1;
                continue;
            }
        };
        let name = entry.name().to_owned();
        if !name.ends_with(".class") || entry.is_dir() {
            continue;
        }
        let mut bytes = Vec::with_capacity(entry.size() as usize);
        if entry.read_to_end(&mut bytes).is_err() {
            skipped += 1;
            continue;
        }
        match parse_class(&bytes) {
            Ok(class) => classes.push((name, class)),
            Err(_) => skipped += 1,
        }
    }
    Ok(JarContents { classes, skipped })
}
