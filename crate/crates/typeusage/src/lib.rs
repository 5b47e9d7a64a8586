//! Mines *type-usages* — the set of method calls statically observed on one
//! variable, parameter or field — from JVM bytecode, aggregates them across a
//! corpus of Jar files, and measures their diversity with ecology-inspired
//! metrics (abundance, richness, dominance, Shannon entropy).
//!
//! The pipeline:
//!
//! 1. [`classfile`] / [`jar`] parse class files and Jar containers;
//! 2. [`extract`] attributes receiver calls to variables via a per-block
//!    symbolic operand-stack interpretation;
//! 3. [`facts`] persists instances as line-delimited JSON and aggregates them
//!    into an [`facts::EcosystemStore`] of per-project and ecosystem counts;
//! 4. [`metrics`] computes the per-class diversity quantities;
//! 5. [`divmap`] builds threshold-filtered subset-ordered diversity maps;
//! 6. [`report`] drives corpus runs and writes the report tables.
//!
//! [`classgen`] is the inverse of the reader: a small assembler for building
//! synthetic corpora and fixtures (see the `examples/` directory).

pub mod bytecode;
pub mod classfile;
pub mod classgen;
pub mod divmap;
pub mod extract;
pub mod facts;
pub mod jar;
pub mod metrics;
pub mod report;
