//! Ontology-driven domain search over a leveled page index.
//!
//! The pipeline:
//!
//! 1. [`ontology`]: weighted terms with synonyms and relevance cut-offs.
//! 2. [`corpus`]: documents plus an explicit link graph (or a synthetic one).
//! 3. [`rpag`]: breadth-first crawl keeping only relevant pages, with up to
//!    four parents each.
//! 4. [`ibag`]: single-parent leveled tree, levels sorted by mean relevance,
//!    per-ontology next-page chains and level heads.
//! 5. [`bitmask`]: one bit pattern per (page, ontology), query masks, and the
//!    XOR prediction filter.
//! 6. [`search`]: range selection with and without mask filtering.
//! 7. [`eval`]: harvest rate, before/after benchmarks, traversal-cost checks.
//!
//! [`index::IndexBundle`] persists everything as one JSON file.

pub mod bitmask;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod ibag;
pub mod index;
pub mod ontology;
pub mod relevance;
pub mod rpag;
pub mod search;

pub use error::{Error, Result};
