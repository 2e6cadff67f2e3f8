//! One-file persisted index: ontologies, relevance page graph, leveled index
//! and bit patterns, as canonical JSON.
//!
//! ```text
//! {"format":"ibag-search-index/1","ontologies":[...],"rpag":{...},"ibag":{...},"patterns":[...]}
//! ```
//!
//! Saving, loading and saving again yields identical bytes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bitmask::{gen_ibag_bit_patterns, PatternSection, PatternStore};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ibag::{build_ibag, Ibag, IbagSection};
use crate::ontology::Ontology;
use crate::rpag::{build_rpag, Rpag, RpagSection};
use crate::search::{search, Mode, Query, SearchOutcome};

pub const INDEX_FORMAT: &str = "ibag-search-index/1";

#[derive(Debug, Clone, PartialEq)]
pub struct IndexBundle {
    pub rpag: Rpag,
    pub ibag: Ibag,
    pub patterns: PatternStore,
}

#[derive(Serialize, Deserialize)]
struct IndexFile {
    format: String,
    ontologies: Vec<Ontology>,
    rpag: RpagSection,
    ibag: IbagSection,
    patterns: Vec<PatternSection>,
}

/// Counts printed after a build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexSummary {
    pub visited: usize,
    pub pages: usize,
    pub levels: usize,
    pub patterns: usize,
}

impl IndexBundle {
    /// Crawls, levels and precomputes patterns in one go.
    pub fn build(corpus: &Corpus, ontologies: &[Ontology]) -> Result<Self> {
        let rpag = build_rpag(corpus, ontologies)?;
        let ibag = build_ibag(&rpag);
        let patterns = gen_ibag_bit_patterns(&ibag);
        Ok(IndexBundle { rpag, ibag, patterns })
    }

    pub fn ontologies(&self) -> &[Ontology] {
        &self.ibag.ontologies
    }

    pub fn is_empty(&self) -> bool {
        self.ibag.is_empty()
    }

    pub fn summary(&self) -> IndexSummary {
        IndexSummary {
            visited: self.rpag.stats.visited,
            pages: self.ibag.n(),
            levels: self.ibag.m(),
            patterns: self.patterns.len(),
        }
    }

    pub fn search(&self, query: &Query, mode: Mode) -> Result<SearchOutcome> {
        search(query, &self.ibag, &self.patterns, mode)
    }

    pub fn to_json(&self) -> String {
        let file = IndexFile {
            format: INDEX_FORMAT.into(),
            ontologies: self.ibag.ontologies.clone(),
            rpag: self.rpag.section(),
            ibag: self.ibag.section(),
            patterns: self.patterns.sections(),
        };
        let mut out = serde_json::to_string(&file).expect("index serializes");
        out.push('\n');
        out
    }

    /// Parses and fully validates an index document.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: IndexFile = serde_json::from_str(text)?;
        if file.format != INDEX_FORMAT {
            return Err(Error::Validation(format!("unsupported index format {:?}", file.format)));
        }
        for o in &file.ontologies {
            o.validate()?;
        }
        let rpag = Rpag::from_section(file.rpag, file.ontologies.clone())?;
        let ibag = Ibag::from_section(file.ibag, file.ontologies)?;
        let patterns = PatternStore::from_sections(file.patterns)?;
        patterns.validate(&ibag)?;
        let bundle = IndexBundle { rpag, ibag, patterns };
        bundle.check_cross_references()?;
        Ok(bundle)
    }

    /// The leveled index must be exactly what the graph produces.
    fn check_cross_references(&self) -> Result<()> {
        if build_ibag(&self.rpag) != self.ibag {
            return Err(Error::Validation(
                "index does not match its relevance page graph".into(),
            ));
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        IndexBundle::from_json(&text)
    }
}
