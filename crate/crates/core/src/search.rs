//! Query pipeline: relevance-range selection, optionally followed by the
//! bit-mask prediction filter.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::bitmask::{find_predicted_webpage_list, gen_mask_bit_pattern, PatternStore};
use crate::error::{Error, Result};
use crate::ibag::{Ibag, RelevanceRange};
use crate::ontology::OntologyId;
use crate::rpag::PageId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub search_string: String,
    pub range: RelevanceRange,
    pub ontology_id: OntologyId,
    /// Maximum number of results.
    pub result_limit: usize,
}

impl Query {
    pub fn new(
        search_string: impl Into<String>,
        range: RelevanceRange,
        ontology_id: OntologyId,
        result_limit: usize,
    ) -> Result<Self> {
        if result_limit == 0 {
            return Err(Error::Argument("result limit must be at least 1".into()));
        }
        Ok(Query {
            search_string: search_string.into(),
            range: RelevanceRange::new(range.lo, range.hi)?,
            ontology_id,
            result_limit,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    BeforeMasking,
    AfterMasking,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::BeforeMasking => "before",
            Mode::AfterMasking => "after",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "before" => Ok(Mode::BeforeMasking),
            "after" => Ok(Mode::AfterMasking),
            other => Err(Error::Argument(format!("unknown mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchHit {
    pub p_id: PageId,
    pub url: String,
    pub mean_rel_val: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub mode: Mode,
    pub results: Vec<SearchHit>,
    /// Every page the range selection returned, in traversal order.
    pub selected: Vec<PageId>,
    pub visited_count: usize,
    /// Ontology terms found in the search string (after masking only).
    pub mask_terms: Option<usize>,
    /// Masked bit positions tested (after masking only).
    pub bit_probes: usize,
    pub elapsed: Duration,
}

impl SearchOutcome {
    pub fn selected_count(&self) -> usize {
        self.selected.len()
    }

    pub fn result_pages(&self) -> Vec<PageId> {
        self.results.iter().map(|h| h.p_id).collect()
    }
}

fn hits(ibag: &Ibag, pages: &[PageId]) -> Vec<SearchHit> {
    pages
        .iter()
        .map(|&p| {
            let n = ibag.node(p);
            SearchHit {
                p_id: p,
                url: n.url.clone(),
                mean_rel_val: n.mean_rel_val,
            }
        })
        .collect()
}

/// Range selection truncated to the result limit, without mask filtering.
pub fn search_before_masking(query: &Query, ibag: &Ibag) -> Result<SearchOutcome> {
    let start = Instant::now();
    let selection = ibag.select_by_range(query.range, query.ontology_id)?;
    let take = selection.pages.len().min(query.result_limit);
    let results = hits(ibag, &selection.pages[..take]);
    Ok(SearchOutcome {
        mode: Mode::BeforeMasking,
        results,
        selected: selection.pages,
        visited_count: selection.visited,
        mask_terms: None,
        bit_probes: 0,
        elapsed: start.elapsed(),
    })
}

/// Range selection filtered by the query's mask, truncated to the result limit.
pub fn search_after_masking(query: &Query, ibag: &Ibag, patterns: &PatternStore) -> Result<SearchOutcome> {
    let start = Instant::now();
    let ontology = ibag.ontology(query.ontology_id)?;
    let mask = gen_mask_bit_pattern(&query.search_string, ontology);
    let selection = ibag.select_by_range(query.range, query.ontology_id)?;
    let predicted = find_predicted_webpage_list(&selection.pages, patterns, &mask, query.result_limit)?;
    let results = hits(ibag, &predicted.pages);
    Ok(SearchOutcome {
        mode: Mode::AfterMasking,
        results,
        selected: selection.pages,
        visited_count: selection.visited,
        mask_terms: Some(mask.term_count()),
        bit_probes: predicted.bit_probes,
        elapsed: start.elapsed(),
    })
}

pub fn search(query: &Query, ibag: &Ibag, patterns: &PatternStore, mode: Mode) -> Result<SearchOutcome> {
    match mode {
        Mode::BeforeMasking => search_before_masking(query, ibag),
        Mode::AfterMasking => search_after_masking(query, ibag, patterns),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitmask::gen_ibag_bit_patterns;
    use crate::corpus::{Corpus, CorpusDoc};
    use crate::ibag::build_ibag;
    use crate::ontology::{Limits, Ontology, TermSpec};
    use crate::rpag::build_rpag;

    fn fixture() -> (Ibag, PatternStore) {
        let ont = Ontology::new(
            OntologyId(1),
            "cricket",
            vec![
                TermSpec::new("cricket", 0.9, &[]),
                TermSpec::new("umpire", 0.4, &["referee"]),
                TermSpec::new("bat", 0.2, &[]),
            ],
            &Limits::uniform(0.5, 0.3),
        )
        .unwrap();
        let docs = (0..30)
            .map(|i| CorpusDoc {
                url: format!("p{i}"),
                out_links: vec![format!("p{}", i + 1)],
                text: if i % 3 == 0 {
                    "cricket umpire umpire".into()
                } else {
                    "cricket bat bat".into()
                },
            })
            .collect();
        let corpus = Corpus::new(docs, vec!["p0".into()]).unwrap();
        let ibag = build_ibag(&build_rpag(&corpus, &[ont]).unwrap());
        let pats = gen_ibag_bit_patterns(&ibag);
        (ibag, pats)
    }

    #[test]
    fn before_masking_truncates_selection() {
        let (ibag, _) = fixture();
        let q = Query::new("anything", RelevanceRange::unbounded(), OntologyId(1), 20).unwrap();
        let out = search_before_masking(&q, &ibag).unwrap();
        assert_eq!(out.results.len(), 20);
        assert_eq!(out.selected_count(), 30);
        assert_eq!(out.result_pages(), out.selected[..20]);
    }

    #[test]
    fn empty_selection_gives_no_results() {
        let (ibag, pats) = fixture();
        let q = Query::new("umpire", RelevanceRange::new(50.0, 60.0).unwrap(), OntologyId(1), 5).unwrap();
        assert!(search_before_masking(&q, &ibag).unwrap().results.is_empty());
        assert!(search_after_masking(&q, &ibag, &pats).unwrap().results.is_empty());
    }

    #[test]
    fn after_masking_keeps_pages_with_the_term() {
        let (ibag, pats) = fixture();
        let q = Query::new("who was the referee", RelevanceRange::unbounded(), OntologyId(1), 100).unwrap();
        let out = search_after_masking(&q, &ibag, &pats).unwrap();
        assert_eq!(out.results.len(), 10);
        assert!(out
            .results
            .iter()
            .all(|h| ibag.node(h.p_id).term_vectors[0].get(1) > 0.3));
        assert_eq!(out.mask_terms, Some(1));
    }

    #[test]
    fn unmatched_query_keeps_selection_count() {
        let (ibag, pats) = fixture();
        let q = Query::new("football", RelevanceRange::unbounded(), OntologyId(1), 10).unwrap();
        let before = search_before_masking(&q, &ibag).unwrap();
        let after = search_after_masking(&q, &ibag, &pats).unwrap();
        assert!(after.results.is_empty());
        assert_eq!(after.selected_count(), before.selected_count());
    }

    #[test]
    fn argument_errors() {
        let (ibag, pats) = fixture();
        assert!(Query::new("x", RelevanceRange::unbounded(), OntologyId(1), 0).is_err());
        let q = Query::new("x", RelevanceRange::unbounded(), OntologyId(7), 3).unwrap();
        assert!(matches!(search_before_masking(&q, &ibag), Err(Error::Argument(_))));
        assert!(matches!(
            search_after_masking(&q, &ibag, &pats),
            Err(Error::Argument(_))
        ));
        assert_eq!("after".parse::<Mode>().unwrap(), Mode::AfterMasking);
        assert!("sideways".parse::<Mode>().is_err());
    }
}
