//! Relevance Page Graph: the relevant pages found by a breadth-first crawl.
//!
//! Every visited document is scored against every ontology. Pages supported
//! by at least one ontology become nodes; the rest are still crawled through
//! but not stored. Page ids are assigned in discovery order, and a node's
//! parents are the first four relevant pages, crawled before it, that link
//! to it.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::ontology::{normalize_text, ontologies_digest, Ontology, OntologyId};
use crate::relevance::{page_relevance, PageRelevance};

pub const MAX_PARENTS: usize = 4;
pub const RPAG_FORMAT: &str = "rpag/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PageId(pub u32);

impl PageId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for PageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RpagNode {
    pub p_id: PageId,
    pub url: String,
    pub pp_ids: Vec<PageId>,
    /// One entry per ontology, in the graph's ontology order.
    pub relevance: Vec<PageRelevance>,
}

impl RpagNode {
    pub fn supports(&self, ontology_idx: usize) -> bool {
        self.relevance[ontology_idx].supported
    }
}

/// Counters from the crawl that produced a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrawlStats {
    pub visited: usize,
    pub relevant: usize,
    pub dangling_links: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rpag {
    pub ontologies: Vec<Ontology>,
    /// Indexed by `p_id`.
    pub nodes: Vec<RpagNode>,
    pub stats: CrawlStats,
}

/// Serialized form of an [`Rpag`]; the ontologies are stored elsewhere and
/// tied back by digest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct RpagSection {
    pub format: String,
    pub ontology_digest: String,
    pub stats: CrawlStats,
    pub nodes: Vec<RpagNode>,
}

pub(crate) fn check_ontologies(ontologies: &[Ontology]) -> Result<()> {
    if ontologies.is_empty() {
        return Err(Error::Argument("at least one ontology is required".into()));
    }
    let mut ids = HashSet::new();
    for o in ontologies {
        if !ids.insert(o.id) {
            return Err(Error::Argument(format!("duplicate ontology id {}", o.id)));
        }
    }
    Ok(())
}

/// Crawls `corpus` breadth-first from its seeds and keeps the relevant pages.
///
/// A corpus with no relevant page yields an empty graph, not an error.
pub fn build_rpag(corpus: &Corpus, ontologies: &[Ontology]) -> Result<Rpag> {
    check_ontologies(ontologies)?;
    if corpus.seeds().is_empty() {
        return Err(Error::Argument("the corpus has no seed urls".into()));
    }

    // Visit order does not depend on relevance, so it is fixed up front and
    // scoring can run in parallel.
    let mut order: Vec<usize> = Vec::new();
    let mut seen: HashSet<usize> = HashSet::new();
    let mut queue: VecDeque<usize> = VecDeque::new();
    let mut dangling_links = 0;
    for seed in corpus.seeds() {
        let i = corpus.position(seed).expect("corpus validates its seeds");
        if seen.insert(i) {
            queue.push_back(i);
        }
    }
    while let Some(i) = queue.pop_front() {
        order.push(i);
        for link in &corpus.docs()[i].out_links {
            match corpus.position(link) {
                Some(j) => {
                    if seen.insert(j) {
                        queue.push_back(j);
                    }
                }
                None => dangling_links += 1,
            }
        }
    }

    let scores: Vec<Vec<PageRelevance>> = order
        .par_iter()
        .map(|&i| {
            let tokens = normalize_text(&corpus.docs()[i].text);
            ontologies.iter().map(|o| page_relevance(o, &tokens)).collect()
        })
        .collect();

    let seeds: HashSet<usize> = corpus.seeds().iter().filter_map(|s| corpus.position(s)).collect();
    let visit_rank: HashMap<usize, usize> = order.iter().enumerate().map(|(rank, &i)| (i, rank)).collect();
    let mut parents: HashMap<usize, Vec<PageId>> = HashMap::new();
    let mut nodes = Vec::new();
    for (rank, (&doc_idx, relevance)) in order.iter().zip(scores).enumerate() {
        if !relevance.iter().any(|r| r.supported) {
            continue;
        }
        let p_id = PageId(nodes.len() as u32);
        let doc = &corpus.docs()[doc_idx];
        for link in &doc.out_links {
            let Some(target) = corpus.position(link) else { continue };
            // only pages crawled later may take this page as a parent
            if seeds.contains(&target) || visit_rank[&target] <= rank {
                continue;
            }
            let list = parents.entry(target).or_default();
            if list.len() < MAX_PARENTS && !list.contains(&p_id) {
                list.push(p_id);
            }
        }
        nodes.push(RpagNode {
            p_id,
            url: doc.url.clone(),
            pp_ids: parents.remove(&doc_idx).unwrap_or_default(),
            relevance,
        });
    }

    let stats = CrawlStats {
        visited: order.len(),
        relevant: nodes.len(),
        dangling_links,
    };
    if nodes.is_empty() {
        log::warn!(
            "crawl visited {} pages and found none relevant; the graph is empty",
            stats.visited
        );
    }
    Ok(Rpag {
        ontologies: ontologies.to_vec(),
        nodes,
        stats,
    })
}

impl Rpag {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, p_id: PageId) -> &RpagNode {
        &self.nodes[p_id.index()]
    }

    pub fn ontology_index(&self, id: OntologyId) -> Option<usize> {
        self.ontologies.iter().position(|o| o.id == id)
    }

    pub(crate) fn section(&self) -> RpagSection {
        RpagSection {
            format: RPAG_FORMAT.into(),
            ontology_digest: ontologies_digest(&self.ontologies),
            stats: self.stats,
            nodes: self.nodes.clone(),
        }
    }

    pub(crate) fn from_section(section: RpagSection, ontologies: Vec<Ontology>) -> Result<Self> {
        if section.format != RPAG_FORMAT {
            return Err(Error::Validation(format!(
                "unsupported graph format {:?}",
                section.format
            )));
        }
        if section.ontology_digest != ontologies_digest(&ontologies) {
            return Err(Error::Validation("graph was built against different ontologies".into()));
        }
        let rpag = Rpag {
            ontologies,
            nodes: section.nodes,
            stats: section.stats,
        };
        rpag.validate()?;
        Ok(rpag)
    }

    /// Standalone JSON document: format tag, ontology digest, nodes.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.section()).expect("graph serializes")
    }

    pub fn from_json(text: &str, ontologies: Vec<Ontology>) -> Result<Self> {
        Rpag::from_section(serde_json::from_str(text)?, ontologies)
    }

    /// Checks every structural invariant of the graph.
    pub fn validate(&self) -> Result<()> {
        check_ontologies(&self.ontologies).map_err(|e| Error::Validation(e.to_string()))?;
        let fail = |msg: String| Err(Error::Validation(msg));
        let mut urls = HashSet::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.p_id.index() != i {
                return fail(format!("page ids are not dense: position {i} holds {}", node.p_id));
            }
            if !urls.insert(node.url.as_str()) {
                return fail(format!("duplicate url {:?}", node.url));
            }
            if node.pp_ids.len() > MAX_PARENTS {
                return fail(format!("page {} has {} parents", node.p_id, node.pp_ids.len()));
            }
            let distinct: HashSet<_> = node.pp_ids.iter().collect();
            if distinct.len() != node.pp_ids.len() {
                return fail(format!("page {} lists a parent twice", node.p_id));
            }
            if let Some(p) = node.pp_ids.iter().find(|p| **p >= node.p_id) {
                return fail(format!(
                    "page {} has parent {p} that was not crawled before it",
                    node.p_id
                ));
            }
            if node.relevance.len() != self.ontologies.len() {
                return fail(format!(
                    "page {} has {} relevance entries",
                    node.p_id,
                    node.relevance.len()
                ));
            }
            for (rel, ont) in node.relevance.iter().zip(&self.ontologies) {
                check_page_relevance(rel, ont).map_err(|m| Error::Validation(format!("page {}: {m}", node.p_id)))?;
            }
            if !node.relevance.iter().any(|r| r.supported) {
                return fail(format!("page {} supports no ontology", node.p_id));
            }
        }
        Ok(())
    }
}

pub(crate) fn check_page_relevance(rel: &PageRelevance, ont: &Ontology) -> Result<(), String> {
    if rel.ontology_id != ont.id {
        return Err(format!(
            "relevance for ontology {} where {} was expected",
            rel.ontology_id, ont.id
        ));
    }
    if rel.term_vector.len() != ont.t() {
        return Err(format!(
            "term vector of length {} for t = {}",
            rel.term_vector.len(),
            ont.t()
        ));
    }
    if rel.term_vector.0.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err("negative or non-finite term relevance".into());
    }
    let raw = rel.term_vector.total();
    if rel.supported != (raw > ont.relevance_limit) {
        return Err(format!(
            "support flag disagrees with relevance {raw} and limit {}",
            ont.relevance_limit
        ));
    }
    let expected = if rel.supported { raw } else { 0.0 };
    if rel.relevance_value != expected {
        return Err(format!(
            "stored relevance {} but terms sum to {expected}",
            rel.relevance_value
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::CorpusDoc;
    use crate::ontology::{Limits, TermSpec};

    fn ontology() -> Ontology {
        Ontology::new(
            OntologyId(1),
            "cricket",
            vec![
                TermSpec::new("cricket", 0.9, &[]),
                TermSpec::new("umpire", 0.4, &["referee"]),
            ],
            &Limits::uniform(0.5, 0.0),
        )
        .unwrap()
    }

    fn doc(url: &str, links: &[&str], text: &str) -> CorpusDoc {
        CorpusDoc {
            url: url.into(),
            out_links: links.iter().map(|s| (*s).into()).collect(),
            text: text.into(),
        }
    }

    #[test]
    fn no_relevant_page_gives_empty_graph() {
        let c = Corpus::new(
            vec![doc("a", &["b"], "nothing here"), doc("b", &[], "still nothing")],
            vec!["a".into()],
        )
        .unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.stats.visited, 2);
    }

    #[test]
    fn chain_through_irrelevant_seed() {
        let c = Corpus::new(
            vec![
                doc("a", &["b"], "weather"),
                doc("b", &["c"], "cricket"),
                doc("c", &[], "cricket umpire"),
            ],
            vec!["a".into()],
        )
        .unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        let urls: Vec<&str> = g.nodes.iter().map(|n| n.url.as_str()).collect();
        assert_eq!(urls, ["b", "c"]);
        assert!(g.nodes[0].pp_ids.is_empty());
        assert_eq!(g.nodes[1].pp_ids, [PageId(0)]);
        g.validate().unwrap();
    }

    #[test]
    fn parents_capped_at_four_in_discovery_order() {
        // seed links to six relevant hubs, each of which links to the target
        let hubs: Vec<String> = (0..6).map(|i| format!("h{i}")).collect();
        let mut docs = vec![doc(
            "s",
            &hubs.iter().map(String::as_str).collect::<Vec<_>>(),
            "cricket",
        )];
        for h in &hubs {
            docs.push(doc(h, &["t"], "cricket"));
        }
        docs.push(doc("t", &[], "cricket"));
        let c = Corpus::new(docs, vec!["s".into()]).unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        let target = g.nodes.iter().find(|n| n.url == "t").unwrap();
        assert_eq!(target.pp_ids, [PageId(1), PageId(2), PageId(3), PageId(4)]);
    }

    #[test]
    fn back_links_do_not_become_parents() {
        let c = Corpus::new(
            vec![doc("a", &["b"], "cricket"), doc("b", &["a"], "cricket")],
            vec!["a".into()],
        )
        .unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        assert!(g.nodes[0].pp_ids.is_empty());
        assert_eq!(g.nodes[1].pp_ids, [PageId(0)]);
    }

    #[test]
    fn dangling_links_are_skipped() {
        let c = Corpus::new(
            vec![doc("a", &["gone", "b"], "cricket"), doc("b", &[], "referee")],
            vec!["a".into()],
        )
        .unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        assert_eq!(g.len(), 1, "referee alone (0.4) is below the 0.5 limit");
        assert_eq!(g.stats.dangling_links, 1);
    }

    #[test]
    fn unstored_relevance_is_zero() {
        let other = Ontology::new(
            OntologyId(2),
            "x",
            vec![TermSpec::new("goal", 0.5, &[])],
            &Limits::uniform(0.5, 0.0),
        )
        .unwrap();
        let c = Corpus::new(vec![doc("a", &[], "cricket goal")], vec!["a".into()]).unwrap();
        let g = build_rpag(&c, &[ontology(), other]).unwrap();
        let n = &g.nodes[0];
        assert!(n.supports(0) && !n.supports(1));
        assert_eq!(n.relevance[1].relevance_value, 0.0);
        assert_eq!(n.relevance[1].term_vector.0, [0.5]);
    }

    #[test]
    fn requires_ontology_and_seed() {
        let c = Corpus::new(vec![doc("a", &[], "cricket")], vec![]).unwrap();
        assert!(matches!(build_rpag(&c, &[ontology()]), Err(Error::Argument(_))));
        let c = c.with_seeds(vec!["a".into()]).unwrap();
        assert!(matches!(build_rpag(&c, &[]), Err(Error::Argument(_))));
    }

    #[test]
    fn json_round_trip_and_digest_check() {
        let c = Corpus::new(
            vec![doc("a", &["b"], "cricket"), doc("b", &[], "umpire cricket")],
            vec!["a".into()],
        )
        .unwrap();
        let g = build_rpag(&c, &[ontology()]).unwrap();
        let json = g.to_json();
        let back = Rpag::from_json(&json, vec![ontology()]).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), json);
        let mut other = ontology();
        other.terms[0].weight = 0.8;
        assert!(Rpag::from_json(&json, vec![other]).is_err());
    }
}
