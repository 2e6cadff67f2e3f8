//! Index Based Acyclic Graph: a leveled single-parent tree built from the
//! relevance page graph.
//!
//! Each page keeps the first of its graph parents. Pages without a parent sit
//! on level 0; every other page sits one level below its parent. Within a
//! level pages are ordered by mean relevance, highest first, ties by page id.
//! For every ontology the supporting pages are threaded into one chain
//! (`ont_links`) running level by level in that order, and each level records
//! where its part of the chain starts.

use std::cmp::Ordering;
use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{ontologies_digest, Ontology, OntologyId};
use crate::relevance::TermRelevanceVector;
use crate::rpag::{check_ontologies, PageId, Rpag};

pub const IBAG_FORMAT: &str = "ibag/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IbagNode {
    pub p_id: PageId,
    pub url: String,
    pub pp_id: Option<PageId>,
    pub level: usize,
    pub mean_rel_val: f64,
    /// Per ontology; zero where unsupported.
    pub relevance_values: Vec<f64>,
    pub supported: Vec<bool>,
    /// Per ontology: the next supporting page along that ontology's chain.
    pub ont_links: Vec<Option<PageId>>,
    pub term_vectors: Vec<TermRelevanceVector>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Level {
    /// Sorted by mean relevance, descending, then by page id.
    pub pages: Vec<PageId>,
    /// Per ontology: position in `pages` of the first supporting page.
    pub heads: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ibag {
    pub ontologies: Vec<Ontology>,
    /// Indexed by `p_id`.
    pub nodes: Vec<IbagNode>,
    pub levels: Vec<Level>,
    /// Per ontology: first page of the whole chain.
    pub chain_heads: Vec<Option<PageId>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct IbagSection {
    pub format: String,
    pub ontology_digest: String,
    pub chain_heads: Vec<Option<PageId>>,
    pub levels: Vec<Level>,
    pub nodes: Vec<IbagNode>,
}

/// Closed interval of mean relevance values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelevanceRange {
    pub lo: f64,
    pub hi: f64,
}

impl RelevanceRange {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Argument(format!("invalid relevance range [{lo}, {hi}]")));
        }
        Ok(RelevanceRange { lo, hi })
    }

    /// `[0, +inf)`.
    pub fn unbounded() -> Self {
        RelevanceRange {
            lo: 0.0,
            hi: f64::INFINITY,
        }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

impl fmt::Display for RelevanceRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lo, self.hi)
    }
}

impl FromStr for RelevanceRange {
    type Err = Error;

    /// `lo:hi`, either side may be empty (`0` and `inf`), or `all`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("all") {
            return Ok(RelevanceRange::unbounded());
        }
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::Argument(format!("range {s:?} is not of the form lo:hi")))?;
        let num = |v: &str, default: f64| -> Result<f64> {
            let v = v.trim();
            if v.is_empty() {
                return Ok(default);
            }
            v.parse()
                .map_err(|_| Error::Argument(format!("range bound {v:?} is not a number")))
        };
        RelevanceRange::new(num(lo, 0.0)?, num(hi, f64::INFINITY)?)
    }
}

/// Pages picked by [`Ibag::select_by_range`], in traversal order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Selection {
    pub pages: Vec<PageId>,
    /// Nodes touched while walking the chain.
    pub visited: usize,
}

/// Level order: mean relevance descending, then page id ascending.
fn level_order(a: &IbagNode, b: &IbagNode) -> Ordering {
    b.mean_rel_val.total_cmp(&a.mean_rel_val).then(a.p_id.cmp(&b.p_id))
}

/// Mean of the relevance values over the supported ontologies.
pub fn mean_relevance(values: &[f64], supported: &[bool]) -> f64 {
    let (sum, n) = values
        .iter()
        .zip(supported)
        .filter(|(_, s)| **s)
        .fold((0.0, 0usize), |(sum, n), (v, _)| (sum + v, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

pub fn build_ibag(rpag: &Rpag) -> Ibag {
    let n_ont = rpag.ontologies.len();
    let mut nodes: Vec<IbagNode> = Vec::with_capacity(rpag.len());
    for src in &rpag.nodes {
        let pp_id = src.pp_ids.first().copied();
        // parents always precede children in page id order
        let level = pp_id.map_or(0, |p| nodes[p.index()].level + 1);
        let relevance_values: Vec<f64> = src.relevance.iter().map(|r| r.relevance_value).collect();
        let supported: Vec<bool> = src.relevance.iter().map(|r| r.supported).collect();
        nodes.push(IbagNode {
            p_id: src.p_id,
            url: src.url.clone(),
            pp_id,
            level,
            mean_rel_val: mean_relevance(&relevance_values, &supported),
            relevance_values,
            supported,
            ont_links: vec![None; n_ont],
            term_vectors: src.relevance.iter().map(|r| r.term_vector.clone()).collect(),
        });
    }

    let depth = nodes.iter().map(|n| n.level + 1).max().unwrap_or(0);
    let mut levels: Vec<Level> = (0..depth)
        .map(|_| Level {
            pages: Vec::new(),
            heads: vec![None; n_ont],
        })
        .collect();
    for n in &nodes {
        levels[n.level].pages.push(n.p_id);
    }
    for level in &mut levels {
        level
            .pages
            .sort_by(|a, b| level_order(&nodes[a.index()], &nodes[b.index()]));
    }

    let mut chain_heads = vec![None; n_ont];
    for (k, chain_head) in chain_heads.iter_mut().enumerate() {
        let mut prev: Option<PageId> = None;
        for level in &mut levels {
            for (pos, &p) in level.pages.iter().enumerate() {
                if !nodes[p.index()].supported[k] {
                    continue;
                }
                if level.heads[k].is_none() {
                    level.heads[k] = Some(pos);
                }
                match prev {
                    Some(q) => nodes[q.index()].ont_links[k] = Some(p),
                    None => *chain_head = Some(p),
                }
                prev = Some(p);
            }
        }
    }

    Ibag {
        ontologies: rpag.ontologies.clone(),
        nodes,
        levels,
        chain_heads,
    }
}

impl Ibag {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Number of pages.
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Number of levels.
    pub fn m(&self) -> usize {
        self.levels.len()
    }

    pub fn node(&self, p_id: PageId) -> &IbagNode {
        &self.nodes[p_id.index()]
    }

    pub fn ontology_index(&self, id: OntologyId) -> Result<usize> {
        self.ontologies
            .iter()
            .position(|o| o.id == id)
            .ok_or_else(|| Error::Argument(format!("unknown ontology id {id}")))
    }

    pub fn ontology(&self, id: OntologyId) -> Result<&Ontology> {
        Ok(&self.ontologies[self.ontology_index(id)?])
    }

    /// Smallest and largest mean relevance, `None` when empty.
    pub fn mean_bounds(&self) -> Option<RelevanceRange> {
        let mut it = self.nodes.iter().map(|n| n.mean_rel_val);
        let first = it.next()?;
        let (lo, hi) = it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v)));
        Some(RelevanceRange { lo, hi })
    }

    /// Walks `ontology`'s chain level by level from each level head and
    /// collects the pages whose mean relevance lies in `range`.
    ///
    /// Within a level the walk stops at the first page below `range.lo`,
    /// since the rest of the level is lower still.
    pub fn select_by_range(&self, range: RelevanceRange, ontology: OntologyId) -> Result<Selection> {
        let range = RelevanceRange::new(range.lo, range.hi)?;
        let k = self.ontology_index(ontology)?;
        let mut sel = Selection::default();
        for (depth, level) in self.levels.iter().enumerate() {
            let Some(head) = level.heads[k] else { continue };
            let mut cursor = Some(level.pages[head]);
            while let Some(p) = cursor {
                let node = &self.nodes[p.index()];
                if node.level != depth {
                    break;
                }
                sel.visited += 1;
                if node.mean_rel_val < range.lo {
                    break;
                }
                if node.mean_rel_val <= range.hi {
                    sel.pages.push(p);
                }
                cursor = node.ont_links[k];
            }
        }
        Ok(sel)
    }

    /// Number of pages touched to reach `p_id` from its level's head along
    /// `ontology`'s chain, counting `p_id` itself. `None` if the page does not
    /// support the ontology.
    pub fn visits_to_reach(&self, p_id: PageId, ontology: OntologyId) -> Result<Option<usize>> {
        let k = self.ontology_index(ontology)?;
        let target = self.node(p_id);
        if !target.supported[k] {
            return Ok(None);
        }
        let level = &self.levels[target.level];
        let mut cursor = level.heads[k].map(|h| level.pages[h]);
        let mut visits = 0;
        while let Some(p) = cursor {
            visits += 1;
            if p == p_id {
                return Ok(Some(visits));
            }
            cursor = self.nodes[p.index()].ont_links[k];
        }
        Err(Error::Validation(format!(
            "page {p_id} is missing from its ontology chain"
        )))
    }

    pub(crate) fn section(&self) -> IbagSection {
        IbagSection {
            format: IBAG_FORMAT.into(),
            ontology_digest: ontologies_digest(&self.ontologies),
            chain_heads: self.chain_heads.clone(),
            levels: self.levels.clone(),
            nodes: self.nodes.clone(),
        }
    }

    pub(crate) fn from_section(section: IbagSection, ontologies: Vec<Ontology>) -> Result<Self> {
        if section.format != IBAG_FORMAT {
            return Err(Error::Validation(format!(
                "unsupported index format {:?}",
                section.format
            )));
        }
        if section.ontology_digest != ontologies_digest(&ontologies) {
            return Err(Error::Validation("index was built against different ontologies".into()));
        }
        let ibag = Ibag {
            ontologies,
            nodes: section.nodes,
            levels: section.levels,
            chain_heads: section.chain_heads,
        };
        ibag.validate()?;
        Ok(ibag)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.section()).expect("index serializes")
    }

    pub fn from_json(text: &str, ontologies: Vec<Ontology>) -> Result<Self> {
        Ibag::from_section(serde_json::from_str(text)?, ontologies)
    }

    /// Checks every structural invariant: parent and level consistency,
    /// level ordering, head positions, chain threading, mean formula.
    pub fn validate(&self) -> Result<()> {
        check_ontologies(&self.ontologies).map_err(|e| Error::Validation(e.to_string()))?;
        let n_ont = self.ontologies.len();
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.chain_heads.len() != n_ont {
            return fail("chain head count does not match ontology count".into());
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if node.p_id.index() != i {
                return fail(format!("page ids are not dense: position {i} holds {}", node.p_id));
            }
            if [
                node.relevance_values.len(),
                node.supported.len(),
                node.ont_links.len(),
                node.term_vectors.len(),
            ]
            .iter()
            .any(|&l| l != n_ont)
            {
                return fail(format!(
                    "page {} has per-ontology fields of the wrong length",
                    node.p_id
                ));
            }
            for (k, ont) in self.ontologies.iter().enumerate() {
                if node.term_vectors[k].len() != ont.t() {
                    return fail(format!("page {} has a term vector of the wrong length", node.p_id));
                }
                if !node.supported[k] && node.relevance_values[k] != 0.0 {
                    return fail(format!(
                        "page {} stores relevance for an unsupported ontology",
                        node.p_id
                    ));
                }
            }
            if !node.supported.iter().any(|s| *s) {
                return fail(format!("page {} supports no ontology", node.p_id));
            }
            if node.mean_rel_val != mean_relevance(&node.relevance_values, &node.supported) {
                return fail(format!("page {} has an inconsistent mean relevance", node.p_id));
            }
            let expected_level = match node.pp_id {
                None => 0,
                Some(p) if p < node.p_id => self.nodes[p.index()].level + 1,
                Some(p) => return fail(format!("page {} has parent {p} that does not precede it", node.p_id)),
            };
            if node.level != expected_level {
                return fail(format!(
                    "page {} is on level {} instead of {expected_level}",
                    node.p_id, node.level
                ));
            }
        }

        let mut placed = HashSet::new();
        for (depth, level) in self.levels.iter().enumerate() {
            if level.pages.is_empty() || level.heads.len() != n_ont {
                return fail(format!("level {depth} is empty or malformed"));
            }
            for p in &level.pages {
                if p.index() >= self.nodes.len() || self.nodes[p.index()].level != depth || !placed.insert(*p) {
                    return fail(format!("level {depth} lists page {p} wrongly"));
                }
            }
            for w in level.pages.windows(2) {
                if level_order(self.node(w[0]), self.node(w[1])) != Ordering::Less {
                    return fail(format!("level {depth} is not sorted at pages {} and {}", w[0], w[1]));
                }
            }
            for k in 0..n_ont {
                let first = level.pages.iter().position(|p| self.node(*p).supported[k]);
                if level.heads[k] != first {
                    return fail(format!("level {depth} has a wrong head for ontology #{}", k + 1));
                }
            }
        }
        if placed.len() != self.nodes.len() {
            return fail("some pages are on no level".into());
        }

        for k in 0..n_ont {
            let expected: Vec<PageId> = self
                .levels
                .iter()
                .flat_map(|l| l.pages.iter().copied())
                .filter(|p| self.node(*p).supported[k])
                .collect();
            let mut walked = Vec::with_capacity(expected.len());
            let mut cursor = self.chain_heads[k];
            while let Some(p) = cursor {
                if walked.len() > expected.len() || p.index() >= self.nodes.len() {
                    return fail(format!("chain of ontology #{} is cyclic or broken", k + 1));
                }
                walked.push(p);
                cursor = self.node(p).ont_links[k];
            }
            if walked != expected {
                return fail(format!(
                    "chain of ontology #{} does not thread its supporting pages",
                    k + 1
                ));
            }
        }
        Ok(())
    }
}
