//! Domain ontologies: weighted terms, their synonyms, and relevance cut-offs.
//!
//! An ontology is loaded from two tab-separated tables plus a limits file:
//!
//! * weight table, `term<TAB>weight` with the weight in `[0, 1]`;
//! * syntable, `term<TAB>syn1,syn2,...` where every term must appear in the
//!   weight table;
//! * limits, see [`Limits`].
//!
//! Row order in the weight table fixes each term's bit position.

pub mod builtin;
mod limits;
mod text;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use limits::Limits;
pub use text::{contains_phrase, count_occurrences, normalize_phrase, normalize_text};

/// Identifier of an ontology, starting at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OntologyId(pub u32);

impl fmt::Display for OntologyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OntologyTerm {
    /// Normalized phrase.
    pub term: String,
    pub weight: f64,
    /// Normalized phrases, in syntable order.
    pub synonyms: Vec<String>,
    pub term_relevance_limit: f64,
    pub bit_position: usize,
}

impl OntologyTerm {
    /// The term phrase followed by its synonyms.
    pub fn phrases(&self) -> impl Iterator<Item = &str> {
        std::iter::once(self.term.as_str()).chain(self.synonyms.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Ontology {
    pub id: OntologyId,
    pub name: String,
    pub terms: Vec<OntologyTerm>,
    pub relevance_limit: f64,
    /// Built on first use from `terms`; not rebuilt if `terms` is modified
    /// afterwards.
    #[serde(skip)]
    phrase_index: OnceLock<PhraseIndex>,
}

impl PartialEq for Ontology {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.name == other.name
            && self.terms == other.terms
            && self.relevance_limit == other.relevance_limit
    }
}

/// Every term and synonym phrase, keyed by its first token.
#[derive(Debug, Clone, Default)]
pub(crate) struct PhraseIndex {
    by_first: HashMap<String, Vec<PhraseEntry>>,
}

#[derive(Debug, Clone)]
struct PhraseEntry {
    bit: usize,
    rest: Vec<String>,
    synonym: bool,
}

impl PhraseIndex {
    fn build(terms: &[OntologyTerm]) -> Self {
        let mut by_first: HashMap<String, Vec<PhraseEntry>> = HashMap::new();
        for t in terms {
            for (i, phrase) in t.phrases().enumerate() {
                let mut words = phrase.split(' ').filter(|w| !w.is_empty()).map(str::to_owned);
                let Some(first) = words.next() else { continue };
                by_first.entry(first).or_default().push(PhraseEntry {
                    bit: t.bit_position,
                    rest: words.collect(),
                    synonym: i > 0,
                });
            }
        }
        PhraseIndex { by_first }
    }

    /// Calls `hit(bit_position, is_synonym)` for each phrase occurrence in
    /// `tokens`.
    pub(crate) fn for_each_match<S: AsRef<str>>(&self, tokens: &[S], mut hit: impl FnMut(usize, bool)) {
        for (i, tok) in tokens.iter().enumerate() {
            let Some(entries) = self.by_first.get(tok.as_ref()) else {
                continue;
            };
            for e in entries {
                let tail = &tokens[i + 1..];
                if tail.len() >= e.rest.len() && tail.iter().zip(&e.rest).all(|(a, b)| a.as_ref() == b) {
                    hit(e.bit, e.synonym);
                }
            }
        }
    }
}

/// Raw term definition accepted by [`Ontology::new`].
#[derive(Debug, Clone)]
pub struct TermSpec {
    pub term: String,
    pub weight: f64,
    pub synonyms: Vec<String>,
}

impl TermSpec {
    pub fn new(term: &str, weight: f64, synonyms: &[&str]) -> Self {
        TermSpec {
            term: term.to_owned(),
            weight,
            synonyms: synonyms.iter().map(|s| (*s).to_owned()).collect(),
        }
    }
}

/// Text tables an ontology serializes back into.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyTables {
    pub weight_table: String,
    pub syntable: String,
    pub limits: String,
}

impl Ontology {
    /// Builds and validates an ontology. Terms keep their given order, which
    /// becomes their bit order.
    pub fn new(id: OntologyId, name: impl Into<String>, specs: Vec<TermSpec>, limits: &Limits) -> Result<Self> {
        if id.0 == 0 {
            return Err(Error::Validation("ontology id must be >= 1".into()));
        }
        if specs.is_empty() {
            return Err(Error::Validation("ontology has no terms".into()));
        }
        for (limit, what) in std::iter::once((limits.relevance_limit, "relevance limit".to_owned()))
            .chain(std::iter::once((limits.term_default, "default term limit".to_owned())))
            .chain(
                limits
                    .term_overrides
                    .iter()
                    .map(|(t, v)| (*v, format!("limit of {t:?}"))),
            )
        {
            if !limit.is_finite() || limit < 0.0 {
                return Err(Error::Validation(format!(
                    "{what} must be finite and >= 0, got {limit}"
                )));
            }
        }

        // phrase -> index of the term that owns it
        let mut owner: HashMap<String, usize> = HashMap::new();
        let mut terms: Vec<OntologyTerm> = Vec::with_capacity(specs.len());
        for (pos, spec) in specs.into_iter().enumerate() {
            let term = normalize_phrase(&spec.term);
            if term.is_empty() {
                return Err(Error::Validation(format!(
                    "term {:?} is empty after normalization",
                    spec.term
                )));
            }
            if !(0.0..=1.0).contains(&spec.weight) {
                return Err(Error::Validation(format!(
                    "weight of {term:?} must lie in [0, 1], got {}",
                    spec.weight
                )));
            }
            if let Some(&other) = owner.get(&term) {
                return Err(Error::Validation(if terms[other].term == term {
                    format!("duplicate term {term:?}")
                } else {
                    format!("term {term:?} is already a synonym of {:?}", terms[other].term)
                }));
            }
            owner.insert(term.clone(), pos);
            terms.push(OntologyTerm {
                term_relevance_limit: limits.term_limit(&term),
                term,
                weight: spec.weight,
                synonyms: Vec::new(),
                bit_position: pos,
            });
            let mut synonyms = Vec::with_capacity(spec.synonyms.len());
            for raw in &spec.synonyms {
                let syn = normalize_phrase(raw);
                if syn.is_empty() {
                    return Err(Error::Validation(format!("empty synonym for {:?}", terms[pos].term)));
                }
                if let Some(&other) = owner.get(&syn) {
                    return Err(Error::Validation(format!(
                        "synonym {syn:?} of {:?} is already used by {:?}",
                        terms[pos].term, terms[other].term
                    )));
                }
                owner.insert(syn.clone(), pos);
                synonyms.push(syn);
            }
            terms[pos].synonyms = synonyms;
        }

        let known: HashSet<&str> = terms.iter().map(|t| t.term.as_str()).collect();
        if let Some(unknown) = limits.term_overrides.keys().find(|t| !known.contains(t.as_str())) {
            return Err(Error::Validation(format!("limit given for unknown term {unknown:?}")));
        }

        Ok(Ontology {
            id,
            name: name.into(),
            terms,
            relevance_limit: limits.relevance_limit,
            phrase_index: OnceLock::new(),
        })
    }

    /// Parses a weight table and syntable given as text.
    pub fn from_tables(
        id: OntologyId,
        name: impl Into<String>,
        weight_table: &str,
        syntable: &str,
        limits: &Limits,
    ) -> Result<Self> {
        Self::from_named_tables(id, name, ("weight table", weight_table), ("syntable", syntable), limits)
    }

    fn from_named_tables(
        id: OntologyId,
        name: impl Into<String>,
        (weight_src, weight_table): (&str, &str),
        (syn_src, syntable): (&str, &str),
        limits: &Limits,
    ) -> Result<Self> {
        let mut specs: Vec<TermSpec> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (line_no, key, value) in tsv_rows(weight_table, weight_src)? {
            let term = normalize_phrase(key);
            if term.is_empty() {
                return Err(Error::parse(weight_src, line_no, "empty term"));
            }
            let weight: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(weight_src, line_no, format!("weight is not a number: {value:?}")))?;
            if !(0.0..=1.0).contains(&weight) {
                return Err(Error::Validation(format!(
                    "{weight_src}:{line_no}: weight of {term:?} must lie in [0, 1], got {weight}"
                )));
            }
            if index.insert(term.clone(), specs.len()).is_some() {
                return Err(Error::Validation(format!(
                    "{weight_src}:{line_no}: duplicate term {term:?}"
                )));
            }
            specs.push(TermSpec {
                term,
                weight,
                synonyms: Vec::new(),
            });
        }

        let mut seen_in_syntable = HashSet::new();
        for (line_no, key, value) in tsv_rows(syntable, syn_src)? {
            let term = normalize_phrase(key);
            let Some(&pos) = index.get(&term) else {
                return Err(Error::Validation(format!(
                    "{syn_src}:{line_no}: term {term:?} is not in the weight table"
                )));
            };
            if !seen_in_syntable.insert(pos) {
                return Err(Error::Validation(format!(
                    "{syn_src}:{line_no}: duplicate term {term:?}"
                )));
            }
            for raw in value.split(',') {
                if normalize_phrase(raw).is_empty() {
                    return Err(Error::parse(syn_src, line_no, "empty synonym"));
                }
                specs[pos].synonyms.push(raw.to_owned());
            }
        }

        Ontology::new(id, name, specs, limits)
    }

    /// Loads an ontology from a weight table file and a syntable file.
    pub fn load(
        id: OntologyId,
        name: impl Into<String>,
        weight_table_path: impl AsRef<Path>,
        syntable_path: impl AsRef<Path>,
        limits: &Limits,
    ) -> Result<Self> {
        let (wp, sp) = (weight_table_path.as_ref(), syntable_path.as_ref());
        let weights = std::fs::read_to_string(wp).map_err(|e| Error::io(wp, e))?;
        let syns = std::fs::read_to_string(sp).map_err(|e| Error::io(sp, e))?;
        Self::from_named_tables(
            id,
            name,
            (&wp.display().to_string(), &weights),
            (&sp.display().to_string(), &syns),
            limits,
        )
    }

    pub(crate) fn phrase_index(&self) -> &PhraseIndex {
        self.phrase_index.get_or_init(|| PhraseIndex::build(&self.terms))
    }

    /// Number of terms, which is also the bit pattern length.
    pub fn t(&self) -> usize {
        self.terms.len()
    }

    pub fn limits(&self) -> Limits {
        let mut limits = Limits::uniform(self.relevance_limit, 0.0);
        // Most common term limit becomes the default, the rest overrides.
        let mut freq: BTreeMap<u64, usize> = BTreeMap::new();
        for t in &self.terms {
            *freq.entry(t.term_relevance_limit.to_bits()).or_default() += 1;
        }
        if let Some((&bits, _)) = freq.iter().max_by_key(|(_, n)| **n) {
            limits.term_default = f64::from_bits(bits);
        }
        for t in &self.terms {
            if t.term_relevance_limit != limits.term_default {
                limits.term_overrides.insert(t.term.clone(), t.term_relevance_limit);
            }
        }
        limits
    }

    pub fn to_tables(&self) -> OntologyTables {
        let mut weight_table = String::new();
        let mut syntable = String::new();
        for t in &self.terms {
            let _ = writeln!(weight_table, "{}\t{}", t.term, t.weight);
            if !t.synonyms.is_empty() {
                let _ = writeln!(syntable, "{}\t{}", t.term, t.synonyms.join(","));
            }
        }
        OntologyTables {
            weight_table,
            syntable,
            limits: self.limits().to_text(),
        }
    }

    /// Hex SHA-256 over the canonical JSON form.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("ontology serializes");
        hex::encode(Sha256::digest(&json))
    }

    /// Checks invariants of an ontology that did not come through [`Ontology::new`].
    pub fn validate(&self) -> Result<()> {
        let specs = self
            .terms
            .iter()
            .map(|t| TermSpec {
                term: t.term.clone(),
                weight: t.weight,
                synonyms: t.synonyms.clone(),
            })
            .collect();
        let rebuilt = Ontology::new(self.id, self.name.clone(), specs, &self.limits())?;
        if rebuilt != *self {
            return Err(Error::Validation(format!(
                "ontology {} is not in canonical form (bit positions or phrases)",
                self.id
            )));
        }
        Ok(())
    }
}

/// Digest over a list of ontologies, used to tie persisted sections together.
pub fn ontologies_digest(ontologies: &[Ontology]) -> String {
    let json = serde_json::to_vec(ontologies).expect("ontologies serialize");
    hex::encode(Sha256::digest(&json))
}

/// Non-comment rows of a two-column TSV as `(line number, key, value)`.
fn tsv_rows<'a>(text: &'a str, source_name: &str) -> Result<Vec<(usize, &'a str, &'a str)>> {
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        match (cols.next(), cols.next(), cols.next()) {
            (Some(k), Some(v), None) => rows.push((idx + 1, k, v)),
            _ => {
                return Err(Error::parse(
                    source_name,
                    idx + 1,
                    "expected exactly two tab-separated columns",
                ))
            }
        }
    }
    Ok(rows)
}
