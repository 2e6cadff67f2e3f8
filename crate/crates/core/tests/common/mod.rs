//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::{HashMap, HashSet, VecDeque};
use std::sync::OnceLock;

use regex::Regex;

use ibag_search::corpus::Corpus;
use ibag_search::ibag::{Ibag, RelevanceRange};
use ibag_search::ontology::Ontology;
use ibag_search::rpag::PageId;

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[^>]*>").unwrap())
}

fn word_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"[\p{Alphabetic}\p{N}]+").unwrap())
}

pub fn tokens(raw: &str) -> Vec<String> {
    let stripped = tag_re().replace_all(raw, " ").to_lowercase();
    word_re().find_iter(&stripped).map(|m| m.as_str().to_owned()).collect()
}

/// Non-overlapping left-to-right matches, by substring search over the
/// space-joined token stream.
pub fn count(tokens: &[String], phrase: &str) -> usize {
    count_in(&haystack(tokens), phrase)
}

pub fn haystack(tokens: &[String]) -> String {
    format!(" {} ", tokens.join(" "))
}

pub fn count_in(hay: &str, phrase: &str) -> usize {
    let phrase_tokens = self::tokens(phrase);
    if phrase_tokens.is_empty() {
        return 0;
    }
    let needle = format!(" {} ", phrase_tokens.join(" "));
    let mut n = 0;
    let mut from = 0;
    while let Some(pos) = hay[from..].find(&needle) {
        n += 1;
        // the trailing space is the next match's leading space
        from += pos + needle.len() - 1;
    }
    n
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleScore {
    pub term_values: Vec<f64>,
    pub value: f64,
    pub supported: bool,
}

pub fn score(ontology: &Ontology, raw: &str) -> OracleScore {
    let hay = haystack(&tokens(raw));
    let term_values: Vec<f64> = ontology
        .terms
        .iter()
        .map(|t| {
            let hits: usize = std::iter::once(&t.term)
                .chain(&t.synonyms)
                .map(|p| count_in(&hay, p))
                .sum();
            t.weight * hits as f64
        })
        .collect();
    let total: f64 = term_values.iter().sum();
    let supported = total > ontology.relevance_limit;
    OracleScore {
        term_values,
        value: if supported { total } else { 0.0 },
        supported,
    }
}

/// Urls of relevant documents reachable from the seeds, where irrelevant
/// documents still pass links along.
pub fn reachable_relevant(corpus: &Corpus, ontologies: &[Ontology]) -> HashSet<String> {
    let mut seen: HashSet<&str> = HashSet::new();
    let mut queue: VecDeque<&str> = VecDeque::new();
    for s in corpus.seeds() {
        if seen.insert(s) {
            queue.push_back(s);
        }
    }
    let mut out = HashSet::new();
    while let Some(url) = queue.pop_front() {
        let Some(doc) = corpus.get(url) else { continue };
        if ontologies.iter().any(|o| score(o, &doc.text).supported) {
            out.insert(url.to_owned());
        }
        for l in &doc.out_links {
            if seen.insert(l) {
                queue.push_back(l);
            }
        }
    }
    out
}

/// Mask positions: terms any of whose phrases occur in the search string.
pub fn mask_terms(ontology: &Ontology, search: &str) -> Vec<usize> {
    let toks = tokens(search);
    ontology
        .terms
        .iter()
        .enumerate()
        .filter(|(_, t)| std::iter::once(&t.term).chain(&t.synonyms).any(|p| count(&toks, p) > 0))
        .map(|(i, _)| i)
        .collect()
}

/// Pages with mean relevance in range that support the ontology and have a
/// search term above its limit, ordered by level, then mean descending,
/// then page id; truncated to `limit`.
pub fn brute_force_predicted(
    ibag: &Ibag,
    corpus: &Corpus,
    ontology_pos: usize,
    search: &str,
    range: RelevanceRange,
    limit: usize,
) -> Vec<PageId> {
    let ont = &ibag.ontologies[ontology_pos];
    let terms = mask_terms(ont, search);
    let mut hits: Vec<_> = ibag
        .nodes
        .iter()
        .filter(|n| {
            let doc = corpus.get(&n.url).unwrap();
            let s = score(ont, &doc.text);
            s.supported
                && n.mean_rel_val >= range.lo
                && n.mean_rel_val <= range.hi
                && terms
                    .iter()
                    .any(|&i| s.term_values[i] > ont.terms[i].term_relevance_limit)
        })
        .collect();
    hits.sort_by(|a, b| {
        a.level
            .cmp(&b.level)
            .then(b.mean_rel_val.total_cmp(&a.mean_rel_val))
            .then(a.p_id.cmp(&b.p_id))
    });
    hits.into_iter().take(limit).map(|n| n.p_id).collect()
}

/// Oracle mean relevance over the supporting ontologies, from raw text.
pub fn mean_relevance(ontologies: &[Ontology], raw: &str) -> f64 {
    let vals: Vec<f64> = ontologies
        .iter()
        .map(|o| score(o, raw))
        .filter(|s| s.supported)
        .map(|s| s.value)
        .collect();
    if vals.is_empty() {
        0.0
    } else {
        vals.iter().sum::<f64>() / vals.len() as f64
    }
}

pub fn url_index(corpus: &Corpus) -> HashMap<String, usize> {
    corpus
        .docs()
        .iter()
        .enumerate()
        .map(|(i, d)| (d.url.clone(), i))
        .collect()
}
