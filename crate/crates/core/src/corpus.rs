//! Local document corpus with an explicit link graph, standing in for a live
//! crawl, plus a deterministic synthetic corpus generator for benchmarks.
//!
//! On disk a corpus is UTF-8 JSON lines:
//!
//! ```text
//! {"url":"https://a.example/","links":["https://b.example/"],"text":"<p>cricket</p>"}
//! ```

use std::collections::{HashMap, HashSet};
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{normalize_text, Ontology};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusDoc {
    pub url: String,
    #[serde(rename = "links")]
    pub out_links: Vec<String>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    docs: Vec<CorpusDoc>,
    by_url: HashMap<String, usize>,
    seeds: Vec<String>,
}

impl Corpus {
    /// Builds a corpus; urls must be unique and nonempty and every seed must
    /// name a document.
    pub fn new(docs: Vec<CorpusDoc>, seeds: Vec<String>) -> Result<Self> {
        let mut by_url = HashMap::with_capacity(docs.len());
        for (i, d) in docs.iter().enumerate() {
            if d.url.is_empty() {
                return Err(Error::Validation(format!("document #{} has an empty url", i + 1)));
            }
            if by_url.insert(d.url.clone(), i).is_some() {
                return Err(Error::Validation(format!("duplicate url {:?}", d.url)));
            }
        }
        let corpus = Corpus { docs, by_url, seeds };
        corpus.check_seeds()?;
        Ok(corpus)
    }

    fn check_seeds(&self) -> Result<()> {
        match self.seeds.iter().find(|s| !self.by_url.contains_key(*s)) {
            Some(missing) => Err(Error::Validation(format!("seed {missing:?} is not in the corpus"))),
            None => Ok(()),
        }
    }

    pub fn from_jsonl(text: &str, seeds: Vec<String>, source_name: &str) -> Result<Self> {
        let mut docs = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let doc: CorpusDoc =
                serde_json::from_str(line).map_err(|e| Error::parse(source_name, idx + 1, e.to_string()))?;
            docs.push(doc);
        }
        Corpus::new(docs, seeds)
    }

    /// Reads a JSON-lines corpus file.
    pub fn load(path: impl AsRef<Path>, seeds: Vec<String>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Corpus::from_jsonl(&text, seeds, &path.display().to_string())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for d in &self.docs {
            out.push_str(&serde_json::to_string(d).expect("document serializes"));
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_jsonl()).map_err(|e| Error::io(path, e))
    }

    /// Replaces the seed list.
    pub fn with_seeds(mut self, seeds: Vec<String>) -> Result<Self> {
        self.seeds = seeds;
        self.check_seeds()?;
        Ok(self)
    }

    pub fn docs(&self) -> &[CorpusDoc] {
        &self.docs
    }

    pub fn seeds(&self) -> &[String] {
        &self.seeds
    }

    pub fn get(&self, url: &str) -> Option<&CorpusDoc> {
        self.by_url.get(url).map(|&i| &self.docs[i])
    }

    pub(crate) fn position(&self, url: &str) -> Option<usize> {
        self.by_url.get(url).copied()
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Knobs for [`synth_corpus`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    /// Distinct filler words.
    pub noise_vocab_size: usize,
    /// Mean number of emitted units (words or ontology phrases) per document.
    pub doc_len_mean: usize,
    /// Probability that a unit of an on-topic document is an ontology phrase.
    pub term_hit_prob: f64,
    /// Extra random out-links per document, on top of the spanning tree.
    pub link_out_degree: usize,
    /// Share of documents that receive no ontology phrases at all.
    pub off_topic_fraction: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        SynthParams {
            noise_vocab_size: 500,
            doc_len_mean: 120,
            term_hit_prob: 0.05,
            link_out_degree: 3,
            off_topic_fraction: 0.3,
        }
    }
}

impl SynthParams {
    /// Parses `key=value` lines; absent keys keep their defaults.
    pub fn parse(text: &str, source_name: &str) -> Result<Self> {
        let mut p = SynthParams::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |msg: String| Error::parse(source_name, idx + 1, msg);
            let (key, value) = line.split_once('=').ok_or_else(|| bad("expected key=value".into()))?;
            let value = value.trim();
            let int = || {
                value
                    .parse::<usize>()
                    .map_err(|_| bad(format!("not an integer: {value:?}")))
            };
            let prob = || match value.parse::<f64>() {
                Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
                _ => Err(bad(format!("not a probability: {value:?}"))),
            };
            match key.trim() {
                "noise_vocab_size" => p.noise_vocab_size = int()?,
                "doc_len_mean" => p.doc_len_mean = int()?,
                "term_hit_prob" => p.term_hit_prob = prob()?,
                "link_out_degree" => p.link_out_degree = int()?,
                "off_topic_fraction" => p.off_topic_fraction = prob()?,
                other => return Err(bad(format!("unknown key {other:?}"))),
            }
        }
        Ok(p)
    }
}

const SYLLABLES: [&str; 20] = [
    "ba", "ce", "di", "fo", "gu", "ha", "je", "ki", "lo", "mu", "na", "pe", "qi", "ro", "su", "ta", "ve", "wi", "xo",
    "zu",
];

/// Filler words built from syllables, skipping any word that is also an
/// ontology token so noise never counts as a term occurrence.
fn noise_vocab(size: usize, ontologies: &[Ontology]) -> Vec<String> {
    let reserved: HashSet<String> = ontologies
        .iter()
        .flat_map(|o| o.terms.iter())
        .flat_map(|t| {
            t.phrases()
                .flat_map(|p| p.split(' '))
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut words = Vec::with_capacity(size);
    let mut n = 0usize;
    while words.len() < size {
        let mut w = String::new();
        let mut k = n;
        loop {
            w.push_str(SYLLABLES[k % SYLLABLES.len()]);
            k /= SYLLABLES.len();
            if k == 0 {
                break;
            }
        }
        // single-syllable words are too close to real vocabulary
        if w.len() > 2 && !reserved.contains(&w) {
            words.push(w);
        }
        n += 1;
    }
    words
}

/// Generates a deterministic corpus of `n_docs` documents seeded at the first.
///
/// Each document is off-topic with probability `off_topic_fraction`. An
/// on-topic document picks one focus ontology and a small focus subset of
/// its terms; each emitted unit is then an ontology phrase (term or synonym)
/// with probability `term_hit_prob`, drawn from the focus subset 80% of the
/// time and from any ontology otherwise. The link graph is a random spanning
/// tree rooted at document 0 plus `link_out_degree` random extra links per
/// document.
pub fn synth_corpus(rng_seed: u64, n_docs: usize, ontologies: &[Ontology], params: &SynthParams) -> Corpus {
    let n_docs = n_docs.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let vocab = noise_vocab(params.noise_vocab_size.max(1), ontologies);
    let url = |i: usize| format!("https://synth.example/p/{i}");

    let mut texts = Vec::with_capacity(n_docs);
    for _ in 0..n_docs {
        let on_topic =
            !ontologies.is_empty() && params.term_hit_prob > 0.0 && rng.random::<f64>() >= params.off_topic_fraction;
        let focus = if on_topic {
            let ont = &ontologies[rng.random_range(0..ontologies.len())];
            let size = 1 + rng.random_range(0..ont.t().div_ceil(3));
            let picks: Vec<usize> = rand::seq::index::sample(&mut rng, ont.t(), size.min(ont.t())).into_vec();
            Some((ont, picks))
        } else {
            None
        };
        let mean = params.doc_len_mean.max(1);
        let len = rng.random_range(mean.div_ceil(2)..=mean + mean / 2);
        let mut text = String::from("<p>");
        for unit in 0..len {
            if unit > 0 {
                text.push_str(if unit % 12 == 0 { ". " } else { " " });
            }
            let phrase_term = match &focus {
                Some((ont, picks)) if rng.random_bool(params.term_hit_prob) => Some(if rng.random_bool(0.8) {
                    &ont.terms[*picks.choose(&mut rng).expect("focus set nonempty")]
                } else {
                    let other = ontologies.choose(&mut rng).expect("ontologies nonempty");
                    other.terms.choose(&mut rng).expect("ontology has terms")
                }),
                _ => None,
            };
            match phrase_term {
                Some(term) => {
                    let phrases: Vec<&str> = term.phrases().collect();
                    text.push_str(phrases.choose(&mut rng).expect("term phrase"));
                }
                None => text.push_str(vocab.choose(&mut rng).expect("vocab nonempty")),
            }
        }
        text.push_str(".</p>");
        texts.push(text);
    }

    let mut links: Vec<Vec<usize>> = vec![Vec::new(); n_docs];
    for child in 1..n_docs {
        let parent = rng.random_range(0..child);
        links[parent].push(child);
    }
    if n_docs > 1 {
        for (from, out) in links.iter_mut().enumerate() {
            for _ in 0..params.link_out_degree {
                let to = rng.random_range(0..n_docs);
                if to != from && !out.contains(&to) {
                    out.push(to);
                }
            }
        }
    }

    let docs = texts
        .into_iter()
        .zip(links)
        .enumerate()
        .map(|(i, (text, out))| CorpusDoc {
            url: url(i),
            out_links: out.into_iter().map(url).collect(),
            text,
        })
        .collect();
    Corpus::new(docs, vec![url(0)]).expect("synthetic corpus is well formed")
}

/// Fraction of documents with at least one ontology phrase, used for sanity
/// checks on generated corpora.
pub fn on_topic_share(corpus: &Corpus, ontologies: &[Ontology]) -> f64 {
    let hit = corpus
        .docs()
        .iter()
        .filter(|d| {
            let tokens = normalize_text(&d.text);
            ontologies
                .iter()
                .any(|o| crate::relevance::page_relevance(o, &tokens).term_vector.total() > 0.0)
        })
        .count();
    hit as f64 / corpus.len().max(1) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::builtin;

    fn rec(url: &str, links: &[&str], text: &str) -> String {
        serde_json::json!({"url": url, "links": links, "text": text}).to_string()
    }

    #[test]
    fn loads_single_record() {
        let c = Corpus::from_jsonl(&rec("a", &["b"], "cricket"), vec!["a".into()], "c").unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.get("a").unwrap().out_links, ["b"]);
    }

    #[test]
    fn duplicate_url_rejected() {
        let text = format!("{}\n{}\n", rec("a", &[], "x"), rec("a", &[], "y"));
        assert!(matches!(
            Corpus::from_jsonl(&text, vec![], "c"),
            Err(Error::Validation(_))
        ));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = format!("{}\n{{\"url\": 3}}\n", rec("a", &[], "x"));
        let err = Corpus::from_jsonl(&text, vec![], "c").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn unknown_seed_rejected() {
        let err = Corpus::from_jsonl(&rec("a", &[], "x"), vec!["zz".into()], "c").unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn synth_is_deterministic() {
        let onts = builtin::all();
        let a = synth_corpus(7, 10, &onts, &SynthParams::default());
        let b = synth_corpus(7, 10, &onts, &SynthParams::default());
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        let c = synth_corpus(8, 10, &onts, &SynthParams::default());
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn zero_hit_probability_gives_irrelevant_pages() {
        let onts = builtin::all();
        let params = SynthParams {
            term_hit_prob: 0.0,
            ..SynthParams::default()
        };
        let c = synth_corpus(3, 50, &onts, &params);
        assert_eq!(on_topic_share(&c, &onts), 0.0);
    }

    #[test]
    fn synth_graph_reaches_everything_from_seed() {
        let onts = builtin::all();
        let c = synth_corpus(11, 300, &onts, &SynthParams::default());
        let mut seen = HashSet::new();
        let mut stack = vec![c.seeds()[0].clone()];
        while let Some(u) = stack.pop() {
            if seen.insert(u.clone()) {
                stack.extend(c.get(&u).unwrap().out_links.iter().cloned());
            }
        }
        assert_eq!(seen.len(), 300);
    }

    #[test]
    fn jsonl_round_trip() {
        let onts = builtin::all();
        let c = synth_corpus(5, 40, &onts, &SynthParams::default());
        let back = Corpus::from_jsonl(&c.to_jsonl(), c.seeds().to_vec(), "rt").unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn params_parse() {
        let p = SynthParams::parse("term_hit_prob=0.1\nlink_out_degree=5\n", "cfg").unwrap();
        assert_eq!(p.term_hit_prob, 0.1);
        assert_eq!(p.link_out_degree, 5);
        assert_eq!(p.doc_len_mean, SynthParams::default().doc_len_mean);
        assert!(SynthParams::parse("term_hit_prob=2", "cfg").is_err());
        assert!(SynthParams::parse("wat=2", "cfg").is_err());
    }
}
