//! Per-page term bit patterns, query masks, and the XOR prediction filter.
//!
//! A page's pattern for an ontology has one bit per term (bit position =
//! term order) set when the page's term relevance strictly exceeds that
//! term's limit. A query mask sets the bits of the terms named in the search
//! string. A page is predicted when, for some masked position, the XOR of
//! page pattern and mask is 0 there, i.e. the page also has that bit.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ibag::Ibag;
use crate::ontology::{normalize_text, Ontology, OntologyId};
use crate::relevance::TermRelevanceVector;
use crate::rpag::PageId;

const WORD: usize = 64;

/// Fixed-length bit vector packed into 64-bit words. Position 0 is the first
/// (leftmost) bit of the textual form.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_positions(len: usize, positions: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVector::zeros(len);
        for p in positions {
            v.set(p);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, pos: usize) -> bool {
        assert!(pos < self.len, "bit {pos} out of range for length {}", self.len);
        self.words[pos / WORD] >> (pos % WORD) & 1 == 1
    }

    pub fn set(&mut self, pos: usize) {
        assert!(pos < self.len, "bit {pos} out of range for length {}", self.len);
        self.words[pos / WORD] |= 1 << (pos % WORD);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    fn check_len(&self, other: &BitVector) {
        assert_eq!(self.len, other.len, "bit vectors of different lengths");
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        self.check_len(other);
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    pub fn and(&self, other: &BitVector) -> BitVector {
        self.check_len(other);
        BitVector {
            len: self.len,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    /// Set positions in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + bit)
            })
        })
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut v = BitVector::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i),
                _ => return Err(Error::Argument(format!("{s:?} is not a bit string"))),
            }
        }
        Ok(v)
    }

    /// Hex digits, first position in the most significant bit of the first
    /// digit, zero-padded at the end.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut out = String::with_capacity(digits);
        for d in 0..digits {
            let mut nibble = 0u32;
            for j in 0..4 {
                let pos = d * 4 + j;
                if pos < self.len && self.get(pos) {
                    nibble |= 8 >> j;
                }
            }
            out.push(char::from_digit(nibble, 16).expect("nibble < 16"));
        }
        out
    }

    pub fn from_hex(hex: &str, len: usize) -> Result<Self> {
        if hex.len() != len.div_ceil(4) {
            return Err(Error::Validation(format!(
                "hex pattern {hex:?} does not encode {len} bits"
            )));
        }
        let mut v = BitVector::zeros(len);
        for (d, c) in hex.chars().enumerate() {
            let nibble = c
                .to_digit(16)
                .ok_or_else(|| Error::Validation(format!("{hex:?} is not hexadecimal")))?;
            for j in 0..4 {
                if nibble & (8 >> j) != 0 {
                    let pos = d * 4 + j;
                    if pos >= len {
                        return Err(Error::Validation(format!("hex pattern {hex:?} has padding bits set")));
                    }
                    v.set(pos);
                }
            }
        }
        Ok(v)
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

/// A page's pattern for one ontology.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitPattern<'a> {
    pub owner: PageId,
    pub ontology_id: OntologyId,
    pub bits: &'a BitVector,
}

/// Query mask: the ontology terms named in a search string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskBitPattern {
    pub ontology_id: OntologyId,
    pub bits: BitVector,
}

impl MaskBitPattern {
    /// Number of ontology terms in the search string.
    pub fn term_count(&self) -> usize {
        self.bits.count_ones()
    }
}

/// `page XOR mask`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultPattern {
    pub bits: BitVector,
}

impl ResultPattern {
    pub fn of(page: &BitVector, mask: &MaskBitPattern) -> Self {
        ResultPattern {
            bits: page.xor(&mask.bits),
        }
    }
}

/// Sets bit `i` when `term_vector[i]` is strictly above term `i`'s limit.
pub fn gen_webpage_bit_pattern(term_vector: &TermRelevanceVector, ontology: &Ontology) -> Result<BitVector> {
    if term_vector.len() != ontology.t() {
        return Err(Error::Argument(format!(
            "term vector has {} entries but ontology {} has {} terms",
            term_vector.len(),
            ontology.id,
            ontology.t()
        )));
    }
    let mut bits = BitVector::zeros(ontology.t());
    for term in &ontology.terms {
        if term_vector.get(term.bit_position) > term.term_relevance_limit {
            bits.set(term.bit_position);
        }
    }
    Ok(bits)
}

/// Patterns of one ontology, indexed by page id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyPatterns {
    pub ontology_id: OntologyId,
    pub t: usize,
    pub patterns: Vec<BitVector>,
}

/// All page patterns of an index, one per (page, ontology).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PatternStore {
    pub per_ontology: Vec<OntologyPatterns>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct PatternSection {
    pub ontology_id: OntologyId,
    pub t: usize,
    /// Hex per page id.
    pub patterns: Vec<String>,
}

impl PatternStore {
    /// Total number of stored patterns.
    pub fn len(&self) -> usize {
        self.per_ontology.iter().map(|o| o.patterns.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn for_ontology(&self, id: OntologyId) -> Option<&OntologyPatterns> {
        self.per_ontology.iter().find(|o| o.ontology_id == id)
    }

    pub fn get(&self, p_id: PageId, ontology_id: OntologyId) -> Option<BitPattern<'_>> {
        let bits = self.for_ontology(ontology_id)?.patterns.get(p_id.index())?;
        Some(BitPattern {
            owner: p_id,
            ontology_id,
            bits,
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = BitPattern<'_>> {
        self.per_ontology.iter().flat_map(|o| {
            o.patterns.iter().enumerate().map(move |(i, bits)| BitPattern {
                owner: PageId(i as u32),
                ontology_id: o.ontology_id,
                bits,
            })
        })
    }

    pub(crate) fn sections(&self) -> Vec<PatternSection> {
        self.per_ontology
            .iter()
            .map(|o| PatternSection {
                ontology_id: o.ontology_id,
                t: o.t,
                patterns: o.patterns.iter().map(BitVector::to_hex).collect(),
            })
            .collect()
    }

    pub(crate) fn from_sections(sections: Vec<PatternSection>) -> Result<Self> {
        let per_ontology = sections
            .into_iter()
            .map(|s| {
                let patterns = s
                    .patterns
                    .iter()
                    .map(|h| BitVector::from_hex(h, s.t))
                    .collect::<Result<_>>()?;
                Ok(OntologyPatterns {
                    ontology_id: s.ontology_id,
                    t: s.t,
                    patterns,
                })
            })
            .collect::<Result<_>>()?;
        Ok(PatternStore { per_ontology })
    }

    /// Checks the store against the index it was generated from.
    pub fn validate(&self, ibag: &Ibag) -> Result<()> {
        if self.per_ontology.len() != ibag.ontologies.len() {
            return Err(Error::Validation(
                "pattern store and index disagree on ontologies".into(),
            ));
        }
        for (k, (pats, ont)) in self.per_ontology.iter().zip(&ibag.ontologies).enumerate() {
            if pats.ontology_id != ont.id || pats.t != ont.t() || pats.patterns.len() != ibag.n() {
                return Err(Error::Validation(format!(
                    "patterns of ontology {} do not match the index",
                    ont.id
                )));
            }
            for (node, bits) in ibag.nodes.iter().zip(&pats.patterns) {
                if *bits != gen_webpage_bit_pattern(&node.term_vectors[k], ont)? {
                    return Err(Error::Validation(format!(
                        "stored pattern of page {} for ontology {} is stale",
                        node.p_id, ont.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Precomputes the pattern of every page for every ontology of the index.
pub fn gen_ibag_bit_patterns(ibag: &Ibag) -> PatternStore {
    let per_ontology = ibag
        .ontologies
        .iter()
        .enumerate()
        .map(|(k, ont)| OntologyPatterns {
            ontology_id: ont.id,
            t: ont.t(),
            patterns: ibag
                .nodes
                .iter()
                .map(|n| gen_webpage_bit_pattern(&n.term_vectors[k], ont).expect("index term vectors have length t"))
                .collect(),
        })
        .collect();
    PatternStore { per_ontology }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskOptions {
    /// Count a synonym in the search string as its term.
    pub use_synonyms: bool,
}

impl Default for MaskOptions {
    fn default() -> Self {
        MaskOptions { use_synonyms: true }
    }
}

pub fn gen_mask_bit_pattern(search_string: &str, ontology: &Ontology) -> MaskBitPattern {
    gen_mask_bit_pattern_with(search_string, ontology, MaskOptions::default())
}

pub fn gen_mask_bit_pattern_with(search_string: &str, ontology: &Ontology, opts: MaskOptions) -> MaskBitPattern {
    let tokens = normalize_text(search_string);
    let mut bits = BitVector::zeros(ontology.t());
    ontology.phrase_index().for_each_match(&tokens, |bit, synonym| {
        if opts.use_synonyms || !synonym {
            bits.set(bit);
        }
    });
    MaskBitPattern {
        ontology_id: ontology.id,
        bits,
    }
}

/// Walks the masked positions of `page XOR mask` in ascending order and
/// returns the first one that is 0, along with the number of positions
/// tested.
pub fn first_shared_position(page: &BitVector, mask: &BitVector) -> (Option<usize>, usize) {
    page.check_len(mask);
    let mut probes = 0;
    for (wi, (&a, &b)) in page.words.iter().zip(&mask.words).enumerate() {
        let mu = a ^ b;
        // masked positions where mu is 0
        let shared = b & !mu;
        if shared != 0 {
            let bit = shared.trailing_zeros();
            probes += (b & ((1u64 << bit) - 1)).count_ones() as usize + 1;
            return (Some(wi * WORD + bit as usize), probes);
        }
        probes += b.count_ones() as usize;
    }
    (None, probes)
}

/// Predicted pages, in selection order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Prediction {
    pub pages: Vec<PageId>,
    /// Pages whose pattern was tested.
    pub examined: usize,
    /// Masked bit positions tested across all pages.
    pub bit_probes: usize,
}

/// Filters `selected` down to the pages sharing a term with `mask`, stopping
/// once `result_limit` pages are found. An all-zero mask predicts nothing.
pub fn find_predicted_webpage_list(
    selected: &[PageId],
    patterns: &PatternStore,
    mask: &MaskBitPattern,
    result_limit: usize,
) -> Result<Prediction> {
    if result_limit == 0 {
        return Err(Error::Argument("result limit must be at least 1".into()));
    }
    let store = patterns
        .for_ontology(mask.ontology_id)
        .ok_or_else(|| Error::Argument(format!("no patterns for ontology {}", mask.ontology_id)))?;
    if store.t != mask.bits.len() {
        return Err(Error::Argument(format!(
            "mask has {} bits but ontology {} has {} terms",
            mask.bits.len(),
            mask.ontology_id,
            store.t
        )));
    }
    let mut out = Prediction::default();
    for &p in selected {
        let alpha = store
            .patterns
            .get(p.index())
            .ok_or_else(|| Error::Argument(format!("no pattern for page {p}")))?;
        out.examined += 1;
        let (hit, probes) = first_shared_position(alpha, &mask.bits);
        out.bit_probes += probes;
        if hit.is_some() {
            out.pages.push(p);
            if out.pages.len() >= result_limit {
                break;
            }
        }
    }
    Ok(out)
}
