//! Term and page relevance against an ontology.
//!
//! A term's relevance on a page is its weight times the number of times the
//! term or any of its synonyms occurs. A page's relevance is the sum over all
//! terms. The page supports the ontology when that sum is strictly greater
//! than the ontology's relevance limit; otherwise the stored value is zero.

use serde::{Deserialize, Serialize};

use crate::ontology::{count_occurrences, Ontology, OntologyId, OntologyTerm};

/// Per-term relevance values, indexed by bit position.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermRelevanceVector(pub Vec<f64>);

impl TermRelevanceVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, bit_position: usize) -> f64 {
        self.0[bit_position]
    }

    /// Sum in bit-position order.
    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRelevance {
    pub ontology_id: OntologyId,
    /// Zero unless `supported`.
    pub relevance_value: f64,
    pub supported: bool,
    pub term_vector: TermRelevanceVector,
}

pub fn term_relevance_value<S: AsRef<str>>(term: &OntologyTerm, tokens: &[S]) -> f64 {
    let hits: usize = term.phrases().map(|p| count_occurrences(tokens, p)).sum();
    term.weight * hits as f64
}

pub fn page_relevance<S: AsRef<str>>(ontology: &Ontology, tokens: &[S]) -> PageRelevance {
    let term_vector = TermRelevanceVector(ontology.terms.iter().map(|t| term_relevance_value(t, tokens)).collect());
    let raw = term_vector.total();
    let supported = raw > ontology.relevance_limit;
    PageRelevance {
        ontology_id: ontology.id,
        relevance_value: if supported { raw } else { 0.0 },
        supported,
        term_vector,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::{normalize_text, Limits, TermSpec};
    use proptest::prelude::*;

    fn cricket_table(limits: &Limits) -> Ontology {
        Ontology::new(
            OntologyId(1),
            "cricket",
            vec![
                TermSpec::new("cricket", 0.9, &[]),
                TermSpec::new("wicket keeper", 0.8, &[]),
                TermSpec::new("umpire", 0.4, &["judge", "moderator", "referee"]),
                TermSpec::new("bat", 0.2, &[]),
                TermSpec::new("match", 0.1, &["competition", "contest"]),
            ],
            limits,
        )
        .unwrap()
    }

    #[test]
    fn term_value_is_weight_times_count() {
        let o = cricket_table(&Limits::default());
        let tokens = normalize_text("Cricket is great. I love cricket!");
        assert!((term_relevance_value(&o.terms[0], &tokens) - 1.8).abs() < 1e-12);
    }

    #[test]
    fn synonyms_count_with_term_weight() {
        let o = cricket_table(&Limits::default());
        let tokens = normalize_text("the match was a close competition");
        assert!((term_relevance_value(&o.terms[4], &tokens) - 0.2).abs() < 1e-12);
    }

    #[test]
    fn empty_text_scores_zero() {
        let o = cricket_table(&Limits::default());
        let empty: Vec<String> = Vec::new();
        for t in &o.terms {
            assert_eq!(term_relevance_value(t, &empty), 0.0);
        }
        let page = page_relevance(&o, &empty);
        assert_eq!(page.relevance_value, 0.0);
        assert!(!page.supported);
        assert_eq!(page.term_vector.len(), 5);
    }

    fn single(limit: f64) -> Ontology {
        Ontology::new(
            OntologyId(1),
            "c",
            vec![TermSpec::new("cricket", 0.9, &[])],
            &Limits::uniform(limit, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn support_uses_strict_limit() {
        let tokens = normalize_text("cricket cricket");
        let p = page_relevance(&single(1.0), &tokens);
        assert!(p.supported);
        assert!((p.relevance_value - 1.8).abs() < 1e-12);

        let p = page_relevance(&single(2.0), &tokens);
        assert!(!p.supported);
        assert_eq!(p.relevance_value, 0.0);
        assert!((p.term_vector.get(0) - 1.8).abs() < 1e-12);

        let at_limit = page_relevance(&single(0.9), &normalize_text("cricket"));
        assert!(!at_limit.supported);
    }

    fn text_strategy() -> impl Strategy<Value = Vec<String>> {
        let vocab = vec![
            "cricket", "wicket", "keeper", "umpire", "referee", "bat", "match", "contest", "ball", "run",
        ];
        prop::collection::vec(prop::sample::select(vocab).prop_map(str::to_owned), 0..40)
    }

    proptest! {
        #[test]
        fn concatenation_adds_exactly(a in text_strategy(), b in text_strategy()) {
            // a separator token no phrase contains keeps counts additive
            let o = cricket_table(&Limits::default());
            let mut joined = a.clone();
            joined.push("zz".into());
            joined.extend(b.iter().cloned());
            let (pa, pb, pj) = (page_relevance(&o, &a), page_relevance(&o, &b), page_relevance(&o, &joined));
            for i in 0..o.t() {
                prop_assert!((pj.term_vector.get(i) - pa.term_vector.get(i) - pb.term_vector.get(i)).abs() < 1e-9);
            }
            prop_assert!(pj.term_vector.total() + 1e-9 >= pa.term_vector.total().max(pb.term_vector.total()));
        }

        #[test]
        fn weight_scaling_is_linear(tokens in text_strategy(), lambda in 0.05f64..1.0) {
            let base = cricket_table(&Limits::uniform(0.7, 0.0));
            let mut scaled = base.clone();
            for t in &mut scaled.terms {
                t.weight *= lambda;
            }
            scaled.relevance_limit *= lambda;
            let (p0, p1) = (page_relevance(&base, &tokens), page_relevance(&scaled, &tokens));
            for i in 0..base.t() {
                prop_assert!((p1.term_vector.get(i) - lambda * p0.term_vector.get(i)).abs() < 1e-9);
            }
            // exact ties at the limit may flip by rounding; skip those
            let margin = (p0.term_vector.total() - base.relevance_limit).abs();
            if margin > 1e-9 {
                prop_assert_eq!(p0.supported, p1.supported);
            }
        }

        #[test]
        fn vector_indexed_by_bit_position(tokens in text_strategy()) {
            let o = cricket_table(&Limits::default());
            let p = page_relevance(&o, &tokens);
            for t in &o.terms {
                prop_assert_eq!(p.term_vector.get(t.bit_position), term_relevance_value(t, &tokens));
            }
        }
    }
}
