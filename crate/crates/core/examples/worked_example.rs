//! A page whose 2nd and 5th terms exceed their limits, and a query naming
//! the 2nd term.

use ibag_search::bitmask::{first_shared_position, gen_mask_bit_pattern, gen_webpage_bit_pattern, ResultPattern};
use ibag_search::ontology::{normalize_text, Limits, Ontology, OntologyId, TermSpec};
use ibag_search::relevance::page_relevance;

fn main() -> ibag_search::Result<()> {
    let ont = Ontology::new(
        OntologyId(1),
        "cricket",
        vec![
            TermSpec::new("cricket", 0.9, &[]),
            TermSpec::new("wicket keeper", 0.8, &[]),
            TermSpec::new("umpire", 0.4, &["judge", "moderator", "referee"]),
            TermSpec::new("bat", 0.2, &[]),
            TermSpec::new("match", 0.1, &["competition", "contest"]),
            TermSpec::new("ball", 0.3, &["conglobate", "conglomerate"]),
            TermSpec::new("catch", 0.3, &["capture"]),
        ],
        &Limits::uniform(1.0, 0.25),
    )?;
    let page = "The wicket keeper kept through the match, a real competition and contest.";
    let rel = page_relevance(&ont, &normalize_text(page));
    println!("term values {:?}", rel.term_vector.0);

    let alpha = gen_webpage_bit_pattern(&rel.term_vector, &ont)?;
    let mask = gen_mask_bit_pattern("who is the best wicket keeper", &ont);
    let mu = ResultPattern::of(&alpha, &mask);
    println!("alpha {alpha}\nbeta  {}\nmu    {}", mask.bits, mu.bits);

    let (hit, probes) = first_shared_position(&alpha, &mask.bits);
    match hit {
        Some(p) => println!("position {} of mu is 0 after {probes} probe(s): page included", p + 1),
        None => println!("page discarded"),
    }
    Ok(())
}
