//! Load an ontology from a weight table, a syntable and limits.

use ibag_search::ontology::{builtin, Limits, Ontology, OntologyId};

fn main() -> ibag_search::Result<()> {
    let weights = "cricket\t0.9\nwicket keeper\t0.8\numpire\t0.4\nbat\t0.2\nmatch\t0.1\n";
    let syntable = "Match\tcompetition, contest\nUmpire\tjudge, moderator, referee\n";
    let limits = Limits::parse(
        "relevance_limit=1.0\nterm_relevance_limit.default=0.25\nterm_relevance_limit.match=0.15\n",
        "inline",
    )?;
    let ont = Ontology::from_tables(OntologyId(1), "cricket", weights, syntable, &limits)?;

    println!("{} (id {}), relevance limit {}", ont.name, ont.id, ont.relevance_limit);
    for t in &ont.terms {
        println!(
            "  bit {}  {:<14} weight {:.1}  limit {:.2}  synonyms {:?}",
            t.bit_position, t.term, t.weight, t.term_relevance_limit, t.synonyms
        );
    }

    for o in builtin::all() {
        println!("bundled: {} with {} terms, digest {}", o.name, o.t(), &o.digest()[..12]);
    }
    Ok(())
}
