//! Score a page against every bundled ontology.

use ibag_search::ontology::{builtin, normalize_text};
use ibag_search::relevance::page_relevance;

fn main() {
    let page = "<h1>ICC World Cup</h1><p>The batsman hit a century; the umpire and the referee \
                reviewed the catch. A great match and a close contest.</p>";
    let tokens = normalize_text(page);
    println!("{} tokens", tokens.len());
    for ont in builtin::all() {
        let r = page_relevance(&ont, &tokens);
        println!(
            "{:<9} relevance {:.2} supported {} (limit {})",
            ont.name,
            r.term_vector.total(),
            r.supported,
            ont.relevance_limit
        );
        for (t, v) in ont.terms.iter().zip(&r.term_vector.0) {
            if *v > 0.0 {
                println!("    {:<14} {:.2}", t.term, v);
            }
        }
    }
}
