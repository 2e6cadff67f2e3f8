//! Harvest rate of the bundled queries, before and after masking.

use ibag_search::corpus::{synth_corpus, SynthParams};
use ibag_search::eval::{compare, parse_query_file};
use ibag_search::index::IndexBundle;
use ibag_search::ontology::builtin;

fn main() -> ibag_search::Result<()> {
    let onts = builtin::all();
    let bundle = IndexBundle::build(&synth_corpus(3, 500, &onts, &SynthParams::default()), &onts)?;
    let show = |v: Option<f64>| v.map_or("   n/a".to_string(), |x| format!("{x:6.3}"));
    println!("{:<32} {:>6} {:>6}", "query", "before", "after");
    for spec in parse_query_file(builtin::QUERIES, "bundled")? {
        let q = spec.resolve(&bundle.ibag)?;
        let c = compare(&q, &bundle)?;
        println!(
            "{:<32} {} {}",
            q.search_string,
            show(c.hr_before.hr),
            show(c.hr_after.hr)
        );
    }
    Ok(())
}
