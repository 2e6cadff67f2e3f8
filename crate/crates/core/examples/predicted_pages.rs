//! Same query with and without the bit-mask filter.

use ibag_search::corpus::{synth_corpus, SynthParams};
use ibag_search::eval::full_range;
use ibag_search::index::IndexBundle;
use ibag_search::ontology::{builtin, OntologyId};
use ibag_search::search::{Mode, Query};

fn main() -> ibag_search::Result<()> {
    let onts = builtin::all();
    let bundle = IndexBundle::build(&synth_corpus(11, 400, &onts, &SynthParams::default()), &onts)?;
    let q = Query::new("ICC player rankings", full_range(&bundle.ibag), OntologyId(1), 10)?;
    for mode in [Mode::BeforeMasking, Mode::AfterMasking] {
        let out = bundle.search(&q, mode)?;
        println!(
            "{mode}: {} of {} selected pages ({} visited, {} bit probes)",
            out.results.len(),
            out.selected_count(),
            out.visited_count,
            out.bit_probes
        );
        for h in &out.results {
            println!("    {:<32} {:.3}", h.url, h.mean_rel_val);
        }
    }
    Ok(())
}
