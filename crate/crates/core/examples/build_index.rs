//! Crawl a synthetic corpus into the page graph and the leveled index.

use ibag_search::corpus::{synth_corpus, SynthParams};
use ibag_search::ibag::build_ibag;
use ibag_search::ontology::builtin;
use ibag_search::rpag::build_rpag;

fn main() -> ibag_search::Result<()> {
    let onts = builtin::all();
    let corpus = synth_corpus(7, 300, &onts, &SynthParams::default());
    let rpag = build_rpag(&corpus, &onts)?;
    println!(
        "crawl: {} visited, {} relevant, {} dangling links",
        rpag.stats.visited, rpag.stats.relevant, rpag.stats.dangling_links
    );
    let multi = rpag.nodes.iter().filter(|n| n.pp_ids.len() > 1).count();
    println!("{multi} pages have more than one parent");

    let ibag = build_ibag(&rpag);
    ibag.validate()?;
    for (d, level) in ibag.levels.iter().enumerate() {
        let top = level.pages.first().map(|p| ibag.node(*p).mean_rel_val).unwrap_or(0.0);
        println!(
            "level {d}: {:>3} pages, best mean {top:.2}, heads {:?}",
            level.pages.len(),
            level.heads
        );
    }
    for (o, head) in onts.iter().zip(&ibag.chain_heads) {
        let mut len = 0;
        let mut cur = *head;
        let k = ibag.ontology_index(o.id)?;
        while let Some(p) = cur {
            len += 1;
            cur = ibag.node(p).ont_links[k];
        }
        println!("{} chain: {len} pages", o.name);
    }
    Ok(())
}
