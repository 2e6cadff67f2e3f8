//! Save a corpus and its index, load them back, and query the loaded index.

use ibag_search::corpus::{synth_corpus, Corpus, SynthParams};
use ibag_search::eval::QuerySpec;
use ibag_search::index::IndexBundle;
use ibag_search::ontology::builtin;
use ibag_search::search::Mode;

fn main() -> ibag_search::Result<()> {
    let dir = std::env::temp_dir().join(format!("ibag-search-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir).expect("temp dir");
    let onts = builtin::all();

    let corpus = synth_corpus(1, 200, &onts, &SynthParams::default());
    let corpus_path = dir.join("corpus.jsonl");
    corpus.save(&corpus_path)?;
    let corpus = Corpus::load(&corpus_path, corpus.seeds().to_vec())?;

    let index_path = dir.join("index.json");
    let bundle = IndexBundle::build(&corpus, &onts)?;
    bundle.save(&index_path)?;
    let loaded = IndexBundle::load(&index_path)?;
    let bytes = std::fs::read(&index_path).expect("index file");
    println!(
        "{} bytes, identical after reload: {}",
        bytes.len(),
        loaded.to_json().as_bytes() == bytes
    );

    let q = QuerySpec::new("fifa world cup").resolve(&loaded.ibag)?;
    let out = loaded.search(&q, Mode::AfterMasking)?;
    println!(
        "{:?} on ontology {}: {} results",
        q.search_string,
        q.ontology_id,
        out.results.len()
    );

    std::fs::remove_dir_all(&dir).ok();
    Ok(())
}
