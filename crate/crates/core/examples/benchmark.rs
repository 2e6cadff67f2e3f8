//! Before/after masking benchmark over growing synthetic corpora.

use ibag_search::eval::{parse_query_file, run_benchmark, BenchConfig};
use ibag_search::ontology::builtin;

fn main() -> ibag_search::Result<()> {
    let queries = parse_query_file(builtin::QUERIES, "bundled")?;
    let cfg = BenchConfig::new(vec![100, 200, 300, 400, 500], queries, 42, builtin::all());
    let report = run_benchmark(&cfg)?;
    print!("{}", report.to_csv());
    for s in &report.sizes {
        println!("# size {}: {} pages on {} levels", s.size, s.pages, s.levels);
    }
    Ok(())
}
