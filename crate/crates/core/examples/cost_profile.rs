//! Instrumented work of the masked search grows linearly with the number of
//! range-selected pages.

use ibag_search::corpus::{synth_corpus, SynthParams};
use ibag_search::eval::{cost_profile, fit_line};
use ibag_search::index::IndexBundle;
use ibag_search::ontology::{builtin, OntologyId};

fn main() -> ibag_search::Result<()> {
    let onts = builtin::all();
    let bundle = IndexBundle::build(&synth_corpus(5, 2000, &onts, &SynthParams::default()), &onts)?;
    let bounds = bundle.ibag.mean_bounds().expect("nonempty index");
    let lows: Vec<f64> = (0..20)
        .map(|i| bounds.hi - (bounds.hi - bounds.lo) * i as f64 / 19.0)
        .collect();
    let samples = cost_profile(&bundle, "cricket umpire", OntologyId(1), &lows)?;
    for s in &samples {
        println!("k={:>4}  operations={:>5}  {:?}", s.selected, s.operations, s.elapsed);
    }
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| (s.selected as f64, s.operations as f64))
        .collect();
    if let Some((slope, intercept, r2)) = fit_line(&points) {
        println!("operations = {slope:.3} k + {intercept:.1}, r^2 = {r2:.4}");
    }
    Ok(())
}
