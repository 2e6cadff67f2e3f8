//! Evaluation: harvest rate, before/after masking benchmarks over synthetic
//! corpora, and traversal-cost measurements.
//!
//! Harvest rate compares how strongly the search-string terms are present in
//! the returned pages against the whole range selection:
//!
//! ```text
//! score(page) = sum of the page's term relevance over the query's ontology terms
//! HR          = mean score over results / mean score over the selection
//! ```

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bitmask::{gen_mask_bit_pattern, MaskBitPattern};
use crate::corpus::{synth_corpus, SynthParams};
use crate::error::{Error, Result};
use crate::ibag::{build_ibag, Ibag, RelevanceRange};
use crate::index::IndexBundle;
use crate::ontology::{Limits, Ontology, OntologyId, TermSpec};
use crate::relevance::{PageRelevance, TermRelevanceVector};
use crate::rpag::{CrawlStats, PageId, Rpag, RpagNode};
use crate::search::{search_after_masking, search_before_masking, Mode, Query, SearchOutcome};

pub const DEFAULT_RESULT_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HarvestReport {
    /// Mean search-term score over the result pages.
    pub t_rel_sr: Option<f64>,
    /// Mean search-term score over the selected pages.
    pub t_rel_sw: Option<f64>,
    pub hr: Option<f64>,
}

/// Sum of `page`'s term relevance over the masked terms.
pub fn search_term_score(ibag: &Ibag, page: PageId, mask: &MaskBitPattern) -> Result<f64> {
    let k = ibag.ontology_index(mask.ontology_id)?;
    let tv = &ibag.node(page).term_vectors[k];
    Ok(mask.bits.ones().map(|i| tv.get(i)).sum())
}

fn mean_score(ibag: &Ibag, pages: &[PageId], mask: &MaskBitPattern) -> Result<Option<f64>> {
    if pages.is_empty() {
        return Ok(None);
    }
    let mut total = 0.0;
    for &p in pages {
        total += search_term_score(ibag, p, mask)?;
    }
    Ok(Some(total / pages.len() as f64))
}

/// Harvest rate of `result_pages` relative to `selected_pages`.
///
/// Undefined (`None`) when either set is empty or the selection scores 0.
pub fn harvest_rate(
    query: &Query,
    result_pages: &[PageId],
    selected_pages: &[PageId],
    ibag: &Ibag,
) -> Result<HarvestReport> {
    let selected: std::collections::HashSet<PageId> = selected_pages.iter().copied().collect();
    if let Some(p) = result_pages.iter().find(|p| !selected.contains(p)) {
        return Err(Error::Argument(format!("result page {p} is not part of the selection")));
    }
    let mask = gen_mask_bit_pattern(&query.search_string, ibag.ontology(query.ontology_id)?);
    let t_rel_sr = mean_score(ibag, result_pages, &mask)?;
    let t_rel_sw = mean_score(ibag, selected_pages, &mask)?;
    let hr = match (t_rel_sr, t_rel_sw) {
        (Some(sr), Some(sw)) if sw > 0.0 => Some(sr / sw),
        _ => None,
    };
    Ok(HarvestReport { t_rel_sr, t_rel_sw, hr })
}

pub fn harvest_of(query: &Query, outcome: &SearchOutcome, ibag: &Ibag) -> Result<HarvestReport> {
    harvest_rate(query, &outcome.result_pages(), &outcome.selected, ibag)
}

/// `[min, max]` of all mean relevance values, the range used for accuracy
/// runs. Unbounded for an empty index.
pub fn full_range(ibag: &Ibag) -> RelevanceRange {
    ibag.mean_bounds().unwrap_or_else(RelevanceRange::unbounded)
}

/// Both pipelines on one query.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub before: SearchOutcome,
    pub after: SearchOutcome,
    pub hr_before: HarvestReport,
    pub hr_after: HarvestReport,
}

pub fn compare(query: &Query, bundle: &IndexBundle) -> Result<Comparison> {
    let before = search_before_masking(query, &bundle.ibag)?;
    let after = search_after_masking(query, &bundle.ibag, &bundle.patterns)?;
    Ok(Comparison {
        hr_before: harvest_of(query, &before, &bundle.ibag)?,
        hr_after: harvest_of(query, &after, &bundle.ibag)?,
        before,
        after,
    })
}

/// One line of a query file before it is bound to an index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuerySpec {
    pub search_string: String,
    /// `None` means the index's full `[min, max]` range.
    pub range: Option<RelevanceRange>,
    pub limit: Option<usize>,
    /// `None` picks the ontology with the most terms in the search string.
    pub ontology: Option<OntologyId>,
}

impl QuerySpec {
    pub fn new(search_string: impl Into<String>) -> Self {
        QuerySpec {
            search_string: search_string.into(),
            range: None,
            limit: None,
            ontology: None,
        }
    }

    /// Binds the query to an index, filling in range, limit and ontology.
    pub fn resolve(&self, ibag: &Ibag) -> Result<Query> {
        let ontology = match self.ontology {
            Some(id) => id,
            None => best_ontology(&self.search_string, &ibag.ontologies)
                .ok_or_else(|| Error::Argument("the index has no ontologies".into()))?,
        };
        Query::new(
            self.search_string.clone(),
            self.range.unwrap_or_else(|| full_range(ibag)),
            ontology,
            self.limit.unwrap_or(DEFAULT_RESULT_LIMIT),
        )
    }
}

/// Ontology naming the most terms in `search_string`; first one on ties.
pub fn best_ontology(search_string: &str, ontologies: &[Ontology]) -> Option<OntologyId> {
    let mut best: Option<(usize, OntologyId)> = None;
    for o in ontologies {
        let hits = gen_mask_bit_pattern(search_string, o).term_count();
        if best.is_none_or(|(n, _)| hits > n) {
            best = Some((hits, o.id));
        }
    }
    best.map(|(_, id)| id)
}

/// Parses a query file: one search string per line, then optional
/// tab-separated columns `range` (`lo:hi`, `all`, or `-` for the full
/// range), `limit`, and `ontology id`. `#` starts a comment line.
pub fn parse_query_file(text: &str, source_name: &str) -> Result<Vec<QuerySpec>> {
    let mut specs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = raw.split('\t').map(str::trim).collect();
        if cols.len() > 4 {
            return Err(Error::parse(source_name, line_no, "too many columns"));
        }
        let mut spec = QuerySpec::new(cols[0]);
        let present = |i: usize| cols.get(i).filter(|c| !c.is_empty() && **c != "-");
        if let Some(r) = present(1) {
            spec.range = Some(
                r.parse()
                    .map_err(|e: Error| Error::parse(source_name, line_no, e.to_string()))?,
            );
        }
        if let Some(l) = present(2) {
            match l.parse::<usize>() {
                Ok(n) if n >= 1 => spec.limit = Some(n),
                _ => {
                    return Err(Error::parse(
                        source_name,
                        line_no,
                        format!("limit must be a positive integer, got {l:?}"),
                    ))
                }
            }
        }
        if let Some(o) = present(3) {
            let id = o
                .parse::<u32>()
                .map_err(|_| Error::parse(source_name, line_no, format!("bad ontology id {o:?}")))?;
            spec.ontology = Some(OntologyId(id));
        }
        specs.push(spec);
    }
    if specs.is_empty() {
        return Err(Error::Argument(format!("{source_name} contains no queries")));
    }
    Ok(specs)
}

pub fn load_query_file(path: impl AsRef<Path>) -> Result<Vec<QuerySpec>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_query_file(&text, &path.display().to_string())
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    /// Corpus sizes, ascending.
    pub sizes: Vec<usize>,
    pub queries: Vec<QuerySpec>,
    pub rng_seed: u64,
    pub ontologies: Vec<Ontology>,
    pub params: SynthParams,
    /// Timing repetitions per query; the median is kept.
    pub repetitions: usize,
    /// Run sizes concurrently. Timings are then not comparable.
    pub parallel: bool,
}

impl BenchConfig {
    pub fn new(sizes: Vec<usize>, queries: Vec<QuerySpec>, rng_seed: u64, ontologies: Vec<Ontology>) -> Self {
        BenchConfig {
            sizes,
            queries,
            rng_seed,
            ontologies,
            params: SynthParams::default(),
            repetitions: 5,
            parallel: false,
        }
    }
}

/// Aggregate for one (size, mode) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub mode: Mode,
    pub avg_count: f64,
    pub avg_elapsed_us: f64,
    pub avg_visited: f64,
    /// Mean over queries with a defined harvest rate.
    pub hr_mean: Option<f64>,
}

/// Per-query measurements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDiagnostics {
    pub size: usize,
    pub search_string: String,
    pub ontology_id: OntologyId,
    pub result_limit: usize,
    /// Ontology terms in the search string.
    pub p: usize,
    /// Pages selected by range.
    pub k: usize,
    /// Measured nanoseconds per page-pattern XOR.
    pub c_ns: f64,
    pub count_before: usize,
    pub count_after: usize,
    pub elapsed_before_us: f64,
    pub elapsed_after_us: f64,
    pub visited: usize,
    pub hr_before: Option<f64>,
    pub hr_after: Option<f64>,
}

impl QueryDiagnostics {
    /// `Some(true)` when after-masking harvest rate is at least the
    /// before-masking one, `None` when either is undefined.
    pub fn hr_improved(&self) -> Option<bool> {
        Some(self.hr_after? >= self.hr_before?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeInfo {
    pub size: usize,
    /// Pages in the index (n).
    pub pages: usize,
    /// Levels in the index (m).
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rng_seed: u64,
    pub sizes: Vec<SizeInfo>,
    pub rows: Vec<BenchRow>,
    pub queries: Vec<QueryDiagnostics>,
}

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn micros(d: Duration) -> f64 {
    d.as_secs_f64() * 1e6
}

/// Nanoseconds per XOR of a page pattern with the mask, over `pages`.
fn measure_bit_op(bundle: &IndexBundle, mask: &MaskBitPattern, pages: &[PageId]) -> f64 {
    let Some(store) = bundle.patterns.for_ontology(mask.ontology_id) else {
        return 0.0;
    };
    if pages.is_empty() {
        return 0.0;
    }
    let rounds = 2048usize.div_ceil(pages.len()).max(1);
    let start = Instant::now();
    let mut acc = 0u64;
    for _ in 0..rounds {
        for p in pages {
            let x = store.patterns[p.index()].xor(&mask.bits);
            acc ^= x.words().first().copied().unwrap_or(0);
        }
    }
    std::hint::black_box(acc);
    start.elapsed().as_nanos() as f64 / (rounds * pages.len()) as f64
}

fn timed(repetitions: usize, mut run: impl FnMut() -> Result<SearchOutcome>) -> Result<(SearchOutcome, Duration)> {
    let mut times = Vec::with_capacity(repetitions.max(1));
    let mut last = None;
    for _ in 0..repetitions.max(1) {
        let out = run()?;
        times.push(out.elapsed);
        last = Some(out);
    }
    Ok((last.expect("at least one repetition"), median(times)))
}

/// Corpus seed used for a given size, so each size is reproducible alone.
pub fn corpus_seed(rng_seed: u64, size: usize) -> u64 {
    rng_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(size as u64)
}

fn bench_size(cfg: &BenchConfig, size: usize) -> Result<(SizeInfo, Vec<BenchRow>, Vec<QueryDiagnostics>)> {
    let corpus = synth_corpus(corpus_seed(cfg.rng_seed, size), size, &cfg.ontologies, &cfg.params);
    let bundle = IndexBundle::build(&corpus, &cfg.ontologies)?;
    let ibag = &bundle.ibag;
    let mut diags = Vec::with_capacity(cfg.queries.len());
    for spec in &cfg.queries {
        let query = spec.resolve(ibag)?;
        let (before, t_before) = timed(cfg.repetitions, || search_before_masking(&query, ibag))?;
        let (after, t_after) = timed(cfg.repetitions, || search_after_masking(&query, ibag, &bundle.patterns))?;
        let mask = gen_mask_bit_pattern(&query.search_string, ibag.ontology(query.ontology_id)?);
        diags.push(QueryDiagnostics {
            size,
            search_string: query.search_string.clone(),
            ontology_id: query.ontology_id,
            result_limit: query.result_limit,
            p: mask.term_count(),
            k: before.selected_count(),
            c_ns: measure_bit_op(&bundle, &mask, &before.selected),
            count_before: before.results.len(),
            count_after: after.results.len(),
            elapsed_before_us: micros(t_before),
            elapsed_after_us: micros(t_after),
            visited: before.visited_count,
            hr_before: harvest_of(&query, &before, ibag)?.hr,
            hr_after: harvest_of(&query, &after, ibag)?.hr,
        });
    }

    let n = diags.len().max(1) as f64;
    let avg = |f: &dyn Fn(&QueryDiagnostics) -> f64| diags.iter().map(f).sum::<f64>() / n;
    let hr_mean = |f: &dyn Fn(&QueryDiagnostics) -> Option<f64>| {
        let vals: Vec<f64> = diags.iter().filter_map(f).collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    };
    let rows = vec![
        BenchRow {
            size,
            mode: Mode::BeforeMasking,
            avg_count: avg(&|d| d.count_before as f64),
            avg_elapsed_us: avg(&|d| d.elapsed_before_us),
            avg_visited: avg(&|d| d.visited as f64),
            hr_mean: hr_mean(&|d| d.hr_before),
        },
        BenchRow {
            size,
            mode: Mode::AfterMasking,
            avg_count: avg(&|d| d.count_after as f64),
            avg_elapsed_us: avg(&|d| d.elapsed_after_us),
            avg_visited: avg(&|d| d.visited as f64),
            hr_mean: hr_mean(&|d| d.hr_after),
        },
    ];
    let info = SizeInfo {
        size,
        pages: ibag.n(),
        levels: ibag.m(),
    };
    Ok((info, rows, diags))
}

/// For each size: generate a corpus, build the index, run every query in
/// both modes, and aggregate.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.queries.is_empty() {
        return Err(Error::Argument("the benchmark needs at least one query".into()));
    }
    if cfg.sizes.is_empty() || cfg.sizes.contains(&0) {
        return Err(Error::Argument("corpus sizes must be nonempty and positive".into()));
    }
    if cfg.sizes.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Argument("corpus sizes must be ascending".into()));
    }
    let per_size: Vec<_> = if cfg.parallel {
        cfg.sizes
            .par_iter()
            .map(|&s| bench_size(cfg, s))
            .collect::<Result<_>>()?
    } else {
        cfg.sizes.iter().map(|&s| bench_size(cfg, s)).collect::<Result<_>>()?
    };
    let mut report = BenchReport {
        rng_seed: cfg.rng_seed,
        sizes: Vec::new(),
        rows: Vec::new(),
        queries: Vec::new(),
    };
    for (info, rows, diags) in per_size {
        log::info!("size {}: {} pages on {} levels", info.size, info.pages, info.levels);
        report.sizes.push(info);
        report.rows.extend(rows);
        report.queries.extend(diags);
    }
    Ok(report)
}

impl BenchReport {
    pub const CSV_HEADER: &'static str = "size,mode,avg_count,avg_elapsed_us,avg_visited,hr_mean";

    /// One line per (size, mode).
    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let hr = r.hr_mean.map(|v| format!("{v:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{},{:.3},{:.3},{:.3},{}",
                r.size, r.mode, r.avg_count, r.avg_elapsed_us, r.avg_visited, hr
            );
        }
        out
    }

    /// One line per (size, query), with the harvest-rate direction.
    pub fn queries_csv(&self) -> String {
        let mut out =
            String::from("size,query,ontology,p,k,c_ns,count_before,count_after,hr_before,hr_after,hr_direction\n");
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for q in &self.queries {
            let direction = match q.hr_improved() {
                Some(true) => "after>=before",
                Some(false) => "after<before",
                None => "n/a",
            };
            let _ = writeln!(
                out,
                "{},\"{}\",{},{},{},{:.2},{},{},{},{},{}",
                q.size,
                q.search_string.replace('"', "\"\""),
                q.ontology_id,
                q.p,
                q.k,
                q.c_ns,
                q.count_before,
                q.count_after,
                opt(q.hr_before),
                opt(q.hr_after),
                direction
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Copy with every timing field zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> BenchReport {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.avg_elapsed_us = 0.0;
        }
        for q in &mut r.queries {
            q.c_ns = 0.0;
            q.elapsed_before_us = 0.0;
            q.elapsed_after_us = 0.0;
        }
        r
    }

    /// Writes `report.json`, `report.csv` and `queries.csv` into `dir`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            ("report.json", self.to_json()),
            ("report.csv", self.to_csv()),
            ("queries.csv", self.queries_csv()),
        ] {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Average visits to find one page when `n` pages spread evenly over `m`
/// levels and the i-th page of a level costs i visits: `(n/m + 1) / 2`.
pub fn closed_form_average_visits(n: usize, m: usize) -> f64 {
    (n as f64 / m as f64 + 1.0) / 2.0
}

/// Index with exactly `m_levels` levels of `per_level` pages each, all
/// supporting a single ontology.
pub fn layered_ibag(m_levels: usize, per_level: usize) -> Result<Ibag> {
    if m_levels == 0 || per_level == 0 {
        return Err(Error::Argument("levels and pages per level must be at least 1".into()));
    }
    let ont = Ontology::new(
        OntologyId(1),
        "layered",
        vec![TermSpec::new("x", 1.0, &[])],
        &Limits::default(),
    )?;
    let mut nodes = Vec::with_capacity(m_levels * per_level);
    for level in 0..m_levels {
        for i in 0..per_level {
            let p = level * per_level + i;
            // distinct values in a scrambled order so sorting does real work
            let value = 1.0 + ((p * 7919) % 10007) as f64 / 1000.0;
            nodes.push(RpagNode {
                p_id: PageId(p as u32),
                url: format!("layer{level}/page{i}"),
                pp_ids: if level == 0 {
                    Vec::new()
                } else {
                    vec![PageId(((level - 1) * per_level + i) as u32)]
                },
                relevance: vec![PageRelevance {
                    ontology_id: ont.id,
                    relevance_value: value,
                    supported: true,
                    term_vector: TermRelevanceVector(vec![value]),
                }],
            });
        }
    }
    let rpag = Rpag {
        ontologies: vec![ont],
        nodes,
        stats: CrawlStats::default(),
    };
    Ok(build_ibag(&rpag))
}

/// Builds an `m_levels` x `per_level` index and returns the mean number of
/// visits, over all pages, to reach a page from its level head.
pub fn traversal_cost_check(m_levels: usize, per_level: usize) -> Result<f64> {
    let ibag = layered_ibag(m_levels, per_level)?;
    let ont = ibag.ontologies[0].id;
    let mut total = 0usize;
    for node in &ibag.nodes {
        total += ibag
            .visits_to_reach(node.p_id, ont)?
            .expect("every page supports the only ontology");
    }
    Ok(total as f64 / ibag.n() as f64)
}

/// Instrumented cost of one after-masking query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSample {
    /// Pages selected by range (k).
    pub selected: usize,
    /// Chain nodes visited plus masked bit positions tested.
    pub operations: usize,
    pub elapsed: Duration,
}

/// Runs `search_string` unlimited over a sweep of ranges `[lo, +inf)` and
/// records selection size against instrumented work.
pub fn cost_profile(
    bundle: &IndexBundle,
    search_string: &str,
    ontology: OntologyId,
    lows: &[f64],
) -> Result<Vec<CostSample>> {
    lows.iter()
        .map(|&lo| {
            let q = Query::new(
                search_string,
                RelevanceRange::new(lo, f64::INFINITY)?,
                ontology,
                usize::MAX,
            )?;
            let out = search_after_masking(&q, &bundle.ibag, &bundle.patterns)?;
            Ok(CostSample {
                selected: out.selected_count(),
                operations: out.visited_count + out.bit_probes,
                elapsed: out.elapsed,
            })
        })
        .collect()
}

/// Least-squares line through `points`: `(slope, intercept, r_squared)`.
pub fn fit_line(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, intercept, r2))
}
