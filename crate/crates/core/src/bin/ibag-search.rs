use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ibag_search::corpus::{synth_corpus, Corpus, SynthParams};
use ibag_search::eval::{self, compare, harvest_of, parse_query_file, BenchConfig, HarvestReport, QuerySpec};
use ibag_search::ibag::RelevanceRange;
use ibag_search::index::IndexBundle;
use ibag_search::ontology::{builtin, Limits, Ontology, OntologyId};
use ibag_search::search::{Mode, SearchOutcome};
use ibag_search::{Error, Result};

/// Ontology-driven domain search over a leveled page index.
///
/// Set IBAG_SEARCH_LOG=info or debug for progress output.
#[derive(Parser)]
#[command(name = "ibag-search", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crawl a corpus and write an index file.
    Build(BuildArgs),
    /// Run queries against an index file.
    Query(QueryArgs),
    /// Before/after masking benchmark over synthetic corpora.
    Bench(BenchArgs),
    /// Harvest-rate comparison of a query file against an index.
    Eval(EvalArgs),
    /// Write a synthetic JSON-lines corpus.
    Synth(SynthArgs),
}

#[derive(clap::Args)]
struct BuildArgs {
    /// JSON-lines corpus: {"url": ..., "links": [...], "text": ...} per line.
    #[arg(long)]
    corpus: PathBuf,
    /// Crawl start page; repeatable. Defaults to the first document.
    #[arg(long = "seed-url")]
    seed_urls: Vec<String>,
    /// Weight table per ontology, in ontology id order.
    #[arg(long = "weights")]
    weights: Vec<PathBuf>,
    /// Syntable per ontology, paired with --weights.
    #[arg(long = "syntable")]
    syntables: Vec<PathBuf>,
    /// Limits file, once for all ontologies or once per ontology.
    #[arg(long = "limits")]
    limits: Vec<PathBuf>,
    /// Use the bundled cricket, football and tennis ontologies.
    #[arg(long, conflicts_with_all = ["weights", "syntables", "limits"])]
    builtin: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Before,
    After,
    Both,
}

#[derive(clap::Args)]
struct QueryArgs {
    index: PathBuf,
    /// Search string; required unless --repl.
    #[arg(long, required_unless_present = "repl")]
    search: Option<String>,
    /// Mean relevance range `lo:hi` or `all`. Defaults to the index's [min, max].
    #[arg(long)]
    range: Option<RelevanceRange>,
    /// Ontology id. Defaults to the one naming the most search terms.
    #[arg(long)]
    ontology: Option<u32>,
    #[arg(long, default_value_t = eval::DEFAULT_RESULT_LIMIT as u64, value_parser = clap::value_parser!(u64).range(1..))]
    limit: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::After)]
    mode: ModeArg,
    /// Read one query per line from standard input; tab-separated range,
    /// limit and ontology columns override the flags.
    #[arg(long)]
    repl: bool,
}

#[derive(clap::Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [100usize, 200, 300, 400, 500])]
    sizes: Vec<usize>,
    /// Query file; defaults to the bundled 20 queries.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Synthetic corpus parameters as key=value lines.
    #[arg(long)]
    synth_params: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    repetitions: usize,
    /// Run sizes concurrently (timings become unreliable).
    #[arg(long)]
    parallel: bool,
    /// Directory for report.json, report.csv and queries.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EvalArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: Option<PathBuf>,
}

#[derive(clap::Args)]
struct SynthArgs {
    #[arg(long)]
    docs: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    synth_params: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("IBAG_SEARCH_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Build(a) => cmd_build(a),
        Command::Query(a) => cmd_query(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_text(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn load_ontologies(a: &BuildArgs) -> Result<Vec<Ontology>> {
    if a.builtin {
        return Ok(builtin::all());
    }
    if a.weights.is_empty() {
        return Err(Error::Argument("give --weights/--syntable pairs or --builtin".into()));
    }
    if a.weights.len() != a.syntables.len() {
        return Err(Error::Argument(format!(
            "{} weight tables but {} syntables",
            a.weights.len(),
            a.syntables.len()
        )));
    }
    if a.limits.len() > 1 && a.limits.len() != a.weights.len() {
        return Err(Error::Argument("give --limits once or once per ontology".into()));
    }
    let limits: Vec<Limits> = a.limits.iter().map(Limits::load).collect::<Result<_>>()?;
    let mut onts = Vec::with_capacity(a.weights.len());
    for (i, (w, s)) in a.weights.iter().zip(&a.syntables).enumerate() {
        let lim = match limits.len() {
            0 => Limits::default(),
            1 => limits[0].clone(),
            _ => limits[i].clone(),
        };
        let name = w
            .parent()
            .and_then(|p| p.file_name())
            .or_else(|| w.file_stem())
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| format!("ontology{}", i + 1));
        onts.push(Ontology::load(OntologyId(i as u32 + 1), name, w, s, &lim)?);
    }
    Ok(onts)
}

fn cmd_build(a: BuildArgs) -> Result<()> {
    let ontologies = load_ontologies(&a)?;
    let mut corpus = Corpus::load(&a.corpus, a.seed_urls.clone())?;
    if corpus.seeds().is_empty() {
        let first = corpus
            .docs()
            .first()
            .map(|d| d.url.clone())
            .ok_or_else(|| Error::Validation("the corpus has no documents".into()))?;
        corpus = corpus.with_seeds(vec![first])?;
    }
    let bundle = IndexBundle::build(&corpus, &ontologies)?;
    bundle.save(&a.out)?;
    let s = bundle.summary();
    if bundle.is_empty() {
        eprintln!("warning: empty index, no page in the corpus is relevant to any ontology");
    }
    println!(
        "visited {} pages; {} relevant nodes on {} levels; {} bit patterns; wrote {}",
        s.visited,
        s.pages,
        s.levels,
        s.patterns,
        a.out.display()
    );
    Ok(())
}

fn print_outcome(out: &mut impl Write, o: &SearchOutcome) -> std::io::Result<()> {
    writeln!(
        out,
        "== {} masking: {} results, {} selected, {} visited",
        o.mode,
        o.results.len(),
        o.selected_count(),
        o.visited_count
    )?;
    for h in &o.results {
        writeln!(out, "{}\t{:.6}", h.url, h.mean_rel_val)?;
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_else(|| "n/a".into())
}

fn print_harvest(out: &mut impl Write, mode: Mode, h: &HarvestReport) -> std::io::Result<()> {
    writeln!(
        out,
        "harvest {mode}: HR={} T_RelSR={} T_RelSW={}",
        fmt_opt(h.hr),
        fmt_opt(h.t_rel_sr),
        fmt_opt(h.t_rel_sw)
    )
}

fn run_query(bundle: &IndexBundle, spec: &QuerySpec, mode: ModeArg, out: &mut impl Write) -> Result<()> {
    let query = spec.resolve(&bundle.ibag)?;
    let io = |e: std::io::Error| Error::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    };
    writeln!(
        out,
        "# {:?} range {} ontology {}",
        query.search_string, query.range, query.ontology_id
    )
    .map_err(io)?;
    match mode {
        ModeArg::Before | ModeArg::After => {
            let m = if mode == ModeArg::Before {
                Mode::BeforeMasking
            } else {
                Mode::AfterMasking
            };
            let o = bundle.search(&query, m)?;
            print_outcome(out, &o).map_err(io)?;
            print_harvest(out, m, &harvest_of(&query, &o, &bundle.ibag)?).map_err(io)?;
        }
        ModeArg::Both => {
            let c = compare(&query, bundle)?;
            print_outcome(out, &c.before).map_err(io)?;
            print_outcome(out, &c.after).map_err(io)?;
            print_harvest(out, Mode::BeforeMasking, &c.hr_before).map_err(io)?;
            print_harvest(out, Mode::AfterMasking, &c.hr_after).map_err(io)?;
        }
    }
    Ok(())
}

fn cmd_query(a: QueryArgs) -> Result<()> {
    let bundle = IndexBundle::load(&a.index)?;
    if bundle.is_empty() {
        eprintln!("warning: empty index");
    }
    let defaults = |search: &str| QuerySpec {
        search_string: search.to_owned(),
        range: a.range,
        limit: Some(a.limit as usize),
        ontology: a.ontology.map(OntologyId),
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Some(s) = &a.search {
        run_query(&bundle, &defaults(s), a.mode, &mut out)?;
    }
    if a.repl {
        for (i, line) in std::io::stdin().lock().lines().enumerate() {
            let line = line.map_err(|source| Error::Io {
                path: PathBuf::from("<stdin>"),
                source,
            })?;
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let parsed = parse_query_file(&line, &format!("stdin:{}", i + 1)).map(|mut v| v.remove(0));
            let result = parsed.and_then(|p| {
                let d = defaults(&p.search_string);
                let spec = QuerySpec {
                    range: p.range.or(d.range),
                    limit: p.limit.or(d.limit),
                    ontology: p.ontology.or(d.ontology),
                    ..d
                };
                run_query(&bundle, &spec, a.mode, &mut out)
            });
            // a bad line should not end the session
            if let Err(e) = result {
                if e.is_io() {
                    return Err(e);
                }
                eprintln!("error: {e}");
            }
        }
    }
    Ok(())
}

fn load_queries(path: Option<&Path>) -> Result<Vec<QuerySpec>> {
    match path {
        Some(p) => eval::load_query_file(p),
        None => parse_query_file(builtin::QUERIES, "bundled queries"),
    }
}

fn load_params(path: Option<&Path>) -> Result<SynthParams> {
    match path {
        Some(p) => SynthParams::parse(&read_text(p)?, &p.display().to_string()),
        None => Ok(SynthParams::default()),
    }
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let mut cfg = BenchConfig::new(a.sizes, load_queries(a.queries.as_deref())?, a.seed, builtin::all());
    cfg.params = load_params(a.synth_params.as_deref())?;
    cfg.repetitions = a.repetitions.max(1);
    cfg.parallel = a.parallel;
    let report = eval::run_benchmark(&cfg)?;
    report.write_to(&a.out)?;
    print!("{}", report.to_csv());
    let judged: Vec<bool> = report.queries.iter().filter_map(|q| q.hr_improved()).collect();
    let improved = judged.iter().filter(|b| **b).count();
    println!(
        "harvest rate after>=before on {improved} of {} comparable queries; wrote {}",
        judged.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let bundle = IndexBundle::load(&a.index)?;
    let specs = load_queries(a.queries.as_deref())?;
    println!("query\tontology\tselected\tbefore\tafter\thr_before\thr_after\tdirection");
    let (mut improved, mut judged) = (0usize, 0usize);
    for spec in &specs {
        let q = spec.resolve(&bundle.ibag)?;
        let c = compare(&q, &bundle)?;
        let direction = match (c.hr_before.hr, c.hr_after.hr) {
            (Some(b), Some(af)) => {
                judged += 1;
                if af >= b {
                    improved += 1;
                    "after>=before"
                } else {
                    "after<before"
                }
            }
            _ => "n/a",
        };
        println!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            q.search_string,
            q.ontology_id,
            c.before.selected_count(),
            c.before.results.len(),
            c.after.results.len(),
            fmt_opt(c.hr_before.hr),
            fmt_opt(c.hr_after.hr),
            direction
        );
    }
    println!("# after>=before on {improved} of {judged} comparable queries");
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    if a.docs == 0 {
        return Err(Error::Argument("--docs must be at least 1".into()));
    }
    let corpus = synth_corpus(
        a.seed,
        a.docs,
        &builtin::all(),
        &load_params(a.synth_params.as_deref())?,
    );
    write_text(&a.out, &corpus.to_jsonl())?;
    println!("wrote {} documents to {}", corpus.len(), a.out.display());
    Ok(())
}
