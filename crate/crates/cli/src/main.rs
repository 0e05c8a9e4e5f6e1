use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use wordshard::analysis::{load_stopwords, remove_stopwords};
use wordshard::bench::{run_bench, BenchConfig, BenchReport};
use wordshard::{
    distinctive_words, ingest_directory, merge_counts, run_wordcount, top_k, BlockConfig, CountMap,
    DistinctivenessReport, FrequencyTable, MapSpec, StageTimings, WordToken,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "wordshard",
    version,
    about = "Sharded word counting and blocked reductions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Count words across every text file in a directory.
    Wordcount(WordcountArgs),
    /// Time serial vs. blocked numeric map-reduce.
    Bench(BenchArgs),
    /// Compare word usage across labeled corpora.
    Compare(CompareArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Tsv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MapArg {
    Identity,
    Sqrt,
    Altharm,
}

impl From<MapArg> for MapSpec {
    fn from(m: MapArg) -> Self {
        match m {
            MapArg::Identity => MapSpec::Identity,
            MapArg::Sqrt => MapSpec::Sqrt,
            MapArg::Altharm => MapSpec::AltHarm,
        }
    }
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

#[derive(Args, Debug)]
struct WordcountArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "1", value_parser = positive)]
    workers: usize,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    /// Report per-stage timings on stderr (or to --timings-out).
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    timings_out: Option<PathBuf>,
    /// Keep only the K most frequent words.
    #[arg(long)]
    top: Option<usize>,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    map: MapArg,
    #[arg(long, default_value = "1000000")]
    n: usize,
    #[arg(long, default_value = "256", value_parser = positive)]
    block: usize,
    #[arg(long, default_value = "1", value_parser = positive)]
    workers: usize,
    #[arg(long, default_value = "3", value_parser = positive)]
    repeat: usize,
    #[arg(long, default_value = "0")]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Clone, Debug)]
struct CorpusArg {
    label: String,
    dir: PathBuf,
}

fn parse_corpus(s: &str) -> Result<CorpusArg, String> {
    match s.split_once('=') {
        Some((label, dir)) if !label.is_empty() && !dir.is_empty() => Ok(CorpusArg {
            label: label.to_owned(),
            dir: PathBuf::from(dir),
        }),
        _ => Err(format!("expected LABEL=DIR, got {s:?}")),
    }
}

#[derive(Args, Debug)]
struct CompareArgs {
    /// LABEL=DIR; give at least two.
    #[arg(long = "corpus", value_parser = parse_corpus)]
    corpora: Vec<CorpusArg>,
    #[arg(long, default_value = "1", value_parser = positive)]
    workers: usize,
    #[arg(long, default_value = "25")]
    top: usize,
    #[arg(long, default_value = "25")]
    distinct: usize,
    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

/// Usage problems found after argument parsing.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn stopword_set(path: Option<&PathBuf>) -> Result<HashSet<WordToken>> {
    match path {
        Some(p) => load_stopwords(p).with_context(|| format!("reading stop words {}", p.display())),
        None => Ok(HashSet::new()),
    }
}

fn count_dir(dir: &Path, label: &str, workers: usize) -> Result<(CountMap, StageTimings)> {
    let corpus = ingest_directory(dir, label).with_context(|| format!("corpus {label}"))?;
    let run =
        run_wordcount(&corpus.documents, workers).with_context(|| format!("corpus {label}"))?;
    Ok((run.counts, run.timings))
}

fn timings_tsv(t: &StageTimings) -> String {
    let mut s = String::new();
    for (stage, ns) in t.stages() {
        s.push_str(&format!("timing\t{stage}\t{ns}\n"));
    }
    s.push_str(&format!("timing\ttotal\t{}\n", t.total_ns));
    s
}

fn cmd_wordcount(args: WordcountArgs, out: &mut dyn Write) -> Result<()> {
    let stop = stopword_set(args.stopwords.as_ref())?;
    let (mut counts, timings) = count_dir(&args.input, "input", args.workers)?;
    remove_stopwords(&mut counts, &stop);
    let table = match args.top {
        Some(k) => top_k(&counts, "input", k),
        None => FrequencyTable::from_counts("input", &counts),
    };
    match args.format {
        Format::Tsv => out.write_all(table.to_tsv().as_bytes())?,
        Format::Json => {
            serde_json::to_writer(&mut *out, &table.rows)?;
            writeln!(out)?;
        }
    }
    let record = timings_tsv(&timings);
    if let Some(p) = &args.timings_out {
        fs::write(p, record).with_context(|| format!("writing {}", p.display()))?;
    } else if args.timings {
        eprint!("{record}");
    }
    Ok(())
}

fn bench_tsv(r: &BenchReport) -> String {
    let c = &r.config;
    let mut s = format!(
        "# bench map={} n={} block={} workers={} repeat={} seed={}\n",
        c.map,
        c.n,
        c.block.block_size(),
        c.block.workers(),
        c.repeat,
        c.seed
    );
    s.push_str("run\tserial_ns\tfold_ns\tcombine_ns\tblocked_ns\n");
    for run in &r.runs {
        s.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            run.run,
            run.serial_ns,
            run.blocked.fold_ns,
            run.blocked.combine_ns,
            run.blocked.total_ns
        ));
    }
    s.push_str(&format!(
        "median\t{}\t-\t-\t{}\n",
        r.serial_median_ns, r.blocked_median_ns
    ));
    s.push_str(&format!("serial_value\t{}\n", r.serial_value));
    s.push_str(&format!("blocked_value\t{}\n", r.blocked_value));
    s.push_str(&format!("relative_diff\t{:e}\n", r.relative_diff));
    s.push_str(&format!("agrees\t{}\n", r.agrees));
    s.push_str(&format!("speedup\t{:.3}\n", r.speedup));
    if let Some(e) = r.ln2_error {
        s.push_str(&format!("ln2_error\t{e:e}\n"));
    }
    s
}

fn cmd_bench(args: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let block = BlockConfig::new(args.block, args.workers)
        .ok_or_else(|| UsageError("block size and workers must be at least 1".into()))?;
    let report = run_bench(BenchConfig {
        map: args.map.into(),
        n: args.n,
        block,
        repeat: args.repeat,
        seed: args.seed,
    });
    match args.format {
        Format::Tsv => out.write_all(bench_tsv(&report).as_bytes())?,
        Format::Json => {
            serde_json::to_writer(&mut *out, &report)?;
            writeln!(out)?;
        }
    }
    if !report.agrees {
        bail!(
            "blocked result {} disagrees with serial {} (relative {:e})",
            report.blocked_value,
            report.serial_value,
            report.relative_diff
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct CorpusReport {
    label: String,
    total_words: u64,
    top: FrequencyTable,
    distinctive: DistinctivenessReport,
}

fn cmd_compare(args: CompareArgs, out: &mut dyn Write) -> Result<()> {
    if args.corpora.len() < 2 {
        return Err(UsageError(format!(
            "compare needs at least two --corpus LABEL=DIR arguments, got {}",
            args.corpora.len()
        ))
        .into());
    }
    let mut seen = HashSet::new();
    for c in &args.corpora {
        if !seen.insert(c.label.as_str()) {
            return Err(UsageError(format!("duplicate corpus label {:?}", c.label)).into());
        }
    }
    let stop = stopword_set(args.stopwords.as_ref())?;
    let mut counts = Vec::with_capacity(args.corpora.len());
    for c in &args.corpora {
        let (mut m, _) = count_dir(&c.dir, &c.label, args.workers)?;
        remove_stopwords(&mut m, &stop);
        counts.push(m);
    }

    let reports: Vec<CorpusReport> = args
        .corpora
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let others = merge_counts(
                counts
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != i)
                    .map(|(_, m)| m),
            );
            CorpusReport {
                label: c.label.clone(),
                total_words: counts[i].total(),
                top: top_k(&counts[i], &c.label, args.top),
                distinctive: distinctive_words(&c.label, &counts[i], &others, args.distinct),
            }
        })
        .collect();

    match args.format {
        Format::Tsv => {
            for r in &reports {
                writeln!(out, "# top {}", r.label)?;
                out.write_all(r.top.to_tsv().as_bytes())?;
                writeln!(out, "# distinct {}", r.label)?;
                out.write_all(r.distinctive.to_tsv().as_bytes())?;
            }
        }
        Format::Json => {
            serde_json::to_writer(&mut *out, &serde_json::json!({ "corpora": reports }))?;
            writeln!(out)?;
        }
    }
    Ok(())
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or("usage error");
            eprintln!(
                "wordshard: {}",
                one_line(first.trim_start_matches("error: "))
            );
            return ExitCode::from(EXIT_USAGE);
        }
    };

    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let result = match cli.command {
        Command::Wordcount(a) => cmd_wordcount(a, &mut out),
        Command::Bench(a) => cmd_bench(a, &mut out),
        Command::Compare(a) => cmd_compare(a, &mut out),
    }
    .and_then(|()| out.flush().map_err(Into::into));

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("wordshard: {}", one_line(&format!("{e:#}")));
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
