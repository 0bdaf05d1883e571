mod bench;
mod load;

use std::fs;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use tgcsa::batch::{parse_batch, run_query, Query};
use tgcsa::synth::{self, ContactDist, GenSpec, OverlapPolicy};
use tgcsa::{build_index, parse_contacts, Codec, CodecParams, ContactKind, ContactSet, EdgeLogIndex};

#[derive(Parser)]
#[command(name = "tgcsa", version, about = "Compressed self-index for temporal graphs")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build an index from a contact file
    Build(BuildArgs),
    /// Answer a batch of queries, one result line per query
    Query(QueryArgs),
    /// Time a batch of queries per operation class
    Bench(BenchArgs),
    /// Generate a synthetic contact file
    #[command(subcommand)]
    Gen(GenCmd),
    /// Print dataset statistics for a contact file
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ThreeTermKind {
    /// Contacts stay active until the end of the lifetime
    Incremental,
    /// Contacts are active at their start instant only
    Point,
}

#[derive(Args)]
struct ContactInput {
    #[arg(long)]
    input: PathBuf,
    /// Terms per contact line
    #[arg(long, default_value_t = 4, value_parser = clap::value_parser!(u8).range(3..=4))]
    arity: u8,
    /// Meaning of three-term contacts
    #[arg(long, value_enum, default_value_t = ThreeTermKind::Incremental)]
    kind: ThreeTermKind,
}

impl ContactInput {
    fn kind(&self) -> ContactKind {
        match (self.arity, self.kind) {
            (4, _) => ContactKind::Interval,
            (_, ThreeTermKind::Incremental) => ContactKind::Incremental,
            (_, ThreeTermKind::Point) => ContactKind::Point,
        }
    }

    fn load(&self) -> Result<ContactSet> {
        let text = fs::read_to_string(&self.input).with_context(|| format!("reading {}", self.input.display()))?;
        if let Some(cols) = first_data_columns(&text) {
            if cols != usize::from(self.arity) {
                usage_error(format!(
                    "{} has {cols} columns per contact but --arity is {}",
                    self.input.display(),
                    self.arity
                ));
            }
        }
        parse_contacts(text.as_bytes(), self.kind(), None, None)
            .with_context(|| format!("parsing {}", self.input.display()))
    }
}

fn first_data_columns(text: &str) -> Option<usize> {
    text.lines().map(|l| l.split('#').next().unwrap_or("").split_whitespace().count()).find(|&n| n > 0)
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Baseline {
    None,
    Edgelog,
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    contacts: ContactInput,
    #[arg(long)]
    output: PathBuf,
    /// plain, vbyte-rle, vbyte-rle-select or huff-rle-opt
    #[arg(long, default_value = "vbyte-rle")]
    codec: Codec,
    /// Psi sampling period
    #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u16).range(1..))]
    tpsi: u16,
    /// Also build a baseline index, written next to the output with an `.edgelog` suffix
    #[arg(long, value_enum, default_value_t = Baseline::None)]
    baseline: Baseline,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long)]
    index: PathBuf,
    /// Query batch; standard input when absent
    #[arg(long)]
    queries: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    /// Timed passes over the batch
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    repeat: u32,
    /// Untimed passes before measuring
    #[arg(long, default_value_t = 1)]
    warmup: u32,
    /// Worker threads; more than one switches to wall-clock throughput timing
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

#[derive(Subcommand)]
enum GenCmd {
    /// Barabási–Albert graph with random contacts per edge
    Ba(BaArgs),
    /// Dense graph with few contacts per edge
    CommNet(PresetArgs),
    /// Larger graph with one contact per edge
    Powerlaw(PresetArgs),
}

#[derive(Args)]
struct GenOutput {
    /// Contact file; standard output when absent
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BaArgs {
    #[arg(long)]
    vertices: u32,
    /// Edges attached per new vertex
    #[arg(long)]
    m: u32,
    /// Contacts per edge: `uniform:K` or `pareto:ALPHA`
    #[arg(long, default_value = "uniform:1")]
    dist: ContactDist,
    #[arg(long)]
    lifetime: u32,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// `forbid` keeps the contacts of an edge disjoint, `allow` does not
    #[arg(long, default_value = "forbid")]
    overlap: OverlapPolicy,
    #[command(flatten)]
    out: GenOutput,
}

#[derive(Args)]
struct PresetArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[command(flatten)]
    out: GenOutput,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    contacts: ContactInput,
    /// Aligned table instead of key/value lines
    #[arg(long)]
    table: bool,
}

fn usage_error(msg: impl std::fmt::Display) -> ! {
    Cli::command().error(ErrorKind::ValueValidation, msg).exit()
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Build(args) => build(args),
        Cmd::Query(args) => query(args),
        Cmd::Bench(args) => bench(args),
        Cmd::Gen(cmd) => gen(cmd),
        Cmd::Stats(args) => stats(args),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn build(args: BuildArgs) -> Result<()> {
    if !args.codec.is_available() {
        usage_error(format!("codec {} is not compiled into this binary", args.codec));
    }
    if args.baseline == Baseline::Edgelog && args.contacts.arity != 4 {
        usage_error("the edgelog baseline needs four-term contacts");
    }
    let cs = args.contacts.load()?;
    let clock = Instant::now();
    let idx = build_index(&cs, CodecParams::new(args.codec, args.tpsi))?;
    let build_time = clock.elapsed();
    write_file(&args.output, &idx.to_bytes())?;

    let mut out = io::stdout().lock();
    writeln!(out, "output\t{}", args.output.display())?;
    writeln!(out, "contacts\t{}", idx.n())?;
    writeln!(out, "vertices\t{}", idx.vertices())?;
    writeln!(out, "lifetime\t{}", idx.lifetime())?;
    writeln!(out, "arity\t{}", idx.arity())?;
    writeln!(out, "sigma\t{}", idx.sigma())?;
    writeln!(out, "codec\t{}", idx.codec())?;
    writeln!(out, "t_psi\t{}", idx.t_psi())?;
    writeln!(out, "size_bits\t{}", idx.size_bits())?;
    writeln!(out, "bpc\t{:.3}", idx.bpc())?;
    writeln!(out, "build_ms\t{:.3}", build_time.as_secs_f64() * 1e3)?;

    if args.baseline == Baseline::Edgelog {
        let clock = Instant::now();
        let el = EdgeLogIndex::build(&cs)?;
        let build_time = clock.elapsed();
        let mut path = args.output.into_os_string();
        path.push(".edgelog");
        let path = PathBuf::from(path);
        write_file(&path, &el.to_bytes())?;
        writeln!(out, "edgelog_output\t{}", path.display())?;
        writeln!(out, "edgelog_size_bits\t{}", el.size_bits())?;
        writeln!(out, "edgelog_bpc\t{:.3}", el.bpc())?;
        writeln!(out, "edgelog_build_ms\t{:.3}", build_time.as_secs_f64() * 1e3)?;
    }
    Ok(())
}

fn read_batch(path: Option<&Path>) -> Result<Vec<Query>> {
    let text = match path {
        Some(p) => fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => {
            let mut s = String::new();
            io::stdin().read_to_string(&mut s).context("reading queries from standard input")?;
            s
        }
    };
    Ok(parse_batch(&text)?)
}

fn query(args: QueryArgs) -> Result<()> {
    let index = load::LoadedIndex::open(&args.index)?;
    let batch = read_batch(args.queries.as_deref())?;
    let mut out = BufWriter::new(io::stdout().lock());
    for q in &batch {
        match run_query(index.queries(), q) {
            Ok(answer) => writeln!(out, "{answer}")?,
            Err(e) => writeln!(out, "error: {e}")?,
        }
    }
    out.flush()?;
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let index = load::LoadedIndex::open(&args.index)?;
    let batch = read_batch(Some(&args.queries))?;
    let config = bench::BenchConfig { repeat: args.repeat, warmup: args.warmup, threads: args.threads as usize };
    let report = bench::run(index.queries(), &batch, &config);
    let mut out = io::stdout().lock();
    writeln!(out, "index\t{}", args.index.display())?;
    for (key, value) in index.describe() {
        writeln!(out, "{key}\t{value}")?;
    }
    write!(out, "{}", report.to_report(&config))?;
    Ok(())
}

fn emit_contacts(cs: &ContactSet, out: &GenOutput) -> Result<()> {
    let report = synth::dataset_stats(cs).to_report();
    match &out.output {
        Some(path) => {
            write_file(path, cs.to_text().as_bytes())?;
            print!("output\t{}\n{report}", path.display());
        }
        None => {
            print!("{}", cs.to_text());
            eprint!("{report}");
        }
    }
    Ok(())
}

fn gen(cmd: GenCmd) -> Result<()> {
    let (spec, out) = match cmd {
        GenCmd::Ba(a) => {
            if a.vertices <= a.m {
                usage_error(format!("--vertices ({}) must exceed --m ({})", a.vertices, a.m));
            }
            let spec = GenSpec {
                vertices: a.vertices,
                m: a.m,
                lifetime: a.lifetime,
                dist: a.dist,
                overlap: a.overlap,
                seed: a.seed,
            };
            (spec, a.out)
        }
        GenCmd::CommNet(a) => (GenSpec::comm_net(a.seed), a.out),
        GenCmd::Powerlaw(a) => (GenSpec::powerlaw(a.seed), a.out),
    };
    if let Err(e) = spec.validate() {
        usage_error(e);
    }
    emit_contacts(&synth::generate(&spec)?, &out)
}

fn stats(args: StatsArgs) -> Result<()> {
    let s = synth::dataset_stats(&args.contacts.load()?);
    print!("{}", if args.table { s.to_table() } else { s.to_report() });
    Ok(())
}
