//! Per-class query timing.

use std::fmt::Write;
use std::thread;
use std::time::{Duration, Instant};

use cpu_time::ThreadTime;

use tgcsa::batch::{run_query, Query};
use tgcsa::TemporalQueries;

const CLASSES: [&str; 6] = ["direct", "reverse", "edge", "snapshot", "activated", "deactivated"];

pub struct BenchConfig {
    pub repeat: u32,
    pub warmup: u32,
    pub threads: usize,
}

pub struct ClassStats {
    pub class: &'static str,
    pub queries: usize,
    pub results: usize,
    pub errors: usize,
    /// Time of each timed pass over the class.
    pub passes: Vec<Duration>,
}

pub struct BenchReport {
    pub classes: Vec<ClassStats>,
}

/// Runs `queries` once and returns `(results, errors)`.
fn pass(index: &(dyn TemporalQueries + Sync), queries: &[Query]) -> (usize, usize) {
    queries.iter().fold((0, 0), |(res, err), q| match run_query(index, q) {
        Ok(a) => (res + a.count(), err),
        Err(_) => (res, err + 1),
    })
}

/// CPU time of the calling thread when single-threaded, wall time across workers otherwise.
fn timed_pass(index: &(dyn TemporalQueries + Sync), queries: &[Query], threads: usize) -> (Duration, usize, usize) {
    if threads <= 1 {
        let clock = ThreadTime::now();
        let (res, err) = pass(index, queries);
        return (clock.elapsed(), res, err);
    }
    let chunk = queries.len().div_ceil(threads).max(1);
    let clock = Instant::now();
    let (res, err) = thread::scope(|s| {
        let workers: Vec<_> = queries.chunks(chunk).map(|part| s.spawn(move || pass(index, part))).collect();
        workers
            .into_iter()
            .map(|w| w.join().expect("bench worker panicked"))
            .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
    });
    (clock.elapsed(), res, err)
}

pub fn run(index: &(dyn TemporalQueries + Sync), batch: &[Query], config: &BenchConfig) -> BenchReport {
    let classes = CLASSES
        .iter()
        .filter_map(|&class| {
            let queries: Vec<Query> = batch.iter().filter(|q| q.op.class() == class).copied().collect();
            if queries.is_empty() {
                return None;
            }
            for _ in 0..config.warmup {
                pass(index, &queries);
            }
            let mut stats = ClassStats { class, queries: queries.len(), results: 0, errors: 0, passes: Vec::new() };
            for _ in 0..config.repeat {
                let (time, res, err) = timed_pass(index, &queries, config.threads);
                stats.passes.push(time);
                (stats.results, stats.errors) = (res, err);
            }
            Some(stats)
        })
        .collect();
    BenchReport { classes }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let k = v.len() / 2;
    if v.len() % 2 == 1 {
        v[k]
    } else {
        (v[k - 1] + v[k]) / 2.0
    }
}

impl ClassStats {
    fn us_per_query(&self) -> Vec<f64> {
        self.passes.iter().map(|d| d.as_secs_f64() * 1e6 / self.queries as f64).collect()
    }

    fn mean_pass_us(&self) -> f64 {
        self.passes.iter().map(Duration::as_secs_f64).sum::<f64>() * 1e6 / self.passes.len() as f64
    }
}

impl BenchReport {
    pub fn to_report(&self, config: &BenchConfig) -> String {
        let mut out = String::new();
        let timer = if config.threads > 1 { "wall" } else { "thread-cpu" };
        let queries: usize = self.classes.iter().map(|c| c.queries).sum();
        writeln!(out, "queries\t{queries}").unwrap();
        writeln!(out, "classes\t{}", self.classes.len()).unwrap();
        writeln!(out, "repeat\t{}", config.repeat).unwrap();
        writeln!(out, "warmup\t{}", config.warmup).unwrap();
        writeln!(out, "threads\t{}", config.threads).unwrap();
        writeln!(out, "timer\t{timer}").unwrap();
        for c in &self.classes {
            let per_query = c.us_per_query();
            let mean = per_query.iter().sum::<f64>() / per_query.len() as f64;
            let per_result = if c.results == 0 { f64::NAN } else { c.mean_pass_us() / c.results as f64 };
            let k = c.class;
            writeln!(out, "{k}.queries\t{}", c.queries).unwrap();
            writeln!(out, "{k}.results\t{}", c.results).unwrap();
            writeln!(out, "{k}.errors\t{}", c.errors).unwrap();
            writeln!(out, "{k}.us_per_query_median\t{:.3}", median(per_query)).unwrap();
            writeln!(out, "{k}.us_per_query_mean\t{mean:.3}").unwrap();
            writeln!(out, "{k}.us_per_result\t{per_result:.3}").unwrap();
        }
        out
    }
}
