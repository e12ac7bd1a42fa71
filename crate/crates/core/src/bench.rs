//! Benchmark harness: phase timings averaged over trials, speedup against a serial
//! baseline measured in the same process, and a Betti cross-check between algorithms.

use std::io::Write;

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::homology::BettiNumbers;
use crate::parallel::{reset_peak_memory, run, Algorithm, PipelineOptions, RunReport};

pub const CSV_HEADER: &str = "input,algorithm,num_partitions,num_threads,graph_balance_ratio,\
cover_balance_ratio,edgecut,blowup_factor,build_blowup,re-filter,persistence,speedup,max_memory_mb";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub input: String,
    pub algorithm: Algorithm,
    pub num_partitions: usize,
    pub num_threads: usize,
    pub graph_balance_ratio: Option<f64>,
    pub cover_balance_ratio: Option<f64>,
    pub edgecut: Option<usize>,
    pub blowup_factor: Option<f64>,
    /// Mean seconds per phase.
    pub cover: f64,
    pub build_blowup: Option<f64>,
    pub refilter: Option<f64>,
    pub persistence: f64,
    pub speedup: f64,
    pub max_memory_mb: Option<f64>,
    pub betti: BettiNumbers,
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_f(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl BenchRow {
    pub fn csv_line(&self) -> String {
        [
            self.input.clone(),
            self.algorithm.to_string(),
            self.num_partitions.to_string(),
            self.num_threads.to_string(),
            opt_f(self.graph_balance_ratio),
            opt_f(self.cover_balance_ratio),
            opt(self.edgecut),
            opt_f(self.blowup_factor),
            opt_f(self.build_blowup),
            opt_f(self.refilter),
            format!("{:.6}", self.persistence),
            format!("{:.4}", self.speedup),
            opt(self.max_memory_mb.map(|m| format!("{m:.1}"))),
        ]
        .join(",")
    }
}

pub fn write_csv<W: Write>(rows: &[BenchRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{}", r.csv_line())?;
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub worker_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

fn summarize(input: &str, reports: &[RunReport], serial_persistence: f64) -> BenchRow {
    let first = &reports[0];
    let stats = first.cover_stats.as_ref();
    let persistence = mean(reports.iter().map(|r| r.times.persistence));
    let optional_mean =
        |f: fn(&RunReport) -> Option<f64>| f(first).map(|_| mean(reports.iter().filter_map(f)));
    BenchRow {
        input: input.to_string(),
        algorithm: first.algorithm,
        num_partitions: first.parts,
        num_threads: first.workers,
        graph_balance_ratio: stats.and_then(|s| s.graph_balance_ratio),
        cover_balance_ratio: stats.map(|s| s.cover_balance_ratio),
        edgecut: stats.and_then(|s| s.edgecut),
        blowup_factor: first
            .blowup_factor
            .map(|r| *r.numer() as f64 / *r.denom() as f64),
        cover: mean(reports.iter().map(|r| r.times.cover)),
        build_blowup: optional_mean(|r| r.times.build_blowup),
        refilter: optional_mean(|r| r.times.refilter),
        persistence,
        speedup: if persistence > 0.0 {
            serial_persistence / persistence
        } else {
            0.0
        },
        max_memory_mb: reports
            .iter()
            .filter_map(|r| r.peak_memory_mb)
            .reduce(f64::max),
        betti: first.betti.clone(),
    }
}

fn trials(
    algorithm: Algorithm,
    k: &SimplicialComplex,
    opts: &PipelineOptions,
    n: usize,
) -> Result<Vec<RunReport>> {
    reset_peak_memory();
    (0..n).map(|_| run(algorithm, k, opts)).collect()
}

/// One row per (input, algorithm, worker count); the serial algorithm gets a single row
/// with one worker. Aborts on any Betti disagreement with the serial baseline.
pub fn run_benchmark(
    inputs: &[(String, SimplicialComplex)],
    config: &BenchConfig,
) -> Result<Vec<BenchRow>> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if config.worker_list.contains(&0) {
        return Err(Error::InvalidParameter(
            "worker counts must be at least 1".into(),
        ));
    }
    let mut rows = Vec::new();
    for (name, k) in inputs {
        let serial = trials(
            Algorithm::Serial,
            k,
            &PipelineOptions::new(1),
            config.trials,
        )?;
        let baseline = summarize(name, &serial, 0.0);
        let t_serial = baseline.persistence;
        if config.algorithms.contains(&Algorithm::Serial) {
            rows.push(summarize(name, &serial, t_serial));
        }
        for &alg in config
            .algorithms
            .iter()
            .filter(|&&a| a != Algorithm::Serial)
        {
            for &p in &config.worker_list {
                let opts = PipelineOptions::new(p).seed(config.seed);
                let reports = trials(alg, k, &opts, config.trials)?;
                if let Some(bad) = reports.iter().find(|r| r.betti != baseline.betti) {
                    return Err(Error::BettiMismatch(format!(
                        "{name}: {alg} with p={p} gives {} but serial gives {}",
                        bad.betti, baseline.betti
                    )));
                }
                rows.push(summarize(name, &reports, t_serial));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::multiblob;

    #[test]
    fn header_has_thirteen_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), 13);
        assert!(CSV_HEADER.starts_with("input,algorithm,num_partitions"));
    }

    #[test]
    fn one_row_per_triple() {
        let k = multiblob(6, 4, 2).unwrap();
        let config = BenchConfig {
            algorithms: Algorithm::ALL.to_vec(),
            worker_list: vec![1, 2],
            trials: 2,
            seed: 0,
        };
        let rows = run_benchmark(&[("mb".into(), k)], &config).unwrap();
        assert_eq!(rows.len(), 5);
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for line in text.lines() {
            assert_eq!(line.split(',').count(), 13, "{line}");
        }
        let mv = rows
            .iter()
            .find(|r| r.algorithm == Algorithm::Multicore)
            .unwrap();
        assert!(mv.build_blowup.is_some() && mv.refilter.is_none());
        let h = rows
            .iter()
            .find(|r| r.algorithm == Algorithm::Heuristic)
            .unwrap();
        assert!(h.build_blowup.is_none() && h.refilter.is_some());
    }

    #[test]
    fn zero_trials_rejected() {
        let config = BenchConfig {
            algorithms: vec![Algorithm::Serial],
            worker_list: vec![1],
            trials: 0,
            seed: 0,
        };
        assert!(run_benchmark(&[], &config).is_err());
    }
}
