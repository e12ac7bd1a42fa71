//! The serial baseline and the two parallel homology pipelines.
//!
//! Both parallel pipelines produce a boundary matrix whose leading columns split into
//! blocks that only reference rows inside themselves. The blocks are reduced concurrently,
//! each with its own pivot table, and the remaining tail is reduced serially against
//! everything before it. Since a block column can only ever be added to columns of the
//! same block, the result equals the serial left-to-right reduction of the whole matrix,
//! whatever the scheduling.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;
use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;

use crate::blowup::{blowup_boundary_matrix, build_blowup_complex};
use crate::complex::SimplicialComplex;
use crate::cover::{
    close_cover, cover_stats, one_skeleton_graph, open_cover, partition_graph, CoverStats,
    GraphPartition,
};
use crate::error::{Error, Result};
use crate::homology::{
    betti, complex_boundary_matrix, reduce_span, BettiNumbers, BoundaryMatrix, Column,
    PersistencePairing, PivotTable, Reducer, ReductionMode,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Serial,
    /// Reduction of the blowup complex's boundary matrix.
    Multicore,
    /// Reduction of the base boundary matrix permuted by the open cover.
    Heuristic,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [
        Algorithm::Serial,
        Algorithm::Multicore,
        Algorithm::Heuristic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Serial => "serial",
            Algorithm::Multicore => "mv",
            Algorithm::Heuristic => "heuristic",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Algorithm::Serial),
            "mv" => Ok(Algorithm::Multicore),
            "heuristic" => Ok(Algorithm::Heuristic),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

/// Column spans reduced concurrently, followed by a serially reduced tail.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParallelPlan {
    pub blocks: Vec<Range<usize>>,
    pub tail: Range<usize>,
    pub workers: usize,
}

impl ParallelPlan {
    /// Checks that blocks are ordered, disjoint and followed by the tail, that blocks and
    /// tail together cover all `n` columns, and that no block column references a row
    /// outside its block.
    pub fn validate(&self, m: &BoundaryMatrix) -> Result<()> {
        let mut next = 0;
        for b in &self.blocks {
            if b.start != next {
                return Err(Error::Structural(format!(
                    "block {b:?} does not start at column {next}"
                )));
            }
            next = b.end;
        }
        if self.tail.start != next || self.tail.end != m.len() {
            return Err(Error::Structural(format!(
                "tail {:?} does not cover columns {next}..{}",
                self.tail,
                m.len()
            )));
        }
        for b in &self.blocks {
            for j in b.clone() {
                if m.column(j).first().is_some_and(|&r| (r as usize) < b.start) {
                    return Err(Error::Structural(format!(
                        "column {j} of block {b:?} references a row outside the block"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Reduces `m` following `plan`, using the current rayon pool for the blocks.
pub fn reduce_with_plan(m: BoundaryMatrix, plan: &ParallelPlan) -> Result<Reducer> {
    plan.validate(&m)?;
    let mut reducer = Reducer::new(m);
    let block_end = plan.tail.start;

    let mut slices: Vec<(usize, &mut [Column])> = Vec::with_capacity(plan.blocks.len());
    let mut rest: &mut [Column] = &mut reducer.columns_mut()[..block_end];
    for b in &plan.blocks {
        let (head, tail) = std::mem::take(&mut rest).split_at_mut(b.len());
        slices.push((b.start, head));
        rest = tail;
    }
    let tables: Vec<PivotTable> = slices
        .into_par_iter()
        .map(|(start, cols)| {
            let mut table = PivotTable::new(start..start + cols.len());
            reduce_span(&[], cols, start, &mut table);
            table
        })
        .collect();
    for t in &tables {
        t.merge_into(reducer.pivots_mut());
    }
    reducer.mark_reduced(0..block_end);

    reducer.pair_cells(plan.tail.clone(), ReductionMode::Absolute);
    Ok(reducer)
}

/// Wall-clock seconds per phase. Each parallel phase is timed from fork to join, so it
/// is the makespan of its workers.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PhaseTimes {
    /// Base boundary matrix assembly (common to every algorithm).
    pub matrix: f64,
    pub cover: f64,
    pub build_blowup: Option<f64>,
    pub refilter: Option<f64>,
    pub persistence: f64,
}

#[derive(Clone, Debug)]
pub struct RunReport {
    pub algorithm: Algorithm,
    pub workers: usize,
    pub parts: usize,
    pub times: PhaseTimes,
    /// Peak resident set size in MB, where the platform reports it.
    pub peak_memory_mb: Option<f64>,
    pub betti: BettiNumbers,
    /// Pairing in the column order of the reduced matrix.
    pub pairing: PersistencePairing,
    pub cover_stats: Option<CoverStats>,
    /// `|K^U| / |K|`, measured for `mv` and predicted from the closed cover otherwise.
    pub blowup_factor: Option<Ratio<u64>>,
    pub partition: Option<GraphPartition>,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub workers: usize,
    /// Part count for the graph partition; defaults to `workers`.
    pub parts: usize,
    pub seed: u64,
    /// Externally supplied partition, used instead of the built-in partitioner.
    pub partition: Option<GraphPartition>,
}

impl PipelineOptions {
    pub fn new(workers: usize) -> Self {
        PipelineOptions {
            workers,
            parts: workers,
            seed: 0,
            partition: None,
        }
    }

    pub fn parts(mut self, parts: usize) -> Self {
        self.parts = parts;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn partition(mut self, p: GraphPartition) -> Self {
        self.parts = p.parts();
        self.partition = Some(p);
        self
    }
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return Err(Error::InvalidParameter(
            "worker count must be at least 1".into(),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, f64) {
    let t = Instant::now();
    let out = f();
    (out, t.elapsed().as_secs_f64())
}

pub fn run(
    algorithm: Algorithm,
    k: &SimplicialComplex,
    opts: &PipelineOptions,
) -> Result<RunReport> {
    match algorithm {
        Algorithm::Serial => serial_homology(k),
        Algorithm::Multicore => multicore_homology(k, opts),
        Algorithm::Heuristic => heuristic_mh(k, opts),
    }
}

/// Lexicographic filtration, full left-to-right reduction, Betti numbers.
pub fn serial_homology(k: &SimplicialComplex) -> Result<RunReport> {
    let (m, matrix) = timed(|| complex_boundary_matrix(k));
    let m = m?;
    let dims = m.dims().to_vec();
    let n = m.len();
    let (reducer, persistence) = timed(|| {
        let mut r = Reducer::new(m);
        r.pair_cells(0..n, ReductionMode::Absolute);
        r
    });
    let pairing = reducer.pairing();
    Ok(RunReport {
        algorithm: Algorithm::Serial,
        workers: 1,
        parts: 1,
        times: PhaseTimes {
            matrix,
            persistence,
            ..Default::default()
        },
        peak_memory_mb: peak_memory_mb(),
        betti: betti(&pairing, &dims),
        pairing,
        cover_stats: None,
        blowup_factor: None,
        partition: None,
    })
}

fn obtain_partition(k: &SimplicialComplex, opts: &PipelineOptions) -> Result<GraphPartition> {
    match &opts.partition {
        Some(p) => Ok(p.clone()),
        None => partition_graph(&one_skeleton_graph(k), opts.parts, opts.seed),
    }
}

/// Partition-based cover, blowup complex, concurrent reduction of the local segments
/// (one per nerve vertex), then serial reduction of the global cells.
pub fn multicore_homology(k: &SimplicialComplex, opts: &PipelineOptions) -> Result<RunReport> {
    let pool = pool(opts.workers)?;
    pool.install(|| {
        let (base, matrix) = timed(|| complex_boundary_matrix(k));
        let base = base?;

        let (cover, cover_time) = timed(|| -> Result<_> {
            let p = obtain_partition(k, opts)?;
            let c = close_cover(&open_cover(k, &p)?, k);
            Ok((p, c))
        });
        let (partition, cover) = cover?;

        let (built, build_time) = timed(|| -> Result<_> {
            let b = build_blowup_complex(k, &cover)?;
            let m = blowup_boundary_matrix(&b, &base)?;
            Ok((b, m))
        });
        let (blowup, m) = built?;

        let plan = ParallelPlan {
            blocks: blowup.local_segments(),
            tail: blowup.global_range(),
            workers: opts.workers,
        };
        let dims = m.dims().to_vec();
        let (reducer, persistence) = timed(|| reduce_with_plan(m, &plan));
        let pairing = reducer?.pairing();

        let stats = cover_stats(&cover, k, Some(&partition));
        Ok(RunReport {
            algorithm: Algorithm::Multicore,
            workers: opts.workers,
            parts: partition.parts(),
            times: PhaseTimes {
                matrix,
                cover: cover_time,
                build_blowup: Some(build_time),
                refilter: None,
                persistence,
            },
            peak_memory_mb: peak_memory_mb(),
            betti: betti(&pairing, &dims),
            pairing,
            cover_stats: Some(stats),
            blowup_factor: Some(blowup.blowup_ratio()),
            partition: Some(partition),
        })
    })
}

/// Order of the base cells with every class `0..p` of the open cover listed before the
/// shared class, each class in base order. Returns the order and the class boundaries.
pub fn cover_filtration_order(classes: &[u32], set_count: usize) -> (Vec<u32>, Vec<usize>) {
    let mut order: Vec<u32> = (0..classes.len() as u32).collect();
    order.par_sort_unstable_by_key(|&j| (classes[j as usize], j));
    let mut bounds = vec![0usize; set_count + 1];
    for &c in classes {
        bounds[c as usize + 1] += 1;
    }
    for i in 0..set_count {
        bounds[i + 1] += bounds[i];
    }
    (order, bounds)
}

/// Base boundary matrix permuted by `order`. Fails when the order is not a filtration.
pub fn permute_matrix(base: &BoundaryMatrix, order: &[u32]) -> Result<BoundaryMatrix> {
    let mut pos = vec![0u32; order.len()];
    for (k, &j) in order.iter().enumerate() {
        pos[j as usize] = k as u32;
    }
    let columns: Vec<Result<Column>> = order
        .par_iter()
        .enumerate()
        .map(|(k, &j)| {
            let mut col: Column = base
                .column(j as usize)
                .iter()
                .map(|&r| pos[r as usize])
                .collect();
            col.sort_unstable();
            if col.last().is_some_and(|&r| r as usize >= k) {
                return Err(Error::Structural(format!(
                    "permuted order places cell {j} before one of its faces"
                )));
            }
            Ok(col)
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let dims = order.iter().map(|&j| base.dims()[j as usize]).collect();
    Ok(BoundaryMatrix::from_parts_unchecked(columns, dims))
}

/// Open cover, re-filtered base complex (classes `0..p` before the shared class),
/// concurrent reduction of the per-part blocks, then serial reduction of the shared class.
pub fn heuristic_mh(k: &SimplicialComplex, opts: &PipelineOptions) -> Result<RunReport> {
    let pool = pool(opts.workers)?;
    pool.install(|| {
        let (base, matrix) = timed(|| complex_boundary_matrix(k));
        let base = base?;

        let (cover, cover_time) = timed(|| -> Result<_> {
            let p = obtain_partition(k, opts)?;
            let c = open_cover(k, &p)?;
            Ok((p, c))
        });
        let (partition, open) = cover?;

        let (refiltered, refilter_time) = timed(|| -> Result<_> {
            let classes: Vec<u32> = open.labels().par_iter().map(|l| l[0]).collect();
            let (order, bounds) = cover_filtration_order(&classes, open.set_count());
            let m = permute_matrix(&base, &order)?;
            Ok((m, bounds))
        });
        let (m, bounds) = refiltered?;

        let p = partition.parts();
        let plan = ParallelPlan {
            blocks: (0..p).map(|i| bounds[i]..bounds[i + 1]).collect(),
            tail: bounds[p]..bounds[p + 1],
            workers: opts.workers,
        };
        let dims = m.dims().to_vec();
        let (reducer, persistence) = timed(|| reduce_with_plan(m, &plan));
        let pairing = reducer?.pairing();

        let closed = close_cover(&open, k);
        let stats = cover_stats(&closed, k, Some(&partition));
        let factor = stats.predicted_blowup;
        Ok(RunReport {
            algorithm: Algorithm::Heuristic,
            workers: opts.workers,
            parts: p,
            times: PhaseTimes {
                matrix,
                cover: cover_time,
                build_blowup: None,
                refilter: Some(refilter_time),
                persistence,
            },
            peak_memory_mb: peak_memory_mb(),
            betti: betti(&pairing, &dims),
            pairing,
            cover_stats: Some(stats),
            blowup_factor: Some(factor),
            partition: Some(partition),
        })
    })
}

/// Peak resident set size from `/proc/self/status` (Linux only).
pub fn peak_memory_mb() -> Option<f64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: f64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb / 1024.0)
}

/// Resets the peak-RSS counter where the kernel allows it. Best effort.
pub fn reset_peak_memory() {
    let _ = std::fs::write("/proc/self/clear_refs", "5");
}
