//! Randomized agreement check between the three algorithms and the rank oracle.

use rand::Rng;

use crate::blowup::{blowup_boundary_matrix, build_blowup_complex};
use crate::complex::SimplicialComplex;
use crate::cover::{one_skeleton_graph, partition_based_cover, partition_graph};
use crate::error::Result;
use crate::generators::{erdos_renyi, flag_complex, rng_for, stream};
use crate::homology::{betti, complex_boundary_matrix, rank_oracle, BettiNumbers, BoundaryMatrix};
use crate::parallel::{reduce_with_plan, run, Algorithm, ParallelPlan, PipelineOptions};

pub const WORKER_COUNTS: [usize; 3] = [1, 2, 4];

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_vertices: usize,
    pub seed: u64,
    /// Corrupts the blowup boundary matrix before reduction (harness self-test).
    pub inject_fault: bool,
}

/// Betti numbers reported by each method on one complex.
#[derive(Clone, Debug)]
pub struct InstanceResult {
    pub instance: usize,
    pub complex: SimplicialComplex,
    pub results: Vec<(String, BettiNumbers)>,
}

impl InstanceResult {
    pub fn agrees(&self) -> bool {
        self.results.windows(2).all(|w| w[0].1 == w[1].1)
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOutcome {
    pub instances: usize,
    pub failures: Vec<InstanceResult>,
}

/// Random flag complex on `1..=max_vertices` vertices with a random edge density.
pub fn random_flag_complex(rng: &mut impl Rng, max_vertices: usize) -> Result<SimplicialComplex> {
    let n = rng.random_range(1..=max_vertices.max(1));
    let p = rng.random_range(0.2..0.9);
    let g = erdos_renyi(n, p, rng.random())?;
    Ok(flag_complex(&g, n))
}

/// The blowup pipeline with the lower face of the first 1-cell removed. That column then
/// has odd weight, so the rank of the 1-boundary grows by one and β0 must come out wrong.
fn faulty_multicore(k: &SimplicialComplex, parts: usize, seed: u64) -> Result<BettiNumbers> {
    let base = complex_boundary_matrix(k)?;
    let p = partition_graph(&one_skeleton_graph(k), parts, seed)?;
    let b = build_blowup_complex(k, &partition_based_cover(k, &p)?)?;
    let (mut columns, dims) = blowup_boundary_matrix(&b, &base)?.into_parts();
    if let Some(j) = (0..columns.len()).find(|&j| dims[j] == 1) {
        columns[j].remove(0);
    }
    let m = BoundaryMatrix::from_parts_unchecked(columns, dims.clone());
    let plan = ParallelPlan {
        blocks: b.local_segments(),
        tail: b.global_range(),
        workers: 1,
    };
    let pairing = reduce_with_plan(m, &plan)?.pairing();
    Ok(betti(&pairing, &dims))
}

/// Runs every method on `k`. Part counts are capped at the vertex count.
pub fn check_complex(
    k: &SimplicialComplex,
    seed: u64,
    inject_fault: bool,
) -> Result<Vec<(String, BettiNumbers)>> {
    let mut out = vec![(
        "serial".to_string(),
        run(Algorithm::Serial, k, &PipelineOptions::new(1))?.betti,
    )];
    let vertices = k.vertex_count().max(1);
    for alg in [Algorithm::Multicore, Algorithm::Heuristic] {
        for p in WORKER_COUNTS {
            let parts = p.min(vertices);
            let beta = if inject_fault && alg == Algorithm::Multicore {
                faulty_multicore(k, parts, seed)?
            } else {
                run(alg, k, &PipelineOptions::new(p).parts(parts).seed(seed))?.betti
            };
            out.push((format!("{alg} p={p}"), beta));
        }
    }
    out.push((
        "oracle".to_string(),
        rank_oracle(&complex_boundary_matrix(k)?)?,
    ));
    Ok(out)
}

pub fn verify(config: &VerifyConfig) -> Result<VerifyOutcome> {
    let mut rng = rng_for(config.seed, stream::VERIFY);
    let mut outcome = VerifyOutcome::default();
    for instance in 0..config.trials {
        let k = random_flag_complex(&mut rng, config.max_vertices)?;
        let results = check_complex(
            &k,
            config.seed.wrapping_add(instance as u64),
            config.inject_fault,
        )?;
        let r = InstanceResult {
            instance,
            complex: k,
            results,
        };
        if !r.agrees() {
            outcome.failures.push(r);
        }
        outcome.instances += 1;
    }
    Ok(outcome)
}
