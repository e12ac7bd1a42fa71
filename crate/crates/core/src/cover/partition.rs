//! Vertex partitions of a graph: a built-in region-growing partitioner with greedy
//! boundary refinement, and a loader for externally computed partitions.

use std::collections::VecDeque;
use std::io::BufRead;

use rand::Rng;

use crate::complex::Vertex;
use crate::error::{Error, Result};
use crate::generators::{rng_for, stream, Graph};

/// Allowed part-size slack over a perfectly even split.
pub const IMBALANCE: f64 = 1.1;

/// Refinement stops after this many passes even if moves remain.
const MAX_REFINE_PASSES: usize = 32;

const UNASSIGNED: u32 = u32::MAX;

/// Assignment of every vertex to a part in `0..parts`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphPartition {
    part: Vec<u32>,
    parts: usize,
}

impl GraphPartition {
    pub fn new(part: Vec<u32>, parts: usize) -> Result<Self> {
        if parts == 0 {
            return Err(Error::InvalidParameter(
                "a partition needs at least one part".into(),
            ));
        }
        if let Some((v, &p)) = part.iter().enumerate().find(|(_, &p)| p as usize >= parts) {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} assigned to part {p}, but only {parts} parts exist"
            )));
        }
        Ok(GraphPartition { part, parts })
    }

    /// Part count `p`.
    pub fn parts(&self) -> usize {
        self.parts
    }

    pub fn vertex_count(&self) -> usize {
        self.part.len()
    }

    #[inline]
    pub fn part_of(&self, v: Vertex) -> u32 {
        self.part[v as usize]
    }

    pub fn assignment(&self) -> &[u32] {
        &self.part
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.parts];
        for &p in &self.part {
            sizes[p as usize] += 1;
        }
        sizes
    }

    pub fn empty_parts(&self) -> usize {
        self.sizes().iter().filter(|&&s| s == 0).count()
    }

    /// `max_i |V_i| / |V|`.
    pub fn balance_ratio(&self) -> f64 {
        let max = self.sizes().into_iter().max().unwrap_or(0);
        max as f64 / self.part.len().max(1) as f64
    }

    /// Number of edges whose endpoints lie in different parts.
    pub fn edgecut(&self, g: &Graph) -> usize {
        g.edges()
            .iter()
            .filter(|&&(u, v)| self.part_of(u) != self.part_of(v))
            .count()
    }
}

/// Largest part size the refinement may create.
pub fn part_capacity(vertices: usize, parts: usize) -> usize {
    let even = vertices.div_ceil(parts);
    let slack = (IMBALANCE * vertices as f64 / parts as f64).floor() as usize;
    even.max(slack)
}

/// Splits `g` into `p` parts.
///
/// Seeds are spread out by farthest-point BFS starting from a vertex far away from a
/// seeded random start. Parts then grow round-robin, one BFS step each, until every part
/// holds its share of `|V|/p` vertices. Finally, boundary vertices move to the neighbouring
/// part holding most of their neighbours when this strictly lowers the edgecut and keeps
/// the target part within [`part_capacity`].
pub fn partition_graph(g: &Graph, p: usize, seed: u64) -> Result<GraphPartition> {
    let n = g.vertex_count();
    if p == 0 {
        return Err(Error::InvalidParameter(
            "part count must be at least 1".into(),
        ));
    }
    if p > n {
        return Err(Error::TooManyParts {
            parts: p,
            vertices: n,
        });
    }
    if p == 1 {
        return GraphPartition::new(vec![0; n], 1);
    }
    let adj = g.adjacency();
    let seeds = spread_seeds(&adj, p, seed);
    let mut part = grow_regions(&adj, &seeds, n);
    refine(&adj, &mut part, p);
    GraphPartition::new(part, p)
}

/// BFS distances from `sources`; unreachable vertices get `usize::MAX`.
fn bfs_distances(adj: &[Vec<Vertex>], sources: &[Vertex], dist: &mut [usize]) {
    let mut queue: VecDeque<Vertex> = VecDeque::new();
    for &s in sources {
        if dist[s as usize] != 0 {
            dist[s as usize] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        let d = dist[v as usize] + 1;
        for &w in &adj[v as usize] {
            if dist[w as usize] > d {
                dist[w as usize] = d;
                queue.push_back(w);
            }
        }
    }
}

/// Farthest vertex by distance, ties to the smallest id.
fn farthest(dist: &[usize]) -> Vertex {
    let mut best = 0;
    for (v, &d) in dist.iter().enumerate() {
        if d > dist[best] {
            best = v;
        }
    }
    best as Vertex
}

fn spread_seeds(adj: &[Vec<Vertex>], p: usize, seed: u64) -> Vec<Vertex> {
    let n = adj.len();
    let mut rng = rng_for(seed, stream::PARTITION);
    let start = rng.random_range(0..n) as Vertex;
    let mut dist = vec![usize::MAX; n];
    bfs_distances(adj, &[start], &mut dist);
    let first = farthest(&dist);

    let mut seeds = vec![first];
    let mut dist = vec![usize::MAX; n];
    bfs_distances(adj, &[first], &mut dist);
    while seeds.len() < p {
        let next = farthest(&dist);
        // every vertex already a seed cannot happen since p <= n
        debug_assert!(dist[next as usize] > 0);
        seeds.push(next);
        bfs_distances(adj, &[next], &mut dist);
    }
    seeds
}

fn grow_regions(adj: &[Vec<Vertex>], seeds: &[Vertex], n: usize) -> Vec<u32> {
    let p = seeds.len();
    let targets: Vec<usize> = (0..p).map(|i| n / p + usize::from(i < n % p)).collect();
    let mut part = vec![UNASSIGNED; n];
    let mut size = vec![0usize; p];
    let mut queues: Vec<VecDeque<Vertex>> = seeds.iter().map(|&s| VecDeque::from([s])).collect();
    let mut assigned = 0;
    let mut next_free = 0usize;
    while assigned < n {
        for i in 0..p {
            if size[i] == targets[i] {
                continue;
            }
            let mut claimed = None;
            while let Some(v) = queues[i].pop_front() {
                if part[v as usize] == UNASSIGNED {
                    claimed = Some(v);
                    break;
                }
            }
            let v = match claimed {
                Some(v) => v,
                None => {
                    // region is enclosed: restart from the smallest unclaimed vertex
                    while part[next_free] != UNASSIGNED {
                        next_free += 1;
                    }
                    next_free as Vertex
                }
            };
            part[v as usize] = i as u32;
            size[i] += 1;
            assigned += 1;
            queues[i].extend(
                adj[v as usize]
                    .iter()
                    .filter(|&&w| part[w as usize] == UNASSIGNED),
            );
        }
    }
    part
}

fn refine(adj: &[Vec<Vertex>], part: &mut [u32], p: usize) {
    let n = part.len();
    let cap = part_capacity(n, p);
    let mut size = vec![0usize; p];
    for &q in part.iter() {
        size[q as usize] += 1;
    }
    let mut counts = vec![0usize; p];
    for _ in 0..MAX_REFINE_PASSES {
        let mut moved = false;
        for v in 0..n {
            let own = part[v] as usize;
            if adj[v].iter().all(|&w| part[w as usize] as usize == own) || size[own] <= 1 {
                continue;
            }
            for &w in &adj[v] {
                counts[part[w as usize] as usize] += 1;
            }
            let mut best: Option<(usize, usize)> = None;
            for &w in &adj[v] {
                let q = part[w as usize] as usize;
                if q == own || size[q] + 1 > cap {
                    continue;
                }
                if best.is_none_or(|(bq, bc)| counts[q] > bc || (counts[q] == bc && q < bq)) {
                    best = Some((q, counts[q]));
                }
            }
            if let Some((q, c)) = best {
                if c > counts[own] {
                    part[v] = q as u32;
                    size[own] -= 1;
                    size[q] += 1;
                    moved = true;
                }
            }
            for &w in &adj[v] {
                counts[part[w as usize] as usize] = 0;
            }
            counts[own] = 0;
        }
        if !moved {
            break;
        }
    }
}

/// Reads one part index per line; line `i` holds the part of vertex `i`. With
/// `declared_parts` unset the part count is one more than the largest index.
pub fn load_partition<R: BufRead>(
    reader: R,
    vertices: usize,
    declared_parts: Option<usize>,
) -> Result<GraphPartition> {
    let mut part = Vec::with_capacity(vertices);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let p: u32 = trimmed.parse().map_err(|_| Error::Format {
            line: i + 1,
            msg: format!("expected a part index, found {trimmed:?}"),
        })?;
        if let Some(d) = declared_parts {
            if p as usize >= d {
                return Err(Error::Format {
                    line: i + 1,
                    msg: format!("part {p} out of range for {d} parts"),
                });
            }
        }
        part.push(p);
    }
    if part.len() != vertices {
        return Err(Error::Format {
            line: part.len(),
            msg: format!("expected {vertices} lines, found {}", part.len()),
        });
    }
    let parts = declared_parts.unwrap_or_else(|| part.iter().max().map_or(1, |&m| m as usize + 1));
    GraphPartition::new(part, parts).map_err(|e| Error::Format {
        line: 0,
        msg: e.to_string(),
    })
}

pub fn write_partition<W: std::io::Write>(p: &GraphPartition, mut out: W) -> Result<()> {
    for &q in p.assignment() {
        writeln!(out, "{q}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{erdos_renyi, Graph};

    fn path_graph(n: u32) -> Graph {
        Graph::new(n as usize, (1..n).map(|v| (v - 1, v))).unwrap()
    }

    /// Every assignment of 4 path vertices to 2 nonempty balanced parts.
    fn best_balanced_cut(g: &Graph) -> usize {
        let n = g.vertex_count();
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == n / 2)
            .map(|m| {
                let part: Vec<u32> = (0..n).map(|v| m >> v & 1).collect();
                GraphPartition::new(part, 2).unwrap().edgecut(g)
            })
            .min()
            .unwrap()
    }

    #[test]
    fn single_part() {
        let g = path_graph(5);
        let p = partition_graph(&g, 1, 0).unwrap();
        assert!(p.assignment().iter().all(|&q| q == 0));
    }

    #[test]
    fn path_split_in_two() {
        let g = path_graph(4);
        assert_eq!(best_balanced_cut(&g), 1);
        for seed in 0..20 {
            let p = partition_graph(&g, 2, seed).unwrap();
            let a = p.assignment();
            assert_eq!(a[0], a[1], "seed {seed}: {a:?}");
            assert_eq!(a[2], a[3], "seed {seed}: {a:?}");
            assert_ne!(a[1], a[2], "seed {seed}: {a:?}");
            assert_eq!(p.edgecut(&g), 1);
        }
    }

    #[test]
    fn too_many_parts() {
        assert!(matches!(
            partition_graph(&path_graph(3), 4, 0),
            Err(Error::TooManyParts { .. })
        ));
    }

    #[test]
    fn balance_bound_holds() {
        for (n, prob, p) in [
            (200, 0.05, 4),
            (300, 0.02, 5),
            (120, 0.1, 3),
            (400, 0.01, 8),
        ] {
            let g = erdos_renyi(n, prob, 3).unwrap();
            let part = partition_graph(&g, p, 17).unwrap();
            let bound = part_capacity(n, p) as f64 / n as f64;
            assert!(part.balance_ratio() <= bound + 1e-12);
            if n % p == 0 {
                assert!(part.balance_ratio() <= IMBALANCE / p as f64 + 1e-12);
            }
        }
    }

    #[test]
    fn refinement_never_increases_cut() {
        let g = erdos_renyi(150, 0.04, 8).unwrap();
        let adj = g.adjacency();
        let seeds = spread_seeds(&adj, 4, 1);
        let grown = grow_regions(&adj, &seeds, 150);
        let before = GraphPartition::new(grown.clone(), 4).unwrap().edgecut(&g);
        let mut refined = grown;
        refine(&adj, &mut refined, 4);
        let after = GraphPartition::new(refined, 4).unwrap().edgecut(&g);
        assert!(after <= before);
    }

    #[test]
    fn deterministic_per_seed() {
        let g = erdos_renyi(100, 0.05, 2).unwrap();
        assert_eq!(
            partition_graph(&g, 3, 9).unwrap(),
            partition_graph(&g, 3, 9).unwrap()
        );
    }

    #[test]
    fn disconnected_graph_gets_every_vertex() {
        let g = Graph::new(6, [(0, 1), (2, 3)]).unwrap();
        let p = partition_graph(&g, 3, 0).unwrap();
        assert_eq!(p.sizes(), vec![2, 2, 2]);
    }

    #[test]
    fn load_examples() {
        let p = load_partition("0\n0\n1\n1\n".as_bytes(), 4, None).unwrap();
        assert_eq!(p.assignment(), &[0, 0, 1, 1]);
        assert_eq!(p.parts(), 2);
        assert!(matches!(
            load_partition("0\n0\n1\n".as_bytes(), 4, None),
            Err(Error::Format { .. })
        ));
        assert!(matches!(
            load_partition("0\n0\n1\n2\n".as_bytes(), 4, Some(2)),
            Err(Error::Format { .. })
        ));
        assert!(load_partition("0\nx\n1\n1\n".as_bytes(), 4, None).is_err());
    }
}
