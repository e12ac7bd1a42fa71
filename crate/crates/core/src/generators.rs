//! Deterministic dataset generators.
//!
//! Every randomized generator draws from a [`ChaCha8Rng`] seeded with the caller's
//! seed and switched onto a fixed per-generator stream (see [`stream`]), so the same
//! `(parameters, seed)` produces bit-identical output on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::complex::{Simplex, SimplicialComplex, Vertex};
use crate::error::{Error, Result};

/// Stream ids used to split the generator per operation.
pub mod stream {
    pub const ERDOS_RENYI: u64 = 1;
    pub const SPHERE: u64 = 2;
    pub const PARTITION: u64 = 3;
    pub const VERIFY: u64 = 4;
    pub const RANDOM_COVER: u64 = 5;
}

pub(crate) fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Points in a common ambient dimension.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if let Some(first) = points.first() {
            let d = first.len();
            if d == 0 {
                return Err(Error::InvalidParameter(
                    "points need at least one coordinate".into(),
                ));
            }
            if points.iter().any(|p| p.len() != d) {
                return Err(Error::InvalidParameter(
                    "points have mixed dimensions".into(),
                ));
            }
        }
        Ok(PointCloud { points })
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn ambient_dim(&self) -> Option<usize> {
        self.points.first().map(Vec::len)
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Simple undirected graph on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    edges: Vec<(Vertex, Vertex)>,
}

impl Graph {
    /// Normalizes each edge to `(min, max)`, sorts and deduplicates.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        let mut out = Vec::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidParameter(format!("self-loop at {u}")));
            }
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u},{v}) outside 0..{n}"
                )));
            }
            out.push((u.min(v), u.max(v)));
        }
        out.sort_unstable();
        out.dedup();
        Ok(Graph { n, edges: out })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    /// Sorted adjacency lists.
    pub fn adjacency(&self) -> Vec<Vec<Vertex>> {
        let mut adj = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

const MAX_FULL_SIMPLEX_VERTICES: usize = 25;

/// Closure of the `(n - 1)`-simplex on `0..n`.
pub fn full_simplex_complex(n_vertices: usize) -> Result<SimplicialComplex> {
    if !(1..=MAX_FULL_SIMPLEX_VERTICES).contains(&n_vertices) {
        return Err(Error::InvalidParameter(format!(
            "full simplex needs 1..={MAX_FULL_SIMPLEX_VERTICES} vertices, got {n_vertices}"
        )));
    }
    let mut cells = Vec::with_capacity((1usize << n_vertices) - 1);
    push_all_faces(0, n_vertices as u32, &mut cells);
    Ok(SimplicialComplex::from_closed_cells(cells))
}

/// All nonempty subsets of `base..base + n`.
fn push_all_faces(base: Vertex, n: u32, out: &mut Vec<Simplex>) {
    let mut buf = Vec::with_capacity(n as usize);
    for mask in 1u64..(1u64 << n) {
        buf.clear();
        buf.extend((0..n).filter(|b| mask >> b & 1 == 1).map(|b| base + b));
        out.push(Simplex::from_sorted(&buf));
    }
}

/// `copies` full simplices on `blob_vertices` vertices each, chained into `groups`
/// groups. Copy `i` uses vertices `i*b .. (i+1)*b`. Within a group, vertex 0 of each
/// copy is joined to vertex 0 of the next copy; the first copies of consecutive groups
/// are joined likewise. The result is contractible.
pub fn multiblob(copies: usize, blob_vertices: usize, groups: usize) -> Result<SimplicialComplex> {
    if copies == 0 || groups == 0 || blob_vertices < 2 {
        return Err(Error::InvalidParameter(
            "multiblob needs copies >= 1, groups >= 1, blob_vertices >= 2".into(),
        ));
    }
    if !copies.is_multiple_of(groups) {
        return Err(Error::InvalidParameter(format!(
            "groups ({groups}) must divide copies ({copies})"
        )));
    }
    if blob_vertices > MAX_FULL_SIMPLEX_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "blob_vertices must be <= {MAX_FULL_SIMPLEX_VERTICES}"
        )));
    }
    let b = blob_vertices as u32;
    let per_group = copies / groups;
    let mut cells = Vec::with_capacity(copies * ((1usize << blob_vertices) - 1) + copies);
    for c in 0..copies as u32 {
        push_all_faces(c * b, b, &mut cells);
    }
    let port = |copy: usize| copy as u32 * b;
    for g in 0..groups {
        let head = g * per_group;
        for c in head..head + per_group - 1 {
            cells.push(Simplex::from_sorted(&[port(c), port(c + 1)]));
        }
        if g + 1 < groups {
            cells.push(Simplex::from_sorted(&[port(head), port(head + per_group)]));
        }
    }
    Ok(SimplicialComplex::from_closed_cells(cells))
}

/// Path on `n` vertices: `0 - 1 - ... - (n-1)`.
pub fn path_complex(n_vertices: usize) -> Result<SimplicialComplex> {
    if n_vertices == 0 {
        return Err(Error::InvalidParameter(
            "path needs at least one vertex".into(),
        ));
    }
    let n = n_vertices as u32;
    let cells = (0..n)
        .map(|v| Simplex::from_sorted(&[v]))
        .chain((1..n).map(|v| Simplex::from_sorted(&[v - 1, v])))
        .collect();
    Ok(SimplicialComplex::from_closed_cells(cells))
}

/// Clique complex of `g`, truncated to cells of dimension at most `max_dim`.
/// Isolated vertices are included.
pub fn flag_complex(g: &Graph, max_dim: usize) -> SimplicialComplex {
    let adj = g.adjacency();
    // forward neighbours only, so each clique is produced once from its smallest vertex
    let up: Vec<Vec<Vertex>> = adj
        .iter()
        .enumerate()
        .map(|(v, list)| list.iter().copied().filter(|&w| w as usize > v).collect())
        .collect();
    let mut cells = Vec::new();
    let mut clique = Vec::with_capacity(max_dim + 1);
    for v in 0..g.vertex_count() as Vertex {
        clique.clear();
        clique.push(v);
        expand_cliques(&up, &mut clique, &up[v as usize], max_dim + 1, &mut cells);
    }
    SimplicialComplex::from_closed_cells(cells)
}

fn expand_cliques(
    up: &[Vec<Vertex>],
    clique: &mut Vec<Vertex>,
    candidates: &[Vertex],
    max_size: usize,
    out: &mut Vec<Simplex>,
) {
    out.push(Simplex::from_sorted(clique));
    if clique.len() == max_size {
        return;
    }
    for (i, &w) in candidates.iter().enumerate() {
        let next: Vec<Vertex> = intersect_sorted(&candidates[i + 1..], &up[w as usize]);
        clique.push(w);
        expand_cliques(up, clique, &next, max_size, out);
        clique.pop();
    }
}

fn intersect_sorted(a: &[Vertex], b: &[Vertex]) -> Vec<Vertex> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Graph joining every pair of points at Euclidean distance at most `epsilon`.
pub fn neighborhood_graph(cloud: &PointCloud, epsilon: f64) -> Graph {
    let pts = cloud.points();
    let mut edges = Vec::new();
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            if distance(&pts[i], &pts[j]) <= epsilon {
                edges.push((i as Vertex, j as Vertex));
            }
        }
    }
    Graph::new(pts.len(), edges).expect("neighbourhood graph edges are in range")
}

/// `max_dim`-skeleton of the Vietoris-Rips complex at scale `epsilon`.
pub fn vietoris_rips(
    cloud: &PointCloud,
    epsilon: f64,
    max_dim: usize,
) -> Result<SimplicialComplex> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon must be >= 0, got {epsilon}"
        )));
    }
    Ok(flag_complex(&neighborhood_graph(cloud, epsilon), max_dim))
}

/// G(n, p): each unordered pair `(i, j)`, `i < j`, visited in lexicographic order and
/// kept when a uniform draw in `[0, 1)` falls below `p`.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "probability {p} outside [0, 1]"
        )));
    }
    let mut rng = rng_for(seed, stream::ERDOS_RENYI);
    let mut edges = Vec::new();
    for i in 0..n as Vertex {
        for j in i + 1..n as Vertex {
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

/// `n` points uniform on the unit sphere `S^sphere_dim`: standard normal vectors in
/// `R^(sphere_dim + 1)` scaled to unit length.
pub fn sphere_sample(n: usize, sphere_dim: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 || sphere_dim == 0 {
        return Err(Error::InvalidParameter(
            "sphere sampling needs n >= 1 and sphere_dim >= 1".into(),
        ));
    }
    let mut rng = rng_for(seed, stream::SPHERE);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let x: Vec<f64> = (0..=sphere_dim)
            .map(|_| rng.sample(StandardNormal))
            .collect();
        let norm = x.iter().map(|c| c * c).sum::<f64>().sqrt();
        // a zero vector has probability zero, but would divide by zero
        if norm > 0.0 {
            points.push(x.into_iter().map(|c| c / norm).collect());
        }
    }
    PointCloud::new(points)
}

/// `x -> (x, x)`.
pub fn diagonal_embed(cloud: &PointCloud) -> PointCloud {
    PointCloud {
        points: cloud
            .points()
            .iter()
            .map(|p| p.iter().chain(p.iter()).copied().collect())
            .collect(),
    }
}
