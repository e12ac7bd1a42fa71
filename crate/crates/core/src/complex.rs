//! Abstract simplicial complexes over dense vertex ids, and filtrations on them.
//!
//! A [`Simplex`] is identified by its strictly increasing vertex sequence. A
//! [`SimplicialComplex`] stores its cells once, in the lexicographic filtration
//! order `(dimension, vertex sequence)`, so the position of a cell in the complex is
//! also its lexicographic filtration index.

use std::cmp::Ordering;
use std::fmt;
use std::hash::BuildHasherDefault;

use indexmap::IndexSet;
use rustc_hash::{FxHashSet, FxHasher};

use crate::error::{Error, Result};

pub type Vertex = u32;

pub(crate) type CellSet = IndexSet<Simplex, BuildHasherDefault<FxHasher>>;

/// A simplex as a strictly increasing sequence of vertex ids.
///
/// Equality and hashing agree with the underlying `[Vertex]` slice, so containers keyed
/// on `Simplex` can be queried with a borrowed slice.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Simplex(Box<[Vertex]>);

impl Simplex {
    /// Builds a simplex from an arbitrary vertex list; the list is sorted and deduplicated.
    pub fn new(mut vertices: Vec<Vertex>) -> Self {
        vertices.sort_unstable();
        vertices.dedup();
        assert!(!vertices.is_empty(), "a simplex needs at least one vertex");
        Simplex(vertices.into_boxed_slice())
    }

    /// Builds a simplex from a slice that is already strictly increasing.
    pub fn from_sorted(vertices: &[Vertex]) -> Self {
        debug_assert!(is_canonical(vertices));
        Simplex(vertices.into())
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// The codimension-one faces, in lexicographic order. Empty for a vertex.
    pub fn boundary(&self) -> Vec<Simplex> {
        let mut out = Vec::with_capacity(self.0.len());
        for_each_facet(&self.0, |f| out.push(Simplex::from_sorted(f)));
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Lexicographic filtration order: dimension first, then the vertex sequence.
    pub fn filtration_cmp(&self, other: &Simplex) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }

    /// True when every vertex of `self` is a vertex of `other`.
    pub fn is_face_of(&self, other: &Simplex) -> bool {
        let mut it = other.0.iter();
        self.0.iter().all(|v| it.any(|w| w == v))
    }
}

impl std::borrow::Borrow<[Vertex]> for Simplex {
    fn borrow(&self) -> &[Vertex] {
        &self.0
    }
}

impl fmt::Debug for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

pub(crate) fn is_canonical(vertices: &[Vertex]) -> bool {
    !vertices.is_empty() && vertices.windows(2).all(|w| w[0] < w[1])
}

/// Calls `f` once per codimension-one face, reusing a single buffer. Faces are
/// produced by deleting vertex 0, 1, ..., so they come out in reverse lexicographic order.
pub(crate) fn for_each_facet(vertices: &[Vertex], mut f: impl FnMut(&[Vertex])) {
    if vertices.len() < 2 {
        return;
    }
    let mut buf: Vec<Vertex> = vertices[1..].to_vec();
    f(&buf);
    for i in 1..vertices.len() {
        // buf currently omits vertex i-1; swap it back in place of vertex i
        buf[i - 1] = vertices[i - 1];
        f(&buf);
    }
}

/// Simplicial boundary over Z/2: the set of codimension-one faces.
pub fn simplicial_boundary(sigma: &Simplex) -> Vec<Simplex> {
    sigma.boundary()
}

/// A finite, face-closed collection of simplices.
#[derive(Clone)]
pub struct SimplicialComplex {
    cells: CellSet,
    dim: Option<usize>,
}

impl SimplicialComplex {
    pub fn empty() -> Self {
        SimplicialComplex {
            cells: CellSet::default(),
            dim: None,
        }
    }

    /// Builds a complex from cells the caller guarantees to be face-closed and
    /// duplicate-free. Closure is checked in debug builds.
    pub(crate) fn from_closed_cells(mut cells: Vec<Simplex>) -> Self {
        cells.sort_unstable_by(|a, b| a.filtration_cmp(b));
        let dim = cells.last().map(Simplex::dim);
        let set: CellSet = cells.into_iter().collect();
        let k = SimplicialComplex { cells: set, dim };
        debug_assert!(k.check_closed().is_ok());
        k
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Top dimension; `None` for the empty complex.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Cells in lexicographic filtration order.
    pub fn cells(&self) -> impl ExactSizeIterator<Item = &Simplex> + '_ {
        self.cells.iter()
    }

    pub fn cell(&self, idx: usize) -> &Simplex {
        &self.cells[idx]
    }

    pub fn index_of(&self, vertices: &[Vertex]) -> Option<usize> {
        self.cells.get_index_of(vertices)
    }

    pub fn contains(&self, vertices: &[Vertex]) -> bool {
        self.cells.contains(vertices)
    }

    pub(crate) fn cell_set(&self) -> &CellSet {
        &self.cells
    }

    /// Number of 0-cells. Vertices occupy the first positions of the order.
    pub fn vertex_count(&self) -> usize {
        self.cells.iter().take_while(|s| s.dim() == 0).count()
    }

    /// Cell counts per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        let mut f = vec![0; self.dim.map_or(0, |d| d + 1)];
        for s in &self.cells {
            f[s.dim()] += 1;
        }
        f
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.f_vector()
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 0 { c as i64 } else { -(c as i64) })
            .sum()
    }

    /// Verifies that every facet of every cell is present.
    pub fn check_closed(&self) -> Result<()> {
        for s in &self.cells {
            let mut missing = None;
            for_each_facet(s.vertices(), |f| {
                if missing.is_none() && !self.cells.contains(f) {
                    missing = Some(Simplex::from_sorted(f));
                }
            });
            if let Some(m) = missing {
                return Err(Error::Structural(format!("face {m:?} of {s:?} is missing")));
            }
        }
        Ok(())
    }

    pub fn lexicographic_filtration(&self) -> Filtration {
        Filtration {
            cells: self.cells.clone(),
        }
    }

    pub fn into_filtration(self) -> Filtration {
        Filtration { cells: self.cells }
    }
}

impl PartialEq for SimplicialComplex {
    fn eq(&self, other: &Self) -> bool {
        // both sides are stored in canonical order
        self.cells.len() == other.cells.len()
            && self
                .cells
                .iter()
                .zip(other.cells.iter())
                .all(|(a, b)| a == b)
    }
}

impl Eq for SimplicialComplex {}

impl fmt::Debug for SimplicialComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.cells.iter()).finish()
    }
}

/// Smallest face-closed superset of `cells`.
pub fn closure<I>(cells: I) -> SimplicialComplex
where
    I: IntoIterator<Item = Simplex>,
{
    let mut seen: FxHashSet<Simplex> = FxHashSet::default();
    let mut stack: Vec<Simplex> = Vec::new();
    for s in cells {
        if seen.insert(s.clone()) {
            stack.push(s);
        }
    }
    while let Some(s) = stack.pop() {
        for_each_facet(s.vertices(), |f| {
            if !seen.contains(f) {
                let face = Simplex::from_sorted(f);
                seen.insert(face.clone());
                stack.push(face);
            }
        });
    }
    SimplicialComplex::from_closed_cells(seen.into_iter().collect())
}

/// All cells of dimension at most `k`.
pub fn skeleton(k: &SimplicialComplex, max_dim: usize) -> SimplicialComplex {
    let cells: Vec<Simplex> = k
        .cells()
        .take_while(|s| s.dim() <= max_dim)
        .cloned()
        .collect();
    SimplicialComplex::from_closed_cells(cells)
}

/// Cells with no proper coface, in lexicographic order.
pub fn maximal_cells(k: &SimplicialComplex) -> Vec<Simplex> {
    let mut has_coface = vec![false; k.len()];
    for s in k.cells() {
        for_each_facet(s.vertices(), |f| {
            if let Some(i) = k.index_of(f) {
                has_coface[i] = true;
            }
        });
    }
    k.cells()
        .zip(has_coface)
        .filter(|(_, c)| !c)
        .map(|(s, _)| s.clone())
        .collect()
}

/// A total order on a set of cells. Valid when every prefix is face-closed.
#[derive(Clone)]
pub struct Filtration {
    cells: CellSet,
}

impl Filtration {
    /// Wraps an explicit order. Fails on duplicate cells; validity is checked separately
    /// with [`validate_filtration`].
    pub fn from_order(order: Vec<Simplex>) -> Result<Self> {
        let n = order.len();
        let cells: CellSet = order.into_iter().collect();
        if cells.len() != n {
            return Err(Error::Structural("filtration lists a cell twice".into()));
        }
        Ok(Filtration { cells })
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, idx: usize) -> &Simplex {
        &self.cells[idx]
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = &Simplex> + '_ {
        self.cells.iter()
    }

    pub fn index_of(&self, vertices: &[Vertex]) -> Option<usize> {
        self.cells.get_index_of(vertices)
    }

    pub(crate) fn cell_set(&self) -> &CellSet {
        &self.cells
    }
}

impl fmt::Debug for Filtration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.cells.iter()).finish()
    }
}

pub fn lexicographic_filtration(k: &SimplicialComplex) -> Filtration {
    k.lexicographic_filtration()
}

/// True iff every cell's facets appear strictly before it.
pub fn validate_filtration(f: &Filtration) -> bool {
    f.cells().enumerate().all(|(j, s)| {
        let mut ok = true;
        for_each_facet(s.vertices(), |face| {
            ok &= matches!(f.index_of(face), Some(i) if i < j);
        });
        ok
    })
}
