//! Boundary matrices over Z/2, the standard persistence reduction, and Betti numbers.
//!
//! Columns are sorted sparse row-index vectors ("vector of vectors"). Adding one column
//! to another is a symmetric-difference merge. The lowest entry ("low") of a column is
//! its last element.

use std::fmt;
use std::ops::Range;

use rayon::prelude::*;

use crate::complex::{for_each_facet, CellSet, Filtration, SimplicialComplex};
use crate::error::{Error, Result};

pub type Column = Vec<u32>;

const NO_OWNER: u32 = u32::MAX;

/// Largest matrix the dense rank oracle accepts.
pub const ORACLE_MAX_COLUMNS: usize = 20_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    columns: Vec<Column>,
    dims: Vec<u16>,
}

impl BoundaryMatrix {
    /// Checks that every column is strictly increasing and only references earlier columns.
    pub fn from_columns(columns: Vec<Column>, dims: Vec<u16>) -> Result<Self> {
        if columns.len() != dims.len() {
            return Err(Error::Structural(
                "column and dimension counts differ".into(),
            ));
        }
        for (j, col) in columns.iter().enumerate() {
            if !col.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::Structural(format!(
                    "column {j} is not strictly increasing"
                )));
            }
            if col.last().is_some_and(|&r| r as usize >= j) {
                return Err(Error::Structural(format!(
                    "column {j} references a later cell"
                )));
            }
        }
        Ok(BoundaryMatrix { columns, dims })
    }

    pub(crate) fn from_parts_unchecked(columns: Vec<Column>, dims: Vec<u16>) -> Self {
        BoundaryMatrix { columns, dims }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn dims(&self) -> &[u16] {
        &self.dims
    }

    pub fn nonzeros(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }

    /// Checks `d∘d = 0`: for each column, the sum of the columns it lists vanishes.
    pub fn boundary_squared_is_zero(&self) -> bool {
        let mut acc: Vec<u32> = Vec::new();
        let mut scratch = Vec::new();
        self.columns.iter().all(|col| {
            acc.clear();
            for &r in col {
                add_column(&mut acc, &self.columns[r as usize], &mut scratch);
            }
            acc.is_empty()
        })
    }

    pub(crate) fn into_parts(self) -> (Vec<Column>, Vec<u16>) {
        (self.columns, self.dims)
    }
}

/// Boundary matrix of a filtration: column `j` lists the positions of the facets of
/// cell `j`.
pub fn build_boundary_matrix(f: &Filtration) -> Result<BoundaryMatrix> {
    boundary_of_cells(f.cell_set())
}

/// Boundary matrix of `k` in its lexicographic filtration order.
pub fn complex_boundary_matrix(k: &SimplicialComplex) -> Result<BoundaryMatrix> {
    boundary_of_cells(k.cell_set())
}

fn boundary_of_cells(cells: &CellSet) -> Result<BoundaryMatrix> {
    let columns: Vec<Result<Column>> = (0..cells.len())
        .into_par_iter()
        .map(|j| {
            let s = &cells[j];
            let mut col = Vec::with_capacity(s.vertices().len());
            let mut missing = false;
            for_each_facet(s.vertices(), |f| match cells.get_index_of(f) {
                Some(i) if i < j => col.push(i as u32),
                _ => missing = true,
            });
            if missing {
                return Err(Error::Structural(format!(
                    "a face of {s:?} is missing or placed after it"
                )));
            }
            col.sort_unstable();
            Ok(col)
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let dims = cells.iter().map(|s| s.dim() as u16).collect();
    Ok(BoundaryMatrix { columns, dims })
}

/// `target += source` over Z/2, both sorted.
pub(crate) fn add_column(target: &mut Column, source: &[u32], scratch: &mut Column) {
    scratch.clear();
    scratch.reserve(target.len() + source.len());
    let (mut i, mut j) = (0, 0);
    while i < target.len() && j < source.len() {
        let (a, b) = (target[i], source[j]);
        if a < b {
            scratch.push(a);
            i += 1;
        } else if b < a {
            scratch.push(b);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    scratch.extend_from_slice(&target[i..]);
    scratch.extend_from_slice(&source[j..]);
    std::mem::swap(target, scratch);
}

/// Maps a row index to the column whose low it is, for rows in `offset..offset + len`.
pub(crate) struct PivotTable {
    offset: usize,
    owner: Vec<u32>,
}

impl PivotTable {
    pub(crate) fn new(rows: Range<usize>) -> Self {
        PivotTable {
            offset: rows.start,
            owner: vec![NO_OWNER; rows.len()],
        }
    }

    #[inline]
    fn get(&self, row: u32) -> Option<usize> {
        let o = self.owner[row as usize - self.offset];
        (o != NO_OWNER).then_some(o as usize)
    }

    #[inline]
    fn set(&mut self, row: u32, col: usize) {
        self.owner[row as usize - self.offset] = col as u32;
    }

    /// Copies this table's entries into `global`, which must cover its row range.
    pub(crate) fn merge_into(&self, global: &mut PivotTable) {
        for (k, &o) in self.owner.iter().enumerate() {
            if o != NO_OWNER {
                global.owner[self.offset + k - global.offset] = o;
            }
        }
    }
}

/// Left-to-right reduction of `span` (global columns `start..start + span.len()`).
/// An owner column below `start` is read from `prior`, which holds already-reduced
/// columns `0..start` (it may be empty when no owner can lie there).
pub(crate) fn reduce_span(
    prior: &[Column],
    span: &mut [Column],
    start: usize,
    pivots: &mut PivotTable,
) {
    let mut scratch = Vec::new();
    for k in 0..span.len() {
        let (done, rest) = span.split_at_mut(k);
        let col = &mut rest[0];
        while let Some(&low) = col.last() {
            match pivots.get(low) {
                Some(owner) => {
                    let source: &[u32] = if owner < start {
                        &prior[owner]
                    } else {
                        &done[owner - start]
                    };
                    add_column(col, source, &mut scratch);
                }
                None => {
                    pivots.set(low, start + k);
                    break;
                }
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReductionMode {
    /// Faces outside the span must belong to columns that are already reduced.
    Absolute,
    /// Faces outside the span are dropped before reducing (relative homology).
    Relative,
}

/// Creator/destroyer pairs `(creator, destroyer)` plus unpaired cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PersistencePairing {
    pub pairs: Vec<(usize, usize)>,
    pub unpaired: Vec<usize>,
}

/// Matrix state for incremental reduction of column spans.
pub struct Reducer {
    columns: Vec<Column>,
    dims: Vec<u16>,
    pivots: PivotTable,
    reduced: Vec<bool>,
}

impl Reducer {
    pub fn new(m: BoundaryMatrix) -> Self {
        let n = m.len();
        Reducer {
            columns: m.columns,
            dims: m.dims,
            pivots: PivotTable::new(0..n),
            reduced: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn dims(&self) -> &[u16] {
        &self.dims
    }

    pub fn is_reduced(&self, j: usize) -> bool {
        self.reduced[j]
    }

    /// Reduces the columns of `span` and returns the pairing restricted to it: pairs whose
    /// destroyer lies in the span, and span columns that are zero and not killed inside it.
    pub fn pair_cells(&mut self, span: Range<usize>, mode: ReductionMode) -> PersistencePairing {
        assert!(span.end <= self.columns.len(), "span outside matrix");
        let start = span.start;
        match mode {
            ReductionMode::Absolute => {
                debug_assert!(self.columns[span.clone()]
                    .iter()
                    .flatten()
                    .all(|&r| r as usize >= start || self.reduced[r as usize]));
                let (prior, rest) = self.columns.split_at_mut(start);
                reduce_span(prior, &mut rest[..span.len()], start, &mut self.pivots);
            }
            ReductionMode::Relative => {
                for col in &mut self.columns[span.clone()] {
                    col.retain(|&r| r as usize >= start);
                }
                let mut local = PivotTable::new(span.clone());
                reduce_span(&[], &mut self.columns[span.clone()], start, &mut local);
                local.merge_into(&mut self.pivots);
            }
        }
        for r in &mut self.reduced[span.clone()] {
            *r = true;
        }
        self.span_pairing(span)
    }

    fn span_pairing(&self, span: Range<usize>) -> PersistencePairing {
        let mut pairs = Vec::new();
        let mut killed = vec![false; span.len()];
        for j in span.clone() {
            if let Some(&low) = self.columns[j].last() {
                pairs.push((low as usize, j));
                if (low as usize) >= span.start {
                    killed[low as usize - span.start] = true;
                }
            }
        }
        let unpaired = span
            .clone()
            .filter(|&j| self.columns[j].is_empty() && !killed[j - span.start])
            .collect();
        PersistencePairing { pairs, unpaired }
    }

    /// Pairing over every column; all columns must have been reduced.
    pub fn pairing(&self) -> PersistencePairing {
        assert!(
            self.reduced.iter().all(|&r| r),
            "pairing requested before full reduction"
        );
        self.span_pairing(0..self.columns.len())
    }

    pub fn reduced_column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub(crate) fn columns_mut(&mut self) -> &mut [Column] {
        &mut self.columns
    }

    pub(crate) fn pivots_mut(&mut self) -> &mut PivotTable {
        &mut self.pivots
    }

    pub(crate) fn mark_reduced(&mut self, span: Range<usize>) {
        for r in &mut self.reduced[span] {
            *r = true;
        }
    }
}

/// Reduces `span` of a copy of `m`. In absolute mode the columns before the span are
/// reduced first, so that faces outside the span are "already reduced".
pub fn pair_cells(
    m: &BoundaryMatrix,
    span: Range<usize>,
    mode: ReductionMode,
) -> PersistencePairing {
    let mut r = Reducer::new(m.clone());
    if mode == ReductionMode::Absolute && span.start > 0 {
        r.pair_cells(0..span.start, ReductionMode::Absolute);
    }
    r.pair_cells(span, mode)
}

/// Betti numbers indexed by dimension, with trailing zeros trimmed.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct BettiNumbers {
    beta: Vec<usize>,
}

impl BettiNumbers {
    pub fn from_vec(mut beta: Vec<usize>) -> Self {
        while beta.last() == Some(&0) {
            beta.pop();
        }
        BettiNumbers { beta }
    }

    pub fn get(&self, dim: usize) -> usize {
        self.beta.get(dim).copied().unwrap_or(0)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.beta
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.beta
            .iter()
            .enumerate()
            .map(|(i, &b)| if i % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }
}

impl fmt::Display for BettiNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &b) in self.beta.iter().enumerate() {
            if b == 0 {
                continue;
            }
            if !first {
                write!(f, " ")?;
            }
            write!(f, "β{i}={b}")?;
            first = false;
        }
        if first {
            write!(f, "β=0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BettiNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.beta)
    }
}

/// Counts unpaired cells per dimension.
pub fn betti(p: &PersistencePairing, dims: &[u16]) -> BettiNumbers {
    let mut beta = Vec::new();
    for &j in &p.unpaired {
        let d = dims[j] as usize;
        if beta.len() <= d {
            beta.resize(d + 1, 0);
        }
        beta[d] += 1;
    }
    BettiNumbers::from_vec(beta)
}

/// Betti numbers from ranks: `β_n = dim C_n - rank ∂_n - rank ∂_{n+1}`, each rank found
/// by dense row-echelon elimination over Z/2 on bit-packed rows.
pub fn rank_oracle(m: &BoundaryMatrix) -> Result<BettiNumbers> {
    if m.len() > ORACLE_MAX_COLUMNS {
        return Err(Error::OracleTooLarge {
            columns: m.len(),
            max: ORACLE_MAX_COLUMNS,
        });
    }
    let top = match m.dims().iter().max() {
        Some(&d) => d as usize,
        None => return Ok(BettiNumbers::default()),
    };
    let mut cells_by_dim: Vec<Vec<usize>> = vec![Vec::new(); top + 1];
    for (j, &d) in m.dims().iter().enumerate() {
        cells_by_dim[d as usize].push(j);
    }
    // rank[n] = rank of ∂_n : C_n -> C_{n-1}
    let mut rank = vec![0usize; top + 2];
    for n in 1..=top {
        let row_of: std::collections::HashMap<usize, usize> = cells_by_dim[n - 1]
            .iter()
            .enumerate()
            .map(|(i, &j)| (j, i))
            .collect();
        let width = cells_by_dim[n - 1].len();
        let dense: Vec<Vec<u64>> = cells_by_dim[n]
            .iter()
            .map(|&j| {
                let mut bits = vec![0u64; width.div_ceil(64)];
                for &r in m.column(j) {
                    let i = *row_of.get(&(r as usize)).ok_or_else(|| {
                        Error::Structural(format!("column {j} has a face of the wrong dimension"))
                    })?;
                    bits[i / 64] ^= 1 << (i % 64);
                }
                Ok(bits)
            })
            .collect::<Result<_>>()?;
        rank[n] = gf2_rank(dense, width);
    }
    let beta = (0..=top)
        .map(|n| cells_by_dim[n].len() - rank[n] - rank[n + 1])
        .collect();
    Ok(BettiNumbers::from_vec(beta))
}

fn gf2_rank(mut rows: Vec<Vec<u64>>, width: usize) -> usize {
    let mut rank = 0;
    for bit in 0..width {
        let (w, mask) = (bit / 64, 1u64 << (bit % 64));
        let Some(p) = (rank..rows.len()).find(|&r| rows[r][w] & mask != 0) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot = &head[rank];
        for row in tail.iter_mut().filter(|row| row[w] & mask != 0) {
            for (x, y) in row[w..].iter_mut().zip(&pivot[w..]) {
                *x ^= y;
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{closure, Simplex};

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec())
    }

    fn hollow_triangle() -> BoundaryMatrix {
        // a, b, c, ab, bc, ca in that order
        let f = Filtration::from_order(vec![
            s(&[0]),
            s(&[1]),
            s(&[2]),
            s(&[0, 1]),
            s(&[1, 2]),
            s(&[0, 2]),
        ])
        .unwrap();
        build_boundary_matrix(&f).unwrap()
    }

    #[test]
    fn triangle_matrix_columns() {
        let m = hollow_triangle();
        let cols: Vec<Vec<u32>> = m.columns().to_vec();
        assert_eq!(
            cols,
            vec![vec![], vec![], vec![], vec![0, 1], vec![1, 2], vec![0, 2]]
        );
        assert!(m.boundary_squared_is_zero());
    }

    #[test]
    fn small_matrices() {
        let v = build_boundary_matrix(&Filtration::from_order(vec![s(&[0])]).unwrap()).unwrap();
        assert_eq!(v.columns(), &[Vec::<u32>::new()]);
        let p = build_boundary_matrix(
            &Filtration::from_order(vec![s(&[0]), s(&[1]), s(&[0, 1])]).unwrap(),
        )
        .unwrap();
        assert_eq!(p.columns(), &[vec![], vec![], vec![0, 1]]);
    }

    #[test]
    fn missing_face_is_structural_error() {
        let f = Filtration::from_order(vec![s(&[0]), s(&[0, 1])]).unwrap();
        assert!(matches!(
            build_boundary_matrix(&f),
            Err(Error::Structural(_))
        ));
        let f = Filtration::from_order(vec![s(&[0, 1]), s(&[0]), s(&[1])]).unwrap();
        assert!(build_boundary_matrix(&f).is_err());
    }

    #[test]
    fn triangle_pairing() {
        let m = hollow_triangle();
        let p = pair_cells(&m, 0..m.len(), ReductionMode::Absolute);
        assert_eq!(p.pairs, vec![(1, 3), (2, 4)]);
        assert_eq!(p.unpaired, vec![0, 5]);
        assert_eq!(betti(&p, m.dims()).as_slice(), &[1, 1]);
    }

    #[test]
    fn vertex_and_edge_pairing() {
        let v = BoundaryMatrix::from_columns(vec![vec![]], vec![0]).unwrap();
        let p = pair_cells(&v, 0..1, ReductionMode::Absolute);
        assert_eq!(p.unpaired, vec![0]);
        let e =
            BoundaryMatrix::from_columns(vec![vec![], vec![], vec![0, 1]], vec![0, 0, 1]).unwrap();
        let p = pair_cells(&e, 0..3, ReductionMode::Absolute);
        assert_eq!(p.pairs, vec![(1, 2)]);
        assert_eq!(p.unpaired, vec![0]);
        assert_eq!(betti(&p, e.dims()).as_slice(), &[1]);
    }

    #[test]
    fn betti_examples() {
        let full = complex_boundary_matrix(&closure([s(&[0, 1, 2])])).unwrap();
        let p = pair_cells(&full, 0..full.len(), ReductionMode::Absolute);
        assert_eq!(betti(&p, full.dims()).as_slice(), &[1]);
        let two = BoundaryMatrix::from_columns(vec![vec![], vec![]], vec![0, 0]).unwrap();
        let p = pair_cells(&two, 0..2, ReductionMode::Absolute);
        assert_eq!(betti(&p, two.dims()).as_slice(), &[2]);
    }

    #[test]
    fn absolute_span_after_prefix() {
        let m = hollow_triangle();
        let mut r = Reducer::new(m.clone());
        r.pair_cells(0..3, ReductionMode::Absolute);
        let tail = r.pair_cells(3..6, ReductionMode::Absolute);
        assert_eq!(tail.pairs, vec![(1, 3), (2, 4)]);
        assert_eq!(tail.unpaired, vec![5]);
        assert_eq!(r.pairing(), pair_cells(&m, 0..6, ReductionMode::Absolute));
    }

    #[test]
    fn relative_mode_drops_outside_faces() {
        // edges of the hollow triangle relative to its vertices: H_1(K, K^0) has rank 3
        let m = hollow_triangle();
        let p = pair_cells(&m, 3..6, ReductionMode::Relative);
        assert!(p.pairs.is_empty());
        assert_eq!(p.unpaired, vec![3, 4, 5]);
        // filled triangle relative to its boundary: one relative 2-cycle
        let full = complex_boundary_matrix(&closure([s(&[0, 1, 2])])).unwrap();
        let p = pair_cells(&full, 6..7, ReductionMode::Relative);
        assert_eq!(p.unpaired, vec![6]);
    }

    #[test]
    fn rank_oracle_examples() {
        assert_eq!(rank_oracle(&hollow_triangle()).unwrap().as_slice(), &[1, 1]);
        let mut k: Vec<Simplex> = closure([s(&[0, 1, 2, 3, 4])]).cells().cloned().collect();
        k.pop();
        let sphere = closure(k);
        let m = complex_boundary_matrix(&sphere).unwrap();
        assert_eq!(rank_oracle(&m).unwrap().as_slice(), &[1, 0, 0, 1]);
        let empty = BoundaryMatrix::from_columns(vec![], vec![]).unwrap();
        assert_eq!(rank_oracle(&empty).unwrap().as_slice(), &[] as &[usize]);
    }

    #[test]
    fn rank_oracle_guard() {
        let n = ORACLE_MAX_COLUMNS + 1;
        let m = BoundaryMatrix::from_columns(vec![vec![]; n], vec![0; n]).unwrap();
        assert!(matches!(rank_oracle(&m), Err(Error::OracleTooLarge { .. })));
    }

    #[test]
    fn gf2_rank_dense() {
        // rows 1100, 0110, 1010 (bit i = column i): third is the sum of the first two
        let rows = vec![vec![0b0011u64], vec![0b0110], vec![0b0101]];
        assert_eq!(gf2_rank(rows, 4), 2);
    }

    #[test]
    fn from_columns_rejects_forward_references() {
        assert!(BoundaryMatrix::from_columns(vec![vec![0]], vec![1]).is_err());
        assert!(
            BoundaryMatrix::from_columns(vec![vec![], vec![], vec![1, 0]], vec![0, 0, 1]).is_err()
        );
    }

    #[test]
    fn display_betti() {
        assert_eq!(
            BettiNumbers::from_vec(vec![1, 0, 0, 1]).to_string(),
            "β0=1 β3=1"
        );
        assert_eq!(BettiNumbers::from_vec(vec![0, 0]).to_string(), "β=0");
    }
}
