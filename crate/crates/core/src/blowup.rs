//! The Mayer-Vietoris blowup complex `K^U`: product cells `σ × Δ^J` for every nonempty
//! `J ⊆ label(σ)`, with boundary `∂σ × Δ^J + σ × ∂Δ^J` over Z/2.
//!
//! Cells are stored in blowup-filtration order: by nerve face (lexicographic nerve
//! filtration) first, by base cell (lexicographic filtration of `K`) second. Each nerve
//! face therefore owns one contiguous segment, and the local phase (nerve vertices)
//! precedes the global phase.

use std::io::Write;
use std::ops::Range;

use num_rational::Ratio;
use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::complex::{for_each_facet, Filtration, SimplicialComplex};
use crate::cover::{nerve, Cover, Label, Nerve};
use crate::error::{Error, Result};
use crate::homology::{BoundaryMatrix, Column};

/// `σ × Δ^J`, as (index of σ in `K`, index of `J` in the nerve).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductCell {
    pub base: u32,
    pub face: u32,
}

pub struct BlowupComplex {
    cells: Vec<ProductCell>,
    /// `segments[f]..segments[f + 1]` holds the cells over nerve face `f`.
    segments: Vec<usize>,
    nerve: Nerve,
    base_size: usize,
}

impl BlowupComplex {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn base_size(&self) -> usize {
        self.base_size
    }

    pub fn cells(&self) -> &[ProductCell] {
        &self.cells
    }

    pub fn nerve(&self) -> &Nerve {
        &self.nerve
    }

    pub fn segment(&self, face: usize) -> Range<usize> {
        self.segments[face]..self.segments[face + 1]
    }

    /// Segments of the local phase, one per nerve vertex, in order.
    pub fn local_segments(&self) -> Vec<Range<usize>> {
        (0..self.nerve.len())
            .take_while(|&f| self.nerve.face(f).dim() == 0)
            .map(|f| self.segment(f))
            .collect()
    }

    /// All cells whose nerve factor has positive dimension.
    pub fn global_range(&self) -> Range<usize> {
        let start = self.local_segments().last().map_or(0, |r| r.end);
        start..self.cells.len()
    }

    /// Position of `base × face`, if present.
    pub fn position(&self, base: u32, face: usize) -> Option<usize> {
        let seg = self.segment(face);
        self.cells[seg.clone()]
            .binary_search_by_key(&base, |c| c.base)
            .ok()
            .map(|k| seg.start + k)
    }

    pub fn dim_of(&self, cell: ProductCell, base_dims: &[u16]) -> usize {
        base_dims[cell.base as usize] as usize + self.nerve.face(cell.face as usize).dim()
    }

    /// `|K^U| / |K|` as an exact ratio.
    pub fn blowup_ratio(&self) -> Ratio<u64> {
        Ratio::new(self.cells.len() as u64, self.base_size.max(1) as u64)
    }

    /// Writes `<base vertices>|<nerve indices>` per cell, in filtration order.
    pub fn dump<W: Write>(&self, k: &SimplicialComplex, mut out: W) -> Result<()> {
        for c in &self.cells {
            writeln!(
                out,
                "{}|{}",
                k.cell(c.base as usize),
                self.nerve.face(c.face as usize)
            )?;
        }
        Ok(())
    }
}

/// `|K^U| / |K|`.
pub fn blowup_factor(b: &BlowupComplex) -> f64 {
    b.cells.len() as f64 / b.base_size.max(1) as f64
}

/// Builds `K^U` in filtration order with a two-pass count-then-fill over contiguous
/// chunks of base cells, one chunk per worker of the current rayon pool. Besides the
/// output the only storage is a `chunks × nerve faces` count table.
pub fn build_blowup_complex(k: &SimplicialComplex, c: &Cover) -> Result<BlowupComplex> {
    if c.labels().len() != k.len() {
        return Err(Error::InvalidParameter(
            "cover does not match complex".into(),
        ));
    }
    let nerve = nerve(c);
    let faces = nerve.len();

    // nerve faces under each distinct label, in nerve filtration order
    let mut by_label: FxHashMap<&Label, Vec<u32>> = FxHashMap::default();
    for l in c.labels() {
        by_label.entry(l).or_insert_with(|| {
            let mut ids: Vec<u32> = (1u64..1 << l.len())
                .map(|mask| {
                    let j: Vec<u32> = (0..l.len())
                        .filter(|b| mask >> b & 1 == 1)
                        .map(|b| l[b])
                        .collect();
                    nerve.face_index(&j).expect("label subsets are nerve faces") as u32
                })
                .collect();
            ids.sort_unstable();
            ids
        });
    }
    let faces_of = |j: usize| -> &[u32] { &by_label[&c.labels()[j]] };

    let m = k.len();
    let chunk_count = rayon::current_num_threads().clamp(1, m.max(1));
    let chunk_len = m.div_ceil(chunk_count).max(1);
    let chunks: Vec<Range<usize>> = (0..m)
        .step_by(chunk_len)
        .map(|s| s..(s + chunk_len).min(m))
        .collect();

    // pass 1: per-chunk counts per nerve face
    let counts: Vec<Vec<usize>> = chunks
        .par_iter()
        .map(|r| {
            let mut cnt = vec![0usize; faces];
            for j in r.clone() {
                for &f in faces_of(j) {
                    cnt[f as usize] += 1;
                }
            }
            cnt
        })
        .collect();

    // prefix sums: segment starts, then per-(face, chunk) windows in face-major order
    let mut segments = vec![0usize; faces + 1];
    for f in 0..faces {
        segments[f + 1] = segments[f] + counts.iter().map(|cnt| cnt[f]).sum::<usize>();
    }
    let total = segments[faces];

    // pass 2: each chunk fills its own window of every segment
    let mut cells = vec![ProductCell { base: 0, face: 0 }; total];
    let mut windows: Vec<Vec<&mut [ProductCell]>> =
        chunks.iter().map(|_| Vec::with_capacity(faces)).collect();
    let mut rest: &mut [ProductCell] = &mut cells;
    for f in 0..faces {
        for (ci, cnt) in counts.iter().enumerate() {
            let (w, tail) = std::mem::take(&mut rest).split_at_mut(cnt[f]);
            windows[ci].push(w);
            rest = tail;
        }
    }
    chunks
        .par_iter()
        .zip(windows.par_iter_mut())
        .for_each(|(r, win)| {
            let mut cursor = vec![0usize; faces];
            for j in r.clone() {
                for &f in faces_of(j) {
                    let fi = f as usize;
                    win[fi][cursor[fi]] = ProductCell {
                        base: j as u32,
                        face: f,
                    };
                    cursor[fi] += 1;
                }
            }
        });

    Ok(BlowupComplex {
        cells,
        segments,
        nerve,
        base_size: m,
    })
}

/// Positions of the faces of `cell`: `(∂σ) × J` and `σ × (∂J)`, sorted. `base` is the
/// boundary matrix of `K` in its lexicographic order.
pub fn blowup_boundary(
    cell: ProductCell,
    b: &BlowupComplex,
    base: &BoundaryMatrix,
) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    let missing = |what: String| {
        Error::Structural(format!(
            "{what} missing from blowup; the cover is not closed"
        ))
    };
    for &r in base.column(cell.base as usize) {
        out.push(
            b.position(r, cell.face as usize)
                .ok_or_else(|| missing(format!("face {r} x {}", cell.face)))?,
        );
    }
    let j = b.nerve.face(cell.face as usize);
    let mut err = None;
    for_each_facet(j.vertices(), |jf| {
        let pos = b
            .nerve
            .face_index(jf)
            .and_then(|fi| b.position(cell.base, fi));
        match pos {
            Some(p) => out.push(p),
            None => err = Some(missing(format!("{} x {jf:?}", cell.base))),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    out.sort_unstable();
    Ok(out)
}

/// Boundary matrix of `K^U` in its filtration order.
pub fn blowup_boundary_matrix(b: &BlowupComplex, base: &BoundaryMatrix) -> Result<BoundaryMatrix> {
    let columns: Vec<Result<Column>> = b
        .cells
        .par_iter()
        .enumerate()
        .map(|(j, &cell)| {
            let col = blowup_boundary(cell, b, base)?;
            if col.last().is_some_and(|&r| r >= j) {
                return Err(Error::Structural(format!(
                    "blowup cell {j} precedes one of its faces"
                )));
            }
            Ok(col.into_iter().map(|r| r as u32).collect())
        })
        .collect();
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let dims = b
        .cells
        .iter()
        .map(|&c| b.dim_of(c, base.dims()) as u16)
        .collect();
    Ok(BoundaryMatrix::from_parts_unchecked(columns, dims))
}

/// Orders product cells by `(position of J in nerve_filt, position of σ in base_filt)`.
pub fn blowup_filtration(
    cells: &[ProductCell],
    k: &SimplicialComplex,
    nerve: &Nerve,
    base_filt: &Filtration,
    nerve_filt: &Filtration,
) -> Result<Vec<ProductCell>> {
    let key = |c: &ProductCell| -> Result<(usize, usize)> {
        let j = nerve.face(c.face as usize);
        let s = k.cell(c.base as usize);
        let nf = nerve_filt
            .index_of(j.vertices())
            .ok_or_else(|| Error::Structural(format!("nerve face {j:?} not in filtration")))?;
        let bf = base_filt
            .index_of(s.vertices())
            .ok_or_else(|| Error::Structural(format!("cell {s:?} not in filtration")))?;
        Ok((nf, bf))
    };
    let mut keyed = cells
        .iter()
        .map(|c| key(c).map(|kk| (kk, *c)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_unstable_by_key(|(kk, _)| *kk);
    Ok(keyed.into_iter().map(|(_, c)| c).collect())
}
