//! Covers of a complex by subcomplexes, encoded as a label per cell: the sorted list of
//! cover sets containing that cell (the cell's nerve simplex).
//!
//! Partition-based covers come from a vertex partition `P` of the 1-skeleton into `p`
//! parts: cells inside part `i` get label `{i}`, straddling cells get the shared label
//! `{p}`, and closing the shared class adds `p` to the labels of its faces.

mod partition;

use num_rational::Ratio;
use rayon::prelude::*;
use smallvec::SmallVec;

pub use partition::{
    load_partition, part_capacity, partition_graph, write_partition, GraphPartition, IMBALANCE,
};

use crate::complex::{closure, for_each_facet, Simplex, SimplicialComplex, Vertex};
use crate::error::{Error, Result};
use crate::generators::Graph;

/// Sorted cover-set indices of one cell.
pub type Label = SmallVec<[u32; 2]>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cover {
    labels: Vec<Label>,
    set_count: usize,
}

impl Cover {
    /// `labels[j]` belongs to cell `j` of the complex.
    pub fn from_labels(
        k: &SimplicialComplex,
        labels: Vec<Label>,
        set_count: usize,
    ) -> Result<Self> {
        if labels.len() != k.len() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} cells",
                labels.len(),
                k.len()
            )));
        }
        for (j, l) in labels.iter().enumerate() {
            if l.is_empty() {
                return Err(Error::InvalidParameter(format!(
                    "cell {:?} is not covered",
                    k.cell(j)
                )));
            }
            if !l.windows(2).all(|w| w[0] < w[1]) || *l.last().unwrap() as usize >= set_count {
                return Err(Error::InvalidParameter(format!(
                    "bad label {l:?} on cell {j}"
                )));
            }
        }
        Ok(Cover { labels, set_count })
    }

    /// Closed cover whose set `i` is the closure of `generators[i]`. Every cell of `k`
    /// must land in some set.
    pub fn from_generators(k: &SimplicialComplex, generators: &[Vec<Simplex>]) -> Result<Self> {
        let mut labels: Vec<Label> = vec![Label::new(); k.len()];
        for (i, gens) in generators.iter().enumerate() {
            for cell in closure(gens.iter().cloned()).cells() {
                let j = k.index_of(cell.vertices()).ok_or_else(|| {
                    Error::InvalidParameter(format!("cover cell {cell:?} is not in the complex"))
                })?;
                labels[j].push(i as u32);
            }
        }
        Cover::from_labels(k, labels, generators.len())
    }

    pub fn set_count(&self) -> usize {
        self.set_count
    }

    pub fn label(&self, cell: usize) -> &[u32] {
        &self.labels[cell]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    /// `|U_i|` for every set.
    pub fn set_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.set_count];
        for l in &self.labels {
            for &i in l {
                sizes[i as usize] += 1;
            }
        }
        sizes
    }

    /// Cell indices of set `i`, in complex order.
    pub fn members(&self, i: u32) -> Vec<usize> {
        (0..self.labels.len())
            .filter(|&j| self.labels[j].contains(&i))
            .collect()
    }

    /// True when each set is face-closed: a face carries every index its cofaces carry.
    pub fn is_closed(&self, k: &SimplicialComplex) -> bool {
        k.cells().enumerate().all(|(j, s)| {
            let mut ok = true;
            for_each_facet(s.vertices(), |f| {
                let face = &self.labels[k.index_of(f).expect("complex is face-closed")];
                ok &= self.labels[j].iter().all(|i| face.contains(i));
            });
            ok
        })
    }

    /// Size of the largest label; at least 3 means some three sets meet.
    pub fn max_label_len(&self) -> usize {
        self.labels.iter().map(|l| l.len()).max().unwrap_or(0)
    }
}

/// 1-skeleton of `k` as a graph on `0..=max vertex id`.
pub fn one_skeleton_graph(k: &SimplicialComplex) -> Graph {
    let n = k
        .cells()
        .take_while(|s| s.dim() == 0)
        .map(|s| s.vertices()[0] as usize + 1)
        .max()
        .unwrap_or(0);
    let edges = k
        .cells()
        .skip_while(|s| s.dim() == 0)
        .take_while(|s| s.dim() == 1)
        .map(|s| (s.vertices()[0], s.vertices()[1]));
    Graph::new(n, edges).expect("edges of a complex are valid graph edges")
}

/// Index of the cover set receiving `sigma`: its part when all vertices share one part,
/// otherwise the shared index `p`.
pub fn partition_cell(p: &GraphPartition, sigma: &[Vertex]) -> u32 {
    let first = p.part_of(sigma[0]);
    if sigma[1..].iter().all(|&v| p.part_of(v) == first) {
        first
    } else {
        p.parts() as u32
    }
}

/// Open cover with `p + 1` classes partitioning the cells of `k`.
pub fn open_cover(k: &SimplicialComplex, p: &GraphPartition) -> Result<Cover> {
    if let Some(v) = k
        .cells()
        .take_while(|s| s.dim() == 0)
        .map(|s| s.vertices()[0])
        .find(|&v| v as usize >= p.vertex_count())
    {
        return Err(Error::InvalidParameter(format!(
            "vertex {v} is not assigned by the partition"
        )));
    }
    let cells = k.cell_set();
    let labels: Vec<Label> = (0..k.len())
        .into_par_iter()
        .map(|j| {
            let mut l = Label::new();
            l.push(partition_cell(p, cells[j].vertices()));
            l
        })
        .collect();
    Ok(Cover {
        labels,
        set_count: p.parts() + 1,
    })
}

/// Replaces the shared class (index `set_count - 1`) by its closure. The other classes of
/// an open cover from [`open_cover`] are already face-closed.
pub fn close_cover(c: &Cover, k: &SimplicialComplex) -> Cover {
    let shared = (c.set_count - 1) as u32;
    let mut in_shared: Vec<bool> = c.labels.par_iter().map(|l| l.contains(&shared)).collect();
    let f = k.f_vector();
    // cells of one dimension form a contiguous run in complex order
    let mut offsets = vec![0usize; f.len() + 1];
    for (d, count) in f.iter().enumerate() {
        offsets[d + 1] = offsets[d] + count;
    }
    let cells = k.cell_set();
    for d in (1..f.len()).rev() {
        let faces: Vec<usize> = (offsets[d]..offsets[d + 1])
            .into_par_iter()
            .filter(|&j| in_shared[j])
            .flat_map_iter(|j| {
                let mut out = Vec::with_capacity(d + 1);
                for_each_facet(cells[j].vertices(), |face| {
                    out.push(cells.get_index_of(face).expect("complex is face-closed"));
                });
                out
            })
            .collect();
        for i in faces {
            in_shared[i] = true;
        }
    }
    let labels = c
        .labels
        .par_iter()
        .zip(in_shared.par_iter())
        .map(|(l, &s)| {
            let mut l = l.clone();
            if s && !l.contains(&shared) {
                l.push(shared);
                l.sort_unstable();
            }
            l
        })
        .collect();
    Cover {
        labels,
        set_count: c.set_count,
    }
}

/// Partition-based cover: partition the 1-skeleton, then open and close the cover.
pub fn partition_based_cover(k: &SimplicialComplex, p: &GraphPartition) -> Result<Cover> {
    Ok(close_cover(&open_cover(k, p)?, k))
}

/// Nerve of a cover, a complex on cover-set indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nerve {
    complex: SimplicialComplex,
}

impl Nerve {
    pub fn complex(&self) -> &SimplicialComplex {
        &self.complex
    }

    /// Position of face `J` in the nerve's lexicographic filtration.
    pub fn face_index(&self, j: &[u32]) -> Option<usize> {
        self.complex.index_of(j)
    }

    pub fn face(&self, idx: usize) -> &Simplex {
        self.complex.cell(idx)
    }

    pub fn len(&self) -> usize {
        self.complex.len()
    }

    pub fn is_empty(&self) -> bool {
        self.complex.is_empty()
    }

    /// True when every edge contains `center` and there are no 2-cells.
    pub fn is_star_centered_at(&self, center: u32) -> bool {
        self.complex.cells().all(|s| match s.dim() {
            0 => true,
            1 => s.vertices().contains(&center),
            _ => false,
        })
    }
}

/// `J` is a nerve face iff some cell carries every index of `J`.
pub fn nerve(c: &Cover) -> Nerve {
    let mut distinct: Vec<&Label> = c.labels.iter().collect();
    distinct.sort_unstable();
    distinct.dedup();
    Nerve {
        complex: closure(distinct.into_iter().map(|l| Simplex::from_sorted(l))),
    }
}

/// Balance, cut and overlap statistics of a cover.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverStats {
    /// `max_i |V_i| / |V|`; present when a vertex partition is known.
    pub graph_balance_ratio: Option<f64>,
    /// `max_i |U_i| / |K|`.
    pub cover_balance_ratio: f64,
    pub edgecut: Option<usize>,
    /// `|I|`, cells lying in two or more sets.
    pub intersection_size: usize,
    pub complex_size: usize,
    /// Some cell lies in three or more sets; the predicted blowup is then only a lower bound.
    pub triple_intersection: bool,
    /// `1 + 2|I|/|K|`.
    pub predicted_blowup: Ratio<u64>,
    pub empty_parts: usize,
}

impl CoverStats {
    pub fn predicted_blowup_f64(&self) -> f64 {
        *self.predicted_blowup.numer() as f64 / *self.predicted_blowup.denom() as f64
    }
}

pub fn cover_stats(c: &Cover, k: &SimplicialComplex, p: Option<&GraphPartition>) -> CoverStats {
    let m = k.len().max(1) as u64;
    let intersection_size = c.labels.iter().filter(|l| l.len() >= 2).count();
    let max_set = c.set_sizes().into_iter().max().unwrap_or(0);
    let graph = p.map(|_| one_skeleton_graph(k));
    CoverStats {
        graph_balance_ratio: p.map(GraphPartition::balance_ratio),
        cover_balance_ratio: max_set as f64 / m as f64,
        edgecut: p.zip(graph.as_ref()).map(|(p, g)| p.edgecut(g)),
        intersection_size,
        complex_size: k.len(),
        triple_intersection: c.max_label_len() >= 3,
        predicted_blowup: Ratio::new(m + 2 * intersection_size as u64, m),
        empty_parts: p.map_or(0, GraphPartition::empty_parts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::path_complex;

    fn s(v: &[u32]) -> Simplex {
        Simplex::new(v.to_vec())
    }

    fn class(c: &Cover, k: &SimplicialComplex, i: u32) -> Vec<Vec<u32>> {
        c.members(i)
            .into_iter()
            .map(|j| k.cell(j).vertices().to_vec())
            .collect()
    }

    /// U0 = Cl{ab, bc}, U1 = Cl{bc, cd} on the path a-b-c-d.
    pub(crate) fn example_cover(k: &SimplicialComplex) -> Cover {
        Cover::from_generators(
            k,
            &[vec![s(&[0, 1]), s(&[1, 2])], vec![s(&[1, 2]), s(&[2, 3])]],
        )
        .unwrap()
    }

    fn split_path() -> (SimplicialComplex, GraphPartition) {
        let k = path_complex(4).unwrap();
        let p = GraphPartition::new(vec![0, 0, 1, 1], 2).unwrap();
        (k, p)
    }

    #[test]
    fn one_skeleton_examples() {
        let tri = closure([s(&[0, 1, 2])]);
        assert_eq!(one_skeleton_graph(&tri).edges(), &[(0, 1), (0, 2), (1, 2)]);
        let path = path_complex(4).unwrap();
        assert_eq!(one_skeleton_graph(&path).edges(), &[(0, 1), (1, 2), (2, 3)]);
        let pts = closure([s(&[0]), s(&[1])]);
        assert!(one_skeleton_graph(&pts).edges().is_empty());
    }

    #[test]
    fn partition_cell_examples() {
        let (_, p) = split_path();
        assert_eq!(partition_cell(&p, &[0, 1]), 0);
        assert_eq!(partition_cell(&p, &[1, 2]), 2);
        assert_eq!(partition_cell(&p, &[2]), 1);
    }

    #[test]
    fn open_cover_of_path() {
        let (k, p) = split_path();
        let c = open_cover(&k, &p).unwrap();
        assert_eq!(class(&c, &k, 0), vec![vec![0], vec![1], vec![0, 1]]);
        assert_eq!(class(&c, &k, 1), vec![vec![2], vec![3], vec![2, 3]]);
        assert_eq!(class(&c, &k, 2), vec![vec![1, 2]]);
    }

    #[test]
    fn open_cover_single_part() {
        let k = path_complex(4).unwrap();
        let p = GraphPartition::new(vec![0; 4], 1).unwrap();
        let c = open_cover(&k, &p).unwrap();
        assert_eq!(c.members(0).len(), 7);
        assert!(c.members(1).is_empty());
        assert_eq!(close_cover(&c, &k), c);
    }

    #[test]
    fn open_cover_straddling_edge() {
        let k = closure([s(&[0, 1])]);
        let p = GraphPartition::new(vec![0, 1], 2).unwrap();
        let c = open_cover(&k, &p).unwrap();
        assert_eq!(class(&c, &k, 2), vec![vec![0, 1]]);
    }

    #[test]
    fn close_cover_of_path() {
        let (k, p) = split_path();
        let c = close_cover(&open_cover(&k, &p).unwrap(), &k);
        assert_eq!(class(&c, &k, 2), vec![vec![1], vec![2], vec![1, 2]]);
        assert_eq!(c.label(k.index_of(&[1]).unwrap()), &[0, 2]);
        assert_eq!(c.label(k.index_of(&[2]).unwrap()), &[1, 2]);
        assert!(c.is_closed(&k));
        assert!(!open_cover(&k, &p).unwrap().is_closed(&k));
    }

    #[test]
    fn close_cover_without_shared_cells() {
        let k = closure([s(&[0, 1]), s(&[2, 3])]);
        let p = GraphPartition::new(vec![0, 0, 1, 1], 2).unwrap();
        let open = open_cover(&k, &p).unwrap();
        let closed = close_cover(&open, &k);
        assert_eq!(open, closed);
        assert_eq!(nerve(&closed).complex().len(), 2);
    }

    #[test]
    fn nerve_examples() {
        let k = path_complex(4).unwrap();
        let n = nerve(&example_cover(&k));
        let cells: Vec<_> = n.complex().cells().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(cells, vec![vec![0], vec![1], vec![0, 1]]);

        let (k, p) = split_path();
        let n = nerve(&partition_based_cover(&k, &p).unwrap());
        let cells: Vec<_> = n.complex().cells().map(|s| s.vertices().to_vec()).collect();
        assert_eq!(
            cells,
            vec![vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]]
        );
        assert!(n.is_star_centered_at(2));

        let single =
            Cover::from_generators(&k, &[vec![s(&[0, 1]), s(&[1, 2]), s(&[2, 3])]]).unwrap();
        assert_eq!(nerve(&single).complex().len(), 1);
    }

    #[test]
    fn stats_examples() {
        let k = path_complex(4).unwrap();
        let st = cover_stats(&example_cover(&k), &k, None);
        assert_eq!(st.intersection_size, 3);
        assert_eq!(st.predicted_blowup, Ratio::new(13, 7));
        assert!(!st.triple_intersection);

        let (k, p) = split_path();
        let c = partition_based_cover(&k, &p).unwrap();
        let st = cover_stats(&c, &k, Some(&p));
        assert_eq!(st.intersection_size, 2);
        assert_eq!(st.predicted_blowup, Ratio::new(11, 7));
        assert_eq!(st.edgecut, Some(1));
        assert_eq!(st.graph_balance_ratio, Some(0.5));
        assert!((st.cover_balance_ratio - 3.0 / 7.0).abs() < 1e-12);

        let single =
            Cover::from_generators(&k, &[vec![s(&[0, 1]), s(&[1, 2]), s(&[2, 3])]]).unwrap();
        assert_eq!(
            cover_stats(&single, &k, None).predicted_blowup,
            Ratio::from_integer(1)
        );
    }

    #[test]
    fn triple_intersections_are_flagged() {
        let k = closure([s(&[0, 1])]);
        let gens = vec![vec![s(&[0, 1])]; 3];
        let c = Cover::from_generators(&k, &gens).unwrap();
        assert!(cover_stats(&c, &k, None).triple_intersection);
    }

    #[test]
    fn uncovered_cells_rejected() {
        let k = path_complex(4).unwrap();
        assert!(Cover::from_generators(&k, &[vec![s(&[0, 1])]]).is_err());
        assert!(Cover::from_generators(&k, &[vec![s(&[0, 5])]]).is_err());
    }
}
