//! Text formats: `.cplx` complexes and `.pts` point clouds.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::complex::{closure, Simplex, SimplicialComplex, Vertex};
use crate::error::{Error, Result};
use crate::generators::PointCloud;

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Reads a complex: one simplex per line with strictly increasing vertex ids, `#`
/// comments, closure applied. Ids are relabeled to `0..n` preserving their order.
pub fn read_complex<R: BufRead>(reader: R) -> Result<SimplicialComplex> {
    let mut cells: Vec<Vec<u64>> = Vec::new();
    for (line_no, line) in content_lines(reader) {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let mut vertices = Vec::new();
        for tok in text.split(' ') {
            let v: u64 = tok.parse().map_err(|_| Error::Format {
                line: line_no,
                msg: format!("{tok:?} is not a vertex id"),
            })?;
            if vertices.last().is_some_and(|&last| last >= v) {
                return Err(Error::Format {
                    line: line_no,
                    msg: "vertex ids must be strictly increasing".into(),
                });
            }
            vertices.push(v);
        }
        cells.push(vertices);
    }

    let mut ids: Vec<u64> = cells.iter().flatten().copied().collect();
    ids.sort_unstable();
    ids.dedup();
    if ids.len() > Vertex::MAX as usize {
        return Err(Error::Format {
            line: 0,
            msg: "too many distinct vertices".into(),
        });
    }
    let relabel = |v: &u64| ids.binary_search(v).unwrap() as Vertex;
    Ok(closure(cells.iter().map(|c| {
        Simplex::from_sorted(&c.iter().map(relabel).collect::<Vec<_>>())
    })))
}

/// Writes every cell in lexicographic filtration order.
pub fn write_complex<W: Write>(k: &SimplicialComplex, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    let mut line = String::new();
    for cell in k.cells() {
        line.clear();
        for (i, v) in cell.vertices().iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_points<R: BufRead>(reader: R) -> Result<PointCloud> {
    let mut points = Vec::new();
    for (line_no, line) in content_lines(reader) {
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let p = text
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::Format {
                        line: line_no,
                        msg: format!("{t:?} is not a finite coordinate"),
                    })
            })
            .collect::<Result<Vec<_>>>()?;
        points.push(p);
    }
    PointCloud::new(points).map_err(|e| Error::Format {
        line: 0,
        msg: e.to_string(),
    })
}

/// Writes coordinates with round-trip precision.
pub fn write_points<W: Write>(cloud: &PointCloud, out: W) -> Result<()> {
    let mut out = BufWriter::new(out);
    for p in cloud.points() {
        let line: Vec<String> = p.iter().map(|x| format!("{x:?}")).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    out.flush()?;
    Ok(())
}

pub fn load_complex(path: &Path) -> Result<SimplicialComplex> {
    read_complex(BufReader::new(File::open(path)?))
}

pub fn save_complex(k: &SimplicialComplex, path: &Path) -> Result<()> {
    write_complex(k, File::create(path)?)
}

pub fn load_points(path: &Path) -> Result<PointCloud> {
    read_points(BufReader::new(File::open(path)?))
}

pub fn save_points(cloud: &PointCloud, path: &Path) -> Result<()> {
    write_points(cloud, File::create(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::path_complex;

    #[test]
    fn maximal_cells_are_closed() {
        let k = read_complex("# triangle\n0 1 2\n".as_bytes()).unwrap();
        assert_eq!(k.len(), 7);
    }

    #[test]
    fn ids_relabeled_in_order() {
        let k = read_complex("10 20\n20 30\n".as_bytes()).unwrap();
        assert_eq!(k, path_complex(3).unwrap());
    }

    #[test]
    fn rejects_unsorted_and_garbage() {
        assert!(matches!(
            read_complex("0 1\n2 1\n".as_bytes()),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            read_complex("0 x\n".as_bytes()),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(read_complex("0  1\n".as_bytes()).is_err());
    }

    #[test]
    fn complex_round_trip() {
        let k = path_complex(4).unwrap();
        let mut buf = Vec::new();
        write_complex(&k, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf.clone()).unwrap(),
            "0\n1\n2\n3\n0 1\n1 2\n2 3\n"
        );
        assert_eq!(read_complex(buf.as_slice()).unwrap(), k);
    }

    #[test]
    fn points_round_trip() {
        let cloud = PointCloud::new(vec![vec![0.1, -2.5], vec![1.0 / 3.0, 7.0]]).unwrap();
        let mut buf = Vec::new();
        write_points(&cloud, &mut buf).unwrap();
        let back = read_points(buf.as_slice()).unwrap();
        assert_eq!(back.points(), cloud.points());
        assert!(read_points("1 2\n3\n".as_bytes()).is_err());
        assert!(read_points("1 nan\n".as_bytes()).is_err());
    }
}
