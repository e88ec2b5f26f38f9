//! File formats: whitespace edge lists, numeric CSV, label files.

use std::fs;
use std::io::Write;
use std::path::Path;

use plcut_core::{Partition, VectorDataset, WeightedGraph};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}:{line}: parse error: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{path}: row {row}, column {col}: {msg}")]
    Cell { path: String, row: usize, col: usize, msg: String },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Core(#[from] plcut_core::Error),
}

pub type Result<T> = std::result::Result<T, IoError>;

/// Edge list: whitespace-separated `u v [w]` lines (weight defaults to 1),
/// 0-based node ids, `#` starts a comment. Near-symmetric input is merged
/// with max(A_ij, A_ji); node count is max id + 1.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    let mut max_id = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 2 || tokens.len() > 3 {
            return Err(IoError::Parse {
                path: name,
                line: line_no,
                msg: format!("expected 'u v [w]', got {} tokens", tokens.len()),
            });
        }
        let parse_id = |tok: &str| -> Result<usize> {
            tok.parse::<usize>().map_err(|_| IoError::Parse {
                path: name.clone(),
                line: line_no,
                msg: format!("non-numeric node id {tok:?}"),
            })
        };
        let u = parse_id(tokens[0])?;
        let v = parse_id(tokens[1])?;
        let w = if tokens.len() == 3 {
            tokens[2].parse::<f64>().map_err(|_| IoError::Parse {
                path: name.clone(),
                line: line_no,
                msg: format!("non-numeric weight {:?}", tokens[2]),
            })?
        } else {
            1.0
        };
        if w < 0.0 {
            return Err(IoError::Invalid(format!(
                "{name}:{line_no}: negative edge weight {w}"
            )));
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v, w));
    }
    if edges.is_empty() {
        return Err(IoError::Parse { path: name, line: 1, msg: "empty edge list".into() });
    }
    Ok(WeightedGraph::from_edges(max_id + 1, &edges)?)
}

/// Writes each undirected edge once (u ≤ v) with round-trip-exact weights.
pub fn save_edge_list(g: &WeightedGraph, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for (u, v, w) in g.undirected_edges() {
        out.push_str(&format!("{u} {v} {w}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// One cluster label per line, line index = point id.
pub fn load_labels(path: impl AsRef<Path>) -> Result<Partition> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let label = line.parse::<usize>().map_err(|_| IoError::Parse {
            path: name.clone(),
            line: idx + 1,
            msg: format!("non-numeric label {line:?}"),
        })?;
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(IoError::Parse { path: name, line: 1, msg: "empty label file".into() });
    }
    Ok(Partition::from_assignments(&labels)?)
}

pub fn save_labels(p: &Partition, path: impl AsRef<Path>) -> Result<()> {
    let mut out = String::new();
    for &a in p.assign() {
        out.push_str(&format!("{a}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Numeric CSV with '.' decimals and an optional final label column.
/// Labels are compacted to dense ids by first appearance.
pub fn load_csv_vectors(
    path: impl AsRef<Path>,
    has_labels: bool,
) -> Result<(VectorDataset, Option<Partition>)> {
    let path = path.as_ref();
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    let mut width = None;
    let mut values: Vec<f64> = Vec::new();
    let mut label_keys: Vec<u64> = Vec::new();
    let mut labels: Vec<usize> = Vec::new();
    let mut rows = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let row_no = idx + 1;
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(IoError::Parse {
                    path: name,
                    line: row_no,
                    msg: format!("ragged row: {} cells, expected {w}", cells.len()),
                });
            }
            _ => {}
        }
        let ncols = cells.len();
        if has_labels && ncols < 2 {
            return Err(IoError::Parse {
                path: name,
                line: row_no,
                msg: "labeled CSV needs at least one feature column".into(),
            });
        }
        for (c, cell) in cells.iter().enumerate() {
            let value = cell.parse::<f64>().map_err(|_| IoError::Cell {
                path: name.clone(),
                row: row_no,
                col: c + 1,
                msg: format!("non-numeric cell {cell:?}"),
            })?;
            if has_labels && c == ncols - 1 {
                let key = value.to_bits();
                let dense = match label_keys.iter().position(|&k| k == key) {
                    Some(d) => d,
                    None => {
                        label_keys.push(key);
                        label_keys.len() - 1
                    }
                };
                labels.push(dense);
            } else {
                values.push(value);
            }
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(IoError::Parse { path: name, line: 1, msg: "empty CSV".into() });
    }
    let d = width.unwrap() - usize::from(has_labels);
    let data = VectorDataset::new(values, rows, d)?;
    let truth = if has_labels { Some(Partition::from_assignments(&labels)?) } else { None };
    Ok((data, truth))
}

pub fn save_csv_vectors(
    data: &VectorDataset,
    labels: Option<&Partition>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = String::new();
    for i in 0..data.n() {
        let mut cells: Vec<String> = data.point(i).iter().map(|x| format!("{x}")).collect();
        if let Some(p) = labels {
            cells.push(format!("{}", p.cluster_of(i)));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())
}

/// Two-column TSV of (rank, size) for external rank-size plotting.
pub fn save_rank_size_tsv(
    hist: &plcut_core::metrics::SizeHistogram,
    path: impl AsRef<Path>,
) -> Result<()> {
    let mut out = String::new();
    for &(rank, size) in &hist.rank_size {
        out.push_str(&format!("{rank}\t{size}\n"));
    }
    atomic_write(path, out.as_bytes())
}

/// Write-then-rename so partial files never appear under the final name.
pub fn atomic_write(path: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    fn write(dir: &tempfile::TempDir, name: &str, content: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, content).unwrap();
        p
    }

    #[test]
    fn edge_list_basics() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "g.txt", "0 1 2.5\n");
        let g = load_edge_list(&p).unwrap();
        assert_eq!(g.n(), 2);
        assert_eq!(g.weight(0, 1), 2.5);
        assert_eq!(g.weight(1, 0), 2.5);
    }

    #[test]
    fn edge_list_duplicate_takes_max() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "g.txt", "0 1 1\n1 0 3\n");
        let g = load_edge_list(&p).unwrap();
        assert_eq!(g.weight(0, 1), 3.0);
    }

    #[test]
    fn edge_list_default_weight_and_comments() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "g.txt", "# header\n0 1 # trailing comment\n\n1 2 0.5\n");
        let g = load_edge_list(&p).unwrap();
        assert_eq!(g.weight(0, 1), 1.0);
        assert_eq!(g.weight(1, 2), 0.5);
    }

    #[test]
    fn edge_list_errors() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "empty.txt", "# only comments\n");
        assert!(matches!(load_edge_list(&p), Err(IoError::Parse { line: 1, .. })));

        let p = write(&dir, "bad.txt", "0 1 1\n0 x 2\n");
        match load_edge_list(&p) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }

        let p = write(&dir, "neg.txt", "0 1 -2\n");
        assert!(matches!(load_edge_list(&p), Err(IoError::Invalid(_))));
    }

    #[test]
    fn edge_list_round_trip_is_lossless() {
        let dir = tempdir().unwrap();
        let g = WeightedGraph::from_edges(
            3,
            &[(0, 1, 0.123456789012345678), (1, 2, 1.0 / 3.0), (0, 0, 2.5)],
        )
        .unwrap();
        let p = dir.path().join("g.txt");
        save_edge_list(&g, &p).unwrap();
        let h = load_edge_list(&p).unwrap();
        assert_eq!(g.undirected_edges(), h.undirected_edges());
    }

    #[test]
    fn csv_with_labels() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "d.csv", "0.5,1.0,7\n0.25,2.0,7\n0.75,3.0,9\n");
        let (data, truth) = load_csv_vectors(&p, true).unwrap();
        assert_eq!(data.n(), 3);
        assert_eq!(data.dim(), 2);
        let truth = truth.unwrap();
        assert_eq!(truth.assign(), &[0, 0, 1]);
    }

    #[test]
    fn csv_errors_carry_position() {
        let dir = tempdir().unwrap();
        let p = write(&dir, "ragged.csv", "1,2\n1,2,3\n");
        assert!(matches!(load_csv_vectors(&p, false), Err(IoError::Parse { line: 2, .. })));

        let p = write(&dir, "cell.csv", "1,2\n1,oops\n");
        match load_csv_vectors(&p, false) {
            Err(IoError::Cell { row, col, .. }) => {
                assert_eq!((row, col), (2, 2));
            }
            other => panic!("expected cell error, got {other:?}"),
        }
    }

    #[test]
    fn labels_round_trip() {
        let dir = tempdir().unwrap();
        let p = dir.path().join("l.txt");
        let labels = Partition::from_assignments(&[0, 1, 1, 2]).unwrap();
        save_labels(&labels, &p).unwrap();
        assert_eq!(load_labels(&p).unwrap(), labels);
    }
}
