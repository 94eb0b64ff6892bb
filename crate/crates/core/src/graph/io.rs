//! On-disk graph and signal formats.
//!
//! - Edge list: text, one `u v` pair per line, 0-indexed, `#` comments.
//! - CSR:       magic `SGF1`, little-endian u64 n, u64 nnz, indptr u64[n+1],
//!              indices u64[nnz].
//! - Features:  magic `SGX1`, u64 n, u64 F, u8 dtype (0 = f64, 1 = f32),
//!              row-major values.
//! - Labels:    text, one integer per line.
//! - Splits:    JSON object with arrays `train`, `val`, `test`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Result, SgfError};
use crate::graph::{CsrGraph, Splits};
use crate::matrix::SignalMatrix;

pub const CSR_MAGIC: &[u8; 4] = b"SGF1";
pub const FEATURES_MAGIC: &[u8; 4] = b"SGX1";

/// On-disk value width for feature/embedding matrices. Engine arithmetic is
/// always f64; f32 is a storage option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Dtype {
    #[default]
    F64,
    F32,
}

impl Dtype {
    pub fn flag(self) -> u8 {
        match self {
            Dtype::F64 => 0,
            Dtype::F32 => 1,
        }
    }

    pub fn from_flag(flag: u8, path: &Path) -> Result<Self> {
        match flag {
            0 => Ok(Dtype::F64),
            1 => Ok(Dtype::F32),
            other => Err(SgfError::Format {
                path: path.display().to_string(),
                msg: format!("unknown dtype flag {other}"),
            }),
        }
    }
}

/// Parse a text edge list into a symmetric self-looped CSR. `n_hint` fixes the
/// node count (required for trailing isolated nodes); without it the count is
/// one past the largest id seen.
pub fn load_edge_list(path: &Path, n_hint: Option<usize>) -> Result<CsrGraph> {
    let file = File::open(path).map_err(|e| SgfError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut edges = Vec::new();
    let mut max_id = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SgfError::io(path, e))?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        let u = parse_id(it.next(), lineno + 1)?;
        let v = parse_id(it.next(), lineno + 1)?;
        if it.next().is_some() {
            return Err(SgfError::Parse {
                line: lineno + 1,
                msg: "expected exactly two node ids".into(),
            });
        }
        if let Some(n) = n_hint {
            if u >= n || v >= n {
                return Err(SgfError::Bounds(format!(
                    "line {}: node id {} >= declared node count {}",
                    lineno + 1,
                    u.max(v),
                    n
                )));
            }
        }
        max_id = max_id.max(u).max(v);
        edges.push((u, v));
    }
    let n = n_hint.unwrap_or(if edges.is_empty() { 0 } else { max_id + 1 });
    Ok(CsrGraph::from_edges(n, &edges)?.with_self_loops())
}

fn parse_id(tok: Option<&str>, line: usize) -> Result<usize> {
    let tok = tok.ok_or(SgfError::Parse {
        line,
        msg: "missing node id".into(),
    })?;
    tok.parse::<usize>().map_err(|_| SgfError::Parse {
        line,
        msg: format!("invalid node id '{tok}'"),
    })
}

pub fn save_csr(graph: &CsrGraph, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| SgfError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SgfError::io(path, e);
    w.write_all(CSR_MAGIC).map_err(io)?;
    w.write_all(&(graph.n() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(graph.nnz() as u64).to_le_bytes()).map_err(io)?;
    for &p in graph.indptr() {
        w.write_all(&(p as u64).to_le_bytes()).map_err(io)?;
    }
    for &c in graph.indices() {
        w.write_all(&(c as u64).to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn load_csr(path: &Path) -> Result<CsrGraph> {
    let file = File::open(path).map_err(|e| SgfError::io(path, e))?;
    let mut r = BufReader::new(file);
    expect_magic(&mut r, CSR_MAGIC, path)?;
    let n = read_u64(&mut r, path)? as usize;
    let nnz = read_u64(&mut r, path)? as usize;
    let mut indptr = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        indptr.push(read_u64(&mut r, path)? as usize);
    }
    let mut indices = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        indices.push(read_u64(&mut r, path)? as usize);
    }
    CsrGraph::from_parts(n, indptr, indices)
}

pub fn save_features(m: &SignalMatrix, dtype: Dtype, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| SgfError::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| SgfError::io(path, e);
    w.write_all(FEATURES_MAGIC).map_err(io)?;
    w.write_all(&(m.rows() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&(m.cols() as u64).to_le_bytes()).map_err(io)?;
    w.write_all(&[dtype.flag()]).map_err(io)?;
    match dtype {
        Dtype::F64 => {
            for &v in m.data() {
                w.write_all(&v.to_le_bytes()).map_err(io)?;
            }
        }
        Dtype::F32 => {
            for &v in m.data() {
                w.write_all(&(v as f32).to_le_bytes()).map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)
}

pub fn load_features(path: &Path) -> Result<SignalMatrix> {
    let file = File::open(path).map_err(|e| SgfError::io(path, e))?;
    let mut r = BufReader::new(file);
    expect_magic(&mut r, FEATURES_MAGIC, path)?;
    let rows = read_u64(&mut r, path)? as usize;
    let cols = read_u64(&mut r, path)? as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag).map_err(|e| SgfError::io(path, e))?;
    let dtype = Dtype::from_flag(flag[0], path)?;
    let mut data = Vec::with_capacity(rows * cols);
    match dtype {
        Dtype::F64 => {
            let mut buf = [0u8; 8];
            for _ in 0..rows * cols {
                r.read_exact(&mut buf).map_err(|e| SgfError::io(path, e))?;
                data.push(f64::from_le_bytes(buf));
            }
        }
        Dtype::F32 => {
            let mut buf = [0u8; 4];
            for _ in 0..rows * cols {
                r.read_exact(&mut buf).map_err(|e| SgfError::io(path, e))?;
                data.push(f32::from_le_bytes(buf) as f64);
            }
        }
    }
    SignalMatrix::from_vec(rows, cols, data)
}

pub fn load_labels(path: &Path) -> Result<Vec<usize>> {
    let file = File::open(path).map_err(|e| SgfError::io(path, e))?;
    let reader = BufReader::new(file);
    let mut labels = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| SgfError::io(path, e))?;
        let body = line.trim();
        if body.is_empty() {
            continue;
        }
        labels.push(body.parse::<usize>().map_err(|_| SgfError::Parse {
            line: lineno + 1,
            msg: format!("invalid label '{body}'"),
        })?);
    }
    Ok(labels)
}

pub fn save_labels(labels: &[usize], path: &Path) -> Result<()> {
    let mut out = String::new();
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| SgfError::io(path, e))
}

pub fn load_splits(path: &Path) -> Result<Splits> {
    let text = std::fs::read_to_string(path).map_err(|e| SgfError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| SgfError::Format {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

pub fn save_splits(splits: &Splits, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(splits).map_err(|e| SgfError::Format {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    std::fs::write(path, text).map_err(|e| SgfError::io(path, e))
}

/// Load edge list or binary CSR depending on the file's leading bytes.
pub fn load_graph_auto(path: &Path, n_hint: Option<usize>) -> Result<Arc<CsrGraph>> {
    let mut head = [0u8; 4];
    {
        let mut f = File::open(path).map_err(|e| SgfError::io(path, e))?;
        let _ = f.read(&mut head).map_err(|e| SgfError::io(path, e))?;
    }
    let graph = if &head == CSR_MAGIC {
        load_csr(path)?.with_self_loops()
    } else {
        load_edge_list(path, n_hint)?
    };
    Ok(Arc::new(graph))
}

fn expect_magic<R: Read>(r: &mut R, magic: &[u8; 4], path: &Path) -> Result<()> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|e| SgfError::io(path, e))?;
    if &buf != magic {
        return Err(SgfError::Format {
            path: path.display().to_string(),
            msg: format!(
                "bad magic {:?}, expected {:?}",
                String::from_utf8_lossy(&buf),
                String::from_utf8_lossy(magic)
            ),
        });
    }
    Ok(())
}

fn read_u64<R: Read>(r: &mut R, path: &Path) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf).map_err(|e| SgfError::io(path, e))?;
    Ok(u64::from_le_bytes(buf))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.txt");
        std::fs::write(&p, "# toy graph\n0 1\n1 2  # dup below\n1 2\n").unwrap();
        let g = load_edge_list(&p, None).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.nnz(), 4 + 3);
    }

    #[test]
    fn single_pair_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.txt");
        std::fs::write(&p, "0 1\n").unwrap();
        let g = load_edge_list(&p, None).unwrap();
        assert_eq!((g.n(), g.nnz()), (2, 4));
    }

    #[test]
    fn empty_file_with_hint() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.txt");
        std::fs::write(&p, "").unwrap();
        let g = load_edge_list(&p, Some(3)).unwrap();
        assert_eq!((g.n(), g.nnz()), (3, 3));
    }

    #[test]
    fn malformed_line_reports_position() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.txt");
        std::fs::write(&p, "0 1\nbroken\n").unwrap();
        match load_edge_list(&p, None) {
            Err(SgfError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn id_beyond_hint_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("edges.txt");
        std::fs::write(&p, "0 5\n").unwrap();
        assert!(matches!(
            load_edge_list(&p, Some(3)),
            Err(SgfError::Bounds(_))
        ));
    }

    #[test]
    fn csr_binary_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.sgf");
        let g = CsrGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)])
            .unwrap()
            .with_self_loops();
        save_csr(&g, &p).unwrap();
        let g2 = load_csr(&p).unwrap();
        assert_eq!(g.indptr(), g2.indptr());
        assert_eq!(g.indices(), g2.indices());
    }

    #[test]
    fn features_roundtrip_both_dtypes() {
        let dir = tempfile::tempdir().unwrap();
        let m = SignalMatrix::from_vec(2, 3, vec![1.0, -2.5, 3.25, 0.0, 1e-3, 7.0]).unwrap();
        let p64 = dir.path().join("x64.sgx");
        save_features(&m, Dtype::F64, &p64).unwrap();
        assert_eq!(load_features(&p64).unwrap(), m);
        let p32 = dir.path().join("x32.sgx");
        save_features(&m, Dtype::F32, &p32).unwrap();
        let m32 = load_features(&p32).unwrap();
        assert!(m.max_abs_diff(&m32) < 1e-6);
    }

    #[test]
    fn splits_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("splits.json");
        let s = Splits {
            train: vec![0, 1],
            val: vec![2],
            test: vec![3],
        };
        save_splits(&s, &p).unwrap();
        assert_eq!(load_splits(&p).unwrap(), s);
    }
}
