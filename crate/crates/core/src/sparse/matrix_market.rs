use std::fmt::Write as _;
use std::path::Path;

use super::{CsrMatrix, TripletBuilder};
use crate::error::{Error, LinalgError};

/// Write a sparse matrix in Matrix Market coordinate real general format.
pub fn write_matrix_market(a: &CsrMatrix, path: &Path) -> Result<(), Error> {
    let mut s = String::with_capacity(32 * a.nnz() + 64);
    s.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(s, "{} {} {}", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        let _ = writeln!(s, "{} {} {:.17e}", i + 1, j + 1, v);
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Write a dense vector in Matrix Market array real general format.
pub fn write_vector_market(v: &[f64], path: &Path) -> Result<(), Error> {
    let mut s = String::with_capacity(26 * v.len() + 64);
    s.push_str("%%MatrixMarket matrix array real general\n");
    let _ = writeln!(s, "{} 1", v.len());
    for x in v {
        let _ = writeln!(s, "{x:.17e}");
    }
    std::fs::write(path, s).map_err(|e| Error::io(path, e))
}

/// Read a Matrix Market coordinate real matrix (general or symmetric).
pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse(&text).map_err(Error::from)
}

fn parse(text: &str) -> Result<CsrMatrix, LinalgError> {
    let bad = |m: &str| LinalgError::MatrixMarket(m.to_string());
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?.to_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[2] != "coordinate" {
        return Err(bad("expected a coordinate matrix header"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(bad("only real matrices are supported"));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(bad(&format!("unsupported symmetry `{other}`"))),
    };
    let mut body = lines.filter(|l| !l.trim().is_empty() && !l.starts_with('%'));
    let size: Vec<usize> = body
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad size line")))
        .collect::<Result<_, _>>()?;
    if size.len() != 3 {
        return Err(bad("size line must hold rows, cols, nnz"));
    }
    let mut b = TripletBuilder::with_capacity(size[0], size[1], size[2]);
    for _ in 0..size[2] {
        let l = body.next().ok_or_else(|| bad("truncated entries"))?;
        let t: Vec<&str> = l.split_whitespace().collect();
        if t.len() < 3 {
            return Err(bad("entry needs row, col, value"));
        }
        let i: usize = t[0].parse().map_err(|_| bad("bad row index"))?;
        let j: usize = t[1].parse().map_err(|_| bad("bad column index"))?;
        let v: f64 = t[2].parse().map_err(|_| bad("bad value"))?;
        if i == 0 || j == 0 || i > size[0] || j > size[1] {
            return Err(bad("index out of range"));
        }
        b.push(i - 1, j - 1, v);
        if symmetric && i != j {
            b.push(j - 1, i - 1, v);
        }
    }
    Ok(b.build())
}
