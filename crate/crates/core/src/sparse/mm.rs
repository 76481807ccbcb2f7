//! Matrix Market coordinate format, real general or symmetric.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::SparseMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq)]
enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
}

#[derive(Clone, Copy, PartialEq)]
enum Layout {
    Coordinate,
    Array,
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

struct Parsed {
    rows: usize,
    cols: usize,
    triplets: Vec<(usize, usize, f64)>,
}

fn parse<R: BufRead>(reader: R) -> Result<Parsed> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let toks: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if toks.len() != 5 || toks[0] != "%%matrixmarket" || toks[1] != "matrix" {
        return Err(parse_err(1, "missing '%%MatrixMarket matrix' header"));
    }
    let layout = match toks[2].as_str() {
        "coordinate" => Layout::Coordinate,
        "array" => Layout::Array,
        other => return Err(parse_err(1, format!("unsupported format '{other}'"))),
    };
    match toks[3].as_str() {
        "real" | "double" | "integer" => {}
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    }
    let sym = match toks[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::SkewSymmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, Vec<usize>)> = None;
    let mut triplets = Vec::new();
    let mut expected = 0usize;
    let mut seen = 0usize;
    let (mut rows, mut cols) = (0usize, 0usize);
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = t.split_whitespace().collect();
        if size.is_none() {
            let nums = fields
                .iter()
                .map(|f| f.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad size field '{f}'"))))
                .collect::<Result<Vec<_>>>()?;
            let want = if layout == Layout::Coordinate { 3 } else { 2 };
            if nums.len() != want {
                return Err(parse_err(lineno, format!("size line needs {want} integers")));
            }
            rows = nums[0];
            cols = nums[1];
            expected = if layout == Layout::Coordinate {
                nums[2]
            } else {
                match sym {
                    Symmetry::General => rows * cols,
                    Symmetry::Symmetric => rows * (rows + 1) / 2,
                    Symmetry::SkewSymmetric => rows * rows.saturating_sub(1) / 2,
                }
            };
            if sym != Symmetry::General && rows != cols {
                return Err(parse_err(lineno, "symmetric matrix must be square"));
            }
            size = Some((lineno, nums));
            continue;
        }
        if seen >= expected {
            return Err(parse_err(lineno, "more entries than declared"));
        }
        let (i, j, v) = match layout {
            Layout::Coordinate => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "coordinate entry needs 'row col value'"));
                }
                let i: usize = fields[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                if i == 0 || j == 0 || i > rows || j > cols {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) outside {rows}x{cols}")));
                }
                let v: f64 = fields[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                (i - 1, j - 1, v)
            }
            Layout::Array => {
                if fields.len() != 1 {
                    return Err(parse_err(lineno, "array entry needs one value"));
                }
                let v: f64 = fields[0].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                // column-major; symmetric arrays store the lower triangle
                let (i, j) = match sym {
                    Symmetry::General => (seen % rows, seen / rows),
                    _ => {
                        let off = if sym == Symmetry::Symmetric { 0 } else { 1 };
                        let mut k = seen;
                        let mut j = 0;
                        while k >= rows - j - off {
                            k -= rows - j - off;
                            j += 1;
                        }
                        (j + off + k, j)
                    }
                };
                (i, j, v)
            }
        };
        if !v.is_finite() {
            return Err(parse_err(lineno, "non-finite value"));
        }
        if sym != Symmetry::General && j > i {
            return Err(parse_err(lineno, "symmetric storage must hold the lower triangle"));
        }
        if sym == Symmetry::SkewSymmetric && i == j {
            return Err(parse_err(lineno, "skew-symmetric storage cannot hold diagonal entries"));
        }
        triplets.push((i, j, v));
        match sym {
            Symmetry::Symmetric if i != j => triplets.push((j, i, v)),
            Symmetry::SkewSymmetric => triplets.push((j, i, -v)),
            _ => {}
        }
        seen += 1;
    }
    let Some((size_line, _)) = size else {
        return Err(parse_err(1, "missing size line"));
    };
    if seen != expected {
        return Err(parse_err(size_line, format!("declared {expected} entries, found {seen}")));
    }
    Ok(Parsed { rows, cols, triplets })
}

/// Reads a sparse matrix. Symmetric storage is expanded and duplicate
/// coordinates are summed.
pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let file = File::open(path.as_ref())?;
    let p = parse(BufReader::new(file))?;
    SparseMatrix::from_triplets(p.rows, p.cols, &p.triplets)
}

/// Reads an n x 1 vector stored in coordinate or array format.
pub fn read_vector_market(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let file = File::open(path.as_ref())?;
    let p = parse(BufReader::new(file))?;
    if p.cols != 1 {
        return Err(parse_err(1, format!("expected an n x 1 vector, got {}x{}", p.rows, p.cols)));
    }
    let mut v = vec![0.0; p.rows];
    for (i, _, x) in p.triplets {
        v[i] += x;
    }
    Ok(v)
}

/// Writes `a` as coordinate real general. Values are printed in shortest
/// round-trip form, so reading the file back reproduces `a` bitwise.
pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for i in 0..a.nrows() {
        let (cols, vals) = a.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_market(v: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path.as_ref())?);
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} 1 {}", v.len(), v.len())?;
    for (i, x) in v.iter().enumerate() {
        writeln!(w, "{} 1 {:e}", i + 1, x)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse_str(s: &str) -> Result<SparseMatrix> {
        let p = parse(std::io::Cursor::new(s))?;
        SparseMatrix::from_triplets(p.rows, p.cols, &p.triplets)
    }

    #[test]
    fn symmetric_is_expanded() {
        let m = parse_str("%%MatrixMarket matrix coordinate real symmetric\n% c\n2 2 2\n1 1 4.0\n2 1 1.5\n").unwrap();
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.get(1, 0), 1.5);
        assert_eq!(m.get(0, 0), 4.0);
    }

    #[test]
    fn duplicates_are_summed() {
        let m = parse_str("%%MatrixMarket matrix coordinate real general\n2 2 3\n1 2 1\n1 2 2\n2 2 1\n").unwrap();
        assert_eq!(m.get(0, 1), 3.0);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = parse_str("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 1 abc\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        let e = parse_str("%%MatrixMarket matrix coordinate complex general\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }));
        let e = parse_str("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn array_symmetric_lower_triangle() {
        let m = parse_str("%%MatrixMarket matrix array real symmetric\n2 2\n1\n2\n3\n").unwrap();
        assert_eq!(m.to_dense(), vec![vec![1.0, 2.0], vec![2.0, 3.0]]);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let dir = std::env::temp_dir().join(format!("skewsplit_mm_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let a = SparseMatrix::from_triplets(
            3,
            3,
            &[(0, 0, 1.0 / 3.0), (1, 2, -2.5e-300), (2, 1, 7.123456789012345e12)],
        )
        .unwrap();
        let path = dir.join("a.mtx");
        write_matrix_market(&a, &path).unwrap();
        assert_eq!(read_matrix_market(&path).unwrap(), a);
        let v = vec![0.1, -0.2, 1e-17];
        let vp = dir.join("b.mtx");
        write_vector_market(&v, &vp).unwrap();
        assert_eq!(read_vector_market(&vp).unwrap(), v);
        std::fs::remove_dir_all(&dir).ok();
    }
}
