//! Matrix Market exchange format reader and writer.
//!
//! Supports the coordinate and array formats with real, complex, integer
//! and pattern fields, and general / symmetric / skew-symmetric / hermitian
//! symmetry. Written files are always `coordinate complex general` for
//! matrices and `array complex general` for vectors.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Cx};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmFormat {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmField {
    Real,
    Complex,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum MmSymmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

fn parse_error(path: &Path, message: impl Into<String>) -> Error {
    Error::MatrixMarket {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

struct Parsed {
    nrows: usize,
    ncols: usize,
    triplets: Vec<(usize, usize, Cx)>,
}

fn parse(path: &Path) -> Result<Parsed> {
    let text = read_to_string(path)?;
    let mut lines = text.lines();

    let header = lines
        .next()
        .ok_or_else(|| parse_error(path, "empty file"))?;
    let mut words = header.split_whitespace();
    let banner = words.next().unwrap_or("");
    if !banner.eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(parse_error(path, "missing %%MatrixMarket banner"));
    }
    let object = words.next().unwrap_or("");
    if !object.eq_ignore_ascii_case("matrix") {
        return Err(parse_error(path, format!("unsupported object '{object}'")));
    }
    let format = match words.next().unwrap_or("").to_ascii_lowercase().as_str() {
        "coordinate" => MmFormat::Coordinate,
        "array" => MmFormat::Array,
        other => return Err(parse_error(path, format!("unsupported format '{other}'"))),
    };
    let field = match words.next().unwrap_or("").to_ascii_lowercase().as_str() {
        "real" => MmField::Real,
        "complex" => MmField::Complex,
        "integer" => MmField::Integer,
        "pattern" => MmField::Pattern,
        other => return Err(parse_error(path, format!("unsupported field '{other}'"))),
    };
    let symmetry = match words.next().unwrap_or("").to_ascii_lowercase().as_str() {
        "general" => MmSymmetry::General,
        "symmetric" => MmSymmetry::Symmetric,
        "skew-symmetric" => MmSymmetry::SkewSymmetric,
        "hermitian" => MmSymmetry::Hermitian,
        other => {
            return Err(parse_error(path, format!("unsupported symmetry '{other}'")));
        }
    };
    if format == MmFormat::Array && field == MmField::Pattern {
        return Err(parse_error(path, "array format cannot be pattern"));
    }

    let mut data = lines.filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('%')
    });
    let size_line = data
        .next()
        .ok_or_else(|| parse_error(path, "missing size line"))?;
    let sizes: Vec<usize> = size_line
        .split_whitespace()
        .map(|w| {
            w.parse::<usize>()
                .map_err(|_| parse_error(path, format!("bad size entry '{w}'")))
        })
        .collect::<Result<_>>()?;

    let value_of = |words: &mut std::str::SplitWhitespace<'_>| -> Result<Cx> {
        match field {
            MmField::Pattern => Ok(Cx::new(1.0, 0.0)),
            MmField::Real | MmField::Integer => {
                let re: f64 = words
                    .next()
                    .ok_or_else(|| parse_error(path, "missing value"))?
                    .parse()
                    .map_err(|_| parse_error(path, "bad real value"))?;
                Ok(Cx::new(re, 0.0))
            }
            MmField::Complex => {
                let re: f64 = words
                    .next()
                    .ok_or_else(|| parse_error(path, "missing real part"))?
                    .parse()
                    .map_err(|_| parse_error(path, "bad real part"))?;
                let im: f64 = words
                    .next()
                    .ok_or_else(|| parse_error(path, "missing imaginary part"))?
                    .parse()
                    .map_err(|_| parse_error(path, "bad imaginary part"))?;
                Ok(Cx::new(re, im))
            }
        }
    };

    match format {
        MmFormat::Coordinate => {
            if sizes.len() != 3 {
                return Err(parse_error(path, "coordinate size line needs 3 entries"));
            }
            let (nrows, ncols, nnz) = (sizes[0], sizes[1], sizes[2]);
            let mut triplets = Vec::with_capacity(nnz * 2);
            for _ in 0..nnz {
                let line = data
                    .next()
                    .ok_or_else(|| parse_error(path, "fewer entries than declared"))?;
                let mut words = line.split_whitespace();
                let i: usize = words
                    .next()
                    .ok_or_else(|| parse_error(path, "missing row index"))?
                    .parse()
                    .map_err(|_| parse_error(path, "bad row index"))?;
                let j: usize = words
                    .next()
                    .ok_or_else(|| parse_error(path, "missing column index"))?
                    .parse()
                    .map_err(|_| parse_error(path, "bad column index"))?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_error(path, format!("index ({i}, {j}) out of range")));
                }
                let v = value_of(&mut words)?;
                triplets.push((i - 1, j - 1, v));
                if i != j {
                    match symmetry {
                        MmSymmetry::General => {}
                        MmSymmetry::Symmetric => triplets.push((j - 1, i - 1, v)),
                        MmSymmetry::SkewSymmetric => triplets.push((j - 1, i - 1, -v)),
                        MmSymmetry::Hermitian => triplets.push((j - 1, i - 1, v.conj())),
                    }
                }
            }
            Ok(Parsed {
                nrows,
                ncols,
                triplets,
            })
        }
        MmFormat::Array => {
            if sizes.len() != 2 {
                return Err(parse_error(path, "array size line needs 2 entries"));
            }
            let (nrows, ncols) = (sizes[0], sizes[1]);
            if symmetry != MmSymmetry::General {
                return Err(parse_error(path, "array symmetry other than general"));
            }
            let mut triplets = Vec::with_capacity(nrows * ncols);
            for j in 0..ncols {
                for i in 0..nrows {
                    let line = data
                        .next()
                        .ok_or_else(|| parse_error(path, "fewer entries than declared"))?;
                    let mut words = line.split_whitespace();
                    let v = value_of(&mut words)?;
                    if v != Cx::new(0.0, 0.0) {
                        triplets.push((i, j, v));
                    }
                }
            }
            Ok(Parsed {
                nrows,
                ncols,
                triplets,
            })
        }
    }
}

/// Reads a Matrix Market file into a CSR matrix.
pub fn read_matrix(path: &Path) -> Result<CsrMatrix> {
    let parsed = parse(path)?;
    CsrMatrix::from_triplets(parsed.nrows, parsed.ncols, parsed.triplets)
}

/// Reads a Matrix Market file holding a single column (or row) vector.
pub fn read_vector(path: &Path) -> Result<DVector<Cx>> {
    let parsed = parse(path)?;
    let (n, column) = if parsed.ncols == 1 {
        (parsed.nrows, true)
    } else if parsed.nrows == 1 {
        (parsed.ncols, false)
    } else {
        return Err(parse_error(
            path,
            format!("expected a vector, got {}x{}", parsed.nrows, parsed.ncols),
        ));
    };
    let mut v = DVector::from_element(n, Cx::new(0.0, 0.0));
    for (i, j, val) in parsed.triplets {
        v[if column { i } else { j }] += val;
    }
    Ok(v)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes a CSR matrix as `coordinate complex general`.
pub fn write_matrix(path: &Path, m: &CsrMatrix) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate complex general\n");
    let _ = writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz());
    for (i, j, v) in m.triplets() {
        let _ = writeln!(out, "{} {} {:.17e} {:.17e}", i + 1, j + 1, v.re, v.im);
    }
    write_file(path, &out)
}

/// Writes a vector as `array complex general` (n x 1).
pub fn write_vector(path: &Path, v: &DVector<Cx>) -> Result<()> {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix array complex general\n");
    let _ = writeln!(out, "{} 1", v.len());
    for x in v.iter() {
        let _ = writeln!(out, "{:.17e} {:.17e}", x.re, x.im);
    }
    write_file(path, &out)
}
