//! Density-matrix text files: a commented header documenting the basis, then a
//! table of real parts and a table of imaginary parts. Numbers use Rust's
//! shortest round-trip exponent form, so a parse reproduces every bit.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::spin::basis_label;

const MAGIC: &str = "# overlap-entangle density matrix v1";

pub fn write_matrix(m: &CMatrix) -> String {
    let dim = m.nrows();
    let n = dim.trailing_zeros() as usize;
    let mut out = String::new();
    out.push_str(MAGIC);
    out.push('\n');
    out.push_str(&format!("# dim={dim} qubits={n}\n"));
    out.push_str("# basis: detector-major, detector 0 is the most significant bit, down=0 < up=1\n");
    let labels: Vec<String> = (0..dim).map(|i| basis_label(i, n)).collect();
    out.push_str(&format!("# order: {}\n", labels.join(" ")));
    for (title, part) in [("real", 0), ("imag", 1)] {
        out.push_str(&format!("# {title}\n"));
        for i in 0..dim {
            let row: Vec<String> = (0..dim)
                .map(|j| {
                    let z = m[(i, j)];
                    format!("{:e}", if part == 0 { z.re } else { z.im })
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut dim: Option<usize> = None;
    let mut section: Option<usize> = None;
    let mut tables: [Vec<Vec<f64>>; 2] = [Vec::new(), Vec::new()];
    let mut last = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        last = line_no;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            match comment {
                "real" => section = Some(0),
                "imag" => section = Some(1),
                _ => {
                    for token in comment.split_whitespace() {
                        if let Some(v) = token.strip_prefix("dim=") {
                            dim = Some(v.parse().map_err(|_| err(line_no, format!("bad dim '{v}'")))?);
                        }
                    }
                }
            }
            continue;
        }
        let d = dim.ok_or_else(|| err(line_no, "data before 'dim=' header".into()))?;
        let s = section.ok_or_else(|| err(line_no, "data before '# real' section".into()))?;
        let row = line
            .split_whitespace()
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|_| err(line_no, format!("'{x}' is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if row.len() != d {
            return Err(err(line_no, format!("expected {d} columns, found {}", row.len())));
        }
        if tables[s].len() == d {
            return Err(err(line_no, "too many rows in section".into()));
        }
        tables[s].push(row);
    }
    let d = dim.ok_or_else(|| err(last, "missing 'dim=' header".into()))?;
    if tables[0].len() != d || tables[1].len() != d {
        return Err(err(
            last,
            format!("expected {d} real and {d} imaginary rows (file truncated?)"),
        ));
    }
    Ok(CMatrix::from_fn(d, d, |i, j| {
        Complex64::new(tables[0][i][j], tables[1][i][j])
    }))
}
