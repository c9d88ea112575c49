//! Plain-text tensor serialization.
//!
//! A file holds a sequence of blocks
//!
//! ```text
//! tensor <name> <rows> <cols>
//! <cols space-separated values>   (one line per row)
//! ```
//!
//! terminated by a single line `end`. Values are written in scientific
//! notation with 17 significant digits, which round-trips f64 bit-exactly.

use super::DenseMatrix;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

pub fn write_tensors(path: &Path, tensors: &[(&str, &DenseMatrix)]) -> Result<()> {
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    let mut line = String::new();
    for (name, t) in tensors {
        if name.is_empty() || name.contains(char::is_whitespace) {
            return Err(Error::Parameter(format!("bad tensor name {name:?}")));
        }
        writeln!(w, "tensor {name} {} {}", t.rows(), t.cols())?;
        for i in 0..t.rows() {
            line.clear();
            for (j, v) in t.row(i).iter().enumerate() {
                if j > 0 {
                    line.push(' ');
                }
                let _ = write!(line, "{v:.16e}");
            }
            writeln!(w, "{line}")?;
        }
    }
    writeln!(w, "end")?;
    w.flush()?;
    Ok(())
}

pub fn read_tensors(path: &Path) -> Result<Vec<(String, DenseMatrix)>> {
    let file = std::fs::File::open(path)?;
    let mut lines = BufReader::new(file).lines().enumerate();
    let mut out = Vec::new();
    let bad = |ln: usize, msg: String| Error::Data(format!("{}:{}: {msg}", path.display(), ln + 1));
    loop {
        let (ln, header) = match lines.next() {
            Some((ln, l)) => (ln, l?),
            None => return Err(Error::Data(format!("{}: missing end line", path.display()))),
        };
        let header = header.trim_end();
        if header == "end" {
            return Ok(out);
        }
        let parts: Vec<&str> = header.split(' ').collect();
        if parts.len() != 4 || parts[0] != "tensor" {
            return Err(bad(ln, format!("expected `tensor <name> <rows> <cols>`, got {header:?}")));
        }
        let name = parts[1].to_string();
        let rows: usize = parts[2]
            .parse()
            .map_err(|_| bad(ln, format!("bad row count {:?}", parts[2])))?;
        let cols: usize = parts[3]
            .parse()
            .map_err(|_| bad(ln, format!("bad col count {:?}", parts[3])))?;
        let mut t = DenseMatrix::zeros(rows, cols);
        for i in 0..rows {
            let (ln, row) = match lines.next() {
                Some((ln, l)) => (ln, l?),
                None => return Err(Error::Data(format!("{}: truncated tensor {name}", path.display()))),
            };
            let mut n = 0;
            for (j, tok) in row.split_ascii_whitespace().enumerate() {
                if j >= cols {
                    return Err(bad(ln, format!("row has more than {cols} values")));
                }
                let v: f64 = tok
                    .parse()
                    .map_err(|_| bad(ln, format!("bad value {tok:?}")))?;
                t.set(i, j, v);
                n = j + 1;
            }
            if n != cols {
                return Err(bad(ln, format!("row has {n} values, expected {cols}")));
            }
        }
        out.push((name, t));
    }
}
