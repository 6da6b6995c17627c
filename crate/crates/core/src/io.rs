//! Plain-text matrix files.
//!
//! ```text
//! 8
//! 2 2 2
//! <8 row-major floats>
//! ...
//! ```
//!
//! Line 1 holds the side `d`, line 2 the subsystem dims, then `d` rows of `d`
//! whitespace-separated numbers. Values are written with 17 significant
//! digits so a write/read cycle reproduces every `f64` exactly.

use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::state::{DensityMatrix, Matrix, SubsystemDims};

pub fn write_matrix<W: Write>(mut w: W, m: &Matrix, dims: &SubsystemDims) -> Result<()> {
    dims.check_side(m.nrows())?;
    writeln!(w, "{}", m.nrows())?;
    let dims_line: Vec<String> = dims.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "{}", dims_line.join(" "))?;
    let mut line = String::new();
    for i in 0..m.nrows() {
        line.clear();
        for j in 0..m.ncols() {
            if j > 0 {
                line.push(' ');
            }
            line.push_str(&format!("{:.16e}", m[(i, j)]));
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_matrix<R: BufRead>(r: R) -> Result<(Matrix, SubsystemDims)> {
    let mut lines = r.lines();
    let mut next_line = |what: &str| -> Result<String> {
        loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        return Ok(line);
                    }
                }
                None => return Err(Error::Parse(format!("unexpected end of file reading {what}"))),
            }
        }
    };
    let side: usize = next_line("side")?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad side: {e}")))?;
    let dims: Vec<usize> = next_line("dims")?
        .split_whitespace()
        .map(|t| t.parse().map_err(|e| Error::Parse(format!("bad dim {t:?}: {e}"))))
        .collect::<Result<_>>()?;
    let dims = SubsystemDims::new(dims)?;
    dims.check_side(side)?;
    let mut data = Vec::with_capacity(side * side);
    for row in 0..side {
        let line = next_line(&format!("row {}", row + 1))?;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(
                tok.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("row {}: bad value {tok:?}: {e}", row + 1)))?,
            );
        }
        if data.len() - before != side {
            return Err(Error::Parse(format!(
                "row {} has {} entries, expected {side}",
                row + 1,
                data.len() - before
            )));
        }
    }
    Ok((Matrix::from_row_slice(side, side, &data), dims))
}

pub fn save_density(path: &Path, rho: &DensityMatrix) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_matrix(&mut w, rho.matrix(), rho.dims())?;
    w.flush()?;
    Ok(())
}

pub fn load_density(path: &Path) -> Result<DensityMatrix> {
    let file = std::fs::File::open(path)?;
    let (m, dims) = read_matrix(std::io::BufReader::new(file))?;
    DensityMatrix::new(m, dims)
}
