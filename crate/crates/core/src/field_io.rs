//! CSV export of averaged fields.
//!
//! One header line `i,j,k,theta,s1,s2,stheta`, then one record per volume in
//! storage order (`i` fastest). Values are written in shortest round-trip form,
//! so reading a file back reproduces the field exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{AveragedField, GridSpec};
use crate::scalar::Scalar;

pub const FIELD_HEADER: &str = "i,j,k,theta,s1,s2,stheta";

pub fn write_field_csv<T: Scalar, W: Write>(sigma_hat: &AveragedField<T>, grid: &GridSpec<T>, w: W) -> Result<()> {
    sigma_hat.check(grid)?;
    let mut w = BufWriter::new(w);
    writeln!(w, "{FIELD_HEADER}")?;
    for ((k, j, i), v) in sigma_hat.vals.indexed_iter() {
        writeln!(w, "{i},{j},{k},{},{},{},{}", grid.theta(k), v[0], v[1], v[2])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_csv<T: Scalar, R: BufRead>(r: R, grid: &GridSpec<T>) -> Result<AveragedField<T>> {
    let mut out = AveragedField::zeros(grid);
    let mut seen = ndarray::Array3::from_elem(grid.volume_dims(), false);
    let mut lines = r.lines();
    let header = lines.next().transpose()?;
    match header {
        Some(h) if h.trim() == FIELD_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                detail: format!("expected header `{FIELD_HEADER}`"),
            })
        }
    }
    for (n, line) in lines.enumerate() {
        let line = line?;
        let lineno = n + 2;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |detail: String| Error::Parse { line: lineno, detail };
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 7 {
            return Err(parse_err(format!("expected 7 columns, found {}", cols.len())));
        }
        let index = |c: &str| {
            c.parse::<usize>()
                .map_err(|e| parse_err(format!("bad index `{c}`: {e}")))
        };
        let value = |c: &str| T::from_str_radix(c, 10).map_err(|_| parse_err(format!("bad number `{c}`")));
        let (i, j, k) = (index(cols[0])?, index(cols[1])?, index(cols[2])?);
        if i >= grid.nx() || j >= grid.ny() || k >= grid.ntheta() {
            return Err(parse_err(format!("volume ({i}, {j}, {k}) outside the grid")));
        }
        if std::mem::replace(&mut seen[[k, j, i]], true) {
            return Err(parse_err(format!("volume ({i}, {j}, {k}) repeated")));
        }
        out.vals[[k, j, i]] = [value(cols[4])?, value(cols[5])?, value(cols[6])?];
    }
    let missing = seen.iter().filter(|&&s| !s).count();
    if missing > 0 {
        return Err(Error::Parse {
            line: 0,
            detail: format!("{missing} volumes missing"),
        });
    }
    Ok(out)
}

pub fn export_field<T: Scalar>(sigma_hat: &AveragedField<T>, grid: &GridSpec<T>, path: &Path) -> Result<()> {
    write_field_csv(sigma_hat, grid, File::create(path)?)
}

pub fn import_field<T: Scalar>(path: &Path, grid: &GridSpec<T>) -> Result<AveragedField<T>> {
    read_field_csv(BufReader::new(File::open(path)?), grid)
}
