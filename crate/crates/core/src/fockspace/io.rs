//! Plain-text density matrices.
//!
//! ```text
//! # fock-density
//! # basis: lexicographic in (n1, ..., nm), n1 most significant
//! modes 2
//! cutoff 1
//! data
//! re im re im ...      (one line per row, dim pairs)
//! ```

use std::fmt::Write as _;

use nalgebra::DMatrix;

use super::basis::Basis;
use super::states::FockDensity;
use super::FockError;
use crate::linalg::{c, C64};

pub fn write_density(rho: &FockDensity) -> String {
    let b = rho.basis();
    let mut s = String::new();
    s.push_str("# fock-density\n# basis: lexicographic in (n1, ..., nm), n1 most significant\n");
    let _ = writeln!(s, "modes {}", b.modes());
    let _ = writeln!(s, "cutoff {}", b.cutoff());
    s.push_str("data\n");
    let m = rho.matrix();
    for i in 0..b.dim() {
        let row: Vec<String> = (0..b.dim()).map(|j| format!("{:.16e} {:.16e}", m[(i, j)].re, m[(i, j)].im)).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

fn parse_err(line: usize, message: impl Into<String>) -> FockError {
    FockError::Parse { line, message: message.into() }
}

pub fn read_density(text: &str) -> Result<FockDensity, FockError> {
    let mut modes = None;
    let mut cutoff = None;
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut data_line = 0;
    for (n, line) in lines.by_ref() {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if line == "data" {
            data_line = n;
            break;
        }
        let (key, value) = line.split_once(char::is_whitespace).ok_or_else(|| parse_err(n, "expected `key value`"))?;
        let value: usize = value.trim().parse().map_err(|_| parse_err(n, format!("invalid integer `{}`", value.trim())))?;
        match key {
            "modes" => modes = Some(value),
            "cutoff" => cutoff = Some(value),
            other => return Err(parse_err(n, format!("unknown key `{other}`"))),
        }
    }
    if data_line == 0 {
        return Err(parse_err(text.lines().count(), "missing `data` section"));
    }
    let modes = modes.ok_or_else(|| parse_err(data_line, "missing `modes`"))?;
    let cutoff = cutoff.ok_or_else(|| parse_err(data_line, "missing `cutoff`"))?;
    let basis = Basis::new(modes, cutoff)?;
    let dim = basis.dim();
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    let mut row = 0;
    for (n, line) in lines {
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if row >= dim {
            return Err(parse_err(n, "more rows than the basis dimension"));
        }
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_err(n, format!("invalid number `{t}`"))))
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() != 2 * dim {
            return Err(parse_err(n, format!("expected {} numbers, found {}", 2 * dim, vals.len())));
        }
        for j in 0..dim {
            m[(row, j)] = c(vals[2 * j], vals[2 * j + 1]);
        }
        row += 1;
    }
    if row != dim {
        return Err(parse_err(text.lines().count(), format!("expected {dim} rows, found {row}")));
    }
    FockDensity::new(basis, m)
}
