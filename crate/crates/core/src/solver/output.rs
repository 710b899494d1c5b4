use std::fmt::Write as _;
use std::path::Path;

use super::global::DGSolution;
use crate::error::{Error, Result};

/// CSV of the cell coefficients with columns `cell,alpha,value`, where `alpha` is
/// the graded-lexicographic index of the scaled monomial. Comment lines carry the
/// method parameters.
pub fn solution_to_csv(sol: &DGSolution) -> String {
    let p = &sol.params;
    let mut s = String::new();
    let _ = writeln!(s, "# k={} kprime={} alpha={:?} t={:?} delta={:?}", p.k, p.kprime, p.alpha, p.t, p.delta);
    s.push_str("cell,alpha,value\n");
    for (c, u) in sol.u.iter().enumerate() {
        for (a, v) in u.iter().enumerate() {
            let _ = writeln!(s, "{c},{a},{v:?}");
        }
    }
    s
}

pub fn save_solution(path: impl AsRef<Path>, sol: &DGSolution) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, solution_to_csv(sol)).map_err(|e| Error::io(path, e))
}

/// Parses the coefficient table back into per-cell vectors.
pub fn parse_solution_csv(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut cells: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line == "cell,alpha,value" {
            continue;
        }
        let bad = |msg: &str| Error::Parse { line: no + 1, msg: msg.to_string() };
        let mut it = line.split(',');
        let c: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad cell id"))?;
        let a: usize = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad monomial index"))?;
        let v: f64 = it.next().and_then(|v| v.parse().ok()).ok_or_else(|| bad("bad value"))?;
        if c == cells.len() && a == 0 {
            cells.push(Vec::new());
        } else if c + 1 != cells.len() || a != cells[c].len() {
            return Err(bad("rows out of order"));
        }
        cells[c].push(v);
    }
    Ok(cells)
}
