use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub mesh: String,
    pub dofs: usize,
    pub e_u_1: f64,
    pub ecr_1: Option<f64>,
    pub e_u_0: f64,
    pub ecr_0: Option<f64>,
    pub seconds: Option<f64>,
}

/// One series of results, ordered by refinement level (or by k).
#[derive(Clone, Debug, PartialEq)]
pub struct ResultsTable {
    pub series: String,
    pub rows: Vec<ResultRow>,
}

pub const CSV_HEADER: &str = "mesh,dofs,e_u_1,ecr_1,e_u_0,ecr_0,seconds";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn parse_opt(s: &str, line: usize) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse().map(Some).map_err(|_| Error::Parse { line, msg: format!("bad number '{s}'") })
    }
}

impl ResultsTable {
    pub fn new(series: impl Into<String>) -> Self {
        Self { series: series.into(), rows: Vec::new() }
    }

    /// Shortest round-trip formatting, always with '.' as decimal point.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{:?},{},{:?},{},{}",
                r.mesh,
                r.dofs,
                r.e_u_1,
                opt(r.ecr_1),
                r.e_u_0,
                opt(r.ecr_0),
                opt(r.seconds)
            );
        }
        s
    }

    pub fn from_csv(series: &str, text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h == CSV_HEADER => {}
            _ => return Err(Error::Parse { line: 1, msg: "missing CSV header".into() }),
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let no = i + 1;
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 7 {
                return Err(Error::Parse { line: no, msg: format!("expected 7 fields, found {}", f.len()) });
            }
            let num = |s: &str| -> Result<f64> { s.parse().map_err(|_| Error::Parse { line: no, msg: format!("bad number '{s}'") }) };
            rows.push(ResultRow {
                mesh: f[0].to_string(),
                dofs: f[1].parse().map_err(|_| Error::Parse { line: no, msg: "bad dofs".into() })?,
                e_u_1: num(f[2])?,
                ecr_1: parse_opt(f[3], no)?,
                e_u_0: num(f[4])?,
                ecr_0: parse_opt(f[5], no)?,
                seconds: parse_opt(f[6], no)?,
            });
        }
        Ok(Self { series: series.to_string(), rows })
    }

    /// Plot data: one `log10(dofs) log10(e_u_1) log10(e_u_0)` line per row.
    pub fn to_plot_data(&self) -> String {
        let mut s = format!("# {}\n# log10_dofs log10_e_u_1 log10_e_u_0\n", self.series);
        for r in &self.rows {
            let _ = writeln!(s, "{:?} {:?} {:?}", (r.dofs as f64).log10(), r.e_u_1.log10(), r.e_u_0.log10());
        }
        s
    }
}

/// Writes `<stem>.csv` and `<stem>.dat` into `dir`.
pub fn emit_outputs(dir: &Path, stem: &str, table: &ResultsTable) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidArgument(format!("table '{}' is empty", table.series)));
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv = dir.join(format!("{stem}.csv"));
    std::fs::write(&csv, table.to_csv()).map_err(|e| Error::io(&csv, e))?;
    let dat = dir.join(format!("{stem}.dat"));
    std::fs::write(&dat, table.to_plot_data()).map_err(|e| Error::io(&dat, e))?;
    Ok(())
}
