use std::fmt::Write as _;
use std::path::Path;

use super::types::{BoundaryTag, Point2, PolygonalMesh};
use crate::error::{Error, Result};

pub const MESH_HEADER: &str = "polymesh 1";

/// Serializes a mesh in the line-oriented text format. Coordinates use the shortest
/// representation that round-trips exactly.
pub fn mesh_to_string(mesh: &PolygonalMesh) -> String {
    let mut s = String::new();
    writeln!(s, "{MESH_HEADER}").unwrap();
    writeln!(s, "vertices {}", mesh.vertices.len()).unwrap();
    for p in &mesh.vertices {
        writeln!(s, "{:?} {:?}", p.x, p.y).unwrap();
    }
    writeln!(s, "cells {}", mesh.cells.len()).unwrap();
    for c in &mesh.cells {
        let line: Vec<String> = c.iter().map(|v| v.to_string()).collect();
        writeln!(s, "{}", line.join(" ")).unwrap();
    }
    let b = mesh.boundary_tags();
    writeln!(s, "boundary {}", b.len()).unwrap();
    for (v0, v1, tag) in b {
        let t = match tag {
            BoundaryTag::Neumann => "neumann",
            _ => "dirichlet",
        };
        writeln!(s, "{v0} {v1} {t}").unwrap();
    }
    s
}

struct Lines<'a> {
    it: std::iter::Enumerate<std::str::Lines<'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn next(&mut self) -> Option<(usize, &'a str)> {
        for (i, l) in self.it.by_ref() {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            self.last = i + 1;
            return Some((i + 1, t));
        }
        None
    }

    fn expect(&mut self, what: &str) -> Result<(usize, &'a str)> {
        let last = self.last;
        self.next()
            .ok_or_else(|| Error::Parse { line: last + 1, msg: format!("unexpected end of file, expected {what}") })
    }
}

fn parse_count(line: usize, text: &str, key: &str) -> Result<usize> {
    let mut it = text.split_whitespace();
    if it.next() != Some(key) {
        return Err(Error::Parse { line, msg: format!("expected `{key} <count>`") });
    }
    let n = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::Parse { line, msg: format!("bad {key} count") })?;
    if it.next().is_some() {
        return Err(Error::Parse { line, msg: "trailing tokens".into() });
    }
    Ok(n)
}

pub fn parse_mesh(text: &str) -> Result<PolygonalMesh> {
    let mut lines = Lines { it: text.lines().enumerate(), last: 0 };
    let (ln, head) = lines.expect("header")?;
    if head.split_whitespace().collect::<Vec<_>>() != ["polymesh", "1"] {
        return Err(Error::Parse { line: ln, msg: format!("expected header `{MESH_HEADER}`") });
    }
    let (ln, t) = lines.expect("vertices")?;
    let nv = parse_count(ln, t, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, t) = lines.expect("vertex coordinates")?;
        let v: Vec<f64> = t
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: ln, msg: format!("bad coordinate: {e}") })?;
        if v.len() != 2 {
            return Err(Error::Parse { line: ln, msg: "expected two coordinates".into() });
        }
        vertices.push(Point2::new(v[0], v[1]));
    }
    let (ln, t) = lines.expect("cells")?;
    let nc = parse_count(ln, t, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (ln, t) = lines.expect("cell indices")?;
        let c: Vec<usize> = t
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse { line: ln, msg: format!("bad vertex index: {e}") })?;
        cells.push(c);
    }
    let mut tags = Vec::new();
    if let Some((ln, t)) = lines.next() {
        let nb = parse_count(ln, t, "boundary")?;
        for _ in 0..nb {
            let (ln, t) = lines.expect("boundary entry")?;
            let w: Vec<&str> = t.split_whitespace().collect();
            if w.len() != 3 {
                return Err(Error::Parse { line: ln, msg: "expected `v0 v1 tag`".into() });
            }
            let a: usize = w[0].parse().map_err(|_| Error::Parse { line: ln, msg: "bad vertex index".into() })?;
            let b: usize = w[1].parse().map_err(|_| Error::Parse { line: ln, msg: "bad vertex index".into() })?;
            let tag = match w[2] {
                "dirichlet" => BoundaryTag::Dirichlet,
                "neumann" => BoundaryTag::Neumann,
                other => return Err(Error::Parse { line: ln, msg: format!("unknown tag `{other}`") }),
            };
            tags.push((a, b, tag));
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse { line: ln, msg: "unexpected content after boundary section".into() });
        }
    }
    PolygonalMesh::from_cells_with_tags(vertices, cells, &tags)
}

pub fn load_mesh(path: impl AsRef<Path>) -> Result<PolygonalMesh> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

pub fn save_mesh(mesh: &PolygonalMesh, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, mesh_to_string(mesh)).map_err(|e| Error::io(path, e))
}
