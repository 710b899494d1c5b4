use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::types::{polygon_centroid, signed_area, Point2, PolygonalMesh};
use crate::error::{Error, Result};

#[derive(Clone, Copy)]
enum Axis {
    X,
    Y,
}

fn coord(p: Point2, axis: Axis) -> f64 {
    match axis {
        Axis::X => p.x,
        Axis::Y => p.y,
    }
}

/// Sutherland-Hodgman clip against an axis-aligned line. Intersections take the clip
/// coordinate exactly and interpolate the other one from lexicographically ordered endpoints.
fn clip_axis(poly: &[Point2], axis: Axis, value: f64, keep_greater: bool) -> Vec<Point2> {
    let inside = |p: Point2| if keep_greater { coord(p, axis) >= value } else { coord(p, axis) <= value };
    let cut = |a: Point2, b: Point2| -> Point2 {
        let (p, q) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
        let t = (value - coord(p, axis)) / (coord(q, axis) - coord(p, axis));
        match axis {
            Axis::X => Point2::new(value, p.y + t * (q.y - p.y)),
            Axis::Y => Point2::new(p.x + t * (q.x - p.x), value),
        }
    };
    let mut out = Vec::with_capacity(poly.len() + 2);
    let n = poly.len();
    for i in 0..n {
        let s = poly[(i + n - 1) % n];
        let e = poly[i];
        if inside(e) {
            if !inside(s) {
                out.push(cut(s, e));
            }
            out.push(e);
        } else if inside(s) {
            out.push(cut(s, e));
        }
    }
    out
}

fn clip_unit_square(poly: &[Point2]) -> Vec<Point2> {
    let mut p = clip_axis(poly, Axis::X, 0.0, true);
    p = clip_axis(&p, Axis::X, 1.0, false);
    p = clip_axis(&p, Axis::Y, 0.0, true);
    clip_axis(&p, Axis::Y, 1.0, false)
}

/// Clip keeping the half-plane {x : n.x <= c}.
fn clip_halfplane(poly: &[Point2], n: Point2, c: f64) -> Vec<Point2> {
    let f = |p: Point2| n.dot(p) - c;
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let s = poly[(i + m - 1) % m];
        let e = poly[i];
        let (fs, fe) = (f(s), f(e));
        let cut = || {
            let (p, q, fp, fq) = if (s.x, s.y) <= (e.x, e.y) { (s, e, fs, fe) } else { (e, s, fe, fs) };
            p + (q - p) * (fp / (fp - fq))
        };
        if fe <= 0.0 {
            if fs > 0.0 {
                out.push(cut());
            }
            out.push(e);
        } else if fs <= 0.0 {
            out.push(cut());
        }
    }
    out
}

/// Merges coincident points (within `tol`) across polygons and drops degenerate loops.
pub fn weld_polygons(polys: &[Vec<Point2>], tol: f64) -> Result<PolygonalMesh> {
    let mut vertices: Vec<Point2> = Vec::new();
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    let key = |p: Point2| ((p.x / tol).floor() as i64, (p.y / tol).floor() as i64);
    let mut cells = Vec::new();
    for poly in polys {
        let mut loop_idx: Vec<usize> = Vec::with_capacity(poly.len());
        for &p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &v in list {
                            if vertices[v].dist(p) <= tol {
                                found = Some(v);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let v = match found {
                Some(v) => v,
                None => {
                    vertices.push(p);
                    grid.entry((kx, ky)).or_default().push(vertices.len() - 1);
                    vertices.len() - 1
                }
            };
            if loop_idx.last() != Some(&v) {
                loop_idx.push(v);
            }
        }
        while loop_idx.len() > 1 && loop_idx.first() == loop_idx.last() {
            loop_idx.pop();
        }
        if loop_idx.len() < 3 {
            continue;
        }
        let pts: Vec<Point2> = loop_idx.iter().map(|&v| vertices[v]).collect();
        if signed_area(&pts) <= tol * tol {
            continue;
        }
        cells.push(loop_idx);
    }
    // drop vertices not referenced by any cell
    let mut used = vec![usize::MAX; vertices.len()];
    let mut compact = Vec::new();
    for c in cells.iter_mut() {
        for v in c.iter_mut() {
            if used[*v] == usize::MAX {
                used[*v] = compact.len();
                compact.push(vertices[*v]);
            }
            *v = used[*v];
        }
    }
    PolygonalMesh::from_cells(compact, cells)
}

fn hex_margin(z: f64) -> f64 {
    let z = (z + 1.0).rem_euclid(3.0) - 1.0;
    if z <= 1.0 {
        (z + 1.0).min(1.0 - z)
    } else {
        -1.0
    }
}

/// Vertical offset (in units of half the circumradius) of the bottom boundary inside
/// the band of vertical hexagon edges, chosen so that neither horizontal cut comes
/// close to a hexagon vertex.
fn hex_cut_offset(n: usize) -> f64 {
    let r = 1.0 / (n as f64 * 3f64.sqrt());
    let span = 2.0 / r;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..=2000 {
        let c = -1.0 + i as f64 * 1e-3;
        let m = hex_margin(c).min(hex_margin(c + span));
        if m > best.0 + 1e-12 {
            best = (m, c);
        }
    }
    best.1
}

/// Regular pointy-top hexagons with `n` columns across the unit square, clipped to it.
pub fn generate_hexagonal_mesh(n: usize) -> Result<PolygonalMesh> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("hexagonal mesh needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let r = 1.0 / (nf * 3f64.sqrt());
    let u = 0.5 * r;
    let c = hex_cut_offset(n);
    let y0 = -c * u;
    let x_of = |xl: i64| xl as f64 / (2.0 * nf);
    let y_of = |yl: i64| y0 + yl as f64 * u;
    let y_top = (1.0 - y0) / u;
    let j_min = ((c - 2.0) / 3.0).floor() as i64 - 1;
    let j_max = ((y_top + 2.0) / 3.0).ceil() as i64 + 1;
    let mut polys = Vec::new();
    for j in j_min..=j_max {
        let yc = 3 * j;
        for i in -1..=(n as i64 + 1) {
            let xc = 2 * i + j.rem_euclid(2);
            let lattice = [
                (xc, yc - 2),
                (xc + 1, yc - 1),
                (xc + 1, yc + 1),
                (xc, yc + 2),
                (xc - 1, yc + 1),
                (xc - 1, yc - 1),
            ];
            let hex: Vec<Point2> = lattice.iter().map(|&(a, b)| Point2::new(x_of(a), y_of(b))).collect();
            let clipped = clip_unit_square(&hex);
            if clipped.len() >= 3 {
                polys.push(clipped);
            }
        }
    }
    weld_polygons(&polys, 1e-12)
}

fn voronoi_cells(seeds: &[Point2]) -> Vec<Vec<Point2>> {
    let n = seeds.len();
    let g = ((n as f64).sqrt().ceil() as usize).max(1);
    let cs = 1.0 / g as f64;
    let bucket = |p: Point2| -> (usize, usize) {
        let bx = ((p.x / cs).floor().max(0.0) as usize).min(g - 1);
        let by = ((p.y / cs).floor().max(0.0) as usize).min(g - 1);
        (bx, by)
    };
    let mut grid = vec![Vec::new(); g * g];
    for (i, &s) in seeds.iter().enumerate() {
        let (bx, by) = bucket(s);
        grid[by * g + bx].push(i);
    }
    let square = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
    (0..n)
        .map(|i| {
            let si = seeds[i];
            let (bx, by) = bucket(si);
            let mut poly = square.clone();
            let mut ring = 0usize;
            loop {
                let mut cand = Vec::new();
                let lo_x = bx as i64 - ring as i64;
                let hi_x = bx as i64 + ring as i64;
                let lo_y = by as i64 - ring as i64;
                let hi_y = by as i64 + ring as i64;
                for yy in lo_y..=hi_y {
                    for xx in lo_x..=hi_x {
                        let on_ring = xx == lo_x || xx == hi_x || yy == lo_y || yy == hi_y;
                        if !on_ring || xx < 0 || yy < 0 || xx >= g as i64 || yy >= g as i64 {
                            continue;
                        }
                        cand.extend(grid[yy as usize * g + xx as usize].iter().copied().filter(|&j| j != i));
                    }
                }
                cand.sort_by(|&a, &b| si.dist(seeds[a]).total_cmp(&si.dist(seeds[b])).then(a.cmp(&b)));
                for j in cand {
                    let sj = seeds[j];
                    let nrm = sj - si;
                    let mid = (si + sj) * 0.5;
                    poly = clip_halfplane(&poly, nrm, nrm.dot(mid));
                }
                let radius = poly.iter().map(|p| p.dist(si)).fold(0.0, f64::max);
                if ring as f64 * cs > 2.0 * radius || ring > g {
                    break;
                }
                ring += 1;
            }
            poly
        })
        .collect()
}

/// Clipped Voronoi diagram of explicit seeds, with optional Lloyd relaxation.
pub fn voronoi_from_seeds(seeds: &[Point2], lloyd_iterations: usize) -> Result<PolygonalMesh> {
    if seeds.len() < 4 {
        return Err(Error::InvalidArgument(format!("Voronoi mesh needs at least 4 seeds, got {}", seeds.len())));
    }
    for (i, s) in seeds.iter().enumerate() {
        if !(s.is_finite() && (0.0..=1.0).contains(&s.x) && (0.0..=1.0).contains(&s.y)) {
            return Err(Error::InvalidArgument(format!("seed {i} lies outside the unit square")));
        }
    }
    let mut sorted: Vec<usize> = (0..seeds.len()).collect();
    sorted.sort_by(|&a, &b| seeds[a].x.total_cmp(&seeds[b].x).then(seeds[a].y.total_cmp(&seeds[b].y)));
    for w in sorted.windows(2) {
        if seeds[w[0]].dist(seeds[w[1]]) < 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "degenerate seed configuration: seeds {} and {} coincide",
                w[0], w[1]
            )));
        }
    }
    let mut s = seeds.to_vec();
    for _ in 0..lloyd_iterations {
        let cells = voronoi_cells(&s);
        s = cells.iter().map(|c| polygon_centroid(c)).collect();
    }
    let cells = voronoi_cells(&s);
    weld_polygons(&cells, 1e-11)
}

pub fn random_seeds(count: usize, seed: u64) -> Vec<Point2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| Point2::new(rng.random::<f64>(), rng.random::<f64>())).collect()
}

/// Random Voronoi (`lloyd_iterations == 0`) or approximate centroidal Voronoi mesh.
pub fn generate_voronoi_mesh(count: usize, seed: u64, lloyd_iterations: usize) -> Result<PolygonalMesh> {
    voronoi_from_seeds(&random_seeds(count, seed), lloyd_iterations)
}
