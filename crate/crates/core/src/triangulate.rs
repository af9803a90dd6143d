//! Delaunay triangulation of a realization and its combinatorial structure.
//!
//! Construction is incremental Bowyer-Watson inside a large frame triangle.
//! Orientation and in-circle tests use adaptive exact predicates, so the
//! output never depends on rounding. Cocircular quadrilaterals are resolved
//! toward the diagonal holding the lowest vertex index.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use robust::Coord;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Realization, Window};

/// Frame vertices sit this many bounding-box extents away from the data.
const FRAME_SCALE: f64 = 1.0e6;

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub vertices: Vec<Point2>,
    /// Counter-clockwise vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Sorted, deduplicated `(i, j)` pairs with `i < j`.
    pub edges: Vec<[usize; 2]>,
}

impl Triangulation {
    pub fn from_triangles(vertices: Vec<Point2>, triangles: Vec<[usize; 3]>) -> Self {
        let edges = edges_of(&triangles);
        Self {
            vertices,
            triangles,
            edges,
        }
    }

    /// `v i x y` and `t i j k` lines for external plotting.
    pub fn debug_dump(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(s, "v {i} {:?} {:?}", v.x, v.y);
        }
        for t in &self.triangles {
            let _ = writeln!(s, "t {} {} {}", t[0], t[1], t[2]);
        }
        s
    }
}

fn edges_of(triangles: &[[usize; 3]]) -> Vec<[usize; 2]> {
    let mut set = BTreeSet::new();
    for t in triangles {
        for k in 0..3 {
            let (a, b) = (t[k], t[(k + 1) % 3]);
            set.insert([a.min(b), a.max(b)]);
        }
    }
    set.into_iter().collect()
}

fn c(p: &Point2) -> Coord<f64> {
    Coord { x: p.x, y: p.y }
}

/// Positive when `a, b, p` turn counter-clockwise.
pub fn orient(a: &Point2, b: &Point2, p: &Point2) -> f64 {
    robust::orient2d(c(a), c(b), c(p))
}

/// Positive when `d` lies strictly inside the circle through the
/// counter-clockwise triangle `a, b, c`.
pub fn in_circle(a: &Point2, b: &Point2, cc: &Point2, d: &Point2) -> f64 {
    robust::incircle(c(a), c(b), c(cc), c(d))
}

/// Delaunay triangulation including the three frame vertices, which occupy
/// the last three indices. Data vertices keep their input order.
pub fn delaunay_with_frame(points: &[Point2]) -> Result<Triangulation> {
    let n = points.len();
    if n < 3 {
        return Err(Error::DegenerateInput(format!("{n} points; need at least 3")));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::DegenerateInput(format!("non-finite point {p:?}")));
    }
    let mut sorted: Vec<(f64, f64)> = points.iter().map(|p| (p.x, p.y)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateInput("duplicate points".into()));
    }
    let anchor = (1..n).find(|&i| points[i] != points[0]).unwrap_or(0);
    if (1..n).all(|i| orient(&points[0], &points[anchor], &points[i]) == 0.0) {
        return Err(Error::DegenerateInput("all points collinear".into()));
    }

    let (mut xmin, mut ymin, mut xmax, mut ymax) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for p in points {
        xmin = xmin.min(p.x);
        ymin = ymin.min(p.y);
        xmax = xmax.max(p.x);
        ymax = ymax.max(p.y);
    }
    let extent = (xmax - xmin).max(ymax - ymin).max(1.0) * FRAME_SCALE;
    let (cx, cy) = (0.5 * (xmin + xmax), 0.5 * (ymin + ymax));
    let mut vertices = points.to_vec();
    vertices.push(Point2::new(cx - 2.0 * extent, cy - extent));
    vertices.push(Point2::new(cx + 2.0 * extent, cy - extent));
    vertices.push(Point2::new(cx, cy + 2.0 * extent));

    let mut triangles: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for (pi, p) in points.iter().enumerate() {
        let mut boundary: HashMap<(usize, usize), usize> = HashMap::new();
        let mut keep = Vec::with_capacity(triangles.len() + 2);
        for t in triangles.drain(..) {
            let [a, b, cc] = t;
            if in_circle(&vertices[a], &vertices[b], &vertices[cc], p) > 0.0 {
                for k in 0..3 {
                    let (u, v) = (t[k], t[(k + 1) % 3]);
                    if boundary.remove(&(v, u)).is_none() {
                        boundary.insert((u, v), 1);
                    }
                }
            } else {
                keep.push(t);
            }
        }
        let mut cavity: Vec<(usize, usize)> = boundary.into_keys().collect();
        cavity.sort_unstable();
        for (u, v) in cavity {
            keep.push([u, v, pi]);
        }
        triangles = keep;
    }
    resolve_cocircular(&vertices, &mut triangles);
    triangles.sort_unstable();
    Ok(Triangulation::from_triangles(vertices, triangles))
}

/// Flip cocircular quadrilaterals so their diagonal holds the lowest of the
/// four vertex indices.
fn resolve_cocircular(vertices: &[Point2], triangles: &mut [[usize; 3]]) {
    let cap = 4 * triangles.len() * triangles.len() + 16;
    let mut flips = 0usize;
    loop {
        let mut by_edge: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (ti, t) in triangles.iter().enumerate() {
            for k in 0..3 {
                by_edge.insert((t[k], t[(k + 1) % 3]), (ti, t[(k + 2) % 3]));
            }
        }
        let mut keys: Vec<_> = by_edge.keys().copied().filter(|(a, b)| a < b).collect();
        keys.sort_unstable();
        let mut flipped = false;
        for (a, b) in keys {
            let (Some(&(t1, c1)), Some(&(t2, d))) = (by_edge.get(&(a, b)), by_edge.get(&(b, a))) else {
                continue;
            };
            let lowest = a.min(b).min(c1).min(d);
            if lowest == a || lowest == b {
                continue;
            }
            let (pa, pb, pc, pd) = (&vertices[a], &vertices[b], &vertices[c1], &vertices[d]);
            if in_circle(pa, pb, pc, pd) != 0.0 {
                continue;
            }
            // the new diagonal c-d must cross a-b for the flip to be valid
            if orient(pc, pd, pa) * orient(pc, pd, pb) >= 0.0 {
                continue;
            }
            // (a, b, c) is ccw; (b, a, d) is ccw. New: (c, a, d) and (d, b, c).
            triangles[t1] = [c1, a, d];
            triangles[t2] = [d, b, c1];
            flipped = true;
            flips += 1;
            break;
        }
        if !flipped || flips > cap {
            return;
        }
    }
}

/// Remove every vertex outside `w` (frame vertices) together with its
/// incident triangles, re-indexing the survivors in order.
pub fn clean(t: &Triangulation, w: &Window) -> Triangulation {
    let mut map = vec![usize::MAX; t.vertices.len()];
    let mut vertices = Vec::with_capacity(t.vertices.len());
    for (i, v) in t.vertices.iter().enumerate() {
        if w.contains(v) {
            map[i] = vertices.len();
            vertices.push(*v);
        }
    }
    let triangles: Vec<[usize; 3]> = t
        .triangles
        .iter()
        .filter(|tri| tri.iter().all(|&i| map[i] != usize::MAX))
        .map(|tri| [map[tri[0]], map[tri[1]], map[tri[2]]])
        .collect();
    Triangulation::from_triangles(vertices, triangles)
}

/// Cleaned Delaunay triangulation of the realization's points.
pub fn delaunay(r: &Realization) -> Result<Triangulation> {
    let raw = delaunay_with_frame(&r.points)?;
    Ok(clean(&raw, &r.window))
}

/// Symmetric 0/1 adjacency with zero diagonal, stored as sorted
/// neighbour lists.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    neighbours: Vec<Vec<usize>>,
}

impl AdjacencyMatrix {
    pub fn from_edges(n: usize, edges: &[[usize; 2]]) -> Self {
        let mut neighbours = vec![Vec::new(); n];
        for &[i, j] in edges {
            if i != j {
                neighbours[i].push(j);
                neighbours[j].push(i);
            }
        }
        for row in neighbours.iter_mut() {
            row.sort_unstable();
            row.dedup();
        }
        Self { neighbours }
    }

    pub fn n(&self) -> usize {
        self.neighbours.len()
    }

    pub fn neighbours(&self, i: usize) -> &[usize] {
        &self.neighbours[i]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        u8::from(self.neighbours[i].binary_search(&j).is_ok())
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbours[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.neighbours.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.neighbours.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut a = vec![0.0; n * n];
        for (i, row) in self.neighbours.iter().enumerate() {
            for &j in row {
                a[i * n + j] = 1.0;
            }
        }
        a
    }
}

pub fn adjacency(t: &Triangulation) -> AdjacencyMatrix {
    AdjacencyMatrix::from_edges(t.vertices.len(), &t.edges)
}

/// Number of 3-cycles, `trace(A^3) / 6`.
pub fn triangle_count_spectral(a: &AdjacencyMatrix) -> usize {
    let mut trace = 0usize;
    for i in 0..a.n() {
        for &j in a.neighbours(i) {
            for &k in a.neighbours(j) {
                if a.neighbours(k).binary_search(&i).is_ok() {
                    trace += 1;
                }
            }
        }
    }
    trace / 6
}
