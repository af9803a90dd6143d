//! Planar points, rectangular windows, realizations and nearest-neighbour
//! distances.

use crate::error::{Error, Result};

/// Hard-core distance used by all simulated processes, in window units.
pub const HARDCORE: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist2(&self, other: &Point2) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        self.dist2(other).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Axis-aligned closed rectangle `[xmin, xmax] x [ymin, ymax]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub xmin: f64,
    pub ymin: f64,
    pub xmax: f64,
    pub ymax: f64,
}

impl Window {
    pub fn new(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self> {
        let finite = [xmin, ymin, xmax, ymax].iter().all(|v| v.is_finite());
        if !finite || xmax <= xmin || ymax <= ymin {
            return Err(Error::DegenerateWindow(format!(
                "[{xmin}, {xmax}] x [{ymin}, {ymax}]"
            )));
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
        })
    }

    /// The square `[0, side]^2`.
    pub fn square(side: f64) -> Result<Self> {
        Self::new(0.0, 0.0, side, side)
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * (self.width() + self.height())
    }

    pub fn center(&self) -> Point2 {
        Point2::new(
            0.5 * (self.xmin + self.xmax),
            0.5 * (self.ymin + self.ymax),
        )
    }

    /// Closed-window membership: boundary points are inside.
    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.xmin && p.x <= self.xmax && p.y >= self.ymin && p.y <= self.ymax
    }

    /// Window grown by `margin` on every side.
    pub fn dilate(&self, margin: f64) -> Result<Self> {
        Self::new(
            self.xmin - margin,
            self.ymin - margin,
            self.xmax + margin,
            self.ymax + margin,
        )
    }
}

/// Move every boundary of `w` inward by `margin`.
pub fn erode_window(w: &Window, margin: f64) -> Result<Window> {
    if !margin.is_finite() || margin < 0.0 {
        return Err(Error::DegenerateWindow(format!("invalid margin {margin}")));
    }
    if 2.0 * margin >= w.width() || 2.0 * margin >= w.height() {
        return Err(Error::DegenerateWindow(format!(
            "margin {margin} too large for {} x {} window",
            w.width(),
            w.height()
        )));
    }
    Window::new(
        w.xmin + margin,
        w.ymin + margin,
        w.xmax - margin,
        w.ymax - margin,
    )
}

/// A finite planar point pattern observed through a window.
#[derive(Debug, Clone, PartialEq)]
pub struct Realization {
    pub points: Vec<Point2>,
    pub window: Window,
    pub label: Option<String>,
    pub seed: u64,
}

impl Realization {
    pub fn new(points: Vec<Point2>, window: Window) -> Self {
        Self {
            points,
            window,
            label: None,
            seed: 0,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points inside `w`, in original order, as a realization observed
    /// through `w`. Label and seed carry over.
    pub fn clipped(&self, w: &Window) -> Realization {
        let mut out = clip(&self.points, w);
        out.label = self.label.clone();
        out.seed = self.seed;
        out
    }

    /// Smallest pairwise distance, or `None` for fewer than two points.
    pub fn min_pair_distance(&self) -> Option<f64> {
        nn_distances(self)
            .ok()
            .map(|d| d.into_iter().fold(f64::INFINITY, f64::min))
    }
}

/// Retain exactly the points inside the closed window, preserving order.
pub fn clip(points: &[Point2], w: &Window) -> Realization {
    let kept = points.iter().filter(|p| w.contains(p)).copied().collect();
    Realization::new(kept, *w)
}

/// Uniform bucket grid over a window. Points outside the window are clamped
/// into the border cells, so queries stay correct for any location.
#[derive(Debug, Clone)]
pub struct CellList {
    xmin: f64,
    ymin: f64,
    cell: f64,
    nx: usize,
    ny: usize,
    cells: Vec<Vec<usize>>,
}

impl CellList {
    /// `cell` is the nominal cell side; it is enlarged if the grid would
    /// otherwise exceed `max_cells`.
    pub fn new(window: &Window, cell: f64, max_cells: usize) -> Self {
        let mut cell = cell.max(1e-9);
        let max_cells = max_cells.max(1);
        loop {
            let nx = (window.width() / cell).ceil().max(1.0) as usize;
            let ny = (window.height() / cell).ceil().max(1.0) as usize;
            if nx.saturating_mul(ny) <= max_cells {
                return Self {
                    xmin: window.xmin,
                    ymin: window.ymin,
                    cell,
                    nx,
                    ny,
                    cells: vec![Vec::new(); nx * ny],
                };
            }
            cell *= 2.0;
        }
    }

    pub fn from_points(window: &Window, cell: f64, points: &[Point2]) -> Self {
        let mut grid = Self::new(window, cell, 4 * points.len().max(16));
        for (i, p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        grid
    }

    fn coord(&self, v: f64, origin: f64, n: usize) -> usize {
        let c = ((v - origin) / self.cell).floor();
        if c <= 0.0 || c.is_nan() {
            0
        } else {
            (c as usize).min(n - 1)
        }
    }

    fn cell_of(&self, p: &Point2) -> (usize, usize) {
        (
            self.coord(p.x, self.xmin, self.nx),
            self.coord(p.y, self.ymin, self.ny),
        )
    }

    pub fn insert(&mut self, idx: usize, p: &Point2) {
        let (cx, cy) = self.cell_of(p);
        self.cells[cy * self.nx + cx].push(idx);
    }

    pub fn remove(&mut self, idx: usize, p: &Point2) {
        let (cx, cy) = self.cell_of(p);
        let bucket = &mut self.cells[cy * self.nx + cx];
        if let Some(pos) = bucket.iter().position(|&i| i == idx) {
            bucket.swap_remove(pos);
        }
    }

    /// Replace index `from` by `to` in the bucket of `p`.
    pub fn relabel(&mut self, p: &Point2, from: usize, to: usize) {
        let (cx, cy) = self.cell_of(p);
        for i in self.cells[cy * self.nx + cx].iter_mut() {
            if *i == from {
                *i = to;
            }
        }
    }

    /// Call `f` on every stored index whose cell intersects the square of
    /// half-side `radius` around `p`. Candidates still need a distance test.
    pub fn for_each_candidate(&self, p: &Point2, radius: f64, mut f: impl FnMut(usize)) {
        let lo = self.cell_of(&Point2::new(p.x - radius, p.y - radius));
        let hi = self.cell_of(&Point2::new(p.x + radius, p.y + radius));
        for cy in lo.1..=hi.1 {
            for cx in lo.0..=hi.0 {
                for &i in &self.cells[cy * self.nx + cx] {
                    f(i);
                }
            }
        }
    }

    /// Nearest stored point to `p` other than index `skip`, by ring search.
    pub fn nearest(&self, points: &[Point2], p: &Point2, skip: Option<usize>) -> Option<(usize, f64)> {
        let (cx, cy) = self.cell_of(p);
        let mut best: Option<(usize, f64)> = None;
        let max_ring = self.nx.max(self.ny);
        for ring in 0..=max_ring {
            let x0 = cx as isize - ring as isize;
            let x1 = cx as isize + ring as isize;
            let y0 = cy as isize - ring as isize;
            let y1 = cy as isize + ring as isize;
            for gy in y0..=y1 {
                if gy < 0 || gy >= self.ny as isize {
                    continue;
                }
                for gx in x0..=x1 {
                    if gx < 0 || gx >= self.nx as isize {
                        continue;
                    }
                    let on_ring = gx == x0 || gx == x1 || gy == y0 || gy == y1;
                    if !on_ring {
                        continue;
                    }
                    for &j in &self.cells[gy as usize * self.nx + gx as usize] {
                        if Some(j) == skip {
                            continue;
                        }
                        let d2 = p.dist2(&points[j]);
                        if best.is_none_or(|(bj, bd)| d2 < bd || (d2 == bd && j < bj)) {
                            best = Some((j, d2));
                        }
                    }
                }
            }
            // Anything beyond this ring is at least `ring * cell` away. Points
            // clamped into border cells can be farther out than their cell
            // suggests, never closer, so the bound stays valid.
            if let Some((_, bd)) = best {
                let reach = ring as f64 * self.cell;
                if bd <= reach * reach {
                    break;
                }
            }
        }
        best.map(|(j, d2)| (j, d2.sqrt()))
    }
}

/// Distance from each point to its nearest other point, in point order.
pub fn nn_distances(r: &Realization) -> Result<Vec<f64>> {
    let n = r.points.len();
    if n < 2 {
        return Err(Error::InsufficientPoints { needed: 2, got: n });
    }
    let grid = CellList::from_points(&r.window, HARDCORE, &r.points);
    Ok(r
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            grid.nearest(&r.points, p, Some(i))
                .map(|(_, d)| d)
                .expect("at least two points")
        })
        .collect())
}
