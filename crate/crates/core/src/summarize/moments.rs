//! Reduced moments of the germ-grain set formed by discs on the points.
//!
//! Each estimate is the fraction of a regular grid of sample locations at
//! which the prescribed translates are all covered. The grid over a window
//! uses cell centres, with the pitch adjusted so the cells tile the window.

use crate::error::{Error, Result};
use crate::geometry::{CellList, Point2, Realization, Window};

/// Translation vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lag {
    pub dx: f64,
    pub dy: f64,
}

impl Lag {
    pub const ZERO: Lag = Lag { dx: 0.0, dy: 0.0 };

    pub const fn new(dx: f64, dy: f64) -> Self {
        Self { dx, dy }
    }

    pub fn minus(&self, other: &Lag) -> Lag {
        Lag::new(self.dx - other.dx, self.dy - other.dy)
    }
}

/// Union of closed discs of a common radius around the points.
pub struct CoverageField<'a> {
    points: &'a [Point2],
    radius2: f64,
    radius: f64,
    grid: CellList,
}

impl<'a> CoverageField<'a> {
    pub fn new(points: &'a [Point2], window: &Window, radius: f64) -> Self {
        Self {
            points,
            radius,
            radius2: radius * radius,
            grid: CellList::from_points(window, radius.max(1e-9), points),
        }
    }

    pub fn covered(&self, p: &Point2) -> bool {
        let mut hit = false;
        self.grid.for_each_candidate(p, self.radius, |j| {
            if !hit && p.dist2(&self.points[j]) <= self.radius2 {
                hit = true;
            }
        });
        hit
    }
}

fn grid_axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

fn sample_grid(w: &Window, step: f64) -> (Vec<f64>, Vec<f64>) {
    (grid_axis(w.xmin, w.xmax, step), grid_axis(w.ymin, w.ymax, step))
}

/// Sub-window of locations `x` with `x + lag` inside `w` for every lag.
fn eroded_for(w: &Window, lags: &[Lag]) -> Result<Window> {
    let mut lo_x = w.xmin;
    let mut hi_x = w.xmax;
    let mut lo_y = w.ymin;
    let mut hi_y = w.ymax;
    for l in lags {
        lo_x = lo_x.max(w.xmin - l.dx);
        hi_x = hi_x.min(w.xmax - l.dx);
        lo_y = lo_y.max(w.ymin - l.dy);
        hi_y = hi_y.min(w.ymax - l.dy);
    }
    Window::new(lo_x, lo_y, hi_x, hi_y)
        .map_err(|_| Error::DegenerateWindow(format!("lags {lags:?} exceed the window")))
}

fn check_step(grid_step: f64) -> Result<()> {
    if grid_step > 0.0 && grid_step.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("grid_step {grid_step}")))
    }
}

/// Fraction of sample locations `x` in the window eroded by `lags` such that
/// every `x + lag` is covered.
fn joint_coverage(r: &Realization, radius: f64, lags: &[Lag], grid_step: f64) -> Result<f64> {
    check_step(grid_step)?;
    let region = eroded_for(&r.window, lags)?;
    if r.points.is_empty() {
        return Ok(0.0);
    }
    let field = CoverageField::new(&r.points, &r.window, radius);
    let (xs, ys) = sample_grid(&region, grid_step);
    let mut hits = 0usize;
    for &y in &ys {
        for &x in &xs {
            if lags
                .iter()
                .all(|l| field.covered(&Point2::new(x + l.dx, y + l.dy)))
            {
                hits += 1;
            }
        }
    }
    Ok(hits as f64 / (xs.len() * ys.len()) as f64)
}

/// Covered fraction of the window: estimate of `Pr[0 in set]`.
pub fn estimate_m1(r: &Realization, radius: f64, grid_step: f64) -> Result<f64> {
    joint_coverage(r, radius, &[Lag::ZERO], grid_step)
}

/// Estimate of `Pr[0, lag in set]` over the window eroded by `lag`.
pub fn estimate_m2(r: &Realization, radius: f64, lag: Lag, grid_step: f64) -> Result<f64> {
    joint_coverage(r, radius, &[Lag::ZERO, lag], grid_step)
}

/// Estimate of `Pr[0, lag_r, lag_s in set]` over the doubly eroded window.
pub fn estimate_m3(r: &Realization, radius: f64, lag_r: Lag, lag_s: Lag, grid_step: f64) -> Result<f64> {
    joint_coverage(r, radius, &[Lag::ZERO, lag_r, lag_s], grid_step)
}

/// Third cumulant `m3(r,s) - m1 (m2(r) + m2(s) + m2(r-s)) + 2 m1^3`.
pub fn third_cumulant(m1: f64, m2_r: f64, m2_s: f64, m2_rs: f64, m3: f64) -> f64 {
    m3 - m1 * (m2_r + m2_s + m2_rs) + 2.0 * m1 * m1 * m1
}

/// Moments evaluated on one shared grid, so that the event-inclusion
/// inequalities `m3 <= m2 <= m1` hold exactly between the estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentEstimates {
    pub radius: f64,
    pub m1: f64,
    pub m2: Vec<(Lag, f64)>,
    pub m3: Vec<((Lag, Lag), f64)>,
    pub kappa3: Vec<((Lag, Lag), f64)>,
}

impl MomentEstimates {
    pub fn m2_at(&self, lag: &Lag) -> Option<f64> {
        self.m2.iter().find(|(l, _)| l == lag).map(|(_, v)| *v)
    }
}

/// Estimate `m1`, `m2` at every lag (and at `r`, `s`, `r - s` for each
/// pair), `m3` and the third cumulant at every pair. The sample grid covers
/// the window eroded by all of these lags at once.
pub fn moment_estimates(
    r: &Realization,
    radius: f64,
    lags: &[Lag],
    pairs: &[(Lag, Lag)],
    grid_step: f64,
) -> Result<MomentEstimates> {
    check_step(grid_step)?;
    let mut all_lags: Vec<Lag> = vec![Lag::ZERO];
    let mut push = |l: Lag| {
        if !all_lags.contains(&l) {
            all_lags.push(l);
        }
    };
    for l in lags {
        push(*l);
    }
    for (a, b) in pairs {
        push(*a);
        push(*b);
        push(a.minus(b));
    }
    let region = eroded_for(&r.window, &all_lags)?;
    let (xs, ys) = sample_grid(&region, grid_step);
    let total = (xs.len() * ys.len()) as f64;

    let field = CoverageField::new(&r.points, &r.window, radius);
    let mut m1_hits = 0usize;
    let mut m2_hits = vec![0usize; all_lags.len()];
    let mut m3_hits = vec![0usize; pairs.len()];
    let mut cover = vec![false; all_lags.len()];
    for &y in &ys {
        for &x in &xs {
            if r.points.is_empty() || !field.covered(&Point2::new(x, y)) {
                continue;
            }
            m1_hits += 1;
            for (k, l) in all_lags.iter().enumerate() {
                cover[k] = field.covered(&Point2::new(x + l.dx, y + l.dy));
                if cover[k] {
                    m2_hits[k] += 1;
                }
            }
            for (k, (a, b)) in pairs.iter().enumerate() {
                let ia = all_lags.iter().position(|l| l == a).expect("lag registered");
                let ib = all_lags.iter().position(|l| l == b).expect("lag registered");
                if cover[ia] && cover[ib] {
                    m3_hits[k] += 1;
                }
            }
        }
    }
    let m1 = m1_hits as f64 / total;
    let m2: Vec<(Lag, f64)> = all_lags
        .iter()
        .zip(&m2_hits)
        .map(|(l, &h)| (*l, h as f64 / total))
        .collect();
    let lookup = |l: &Lag| m2.iter().find(|(k, _)| k == l).map(|(_, v)| *v).expect("lag registered");
    let m3: Vec<((Lag, Lag), f64)> = pairs
        .iter()
        .zip(&m3_hits)
        .map(|(p, &h)| (*p, h as f64 / total))
        .collect();
    let kappa3 = m3
        .iter()
        .map(|((a, b), v)| {
            (
                (*a, *b),
                third_cumulant(m1, lookup(a), lookup(b), lookup(&a.minus(b)), *v),
            )
        })
        .collect();
    Ok(MomentEstimates {
        radius,
        m1,
        m2,
        m3,
        kappa3,
    })
}
