//! Simulators for the regular point processes being compared: simple
//! sequential inhibition, dead leaves, hard-core Strauss and Diggle-Gratton,
//! plus homogeneous Poisson for controls and initial states.
//!
//! All simulators are pure functions of their parameters and a `u64` seed.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{clip, CellList, Point2, Realization, Window};
use crate::seed::{derive_seed, rng_from_seed, Rng};
use crate::summarize::moments::estimate_m1;

/// Probability of proposing a birth; deaths use the same value, shifts
/// take the remainder.
const BIRTH_PROB: f64 = 0.4;
const DEATH_PROB: f64 = 0.4;
/// Shift proposals move a point uniformly within this fraction of the hard core.
const SHIFT_FRACTION: f64 = 0.25;
/// The chain starts from SSI run until this many consecutive rejections.
const INITIAL_MAX_ATTEMPTS: usize = 10_000;

fn uniform_in(w: &Window, rng: &mut Rng) -> Point2 {
    Point2::new(
        w.xmin + w.width() * rng.random::<f64>(),
        w.ymin + w.height() * rng.random::<f64>(),
    )
}

fn labelled(points: Vec<Point2>, w: &Window, seed: u64) -> Realization {
    Realization::new(points, *w).with_seed(seed)
}

// ---------------------------------------------------------------------------
// Poisson

pub fn simulate_poisson(w: &Window, intensity: f64, seed: u64) -> Result<Realization> {
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "Poisson intensity must be non-negative, got {intensity}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let mean = intensity * w.area();
    let n = if mean > 0.0 {
        let dist = Poisson::new(mean)
            .map_err(|e| Error::InvalidParameter(format!("Poisson mean {mean}: {e}")))?;
        dist.sample(&mut rng) as usize
    } else {
        0
    };
    let points = (0..n).map(|_| uniform_in(w, &mut rng)).collect();
    Ok(labelled(points, w, seed))
}

// ---------------------------------------------------------------------------
// Simple sequential inhibition

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsiParams {
    pub hardcore: f64,
    pub target_n: usize,
    /// Consecutive rejected proposals after which the pattern is declared full.
    pub max_attempts: usize,
}

impl SsiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hardcore >= 0.0 && self.hardcore.is_finite()) {
            return Err(Error::InvalidParameter(format!("SSI hardcore {}", self.hardcore)));
        }
        if self.target_n == 0 || self.max_attempts == 0 {
            return Err(Error::InvalidParameter(
                "SSI target_n and max_attempts must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SsiOutput {
    pub realization: Realization,
    /// False when the run stopped on `max_attempts` before reaching `target_n`.
    pub reached_target: bool,
}

pub fn simulate_ssi(w: &Window, p: &SsiParams, seed: u64) -> Result<SsiOutput> {
    p.validate()?;
    let mut rng = rng_from_seed(seed);
    let (points, reached_target) = ssi_points(w, p, &mut rng);
    Ok(SsiOutput {
        realization: labelled(points, w, seed),
        reached_target,
    })
}

fn ssi_points(w: &Window, p: &SsiParams, rng: &mut Rng) -> (Vec<Point2>, bool) {
    let hc2 = p.hardcore * p.hardcore;
    let mut grid = CellList::new(w, p.hardcore.max(1e-6), 1 << 16);
    let jammed = (w.area() / (p.hardcore * p.hardcore)).ceil() as usize + 1;
    let mut points: Vec<Point2> = Vec::with_capacity(p.target_n.min(jammed));
    let mut failures = 0usize;
    while points.len() < p.target_n {
        let u = uniform_in(w, rng);
        let mut ok = true;
        grid.for_each_candidate(&u, p.hardcore, |j| {
            if u.dist2(&points[j]) < hc2 {
                ok = false;
            }
        });
        if ok {
            grid.insert(points.len(), &u);
            points.push(u);
            failures = 0;
        } else {
            failures += 1;
            if failures >= p.max_attempts {
                return (points, false);
            }
        }
    }
    (points, true)
}

/// SSI count on `outer` whose clipped pattern on `inner` should cover
/// `coverage` of `inner` with discs of `radius`. Discs are disjoint when
/// the hard core is at least `2 * radius`; the perimeter term removes the
/// expected disc area falling outside `inner`.
pub fn ssi_target_for_coverage(outer: &Window, inner: &Window, coverage: f64, radius: f64) -> usize {
    let per_point = PI * radius * radius * inner.area() - 2.0 / 3.0 * radius.powi(3) * inner.perimeter();
    let intensity = coverage * inner.area() / per_point;
    (intensity * outer.area()).round().max(1.0) as usize
}

/// Default consecutive-rejection limit for SSI.
pub const SSI_MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SsiCalibration {
    pub target_n: usize,
    pub coverage: f64,
    pub evaluations: usize,
}

/// Smallest-error SSI count for a coverage target, by integer bisection
/// starting from [`ssi_target_for_coverage`]. Pilots share seeds across
/// counts, and SSI with a larger count extends the same sequence, so the
/// pilot mean is nondecreasing in the count.
pub fn calibrate_ssi_target(
    outer: &Window,
    inner: &Window,
    target: f64,
    hardcore: f64,
    opts: &CalibrationOptions,
    seed: u64,
) -> Result<SsiCalibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("coverage target {target} not in (0, 1)")));
    }
    if opts.pilots < 20 {
        return Err(Error::InvalidParameter("calibration needs at least 20 pilots".into()));
    }
    let mut evaluations = 0usize;
    let mut eval = |n: usize| -> Result<f64> {
        evaluations += 1;
        let p = SsiParams {
            hardcore,
            target_n: n,
            max_attempts: SSI_MAX_ATTEMPTS,
        };
        let values: Vec<f64> = (0..opts.pilots)
            .into_par_iter()
            .map(|k| {
                let r = simulate_ssi(outer, &p, derive_seed(seed, "pilot", k as u64))?.realization;
                estimate_m1(&r.clipped(inner), opts.coverage_radius, opts.grid_step)
            })
            .collect::<Result<_>>()?;
        Ok(values.iter().sum::<f64>() / values.len() as f64)
    };

    let start = ssi_target_for_coverage(outer, inner, target, opts.coverage_radius);
    let c0 = eval(start)?;
    // bracket: c(lo) < target <= c(hi)
    let (mut lo, mut c_lo, mut hi, mut c_hi);
    let mut step = (start / 50).max(1);
    if c0 < target {
        (lo, c_lo) = (start, c0);
        let mut expansions = 0;
        loop {
            let n = lo + step;
            let c = eval(n)?;
            if c >= target {
                (hi, c_hi) = (n, c);
                break;
            }
            if c <= c_lo || expansions >= opts.max_expansions {
                return Err(Error::CalibrationFailed(format!(
                    "SSI coverage {c:.4} at count {n} cannot reach {target}"
                )));
            }
            (lo, c_lo) = (n, c);
            step *= 2;
            expansions += 1;
        }
    } else {
        (hi, c_hi) = (start, c0);
        loop {
            let n = hi.saturating_sub(step).max(1);
            let c = eval(n)?;
            if c < target {
                (lo, c_lo) = (n, c);
                break;
            }
            if n == 1 {
                return Ok(SsiCalibration {
                    target_n: 1,
                    coverage: c,
                    evaluations,
                });
            }
            (hi, c_hi) = (n, c);
            step *= 2;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let c = eval(mid)?;
        if c < target {
            (lo, c_lo) = (mid, c);
        } else {
            (hi, c_hi) = (mid, c);
        }
    }
    let (target_n, coverage) = if target - c_lo <= c_hi - target {
        (lo, c_lo)
    } else {
        (hi, c_hi)
    };
    if (coverage - target).abs() > opts.tol {
        return Err(Error::CalibrationFailed(format!(
            "closest SSI count {target_n} gives coverage {coverage:.4}, target {target}"
        )));
    }
    Ok(SsiCalibration {
        target_n,
        coverage,
        evaluations,
    })
}

// ---------------------------------------------------------------------------
// Dead leaves

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeadLeavesParams {
    /// Grain radius; retained centres are at least twice this apart.
    pub disc_radius: f64,
    /// Dilation of the window in which leaves fall.
    pub saturation_margin: f64,
}

impl DeadLeavesParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.disc_radius > 0.0 && self.disc_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "dead leaves disc_radius {}",
                self.disc_radius
            )));
        }
        if !(self.saturation_margin >= 2.0 * self.disc_radius) {
            return Err(Error::InvalidParameter(format!(
                "saturation_margin {} must be at least 2 * disc_radius",
                self.saturation_margin
            )));
        }
        Ok(())
    }

    /// Radius of the leaves that hide later centres.
    pub fn leaf_radius(&self) -> f64 {
        2.0 * self.disc_radius
    }
}

/// Full record of a dead-leaves run on the dilated window.
#[derive(Debug, Clone)]
pub struct DeadLeavesRun {
    pub dilated: Window,
    pub arrived: Vec<Point2>,
    pub retained: Vec<Point2>,
}

/// Reverse-time dead leaves. Leaves of radius `2 * disc_radius` fall at
/// uniform locations on the dilated window; a leaf's centre is retained
/// when no earlier leaf covers it. Falling stops once the leaves cover the
/// dilated window, checked at the nodes of a grid of pitch at most
/// `disc_radius / 8` that includes the window boundary.
pub fn dead_leaves_run(w: &Window, p: &DeadLeavesParams, seed: u64) -> Result<DeadLeavesRun> {
    p.validate()?;
    let dilated = w.dilate(p.saturation_margin)?;
    let leaf = p.leaf_radius();
    let leaf2 = leaf * leaf;
    let nx = (dilated.width() / (p.disc_radius / 8.0)).ceil() as usize;
    let ny = (dilated.height() / (p.disc_radius / 8.0)).ceil() as usize;
    let (px, py) = (dilated.width() / nx as f64, dilated.height() / ny as f64);
    let node = |i: usize, j: usize| Point2::new(dilated.xmin + i as f64 * px, dilated.ymin + j as f64 * py);
    let mut covered = vec![false; (nx + 1) * (ny + 1)];
    let mut uncovered = covered.len();

    let mut rng = rng_from_seed(seed);
    let mut grid = CellList::new(&dilated, leaf, 1 << 16);
    let mut arrived: Vec<Point2> = Vec::new();
    let mut retained = Vec::new();
    while uncovered > 0 {
        let u = uniform_in(&dilated, &mut rng);
        let mut hidden = false;
        grid.for_each_candidate(&u, leaf, |j| {
            if u.dist2(&arrived[j]) < leaf2 {
                hidden = true;
            }
        });
        if !hidden {
            retained.push(u);
        }
        grid.insert(arrived.len(), &u);
        arrived.push(u);

        let i0 = ((u.x - leaf - dilated.xmin) / px).ceil().max(0.0) as usize;
        let i1 = (((u.x + leaf - dilated.xmin) / px).floor().max(-1.0) as isize + 1).min(nx as isize + 1);
        let j0 = ((u.y - leaf - dilated.ymin) / py).ceil().max(0.0) as usize;
        let j1 = (((u.y + leaf - dilated.ymin) / py).floor().max(-1.0) as isize + 1).min(ny as isize + 1);
        for j in j0..j1.max(0) as usize {
            for i in i0..i1.max(0) as usize {
                let idx = j * (nx + 1) + i;
                if !covered[idx] && u.dist2(&node(i, j)) <= leaf2 {
                    covered[idx] = true;
                    uncovered -= 1;
                }
            }
        }
    }
    Ok(DeadLeavesRun {
        dilated,
        arrived,
        retained,
    })
}

pub fn simulate_dead_leaves(w: &Window, p: &DeadLeavesParams, seed: u64) -> Result<Realization> {
    let run = dead_leaves_run(w, p, seed)?;
    let mut r = clip(&run.retained, w);
    r.seed = seed;
    Ok(r)
}

// ---------------------------------------------------------------------------
// Pairwise-interaction Gibbs processes

/// Pair interaction function `h(t)` of a pairwise-interaction process with
/// a hard core: `h(t) = 0` below `hardcore()` and `h(t) = 1` from `range()` on.
pub trait PairInteraction: Sync {
    fn hardcore(&self) -> f64;
    fn range(&self) -> f64;
    fn pair_factor(&self, t: f64) -> f64;
    fn sweeps(&self) -> usize;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StraussHcParams {
    /// Gibbs activity, points per unit area.
    pub activity: f64,
    /// Penalty per pair closer than `range`, in (0, 1].
    pub interaction: f64,
    pub range: f64,
    pub hardcore: f64,
    pub sweeps: usize,
}

impl StraussHcParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.activity.is_finite()
            && self.activity > 0.0
            && self.interaction > 0.0
            && self.interaction <= 1.0
            && self.hardcore > 0.0
            && self.range >= self.hardcore
            && self.range.is_finite()
            && self.sweeps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Strauss parameters {self:?}")))
        }
    }
}

impl PairInteraction for StraussHcParams {
    fn hardcore(&self) -> f64 {
        self.hardcore
    }
    fn range(&self) -> f64 {
        self.range
    }
    fn pair_factor(&self, t: f64) -> f64 {
        if t < self.hardcore {
            0.0
        } else if t < self.range {
            self.interaction
        } else {
            1.0
        }
    }
    fn sweeps(&self) -> usize {
        self.sweeps
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiggleGrattonParams {
    pub activity: f64,
    /// Hard-core distance.
    pub delta: f64,
    /// Width of the soft band beyond the hard core.
    pub rho: f64,
    pub kappa: f64,
    pub sweeps: usize,
}

impl DiggleGrattonParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.activity.is_finite()
            && self.activity > 0.0
            && self.delta > 0.0
            && self.rho > 0.0
            && self.kappa > 0.0
            && (self.delta + self.rho).is_finite()
            && self.sweeps > 0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("Diggle-Gratton parameters {self:?}")))
        }
    }
}

/// Diggle-Gratton pair factor with a band of width `rho` beyond `delta`.
pub fn diggle_gratton_factor(t: f64, delta: f64, rho: f64, kappa: f64) -> f64 {
    if t < delta {
        0.0
    } else if t < delta + rho {
        ((t - delta) / rho).powf(kappa)
    } else {
        1.0
    }
}

impl PairInteraction for DiggleGrattonParams {
    fn hardcore(&self) -> f64 {
        self.delta
    }
    fn range(&self) -> f64 {
        self.delta + self.rho
    }
    fn pair_factor(&self, t: f64) -> f64 {
        diggle_gratton_factor(t, self.delta, self.rho, self.kappa)
    }
    fn sweeps(&self) -> usize {
        self.sweeps
    }
}

/// Unnormalized density `activity^n * prod_{i<j} h(|x_i - x_j|)`, by direct
/// enumeration of all pairs.
pub fn unnormalized_density<I: PairInteraction + ?Sized>(
    interaction: &I,
    activity: f64,
    points: &[Point2],
) -> f64 {
    let mut f = activity.powi(points.len() as i32);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            f *= interaction.pair_factor(points[i].dist(&points[j]));
        }
    }
    f
}

/// Metropolis-Hastings birth/death/shift sampler state.
pub struct GibbsChain<'a, I: PairInteraction + ?Sized> {
    interaction: &'a I,
    activity: f64,
    window: Window,
    points: Vec<Point2>,
    grid: CellList,
}

impl<'a, I: PairInteraction + ?Sized> GibbsChain<'a, I> {
    pub fn new(interaction: &'a I, activity: f64, window: Window, points: Vec<Point2>) -> Self {
        let mut grid = CellList::new(&window, interaction.range().max(1e-6), 1 << 16);
        for (i, p) in points.iter().enumerate() {
            grid.insert(i, p);
        }
        Self {
            interaction,
            activity,
            window,
            points,
            grid,
        }
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point2> {
        self.points
    }

    /// Product of pair factors between `u` and every current point except `skip`.
    fn neighbour_product(&self, u: &Point2, skip: Option<usize>) -> f64 {
        let range = self.interaction.range();
        let range2 = range * range;
        let mut prod = 1.0;
        self.grid.for_each_candidate(u, range, |j| {
            if Some(j) == skip {
                return;
            }
            let d2 = u.dist2(&self.points[j]);
            if d2 < range2 {
                prod *= self.interaction.pair_factor(d2.sqrt());
            }
        });
        prod
    }

    /// Hastings ratio for adding `u`.
    pub fn birth_ratio(&self, u: &Point2) -> f64 {
        let n = self.points.len() as f64;
        self.activity * self.window.area() * self.neighbour_product(u, None) * DEATH_PROB
            / (BIRTH_PROB * (n + 1.0))
    }

    /// Hastings ratio for deleting point `i`.
    pub fn death_ratio(&self, i: usize) -> f64 {
        let n = self.points.len() as f64;
        let local = self.neighbour_product(&self.points[i], Some(i));
        n * BIRTH_PROB / (DEATH_PROB * self.activity * self.window.area() * local)
    }

    fn shift_ratio(&self, i: usize, u: &Point2) -> f64 {
        let new = self.neighbour_product(u, Some(i));
        if new == 0.0 {
            return 0.0;
        }
        new / self.neighbour_product(&self.points[i], Some(i))
    }

    fn remove(&mut self, i: usize) {
        let last = self.points.len() - 1;
        self.grid.remove(i, &self.points[i]);
        if i != last {
            self.grid.relabel(&self.points[last], last, i);
        }
        self.points.swap_remove(i);
    }

    /// One proposal.
    pub fn step(&mut self, rng: &mut Rng) {
        let move_u: f64 = rng.random();
        if move_u < BIRTH_PROB {
            let u = uniform_in(&self.window, rng);
            if rng.random::<f64>() < self.birth_ratio(&u) {
                self.grid.insert(self.points.len(), &u);
                self.points.push(u);
            }
        } else if move_u < BIRTH_PROB + DEATH_PROB {
            if self.points.is_empty() {
                return;
            }
            let i = rng.random_range(0..self.points.len());
            if rng.random::<f64>() < self.death_ratio(i) {
                self.remove(i);
            }
        } else {
            if self.points.is_empty() {
                return;
            }
            let i = rng.random_range(0..self.points.len());
            let radius = SHIFT_FRACTION * self.interaction.hardcore();
            let (u, v) = loop {
                let u = 2.0 * rng.random::<f64>() - 1.0;
                let v = 2.0 * rng.random::<f64>() - 1.0;
                if u * u + v * v <= 1.0 {
                    break (u, v);
                }
            };
            let old = self.points[i];
            let cand = Point2::new(old.x + radius * u, old.y + radius * v);
            if !self.window.contains(&cand) {
                return;
            }
            if rng.random::<f64>() < self.shift_ratio(i, &cand) {
                self.grid.remove(i, &old);
                self.points[i] = cand;
                self.grid.insert(i, &cand);
            }
        }
    }

    /// `sweeps` sweeps of `max(n, 1)` proposals each, `n` taken at the start
    /// of every sweep.
    pub fn run(&mut self, sweeps: usize, rng: &mut Rng) {
        for _ in 0..sweeps {
            let m = self.points.len().max(1);
            for _ in 0..m {
                self.step(rng);
            }
        }
    }
}

/// Run the birth/death/shift chain from a saturated SSI start state.
///
/// Starting dense lets deaths thin the pattern quickly at low activity; at
/// high activity births into a near-jammed pattern are rare, so a sparse
/// start would never reach the stationary density within the sweep budget.
pub fn simulate_pairwise<I: PairInteraction + ?Sized>(
    w: &Window,
    interaction: &I,
    activity: f64,
    seed: u64,
) -> Realization {
    let mut rng = rng_from_seed(seed);
    let (start, _) = ssi_points(
        w,
        &SsiParams {
            hardcore: interaction.hardcore(),
            target_n: usize::MAX,
            max_attempts: INITIAL_MAX_ATTEMPTS,
        },
        &mut rng,
    );
    let mut chain = GibbsChain::new(interaction, activity, *w, start);
    chain.run(interaction.sweeps(), &mut rng);
    labelled(chain.into_points(), w, seed)
}

pub fn simulate_strauss_hc(w: &Window, p: &StraussHcParams, seed: u64) -> Result<Realization> {
    p.validate()?;
    Ok(simulate_pairwise(w, p, p.activity, seed))
}

pub fn simulate_diggle_gratton(w: &Window, p: &DiggleGrattonParams, seed: u64) -> Result<Realization> {
    p.validate()?;
    Ok(simulate_pairwise(w, p, p.activity, seed))
}

/// A Gibbs model whose activity can be tuned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GibbsModel {
    Strauss(StraussHcParams),
    DiggleGratton(DiggleGrattonParams),
}

impl GibbsModel {
    pub fn activity(&self) -> f64 {
        match self {
            GibbsModel::Strauss(p) => p.activity,
            GibbsModel::DiggleGratton(p) => p.activity,
        }
    }

    pub fn with_activity(mut self, activity: f64) -> Self {
        match &mut self {
            GibbsModel::Strauss(p) => p.activity = activity,
            GibbsModel::DiggleGratton(p) => p.activity = activity,
        }
        self
    }

    pub fn simulate(&self, w: &Window, seed: u64) -> Result<Realization> {
        match self {
            GibbsModel::Strauss(p) => simulate_strauss_hc(w, p, seed),
            GibbsModel::DiggleGratton(p) => simulate_diggle_gratton(w, p, seed),
        }
    }
}

// ---------------------------------------------------------------------------
// Activity calibration

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CalibrationOptions {
    /// Pilot realizations per evaluated activity (at least 20).
    pub pilots: usize,
    pub tol: f64,
    /// Coverage grid pitch.
    pub grid_step: f64,
    /// Radius of the discs whose coverage is matched.
    pub coverage_radius: f64,
    pub initial_bracket: (f64, f64),
    /// The k-th expansion (from 0) multiplies or divides a bracket end by
    /// `10^(2^k)`, so coverage plateaus at extreme activity are reached in
    /// a handful of steps.
    pub max_expansions: usize,
    pub max_iterations: usize,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        Self {
            pilots: 24,
            tol: 0.005,
            grid_step: 0.1,
            coverage_radius: 1.0,
            initial_bracket: (0.01, 10.0),
            max_expansions: 8,
            max_iterations: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub activity: f64,
    pub coverage: f64,
    pub evaluations: usize,
}

/// Mean disc coverage of `inner` over the pilot realizations at `activity`.
/// Pilot seeds are shared across activities (common random numbers).
pub fn pilot_coverage(
    model: &GibbsModel,
    activity: f64,
    outer: &Window,
    inner: &Window,
    opts: &CalibrationOptions,
    seed: u64,
) -> Result<f64> {
    let m = model.with_activity(activity);
    let values: Vec<f64> = (0..opts.pilots)
        .into_par_iter()
        .map(|k| {
            let r = m.simulate(outer, derive_seed(seed, "pilot", k as u64))?;
            estimate_m1(&r.clipped(inner), opts.coverage_radius, opts.grid_step)
        })
        .collect::<Result<_>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Bisection on log-activity until the pilot mean coverage is within `tol`
/// of `target`.
pub fn calibrate_activity(
    model: &GibbsModel,
    outer: &Window,
    inner: &Window,
    target: f64,
    opts: &CalibrationOptions,
    seed: u64,
) -> Result<Calibration> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::InvalidParameter(format!("coverage target {target} not in (0, 1)")));
    }
    if opts.pilots < 20 {
        return Err(Error::InvalidParameter("calibration needs at least 20 pilots".into()));
    }
    let (mut lo, mut hi) = opts.initial_bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidParameter(format!("bad bracket ({lo}, {hi})")));
    }
    let mut evaluations = 0usize;
    let mut eval = |a: f64| -> Result<f64> {
        evaluations += 1;
        pilot_coverage(model, a, outer, inner, opts, seed)
    };

    let mid = (lo * hi).sqrt();
    let c_mid = eval(mid)?;
    if (c_mid - target).abs() <= opts.tol {
        return Ok(Calibration {
            activity: mid,
            coverage: c_mid,
            evaluations: 1,
        });
    }
    let mut expansions = 0;
    if c_mid < target {
        lo = mid;
        loop {
            let c = eval(hi)?;
            if (c - target).abs() <= opts.tol {
                return Ok(Calibration {
                    activity: hi,
                    coverage: c,
                    evaluations,
                });
            }
            if c > target {
                break;
            }
            expansions += 1;
            if expansions > opts.max_expansions {
                return Err(Error::CalibrationFailed(format!(
                    "coverage {c:.4} at activity {hi:.4e} still below target {target}"
                )));
            }
            lo = hi;
            hi *= 10f64.powi(1 << (expansions - 1));
        }
    } else {
        hi = mid;
        loop {
            let c = eval(lo)?;
            if (c - target).abs() <= opts.tol {
                return Ok(Calibration {
                    activity: lo,
                    coverage: c,
                    evaluations,
                });
            }
            if c < target {
                break;
            }
            expansions += 1;
            if expansions > opts.max_expansions {
                return Err(Error::CalibrationFailed(format!(
                    "coverage {c:.4} at activity {lo:.4e} still above target {target}"
                )));
            }
            hi = lo;
            lo /= 10f64.powi(1 << (expansions - 1));
        }
    }
    for _ in 0..opts.max_iterations {
        let a = (lo * hi).sqrt();
        let c = eval(a)?;
        if (c - target).abs() <= opts.tol {
            return Ok(Calibration {
                activity: a,
                coverage: c,
                evaluations,
            });
        }
        if c < target {
            lo = a;
        } else {
            hi = a;
        }
    }
    Err(Error::CalibrationFailed(format!(
        "no activity in [{lo:.4e}, {hi:.4e}] reached coverage {target} within {}",
        opts.tol
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strauss(activity: f64) -> StraussHcParams {
        StraussHcParams {
            activity,
            interaction: 0.5,
            range: 3.0,
            hardcore: 2.0,
            sweeps: 50,
        }
    }

    #[test]
    fn poisson_zero_intensity_is_empty() {
        let w = Window::square(10.0).unwrap();
        assert!(simulate_poisson(&w, 0.0, 1).unwrap().is_empty());
        assert!(simulate_poisson(&w, -1.0, 1).is_err());
    }

    #[test]
    fn poisson_is_deterministic() {
        let w = Window::square(10.0).unwrap();
        let a = simulate_poisson(&w, 0.5, 99).unwrap();
        let b = simulate_poisson(&w, 0.5, 99).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.points, simulate_poisson(&w, 0.5, 100).unwrap().points);
    }

    #[test]
    fn ssi_single_point() {
        let w = Window::square(10.0).unwrap();
        let p = SsiParams {
            hardcore: 2.0,
            target_n: 1,
            max_attempts: 10,
        };
        let out = simulate_ssi(&w, &p, 3).unwrap();
        assert_eq!(out.realization.len(), 1);
        assert!(out.reached_target);
    }

    #[test]
    fn ssi_on_small_square_packs_at_most_five() {
        // Corners plus centre give 5 points 2.12 apart; the best 6-point
        // configuration in a unit square has separation 0.6009, i.e. 1.80 < 2
        // after scaling by 3, so 6 never fit.
        let w = Window::square(3.0).unwrap();
        let p = SsiParams {
            hardcore: 2.0,
            target_n: 10,
            max_attempts: 20_000,
        };
        for seed in 0..50 {
            let out = simulate_ssi(&w, &p, seed).unwrap();
            assert!(out.realization.len() <= 5, "seed {seed}");
            assert!(out.realization.len() >= 2);
            assert!(!out.reached_target);
        }
    }

    #[test]
    fn dg_factor_endpoints() {
        assert_eq!(diggle_gratton_factor(2.0, 2.0, 1.0, 3.0), 0.0);
        assert_eq!(diggle_gratton_factor(3.0, 2.0, 1.0, 3.0), 1.0);
        assert_eq!(diggle_gratton_factor(2.5, 2.0, 1.0, 3.0), 0.125);
        assert_eq!(diggle_gratton_factor(1.99, 2.0, 1.0, 3.0), 0.0);
        let mut prev = 0.0;
        for k in 0..=100 {
            let t = 2.0 + k as f64 * 0.01;
            let h = diggle_gratton_factor(t, 2.0, 1.0, 3.0);
            assert!(h >= prev);
            prev = h;
        }
        // continuity at the outer edge of the band
        assert!((diggle_gratton_factor(3.0 - 1e-9, 2.0, 1.0, 3.0) - 1.0).abs() < 1e-8);
    }

    #[test]
    fn strauss_without_interaction_is_pure_hardcore() {
        let p = StraussHcParams {
            activity: 0.1,
            interaction: 1.0,
            range: 2.0,
            hardcore: 2.0,
            sweeps: 1,
        };
        assert_eq!(p.pair_factor(1.999), 0.0);
        assert_eq!(p.pair_factor(2.0), 1.0);
        assert_eq!(p.pair_factor(2.5), 1.0);
        // birth ratio never penalizes pairs beyond the hard core
        let w = Window::square(10.0).unwrap();
        let pts = vec![Point2::new(5.0, 5.0)];
        let chain = GibbsChain::new(&p, 0.1, w, pts);
        let near = chain.birth_ratio(&Point2::new(7.5, 5.0));
        let far = chain.birth_ratio(&Point2::new(1.0, 1.0));
        assert_eq!(near, far);
    }

    #[test]
    fn detailed_balance_ratios_match_full_density() {
        let w = Window::square(10.0).unwrap();
        let models: Vec<Box<dyn PairInteraction>> = vec![
            Box::new(strauss(0.3)),
            Box::new(DiggleGrattonParams {
                activity: 0.3,
                delta: 2.0,
                rho: 1.0,
                kappa: 3.0,
                sweeps: 1,
            }),
        ];
        let state = vec![
            Point2::new(2.0, 2.0),
            Point2::new(4.6, 2.3),
            Point2::new(3.1, 4.4),
        ];
        let births = [Point2::new(5.0, 4.5), Point2::new(8.0, 8.0), Point2::new(2.4, 6.6)];
        let area = w.area();
        for m in &models {
            let chain = GibbsChain::new(m.as_ref(), 0.3, w, state.clone());
            let f0 = unnormalized_density(m.as_ref(), 0.3, &state);
            for u in &births {
                let mut grown = state.clone();
                grown.push(*u);
                let full = unnormalized_density(m.as_ref(), 0.3, &grown) / f0 * area / 4.0;
                let local = chain.birth_ratio(u);
                assert!((full - local).abs() <= 1e-12 * full.abs().max(1e-300), "{full} vs {local}");
            }
            for i in 0..state.len() {
                let mut shrunk = state.clone();
                shrunk.remove(i);
                let full = unnormalized_density(m.as_ref(), 0.3, &shrunk) / f0 * 3.0 / area;
                let local = chain.death_ratio(i);
                assert!((full - local).abs() <= 1e-12 * full.abs(), "{full} vs {local}");
            }
        }
    }

    #[test]
    fn gibbs_outputs_respect_hardcore() {
        let w = Window::square(20.0).unwrap();
        for seed in 0..10 {
            let r = simulate_strauss_hc(&w, &strauss(0.5), seed).unwrap();
            assert!(r.min_pair_distance().unwrap() >= 2.0);
        }
    }

    #[test]
    fn invalid_params_are_rejected() {
        let mut p = strauss(0.1);
        p.interaction = 0.0;
        assert!(p.validate().is_err());
        p.interaction = 0.5;
        p.range = 1.0;
        assert!(p.validate().is_err());
        let d = DeadLeavesParams {
            disc_radius: 1.0,
            saturation_margin: 1.0,
        };
        assert!(d.validate().is_err());
    }

    #[test]
    fn ssi_target_matches_hand_value() {
        let outer = Window::square(44.0).unwrap();
        let inner = Window::new(2.5, 2.5, 41.5, 41.5).unwrap();
        // 0.39 * 1521 / (1521 pi - 2/3 * 156) * 1936 = 245.7
        assert_eq!(ssi_target_for_coverage(&outer, &inner, 0.39, 1.0), 246);
    }
}
