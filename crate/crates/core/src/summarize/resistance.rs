//! Bulk resistance of the triangulation viewed as a resistor network.
//!
//! Each edge conducts with conductance `1 / length`. Vertices within `band`
//! of two opposite window sides form the electrodes; each electrode is
//! collapsed to a single node and the effective resistance between the two
//! nodes is found from the grounded graph Laplacian.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Window};
use crate::triangulate::Triangulation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    /// Electrodes on the left and right sides.
    Horizontal,
    /// Electrodes on the bottom and top sides.
    Vertical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResistanceSummary {
    pub r_horizontal: f64,
    pub r_vertical: f64,
    /// `r_horizontal / r_vertical`.
    pub anisotropy: f64,
}

/// Effective resistance between vertex sets `source` and `sink` of the
/// network with the given edges, conductance `1 / length`.
pub fn resistance_between(
    vertices: &[Point2],
    edges: &[[usize; 2]],
    source: &[usize],
    sink: &[usize],
) -> Result<f64> {
    let n = vertices.len();
    if source.is_empty() || sink.is_empty() {
        return Err(Error::InvalidParameter("empty electrode".into()));
    }
    // node ids: 0 = source, 1 = sink, others renumbered from 2
    let mut node = vec![usize::MAX; n];
    for &s in source {
        node[s] = 0;
    }
    for &s in sink {
        if node[s] == 0 {
            return Err(Error::InvalidParameter("electrodes overlap".into()));
        }
        node[s] = 1;
    }
    let mut next = 2;
    for slot in node.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); next];
    for &[i, j] in edges {
        let (a, b) = (node[i], node[j]);
        if a == b {
            continue;
        }
        let len = vertices[i].dist(&vertices[j]);
        if len <= 0.0 {
            return Err(Error::DegenerateInput("zero-length edge".into()));
        }
        adj[a].push((b, 1.0 / len));
        adj[b].push((a, 1.0 / len));
    }

    // only nodes connected to the source carry current
    let mut seen = vec![false; next];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                queue.push_back(v);
            }
        }
    }
    if !seen[1] {
        return Err(Error::NoConductingPath);
    }

    // ground the sink; unknown potentials on the remaining reachable nodes
    let mut index = vec![usize::MAX; next];
    let mut m = 0;
    for u in 0..next {
        if seen[u] && u != 1 {
            index[u] = m;
            m += 1;
        }
    }
    let mut lap = DMatrix::<f64>::zeros(m, m);
    for u in 0..next {
        if index[u] == usize::MAX {
            continue;
        }
        for &(v, g) in &adj[u] {
            lap[(index[u], index[u])] += g;
            if index[v] != usize::MAX {
                lap[(index[u], index[v])] -= g;
            }
        }
    }
    let mut current = DVector::<f64>::zeros(m);
    current[index[0]] = 1.0;
    let chol = lap
        .cholesky()
        .ok_or_else(|| Error::Singular("grounded Laplacian not positive definite".into()))?;
    let potential = chol.solve(&current);
    Ok(potential[index[0]])
}

fn electrodes(t: &Triangulation, w: &Window, axis: Axis, band: f64) -> (Vec<usize>, Vec<usize>) {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for (i, v) in t.vertices.iter().enumerate() {
        let (coord, min, max) = match axis {
            Axis::Horizontal => (v.x, w.xmin, w.xmax),
            Axis::Vertical => (v.y, w.ymin, w.ymax),
        };
        if coord <= min + band {
            lo.push(i);
        } else if coord >= max - band {
            hi.push(i);
        }
    }
    (lo, hi)
}

/// Effective resistance across `w` along `axis`, electrodes being the
/// vertices within `band` of the two opposite sides.
pub fn effective_resistance(t: &Triangulation, w: &Window, axis: Axis, band: f64) -> Result<f64> {
    if !(band > 0.0) {
        return Err(Error::InvalidParameter(format!("electrode band {band}")));
    }
    let span = match axis {
        Axis::Horizontal => w.width(),
        Axis::Vertical => w.height(),
    };
    if 2.0 * band >= span {
        return Err(Error::InvalidParameter("electrode bands overlap".into()));
    }
    let (lo, hi) = electrodes(t, w, axis, band);
    resistance_between(&t.vertices, &t.edges, &lo, &hi)
}

pub fn resistance_summary(t: &Triangulation, w: &Window, band: f64) -> Result<ResistanceSummary> {
    let r_horizontal = effective_resistance(t, w, Axis::Horizontal, band)?;
    let r_vertical = effective_resistance(t, w, Axis::Vertical, band)?;
    Ok(ResistanceSummary {
        r_horizontal,
        r_vertical,
        anisotropy: r_horizontal / r_vertical,
    })
}
