use crate::error::{Error, Result};
use crate::geometry::{Point2, Window};
use crate::triangulate::Triangulation;

/// Realization-level maxima of per-triangle measurements and the triangle
/// count per unit window area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangulationSummary {
    pub tri_density: f64,
    pub max_side: f64,
    /// Radians.
    pub max_angle: f64,
    pub max_area: f64,
}

/// Longest side, largest interior angle and area of one triangle.
pub fn triangle_measures(a: &Point2, b: &Point2, c: &Point2) -> (f64, f64, f64) {
    let ab = a.dist(b);
    let bc = b.dist(c);
    let ca = c.dist(a);
    let longest = ab.max(bc).max(ca);
    let area = 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y)).abs();
    // angle opposite a side from the law of cosines, clamped for rounding
    let angle = |opp: f64, s1: f64, s2: f64| ((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2)).clamp(-1.0, 1.0).acos();
    let largest = angle(bc, ab, ca).max(angle(ca, ab, bc)).max(angle(ab, bc, ca));
    (longest, largest, area)
}

pub fn triangulation_summary(t: &Triangulation, w: &Window) -> Result<TriangulationSummary> {
    if t.triangles.is_empty() {
        return Err(Error::DegenerateInput("triangulation has no triangles".into()));
    }
    let mut max_side = 0.0f64;
    let mut max_angle = 0.0f64;
    let mut max_area = 0.0f64;
    for tri in &t.triangles {
        let (s, ang, ar) = triangle_measures(&t.vertices[tri[0]], &t.vertices[tri[1]], &t.vertices[tri[2]]);
        max_side = max_side.max(s);
        max_angle = max_angle.max(ang);
        max_area = max_area.max(ar);
    }
    Ok(TriangulationSummary {
        tri_density: t.triangles.len() as f64 / w.area(),
        max_side,
        max_angle,
        max_area,
    })
}
