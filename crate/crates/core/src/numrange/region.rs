use serde::{Deserialize, Serialize};

use super::hull::AffineHull;
use crate::error::{Error, Result};

/// {x : ⟨normal, x⟩ ≤ offset}
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Explicit convex set in ℝ^s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum ConvexRegion {
    /// Euclidean ball; a complex center is written as [re, im].
    Disc { center: Vec<f64>, radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
    Halfspaces { rows: Vec<Halfspace> },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Counter-clockwise convex hull; collinear and duplicate points are dropped.
pub fn convex_hull_2d(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts: Vec<[f64; 2]> = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let scale = pts.iter().map(|p| p[0].abs().max(p[1].abs())).fold(1.0, f64::max);
    let eps = 1e-14 * scale;
    pts.dedup_by(|a, b| (a[0] - b[0]).abs() <= eps && (a[1] - b[1]).abs() <= eps);
    if pts.len() <= 2 {
        return pts;
    }
    let tol = 1e-13 * scale * scale;
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= tol {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= tol {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Outward halfspaces of the hull of a point set. Degenerate hulls (a segment or a point)
/// are described by opposite pairs, so they have empty interior in the plane.
pub fn hull_halfspaces_2d(hull: &[[f64; 2]]) -> Vec<Halfspace> {
    let row = |n: [f64; 2], p: [f64; 2]| Halfspace { normal: n.to_vec(), offset: n[0] * p[0] + n[1] * p[1] };
    match hull.len() {
        0 => Vec::new(),
        1 => {
            let p = hull[0];
            vec![row([1.0, 0.0], p), row([-1.0, 0.0], p), row([0.0, 1.0], p), row([0.0, -1.0], p)]
        }
        2 => {
            let (p, q) = (hull[0], hull[1]);
            let l = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
            let d = [(q[0] - p[0]) / l, (q[1] - p[1]) / l];
            let n = [-d[1], d[0]];
            vec![row(n, p), row([-n[0], -n[1]], p), row(d, q), row([-d[0], -d[1]], p)]
        }
        k => (0..k)
            .map(|i| {
                let (p, q) = (hull[i], hull[(i + 1) % k]);
                let e = [q[0] - p[0], q[1] - p[1]];
                let l = (e[0] * e[0] + e[1] * e[1]).sqrt();
                row([e[1] / l, -e[0] / l], p)
            })
            .collect(),
    }
}

fn project_segment(x: &[f64], p: [f64; 2], q: [f64; 2]) -> [f64; 2] {
    let e = [q[0] - p[0], q[1] - p[1]];
    let l2 = e[0] * e[0] + e[1] * e[1];
    if l2 == 0.0 {
        return p;
    }
    let t = (((x[0] - p[0]) * e[0] + (x[1] - p[1]) * e[1]) / l2).clamp(0.0, 1.0);
    [p[0] + t * e[0], p[1] + t * e[1]]
}

impl ConvexRegion {
    pub fn disc(center: [f64; 2], radius: f64) -> Self {
        ConvexRegion::Disc { center: center.to_vec(), radius }
    }

    pub fn ambient(&self) -> usize {
        match self {
            ConvexRegion::Disc { center, .. } => center.len(),
            ConvexRegion::Polygon { .. } => 2,
            ConvexRegion::Halfspaces { rows } => rows.first().map_or(0, |r| r.normal.len()),
        }
    }

    /// Structural checks: finite data, nonempty, consistent dimensions.
    pub fn validate(&self) -> Result<()> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            ConvexRegion::Disc { center, radius } => {
                if center.is_empty() || !finite(center) || !radius.is_finite() || *radius < 0.0 {
                    return Err(Error::Input("disc needs a finite center and radius >= 0".into()));
                }
            }
            ConvexRegion::Polygon { vertices } => {
                if vertices.is_empty() || vertices.iter().any(|v| !finite(v)) {
                    return Err(Error::Input("polygon needs finite vertices".into()));
                }
            }
            ConvexRegion::Halfspaces { rows } => {
                let s = self.ambient();
                if rows.is_empty() || s == 0 {
                    return Err(Error::Input("halfspace region needs rows".into()));
                }
                for r in rows {
                    if r.normal.len() != s || !finite(&r.normal) || !r.offset.is_finite() || norm(&r.normal) == 0.0 {
                        return Err(Error::Input("halfspace rows need nonzero finite normals of one length".into()));
                    }
                }
                if s == 2 && self.vertices_2d().is_empty() {
                    return Err(Error::Input("halfspace region is empty or unbounded".into()));
                }
            }
        }
        Ok(())
    }

    /// Halfspace description (polygons through their hull).
    pub fn halfspaces(&self) -> Option<Vec<Halfspace>> {
        match self {
            ConvexRegion::Disc { .. } => None,
            ConvexRegion::Polygon { vertices } => Some(hull_halfspaces_2d(&convex_hull_2d(vertices))),
            ConvexRegion::Halfspaces { rows } => Some(rows.clone()),
        }
    }

    /// Signed distance to the boundary: positive inside, negative outside (exact for
    /// balls; for polytopes the minimum facet slack, exact inside).
    pub fn depth(&self, x: &[f64]) -> f64 {
        match self {
            ConvexRegion::Disc { center, radius } => radius - dist(x, center),
            _ => self
                .halfspaces()
                .unwrap_or_default()
                .iter()
                .map(|h| (h.offset - dot(&h.normal, x)) / norm(&h.normal))
                .fold(f64::INFINITY, f64::min),
        }
    }

    /// dist{x, ℝ^s ∖ R}: zero outside or on the boundary.
    pub fn dist_to_complement(&self, x: &[f64]) -> f64 {
        self.depth(x).max(0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.depth(x) >= -tol || self.dist_to_region(x) <= tol
    }

    pub fn dist_to_region(&self, x: &[f64]) -> f64 {
        dist(x, &self.nearest_point(x))
    }

    /// Vertices of a planar region given by halfspaces or a polygon.
    pub fn vertices_2d(&self) -> Vec<[f64; 2]> {
        match self {
            ConvexRegion::Polygon { vertices } => convex_hull_2d(vertices),
            ConvexRegion::Halfspaces { rows } if self.ambient() == 2 => {
                let mut pts = Vec::new();
                let scale = rows.iter().map(|r| r.offset.abs() / norm(&r.normal)).fold(1.0, f64::max);
                for i in 0..rows.len() {
                    for j in i + 1..rows.len() {
                        let (a, b) = (&rows[i], &rows[j]);
                        let det = a.normal[0] * b.normal[1] - a.normal[1] * b.normal[0];
                        if det.abs() <= 1e-14 * norm(&a.normal) * norm(&b.normal) {
                            continue;
                        }
                        let x = (a.offset * b.normal[1] - b.offset * a.normal[1]) / det;
                        let y = (a.normal[0] * b.offset - b.normal[0] * a.offset) / det;
                        let ok = rows.iter().all(|r| dot(&r.normal, &[x, y]) - r.offset <= 1e-9 * scale * norm(&r.normal));
                        if ok {
                            pts.push([x, y]);
                        }
                    }
                }
                convex_hull_2d(&pts)
            }
            _ => Vec::new(),
        }
    }

    /// max ⟨u, x⟩ over the region.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        match self {
            ConvexRegion::Disc { center, radius } => Ok(dot(u, center) + radius * norm(u)),
            _ if self.ambient() == 2 => {
                let v = self.vertices_2d();
                if v.is_empty() {
                    return Err(Error::Geometry("region has no vertices".into()));
                }
                Ok(v.iter().map(|p| dot(u, p)).fold(f64::NEG_INFINITY, f64::max))
            }
            _ => Err(Error::Input("support function needs a disc or a planar region".into())),
        }
    }

    /// Euclidean projection onto the region.
    pub fn nearest_point(&self, x: &[f64]) -> Vec<f64> {
        match self {
            ConvexRegion::Disc { center, radius } => {
                let d = dist(x, center);
                if d <= *radius {
                    x.to_vec()
                } else {
                    center.iter().zip(x).map(|(c, xi)| c + (xi - c) * radius / d).collect()
                }
            }
            _ if self.ambient() == 2 => {
                let hull = self.vertices_2d();
                match hull.len() {
                    0 => x.to_vec(),
                    1 => hull[0].to_vec(),
                    k => {
                        if k >= 3 && self.depth(x) >= 0.0 {
                            return x.to_vec();
                        }
                        let mut best = hull[0];
                        let mut bd = f64::INFINITY;
                        for i in 0..k {
                            let p = project_segment(x, hull[i], hull[(i + 1) % k]);
                            let d = dist(x, &p);
                            if d < bd {
                                bd = d;
                                best = p;
                            }
                        }
                        best.to_vec()
                    }
                }
            }
            ConvexRegion::Halfspaces { rows } => dykstra(rows, x),
            ConvexRegion::Polygon { .. } => unreachable!("polygons are planar"),
        }
    }

    /// A point of the region's relative interior used to pull boundary targets inward.
    pub fn interior_reference(&self) -> Vec<f64> {
        match self {
            ConvexRegion::Disc { center, .. } => center.clone(),
            ConvexRegion::Halfspaces { rows } if self.ambient() != 2 => dykstra(rows, &vec![0.0; self.ambient()]),
            _ => {
                let v = self.vertices_2d();
                let k = v.len().max(1) as f64;
                vec![v.iter().map(|p| p[0]).sum::<f64>() / k, v.iter().map(|p| p[1]).sum::<f64>() / k]
            }
        }
    }

    /// The region shrunk by `margin`, relative to its own affine hull when degenerate.
    pub fn shrink(&self, margin: f64) -> Result<ConvexRegion> {
        match self {
            ConvexRegion::Disc { center, radius } => {
                if margin > *radius {
                    return Err(Error::Model(format!("margin {margin} exceeds radius {radius}")));
                }
                Ok(ConvexRegion::Disc { center: center.clone(), radius: radius - margin })
            }
            _ if self.ambient() == 2 => {
                let hull = self.vertices_2d();
                match hull.len() {
                    0 => Err(Error::Geometry("empty region".into())),
                    1 => Ok(ConvexRegion::Polygon { vertices: hull }),
                    2 => {
                        let (p, q) = (hull[0], hull[1]);
                        let l = ((q[0] - p[0]).powi(2) + (q[1] - p[1]).powi(2)).sqrt();
                        if 2.0 * margin > l {
                            return Err(Error::Model("margin swallows the segment".into()));
                        }
                        let d = [(q[0] - p[0]) / l * margin, (q[1] - p[1]) / l * margin];
                        Ok(ConvexRegion::Polygon { vertices: vec![[p[0] + d[0], p[1] + d[1]], [q[0] - d[0], q[1] - d[1]]] })
                    }
                    _ => {
                        let rows = hull_halfspaces_2d(&hull)
                            .into_iter()
                            .map(|h| Halfspace { offset: h.offset - margin * norm(&h.normal), normal: h.normal })
                            .collect();
                        let r = ConvexRegion::Halfspaces { rows };
                        if r.vertices_2d().is_empty() {
                            return Err(Error::Model("margin swallows the region".into()));
                        }
                        Ok(r)
                    }
                }
            }
            ConvexRegion::Halfspaces { rows } => Ok(ConvexRegion::Halfspaces {
                rows: rows
                    .iter()
                    .map(|h| Halfspace { offset: h.offset - margin * norm(&h.normal), normal: h.normal.clone() })
                    .collect(),
            }),
            ConvexRegion::Polygon { .. } => unreachable!("polygons are planar"),
        }
    }

    /// Restrict the region to an affine subspace and express it in the subspace's
    /// orthonormal coordinates.
    pub fn reduce(&self, hull: &AffineHull) -> Result<ConvexRegion> {
        if self.ambient() != hull.s() {
            return Err(Error::Geometry(format!("region lives in R^{}, tuple in R^{}", self.ambient(), hull.s())));
        }
        if hull.dim() == 0 {
            return Err(Error::Geometry("affine hull is a single point".into()));
        }
        match self {
            ConvexRegion::Disc { center, radius } => {
                let y = hull.to_reduced(center);
                let back = hull.from_reduced(&y);
                let d2 = dist(center, &back).powi(2);
                let r2 = radius * radius - d2;
                if r2 < -1e-12 * radius.max(1.0) {
                    return Err(Error::Geometry("region misses the affine hull of the tuple".into()));
                }
                Ok(ConvexRegion::Disc { center: y, radius: r2.max(0.0).sqrt() })
            }
            _ => {
                let rows = self.halfspaces().unwrap_or_default();
                let mut out = Vec::new();
                for h in rows {
                    let un = norm(&h.normal);
                    let normal = hull.project_direction(&h.normal);
                    let offset = h.offset - dot(&h.normal, hull.offset());
                    if norm(&normal) <= 1e-12 * un {
                        if offset < -1e-9 * un.max(1.0) {
                            return Err(Error::Geometry("region misses the affine hull of the tuple".into()));
                        }
                        continue;
                    }
                    out.push(Halfspace { normal, offset });
                }
                if out.is_empty() {
                    return Err(Error::Geometry("region is unbounded inside the affine hull".into()));
                }
                if hull.dim() == 1 {
                    // an interval; keep it as a ball so distances stay exact
                    let mut lo = f64::NEG_INFINITY;
                    let mut hi = f64::INFINITY;
                    for h in &out {
                        let b = h.offset / h.normal[0];
                        if h.normal[0] > 0.0 {
                            hi = hi.min(b);
                        } else {
                            lo = lo.max(b);
                        }
                    }
                    if !(lo.is_finite() && hi.is_finite()) || hi < lo {
                        return Err(Error::Geometry("reduced interval is empty or unbounded".into()));
                    }
                    return Ok(ConvexRegion::Disc { center: vec![0.5 * (lo + hi)], radius: 0.5 * (hi - lo) });
                }
                Ok(ConvexRegion::Halfspaces { rows: out })
            }
        }
    }
}

/// Dykstra's alternating projections onto an intersection of halfspaces.
fn dykstra(rows: &[Halfspace], x0: &[f64]) -> Vec<f64> {
    let s = x0.len();
    let mut x = x0.to_vec();
    let mut corr = vec![vec![0.0; s]; rows.len()];
    for _ in 0..20000 {
        let mut change = 0.0f64;
        for (i, h) in rows.iter().enumerate() {
            let y: Vec<f64> = x.iter().zip(&corr[i]).map(|(a, b)| a + b).collect();
            let n2 = dot(&h.normal, &h.normal);
            let viol = dot(&h.normal, &y) - h.offset;
            let p: Vec<f64> = if viol > 0.0 { y.iter().zip(&h.normal).map(|(a, n)| a - viol / n2 * n).collect() } else { y.clone() };
            for k in 0..s {
                corr[i][k] = y[k] - p[k];
                change = change.max((p[k] - x[k]).abs());
            }
            x = p;
        }
        if change <= 1e-15 {
            break;
        }
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> ConvexRegion {
        ConvexRegion::Polygon { vertices: vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]] }
    }

    #[test]
    fn distance_examples() {
        let d = ConvexRegion::disc([0.0, 0.0], 1.0);
        assert_eq!(d.dist_to_complement(&[0.0, 0.0]), 1.0);
        assert!((d.dist_to_complement(&[0.6, 0.0]) - 0.4).abs() < 1e-15);
        assert!((square().dist_to_complement(&[0.5, 0.0]) - 0.5).abs() < 1e-15);
        assert_eq!(square().dist_to_complement(&[2.0, 0.0]), 0.0);
    }

    #[test]
    fn degenerate_polygon_has_no_interior() {
        let seg = ConvexRegion::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0]] };
        assert_eq!(seg.dist_to_complement(&[0.5, 0.0]), 0.0);
        assert!(seg.contains(&[0.5, 0.0], 1e-12));
        let near = seg.nearest_point(&[0.5, 1.0]);
        assert!((near[0] - 0.5).abs() < 1e-15 && near[1].abs() < 1e-15);
    }

    #[test]
    fn nearest_point_of_halfspaces_in_three_dimensions() {
        let rows = (0..3)
            .flat_map(|k| {
                let mut e = vec![0.0; 3];
                e[k] = 1.0;
                let m: Vec<f64> = e.iter().map(|x| -x).collect();
                [Halfspace { normal: e, offset: 1.0 }, Halfspace { normal: m, offset: 1.0 }]
            })
            .collect();
        let cube = ConvexRegion::Halfspaces { rows };
        let p = cube.nearest_point(&[2.0, 0.5, -3.0]);
        assert!((p[0] - 1.0).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12 && (p[2] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn shrink_and_support() {
        let s = square().shrink(0.25).unwrap();
        assert!((s.support(&[1.0, 0.0]).unwrap() - 0.75).abs() < 1e-12);
        let seg = ConvexRegion::Polygon { vertices: vec![[0.0, 0.0], [1.0, 0.0]] }.shrink(0.1).unwrap();
        assert!((seg.support(&[1.0, 0.0]).unwrap() - 0.9).abs() < 1e-12);
        assert!(ConvexRegion::disc([0.0, 0.0], 0.1).shrink(0.2).is_err());
    }

    #[test]
    fn json_shapes() {
        let d: ConvexRegion = serde_json::from_str(r#"{"shape":"disc","center":[0,0],"radius":0.9}"#).unwrap();
        assert_eq!(d, ConvexRegion::disc([0.0, 0.0], 0.9));
        let h: ConvexRegion =
            serde_json::from_str(r#"{"shape":"halfspaces","rows":[{"normal":[1],"offset":1},{"normal":[-1],"offset":0}]}"#).unwrap();
        assert_eq!(h.ambient(), 1);
        assert!((h.dist_to_complement(&[0.25]) - 0.25).abs() < 1e-15);
    }
}
