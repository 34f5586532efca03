//! Planar geometrical graph on a rectangular lattice ("sector grid").
//!
//! Every lattice vertex connects to the lattice offsets `(i, j)` with
//! `max(|i|, |j|) <= sectors` and `gcd(|i|, |j|) = 1`, which gives 8, 16 and
//! 32 outgoing edges for one, two and three sectors. Vertices inside or on
//! an obstacle polygon are removed, as are edges that touch an obstacle.

use crate::geom::{Rect, Vec2};
use serde::{Deserialize, Serialize};
use std::io::Write;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("invalid grid spec: {0}")]
    Spec(String),
    #[error("degenerate polygon: {0}")]
    DegeneratePolygon(String),
    #[error("no vertices left after obstacle filtering")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub bounds: Rect,
    /// Lattice spacing.
    pub cell: f64,
    /// 1, 2 or 3.
    pub sectors: u8,
}

impl GridSpec {
    pub fn validate(&self) -> Result<(), GraphError> {
        if !(self.cell > 0.0) || !self.cell.is_finite() {
            return Err(GraphError::Spec(format!(
                "cell size must be positive, got {}",
                self.cell
            )));
        }
        if self.bounds.is_degenerate() {
            return Err(GraphError::Spec("bounds must have positive width and height".into()));
        }
        if !(1..=3).contains(&self.sectors) {
            return Err(GraphError::Spec(format!(
                "sectors must be 1, 2 or 3, got {}",
                self.sectors
            )));
        }
        Ok(())
    }

    /// Number of lattice columns and rows, boundary points included.
    pub fn lattice_dims(&self) -> (usize, usize) {
        let n = |len: f64| (len / self.cell + 1e-9).floor() as usize + 1;
        (n(self.bounds.width()), n(self.bounds.height()))
    }
}

/// Simple polygon, vertices in either orientation, implicitly closed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub vertices: Vec<Vec2>,
}

impl Polygon {
    pub fn new(vertices: Vec<Vec2>) -> Result<Self, GraphError> {
        let p = Polygon { vertices };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        if self.vertices.len() < 3 {
            return Err(GraphError::DegeneratePolygon(format!(
                "{} vertices",
                self.vertices.len()
            )));
        }
        if self.vertices.iter().any(|v| !v.is_finite()) {
            return Err(GraphError::DegeneratePolygon("non-finite vertex".into()));
        }
        if self.signed_area().abs() <= f64::EPSILON {
            return Err(GraphError::DegeneratePolygon("zero area".into()));
        }
        Ok(())
    }

    pub fn signed_area(&self) -> f64 {
        self.edges().map(|(a, b)| a.cross(b)).sum::<f64>() * 0.5
    }

    pub fn edges(&self) -> impl Iterator<Item = (Vec2, Vec2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn bbox(&self) -> Rect {
        let (mut lo, mut hi) = (self.vertices[0], self.vertices[0]);
        for v in &self.vertices {
            lo = Vec2::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Vec2::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        Rect { min: lo, max: hi }
    }

    /// Point inside the polygon or on its boundary.
    pub fn contains(&self, p: Vec2) -> bool {
        let mut inside = false;
        for (a, b) in self.edges() {
            if on_segment(p, a, b) {
                return true;
            }
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if p.x < x {
                    inside = !inside;
                }
            }
        }
        inside
    }
}

#[inline]
fn orient(a: Vec2, b: Vec2, c: Vec2) -> f64 {
    (b - a).cross(c - a)
}

fn on_segment(p: Vec2, a: Vec2, b: Vec2) -> bool {
    orient(a, b, p) == 0.0 && p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed segments `p1–p2` and `q1–q2` share at least one point.
pub fn segments_touch(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    on_segment(p1, q1, q2) || on_segment(p2, q1, q2) || on_segment(q1, p1, p2) || on_segment(q2, p1, p2)
}

/// Segment `a–b` crosses or touches the polygon's boundary or interior.
/// Touching a polygon vertex counts as an intersection.
pub fn edge_intersects(a: Vec2, b: Vec2, poly: &Polygon) -> Result<bool, GraphError> {
    poly.validate()?;
    Ok(intersects_unchecked(a, b, poly))
}

fn intersects_unchecked(a: Vec2, b: Vec2, poly: &Polygon) -> bool {
    let bb = poly.bbox();
    if a.x.max(b.x) < bb.min.x || a.x.min(b.x) > bb.max.x || a.y.max(b.y) < bb.min.y || a.y.min(b.y) > bb.max.y {
        return false;
    }
    poly.contains(a) || poly.contains(b) || poly.edges().any(|(p, q)| segments_touch(a, b, p, q))
}

/// Any obstacle intersects the segment `a–b`.
pub fn segment_blocked(a: Vec2, b: Vec2, obstacles: &[Polygon]) -> bool {
    obstacles.iter().any(|p| intersects_unchecked(a, b, p))
}

fn gcd(mut a: i32, mut b: i32) -> i32 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.abs()
}

/// Lattice offsets of the sector grid, ordered by direction angle.
pub fn sector_offsets(sectors: u8) -> Vec<(i32, i32)> {
    let s = sectors as i32;
    let mut out: Vec<(i32, i32)> = (-s..=s)
        .flat_map(|i| (-s..=s).map(move |j| (i, j)))
        .filter(|&(i, j)| (i, j) != (0, 0) && gcd(i.abs(), j.abs()) == 1)
        .collect();
    out.sort_by(|a, b| {
        (a.1 as f64)
            .atan2(a.0 as f64)
            .total_cmp(&(b.1 as f64).atan2(b.0 as f64))
    });
    out
}

pub type VertexId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: VertexId,
    pub to: VertexId,
    pub length: f64,
    /// Unit direction `from → to`.
    pub dir: Vec2,
}

/// Immutable sector-grid graph with CSR adjacency.
#[derive(Debug, Clone)]
pub struct GeoGraph {
    spec: GridSpec,
    positions: Vec<Vec2>,
    /// Lattice coordinates per vertex.
    lattice: Vec<(usize, usize)>,
    /// `lattice index → vertex id`; `None` for obstacle points.
    index: Vec<Option<VertexId>>,
    dims: (usize, usize),
    adj_start: Vec<usize>,
    edges: Vec<Edge>,
}

impl GeoGraph {
    /// Build the sector grid over `spec.bounds`, removing obstacle vertices
    /// and obstacle-crossing edges.
    pub fn build(spec: GridSpec, obstacles: &[Polygon]) -> Result<Self, GraphError> {
        spec.validate()?;
        for p in obstacles {
            p.validate()?;
        }
        let (nx, ny) = spec.lattice_dims();
        let at = |i: usize, j: usize| {
            Vec2::new(
                spec.bounds.min.x + i as f64 * spec.cell,
                spec.bounds.min.y + j as f64 * spec.cell,
            )
        };

        let mut positions = Vec::new();
        let mut lattice = Vec::new();
        let mut index = vec![None; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = at(i, j);
                if obstacles.iter().any(|o| o.contains(p)) {
                    continue;
                }
                index[j * nx + i] = Some(positions.len());
                positions.push(p);
                lattice.push((i, j));
            }
        }
        if positions.is_empty() {
            return Err(GraphError::Empty);
        }

        let offsets = sector_offsets(spec.sectors);
        let mut adj_start = Vec::with_capacity(positions.len() + 1);
        let mut edges = Vec::new();
        for (u, &(i, j)) in lattice.iter().enumerate() {
            adj_start.push(edges.len());
            for &(di, dj) in &offsets {
                let (ti, tj) = (i as i64 + di as i64, j as i64 + dj as i64);
                if ti < 0 || tj < 0 || ti >= nx as i64 || tj >= ny as i64 {
                    continue;
                }
                let Some(v) = index[tj as usize * nx + ti as usize] else {
                    continue;
                };
                let (a, b) = (positions[u], positions[v]);
                if segment_blocked(a, b, obstacles) {
                    continue;
                }
                let d = b - a;
                let length = d.norm();
                edges.push(Edge {
                    from: u,
                    to: v,
                    length,
                    dir: d * (1.0 / length),
                });
            }
        }
        adj_start.push(edges.len());

        Ok(GeoGraph {
            spec,
            positions,
            lattice,
            index,
            dims: (nx, ny),
            adj_start,
            edges,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn vertex_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: VertexId) -> Vec2 {
        self.positions[v]
    }

    pub fn positions(&self) -> &[Vec2] {
        &self.positions
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        &self.edges[self.adj_start[v]..self.adj_start[v + 1]]
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.adj_start[v + 1] - self.adj_start[v]
    }

    pub fn lattice_coords(&self, v: VertexId) -> (usize, usize) {
        self.lattice[v]
    }

    /// Vertex at lattice coordinates, if it exists.
    pub fn vertex_at(&self, i: usize, j: usize) -> Option<VertexId> {
        let (nx, ny) = self.dims;
        (i < nx && j < ny).then(|| self.index[j * nx + i]).flatten()
    }

    /// Closest existing vertex to `p` (ties broken by lower id).
    pub fn nearest_vertex(&self, p: Vec2) -> VertexId {
        let mut best = (f64::INFINITY, 0);
        for (k, q) in self.positions.iter().enumerate() {
            let d = q.distance(p);
            if d < best.0 {
                best = (d, k);
            }
        }
        best.1
    }

    /// Find the edge `u → v`.
    pub fn edge_between(&self, u: VertexId, v: VertexId) -> Option<&Edge> {
        self.out_edges(u).iter().find(|e| e.to == v)
    }

    pub fn write_vertices_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "id,x,y")?;
        for (k, p) in self.positions.iter().enumerate() {
            writeln!(w, "{k},{},{}", p.x, p.y)?;
        }
        Ok(())
    }

    pub fn write_edges_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "from,to,length")?;
        for e in &self.edges {
            writeln!(w, "{},{},{}", e.from, e.to, e.length)?;
        }
        Ok(())
    }
}
