//! Conforming triangulations of convex generatrix domains.
//!
//! The reference domain is the half-disk `{r^2 + z^2 <= 1, r >= 0}`,
//! triangulated by concentric rings with `4k` arcs on ring `k` (so the
//! spacing is uniform) and built exactly mirror symmetric in `z`. General
//! convex generatrix domains are meshed by deforming the reference mesh: the
//! rim vertices are distributed along the target boundary polyline (corners
//! pinned to rim vertices, long segments subdivided), interior vertices
//! follow a radial map from an anchor on the axis, and a fixed number of
//! Laplacian smoothing passes improves element quality.
//!
//! [`MesherTemplate`] freezes the combinatorial choices (ring count and
//! per-segment subdivision) so that re-meshing a slightly perturbed boundary
//! is a smooth function of the node coordinates; the shape-gradient
//! difference quotients rely on this.

use std::fmt::Write as _;

use thiserror::Error;

use crate::geometry::{GeneratrixBoundary, GeometryError};

/// Sectors per ring of the reference half-disk (arc spacing ~ radial spacing).
const SECTORS: usize = 4;

#[derive(Debug, Error)]
pub enum MeshError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("shape regularity {c_usr:.2} exceeds cap {cap:.2}; reduce h or relax the cap")]
    RegularityExceeded { c_usr: f64, cap: f64 },
    #[error("mesh is invalid: {0}")]
    Invalid(String),
    #[error("incompatible input: {0}")]
    Incompatible(String),
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMarker {
    Out,
    Axis,
}

#[derive(Debug, Clone)]
pub struct BoundaryEdge {
    pub v: [usize; 2],
    pub marker: BoundaryMarker,
}

/// Conforming triangulation of a generatrix domain.
#[derive(Debug, Clone)]
pub struct TriMesh {
    pub vertices: Vec<[f64; 2]>,
    /// Positively oriented vertex index triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary_edges: Vec<BoundaryEdge>,
    /// Max element diameter.
    pub h: f64,
    /// Max shape-regularity ratio `h_T / rho_T`.
    pub c_usr: f64,
    /// Mesh vertex ids of the generatrix boundary nodes, in boundary order
    /// (for the reference half-disk: all rim vertices).
    pub boundary_node_vertices: Vec<usize>,
}

/// Parameters of the mesh generator.
#[derive(Debug, Clone)]
pub struct MeshParams {
    pub smoothing_passes: usize,
    pub c_usr_cap: f64,
    /// Convexity residuals tolerated by the generator. Loose on purpose: the
    /// shape-gradient difference quotients must be able to mesh slightly
    /// infeasible perturbed boundaries; strict feasibility is the
    /// optimizer's job.
    pub convexity_slack: f64,
}

impl Default for MeshParams {
    fn default() -> Self {
        Self {
            smoothing_passes: 20,
            c_usr_cap: 10.0,
            convexity_slack: 1e-3,
        }
    }
}

impl TriMesh {
    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t];
        let p = &self.vertices;
        0.5 * ((p[b][0] - p[a][0]) * (p[c][1] - p[a][1])
            - (p[b][1] - p[a][1]) * (p[c][0] - p[a][0]))
    }

    /// Sum of plain triangle areas.
    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    /// Sum of exact element integrals of `r` (centroid rule is exact).
    pub fn weighted_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangles[t];
                let p = &self.vertices;
                let rbar = (p[a][0] + p[b][0] + p[c][0]) / 3.0;
                self.triangle_area(t) * rbar
            })
            .sum()
    }

    /// Vertex ids flagged as lying on `Gamma_out`.
    pub fn out_vertex_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for e in &self.boundary_edges {
            if e.marker == BoundaryMarker::Out {
                mask[e.v[0]] = true;
                mask[e.v[1]] = true;
            }
        }
        mask
    }

    /// Vertex -> adjacent triangle ids.
    pub fn vertex_triangles(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                adj[v].push(t);
            }
        }
        adj
    }

    /// Structural validation: positive orientation, conformity, marked
    /// boundary matching the topological boundary, axis edges at r = 0.
    pub fn validate(&self) -> Result<(), MeshError> {
        use std::collections::HashMap;
        for t in 0..self.triangles.len() {
            if self.triangle_area(t) <= 0.0 {
                return Err(MeshError::Invalid(format!(
                    "triangle {t} has non-positive area {}",
                    self.triangle_area(t)
                )));
            }
        }
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let a = tri[k];
                let b = tri[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        if edge_count.values().any(|&c| c > 2) {
            return Err(MeshError::Invalid("non-manifold edge".into()));
        }
        let boundary_topo: usize = edge_count.values().filter(|&&c| c == 1).count();
        if boundary_topo != self.boundary_edges.len() {
            return Err(MeshError::Invalid(format!(
                "{} topological boundary edges but {} marked",
                boundary_topo,
                self.boundary_edges.len()
            )));
        }
        for e in &self.boundary_edges {
            let key = (e.v[0].min(e.v[1]), e.v[0].max(e.v[1]));
            if edge_count.get(&key) != Some(&1) {
                return Err(MeshError::Invalid("marked edge is not on the boundary".into()));
            }
            if e.marker == BoundaryMarker::Axis {
                for &v in &e.v {
                    if self.vertices[v][0] != 0.0 {
                        return Err(MeshError::Invalid(format!(
                            "axis vertex {v} has r = {} != 0",
                            self.vertices[v][0]
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Max diameter and max `h_T / rho_T` over all elements.
pub fn check_regularity(mesh: &TriMesh) -> (f64, f64) {
    let mut h = 0.0f64;
    let mut c = 0.0f64;
    for tri in &mesh.triangles {
        let p: Vec<[f64; 2]> = tri.iter().map(|&v| mesh.vertices[v]).collect();
        let e = [
            dist(p[0], p[1]),
            dist(p[1], p[2]),
            dist(p[2], p[0]),
        ];
        let ht = e[0].max(e[1]).max(e[2]);
        let s = 0.5 * (e[0] + e[1] + e[2]);
        let area = 0.5
            * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1])
                - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]))
                .abs();
        let rho = area / s;
        h = h.max(ht);
        c = c.max(ht / rho);
    }
    (h, c)
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Number of rings needed so the reference half-disk has max diameter <= h.
fn ring_count_for(h: f64) -> usize {
    let mut k = ((1.0 / h).ceil() as usize).max(2);
    for _ in 0..8 {
        let mesh = build_reference(k);
        let (hmax, _) = check_regularity(&mesh);
        if hmax <= h {
            return k;
        }
        let grown = (k as f64 * hmax / h).ceil() as usize;
        k = grown.max(k + 1);
    }
    k
}

/// Ring-structured triangulation of the unit half-disk, exactly mirror
/// symmetric in z, with max element diameter at most `h`.
pub fn reference_half_disk(h: f64) -> TriMesh {
    assert!(h > 0.0 && h <= 1.0, "mesh size must be in (0, 1]");
    build_reference(ring_count_for(h))
}

fn ring_offset(k: usize) -> usize {
    // center + rings 1..k-1, ring j has SECTORS*j + 1 vertices
    if k == 0 {
        0
    } else {
        1 + (1..k).map(|j| SECTORS * j + 1).sum::<usize>()
    }
}

fn build_reference(rings: usize) -> TriMesh {
    let k_max = rings;
    let mut vertices: Vec<[f64; 2]> = vec![[0.0, 0.0]];
    for k in 1..=k_max {
        let rho = k as f64 / k_max as f64;
        let n = SECTORS * k;
        let mut ring = vec![[0.0; 2]; n + 1];
        ring[0] = [0.0, -rho];
        ring[n] = [0.0, rho];
        for j in (n + 1) / 2..n {
            // upper half (angle from the bottom pole, phi in (pi/2, pi))
            let phi = std::f64::consts::PI * j as f64 / n as f64;
            ring[j] = [rho * phi.sin(), -rho * phi.cos()];
            ring[n - j] = [ring[j][0], -ring[j][1]];
        }
        if n % 2 == 0 {
            ring[n / 2] = [rho, 0.0];
        }
        vertices.extend_from_slice(&ring);
    }

    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for k in 1..=k_max {
        let outer = ring_offset(k);
        let inner = ring_offset(k - 1);
        for s in 0..SECTORS {
            // sector-local indices: outer ring has k intervals, inner k-1
            let a = |j: usize| outer + s * k + j;
            let b = |j: usize| {
                if k == 1 {
                    inner // center vertex
                } else {
                    inner + s * (k - 1) + j
                }
            };
            for j in 0..k {
                triangles.push([a(j), a(j + 1), b(j)]);
            }
            if k >= 2 {
                for j in 0..k - 1 {
                    triangles.push([b(j), a(j + 1), b(j + 1)]);
                }
            }
        }
    }
    // enforce positive orientation
    let area2 = |t: &[usize; 3]| {
        let p = &vertices;
        (p[t[1]][0] - p[t[0]][0]) * (p[t[2]][1] - p[t[0]][1])
            - (p[t[1]][1] - p[t[0]][1]) * (p[t[2]][0] - p[t[0]][0])
    };
    for t in triangles.iter_mut() {
        if area2(t) < 0.0 {
            t.swap(1, 2);
        }
    }

    let mut boundary_edges = Vec::new();
    let rim = ring_offset(k_max);
    let n_rim = SECTORS * k_max;
    for j in 0..n_rim {
        boundary_edges.push(BoundaryEdge {
            v: [rim + j, rim + j + 1],
            marker: BoundaryMarker::Out,
        });
    }
    for k in 1..=k_max {
        let outer = ring_offset(k);
        let inner = ring_offset(k - 1);
        let n_out = SECTORS * k;
        let inner_last = if k == 1 { inner } else { inner + SECTORS * (k - 1) };
        boundary_edges.push(BoundaryEdge {
            v: [outer, inner],
            marker: BoundaryMarker::Axis,
        });
        boundary_edges.push(BoundaryEdge {
            v: [outer + n_out, inner_last],
            marker: BoundaryMarker::Axis,
        });
    }

    let boundary_node_vertices: Vec<usize> = (0..=n_rim).map(|j| rim + j).collect();
    let mut mesh = TriMesh {
        vertices,
        triangles,
        boundary_edges,
        h: 0.0,
        c_usr: 0.0,
        boundary_node_vertices,
    };
    let (h, c) = check_regularity(&mesh);
    mesh.h = h;
    mesh.c_usr = c;
    mesh
}

/// Frozen combinatorics of the boundary-fitted mesh generator: ring count of
/// the reference mesh and the number of rim intervals assigned to each
/// boundary segment. Re-meshing with a fixed template is a smooth function
/// of the boundary node coordinates.
#[derive(Debug, Clone)]
pub struct MesherTemplate {
    rings: usize,
    /// Rim intervals per boundary segment (len = N-1, each >= 1).
    pub intervals: Vec<usize>,
    pub params: MeshParams,
}

impl MesherTemplate {
    /// Choose combinatorics for the given boundary at mesh size `h`.
    pub fn fit(boundary: &GeneratrixBoundary, h: f64, params: &MeshParams) -> Result<Self, MeshError> {
        let seg = boundary.segment_lengths();
        let n_seg = seg.len();
        let total: f64 = seg.iter().sum();
        // lower bound per segment: subdivide segments longer than h
        let min_q: Vec<usize> = seg.iter().map(|&l| ((l / h).ceil() as usize).max(1)).collect();
        let min_total: usize = min_q.iter().sum();
        let mut rings = ring_count_for(h);
        while SECTORS * rings < min_total.max(n_seg) {
            rings += 1;
        }
        let m = SECTORS * rings;
        // proportional allocation above the lower bounds (largest remainder)
        let mut q = min_q.clone();
        let extra = m - min_total;
        if extra > 0 {
            let weights: Vec<f64> = seg.iter().map(|&l| l / total * extra as f64).collect();
            let mut assigned: usize = 0;
            let mut fracs: Vec<(f64, usize)> = Vec::with_capacity(n_seg);
            for i in 0..n_seg {
                let add = weights[i].floor() as usize;
                q[i] += add;
                assigned += add;
                fracs.push((-(weights[i] - weights[i].floor()), i));
            }
            fracs.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for &(_, i) in fracs.iter().take(extra - assigned) {
                q[i] += 1;
            }
        }
        debug_assert_eq!(q.iter().sum::<usize>(), m);
        Ok(Self {
            rings,
            intervals: q,
            params: params.clone(),
        })
    }

    /// Generate the mesh for `boundary` with the frozen combinatorics.
    pub fn remesh(&self, boundary: &GeneratrixBoundary) -> Result<TriMesh, MeshError> {
        if boundary.len() != self.intervals.len() + 1 {
            return Err(MeshError::Incompatible(format!(
                "template has {} segments, boundary has {}",
                self.intervals.len(),
                boundary.len() - 1
            )));
        }
        let residuals = boundary.convexity_residuals();
        let worst = residuals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if worst > self.params.convexity_slack {
            return Err(GeometryError::Infeasible { max_residual: worst }.into());
        }
        if boundary.is_self_intersecting() {
            return Err(GeometryError::SelfIntersecting.into());
        }

        // refined rim polyline: boundary corners plus uniform subdivision
        let nodes = boundary.nodes();
        let m = SECTORS * self.rings;
        let mut rim_pts: Vec<[f64; 2]> = Vec::with_capacity(m + 1);
        let mut corner_rim_index = Vec::with_capacity(nodes.len());
        for (i, q) in self.intervals.iter().enumerate() {
            corner_rim_index.push(rim_pts.len());
            let a = nodes[i];
            let b = nodes[i + 1];
            for t in 0..*q {
                let f = t as f64 / *q as f64;
                rim_pts.push([a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]);
            }
        }
        corner_rim_index.push(rim_pts.len());
        rim_pts.push(*nodes.last().unwrap());
        debug_assert_eq!(rim_pts.len(), m + 1);
        // keep axis endpoints exact
        rim_pts[0][0] = 0.0;
        rim_pts[m][0] = 0.0;

        // axis anchor: area centroid z, clamped into the axis chord
        let z_anchor = {
            let (mut a2, mut sz) = (0.0, 0.0);
            let n = nodes.len();
            for i in 0..n {
                let p = nodes[i];
                let q = nodes[(i + 1) % n];
                let cross = p[0] * q[1] - q[0] * p[1];
                a2 += cross;
                sz += (p[1] + q[1]) * cross;
            }
            let zc = sz / (3.0 * a2);
            let (zlo, zhi) = (
                nodes[0][1].min(nodes[nodes.len() - 1][1]),
                nodes[0][1].max(nodes[nodes.len() - 1][1]),
            );
            let margin = 0.05 * (zhi - zlo);
            zc.clamp(zlo + margin, zhi - margin)
        };

        // evaluate the rim at fractional parameter t in [0,1]
        let rim_at = |t: f64| -> [f64; 2] {
            let s = (t * m as f64).clamp(0.0, m as f64);
            let i = (s.floor() as usize).min(m - 1);
            let f = s - i as f64;
            let a = rim_pts[i];
            let b = rim_pts[i + 1];
            [a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])]
        };

        let reference = build_reference(self.rings);
        let mut vertices: Vec<[f64; 2]> = Vec::with_capacity(reference.vertices.len());
        vertices.push([0.0, z_anchor]);
        for k in 1..=self.rings {
            let scale = k as f64 / self.rings as f64;
            let n = SECTORS * k;
            for j in 0..=n {
                if k == self.rings {
                    // outermost ring: the rim polyline itself
                    vertices.push(rim_pts[j]);
                    continue;
                }
                let p = rim_at(j as f64 / n as f64);
                let v = [scale * p[0], z_anchor + scale * (p[1] - z_anchor)];
                vertices.push(if j == 0 || j == n { [0.0, v[1]] } else { v });
            }
        }

        let mut mesh = TriMesh {
            vertices,
            triangles: reference.triangles,
            boundary_edges: reference.boundary_edges,
            h: 0.0,
            c_usr: 0.0,
            boundary_node_vertices: corner_rim_index
                .iter()
                .map(|&j| ring_offset(self.rings) + j)
                .collect(),
        };
        smooth_interior(&mut mesh, self.params.smoothing_passes);
        let (h, c) = check_regularity(&mesh);
        mesh.h = h;
        mesh.c_usr = c;
        mesh.validate()?;
        if c > self.params.c_usr_cap {
            return Err(MeshError::RegularityExceeded {
                c_usr: c,
                cap: self.params.c_usr_cap,
            });
        }
        Ok(mesh)
    }
}

/// Jacobi-style Laplacian smoothing of interior vertices; boundary pinned.
fn smooth_interior(mesh: &mut TriMesh, passes: usize) {
    use std::collections::HashSet;
    let n = mesh.vertices.len();
    let mut boundary = vec![false; n];
    for e in &mesh.boundary_edges {
        boundary[e.v[0]] = true;
        boundary[e.v[1]] = true;
    }
    let mut neigh: Vec<HashSet<usize>> = vec![HashSet::new(); n];
    for tri in &mesh.triangles {
        for k in 0..3 {
            let a = tri[k];
            let b = tri[(k + 1) % 3];
            neigh[a].insert(b);
            neigh[b].insert(a);
        }
    }
    let mut sorted_neigh: Vec<Vec<usize>> = neigh
        .into_iter()
        .map(|s| {
            let mut v: Vec<usize> = s.into_iter().collect();
            v.sort_unstable();
            v
        })
        .collect();
    for v in 0..n {
        if boundary[v] {
            sorted_neigh[v].clear();
        }
    }
    for _ in 0..passes {
        let old = mesh.vertices.clone();
        for v in 0..n {
            if boundary[v] || sorted_neigh[v].is_empty() {
                continue;
            }
            let mut acc = [0.0, 0.0];
            for &w in &sorted_neigh[v] {
                acc[0] += old[w][0];
                acc[1] += old[w][1];
            }
            let d = sorted_neigh[v].len() as f64;
            mesh.vertices[v] = [acc[0] / d, acc[1] / d];
        }
    }
}

/// Triangulate the polygon bounded by `boundary` and the axis segment.
pub fn mesh_from_boundary(boundary: &GeneratrixBoundary, h: f64) -> Result<TriMesh, MeshError> {
    mesh_from_boundary_with(boundary, h, &MeshParams::default())
}

pub fn mesh_from_boundary_with(
    boundary: &GeneratrixBoundary,
    h: f64,
    params: &MeshParams,
) -> Result<TriMesh, MeshError> {
    MesherTemplate::fit(boundary, h, params)?.remesh(boundary)
}

/// Plain-text mesh format: `NV NT NE`, vertex lines `r z`, triangle lines
/// `i j k` (0-based), edge lines `i j marker`. Coordinates use the shortest
/// round-trip decimal form, so write/read/write is bit-exact.
pub fn write_mesh(mesh: &TriMesh) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} {} {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        mesh.boundary_edges.len()
    );
    for v in &mesh.vertices {
        let _ = writeln!(s, "{} {}", v[0], v[1]);
    }
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    for e in &mesh.boundary_edges {
        let marker = match e.marker {
            BoundaryMarker::Out => "OUT",
            BoundaryMarker::Axis => "AXIS",
        };
        let _ = writeln!(s, "{} {} {}", e.v[0], e.v[1], marker);
    }
    s
}

pub fn read_mesh(text: &str) -> Result<TriMesh, MeshError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| MeshError::Io("empty file".into()))?;
    let counts: Vec<usize> = header
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| MeshError::Io(e.to_string())))
        .collect::<Result<_, _>>()?;
    if counts.len() != 3 {
        return Err(MeshError::Io("header must be `NV NT NE`".into()));
    }
    let (nv, nt, ne) = (counts[0], counts[1], counts[2]);
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = lines.next().ok_or_else(|| MeshError::Io("truncated vertices".into()))?;
        let v: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| MeshError::Io(e.to_string())))
            .collect::<Result<_, _>>()?;
        if v.len() != 2 {
            return Err(MeshError::Io("vertex line must be `r z`".into()));
        }
        vertices.push([v[0], v[1]]);
    }
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let l = lines.next().ok_or_else(|| MeshError::Io("truncated triangles".into()))?;
        let v: Vec<usize> = l
            .split_whitespace()
            .map(|t| t.parse::<usize>().map_err(|e| MeshError::Io(e.to_string())))
            .collect::<Result<_, _>>()?;
        if v.len() != 3 {
            return Err(MeshError::Io("triangle line must be `i j k`".into()));
        }
        triangles.push([v[0], v[1], v[2]]);
    }
    let mut boundary_edges = Vec::with_capacity(ne);
    for _ in 0..ne {
        let l = lines.next().ok_or_else(|| MeshError::Io("truncated edges".into()))?;
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(MeshError::Io("edge line must be `i j marker`".into()));
        }
        let marker = match toks[2] {
            "OUT" => BoundaryMarker::Out,
            "AXIS" => BoundaryMarker::Axis,
            other => return Err(MeshError::Io(format!("unknown marker {other}"))),
        };
        boundary_edges.push(BoundaryEdge {
            v: [
                toks[0].parse().map_err(|e: std::num::ParseIntError| MeshError::Io(e.to_string()))?,
                toks[1].parse().map_err(|e: std::num::ParseIntError| MeshError::Io(e.to_string()))?,
            ],
            marker,
        });
    }
    let mut mesh = TriMesh {
        vertices,
        triangles,
        boundary_edges,
        h: 0.0,
        c_usr: 0.0,
        boundary_node_vertices: Vec::new(),
    };
    let (h, c) = check_regularity(&mesh);
    mesh.h = h;
    mesh.c_usr = c;
    mesh.boundary_node_vertices = out_rim_path(&mesh)?;
    mesh.validate()?;
    Ok(mesh)
}

/// OUT vertices ordered along the rim from the lower to the upper axis
/// endpoint.
pub fn out_rim_path(mesh: &TriMesh) -> Result<Vec<usize>, MeshError> {
    use std::collections::HashMap;
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for e in &mesh.boundary_edges {
        if e.marker == BoundaryMarker::Out {
            adj.entry(e.v[0]).or_default().push(e.v[1]);
            adj.entry(e.v[1]).or_default().push(e.v[0]);
        }
    }
    if adj.is_empty() {
        return Err(MeshError::Invalid("no OUT edges".into()));
    }
    let mut ends: Vec<usize> = adj
        .iter()
        .filter(|(_, n)| n.len() == 1)
        .map(|(&v, _)| v)
        .collect();
    if ends.len() != 2 {
        return Err(MeshError::Invalid("OUT boundary is not a simple path".into()));
    }
    ends.sort_by(|&a, &b| {
        mesh.vertices[a][1]
            .partial_cmp(&mesh.vertices[b][1])
            .unwrap()
    });
    let mut path = vec![ends[0]];
    let mut prev = usize::MAX;
    let mut cur = ends[0];
    while cur != ends[1] {
        let next = *adj[&cur]
            .iter()
            .find(|&&v| v != prev)
            .ok_or_else(|| MeshError::Invalid("broken OUT path".into()))?;
        prev = cur;
        cur = next;
        path.push(cur);
    }
    Ok(path)
}
