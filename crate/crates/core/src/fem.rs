//! Finite element operators on a generatrix triangulation.
//!
//! P1 elements carry the state equations: the `r`-weighted stiffness
//! `(grad u, grad v)_r`, the `r`-weighted mass `(u, v)_r` and the boundary
//! weights `beta_z = int_{Gamma_out} phi_z r ds`. All `r`-weighted volume
//! integrals use the 3-edge-midpoint rule (degree-2 exact, so stiffness
//! integrals are exact and the mass is a consistent positive semidefinite
//! quadrature); boundary integrals are integrated exactly per segment.
//!
//! Crouzeix-Raviart elements (vector valued, dofs at edge midpoints) carry
//! the deformation problem: the untransformed mass + broken stiffness, and
//! the weighted divergence coupling `(q, div(r v))` against elementwise
//! constant pressures. Gliding boundary conditions constrain the radial
//! component on axis edges.

use sprs::CsMat;

use crate::linalg::Triplets;
use crate::mesh::{BoundaryMarker, TriMesh};

/// P1 operators and boundary data.
pub struct P1Operators {
    /// `r`-weighted stiffness, symmetric positive semidefinite.
    pub k_r: CsMat<f64>,
    /// `r`-weighted mass (midpoint quadrature), positive definite.
    pub m_r: CsMat<f64>,
    /// Per-vertex boundary weights `beta_z`; nonzero only on OUT vertices.
    pub beta: Vec<f64>,
    /// Sorted ids of vertices on `Gamma_out`.
    pub out_vertices: Vec<usize>,
    /// True for vertices constrained in Dirichlet problems (`u = 0` on
    /// `Gamma_out`; no condition ever arises on the axis).
    pub dirichlet_mask: Vec<bool>,
}

impl P1Operators {
    /// `int_{Gamma_out} r ds` (equals the sum of all beta weights).
    pub fn boundary_r_measure(&self) -> f64 {
        self.beta.iter().sum()
    }
}

/// Element geometry shared by the assemblers.
struct ElementGeom {
    area: f64,
    rbar: f64,
    /// P1 basis gradients.
    grad: [[f64; 2]; 3],
    /// r at the midpoint opposite each local vertex.
    r_mid_opp: [f64; 3],
}

fn element_geom(mesh: &TriMesh, t: usize) -> ElementGeom {
    let [a, b, c] = mesh.triangles[t];
    let p = [mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]];
    let area = 0.5
        * ((p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]));
    debug_assert!(area > 0.0);
    let mut grad = [[0.0; 2]; 3];
    for k in 0..3 {
        let pj = p[(k + 1) % 3];
        let pk = p[(k + 2) % 3];
        grad[k] = [
            (pj[1] - pk[1]) / (2.0 * area),
            (pk[0] - pj[0]) / (2.0 * area),
        ];
    }
    let rbar = (p[0][0] + p[1][0] + p[2][0]) / 3.0;
    // midpoint of the edge opposite local vertex k
    let r_mid_opp = [
        0.5 * (p[1][0] + p[2][0]),
        0.5 * (p[2][0] + p[0][0]),
        0.5 * (p[0][0] + p[1][0]),
    ];
    ElementGeom {
        area,
        rbar,
        grad,
        r_mid_opp,
    }
}

/// Assemble the P1 stiffness, mass and boundary weights.
pub fn assemble_p1(mesh: &TriMesh) -> P1Operators {
    let n = mesh.n_vertices();
    let mut tk = Triplets::new(n, n);
    let mut tm = Triplets::new(n, n);
    for t in 0..mesh.n_triangles() {
        let g = element_geom(mesh, t);
        let tri = mesh.triangles[t];
        for i in 0..3 {
            for j in 0..3 {
                let kij = (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1])
                    * g.area
                    * g.rbar;
                tk.push(tri[i], tri[j], kij);
                // midpoint-rule mass: phi_i phi_j is 1/4 at shared midpoints,
                // each midpoint carrying weight area/3 * r(midpoint)
                let mij = if i == j {
                    g.area / 12.0 * (g.r_mid_opp[(i + 1) % 3] + g.r_mid_opp[(i + 2) % 3])
                } else {
                    let k = 3 - i - j;
                    g.area / 12.0 * g.r_mid_opp[k]
                };
                tm.push(tri[i], tri[j], mij);
            }
        }
    }
    let mut beta = vec![0.0; n];
    for e in &mesh.boundary_edges {
        if e.marker != BoundaryMarker::Out {
            continue;
        }
        let pa = mesh.vertices[e.v[0]];
        let pb = mesh.vertices[e.v[1]];
        let len = ((pb[0] - pa[0]).powi(2) + (pb[1] - pa[1]).powi(2)).sqrt();
        beta[e.v[0]] += len * (2.0 * pa[0] + pb[0]) / 6.0;
        beta[e.v[1]] += len * (pa[0] + 2.0 * pb[0]) / 6.0;
    }
    let dirichlet_mask = mesh.out_vertex_mask();
    let out_vertices: Vec<usize> = (0..n).filter(|&v| dirichlet_mask[v]).collect();
    P1Operators {
        k_r: tk.to_csr(),
        m_r: tm.to_csr(),
        beta,
        out_vertices,
        dirichlet_mask,
    }
}

/// A symmetric system with Dirichlet dofs eliminated.
pub struct Constrained {
    pub mat: CsMat<f64>,
    /// Original index of each retained dof.
    pub free: Vec<usize>,
}

/// Symmetric row/column elimination of the masked dofs.
pub fn apply_dirichlet(mat: &CsMat<f64>, mask: &[bool]) -> Constrained {
    let free: Vec<usize> = (0..mat.rows()).filter(|&v| !mask[v]).collect();
    Constrained {
        mat: crate::linalg::restrict(mat, &free),
        free,
    }
}

impl Constrained {
    pub fn gather(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&v| full[v]).collect()
    }

    pub fn scatter(&self, reduced: &[f64], n_full: usize) -> Vec<f64> {
        let mut full = vec![0.0; n_full];
        for (i, &v) in self.free.iter().enumerate() {
            full[v] = reduced[i];
        }
        full
    }
}

/// Which edges get their radial component constrained to zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GlideVariant {
    /// Gliding on the rotation axis (`v_r = 0` on axis edges); the default.
    #[default]
    AxisRadial,
    /// Literal alternative reading: radial component pinned on `Gamma_out`.
    OutRadial,
}

/// Whether the CR mass/stiffness carry the `r` weight. The divergence
/// coupling is always weighted; the untransformed A gave better results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrWeighting {
    #[default]
    Unweighted,
    Weighted,
}

/// Crouzeix-Raviart operators. Vector dofs are `2 * edge + component`
/// with component 0 = r, 1 = z.
pub struct CrOperators {
    /// Edge id -> vertex pair (min, max).
    pub edges: Vec<[usize; 2]>,
    /// Per-triangle edge ids, entry `k` opposite local vertex `k`.
    pub tri_edges: Vec<[usize; 3]>,
    /// Vector mass + broken stiffness (2E x 2E).
    pub a: CsMat<f64>,
    /// Weighted divergence coupling (T x 2E): row t is `q_t -> int_T div(r v)`.
    pub b_div: CsMat<f64>,
    /// CR dofs constrained to zero by the gliding condition.
    pub glide_mask: Vec<bool>,
}

impl CrOperators {
    pub fn n_dofs(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.n_dofs()).filter(|&d| !self.glide_mask[d]).collect()
    }
}

/// Build the global edge numbering (sorted vertex pairs, lexicographic).
pub fn edge_numbering(mesh: &TriMesh) -> (Vec<[usize; 2]>, Vec<[usize; 3]>) {
    use std::collections::HashMap;
    let mut all: Vec<(usize, usize)> = Vec::with_capacity(3 * mesh.n_triangles());
    for tri in &mesh.triangles {
        for k in 0..3 {
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            all.push((a.min(b), a.max(b)));
        }
    }
    all.sort_unstable();
    all.dedup();
    let mut map: HashMap<(usize, usize), usize> = HashMap::with_capacity(all.len());
    let mut edges: Vec<[usize; 2]> = Vec::with_capacity(all.len());
    for (i, &(a, b)) in all.iter().enumerate() {
        map.insert((a, b), i);
        edges.push([a, b]);
    }
    let mut tri_edges = Vec::with_capacity(mesh.n_triangles());
    for tri in &mesh.triangles {
        let mut te = [0usize; 3];
        for k in 0..3 {
            let a = tri[(k + 1) % 3];
            let b = tri[(k + 2) % 3];
            te[k] = map[&(a.min(b), a.max(b))];
        }
        tri_edges.push(te);
    }
    (edges, tri_edges)
}

pub fn assemble_cr(mesh: &TriMesh) -> CrOperators {
    assemble_cr_with(mesh, CrWeighting::Unweighted, GlideVariant::AxisRadial)
}

pub fn assemble_cr_with(
    mesh: &TriMesh,
    weighting: CrWeighting,
    glide: GlideVariant,
) -> CrOperators {
    let (edges, tri_edges) = edge_numbering(mesh);
    let ne = edges.len();
    let ndof = 2 * ne;
    let mut ta = Triplets::new(ndof, ndof);
    let mut tb = Triplets::new(mesh.n_triangles(), ndof);
    for t in 0..mesh.n_triangles() {
        let g = element_geom(mesh, t);
        let te = tri_edges[t];
        for i in 0..3 {
            // CR basis opposite local vertex i: psi_i = 1 - 2 phi_i
            let gi = [-2.0 * g.grad[i][0], -2.0 * g.grad[i][1]];
            for j in 0..3 {
                let gj = [-2.0 * g.grad[j][0], -2.0 * g.grad[j][1]];
                let stiff_w = match weighting {
                    CrWeighting::Unweighted => 1.0,
                    CrWeighting::Weighted => g.rbar,
                };
                let mut val = (gi[0] * gj[0] + gi[1] * gj[1]) * g.area * stiff_w;
                if i == j {
                    // element CR mass is diagonal: area/3 (midpoint-exact);
                    // the weighted variant picks up r at the dof's midpoint
                    val += match weighting {
                        CrWeighting::Unweighted => g.area / 3.0,
                        CrWeighting::Weighted => g.area / 3.0 * g.r_mid_opp[i],
                    };
                }
                if val != 0.0 {
                    for comp in 0..2 {
                        ta.push(2 * te[i] + comp, 2 * te[j] + comp, val);
                    }
                }
            }
            // divergence rows: int_T div(r psi e_c); the integrand is linear
            // so the midpoint rule is exact
            let b_r = g.area / 3.0 + gi[0] * g.area * g.rbar;
            let b_z = gi[1] * g.area * g.rbar;
            tb.push(t, 2 * te[i], b_r);
            tb.push(t, 2 * te[i] + 1, b_z);
        }
    }
    let mut glide_mask = vec![false; ndof];
    use std::collections::HashMap;
    let mut boundary_marker: HashMap<(usize, usize), BoundaryMarker> = HashMap::new();
    for e in &mesh.boundary_edges {
        boundary_marker.insert((e.v[0].min(e.v[1]), e.v[0].max(e.v[1])), e.marker);
    }
    for (id, e) in edges.iter().enumerate() {
        if let Some(&marker) = boundary_marker.get(&(e[0], e[1])) {
            let constrained = match glide {
                GlideVariant::AxisRadial => marker == BoundaryMarker::Axis,
                GlideVariant::OutRadial => marker == BoundaryMarker::Out,
            };
            if constrained {
                glide_mask[2 * id] = true;
            }
        }
    }
    CrOperators {
        edges,
        tri_edges,
        a: ta.to_csr(),
        b_div: tb.to_csr(),
        glide_mask,
    }
}

/// CR-to-vertex evaluation: the value of a CR field at a vertex is the mean
/// of the element-local linear functions over the adjacent elements (CR
/// fields are discontinuous at vertices; the mean reproduces affine fields
/// exactly). Returns one sparse row over scalar edge dofs per vertex.
pub fn cr_vertex_eval_rows(
    mesh: &TriMesh,
    cr: &CrOperators,
    vertices: &[usize],
) -> Vec<Vec<(usize, f64)>> {
    let v2t = mesh.vertex_triangles();
    let mut rows = Vec::with_capacity(vertices.len());
    for &v in vertices {
        let tris = &v2t[v];
        let w = 1.0 / tris.len() as f64;
        let mut acc: std::collections::BTreeMap<usize, f64> = std::collections::BTreeMap::new();
        for &t in tris {
            let tri = mesh.triangles[t];
            let lv = tri.iter().position(|&x| x == v).unwrap();
            for k in 0..3 {
                // psi_k(x_v) = 1 - 2 delta_{k,lv}
                let val = if k == lv { -1.0 } else { 1.0 };
                *acc.entry(cr.tri_edges[t][k]).or_insert(0.0) += w * val;
            }
        }
        rows.push(acc.into_iter().collect());
    }
    rows
}
