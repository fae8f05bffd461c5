//! Generatrix boundary: the convex polyline describing one half of the cross
//! section of a body of revolution.
//!
//! Nodes are ordered counter-clockwise along the free boundary from the lower
//! axis endpoint `(0, z_min)` to the upper axis endpoint `(0, z_max)`; the
//! segment on the rotation axis closing the polygon is implicit. Convexity of
//! the generatrix polygon and of the rotated 3D body is encoded by the
//! residuals `C_i <= 0`: cross products of adjacent edges at interior nodes,
//! and the axis rows
//!
//! ```text
//! C_1 = -2 r_2 (z_2 - z_1),      C_N = 2 r_{N-1} (z_{N-1} - z_N),
//! ```
//!
//! which force the interior angles at the axis endpoints to be at most pi/2
//! (a pole the boundary dips below/above would make the rotated body
//! non-convex there).

use sprs::CsMat;
use thiserror::Error;

use crate::linalg::Triplets;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid boundary: {0}")]
    Validation(String),
    #[error("boundary is self-intersecting")]
    SelfIntersecting,
    #[error("boundary violates convexity: max residual {max_residual:.3e}")]
    Infeasible { max_residual: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

/// Residuals are accepted up to this slack so exactly collinear
/// configurations arising during line search count as feasible.
pub const CONVEXITY_TOL: f64 = 1e-12;

/// Ordered polyline of the half cross-section boundary with axis endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratrixBoundary {
    nodes: Vec<[f64; 2]>,
}

/// Convexity residuals, their Jacobian and a feasibility flag.
pub struct ConvexityReport {
    pub residuals: Vec<f64>,
    /// N x 2N, column `2i` is d/dr_i and column `2i+1` is d/dz_i.
    pub jacobian: CsMat<f64>,
    pub feasible: bool,
}

impl GeneratrixBoundary {
    /// Validates node count, axis endpoints, positivity of interior radii and
    /// non-degeneracy. Convexity and injectivity are separate checks.
    pub fn new(nodes: Vec<[f64; 2]>) -> Result<Self, GeometryError> {
        let n = nodes.len();
        if n < 3 {
            return Err(GeometryError::Validation(format!(
                "need at least 3 nodes, got {n}"
            )));
        }
        for (i, p) in nodes.iter().enumerate() {
            if !p[0].is_finite() || !p[1].is_finite() {
                return Err(GeometryError::Validation(format!(
                    "node {i} is not finite"
                )));
            }
        }
        if nodes[0][0] != 0.0 || nodes[n - 1][0] != 0.0 {
            return Err(GeometryError::Validation(
                "first and last node must lie on the axis (r = 0)".into(),
            ));
        }
        if nodes[0][1] == nodes[n - 1][1] {
            return Err(GeometryError::Validation(
                "axis endpoints coincide in z".into(),
            ));
        }
        for (i, p) in nodes.iter().enumerate().take(n - 1).skip(1) {
            if p[0] <= 0.0 {
                return Err(GeometryError::Validation(format!(
                    "interior node {i} has r = {} <= 0",
                    p[0]
                )));
            }
        }
        for i in 0..n - 1 {
            if nodes[i] == nodes[i + 1] {
                return Err(GeometryError::Validation(format!(
                    "duplicate consecutive nodes at {i}"
                )));
            }
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Half-disk generatrix of the unit ball, nodes spaced about `spacing`
    /// along the arc. The node set is exactly mirror symmetric in z.
    pub fn half_disk(spacing: f64) -> Self {
        assert!(spacing > 0.0);
        let n = ((std::f64::consts::PI / spacing).ceil() as usize).max(4);
        let mut nodes = vec![[0.0, 0.0]; n + 1];
        nodes[0] = [0.0, -1.0];
        nodes[n] = [0.0, 1.0];
        for j in 1..=n / 2 {
            let phi = std::f64::consts::PI * j as f64 / n as f64;
            let p = [phi.sin(), -phi.cos()];
            nodes[j] = p;
            nodes[n - j] = [p[0], -p[1]];
        }
        if n % 2 == 0 {
            nodes[n / 2] = [1.0, 0.0];
        }
        Self { nodes }
    }

    /// Half-ellipsoid generatrix with z-semi-axis `a` and r-semi-axis chosen
    /// so the rotated body has volume `mass` (the continuum value; the
    /// inscribed polygon is slightly smaller). Nodes are spaced about
    /// `spacing` in arclength.
    pub fn half_ellipsoid(a: f64, mass: f64, spacing: f64) -> Self {
        assert!(a > 0.0 && mass > 0.0 && spacing > 0.0);
        // 2*pi*|w|_r = 2*pi*(2/3) a b^2 = mass
        let b = (3.0 * mass / (4.0 * std::f64::consts::PI * a)).sqrt();
        // arclength table over t in [0, pi], point (b sin t, -a cos t)
        let fine = 4096;
        let mut cum = Vec::with_capacity(fine + 1);
        cum.push(0.0);
        let pt = |t: f64| [b * t.sin(), -a * t.cos()];
        let mut prev = pt(0.0);
        let mut total = 0.0;
        for k in 1..=fine {
            let t = std::f64::consts::PI * k as f64 / fine as f64;
            let p = pt(t);
            total += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
            cum.push(total);
            prev = p;
        }
        let n = ((total / spacing).ceil() as usize).max(4);
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push([0.0, -a]);
        let mut k = 0usize;
        for j in 1..n {
            let target = total * j as f64 / n as f64;
            while cum[k + 1] < target {
                k += 1;
            }
            let frac = (target - cum[k]) / (cum[k + 1] - cum[k]);
            let t = std::f64::consts::PI * (k as f64 + frac) / fine as f64;
            nodes.push(pt(t));
        }
        nodes.push([0.0, a]);
        Self { nodes }
    }

    /// Convexity residuals `C_1..C_N`; all `<= 0` (up to [`CONVEXITY_TOL`])
    /// iff the generatrix polygon and the rotated body are convex.
    pub fn convexity_residuals(&self) -> Vec<f64> {
        let x = &self.nodes;
        let n = x.len();
        let mut c = vec![0.0; n];
        c[0] = -2.0 * x[1][0] * (x[1][1] - x[0][1]);
        c[n - 1] = 2.0 * x[n - 2][0] * (x[n - 2][1] - x[n - 1][1]);
        for i in 1..n - 1 {
            let a = [x[i - 1][0] - x[i][0], x[i - 1][1] - x[i][1]];
            let b = [x[i + 1][0] - x[i][0], x[i + 1][1] - x[i][1]];
            c[i] = a[0] * b[1] - a[1] * b[0];
        }
        c
    }

    /// Exact Jacobian of the residuals as per-row stencils
    /// `(node index, [d/dr, d/dz])`.
    pub fn convexity_jacobian_stencil(&self) -> Vec<Vec<(usize, [f64; 2])>> {
        let x = &self.nodes;
        let n = x.len();
        let mut rows = Vec::with_capacity(n);
        // C_1 = -2 r_2 (z_2 - z_1)
        rows.push(vec![
            (0, [0.0, 2.0 * x[1][0]]),
            (1, [-2.0 * (x[1][1] - x[0][1]), -2.0 * x[1][0]]),
        ]);
        for i in 1..n - 1 {
            let (rm, zm) = (x[i - 1][0], x[i - 1][1]);
            let (ri, zi) = (x[i][0], x[i][1]);
            let (rp, zp) = (x[i + 1][0], x[i + 1][1]);
            rows.push(vec![
                (i - 1, [zp - zi, -(rp - ri)]),
                (i, [zm - zp, rp - rm]),
                (i + 1, [-(zm - zi), rm - ri]),
            ]);
        }
        // C_N = 2 r_{N-1} (z_{N-1} - z_N)
        rows.push(vec![
            (
                n - 2,
                [2.0 * (x[n - 2][1] - x[n - 1][1]), 2.0 * x[n - 2][0]],
            ),
            (n - 1, [0.0, -2.0 * x[n - 2][0]]),
        ]);
        rows
    }

    /// Jacobian as a sparse N x 2N matrix (columns `2i`, `2i+1` for node `i`).
    pub fn convexity_jacobian(&self) -> CsMat<f64> {
        let n = self.nodes.len();
        let mut t = Triplets::new(n, 2 * n);
        for (row, stencil) in self.convexity_jacobian_stencil().iter().enumerate() {
            for &(node, d) in stencil {
                t.push(row, 2 * node, d[0]);
                t.push(row, 2 * node + 1, d[1]);
            }
        }
        t.to_csr()
    }

    pub fn convexity_report(&self) -> ConvexityReport {
        let residuals = self.convexity_residuals();
        let feasible = residuals.iter().all(|&c| c <= CONVEXITY_TOL);
        ConvexityReport {
            residuals,
            jacobian: self.convexity_jacobian(),
            feasible,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.convexity_residuals()
            .iter()
            .all(|&c| c <= CONVEXITY_TOL)
    }

    /// Weighted area `|w|_r = int_w r d(r,z)`, exact for the polygon via the
    /// boundary integral `1/2 \oint r^2 dz` (the closing axis segment
    /// contributes nothing since r = 0 there).
    pub fn weighted_area(&self) -> Result<f64, GeometryError> {
        if self.is_self_intersecting() {
            return Err(GeometryError::SelfIntersecting);
        }
        Ok(weighted_area_of_polyline(&self.nodes))
    }

    /// True iff any two non-adjacent segments of the closed curve (the
    /// polyline plus the axis segment) intersect.
    pub fn is_self_intersecting(&self) -> bool {
        let n = self.nodes.len();
        // closed polygon: segment i joins vertex i and i+1 (mod n)
        let seg = |i: usize| (self.nodes[i], self.nodes[(i + 1) % n]);
        for i in 0..n {
            for j in i + 1..n {
                // skip identical or adjacent segments
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_intersect(a, b, c, d) {
                    return true;
                }
            }
        }
        false
    }

    /// Per-segment lengths `|e_i|`, e_i joining node i and i+1.
    pub fn segment_lengths(&self) -> Vec<f64> {
        self.nodes
            .windows(2)
            .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
            .collect()
    }

    /// Outward unit normals of the polyline segments (interior to the left of
    /// the counter-clockwise traversal).
    pub fn segment_normals(&self) -> Vec<[f64; 2]> {
        self.nodes
            .windows(2)
            .map(|w| {
                let t = [w[1][0] - w[0][0], w[1][1] - w[0][1]];
                let l = (t[0] * t[0] + t[1] * t[1]).sqrt();
                [t[1] / l, -t[0] / l]
            })
            .collect()
    }

    /// Outward unit node normals: angle-bisector average of the adjacent
    /// segment normals; the axis endpoints get the outward axis direction
    /// `(0, -1)` / `(0, +1)` so they only ever glide along the axis.
    pub fn node_normals(&self) -> Vec<[f64; 2]> {
        let n = self.nodes.len();
        let seg = self.segment_normals();
        let mut out = Vec::with_capacity(n);
        let down = if self.nodes[0][1] < self.nodes[n - 1][1] {
            -1.0
        } else {
            1.0
        };
        out.push([0.0, down]);
        for i in 1..n - 1 {
            let s = [seg[i - 1][0] + seg[i][0], seg[i - 1][1] + seg[i][1]];
            let l = (s[0] * s[0] + s[1] * s[1]).sqrt();
            if l > 1e-14 {
                out.push([s[0] / l, s[1] / l]);
            } else {
                out.push(seg[i]);
            }
        }
        out.push([0.0, -down]);
        out
    }

    /// Serialize as CSV with header `r,z`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,z\n");
        for p in &self.nodes {
            s.push_str(&format!("{:.11e},{:.11e}\n", p[0], p[1]));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self, GeometryError> {
        let mut nodes = Vec::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (ln == 0 && line.starts_with('r')) {
                continue;
            }
            let mut it = line.split(',');
            let r = it
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| GeometryError::Io(format!("bad r on line {}", ln + 1)))?;
            let z = it
                .next()
                .and_then(|v| v.trim().parse::<f64>().ok())
                .ok_or_else(|| GeometryError::Io(format!("bad z on line {}", ln + 1)))?;
            nodes.push([r, z]);
        }
        Self::new(nodes)
    }
}

/// `int_w r` over the polygon enclosed by `nodes` plus the implicit closing
/// segment, via `1/2 \oint r^2 dz` (counter-clockwise). Exact per segment.
pub fn weighted_area_of_polyline(nodes: &[[f64; 2]]) -> f64 {
    let n = nodes.len();
    let mut acc = 0.0;
    for i in 0..n {
        let a = nodes[i];
        let b = nodes[(i + 1) % n];
        // int r^2 dz over the segment with r linear in the parameter
        acc += (a[0] * a[0] + a[0] * b[0] + b[0] * b[0]) / 3.0 * (b[1] - a[1]);
    }
    0.5 * acc
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn on_segment(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

/// Proper or improper intersection of closed segments [a,b] and [c,d].
pub fn segments_intersect(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(c, d, a))
        || (d2 == 0.0 && on_segment(c, d, b))
        || (d3 == 0.0 && on_segment(a, b, c))
        || (d4 == 0.0 && on_segment(a, b, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn square() -> GeneratrixBoundary {
        GeneratrixBoundary::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]).unwrap()
    }

    #[test]
    fn square_interior_residual_matches_hand_value() {
        let c = square().convexity_residuals();
        // node 2 (index 1): (0-1)(1-0) - (0-0)(1-1) = -1
        assert_eq!(c[1], -1.0);
        assert!(square().is_feasible());
    }

    #[test]
    fn collinear_interior_nodes_are_borderline_feasible() {
        let b = GeneratrixBoundary::new(vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [1.0, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
        ])
        .unwrap();
        let c = b.convexity_residuals();
        assert_eq!(c[2], 0.0);
        assert!(b.is_feasible());
    }

    #[test]
    fn reflex_corner_is_infeasible() {
        let b = GeneratrixBoundary::new(vec![
            [0.0, 0.0],
            [1.0, 0.0],
            [0.5, 0.5],
            [1.0, 1.0],
            [0.0, 1.0],
        ])
        .unwrap();
        let c = b.convexity_residuals();
        // oracle: interior angle at (0.5, 0.5) is reflex (turn angle negative)
        let e_in = [0.5f64 - 1.0, 0.5 - 0.0];
        let e_out = [1.0f64 - 0.5, 1.0 - 0.5];
        let turn = (e_in[0] * e_out[1] - e_in[1] * e_out[0]).atan2(e_in[0] * e_out[0] + e_in[1] * e_out[1]);
        assert!(turn < 0.0, "oracle should see a right turn");
        assert!(c[2] > 0.0);
        assert!(!b.is_feasible());
    }

    #[test]
    fn axis_rows_enforce_pole_angles() {
        // boundary dipping below the lower pole: z_2 < z_1
        let b = GeneratrixBoundary::new(vec![
            [0.0, 0.0],
            [0.5, -0.2],
            [1.0, 0.5],
            [0.5, 1.0],
            [0.0, 1.0],
        ])
        .unwrap();
        let c = b.convexity_residuals();
        assert!(c[0] > 0.0);
        // half disk: both pole angles are feasible
        let hd = GeneratrixBoundary::half_disk(0.05);
        assert!(hd.is_feasible());
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let b = GeneratrixBoundary::new(vec![
            [0.0, -0.9],
            [0.7, -0.5],
            [1.1, 0.1],
            [0.6, 0.8],
            [0.0, 1.0],
        ])
        .unwrap();
        let jac = b.convexity_jacobian_stencil();
        let c0 = b.convexity_residuals();
        let n = b.len();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let dir: Vec<[f64; 2]> = (0..n).map(|_| [rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5]).collect();
        let delta = 1e-6;
        let moved: Vec<[f64; 2]> = b
            .nodes()
            .iter()
            .zip(&dir)
            .map(|(p, d)| [p[0] + delta * d[0], p[1] + delta * d[1]])
            .collect();
        let c1 = {
            // bypass validation (moved axis nodes get nonzero r)
            let tmp = GeneratrixBoundary { nodes: moved };
            tmp.convexity_residuals()
        };
        for i in 0..n {
            let fd = (c1[i] - c0[i]) / delta;
            let an: f64 = jac[i]
                .iter()
                .map(|&(nd, g)| g[0] * dir[nd][0] + g[1] * dir[nd][1])
                .sum();
            assert!(
                (fd - an).abs() < 1e-5 * (1.0 + an.abs()),
                "row {i}: fd {fd} vs analytic {an}"
            );
        }
    }

    #[test]
    fn jacobian_sparsity_follows_three_node_stencil() {
        let b = GeneratrixBoundary::half_disk(0.3);
        let jac = b.convexity_jacobian_stencil();
        let n = b.len();
        for (i, row) in jac.iter().enumerate() {
            for &(node, _) in row {
                if i == 0 {
                    assert!(node <= 1);
                } else if i == n - 1 {
                    assert!(node >= n - 2);
                } else {
                    assert!(node + 1 >= i && node <= i + 1);
                }
            }
        }
    }

    #[test]
    fn weighted_area_of_half_disk_and_square() {
        let hd = GeneratrixBoundary::half_disk(std::f64::consts::PI / 1024.0);
        let a = hd.weighted_area().unwrap();
        assert!((a - 2.0 / 3.0).abs() < 1e-4, "got {a}");
        assert!(a < 2.0 / 3.0, "inscribed polygon must under-estimate");
        assert_eq!(square().weighted_area().unwrap(), 0.5);
        // fully degenerate zero-width polygon
        assert_eq!(
            weighted_area_of_polyline(&[[0.0, 0.0], [0.0, 0.5], [0.0, 1.0]]),
            0.0
        );
    }

    #[test]
    fn weighted_area_invariant_under_collinear_refinement() {
        let b = square();
        let refined = GeneratrixBoundary::new(vec![
            [0.0, 0.0],
            [0.5, 0.0],
            [1.0, 0.0],
            [1.0, 0.25],
            [1.0, 1.0],
            [0.0, 1.0],
        ])
        .unwrap();
        let a0 = b.weighted_area().unwrap();
        let a1 = refined.weighted_area().unwrap();
        assert!((a0 - a1).abs() < 1e-15);
    }

    #[test]
    fn cylinder_volume_matches_analytic() {
        // cylinder radius R = 1.5, height H = 2: volume pi R^2 H
        let b = GeneratrixBoundary::new(vec![
            [0.0, 0.0],
            [1.5, 0.0],
            [1.5, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        let v = 2.0 * std::f64::consts::PI * b.weighted_area().unwrap();
        let exact = std::f64::consts::PI * 1.5 * 1.5 * 2.0;
        assert!((v - exact).abs() < 1e-12 * exact);
    }

    #[test]
    fn self_intersection_detection() {
        assert!(!square().is_self_intersecting());
        // bowtie
        let bow = GeneratrixBoundary::new(vec![[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!(bow.is_self_intersecting());
        // folded: two boundary nodes pushed past each other
        let mut nodes = GeneratrixBoundary::half_disk(0.4).nodes().to_vec();
        let k = nodes.len() / 2;
        nodes.swap(k, k + 1);
        let folded = GeneratrixBoundary::new(nodes).unwrap();
        // brute-force oracle over all closed-polygon segment pairs
        let n = folded.len();
        let pts = folded.nodes();
        let mut oracle = false;
        for i in 0..n {
            for j in i + 1..n {
                if j == i || (j + 1) % n == i || (i + 1) % n == j {
                    continue;
                }
                if segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                    oracle = true;
                }
            }
        }
        assert!(oracle);
        assert!(folded.is_self_intersecting());
    }

    #[test]
    fn validation_rejects_degenerate_inputs() {
        assert!(GeneratrixBoundary::new(vec![[0.0, 0.0], [1.0, 1.0]]).is_err());
        assert!(GeneratrixBoundary::new(vec![[0.1, 0.0], [1.0, 0.5], [0.0, 1.0]]).is_err());
        assert!(GeneratrixBoundary::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).is_err());
        assert!(GeneratrixBoundary::new(vec![[0.0, 0.5], [1.0, 0.0], [0.0, 0.5]]).is_err());
    }

    #[test]
    fn node_normals_are_unit_and_axis_aligned_at_poles() {
        let b = GeneratrixBoundary::half_disk(0.1);
        let nh = b.node_normals();
        assert_eq!(nh[0], [0.0, -1.0]);
        assert_eq!(*nh.last().unwrap(), [0.0, 1.0]);
        for (i, n) in nh.iter().enumerate() {
            let l = (n[0] * n[0] + n[1] * n[1]).sqrt();
            assert!((l - 1.0).abs() < 1e-14, "node {i}");
        }
        // on the circle the bisector normal is radial
        for (p, n) in b.nodes().iter().zip(&nh).skip(1).take(b.len() - 2) {
            let dot = p[0] * n[0] + p[1] * n[1];
            assert!(dot > 0.999, "normal should point radially outward");
        }
    }

    #[test]
    fn ellipsoid_constructor_hits_target_volume() {
        for &a in &[0.8, 1.0, 1.2] {
            let m = 4.0 * std::f64::consts::PI / 3.0;
            let b = GeneratrixBoundary::half_ellipsoid(a, m, 0.01);
            assert!(b.is_feasible());
            let area = b.weighted_area().unwrap();
            assert!(
                (area - 2.0 / 3.0).abs() < 2e-4,
                "a={a}: polygon area {area}"
            );
            assert!(area < 2.0 / 3.0);
        }
    }

    #[test]
    fn csv_roundtrip_preserves_nodes_to_12_digits() {
        let b = GeneratrixBoundary::half_ellipsoid(1.2, 4.0, 0.2);
        let other = GeneratrixBoundary::from_csv(&b.to_csv()).unwrap();
        assert_eq!(b.len(), other.len());
        for (p, q) in b.nodes().iter().zip(other.nodes()) {
            assert!((p[0] - q[0]).abs() <= 1e-11 * (1.0 + p[0].abs()));
            assert!((p[1] - q[1]).abs() <= 1e-11 * (1.0 + p[1].abs()));
        }
    }

    #[test]
    fn random_convex_polygons_agree_with_angle_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..200 {
            let b = random_boundary(&mut rng);
            let c = b.convexity_residuals();
            if c.iter().any(|v| v.abs() < 1e-9) {
                continue; // skip tolerance-boundary ties
            }
            let feas = b.is_feasible();
            assert_eq!(feas, angle_oracle(&b), "nodes {:?}", b.nodes());
        }
    }

    pub(crate) fn random_boundary(rng: &mut ChaCha8Rng) -> GeneratrixBoundary {
        loop {
            let n = rng.gen_range(3..10usize);
            if rng.gen_bool(0.5) {
                // convex: sample angles on an ellipse arc
                let a = rng.gen_range(0.5..1.5);
                let b = rng.gen_range(0.5..1.5);
                let nodes: Vec<[f64; 2]> = (0..=n)
                    .map(|j| {
                        let phi = std::f64::consts::PI * j as f64 / n as f64;
                        if j == 0 {
                            [0.0, -a]
                        } else if j == n {
                            [0.0, a]
                        } else {
                            [b * phi.sin(), -a * phi.cos()]
                        }
                    })
                    .collect();
                if let Ok(g) = GeneratrixBoundary::new(nodes) {
                    return g;
                }
            } else {
                let mut nodes = vec![[0.0, rng.gen_range(-1.0..-0.2)]];
                for _ in 0..n - 2 {
                    nodes.push([rng.gen_range(0.1..1.5), rng.gen_range(-1.0..1.0)]);
                }
                nodes.push([0.0, rng.gen_range(0.2..1.0)]);
                if let Ok(g) = GeneratrixBoundary::new(nodes) {
                    return g;
                }
            }
        }
    }

    /// Independent feasibility oracle: interior angles at most pi at interior
    /// nodes (signed turn angle via atan2) and at most pi/2 at the poles.
    pub(crate) fn angle_oracle(b: &GeneratrixBoundary) -> bool {
        let x = b.nodes();
        let n = x.len();
        for i in 1..n - 1 {
            let e_in = [x[i][0] - x[i - 1][0], x[i][1] - x[i - 1][1]];
            let e_out = [x[i + 1][0] - x[i][0], x[i + 1][1] - x[i][1]];
            let turn = (e_in[0] * e_out[1] - e_in[1] * e_out[0])
                .atan2(e_in[0] * e_out[0] + e_in[1] * e_out[1]);
            if turn < 0.0 {
                return false;
            }
        }
        // pole angle <= pi/2: the first/last edge must not run against the
        // axis direction towards the other pole
        let up = x[n - 1][1] - x[0][1];
        let first = (x[1][1] - x[0][1]) * up;
        let last = (x[n - 1][1] - x[n - 2][1]) * up;
        first >= 0.0 && last >= 0.0
    }
}
