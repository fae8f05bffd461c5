//! Eigenvalue solvers on a fixed generatrix mesh.
//!
//! Three problems share the `r`-weighted P1 operators:
//!
//! * the reduced Dirichlet Laplacian eigenvalue (`K_r u = lambda M_r u` on
//!   the `Gamma_out`-constrained space), by inverse power iteration;
//! * the first nonzero reduced Neumann eigenvalue `mu_2`, by deflated
//!   inverse iteration with a unit spectral shift;
//! * the regularized nonlinear eigenvalue of optimal insulation
//!
//!   ```text
//!   J(u) = || grad u ||_r^2 + (2 pi / m) (sum_z beta_z |u(z)|_eps)^2,
//!   |u|_eps = sqrt(u^2 + eps^2),   || u ||_{L2_r} = 1,
//!   ```
//!
//!   by a semi-implicit gradient flow: the nonlinear boundary weight
//!   `1/|u^k|_eps` is frozen, one step solves
//!   `(M + tau (K + R(u^k))) w = M u^k` followed by renormalization. The
//!   boundary operator `R` is diagonal on OUT vertices, so every step reuses
//!   one factorization of `M + tau K` through a low-rank diagonal update.
//!   Steps that would increase `J` shrink `tau`; the energy history is
//!   recorded and every accepted step decreases `J`.
//!
//! The critical mass `m_0` (where the insulation eigenvalue crosses `mu_2`)
//! is computed by bisection.

use std::sync::Mutex;

use thiserror::Error;

use crate::fem::{apply_dirichlet, assemble_p1, P1Operators};
use crate::linalg::{dot, norm2, spmv, DiagUpdateSolver, LinalgError, SymFactor, Triplets};
use crate::mesh::{MeshError, TriMesh};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("{what} did not converge after {iterations} iterations (residual {residual:.3e})")]
    NotConverged {
        what: &'static str,
        iterations: usize,
        residual: f64,
        /// Last iterate, so callers can inspect or restart.
        last: Option<Box<EigenSolution>>,
    },
    #[error("singular system: {0}")]
    Singular(String),
    #[error("invalid bisection bracket [{lo}, {hi}]: phi({lo}) = {phi_lo:.4}, phi({hi}) = {phi_hi:.4}")]
    BadBracket {
        lo: f64,
        hi: f64,
        phi_lo: f64,
        phi_hi: f64,
    },
    #[error("incompatible input: {0}")]
    Incompatible(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EigenKind {
    Dirichlet,
    Insulation,
    Neumann,
}

/// An eigenvalue with its normalized discrete eigenfunction.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub lambda: f64,
    /// P1 coefficients, `|| u ||_{L2_r} = 1`.
    pub u: Vec<f64>,
    pub kind: EigenKind,
    pub m: Option<f64>,
    pub epsilon: Option<f64>,
    /// Insulation thickness per OUT vertex as `(vertex id, ell)`.
    pub ell: Option<Vec<(usize, f64)>>,
}

/// Insulation solve with its energy history and quadrature diagnostics.
#[derive(Debug, Clone)]
pub struct InsulationSolution {
    pub eig: EigenSolution,
    /// Eigenvalue of the variational formulation (Rayleigh quotient of the
    /// linearized operator); differs from `J` by an O(eps) term.
    pub lambda_var: f64,
    /// `J` after every accepted flow step (non-increasing).
    pub j_history: Vec<f64>,
    /// Regularized and plain discrete boundary L1 norms of `u`.
    pub l1_eps: f64,
    pub l1: f64,
    /// `int_{Gamma_out} r ds`.
    pub r_measure: f64,
    pub iterations: usize,
}

/// Parameters of the insulation gradient flow.
#[derive(Debug, Clone)]
pub struct FlowParams {
    /// Pseudo-time step; halved whenever a step would increase `J`.
    pub tau: f64,
    /// Stop when `|J^{k+1} - J^k|` drops below this ...
    pub tol_lambda: f64,
    /// ... and the variational residual below this.
    pub tol_residual: f64,
    pub max_iter: usize,
}

impl Default for FlowParams {
    fn default() -> Self {
        Self {
            tau: 1.0,
            tol_lambda: 1e-10,
            tol_residual: 1e-8,
            max_iter: 10_000,
        }
    }
}

/// Default regularization `eps = N^{-1/2} / 10` for a mesh with N nodes.
pub fn default_epsilon(mesh: &TriMesh) -> f64 {
    (mesh.n_vertices() as f64).powf(-0.5) / 10.0
}

const POWER_TOL_DLAMBDA: f64 = 1e-10;
const POWER_TOL_RESIDUAL: f64 = 1e-9;
const POWER_MAX_ITER: usize = 10_000;

fn m_normalize(m: &sprs::CsMat<f64>, u: &mut [f64]) -> f64 {
    let mu = spmv(m, u);
    let n = dot(u, &mu).sqrt();
    for x in u.iter_mut() {
        *x /= n;
    }
    n
}

/// Inverse power iteration for `K u = lambda M u` using a factorization of
/// `K + shift M`; an optional deflation direction is projected out in the
/// M-inner product every iteration.
fn inverse_iteration(
    factor: &SymFactor,
    k: &sprs::CsMat<f64>,
    m: &sprs::CsMat<f64>,
    shift: f64,
    mut u: Vec<f64>,
    deflate: Option<&[f64]>,
    what: &'static str,
) -> Result<(f64, Vec<f64>), SolverError> {
    let project = |u: &mut Vec<f64>| {
        if let Some(c) = deflate {
            let mc = spmv(m, c);
            let alpha = dot(u, &mc) / dot(c, &mc);
            for (ui, ci) in u.iter_mut().zip(c) {
                *ui -= alpha * ci;
            }
        }
    };
    project(&mut u);
    m_normalize(m, &mut u);
    let mut lambda = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for it in 0..POWER_MAX_ITER {
        let b = spmv(m, &u);
        let mut w = factor.solve(&b);
        project(&mut w);
        m_normalize(m, &mut w);
        let kw = spmv(k, &w);
        let mw = spmv(m, &w);
        let new_lambda = dot(&w, &kw) / dot(&w, &mw);
        let res: Vec<f64> = kw
            .iter()
            .zip(&mw)
            .map(|(a, b)| a - new_lambda * b)
            .collect();
        residual = norm2(&res) / norm2(&mw);
        let done = (new_lambda - lambda).abs() <= POWER_TOL_DLAMBDA * (1.0 + new_lambda.abs())
            && residual <= POWER_TOL_RESIDUAL;
        lambda = new_lambda;
        u = w;
        if done {
            let _ = shift;
            let _ = it;
            // fix the sign for determinism
            if u.iter().sum::<f64>() < 0.0 {
                for x in u.iter_mut() {
                    *x = -*x;
                }
            }
            return Ok((lambda, u));
        }
    }
    Err(SolverError::NotConverged {
        what,
        iterations: POWER_MAX_ITER,
        residual,
        last: None,
    })
}

/// Smallest eigenpair of the reduced Dirichlet problem on the mesh.
pub fn dirichlet_eigen(mesh: &TriMesh) -> Result<EigenSolution, SolverError> {
    let ops = assemble_p1(mesh);
    dirichlet_eigen_with(mesh, &ops)
}

pub fn dirichlet_eigen_with(
    mesh: &TriMesh,
    ops: &P1Operators,
) -> Result<EigenSolution, SolverError> {
    let kc = apply_dirichlet(&ops.k_r, &ops.dirichlet_mask);
    if kc.free.is_empty() {
        return Err(SolverError::Singular("no free dofs".into()));
    }
    let mc = crate::linalg::restrict(&ops.m_r, &kc.free);
    let factor = SymFactor::new(&kc.mat)
        .map_err(|e| SolverError::Singular(format!("constrained stiffness: {e}")))?;
    let u0 = vec![1.0; kc.free.len()];
    let (lambda, u_red) =
        inverse_iteration(&factor, &kc.mat, &mc, 0.0, u0, None, "dirichlet eigensolve")?;
    let u = kc.scatter(&u_red, mesh.n_vertices());
    Ok(EigenSolution {
        lambda,
        u,
        kind: EigenKind::Dirichlet,
        m: None,
        epsilon: None,
        ell: None,
    })
}

/// First nonzero eigenvalue of the reduced Neumann problem (the first is 0
/// with constant eigenfunction, which is deflated).
pub fn neumann_eigen2(mesh: &TriMesh) -> Result<f64, SolverError> {
    let ops = assemble_p1(mesh);
    neumann_eigen2_with(mesh, &ops).map(|(mu, _)| mu)
}

pub fn neumann_eigen2_with(
    mesh: &TriMesh,
    ops: &P1Operators,
) -> Result<(f64, Vec<f64>), SolverError> {
    let n = mesh.n_vertices();
    // K + M is SPD; the generalized spectrum shifts by exactly 1
    let shifted = &ops.k_r + &ops.m_r;
    let factor = SymFactor::new(&shifted)
        .map_err(|e| SolverError::Singular(format!("shifted stiffness: {e}")))?;
    let ones = vec![1.0; n];
    let u0: Vec<f64> = mesh
        .vertices
        .iter()
        .map(|p| p[1] + 0.37 * p[0] + 0.01)
        .collect();
    let (mu, u) = inverse_iteration(
        &factor,
        &ops.k_r,
        &ops.m_r,
        1.0,
        u0,
        Some(&ones),
        "neumann eigensolve",
    )?;
    Ok((mu, u))
}

/// Violations of flow invariants (energy monotonicity, regularization bound)
/// recorded by every insulation solve in this process.
static FLOW_VIOLATIONS: Mutex<Vec<String>> = Mutex::new(Vec::new());

pub fn take_flow_violations() -> Vec<String> {
    std::mem::take(&mut FLOW_VIOLATIONS.lock().unwrap())
}

pub fn flow_violations_len() -> usize {
    FLOW_VIOLATIONS.lock().unwrap().len()
}

fn record_violation(msg: String) {
    FLOW_VIOLATIONS.lock().unwrap().push(msg);
}

struct InsulationAssembly {
    ops: P1Operators,
    /// OUT vertices with their beta weights (beta > 0).
    out: Vec<(usize, f64)>,
    two_pi_over_m: f64,
}

impl InsulationAssembly {
    fn new(mesh: &TriMesh, m: f64) -> Self {
        let ops = assemble_p1(mesh);
        let out: Vec<(usize, f64)> = ops
            .out_vertices
            .iter()
            .map(|&v| (v, ops.beta[v]))
            .filter(|&(_, b)| b > 0.0)
            .collect();
        Self {
            ops,
            out,
            two_pi_over_m: 2.0 * std::f64::consts::PI / m,
        }
    }

    fn s_eps(&self, u: &[f64], eps: f64) -> f64 {
        self.out
            .iter()
            .map(|&(v, b)| b * (u[v] * u[v] + eps * eps).sqrt())
            .sum()
    }

    fn s_plain(&self, u: &[f64]) -> f64 {
        self.out.iter().map(|&(v, b)| b * u[v].abs()).sum()
    }

    fn energy(&self, u: &[f64], eps: f64) -> f64 {
        let ku = spmv(&self.ops.k_r, u);
        let s = self.s_eps(u, eps);
        dot(u, &ku) + self.two_pi_over_m * s * s
    }

    /// Diagonal of the frozen boundary operator `R(u)` on the OUT vertices.
    fn boundary_diag(&self, u: &[f64], eps: f64) -> Vec<f64> {
        let s = self.s_eps(u, eps);
        self.out
            .iter()
            .map(|&(v, b)| self.two_pi_over_m * s * b / (u[v] * u[v] + eps * eps).sqrt())
            .collect()
    }

    /// Variational residual `(K + R(u)) u - lambda M u` and its Rayleigh
    /// quotient `lambda`.
    fn residual(&self, u: &[f64], eps: f64) -> (f64, f64) {
        let ku = spmv(&self.ops.k_r, u);
        let mu = spmv(&self.ops.m_r, u);
        let rdiag = self.boundary_diag(u, eps);
        let mut au = ku;
        for (&(v, _), &d) in self.out.iter().zip(&rdiag) {
            au[v] += d * u[v];
        }
        let lambda_var = dot(u, &au) / dot(u, &mu);
        let res: Vec<f64> = au.iter().zip(&mu).map(|(a, b)| a - lambda_var * b).collect();
        (lambda_var, norm2(&res))
    }
}

/// Minimize the regularized insulation functional over the unit weighted-L2
/// sphere. `warm` seeds the flow (must match the vertex count); the default
/// seed is a constant with a small antisymmetric `z` perturbation so the
/// flow can leave the symmetric saddle when the minimizer is asymmetric.
pub fn insulation_eigen(
    mesh: &TriMesh,
    m: f64,
    epsilon: f64,
    params: &FlowParams,
    warm: Option<&[f64]>,
) -> Result<InsulationSolution, SolverError> {
    if m <= 0.0 || epsilon <= 0.0 {
        return Err(SolverError::Incompatible(format!(
            "need m > 0 and epsilon > 0, got m = {m}, epsilon = {epsilon}"
        )));
    }
    let n = mesh.n_vertices();
    let asm = InsulationAssembly::new(mesh, m);
    if asm.out.is_empty() {
        return Err(SolverError::Singular("no OUT boundary weights".into()));
    }

    let mut u: Vec<f64> = match warm {
        Some(w) if w.len() == n => w.to_vec(),
        _ => mesh.vertices.iter().map(|p| 1.0 + 1e-2 * p[1]).collect(),
    };
    m_normalize(&asm.ops.m_r, &mut u);

    let mut tau = params.tau;
    let out_ids: Vec<usize> = asm.out.iter().map(|&(v, _)| v).collect();
    let build = |tau: f64| -> Result<DiagUpdateSolver, LinalgError> {
        // F = M + tau K
        let mut t = Triplets::new(n, n);
        for (row, vec) in asm.ops.m_r.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                t.push(row, col, v);
            }
        }
        for (row, vec) in asm.ops.k_r.outer_iterator().enumerate() {
            for (col, &v) in vec.iter() {
                t.push(row, col, tau * v);
            }
        }
        DiagUpdateSolver::new(&t.to_csr(), out_ids.clone())
    };
    let mut solver = build(tau)?;

    let mut j = asm.energy(&u, epsilon);
    let mut j_history = vec![j];
    let slack = |j: f64| 1e-12 * j.abs().max(1.0);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < params.max_iter {
        iterations += 1;
        let rdiag = asm.boundary_diag(&u, epsilon);
        let d: Vec<f64> = rdiag.iter().map(|x| tau * x).collect();
        let mu = spmv(&asm.ops.m_r, &u);
        let mut w = solver.solve(&d, &mu)?;
        m_normalize(&asm.ops.m_r, &mut w);
        let jw = asm.energy(&w, epsilon);
        if jw <= j + slack(j) {
            let dj = (jw - j).abs();
            u = w;
            j = jw;
            j_history.push(j);
            if dj <= params.tol_lambda {
                let (_, res) = asm.residual(&u, epsilon);
                if res <= params.tol_residual {
                    converged = true;
                    break;
                }
            }
        } else {
            // step would increase the energy: either we are already at a
            // stationary point, or the step is too aggressive
            let (_, res) = asm.residual(&u, epsilon);
            if res <= params.tol_residual {
                converged = true;
                break;
            }
            tau *= 0.5;
            if tau < 1e-10 * params.tau {
                record_violation(format!(
                    "flow stalled at residual {res:.3e} with J increase {:.3e} (m = {m})",
                    jw - j
                ));
                break;
            }
            solver = build(tau)?;
        }
    }

    // deterministic sign
    if u.iter().sum::<f64>() < 0.0 {
        for x in u.iter_mut() {
            *x = -*x;
        }
    }
    let (lambda_var, residual) = asm.residual(&u, epsilon);
    let s1 = asm.s_plain(&u);
    let l1_eps = asm.s_eps(&u, epsilon);
    let r_measure = asm.ops.boundary_r_measure();
    // optimal film thickness ell = m |u| / (2 pi sum beta |u|)
    let ell: Vec<(usize, f64)> = asm
        .out
        .iter()
        .map(|&(v, _)| (v, m * u[v].abs() / (2.0 * std::f64::consts::PI * s1)))
        .collect();
    // invariant checks recorded for the acceptance diagnostics
    let reg_gap = l1_eps - s1;
    if !(0.0..=epsilon * r_measure * (1.0 + 1e-12)).contains(&reg_gap) {
        record_violation(format!(
            "regularization bound violated: gap {reg_gap:.3e} not in [0, {:.3e}]",
            epsilon * r_measure
        ));
    }
    if j_history.windows(2).any(|w| w[1] > w[0] + slack(w[0])) {
        record_violation("energy history not monotone".into());
    }

    let solution = InsulationSolution {
        eig: EigenSolution {
            lambda: j,
            u,
            kind: EigenKind::Insulation,
            m: Some(m),
            epsilon: Some(epsilon),
            ell: Some(ell),
        },
        lambda_var,
        j_history,
        l1_eps,
        l1: s1,
        r_measure,
        iterations,
    };
    if converged {
        Ok(solution)
    } else {
        Err(SolverError::NotConverged {
            what: "insulation gradient flow",
            iterations,
            residual,
            last: Some(Box::new(solution.eig)),
        })
    }
}

/// Critical mass: bisection on `m -> lambda_m - mu_2` on the given mesh, to
/// an absolute bracket width of 1e-2. Solves warm-start along the path.
pub fn critical_mass(mesh: &TriMesh, bracket: (f64, f64)) -> Result<f64, SolverError> {
    critical_mass_collect(mesh, bracket, &mut Vec::new())
}

/// Same as [`critical_mass`] but appends every insulation solve along the
/// bisection path (for invariant checking).
pub fn critical_mass_collect(
    mesh: &TriMesh,
    bracket: (f64, f64),
    solves: &mut Vec<InsulationSolution>,
) -> Result<f64, SolverError> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(SolverError::Incompatible(format!(
            "invalid bracket [{lo}, {hi}]"
        )));
    }
    let eps = default_epsilon(mesh);
    let params = FlowParams::default();
    let mu2 = neumann_eigen2(mesh)?;
    let mut warm: Option<Vec<f64>> = None;
    let solve = |m: f64, warm: &mut Option<Vec<f64>>, solves: &mut Vec<InsulationSolution>| -> Result<f64, SolverError> {
        let sol = insulation_eigen(mesh, m, eps, &params, warm.as_deref())?;
        *warm = Some(sol.eig.u.clone());
        let lambda = sol.eig.lambda;
        solves.push(sol);
        Ok(lambda)
    };
    let phi_lo = solve(lo, &mut warm, solves)? - mu2;
    let phi_hi = solve(hi, &mut warm, solves)? - mu2;
    if !(phi_lo > 0.0 && phi_hi < 0.0) {
        return Err(SolverError::BadBracket {
            lo,
            hi,
            phi_lo,
            phi_hi,
        });
    }
    while hi - lo > 1e-2 {
        let mid = 0.5 * (lo + hi);
        let phi = solve(mid, &mut warm, solves)? - mu2;
        if phi > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Scale all mesh vertices by `t` (markers and topology unchanged).
pub fn scaled_mesh(mesh: &TriMesh, t: f64) -> TriMesh {
    let mut scaled = mesh.clone();
    for p in scaled.vertices.iter_mut() {
        p[0] *= t;
        p[1] *= t;
    }
    scaled.h *= t;
    scaled
}

/// Both sides of the scaling identity `t^{-2} lambda_m(w) = lambda_{m t^3}(t w)`
/// for the insulation eigenvalue (d = 3), each computed independently with
/// the default regularization of its own mesh.
pub fn scaling_check(mesh: &TriMesh, m: f64, t: f64) -> Result<(f64, f64), SolverError> {
    assert!(t > 0.0);
    let params = FlowParams::default();
    let lhs = insulation_eigen(mesh, m, default_epsilon(mesh), &params, None)?
        .eig
        .lambda
        / (t * t);
    let big = scaled_mesh(mesh, t);
    let rhs = insulation_eigen(&big, m * t.powi(3), default_epsilon(&big), &params, None)?
        .eig
        .lambda;
    Ok((lhs, rhs))
}

/// Dirichlet analog (mass independent): returns `(t^{-2} lambda(w), lambda(t w))`.
pub fn scaling_check_dirichlet(mesh: &TriMesh, t: f64) -> Result<(f64, f64), SolverError> {
    let lhs = dirichlet_eigen(mesh)?.lambda / (t * t);
    let rhs = dirichlet_eigen(&scaled_mesh(mesh, t))?.lambda;
    Ok((lhs, rhs))
}

/// `|| u - u o sigma ||_{L2_r} / || u ||_{L2_r}` for the z-mirror `sigma`.
/// Requires an exactly mirror-symmetric mesh (the reference half-disk is).
pub fn asymmetry_metric(mesh: &TriMesh, u: &[f64]) -> Result<f64, SolverError> {
    use std::collections::HashMap;
    let key = |p: [f64; 2]| (p[0].to_bits(), (p[1] + 0.0).to_bits());
    let mut lookup: HashMap<(u64, u64), usize> = HashMap::with_capacity(mesh.n_vertices());
    for (i, &p) in mesh.vertices.iter().enumerate() {
        lookup.insert(key(p), i);
    }
    let mut mirror = vec![0usize; mesh.n_vertices()];
    for (i, &p) in mesh.vertices.iter().enumerate() {
        let q = [p[0], if p[1] == 0.0 { 0.0 } else { -p[1] }];
        mirror[i] = *lookup.get(&key(q)).ok_or_else(|| {
            SolverError::Incompatible("mesh is not mirror symmetric in z".into())
        })?;
    }
    let ops = assemble_p1(mesh);
    let diff: Vec<f64> = (0..mesh.n_vertices()).map(|i| u[i] - u[mirror[i]]).collect();
    let md = spmv(&ops.m_r, &diff);
    let mu = spmv(&ops.m_r, u);
    Ok(dot(&diff, &md).sqrt() / dot(u, &mu).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::reference_half_disk;

    const PI2: f64 = std::f64::consts::PI * std::f64::consts::PI;

    #[test]
    fn dirichlet_ball_eigenvalue_at_coarse_meshes() {
        // conforming approximation from above towards pi^2
        let l3 = dirichlet_eigen(&reference_half_disk(0.125)).unwrap().lambda;
        let l4 = dirichlet_eigen(&reference_half_disk(0.0625)).unwrap().lambda;
        assert!(l3 > PI2 - 0.01 && l4 > PI2 - 0.01, "l3 = {l3}, l4 = {l4}");
        assert!(l4 < l3, "refinement should not increase the eigenvalue");
        assert!((l4 - PI2).abs() < 0.1, "l4 = {l4}");
    }

    #[test]
    fn dirichlet_eigenfunction_is_normalized_and_signed() {
        let mesh = reference_half_disk(0.125);
        let ops = assemble_p1(&mesh);
        let sol = dirichlet_eigen_with(&mesh, &ops).unwrap();
        let mu = spmv(&ops.m_r, &sol.u);
        assert!((dot(&sol.u, &mu) - 1.0).abs() < 1e-10);
        // ground state positive in the interior
        let interior_min = sol
            .u
            .iter()
            .enumerate()
            .filter(|&(v, _)| !ops.dirichlet_mask[v])
            .map(|(_, &x)| x)
            .fold(f64::INFINITY, f64::min);
        assert!(interior_min > 0.0);
        // residual contract
        let kc = apply_dirichlet(&ops.k_r, &ops.dirichlet_mask);
        let mc = crate::linalg::restrict(&ops.m_r, &kc.free);
        let ur = kc.gather(&sol.u);
        let ku = spmv(&kc.mat, &ur);
        let mu = spmv(&mc, &ur);
        let res: Vec<f64> = ku.iter().zip(&mu).map(|(a, b)| a - sol.lambda * b).collect();
        assert!(norm2(&res) <= 1e-9 * norm2(&mu));
    }

    /// First positive root of the derivative of the spherical Bessel
    /// function j_1, found by bisection; mu_2(ball) is its square.
    fn bessel_mu2_reference() -> f64 {
        let j1p = |x: f64| {
            // j1(x) = sin x / x^2 - cos x / x
            // j1'(x) = (x^2 - 2) sin x / x^3 + 2 cos x / x^2
            (x * x - 2.0) * x.sin() / (x * x * x) + 2.0 * x.cos() / (x * x)
        };
        let (mut lo, mut hi) = (1.5, 3.0);
        assert!(j1p(lo) > 0.0 && j1p(hi) < 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if j1p(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        root * root
    }

    #[test]
    fn neumann_second_eigenvalue_matches_bessel_root() {
        let exact = bessel_mu2_reference();
        assert!((exact - 4.333).abs() < 2e-3, "reference {exact}");
        let mu_c = neumann_eigen2(&reference_half_disk(0.125)).unwrap();
        let mu_f = neumann_eigen2(&reference_half_disk(0.0625)).unwrap();
        assert!((mu_f - exact).abs() / exact < 0.01, "mu_f = {mu_f}");
        assert!((mu_f - exact).abs() < (mu_c - exact).abs() * 1.01);
    }

    #[test]
    fn neumann_first_eigenvalue_is_zero_with_constant_eigenfunction() {
        let mesh = reference_half_disk(0.25);
        let ops = assemble_p1(&mesh);
        let ones = vec![1.0; mesh.n_vertices()];
        let k1 = spmv(&ops.k_r, &ones);
        assert!(crate::linalg::norm_inf(&k1) < 1e-12);
    }

    #[test]
    fn neumann_eigenvalue_scales_inversely_with_area() {
        let mesh = reference_half_disk(0.125);
        let mu = neumann_eigen2(&mesh).unwrap();
        let mu_scaled = neumann_eigen2(&scaled_mesh(&mesh, 2.0)).unwrap();
        assert!((mu_scaled - mu / 4.0).abs() < 1e-8 * mu);
    }

    #[test]
    fn insulation_flow_on_coarse_ball() {
        let mesh = reference_half_disk(0.125);
        let eps = default_epsilon(&mesh);
        let params = FlowParams::default();
        let sol = insulation_eigen(&mesh, 12.0, eps, &params, None).unwrap();
        // upper bound by the Dirichlet eigenfunction as test function
        let dir = dirichlet_eigen(&mesh).unwrap().lambda;
        let slack = 2.0 * std::f64::consts::PI / 12.0
            * (eps * sol.r_measure)
            * (eps * sol.r_measure);
        assert!(sol.eig.lambda <= dir + slack, "{} vs {}", sol.eig.lambda, dir);
        // energy history is monotone
        assert!(sol
            .j_history
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0)));
        // normalization
        let ops = assemble_p1(&mesh);
        let mu = spmv(&ops.m_r, &sol.eig.u);
        assert!((dot(&sol.eig.u, &mu) - 1.0).abs() < 1e-10);
        // regularization bound
        let gap = sol.l1_eps - sol.l1;
        assert!(gap >= 0.0 && gap <= eps * sol.r_measure + 1e-15);
        // mass constraint: 2 pi sum beta ell = m to 1e-8 relative
        let ell = sol.eig.ell.as_ref().unwrap();
        let total: f64 = ell.iter().map(|&(v, l)| ops.beta[v] * l).sum();
        let mass = 2.0 * std::f64::consts::PI * total;
        assert!((mass - 12.0).abs() < 1e-8 * 12.0, "mass = {mass}");
        // radial for m = 12 > m0
        let a = asymmetry_metric(&mesh, &sol.eig.u).unwrap();
        assert!(a < 0.01, "asymmetry {a}");
    }

    #[test]
    fn insulation_breaks_symmetry_below_critical_mass() {
        let mesh = reference_half_disk(0.125);
        let eps = default_epsilon(&mesh);
        let sol = insulation_eigen(&mesh, 2.0, eps, &FlowParams::default(), None).unwrap();
        let a = asymmetry_metric(&mesh, &sol.eig.u).unwrap();
        assert!(a > 0.1, "asymmetry {a}");
    }

    #[test]
    fn insulation_lambda_decreases_in_mass() {
        let mesh = reference_half_disk(0.25);
        let eps = default_epsilon(&mesh);
        let params = FlowParams::default();
        let mut prev = f64::INFINITY;
        for &m in &[4.0, 5.0, 6.0, 8.0] {
            let l = insulation_eigen(&mesh, m, eps, &params, None).unwrap().eig.lambda;
            assert!(l < prev, "lambda({m}) = {l} not below {prev}");
            prev = l;
        }
    }

    #[test]
    fn critical_mass_bracket_on_coarse_ball() {
        let mesh = reference_half_disk(0.125);
        let m0 = critical_mass(&mesh, (4.0, 8.0)).unwrap();
        assert!((5.0..7.0).contains(&m0), "m0 = {m0}");
        // invalid bracket errors
        match critical_mass(&mesh, (11.0, 13.0)) {
            Err(SolverError::BadBracket { .. }) => {}
            other => panic!("expected BadBracket, got {other:?}"),
        }
    }

    #[test]
    fn scaling_identity_holds_for_dirichlet_exactly_and_insulation_approximately() {
        let mesh = reference_half_disk(0.125);
        let (lhs, rhs) = scaling_check_dirichlet(&mesh, 2.0).unwrap();
        assert!((lhs - rhs).abs() / lhs < 5e-3, "dirichlet {lhs} vs {rhs}");
        let (lhs, rhs) = scaling_check(&mesh, 5.0, 2.0).unwrap();
        assert!((lhs - rhs).abs() / lhs < 0.01, "insulation {lhs} vs {rhs}");
        let (l1, r1) = scaling_check(&mesh, 5.0, 1.0).unwrap();
        assert!((l1 - r1).abs() < 1e-12 * l1);
    }

    #[test]
    fn asymmetry_metric_detects_constructed_asymmetry() {
        let mesh = reference_half_disk(0.25);
        let sym: Vec<f64> = mesh.vertices.iter().map(|p| p[0]).collect();
        assert!(asymmetry_metric(&mesh, &sym).unwrap() < 1e-14);
        let asym: Vec<f64> = mesh.vertices.iter().map(|p| p[0] + p[1]).collect();
        assert!(asymmetry_metric(&mesh, &asym).unwrap() > 0.1);
    }
}
