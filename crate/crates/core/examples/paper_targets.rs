//! Scratch validation of fine-mesh targets (not part of the test suite).
use axishape::eigensolve::*;
use axishape::mesh::reference_half_disk;
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let mesh = reference_half_disk(0.03125); // 2^-5
    println!(
        "mesh: {} vertices, {} triangles, h = {:.5}, c_usr = {:.3} ({:.2?})",
        mesh.n_vertices(),
        mesh.n_triangles(),
        mesh.h,
        mesh.c_usr,
        t0.elapsed()
    );
    println!("weighted area = {:.6} (paper 0.6662)", mesh.weighted_area());

    let t = Instant::now();
    let dir = dirichlet_eigen(&mesh).unwrap();
    println!(
        "dirichlet lambda = {:.6} (paper 9.8753, pi^2 = {:.6}) [{:.2?}]",
        dir.lambda,
        std::f64::consts::PI.powi(2),
        t.elapsed()
    );

    let t = Instant::now();
    let mu2 = neumann_eigen2(&mesh).unwrap();
    println!("neumann mu2 = {:.6} (bessel ~ 4.33296) [{:.2?}]", mu2, t.elapsed());

    let eps = default_epsilon(&mesh);
    println!("epsilon = {:.6e} (N = {})", eps, mesh.n_vertices());
    let params = FlowParams::default();
    for m in [2.0, 5.0, 6.0, 12.0, 13.0] {
        let t = Instant::now();
        match insulation_eigen(&mesh, m, eps, &params, None) {
            Ok(sol) => {
                let a = asymmetry_metric(&mesh, &sol.eig.u).unwrap();
                println!(
                    "insulation m={m:>4}: lambda = {:.6} lambda_var = {:.6} iters = {} asym = {:.4} [{:.2?}]",
                    sol.eig.lambda, sol.lambda_var, sol.iterations, a, t.elapsed()
                );
            }
            Err(e) => println!("insulation m={m}: FAILED {e}"),
        }
    }
    println!("paper: m=5 -> 4.554732, m=6 -> 4.241085, m=12 -> 2.561023, m=13 -> 2.400342");

    let t = Instant::now();
    let m0 = critical_mass(&mesh, (4.0, 8.0)).unwrap();
    println!("critical mass m0 = {:.4} (paper 5.7963) [{:.2?}]", m0, t.elapsed());

    let t = Instant::now();
    let (lhs, rhs) = scaling_check(&mesh, 5.0, 2.0).unwrap();
    println!(
        "scaling: lhs = {:.6}, rhs = {:.6}, rel = {:.3e} [{:.2?}]",
        lhs,
        rhs,
        (lhs - rhs).abs() / lhs,
        t.elapsed()
    );
    println!("total {:.2?}", t0.elapsed());
}
