mod common;

use common::{
    jacobi_eigenvalues, max_abs, normal_equations, oracle_residual, oracle_solve, ricci_rows,
    symmetry_rows,
};
use kahler_core::geometry::CurvatureBundle;
use kahler_core::weak_symmetry::{
    alpha_rho_relation_bundle, ricci_eigen_residual_bundle, solve_weak_ricci_bundle,
    solve_weak_symmetry_bundle, wrs_nonexistence_check_metric,
};
use kahler_core::{builtin, MetricAtPoint, Point};

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    let scale = max_abs(b.iter().copied()).max(1.0);
    max_abs(a.iter().zip(b).map(|(x, y)| x - y)) <= rel * scale
}

fn check_point(name: &str, b: &CurvatureBundle) {
    let sol = solve_weak_symmetry_bundle(b);
    let rows = symmetry_rows(b);
    let got: Vec<f64> = sol.a.iter().chain(&sol.omega).copied().collect();
    match oracle_solve(&rows, b.riemann_0_4.max_abs()) {
        Some(x) => {
            assert!(
                close(&got, &x, 1e-8),
                "{name}: weak symmetry {got:?} vs oracle {x:?}"
            );
            let res = oracle_residual(&rows, &x);
            assert!(
                (sol.residual - res).abs() <= 1e-8 * res.max(1.0),
                "{name}: residual {} vs {res}",
                sol.residual
            );
        }
        None => assert!(
            sol.system_rank < 8,
            "{name}: oracle singular but solver rank {}",
            sol.system_rank
        ),
    }

    let sol = solve_weak_ricci_bundle(b);
    let rows = ricci_rows(b);
    let got: Vec<f64> = sol.a.iter().chain(&sol.omega).copied().collect();
    match oracle_solve(&rows, b.riemann_0_4.max_abs()) {
        Some(x) => {
            assert!(
                close(&got, &x, 1e-8),
                "{name}: weak ricci {got:?} vs oracle {x:?}"
            );
            let res = oracle_residual(&rows, &x);
            assert!(
                (sol.residual - res).abs() <= 1e-8 * res.max(1.0),
                "{name}: residual {} vs {res}",
                sol.residual
            );
        }
        None => assert!(
            sol.system_rank < 8,
            "{name}: oracle singular but solver rank {}",
            sol.system_rank
        ),
    }
}

#[test]
fn solvers_match_normal_equations_on_catalog() {
    for entry in common::catalog() {
        for p in entry.metric.sample_points(5, 42) {
            let b = CurvatureBundle::compute(&entry.metric, &p).unwrap();
            check_point(&entry.metric.name, &b);
        }
    }
}

#[test]
fn flrw_linear_at_unit_time_matches_oracle_and_is_nontrivial() {
    let m = builtin("flrw(1)").unwrap().metric;
    let b = CurvatureBundle::compute(&m, &Point([1.0, 0.1, -0.2, 0.3])).unwrap();
    check_point("flrw(1)", &b);
    let sol = solve_weak_symmetry_bundle(&b);
    assert_eq!(sol.system_rank, 8);
    assert!(max_abs(sol.a.iter().chain(&sol.omega).copied()) > 1e-3);
    println!(
        "flrw(1) at t=1: A = {:?}, omega = {:?}, residual = {:e}",
        sol.a, sol.omega, sol.residual
    );
}

#[test]
fn parallel_curvature_gives_zero_solutions() {
    for name in [
        "sphere4",
        "de_sitter",
        "minkowski",
        "euclidean",
        "neutral_kahler_flat",
    ] {
        let m = builtin(name).unwrap().metric;
        for p in m.sample_points(5, 42) {
            let b = CurvatureBundle::compute(&m, &p).unwrap();
            let s = solve_weak_symmetry_bundle(&b);
            let r = solve_weak_ricci_bundle(&b);
            assert!(
                max_abs(s.a.iter().chain(&s.omega).copied()) < 1e-8,
                "{name}: {s:?}"
            );
            assert!(s.residual < 1e-8, "{name}");
            assert!(
                max_abs(r.a.iter().chain(&r.omega).copied()) < 1e-8,
                "{name}: {r:?}"
            );
            assert!(r.residual < 1e-8, "{name}");
        }
    }
    let m = builtin("minkowski").unwrap().metric;
    let b = CurvatureBundle::compute(&m, &m.center()).unwrap();
    let s = solve_weak_symmetry_bundle(&b);
    assert_eq!((s.system_rank, s.residual), (0, 0.0));
}

fn constraint_sigma_min_oracle(g: &[[f64; 4]; 4]) -> f64 {
    let mut rows = Vec::new();
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                let mut row = vec![0.0; 8];
                row[x] += g[y][z];
                row[4 + y] += g[z][x];
                row[4 + z] += g[x][y];
                rows.push((row, 0.0));
            }
        }
    }
    let (ata, _) = normal_equations(&rows);
    jacobi_eigenvalues(ata)[0].max(0.0).sqrt()
}

#[test]
fn constraint_sigma_min_matches_eigenvalue_oracle() {
    for entry in common::catalog() {
        for p in entry.metric.sample_points(5, 42) {
            let metric = entry.metric.metric_at(&p).unwrap();
            let sigma = wrs_nonexistence_check_metric(&metric);
            let oracle = constraint_sigma_min_oracle(&metric.g);
            assert!(
                (sigma - oracle).abs() <= 1e-8 * oracle.max(1.0),
                "{}: {sigma} vs {oracle}",
                entry.metric.name
            );
            assert!(sigma > 0.1, "{}: {sigma}", entry.metric.name);
        }
    }
}

#[test]
fn flat_constraint_sigma_min_closed_form() {
    // per index a 2x2 block [[4, 2], [2, 10]] of the normal matrix
    let expected = (7.0 - 13.0f64.sqrt()).sqrt();
    for d in [[-1.0, 1.0, 1.0, 1.0], [1.0; 4], [-1.0, -1.0, 1.0, 1.0]] {
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            g[i][i] = d[i];
        }
        let sigma = wrs_nonexistence_check_metric(&MetricAtPoint::new(g).unwrap());
        assert!((sigma - expected).abs() < 1e-12, "{sigma}");
        assert!((constraint_sigma_min_oracle(&g) - expected).abs() < 1e-12);
        assert!(sigma > 0.5);
    }
}

#[test]
fn eigen_and_alpha_rho_diagnostics() {
    let ds = builtin("de_sitter").unwrap();
    let fluid = ds.fluid.as_ref().unwrap();
    for p in ds.metric.sample_points(5, 42) {
        let b = CurvatureBundle::compute(&ds.metric, &p).unwrap();
        let rho = fluid.velocity_at(&p).unwrap();
        let e = ricci_eigen_residual_bundle(&b, &rho).unwrap();
        assert!(e.res_quarter_r < 1e-8);
        assert!((e.res_half_r - 3.0).abs() < 1e-8);
    }
    for name in ["minkowski", "schwarzschild"] {
        let entry = builtin(name).unwrap();
        let fluid = entry.fluid.as_ref().unwrap();
        for p in entry.metric.sample_points(3, 42) {
            let b = CurvatureBundle::compute(&entry.metric, &p).unwrap();
            let e = ricci_eigen_residual_bundle(&b, &fluid.velocity_at(&p).unwrap()).unwrap();
            assert!(e.res_half_r < 1e-8 && e.res_quarter_r < 1e-8, "{name}");
            let sol = solve_weak_symmetry_bundle(&b);
            assert!(alpha_rho_relation_bundle(&b, &sol) < 1e-8, "{name}");
        }
    }
    let s4 = builtin("sphere4").unwrap().metric;
    let b = CurvatureBundle::compute(&s4, &s4.center()).unwrap();
    let sol = solve_weak_symmetry_bundle(&b);
    assert!((alpha_rho_relation_bundle(&b, &sol) - 48.0).abs() < 1e-6);
}
