mod common;

use common::{fd_curvature, fd_nabla_riemann, max_abs};
use kahler_core::catalog::{builtin, rotating_complex_structure};
use kahler_core::conformal::{constant_curvature_residual, weyl_tensor};
use kahler_core::geometry::{christoffel, sectional_curvature, CurvatureBundle};
use kahler_core::kahler::kahler_audit;
use kahler_core::{MetricStructure, Point};

fn agree(label: &str, analytic: &[f64], oracle: &[f64], rel: f64) {
    let scale = max_abs(oracle.iter().copied()).max(1.0);
    let diff = max_abs(analytic.iter().zip(oracle).map(|(a, b)| a - b));
    assert!(
        diff <= rel * scale,
        "{label}: difference {diff:e} exceeds {rel:e} * {scale}"
    );
}

fn compare_pipeline(m: &MetricStructure, p: &Point) {
    let bundle = CurvatureBundle::compute(m, p).unwrap();
    let fd = fd_curvature(m, &p.0);
    let gamma: Vec<f64> = bundle.gamma.iter().flatten().flatten().copied().collect();
    agree(&format!("{} gamma", m.name), &gamma, &fd.gamma, 1e-9);
    agree(
        &format!("{} riemann", m.name),
        bundle.riemann_0_4.components(),
        &fd.riemann_down,
        1e-7,
    );
    agree(
        &format!("{} riemann (1,3)", m.name),
        bundle.riemann_1_3.components(),
        &fd.riemann_up,
        1e-7,
    );
    let ricci: Vec<f64> = fd.ricci.iter().flatten().copied().collect();
    agree(
        &format!("{} ricci", m.name),
        bundle.ricci.components(),
        &ricci,
        1e-7,
    );
    assert!(
        (bundle.scalar_r - fd.r).abs() <= 1e-7 * fd.r.abs().max(1.0),
        "{}",
        m.name
    );
}

#[test]
fn pipeline_matches_finite_difference_curvature_on_catalog() {
    for entry in common::catalog() {
        for p in entry.metric.sample_points(3, 42) {
            compare_pipeline(&entry.metric, &p);
        }
    }
}

#[test]
fn unit_sphere_has_scalar_curvature_twelve() {
    let m = builtin("sphere4").unwrap().metric;
    for p in m.sample_points(5, 1) {
        let fd = fd_curvature(&m.clone(), &p.0);
        assert!((fd.r - 12.0).abs() < 1e-6, "oracle r = {}", fd.r);
        let r = CurvatureBundle::compute(&m, &p).unwrap().scalar_r;
        assert!((r - 12.0).abs() < 1e-7, "r = {r}");
    }
}

#[test]
fn sphere_sectional_curvature_sign_anchor() {
    // R(X,Y,Y,X) > 0 on the round sphere with the oracle's own contraction
    let m = builtin("sphere4(2)").unwrap().metric;
    let p = m.center();
    let fd = fd_curvature(&m, &p.0);
    let bundle = CurvatureBundle::compute(&m, &p).unwrap();
    let (x, y) = ([1.0, 0.3, 0.0, -0.2], [0.0, 1.0, 0.5, 0.1]);
    let mut num = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            for k in 0..4 {
                for l in 0..4 {
                    num += fd.riemann_down[64 * i + 16 * j + 4 * k + l] * x[i] * y[j] * y[k] * x[l];
                }
            }
        }
    }
    let g = |u: &[f64; 4], v: &[f64; 4]| -> f64 {
        (0..4)
            .flat_map(|i| (0..4).map(move |j| (i, j)))
            .map(|(i, j)| fd.g[i][j] * u[i] * v[j])
            .sum()
    };
    let k_oracle = num / (g(&x, &x) * g(&y, &y) - g(&x, &y).powi(2));
    assert!((k_oracle - 0.25).abs() < 1e-6, "{k_oracle}");
    let k = sectional_curvature(&bundle, &x, &y).unwrap();
    assert!((k - 0.25).abs() < 1e-10, "{k}");
}

#[test]
fn de_sitter_ricci_is_three_times_metric() {
    let m = builtin("de_sitter").unwrap().metric;
    for p in m.sample_points(5, 5) {
        let fd = fd_curvature(&m, &p.0);
        let bundle = CurvatureBundle::compute(&m, &p).unwrap();
        let s = bundle.ricci.as_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let target = 3.0 * fd.g[i][j];
                assert!((fd.ricci[i][j] - target).abs() < 1e-6 * target.abs().max(1.0));
                assert!((s[i][j] - target).abs() < 1e-8 * target.abs().max(1.0));
            }
        }
        assert!((bundle.scalar_r - 12.0).abs() < 1e-8);
    }
}

#[test]
fn fubini_study_is_einstein_with_r_twenty_four() {
    let m = builtin("fubini_study").unwrap().metric;
    for p in m.sample_points(5, 9) {
        let fd = fd_curvature(&m, &p.0);
        assert!((fd.r - 24.0).abs() < 1e-6, "oracle r = {}", fd.r);
        for i in 0..4 {
            for j in 0..4 {
                assert!((fd.ricci[i][j] - 6.0 * fd.g[i][j]).abs() < 1e-6);
            }
        }
    }
}

#[test]
fn schwarzschild_is_ricci_flat_but_not_conformally_flat() {
    let entry = builtin("schwarzschild").unwrap();
    let m = entry.metric;
    let p = Point([0.0, 4.0, 1.2, 0.7]);
    let fd = fd_curvature(&m, &p.0);
    assert!(max_abs(fd.ricci.iter().flatten().copied()) < 1e-6);
    assert!(max_abs(fd.riemann_down) > 0.01);
    let bundle = CurvatureBundle::compute(&m, &p).unwrap();
    assert!(bundle.ricci.max_abs() < 1e-8);
    let weyl = weyl_tensor(&m, &p).unwrap();
    assert!(weyl.max_abs() > 0.01, "{}", weyl.max_abs());
    // with vanishing Ricci the Weyl tensor is the whole curvature
    agree("weyl", weyl.components(), &fd.riemann_down, 1e-7);
    assert!(constant_curvature_residual(&m, &p).unwrap() > 0.01);
}

#[test]
fn flrw_linear_christoffel_values() {
    let m = builtin("flrw(1)").unwrap().metric;
    let p = Point([2.0, 0.1, 0.2, 0.3]);
    let g = christoffel(&m, &p).unwrap();
    let fd = common::fd_christoffel(&m, &p.0);
    assert!((g[0][1][1] - 2.0).abs() < 1e-12 && (fd[4 + 1] - 2.0).abs() < 1e-9);
    assert!((g[1][0][1] - 0.5).abs() < 1e-12 && (fd[16 + 1] - 0.5).abs() < 1e-9);
}

#[test]
fn nabla_riemann_matches_finite_differences() {
    for name in ["flrw(1)", "schwarzschild", "fubini_study"] {
        let m = builtin(name).unwrap().metric;
        let p = if name == "flrw(1)" {
            Point([1.0, 0.2, -0.1, 0.3])
        } else {
            m.center()
        };
        let bundle = CurvatureBundle::compute(&m, &p).unwrap();
        let oracle = fd_nabla_riemann(&m, &p.0);
        agree(
            &format!("{name} nabla R"),
            bundle.nabla_riemann().components(),
            &oracle,
            1e-5,
        );
        if name == "flrw(1)" {
            assert!(max_abs(oracle.iter().copied()) > 0.01);
            assert!(bundle.nabla_riemann().max_abs() > 0.01);
        }
    }
}

#[test]
fn locally_symmetric_spaces_have_parallel_curvature() {
    for name in ["sphere4", "de_sitter", "sphere4(3)"] {
        let m = builtin(name).unwrap().metric;
        for p in m.sample_points(5, 42) {
            let bundle = CurvatureBundle::compute(&m, &p).unwrap();
            let rel = bundle.nabla_riemann().max_abs() / bundle.riemann_0_4.max_abs();
            assert!(rel < 1e-8, "{name}: {rel:e}");
        }
    }
}

#[test]
fn rotating_structure_parallel_residual_matches_finite_differences() {
    let m = builtin("euclidean").unwrap().metric;
    let f = rotating_complex_structure();
    for x0 in [0.2, 0.7, -0.5] {
        let p = Point([x0, 0.1, -0.3, 0.4]);
        // flat chart: ∇F = ∂F
        let comp = |y: &[f64; 4]| -> [f64; 16] {
            std::array::from_fn(|n| f.component(n / 4, n % 4).eval(y).unwrap())
        };
        let oracle = (0..4)
            .map(|i| max_abs(common::fd6(&comp, &p.0, i, 1e-3)))
            .fold(0.0, f64::max);
        let report = kahler_audit(&m, &f, &p, 1e-8).unwrap();
        assert!((report.res_parallel - oracle).abs() < 1e-9);
        assert!(report.res_parallel > 0.1);
    }
}
