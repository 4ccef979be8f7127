//! Independent reference computations: finite differences of plain expression
//! values, Gauss-Jordan elimination and Jacobi eigenvalues. Curvature bundles
//! are only read as inputs; nothing here uses jets or the SVD.

#![allow(dead_code)]

use kahler_core::catalog::{builtin, CatalogEntry, BUILTINS};
use kahler_core::geometry::CurvatureBundle;
use kahler_core::{eval_jet3, MetricStructure, Point, ScalarExpr};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type M4 = [[f64; 4]; 4];

pub fn catalog() -> Vec<CatalogEntry> {
    BUILTINS
        .iter()
        .map(|(name, _)| builtin(name).unwrap())
        .collect()
}

pub fn shifted(x: &[f64; 4], i: usize, h: f64) -> [f64; 4] {
    let mut y = *x;
    y[i] += h;
    y
}

/// Sixth-order central difference of a vector-valued function along axis `i`.
pub fn fd6<const N: usize>(
    f: &dyn Fn(&[f64; 4]) -> [f64; N],
    x: &[f64; 4],
    i: usize,
    h: f64,
) -> [f64; N] {
    const W: [(f64, f64); 6] = [
        (-3.0, -1.0),
        (-2.0, 9.0),
        (-1.0, -45.0),
        (1.0, 45.0),
        (2.0, -9.0),
        (3.0, 1.0),
    ];
    let mut out = [0.0; N];
    for (s, w) in W {
        let v = f(&shifted(x, i, s * h));
        for k in 0..N {
            out[k] += w * v[k];
        }
    }
    out.map(|v| v / (60.0 * h))
}

pub fn metric_values(m: &MetricStructure, x: &[f64; 4]) -> M4 {
    std::array::from_fn(|i| std::array::from_fn(|j| m.component(i, j).eval(x).unwrap()))
}

/// Inverse by Gauss-Jordan with partial pivoting.
pub fn invert4(a: &M4) -> M4 {
    let mut m = [[0.0; 8]; 4];
    for i in 0..4 {
        m[i][..4].copy_from_slice(&a[i]);
        m[i][4 + i] = 1.0;
    }
    for col in 0..4 {
        let pivot = (col..4)
            .max_by(|&r, &s| m[r][col].abs().total_cmp(&m[s][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        let d = m[col][col];
        assert!(d.abs() > 1e-14, "singular matrix");
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..4 {
            if r != col {
                let f = m[r][col];
                for c in 0..8 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    std::array::from_fn(|i| std::array::from_fn(|j| m[i][4 + j]))
}

const H_METRIC: f64 = 1e-3;

/// `Γ^k_ij` as a flat array `[16k + 4i + j]`.
pub fn fd_christoffel(m: &MetricStructure, x: &[f64; 4]) -> [f64; 64] {
    let g = metric_values(m, x);
    let gi = invert4(&g);
    let flat = |y: &[f64; 4]| -> [f64; 16] {
        let g = metric_values(m, y);
        std::array::from_fn(|n| g[n / 4][n % 4])
    };
    let dg: [[f64; 16]; 4] = std::array::from_fn(|i| fd6(&flat, x, i, H_METRIC));
    let d = |c: usize, a: usize, b: usize| dg[c][4 * a + b];
    std::array::from_fn(|n| {
        let (k, i, j) = (n / 16, (n / 4) % 4, n % 4);
        (0..4)
            .map(|l| 0.5 * gi[k][l] * (d(i, j, l) + d(j, i, l) - d(l, i, j)))
            .sum()
    })
}

pub struct FdCurvature {
    pub g: M4,
    pub g_inv: M4,
    pub gamma: [f64; 64],
    /// `R^l_ijk` at `[64l + 16i + 4j + k]`
    pub riemann_up: [f64; 256],
    /// `R_ijkl = g_lm R^m_ijk` at `[64i + 16j + 4k + l]`
    pub riemann_down: [f64; 256],
    /// `S_jk = R^l_ljk`
    pub ricci: M4,
    pub r: f64,
}

pub fn fd_curvature(m: &MetricStructure, x: &[f64; 4]) -> FdCurvature {
    let g = metric_values(m, x);
    let g_inv = invert4(&g);
    let gamma = fd_christoffel(m, x);
    let gam = |k: usize, i: usize, j: usize| gamma[16 * k + 4 * i + j];
    let christoffel = |y: &[f64; 4]| fd_christoffel(m, y);
    let dgamma: [[f64; 64]; 4] = std::array::from_fn(|i| fd6(&christoffel, x, i, H_METRIC));
    let dgam = |n: usize, k: usize, i: usize, j: usize| dgamma[n][16 * k + 4 * i + j];
    let riemann_up: [f64; 256] = std::array::from_fn(|n| {
        let (l, i, j, k) = (n / 64, (n / 16) % 4, (n / 4) % 4, n % 4);
        let mut v = dgam(i, l, j, k) - dgam(j, l, i, k);
        for s in 0..4 {
            v += gam(l, i, s) * gam(s, j, k) - gam(l, j, s) * gam(s, i, k);
        }
        v
    });
    let riemann_down: [f64; 256] = std::array::from_fn(|n| {
        let (i, j, k, l) = (n / 64, (n / 16) % 4, (n / 4) % 4, n % 4);
        (0..4)
            .map(|s| g[l][s] * riemann_up[64 * s + 16 * i + 4 * j + k])
            .sum()
    });
    let ricci: M4 = std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            (0..4)
                .map(|l| riemann_up[64 * l + 16 * l + 4 * j + k])
                .sum()
        })
    });
    let r = (0..4)
        .flat_map(|a| (0..4).map(move |b| (a, b)))
        .map(|(a, b)| g_inv[a][b] * ricci[a][b])
        .sum();
    FdCurvature {
        g,
        g_inv,
        gamma,
        riemann_up,
        riemann_down,
        ricci,
        r,
    }
}

/// `(∇_m R)_ijkl` at `[256m + 64i + 16j + 4k + l]`, differentiating the
/// finite-difference curvature once more.
pub fn fd_nabla_riemann(m: &MetricStructure, x: &[f64; 4]) -> Vec<f64> {
    let here = fd_curvature(m, x);
    let down = |y: &[f64; 4]| fd_curvature(m, y).riemann_down;
    let d: [[f64; 256]; 4] = std::array::from_fn(|i| fd6(&down, x, i, 1e-2));
    let gam = |k: usize, i: usize, j: usize| here.gamma[16 * k + 4 * i + j];
    let r = |i: usize, j: usize, k: usize, l: usize| here.riemann_down[64 * i + 16 * j + 4 * k + l];
    let mut out = vec![0.0; 1024];
    for n in 0..1024 {
        let (mm, i, j, k, l) = (n / 256, (n / 64) % 4, (n / 16) % 4, (n / 4) % 4, n % 4);
        let mut v = d[mm][64 * i + 16 * j + 4 * k + l];
        for s in 0..4 {
            v -= gam(s, mm, i) * r(s, j, k, l)
                + gam(s, mm, j) * r(i, s, k, l)
                + gam(s, mm, k) * r(i, j, s, l)
                + gam(s, mm, l) * r(i, j, k, s);
        }
        out[n] = v;
    }
    out
}

pub fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// Solves `a x = b` by Gauss-Jordan with partial pivoting; `None` if a pivot
/// falls below `1e-12` times the largest entry.
pub fn gauss_jordan(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i][i] * a[i][i]).sum();
        if off <= 1e-32 * diag.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    eig.sort_by(f64::total_cmp);
    eig
}

/// `MᵀM` and `Mᵀb` of a row-generated system.
pub fn normal_equations(rows: &[(Vec<f64>, f64)]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = rows[0].0.len();
    let mut ata = vec![vec![0.0; n]; n];
    let mut atb = vec![0.0; n];
    for (row, rhs) in rows {
        for i in 0..n {
            atb[i] += row[i] * rhs;
            for j in 0..n {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    (ata, atb)
}

/// Random expression text that stays inside every function's domain on
/// `[-1, 1]^4`.
pub fn random_expr(rng: &mut ChaCha8Rng, depth: usize) -> String {
    if depth == 0 || rng.random_bool(0.15) {
        return if rng.random_bool(0.75) {
            format!("x{}", rng.random_range(0..4))
        } else {
            format!("{:.3}", rng.random_range(0.5..2.0))
        };
    }
    let choice = rng.random_range(0..13);
    let mut sub = || random_expr(rng, depth - 1);
    match choice {
        0 => format!("({} + {})", sub(), sub()),
        1 => format!("({} - {})", sub(), sub()),
        2 | 3 => format!("({} * {})", sub(), sub()),
        4 => format!("({} / (1.5 + sin({})))", sub(), sub()),
        5 => format!("exp(0.5 * {})", sub()),
        6 => format!("sin({})", sub()),
        7 => format!("cos({})", sub()),
        8 => format!("(sinh(0.5 * {}) + cosh(0.5 * {}))", sub(), sub()),
        9 => format!("sqrt(1 + {}^2)", sub()),
        10 => format!("ln(1.5 + cos({}))", sub()),
        11 => format!("(1.2 + sin({}))^2.5", sub()),
        _ => format!("(1 + {}^2)^-1.5", sub()),
    }
}

/// Nested fourth-order central differences along `dirs`.
pub fn fd_nested(e: &ScalarExpr, x: &[f64; 4], dirs: &[usize], h: f64) -> f64 {
    match dirs.split_first() {
        None => e.eval(x).unwrap(),
        Some((&i, rest)) => {
            let at = |s: f64| fd_nested(e, &shifted(x, i, s * h), rest, h);
            (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h)
        }
    }
}

pub type Rows = Vec<(Vec<f64>, f64)>;

fn unit_row(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

fn add_scaled(row: &mut [f64], v: &[f64], c: f64) {
    for (r, x) in row.iter_mut().zip(v) {
        *r += c * x;
    }
}

/// Equations `∇R(X,Y,Z,U,V) = A(X)R(Y,Z,U,V) + ω(Y)R(X,Z,U,V) + ω(Z)R(Y,X,U,V)
/// + ω(U)R(Y,Z,X,V) + ω(V)R(Y,Z,U,X)` over coordinate tuples.
pub fn symmetry_rows(b: &CurvatureBundle) -> Rows {
    let r = |i, j, k, l| b.riemann_0_4.get(&[i, j, k, l]);
    let a = |i| unit_row(8, i);
    let w = |i| unit_row(8, 4 + i);
    let mut rows = Vec::new();
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                for u in 0..4 {
                    for v in 0..4 {
                        let mut row = vec![0.0; 8];
                        add_scaled(&mut row, &a(x), r(y, z, u, v));
                        add_scaled(&mut row, &w(y), r(x, z, u, v));
                        add_scaled(&mut row, &w(z), r(y, x, u, v));
                        add_scaled(&mut row, &w(u), r(y, z, x, v));
                        add_scaled(&mut row, &w(v), r(y, z, u, x));
                        rows.push((row, b.nabla_riemann().get(&[x, y, z, u, v])));
                    }
                }
            }
        }
    }
    rows
}

pub fn ricci_rows(b: &CurvatureBundle) -> Rows {
    let s = b.ricci.as_matrix().unwrap();
    let ns = b.nabla_ricci_contracted();
    let mut rows = Vec::new();
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                let mut row = vec![0.0; 8];
                row[x] += s[y][z];
                row[4 + y] += s[x][z];
                row[4 + z] += s[y][x];
                rows.push((row, ns.get(&[x, y, z])));
            }
        }
    }
    rows
}

/// Least-squares solution through the normal equations, or the zero vector
/// when every coefficient is below `1e-10 * reference`.
pub fn oracle_solve(rows: &Rows, reference: f64) -> Option<Vec<f64>> {
    if rows
        .iter()
        .all(|(r, _)| r.iter().all(|v| v.abs() <= 1e-10 * reference))
    {
        return Some(vec![0.0; 8]);
    }
    let (ata, atb) = normal_equations(rows);
    gauss_jordan(ata, atb)
}

pub fn oracle_residual(rows: &Rows, x: &[f64]) -> f64 {
    max_abs(
        rows.iter()
            .map(|(r, b)| r.iter().zip(x).map(|(a, c)| a * c).sum::<f64>() - b),
    )
}

fn rel_err(jet: &[f64], oracle: &[f64]) -> f64 {
    let scale = max_abs(jet.iter().copied()).max(1.0);
    max_abs(jet.iter().zip(oracle).map(|(a, b)| a - b)) / scale
}

pub struct JetErrors {
    pub grad: f64,
    pub hess: f64,
    pub third: f64,
}

/// Worst relative errors of a jet against nested differences: the gradient
/// at two step sizes, the Hessian and third derivatives at `1e-3`.
pub fn jet_errors(e: &ScalarExpr, x: &[f64; 4]) -> JetErrors {
    let jet = eval_jet3(e, &Point(*x)).unwrap();
    let mut jg = Vec::new();
    let mut og_fine = Vec::new();
    let mut og_coarse = Vec::new();
    for i in 0..4 {
        jg.push(jet.d1(i));
        og_fine.push(fd_nested(e, x, &[i], 1e-4));
        og_coarse.push(fd_nested(e, x, &[i], 1e-3));
    }
    let (mut jh, mut oh, mut jt, mut ot) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for i in 0..4 {
        for j in 0..4 {
            jh.push(jet.d2(i, j));
            oh.push(fd_nested(e, x, &[i, j], 1e-3));
            for k in 0..4 {
                jt.push(jet.d3(i, j, k));
                ot.push(fd_nested(e, x, &[i, j, k], 1e-3));
            }
        }
    }
    JetErrors {
        grad: rel_err(&jg, &og_fine).max(rel_err(&jg, &og_coarse)),
        hess: rel_err(&jh, &oh),
        third: rel_err(&jt, &ot),
    }
}
