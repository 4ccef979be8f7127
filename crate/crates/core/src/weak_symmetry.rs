//! Recovery of the 1-forms `A` and `ω` for which
//!
//! ```text
//! (∇_X R)(Y,Z,U,V) = A(X)R(Y,Z,U,V) + ω(Y)R(X,Z,U,V) + ω(Z)R(Y,X,U,V)
//!                    + ω(U)R(Y,Z,X,V) + ω(V)R(Y,Z,U,X)
//! (∇_X S)(Y,Z)     = A(X)S(Y,Z) + ω(Y)S(X,Z) + ω(Z)S(Y,X)
//! ```
//!
//! hold best in the least-squares sense over all coordinate basis tuples,
//! plus the diagnostics that follow from them.
//!
//! Unknowns are ordered `[A_0..A_3, ω_0..ω_3]`; equation rows follow the
//! row-major order of the tuple `(X, Y, ...)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::Result;
use crate::geometry::{orthonormal_frame, CurvatureBundle, MetricStructure};
use crate::jet::Point;
use crate::tensor::{MetricAtPoint, Tensor4};

/// Singular values below this fraction of the reference scale are treated as zero.
pub const RANK_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakSymmetrySolution {
    #[serde(rename = "A")]
    pub a: [f64; 4],
    pub omega: [f64; 4],
    pub residual: f64,
    pub system_rank: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakRicciSolution {
    #[serde(rename = "A")]
    pub a: [f64; 4],
    pub omega: [f64; 4],
    pub residual: f64,
    pub system_rank: usize,
    /// Smallest singular value of the coefficient matrix built from `S`.
    pub sigma_min: f64,
}

/// A linear system `M x ≈ b` with its minimum-norm least-squares solution.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub solution: DVector<f64>,
    pub rank: usize,
    pub residual: f64,
    pub singular_values: DVector<f64>,
}

/// Minimum-norm least squares through the SVD.
pub fn min_norm_least_squares(matrix: &DMatrix<f64>, rhs: &DVector<f64>) -> LeastSquares {
    min_norm_least_squares_scaled(matrix, rhs, 0.0)
}

/// As [`min_norm_least_squares`], with singular values below
/// `RANK_RTOL * max(largest, reference)` dropped.
pub fn min_norm_least_squares_scaled(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    reference: f64,
) -> LeastSquares {
    let svd = matrix.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let largest = svd.singular_values.iter().fold(0.0f64, |m, s| m.max(*s));
    let cutoff = largest.max(reference) * RANK_RTOL;
    let mut solution = DVector::zeros(matrix.ncols());
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            let coef = u.column(i).dot(rhs) / s;
            solution += v_t.row(i).transpose() * coef;
        }
    }
    let residual = (matrix * &solution - rhs).amax();
    LeastSquares {
        solution,
        rank,
        residual,
        singular_values: svd.singular_values,
    }
}

pub fn smallest_singular_value(matrix: &DMatrix<f64>) -> f64 {
    matrix
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, s| m.min(*s))
}

/// The 1024×8 system from the curvature and its covariant derivative.
pub fn weak_symmetry_system(bundle: &CurvatureBundle) -> (DMatrix<f64>, DVector<f64>) {
    let r = &bundle.riemann_0_4;
    let nabla = bundle.nabla_riemann();
    let mut matrix = DMatrix::zeros(1024, 8);
    let mut rhs = DVector::zeros(1024);
    let mut row = 0;
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                for u in 0..4 {
                    for v in 0..4 {
                        rhs[row] = nabla.get(&[x, y, z, u, v]);
                        matrix[(row, x)] += r.get(&[y, z, u, v]);
                        matrix[(row, 4 + y)] += r.get(&[x, z, u, v]);
                        matrix[(row, 4 + z)] += r.get(&[y, x, u, v]);
                        matrix[(row, 4 + u)] += r.get(&[y, z, x, v]);
                        matrix[(row, 4 + v)] += r.get(&[y, z, u, x]);
                        row += 1;
                    }
                }
            }
        }
    }
    (matrix, rhs)
}

/// The 64×8 system from a symmetric (0,2) tensor `s` and a (0,3) tensor
/// `nabla_s` (direction slot first).
pub fn weak_ricci_system(s: &Tensor4, nabla_s: &Tensor4) -> (DMatrix<f64>, DVector<f64>) {
    let mut matrix = DMatrix::zeros(64, 8);
    let mut rhs = DVector::zeros(64);
    let mut row = 0;
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                rhs[row] = nabla_s.get(&[x, y, z]);
                matrix[(row, x)] += s.get(&[y, z]);
                matrix[(row, 4 + y)] += s.get(&[x, z]);
                matrix[(row, 4 + z)] += s.get(&[y, x]);
                row += 1;
            }
        }
    }
    (matrix, rhs)
}

fn split(solution: &DVector<f64>) -> ([f64; 4], [f64; 4]) {
    (
        std::array::from_fn(|i| solution[i]),
        std::array::from_fn(|i| solution[4 + i]),
    )
}

pub fn solve_weak_symmetry_bundle(bundle: &CurvatureBundle) -> WeakSymmetrySolution {
    let (matrix, rhs) = weak_symmetry_system(bundle);
    let ls = min_norm_least_squares_scaled(&matrix, &rhs, bundle.riemann_0_4.max_abs());
    let (a, omega) = split(&ls.solution);
    WeakSymmetrySolution {
        a,
        omega,
        residual: ls.residual,
        system_rank: ls.rank,
    }
}

pub fn solve_weak_symmetry(m: &MetricStructure, p: &Point) -> Result<WeakSymmetrySolution> {
    Ok(solve_weak_symmetry_bundle(&CurvatureBundle::compute(m, p)?))
}

/// Ricci components at round-off level relative to the full curvature count
/// as zero.
pub fn solve_weak_ricci_bundle(bundle: &CurvatureBundle) -> WeakRicciSolution {
    let (matrix, rhs) = weak_ricci_system(&bundle.ricci, &bundle.nabla_ricci_direct());
    let ls = min_norm_least_squares_scaled(&matrix, &rhs, bundle.riemann_0_4.max_abs());
    let (a, omega) = split(&ls.solution);
    let sigma_min = ls
        .singular_values
        .iter()
        .fold(f64::INFINITY, |m, s| m.min(*s));
    WeakRicciSolution {
        a,
        omega,
        residual: ls.residual,
        system_rank: ls.rank,
        sigma_min,
    }
}

pub fn solve_weak_ricci(m: &MetricStructure, p: &Point) -> Result<WeakRicciSolution> {
    Ok(solve_weak_ricci_bundle(&CurvatureBundle::compute(m, p)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RicciEigenResidual {
    pub res_half_r: f64,
    pub res_quarter_r: f64,
}

/// Deviation of `ρ` from being a Ricci eigenvector with eigenvalue `r/2`
/// and `r/4`, measured on the pseudo-orthonormal frame adapted to `ρ`.
pub fn ricci_eigen_residual_bundle(
    bundle: &CurvatureBundle,
    rho: &[f64; 4],
) -> Result<RicciEigenResidual> {
    let frame = orthonormal_frame(&bundle.metric, rho)?;
    let r = bundle.scalar_r;
    let mut half = 0.0f64;
    let mut quarter = 0.0f64;
    for y in &frame.vectors {
        let s = bundle.ricci_on(y, rho);
        let g = bundle.metric.inner(y, rho);
        half = half.max((s - 0.5 * r * g).abs());
        quarter = quarter.max((s - 0.25 * r * g).abs());
    }
    Ok(RicciEigenResidual {
        res_half_r: half,
        res_quarter_r: quarter,
    })
}

pub fn ricci_eigen_residual(
    m: &MetricStructure,
    p: &Point,
    rho: &[f64; 4],
) -> Result<RicciEigenResidual> {
    ricci_eigen_residual_bundle(&CurvatureBundle::compute(m, p)?, rho)
}

/// `|r (g(α,ρ) - 4)|` with `α`, `ρ` the raised `A`, `ω` of the solution.
pub fn alpha_rho_relation_bundle(bundle: &CurvatureBundle, solution: &WeakSymmetrySolution) -> f64 {
    let alpha = bundle.metric.raise(&solution.a);
    let rho = bundle.metric.raise(&solution.omega);
    (bundle.scalar_r * (bundle.metric.inner(&alpha, &rho) - 4.0)).abs()
}

pub fn alpha_rho_relation(
    m: &MetricStructure,
    p: &Point,
    solution: &WeakSymmetrySolution,
) -> Result<f64> {
    Ok(alpha_rho_relation_bundle(
        &CurvatureBundle::compute(m, p)?,
        solution,
    ))
}

/// The 64×8 homogeneous system `A(X)g(Y,Z) + ω(Y)g(Z,X) + ω(Z)g(X,Y) = 0`.
pub fn metric_constraint_system(metric: &MetricAtPoint) -> DMatrix<f64> {
    let g = &metric.g;
    let mut matrix = DMatrix::zeros(64, 8);
    let mut row = 0;
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                matrix[(row, x)] += g[y][z];
                matrix[(row, 4 + y)] += g[z][x];
                matrix[(row, 4 + z)] += g[x][y];
                row += 1;
            }
        }
    }
    matrix
}

/// Smallest singular value of the metric constraint system; positive means
/// only `A = ω = 0` solves it.
pub fn wrs_nonexistence_check_metric(metric: &MetricAtPoint) -> f64 {
    smallest_singular_value(&metric_constraint_system(metric))
}

pub fn wrs_nonexistence_check(m: &MetricStructure, p: &Point) -> Result<f64> {
    Ok(wrs_nonexistence_check_metric(&m.metric_at(p)?))
}

/// `(div R)(Y,Z)U = g^{ab} (∇_a R)(Y,Z,U,b)` at `[Y,Z,U]`.
pub fn divergence_riemann(bundle: &CurvatureBundle) -> Tensor4 {
    let nr = bundle.nabla_riemann();
    let gi = &bundle.metric.g_inv;
    Tensor4::from_fn(&[crate::tensor::Variance::Lower; 3], |i| {
        let mut s = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                s += gi[a][b] * nr.get(&[a, i[0], i[1], i[2], b]);
            }
        }
        s
    })
    .expect("rank 3")
}
