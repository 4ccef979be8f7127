//! Weyl tensor, constant-curvature reduction, sectional curvatures adapted
//! to a timelike velocity, and the spatial-isotropy fit.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{orthonormal_frame, sectional_curvature, CurvatureBundle, MetricStructure};
use crate::jet::Point;
use crate::tensor::{Tensor4, Variance};

const LOWER4: [Variance; 4] = [Variance::Lower; 4];

/// `G(X,Y,Z,T) = g(Y,Z)g(X,T) - g(X,Z)g(Y,T)`
fn gg(g: &[[f64; 4]; 4], x: usize, y: usize, z: usize, t: usize) -> f64 {
    g[y][z] * g[x][t] - g[x][z] * g[y][t]
}

/// The three pieces of the curvature in dimension 4: `R = C + ricci_part + scalar_part`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylDecomposition {
    pub weyl: Tensor4,
    /// `½[S(Y,Z)g(X,T) - S(X,Z)g(Y,T) + S(X,T)g(Y,Z) - S(Y,T)g(X,Z)]`
    pub ricci_part: Tensor4,
    /// `-(r/6)[g(Y,Z)g(X,T) - g(X,Z)g(Y,T)]`
    pub scalar_part: Tensor4,
}

pub fn weyl_decomposition(bundle: &CurvatureBundle) -> WeylDecomposition {
    let g = &bundle.metric.g;
    let s = bundle.ricci.as_matrix().expect("rank 2");
    let r = bundle.scalar_r;
    let ricci_part = Tensor4::from_fn(&LOWER4, |i| {
        let (x, y, z, t) = (i[0], i[1], i[2], i[3]);
        0.5 * (s[y][z] * g[x][t] - s[x][z] * g[y][t] + s[x][t] * g[y][z] - s[y][t] * g[x][z])
    })
    .expect("rank 4");
    let scalar_part =
        Tensor4::from_fn(&LOWER4, |i| -(r / 6.0) * gg(g, i[0], i[1], i[2], i[3])).expect("rank 4");
    let weyl = bundle
        .riemann_0_4
        .sub(&ricci_part)
        .and_then(|t| t.sub(&scalar_part))
        .expect("same variance");
    WeylDecomposition {
        weyl,
        ricci_part,
        scalar_part,
    }
}

/// Weyl conformal curvature in dimension 4.
pub fn weyl_tensor(m: &MetricStructure, p: &Point) -> Result<Tensor4> {
    Ok(weyl_decomposition(&CurvatureBundle::compute(m, p)?).weyl)
}

pub fn constant_curvature_residual_bundle(bundle: &CurvatureBundle) -> f64 {
    let g = &bundle.metric.g;
    let a = bundle.scalar_r / 12.0;
    let r = bundle.riemann_0_4.components();
    let mut worst = 0.0f64;
    for x in 0..4 {
        for y in 0..4 {
            for z in 0..4 {
                for t in 0..4 {
                    let v = r[64 * x + 16 * y + 4 * z + t] - a * gg(g, x, y, z, t);
                    worst = worst.max(v.abs());
                }
            }
        }
    }
    worst
}

/// `max |R - (r/12)(g∧g)|`.
pub fn constant_curvature_residual(m: &MetricStructure, p: &Point) -> Result<f64> {
    Ok(constant_curvature_residual_bundle(
        &CurvatureBundle::compute(m, p)?,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionalCheck {
    /// `K(e1,e2)`, `K(e1,e3)`, `K(e2,e3)`
    pub k_spatial: [f64; 3],
    /// `K(e_a, ρ)` for `a = 1, 2, 3`
    pub k_timelike: [f64; 3],
    pub target: f64,
}

impl SectionalCheck {
    pub fn max_deviation(&self) -> f64 {
        self.k_spatial
            .iter()
            .chain(&self.k_timelike)
            .fold(0.0f64, |m, k| m.max((k - self.target).abs()))
    }
}

pub fn sectional_theorem_check_bundle(
    bundle: &CurvatureBundle,
    rho: &[f64; 4],
) -> Result<SectionalCheck> {
    let frame = orthonormal_frame(&bundle.metric, rho)?;
    let e = &frame.vectors;
    let mut k_spatial = [0.0; 3];
    for (slot, (a, b)) in [(1, 2), (1, 3), (2, 3)].into_iter().enumerate() {
        k_spatial[slot] = sectional_curvature(bundle, &e[a], &e[b])?;
    }
    let mut k_timelike = [0.0; 3];
    for a in 1..4 {
        k_timelike[a - 1] = sectional_curvature(bundle, &e[a], rho)?;
    }
    Ok(SectionalCheck {
        k_spatial,
        k_timelike,
        target: bundle.scalar_r / 12.0,
    })
}

/// Sectional curvatures of the spatial planes and the planes containing `rho`.
pub fn sectional_theorem_check(
    m: &MetricStructure,
    p: &Point,
    rho: &[f64; 4],
) -> Result<SectionalCheck> {
    sectional_theorem_check_bundle(&CurvatureBundle::compute(m, p)?, rho)
}

/// Least-squares scalars for spatial isotropy relative to a velocity:
/// `R(X,Y,Z,T) ≈ a·[g(Y,Z)g(X,T) - g(X,Z)g(Y,T)]` and `R(X,ρ,ρ,Y) ≈ b·g(X,Y)`
/// for `X,Y,Z,T` in the spatial frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsotropyFit {
    pub a: f64,
    pub b: f64,
    pub res_a: f64,
    pub res_b: f64,
}

/// Minimizes `sum (y - c x)^2` over `c`; returns `(c, max |y - c x|)`.
fn one_parameter_fit(pairs: &[(f64, f64)]) -> (f64, f64) {
    let (sxy, sxx) = pairs
        .iter()
        .fold((0.0, 0.0), |(sxy, sxx), (x, y)| (sxy + x * y, sxx + x * x));
    let c = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let res = pairs
        .iter()
        .fold(0.0f64, |m, (x, y)| m.max((y - c * x).abs()));
    (c, res)
}

pub fn isotropy_fit_bundle(bundle: &CurvatureBundle, rho: &[f64; 4]) -> Result<IsotropyFit> {
    let frame = orthonormal_frame(&bundle.metric, rho)?;
    let e = &frame.vectors;
    let g = &bundle.metric;
    let spatial = 1..4;

    let mut pairs_a = Vec::with_capacity(81);
    for x in spatial.clone() {
        for y in spatial.clone() {
            for z in spatial.clone() {
                for t in spatial.clone() {
                    let model = g.inner(&e[y], &e[z]) * g.inner(&e[x], &e[t])
                        - g.inner(&e[x], &e[z]) * g.inner(&e[y], &e[t]);
                    pairs_a.push((model, bundle.riemann_on(&e[x], &e[y], &e[z], &e[t])));
                }
            }
        }
    }
    let mut pairs_b = Vec::with_capacity(9);
    for x in spatial.clone() {
        for y in spatial.clone() {
            pairs_b.push((
                g.inner(&e[x], &e[y]),
                bundle.riemann_on(&e[x], &e[0], &e[0], &e[y]),
            ));
        }
    }
    let (a, res_a) = one_parameter_fit(&pairs_a);
    let (b, res_b) = one_parameter_fit(&pairs_b);
    Ok(IsotropyFit { a, b, res_a, res_b })
}

pub fn isotropy_fit(m: &MetricStructure, p: &Point, rho: &[f64; 4]) -> Result<IsotropyFit> {
    isotropy_fit_bundle(&CurvatureBundle::compute(m, p)?, rho)
}
