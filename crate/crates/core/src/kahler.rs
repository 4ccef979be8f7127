//! Kähler structure audit: `F² = -I`, `g(F·,F·) = g`, `∇F = 0`, and the
//! induced invariance `S(F·,F·) = S`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::geometry::{
    covariant_derivative_from_parts, CurvatureBundle, ExprField, MetricStructure, TensorField,
};
use crate::jet::Point;
use crate::tensor::Variance;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// A (1,1) tensor field `F^i_j`; `F(e_j) = F^i_j e_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStructure {
    field: ExprField,
}

impl ComplexStructure {
    /// `components[i][j]` is `F^i_j`.
    pub fn new(components: [[ScalarExpr; 4]; 4]) -> Self {
        let flat = components.into_iter().flatten().collect();
        ComplexStructure {
            field: ExprField::new(vec![Variance::Upper, Variance::Lower], flat)
                .expect("16 components"),
        }
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.field.components[4 * i + j]
    }

    pub fn field(&self) -> &ExprField {
        &self.field
    }

    pub fn at(&self, p: &Point) -> Result<[[f64; 4]; 4]> {
        let mut out = [[0.0; 4]; 4];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.component(i, j).eval(&p.0)?;
            }
        }
        Ok(out)
    }

    pub fn trace(&self, p: &Point) -> Result<f64> {
        let f = self.at(p)?;
        Ok((0..4).map(|i| f[i][i]).sum())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KahlerReport {
    pub res_almost_complex: f64,
    pub res_hermitian: f64,
    pub res_parallel: f64,
    pub res_ricci_invariance: f64,
    pub tolerance: f64,
    pub almost_complex: bool,
    pub hermitian: bool,
    pub parallel: bool,
    pub ricci_invariance: bool,
}

impl KahlerReport {
    pub fn passes(&self) -> bool {
        self.almost_complex && self.hermitian && self.parallel && self.ricci_invariance
    }
}

fn conjugate(f: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    // (F^T B F)_ij = F^a_i B_ab F^b_j
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let mut s = 0.0;
            for a in 0..4 {
                for c in 0..4 {
                    s += f[a][i] * b[a][c] * f[c][j];
                }
            }
            s
        })
    })
}

fn max_abs_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

pub fn kahler_audit(
    m: &MetricStructure,
    f: &ComplexStructure,
    p: &Point,
    tol: f64,
) -> Result<KahlerReport> {
    let bundle = CurvatureBundle::compute(m, p)?;
    kahler_audit_bundle(&bundle, m, f, tol)
}

/// Kähler audit reusing curvature already computed at `bundle.point`.
pub fn kahler_audit_bundle(
    bundle: &CurvatureBundle,
    m: &MetricStructure,
    f: &ComplexStructure,
    tol: f64,
) -> Result<KahlerReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let p = &bundle.point;
    let fm = f.at(p)?;

    let mut res_almost_complex = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let sq: f64 = (0..4).map(|k| fm[i][k] * fm[k][j]).sum();
            let id = if i == j { 1.0 } else { 0.0 };
            res_almost_complex = res_almost_complex.max((sq + id).abs());
        }
    }

    let g = bundle.metric.g;
    let res_hermitian = max_abs_diff(&conjugate(&fm, &g), &g);

    let s = bundle.ricci.as_matrix().expect("rank 2");
    let res_ricci_invariance = max_abs_diff(&conjugate(&fm, &s), &s);

    let (value, partials) = f.field().value_and_partials(m, p)?;
    let res_parallel = covariant_derivative_from_parts(&value, &partials, &bundle.gamma)?.max_abs();

    Ok(KahlerReport {
        res_almost_complex,
        res_hermitian,
        res_parallel,
        res_ricci_invariance,
        tolerance: tol,
        almost_complex: res_almost_complex < tol,
        hermitian: res_hermitian < tol,
        parallel: res_parallel < tol,
        ricci_invariance: res_ricci_invariance < tol,
    })
}
