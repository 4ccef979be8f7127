//! Perfect-fluid Einstein equation with cosmological constant and the
//! quantities derived from it: inflation condition, Einstein-manifold
//! reduction, pressure relation, energy equation, expansion and acceleration.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::geometry::{
    covariant_derivative_from_parts, CurvatureBundle, ExprField, MetricStructure, TensorField,
};
use crate::jet::{eval_jet3, Point};
use crate::kahler::{kahler_audit_bundle, ComplexStructure};
use crate::tensor::{Tensor4, Variance};

/// Allowed deviation of `g(ρ,ρ)` from -1 before the fluid is rejected.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub sigma: ScalarExpr,
    pub pressure: ScalarExpr,
    pub lambda: f64,
    pub k: f64,
    /// Contravariant velocity components `ρ^i`.
    pub rho: [ScalarExpr; 4],
}

impl FluidState {
    pub fn new(
        sigma: ScalarExpr,
        pressure: ScalarExpr,
        rho: [ScalarExpr; 4],
        lambda: f64,
        k: f64,
    ) -> Result<Self> {
        if k == 0.0 || !k.is_finite() {
            return Err(Error::Domain(format!(
                "gravitational constant must be finite and non-zero, got {k}"
            )));
        }
        if !lambda.is_finite() {
            return Err(Error::Domain(format!(
                "cosmological constant must be finite, got {lambda}"
            )));
        }
        Ok(FluidState {
            sigma,
            pressure,
            lambda,
            k,
            rho,
        })
    }

    /// σ = p = 0 at rest along `rho`.
    pub fn vacuum(rho: [ScalarExpr; 4], lambda: f64) -> Self {
        FluidState {
            sigma: ScalarExpr::zero(),
            pressure: ScalarExpr::zero(),
            lambda,
            k: 1.0,
            rho,
        }
    }

    pub fn velocity_at(&self, p: &Point) -> Result<[f64; 4]> {
        let mut v = [0.0; 4];
        for (out, e) in v.iter_mut().zip(&self.rho) {
            *out = e.eval(&p.0)?;
        }
        Ok(v)
    }

    fn velocity_field(&self) -> ExprField {
        ExprField::new(vec![Variance::Upper], self.rho.to_vec()).expect("4 components")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluidReport {
    pub res_einstein: f64,
    pub res_inflation: f64,
    pub res_pressure_relation: f64,
    pub res_einstein_manifold: f64,
    pub res_energy_eq: f64,
    pub expansion: f64,
    pub acceleration_norm: f64,
    #[serde(rename = "res_T")]
    pub res_t: f64,
    /// `max |k(σ+p)[ω(FX)ω(FY) - ω(X)ω(Y)]|` over basis pairs, when F is given.
    pub res_inflation_split: Option<f64>,
    /// Whether the Kähler audit passed at this point, when F is given.
    pub kahler_pass: Option<bool>,
    pub rho_norm: f64,
    pub sigma: f64,
    pub pressure: f64,
}

/// Fluid quantities evaluated at one point.
struct FluidAtPoint {
    sigma: f64,
    pressure: f64,
    rho: [f64; 4],
    omega: [f64; 4],
    rho_norm: f64,
}

fn evaluate(bundle: &CurvatureBundle, fluid: &FluidState) -> Result<FluidAtPoint> {
    let p = &bundle.point;
    let rho = fluid.velocity_at(p)?;
    let rho_norm = bundle.metric.inner(&rho, &rho);
    if (rho_norm + 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::Normalization { norm: rho_norm });
    }
    Ok(FluidAtPoint {
        sigma: fluid.sigma.eval(&p.0)?,
        pressure: fluid.pressure.eval(&p.0)?,
        omega: bundle.metric.lower(&rho),
        rho,
        rho_norm,
    })
}

fn energy_momentum_at(bundle: &CurvatureBundle, f: &FluidAtPoint) -> Tensor4 {
    let g = &bundle.metric.g;
    let w = &f.omega;
    Tensor4::from_fn(&[Variance::Lower, Variance::Lower], |x| {
        (f.sigma + f.pressure) * w[x[0]] * w[x[1]] + f.pressure * g[x[0]][x[1]]
    })
    .expect("rank 2")
}

/// `T = (σ+p) ω⊗ω + p g`.
pub fn energy_momentum(m: &MetricStructure, fluid: &FluidState, p: &Point) -> Result<Tensor4> {
    let bundle = CurvatureBundle::compute(m, p)?;
    energy_momentum_bundle(&bundle, fluid)
}

pub fn energy_momentum_bundle(bundle: &CurvatureBundle, fluid: &FluidState) -> Result<Tensor4> {
    let f = evaluate(bundle, fluid)?;
    Ok(energy_momentum_at(bundle, &f))
}

fn einstein_residual_at(bundle: &CurvatureBundle, fluid: &FluidState, t: &Tensor4) -> f64 {
    let g = &bundle.metric.g;
    let r = bundle.scalar_r;
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            let lhs = bundle.ricci.get(&[i, j]) - 0.5 * r * g[i][j] + fluid.lambda * g[i][j];
            worst = worst.max((lhs - fluid.k * t.get(&[i, j])).abs());
        }
    }
    worst
}

/// `max |S - (r/2)g + λg - kT|`.
pub fn einstein_residual(m: &MetricStructure, fluid: &FluidState, p: &Point) -> Result<f64> {
    let bundle = CurvatureBundle::compute(m, p)?;
    einstein_residual_bundle(&bundle, fluid)
}

pub fn einstein_residual_bundle(bundle: &CurvatureBundle, fluid: &FluidState) -> Result<f64> {
    let f = evaluate(bundle, fluid)?;
    Ok(einstein_residual_at(
        bundle,
        fluid,
        &energy_momentum_at(bundle, &f),
    ))
}

/// `max |S - (r/4) g|`.
pub fn einstein_manifold_residual(bundle: &CurvatureBundle) -> f64 {
    let g = &bundle.metric.g;
    let quarter = 0.25 * bundle.scalar_r;
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((bundle.ricci.get(&[i, j]) - quarter * g[i][j]).abs());
        }
    }
    worst
}

pub fn fluid_audit(
    m: &MetricStructure,
    f: Option<&ComplexStructure>,
    fluid: &FluidState,
    p: &Point,
    tol: f64,
) -> Result<FluidReport> {
    let bundle = CurvatureBundle::compute(m, p)?;
    fluid_audit_bundle(&bundle, m, f, fluid, tol)
}

pub fn fluid_audit_bundle(
    bundle: &CurvatureBundle,
    m: &MetricStructure,
    f: Option<&ComplexStructure>,
    fluid: &FluidState,
    tol: f64,
) -> Result<FluidReport> {
    let p = &bundle.point;
    let state = evaluate(bundle, fluid)?;
    let t = energy_momentum_at(bundle, &state);
    let r = bundle.scalar_r;

    // ∇ρ with the direction slot first: nabla_rho[m, i] = ∇_m ρ^i
    let (value, partials) = fluid.velocity_field().value_and_partials(m, p)?;
    let nabla_rho = covariant_derivative_from_parts(&value, &partials, &bundle.gamma)?;
    let expansion = nabla_rho.contract(0, 1)?.as_scalar().expect("scalar");
    let acceleration: [f64; 4] =
        std::array::from_fn(|i| (0..4).map(|a| state.rho[a] * nabla_rho.get(&[a, i])).sum());
    let acceleration_norm = acceleration.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));

    // ρ(σ): directional derivative of the density along the flow
    let sigma_jet = eval_jet3(&fluid.sigma, p)?;
    let sigma_along_rho: f64 = (0..4).map(|a| state.rho[a] * sigma_jet.d1(a)).sum();
    let res_energy_eq = (sigma_along_rho + (state.sigma + state.pressure) * expansion).abs();

    let (res_inflation_split, kahler_pass) = match f {
        Some(cs) => {
            let fm = cs.at(p)?;
            let w = &state.omega;
            // ω(FX)_j = ω_i F^i_j
            let wf: [f64; 4] = std::array::from_fn(|j| (0..4).map(|i| w[i] * fm[i][j]).sum());
            let mut worst = 0.0f64;
            for x in 0..4 {
                for y in 0..4 {
                    let v =
                        fluid.k * (state.sigma + state.pressure) * (wf[x] * wf[y] - w[x] * w[y]);
                    worst = worst.max(v.abs());
                }
            }
            let kahler = kahler_audit_bundle(bundle, m, cs, tol)?;
            (Some(worst), Some(kahler.passes()))
        }
        None => (None, None),
    };

    Ok(FluidReport {
        res_einstein: einstein_residual_at(bundle, fluid, &t),
        res_inflation: (state.sigma + state.pressure).abs(),
        res_pressure_relation: (fluid.lambda - fluid.k * state.pressure - 0.25 * r).abs(),
        res_einstein_manifold: einstein_manifold_residual(bundle),
        res_energy_eq,
        expansion,
        acceleration_norm,
        res_t: t.max_abs(),
        res_inflation_split,
        kahler_pass,
        rho_norm: state.rho_norm,
        sigma: state.sigma,
        pressure: state.pressure,
    })
}
