//! Levi-Civita curvature pipeline on a 4-dimensional chart.
//!
//! Conventions:
//! - `gamma[k][i][j]` is the Christoffel symbol of the second kind, upper index first.
//! - `R(X,Y)Z = ∇_X ∇_Y Z - ∇_Y ∇_X Z - ∇_[X,Y] Z`, stored as `R^l_{ijk}` at `[l, i, j, k]`.
//! - `R(X,Y,Z,T) = g(R(X,Y)Z, T)`, stored at `[i, j, k, l]`. With these signs the
//!   unit round sphere has `R(X,Y,Y,X) = +1` for an orthonormal pair.
//! - `S(Y,Z) = g^{ab} R(Y, e_a, e_b, Z)` and `r = g^{ij} S_ij`.
//! - Covariant derivatives put the direction slot first: `(∇R)[m,i,j,k,l] = (∇_m R)_{ijkl}`.
//!
//! Derivatives of the curvature are analytic: the metric is expanded to third
//! order with jets, and `∂Γ`, `∂²Γ` are assembled from those.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::ScalarExpr;
use crate::jet::{eval_jet3, Jet3, Point};
use crate::tensor::{MetricAtPoint, Tensor4, Variance};

pub type Arr3 = [[[f64; 4]; 4]; 4];
pub type Arr4 = [[[[f64; 4]; 4]; 4]; 4];
pub type Arr5 = [[[[[f64; 4]; 4]; 4]; 4]; 4];

pub const DEFAULT_SEED: u64 = 42;
pub const DEGENERATE_PLANE_THRESHOLD: f64 = 1e-10;
pub const NULL_VECTOR_THRESHOLD: f64 = 1e-10;

const LOWER2: [Variance; 2] = [Variance::Lower, Variance::Lower];
const LOWER4: [Variance; 4] = [Variance::Lower; 4];

fn arr3(mut f: impl FnMut(usize, usize, usize) -> f64) -> Arr3 {
    std::array::from_fn(|a| std::array::from_fn(|b| std::array::from_fn(|c| f(a, b, c))))
}

fn arr4(mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Arr4 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| std::array::from_fn(|c| std::array::from_fn(|d| f(a, b, c, d))))
    })
}

fn arr5(mut f: impl FnMut(usize, usize, usize, usize, usize) -> f64) -> Arr5 {
    std::array::from_fn(|a| {
        std::array::from_fn(|b| {
            std::array::from_fn(|c| {
                std::array::from_fn(|d| std::array::from_fn(|e| f(a, b, c, d, e)))
            })
        })
    })
}

fn sum4(f: impl Fn(usize) -> f64) -> f64 {
    f(0) + f(1) + f(2) + f(3)
}

fn upper_index(i: usize, j: usize) -> usize {
    let (i, j) = (i.min(j), i.max(j));
    // rows of the upper triangle: 0..4, 4..7, 7..9, 9
    [0, 4, 7, 9][i] + (j - i)
}

/// A metric field given by expressions for `g_ij`, `i <= j`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricStructure {
    pub name: String,
    components: [ScalarExpr; 10],
    /// Declared signs, in the order the metric file lists them.
    pub signature: [i8; 4],
    /// Per-coordinate `[lo, hi]` sampling box.
    pub domain: [[f64; 2]; 4],
}

impl MetricStructure {
    /// `entries` maps `(i, j)` with `i <= j` to `g_ij`; missing entries are zero.
    pub fn new(
        name: impl Into<String>,
        entries: impl IntoIterator<Item = ((usize, usize), ScalarExpr)>,
        signature: [i8; 4],
        domain: [[f64; 2]; 4],
    ) -> Result<Self> {
        let mut components: [ScalarExpr; 10] = std::array::from_fn(|_| ScalarExpr::zero());
        for ((i, j), e) in entries {
            if i > 3 || j > 3 {
                return Err(Error::Index(format!("metric entry ({i},{j}) out of range")));
            }
            components[upper_index(i, j)] = e;
        }
        for (axis, [lo, hi]) in domain.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::schema(
                    format!("domain[{axis}]"),
                    format!("invalid interval [{lo}, {hi}]"),
                ));
            }
        }
        Ok(MetricStructure {
            name: name.into(),
            components,
            signature,
            domain,
        })
    }

    pub fn component(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.components[upper_index(i, j)]
    }

    pub fn center(&self) -> Point {
        Point(std::array::from_fn(|i| {
            0.5 * (self.domain[i][0] + self.domain[i][1])
        }))
    }

    pub fn contains(&self, p: &Point) -> bool {
        p.0.iter()
            .zip(&self.domain)
            .all(|(x, [lo, hi])| lo <= x && x <= hi)
    }

    /// Seeded uniform samples from the domain box.
    pub fn sample_points(&self, count: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                Point(std::array::from_fn(|i| {
                    let [lo, hi] = self.domain[i];
                    lo + (hi - lo) * rng.random::<f64>()
                }))
            })
            .collect()
    }

    pub fn metric_at(&self, p: &Point) -> Result<MetricAtPoint> {
        let mut g = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let v = self.component(i, j).eval(&p.0)?;
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        MetricAtPoint::new(g)
    }

    /// Checks the eigenvalue signs of `g` at `p` against the declared signature.
    pub fn check_signature(&self, p: &Point) -> Result<MetricAtPoint> {
        let m = self.metric_at(p)?;
        let found = m.signature();
        let mut declared = self.signature;
        declared.sort();
        if found != declared {
            return Err(Error::SignatureMismatch {
                declared: self.signature,
                found,
                location: format!("{:?}", p.0),
            });
        }
        Ok(m)
    }

    pub fn metric_jets(&self, p: &Point) -> Result<[[Jet3; 4]; 4]> {
        let mut upper = Vec::with_capacity(10);
        for e in &self.components {
            upper.push(eval_jet3(e, p)?);
        }
        Ok(std::array::from_fn(|i| {
            std::array::from_fn(|j| upper[upper_index(i, j)])
        }))
    }
}

/// Metric and its partial derivatives through third order, plus the
/// inverse metric and its first two derivatives.
#[derive(Debug, Clone)]
struct MetricDerivatives {
    jets: [[Jet3; 4]; 4],
    /// `dg[c][a][b] = ∂_c g_ab`
    dg: Arr3,
    /// `d2g[c][d][a][b] = ∂_c ∂_d g_ab`
    d2g: Arr4,
    /// `dginv[c][a][b] = ∂_c g^ab`
    dginv: Arr3,
}

impl MetricDerivatives {
    fn new(jets: [[Jet3; 4]; 4], metric: &MetricAtPoint) -> Self {
        let dg = arr3(|c, a, b| jets[a][b].d1(c));
        let d2g = arr4(|c, d, a, b| jets[a][b].d2(c, d));
        let gi = &metric.g_inv;
        let dginv = arr3(|m, a, b| -sum4(|c| sum4(|d| gi[a][c] * dg[m][c][d] * gi[d][b])));
        MetricDerivatives {
            jets,
            dg,
            d2g,
            dginv,
        }
    }

    fn d3g(&self, c: usize, d: usize, e: usize, a: usize, b: usize) -> f64 {
        self.jets[a][b].d3(c, d, e)
    }
}

/// Curvature quantities at one point.
#[derive(Debug)]
pub struct CurvatureBundle {
    pub point: Point,
    pub metric: MetricAtPoint,
    /// `gamma[k][i][j] = Γ^k_ij`
    pub gamma: Arr3,
    /// `dgamma[m][k][i][j] = ∂_m Γ^k_ij`
    pub dgamma: Arr4,
    gamma_first: Arr3,
    dgamma_first: Arr4,
    derivs: MetricDerivatives,
    /// `R^l_{ijk}` at `[l, i, j, k]`
    pub riemann_1_3: Tensor4,
    pub riemann_0_4: Tensor4,
    pub ricci: Tensor4,
    pub scalar_r: f64,
    nabla_riemann: OnceLock<Tensor4>,
    d2gamma: OnceLock<Box<Arr5>>,
}

pub fn christoffel(m: &MetricStructure, p: &Point) -> Result<Arr3> {
    Ok(CurvatureBundle::compute(m, p)?.gamma)
}

pub fn riemann(m: &MetricStructure, p: &Point) -> Result<CurvatureBundle> {
    CurvatureBundle::compute(m, p)
}

impl CurvatureBundle {
    pub fn compute(m: &MetricStructure, p: &Point) -> Result<Self> {
        let metric = m.metric_at(p)?;
        let jets = m.metric_jets(p)?;
        let derivs = MetricDerivatives::new(jets, &metric);
        let (dg, d2g) = (&derivs.dg, &derivs.d2g);
        let gi = &metric.g_inv;

        // first kind: Γ_{l,ij} = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij)
        let gamma_first = arr3(|l, i, j| 0.5 * (dg[i][j][l] + dg[j][i][l] - dg[l][i][j]));
        let dgamma_first =
            arr4(|m, l, i, j| 0.5 * (d2g[m][i][j][l] + d2g[m][j][i][l] - d2g[m][l][i][j]));
        let gamma = arr3(|k, i, j| sum4(|l| gi[k][l] * gamma_first[l][i][j]));
        let dgamma = arr4(|m, k, i, j| {
            sum4(|l| {
                derivs.dginv[m][k][l] * gamma_first[l][i][j] + gi[k][l] * dgamma_first[m][l][i][j]
            })
        });

        let r13 = arr4(|l, i, j, k| {
            dgamma[i][l][j][k] - dgamma[j][l][i][k]
                + sum4(|s| gamma[l][i][s] * gamma[s][j][k] - gamma[l][j][s] * gamma[s][i][k])
        });
        let riemann_1_3 = Tensor4::from_fn(
            &[
                Variance::Upper,
                Variance::Lower,
                Variance::Lower,
                Variance::Lower,
            ],
            |x| r13[x[0]][x[1]][x[2]][x[3]],
        )?;
        let g = &metric.g;
        let riemann_0_4 =
            Tensor4::from_fn(&LOWER4, |x| sum4(|s| g[x[3]][s] * r13[s][x[0]][x[1]][x[2]]))?;
        let ricci = Tensor4::from_fn(&LOWER2, |x| {
            sum4(|a| sum4(|b| gi[a][b] * riemann_0_4.get(&[x[0], a, b, x[1]])))
        })?;
        let scalar_r = sum4(|i| sum4(|j| gi[i][j] * ricci.get(&[i, j])));

        Ok(CurvatureBundle {
            point: *p,
            metric,
            gamma,
            dgamma,
            gamma_first,
            dgamma_first,
            derivs,
            riemann_1_3,
            riemann_0_4,
            ricci,
            scalar_r,
            nabla_riemann: OnceLock::new(),
            d2gamma: OnceLock::new(),
        })
    }

    /// `∂_m ∂_n Γ^k_ij` at `[m][n][k][i][j]`.
    fn d2gamma(&self) -> &Arr5 {
        self.d2gamma.get_or_init(|| {
            let d = &self.derivs;
            let gi = &self.metric.g_inv;
            let (dg, d2g, dginv) = (&d.dg, &d.d2g, &d.dginv);
            let d2ginv = arr4(|m, n, a, b| {
                -sum4(|c| {
                    sum4(|e| {
                        dginv[n][a][c] * dg[m][c][e] * gi[e][b]
                            + gi[a][c] * d2g[m][n][c][e] * gi[e][b]
                            + gi[a][c] * dg[m][c][e] * dginv[n][e][b]
                    })
                })
            });
            Box::new(arr5(|m, n, k, i, j| {
                sum4(|l| {
                    let d2f =
                        0.5 * (d.d3g(m, n, i, j, l) + d.d3g(m, n, j, i, l) - d.d3g(m, n, l, i, j));
                    d2ginv[m][n][k][l] * self.gamma_first[l][i][j]
                        + dginv[m][k][l] * self.dgamma_first[n][l][i][j]
                        + dginv[n][k][l] * self.dgamma_first[m][l][i][j]
                        + gi[k][l] * d2f
                })
            }))
        })
    }

    /// `∂_n R^l_{ijk}` at `[n][l][i][j][k]`.
    fn riemann_1_3_partials(&self) -> Arr5 {
        let d2 = self.d2gamma();
        let (gamma, dgamma) = (&self.gamma, &self.dgamma);
        arr5(|n, l, i, j, k| {
            d2[n][i][l][j][k] - d2[n][j][l][i][k]
                + sum4(|s| {
                    dgamma[n][l][i][s] * gamma[s][j][k] + gamma[l][i][s] * dgamma[n][s][j][k]
                        - dgamma[n][l][j][s] * gamma[s][i][k]
                        - gamma[l][j][s] * dgamma[n][s][i][k]
                })
        })
    }

    /// Partial derivatives `∂_n R_{ijkl}` of the (0,4) curvature.
    pub fn riemann_partials(&self) -> [Tensor4; 4] {
        let dr13 = self.riemann_1_3_partials();
        let g = &self.metric.g;
        let dg = &self.derivs.dg;
        std::array::from_fn(|n| {
            Tensor4::from_fn(&LOWER4, |x| {
                let (i, j, k, l) = (x[0], x[1], x[2], x[3]);
                sum4(|s| {
                    dg[n][l][s] * self.riemann_1_3.get(&[s, i, j, k])
                        + g[l][s] * dr13[n][s][i][j][k]
                })
            })
            .expect("rank 4")
        })
    }

    /// `(∇_m R)(i,j,k,l)` at `[m,i,j,k,l]`.
    pub fn nabla_riemann(&self) -> &Tensor4 {
        self.nabla_riemann.get_or_init(|| {
            let partials = self.riemann_partials();
            covariant_derivative_from_parts(&self.riemann_0_4, &partials, &self.gamma)
                .expect("rank 4 input")
        })
    }

    /// Ricci computed directly as `S_jk = R^b_{bjk}` together with its partial
    /// derivatives, independent of the (0,4) contraction.
    pub fn ricci_direct_with_partials(&self) -> (Tensor4, [Tensor4; 4]) {
        let dr13 = self.riemann_1_3_partials();
        let value = Tensor4::from_fn(&LOWER2, |x| {
            sum4(|b| self.riemann_1_3.get(&[b, b, x[0], x[1]]))
        })
        .expect("rank 2");
        let partials = std::array::from_fn(|n| {
            Tensor4::from_fn(&LOWER2, |x| sum4(|b| dr13[n][b][b][x[0]][x[1]])).expect("rank 2")
        });
        (value, partials)
    }

    /// `(∇_m S)(j,k)` by differentiating the Ricci tensor directly.
    pub fn nabla_ricci_direct(&self) -> Tensor4 {
        let (value, partials) = self.ricci_direct_with_partials();
        covariant_derivative_from_parts(&value, &partials, &self.gamma).expect("rank 2 input")
    }

    /// `(∇_m S)(j,k) = g^{ab} (∇_m R)(j,a,b,k)`.
    pub fn nabla_ricci_contracted(&self) -> Tensor4 {
        let nr = self.nabla_riemann();
        let gi = &self.metric.g_inv;
        Tensor4::from_fn(&[Variance::Lower; 3], |x| {
            sum4(|a| sum4(|b| gi[a][b] * nr.get(&[x[0], x[1], a, b, x[2]])))
        })
        .expect("rank 3")
    }

    /// `(∇_m g)(i,j)`, zero for a Levi-Civita connection.
    pub fn nabla_metric(&self) -> Tensor4 {
        let value = self.metric.lower_tensor();
        let partials = std::array::from_fn(|n| {
            Tensor4::from_fn(&LOWER2, |x| self.derivs.dg[n][x[0]][x[1]]).expect("rank 2")
        });
        covariant_derivative_from_parts(&value, &partials, &self.gamma).expect("rank 2 input")
    }

    /// `R(X,Y,Z,T)` on vectors.
    pub fn riemann_on(&self, x: &[f64; 4], y: &[f64; 4], z: &[f64; 4], t: &[f64; 4]) -> f64 {
        let r = self.riemann_0_4.components();
        let mut s = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                for k in 0..4 {
                    for l in 0..4 {
                        s += r[64 * i + 16 * j + 4 * k + l] * xy * z[k] * t[l];
                    }
                }
            }
        }
        s
    }

    pub fn ricci_on(&self, x: &[f64; 4], y: &[f64; 4]) -> f64 {
        sum4(|i| sum4(|j| self.ricci.get(&[i, j]) * x[i] * y[j]))
    }

    /// Contracted second Bianchi residual `∇^a S_ab - ½ ∂_b r` as a covector.
    pub fn contracted_bianchi(&self) -> [f64; 4] {
        let ns = self.nabla_ricci_direct();
        let gi = &self.metric.g_inv;
        let gr = self.scalar_gradient();
        std::array::from_fn(|b| sum4(|a| sum4(|c| gi[a][c] * ns.get(&[a, c, b]))) - 0.5 * gr[b])
    }

    /// `∂_b r`, from the derivative of `g^{ij} S_ij`.
    pub fn scalar_gradient(&self) -> [f64; 4] {
        let (s, ds) = self.ricci_direct_with_partials();
        let gi = &self.metric.g_inv;
        let dgi = &self.derivs.dginv;
        std::array::from_fn(|b| {
            sum4(|i| sum4(|j| dgi[b][i][j] * s.get(&[i, j]) + gi[i][j] * ds[b].get(&[i, j])))
        })
    }
}

/// Applies the Levi-Civita connection to a tensor given its value and
/// coordinate partials. The direction slot becomes slot 0 of the result.
pub fn covariant_derivative_from_parts(
    value: &Tensor4,
    partials: &[Tensor4; 4],
    gamma: &Arr3,
) -> Result<Tensor4> {
    let rank = value.rank();
    if partials.iter().any(|p| p.variance() != value.variance()) {
        return Err(Error::Variance(
            "partials and value have different slot variances".into(),
        ));
    }
    let mut variance = vec![Variance::Lower];
    variance.extend_from_slice(value.variance());
    let slots = value.variance().to_vec();
    let mut shifted = [0usize; crate::tensor::MAX_RANK];
    Tensor4::from_fn(&variance, |idx| {
        let m = idx[0];
        let t_idx = &idx[1..];
        let mut acc = partials[m].get(t_idx);
        for (s, var) in slots.iter().enumerate() {
            shifted[..rank].copy_from_slice(t_idx);
            for q in 0..4 {
                shifted[s] = q;
                let t = value.get(&shifted[..rank]);
                match var {
                    Variance::Upper => acc += gamma[t_idx[s]][m][q] * t,
                    Variance::Lower => acc -= gamma[q][m][t_idx[s]] * t,
                }
            }
        }
        acc
    })
}

/// A tensor-valued field that can report its value and coordinate partials.
pub trait TensorField {
    fn variance(&self) -> Vec<Variance>;
    fn value_and_partials(&self, m: &MetricStructure, p: &Point)
        -> Result<(Tensor4, [Tensor4; 4])>;
}

/// Tensor field with expression components in row-major slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprField {
    pub variance: Vec<Variance>,
    pub components: Vec<ScalarExpr>,
}

impl ExprField {
    pub fn new(variance: Vec<Variance>, components: Vec<ScalarExpr>) -> Result<Self> {
        let expected = 4usize.pow(variance.len() as u32);
        if components.len() != expected || variance.len() > 4 {
            return Err(Error::Index(format!(
                "field of rank {} needs {expected} components, got {}",
                variance.len(),
                components.len()
            )));
        }
        Ok(ExprField {
            variance,
            components,
        })
    }
}

impl TensorField for ExprField {
    fn variance(&self) -> Vec<Variance> {
        self.variance.clone()
    }

    fn value_and_partials(
        &self,
        _m: &MetricStructure,
        p: &Point,
    ) -> Result<(Tensor4, [Tensor4; 4])> {
        let jets = self
            .components
            .iter()
            .map(|e| eval_jet3(e, p))
            .collect::<Result<Vec<_>>>()?;
        let value =
            Tensor4::from_components(&self.variance, jets.iter().map(Jet3::value).collect())?;
        let partials = [0, 1, 2, 3].map(|n| {
            Tensor4::from_components(&self.variance, jets.iter().map(|j| j.d1(n)).collect())
        });
        let [a, b, c, d] = partials;
        Ok((value, [a?, b?, c?, d?]))
    }
}

/// The metric itself as a (0,2) field.
pub struct MetricField;

impl TensorField for MetricField {
    fn variance(&self) -> Vec<Variance> {
        LOWER2.to_vec()
    }

    fn value_and_partials(
        &self,
        m: &MetricStructure,
        p: &Point,
    ) -> Result<(Tensor4, [Tensor4; 4])> {
        let jets = m.metric_jets(p)?;
        let value = Tensor4::from_fn(&LOWER2, |x| jets[x[0]][x[1]].value())?;
        let partials = std::array::from_fn(|n| {
            Tensor4::from_fn(&LOWER2, |x| jets[x[0]][x[1]].d1(n)).expect("rank 2")
        });
        Ok((value, partials))
    }
}

/// The (0,4) curvature tensor as a field.
pub struct RiemannField;

impl TensorField for RiemannField {
    fn variance(&self) -> Vec<Variance> {
        LOWER4.to_vec()
    }

    fn value_and_partials(
        &self,
        m: &MetricStructure,
        p: &Point,
    ) -> Result<(Tensor4, [Tensor4; 4])> {
        let bundle = CurvatureBundle::compute(m, p)?;
        let partials = bundle.riemann_partials();
        Ok((bundle.riemann_0_4, partials))
    }
}

/// The Ricci tensor as a field, differentiated directly.
pub struct RicciField;

impl TensorField for RicciField {
    fn variance(&self) -> Vec<Variance> {
        LOWER2.to_vec()
    }

    fn value_and_partials(
        &self,
        m: &MetricStructure,
        p: &Point,
    ) -> Result<(Tensor4, [Tensor4; 4])> {
        Ok(CurvatureBundle::compute(m, p)?.ricci_direct_with_partials())
    }
}

/// `∇t` at `p`, direction slot first.
pub fn covariant_derivative(
    m: &MetricStructure,
    p: &Point,
    field: &dyn TensorField,
) -> Result<Tensor4> {
    let gamma = christoffel(m, p)?;
    let (value, partials) = field.value_and_partials(m, p)?;
    covariant_derivative_from_parts(&value, &partials, &gamma)
}

/// `K(X,Y) = R(X,Y,Y,X) / (g(X,X)g(Y,Y) - g(X,Y)²)`.
pub fn sectional_curvature(bundle: &CurvatureBundle, x: &[f64; 4], y: &[f64; 4]) -> Result<f64> {
    let g = &bundle.metric;
    let denominator = g.inner(x, x) * g.inner(y, y) - g.inner(x, y).powi(2);
    if denominator.abs() <= DEGENERATE_PLANE_THRESHOLD {
        return Err(Error::DegeneratePlane { denominator });
    }
    Ok(bundle.riemann_on(x, y, y, x) / denominator)
}

/// Pseudo-orthonormal frame adapted to a timelike vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    /// `vectors[0]` is the normalized velocity.
    pub vectors: [[f64; 4]; 4],
    /// `g(e_a, e_a)`, either +1 or -1; `norms[0] = -1`.
    pub norms: [f64; 4],
}

impl Frame {
    pub fn spatial(&self) -> &[[f64; 4]] {
        &self.vectors[1..]
    }
}

/// Gram-Schmidt from `rho` and the coordinate vectors.
///
/// Seeds that are linearly dependent on the vectors already chosen are
/// skipped. In a Lorentzian metric the spatial vectors come out with norm
/// +1; other signatures keep whatever sign the complement carries.
pub fn orthonormal_frame(metric: &MetricAtPoint, rho: &[f64; 4]) -> Result<Frame> {
    let rr = metric.inner(rho, rho);
    if !(rr < 0.0) || rr.abs() < NULL_VECTOR_THRESHOLD {
        return Err(Error::Frame(format!(
            "velocity is not timelike: g(rho,rho) = {rr}"
        )));
    }
    let scale = rr.abs().sqrt();
    let mut vectors = vec![rho.map(|c| c / scale)];
    let mut norms = vec![-1.0];
    for seed in 0..4 {
        if vectors.len() == 4 {
            break;
        }
        let mut v = [0.0; 4];
        v[seed] = 1.0;
        for (e, n) in vectors.iter().zip(&norms) {
            let c = metric.inner(&v, e) / n;
            for i in 0..4 {
                v[i] -= c * e[i];
            }
        }
        // reorthogonalize
        for (e, n) in vectors.iter().zip(&norms) {
            let c = metric.inner(&v, e) / n;
            for i in 0..4 {
                v[i] -= c * e[i];
            }
        }
        let euclid = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        let base = vectors
            .iter()
            .map(|e| e.iter().map(|c| c * c).sum::<f64>().sqrt())
            .fold(1.0, f64::max);
        if euclid < 1e-8 * base {
            continue;
        }
        let vv = metric.inner(&v, &v);
        if vv.abs() < NULL_VECTOR_THRESHOLD {
            return Err(Error::Frame(format!(
                "near-null intermediate vector, g(v,v) = {vv:e}"
            )));
        }
        let s = vv.abs().sqrt();
        vectors.push(v.map(|c| c / s));
        norms.push(vv.signum());
    }
    if vectors.len() != 4 {
        return Err(Error::Frame("could not complete the frame".into()));
    }
    // spacelike vectors first after e0, so Lorentzian frames read (-,+,+,+)
    let mut order: Vec<usize> = (1..4).collect();
    order.sort_by(|a, b| norms[*b].total_cmp(&norms[*a]).then(a.cmp(b)));
    let mut out_vecs = [vectors[0]; 4];
    let mut out_norms = [-1.0; 4];
    for (slot, &src) in order.iter().enumerate() {
        out_vecs[slot + 1] = vectors[src];
        out_norms[slot + 1] = norms[src];
    }
    Ok(Frame {
        vectors: out_vecs,
        norms: out_norms,
    })
}
