//! Audit pipeline behind the `kahler-audit` binary.

use rayon::prelude::*;
use serde::Serialize;

use kahler_core::catalog::{builtin, load_metric_file, CatalogEntry, ExpectedProperties, BUILTINS};
use kahler_core::conformal::{
    constant_curvature_residual_bundle, isotropy_fit_bundle, sectional_theorem_check_bundle,
    weyl_decomposition, IsotropyFit, SectionalCheck,
};
use kahler_core::geometry::CurvatureBundle;
use kahler_core::kahler::{kahler_audit_bundle, KahlerReport};
use kahler_core::relativity::{einstein_manifold_residual, fluid_audit_bundle, FluidReport};
use kahler_core::weak_symmetry::{
    alpha_rho_relation_bundle, ricci_eigen_residual_bundle, solve_weak_ricci_bundle,
    solve_weak_symmetry_bundle, wrs_nonexistence_check_metric, RicciEigenResidual,
    WeakRicciSolution, WeakSymmetrySolution,
};
use kahler_core::{Error, Point, Result};

pub const DEFAULT_POINTS: usize = 5;
pub const DEFAULT_TOLERANCE: f64 = 1e-8;

/// Riemann symmetries and first Bianchi, relative to `max(1, |R|)`.
pub const SYMMETRY_TOLERANCE: f64 = 1e-9;
pub const METRIC_COMPATIBILITY_TOLERANCE: f64 = 1e-10;
/// Contracted second Bianchi, relative to `max(1, |∇R|)`.
pub const BIANCHI_TOLERANCE: f64 = 1e-7;

/// A builtin name (optionally with a parameter, `sphere4(2)`) or a path to a
/// metric file.
pub fn resolve(reference: &str) -> Result<CatalogEntry> {
    let base = reference.split('(').next().unwrap_or_default().trim();
    if BUILTINS.iter().any(|(name, _)| *name == base) {
        builtin(reference)
    } else if reference.ends_with(".json") || std::path::Path::new(reference).exists() {
        load_metric_file(reference)
    } else {
        Err(Error::UnknownMetric(reference.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub first_bianchi: f64,
    pub ricci_symmetry: f64,
    pub nabla_metric: f64,
    pub contracted_bianchi: f64,
    pub weyl_closure: f64,
}

impl IdentityResiduals {
    pub fn compute(bundle: &CurvatureBundle) -> Self {
        let r = &bundle.riemann_0_4;
        let at = |i, j, k, l| r.get(&[i, j, k, l]);
        let (mut anti, mut pair, mut bianchi) = (0.0f64, 0.0f64, 0.0f64);
        for i in 0..4 {
            for j in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        let v = at(i, j, k, l);
                        anti = anti
                            .max((v + at(j, i, k, l)).abs())
                            .max((v + at(i, j, l, k)).abs());
                        pair = pair.max((v - at(k, l, i, j)).abs());
                        bianchi = bianchi.max((v + at(j, k, i, l) + at(k, i, j, l)).abs());
                    }
                }
            }
        }
        let s = bundle.ricci.as_matrix().expect("rank 2");
        let mut ricci_symmetry = 0.0f64;
        for i in 0..4 {
            for j in 0..4 {
                ricci_symmetry = ricci_symmetry.max((s[i][j] - s[j][i]).abs());
            }
        }
        let decomposition = weyl_decomposition(bundle);
        let recombined = decomposition
            .weyl
            .add(&decomposition.ricci_part)
            .and_then(|t| t.add(&decomposition.scalar_part))
            .and_then(|t| t.sub(r))
            .expect("same variance");
        IdentityResiduals {
            antisymmetry: anti,
            pair_symmetry: pair,
            first_bianchi: bianchi,
            ricci_symmetry,
            nabla_metric: bundle.nabla_metric().max_abs(),
            contracted_bianchi: bundle
                .contracted_bianchi()
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs())),
            weyl_closure: recombined.max_abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureSummary {
    pub r: f64,
    pub max_abs_gamma: f64,
    pub max_abs_riemann: f64,
    pub max_abs_nabla_riemann: f64,
    pub max_abs_ricci: f64,
    pub max_abs_weyl: f64,
    /// `max |S - (r/4) g|`
    pub einstein_manifold_residual: f64,
    pub constant_curvature_residual: f64,
    pub identities: IdentityResiduals,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointRecord {
    pub index: usize,
    pub point: [f64; 4],
    pub curvature: CurvatureSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kahler: Option<KahlerReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fluid: Option<FluidReport>,
    pub weak_symmetry: WeakSymmetrySolution,
    pub weak_ricci: WeakRicciSolution,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ricci_eigen: Option<RicciEigenResidual>,
    pub alpha_rho: f64,
    pub wrs_sigma_min: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sectional: Option<SectionalCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub isotropy: Option<IsotropyFit>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One check over all points: the worst observed value against a limit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: String,
    pub status: Status,
    /// Worst value over the points; `null` when skipped.
    pub value: Option<f64>,
    /// `value < limit` passes, or `value >= limit` when `expect_small` is false.
    pub limit: f64,
    pub expect_small: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditReport {
    pub metric: String,
    pub signature: [i8; 4],
    pub seed: u64,
    pub tolerance: f64,
    pub point_count: usize,
    pub expected: ExpectedProperties,
    pub points: Vec<PointRecord>,
    pub verdicts: Vec<Verdict>,
    pub passed: bool,
}

fn max_of(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0f64, |m, v| {
        if v.is_nan() || m.is_nan() {
            f64::NAN
        } else {
            m.max(v)
        }
    })
}

/// Audits one point. Errors abort the whole audit.
pub fn audit_point(entry: &CatalogEntry, index: usize, p: &Point, tol: f64) -> Result<PointRecord> {
    let m = &entry.metric;
    m.check_signature(p)?;
    let bundle = CurvatureBundle::compute(m, p)?;
    let decomposition = weyl_decomposition(&bundle);
    let curvature = CurvatureSummary {
        r: bundle.scalar_r,
        max_abs_gamma: max_of(bundle.gamma.iter().flatten().flatten().map(|v| v.abs())),
        max_abs_riemann: bundle.riemann_0_4.max_abs(),
        max_abs_nabla_riemann: bundle.nabla_riemann().max_abs(),
        max_abs_ricci: bundle.ricci.max_abs(),
        max_abs_weyl: decomposition.weyl.max_abs(),
        einstein_manifold_residual: einstein_manifold_residual(&bundle),
        constant_curvature_residual: constant_curvature_residual_bundle(&bundle),
        identities: IdentityResiduals::compute(&bundle),
    };
    let kahler = entry
        .complex_structure
        .as_ref()
        .map(|f| kahler_audit_bundle(&bundle, m, f, tol))
        .transpose()?;
    let fluid = entry
        .fluid
        .as_ref()
        .map(|fluid| fluid_audit_bundle(&bundle, m, entry.complex_structure.as_ref(), fluid, tol))
        .transpose()?;
    let rho = entry.fluid.as_ref().map(|f| f.velocity_at(p)).transpose()?;
    let weak_symmetry = solve_weak_symmetry_bundle(&bundle);
    let alpha_rho = alpha_rho_relation_bundle(&bundle, &weak_symmetry);
    Ok(PointRecord {
        index,
        point: p.0,
        curvature,
        kahler,
        fluid,
        weak_ricci: solve_weak_ricci_bundle(&bundle),
        weak_symmetry,
        ricci_eigen: rho
            .map(|r| ricci_eigen_residual_bundle(&bundle, &r))
            .transpose()?,
        alpha_rho,
        wrs_sigma_min: wrs_nonexistence_check_metric(&bundle.metric),
        sectional: rho
            .map(|r| sectional_theorem_check_bundle(&bundle, &r))
            .transpose()?,
        isotropy: rho.map(|r| isotropy_fit_bundle(&bundle, &r)).transpose()?,
    })
}

struct Judge<'a> {
    points: &'a [PointRecord],
    verdicts: Vec<Verdict>,
}

impl Judge<'_> {
    fn check(
        &mut self,
        name: &str,
        expect_small: bool,
        limit: f64,
        value: impl Fn(&PointRecord) -> f64,
    ) {
        let worst = if expect_small {
            max_of(self.points.iter().map(&value))
        } else {
            self.points.iter().map(&value).fold(f64::INFINITY, f64::min)
        };
        let ok = if expect_small {
            worst < limit
        } else {
            worst >= limit
        };
        self.verdicts.push(Verdict {
            check: name.to_string(),
            status: if ok { Status::Pass } else { Status::Fail },
            value: Some(worst),
            limit,
            expect_small,
            note: None,
        });
    }

    /// `expect_small = Some(true)` asserts the value vanishes, `Some(false)` that it does not.
    fn property(
        &mut self,
        name: &str,
        expected: Option<bool>,
        limit: f64,
        value: impl Fn(&PointRecord) -> f64,
    ) {
        if let Some(small) = expected {
            self.check(&format!("{name} = {small}"), small, limit, value);
        }
    }

    fn skip(&mut self, name: &str, note: &str) {
        self.verdicts.push(Verdict {
            check: name.to_string(),
            status: Status::Skipped,
            value: None,
            limit: 0.0,
            expect_small: true,
            note: Some(note.to_string()),
        });
    }
}

fn curvature_scale(p: &PointRecord) -> f64 {
    p.curvature.max_abs_riemann.max(1.0)
}

fn judge(entry: &CatalogEntry, points: &[PointRecord], tol: f64) -> Vec<Verdict> {
    let mut j = Judge {
        points,
        verdicts: Vec::new(),
    };
    let ids = |p: &PointRecord| p.curvature.identities;

    j.check("riemann antisymmetry", true, SYMMETRY_TOLERANCE, |p| {
        ids(p).antisymmetry / curvature_scale(p)
    });
    j.check("riemann pair symmetry", true, SYMMETRY_TOLERANCE, |p| {
        ids(p).pair_symmetry / curvature_scale(p)
    });
    j.check("first bianchi", true, SYMMETRY_TOLERANCE, |p| {
        ids(p).first_bianchi / curvature_scale(p)
    });
    j.check("ricci symmetry", true, SYMMETRY_TOLERANCE, |p| {
        ids(p).ricci_symmetry / curvature_scale(p)
    });
    j.check(
        "metric compatibility",
        true,
        METRIC_COMPATIBILITY_TOLERANCE,
        |p| ids(p).nabla_metric,
    );
    j.check("contracted bianchi", true, BIANCHI_TOLERANCE, |p| {
        ids(p).contracted_bianchi / p.curvature.max_abs_nabla_riemann.max(1.0)
    });
    j.check("weyl closure", true, SYMMETRY_TOLERANCE, |p| {
        ids(p).weyl_closure / curvature_scale(p)
    });

    let e = &entry.expected;
    j.property("flat", e.flat, tol, |p| p.curvature.max_abs_riemann);
    j.property("einstein", e.einstein, tol, |p| {
        p.curvature.einstein_manifold_residual / curvature_scale(p)
    });
    j.property("conformally_flat", e.conformally_flat, tol, |p| {
        p.curvature.max_abs_weyl / curvature_scale(p)
    });
    if let Some(r) = e.r {
        j.check("scalar curvature r", true, tol * r.abs().max(1.0), |p| {
            (p.curvature.r - r).abs()
        });
    }
    match (e.kahler, entry.complex_structure.is_some()) {
        (Some(expected), true) => {
            let residual = |p: &PointRecord| {
                let k = p.kahler.expect("complex structure present");
                max_of([
                    k.res_almost_complex,
                    k.res_hermitian,
                    k.res_parallel,
                    k.res_ricci_invariance,
                ])
            };
            j.property("kahler", Some(expected), tol, residual);
        }
        (Some(true), false) => j.check("kahler = true", true, tol, |_| f64::INFINITY),
        (_, false) => j.skip("kahler", "no complex structure"),
        (None, true) => {}
    }
    match &entry.fluid {
        Some(fluid) => {
            let f = |p: &PointRecord| p.fluid.expect("fluid present");
            if let Some(lambda) = e.lambda {
                let given = fluid.lambda;
                j.check("lambda", true, tol * lambda.abs().max(1.0), move |_| {
                    (given - lambda).abs()
                });
                j.check(
                    "pressure relation",
                    true,
                    tol * lambda.abs().max(1.0),
                    |p| f(p).res_pressure_relation,
                );
            }
            j.property("einstein_equation", e.einstein_equation, tol, |p| {
                f(p).res_einstein / curvature_scale(p)
            });
            j.check("velocity normalization", true, tol, |p| {
                (f(p).rho_norm + 1.0).abs()
            });
        }
        None => {
            if e.lambda.is_some() || e.einstein_equation.is_some() {
                j.check("fluid expectations", true, tol, |_| f64::INFINITY);
            }
            j.skip("fluid", "no fluid");
        }
    }
    j.verdicts
}

/// Runs the full pipeline at `count` seeded points of the domain box.
pub fn audit(entry: &CatalogEntry, count: usize, seed: u64, tol: f64) -> Result<AuditReport> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let sample = entry.metric.sample_points(count, seed);
    let points = sample
        .par_iter()
        .enumerate()
        .map(|(i, p)| audit_point(entry, i, p, tol))
        .collect::<Result<Vec<_>>>()?;
    let verdicts = judge(entry, &points, tol);
    let passed = verdicts.iter().all(|v| v.status != Status::Fail);
    Ok(AuditReport {
        metric: entry.metric.name.clone(),
        signature: entry.metric.signature,
        seed,
        tolerance: tol,
        point_count: count,
        expected: entry.expected.clone(),
        points,
        verdicts,
        passed,
    })
}

pub fn report_json(report: &AuditReport) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

fn fmt_value(v: f64) -> String {
    format!("{v:.3e}")
}

pub fn report_text(report: &AuditReport) -> String {
    let mut out = String::new();
    let sig: Vec<&str> = report
        .signature
        .iter()
        .map(|s| if *s < 0 { "-" } else { "+" })
        .collect();
    out += &format!(
        "metric {} ({})  points {}  seed {}  tol {:e}\n",
        report.metric,
        sig.join(""),
        report.point_count,
        report.seed,
        report.tolerance
    );
    for p in &report.points {
        out += &format!(
            "  point {} [{}]  r = {:.10}  |R| = {}  |C| = {}  sigma_min = {:.6}\n",
            p.index,
            p.point
                .iter()
                .map(|x| format!("{x:.6}"))
                .collect::<Vec<_>>()
                .join(", "),
            p.curvature.r,
            fmt_value(p.curvature.max_abs_riemann),
            fmt_value(p.curvature.max_abs_weyl),
            p.wrs_sigma_min,
        );
    }
    for v in &report.verdicts {
        let line = match (&v.status, v.value) {
            (Status::Skipped, _) | (_, None) => {
                format!(
                    "  {:<28} skipped ({})",
                    v.check,
                    v.note.as_deref().unwrap_or("")
                )
            }
            (status, Some(value)) => {
                let relation = if v.expect_small == (value < v.limit) {
                    if v.expect_small {
                        "<"
                    } else {
                        ">="
                    }
                } else if v.expect_small {
                    ">="
                } else {
                    "<"
                };
                let tag = if *status == Status::Pass {
                    "ok"
                } else {
                    "FAIL"
                };
                format!(
                    "  {:<28} {} {} {}  {}",
                    v.check,
                    fmt_value(value),
                    relation,
                    fmt_value(v.limit),
                    tag
                )
            }
        };
        out += &line;
        out.push('\n');
    }
    out += if report.passed {
        "result: PASS\n"
    } else {
        "result: FAIL\n"
    };
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogListing {
    pub name: &'static str,
    pub description: &'static str,
    pub signature: [i8; 4],
    pub has_complex_structure: bool,
    pub has_fluid: bool,
    pub expected: ExpectedProperties,
}

pub fn catalog_listing() -> Vec<CatalogListing> {
    BUILTINS
        .iter()
        .map(|(name, description)| {
            let entry = builtin(name).expect("builtins load");
            CatalogListing {
                name,
                description,
                signature: entry.metric.signature,
                has_complex_structure: entry.complex_structure.is_some(),
                has_fluid: entry.fluid.is_some(),
                expected: entry.expected,
            }
        })
        .collect()
}

fn expected_summary(e: &ExpectedProperties) -> String {
    let mut parts = Vec::new();
    let flags = [
        ("flat", e.flat),
        ("einstein", e.einstein),
        ("conformally_flat", e.conformally_flat),
        ("kahler", e.kahler),
        ("einstein_equation", e.einstein_equation),
    ];
    for (name, value) in flags {
        if let Some(v) = value {
            parts.push(format!("{name}={v}"));
        }
    }
    if let Some(r) = e.r {
        parts.push(format!("r={r}"));
    }
    if let Some(l) = e.lambda {
        parts.push(format!("lambda={l}"));
    }
    parts.join(" ")
}

pub fn catalog_text(listing: &[CatalogListing]) -> String {
    listing
        .iter()
        .map(|l| {
            format!(
                "{:<20} {}  [{}]\n",
                l.name,
                l.description,
                expected_summary(&l.expected)
            )
        })
        .collect()
}
