//! Built-in metrics and the JSON metric-definition format.
//!
//! ```json
//! {
//!   "name": "minkowski",
//!   "signature": [-1, 1, 1, 1],
//!   "coordinates": ["t", "x", "y", "z"],
//!   "metric": { "0,0": "-1", "1,1": "1", "2,2": "1", "3,3": "1" },
//!   "complex_structure": { "1,0": "1", "0,1": "-1" },
//!   "fluid": { "sigma": "0", "p": "0", "rho": ["1", "0", "0", "0"], "lambda": 0, "k": 1 },
//!   "domain": [[-1, 1], [-1, 1], [-1, 1], [-1, 1]],
//!   "expected": { "flat": true, "r": 0 }
//! }
//! ```
//!
//! Metric keys are `"i,j"` with `i <= j`; omitted entries are zero.
//! `complex_structure` keys `"i,j"` give `F^i_j`. `complex_structure`,
//! `fluid`, `expected`, `coordinates` and `description` are optional.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{parse_expr, ScalarExpr};
use crate::geometry::MetricStructure;
use crate::kahler::ComplexStructure;
use crate::relativity::{FluidState, NORMALIZATION_TOLERANCE};

/// Properties a metric is known to have, checked by the audit.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedProperties {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat: Option<bool>,
    /// `S = (r/4) g`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conformally_flat: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kahler: Option<bool>,
    /// Constant scalar curvature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Cosmological constant of the fluid, satisfying `λ - k p = r/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// The fluid satisfies the Einstein equation with cosmological constant.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub einstein_equation: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub metric: MetricStructure,
    pub coordinates: [String; 4],
    pub description: String,
    pub complex_structure: Option<ComplexStructure>,
    pub fluid: Option<FluidState>,
    pub expected: ExpectedProperties,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FluidFile {
    sigma: String,
    p: String,
    rho: Vec<String>,
    lambda: f64,
    #[serde(default = "default_k")]
    k: f64,
}

fn default_k() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    description: Option<String>,
    signature: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coordinates: Option<Vec<String>>,
    metric: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    complex_structure: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    fluid: Option<FluidFile>,
    domain: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expected: Option<ExpectedProperties>,
}

fn parse_field(text: &str, field: &str) -> Result<ScalarExpr> {
    parse_expr(text).map_err(|e| e.in_field(field))
}

fn parse_key(key: &str, section: &str) -> Result<(usize, usize)> {
    let location = format!("{section}[\"{key}\"]");
    let parts: Vec<&str> = key.split(',').map(str::trim).collect();
    let [i, j] = parts.as_slice() else {
        return Err(Error::schema(location, "key must have the form \"i,j\""));
    };
    let parse = |s: &str| -> Result<usize> {
        match s.parse::<usize>() {
            Ok(v) if v < 4 => Ok(v),
            _ => Err(Error::schema(
                &location,
                format!("index '{s}' is not in 0..3"),
            )),
        }
    };
    Ok((parse(i)?, parse(j)?))
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (n, l) in text.split_inclusive('\n').enumerate() {
        if n + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len();
    }
    text.len()
}

/// Parses and validates a metric definition.
pub fn parse_metric_json(text: &str) -> Result<CatalogEntry> {
    let file: MetricFile = serde_json::from_str(text).map_err(|e| {
        let location = format!("line {} column {}", e.line(), e.column());
        let full = e.to_string();
        let message = full
            .strip_suffix(&format!(" at {location}"))
            .unwrap_or(&full)
            .to_string();
        match e.classify() {
            serde_json::error::Category::Data => Error::schema(location, message),
            _ => Error::Parse {
                field: None,
                offset: byte_offset(text, e.line(), e.column()),
                message,
            },
        }
    })?;
    from_file(file)
}

fn from_file(file: MetricFile) -> Result<CatalogEntry> {
    let signature: [i8; 4] = match file.signature.as_slice() {
        [a, b, c, d] if [a, b, c, d].iter().all(|s| **s == 1 || **s == -1) => {
            [*a as i8, *b as i8, *c as i8, *d as i8]
        }
        _ => {
            return Err(Error::schema(
                "signature",
                "expected 4 entries, each 1 or -1",
            ))
        }
    };
    let domain: [[f64; 2]; 4] = file
        .domain
        .as_slice()
        .try_into()
        .map_err(|_| Error::schema("domain", "expected 4 [lo, hi] intervals"))?;
    for (axis, [lo, hi]) in domain.iter().enumerate() {
        if !(lo <= hi) {
            return Err(Error::schema(
                format!("domain[{axis}]"),
                format!("lower bound {lo} exceeds upper bound {hi}"),
            ));
        }
    }
    let coordinates: [String; 4] = match file.coordinates {
        None => std::array::from_fn(|i| format!("x{i}")),
        Some(names) => names
            .try_into()
            .map_err(|_| Error::schema("coordinates", "expected 4 names"))?,
    };

    let mut entries = BTreeMap::new();
    for (key, text) in &file.metric {
        let (i, j) = parse_key(key, "metric")?;
        if i > j {
            return Err(Error::schema(
                format!("metric[\"{key}\"]"),
                "only entries with i <= j may be given",
            ));
        }
        if entries
            .insert((i, j), parse_field(text, &format!("metric[\"{key}\"]"))?)
            .is_some()
        {
            return Err(Error::schema(
                format!("metric[\"{key}\"]"),
                "duplicate entry",
            ));
        }
    }
    let metric = MetricStructure::new(file.name, entries, signature, domain)?;

    let complex_structure = match file.complex_structure {
        None => None,
        Some(map) => {
            let mut c: [[ScalarExpr; 4]; 4] =
                std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
            let mut seen = [[false; 4]; 4];
            for (key, text) in &map {
                let (i, j) = parse_key(key, "complex_structure")?;
                if std::mem::replace(&mut seen[i][j], true) {
                    return Err(Error::schema(
                        format!("complex_structure[\"{key}\"]"),
                        "duplicate entry",
                    ));
                }
                c[i][j] = parse_field(text, &format!("complex_structure[\"{key}\"]"))?;
            }
            Some(ComplexStructure::new(c))
        }
    };

    let fluid = match file.fluid {
        None => None,
        Some(f) => {
            let rho: [String; 4] = f
                .rho
                .try_into()
                .map_err(|_| Error::schema("fluid.rho", "expected 4 expressions"))?;
            let mut rho_exprs: [ScalarExpr; 4] = std::array::from_fn(|_| ScalarExpr::zero());
            for (i, text) in rho.iter().enumerate() {
                rho_exprs[i] = parse_field(text, &format!("fluid.rho[{i}]"))?;
            }
            let state = FluidState::new(
                parse_field(&f.sigma, "fluid.sigma")?,
                parse_field(&f.p, "fluid.p")?,
                rho_exprs,
                f.lambda,
                f.k,
            )
            .map_err(|e| match e {
                Error::Domain(msg) => Error::schema("fluid", msg),
                other => other,
            })?;
            Some(state)
        }
    };

    let entry = CatalogEntry {
        metric,
        coordinates,
        description: file.description.unwrap_or_default(),
        complex_structure,
        fluid,
        expected: file.expected.unwrap_or_default(),
    };
    validate(&entry)?;
    Ok(entry)
}

/// Signature and velocity normalization at the domain center.
fn validate(entry: &CatalogEntry) -> Result<()> {
    let center = entry.metric.center();
    let g = entry.metric.check_signature(&center)?;
    if let Some(fluid) = &entry.fluid {
        let rho = fluid.velocity_at(&center)?;
        let norm = g.inner(&rho, &rho);
        if (norm + 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Normalization { norm });
        }
    }
    Ok(())
}

pub fn load_metric_file(path: impl AsRef<Path>) -> Result<CatalogEntry> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
    parse_metric_json(&text)
}

fn to_file(entry: &CatalogEntry) -> MetricFile {
    let m = &entry.metric;
    let mut metric = BTreeMap::new();
    for i in 0..4 {
        for j in i..4 {
            let e = m.component(i, j);
            if !e.is_zero() {
                metric.insert(format!("{i},{j}"), e.to_string());
            }
        }
    }
    let complex_structure = entry.complex_structure.as_ref().map(|f| {
        let mut map = BTreeMap::new();
        for i in 0..4 {
            for j in 0..4 {
                let e = f.component(i, j);
                if !e.is_zero() {
                    map.insert(format!("{i},{j}"), e.to_string());
                }
            }
        }
        map
    });
    let fluid = entry.fluid.as_ref().map(|f| FluidFile {
        sigma: f.sigma.to_string(),
        p: f.pressure.to_string(),
        rho: f.rho.iter().map(ToString::to_string).collect(),
        lambda: f.lambda,
        k: f.k,
    });
    MetricFile {
        name: m.name.clone(),
        description: (!entry.description.is_empty()).then(|| entry.description.clone()),
        signature: m.signature.iter().map(|&s| s as i64).collect(),
        coordinates: Some(entry.coordinates.to_vec()),
        metric,
        complex_structure,
        fluid,
        domain: m.domain.to_vec(),
        expected: (entry.expected != ExpectedProperties::default()).then(|| entry.expected.clone()),
    }
}

/// Serializes an entry in the metric-file format; the output reparses to an
/// identical entry.
pub fn to_json(entry: &CatalogEntry) -> String {
    serde_json::to_string_pretty(&to_file(entry)).expect("metric file serializes")
}

/// Names accepted by [`builtin`], with one-line descriptions.
pub const BUILTINS: [(&str, &str); 8] = [
    (
        "minkowski",
        "flat Lorentzian space-time, vacuum observer at rest",
    ),
    (
        "euclidean",
        "flat Riemannian 4-space with its constant complex structure",
    ),
    (
        "neutral_kahler_flat",
        "flat neutral-signature (-,-,+,+) metric with a constant Kähler structure",
    ),
    (
        "sphere4",
        "round 4-sphere of radius a (default 1), hyperspherical chart",
    ),
    (
        "de_sitter",
        "de Sitter static patch, unit Hubble scale, lambda = 3",
    ),
    (
        "flrw",
        "spatially flat FLRW with a(t) = t^n (default n = 2/3, dust) and its perfect fluid",
    ),
    (
        "schwarzschild",
        "Schwarzschild exterior of mass m (default 1), static observer",
    ),
    (
        "fubini_study",
        "Fubini-Study metric on a chart of CP^2 with its complex structure",
    ),
];

fn e(text: &str) -> ScalarExpr {
    parse_expr(text).unwrap_or_else(|err| panic!("builtin expression '{text}': {err}"))
}

fn num(v: f64) -> String {
    if v < 0.0 {
        format!("(-{:?})", -v)
    } else {
        format!("{v:?}")
    }
}

fn diag(entries: [String; 4]) -> Vec<((usize, usize), ScalarExpr)> {
    entries
        .iter()
        .enumerate()
        .map(|(i, s)| ((i, i), e(s)))
        .collect()
}

/// Standard complex structure `F e0 = e1, F e1 = -e0, F e2 = e3, F e3 = -e2`.
pub fn standard_complex_structure() -> ComplexStructure {
    let mut c: [[ScalarExpr; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
    c[1][0] = ScalarExpr::Const(1.0);
    c[0][1] = ScalarExpr::Const(-1.0);
    c[3][2] = ScalarExpr::Const(1.0);
    c[2][3] = ScalarExpr::Const(-1.0);
    ComplexStructure::new(c)
}

/// An orthogonal almost complex structure on Euclidean 4-space that pairs
/// `e1` with `cos(x0) e2 + sin(x0) e3`. It is not parallel.
pub fn rotating_complex_structure() -> ComplexStructure {
    let mut c: [[ScalarExpr; 4]; 4] =
        std::array::from_fn(|_| std::array::from_fn(|_| ScalarExpr::zero()));
    c[2][0] = e("-sin(x0)");
    c[3][0] = e("cos(x0)");
    c[2][1] = e("cos(x0)");
    c[3][1] = e("sin(x0)");
    c[0][2] = e("sin(x0)");
    c[1][2] = e("-cos(x0)");
    c[0][3] = e("-cos(x0)");
    c[1][3] = e("-sin(x0)");
    ComplexStructure::new(c)
}

fn at_rest() -> [ScalarExpr; 4] {
    [e("1"), e("0"), e("0"), e("0")]
}

fn static_observer(g00_magnitude: &str) -> [ScalarExpr; 4] {
    [
        e(&format!("1/sqrt({g00_magnitude})")),
        e("0"),
        e("0"),
        e("0"),
    ]
}

fn names(list: [&str; 4]) -> [String; 4] {
    list.map(String::from)
}

fn split_args(name: &str) -> Result<(&str, Option<f64>)> {
    let name = name.trim();
    let Some(open) = name.find('(') else {
        return Ok((name, None));
    };
    let inner = name[open + 1..]
        .strip_suffix(')')
        .ok_or_else(|| Error::UnknownMetric(name.to_string()))?;
    let value: f64 = inner
        .trim()
        .parse()
        .map_err(|_| Error::UnknownMetric(name.to_string()))?;
    if !value.is_finite() {
        return Err(Error::UnknownMetric(name.to_string()));
    }
    Ok((&name[..open], Some(value)))
}

/// Looks up a built-in metric: `minkowski`, `euclidean`, `neutral_kahler_flat`,
/// `sphere4[(a)]`, `de_sitter`, `flrw[(n)]`, `schwarzschild[(m)]`, `fubini_study`.
pub fn builtin(name: &str) -> Result<CatalogEntry> {
    let (base, arg) = split_args(name)?;
    let describe = |base: &str| {
        BUILTINS
            .iter()
            .find(|(n, _)| *n == base)
            .map(|(_, d)| d.to_string())
            .unwrap_or_default()
    };
    let no_arg = |arg: Option<f64>| match arg {
        None => Ok(()),
        Some(_) => Err(Error::UnknownMetric(name.to_string())),
    };
    let positive = |arg: Option<f64>, default: f64| match arg {
        None => Ok(default),
        Some(v) if v > 0.0 => Ok(v),
        Some(_) => Err(Error::UnknownMetric(name.to_string())),
    };
    let full_name = name.trim().to_string();

    let entry = match base {
        "minkowski" => {
            no_arg(arg)?;
            CatalogEntry {
                metric: MetricStructure::new(
                    full_name,
                    diag(["-1", "1", "1", "1"].map(String::from)),
                    [-1, 1, 1, 1],
                    [[-1.0, 1.0]; 4],
                )?,
                coordinates: names(["t", "x", "y", "z"]),
                description: describe(base),
                complex_structure: None,
                fluid: Some(FluidState::vacuum(at_rest(), 0.0)),
                expected: ExpectedProperties {
                    flat: Some(true),
                    einstein: Some(true),
                    conformally_flat: Some(true),
                    r: Some(0.0),
                    lambda: Some(0.0),
                    einstein_equation: Some(true),
                    ..Default::default()
                },
            }
        }
        "euclidean" => {
            no_arg(arg)?;
            CatalogEntry {
                metric: MetricStructure::new(
                    full_name,
                    diag(["1", "1", "1", "1"].map(String::from)),
                    [1, 1, 1, 1],
                    [[-1.0, 1.0]; 4],
                )?,
                coordinates: names(["x", "y", "u", "v"]),
                description: describe(base),
                complex_structure: Some(standard_complex_structure()),
                fluid: None,
                expected: ExpectedProperties {
                    flat: Some(true),
                    einstein: Some(true),
                    conformally_flat: Some(true),
                    kahler: Some(true),
                    r: Some(0.0),
                    ..Default::default()
                },
            }
        }
        "neutral_kahler_flat" => {
            no_arg(arg)?;
            CatalogEntry {
                metric: MetricStructure::new(
                    full_name,
                    diag(["-1", "-1", "1", "1"].map(String::from)),
                    [-1, -1, 1, 1],
                    [[-1.0, 1.0]; 4],
                )?,
                coordinates: names(["t", "s", "x", "y"]),
                description: describe(base),
                complex_structure: Some(standard_complex_structure()),
                fluid: Some(FluidState::vacuum(at_rest(), 0.0)),
                expected: ExpectedProperties {
                    flat: Some(true),
                    einstein: Some(true),
                    conformally_flat: Some(true),
                    kahler: Some(true),
                    r: Some(0.0),
                    lambda: Some(0.0),
                    einstein_equation: Some(true),
                },
            }
        }
        "sphere4" => {
            let a = positive(arg, 1.0)?;
            let a2 = num(a * a);
            let metric = MetricStructure::new(
                full_name,
                diag([
                    a2.clone(),
                    format!("{a2}*sin(x0)^2"),
                    format!("{a2}*sin(x0)^2*sin(x1)^2"),
                    format!("{a2}*sin(x0)^2*sin(x1)^2*sin(x2)^2"),
                ]),
                [1, 1, 1, 1],
                [[0.5, 2.6], [0.5, 2.6], [0.5, 2.6], [0.0, 6.0]],
            )?;
            CatalogEntry {
                metric,
                coordinates: names(["chi", "theta", "phi", "psi"]),
                description: describe(base),
                complex_structure: None,
                fluid: None,
                expected: ExpectedProperties {
                    flat: Some(false),
                    einstein: Some(true),
                    conformally_flat: Some(true),
                    r: Some(12.0 / (a * a)),
                    ..Default::default()
                },
            }
        }
        "de_sitter" => {
            no_arg(arg)?;
            let metric = MetricStructure::new(
                full_name,
                diag(["-(1 - x1^2)", "1/(1 - x1^2)", "x1^2", "x1^2*sin(x2)^2"].map(String::from)),
                [-1, 1, 1, 1],
                [[-1.0, 1.0], [0.1, 0.9], [0.5, 2.6], [0.0, 6.0]],
            )?;
            CatalogEntry {
                metric,
                coordinates: names(["t", "r", "theta", "phi"]),
                description: describe(base),
                complex_structure: None,
                fluid: Some(FluidState::vacuum(static_observer("1 - x1^2"), 3.0)),
                expected: ExpectedProperties {
                    flat: Some(false),
                    einstein: Some(true),
                    conformally_flat: Some(true),
                    r: Some(12.0),
                    lambda: Some(3.0),
                    einstein_equation: Some(true),
                    ..Default::default()
                },
            }
        }
        "flrw" => {
            let n = positive(arg, 2.0 / 3.0)?;
            let scale = format!("x0^{}", num(2.0 * n));
            let metric = MetricStructure::new(
                full_name,
                diag(["-1".to_string(), scale.clone(), scale.clone(), scale]),
                [-1, 1, 1, 1],
                [[1.0, 3.0], [-1.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]],
            )?;
            // Friedmann equations with k = 1, lambda = 0:
            // sigma = 3 H^2, p = -(2 a''/a + H^2), H = n/t
            let sigma = e(&format!("{}/x0^2", num(3.0 * n * n)));
            let pressure = e(&format!("{}/x0^2", num(n * (2.0 - 3.0 * n))));
            CatalogEntry {
                metric,
                coordinates: names(["t", "x", "y", "z"]),
                description: describe(base),
                complex_structure: None,
                fluid: Some(FluidState::new(sigma, pressure, at_rest(), 0.0, 1.0)?),
                expected: ExpectedProperties {
                    flat: Some(false),
                    einstein: Some(false),
                    conformally_flat: Some(true),
                    einstein_equation: Some(true),
                    ..Default::default()
                },
            }
        }
        "schwarzschild" => {
            let m = positive(arg, 1.0)?;
            let lapse = format!("1 - {}/x1", num(2.0 * m));
            let metric = MetricStructure::new(
                full_name,
                diag([
                    format!("-({lapse})"),
                    format!("1/({lapse})"),
                    "x1^2".into(),
                    "x1^2*sin(x2)^2".into(),
                ]),
                [-1, 1, 1, 1],
                [[-1.0, 1.0], [3.0 * m, 6.0 * m], [0.5, 2.6], [0.0, 6.0]],
            )?;
            CatalogEntry {
                metric,
                coordinates: names(["t", "r", "theta", "phi"]),
                description: describe(base),
                complex_structure: None,
                fluid: Some(FluidState::vacuum(static_observer(&lapse), 0.0)),
                expected: ExpectedProperties {
                    flat: Some(false),
                    einstein: Some(true),
                    conformally_flat: Some(false),
                    r: Some(0.0),
                    lambda: Some(0.0),
                    einstein_equation: Some(true),
                    ..Default::default()
                },
            }
        }
        "fubini_study" => {
            no_arg(arg)?;
            // complex coordinates z1 = x0 + i x1, z2 = x2 + i x3, potential ln(1 + |z|^2)
            let s2 = "(1 + x0^2 + x1^2 + x2^2 + x3^2)^2";
            let p11 = format!("(1 + x2^2 + x3^2)/{s2}");
            let p22 = format!("(1 + x0^2 + x1^2)/{s2}");
            let p12 = format!("-(x0*x2 + x1*x3)/{s2}");
            let q12 = format!("(x1*x2 - x0*x3)/{s2}");
            let entries = vec![
                ((0, 0), e(&p11)),
                ((1, 1), e(&p11)),
                ((2, 2), e(&p22)),
                ((3, 3), e(&p22)),
                ((0, 2), e(&p12)),
                ((1, 3), e(&p12)),
                ((0, 3), e(&q12)),
                ((1, 2), e(&format!("-({q12})"))),
            ];
            CatalogEntry {
                metric: MetricStructure::new(full_name, entries, [1, 1, 1, 1], [[-1.0, 1.0]; 4])?,
                coordinates: names(["x1", "y1", "x2", "y2"]),
                description: describe(base),
                complex_structure: Some(standard_complex_structure()),
                fluid: None,
                expected: ExpectedProperties {
                    flat: Some(false),
                    einstein: Some(true),
                    conformally_flat: Some(false),
                    kahler: Some(true),
                    r: Some(24.0),
                    ..Default::default()
                },
            }
        }
        _ => return Err(Error::UnknownMetric(name.to_string())),
    };
    validate(&entry)?;
    Ok(entry)
}
