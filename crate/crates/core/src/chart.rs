//! Chart definitions: expression-valued metric data on a single coordinate
//! patch, JSON (de)serialization, validation, and the built-in catalog.

use crate::autodiff::Real;
use crate::error::{Error, Result};
use crate::expr::{parse_expr, Expr};
use crate::linalg;
use serde::{Deserialize, Serialize};

/// Region of validity of a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Domain {
    Ball { radius: f64 },
    Box { bounds: Vec<[f64; 2]> },
}

impl Domain {
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Domain::Ball { radius } => {
                x.iter().map(|v| v * v).sum::<f64>().sqrt() < *radius
            }
            Domain::Box { bounds } => {
                x.len() == bounds.len()
                    && x.iter()
                        .zip(bounds)
                        .all(|(v, [lo, hi])| *lo < *v && *v < *hi)
            }
        }
    }

    /// Signed margin to the boundary; positive inside.
    pub fn margin(&self, x: &[f64]) -> f64 {
        match self {
            Domain::Ball { radius } => {
                radius - x.iter().map(|v| v * v).sum::<f64>().sqrt()
            }
            Domain::Box { bounds } => x
                .iter()
                .zip(bounds)
                .map(|(v, [lo, hi])| (v - lo).min(hi - v))
                .fold(f64::INFINITY, f64::min),
        }
    }
}

/// A Randers chart: alpha from the matrix of expressions `a`, beta from the
/// covector of expressions `b`, both functions of x only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ChartJson", into = "ChartJson")]
pub struct ChartSpec {
    pub dim: usize,
    /// Row-major n*n entries.
    pub a: Vec<Expr>,
    pub b: Vec<Expr>,
    pub domain: Domain,
}

/// Serialized form: expressions as strings, row-major `a`.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct ChartJson {
    dimension: usize,
    a: Vec<String>,
    b: Vec<String>,
    domain: Domain,
}

impl TryFrom<ChartJson> for ChartSpec {
    type Error = Error;

    fn try_from(j: ChartJson) -> Result<ChartSpec> {
        let n = j.dimension;
        if n < 2 {
            return Err(Error::ChartInvalid(format!(
                "dimension must be at least 2, got {n}"
            )));
        }
        if j.a.len() != n * n {
            return Err(Error::ChartInvalid(format!(
                "metric grid has {} entries, expected {}",
                j.a.len(),
                n * n
            )));
        }
        if j.b.len() != n {
            return Err(Error::ChartInvalid(format!(
                "covector has {} entries, expected {}",
                j.b.len(),
                n
            )));
        }
        if let Domain::Box { bounds } = &j.domain {
            if bounds.len() != n {
                return Err(Error::ChartInvalid(format!(
                    "box domain has {} bounds, expected {}",
                    bounds.len(),
                    n
                )));
            }
            for [lo, hi] in bounds {
                if !(lo < hi) {
                    return Err(Error::ChartInvalid(format!(
                        "empty box interval [{lo}, {hi}]"
                    )));
                }
            }
        }
        if let Domain::Ball { radius } = &j.domain {
            if !(*radius > 0.0) {
                return Err(Error::ChartInvalid(format!(
                    "ball radius must be positive, got {radius}"
                )));
            }
        }
        let parse_all = |texts: &[String]| -> Result<Vec<Expr>> {
            texts
                .iter()
                .map(|t| {
                    let e = parse_expr(t)?;
                    if e.max_coord() > n {
                        return Err(Error::ChartInvalid(format!(
                            "expression '{t}' uses x{} on a chart of dimension {n}",
                            e.max_coord()
                        )));
                    }
                    Ok(e)
                })
                .collect()
        };
        Ok(ChartSpec {
            dim: n,
            a: parse_all(&j.a)?,
            b: parse_all(&j.b)?,
            domain: j.domain,
        })
    }
}

impl From<ChartSpec> for ChartJson {
    fn from(s: ChartSpec) -> ChartJson {
        ChartJson {
            dimension: s.dim,
            a: s.a.iter().map(|e| e.to_string()).collect(),
            b: s.b.iter().map(|e| e.to_string()).collect(),
            domain: s.domain,
        }
    }
}

impl ChartSpec {
    pub fn from_json(text: &str) -> Result<ChartSpec> {
        serde_json::from_str(text)
            .map_err(|e| Error::ChartInvalid(format!("chart JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("chart serialization cannot fail")
    }

    /// Evaluate the metric grid at x (row-major, jet scalars allowed).
    pub fn eval_a<S: Real>(&self, x: &[S]) -> Result<Vec<S>> {
        self.a.iter().map(|e| e.eval(x)).collect()
    }

    /// Evaluate the covector at x.
    pub fn eval_b<S: Real>(&self, x: &[S]) -> Result<Vec<S>> {
        self.b.iter().map(|e| e.eval(x)).collect()
    }

    /// Pointwise norm of the covector in the metric `a`: sqrt(a^{ij} b_i b_j).
    pub fn beta_norm_at(&self, x: &[f64]) -> Result<f64> {
        let n = self.dim;
        let a = self.eval_a::<f64>(x)?;
        let b = self.eval_b::<f64>(x)?;
        let a_inv = linalg::invert(n, &a)?;
        let mut norm2 = 0.0;
        for i in 0..n {
            for j in 0..n {
                norm2 += a_inv[i * n + j] * b[i] * b[j];
            }
        }
        if norm2 < 0.0 {
            return Err(Error::Degenerate(format!(
                "negative squared covector norm {norm2} (metric not positive definite)"
            )));
        }
        Ok(norm2.sqrt())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationFailure {
    pub point: Vec<f64>,
    pub message: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub samples_checked: usize,
    pub min_eigenvalue: f64,
    pub max_beta_norm: f64,
    pub max_symmetry_defect: f64,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Check positive definiteness of a(x) and the regularity bound on the
/// covector norm at each sample. Samples outside the declared domain are
/// failures, not clamped.
pub fn validate_chart(spec: &ChartSpec, samples: &[Vec<f64>]) -> ValidationReport {
    let n = spec.dim;
    let mut report = ValidationReport {
        samples_checked: samples.len(),
        min_eigenvalue: f64::INFINITY,
        max_beta_norm: 0.0,
        max_symmetry_defect: 0.0,
        failures: Vec::new(),
    };
    for x in samples {
        let mut fail = |message: String| {
            report.failures.push(ValidationFailure {
                point: x.clone(),
                message,
            });
        };
        if x.len() != n {
            fail(format!("sample has dimension {}, chart has {}", x.len(), n));
            continue;
        }
        if !spec.domain.contains(x) {
            fail("sample lies outside the declared domain".into());
            continue;
        }
        let a = match spec.eval_a::<f64>(x) {
            Ok(a) => a,
            Err(e) => {
                fail(format!("metric evaluation failed: {e}"));
                continue;
            }
        };
        let mut defect: f64 = 0.0;
        let mut sym = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                defect = defect.max((a[i * n + j] - a[j * n + i]).abs());
                sym[i * n + j] = 0.5 * (a[i * n + j] + a[j * n + i]);
            }
        }
        report.max_symmetry_defect = report.max_symmetry_defect.max(defect);
        if defect > 1e-12 {
            fail(format!("metric grid asymmetric by {defect:.3e}"));
        }
        let min_eig = linalg::sym_eigen_min(n, &sym);
        report.min_eigenvalue = report.min_eigenvalue.min(min_eig);
        if min_eig <= 1e-10 {
            fail(format!("metric not positive definite: min eigenvalue {min_eig:.6e}"));
            continue;
        }
        match spec.beta_norm_at(x) {
            Ok(norm) => {
                report.max_beta_norm = report.max_beta_norm.max(norm);
                if norm >= 1.0 - 1e-10 {
                    fail(format!("covector norm {norm} violates the bound < 1"));
                }
            }
            Err(e) => fail(format!("covector norm failed: {e}")),
        }
    }
    report
}

/// A catalog entry together with a distinguished point and direction used by
/// the geodesic runs.
#[derive(Clone, Debug)]
pub struct CatalogChart {
    pub name: String,
    pub spec: ChartSpec,
    pub basepoint: Vec<f64>,
    pub base_direction: Vec<f64>,
}

/// Optional knobs for [`catalog`]; `None` fields take entry defaults.
#[derive(Clone, Debug, Default)]
pub struct CatalogParams {
    /// Constant covector for `euclidean_randers`.
    pub b: Option<Vec<f64>>,
    /// Domain radius for `funk_ball` (must stay below 1).
    pub radius: Option<f64>,
}

fn sum_of_squares(coords: std::ops::Range<usize>) -> String {
    let terms: Vec<String> = coords.map(|i| format!("x{}^2", i + 1)).collect();
    format!("({})", terms.join(" + "))
}

pub fn catalog(name: &str, dim: usize, params: &CatalogParams) -> Result<CatalogChart> {
    if dim < 2 {
        return Err(Error::Config(format!(
            "catalog charts need dimension at least 2, got {dim}"
        )));
    }
    let n = dim;
    match name {
        "euclidean_randers" => {
            let b = params
                .b
                .clone()
                .unwrap_or_else(|| {
                    let mut b = vec![0.0; n];
                    b[0] = 0.5;
                    b
                });
            if b.len() != n {
                return Err(Error::Config(format!(
                    "covector has {} entries for dimension {n}",
                    b.len()
                )));
            }
            let norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm >= 1.0 {
                return Err(Error::Config(format!(
                    "constant covector norm {norm} must be below 1"
                )));
            }
            let mut a = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    a.push(if i == j { "1".to_string() } else { "0".to_string() });
                }
            }
            let spec = build(
                n,
                a,
                b.iter().map(|v| format!("{v}")).collect(),
                Domain::Ball { radius: 1.0 },
            )?;
            let mut dir = vec![0.0; n];
            dir[0] = 1.0;
            Ok(CatalogChart {
                name: name.into(),
                spec,
                basepoint: vec![0.0; n],
                base_direction: dir,
            })
        }
        "funk_ball" => {
            let radius = params.radius.unwrap_or(0.96);
            if !(radius > 0.0 && radius < 1.0) {
                return Err(Error::Config(format!(
                    "domain radius {radius} must lie in (0, 1)"
                )));
            }
            let s = sum_of_squares(0..n);
            let denom = format!("(1 - {s})");
            let mut a = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j {
                        format!("({denom} + x{}^2) / {denom}^2", i + 1)
                    } else {
                        format!("x{} * x{} / {denom}^2", i + 1, j + 1)
                    };
                    a.push(e);
                }
            }
            let b = (0..n).map(|i| format!("x{} / {denom}", i + 1)).collect();
            let spec = build(n, a, b, Domain::Ball { radius })?;
            // Off-center with a non-radial direction: geodesics from the
            // center are straight by symmetry and every torsion trace
            // degenerates to zero along them.
            let mut basepoint = vec![0.0; n];
            basepoint[0] = 0.1;
            basepoint[1] = 0.05;
            let mut dir = vec![0.0; n];
            dir[0] = 1.0;
            dir[1] = 0.4;
            Ok(CatalogChart {
                name: name.into(),
                spec,
                basepoint,
                base_direction: dir,
            })
        }
        "parallel_beta_product" => {
            if n < 3 {
                return Err(Error::Config(
                    "the product chart needs dimension at least 3 (curved factor + flat factor)"
                        .into(),
                ));
            }
            let u = sum_of_squares(0..n - 1);
            let conf = format!("4 / (1 + {u})^2");
            let mut a = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    let e = if i == j && i < n - 1 {
                        conf.clone()
                    } else if i == j {
                        "1".to_string()
                    } else {
                        "0".to_string()
                    };
                    a.push(e);
                }
            }
            let mut b = vec!["0".to_string(); n];
            b[n - 1] = "0.5".to_string();
            let mut bounds = vec![[-1.6, 1.6]; n];
            bounds[n - 1] = [-1.5, 1.5];
            let spec = build(n, a, b, Domain::Box { bounds })?;
            let mut basepoint = vec![0.0; n];
            basepoint[0] = 1.0;
            let mut dir = vec![0.0; n];
            dir[1] = 1.0;
            dir[n - 1] = 0.2;
            Ok(CatalogChart {
                name: name.into(),
                spec,
                basepoint,
                base_direction: dir,
            })
        }
        "riemannian_sphere" => {
            let s = sum_of_squares(0..n);
            let conf = format!("4 / (1 + {s})^2");
            let mut a = Vec::with_capacity(n * n);
            for i in 0..n {
                for j in 0..n {
                    a.push(if i == j { conf.clone() } else { "0".to_string() });
                }
            }
            let b = vec!["0".to_string(); n];
            let spec = build(n, a, b, Domain::Ball { radius: 2.0 })?;
            let mut basepoint = vec![0.0; n];
            basepoint[0] = 1.0;
            let mut dir = vec![0.0; n];
            dir[1] = 1.0;
            Ok(CatalogChart {
                name: name.into(),
                spec,
                basepoint,
                base_direction: dir,
            })
        }
        other => Err(Error::Config(format!(
            "unknown catalog chart '{other}' (known: euclidean_randers, funk_ball, parallel_beta_product, riemannian_sphere)"
        ))),
    }
}

fn build(n: usize, a: Vec<String>, b: Vec<String>, domain: Domain) -> Result<ChartSpec> {
    ChartSpec::try_from(ChartJson {
        dimension: n,
        a,
        b,
        domain,
    })
}
