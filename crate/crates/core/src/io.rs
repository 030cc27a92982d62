//! JSON and CSV formats for instances, matrices, point measures, map output
//! and verification reports.
//!
//! Readers accept plain JSON numbers (read as binary64, then widened) or
//! decimal strings (parsed at full working precision). Writers always emit
//! decimal strings that round-trip the scalar mode in use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::measure::PointMeasure;
use crate::pair::SpectralPair;
use crate::report::{CheckStatus, VerificationReport};
use crate::scalar::Scalar;
use crate::specmap::{MapDiagnostics, SpectralMapOutput};

#[derive(Deserialize)]
#[serde(untagged)]
enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    fn value<T: Scalar>(&self) -> Result<T> {
        match self {
            Number::Float(x) => Ok(T::of(*x)),
            Number::Text(s) => T::parse_decimal(s).map_err(|e| Error::Parse(e.to_string())),
        }
    }
}

fn values<T: Scalar>(xs: &[Number]) -> Result<Vec<T>> {
    xs.iter().map(Number::value).collect()
}

fn decimals<T: Scalar>(xs: &[T]) -> Vec<String> {
    xs.iter().map(|x| x.to_decimal()).collect()
}

fn from_json<'a, D: Deserialize<'a>>(text: &'a str) -> Result<D> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<S: Serialize>(value: &S) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceIn {
    n: usize,
    a: Vec<Number>,
    #[serde(rename = "A")]
    weights: Vec<Number>,
}

#[derive(Serialize)]
struct InstanceOut {
    n: usize,
    a: Vec<String>,
    #[serde(rename = "A")]
    weights: Vec<String>,
}

/// Reads `{"n": N, "a": [...], "A": [...]}` and validates it.
pub fn parse_instance<T: Scalar>(text: &str) -> Result<SpectralPair<T>> {
    let raw: InstanceIn = from_json(text)?;
    if raw.a.len() != raw.weights.len() {
        return Err(Error::LengthMismatch {
            nodes: raw.a.len(),
            weights: raw.weights.len(),
        });
    }
    if raw.n != raw.a.len() {
        return Err(Error::DimensionMismatch {
            expected: raw.n,
            found: raw.a.len(),
        });
    }
    SpectralPair::new(values(&raw.a)?, values(&raw.weights)?)
}

pub fn instance_to_json<T: Scalar>(p: &SpectralPair<T>) -> String {
    to_json(&InstanceOut {
        n: p.len(),
        a: decimals(p.nodes()),
        weights: decimals(p.weights()),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixIn {
    n: usize,
    rows: Vec<Vec<Number>>,
}

#[derive(Serialize)]
struct MatrixOut {
    n: usize,
    rows: Vec<Vec<String>>,
}

fn matrix_rows<T: Scalar>(m: &Matrix<T>) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| decimals(r)).collect()
}

/// Reads a square matrix `{"n": N, "rows": [[...], ...]}`.
pub fn parse_matrix<T: Scalar>(text: &str) -> Result<Matrix<T>> {
    let raw: MatrixIn = from_json(text)?;
    if raw.rows.len() != raw.n {
        return Err(Error::DimensionMismatch {
            expected: raw.n,
            found: raw.rows.len(),
        });
    }
    if raw.n == 0 {
        return Err(Error::EmptyInput);
    }
    let rows = raw
        .rows
        .iter()
        .map(|r| {
            if r.len() != raw.n {
                return Err(Error::DimensionMismatch {
                    expected: raw.n,
                    found: r.len(),
                });
            }
            values(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Matrix::from_rows(rows)
}

pub fn matrix_to_json<T: Scalar>(m: &Matrix<T>) -> String {
    to_json(&MatrixOut {
        n: m.rows(),
        rows: matrix_rows(m),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomIn {
    x: Number,
    m: Number,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeasureIn {
    atoms: Vec<AtomIn>,
}

#[derive(Serialize)]
struct AtomOut {
    x: String,
    m: String,
}

#[derive(Serialize)]
struct MeasureOut {
    atoms: Vec<AtomOut>,
}

/// Reads `{"atoms": [{"x": ..., "m": ...}, ...]}`.
pub fn parse_measure<T: Scalar>(text: &str) -> Result<PointMeasure<T>> {
    let raw: MeasureIn = from_json(text)?;
    let atoms = raw
        .atoms
        .iter()
        .map(|a| Ok((a.x.value()?, a.m.value()?)))
        .collect::<Result<Vec<_>>>()?;
    PointMeasure::new(atoms)
}

pub fn measure_to_json<T: Scalar>(m: &PointMeasure<T>) -> String {
    to_json(&MeasureOut {
        atoms: m
            .atoms()
            .into_iter()
            .map(|(x, w)| AtomOut {
                x: x.to_decimal(),
                m: w.to_decimal(),
            })
            .collect(),
    })
}

#[derive(Serialize)]
struct DiagnosticsOut {
    kappa: f64,
    orthogonality_residual: f64,
    eigen_residual: f64,
    min_projection: f64,
    sweeps: usize,
}

impl From<&MapDiagnostics> for DiagnosticsOut {
    fn from(d: &MapDiagnostics) -> Self {
        Self {
            kappa: d.kappa,
            orthogonality_residual: d.orthogonality,
            eigen_residual: d.eigen_residual,
            min_projection: d.min_projection,
            sweeps: d.sweeps,
        }
    }
}

#[derive(Serialize)]
struct MapOut {
    mode: String,
    n: usize,
    b: Vec<String>,
    #[serde(rename = "B")]
    weights: Vec<String>,
    #[serde(rename = "U")]
    u: Vec<Vec<String>>,
    diagnostics: DiagnosticsOut,
}

/// `{"mode", "n", "b", "B", "U", "diagnostics"}`; `U` is row-major with
/// row `k` the `k`-th eigenvector.
pub fn map_output_to_json<T: Scalar>(out: &SpectralMapOutput<T>) -> String {
    let image = out.image();
    to_json(&MapOut {
        mode: T::MODE.to_string(),
        n: image.len(),
        b: decimals(image.nodes()),
        weights: decimals(image.weights()),
        u: matrix_rows(out.u_matrix()),
        diagnostics: out.diagnostics().into(),
    })
}

#[derive(Serialize)]
struct CheckOut<'a> {
    name: &'a str,
    residual: String,
    tolerance: String,
    passed: bool,
    status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a str>,
}

#[derive(Serialize)]
struct ReportOut<'a> {
    checks: Vec<CheckOut<'a>>,
    overall: bool,
}

fn number(x: f64) -> String {
    if x.is_finite() {
        x.to_decimal()
    } else {
        format!("{x}")
    }
}

/// `{"checks": [{"name", "residual", "tolerance", "passed", "status",
/// "detail"?}], "overall"}` with residual and tolerance as decimal strings.
pub fn report_to_json(r: &VerificationReport) -> String {
    to_json(&ReportOut {
        checks: r
            .checks
            .iter()
            .map(|c| CheckOut {
                name: &c.name,
                residual: number(c.residual),
                tolerance: number(c.tolerance),
                passed: c.passed(),
                status: c.status,
                detail: c.detail.as_deref(),
            })
            .collect(),
        overall: r.overall(),
    })
}

/// Header `name,residual,tolerance,passed`, one row per check.
pub fn report_to_csv(r: &VerificationReport) -> String {
    let mut s = String::from("name,residual,tolerance,passed\n");
    for c in &r.checks {
        s.push_str(&format!(
            "{},{},{},{}\n",
            c.name,
            number(c.residual),
            number(c.tolerance),
            c.passed()
        ));
    }
    s
}
