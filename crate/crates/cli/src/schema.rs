//! JSON file formats. Matrices are row-major arrays of arrays and a sequence
//! index `k` is the outer array index.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use varmatch::{
    CovSequence, Error, ExistenceReport, MaInput, MatPoly, PathPoint, PseudoPoly, Result,
    SolveReport,
};

pub type MatrixJson = Vec<Vec<f64>>;

pub fn matrix_to_json(a: &DMatrix<f64>) -> MatrixJson {
    (0..a.nrows())
        .map(|i| (0..a.ncols()).map(|j| a[(i, j)]).collect())
        .collect()
}

pub fn matrix_from_json(rows: &MatrixJson, m: usize, what: &str) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected a {m}x{m} matrix"
        )));
    }
    let a = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    if !a.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(format!("{what}: non-finite entry")));
    }
    Ok(a)
}

/// Infers `m` from the first matrix.
fn seq_from_json(seq: &[MatrixJson], what: &str) -> Result<Vec<DMatrix<f64>>> {
    let m = seq
        .first()
        .ok_or_else(|| Error::InvalidInput(format!("{what}: empty sequence")))?
        .len();
    seq_from_json_sized(seq, m, seq.len().saturating_sub(1), what)
}

fn seq_from_json_sized(
    seq: &[MatrixJson],
    m: usize,
    n: usize,
    what: &str,
) -> Result<Vec<DMatrix<f64>>> {
    if m == 0 {
        return Err(Error::InvalidInput(format!("{what}: m must be positive")));
    }
    if seq.len() != n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "{what}: expected {} matrices, got {}",
            n + 1,
            seq.len()
        )));
    }
    seq.iter()
        .enumerate()
        .map(|(k, rows)| matrix_from_json(rows, m, &format!("{what}[{k}]")))
        .collect()
}

pub fn poly_to_json(a: &MatPoly) -> Vec<MatrixJson> {
    a.coeffs().iter().map(matrix_to_json).collect()
}

pub fn poly_from_json(seq: &[MatrixJson], what: &str) -> Result<MatPoly> {
    MatPoly::new(seq_from_json(seq, what)?)
}

pub fn pseudo_from_json(seq: &[MatrixJson], what: &str) -> Result<PseudoPoly> {
    PseudoPoly::new(seq_from_json(seq, what)?)
}

pub fn cov_to_json(c: &CovSequence) -> Vec<MatrixJson> {
    c.coeffs().iter().map(matrix_to_json).collect()
}

pub fn cov_from_json(seq: &[MatrixJson], what: &str) -> Result<CovSequence> {
    CovSequence::new(seq_from_json(seq, what)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MaJson {
    Polynomial { coefficients: Vec<MatrixJson> },
    Pseudo { coefficients: Vec<MatrixJson> },
    Trivial,
}

/// Per-problem solver overrides. Command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_newton: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_init: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemFile {
    pub m: usize,
    pub n: usize,
    pub covariances: Vec<MatrixJson>,
    pub ma: MaJson,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<SolveOptions>,
    /// AR polynomial that generated the data, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_ar: Option<Vec<MatrixJson>>,
}

impl ProblemFile {
    pub fn data(&self) -> Result<CovSequence> {
        CovSequence::new(seq_from_json_sized(
            &self.covariances,
            self.m,
            self.n,
            "covariances",
        )?)
    }

    pub fn ma_input(&self) -> Result<MaInput> {
        Ok(match &self.ma {
            MaJson::Polynomial { coefficients } => MaInput::Polynomial(MatPoly::new(
                seq_from_json_sized(coefficients, self.m, self.n, "ma.coefficients")?,
            )?),
            MaJson::Pseudo { coefficients } => MaInput::Pseudo(PseudoPoly::new(
                seq_from_json_sized(coefficients, self.m, self.n, "ma.coefficients")?,
            )?),
            MaJson::Trivial => MaInput::Trivial,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPointJson {
    pub t: f64,
    pub iters: usize,
    /// `null` when the Jacobian is exactly singular.
    pub cond: Option<f64>,
    pub det_sign: i8,
}

impl From<&PathPoint> for PathPointJson {
    fn from(p: &PathPoint) -> Self {
        Self {
            t: p.t,
            iters: p.newton_iters,
            cond: p.jacobian_cond.is_finite().then_some(p.jacobian_cond),
            det_sign: p.jacobian_det_sign,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExistenceJson {
    pub det_pn: f64,
    pub trace_p0: f64,
    #[serde(rename = "lambda_min")]
    pub lambda_min: f64,
    pub holds: bool,
}

impl From<&ExistenceReport> for ExistenceJson {
    fn from(r: &ExistenceReport) -> Self {
        Self {
            det_pn: r.det_pn,
            trace_p0: r.trace_p0,
            lambda_min: r.lambda_min,
            holds: r.holds(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureJson {
    pub class: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub residual: Option<f64>,
    pub verified: bool,
    pub max_deviation: Option<f64>,
    pub path: Vec<PathPointJson>,
    pub normalized: bool,
    #[serde(rename = "theorem1")]
    pub existence: Option<ExistenceJson>,
    #[serde(default)]
    pub warnings: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<FailureJson>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    /// Empty when the solve failed before producing an iterate.
    pub ar: Vec<MatrixJson>,
    pub diagnostics: Diagnostics,
}

impl SolutionFile {
    pub fn from_report(r: &SolveReport) -> Self {
        Self {
            ar: poly_to_json(&r.a),
            diagnostics: Diagnostics {
                residual: Some(r.residual),
                verified: r.verified(),
                max_deviation: r.verification.as_ref().map(|v| v.max_deviation),
                path: r.path.iter().map(PathPointJson::from).collect(),
                normalized: r.normalized,
                existence: Some(ExistenceJson::from(&r.existence)),
                warnings: r.warnings.clone(),
                error: None,
            },
        }
    }

    pub fn ar_poly(&self) -> Result<MatPoly> {
        poly_from_json(&self.ar, "ar")
    }
}

/// `{"coefficients": [P_0, ..., P_n]}` for the factor command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoFile {
    pub coefficients: Vec<MatrixJson>,
}

/// `{"ar": [...], "ma": [...]}` for the cov command; a missing MA part means `B = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub ar: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ma: Option<Vec<MatrixJson>>,
}

/// `{"ar": [...], "covariances": [...]}` for the Jacobian check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JacobianCheckFile {
    pub ar: Vec<MatrixJson>,
    pub covariances: Vec<MatrixJson>,
}
