//! Newton's method for `f_{Sigma(t)}(A) = P`, continuation in `t` from the
//! spectral factor of `P` (t = 0) to the covariance data (t = 1), and the
//! linear Yule-Walker solution for a trivial MA part.

use nalgebra::{DMatrix, DVector};

use crate::covariance::{verify_match, CovOracleConfig, MatchVerdict};
use crate::covdata::{
    build_toeplitz, check_pd, denormalize_solution, existence_check, normalize, CovSequence,
    ExistenceReport,
};
use crate::error::{Error, Result};
use crate::factor::{spectral_factor, FactorConfig};
use crate::linalg::{self, Factored};
use crate::matchmap::{
    devectorize, f_map, homotopy_dt, jacobian_matrix, vectorize, vectorize_pseudo, SchurCoords,
};
use crate::matpoly::{
    ensure_conformable, is_schur, min_eig_on_grid, poly_product_full, MatPoly, PseudoPoly,
    SchurClassSpec,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomotopyConfig {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub dt_init: f64,
    pub dt_min: f64,
    pub dt_growth: f64,
    pub dt_shrink: f64,
    pub max_backtracks: usize,
    pub schur_spec: SchurClassSpec,
    pub normalize: bool,
    pub factor: FactorConfig,
    pub oracle: CovOracleConfig,
}

impl Default for HomotopyConfig {
    fn default() -> Self {
        Self {
            newton_tol: 1e-10,
            newton_max_iter: 30,
            dt_init: 0.1,
            dt_min: 1e-8,
            dt_growth: 1.5,
            dt_shrink: 0.5,
            max_backtracks: 30,
            schur_spec: SchurClassSpec::default(),
            normalize: true,
            factor: FactorConfig::default(),
            oracle: CovOracleConfig::default(),
        }
    }
}

impl HomotopyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_min > 0.0 && self.dt_min <= self.dt_init && self.dt_init <= 1.0) {
            return Err(Error::InvalidInput(format!(
                "need 0 < dt_min <= dt_init <= 1 (dt_min = {}, dt_init = {})",
                self.dt_min, self.dt_init
            )));
        }
        if !(self.newton_tol > 0.0) {
            return Err(Error::InvalidInput("newton_tol must be positive".into()));
        }
        if !(self.dt_shrink > 0.0 && self.dt_shrink < 1.0 && self.dt_growth >= 1.0) {
            return Err(Error::InvalidInput("bad step-size factors".into()));
        }
        self.schur_spec.validate()
    }

    /// Covariance mismatch above which a solve is reported as unverified.
    pub fn verify_tol(&self) -> f64 {
        100.0 * self.newton_tol
    }
}

/// The moving-average side of a problem.
#[derive(Debug, Clone, PartialEq)]
pub enum MaInput {
    Polynomial(MatPoly),
    /// `P = B B^*` given directly.
    Pseudo(PseudoPoly),
    /// `B = I`.
    Trivial,
}

impl MaInput {
    pub fn target(&self, m: usize, n: usize) -> Result<PseudoPoly> {
        match self {
            MaInput::Polynomial(b) => {
                ensure_conformable(b.shape(), (m, n), "MA polynomial")?;
                Ok(poly_product_full(b))
            }
            MaInput::Pseudo(p) => {
                ensure_conformable(p.shape(), (m, n), "MA pseudo-polynomial")?;
                Ok(p.clone())
            }
            MaInput::Trivial => Ok(PseudoPoly::identity(m, n)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub iters: usize,
    pub residual: f64,
}

fn rel_residual(a: &MatPoly, data: &CovSequence, p: &PseudoPoly, pnorm: f64) -> Result<f64> {
    Ok(f_map(a, data)?.axpy(-1.0, p).norm() / pnorm)
}

fn add_coords(a: &MatPoly, delta: &DVector<f64>, alpha: f64) -> Result<MatPoly> {
    let c = vectorize(a)?;
    devectorize(&SchurCoords {
        m: c.m,
        n: c.n,
        x: c.x + delta * alpha,
    })
}

fn newton_loop(
    a: &mut MatPoly,
    sigma: &CovSequence,
    p: &PseudoPoly,
    cfg: &HomotopyConfig,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let pnorm = p.norm();
    let mut res = rel_residual(a, sigma, p, pnorm)?;
    let mut iters = 0;
    while res > tol {
        if iters == max_iter {
            return Err(Error::NewtonDiverged {
                residual: res,
                iters,
            });
        }
        iters += 1;
        let jac = Factored::new(jacobian_matrix(a, sigma)?);
        let rhs = vectorize_pseudo(&p.axpy(-1.0, &f_map(a, sigma)?)).r;
        let delta = jac.solve(&rhs).ok_or(Error::SingularJacobian)?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=cfg.max_backtracks {
            let cand = add_coords(a, &delta, alpha)?;
            if is_schur(&cand, &cfg.schur_spec).is_member() {
                let cand_res = rel_residual(&cand, sigma, p, pnorm)?;
                if cand_res < res {
                    *a = cand;
                    res = cand_res;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if !accepted {
            return Err(Error::LeftSchurClass { residual: res });
        }
    }
    Ok(NewtonOutcome {
        iters,
        residual: res,
    })
}

/// Newton's method for `f_{Sigma(t)}(A) = P` started from `a0`, with step
/// halving until the iterate stays in the Schur class and the residual drops.
pub fn newton_solve(
    a0: &MatPoly,
    data: &CovSequence,
    t: f64,
    p: &PseudoPoly,
    cfg: &HomotopyConfig,
) -> Result<(MatPoly, NewtonOutcome)> {
    ensure_conformable(a0.shape(), data.shape(), "newton_solve")?;
    ensure_conformable(p.shape(), data.shape(), "newton_solve")?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::TOutOfRange(t));
    }
    if let Some(w) = is_schur(a0, &cfg.schur_spec).failure {
        return Err(Error::NotSchur(w.to_string()));
    }
    let sigma = data.blend(t);
    let mut a = a0.clone();
    let out = newton_loop(&mut a, &sigma, p, cfg, cfg.newton_tol, cfg.newton_max_iter)?;
    Ok((a, out))
}

/// Extra full Newton steps while each one at least halves the residual.
fn polish(
    a: &mut MatPoly,
    data: &CovSequence,
    p: &PseudoPoly,
    cfg: &HomotopyConfig,
) -> Result<f64> {
    let pnorm = p.norm();
    let mut res = rel_residual(a, data, p, pnorm)?;
    for _ in 0..3 {
        let jac = Factored::new(jacobian_matrix(a, data)?);
        let rhs = vectorize_pseudo(&p.axpy(-1.0, &f_map(a, data)?)).r;
        let Some(delta) = jac.solve(&rhs) else { break };
        let cand = add_coords(a, &delta, 1.0)?;
        if !is_schur(&cand, &cfg.schur_spec).is_member() {
            break;
        }
        let cand_res = rel_residual(&cand, data, p, pnorm)?;
        if !(cand_res < 0.5 * res) {
            break;
        }
        *a = cand;
        res = cand_res;
    }
    Ok(res)
}

/// One accepted point of the continuation path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathPoint {
    pub t: f64,
    pub newton_iters: usize,
    pub jacobian_cond: f64,
    pub jacobian_det_sign: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    /// Solution for the original (un-normalized) data.
    pub a: MatPoly,
    /// `|f_C(A) - P|_F / |P|_F`.
    pub residual: f64,
    pub path: Vec<PathPoint>,
    pub normalized: bool,
    /// Cholesky factor of `C_0` used for normalization (identity otherwise).
    pub l: DMatrix<f64>,
    pub verification: Option<MatchVerdict>,
    pub existence: ExistenceReport,
    pub warnings: Vec<String>,
}

impl SolveReport {
    pub fn verified(&self) -> bool {
        self.verification.as_ref().is_some_and(|v| v.pass)
    }

    /// Number of sign changes of `det f'` along the path.
    pub fn det_sign_flips(&self) -> usize {
        self.path
            .windows(2)
            .filter(|w| w[0].jacobian_det_sign != w[1].jacobian_det_sign)
            .count()
    }
}

/// A failed solve; `report` carries whatever diagnostics were gathered.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveFailure {
    pub error: Error,
    pub report: Option<Box<SolveReport>>,
}

impl From<Error> for SolveFailure {
    fn from(error: Error) -> Self {
        Self {
            error,
            report: None,
        }
    }
}

impl std::fmt::Display for SolveFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for SolveFailure {}

fn path_point(t: f64, iters: usize, jac: &DMatrix<f64>) -> PathPoint {
    PathPoint {
        t,
        newton_iters: iters,
        jacobian_cond: linalg::condition_number(jac),
        jacobian_det_sign: Factored::new(jac.clone()).det_sign(),
    }
}

struct Tracked {
    a: MatPoly,
    path: Vec<PathPoint>,
    start: MatPoly,
}

/// Traces `f_{Sigma(t)}(A) = P` from the spectral factor at `t = 0` to `t = 1`.
fn track(
    work: &CovSequence,
    p: &PseudoPoly,
    cfg: &HomotopyConfig,
) -> std::result::Result<Tracked, (Error, Option<Tracked>)> {
    let (m, n) = work.shape();
    let start = spectral_factor(p, &cfg.factor).map_err(|e| (e, None))?;
    let mut a = start.clone();
    let mut jac = jacobian_matrix(&a, &CovSequence::identity(m, n)).map_err(|e| (e, None))?;
    let mut path = vec![path_point(0.0, 0, &jac)];
    let mut t = 0.0_f64;
    let mut dt = cfg.dt_init;
    while t < 1.0 {
        let (t_next, step) = if t + dt >= 1.0 {
            (1.0, 1.0 - t)
        } else {
            (t + dt, dt)
        };
        // Euler predictor: J(A, t) dA = -dt (f_C(A) - f_O(A))
        let dfdt = homotopy_dt(&a, work).map_err(|e| (e, None))?;
        let rhs = vectorize_pseudo(&dfdt).r * (-step);
        let pred = Factored::new(jac.clone())
            .solve(&rhs)
            .and_then(|d| add_coords(&a, &d, 1.0).ok())
            .filter(|c| is_schur(c, &cfg.schur_spec).is_member())
            .unwrap_or_else(|| a.clone());
        let corrected = newton_solve(&pred, work, t_next, p, cfg);
        match corrected {
            Ok((next, out)) => {
                a = next;
                t = t_next;
                jac = jacobian_matrix(&a, &work.blend(t)).map_err(|e| (e, None))?;
                path.push(path_point(t, out.iters, &jac));
                if out.iters <= 3 {
                    dt *= cfg.dt_growth;
                }
            }
            Err(e) => {
                log::debug!("corrector failed at t = {t_next}: {e}");
                dt *= cfg.dt_shrink;
                if dt < cfg.dt_min {
                    return Err((
                        Error::PathStalled { t, dt },
                        Some(Tracked { a, path, start }),
                    ));
                }
            }
        }
    }
    Ok(Tracked { a, path, start })
}

/// Solves the covariance matching problem: finds Schur-class `A` whose VARMA
/// model with the given MA part reproduces `data`.
pub fn homotopy_solve(
    data: &CovSequence,
    ma: &MaInput,
    cfg: &HomotopyConfig,
) -> std::result::Result<SolveReport, SolveFailure> {
    cfg.validate()?;
    let (m, n) = data.shape();
    let pd = check_pd(data);
    if !pd.is_pd {
        return Err(Error::DataNotPd {
            lambda_min: pd.lambda_min,
        }
        .into());
    }
    let p = ma.target(m, n)?;
    let min_eig = min_eig_on_grid(&p, 512.max(2 * n + 1))?;
    if !(min_eig > 0.0) {
        return Err(Error::PNotPositive { min_eig }.into());
    }
    let mut warnings = Vec::new();
    if let MaInput::Polynomial(b) = ma {
        if let Some(w) = is_schur(b, &SchurClassSpec::default()).failure {
            let msg = format!("MA polynomial is not in the Schur class ({w}); only B B^* is used");
            log::warn!("{msg}");
            warnings.push(msg);
        }
    }

    let (work, l) = if cfg.normalize {
        normalize(data)?
    } else {
        (data.clone(), DMatrix::identity(m, m))
    };
    let existence = existence_check(&work, &p, cfg.schur_spec.mu)?;
    for w in existence.warnings() {
        log::warn!("{w}");
        warnings.push(w);
    }

    let assemble =
        |a_work: &MatPoly, path: Vec<PathPoint>, warnings: Vec<String>| -> Result<SolveReport> {
            let a = if cfg.normalize {
                denormalize_solution(a_work, &l)?
            } else {
                a_work.clone()
            };
            let residual = rel_residual(&a, data, &p, p.norm())?;
            Ok(SolveReport {
                a,
                residual,
                path,
                normalized: cfg.normalize,
                l: l.clone(),
                verification: None,
                existence,
                warnings,
            })
        };

    let (a_work, path, start) = if n == 0 {
        // A_0 C_0 A_0^T = P_0 in closed form
        let lp = linalg::cholesky_lower(p.coeff(0)).ok_or(Error::PNotPositive { min_eig })?;
        let lc = linalg::cholesky_lower(work.coeff(0)).ok_or(Error::C0NotPd)?;
        let lc_inv = linalg::lower_inverse(&lc).ok_or(Error::C0NotPd)?;
        let a0 = MatPoly::new(vec![&lp * lc_inv])?;
        let jac = jacobian_matrix(&a0, &work)?;
        (a0, vec![path_point(1.0, 0, &jac)], MatPoly::new(vec![lp])?)
    } else {
        match track(&work, &p, cfg) {
            Ok(tr) => (tr.a, tr.path, tr.start),
            Err((error, partial)) => {
                let report = partial
                    .and_then(|tr| assemble(&tr.a, tr.path, warnings.clone()).ok())
                    .map(Box::new);
                return Err(SolveFailure { error, report });
            }
        }
    };

    let mut a_work = a_work;
    polish(&mut a_work, &work, &p, cfg)?;
    let mut report = assemble(&a_work, path, warnings)?;
    if report.det_sign_flips() > 0 {
        let msg = format!(
            "Jacobian determinant changed sign {} time(s) along the path",
            report.det_sign_flips()
        );
        log::warn!("{msg}");
        report.warnings.push(msg);
    }

    let b = match ma {
        MaInput::Polynomial(b) => b.clone(),
        MaInput::Pseudo(_) => start,
        MaInput::Trivial => MatPoly::identity(m, n),
    };
    let oracle = CovOracleConfig {
        tol: cfg.verify_tol(),
        ..cfg.oracle
    };
    match verify_match(&report.a, &b, data, &oracle) {
        Ok(v) => {
            let pass = v.pass;
            let deviation = v.max_deviation;
            report.verification = Some(v);
            if !pass {
                return Err(SolveFailure {
                    error: Error::VerificationFailed { deviation },
                    report: Some(Box::new(report)),
                });
            }
        }
        Err(error) => {
            return Err(SolveFailure {
                error,
                report: Some(Box::new(report)),
            })
        }
    }
    Ok(report)
}

/// Pure AR solution (`B = I`) from the block normal equations
/// `T_n [G_0; ...; G_n] = [I; 0; ...; 0]`, normalized so that `A_0` is lower
/// triangular with positive diagonal and `A T_n A^T = I`.
pub fn yule_walker_solve(data: &CovSequence) -> Result<MatPoly> {
    let pd = check_pd(data);
    if !pd.is_pd {
        return Err(Error::DataNotPd {
            lambda_min: pd.lambda_min,
        });
    }
    let (m, n) = data.shape();
    let t = build_toeplitz(data);
    let chol = nalgebra::Cholesky::new(t).ok_or(Error::DataNotPd {
        lambda_min: pd.lambda_min,
    })?;
    let mut rhs = DMatrix::zeros((n + 1) * m, m);
    rhs.view_mut((0, 0), (m, m)).fill_with_identity();
    let g = chol.solve(&rhs);
    let g0 = linalg::symmetrize(&g.view((0, 0), (m, m)).into_owned());
    // A_0^T A_0 = G_0 with A_0 lower triangular: Cholesky of the flipped matrix.
    let flip = |x: &DMatrix<f64>| DMatrix::from_fn(m, m, |i, j| x[(m - 1 - i, m - 1 - j)]);
    let lf = linalg::cholesky_lower(&flip(&g0)).ok_or(Error::DataNotPd {
        lambda_min: pd.lambda_min,
    })?;
    let a0 = flip(&lf.transpose());
    let a0t = a0.transpose();
    let mut coeffs = vec![a0.clone()];
    for k in 1..=n {
        let gk_t = g.view((k * m, 0), (m, m)).transpose();
        // A_k = A_0^{-T} G_k^T
        let ak = a0t
            .solve_upper_triangular(&gk_t)
            .ok_or(Error::SingularJacobian)?;
        coeffs.push(ak);
    }
    MatPoly::new(coeffs)
}
