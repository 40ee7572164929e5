//! Seeded generation of Schur polynomials and feasible matching problems.
//!
//! All randomness comes from `ChaCha8Rng::seed_from_u64(seed)` with entries
//! drawn from `rand_distr::StandardNormal`, so fixtures are reproducible
//! across platforms.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::covariance::varma_cov_linear;
use crate::covdata::{check_pd, CovSequence};
use crate::error::{Error, Result};
use crate::linalg;
use crate::matpoly::MatPoly;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    pub seed: u64,
    pub m: usize,
    pub n: usize,
    pub target_margin: f64,
    pub coeff_scale: f64,
    pub min_det_pn: f64,
    /// Force `B = I` (pure AR data).
    pub trivial_ma: bool,
    pub max_draws: usize,
}

impl GenConfig {
    pub fn new(seed: u64, m: usize, n: usize) -> Self {
        Self {
            seed,
            m,
            n,
            target_margin: 0.9,
            coeff_scale: 1.0,
            min_det_pn: 1e-3,
            trivial_ma: false,
            max_draws: 1000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidInput("m must be positive".into()));
        }
        if !(self.target_margin > 0.0 && self.target_margin < 1.0) {
            return Err(Error::InvalidInput(format!(
                "target_margin must lie in (0, 1), got {}",
                self.target_margin
            )));
        }
        if !(self.coeff_scale > 0.0) {
            return Err(Error::InvalidInput("coeff_scale must be positive".into()));
        }
        Ok(())
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

/// Scales `M_k <- M_k (margin / r)^k`, moving every root of `det M` onto or
/// inside the circle of radius `margin`.
pub fn contract_to_margin(poly: &MatPoly, margin: f64) -> MatPoly {
    match poly.spectral_radius() {
        Some(r) if r > 0.0 => poly.root_scaled(margin / r),
        _ => poly.clone(),
    }
}

/// Draws one Schur polynomial from `rng`.
pub fn random_schur_with(
    rng: &mut ChaCha8Rng,
    m: usize,
    n: usize,
    coeff_scale: f64,
    margin: f64,
) -> MatPoly {
    let mut coeffs: Vec<DMatrix<f64>> = (0..=n)
        .map(|_| {
            DMatrix::from_fn(m, m, |_, _| {
                let z: f64 = StandardNormal.sample(rng);
                z * coeff_scale
            })
        })
        .collect();
    let gram = &coeffs[0] * coeffs[0].transpose() + DMatrix::identity(m, m);
    coeffs[0] = linalg::cholesky_lower(&gram).expect("A A^T + I is positive definite");
    let raw = MatPoly::new(coeffs).expect("finite normal draws");
    contract_to_margin(&raw, margin)
}

pub fn random_schur(cfg: &GenConfig) -> Result<MatPoly> {
    cfg.validate()?;
    let mut rng = cfg.rng();
    Ok(random_schur_with(
        &mut rng,
        cfg.m,
        cfg.n,
        cfg.coeff_scale,
        cfg.target_margin,
    ))
}

/// A generated matching instance together with the model that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedProblem {
    pub data: CovSequence,
    pub b: MatPoly,
    pub a_star: MatPoly,
}

pub fn random_problem(cfg: &GenConfig) -> Result<GeneratedProblem> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    let mut rng = cfg.rng();
    for _ in 0..cfg.max_draws {
        let a_star = random_schur_with(&mut rng, m, n, cfg.coeff_scale, cfg.target_margin);
        let b = if cfg.trivial_ma {
            MatPoly::identity(m, n)
        } else {
            let b = random_schur_with(&mut rng, m, n, cfg.coeff_scale, cfg.target_margin);
            if b.coeff(n).determinant().abs() < cfg.min_det_pn {
                continue;
            }
            b
        };
        let Ok(data) = varma_cov_linear(&a_star, &b) else {
            continue;
        };
        if check_pd(&data).is_pd {
            return Ok(GeneratedProblem { data, b, a_star });
        }
    }
    Err(Error::ResampleExhausted(cfg.max_draws))
}
