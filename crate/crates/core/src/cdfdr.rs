//! Comparison-density local fdr (CDfdr).
//!
//! The inverse local fdr `f/f0` is the density of `F0(Z)`. Estimating it
//! directly is hard because signals pile up at the corners, so scores are
//! first flattened through a fitted normal null `F0hat` and only the residual
//! ratio `f/f0hat` is estimated, as a shifted-Legendre series on `(0, 1)`.
//! The known factor `f0hat/f0` is applied exactly afterwards:
//!
//! ```text
//! f/f0 = (f0hat/f0) * (f/f0hat)
//! ```
//!
//! The null proportion is fixed at 1, so `fdr <= level` is the same as
//! `f/f0 >= 1/level`.

use crate::error::{Error, Result};
use crate::legendre::shifted_legendre;
use crate::special::{chi2_sf, norm_cdf, norm_isf};
use serde::{Deserialize, Serialize};

pub const MIN_ITEMS: usize = 20;
pub const DEFAULT_DEGREE: usize = 6;
pub const DEFAULT_FDR_LEVEL: f64 = 0.2;
const FLAT_EPS: f64 = 1e-12;
const RESIDUAL_FLOOR: f64 = 0.01;
const MAD_SCALE: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullMethod {
    PooledMoments,
    RobustMedianMad,
    FixedTheoretical,
}

impl std::str::FromStr for NullMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pooled-moments" | "pooled" => Ok(NullMethod::PooledMoments),
            "robust-median-mad" | "mad" => Ok(NullMethod::RobustMedianMad),
            "fixed-theoretical" | "theoretical" => Ok(NullMethod::FixedTheoretical),
            other => Err(Error::Config(format!("unknown null method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalNull {
    pub mu0: f64,
    pub sigma0: f64,
    pub method: NullMethod,
}

impl EmpiricalNull {
    pub fn standard() -> Self {
        Self {
            mu0: 0.0,
            sigma0: 1.0,
            method: NullMethod::FixedTheoretical,
        }
    }

    pub fn standardize(&self, z: f64) -> f64 {
        (z - self.mu0) / self.sigma0
    }
}

pub fn estimate_null(z: &[f64], method: NullMethod) -> Result<EmpiricalNull> {
    if z.len() < MIN_ITEMS {
        return Err(Error::TooFewItems {
            needed: MIN_ITEMS,
            got: z.len(),
        });
    }
    let (mu0, sigma0) = match method {
        NullMethod::PooledMoments => {
            let n = z.len() as f64;
            let mean = z.iter().sum::<f64>() / n;
            let ss = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>();
            (mean, (ss / (n - 1.0)).sqrt())
        }
        NullMethod::RobustMedianMad => {
            let med = median(z.to_vec());
            let mad = median(z.iter().map(|v| (v - med).abs()).collect());
            (med, MAD_SCALE * mad)
        }
        NullMethod::FixedTheoretical => (0.0, 1.0),
    };
    if !(sigma0 > 0.0) || !sigma0.is_finite() {
        return Err(Error::ZeroSpread);
    }
    Ok(EmpiricalNull {
        mu0,
        sigma0,
        method,
    })
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// `Phi((z - mu0) / sigma0)`, kept strictly inside `(0, 1)`.
pub fn preflatten(z: &[f64], null: &EmpiricalNull) -> Vec<f64> {
    z.iter()
        .map(|&v| norm_cdf(null.standardize(v)).clamp(FLAT_EPS, 1.0 - FLAT_EPS))
        .collect()
}

/// Shifted-Legendre series for the density of the flattened scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualDensity {
    /// Raw sample coefficients `mean_i L_k(u_i)`, `k = 1..degree`.
    pub coeffs: Vec<f64>,
    /// Whether each coefficient passed the `theta^2 > 2/p` cut.
    pub kept: Vec<bool>,
    pub items: usize,
}

pub fn estimate_residual_density(u_flat: &[f64], degree: usize) -> ResidualDensity {
    assert!(degree >= 1, "degree must be at least 1");
    let p = u_flat.len();
    let mut coeffs = vec![0.0; degree];
    for &u in u_flat {
        for (c, l) in coeffs.iter_mut().zip(shifted_legendre(u, degree)) {
            *c += l;
        }
    }
    coeffs.iter_mut().for_each(|c| *c /= p as f64);
    let cut = 2.0 / p as f64;
    let kept = coeffs.iter().map(|c| c * c > cut).collect();
    ResidualDensity {
        coeffs,
        kept,
        items: p,
    }
}

impl ResidualDensity {
    pub fn degree(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficients after thresholding; dropped terms are zero.
    pub fn kept_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .zip(&self.kept)
            .map(|(&c, &k)| if k { c } else { 0.0 })
            .collect()
    }

    pub fn kept_count(&self) -> usize {
        self.kept.iter().filter(|&&k| k).count()
    }

    /// Series value before the floor is applied.
    pub fn eval_raw(&self, u: f64) -> f64 {
        let l = shifted_legendre(u, self.degree());
        1.0 + self
            .kept_coeffs()
            .iter()
            .zip(&l)
            .map(|(c, v)| c * v)
            .sum::<f64>()
    }

    pub fn eval(&self, u: f64) -> f64 {
        self.eval_raw(u).max(RESIDUAL_FLOOR)
    }
}

/// How the inverse fdr is formed from the residual density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseFdrMode {
    /// Theoretical `N(0,1)` null: residual density times `f0hat/f0`.
    Weighted,
    /// The fitted null is the null: residual density alone.
    Residual,
}

impl std::str::FromStr for InverseFdrMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "weighted" | "theoretical" => Ok(InverseFdrMode::Weighted),
            "residual" | "empirical" => Ok(InverseFdrMode::Residual),
            other => Err(Error::Config(format!("unknown inverse-fdr mode `{other}`"))),
        }
    }
}

/// Exact ratio of the fitted null density to the standard normal at `z`.
pub fn adjusting_weight(z: f64, null: &EmpiricalNull) -> f64 {
    let s = null.standardize(z);
    (0.5 * (z * z - s * s)).exp() / null.sigma0
}

pub fn inverse_fdr_curve(
    z: &[f64],
    u_flat: &[f64],
    null: &EmpiricalNull,
    resid: &ResidualDensity,
    mode: InverseFdrMode,
) -> Vec<f64> {
    z.iter()
        .zip(u_flat)
        .map(|(&zi, &ui)| {
            let d = resid.eval(ui);
            match mode {
                InverseFdrMode::Weighted => adjusting_weight(zi, null) * d,
                InverseFdrMode::Residual => d,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    TwoSided,
    Right,
    Left,
}

impl Sidedness {
    fn admits(&self, u: f64) -> bool {
        match self {
            Sidedness::TwoSided => true,
            Sidedness::Right => u >= 0.5,
            Sidedness::Left => u < 0.5,
        }
    }
}

impl std::str::FromStr for Sidedness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "two-sided" | "both" => Ok(Sidedness::TwoSided),
            "right" => Ok(Sidedness::Right),
            "left" => Ok(Sidedness::Left),
            other => Err(Error::Config(format!("unknown sidedness `{other}`"))),
        }
    }
}

/// `inverse_fdr >= 1/level` on the admitted tail(s).
pub fn select(inverse_fdr: &[f64], u_flat: &[f64], fdr_level: f64, side: Sidedness) -> Vec<bool> {
    let threshold = 1.0 / fdr_level;
    inverse_fdr
            .iter()
            .zip(u_flat)
            .map(|(&d, &u)| side.admits(u) && d >= threshold)
            .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CdfdrConfig {
    pub fdr_level: f64,
    pub null_method: NullMethod,
    pub degree: usize,
    pub sidedness: Sidedness,
    pub mode: InverseFdrMode,
}

impl Default for CdfdrConfig {
    fn default() -> Self {
        Self {
            fdr_level: DEFAULT_FDR_LEVEL,
            null_method: NullMethod::PooledMoments,
            degree: DEFAULT_DEGREE,
            sidedness: Sidedness::TwoSided,
            mode: InverseFdrMode::Weighted,
        }
    }
}

impl CdfdrConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.fdr_level > 0.0 && self.fdr_level < 1.0) {
            return Err(Error::Config(format!(
                "fdr level {} outside (0, 1)",
                self.fdr_level
            )));
        }
        if self.degree == 0 {
            return Err(Error::Config("series degree must be at least 1".into()));
        }
        Ok(())
    }
}

/// One CR statistic with the sample size and component count it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrScore {
    pub cr: f64,
    pub n: usize,
    pub m: usize,
}

/// Scores entering the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum ScoreInput {
    Z(Vec<f64>),
    /// Converted through their chi-square p-values to one-sided z-scores;
    /// selection is then restricted to the right tail.
    Cr(Vec<CrScore>),
}

/// One-sided z-score with the same upper-tail probability as `n * cr`.
pub fn cr_to_z(score: CrScore) -> f64 {
    let p = chi2_sf(score.n as f64 * score.cr, score.m.max(1));
    norm_isf(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdrResult {
    pub z: Vec<f64>,
    pub null: EmpiricalNull,
    pub u_flat: Vec<f64>,
    pub residual: ResidualDensity,
    pub inverse_fdr: Vec<f64>,
    pub selected: Vec<bool>,
    pub threshold: f64,
}

impl FdrResult {
    pub fn selected_count(&self) -> usize {
        self.selected.iter().filter(|&&s| s).count()
    }
}

pub fn cdfdr_pipeline(input: &ScoreInput, config: &CdfdrConfig) -> Result<FdrResult> {
    config.validate()?;
    let (z, side) = match input {
        ScoreInput::Z(z) => (z.clone(), config.sidedness),
        ScoreInput::Cr(scores) => (
            scores.iter().copied().map(cr_to_z).collect(),
            Sidedness::Right,
        ),
    };
    if let Some((i, &v)) = z.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { index: i, value: v });
    }
    let null = estimate_null(&z, config.null_method)?;
    let u_flat = preflatten(&z, &null);
    let residual = estimate_residual_density(&u_flat, config.degree);
    let inverse_fdr = inverse_fdr_curve(&z, &u_flat, &null, &residual, config.mode);
    let selected = select(&inverse_fdr, &u_flat, config.fdr_level, side);
    Ok(FdrResult {
        z,
        null,
        u_flat,
        residual,
        inverse_fdr,
        selected,
        threshold: 1.0 / config.fdr_level,
    })
}
