//! Normal and chi-square helpers.

use statrs::distribution::{ContinuousCDF, Normal};
use libm::erfc;
use statrs::function::gamma::gamma_ur;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Upper tail `P(Z > x)`, accurate far into the tail.
pub fn norm_sf(x: f64) -> f64 {
    0.5 * erfc(x * FRAC_1_SQRT_2)
}

/// Standard normal quantile. Returns `±inf` at the endpoints.
pub fn norm_quantile(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    standard_normal().inverse_cdf(p)
}

/// `z` such that `P(Z > z) = p`, computed from the lower tail for small `p`.
pub fn norm_isf(p: f64) -> f64 {
    -norm_quantile(p)
}

/// Upper-tail probability of a chi-square variable with `df` degrees of freedom.
pub fn chi2_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if !x.is_finite() {
        return 0.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0)
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}
