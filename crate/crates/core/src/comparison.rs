//! Two-sample comparison distribution and its orthogonal-series density.
//!
//! With pooled cdf `H` and class-1 cdf `F`, the comparison distribution is
//! `D(u) = F(H^{-1}(u))` and its density `d(u)` is flat exactly when the
//! classes share a distribution. The series estimate uses the score basis:
//! `d(u) = 1 + sum_k theta_k S_k(u)` with `theta_k = E[S_k(U) | Y = 1]`.

use crate::error::{Error, Result};
use crate::midrank::MidRankVector;
use crate::score::ScoreBasis;

/// Pooled mid-ranks with aligned binary labels (`true` = class 1).
#[derive(Debug, Clone)]
pub struct TwoSampleData {
    u: Vec<f64>,
    y: Vec<bool>,
    n0: usize,
    n1: usize,
}

impl TwoSampleData {
    /// `labels` is indexed by source row, so it has the full column length.
    pub fn new(mid: &MidRankVector, labels: &[bool]) -> Result<Self> {
        let y: Vec<bool> = mid.rows().iter().map(|&r| labels[r]).collect();
        Self::from_parts(mid.u().to_vec(), y)
    }

    pub fn from_parts(u: Vec<f64>, y: Vec<bool>) -> Result<Self> {
        assert_eq!(u.len(), y.len(), "mid-ranks and labels must align");
        let n1 = y.iter().filter(|&&b| b).count();
        let n0 = y.len() - n1;
        if n1 < 2 {
            return Err(Error::EmptyClass { label: 1, count: n1 });
        }
        if n0 < 2 {
            return Err(Error::EmptyClass { label: 0, count: n0 });
        }
        Ok(Self { u, y, n0, n1 })
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn y(&self) -> &[bool] {
        &self.y
    }

    pub fn n0(&self) -> usize {
        self.n0
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn pi_hat(&self) -> f64 {
        self.n1 as f64 / self.n() as f64
    }

    /// Same sample with the classes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            u: self.u.clone(),
            y: self.y.iter().map(|b| !b).collect(),
            n0: self.n1,
            n1: self.n0,
        }
    }
}

/// `theta_k = (1/n1) sum_{y_i = 1} S_k(u_i)` for `k = 1..m`.
pub fn theta_hat(data: &TwoSampleData, basis: &ScoreBasis) -> Vec<f64> {
    assert_eq!(data.n(), basis.n(), "basis built on a different sample");
    let mut theta = vec![0.0; basis.m()];
    for (i, _) in data.y.iter().enumerate().filter(|(_, &y)| y) {
        for (t, s) in theta.iter_mut().zip(basis.row(i)) {
            *t += s;
        }
    }
    let n1 = data.n1 as f64;
    theta.iter_mut().for_each(|t| *t /= n1);
    theta
}

pub fn gof_norm(theta: &[f64]) -> f64 {
    theta.iter().map(|t| t * t).sum()
}

/// Series comparison density `u -> 1 + sum_k theta_k S_k(u)`.
#[derive(Debug, Clone)]
pub struct ComparisonDensity<'a> {
    theta: Vec<f64>,
    basis: &'a ScoreBasis,
}

pub fn estimate_cd<'a>(theta: &[f64], basis: &'a ScoreBasis) -> ComparisonDensity<'a> {
    assert_eq!(theta.len(), basis.m(), "theta and basis disagree on m");
    ComparisonDensity {
        theta: theta.to_vec(),
        basis,
    }
}

impl ComparisonDensity<'_> {
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Unclipped estimate; may dip below zero.
    pub fn eval(&self, u: f64) -> Result<f64> {
        let s = self.basis.evaluate(u)?;
        Ok(1.0 + dot(&self.theta, &s))
    }

    /// Estimate floored at zero, for plotting only.
    pub fn eval_clipped(&self, u: f64) -> Result<f64> {
        self.eval(u).map(|d| d.max(0.0))
    }

    /// Estimate at the `i`-th sample point, read from the score matrix.
    pub fn at_sample(&self, i: usize) -> f64 {
        1.0 + dot(&self.theta, self.basis.row(i))
    }

    /// `points` mid-cell grid values `(u, d(u))` on `(0, 1)`.
    pub fn grid(&self, points: usize) -> Vec<(f64, f64)> {
        (0..points)
            .map(|i| {
                let u = (i as f64 + 0.5) / points as f64;
                (u, self.eval(u).expect("grid inside (0,1)"))
            })
            .collect()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// PP-plot points `(H(x_j), F(x_j))` over distinct pooled values, with a
/// leading `(0, 0)`.
pub fn pp_plot_points(data: &TwoSampleData) -> Vec<(f64, f64)> {
    let mut order: Vec<usize> = (0..data.n()).collect();
    order.sort_by(|&a, &b| data.u[a].total_cmp(&data.u[b]));
    let n = data.n() as f64;
    let n1 = data.n1 as f64;
    let mut points = vec![(0.0, 0.0)];
    let (mut pooled, mut ones) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let value = data.u[order[i]];
        while i < order.len() && data.u[order[i]] == value {
            pooled += 1;
            ones += usize::from(data.y[order[i]]);
            i += 1;
        }
        points.push((pooled as f64 / n, ones as f64 / n1));
    }
    points
}

/// Summary of the comparison-density fit for one variable.
#[derive(Debug, Clone, PartialEq)]
pub struct CdEstimate {
    pub theta: Vec<f64>,
    pub pp_points: Vec<(f64, f64)>,
    pub gof_norm: f64,
}

impl CdEstimate {
    pub fn fit(data: &TwoSampleData, basis: &ScoreBasis) -> Self {
        let theta = theta_hat(data, basis);
        let gof_norm = gof_norm(&theta);
        Self {
            theta,
            pp_points: pp_plot_points(data),
            gof_norm,
        }
    }
}
