//! Mid-distribution transform.
//!
//! For a sample with empirical cdf `F` and pmf `p`, the mid-distribution is
//! `F(x) - p(x)/2`. On the sample points this is `(R - 0.5) / n` with average
//! ranks `R` for tied values. Missing entries are dropped per variable.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    Continuous,
    Discrete,
    /// Ordered categories coded as reals in their declared order.
    CategoricalOrdinal,
}

impl std::str::FromStr for VariableKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(VariableKind::Continuous),
            "discrete" => Ok(VariableKind::Discrete),
            "categorical-ordinal" | "ordinal" => Ok(VariableKind::CategoricalOrdinal),
            other => Err(Error::Config(format!("unknown variable kind `{other}`"))),
        }
    }
}

impl std::fmt::Display for VariableKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VariableKind::Continuous => "continuous",
            VariableKind::Discrete => "discrete",
            VariableKind::CategoricalOrdinal => "categorical-ordinal",
        })
    }
}

/// Raw values of one feature together with its missing-value mask.
#[derive(Debug, Clone, PartialEq)]
pub struct VariableColumn {
    values: Vec<f64>,
    missing: Vec<bool>,
    kind: VariableKind,
}

impl VariableColumn {
    pub fn new(values: Vec<f64>, missing: Vec<bool>, kind: VariableKind) -> Result<Self> {
        if values.len() != missing.len() {
            return Err(Error::LengthMismatch {
                values: values.len(),
                mask: missing.len(),
            });
        }
        Ok(Self {
            values,
            missing,
            kind,
        })
    }

    /// Column without missing entries.
    pub fn complete(values: Vec<f64>, kind: VariableKind) -> Self {
        let missing = vec![false; values.len()];
        Self {
            values,
            missing,
            kind,
        }
    }

    /// Column where NaN marks a missing entry.
    pub fn from_nan_missing(values: Vec<f64>, kind: VariableKind) -> Self {
        let missing = values.iter().map(|v| v.is_nan()).collect();
        Self {
            values,
            missing,
            kind,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing(&self) -> &[bool] {
        &self.missing
    }

    pub fn kind(&self) -> VariableKind {
        self.kind
    }

    pub fn set_kind(&mut self, kind: VariableKind) {
        self.kind = kind;
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Apply `f` to every present value.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self
            .values
            .iter()
            .zip(&self.missing)
            .map(|(&v, &m)| if m { v } else { f(v) })
            .collect();
        Self {
            values,
            missing: self.missing.clone(),
            kind: self.kind,
        }
    }

    /// Present values paired with their row positions, in row order.
    fn present(&self) -> Result<Vec<(usize, f64)>> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, (&v, &m)) in self.values.iter().zip(&self.missing).enumerate() {
            if m {
                continue;
            }
            if !v.is_finite() {
                return Err(Error::NonFinite { index: i, value: v });
            }
            out.push((i, v));
        }
        if out.len() < 2 {
            return Err(Error::AllMissing { present: out.len() });
        }
        Ok(out)
    }
}

/// Mid-ranks of the present entries of a column.
#[derive(Debug, Clone, PartialEq)]
pub struct MidRankVector {
    /// Mid-rank of each present entry, in row order.
    u: Vec<f64>,
    /// Row position in the source column for each entry of `u`.
    rows: Vec<usize>,
    /// Index into `tie_profile` for each entry of `u`.
    atom_of: Vec<usize>,
    /// Distinct values in ascending order with their multiplicities.
    tie_profile: Vec<(f64, usize)>,
    sigma_mid: f64,
}

impl MidRankVector {
    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn n_effective(&self) -> usize {
        self.u.len()
    }

    pub fn sigma_mid(&self) -> f64 {
        self.sigma_mid
    }

    pub fn tie_profile(&self) -> &[(f64, usize)] {
        &self.tie_profile
    }

    pub fn distinct(&self) -> usize {
        self.tie_profile.len()
    }

    pub(crate) fn atom_of(&self) -> &[usize] {
        &self.atom_of
    }

    /// Mid-rank of every distinct value with its multiplicity, ascending.
    pub fn atoms(&self) -> Vec<(f64, usize)> {
        let n = self.n_effective() as f64;
        let mut below = 0usize;
        self.tie_profile
            .iter()
            .map(|&(_, m)| {
                let u = (below as f64 + 0.5 * m as f64) / n;
                below += m;
                (u, m)
            })
            .collect()
    }
}

pub fn mid_rank_transform(col: &VariableColumn) -> Result<MidRankVector> {
    let present = col.present()?;
    let n = present.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| present[a].1.total_cmp(&present[b].1));

    let mut u = vec![0.0; n];
    let mut atom_of = vec![0; n];
    let mut tie_profile = Vec::new();
    let nf = n as f64;
    let mut start = 0;
    while start < n {
        let value = present[order[start]].1;
        let mut end = start + 1;
        while end < n && present[order[end]].1 == value {
            end += 1;
        }
        // 1-based ranks start+1..=end share their average; minus 0.5 gives (start+end)/2.
        let mid = 0.5 * (start + end) as f64 / nf;
        for &k in &order[start..end] {
            u[k] = mid;
            atom_of[k] = tie_profile.len();
        }
        tie_profile.push((value, end - start));
        start = end;
    }

    let cube_sum: f64 = tie_profile
        .iter()
        .map(|&(_, m)| (m as f64 / nf).powi(3))
        .sum();
    let sigma_mid = ((1.0 - cube_sum).max(0.0) / 12.0).sqrt();

    Ok(MidRankVector {
        u,
        rows: present.iter().map(|&(i, _)| i).collect(),
        atom_of,
        tie_profile,
        sigma_mid,
    })
}

/// Pooled mid-distribution `t -> F(t) - p(t)/2` of the present values.
#[derive(Debug, Clone)]
pub struct PooledMidCdf {
    sorted: Vec<f64>,
}

impl PooledMidCdf {
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.sorted.len() as f64;
        let below = self.sorted.partition_point(|&x| x < t);
        let at_or_below = self.sorted.partition_point(|&x| x <= t);
        let atom = (at_or_below - below) as f64;
        at_or_below as f64 / n - 0.5 * atom / n
    }
}

pub fn pooled_mid_cdf(col: &VariableColumn) -> Result<PooledMidCdf> {
    let mut sorted: Vec<f64> = col.present()?.into_iter().map(|(_, v)| v).collect();
    sorted.sort_by(f64::total_cmp);
    Ok(PooledMidCdf { sorted })
}
