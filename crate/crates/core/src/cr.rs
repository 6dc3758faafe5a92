//! CR statistic: squared label/score correlations summed over components.
//!
//! Under no class difference `n * CR` is asymptotically chi-square with `m`
//! degrees of freedom. Individual components point at the kind of
//! discriminating information: location, spread, asymmetry or tails.

use crate::comparison::TwoSampleData;
use crate::score::ScoreBasis;
use crate::special::chi2_sf;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Mean,
    Variance,
    Skewness,
    Tail,
    Mixed,
}

impl Category {
    /// Category named by a 1-based component index, if it has one.
    pub fn of_component(a: usize) -> Option<Self> {
        match a {
            1 => Some(Category::Mean),
            2 => Some(Category::Variance),
            3 => Some(Category::Skewness),
            4 => Some(Category::Tail),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Mean => "mean",
            Category::Variance => "variance",
            Category::Skewness => "skewness",
            Category::Tail => "tail",
            Category::Mixed => "mixed",
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrResult {
    pub components: Vec<f64>,
    pub cr: f64,
    pub pvalue: f64,
    pub category: Category,
    pub n_effective: usize,
}

impl CrResult {
    pub fn from_components(components: Vec<f64>, n_effective: usize) -> Self {
        let cr = cr_statistic(&components);
        let pvalue = null_pvalue(cr, n_effective, components.len().max(1));
        let category = categorize(&components, cr);
        Self {
            components,
            cr,
            pvalue,
            category,
            n_effective,
        }
    }

    pub fn compute(data: &TwoSampleData, basis: &ScoreBasis) -> Self {
        Self::from_components(component_correlations(data, basis), data.n())
    }

    /// Result for a variable that carries no usable information.
    pub fn flat(n_effective: usize) -> Self {
        Self {
            components: Vec::new(),
            cr: 0.0,
            pvalue: 1.0,
            category: Category::Mixed,
            n_effective,
        }
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }
}

/// Divisor-n sample correlation between the label and each score column.
pub fn component_correlations(data: &TwoSampleData, basis: &ScoreBasis) -> Vec<f64> {
    assert_eq!(data.n(), basis.n(), "basis built on a different sample");
    let n = data.n() as f64;
    let pi = data.pi_hat();
    let y_sd = (pi * (1.0 - pi)).sqrt();
    (0..basis.m())
        .map(|k| {
            let (mut sum, mut sq, mut ys) = (0.0, 0.0, 0.0);
            for (s, &y) in basis.column(k).zip(data.y()) {
                sum += s;
                sq += s * s;
                if y {
                    ys += s;
                }
            }
            let mean = sum / n;
            let var = (sq / n - mean * mean).max(0.0);
            let cov = ys / n - pi * mean;
            if var == 0.0 {
                0.0
            } else {
                (cov / (var.sqrt() * y_sd)).clamp(-1.0, 1.0)
            }
        })
        .collect()
}

pub fn cr_statistic(components: &[f64]) -> f64 {
    components.iter().map(|r| r * r).sum()
}

/// Upper-tail chi-square(m) probability of `n * cr`.
pub fn null_pvalue(cr: f64, n: usize, m: usize) -> f64 {
    chi2_sf(n as f64 * cr, m)
}

fn categorize(components: &[f64], cr: f64) -> Category {
    if cr <= 0.0 {
        return Category::Mixed;
    }
    let (best, share) = components
        .iter()
        .enumerate()
        .map(|(a, r)| (a + 1, r * r))
        .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
    if share > 0.5 * cr {
        Category::of_component(best).unwrap_or(Category::Mixed)
    } else {
        Category::Mixed
    }
}

/// Variables ordered by CR, with per-component leader boards.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedReport {
    /// Variable indices, best first.
    pub order: Vec<usize>,
    /// 1-based rank of each variable, indexed like the input.
    pub rank: Vec<usize>,
    /// Sorted CR values, for the threshold plot.
    pub sorted_cr: Vec<f64>,
    /// `by_component[a]` orders variables by `R_{a+1}^2`, descending.
    pub by_component: Vec<Vec<usize>>,
    /// `cumulative[j]` orders variables by `sum_{a <= j+2} R_a^2`, descending.
    pub cumulative: Vec<Vec<usize>>,
}

impl RankedReport {
    /// First `k` entries of the list for 1-based component `a`.
    pub fn top_for_component(&self, a: usize, k: usize) -> &[usize] {
        let list = &self.by_component[a - 1];
        &list[..k.min(list.len())]
    }
}

pub fn rank_variables(results: &[CrResult]) -> RankedReport {
    assert!(!results.is_empty(), "nothing to rank");
    let order = sort_desc(results.len(), |i| results[i].cr);
    let mut rank = vec![0; results.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    let sorted_cr = order.iter().map(|&i| results[i].cr).collect();
    let m = results.iter().map(CrResult::m).max().unwrap_or(0);
    let component = |i: usize, a: usize| results[i].components.get(a).map_or(0.0, |r| r * r);
    let by_component = (0..m)
        .map(|a| sort_desc(results.len(), |i| component(i, a)))
        .collect();
    let cumulative = (2..m)
        .map(|upto| sort_desc(results.len(), |i| (0..upto).map(|a| component(i, a)).sum()))
        .collect();
    RankedReport {
        order,
        rank,
        sorted_cr,
        by_component,
        cumulative,
    }
}

fn sort_desc(len: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by(|&a, &b| key(b).total_cmp(&key(a)));
    idx
}
