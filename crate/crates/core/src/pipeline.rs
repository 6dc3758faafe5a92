//! End-to-end analysis: mid-ranks, score basis, CR statistic, ranking and
//! CDfdr selection over the panel of CR values.

use crate::cdfdr::{cdfdr_pipeline, CdfdrConfig, CrScore, FdrResult, ScoreInput, MIN_ITEMS};
use crate::comparison::{estimate_cd, pp_plot_points, theta_hat, TwoSampleData};
use crate::cr::{rank_variables, CrResult, RankedReport};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::midrank::{mid_rank_transform, MidRankVector, VariableColumn, VariableKind};
use crate::score::{build_score_basis, max_components, ScoreBasis, DEFAULT_COMPONENTS, MAX_COMPONENTS};
use rayon::prelude::*;
use serde::Serialize;

pub const CURVE_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyzeConfig {
    pub m: usize,
    pub cdfdr: CdfdrConfig,
    pub top_k: usize,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            m: DEFAULT_COMPONENTS,
            cdfdr: CdfdrConfig::default(),
            top_k: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableStatus {
    Ok,
    /// Fewer than two present values.
    AllMissing,
    /// A single distinct present value.
    Constant,
    /// A class has fewer than two present values.
    EmptyClass,
}

impl VariableStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            VariableStatus::Ok => "ok",
            VariableStatus::AllMissing => "all-missing",
            VariableStatus::Constant => "constant",
            VariableStatus::EmptyClass => "empty-class",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VariableReport {
    pub name: String,
    pub kind: VariableKind,
    pub status: VariableStatus,
    /// Score components actually used; below the requested count when the
    /// variable has few distinct values.
    pub m_used: usize,
    pub theta: Vec<f64>,
    pub result: CrResult,
}

#[derive(Debug, Clone, Serialize)]
pub struct VariableCurves {
    pub index: usize,
    pub name: String,
    pub density: Vec<(f64, f64)>,
    pub density_clipped: Vec<(f64, f64)>,
    pub pp: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub m: usize,
    pub variables: Vec<VariableReport>,
    pub ranking: RankedReport,
    /// CDfdr over the usable variables, absent when there are too few.
    pub fdr: Option<FdrResult>,
    /// Variable index of each item in `fdr`.
    pub fdr_items: Vec<usize>,
    pub selected: Vec<bool>,
    /// Inverse fdr per variable, if it entered the fdr panel.
    pub inverse_fdr: Vec<Option<f64>>,
    pub curves: Vec<VariableCurves>,
}

impl AnalysisReport {
    pub fn selected_names(&self) -> Vec<&str> {
        self.ranking
            .order
            .iter()
            .filter(|&&i| self.selected[i])
            .map(|&i| self.variables[i].name.as_str())
            .collect()
    }
}

struct Fitted {
    mid: MidRankVector,
    data: TwoSampleData,
    basis: ScoreBasis,
}

enum Outcome {
    Fitted(Box<Fitted>),
    Flat(VariableStatus, usize),
}

fn fit_variable(col: &VariableColumn, labels: &[bool], m: usize) -> Result<Outcome> {
    let mid = match mid_rank_transform(col) {
        Ok(mid) => mid,
        Err(Error::AllMissing { present }) => {
            return Ok(Outcome::Flat(VariableStatus::AllMissing, present))
        }
        Err(e) => return Err(e),
    };
    let n = mid.n_effective();
    let data = match TwoSampleData::new(&mid, labels) {
        Ok(d) => d,
        Err(Error::EmptyClass { .. }) => return Ok(Outcome::Flat(VariableStatus::EmptyClass, n)),
        Err(e) => return Err(e),
    };
    let mut m_used = m.min(max_components(mid.distinct())).min(n.saturating_sub(2));
    if mid.sigma_mid() == 0.0 || m_used == 0 {
        return Ok(Outcome::Flat(VariableStatus::Constant, n));
    }
    loop {
        match build_score_basis(&mid, m_used) {
            Ok(basis) => return Ok(Outcome::Fitted(Box::new(Fitted { mid, data, basis }))),
            Err(Error::RankDeficient { component, .. }) if component > 1 => m_used = component - 1,
            Err(e) => return Err(e),
        }
    }
}

pub fn analyze(dataset: &Dataset, cfg: &AnalyzeConfig) -> Result<AnalysisReport> {
    if cfg.m == 0 || cfg.m > MAX_COMPONENTS {
        return Err(Error::InvalidTruncation(cfg.m));
    }
    cfg.cdfdr.validate()?;
    if dataset.p() == 0 {
        return Err(Error::Config("dataset has no feature columns".into()));
    }
    let labels = dataset.labels();
    let variables: Vec<VariableReport> = dataset
        .variables()
        .par_iter()
        .zip(dataset.names())
        .map(|(col, name)| {
            let wrap = |e| Error::Variable {
                name: name.clone(),
                source: Box::new(e),
            };
            let outcome = fit_variable(col, labels, cfg.m).map_err(wrap)?;
            Ok(match outcome {
                Outcome::Fitted(f) => VariableReport {
                    name: name.clone(),
                    kind: col.kind(),
                    status: VariableStatus::Ok,
                    m_used: f.basis.m(),
                    theta: theta_hat(&f.data, &f.basis),
                    result: CrResult::compute(&f.data, &f.basis),
                },
                Outcome::Flat(status, n) => VariableReport {
                    name: name.clone(),
                    kind: col.kind(),
                    status,
                    m_used: 0,
                    theta: Vec::new(),
                    result: CrResult::flat(n),
                },
            })
        })
        .collect::<Result<_>>()?;

    let results: Vec<CrResult> = variables.iter().map(|v| v.result.clone()).collect();
    let ranking = rank_variables(&results);

    let fdr_items: Vec<usize> = (0..variables.len())
        .filter(|&i| variables[i].status == VariableStatus::Ok)
        .collect();
    let mut selected = vec![false; variables.len()];
    let mut inverse_fdr = vec![None; variables.len()];
    let fdr = if fdr_items.len() >= MIN_ITEMS {
        let scores = fdr_items
            .iter()
            .map(|&i| CrScore {
                cr: variables[i].result.cr,
                n: variables[i].result.n_effective,
                m: variables[i].m_used,
            })
            .collect();
        let out = cdfdr_pipeline(&ScoreInput::Cr(scores), &cfg.cdfdr)?;
        for (k, &i) in fdr_items.iter().enumerate() {
            selected[i] = out.selected[k];
            inverse_fdr[i] = Some(out.inverse_fdr[k]);
        }
        Some(out)
    } else {
        None
    };

    let top: Vec<usize> = ranking
        .order
        .iter()
        .copied()
        .filter(|&i| selected[i])
        .take(cfg.top_k)
        .collect();
    let curves = top
        .iter()
        .map(|&i| curves_for_index(dataset, i, cfg.m))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();

    Ok(AnalysisReport {
        m: cfg.m,
        variables,
        ranking,
        fdr,
        fdr_items,
        selected,
        inverse_fdr,
        curves,
    })
}

/// Density grid and PP points for one variable; `None` if it is degenerate.
pub fn curves_for_index(dataset: &Dataset, index: usize, m: usize) -> Result<Option<VariableCurves>> {
    let name = &dataset.names()[index];
    let outcome = fit_variable(&dataset.variables()[index], dataset.labels(), m).map_err(|e| {
        Error::Variable {
            name: name.clone(),
            source: Box::new(e),
        }
    })?;
    let Outcome::Fitted(f) = outcome else {
        return Ok(None);
    };
    debug_assert_eq!(f.mid.n_effective(), f.basis.n());
    let theta = theta_hat(&f.data, &f.basis);
    let cd = estimate_cd(&theta, &f.basis);
    let density = cd.grid(CURVE_POINTS);
    let density_clipped = density.iter().map(|&(u, d)| (u, d.max(0.0))).collect();
    Ok(Some(VariableCurves {
        index,
        name: name.clone(),
        density,
        density_clipped,
        pp: pp_plot_points(&f.data),
    }))
}

pub fn curves_for(dataset: &Dataset, name: &str, m: usize) -> Result<Option<VariableCurves>> {
    let (index, _) = dataset
        .variable(name)
        .ok_or_else(|| Error::Config(format!("no variable named `{name}`")))?;
    curves_for_index(dataset, index, m)
}
