//! Distributional variable mining for two-class data.
//!
//! Variables are mapped to mid-ranks, expanded in an orthonormal basis of
//! rank score functions, and scored by the sum of squared correlations
//! between the class label and each score component (the CR statistic).
//! Thresholds are picked with a comparison-density estimate of the local
//! false discovery rate (CDfdr) after pre-flattening the scores through an
//! estimated null.
//!
//! The crate is organised bottom-up:
//!
//! * [`midrank`]: mid-distribution transform with average ties.
//! * [`score`]: Gram-Schmidt score basis on powers of the centred mid-rank.
//! * [`comparison`]: two-sample comparison density and PP-plot points.
//! * [`cr`]: CR statistic, chi-square p-values, ranking and categories.
//! * [`cdfdr`]: pre-flattened one-sample comparison density and selection.
//! * [`sim`]: contamination experiments against BH and a two-step baseline.
//! * [`dataset`], [`pipeline`], [`export`]: CSV ingestion, the end-to-end
//!   analysis and the plot/report writers.

pub mod cdfdr;
pub mod comparison;
pub mod cr;
pub mod dataset;
mod error;
pub mod export;
pub mod legendre;
pub mod midrank;
pub mod pipeline;
pub mod score;
pub mod sim;
pub mod special;

pub use cdfdr::{
    cdfdr_pipeline, CdfdrConfig, EmpiricalNull, FdrResult, InverseFdrMode, NullMethod, ScoreInput,
    Sidedness,
};
pub use comparison::{CdEstimate, ComparisonDensity, TwoSampleData};
pub use cr::{Category, CrResult, RankedReport};
pub use dataset::{Dataset, LoadOptions};
pub use error::{Error, Result};
pub use midrank::{MidRankVector, VariableColumn, VariableKind};
pub use pipeline::{analyze, AnalysisReport, AnalyzeConfig, VariableReport, VariableStatus};
pub use score::ScoreBasis;
pub use sim::{Method, SignalModel, SimConfig, SimReport};
