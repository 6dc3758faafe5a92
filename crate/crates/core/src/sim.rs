//! Contamination experiments: fixed signals, fresh noise every run.
//!
//! Signals are drawn once per experiment from stream 0 of a ChaCha8 generator
//! seeded with `seed`; run `r` draws its noise from stream `r + 1`, so every
//! run is reproducible on its own regardless of scheduling.

use crate::cdfdr::{cdfdr_pipeline, CdfdrConfig, ScoreInput};
use crate::error::{Error, Result};
use crate::special::{norm_pdf, norm_sf};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

pub const NAIVE_BINS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SignalModel {
    /// `z = mu + N(0, 1)`.
    GaussianShift { mu: f64 },
    /// `z ~ Uniform[lo, hi]`.
    UniformBand { lo: f64, hi: f64 },
}

impl SignalModel {
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            SignalModel::GaussianShift { mu } => mu + rng.sample::<f64, _>(StandardNormal),
            SignalModel::UniformBand { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
        }
    }
}

impl std::str::FromStr for SignalModel {
    type Err = Error;

    /// `gaussian-shift:4.52` or `uniform-band:2,4`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad signal model `{s}`"));
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        match (kind.trim(), nums.as_slice()) {
            ("gaussian-shift", &[mu]) => Ok(SignalModel::GaussianShift { mu }),
            ("uniform-band", &[lo, hi]) if lo < hi => Ok(SignalModel::UniformBand { lo, hi }),
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cdfdr,
    Bh,
    NaiveTwoStep,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Cdfdr => "cdfdr",
            Method::Bh => "bh",
            Method::NaiveTwoStep => "naive-two-step",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "cdfdr" => Ok(Method::Cdfdr),
            "bh" => Ok(Method::Bh),
            "naive-two-step" | "naive" => Ok(Method::NaiveTwoStep),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub p: usize,
    pub m_signals: usize,
    pub signal_model: SignalModel,
    pub runs: usize,
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Level shared by all methods.
    pub fdr_level: f64,
    pub cdfdr: CdfdrConfig,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            p: 1000,
            m_signals: 25,
            signal_model: SignalModel::GaussianShift { mu: 4.52 },
            runs: 100,
            seed: 1,
            methods: vec![Method::Cdfdr, Method::Bh, Method::NaiveTwoStep],
            fdr_level: 0.2,
            cdfdr: CdfdrConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_signals > self.p {
            return Err(Error::Config(format!(
                "m_signals {} exceeds p {}",
                self.m_signals, self.p
            )));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods selected".into()));
        }
        if !(self.fdr_level > 0.0 && self.fdr_level < 1.0) {
            return Err(Error::Config(format!("fdr level {} outside (0, 1)", self.fdr_level)));
        }
        self.cdfdr.validate()
    }

    /// Apply `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse()
                .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{v}`")))
        }
        match key {
            "p" => self.p = num(key, value)?,
            "m_signals" | "m" => self.m_signals = num(key, value)?,
            "signal_model" => self.signal_model = value.parse()?,
            "runs" => self.runs = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .map(str::parse)
                    .collect::<Result<_>>()?
            }
            "fdr_level" => {
                self.fdr_level = num(key, value)?;
                self.cdfdr.fdr_level = self.fdr_level;
            }
            "null_method" => self.cdfdr.null_method = value.parse()?,
            "degree" | "legendre_degree" => self.cdfdr.degree = num(key, value)?,
            "sidedness" => self.cdfdr.sidedness = value.parse()?,
            "mode" => self.cdfdr.mode = value.parse()?,
            other => return Err(Error::Config(format!("unknown key `{other}`"))),
        }
        Ok(())
    }
}

/// Two-sided normal p-values, Benjamini-Hochberg step-up at `level`.
pub fn bh_baseline(z: &[f64], level: f64) -> Vec<bool> {
    let pvals: Vec<f64> = z.iter().map(|&v| 2.0 * norm_sf(v.abs())).collect();
    bh_select(&pvals, level)
}

pub fn bh_select(pvals: &[f64], level: f64) -> Vec<bool> {
    let p = pvals.len();
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| pvals[a].total_cmp(&pvals[b]));
    let cutoff = order
        .iter()
        .enumerate()
        .filter(|&(k, &i)| pvals[i] <= (k + 1) as f64 * level / p as f64)
        .map(|(k, _)| k + 1)
        .next_back()
        .unwrap_or(0);
    let mut selected = vec![false; p];
    for &i in &order[..cutoff] {
        selected[i] = true;
    }
    selected
}

/// Histogram estimate of `f`, then `fdr = phi(z) / fhat(z) <= level`.
pub fn naive_two_step_baseline(z: &[f64], level: f64) -> Vec<bool> {
    let p = z.len();
    let (lo, hi) = z
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let range = hi - lo;
    if p == 0 || !(range > 0.0) {
        return vec![false; p];
    }
    let width = range / NAIVE_BINS as f64;
    let bin = |v: f64| (((v - lo) / width) as usize).min(NAIVE_BINS - 1);
    let mut counts = [0usize; NAIVE_BINS];
    for &v in z {
        counts[bin(v)] += 1;
    }
    let floor = 1.0 / (p as f64 * range);
    z.iter()
        .map(|&v| {
            let f = (counts[bin(v)] as f64 / (p as f64 * width)).max(floor);
            norm_pdf(v) / f <= level
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub method: Method,
    pub selected: usize,
    pub true_positives: usize,
    pub signal_hash: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub counts: Vec<usize>,
    pub min: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: usize,
    pub mean: f64,
    /// Mean of `|selected - m_signals|` over runs.
    pub mean_abs_error: f64,
}

impl MethodSummary {
    fn new(method: Method, counts: Vec<usize>, truth: usize) -> Self {
        let mut sorted = counts.clone();
        sorted.sort_unstable();
        let n = counts.len() as f64;
        Self {
            method,
            min: sorted[0],
            q1: quantile(&sorted, 0.25),
            median: quantile(&sorted, 0.5),
            q3: quantile(&sorted, 0.75),
            max: *sorted.last().unwrap(),
            mean: counts.iter().sum::<usize>() as f64 / n,
            mean_abs_error: counts.iter().map(|&c| c.abs_diff(truth) as f64).sum::<f64>() / n,
            counts,
        }
    }
}

/// Linear-interpolation quantile of sorted counts.
fn quantile(sorted: &[usize], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] as f64 * (1.0 - frac) + sorted[hi] as f64 * frac
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub config: SimConfig,
    pub signal_hash: u64,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<MethodSummary>,
}

impl SimReport {
    pub fn summary(&self, method: Method) -> Option<&MethodSummary> {
        self.summaries.iter().find(|s| s.method == method)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["run", "method", "selected", "true_positives", "signal_hash"])?;
        for r in &self.records {
            w.write_record([
                r.run.to_string(),
                r.method.as_str().to_string(),
                r.selected.to_string(),
                r.true_positives.to_string(),
                format!("{:016x}", r.signal_hash),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    pub fn summary_json(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row<'a> {
            method: &'a str,
            min: usize,
            q1: f64,
            median: f64,
            q3: f64,
            max: usize,
            mean: f64,
            mean_abs_error: f64,
        }
        #[derive(Serialize)]
        struct Summary<'a> {
            config: &'a SimConfig,
            signal_hash: String,
            methods: Vec<Row<'a>>,
        }
        let methods = self
            .summaries
            .iter()
            .map(|s| Row {
                method: s.method.as_str(),
                min: s.min,
                q1: s.q1,
                median: s.median,
                q3: s.q3,
                max: s.max,
                mean: s.mean,
                mean_abs_error: s.mean_abs_error,
            })
            .collect();
        Ok(serde_json::to_string_pretty(&Summary {
            config: &self.config,
            signal_hash: format!("{:016x}", self.signal_hash),
            methods,
        })?)
    }
}

/// FNV-1a over the bit patterns.
pub fn hash_values(values: &[f64]) -> u64 {
    values.iter().fold(0xcbf2_9ce4_8422_2325, |h, v| {
        v.to_bits()
            .to_le_bytes()
            .iter()
            .fold(h, |h, &b| (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3))
    })
}

pub fn draw_signals(cfg: &SimConfig) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    (0..cfg.m_signals).map(|_| cfg.signal_model.draw(&mut rng)).collect()
}

/// Signals followed by fresh standard-normal noise for run `run`.
pub fn run_scores(cfg: &SimConfig, signals: &[f64], run: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(run as u64 + 1);
    let mut z = signals.to_vec();
    z.extend((signals.len()..cfg.p).map(|_| rng.sample::<f64, _>(StandardNormal)));
    z
}

fn apply(method: Method, z: &[f64], cfg: &SimConfig) -> Result<Vec<bool>> {
    Ok(match method {
        Method::Cdfdr => {
            let mut c = cfg.cdfdr;
            c.fdr_level = cfg.fdr_level;
            cdfdr_pipeline(&ScoreInput::Z(z.to_vec()), &c)?.selected
        }
        Method::Bh => bh_baseline(z, cfg.fdr_level),
        Method::NaiveTwoStep => naive_two_step_baseline(z, cfg.fdr_level),
    })
}

pub fn run_experiment(cfg: &SimConfig) -> Result<SimReport> {
    cfg.validate()?;
    let signals = draw_signals(cfg);
    let signal_hash = hash_values(&signals);
    let per_run: Vec<Vec<RunRecord>> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let z = run_scores(cfg, &signals, run);
            let hash = hash_values(&z[..cfg.m_signals]);
            cfg.methods
                .iter()
                .map(|&method| {
                    let sel = apply(method, &z, cfg)?;
                    Ok(RunRecord {
                        run,
                        method,
                        selected: sel.iter().filter(|&&s| s).count(),
                        true_positives: sel[..cfg.m_signals].iter().filter(|&&s| s).count(),
                        signal_hash: hash,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let records: Vec<RunRecord> = per_run.into_iter().flatten().collect();
    let summaries = cfg
        .methods
        .iter()
        .map(|&m| {
            let counts = records
                .iter()
                .filter(|r| r.method == m)
                .map(|r| r.selected)
                .collect();
            MethodSummary::new(m, counts, cfg.m_signals)
        })
        .collect();
    Ok(SimReport {
        config: cfg.clone(),
        signal_hash,
        records,
        summaries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bh_edge_cases() {
        assert!(bh_select(&[1.0; 10], 0.2).iter().all(|s| !s));
        let mut p = vec![0.9; 100];
        p[37] = 0.001;
        let sel = bh_select(&p, 0.2);
        assert!(sel[37]);
        assert_eq!(sel.iter().filter(|&&s| s).count(), 1);
        // Step-up picks the largest qualifying rank.
        let sel = bh_select(&[0.01, 0.04, 0.039, 0.5], 0.2);
        assert_eq!(sel, vec![true, true, true, false]);
    }

    #[test]
    fn naive_floor_and_degenerate() {
        let z = [-3.0, -2.9, 0.0, 0.1, 10.0];
        let sel = naive_two_step_baseline(&z, 0.2);
        assert!(sel[4]);
        assert!(naive_two_step_baseline(&[1.0; 5], 0.2).iter().all(|s| !s));
    }

    #[test]
    fn config_text_and_validation() {
        let mut cfg = SimConfig::default();
        cfg.apply_text("# uniform band\np = 500\nm_signals=50\nsignal_model = uniform-band:2,4\nmethods = cdfdr,naive\nseed=9\n")
            .unwrap();
        assert_eq!(cfg.p, 500);
        assert_eq!(cfg.signal_model, SignalModel::UniformBand { lo: 2.0, hi: 4.0 });
        assert_eq!(cfg.methods, vec![Method::Cdfdr, Method::NaiveTwoStep]);
        assert!(cfg.apply_text("bogus = 1").is_err());
        assert!(cfg.apply_text("p").is_err());
        cfg.m_signals = 600;
        assert!(cfg.validate().is_err());
        assert!("uniform-band:4,2".parse::<SignalModel>().is_err());
    }

    #[test]
    fn deterministic_and_fixed_signals() {
        let cfg = SimConfig { runs: 12, ..Default::default() };
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.records.iter().all(|r| r.signal_hash == a.signal_hash));
        assert!(a.records.iter().all(|r| r.selected <= cfg.p));
        let z0 = run_scores(&cfg, &draw_signals(&cfg), 0);
        let z1 = run_scores(&cfg, &draw_signals(&cfg), 1);
        assert_eq!(z0[..25], z1[..25]);
        assert_ne!(z0[25..], z1[25..]);
    }

    #[test]
    fn bh_null_behaviour() {
        let cfg = SimConfig { m_signals: 0, methods: vec![Method::Bh], ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        let zero = report.summary(Method::Bh).unwrap().counts.iter().filter(|&&c| c == 0).count();
        assert!(zero >= 80, "{zero}");
    }

    #[test]
    fn bh_finds_strong_signals() {
        let cfg = SimConfig { methods: vec![Method::Bh], ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.summary(Method::Bh).unwrap().mean >= 15.0);
    }

    #[test]
    fn naive_null_fraction() {
        let cfg = SimConfig { m_signals: 0, methods: vec![Method::NaiveTwoStep], runs: 50, ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        assert!(report.summary(Method::NaiveTwoStep).unwrap().median <= 50.0);
    }

    #[test]
    fn strong_signals_are_recovered() {
        let cfg = SimConfig {
            signal_model: SignalModel::GaussianShift { mu: 8.0 },
            methods: vec![Method::Cdfdr],
            ..Default::default()
        };
        let report = run_experiment(&cfg).unwrap();
        let med = report.summary(Method::Cdfdr).unwrap().median;
        assert!((23.0..=27.0).contains(&med), "median {med}");
    }

    #[test]
    fn quantiles() {
        let s = [1, 2, 3, 4];
        assert_eq!(quantile(&s, 0.5), 2.5);
        assert_eq!(quantile(&s, 0.0), 1.0);
        assert_eq!(quantile(&s, 0.25), 1.75);
    }

    #[test]
    fn csv_and_json_outputs() {
        let cfg = SimConfig { runs: 3, ..Default::default() };
        let report = run_experiment(&cfg).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 3);
        assert!(text.starts_with("run,method,selected,true_positives,signal_hash"));
        let json: serde_json::Value = serde_json::from_str(&report.summary_json().unwrap()).unwrap();
        assert_eq!(json["methods"].as_array().unwrap().len(), 3);
    }
}
