//! Acceptance suite. Runs every criterion in sequence, prints one line each
//! and exits non-zero if any criterion fails.
//!
//! The optional real-data check reads `VARMINE_PROSTATE_CSV`: samples as rows,
//! genes as columns, class label in the column named by
//! `VARMINE_PROSTATE_LABEL` (default `label`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::time::{Duration, Instant};
use varmine::cdfdr::{cdfdr_pipeline, CdfdrConfig, NullMethod, ScoreInput};
use varmine::comparison::{estimate_cd, gof_norm, theta_hat, TwoSampleData};
use varmine::cr::component_correlations;
use varmine::dataset::load_csv;
use varmine::export::ranked_csv_string;
use varmine::midrank::mid_rank_transform;
use varmine::score::build_score_basis;
use varmine::sim::{run_experiment, Method, SignalModel, SimConfig};
use varmine::special::norm_quantile;
use varmine::{analyze, AnalyzeConfig, Category, Dataset, LoadOptions, VariableColumn, VariableKind};

enum Verdict {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Verdict {
    if ok {
        Verdict::Pass(detail)
    } else {
        Verdict::Fail(detail)
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    loop {
        let y: Vec<bool> = (0..n).map(|_| rng.random::<bool>()).collect();
        let ones = y.iter().filter(|&&b| b).count();
        if ones >= 2 && n - ones >= 2 {
            return y;
        }
    }
}

fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    sxy / (sxx * syy).sqrt()
}

fn exact_identities() -> Verdict {
    const TOL: f64 = 1e-10;
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = [0.0f64; 4];
    for _ in 0..100 {
        let n = rng.random_range(30..300);
        let levels = rng.random_range(3..25);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..levels) as f64).collect();
        let col = VariableColumn::complete(x.clone(), VariableKind::Discrete);
        let mid = mid_rank_transform(&col).unwrap();
        let u = mid.u();
        let nf = n as f64;
        let mean = u.iter().sum::<f64>() / nf;
        let var = u.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
        let mut counts = std::collections::BTreeMap::new();
        for v in &x {
            *counts.entry(v.to_bits()).or_insert(0usize) += 1;
        }
        let cube: f64 = counts.values().map(|&c| (c as f64 / nf).powi(3)).sum();
        worst[0] = worst[0].max((mean - 0.5).abs());
        worst[1] = worst[1].max((var - (1.0 - cube) / 12.0).abs());

        let y = labels(&mut rng, n);
        let data = TwoSampleData::new(&mid, &y).unwrap();
        let m = 4.min(mid.distinct() - 1);
        let basis = build_score_basis(&mid, m).unwrap();
        let theta = theta_hat(&data, &basis);
        let pi = data.pi_hat();
        let yf: Vec<f64> = data.y().iter().map(|&b| f64::from(u8::from(b))).collect();
        let s1: Vec<f64> = basis.column(0).collect();
        let r1 = pearson(&yf, &s1);
        worst[2] = worst[2].max((theta[0] - ((1.0 - pi) / pi).sqrt() * r1).abs());

        let cd = estimate_cd(&theta, &basis);
        let parseval = (0..data.n()).map(|i| (cd.at_sample(i) - 1.0).powi(2)).sum::<f64>() / data.n() as f64;
        worst[3] = worst[3].max((gof_norm(&theta) - parseval).abs());
    }
    verdict(
        worst.iter().all(|&w| w <= TOL),
        format!(
            "max |err| mean {:.1e}, variance {:.1e}, theta1 {:.1e}, parseval {:.1e}",
            worst[0], worst[1], worst[2], worst[3]
        ),
    )
}

fn basis_quality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x: Vec<f64> = (0..2000).map(|_| normal(&mut rng)).collect();
        let mid = mid_rank_transform(&VariableColumn::complete(x, VariableKind::Continuous)).unwrap();
        for m in 4..=6 {
            let basis = build_score_basis(&mid, m).unwrap();
            for a in 0..m {
                for b in 0..m {
                    let g = (0..basis.n()).map(|i| basis.row(i)[a] * basis.row(i)[b]).sum::<f64>() / basis.n() as f64;
                    let target = if a == b { 1.0 } else { 0.0 };
                    worst = worst.max((g - target).abs());
                }
            }
        }
    }
    verdict(worst <= 1e-8, format!("max |G - I| = {worst:.2e}"))
}

fn null_calibration() -> Verdict {
    let (reps, n, m) = (2000, 100, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut stats = Vec::with_capacity(reps);
    for _ in 0..reps {
        let x: Vec<f64> = (0..n).map(|_| normal(&mut rng)).collect();
        let y = labels(&mut rng, n);
        let mid = mid_rank_transform(&VariableColumn::complete(x, VariableKind::Continuous)).unwrap();
        let data = TwoSampleData::new(&mid, &y).unwrap();
        let basis = build_score_basis(&mid, m).unwrap();
        let cr: f64 = component_correlations(&data, &basis).iter().map(|r| r * r).sum();
        stats.push(n as f64 * cr);
    }
    stats.sort_by(f64::total_cmp);
    // chi-square with 4 df: survival e^{-x/2}(1 + x/2)
    let cdf = |x: f64| 1.0 - (-x / 2.0).exp() * (1.0 + x / 2.0);
    let r = reps as f64;
    let ks = stats
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let f = cdf(s);
            (f - i as f64 / r).abs().max(((i + 1) as f64 / r - f).abs())
        })
        .fold(0.0, f64::max);
    let rejections = stats.iter().filter(|&&s| 1.0 - cdf(s) < 0.05).count() as f64 / r;
    verdict(
        ks < 0.05 && (0.035..=0.065).contains(&rejections),
        format!("KS {ks:.4}, rejection rate {rejections:.4}"),
    )
}

fn monotone_invariance() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let cfg = AnalyzeConfig::default();
    let mut mismatches = Vec::new();
    for d in 0..10 {
        let n = 120;
        let y = labels(&mut rng, n);
        let mut names = Vec::new();
        let mut vars = Vec::new();
        for j in 0..30 {
            let shift = if j < 3 { 0.8 } else { 0.0 };
            let v: Vec<f64> = if j % 5 == 4 {
                y.iter().map(|_| 1.0 + rng.random_range(0..6) as f64).collect()
            } else {
                y.iter()
                    .map(|&c| (normal(&mut rng) * 0.4 + if c { shift } else { 0.0 }).exp())
                    .collect()
            };
            names.push(format!("v{j}"));
            vars.push(VariableColumn::complete(v, VariableKind::Continuous));
        }
        let ds = Dataset::new(names, vars, y, "1").unwrap();
        let base = ranked_csv_string(&analyze(&ds, &cfg).unwrap()).unwrap();
        let transforms: [(&str, fn(f64) -> f64); 3] =
            [("exp", f64::exp), ("log", f64::ln), ("affine", |x| 3.0 * x + 2.0)];
        for (label, f) in transforms {
            let other = ranked_csv_string(&analyze(&ds.map_variables(|_, v| v.map_values(f)), &cfg).unwrap()).unwrap();
            if other != base {
                mismatches.push(format!("dataset {d} {label}"));
            }
        }
    }
    verdict(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "30 transformed reports byte-identical".into()
        } else {
            format!("differs: {}", mismatches.join(", "))
        },
    )
}

fn compare_to_naive(cfg: &SimConfig, median_range: std::ops::RangeInclusive<f64>) -> (bool, String) {
    let report = run_experiment(cfg).unwrap();
    let cd = report.summary(Method::Cdfdr).unwrap();
    let naive = report.summary(Method::NaiveTwoStep).unwrap();
    let ok = median_range.contains(&cd.median) && cd.mean_abs_error < naive.mean_abs_error;
    (
        ok,
        format!(
            "M={} median {} (need {:?}), MAE {:.2} vs naive {:.2}",
            cfg.m_signals, cd.median, median_range, cd.mean_abs_error, naive.mean_abs_error
        ),
    )
}

fn example_gaussian_shift() -> Verdict {
    let mut cfg = SimConfig::default();
    let (ok25, d25) = compare_to_naive(&cfg, 15.0..=35.0);
    cfg.m_signals = 50;
    let (ok50, d50) = compare_to_naive(&cfg, 35.0..=65.0);
    verdict(ok25 && ok50, format!("{d25}; {d50}"))
}

fn example_uniform_band() -> Verdict {
    let cfg = SimConfig {
        m_signals: 50,
        signal_model: SignalModel::UniformBand { lo: 2.0, hi: 4.0 },
        ..SimConfig::default()
    };
    let (ok, detail) = compare_to_naive(&cfg, 10.0..=90.0);
    verdict(ok, detail)
}

fn pure_null() -> Verdict {
    let cfg = CdfdrConfig {
        null_method: NullMethod::FixedTheoretical,
        ..CdfdrConfig::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut quiet = 0;
    let mut most = 0;
    for _ in 0..100 {
        let z: Vec<f64> = (0..1000).map(|_| normal(&mut rng)).collect();
        let k = cdfdr_pipeline(&ScoreInput::Z(z), &cfg).unwrap().selected_count();
        most = most.max(k);
        if k <= 5 {
            quiet += 1;
        }
    }
    verdict(quiet >= 90, format!("{quiet}/100 trials with at most 5 selections (max {most})"))
}

fn planted_categories() -> Verdict {
    const N: usize = 500;
    const LOCATION_SHIFT: f64 = 0.75;
    const SCALE_RATIO: f64 = 2.0;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let cfg = AnalyzeConfig::default();
    let (mut detected, mut correct) = (0usize, 0usize);
    for _ in 0..50 {
        let y = labels(&mut rng, N);
        let mut names = Vec::with_capacity(1000);
        let mut vars = Vec::with_capacity(1000);
        for j in 0..1000 {
            let v = y
                .iter()
                .map(|&c| {
                    let e = normal(&mut rng);
                    match (j, c) {
                        (0..=9, true) => e + LOCATION_SHIFT,
                        (10..=19, true) => e * SCALE_RATIO,
                        _ => e,
                    }
                })
                .collect();
            names.push(format!("g{j}"));
            vars.push(VariableColumn::complete(v, VariableKind::Continuous));
        }
        let report = analyze(&Dataset::new(names, vars, y, "1").unwrap(), &cfg).unwrap();
        for j in 0..20 {
            if report.selected[j] {
                detected += 1;
                let want = if j < 10 { Category::Mean } else { Category::Variance };
                if report.variables[j].result.category == want {
                    correct += 1;
                }
            }
        }
    }
    let share = correct as f64 / detected.max(1) as f64;
    verdict(
        detected > 0 && share >= 0.9,
        format!("{correct}/{detected} detected planted variables correctly categorized ({:.1}%)", 100.0 * share),
    )
}

fn prostate() -> Verdict {
    let Ok(path) = std::env::var("VARMINE_PROSTATE_CSV") else {
        return Verdict::Skip("set VARMINE_PROSTATE_CSV to run".into());
    };
    let label = std::env::var("VARMINE_PROSTATE_LABEL").unwrap_or_else(|_| "label".into());
    let ds = match load_csv(&path, &LoadOptions::new(label)) {
        Ok(ds) => ds,
        Err(e) => return Verdict::Fail(format!("cannot load {path}: {e}")),
    };
    let n = ds.n();
    let t = StudentsT::new(0.0, 1.0, (n - 2) as f64).unwrap();
    let z: Vec<f64> = ds
        .variables()
        .iter()
        .map(|col| {
            let (mut a, mut b) = (Vec::new(), Vec::new());
            for ((&v, &miss), &y) in col.values().iter().zip(col.missing()).zip(ds.labels()) {
                if !miss {
                    if y { a.push(v) } else { b.push(v) }
                }
            }
            let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
            let (ma, mb) = (mean(&a), mean(&b));
            let ss: f64 = a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() + b.iter().map(|v| (v - mb).powi(2)).sum::<f64>();
            let (na, nb) = (a.len() as f64, b.len() as f64);
            let sp = (ss / (na + nb - 2.0)).sqrt();
            let stat = (ma - mb) / (sp * (1.0 / na + 1.0 / nb).sqrt());
            norm_quantile(t.cdf(stat))
        })
        .collect();
    let z_count = match cdfdr_pipeline(&ScoreInput::Z(z), &CdfdrConfig::default()) {
        Ok(r) => r.selected_count(),
        Err(e) => return Verdict::Fail(format!("z-score CDfdr failed: {e}")),
    };
    let cfg = AnalyzeConfig { m: 2, ..AnalyzeConfig::default() };
    let cr_count = match analyze(&ds, &cfg) {
        Ok(r) => r.selected_names().len(),
        Err(e) => return Verdict::Fail(format!("CR analysis failed: {e}")),
    };
    verdict(
        (40..=55).contains(&z_count) && (14..=24).contains(&cr_count),
        format!("z-score selections {z_count} (need 40..=55), 2-component CR selections {cr_count} (need 14..=24)"),
    )
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 9] = [
        ("1 exact identities", Duration::from_secs(5), exact_identities),
        ("2 basis orthonormality", Duration::from_secs(10), basis_quality),
        ("3 null calibration", Duration::from_secs(60), null_calibration),
        ("4 monotone invariance", Duration::from_secs(10), monotone_invariance),
        ("5 gaussian-shift simulation", Duration::from_secs(180), example_gaussian_shift),
        ("6 uniform-band simulation", Duration::from_secs(180), example_uniform_band),
        ("7 pure-null fdr", Duration::from_secs(30), pure_null),
        ("8 planted categorization", Duration::from_secs(120), planted_categories),
        ("9 prostate panel (optional)", Duration::from_secs(600), prostate),
    ];
    let mut failed = Vec::new();
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let within = elapsed <= budget;
        let (tag, detail) = match outcome {
            Verdict::Pass(d) if within => ("PASS", d),
            Verdict::Pass(d) => ("FAIL", format!("{d}; over time budget {budget:?}")),
            Verdict::Fail(d) => ("FAIL", d),
            Verdict::Skip(d) => ("SKIP", d),
        };
        println!("[{tag}] criterion {name} ({:.2}s): {detail}", elapsed.as_secs_f64());
        if tag == "FAIL" {
            failed.push(name);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
