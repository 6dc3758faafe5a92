//! Report and plot writers.
//!
//! Numbers are written with the shortest decimal form that parses back to
//! the same `f64`.

use crate::cdfdr::FdrResult;
use crate::error::{Error, Result};
use crate::pipeline::{AnalysisReport, VariableCurves};
use serde::Serialize;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

fn num(v: f64) -> String {
    format!("{v}")
}

/// Ranked table: one row per variable, best first.
pub fn write_ranked_csv<W: Write>(report: &AnalysisReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["variable_id".to_string(), "n_effective".to_string()];
    header.extend((1..=report.m).map(|a| format!("R{a}")));
    header.extend(
        ["CR", "pvalue", "category", "rank", "m_used", "status", "inverse_fdr", "selected"]
            .map(String::from),
    );
    w.write_record(&header)?;
    for &i in &report.ranking.order {
        let v = &report.variables[i];
        let mut row = vec![v.name.clone(), v.result.n_effective.to_string()];
        row.extend((0..report.m).map(|a| v.result.components.get(a).map_or(String::new(), |&r| num(r))));
        row.push(num(v.result.cr));
        row.push(num(v.result.pvalue));
        row.push(v.result.category.to_string());
        row.push(report.ranking.rank[i].to_string());
        row.push(v.m_used.to_string());
        row.push(v.status.as_str().to_string());
        row.push(report.inverse_fdr[i].map_or(String::new(), num));
        row.push(u8::from(report.selected[i]).to_string());
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("<ranked>", e))?;
    Ok(())
}

pub fn ranked_csv_string(report: &AnalysisReport) -> Result<String> {
    let mut buf = Vec::new();
    write_ranked_csv(report, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

/// Per-item CDfdr output: `item_id,z,u_flat,inverse_fdr,selected`.
pub fn write_fdr_csv<W: Write>(fdr: &FdrResult, ids: &[String], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["item_id", "z", "u_flat", "inverse_fdr", "selected"])?;
    for (k, id) in ids.iter().enumerate() {
        w.write_record([
            id.clone(),
            num(fdr.z[k]),
            num(fdr.u_flat[k]),
            num(fdr.inverse_fdr[k]),
            u8::from(fdr.selected[k]).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<fdr>", e))?;
    Ok(())
}

#[derive(Serialize)]
struct SummaryJson<'a> {
    m: usize,
    variables: usize,
    selected: Vec<&'a str>,
    null_mu0: Option<f64>,
    null_sigma0: Option<f64>,
    residual_coeffs: Option<&'a [f64]>,
    residual_kept: Option<&'a [bool]>,
    threshold: Option<f64>,
    top: Vec<TopRow<'a>>,
}

#[derive(Serialize)]
struct TopRow<'a> {
    variable_id: &'a str,
    rank: usize,
    cr: f64,
    pvalue: f64,
    category: &'a str,
}

pub fn summary_json(report: &AnalysisReport, top_k: usize) -> Result<String> {
    let fdr = report.fdr.as_ref();
    let top = report
        .ranking
        .order
        .iter()
        .take(top_k)
        .map(|&i| {
            let v = &report.variables[i];
            TopRow {
                variable_id: &v.name,
                rank: report.ranking.rank[i],
                cr: v.result.cr,
                pvalue: v.result.pvalue,
                category: v.result.category.as_str(),
            }
        })
        .collect();
    Ok(serde_json::to_string_pretty(&SummaryJson {
        m: report.m,
        variables: report.variables.len(),
        selected: report.selected_names(),
        null_mu0: fdr.map(|f| f.null.mu0),
        null_sigma0: fdr.map(|f| f.null.sigma0),
        residual_coeffs: fdr.map(|f| f.residual.coeffs.as_slice()),
        residual_kept: fdr.map(|f| f.residual.kept.as_slice()),
        threshold: fdr.map(|f| f.threshold),
        top,
    })?)
}

/// File-system-safe form of a variable name.
pub fn file_stem(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn write_pairs(path: &Path, header: [&str; 2], rows: &[(f64, f64)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for &(a, b) in rows {
        w.write_record([num(a), num(b)])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_pairs(path: &Path) -> Result<Vec<(f64, f64)>> {
    let mut r = csv::Reader::from_path(path)?;
    r.records()
        .map(|rec| {
            let rec = rec?;
            let get = |k: usize| -> Result<f64> {
                rec.get(k)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::Parse {
                        path: path.display().to_string(),
                        row: rec.position().map_or(0, |p| p.line() as usize),
                        column: k.to_string(),
                        message: "expected a number".into(),
                    })
            };
            Ok((get(0)?, get(1)?))
        })
        .collect()
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes the curve CSVs (and SVGs if asked) for one variable.
pub fn export_curves(curves: &VariableCurves, out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    let stem = file_stem(&curves.name);
    let cd = out_dir.join(format!("cd_{stem}.csv"));
    let pp = out_dir.join(format!("pp_{stem}.csv"));
    write_pairs(&cd, ["u", "dhat"], &curves.density)?;
    write_pairs(&pp, ["h", "f"], &curves.pp)?;
    let mut files = vec![cd, pp];
    if svg {
        let cd_svg = out_dir.join(format!("cd_{stem}.svg"));
        let pp_svg = out_dir.join(format!("pp_{stem}.svg"));
        write_text(
            &cd_svg,
            &svg_plot(&format!("comparison density: {}", curves.name), "u", "d(u)", &curves.density_clipped, None),
        )?;
        write_text(
            &pp_svg,
            &svg_plot(&format!("PP plot: {}", curves.name), "H", "F", &curves.pp, Some(&[(0.0, 0.0), (1.0, 1.0)])),
        )?;
        files.push(cd_svg);
        files.push(pp_svg);
    }
    Ok(files)
}

/// Writes `sorted_cr.csv` plus curve files for the report's exported variables.
pub fn export_plots(report: &AnalysisReport, out_dir: &Path, svg: bool) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let sorted = out_dir.join("sorted_cr.csv");
    {
        let file = std::fs::File::create(&sorted).map_err(|e| Error::io(&sorted, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["rank", "variable_id", "cr"])?;
        for (r, &i) in report.ranking.order.iter().enumerate() {
            w.write_record([(r + 1).to_string(), report.variables[i].name.clone(), num(report.ranking.sorted_cr[r])])?;
        }
        w.flush().map_err(|e| Error::io(&sorted, e))?;
    }
    let mut files = vec![sorted];
    if svg {
        let path = out_dir.join("sorted_cr.svg");
        let pts: Vec<(f64, f64)> = report
            .ranking
            .sorted_cr
            .iter()
            .enumerate()
            .map(|(r, &c)| ((r + 1) as f64, c))
            .collect();
        write_text(&path, &svg_plot("sorted CR statistics", "rank", "CR", &pts, None))?;
        files.push(path);
    }
    for c in &report.curves {
        files.extend(export_curves(c, out_dir, svg)?);
    }
    Ok(files)
}

/// Static line chart with axes and tick labels.
pub fn svg_plot(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    points: &[(f64, f64)],
    reference: Option<&[(f64, f64)]>,
) -> String {
    const W: f64 = 480.0;
    const H: f64 = 360.0;
    const PAD: f64 = 50.0;
    let all = points.iter().chain(reference.unwrap_or(&[]));
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all.filter(|(x, y)| x.is_finite() && y.is_finite()) {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !(x1 > x0) {
        x0 -= 0.5;
        x1 = x0 + 1.0;
    }
    if !(y1 > y0) {
        y0 -= 0.5;
        y1 = y0 + 1.0;
    }
    let sx = |x: f64| PAD + (x - x0) / (x1 - x0) * (W - 2.0 * PAD);
    let sy = |y: f64| H - PAD - (y - y0) / (y1 - y0) * (H - 2.0 * PAD);
    let line = |pts: &[(f64, f64)]| {
        pts.iter()
            .filter(|(x, y)| x.is_finite() && y.is_finite())
            .map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y)))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#);
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, W / 2.0, escape(title));
    let _ = writeln!(
        s,
        r#"<path d="M{p},{t} V{b} H{r}" fill="none" stroke="black"/>"#,
        p = PAD,
        t = PAD,
        b = H - PAD,
        r = W - PAD
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle" font-size="10">{}</text>"#, sx(fx), H - PAD + 15.0, tick(fx));
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#, PAD - 5.0, sy(fy) + 3.0, tick(fy));
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle" font-size="12">{}</text>"#, W / 2.0, H - 10.0, escape(xlabel));
    let _ = writeln!(
        s,
        r#"<text x="15" y="{}" text-anchor="middle" font-size="12" transform="rotate(-90 15 {})">{}</text>"#,
        H / 2.0,
        H / 2.0,
        escape(ylabel)
    );
    if let Some(r) = reference {
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="gray" stroke-dasharray="4 3"/>"#, line(r));
    }
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="1.5"/>"#, line(points));
    s.push_str("</svg>\n");
    s
}

fn tick(v: f64) -> String {
    if v.abs() >= 100.0 {
        format!("{v:.0}")
    } else {
        format!("{v:.2}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
