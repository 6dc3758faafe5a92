//! `varmine` command line: rank variables, export curves, threshold score
//! columns and run the simulation harness.

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use varmine::cdfdr::CrScore;
use varmine::dataset::load_csv;
use varmine::export::{export_curves, export_plots, summary_json, write_fdr_csv, write_ranked_csv};
use varmine::pipeline::curves_for;
use varmine::sim::run_experiment;
use varmine::{
    analyze, cdfdr_pipeline, AnalyzeConfig, CdfdrConfig, Error, InverseFdrMode, LoadOptions, NullMethod,
    ScoreInput, Sidedness, SimConfig, VariableKind,
};

const EXIT_PARSE: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "varmine", version, about = "Distributional variable ranking for two-class data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank every variable, select with CDfdr and export reports.
    Rank(RankArgs),
    /// Export comparison density and PP curves for named variables.
    Cd(CdArgs),
    /// Threshold an external column of z or CR values.
    Fdr(FdrArgs),
    /// Run the repeated-sampling simulation.
    Simulate(SimulateArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Input CSV with a header row.
    input: PathBuf,
    /// Name of the class label column.
    #[arg(long)]
    label: String,
    /// Label value coded as class 1.
    #[arg(long)]
    positive: Option<String>,
    /// Missing-value token; repeat to list several. Replaces the defaults.
    #[arg(long = "missing")]
    missing: Vec<String>,
    /// Column kind override as NAME=KIND (continuous, discrete, categorical-ordinal).
    #[arg(long = "kind", value_parser = parse_kind)]
    kinds: Vec<(String, VariableKind)>,
}

impl DataArgs {
    fn options(&self) -> LoadOptions {
        let mut opts = LoadOptions::new(&self.label);
        opts.positive_label = self.positive.clone();
        if !self.missing.is_empty() {
            opts.missing_tokens = self.missing.clone();
        }
        opts.kind_overrides = self.kinds.clone();
        opts
    }
}

#[derive(Args)]
struct FdrOpts {
    #[arg(long = "fdr-level", default_value_t = 0.2)]
    fdr_level: f64,
    /// pooled-moments, robust (median/MAD) or theoretical.
    #[arg(long = "null-method", default_value = "pooled-moments")]
    null_method: NullMethod,
    /// Legendre degree of the residual density.
    #[arg(long, default_value_t = 6)]
    degree: usize,
    /// two-sided, right or left; CR input always uses right.
    #[arg(long, default_value = "two-sided")]
    sidedness: Sidedness,
    /// weighted or residual.
    #[arg(long, default_value = "weighted")]
    mode: InverseFdrMode,
}

impl FdrOpts {
    fn config(&self) -> CdfdrConfig {
        CdfdrConfig {
            fdr_level: self.fdr_level,
            null_method: self.null_method,
            degree: self.degree,
            sidedness: self.sidedness,
            mode: self.mode,
        }
    }
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Number of score components.
    #[arg(long = "M", default_value_t = 4)]
    m: usize,
    /// Selected variables whose curves are exported.
    #[arg(long = "top-k", default_value_t = 10)]
    top_k: usize,
    #[command(flatten)]
    fdr: FdrOpts,
    /// Also render SVG plots.
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "varmine-out")]
    out: PathBuf,
}

#[derive(Args)]
struct CdArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Variable to export; repeat for several.
    #[arg(long = "var", required = true)]
    vars: Vec<String>,
    #[arg(long = "M", default_value_t = 4)]
    m: usize,
    #[arg(long)]
    svg: bool,
    #[arg(long, default_value = "varmine-out")]
    out: PathBuf,
}

#[derive(Args)]
struct FdrArgs {
    /// CSV holding the score column.
    input: PathBuf,
    /// Column of scores.
    #[arg(long)]
    column: String,
    /// Column of item identifiers; row numbers are used when absent.
    #[arg(long = "id-column")]
    id_column: Option<String>,
    /// Treat the column as CR statistics instead of z-values.
    #[arg(long)]
    cr: bool,
    /// Sample size behind each CR value.
    #[arg(long, required_if_eq("cr", "true"))]
    n: Option<usize>,
    /// Components behind each CR value.
    #[arg(long = "M", default_value_t = 4)]
    m: usize,
    #[command(flatten)]
    fdr: FdrOpts,
    #[arg(long, default_value = "varmine-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Plain-text key = value file; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    p: Option<usize>,
    /// Number of non-null items.
    #[arg(long = "m-signals")]
    m_signals: Option<usize>,
    /// gaussian-shift:MU or uniform-band:LO,HI.
    #[arg(long = "signal-model")]
    signal_model: Option<String>,
    #[arg(long)]
    runs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of cdfdr, bh, naive.
    #[arg(long)]
    methods: Option<String>,
    #[arg(long = "fdr-level")]
    fdr_level: Option<f64>,
    #[arg(long = "null-method")]
    null_method: Option<String>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    sidedness: Option<String>,
    #[arg(long, default_value = "varmine-out")]
    out: PathBuf,
}

fn parse_kind(s: &str) -> Result<(String, VariableKind), String> {
    let (name, kind) = s.rsplit_once('=').ok_or_else(|| format!("expected NAME=KIND, got `{s}`"))?;
    Ok((name.to_string(), kind.parse().map_err(|e: Error| e.to_string())?))
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("creating {}", path.display()))
}

fn rank(args: &RankArgs) -> anyhow::Result<()> {
    let dataset = load_csv(&args.data.input, &args.data.options())?;
    let cfg = AnalyzeConfig {
        m: args.m,
        cdfdr: args.fdr.config(),
        top_k: args.top_k,
    };
    let report = analyze(&dataset, &cfg)?;
    ensure_dir(&args.out)?;
    write_ranked_csv(&report, create(&args.out.join("ranked.csv"))?)?;
    let summary = args.out.join("summary.json");
    std::fs::write(&summary, summary_json(&report, args.top_k)?)
        .with_context(|| format!("writing {}", summary.display()))?;
    export_plots(&report, &args.out, args.svg)?;
    let selected = report.selected_names();
    println!(
        "{} variables ranked, {} selected{}",
        report.variables.len(),
        selected.len(),
        if report.fdr.is_none() { " (too few usable variables for fdr)" } else { "" }
    );
    for name in selected.iter().take(args.top_k) {
        println!("  {name}");
    }
    Ok(())
}

fn cd(args: &CdArgs) -> anyhow::Result<()> {
    let dataset = load_csv(&args.data.input, &args.data.options())?;
    ensure_dir(&args.out)?;
    for name in &args.vars {
        match curves_for(&dataset, name, args.m)? {
            Some(curves) => {
                for f in export_curves(&curves, &args.out, args.svg)? {
                    println!("{}", f.display());
                }
            }
            None => eprintln!("skipping `{name}`: degenerate variable"),
        }
    }
    Ok(())
}

fn read_scores(args: &FdrArgs) -> anyhow::Result<(Vec<String>, Vec<f64>)> {
    let source = args.input.display().to_string();
    let file = File::open(&args.input).map_err(|e| Error::Io { path: args.input.clone(), source: e })?;
    let mut reader = csv::Reader::from_reader(file);
    let headers = reader.headers()?.clone();
    let find = |name: &str| {
        headers.iter().position(|h| h.trim() == name).ok_or_else(|| Error::Parse {
            path: source.clone(),
            row: 1,
            column: name.to_string(),
            message: "column not found".into(),
        })
    };
    let at = find(&args.column)?;
    let id_at = args.id_column.as_deref().map(find).transpose()?;
    let (mut ids, mut values) = (Vec::new(), Vec::new());
    for (k, record) in reader.records().enumerate() {
        let record = record.map_err(Error::from)?;
        let row = record.position().map_or(k + 2, |p| p.line() as usize);
        let cell = record.get(at).unwrap_or("").trim();
        let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
            path: source.clone(),
            row,
            column: args.column.clone(),
            message: format!("`{cell}` is not a finite number"),
        })?;
        values.push(v);
        ids.push(match id_at {
            Some(i) => record.get(i).unwrap_or("").to_string(),
            None => (k + 1).to_string(),
        });
    }
    Ok((ids, values))
}

fn fdr(args: &FdrArgs) -> anyhow::Result<()> {
    let (ids, values) = read_scores(args)?;
    let input = if args.cr {
        let n = args.n.ok_or_else(|| Error::Config("--n is required with --cr".into()))?;
        ScoreInput::Cr(values.iter().map(|&cr| CrScore { cr, n, m: args.m }).collect())
    } else {
        ScoreInput::Z(values)
    };
    let result = cdfdr_pipeline(&input, &args.fdr.config())?;
    ensure_dir(&args.out)?;
    write_fdr_csv(&result, &ids, create(&args.out.join("fdr.csv"))?)?;
    println!(
        "{} items, {} selected (null mean {:.4}, sd {:.4})",
        ids.len(),
        result.selected_count(),
        result.null.mu0,
        result.null.sigma0
    );
    Ok(())
}

fn simulate(args: &SimulateArgs) -> anyhow::Result<()> {
    let mut cfg = SimConfig::default();
    if let Some(path) = &args.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.clone(), source: e })?;
        cfg.apply_text(&text)?;
    }
    let overrides = [
        ("p", args.p.map(|v| v.to_string())),
        ("m_signals", args.m_signals.map(|v| v.to_string())),
        ("signal_model", args.signal_model.clone()),
        ("runs", args.runs.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
        ("methods", args.methods.clone()),
        ("fdr_level", args.fdr_level.map(|v| v.to_string())),
        ("null_method", args.null_method.clone()),
        ("degree", args.degree.map(|v| v.to_string())),
        ("mode", args.mode.clone()),
        ("sidedness", args.sidedness.clone()),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            cfg.set(key, &v)?;
        }
    }
    let report = run_experiment(&cfg)?;
    ensure_dir(&args.out)?;
    report.write_csv(create(&args.out.join("simulation.csv"))?)?;
    let summary = args.out.join("simulation_summary.json");
    std::fs::write(&summary, report.summary_json()?)
        .with_context(|| format!("writing {}", summary.display()))?;
    for s in &report.summaries {
        println!(
            "{:<6} median {:>6} mean {:>8.2} mean|err| {:>8.2}",
            s.method.as_str(),
            s.median,
            s.mean,
            s.mean_abs_error
        );
    }
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_parse() => EXIT_PARSE,
        Some(e) if e.is_config() => EXIT_CONFIG,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Rank(a) => rank(a),
        Command::Cd(a) => cd(a),
        Command::Fdr(a) => fdr(a),
        Command::Simulate(a) => simulate(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
