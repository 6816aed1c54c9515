use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, Datelike, NaiveDate, NaiveDateTime, TimeDelta};
use serde_json::{json, Value};
use streampca::ewmstats::{default_alpha_grid, default_burn_in};
use streampca::linalg::{cross_correlation, cross_covariance};
use streampca::synth::{geometric_spectrum, Generator};
use streampca::{estimate_alpha, AlphaEstimate, Error, Ewmpca, EwmpcaConfig, Ipca, Matrix};

use crate::sidecar::{self, Sidecar};
use crate::table::{component_labels, write_labelled, ObservationTable};

/// `--alpha`: a decay in (0, 1) or `ml` for maximum likelihood.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaArg {
    Ml,
    Value(f64),
}

impl FromStr for AlphaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("ml") {
            return Ok(AlphaArg::Ml);
        }
        let v: f64 = s
            .parse()
            .map_err(|_| format!("expected a number in (0, 1) or \"ml\", got {s:?}"))?;
        if !(v > 0.0 && v < 1.0) {
            return Err(format!("alpha must lie in (0, 1), got {v}"));
        }
        Ok(AlphaArg::Value(v))
    }
}

/// `--chunks`: `chunk=N`, `by=year` or `by=month`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChunkSpec {
    Rows(usize),
    Year,
    Month,
}

impl FromStr for ChunkSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('=') {
            Some(("chunk", n)) => match n.parse::<usize>() {
                Ok(n) if n > 0 => Ok(ChunkSpec::Rows(n)),
                _ => Err(format!("chunk size must be a positive integer, got {n:?}")),
            },
            Some(("by", "year")) => Ok(ChunkSpec::Year),
            Some(("by", "month")) => Ok(ChunkSpec::Month),
            _ => Err(format!("expected chunk=N, by=year or by=month, got {s:?}")),
        }
    }
}

/// `--grid a:b:step`, both ends inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec(pub Vec<f64>);

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, step] = parts.as_slice() else {
            return Err(format!("expected start:end:step, got {s:?}"));
        };
        let parse = |t: &str| t.parse::<f64>().map_err(|_| format!("bad number {t:?}"));
        let (a, b, step) = (parse(a)?, parse(b)?, parse(step)?);
        if !(a > 0.0 && b < 1.0 && a <= b && step > 0.0) {
            return Err(format!(
                "grid needs 0 < start <= end < 1 and step > 0, got {s:?}"
            ));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        // snap to 12 decimals so 0.9:0.99:0.01 yields 0.97, not 0.9700000000000001
        let snap = |v: f64| (v * 1e12).round() / 1e12;
        Ok(GridSpec(
            (0..count).map(|k| snap(a + k as f64 * step)).collect(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GeneratorKind {
    StationaryGaussian,
    RegimeSwitch,
    VolatilityCluster,
}

pub struct SynthArgs {
    pub kind: GeneratorKind,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub ratio: f64,
    pub diagonal: bool,
    pub switch_points: Option<Vec<usize>>,
    pub persistence: f64,
    pub start: Option<NaiveDateTime>,
    pub output: PathBuf,
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let (n, p, seed) = (args.rows, args.cols, args.seed);
    if !(args.ratio > 0.0 && args.ratio <= 1.0) {
        bail!("spectrum ratio must lie in (0, 1], got {}", args.ratio);
    }
    let eigenvalues = geometric_spectrum(p, 1.0, args.ratio);
    let generator = match args.kind {
        GeneratorKind::StationaryGaussian => Generator::StationaryGaussian {
            n,
            p,
            seed,
            eigenvalues,
            axis_aligned: args.diagonal,
        },
        GeneratorKind::RegimeSwitch => Generator::RegimeSwitch {
            n,
            p,
            seed,
            switch_points: args
                .switch_points
                .clone()
                .unwrap_or_else(|| vec![n / 3, 2 * n / 3]),
            eigenvalues,
        },
        GeneratorKind::VolatilityCluster => Generator::VolatilityCluster {
            n,
            p,
            seed,
            persistence: args.persistence,
            eigenvalues,
        },
    };
    if args.diagonal && args.kind != GeneratorKind::StationaryGaussian {
        bail!("--diagonal only applies to stationary-gaussian");
    }
    let data = generator.generate()?;
    let timestamps = args.start.map(|start| {
        (0..n)
            .map(|i| {
                (start + TimeDelta::hours(i as i64))
                    .format("%Y-%m-%dT%H:%M:%S")
                    .to_string()
            })
            .collect()
    });
    let table = ObservationTable::new(component_labels("x", p), timestamps, data);
    table.write(&args.output)?;
    Sidecar {
        command: "synth",
        params: json!({
            "generator": generator,
            "start": args.start.map(|s| s.format("%Y-%m-%dT%H:%M:%S").to_string()),
        }),
        alpha: None,
        eigenvalues: json!(generator_eigenvalues(&generator)),
        iterations: Value::Null,
        diagnostics: Value::Null,
    }
    .write(&sidecar::path_for(&args.output))?;
    eprintln!("wrote {n} rows x {p} columns to {}", args.output.display());
    Ok(())
}

fn generator_eigenvalues(g: &Generator) -> &[f64] {
    match g {
        Generator::StationaryGaussian { eigenvalues, .. }
        | Generator::RegimeSwitch { eigenvalues, .. }
        | Generator::VolatilityCluster { eigenvalues, .. } => eigenvalues,
    }
}

struct Chunk {
    start: usize,
    end: usize,
    label: String,
}

fn split_chunks(table: &ObservationTable, spec: ChunkSpec) -> Result<Vec<Chunk>> {
    let n = table.data.rows();
    if let ChunkSpec::Rows(size) = spec {
        return Ok((0..n)
            .step_by(size)
            .map(|start| Chunk {
                start,
                end: (start + size).min(n),
                label: format!("rows {}-{}", start + 1, (start + size).min(n)),
            })
            .collect());
    }
    let stamps = table
        .timestamps
        .as_ref()
        .ok_or_else(|| anyhow!("calendar chunking needs a \"timestamp\" column"))?;
    let mut chunks: Vec<Chunk> = Vec::new();
    for (i, stamp) in stamps.iter().enumerate() {
        let date = parse_date(stamp)
            .ok_or_else(|| anyhow!("row {}: cannot parse timestamp {stamp:?}", i + 1))?;
        let label = match spec {
            ChunkSpec::Year => format!("{:04}", date.year()),
            _ => format!("{:04}-{:02}", date.year(), date.month()),
        };
        match chunks.last_mut() {
            Some(last) if last.label == label => last.end = i + 1,
            Some(last) if last.label > label => {
                bail!("row {}: timestamp {stamp:?} is out of time order", i + 1)
            }
            _ => chunks.push(Chunk {
                start: i,
                end: i + 1,
                label,
            }),
        }
    }
    Ok(chunks)
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.date_naive());
    }
    for fmt in [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(dt.date());
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn ipca(input: &Path, chunks: ChunkSpec, output: &Path, reseed: bool) -> Result<()> {
    let table = ObservationTable::read(input)?;
    let p = table.data.cols();
    let parts = split_chunks(&table, chunks)?;
    let mut model = Ipca::new();
    let mut stacked = Vec::with_capacity(parts.len());
    let mut records = Vec::with_capacity(parts.len());
    let mut min_continuity = f64::INFINITY;
    for (k, chunk) in parts.iter().enumerate() {
        let x = table.data.slice_rows(chunk.start, chunk.end);
        let name = format!("chunk {} ({})", k + 1, chunk.label);
        let (report, reseeded) = match model.fit(&x) {
            Ok(report) => (report, false),
            Err(e @ Error::RefitFailed { .. }) if reseed => {
                eprintln!("{name}: {e}; re-seeding");
                (model.fit_reseeded(&x).with_context(|| name.clone())?, true)
            }
            Err(e @ Error::RefitFailed { .. }) => {
                return Err(anyhow!(e).context(format!("{name} (pass --reseed to recover)")))
            }
            Err(e) => return Err(anyhow!(e).context(name)),
        };
        stacked.push(model.transform(&x)?);
        if let Some(c) = &report.sign_continuity {
            min_continuity = c.iter().copied().fold(min_continuity, f64::min);
        }
        records.push(json!({
            "chunk": k + 1,
            "label": chunk.label,
            "first_row": chunk.start + 1,
            "rows": chunk.end - chunk.start,
            "oracle": report.oracle,
            "reseeded": reseeded,
            "iterations": report.iterations,
            "eigenvalues": report.eigenvalues,
            "sign_continuity": report.sign_continuity,
        }));
    }
    let z = if stacked.is_empty() {
        Matrix::empty(p)
    } else {
        Matrix::vstack(&stacked)?
    };
    ObservationTable::new(component_labels("PC", p), table.timestamps.clone(), z).write(output)?;
    Sidecar {
        command: "ipca",
        params: json!({
            "input": input.display().to_string(),
            "chunks": chunk_spec_text(chunks),
            "reseed": reseed,
        }),
        alpha: None,
        eigenvalues: records.iter().map(|r| r["eigenvalues"].clone()).collect(),
        iterations: records.iter().map(|r| r["iterations"].clone()).collect(),
        diagnostics: json!({
            "chunks": records,
            "min_sign_continuity": min_continuity.is_finite().then_some(min_continuity),
        }),
    }
    .write(&sidecar::path_for(output))?;
    eprintln!(
        "{} chunks, {} rows written to {}",
        parts.len(),
        table.data.rows(),
        output.display()
    );
    Ok(())
}

fn chunk_spec_text(spec: ChunkSpec) -> String {
    match spec {
        ChunkSpec::Rows(n) => format!("chunk={n}"),
        ChunkSpec::Year => "by=year".into(),
        ChunkSpec::Month => "by=month".into(),
    }
}

pub struct EwmpcaArgs {
    pub input: PathBuf,
    pub alpha: AlphaArg,
    pub warmup: usize,
    pub tol: f64,
    pub max_iter: Option<usize>,
    pub burn_in: Option<usize>,
    pub output: PathBuf,
}

struct EwmRun {
    alpha: f64,
    estimate: Option<(AlphaEstimate, usize)>,
    model: Ewmpca,
    components: Matrix,
}

fn run_ewmpca(
    x: &Matrix,
    alpha: AlphaArg,
    burn_in: Option<usize>,
    configure: impl FnOnce(&mut EwmpcaConfig),
) -> Result<EwmRun> {
    let (alpha, estimate) = match alpha {
        AlphaArg::Value(a) => (a, None),
        AlphaArg::Ml => {
            let burn_in = burn_in.unwrap_or_else(|| default_burn_in(x.cols()));
            let est =
                estimate_alpha(x, &default_alpha_grid(), burn_in).context("estimating alpha")?;
            eprintln!("maximum-likelihood alpha {}", est.alpha);
            (est.alpha, Some((est, burn_in)))
        }
    };
    let mut config = EwmpcaConfig::new(alpha);
    configure(&mut config);
    let mut model = Ewmpca::new(config)?;
    let components = model.add_all(x)?;
    Ok(EwmRun {
        alpha,
        estimate,
        model,
        components,
    })
}

fn estimate_json(estimate: &Option<(AlphaEstimate, usize)>) -> Value {
    match estimate {
        None => Value::Null,
        Some((est, burn_in)) => json!({
            "argmax": est.alpha,
            "burn_in": burn_in,
            "grid": est.grid,
            "loglik": est.loglik,
        }),
    }
}

fn iterations_json(model: &Ewmpca) -> Value {
    let s = model.iteration_summary();
    json!({
        "steps": s.steps,
        "total": s.total,
        "mean": s.mean(),
        "min": s.min,
        "max": s.max,
        "truncated": s.truncated,
    })
}

pub fn ewmpca(args: &EwmpcaArgs) -> Result<()> {
    let table = ObservationTable::read(&args.input)?;
    let p = table.data.cols();
    let run = run_ewmpca(&table.data, args.alpha, args.burn_in, |c| {
        c.warmup_rows = args.warmup;
        c.tol = args.tol;
        c.max_iter_count = args.max_iter;
    })?;
    ObservationTable::new(
        component_labels("PC", p),
        table.timestamps.clone(),
        run.components,
    )
    .write(&args.output)?;
    Sidecar {
        command: "ewmpca",
        params: json!({
            "input": args.input.display().to_string(),
            "alpha": match args.alpha {
                AlphaArg::Ml => json!("ml"),
                AlphaArg::Value(a) => json!(a),
            },
            "warmup": args.warmup,
            "tol": args.tol,
            "max_iter": args.max_iter,
            "burn_in": args.burn_in,
        }),
        alpha: Some(run.alpha),
        eigenvalues: json!(run.model.eigenvalues()),
        iterations: iterations_json(&run.model),
        diagnostics: json!({
            "alpha_estimate": estimate_json(&run.estimate),
            "orthonormality_defect": run.model.basis().map(Matrix::orthonormality_defect),
        }),
    }
    .write(&sidecar::path_for(&args.output))?;
    eprintln!(
        "alpha {}, {} rows written to {}",
        run.alpha,
        table.data.rows(),
        args.output.display()
    );
    Ok(())
}

pub fn estimate(
    input: &Path,
    grid: Option<GridSpec>,
    burn_in: Option<usize>,
    output: &Path,
) -> Result<()> {
    let table = ObservationTable::read(input)?;
    let burn_in = burn_in.unwrap_or_else(|| default_burn_in(table.data.cols()));
    let grid = grid.map_or_else(default_alpha_grid, |g| g.0);
    let est = estimate_alpha(&table.data, &grid, burn_in)?;
    let curve = Matrix::from_fn(grid.len(), 2, |i, j| {
        if j == 0 {
            est.grid[i]
        } else {
            est.loglik[i]
        }
    });
    ObservationTable::new(vec!["alpha".into(), "loglik".into()], None, curve).write(output)?;
    Sidecar {
        command: "estimate-alpha",
        params: json!({
            "input": input.display().to_string(),
            "burn_in": burn_in,
            "grid_points": grid.len(),
        }),
        alpha: Some(est.alpha),
        eigenvalues: Value::Null,
        iterations: Value::Null,
        diagnostics: estimate_json(&Some((est.clone(), burn_in))),
    }
    .write(&sidecar::path_for(output))?;
    println!("{}", est.alpha);
    Ok(())
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn compare(input: &Path, alpha: AlphaArg, stem: &Path) -> Result<()> {
    let table = ObservationTable::read(input)?;
    let x = &table.data;
    let p = x.cols();
    let mut classical = Ipca::new();
    let (_, pca) = classical.fit_transform(x).context("whole-sample PCA")?;
    let run = run_ewmpca(x, alpha, None, |_| {})?;
    // the first EWMPCA row is zero by construction; drop it from both series
    let n = x.rows();
    if n < 3 {
        bail!("compare needs at least 3 rows, got {n}");
    }
    let pca = pca.slice_rows(1, n);
    let ewm = run.components.slice_rows(1, n);
    let cov = cross_covariance(&pca, &ewm)?;
    let corr = cross_correlation(&pca, &ewm)?;

    let rows = component_labels("PC", p);
    let cols = component_labels("EWMPC", p);
    write_labelled(
        &with_suffix(stem, ".crosscov.csv"),
        "component",
        &rows,
        &cols,
        &cov,
    )?;
    write_labelled(
        &with_suffix(stem, ".crosscorr.csv"),
        "component",
        &rows,
        &cols,
        &corr,
    )?;

    let mut max_off = 0f64;
    for i in 0..p {
        for j in 0..p {
            if i != j {
                max_off = max_off.max(corr[(i, j)].abs());
            }
        }
    }
    Sidecar {
        command: "compare",
        params: json!({
            "input": input.display().to_string(),
            "alpha": match alpha {
                AlphaArg::Ml => json!("ml"),
                AlphaArg::Value(a) => json!(a),
            },
        }),
        alpha: Some(run.alpha),
        eigenvalues: json!({
            "pca": classical.model().map(|m| m.explained_variance()),
            "ewmpca": run.model.eigenvalues(),
        }),
        iterations: iterations_json(&run.model),
        diagnostics: json!({
            "alpha_estimate": estimate_json(&run.estimate),
            "rows_compared": n - 1,
            "crosscorr_diagonal": corr.diagonal(),
            "max_offdiagonal_crosscorr": max_off,
        }),
    }
    .write(&with_suffix(stem, ".json"))?;
    eprintln!("max off-diagonal cross-correlation {max_off:.4}");
    Ok(())
}
