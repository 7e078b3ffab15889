// SPDX-License-Identifier: MIT OR Apache-2.0

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use autoknot::basis::{self, BasisFamily};
use autoknot::sim::{self, SimSearch};
use autoknot::timeseries::{self, IngestOptions};
use autoknot::{
    Align, Band, BasisSpec, CandidateGrid, Domain, KnotConfig, Penalty, Scale, SearchConfig,
    SeriesFit, SeriesOptions, SimScenario,
};
use serde::{Deserialize, Serialize};

use crate::args::{
    AlignArg, BandArg, BasisArg, DemoArgs, FitArgs, Format, PredictArgs, ScaleArg, SearchArgs,
    SimulateArgs,
};
use crate::error::{CliError, CliResult};
use crate::plot::Plot;

/// Every JSON document carries the configuration that produced it.
#[derive(Serialize)]
struct Envelope<'a, C, R> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    config: C,
    result: R,
}

fn to_json<C: Serialize, R: Serialize>(command: &str, config: C, result: R) -> CliResult<String> {
    let env = Envelope {
        tool: "autoknot",
        version: env!("CARGO_PKG_VERSION"),
        command,
        config,
        result,
    };
    let mut s = serde_json::to_string_pretty(&env).map_err(|e| CliError::Data(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn unsupported(command: &str, format: Format) -> CliError {
    CliError::Config(format!("{command} does not support --format {format:?}").to_lowercase())
}

// ---------------------------------------------------------------- fit (x, y)

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct XyResult {
    pub basis: BasisSpec,
    pub domain: Domain,
    pub k: usize,
    pub knots: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub pss: f64,
    pub lambda: f64,
    pub dof: usize,
    pub sigma2_hat: f64,
    pub rank: usize,
    #[serde(default, skip_deserializing)]
    pub trace: Vec<autoknot::search::KStep>,
}

#[derive(Serialize)]
struct XyConfig<'a> {
    input: String,
    x_column: &'a str,
    y_column: &'a str,
    search: &'a SearchConfig,
}

fn basis_spec(basis: BasisArg, degree: Option<usize>, default_degree: usize) -> CliResult<BasisSpec> {
    let spec = match basis {
        BasisArg::Tp => BasisSpec::truncated_power(degree.unwrap_or(default_degree)),
        BasisArg::Bspline => BasisSpec::bspline(degree.unwrap_or(default_degree)),
        BasisArg::Natural => {
            if let Some(d) = degree.filter(|&d| d != 3) {
                return Err(CliError::Config(format!(
                    "natural splines are cubic; --degree {d} is not allowed"
                )));
            }
            BasisSpec::natural_cubic()
        }
    };
    spec.validate()?;
    Ok(spec)
}

fn penalty(args: &SearchArgs) -> Penalty {
    match (&args.lambda, &args.cv_grid) {
        (Some(lambda), _) => Penalty::Fixed { lambda: *lambda },
        (None, Some(grid)) => Penalty::CrossValidation {
            grid: grid.clone(),
            folds: args.cv_folds,
            seed: args.cv_seed,
        },
        (None, None) => Penalty::VarianceScaledLog,
    }
}

fn search_config(args: &SearchArgs) -> CliResult<SearchConfig> {
    let basis = basis_spec(args.basis.unwrap_or(BasisArg::Bspline), args.degree, 3)?;
    let cfg = SearchConfig {
        delta: args.delta.unwrap_or(sim::DEFAULT_DELTA),
        k_max: args.k_max,
        grid: match args.grid_resolution {
            Some(resolution) => CandidateGrid::Uniform { resolution },
            None => CandidateGrid::Observed,
        },
        penalty: penalty(args),
        basis,
        exclude_left_frac: args.exclude_left_frac.unwrap_or(0.0),
        patience: args.patience,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Reads numeric columns from a CSV with a header row.
fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let text = read_to_string(path)?;
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
        .clone();
    let idx: Vec<usize> = names
        .iter()
        .map(|n| {
            headers.iter().position(|h| h.trim() == *n).ok_or_else(|| {
                CliError::Data(format!("{}: missing column {n:?}", path.display()))
            })
        })
        .collect::<CliResult<_>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    let mut errors = Vec::new();
    for rec in rdr.records() {
        let rec = match rec {
            Ok(r) => r,
            Err(e) => {
                errors.push(e.to_string());
                continue;
            }
        };
        let line = rec.position().map_or(0, |p| p.line());
        for (c, &i) in idx.iter().enumerate() {
            let raw = rec.get(i).unwrap_or("").trim();
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => cols[c].push(v),
                _ => errors.push(format!("line {line}: {:?} is not a finite number", raw)),
            }
        }
    }
    if !errors.is_empty() {
        return Err(CliError::Data(format!(
            "{}: {} bad row(s):\n  {}",
            path.display(),
            errors.len(),
            errors.join("\n  ")
        )));
    }
    Ok(cols)
}

pub fn fit(args: &FitArgs) -> CliResult<String> {
    if args.is_series() {
        return fit_series(args);
    }
    let cfg = search_config(&args.search)?;
    let cols = read_columns(&args.input, &[&args.x_column, &args.y_column])?;
    let (xs, y) = (&cols[0], &cols[1]);
    let sel = autoknot::search::select_detailed(xs, y, &cfg)?;
    let m = &sel.model;
    let result = XyResult {
        basis: m.basis,
        domain: m.knots.domain(),
        k: m.k(),
        knots: m.knots.knots().to_vec(),
        coefficients: m.coefficients.clone(),
        rss: m.rss,
        pss: m.pss,
        lambda: m.lambda_used,
        dof: sel.fit.dof,
        sigma2_hat: sel.fit.sigma2_hat,
        rank: sel.fit.rank,
        trace: sel.trace.clone(),
    };
    match args.format {
        Format::Json => to_json(
            "fit",
            XyConfig {
                input: args.input.display().to_string(),
                x_column: &args.x_column,
                y_column: &args.y_column,
                search: &cfg,
            },
            &result,
        ),
        Format::Csv => {
            let mut s = String::from("x,y,fitted\n");
            for i in 0..sel.xs.len() {
                let _ = writeln!(s, "{},{},{}", sel.xs[i], sel.y[i], sel.fit.fitted[i]);
            }
            Ok(s)
        }
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "basis     {:?} degree {}", m.basis.family, m.basis.degree);
            let _ = writeln!(s, "knots     {:?}", result.knots);
            let _ = writeln!(s, "lambda    {:.6}", result.lambda);
            let _ = writeln!(s, "rss       {:.6}", result.rss);
            let _ = writeln!(s, "pss       {:.6}", result.pss);
            let _ = writeln!(s, "\n{:>3} {:>14} {:>14}  knots", "K", "RSS", "PSS");
            for step in &sel.trace {
                let _ = writeln!(s, "{:>3} {:>14.6} {:>14.6}  {:?}", step.k, step.rss, step.pss, step.knots);
            }
            Ok(s)
        }
        Format::Svg => {
            let grid = dense(sel.xs[0], sel.xs[sel.xs.len() - 1], 400);
            let curve = m.predict_many(&grid);
            let mut all = sel.y.clone();
            all.extend(&curve);
            let mut p = Plot::new("Spline fit", &sel.xs, &all);
            p.points("data", &sel.xs, &sel.y, "#777777");
            p.line("fit", &grid, &curve, "#1f5fbf", None);
            p.vlines("knots", m.knots.knots(), "#c0392b");
            Ok(p.finish(&args.x_column))
        }
    }
}

fn dense(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

// ------------------------------------------------------------- fit (series)

#[derive(Serialize)]
struct SeriesConfig<'a> {
    input: String,
    ingest: &'a IngestOptions,
    options: &'a SeriesOptions,
    countries: &'a [String],
}

#[derive(Serialize)]
struct SeriesResult<'a> {
    series: &'a [SeriesFit],
    warnings: &'a [String],
}

fn series_options(args: &FitArgs) -> CliResult<SeriesOptions> {
    let scale = match args.scale.unwrap_or(ScaleArg::Log) {
        ScaleArg::Linear => Scale::Linear,
        ScaleArg::Log => Scale::Log,
    };
    let mut opts = SeriesOptions::for_scale(scale);
    if let Some(b) = args.search.basis {
        let paired = scale.default_basis();
        let default_degree = match (b, paired.family) {
            (BasisArg::Tp, BasisFamily::TruncatedPower) => paired.degree,
            _ => 3,
        };
        opts.basis = Some(basis_spec(b, args.search.degree, default_degree)?);
    } else if let Some(d) = args.search.degree {
        let mut spec = scale.default_basis();
        if spec.family == BasisFamily::NaturalCubic && d != 3 {
            return Err(CliError::Config(format!(
                "natural splines are cubic; --degree {d} is not allowed"
            )));
        }
        spec.degree = d;
        opts.basis = Some(spec);
    }
    if let Some(w) = args.ma_window {
        opts.window = w;
    }
    if let Some(d) = args.search.delta {
        opts.delta = d;
    }
    if let Some(f) = args.search.exclude_left_frac {
        opts.exclude_left_frac = f;
    }
    if args.search.grid_resolution.is_some() {
        return Err(CliError::Config(
            "--grid-resolution does not apply to series; knots lie on whole days".into(),
        ));
    }
    opts.k_max = args.search.k_max;
    opts.patience = args.search.patience;
    opts.penalty = penalty(&args.search);
    if let Some(h) = args.horizon {
        opts.horizon = h;
    }
    if let Some(l) = args.level {
        opts.level = l;
    }
    if let Some(b) = args.band {
        opts.band = match b {
            BandArg::Confidence => Band::Confidence,
            BandArg::Prediction => Band::Prediction,
        };
    }
    if let Some(a) = args.align {
        opts.align = match a {
            AlignArg::End => Align::End,
            AlignArg::Center => Align::Center,
        };
    }
    opts.fit_warmup = args.fit_warmup;
    opts.basis = Some(opts.basis());
    opts.validate()?;
    Ok(opts)
}

fn fit_series(args: &FitArgs) -> CliResult<String> {
    let opts = series_options(args)?;
    let defaults = IngestOptions::default();
    let ingest = IngestOptions {
        date_column: args.date_column.clone().unwrap_or(defaults.date_column),
        count_column: args.count_column.clone().unwrap_or(defaults.count_column),
        label_column: args.label_column.clone().unwrap_or(defaults.label_column),
        date_format: args.date_format.clone().unwrap_or(defaults.date_format),
    };
    let text = read_to_string(&args.input)?;
    let ingested = timeseries::ingest_csv(text.as_bytes(), &ingest)?;
    if !ingested.row_errors.is_empty() {
        let lines: Vec<String> = ingested
            .row_errors
            .iter()
            .map(|e| format!("line {}: {}", e.line, e.message))
            .collect();
        return Err(CliError::Data(format!(
            "{}: {} bad row(s):\n  {}",
            args.input.display(),
            lines.len(),
            lines.join("\n  ")
        )));
    }
    for w in &ingested.warnings {
        eprintln!("warning: {w}");
    }
    let series: Vec<_> = if args.country.is_empty() {
        ingested.series
    } else {
        let mut chosen = Vec::new();
        for c in &args.country {
            match ingested.series.iter().find(|s| &s.label == c) {
                Some(s) => chosen.push(s.clone()),
                None => return Err(CliError::Data(format!("no series labelled {c:?} in the input"))),
            }
        }
        chosen
    };
    if series.is_empty() {
        return Err(CliError::Data("the input holds no series".into()));
    }
    let fits = timeseries::fit_all(&series, &opts)
        .into_iter()
        .zip(&series)
        .map(|(r, s)| r.map_err(|e| CliError::Data(format!("series {:?}: {e}", s.label))))
        .collect::<CliResult<Vec<_>>>()?;
    for f in &fits {
        for w in &f.warnings {
            eprintln!("warning: {}: {w}", f.label);
        }
    }

    match args.format {
        Format::Json => to_json(
            "fit",
            SeriesConfig {
                input: args.input.display().to_string(),
                ingest: &ingest,
                options: &opts,
                countries: &args.country,
            },
            SeriesResult {
                series: &fits,
                warnings: &ingested.warnings,
            },
        ),
        Format::Csv => {
            let mut s = String::from("label,date,kind,count,smoothed,fitted,lower,upper\n");
            for (f, ser) in fits.iter().zip(&series) {
                for i in 0..ser.len() {
                    let _ = writeln!(
                        s,
                        "{},{},observed,{},{},{},,",
                        csv_field(&f.label),
                        ser.dates[i],
                        ser.counts[i],
                        f.smoothed[i],
                        f.fitted[i]
                    );
                }
                for r in f.forecast.iter().filter(|r| r.extrapolated) {
                    let _ = writeln!(
                        s,
                        "{},{},forecast,,,{},{},{}",
                        csv_field(&f.label),
                        r.date,
                        r.point,
                        r.lower,
                        r.upper
                    );
                }
            }
            Ok(s)
        }
        Format::Table => {
            let mut s = String::new();
            for f in &fits {
                let knots: Vec<String> = f.knots.iter().map(|d| d.to_string()).collect();
                let _ = writeln!(s, "{}  ({:?} scale, {:?})", f.label, f.scale, f.basis.family);
                let _ = writeln!(s, "  knots   [{}]", knots.join(", "));
                let _ = writeln!(s, "  lambda  {:.6}  rss {:.6}  pss {:.6}", f.lambda, f.rss, f.pss);
                let _ = writeln!(s, "  {:<10} {:>12} {:>12} {:>12}", "date", "point", "lower", "upper");
                for r in &f.forecast {
                    let _ = writeln!(
                        s,
                        "  {:<10} {:>12.2} {:>12.2} {:>12.2}",
                        r.date.to_string(),
                        r.point,
                        r.lower,
                        r.upper
                    );
                }
                s.push('\n');
            }
            Ok(s)
        }
        Format::Svg => {
            if fits.len() != 1 {
                return Err(CliError::Config(
                    "--format svg needs exactly one series; select it with --country".into(),
                ));
            }
            Ok(series_svg(&fits[0], &series[0]))
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn series_svg(f: &SeriesFit, s: &autoknot::DailySeries) -> String {
    let days: Vec<f64> = (0..s.len()).map(|d| d as f64).collect();
    let fx: Vec<f64> = f.forecast.iter().map(|r| f.positions[f.positions.len() - 1] + r.step as f64).collect();
    let fp: Vec<f64> = f.forecast.iter().map(|r| r.point).collect();
    let lo: Vec<f64> = f.forecast.iter().map(|r| r.lower).collect();
    let hi: Vec<f64> = f.forecast.iter().map(|r| r.upper).collect();
    let mut all_x = days.clone();
    all_x.extend(&fx);
    let mut all_y = f.smoothed.clone();
    all_y.extend(&f.fitted);
    all_y.extend(&hi);
    all_y.push(0.0);
    let mut p = Plot::new(&format!("{} ({:?} scale)", f.label, f.scale), &all_x, &all_y);
    p.bars("mean daily new cases", &days, &f.smoothed, "#c8c8c8");
    p.band("forecast band", &fx, &lo, &hi, "#1f5fbf");
    p.line("fit", &f.positions, &f.fitted, "#1f5fbf", None);
    p.line("forecast", &fx, &fp, "#000000", Some("2 3"));
    p.vlines("knots", &f.knot_days, "#c0392b");
    p.finish(&format!("days since {}", s.start()))
}

// ------------------------------------------------------------------ predict

#[derive(Deserialize)]
struct ModelFile {
    result: XyResult,
}

#[derive(Serialize)]
struct Prediction {
    x: f64,
    y: f64,
    extrapolated: bool,
}

#[derive(Serialize)]
struct PredictConfig {
    model: String,
    x: Vec<f64>,
}

pub fn predict(args: &PredictArgs) -> CliResult<String> {
    if args.format == Format::Svg {
        return Err(unsupported("predict", args.format));
    }
    let text = read_to_string(&args.model)?;
    let model: ModelFile = serde_json::from_str(&text).map_err(|e| {
        CliError::Data(format!("{}: not an (x, y) fit: {e}", args.model.display()))
    })?;
    let m = model.result;
    let xs = match &args.input {
        Some(path) => read_columns(path, &[&args.x_column])?.remove(0),
        None => args.x.clone(),
    };
    let kc = KnotConfig::new(m.knots.clone(), m.domain)?;
    let design = basis::design_matrix_extrapolated(&xs, m.basis, &kc)?;
    if design.cols() != m.coefficients.len() {
        return Err(CliError::Data(format!(
            "{}: {} coefficients for a basis of dimension {}",
            args.model.display(),
            m.coefficients.len(),
            design.cols()
        )));
    }
    let ys = design.mul_vec(&m.coefficients);
    let rows: Vec<Prediction> = xs
        .iter()
        .zip(ys)
        .map(|(&x, y)| Prediction {
            x,
            y,
            extrapolated: !m.domain.contains(x),
        })
        .collect();
    match args.format {
        Format::Json => to_json(
            "predict",
            PredictConfig {
                model: args.model.display().to_string(),
                x: xs,
            },
            &rows,
        ),
        Format::Csv | Format::Table => {
            let mut s = String::from("x,y,extrapolated\n");
            for r in &rows {
                let _ = writeln!(s, "{},{},{}", r.x, r.y, r.extrapolated);
            }
            Ok(s)
        }
        Format::Svg => unreachable!(),
    }
}

// ----------------------------------------------------------------- simulate

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimFile {
    seed: Option<u64>,
    replications: Option<usize>,
    #[serde(default)]
    bundled: Vec<String>,
    #[serde(default)]
    scenario: Vec<ScenarioEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioEntry {
    name: String,
    truth_knots: Vec<f64>,
    truth_coefficients: Option<Vec<f64>>,
    snr: f64,
    n: usize,
    replications: Option<usize>,
    delta: Option<f64>,
    seed: Option<u64>,
    basis: Option<BasisSpec>,
    search: Option<SimSearch>,
}

pub const DEFAULT_REPLICATIONS: usize = 1000;

fn parse_sim_file(text: &str) -> CliResult<SimFile> {
    let de = toml::Deserializer::new(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        CliError::Config(format!("scenario file: at `{path}`: {}", e.into_inner().message().trim()))
    })
}

#[derive(Serialize)]
struct SimConfig<'a> {
    seed: u64,
    scenarios: &'a [SimScenario],
}

pub fn simulate(args: &SimulateArgs) -> CliResult<String> {
    if args.list {
        return Ok(sim::bundled_names().join("\n") + "\n");
    }
    if matches!(args.format, Format::Svg | Format::Csv) {
        return Err(unsupported("simulate", args.format));
    }
    let file = match &args.config {
        Some(path) => Some(parse_sim_file(&read_to_string(path).map_err(|e| {
            CliError::Config(e.to_string())
        })?)?),
        None => None,
    };
    let listed = file.as_ref().map_or(0, |f| f.bundled.len() + f.scenario.len());
    if listed + args.scenario.len() == 0 {
        return Err(CliError::Config(
            "no scenarios: pass --scenario NAME or --config FILE".into(),
        ));
    }
    let seed = args
        .seed
        .or(file.as_ref().and_then(|f| f.seed))
        .unwrap_or_else(|| {
            let s = rand::random::<u64>();
            eprintln!("seed not given; using {s}");
            s
        });
    let default_reps = file
        .as_ref()
        .and_then(|f| f.replications)
        .unwrap_or(DEFAULT_REPLICATIONS);
    let reps = |own: Option<usize>| args.replications.or(own).unwrap_or(default_reps);

    let mut scenarios = Vec::new();
    let bundled = file.iter().flat_map(|f| f.bundled.iter()).chain(&args.scenario);
    for name in bundled {
        let s = sim::bundled(name, reps(None), seed).ok_or_else(|| {
            CliError::Config(format!(
                "unknown scenario {name:?}; `simulate --list` shows the bundled names"
            ))
        })?;
        scenarios.push(s);
    }
    for (i, e) in file.iter().flat_map(|f| f.scenario.iter()).enumerate() {
        let at = |msg: String| CliError::Config(format!("scenario file: at `scenario[{i}]` ({}): {msg}", e.name));
        let mut s = SimScenario::new(
            e.name.clone(),
            e.truth_knots.clone(),
            e.snr,
            e.n,
            reps(e.replications),
            args.seed.or(e.seed).unwrap_or(seed),
        )
        .map_err(|err| at(err.to_string()))?;
        if let Some(b) = e.basis {
            s.basis = b;
        }
        if let Some(c) = &e.truth_coefficients {
            s.truth_coefficients = c.clone();
        }
        if let Some(d) = e.delta {
            s.delta = d;
        }
        if let Some(search) = &e.search {
            s.search = search.clone();
        }
        s.validate().map_err(|err| at(err.to_string()))?;
        scenarios.push(s);
    }

    let mut reports = Vec::with_capacity(scenarios.len());
    for s in &scenarios {
        eprintln!("running {} ({} replications)", s.name, s.replications);
        let r = sim::run(s)?;
        if r.failures > 0 {
            eprintln!("warning: {}: {} replication(s) failed", s.name, r.failures);
        }
        reports.push(if args.timing { r } else { r.without_timing() });
    }
    match args.format {
        Format::Json => to_json(
            "simulate",
            SimConfig {
                seed,
                scenarios: &scenarios,
            },
            &reports,
        ),
        Format::Table => {
            let mut s = String::new();
            for r in &reports {
                let _ = writeln!(s, "{} (seed {seed}, {} replications)", r.scenario, r.replications);
                s.push_str(&sim::format_table(std::slice::from_ref(r)));
                s.push('\n');
            }
            Ok(s)
        }
        Format::Csv | Format::Svg => unreachable!(),
    }
}

// --------------------------------------------------------------------- demo

#[derive(Serialize)]
struct DemoConfig {
    seed: u64,
    n: usize,
    snr: f64,
    truth_knots: [f64; 3],
    bad_knots: Vec<f64>,
    search: SearchConfig,
}

pub fn demo(args: &DemoArgs) -> CliResult<String> {
    let d = sim::demo(args.seed, args.n, args.snr)?;
    let search = SimScenario::new("demo", sim::DEMO_KNOTS.to_vec(), args.snr, args.n, 1, args.seed)?
        .search_config();
    match args.format {
        Format::Json => to_json(
            "demo",
            DemoConfig {
                seed: args.seed,
                n: args.n,
                snr: args.snr,
                truth_knots: sim::DEMO_KNOTS,
                bad_knots: sim::demo_bad_knots(),
                search,
            },
            &d,
        ),
        Format::Table => {
            let mut s = String::new();
            let _ = writeln!(s, "{:<10} {:>12} {:>12}  knots", "fit", "RSS", "PSS");
            for (name, f) in [("truth", &d.truth), ("crowded", &d.bad), ("automatic", &d.automatic)] {
                let _ = writeln!(s, "{name:<10} {:>12.4} {:>12.4}  {:?}", f.rss, f.pss, f.knots);
            }
            Ok(s)
        }
        Format::Csv => {
            let mut s = String::from("x,y,truth,crowded,automatic\n");
            for i in 0..d.xs.len() {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{}",
                    d.xs[i], d.y[i], d.truth.fitted[i], d.bad.fitted[i], d.automatic.fitted[i]
                );
            }
            Ok(s)
        }
        Format::Svg => {
            let mut all = d.y.clone();
            all.extend(&d.bad.fitted);
            let mut p = Plot::new("Crowded knots versus automatic selection", &d.xs, &all);
            p.points("data", &d.xs, &d.y, "#777777");
            p.line("truth", &d.xs, &d.truth.fitted, "#000000", None);
            p.line("11 crowded knots", &d.xs, &d.bad.fitted, "#d35400", Some("6 4"));
            p.line("automatic", &d.xs, &d.automatic.fitted, "#1f5fbf", None);
            p.vlines("selected knots", &d.automatic.knots, "#1f5fbf");
            Ok(p.finish("x"))
        }
    }
}
