// SPDX-License-Identifier: MIT OR Apache-2.0

//! Daily count series: ingestion, smoothing, knot selection and short-term
//! extrapolation.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::{Days, NaiveDate};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisSpec};
use crate::criterion::{self, Penalty};
use crate::error::{Error, Result};
use crate::lsq::{self, Band};
use crate::search::{self, CandidateGrid, SearchConfig, SplineModel};

pub const MIN_LENGTH: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DailySeries {
    pub label: String,
    pub dates: Vec<NaiveDate>,
    pub counts: Vec<f64>,
    /// True where the day was absent from the input and filled with zero.
    pub filled: Vec<bool>,
}

impl DailySeries {
    /// Series of consecutive days starting at `start`.
    pub fn new(label: impl Into<String>, start: NaiveDate, counts: Vec<f64>) -> Result<Self> {
        let dates = (0..counts.len() as u64)
            .map(|d| start + Days::new(d))
            .collect();
        let filled = vec![false; counts.len()];
        Self::from_parts(label.into(), dates, counts, filled)
    }

    pub fn from_parts(
        label: String,
        dates: Vec<NaiveDate>,
        counts: Vec<f64>,
        filled: Vec<bool>,
    ) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InsufficientData(format!(
                "series {label:?} is empty"
            )));
        }
        for (what, len) in [("dates", dates.len()), ("fill flags", filled.len())] {
            if len != counts.len() {
                return Err(Error::DimensionMismatch {
                    what,
                    expected: counts.len(),
                    found: len,
                });
            }
        }
        if let Some(i) = counts.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::DegenerateData(format!(
                "series {label:?}: count {} on day {i} is not a nonnegative number",
                counts[i]
            )));
        }
        if let Some(i) = dates.windows(2).position(|w| w[0].succ_opt() != Some(w[1])) {
            return Err(Error::DegenerateData(format!(
                "series {label:?}: dates are not consecutive after {}",
                dates[i]
            )));
        }
        Ok(Self {
            label,
            dates,
            counts,
            filled,
        })
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn start(&self) -> NaiveDate {
        self.dates[0]
    }

    /// Calendar date of a (possibly fractional or out-of-range) day index,
    /// rounded to the nearest day.
    pub fn date_of(&self, day: f64) -> NaiveDate {
        let d = day.round() as i64;
        if d >= 0 {
            self.start() + Days::new(d as u64)
        } else {
            self.start() - Days::new(d.unsigned_abs())
        }
    }

    pub fn day_of(&self, date: NaiveDate) -> i64 {
        (date - self.start()).num_days()
    }
}

/// Trailing mean over the last `window` values; the first `window - 1`
/// entries average everything seen so far.
pub fn moving_average(counts: &[f64], window: usize) -> Result<Vec<f64>> {
    if counts.is_empty() {
        return Err(Error::InsufficientData(
            "cannot smooth an empty series".into(),
        ));
    }
    if window == 0 || window > counts.len() {
        return Err(Error::InvalidArgument(format!(
            "window must be between 1 and the series length {}, got {window}",
            counts.len()
        )));
    }
    let out = (0..counts.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            counts[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect();
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    /// `log(count + 1)`.
    Log,
}

impl Scale {
    /// Basis paired with the scale unless overridden.
    pub fn default_basis(self) -> BasisSpec {
        match self {
            Scale::Linear => BasisSpec::natural_cubic(),
            Scale::Log => BasisSpec::truncated_power(1),
        }
    }

    pub fn forward(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.ln_1p(),
        }
    }

    pub fn inverse(self, v: f64) -> f64 {
        match self {
            Scale::Linear => v,
            Scale::Log => v.exp_m1(),
        }
    }
}

/// Where on the time axis a trailing average is placed for fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Align {
    /// At the last day of its window.
    End,
    /// At the midpoint of the days it averages. Removes the
    /// `(window - 1) / 2` day lag of knot estimates without using future
    /// observations.
    Center,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeriesOptions {
    pub scale: Scale,
    /// Defaults to [`Scale::default_basis`].
    #[serde(default)]
    pub basis: Option<BasisSpec>,
    pub window: usize,
    pub align: Align,
    /// Whether the first `window - 1` averages, taken over shorter windows,
    /// enter the fit.
    pub fit_warmup: bool,
    pub delta: f64,
    pub exclude_left_frac: f64,
    pub k_max: usize,
    pub patience: usize,
    pub penalty: Penalty,
    pub horizon: usize,
    pub level: f64,
    pub band: Band,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        Self::for_scale(Scale::Log)
    }
}

impl SeriesOptions {
    pub fn for_scale(scale: Scale) -> Self {
        Self {
            scale,
            basis: None,
            window: 7,
            align: Align::Center,
            fit_warmup: false,
            delta: 7.0,
            exclude_left_frac: 0.10,
            k_max: SearchConfig::DEFAULT_K_MAX,
            patience: SearchConfig::DEFAULT_PATIENCE,
            penalty: Penalty::default(),
            horizon: 7,
            level: 0.95,
            band: Band::Prediction,
        }
    }

    pub fn basis(&self) -> BasisSpec {
        self.basis.unwrap_or_else(|| self.scale.default_basis())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            delta: self.delta,
            k_max: self.k_max,
            grid: CandidateGrid::Observed,
            penalty: self.penalty.clone(),
            basis: self.basis(),
            exclude_left_frac: self.exclude_left_frac,
            patience: self.patience,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::InvalidArgument("window must be at least 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidArgument("horizon must be at least 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "interval level must lie in (0, 1), got {}",
                self.level
            )));
        }
        self.search_config().validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ForecastRow {
    pub date: NaiveDate,
    /// Days past the last observation; step 0 is the last observed day.
    pub step: usize,
    pub point: f64,
    pub lower: f64,
    pub upper: f64,
    pub extrapolated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesFit {
    pub label: String,
    pub scale: Scale,
    pub basis: BasisSpec,
    pub knots: Vec<NaiveDate>,
    /// Knot positions in days since the first observation.
    pub knot_days: Vec<f64>,
    pub coefficients: Vec<f64>,
    /// Smoothed counts, one per observed day.
    pub smoothed: Vec<f64>,
    /// Abscissa of each smoothed value on the day axis.
    pub positions: Vec<f64>,
    /// Index of the first smoothed value used in the fit.
    pub fit_start: usize,
    /// Fitted curve at `positions`, back-transformed to counts. Entries
    /// before `fit_start` are extrapolated.
    pub fitted: Vec<f64>,
    pub forecast: Vec<ForecastRow>,
    pub lambda: f64,
    pub rss: f64,
    pub pss: f64,
    pub warnings: Vec<String>,
    #[serde(skip)]
    pub model: SplineModel,
    #[serde(skip)]
    pub last_date: NaiveDate,
    #[serde(skip)]
    fit: lsq::LsqFit,
}

impl SeriesFit {
    pub fn lsq_fit(&self) -> &lsq::LsqFit {
        &self.fit
    }
}

/// Position of each trailing average on the day axis.
pub fn positions(len: usize, window: usize, align: Align) -> Vec<f64> {
    (0..len)
        .map(|i| match align {
            Align::End => i as f64,
            Align::Center => ((i + 1).saturating_sub(window) + i) as f64 / 2.0,
        })
        .collect()
}

/// Default penalty weight for a smoothed series. Averaging leaves the
/// low-frequency noise power unchanged while hiding it from first
/// differences, so the noise level is taken from the unsmoothed
/// (transformed) counts.
pub fn series_lambda(counts: &[f64], scale: Scale) -> Result<f64> {
    let raw: Vec<f64> = counts.iter().map(|&c| scale.forward(c)).collect();
    let days: Vec<f64> = (0..raw.len()).map(|d| d as f64).collect();
    criterion::default_lambda(&raw, &days)
}

pub fn fit_series(series: &DailySeries, opts: &SeriesOptions) -> Result<SeriesFit> {
    opts.validate()?;
    if series.len() < MIN_LENGTH {
        return Err(Error::InsufficientData(format!(
            "series {:?} has {} days; at least {MIN_LENGTH} are needed",
            series.label,
            series.len()
        )));
    }
    let smoothed = moving_average(&series.counts, opts.window)?;
    let y: Vec<f64> = smoothed.iter().map(|&s| opts.scale.forward(s)).collect();
    let xs = positions(series.len(), opts.window, opts.align);
    let fit_start = if opts.fit_warmup { 0 } else { opts.window - 1 };
    let (fx, fy) = (&xs[fit_start..], &y[fit_start..]);

    let mut cfg = opts.search_config();
    let (lo, hi) = (fx[0], fx[fx.len() - 1]);
    cfg.grid = CandidateGrid::Points {
        points: (lo.ceil() as i64..=hi.floor() as i64)
            .map(|d| d as f64)
            .collect(),
    };
    if cfg.penalty == Penalty::VarianceScaledLog {
        cfg.penalty = Penalty::Fixed {
            lambda: series_lambda(&series.counts, opts.scale)?,
        };
    }
    let selection = search::select_detailed(fx, fy, &cfg)?;
    let model = selection.model;
    let fit = selection.fit;

    let mut warnings = Vec::new();
    if opts.horizon > 4 * opts.window {
        warnings.push(format!(
            "forecast horizon {} exceeds four smoothing windows ({}); extrapolation is unreliable",
            opts.horizon,
            4 * opts.window
        ));
    }
    let last_date = series.dates[series.len() - 1];
    let fitted = basis::design_matrix_extrapolated(&xs, model.basis, &model.knots)?
        .mul_vec(&model.coefficients)
        .into_iter()
        .map(|v| opts.scale.inverse(v))
        .collect();
    let forecast = forecast(&model, &fit, opts, hi, last_date)?;

    Ok(SeriesFit {
        label: series.label.clone(),
        scale: opts.scale,
        basis: model.basis,
        knots: model
            .knots
            .knots()
            .iter()
            .map(|&t| series.date_of(t))
            .collect(),
        knot_days: model.knots.knots().to_vec(),
        coefficients: model.coefficients.clone(),
        smoothed,
        positions: xs,
        fit_start,
        fitted,
        forecast,
        lambda: model.lambda_used,
        rss: model.rss,
        pss: model.pss,
        warnings,
        last_date,
        model,
        fit,
    })
}

/// Fits every series independently, in parallel, keeping input order.
pub fn fit_all(series: &[DailySeries], opts: &SeriesOptions) -> Vec<Result<SeriesFit>> {
    series.par_iter().map(|s| fit_series(s, opts)).collect()
}

/// Rows for steps `0..=horizon` past the last observed day, whose smoothed
/// value sits at `last` on the day axis. Step 0 reproduces the fitted value
/// there.
fn forecast(
    model: &SplineModel,
    fit: &lsq::LsqFit,
    opts: &SeriesOptions,
    last: f64,
    last_date: NaiveDate,
) -> Result<Vec<ForecastRow>> {
    let xs: Vec<f64> = (0..=opts.horizon).map(|h| last + h as f64).collect();
    let design = basis::design_matrix_extrapolated(&xs, model.basis, &model.knots)?;
    let points = design.mul_vec(&model.coefficients);
    let half = lsq::pointwise_interval(fit, &design, opts.level, opts.band)?;
    Ok(points
        .iter()
        .zip(&half)
        .enumerate()
        .map(|(h, (&p, &w))| ForecastRow {
            date: last_date + Days::new(h as u64),
            step: h,
            point: opts.scale.inverse(p),
            lower: opts.scale.inverse(p - w),
            upper: opts.scale.inverse(p + w),
            extrapolated: h > 0,
        })
        .collect())
}

/// Recomputes the forecast rows of an existing fit, e.g. for another
/// horizon or interval level.
pub fn reforecast(fit: &SeriesFit, opts: &SeriesOptions) -> Result<Vec<ForecastRow>> {
    let last = fit.positions[fit.positions.len() - 1];
    forecast(&fit.model, &fit.fit, opts, last, fit.last_date)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IngestOptions {
    pub date_column: String,
    pub count_column: String,
    pub label_column: String,
    /// `chrono` format string.
    pub date_format: String,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            date_column: "dateRep".into(),
            count_column: "cases".into(),
            label_column: "countriesAndTerritories".into(),
            date_format: "%d/%m/%Y".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RowError {
    /// 1-based line in the input, the header being line 1.
    pub line: u64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ingested {
    /// One series per label, ordered by label.
    pub series: Vec<DailySeries>,
    pub row_errors: Vec<RowError>,
    pub warnings: Vec<String>,
}

pub fn ingest_csv<R: Read>(reader: R, opts: &IngestOptions) -> Result<Ingested> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv(e.to_string()))?
        .clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| Error::Csv(format!("missing column {name:?}")))
    };
    let (di, ci, li) = (
        column(&opts.date_column)?,
        column(&opts.count_column)?,
        column(&opts.label_column)?,
    );

    let mut groups: BTreeMap<String, BTreeMap<NaiveDate, (f64, u64)>> = BTreeMap::new();
    let mut row_errors = Vec::new();
    for record in rdr.records() {
        let record = match record {
            Ok(r) => r,
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                row_errors.push(RowError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).map(str::trim).unwrap_or("");
        let label = field(li).to_string();
        let group = groups.entry(label).or_default();
        let date = match NaiveDate::parse_from_str(field(di), &opts.date_format) {
            Ok(d) => d,
            Err(e) => {
                row_errors.push(RowError {
                    line,
                    message: format!("date {:?}: {e}", field(di)),
                });
                continue;
            }
        };
        let count = match field(ci).parse::<f64>() {
            Ok(c) if c.is_finite() && c >= 0.0 => c,
            _ => {
                row_errors.push(RowError {
                    line,
                    message: format!("count {:?} is not a nonnegative number", field(ci)),
                });
                continue;
            }
        };
        if let Some((_, first)) = group.insert(date, (count, line)) {
            row_errors.push(RowError {
                line,
                message: format!("date {date} already given on line {first}"),
            });
        }
    }

    let mut series = Vec::new();
    let mut warnings = Vec::new();
    for (label, days) in groups {
        let (Some((&first, _)), Some((&last, _))) = (days.first_key_value(), days.last_key_value())
        else {
            warnings.push(format!("group {label:?} has no usable rows; skipped"));
            continue;
        };
        let len = (last - first).num_days() as usize + 1;
        let mut dates = Vec::with_capacity(len);
        let mut counts = Vec::with_capacity(len);
        let mut filled = Vec::with_capacity(len);
        for d in 0..len as u64 {
            let date = first + Days::new(d);
            dates.push(date);
            match days.get(&date) {
                Some(&(c, _)) => {
                    counts.push(c);
                    filled.push(false);
                }
                None => {
                    counts.push(0.0);
                    filled.push(true);
                }
            }
        }
        let gaps = filled.iter().filter(|&&f| f).count();
        if gaps > 0 {
            warnings.push(format!(
                "group {label:?}: {gaps} missing day(s) filled with 0"
            ));
        }
        series.push(DailySeries::from_parts(label, dates, counts, filled)?);
    }
    Ok(Ingested {
        series,
        row_errors,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Poisson};

    fn day(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    #[test]
    fn moving_average_examples() {
        let c = [0.0, 7.0, 14.0];
        assert_eq!(moving_average(&c, 1).unwrap(), c);
        assert_eq!(moving_average(&c, 3).unwrap()[2], 7.0);
        assert_eq!(moving_average(&[2.5; 20], 7).unwrap(), vec![2.5; 20]);
        assert!(moving_average(&[], 1).is_err());
        assert!(moving_average(&c, 4).is_err());
        assert!(moving_average(&c, 0).is_err());
    }

    #[test]
    fn moving_average_matches_direct_means() {
        let c: Vec<f64> = (0..40).map(|i| ((i * 37) % 11) as f64).collect();
        let ma = moving_average(&c, 7).unwrap();
        for i in 0..c.len() {
            let lo = i.saturating_sub(6);
            let direct: f64 = c[lo..=i].iter().sum::<f64>() / (i - lo + 1) as f64;
            assert!((ma[i] - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn series_validation() {
        let start = day("2020-03-01");
        assert!(DailySeries::new("x", start, vec![]).is_err());
        assert!(DailySeries::new("x", start, vec![1.0, -1.0]).is_err());
        let s = DailySeries::new("x", start, vec![1.0, 2.0]).unwrap();
        assert_eq!(s.dates[1], day("2020-03-02"));
        let gap = vec![start, day("2020-03-03")];
        assert!(DailySeries::from_parts("x".into(), gap, vec![1.0, 1.0], vec![false; 2]).is_err());
    }

    #[test]
    fn date_index_round_trip() {
        let s = DailySeries::new("x", day("2020-02-27"), vec![0.0; 60]).unwrap();
        for d in 0..60 {
            assert_eq!(s.day_of(s.date_of(d as f64)), d);
        }
    }

    const CSV: &str = "dateRep,cases,countriesAndTerritories\n\
        03/04/2020,5,Aland\n\
        01/04/2020,3,Aland\n\
        02/04/2020,4,Aland\n";

    #[test]
    fn ingest_single_group() {
        let out = ingest_csv(CSV.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(out.series.len(), 1);
        let s = &out.series[0];
        assert_eq!(s.counts, vec![3.0, 4.0, 5.0]);
        assert_eq!(s.start(), day("2020-04-01"));
        assert!(out.row_errors.is_empty());
    }

    #[test]
    fn ingest_is_order_invariant() {
        let sorted = "dateRep,cases,countriesAndTerritories\n\
            01/04/2020,3,Aland\n02/04/2020,4,Aland\n03/04/2020,5,Aland\n";
        let a = ingest_csv(CSV.as_bytes(), &IngestOptions::default()).unwrap();
        let b = ingest_csv(sorted.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(a.series, b.series);
    }

    #[test]
    fn ingest_fills_gaps() {
        let csv = "dateRep,cases,countriesAndTerritories\n\
            01/04/2020,3,Aland\n04/04/2020,6,Aland\n05/04/2020,1,Aland\n";
        let out = ingest_csv(csv.as_bytes(), &IngestOptions::default()).unwrap();
        let s = &out.series[0];
        assert_eq!(s.len(), 5);
        assert_eq!(s.counts, vec![3.0, 0.0, 0.0, 6.0, 1.0]);
        assert_eq!(s.filled.iter().filter(|&&f| f).count(), 2);
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn ingest_reports_bad_rows_with_lines() {
        let csv = "dateRep,cases,countriesAndTerritories\n\
            01/04/2020,3,A\n\
            2020-04-02,4,A\n\
            03/04/2020,x,A\n\
            01/04/2020,9,A\n\
            01/04/2020,bad,B\n";
        let out = ingest_csv(csv.as_bytes(), &IngestOptions::default()).unwrap();
        let lines: Vec<u64> = out.row_errors.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![3, 4, 5, 6]);
        assert_eq!(out.series.len(), 1);
        assert_eq!(
            out.warnings,
            vec!["group \"B\" has no usable rows; skipped"]
        );
    }

    #[test]
    fn ingest_custom_columns_and_format() {
        let csv = "day;n;who\n2020-01-01;1;q\n2020-01-02;2;q\n";
        let opts = IngestOptions {
            date_column: "day".into(),
            count_column: "n".into(),
            label_column: "who".into(),
            date_format: "%Y-%m-%d".into(),
        };
        let rdr = csv.replace(';', ",");
        let out = ingest_csv(rdr.as_bytes(), &opts).unwrap();
        assert_eq!(out.series[0].counts, vec![1.0, 2.0]);
        assert!(matches!(
            ingest_csv(rdr.as_bytes(), &IngestOptions::default()),
            Err(Error::Csv(_))
        ));
    }

    /// Poisson counts around a piecewise log-linear mean.
    fn exponential_series(rates: &[(usize, f64)], len: usize) -> DailySeries {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut log: f64 = 3.0;
        let mut counts = Vec::with_capacity(len);
        for d in 0..len {
            let rate = rates
                .iter()
                .rev()
                .find(|(s, _)| d >= *s)
                .map_or(0.0, |r| r.1);
            counts.push(Poisson::new(log.exp()).unwrap().sample(&mut rng));
            log += rate;
        }
        DailySeries::new("synthetic", day("2020-03-01"), counts).unwrap()
    }

    #[test]
    fn forecast_starts_at_last_fitted_value() {
        let s = exponential_series(&[(0, 0.06), (50, -0.03)], 100);
        let fit = fit_series(&s, &SeriesOptions::default()).unwrap();
        assert_eq!(fit.forecast.len(), 8);
        let first = &fit.forecast[0];
        assert_eq!(first.date, s.dates[99]);
        assert!((first.point - fit.fitted[99]).abs() <= 1e-10 * fit.fitted[99]);
        for row in &fit.forecast {
            assert!(row.lower <= row.point && row.point <= row.upper);
        }
        for w in fit.forecast.windows(2) {
            assert_eq!(w[1].date, w[0].date.succ_opt().unwrap());
        }
    }

    #[test]
    fn log_fit_finds_the_slope_change() {
        let s = exponential_series(&[(0, 0.06), (50, -0.03)], 100);
        let fit = fit_series(&s, &SeriesOptions::default()).unwrap();
        assert_eq!(fit.knot_days.len(), 1, "{:?}", fit.knot_days);
        assert!(
            (fit.knot_days[0] - 50.0).abs() <= 2.0,
            "{:?}",
            fit.knot_days
        );
        assert_eq!(fit.knots[0], s.date_of(fit.knot_days[0]));
    }

    #[test]
    fn straight_line_forecast_continues_exactly() {
        let counts: Vec<f64> = (0..60).map(|d| (0.5 + 0.05 * d as f64).exp_m1()).collect();
        let s = DailySeries::new("line", day("2021-01-01"), counts).unwrap();
        let opts = SeriesOptions {
            window: 1,
            ..SeriesOptions::default()
        };
        let fit = fit_series(&s, &opts).unwrap();
        assert_eq!(fit.knot_days.len(), 0);
        for row in &fit.forecast {
            let expected = 0.5 + 0.05 * (59 + row.step) as f64;
            assert!((row.point.ln_1p() - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn raw_counts_untouched_and_short_series_rejected() {
        let s = exponential_series(&[(0, 0.05)], 40);
        let before = s.clone();
        let _ = fit_series(&s, &SeriesOptions::for_scale(Scale::Linear)).unwrap();
        let _ = fit_series(&s, &SeriesOptions::for_scale(Scale::Log)).unwrap();
        assert_eq!(s, before);
        let short = exponential_series(&[(0, 0.05)], 29);
        assert!(matches!(
            fit_series(&short, &SeriesOptions::default()),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn long_horizon_warns() {
        let s = exponential_series(&[(0, 0.05)], 40);
        let opts = SeriesOptions {
            horizon: 29,
            ..SeriesOptions::default()
        };
        assert_eq!(fit_series(&s, &opts).unwrap().warnings.len(), 1);
        assert!(fit_series(&s, &SeriesOptions::default())
            .unwrap()
            .warnings
            .is_empty());
    }

    #[test]
    fn window_positions() {
        assert_eq!(positions(4, 1, Align::Center), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(positions(4, 3, Align::End), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(
            positions(5, 3, Align::Center),
            vec![0.0, 0.5, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn leading_region_never_holds_a_knot() {
        let s = exponential_series(&[(0, 0.09), (12, 0.0), (40, -0.05), (70, 0.02)], 100);
        for align in [Align::Center, Align::End] {
            let opts = SeriesOptions {
                align,
                ..SeriesOptions::default()
            };
            let fit = fit_series(&s, &opts).unwrap();
            assert!(!fit.knot_days.is_empty());
            assert!(
                fit.knot_days.iter().all(|&t| t >= 10.0),
                "{:?}",
                fit.knot_days
            );
        }
    }

    #[test]
    fn end_alignment_lags_by_half_a_window() {
        let s = exponential_series(&[(0, 0.06), (50, -0.03)], 100);
        let centre = fit_series(&s, &SeriesOptions::default()).unwrap();
        let end = fit_series(
            &s,
            &SeriesOptions {
                align: Align::End,
                ..SeriesOptions::default()
            },
        )
        .unwrap();
        assert_eq!(end.knot_days.len(), 1);
        assert!((end.knot_days[0] - centre.knot_days[0] - 3.0).abs() <= 1.0);
    }

    #[test]
    fn linear_scale_fits_natural_cubic() {
        let s = exponential_series(&[(0, 0.05), (45, -0.02)], 90);
        let fit = fit_series(&s, &SeriesOptions::for_scale(Scale::Linear)).unwrap();
        let family = if fit.knot_days.len() >= 2 {
            crate::BasisFamily::NaturalCubic
        } else {
            crate::BasisFamily::TruncatedPower
        };
        assert_eq!(fit.basis.family, family);
        assert_eq!(fit.fitted.len(), 90);
        assert!((fit.forecast[0].point - fit.fitted[89]).abs() < 1e-9 * fit.fitted[89].abs());
    }
}
