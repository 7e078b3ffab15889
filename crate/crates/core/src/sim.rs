// SPDX-License-Identifier: MIT OR Apache-2.0

//! Monte Carlo study of knot recovery on cubic B-spline ground truths.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisSpec, Domain, KnotConfig};
use crate::criterion::Penalty;
use crate::error::{Error, Result};
use crate::search::{self, CandidateGrid, SearchConfig};

pub const DOMAIN: (f64, f64) = (0.0, 100.0);
pub const DEFAULT_DELTA: f64 = 15.0;
/// Largest absolute value of every bundled ground truth.
pub const TRUTH_PEAK: f64 = 10.0;

/// Knob settings passed through to the knot search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSearch {
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_patience")]
    pub patience: usize,
    #[serde(default = "default_grid")]
    pub grid: CandidateGrid,
    #[serde(default)]
    pub penalty: Penalty,
}

fn default_k_max() -> usize {
    SearchConfig::DEFAULT_K_MAX
}

fn default_patience() -> usize {
    SearchConfig::DEFAULT_PATIENCE
}

fn default_grid() -> CandidateGrid {
    CandidateGrid::Uniform { resolution: 1.0 }
}

impl Default for SimSearch {
    fn default() -> Self {
        Self {
            k_max: default_k_max(),
            patience: default_patience(),
            grid: default_grid(),
            penalty: Penalty::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub name: String,
    pub truth_knots: Vec<f64>,
    pub truth_coefficients: Vec<f64>,
    pub basis: BasisSpec,
    pub snr: f64,
    pub n: usize,
    pub replications: usize,
    pub delta: f64,
    pub seed: u64,
    pub search: SimSearch,
}

impl SimScenario {
    /// Scenario on the bundled ground truth for `truth_knots`.
    pub fn new(
        name: impl Into<String>,
        truth_knots: Vec<f64>,
        snr: f64,
        n: usize,
        replications: usize,
        seed: u64,
    ) -> Result<Self> {
        let truth_coefficients = standard_truth(&truth_knots)?;
        let s = Self {
            name: name.into(),
            truth_knots,
            truth_coefficients,
            basis: BasisSpec::bspline(3),
            snr,
            n,
            replications,
            delta: DEFAULT_DELTA,
            seed,
            search: SimSearch::default(),
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.snr.is_finite() && self.snr > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "snr must be positive, got {}",
                self.snr
            )));
        }
        if self.n < 10 {
            return Err(Error::InvalidArgument(format!(
                "n must be at least 10, got {}",
                self.n
            )));
        }
        if self.replications == 0 {
            return Err(Error::InvalidArgument(
                "replications must be at least 1".into(),
            ));
        }
        let kc = self.truth_config()?;
        let dim = self.basis.dimension(kc.len())?;
        if self.truth_coefficients.len() != dim {
            return Err(Error::DimensionMismatch {
                what: "truth coefficients vs basis dimension",
                expected: dim,
                found: self.truth_coefficients.len(),
            });
        }
        self.search_config().validate()
    }

    pub fn domain() -> Domain {
        Domain::new(DOMAIN.0, DOMAIN.1).expect("constant domain is valid")
    }

    pub fn truth_config(&self) -> Result<KnotConfig> {
        KnotConfig::new(self.truth_knots.clone(), Self::domain())
    }

    pub fn search_config(&self) -> SearchConfig {
        SearchConfig {
            delta: self.delta,
            k_max: self.search.k_max,
            grid: self.search.grid.clone(),
            penalty: self.search.penalty.clone(),
            basis: self.basis,
            exclude_left_frac: 0.0,
            patience: self.search.patience,
        }
    }

    /// Equispaced design points on the domain.
    pub fn design_points(&self) -> Vec<f64> {
        let (a, b) = DOMAIN;
        let step = (b - a) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| {
                if i + 1 == self.n {
                    b
                } else {
                    a + i as f64 * step
                }
            })
            .collect()
    }

    /// Ground truth evaluated at `xs`.
    pub fn signal(&self, xs: &[f64]) -> Result<Vec<f64>> {
        let design = basis::design_matrix(xs, self.basis, &self.truth_config()?)?;
        Ok(design.mul_vec(&self.truth_coefficients))
    }

    /// Noise standard deviation: population sd of the signal over `snr`.
    pub fn noise_sd(&self) -> Result<f64> {
        let f = self.signal(&self.design_points())?;
        Ok(population_sd(&f) / self.snr)
    }
}

/// Interior B-spline coefficients alternate in sign, the two end
/// coefficients are zero, and the curve is scaled so its largest absolute
/// value is [`TRUTH_PEAK`]. For `{20, 45, 80}` the first interior
/// coefficient is raised to make the left bump the highest peak.
///
/// Raw patterns before scaling:
/// * `{50}`: `[0, 1, -1, 1, 0]`
/// * `{25, 75}`: `[0, 1, -1, 1, -1, 0]`
/// * `{25, 50, 75}`: `[0, 1, -1, 1, -1, 1, 0]`
/// * `{20, 45, 80}`: `[0, 10, -6, 6, -6, 6, 0]`
pub fn standard_truth(knots: &[f64]) -> Result<Vec<f64>> {
    let kc = KnotConfig::new(knots.to_vec(), SimScenario::domain())?;
    let spec = BasisSpec::bspline(3);
    let dim = spec.dimension(kc.len())?;
    let mut raw = vec![0.0; dim];
    for (j, c) in raw.iter_mut().enumerate().take(dim - 1).skip(1) {
        *c = if j % 2 == 1 { 1.0 } else { -1.0 };
    }
    if knots == [20.0, 45.0, 80.0] {
        raw = vec![0.0, 10.0, -6.0, 6.0, -6.0, 6.0, 0.0];
    }
    let fine: Vec<f64> = (0..=10_000).map(|i| i as f64 * 0.01).collect();
    let design = basis::design_matrix(&fine, spec, &kc)?;
    let peak = design
        .mul_vec(&raw)
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(raw.iter().map(|c| c * TRUTH_PEAK / peak).collect())
}

pub fn population_sd(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt()
}

/// Data for one replication. The noise stream depends only on
/// `(scenario.seed, rep_index)`.
pub fn generate(scenario: &SimScenario, rep_index: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = scenario.design_points();
    let f = scenario.signal(&xs)?;
    let sigma = population_sd(&f) / scenario.snr;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    rng.set_stream(rep_index);
    let y = f
        .iter()
        .map(|&fi| {
            let z: f64 = StandardNormal.sample(&mut rng);
            fi + sigma * z
        })
        .collect();
    Ok((xs, y))
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replication {
    pub index: u64,
    pub k_hat: Option<usize>,
    pub knots: Vec<f64>,
    pub lambda: Option<f64>,
    pub error: Option<String>,
    #[serde(skip)]
    pub seconds: f64,
}

pub fn replicate(scenario: &SimScenario, index: u64) -> Replication {
    let start = Instant::now();
    let result = generate(scenario, index)
        .and_then(|(xs, y)| search::select(&xs, &y, &scenario.search_config()));
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(model) => Replication {
            index,
            k_hat: Some(model.k()),
            knots: model.knots.knots().to_vec(),
            lambda: Some(model.lambda_used),
            error: None,
            seconds,
        },
        Err(e) => Replication {
            index,
            k_hat: None,
            knots: Vec::new(),
            lambda: None,
            error: Some(e.to_string()),
            seconds,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KnotStats {
    /// 1-based knot position.
    pub knot: usize,
    pub truth: f64,
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; absent with fewer than two estimates.
    pub sd: Option<f64>,
    pub ci_lower: f64,
    pub ci_upper: f64,
    /// Every estimate of this knot, in replication order, for histograms.
    pub estimates: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub mean_seconds_per_replication: f64,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimReport {
    pub scenario: String,
    pub n: usize,
    pub snr: f64,
    pub truth_knots: Vec<f64>,
    pub replications: usize,
    pub failures: usize,
    /// Replications with `k_hat` equal to the true knot count.
    pub correct_count: usize,
    pub prop_correct_k: f64,
    pub k_hat_counts: BTreeMap<usize, usize>,
    /// Knot statistics over the replications with the correct count.
    pub knots: Vec<KnotStats>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Timing>,
}

impl SimReport {
    pub fn without_timing(mut self) -> Self {
        self.timing = None;
        self
    }
}

pub fn run(scenario: &SimScenario) -> Result<SimReport> {
    scenario.validate()?;
    let reps: Vec<Replication> = (0..scenario.replications as u64)
        .into_par_iter()
        .map(|i| replicate(scenario, i))
        .collect();
    Ok(summarize(scenario, &reps))
}

pub fn summarize(scenario: &SimScenario, reps: &[Replication]) -> SimReport {
    let k_true = scenario.truth_knots.len();
    let failures = reps.iter().filter(|r| r.k_hat.is_none()).count();
    let mut k_hat_counts = BTreeMap::new();
    for k in reps.iter().filter_map(|r| r.k_hat) {
        *k_hat_counts.entry(k).or_insert(0) += 1;
    }
    let correct: Vec<&Replication> = reps.iter().filter(|r| r.k_hat == Some(k_true)).collect();
    let knots = if correct.is_empty() {
        Vec::new()
    } else {
        (0..k_true)
            .map(|j| {
                let estimates: Vec<f64> = correct.iter().map(|r| r.knots[j]).collect();
                knot_stats(j + 1, scenario.truth_knots[j], estimates)
            })
            .collect()
    };
    let total: f64 = reps.iter().map(|r| r.seconds).sum();
    SimReport {
        scenario: scenario.name.clone(),
        n: scenario.n,
        snr: scenario.snr,
        truth_knots: scenario.truth_knots.clone(),
        replications: reps.len(),
        failures,
        correct_count: correct.len(),
        prop_correct_k: correct.len() as f64 / reps.len() as f64,
        k_hat_counts,
        knots,
        timing: Some(Timing {
            mean_seconds_per_replication: total / reps.len() as f64,
            total_seconds: total,
        }),
    }
}

fn knot_stats(knot: usize, truth: f64, estimates: Vec<f64>) -> KnotStats {
    let m = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / m;
    let sd = (estimates.len() >= 2)
        .then(|| (estimates.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0)).sqrt());
    let mut sorted = estimates.clone();
    sorted.sort_by(f64::total_cmp);
    KnotStats {
        knot,
        truth,
        mean,
        median: quantile(&sorted, 0.5),
        sd,
        ci_lower: quantile(&sorted, 0.025),
        ci_upper: quantile(&sorted, 0.975),
        estimates,
    }
}

/// Linearly interpolated quantile of sorted data (the common "type 7"
/// definition).
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Names of the eighteen bundled scenarios, e.g. `three-knots-snr9-n100`.
pub fn bundled_names() -> Vec<String> {
    let mut names = Vec::new();
    for truth in ["one-knot", "two-knots", "three-knots"] {
        for n in [100, 1000] {
            for snr in [3, 6, 9] {
                names.push(format!("{truth}-snr{snr}-n{n}"));
            }
        }
    }
    names
}

/// Truth knot sets of the bundled scenarios.
pub fn truth_knots_for(label: &str) -> Option<Vec<f64>> {
    match label {
        "one-knot" => Some(vec![50.0]),
        "two-knots" => Some(vec![25.0, 75.0]),
        "three-knots" => Some(vec![25.0, 50.0, 75.0]),
        _ => None,
    }
}

/// Builds a bundled scenario from its name.
pub fn bundled(name: &str, replications: usize, seed: u64) -> Option<SimScenario> {
    let (truth, rest) = name.rsplit_once("-snr")?;
    let (snr, n) = rest.split_once("-n")?;
    let knots = truth_knots_for(truth)?;
    let snr: f64 = snr.parse().ok()?;
    let n: usize = n.parse().ok()?;
    SimScenario::new(name, knots, snr, n, replications, seed).ok()
}

/// Plain-text table laid out like a knot-recovery results table.
pub fn format_table(reports: &[SimReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:>4} {:>8} {:>5} {:>8} {:>8} {:>7} {:>18}",
        "n", "SNR", "%K=Ktrue", "Knot", "Mean", "Median", "SD", "CI(95%)"
    );
    for r in reports {
        let pct = format!("{:.0}%", 100.0 * r.prop_correct_k);
        if r.knots.is_empty() {
            let _ = writeln!(
                out,
                "{:>5} {:>4} {:>8} {:>5} {:>8} {:>8} {:>7} {:>18}",
                r.n, r.snr, pct, "-", "-", "-", "-", "-"
            );
        }
        for (j, k) in r.knots.iter().enumerate() {
            let (n, snr, pct) = if j == 0 {
                (r.n.to_string(), r.snr.to_string(), pct.clone())
            } else {
                (String::new(), String::new(), String::new())
            };
            let sd = k.sd.map_or("-".to_string(), |v| format!("{v:.2}"));
            let ci = format!("({:.2} ; {:.2})", k.ci_lower, k.ci_upper);
            let _ = writeln!(
                out,
                "{:>5} {:>4} {:>8} {:>5} {:>8.2} {:>8.2} {:>7} {:>18}",
                n, snr, pct, k.knot, k.mean, k.median, sd, ci
            );
        }
    }
    out
}

pub const DEMO_KNOTS: [f64; 3] = [20.0, 45.0, 80.0];
pub const DEMO_SNR: f64 = 3.0;
pub const DEMO_N: usize = 100;
pub const DEMO_SEED: u64 = 2020;

/// Eleven knots crowded into `[6, 26]`, a deliberately poor placement.
pub fn demo_bad_knots() -> Vec<f64> {
    (0..11).map(|i| 6.0 + 2.0 * i as f64).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct DemoFit {
    pub knots: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub rss: f64,
    pub pss: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Demo {
    pub seed: u64,
    pub n: usize,
    pub snr: f64,
    pub lambda: f64,
    pub xs: Vec<f64>,
    pub y: Vec<f64>,
    pub truth: DemoFit,
    pub bad: DemoFit,
    pub automatic: DemoFit,
}

/// One noisy draw from the three-knot demo truth, fitted with the crowded
/// knots and with the automatic search.
pub fn demo(seed: u64, n: usize, snr: f64) -> Result<Demo> {
    let scenario = SimScenario::new("demo", DEMO_KNOTS.to_vec(), snr, n, 1, seed)?;
    let (xs, y) = generate(&scenario, 0)?;
    let cfg = scenario.search_config();
    let lambda = search::resolve_lambda(&xs, &y, &cfg)?;
    let rss_of =
        |fitted: &[f64]| -> f64 { y.iter().zip(fitted).map(|(a, b)| (a - b).powi(2)).sum() };

    let f = scenario.signal(&xs)?;
    let truth = DemoFit {
        knots: DEMO_KNOTS.to_vec(),
        coefficients: scenario.truth_coefficients.clone(),
        rss: rss_of(&f),
        pss: crate::criterion::pss(rss_of(&f), DEMO_KNOTS.len(), lambda),
        fitted: f,
    };

    let bad_kc = KnotConfig::new(demo_bad_knots(), SimScenario::domain())?;
    let bad_fit = crate::lsq::solve(&basis::design_matrix(&xs, scenario.basis, &bad_kc)?, &y)?;
    let bad = DemoFit {
        knots: demo_bad_knots(),
        coefficients: bad_fit.coefficients,
        rss: bad_fit.rss,
        pss: crate::criterion::pss(bad_fit.rss, bad_kc.len(), lambda),
        fitted: bad_fit.fitted,
    };

    let sel = search::select_detailed(&xs, &y, &cfg)?;
    let automatic = DemoFit {
        knots: sel.model.knots.knots().to_vec(),
        coefficients: sel.model.coefficients.clone(),
        fitted: sel.fit.fitted,
        rss: sel.model.rss,
        pss: sel.model.pss,
    };
    Ok(Demo {
        seed,
        n,
        snr,
        lambda,
        xs,
        y,
        truth,
        bad,
        automatic,
    })
}
