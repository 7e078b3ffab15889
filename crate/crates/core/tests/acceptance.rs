// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use autoknot::basis::{self, augmented_knots};
use autoknot::criterion;
use autoknot::search::{self, SplineModel};
use autoknot::sim;
use autoknot::timeseries::{self, DailySeries, SeriesOptions};
use autoknot::{lsq, BasisSpec, CandidateGrid, Domain, KnotConfig, Penalty, SearchConfig};
use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Base seed for every randomized criterion; fixed once, never tuned.
const SEED: u64 = 20_200_501;

struct Outcome {
    pass: bool,
    detail: String,
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("basis correctness", c1_basis),
        ("span equivalence", c2_span),
        ("oracle equivalence", c3_oracle),
        ("noiseless recovery", c4_noiseless),
        ("one-knot table, n=1000", c5_one_knot),
        ("three-knot table, n=100 snr=3", c6_three_knots),
        ("monotone in SNR", c7_monotone),
        ("three-knot demo", c8_demo),
        ("time-series pipeline", c9_series),
        ("determinism across threads", c10_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += usize::from(!o.pass);
        println!(
            "criterion {:>2} {status} {name}: {} [{:.1}s]",
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criterion/criteria failed");
        ExitCode::FAILURE
    }
}

fn random_knots(rng: &mut ChaCha8Rng, k: usize, a: f64, b: f64, gap: f64) -> Vec<f64> {
    loop {
        let mut t: Vec<f64> = (0..k).map(|_| rng.gen_range(a + gap..b - gap)).collect();
        t.sort_by(f64::total_cmp);
        if t.windows(2).all(|w| w[1] - w[0] > gap) {
            return t;
        }
    }
}

// 1. Partition of unity, nonnegativity and compact support of B-splines.
fn c1_basis() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    let mut negative = 0usize;
    let mut leaks = 0usize;
    for _ in 0..100 {
        let a = rng.gen_range(-50.0..50.0);
        let b = a + rng.gen_range(0.5..100.0);
        let k = rng.gen_range(0..=8);
        let degree = rng.gen_range(0..=3);
        let kc = KnotConfig::new(
            random_knots(&mut rng, k, a, b, 1e-3 * (b - a)),
            Domain::new(a, b).unwrap(),
        )
        .unwrap();
        let spec = BasisSpec::bspline(degree);
        let tau = augmented_knots(spec.order(), &kc);
        let mut points: Vec<f64> = (0..1000).map(|_| rng.gen_range(a..=b)).collect();
        points.extend(kc.knots());
        points.extend([a, b]);
        for &x in &points {
            let row = basis::bspline_row(x, spec, &kc).unwrap();
            worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            for (i, &v) in row.iter().enumerate() {
                negative += usize::from(v < 0.0);
                let outside = x < tau[i] || x > tau[i + spec.order()];
                leaks += usize::from(outside && v != 0.0);
            }
        }
    }
    Outcome {
        pass: worst <= 1e-12 && negative == 0 && leaks == 0,
        detail: format!(
            "max |sum-1| = {worst:.2e} (tol 1e-12), negatives {negative}, support leaks {leaks}"
        ),
    }
}

// 2. Truncated power and B-spline bases span the same space.
fn c2_span() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let degree = rng.gen_range(1..=3);
        let k = rng.gen_range(0..=4);
        let domain = Domain::new(0.0, 10.0).unwrap();
        let kc = KnotConfig::new(random_knots(&mut rng, k, 0.0, 10.0, 0.5), domain).unwrap();
        let n = 80;
        let xs: Vec<f64> = (0..n).map(|i| 10.0 * i as f64 / (n - 1) as f64).collect();
        let y: Vec<f64> = xs
            .iter()
            .map(|x| (x * 0.7).sin() * 3.0 + rng.gen_range(-1.0..1.0))
            .collect();
        let tp = lsq::solve(
            &basis::design_matrix(&xs, BasisSpec::truncated_power(degree), &kc).unwrap(),
            &y,
        )
        .unwrap();
        let bs = lsq::solve(
            &basis::design_matrix(&xs, BasisSpec::bspline(degree), &kc).unwrap(),
            &y,
        )
        .unwrap();
        let scale = tp.fitted.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (a, b) in tp.fitted.iter().zip(&bs.fitted) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative fitted difference {worst:.2e} (tol 1e-8) over 50 settings"),
    }
}

/// Brute-force minimizer of rss + lambda (K + 1) over every delta-feasible
/// subset of `grid` with at most two knots. Ties: smaller K, then
/// lexicographically smaller knots.
fn brute_force(
    xs: &[f64],
    y: &[f64],
    grid: &[f64],
    domain: Domain,
    spec: BasisSpec,
    delta: f64,
    lambda: f64,
) -> (f64, Vec<f64>) {
    let (a, b) = (domain.lower(), domain.upper());
    let feasible = |t: &[f64]| {
        let mut prev = a;
        for &v in t {
            if v - prev <= delta {
                return false;
            }
            prev = v;
        }
        b - prev > delta
    };
    let mut subsets: Vec<Vec<f64>> = vec![vec![]];
    for (i, &u) in grid.iter().enumerate() {
        subsets.push(vec![u]);
        for &v in &grid[i + 1..] {
            subsets.push(vec![u, v]);
        }
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    for t in subsets.into_iter().filter(|t| feasible(t)) {
        let kc = KnotConfig::new(t.clone(), domain).unwrap();
        let design = basis::design_matrix(xs, spec.effective_for(t.len()), &kc).unwrap();
        let rss = lsq::solve(&design, y).unwrap().rss;
        let pss = rss + lambda * (t.len() as f64 + 1.0);
        let better = match &best {
            None => true,
            Some((bp, bt)) => {
                pss < *bp
                    || (pss == *bp
                        && (t.len() < bt.len()
                            || (t.len() == bt.len()
                                && t.partial_cmp(bt) == Some(std::cmp::Ordering::Less))))
            }
        };
        if better {
            best = Some((pss, t));
        }
    }
    best.unwrap()
}

// 3. select agrees exactly with exhaustive enumeration for K <= 2.
fn c3_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut mismatches = Vec::new();
    for inst in 0..200 {
        let n = rng.gen_range(12..=50);
        let mut xs: Vec<f64> = (0..n)
            .map(|_| (rng.gen_range(0.0..10.0f64) * 100.0).round() / 100.0)
            .collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let y: Vec<f64> = xs
            .iter()
            .map(|&x| if x < 4.0 { x } else { 8.0 - x } + rng.gen_range(-0.5..0.5))
            .collect();
        let domain = Domain::new(xs[0], xs[xs.len() - 1]).unwrap();
        let mut grid: Vec<f64> = (0..rng.gen_range(5..=30))
            .map(|_| (rng.gen_range(domain.lower()..domain.upper()) * 100.0).round() / 100.0)
            .filter(|&g| g > domain.lower() && g < domain.upper())
            .collect();
        grid.sort_by(f64::total_cmp);
        grid.dedup();
        let spec = match rng.gen_range(0..5) {
            0 => BasisSpec::truncated_power(1),
            1 => BasisSpec::truncated_power(2),
            2 => BasisSpec::bspline(3),
            3 => BasisSpec::bspline(1),
            _ => BasisSpec::natural_cubic(),
        };
        let delta = rng.gen_range(0.2..2.0);
        let lambda = rng.gen_range(0.05..3.0);
        let cfg = SearchConfig {
            delta,
            k_max: 2,
            grid: CandidateGrid::Points {
                points: grid.clone(),
            },
            penalty: Penalty::Fixed { lambda },
            basis: spec,
            exclude_left_frac: 0.0,
            patience: 2,
        };
        let model = search::select(&xs, &y, &cfg).unwrap();
        let (pss, knots) = brute_force(&xs, &y, &grid, domain, spec, delta, lambda);
        if model.pss != pss || model.knots.knots() != knots.as_slice() {
            mismatches.push(inst);
        }
    }
    Outcome {
        pass: mismatches.is_empty(),
        detail: format!(
            "{}/200 instances identical (PSS bitwise, knots exact); mismatches {mismatches:?}",
            200 - mismatches.len()
        ),
    }
}

// 4. Exact spline data with the floor penalty is recovered exactly.
fn c4_noiseless() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let domain = Domain::new(0.0, 100.0).unwrap();
    let xs: Vec<f64> = (0..=100).map(f64::from).collect();
    let mut ok = 0;
    let mut misses = Vec::new();
    for inst in 0..50 {
        let k = rng.gen_range(1..=4);
        let knots: Vec<f64> = random_knots(&mut rng, k, 0.0, 100.0, 12.0)
            .iter()
            .map(|t| t.round())
            .collect();
        let spec = match inst % 3 {
            0 => BasisSpec::bspline(3),
            1 => BasisSpec::truncated_power(1),
            _ => BasisSpec::bspline(2),
        };
        let kc = KnotConfig::new(knots.clone(), domain).unwrap();
        let design = basis::design_matrix(&xs, spec, &kc).unwrap();
        let coef: Vec<f64> = (0..design.cols())
            .map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * rng.gen_range(2.0..6.0))
            .collect();
        let y = design.mul_vec(&coef);
        let cfg = SearchConfig {
            delta: 5.0,
            k_max: 6,
            grid: CandidateGrid::Uniform { resolution: 1.0 },
            penalty: Penalty::Fixed {
                lambda: criterion::lambda_floor(&y),
            },
            basis: spec,
            exclude_left_frac: 0.0,
            patience: 2,
        };
        let m = search::select(&xs, &y, &cfg).unwrap();
        if m.knots.knots() == knots.as_slice() {
            ok += 1;
        } else {
            misses.push((knots, m.knots.knots().to_vec()));
        }
    }
    Outcome {
        pass: ok == 50,
        detail: format!("{ok}/50 recovered exactly; misses {misses:?}"),
    }
}

fn scenario_report(name: &str, reps: usize) -> sim::SimReport {
    sim::run(&sim::bundled(name, reps, SEED).unwrap()).unwrap()
}

// 5. One knot at n = 1000.
fn c5_one_knot() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (snr, sd_max) in [(3, 2.5), (6, 1.3), (9, 1.0)] {
        let r = scenario_report(&format!("one-knot-snr{snr}-n1000"), 200);
        let k = r.knots.first();
        let mean = k.map_or(f64::NAN, |k| k.mean);
        let sd = k.and_then(|k| k.sd).unwrap_or(f64::NAN);
        let ok = r.prop_correct_k >= 0.98 && (mean - 50.0).abs() <= 1.0 && sd <= sd_max;
        pass &= ok;
        parts.push(format!(
            "snr{snr}: prop {:.3} mean {mean:.2} sd {sd:.2} (<= {sd_max})",
            r.prop_correct_k
        ));
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

// 6. Three knots at n = 100, SNR 3.
fn c6_three_knots() -> Outcome {
    let r = scenario_report("three-knots-snr3-n100", 200);
    let means: Vec<f64> = r.knots.iter().map(|k| k.mean).collect();
    let ok_means = means.len() == 3
        && means
            .iter()
            .zip([25.0, 50.0, 75.0])
            .all(|(m, t)| (m - t).abs() <= 1.5);
    Outcome {
        pass: r.prop_correct_k >= 0.90 && ok_means,
        detail: format!(
            "prop {:.3} (>= 0.90), means {means:.2?} (+/-1.5)",
            r.prop_correct_k
        ),
    }
}

// 7. Proportion correct is non-decreasing in SNR for every (truth, n).
fn c7_monotone() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for truth in ["one-knot", "two-knots", "three-knots"] {
        for n in [100, 1000] {
            let props: Vec<f64> = [3, 6, 9]
                .iter()
                .map(|snr| scenario_report(&format!("{truth}-snr{snr}-n{n}"), 100).prop_correct_k)
                .collect();
            let ok = props.windows(2).all(|w| w[1] >= w[0]);
            pass &= ok;
            parts.push(format!(
                "{truth}/n{n} {props:.2?}{}",
                if ok { "" } else { " (!)" }
            ));
        }
    }
    Outcome {
        pass,
        detail: parts.join("; "),
    }
}

// 8. Demo truth {20, 45, 80} at SNR 3 over 100 seeds.
fn c8_demo() -> Outcome {
    let mut hits = 0;
    let mut correct_k = 0;
    for seed in 0..100 {
        let d = sim::demo(SEED + seed, sim::DEMO_N, sim::DEMO_SNR).unwrap();
        let t = &d.automatic.knots;
        if t.len() == 3 {
            correct_k += 1;
            if t.iter()
                .zip(sim::DEMO_KNOTS)
                .all(|(a, b)| (a - b).abs() <= 4.0)
            {
                hits += 1;
            }
        }
    }
    Outcome {
        pass: hits >= 85,
        detail: format!(
            "K=3 in {correct_k}/100, K=3 with every knot within +/-4 in {hits}/100 (>= 85)"
        ),
    }
}

/// Poisson counts around exp(piecewise linear) with slope changes at days
/// 50 and 100.
fn synthetic_series(seed: u64) -> DailySeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = (0..150)
        .map(|d| {
            let d = d as f64;
            let log_mean = if d < 50.0 {
                3.0 + 0.06 * d
            } else if d < 100.0 {
                6.0 + 0.01 * (d - 50.0)
            } else {
                6.5 - 0.04 * (d - 100.0)
            };
            Poisson::new(log_mean.exp()).unwrap().sample(&mut rng)
        })
        .collect();
    DailySeries::new(
        "synthetic",
        NaiveDate::from_ymd_opt(2020, 3, 1).unwrap(),
        counts,
    )
    .unwrap()
}

// 9. Log-scale linear splines on a two-change synthetic series.
fn c9_series() -> Outcome {
    let opts = SeriesOptions::default();
    let (mut hits, mut excluded_ok, mut continuity_ok) = (0, 0, 0);
    let mut worst_gap = 0.0f64;
    for seed in 0..100 {
        let s = synthetic_series(SEED + seed);
        let fit = timeseries::fit_series(&s, &opts).unwrap();
        let t = &fit.knot_days;
        if t.len() == 2 && (t[0] - 50.0).abs() <= 3.0 && (t[1] - 100.0).abs() <= 3.0 {
            hits += 1;
        }
        let lo = fit.positions[fit.fit_start];
        let hi = fit.positions[fit.positions.len() - 1];
        let cutoff = lo + opts.exclude_left_frac * (hi - lo);
        excluded_ok += usize::from(
            t.iter()
                .all(|&k| k >= cutoff && k >= 0.1 * (s.len() - 1) as f64),
        );
        let gap = (fit.forecast[0].point - fit.fitted[fit.fitted.len() - 1]).abs();
        worst_gap = worst_gap.max(gap);
        continuity_ok += usize::from(gap <= 1e-10);
    }
    Outcome {
        pass: hits >= 90 && excluded_ok == 100 && continuity_ok == 100,
        detail: format!(
            "K=2 within +/-3 days in {hits}/100 (>= 90); exclusion honored {excluded_ok}/100; \
             forecast continuity {continuity_ok}/100 (max gap {worst_gap:.1e})"
        ),
    }
}

fn outputs_json() -> Vec<String> {
    let mut out = Vec::new();
    let s = sim::bundled("three-knots-snr3-n100", 30, 7).unwrap();
    out.push(serde_json::to_string(&sim::run(&s).unwrap().without_timing()).unwrap());
    out.push(serde_json::to_string(&sim::demo(11, 100, 3.0).unwrap()).unwrap());
    out.push(
        serde_json::to_string(
            &timeseries::fit_series(&synthetic_series(5), &SeriesOptions::default()).unwrap(),
        )
        .unwrap(),
    );
    let (xs, y) = sim::generate(&s, 3).unwrap();
    let mut cfg = s.search_config();
    cfg.penalty = Penalty::CrossValidation {
        grid: vec![10.0, 50.0, 200.0],
        folds: 4,
        seed: 9,
    };
    let m: SplineModel = search::select(&xs, &y, &cfg).unwrap();
    out.push(serde_json::to_string(&m).unwrap());
    out
}

// 10. Byte-identical results regardless of the worker count.
fn c10_determinism() -> Outcome {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut counts: Vec<usize> = vec![1, 2, 4, max];
    counts.sort_unstable();
    counts.dedup();
    let runs: Vec<Vec<String>> = counts
        .iter()
        .map(|&t| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .unwrap()
                .install(outputs_json)
        })
        .collect();
    let identical = runs.iter().all(|r| r == &runs[0]) && outputs_json() == runs[0];
    let bytes: usize = runs[0].iter().map(String::len).sum();
    Outcome {
        pass: identical,
        detail: format!(
            "simulation, demo, series and cross-validated fit JSON ({bytes} bytes) identical for threads {counts:?}; \
             CLI byte-identity is checked by the cli crate tests"
        ),
    }
}
