// SPDX-License-Identifier: MIT OR Apache-2.0

//! Penalized sum of squares and the policies that choose its weight.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::Domain;
use crate::error::{Error, Result};
use crate::search::{self, SearchConfig};

/// How the penalty weight lambda is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum Penalty {
    Fixed {
        lambda: f64,
    },
    /// `2 * sigma_tilde^2 * ln(n)` with a first-difference variance estimate.
    #[default]
    VarianceScaledLog,
    /// K-fold cross-validation over a grid of candidate weights.
    CrossValidation {
        grid: Vec<f64>,
        folds: usize,
        seed: u64,
    },
}

impl Penalty {
    pub fn validate(&self) -> Result<()> {
        match self {
            Penalty::Fixed { lambda } if !(lambda.is_finite() && *lambda > 0.0) => Err(
                Error::InvalidArgument(format!("fixed lambda must be positive, got {lambda}")),
            ),
            Penalty::CrossValidation { folds, .. } if *folds < 2 => Err(Error::InvalidArgument(
                format!("cross-validation needs at least 2 folds, got {folds}"),
            )),
            Penalty::CrossValidation { grid, .. }
                if grid.is_empty() || grid.iter().any(|l| !(l.is_finite() && *l > 0.0)) =>
            {
                Err(Error::InvalidArgument(
                    "cross-validation grid must be nonempty with positive entries".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// `rss + lambda * (k + 1)`.
pub fn pss(rss: f64, k: usize, lambda: f64) -> f64 {
    debug_assert!(rss >= 0.0 && lambda > 0.0);
    rss + lambda * (k as f64 + 1.0)
}

/// First-difference noise variance `sum (y_{i+1} - y_i)^2 / (2 (n - 1))`
/// of `y` ordered by `xs`.
pub fn difference_variance(y: &[f64], xs: &[f64]) -> Result<f64> {
    check_pairs(y, xs)?;
    let n = y.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "variance estimate needs at least 2 points, got {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let ss: f64 = order.windows(2).map(|w| (y[w[1]] - y[w[0]]).powi(2)).sum();
    Ok(ss / (2.0 * (n - 1) as f64))
}

/// Smallest lambda handed out by [`default_lambda`]; keeps the criterion
/// well posed when the data carry no noise.
pub fn lambda_floor(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    1e-8 * var + 1e-12
}

/// `2 * sigma_tilde^2 * ln(n)`, floored by [`lambda_floor`].
pub fn default_lambda(y: &[f64], xs: &[f64]) -> Result<f64> {
    check_pairs(y, xs)?;
    if y.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "default lambda needs at least 3 points, got {}",
            y.len()
        )));
    }
    let sigma2 = difference_variance(y, xs)?;
    let lambda = 2.0 * sigma2 * (y.len() as f64).ln();
    Ok(lambda.max(lambda_floor(y)))
}

fn check_pairs(y: &[f64], xs: &[f64]) -> Result<()> {
    if y.len() != xs.len() {
        return Err(Error::DimensionMismatch {
            what: "x and y lengths",
            expected: xs.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Out-of-fold mean squared prediction error for every grid weight.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvScore {
    pub lambda: f64,
    pub mse: f64,
}

/// Picks the grid weight with the lowest out-of-fold squared error when the
/// whole knot search is rerun on each training split. Ties go to the larger
/// weight.
pub fn cv_lambda(
    xs: &[f64],
    y: &[f64],
    cfg: &SearchConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<f64> {
    let scores = cv_scores(xs, y, cfg, grid, folds, seed)?;
    let mut best = &scores[0];
    for s in &scores[1..] {
        if s.mse < best.mse || (s.mse == best.mse && s.lambda > best.lambda) {
            best = s;
        }
    }
    Ok(best.lambda)
}

pub fn cv_scores(
    xs: &[f64],
    y: &[f64],
    cfg: &SearchConfig,
    grid: &[f64],
    folds: usize,
    seed: u64,
) -> Result<Vec<CvScore>> {
    check_pairs(y, xs)?;
    Penalty::CrossValidation {
        grid: grid.to_vec(),
        folds,
        seed,
    }
    .validate()?;
    let n = xs.len();
    if n < folds {
        return Err(Error::InsufficientData(format!(
            "{n} points cannot be split into {folds} folds"
        )));
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    let domain = Domain::new(lo, hi).map_err(|_| {
        Error::DegenerateData("cross-validation needs at least two distinct x values".into())
    })?;

    let assignment = fold_assignment(n, folds, seed);
    let needed = cfg.basis.effective_for(0).dimension(0)?;
    let splits: Vec<(Vec<usize>, Vec<usize>)> = (0..folds)
        .map(|f| {
            let (held, train): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| assignment[i] == f);
            (train, held)
        })
        .collect();
    for (fold, (train, _)) in splits.iter().enumerate() {
        if train.len() < needed {
            return Err(Error::FoldTooSmall {
                fold,
                points: train.len(),
                needed,
            });
        }
    }

    let jobs: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|g| (0..folds).map(move |f| (g, f)))
        .collect();
    let errors: Vec<Result<f64>> = jobs
        .par_iter()
        .map(|&(g, f)| {
            let (train, held) = &splits[f];
            let tx: Vec<f64> = train.iter().map(|&i| xs[i]).collect();
            let ty: Vec<f64> = train.iter().map(|&i| y[i]).collect();
            let mut fold_cfg = cfg.clone();
            fold_cfg.penalty = Penalty::Fixed { lambda: grid[g] };
            let model = search::select_in_domain(&tx, &ty, &fold_cfg, domain)?.model;
            Ok(held
                .iter()
                .map(|&i| (y[i] - model.predict(xs[i])).powi(2))
                .sum())
        })
        .collect();

    let mut scores = Vec::with_capacity(grid.len());
    for (g, &lambda) in grid.iter().enumerate() {
        let mut sse = 0.0;
        for f in 0..folds {
            sse += errors[g * folds + f].clone()?;
        }
        scores.push(CvScore {
            lambda,
            mse: sse / n as f64,
        });
    }
    Ok(scores)
}

/// Deterministic balanced fold labels for `n` points.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut labels = vec![0; n];
    for (pos, &i) in order.iter().enumerate() {
        labels[i] = pos % folds;
    }
    labels
}
