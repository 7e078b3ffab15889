// SPDX-License-Identifier: MIT OR Apache-2.0

//! Joint selection of the number and position of knots.
//!
//! For each knot count `k` the best placement on the candidate grid is
//! found (exhaustively for `k <= 2` or when few placements are feasible,
//! by a seeded exchange heuristic otherwise), and the count minimizing `rss + lambda (k + 1)` wins. Ties go
//! to fewer knots, then to the lexicographically smallest knot vector.
//!
//! For truncated power and B-spline bases the residual sum of squares of a
//! candidate is first screened through a projection onto precomputed knot
//! columns; every candidate that could be the winner is then refitted with
//! [`lsq::solve`], so reported values are exactly those of a direct fit.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{self, BasisFamily, BasisSpec, Domain, KnotConfig};
use crate::criterion::{self, Penalty};
use crate::error::{Error, Result};
use crate::lsq::{self, LsqFit};

/// Where knots may be placed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CandidateGrid {
    /// The distinct observed x values.
    #[default]
    Observed,
    /// `a + j * resolution` for `j = 1, 2, ..`.
    Uniform {
        resolution: f64,
    },
    Points {
        points: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Minimum spacing between consecutive knots, the domain bounds included.
    pub delta: f64,
    pub k_max: usize,
    pub grid: CandidateGrid,
    pub penalty: Penalty,
    pub basis: BasisSpec,
    /// Fraction of the domain, from the left, where knots are not allowed.
    pub exclude_left_frac: f64,
    /// Stop after this many consecutive knot counts without improvement.
    pub patience: usize,
}

impl SearchConfig {
    pub const DEFAULT_K_MAX: usize = 10;
    pub const DEFAULT_PATIENCE: usize = 2;

    pub fn new(basis: BasisSpec, delta: f64) -> Self {
        Self {
            delta,
            k_max: Self::DEFAULT_K_MAX,
            grid: CandidateGrid::Observed,
            penalty: Penalty::default(),
            basis,
            exclude_left_frac: 0.0,
            patience: Self::DEFAULT_PATIENCE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "delta must be positive, got {}",
                self.delta
            )));
        }
        if self.patience == 0 {
            return Err(Error::InvalidArgument("patience must be at least 1".into()));
        }
        if !(0.0..1.0).contains(&self.exclude_left_frac) {
            return Err(Error::InvalidArgument(format!(
                "exclude_left_frac must lie in [0, 1), got {}",
                self.exclude_left_frac
            )));
        }
        if let CandidateGrid::Uniform { resolution } = self.grid {
            if !(resolution.is_finite() && resolution > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "grid resolution must be positive, got {resolution}"
                )));
            }
        }
        self.basis.validate()?;
        self.penalty.validate()
    }
}

/// A fitted spline with its selection criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplineModel {
    pub basis: BasisSpec,
    pub knots: KnotConfig,
    pub coefficients: Vec<f64>,
    pub rss: f64,
    pub pss: f64,
    pub lambda_used: f64,
}

impl SplineModel {
    pub fn k(&self) -> usize {
        self.knots.len()
    }

    /// Evaluates the spline, extrapolating beyond the domain.
    pub fn predict(&self, x: f64) -> f64 {
        basis::basis_row_extrapolated(x, self.basis, &self.knots)
            .map(|row| row.iter().zip(&self.coefficients).map(|(a, b)| a * b).sum())
            .unwrap_or(f64::NAN)
    }

    pub fn predict_many(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.predict(x)).collect()
    }
}

/// Best fit found for one knot count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KStep {
    pub k: usize,
    pub knots: Vec<f64>,
    pub rss: f64,
    pub pss: f64,
}

/// Selected model plus the least-squares fit behind it and the per-count
/// search trace.
#[derive(Debug, Clone)]
pub struct Selection {
    pub model: SplineModel,
    pub fit: LsqFit,
    pub trace: Vec<KStep>,
    pub grid: Vec<f64>,
    /// Sorted abscissae the model was fitted on.
    pub xs: Vec<f64>,
    /// Responses matching `xs`.
    pub y: Vec<f64>,
}

pub fn select(xs: &[f64], y: &[f64], cfg: &SearchConfig) -> Result<SplineModel> {
    select_detailed(xs, y, cfg).map(|s| s.model)
}

pub fn select_detailed(xs: &[f64], y: &[f64], cfg: &SearchConfig) -> Result<Selection> {
    let (sx, _) = sorted_pairs(xs, y)?;
    let domain = Domain::new(sx[0], sx[sx.len() - 1])
        .map_err(|_| Error::DegenerateData("x values are constant; the domain is empty".into()))?;
    select_in_domain(xs, y, cfg, domain)
}

/// [`select_detailed`] on an explicit domain, which must contain every x.
pub fn select_in_domain(
    xs: &[f64],
    y: &[f64],
    cfg: &SearchConfig,
    domain: Domain,
) -> Result<Selection> {
    cfg.validate()?;
    let (sx, sy) = sorted_pairs(xs, y)?;
    let lambda = resolve_lambda(&sx, &sy, cfg)?;
    let problem = Problem::new(sx, sy, cfg, domain, lambda)?;
    problem.select()
}

/// Best placement of exactly `k` knots. For `k >= 3` the heuristic is
/// seeded by the chain of best placements for `0..k`.
pub fn best_for_k(xs: &[f64], y: &[f64], k: usize, cfg: &SearchConfig) -> Result<SplineModel> {
    cfg.validate()?;
    if k > cfg.k_max {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds k_max = {}",
            cfg.k_max
        )));
    }
    let (sx, sy) = sorted_pairs(xs, y)?;
    let domain = Domain::new(sx[0], sx[sx.len() - 1])
        .map_err(|_| Error::DegenerateData("x values are constant; the domain is empty".into()))?;
    let lambda = resolve_lambda(&sx, &sy, cfg)?;
    let problem = Problem::new(sx, sy, cfg, domain, lambda)?;
    let mut prev: Option<Placement> = None;
    for j in 0..=k {
        let placement = problem
            .best_for_k(j, prev.as_ref())?
            .ok_or(Error::Infeasible {
                k: j,
                delta: cfg.delta,
            })?;
        prev = Some(placement);
    }
    let placement = prev.expect("loop runs at least once");
    Ok(problem.model(&placement)?.0)
}

/// Resolves the configured penalty policy to a weight.
pub fn resolve_lambda(xs: &[f64], y: &[f64], cfg: &SearchConfig) -> Result<f64> {
    match &cfg.penalty {
        Penalty::Fixed { lambda } => Ok(*lambda),
        Penalty::VarianceScaledLog => criterion::default_lambda(y, xs),
        Penalty::CrossValidation { grid, folds, seed } => {
            criterion::cv_lambda(xs, y, cfg, grid, *folds, *seed)
        }
    }
}

/// Candidate positions left after applying the domain, exclusion and
/// boundary-spacing rules.
pub fn candidate_positions(xs: &[f64], domain: Domain, cfg: &SearchConfig) -> Vec<f64> {
    let (a, b) = (domain.lower(), domain.upper());
    let mut grid: Vec<f64> = match &cfg.grid {
        CandidateGrid::Observed => xs.to_vec(),
        CandidateGrid::Uniform { resolution } => {
            let steps = (domain.width() / resolution).ceil() as usize;
            (1..=steps).map(|j| a + j as f64 * resolution).collect()
        }
        CandidateGrid::Points { points } => points.clone(),
    };
    let cutoff = a + cfg.exclude_left_frac * domain.width();
    grid.retain(|&t| t.is_finite() && t >= cutoff && t - a > cfg.delta && b - t > cfg.delta);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

fn sorted_pairs(xs: &[f64], y: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if xs.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "x and y lengths",
            expected: xs.len(),
            found: y.len(),
        });
    }
    if xs.is_empty() {
        return Err(Error::InsufficientData("no observations".into()));
    }
    for (what, v) in [("x", xs), ("y", y)] {
        if let Some(index) = v.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite { what, index });
        }
    }
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
    let sx: Vec<f64> = order.iter().map(|&i| xs[i]).collect();
    let sy: Vec<f64> = order.iter().map(|&i| y[i]).collect();
    if let Some(w) = sx.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::DegenerateData(format!(
            "x values must be distinct; {} appears more than once",
            w[0]
        )));
    }
    Ok((sx, sy))
}

/// Knots as increasing indices into the candidate grid, with the residual
/// sum of squares of the exact fit.
#[derive(Debug, Clone)]
struct Placement {
    idx: Vec<usize>,
    rss: f64,
}

/// Knot counts of three or more are enumerated outright when they have at
/// most this many feasible placements.
const EXHAUSTIVE_BUDGET: u64 = 2048;

struct Problem<'c> {
    xs: Vec<f64>,
    y: Vec<f64>,
    cfg: &'c SearchConfig,
    domain: Domain,
    lambda: f64,
    grid: Vec<f64>,
    projected: Option<Projected>,
}

impl<'c> Problem<'c> {
    fn new(
        xs: Vec<f64>,
        y: Vec<f64>,
        cfg: &'c SearchConfig,
        domain: Domain,
        lambda: f64,
    ) -> Result<Self> {
        if let Some(&x) = xs.iter().find(|&&x| !domain.contains(x)) {
            return Err(Error::OutsideDomain {
                x,
                a: domain.lower(),
                b: domain.upper(),
            });
        }
        let dim0 = cfg.basis.effective_for(0).dimension(0)?;
        if xs.len() <= dim0 {
            return Err(Error::InsufficientData(format!(
                "{} observations cannot support a basis of dimension {dim0}",
                xs.len()
            )));
        }
        let grid = candidate_positions(&xs, domain, cfg);
        let projected = match cfg.basis.family {
            BasisFamily::TruncatedPower | BasisFamily::BSpline if !grid.is_empty() => {
                Some(Projected::new(&xs, &y, domain, cfg.basis.degree, &grid))
            }
            _ => None,
        };
        Ok(Self {
            xs,
            y,
            cfg,
            domain,
            lambda,
            grid,
            projected,
        })
    }

    fn select(&self) -> Result<Selection> {
        let mut trace = Vec::new();
        let mut best: Option<(Placement, f64)> = None;
        let mut prev: Option<Placement> = None;
        let mut stale = 0;
        for k in 0..=self.cfg.k_max {
            let Some(placement) = self.best_for_k(k, prev.as_ref())? else {
                break;
            };
            let pss = criterion::pss(placement.rss, k, self.lambda);
            trace.push(KStep {
                k,
                knots: self.values(&placement.idx),
                rss: placement.rss,
                pss,
            });
            match &best {
                Some((_, best_pss)) if pss >= *best_pss => {
                    stale += 1;
                }
                _ => {
                    best = Some((placement.clone(), pss));
                    stale = 0;
                }
            }
            prev = Some(placement);
            if stale >= self.cfg.patience {
                break;
            }
        }
        let (placement, _) = best.expect("k = 0 is always feasible");
        let (model, fit) = self.model(&placement)?;
        Ok(Selection {
            model,
            fit,
            trace,
            grid: self.grid.clone(),
            xs: self.xs.clone(),
            y: self.y.clone(),
        })
    }

    fn values(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().map(|&i| self.grid[i]).collect()
    }

    fn knot_config(&self, idx: &[usize]) -> Result<KnotConfig> {
        KnotConfig::new(self.values(idx), self.domain)
    }

    fn exact_fit(&self, idx: &[usize]) -> Result<LsqFit> {
        let kc = self.knot_config(idx)?;
        let spec = self.cfg.basis.effective_for(idx.len());
        let design = basis::design_matrix(&self.xs, spec, &kc)?;
        lsq::solve(&design, &self.y)
    }

    fn model(&self, placement: &Placement) -> Result<(SplineModel, LsqFit)> {
        let fit = self.exact_fit(&placement.idx)?;
        let k = placement.idx.len();
        let model = SplineModel {
            basis: self.cfg.basis.effective_for(k),
            knots: self.knot_config(&placement.idx)?,
            coefficients: fit.coefficients.clone(),
            rss: fit.rss,
            pss: criterion::pss(fit.rss, k, self.lambda),
            lambda_used: self.lambda,
        };
        Ok((model, fit))
    }

    /// Cheap residual sum of squares used to rank candidates.
    fn screen(&self, idx: &[usize]) -> Result<f64> {
        if let Some(p) = &self.projected {
            if let Some(rss) = p.rss(idx) {
                return Ok(rss);
            }
        }
        Ok(self.exact_fit(idx)?.rss)
    }

    /// Largest screening error that could reorder candidates.
    fn screen_band(&self, best: f64) -> f64 {
        match &self.projected {
            Some(p) => 1e-7 * best.abs() + 1e-9 * p.base,
            None => 0.0,
        }
    }

    fn gap_ok(&self, lo: usize, hi: usize) -> bool {
        self.grid[hi] - self.grid[lo] > self.cfg.delta
    }

    /// Leftmost greedy placement; exists iff any feasible placement does.
    fn greedy_leftmost(&self, k: usize) -> Option<Vec<usize>> {
        let mut idx: Vec<usize> = Vec::with_capacity(k);
        for (i, _) in self.grid.iter().enumerate() {
            if idx.len() == k {
                break;
            }
            if idx.last().map_or(true, |&last| self.gap_ok(last, i)) {
                idx.push(i);
            }
        }
        (idx.len() == k).then_some(idx)
    }

    fn best_for_k(&self, k: usize, prev: Option<&Placement>) -> Result<Option<Placement>> {
        if k == 0 {
            let rss = self.exact_fit(&[])?.rss;
            return Ok(Some(Placement {
                idx: Vec::new(),
                rss,
            }));
        }
        if self.greedy_leftmost(k).is_none() {
            return Ok(None);
        }
        if k <= 2 {
            self.exhaustive(k).map(Some)
        } else if self.placement_count(k) <= EXHAUSTIVE_BUDGET {
            self.enumerate(k).map(Some)
        } else {
            self.exchange(k, prev).map(Some)
        }
    }

    fn exhaustive(&self, k: usize) -> Result<Placement> {
        let g = self.grid.len();
        let screened: Vec<(f64, Vec<usize>)> = if k == 1 {
            (0..g)
                .into_par_iter()
                .map(|i| Ok((self.screen(&[i])?, vec![i])))
                .collect::<Result<_>>()?
        } else {
            let per_first: Vec<Vec<(f64, Vec<usize>)>> = (0..g)
                .into_par_iter()
                .map(|i| {
                    (i + 1..g)
                        .filter(|&j| self.gap_ok(i, j))
                        .map(|j| Ok((self.screen(&[i, j])?, vec![i, j])))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?;
            per_first.into_iter().flatten().collect()
        };
        self.certify(screened)
    }

    /// Number of feasible placements of `k` knots, saturating.
    fn placement_count(&self, k: usize) -> u64 {
        let g = self.grid.len();
        // First index far enough to the right of each index.
        let next: Vec<usize> = (0..g)
            .map(|i| (i + 1..g).find(|&j| self.gap_ok(i, j)).unwrap_or(g))
            .collect();
        // ways[i]: placements of the knots still to place using indices >= i.
        let mut ways = vec![1u64; g + 1];
        for _ in 0..k {
            let mut fewer = vec![0u64; g + 1];
            for i in (0..g).rev() {
                fewer[i] = fewer[i + 1].saturating_add(ways[next[i]]);
            }
            ways = fewer;
        }
        ways[0]
    }

    /// Every feasible placement of `k` knots, screened and certified.
    fn enumerate(&self, k: usize) -> Result<Placement> {
        fn extend(p: &Problem<'_>, k: usize, idx: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if idx.len() == k {
                out.push(idx.clone());
                return;
            }
            let from = idx.last().map_or(0, |&l| l + 1);
            for i in from..p.grid.len() {
                if idx.last().map_or(true, |&l| p.gap_ok(l, i)) {
                    idx.push(i);
                    extend(p, k, idx, out);
                    idx.pop();
                }
            }
        }
        let mut all = Vec::new();
        extend(self, k, &mut Vec::with_capacity(k), &mut all);
        let screened = all
            .into_par_iter()
            .map(|idx| Ok((self.screen(&idx)?, idx)))
            .collect::<Result<Vec<_>>>()?;
        self.certify(screened)
    }

    /// Refit every candidate within screening error of the best and return
    /// the exact minimizer (ties to the lexicographically smaller vector).
    fn certify(&self, screened: Vec<(f64, Vec<usize>)>) -> Result<Placement> {
        let best = screened
            .iter()
            .map(|(s, _)| *s)
            .fold(f64::INFINITY, f64::min);
        let limit = best + self.screen_band(best);
        let finalists: Vec<Vec<usize>> = screened
            .into_iter()
            .filter(|(s, _)| *s <= limit)
            .map(|(_, idx)| idx)
            .collect();
        let exact: Vec<Placement> = finalists
            .into_par_iter()
            .map(|idx| {
                let rss = self.exact_fit(&idx)?.rss;
                Ok(Placement { idx, rss })
            })
            .collect::<Result<_>>()?;
        Ok(exact
            .into_iter()
            .min_by(placement_order)
            .expect("at least one finalist"))
    }

    /// Seeded exchange heuristic for `k >= 3`. Descents start from the
    /// previous optimum with the best extra knot inserted, from a placement
    /// spread evenly over the grid and from the leftmost greedy placement;
    /// the best end point wins.
    fn exchange(&self, k: usize, prev: Option<&Placement>) -> Result<Placement> {
        let mut seeds: Vec<Vec<usize>> = Vec::new();
        if let Some(p) = prev.filter(|p| p.idx.len() + 1 == k) {
            seeds.extend(self.best_insertion(&p.idx)?);
        }
        seeds.extend(self.spread(k));
        seeds.extend(self.greedy_leftmost(k));
        seeds.dedup();

        let mut best: Option<(f64, Vec<usize>)> = None;
        for seed in seeds {
            let found = self.descend(seed)?;
            if best.as_ref().map_or(true, |b| {
                found.0.total_cmp(&b.0).then_with(|| found.1.cmp(&b.1)) == Ordering::Less
            }) {
                best = Some(found);
            }
        }
        let (_, idx) = best.expect("feasibility checked by the caller");
        let rss = self.exact_fit(&idx)?.rss;
        Ok(Placement { idx, rss })
    }

    /// Moves one knot at a time to its best feasible grid position until no
    /// move helps. Single moves stall when two neighbouring knots are both
    /// misplaced, so each converged state is also offered joint moves of
    /// adjacent pairs within the window between their neighbours, then
    /// relocation of any one knot anywhere on the grid; any improvement
    /// restarts the single moves.
    fn descend(&self, mut idx: Vec<usize>) -> Result<(f64, Vec<usize>)> {
        let k = idx.len();
        let mut current = self.screen(&idx)?;
        const MAX_SWEEPS: usize = 200;
        for _ in 0..MAX_SWEEPS {
            let mut moved = false;
            for i in 0..k {
                let lo = if i == 0 { 0 } else { idx[i - 1] + 1 };
                let hi = if i + 1 == k {
                    self.grid.len()
                } else {
                    idx[i + 1]
                };
                let trials: Vec<Vec<usize>> = (lo..hi)
                    .filter(|&j| j != idx[i])
                    .map(|j| {
                        let mut t = idx.clone();
                        t[i] = j;
                        t
                    })
                    .filter(|t| self.feasible_around(t, i, i))
                    .collect();
                moved |= self.take_best(trials, &mut idx, &mut current)?;
            }
            if moved {
                continue;
            }
            for i in 0..k - 1 {
                let lo = if i == 0 { 0 } else { idx[i - 1] + 1 };
                let hi = if i + 2 == k {
                    self.grid.len()
                } else {
                    idx[i + 2]
                };
                let trials: Vec<Vec<usize>> = (lo..hi)
                    .flat_map(|a| (a + 1..hi).map(move |b| (a, b)))
                    .filter(|&(a, b)| (a, b) != (idx[i], idx[i + 1]) && self.gap_ok(a, b))
                    .map(|(a, b)| {
                        let mut t = idx.clone();
                        t[i] = a;
                        t[i + 1] = b;
                        t
                    })
                    .filter(|t| self.feasible_around(t, i, i + 1))
                    .collect();
                moved |= self.take_best(trials, &mut idx, &mut current)?;
            }
            if moved {
                continue;
            }
            for i in 0..k {
                let rest: Vec<usize> = idx
                    .iter()
                    .enumerate()
                    .filter(|&(r, _)| r != i)
                    .map(|(_, &v)| v)
                    .collect();
                let trials: Vec<Vec<usize>> = (0..self.grid.len())
                    .filter(|j| !rest.contains(j))
                    .map(|j| {
                        let mut t = rest.clone();
                        let at = t.partition_point(|&v| v < j);
                        t.insert(at, j);
                        t
                    })
                    .filter(|t| *t != idx && t.windows(2).all(|w| self.gap_ok(w[0], w[1])))
                    .collect();
                moved |= self.take_best(trials, &mut idx, &mut current)?;
            }
            if !moved {
                break;
            }
        }
        Ok((current, idx))
    }

    /// First feasible grid points at or after `k` evenly spaced targets.
    fn spread(&self, k: usize) -> Option<Vec<usize>> {
        let (first, last) = (self.grid[0], self.grid[self.grid.len() - 1]);
        let mut idx: Vec<usize> = Vec::with_capacity(k);
        let mut from = 0;
        for j in 0..k {
            let target = first + (last - first) * j as f64 / (k - 1).max(1) as f64;
            let i = (from..self.grid.len()).find(|&i| {
                self.grid[i] >= target && idx.last().map_or(true, |&l| self.gap_ok(l, i))
            })?;
            idx.push(i);
            from = i + 1;
        }
        Some(idx)
    }

    /// Spacing of the knots `first..=last` of `t` against their neighbours.
    fn feasible_around(&self, t: &[usize], first: usize, last: usize) -> bool {
        (first == 0 || self.gap_ok(t[first - 1], t[first]))
            && (last + 1 == t.len() || self.gap_ok(t[last], t[last + 1]))
    }

    /// Adopts the best trial if it improves `current` by more than
    /// `1e-12` relative.
    fn take_best(
        &self,
        trials: Vec<Vec<usize>>,
        idx: &mut Vec<usize>,
        current: &mut f64,
    ) -> Result<bool> {
        let best = trials
            .into_par_iter()
            .map(|t| Ok((self.screen(&t)?, t)))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
        match best {
            Some((value, t)) if value < *current - 1e-12 * current.abs() => {
                *idx = t;
                *current = value;
                Ok(true)
            }
            _ => Ok(false),
        }
    }

    fn best_insertion(&self, base: &[usize]) -> Result<Option<Vec<usize>>> {
        let options: Vec<usize> = (0..self.grid.len())
            .filter(|&j| {
                base.iter().all(|&b| {
                    let (lo, hi) = if b < j { (b, j) } else { (j, b) };
                    b != j && self.gap_ok(lo, hi)
                })
            })
            .collect();
        let scored = options
            .into_par_iter()
            .map(|j| {
                let mut trial = base.to_vec();
                let at = trial.partition_point(|&b| b < j);
                trial.insert(at, j);
                Ok((self.screen(&trial)?, trial))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(scored
            .into_iter()
            .min_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
            .map(|(_, idx)| idx))
    }
}

fn placement_order(a: &Placement, b: &Placement) -> Ordering {
    a.rss.total_cmp(&b.rss).then_with(|| a.idx.cmp(&b.idx))
}

/// Residual sums of squares through projection: the polynomial part is
/// fixed, so each candidate knot contributes one column that can be
/// orthogonalized against it once. A candidate set then only needs a
/// `k x k` Gram solve.
struct Projected {
    /// Residual sum of squares of the polynomial-only fit.
    base: f64,
    /// Knot columns with the polynomial part projected out.
    columns: Vec<Vec<f64>>,
    norms: Vec<f64>,
    /// Inner products of each column with the polynomial residual.
    scores: Vec<f64>,
}

impl Projected {
    fn new(xs: &[f64], y: &[f64], domain: Domain, degree: usize, grid: &[f64]) -> Self {
        let center = 0.5 * (domain.lower() + domain.upper());
        let half = 0.5 * domain.width();
        let u: Vec<f64> = xs.iter().map(|&x| (x - center) / half).collect();
        let mut q: Vec<Vec<f64>> = Vec::with_capacity(degree + 1);
        for p in 0..=degree {
            let mut col: Vec<f64> = u.iter().map(|&v| v.powi(p as i32)).collect();
            orthogonalize(&mut col, &q);
            let norm = dot(&col, &col).sqrt();
            if norm > 0.0 {
                col.iter_mut().for_each(|v| *v /= norm);
                q.push(col);
            }
        }
        let mut resid = y.to_vec();
        orthogonalize(&mut resid, &q);
        let base = dot(&resid, &resid);

        let columns: Vec<Vec<f64>> = grid
            .par_iter()
            .map(|&t| {
                let ut = (t - center) / half;
                let mut col: Vec<f64> =
                    u.iter().map(|&v| basis::plus_pow(v - ut, degree)).collect();
                orthogonalize(&mut col, &q);
                col
            })
            .collect();
        let norms = columns.iter().map(|c| dot(c, c)).collect();
        let scores = columns.iter().map(|c| dot(c, &resid)).collect();
        Self {
            base,
            columns,
            norms,
            scores,
        }
    }

    /// `None` when the Gram matrix is numerically singular.
    fn rss(&self, idx: &[usize]) -> Option<f64> {
        let k = idx.len();
        let mut gram = vec![0.0; k * k];
        let mut max_diag: f64 = 0.0;
        for a in 0..k {
            gram[a * k + a] = self.norms[idx[a]];
            max_diag = max_diag.max(gram[a * k + a]);
            for b in 0..a {
                let v = dot(&self.columns[idx[a]], &self.columns[idx[b]]);
                gram[a * k + b] = v;
                gram[b * k + a] = v;
            }
        }
        // Cholesky in place (lower triangle).
        for j in 0..k {
            let mut d = gram[j * k + j];
            for l in 0..j {
                d -= gram[j * k + l].powi(2);
            }
            if !(d > 1e-12 * max_diag) {
                return None;
            }
            let d = d.sqrt();
            gram[j * k + j] = d;
            for i in j + 1..k {
                let mut s = gram[i * k + j];
                for l in 0..j {
                    s -= gram[i * k + l] * gram[j * k + l];
                }
                gram[i * k + j] = s / d;
            }
        }
        let mut w = vec![0.0; k];
        let mut explained = 0.0;
        for i in 0..k {
            let mut s = self.scores[idx[i]];
            for l in 0..i {
                s -= gram[i * k + l] * w[l];
            }
            w[i] = s / gram[i * k + i];
            explained += w[i] * w[i];
        }
        Some((self.base - explained).max(0.0))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Two passes of modified Gram-Schmidt against an orthonormal set.
fn orthogonalize(v: &mut [f64], q: &[Vec<f64>]) {
    for _ in 0..2 {
        for qc in q {
            let d = dot(qc, v);
            v.iter_mut().zip(qc).for_each(|(vi, qi)| *vi -= d * qi);
        }
    }
}
