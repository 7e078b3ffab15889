// SPDX-License-Identifier: MIT OR Apache-2.0

//! Rank-revealing linear least squares.
//!
//! Columns are equilibrated to unit norm, factored with Householder QR and
//! column pivoting, and reduced to a complete orthogonal decomposition
//! `X D P = Q1 L W1'` with `L` lower triangular of size `rank`. The
//! decomposition is kept on the fit so leverages of new rows can be
//! computed for pointwise intervals.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::basis::DesignMatrix;
use crate::error::{Error, Result};

/// Pivots below this fraction of the largest pivot count as zero.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LsqFit {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub rss: f64,
    /// `n - rank`.
    pub dof: usize,
    /// `rss / dof`, or zero when `dof == 0`.
    pub sigma2_hat: f64,
    pub rank: usize,
    factor: Factor,
}

/// Pieces of the complete orthogonal decomposition needed for leverages.
#[derive(Debug, Clone)]
struct Factor {
    cols: usize,
    scale: Vec<f64>,
    perm: Vec<usize>,
    /// c x rank, row-major: W1 = first `rank` columns of W.
    w1: Vec<f64>,
    /// rank x rank lower triangular, row-major.
    lower: Vec<f64>,
}

/// Which band [`pointwise_interval`] returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Band {
    /// Uncertainty of the fitted mean.
    #[default]
    Confidence,
    /// Mean uncertainty plus one noise variance.
    Prediction,
}

pub fn solve(design: &DesignMatrix, y: &[f64]) -> Result<LsqFit> {
    let n = design.rows();
    let c = design.cols();
    if y.len() != n {
        return Err(Error::DimensionMismatch {
            what: "response length vs design rows",
            expected: n,
            found: y.len(),
        });
    }
    if n == 0 {
        return Err(Error::InsufficientData("empty design".into()));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "response",
            index: i,
        });
    }
    if let Some(i) = design.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            what: "design",
            index: i,
        });
    }

    // Column-major working copy, scaled to unit column norms.
    let mut a = vec![0.0; n * c];
    let mut scale = vec![1.0; c];
    for j in 0..c {
        let norm = (0..n).map(|i| design.get(i, j).powi(2)).sum::<f64>().sqrt();
        if norm > 0.0 {
            scale[j] = 1.0 / norm;
        }
        for i in 0..n {
            a[j * n + i] = design.get(i, j) * scale[j];
        }
    }

    let steps = n.min(c);
    let mut perm: Vec<usize> = (0..c).collect();
    let mut qty = y.to_vec();
    let mut first_pivot = 0.0;
    let mut rank = 0;
    let mut rdiag = Vec::with_capacity(steps);
    for k in 0..steps {
        // Bring the column with the largest trailing norm forward.
        let (best, best_norm) = (k..c)
            .map(|j| (j, sq_norm(&a[j * n + k..(j + 1) * n])))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        if best != k {
            for i in 0..n {
                a.swap(k * n + i, best * n + i);
            }
            perm.swap(k, best);
        }
        let norm = best_norm.sqrt();
        if k == 0 {
            first_pivot = norm;
        }
        if norm == 0.0 || norm <= RANK_TOLERANCE * first_pivot {
            break;
        }
        rank += 1;

        let (head, tail) = a.split_at_mut((k + 1) * n);
        let v = &mut head[k * n + k..(k + 1) * n];
        let (beta, alpha) = householder(v);
        for j in 0..c - k - 1 {
            apply_reflector(v, beta, &mut tail[j * n + k..(j + 1) * n]);
        }
        apply_reflector(v, beta, &mut qty[k..]);
        rdiag.push(alpha);
    }

    // R1 (rank x c, upper trapezoidal) in row-major form.
    let mut r1 = vec![0.0; rank * c];
    for i in 0..rank {
        for j in i..c {
            r1[i * c + j] = if i == j { rdiag[i] } else { a[j * n + i] };
        }
    }

    // Second factorization R1' = W S turns R1 into [L 0] W'.
    let (w, lower) = complete_orthogonal(&r1, rank, c);
    let mut w1 = vec![0.0; c * rank];
    for i in 0..c {
        w1[i * rank..(i + 1) * rank].copy_from_slice(&w[i * c..i * c + rank]);
    }

    // Minimum-norm solution in scaled, permuted coordinates.
    let z = forward_substitute(&lower, rank, &qty[..rank]);
    let mut beta_scaled = vec![0.0; c];
    for (j, slot) in beta_scaled.iter_mut().enumerate() {
        let bp: f64 = (0..rank).map(|l| w1[j * rank + l] * z[l]).sum();
        *slot = bp;
    }
    let mut coefficients = vec![0.0; c];
    for (j, &bp) in beta_scaled.iter().enumerate() {
        coefficients[perm[j]] = bp * scale[perm[j]];
    }
    if rank < c {
        coefficients = project_out_null_space(coefficients, &w, &perm, &scale, rank);
    }

    let fitted = design.mul_vec(&coefficients);
    let rss = y
        .iter()
        .zip(&fitted)
        .map(|(yi, fi)| (yi - fi).powi(2))
        .sum::<f64>();
    let dof = n - rank;
    let sigma2_hat = if dof > 0 { rss / dof as f64 } else { 0.0 };

    Ok(LsqFit {
        coefficients,
        fitted,
        rss,
        dof,
        sigma2_hat,
        rank,
        factor: Factor {
            cols: c,
            scale,
            perm,
            w1,
            lower,
        },
    })
}

impl LsqFit {
    /// Leverage `x' (X'X)^+ x` of an evaluation row under the fitted design.
    pub fn leverage(&self, row: &[f64]) -> Result<f64> {
        let f = &self.factor;
        if row.len() != f.cols {
            return Err(Error::DimensionMismatch {
                what: "evaluation row length",
                expected: f.cols,
                found: row.len(),
            });
        }
        let r = self.rank;
        let mut v = vec![0.0; r];
        for (j, &p) in f.perm.iter().enumerate() {
            let xj = row[p] * f.scale[p];
            if xj != 0.0 {
                for l in 0..r {
                    v[l] += f.w1[j * r + l] * xj;
                }
            }
        }
        // Solve L' u = v (L' is upper triangular).
        let mut u = vec![0.0; r];
        for i in (0..r).rev() {
            let mut s = v[i];
            for l in i + 1..r {
                s -= f.lower[l * r + i] * u[l];
            }
            u[i] = s / f.lower[i * r + i];
        }
        Ok(u.iter().map(|x| x * x).sum())
    }
}

/// Pointwise Gaussian interval half-widths `z * sqrt(sigma2_hat * h(x))`
/// at each row of `design_at_eval`. The band is conditional on the design
/// (no adjustment for knot selection).
pub fn pointwise_interval(
    fit: &LsqFit,
    design_at_eval: &DesignMatrix,
    level: f64,
    band: Band,
) -> Result<Vec<f64>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "interval level must lie in (0, 1), got {level}"
        )));
    }
    if fit.dof == 0 {
        return Err(Error::UndefinedVariance);
    }
    let z = normal_quantile(0.5 + level / 2.0);
    (0..design_at_eval.rows())
        .map(|i| {
            let h = fit.leverage(design_at_eval.row(i))?;
            let extra = match band {
                Band::Confidence => 0.0,
                Band::Prediction => 1.0,
            };
            Ok(z * (fit.sigma2_hat * (h + extra)).sqrt())
        })
        .collect()
}

pub fn normal_quantile(p: f64) -> f64 {
    Normal::new(0.0, 1.0)
        .expect("standard normal parameters are valid")
        .inverse_cdf(p)
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum()
}

/// Turns `v` into a Householder vector `u` with `(I - beta u u') v = (alpha, 0, ..)`
/// and returns `(beta, alpha)`.
fn householder(v: &mut [f64]) -> (f64, f64) {
    let norm = sq_norm(v).sqrt();
    let alpha = if v[0] > 0.0 { -norm } else { norm };
    v[0] -= alpha;
    let unorm2 = sq_norm(v);
    let beta = if unorm2 == 0.0 { 0.0 } else { 2.0 / unorm2 };
    (beta, alpha)
}

fn apply_reflector(u: &[f64], beta: f64, x: &mut [f64]) {
    if beta == 0.0 {
        return;
    }
    let dot: f64 = u.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    let s = beta * dot;
    for (xi, ui) in x.iter_mut().zip(u) {
        *xi -= s * ui;
    }
}

/// Factor `R1' (c x rank) = W S`; returns `W` (c x c, row-major) and
/// `L = S_top'` (rank x rank lower triangular, row-major).
fn complete_orthogonal(r1: &[f64], rank: usize, c: usize) -> (Vec<f64>, Vec<f64>) {
    // Column-major c x rank copy of R1'.
    let mut m = vec![0.0; c * rank];
    for i in 0..rank {
        for j in 0..c {
            m[i * c + j] = r1[i * c + j];
        }
    }
    let mut w = vec![0.0; c * c];
    for i in 0..c {
        w[i * c + i] = 1.0;
    }
    let mut reflectors: Vec<(Vec<f64>, f64, usize)> = Vec::with_capacity(rank);
    let mut diag = vec![0.0; rank];
    for k in 0..rank {
        let (head, tail) = m.split_at_mut((k + 1) * c);
        let col = &mut head[k * c + k..(k + 1) * c];
        let (beta, alpha) = householder(col);
        for j in 0..rank - k - 1 {
            apply_reflector(col, beta, &mut tail[j * c + k..(j + 1) * c]);
        }
        diag[k] = alpha;
        reflectors.push((col.to_vec(), beta, k));
    }
    // W = H_0 H_1 .. H_{rank-1}; accumulate by applying to identity rows.
    for (u, beta, k) in reflectors.iter().rev() {
        // W <- H_k W, acting on rows k..c of each column.
        for j in 0..c {
            let mut col: Vec<f64> = (*k..c).map(|i| w[i * c + j]).collect();
            apply_reflector(u, *beta, &mut col);
            for (off, i) in (*k..c).enumerate() {
                w[i * c + j] = col[off];
            }
        }
    }
    let mut lower = vec![0.0; rank * rank];
    for k in 0..rank {
        lower[k * rank + k] = diag[k];
        // S[k][j] for j > k sits at m column j, row k (column-major).
        for j in k + 1..rank {
            lower[j * rank + k] = m[j * c + k];
        }
    }
    (w, lower)
}

fn forward_substitute(lower: &[f64], r: usize, b: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; r];
    for i in 0..r {
        let mut s = b[i];
        for l in 0..i {
            s -= lower[i * r + l] * z[l];
        }
        z[i] = s / lower[i * r + i];
    }
    z
}

/// Remove the component of `beta` lying in the null space of the original
/// (unscaled) design so the result is the minimum Euclidean norm solution.
fn project_out_null_space(
    mut beta: Vec<f64>,
    w: &[f64],
    perm: &[usize],
    scale: &[f64],
    rank: usize,
) -> Vec<f64> {
    let c = beta.len();
    // Null space of X D P is spanned by W[:, rank..]; of X by D P W2.
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(c - rank);
    for l in rank..c {
        let mut v = vec![0.0; c];
        for j in 0..c {
            v[perm[j]] = w[j * c + l] * scale[perm[j]];
        }
        for _ in 0..2 {
            for q in &basis {
                let d: f64 = q.iter().zip(&v).map(|(a, b)| a * b).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= d * qi);
            }
        }
        let norm = sq_norm(&v).sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    for q in &basis {
        let d: f64 = q.iter().zip(&beta).map(|(a, b)| a * b).sum();
        beta.iter_mut().zip(q).for_each(|(bi, qi)| *bi -= d * qi);
    }
    beta
}
