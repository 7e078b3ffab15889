// SPDX-License-Identifier: MIT OR Apache-2.0

//! Spline basis evaluation.
//!
//! Three families are supported, all parameterised by a [`KnotConfig`]
//! (interior knots inside a closed [`Domain`]):
//!
//! * truncated power: `1, x, .., x^p, (x - t_1)_+^p, .., (x - t_K)_+^p`
//! * clamped B-splines of order `m = p + 1` evaluated with the Cox-de Boor
//!   recursion on the knot vector with `a` and `b` repeated `m` times
//! * natural cubic splines, linear to the left of `t_1` and to the right of
//!   `t_K`, built from the cubic truncated power basis
//!
//! Row functions reject points outside the domain. The `*_extrapolated`
//! variants continue the boundary polynomial pieces instead.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDomain")]
pub struct Domain {
    a: f64,
    b: f64,
}

#[derive(Deserialize)]
struct RawDomain {
    a: f64,
    b: f64,
}

impl TryFrom<RawDomain> for Domain {
    type Error = Error;

    fn try_from(raw: RawDomain) -> Result<Self> {
        Domain::new(raw.a, raw.b)
    }
}

impl Domain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidDomain { a, b });
        }
        Ok(Self { a, b })
    }

    pub fn lower(&self) -> f64 {
        self.a
    }

    pub fn upper(&self) -> f64 {
        self.b
    }

    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a && x <= self.b
    }

    fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutsideDomain {
                x,
                a: self.a,
                b: self.b,
            })
        }
    }
}

/// Interior knots `t_1 < .. < t_K`, all strictly inside the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKnotConfig")]
pub struct KnotConfig {
    knots: Vec<f64>,
    domain: Domain,
}

#[derive(Deserialize)]
struct RawKnotConfig {
    knots: Vec<f64>,
    domain: Domain,
}

impl TryFrom<RawKnotConfig> for KnotConfig {
    type Error = Error;

    fn try_from(raw: RawKnotConfig) -> Result<Self> {
        KnotConfig::new(raw.knots, raw.domain)
    }
}

impl KnotConfig {
    pub fn new(knots: Vec<f64>, domain: Domain) -> Result<Self> {
        for (i, &t) in knots.iter().enumerate() {
            if !t.is_finite() || (i > 0 && t <= knots[i - 1]) {
                return Err(Error::KnotsNotIncreasing { index: i });
            }
            if t <= domain.a || t >= domain.b {
                return Err(Error::KnotOutsideDomain {
                    value: t,
                    a: domain.a,
                    b: domain.b,
                });
            }
        }
        Ok(Self { knots, domain })
    }

    pub fn empty(domain: Domain) -> Self {
        Self {
            knots: Vec::new(),
            domain,
        }
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// Smallest gap between consecutive knots, counting the domain bounds
    /// as `t_0` and `t_{K+1}`.
    pub fn min_spacing(&self) -> f64 {
        let mut prev = self.domain.a;
        let mut gap = f64::INFINITY;
        for &t in self.knots.iter().chain(std::iter::once(&self.domain.b)) {
            gap = gap.min(t - prev);
            prev = t;
        }
        gap
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisFamily {
    TruncatedPower,
    BSpline,
    NaturalCubic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisSpec {
    pub family: BasisFamily,
    pub degree: usize,
}

impl BasisSpec {
    pub fn truncated_power(degree: usize) -> Self {
        Self {
            family: BasisFamily::TruncatedPower,
            degree,
        }
    }

    pub fn bspline(degree: usize) -> Self {
        Self {
            family: BasisFamily::BSpline,
            degree,
        }
    }

    pub fn natural_cubic() -> Self {
        Self {
            family: BasisFamily::NaturalCubic,
            degree: 3,
        }
    }

    /// Spline order `m = p + 1`.
    pub fn order(&self) -> usize {
        self.degree + 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == BasisFamily::NaturalCubic && self.degree != 3 {
            return Err(Error::NaturalDegree {
                degree: self.degree,
            });
        }
        Ok(())
    }

    /// Number of basis functions for `k` interior knots.
    pub fn dimension(&self, k: usize) -> Result<usize> {
        self.validate()?;
        match self.family {
            BasisFamily::TruncatedPower => Ok(self.degree + 1 + k),
            BasisFamily::BSpline => Ok(self.order() + k),
            BasisFamily::NaturalCubic if k < 2 => Err(Error::NaturalNeedsTwoKnots { knots: k }),
            BasisFamily::NaturalCubic => Ok(k),
        }
    }

    /// The basis actually used for `k` knots: natural cubic splines with
    /// fewer than two knots fall back to the cubic truncated power basis.
    pub fn effective_for(&self, k: usize) -> BasisSpec {
        match self.family {
            BasisFamily::NaturalCubic if k < 2 => BasisSpec::truncated_power(3),
            _ => *self,
        }
    }
}

/// Dense row-major design matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DesignMatrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                what: "row-major buffer length",
                expected: rows * cols,
                found: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            if row.len() != cols {
                return Err(Error::DimensionMismatch {
                    what: "row length",
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Strict,
    Extrapolate,
}

pub fn truncated_power_row(x: f64, spec: BasisSpec, kc: &KnotConfig) -> Result<Vec<f64>> {
    expect_family(spec, BasisFamily::TruncatedPower)?;
    kc.domain.check(x)?;
    let mut row = vec![0.0; spec.dimension(kc.len())?];
    fill_truncated_power(x, spec.degree, kc.knots(), &mut row);
    Ok(row)
}

pub fn bspline_row(x: f64, spec: BasisSpec, kc: &KnotConfig) -> Result<Vec<f64>> {
    expect_family(spec, BasisFamily::BSpline)?;
    kc.domain.check(x)?;
    let mut row = vec![0.0; spec.dimension(kc.len())?];
    fill_bspline(x, spec.order(), kc, &mut row);
    Ok(row)
}

pub fn natural_cubic_row(x: f64, kc: &KnotConfig) -> Result<Vec<f64>> {
    kc.domain.check(x)?;
    let mut row = vec![0.0; BasisSpec::natural_cubic().dimension(kc.len())?];
    fill_natural_cubic(x, kc.knots(), &mut row);
    Ok(row)
}

/// Basis row for any family, restricted to the domain.
pub fn basis_row(x: f64, spec: BasisSpec, kc: &KnotConfig) -> Result<Vec<f64>> {
    row_with_mode(x, spec, kc, Mode::Strict)
}

/// Basis row that continues the outermost polynomial pieces beyond the
/// domain (the linear tails for natural cubic splines).
pub fn basis_row_extrapolated(x: f64, spec: BasisSpec, kc: &KnotConfig) -> Result<Vec<f64>> {
    row_with_mode(x, spec, kc, Mode::Extrapolate)
}

pub fn design_matrix(xs: &[f64], spec: BasisSpec, kc: &KnotConfig) -> Result<DesignMatrix> {
    design_with_mode(xs, spec, kc, Mode::Strict)
}

pub fn design_matrix_extrapolated(
    xs: &[f64],
    spec: BasisSpec,
    kc: &KnotConfig,
) -> Result<DesignMatrix> {
    design_with_mode(xs, spec, kc, Mode::Extrapolate)
}

fn expect_family(spec: BasisSpec, family: BasisFamily) -> Result<()> {
    if spec.family != family {
        return Err(Error::InvalidArgument(format!(
            "expected a {family:?} basis, got {:?}",
            spec.family
        )));
    }
    Ok(())
}

fn row_with_mode(x: f64, spec: BasisSpec, kc: &KnotConfig, mode: Mode) -> Result<Vec<f64>> {
    if !x.is_finite() {
        return Err(Error::NonFinite {
            what: "evaluation point",
            index: 0,
        });
    }
    if mode == Mode::Strict {
        kc.domain.check(x)?;
    }
    let mut row = vec![0.0; spec.dimension(kc.len())?];
    fill_row(x, spec, kc, &mut row);
    Ok(row)
}

fn design_with_mode(
    xs: &[f64],
    spec: BasisSpec,
    kc: &KnotConfig,
    mode: Mode,
) -> Result<DesignMatrix> {
    if xs.is_empty() {
        return Err(Error::InsufficientData(
            "design matrix needs at least one point".into(),
        ));
    }
    let cols = spec.dimension(kc.len())?;
    let mut data = vec![0.0; xs.len() * cols];
    for (i, (&x, row)) in xs.iter().zip(data.chunks_exact_mut(cols)).enumerate() {
        if !x.is_finite() {
            return Err(Error::NonFinite {
                what: "evaluation point",
                index: i,
            });
        }
        if mode == Mode::Strict {
            kc.domain.check(x)?;
        }
        fill_row(x, spec, kc, row);
    }
    Ok(DesignMatrix {
        rows: xs.len(),
        cols,
        data,
    })
}

fn fill_row(x: f64, spec: BasisSpec, kc: &KnotConfig, out: &mut [f64]) {
    match spec.family {
        BasisFamily::TruncatedPower => fill_truncated_power(x, spec.degree, kc.knots(), out),
        BasisFamily::BSpline => fill_bspline(x, spec.order(), kc, out),
        BasisFamily::NaturalCubic => fill_natural_cubic(x, kc.knots(), out),
    }
}

/// `(u)_+^p`, with `(u)_+^0 = 1` for `u >= 0`.
#[inline]
pub(crate) fn plus_pow(u: f64, p: usize) -> f64 {
    if u >= 0.0 {
        u.powi(p as i32)
    } else {
        0.0
    }
}

fn fill_truncated_power(x: f64, degree: usize, knots: &[f64], out: &mut [f64]) {
    let mut pow = 1.0;
    for slot in out.iter_mut().take(degree + 1) {
        *slot = pow;
        pow *= x;
    }
    for (slot, &t) in out[degree + 1..].iter_mut().zip(knots) {
        *slot = plus_pow(x - t, degree);
    }
}

/// Clamped knot vector: `a` repeated `order` times, interior knots, `b`
/// repeated `order` times.
pub fn augmented_knots(order: usize, kc: &KnotConfig) -> Vec<f64> {
    let mut tau = Vec::with_capacity(2 * order + kc.len());
    tau.extend(std::iter::repeat(kc.domain.a).take(order));
    tau.extend_from_slice(kc.knots());
    tau.extend(std::iter::repeat(kc.domain.b).take(order));
    tau
}

fn fill_bspline(x: f64, order: usize, kc: &KnotConfig, out: &mut [f64]) {
    let tau = augmented_knots(order, kc);
    let knots = kc.knots();
    // Index of the non-empty knot interval holding x. The last interval is
    // closed at b, and points outside [a, b] use the boundary intervals so
    // the recursion continues their polynomial pieces.
    let span = order - 1 + knots.partition_point(|&t| t <= x);
    cox_de_boor(x, order, &tau, span, out);
}

/// Cox-de Boor recursion from the order-1 indicator of interval `span`
/// up to `order`. Terms with a zero denominator contribute nothing.
fn cox_de_boor(x: f64, order: usize, tau: &[f64], span: usize, out: &mut [f64]) {
    out.iter_mut().for_each(|v| *v = 0.0);
    // level[j] holds B_{span - r + 1 + j, r} while building order r.
    let mut level = vec![0.0; order];
    let mut next = vec![0.0; order];
    level[0] = 1.0;
    for r in 2..=order {
        let first = span + 1 - r;
        for j in 0..r {
            let i = first + j;
            // B_{i, r-1} lives at level[j - 1]; B_{i+1, r-1} at level[j].
            let left = if j >= 1 { level[j - 1] } else { 0.0 };
            let right = if j < r - 1 { level[j] } else { 0.0 };
            let mut value = 0.0;
            let d1 = tau[i + r - 1] - tau[i];
            if d1 != 0.0 && left != 0.0 {
                value += (x - tau[i]) / d1 * left;
            }
            let d2 = tau[i + r] - tau[i + 1];
            if d2 != 0.0 && right != 0.0 {
                value += (tau[i + r] - x) / d2 * right;
            }
            next[j] = value;
        }
        std::mem::swap(&mut level, &mut next);
    }
    let first = span + 1 - order;
    out[first..first + order].copy_from_slice(&level[..order]);
}

fn fill_natural_cubic(x: f64, knots: &[f64], out: &mut [f64]) {
    let k = knots.len();
    let last = knots[k - 1];
    let penultimate = knots[k - 2];
    let d = |t: f64| (plus_pow(x - t, 3) - plus_pow(x - last, 3)) / (last - t);
    out[0] = 1.0;
    out[1] = x;
    let tail = d(penultimate);
    for (slot, &t) in out[2..].iter_mut().zip(&knots[..k - 2]) {
        *slot = d(t) - tail;
    }
}
