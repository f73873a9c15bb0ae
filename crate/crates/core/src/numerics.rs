//! Truncated matrices of the mode operators, operator-norm estimation and
//! Schur–Young bounds with analytic tails.
//!
//! Matrices are written in the orthonormalized basis of the weighted space:
//! entry `(k, l)` is `a(k)^(-1/2) [Op e_l](k) a(l)^(1/2)`, so Euclidean
//! singular values are weighted operator norms.

use crate::error::{Error, Result};
use crate::modes::{ln_add_exp, ModeCoefficients, ModeOperatorSpec, OperatorKind, Variant};
use crate::weights::{self, WeightSequence};

/// Absolute slack for every dominance assertion.
pub const DOMINANCE_SLACK: f64 = 1e-9;
/// Iteration cap for the norm iterations.
pub const MAX_POWER_ITERATIONS: usize = 10_000;
/// Relative tolerance used for bound reports.
pub const NORM_TOLERANCE: f64 = 1e-13;

/// Integer interval `[k_min, k_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruncationWindow {
    pub k_min: i64,
    pub k_max: i64,
}

impl TruncationWindow {
    pub fn new(k_min: i64, k_max: i64) -> Result<Self> {
        if k_min < k_max {
            Ok(Self { k_min, k_max })
        } else {
            Err(Error::InvalidWindow { k_min, k_max })
        }
    }

    /// `[-half_width, half_width]`.
    pub fn symmetric(half_width: i64) -> Result<Self> {
        Self::new(-half_width, half_width)
    }

    pub fn width(&self) -> usize {
        (self.k_max - self.k_min + 1) as usize
    }

    pub fn contains(&self, k: i64) -> bool {
        (self.k_min..=self.k_max).contains(&k)
    }

    pub fn offset(&self, k: i64) -> Option<usize> {
        self.contains(k).then(|| (k - self.k_min) as usize)
    }

    pub fn index(&self, i: usize) -> i64 {
        self.k_min + i as i64
    }

    pub fn iter(&self) -> impl Iterator<Item = i64> {
        self.k_min..=self.k_max
    }

    /// Window with the same centre and twice the half-widths.
    pub fn doubled(&self) -> Self {
        let mid = self.k_min + (self.k_max - self.k_min) / 2;
        Self {
            k_min: mid - 2 * (mid - self.k_min),
            k_max: mid + 2 * (self.k_max - mid),
        }
    }
}

impl Default for TruncationWindow {
    fn default() -> Self {
        Self {
            k_min: -200,
            k_max: 200,
        }
    }
}

/// A real linear map that can be applied together with its transpose.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
    fn apply_transpose(&self, x: &[f64], y: &mut [f64]);
}

/// Dense matrix over a pair of windows, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    rows: TruncationWindow,
    cols: TruncationWindow,
    data: Vec<f64>,
}

impl OperatorMatrix {
    pub fn zeros(rows: TruncationWindow, cols: TruncationWindow) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows.width() * cols.width()],
        }
    }

    pub fn from_fn(
        rows: TruncationWindow,
        cols: TruncationWindow,
        mut f: impl FnMut(i64, i64) -> f64,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        let nc = cols.width();
        for (i, k) in rows.iter().enumerate() {
            for (j, l) in cols.iter().enumerate() {
                m.data[i * nc + j] = f(k, l);
            }
        }
        m
    }

    pub fn rows(&self) -> TruncationWindow {
        self.rows
    }

    pub fn cols(&self) -> TruncationWindow {
        self.cols
    }

    /// Entry at window indices `(k, l)`; zero outside the windows.
    pub fn get(&self, k: i64, l: i64) -> f64 {
        match (self.rows.offset(k), self.cols.offset(l)) {
            (Some(i), Some(j)) => self.data[i * self.cols.width() + j],
            _ => 0.0,
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols.width() + j]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn column_norm(&self, l: i64) -> f64 {
        self.rows
            .iter()
            .map(|k| self.get(k, l).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl LinearOperator for OperatorMatrix {
    fn nrows(&self) -> usize {
        self.rows.width()
    }

    fn ncols(&self) -> usize {
        self.cols.width()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let nc = self.ncols();
        for (yi, row) in y.iter_mut().zip(self.data.chunks_exact(nc)) {
            *yi = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let nc = self.ncols();
        y.iter_mut().for_each(|v| *v = 0.0);
        for (xi, row) in x.iter().zip(self.data.chunks_exact(nc)) {
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += a * xi;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

/// Square operator with one triangle of the form
/// `M(i,j) = left[i] * transfer[..] * right[j]` plus a diagonal.
///
/// Lower: `M(i,j) = left[i] * prod_{p=j+1}^{i} transfer[p] * right[j]` for `j < i`.
/// Upper: `M(i,j) = left[i] * prod_{p=i}^{j-1} transfer[p] * right[j]` for `j > i`.
/// Application costs `O(n)` through a running recurrence.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiseparableOperator {
    pub triangle: Triangle,
    pub diag: Vec<f64>,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub transfer: Vec<f64>,
}

impl SemiseparableOperator {
    fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return self.diag[i];
        }
        let prod = match self.triangle {
            Triangle::Lower if j < i => (j + 1..=i).map(|p| self.transfer[p]).product::<f64>(),
            Triangle::Upper if j > i => (i..j).map(|p| self.transfer[p]).product::<f64>(),
            _ => return 0.0,
        };
        self.left[i] * prod * self.right[j]
    }

    /// Dense form over `window`, which must have the operator's width.
    pub fn to_dense(&self, window: TruncationWindow) -> OperatorMatrix {
        let n = self.len();
        assert_eq!(window.width(), n, "window width must match the operator");
        let mut m = OperatorMatrix::zeros(window, window);
        for i in 0..n {
            m.data[i * n + i] = self.diag[i];
            let mut prod = 1.0;
            match self.triangle {
                Triangle::Lower => {
                    for j in (0..i).rev() {
                        prod *= self.transfer[j + 1];
                        m.data[i * n + j] = self.left[i] * prod * self.right[j];
                    }
                }
                Triangle::Upper => {
                    for j in i + 1..n {
                        prod *= self.transfer[j - 1];
                        m.data[i * n + j] = self.left[i] * prod * self.right[j];
                    }
                }
            }
        }
        m
    }

    fn lower_sweep(&self, x: &[f64], y: &mut [f64], left: &[f64], right: &[f64]) {
        let mut t = 0.0;
        for i in 0..self.len() {
            if i > 0 {
                t = self.transfer[i] * (t + right[i - 1] * x[i - 1]);
            }
            y[i] = self.diag[i] * x[i] + left[i] * t;
        }
    }

    fn upper_sweep(&self, x: &[f64], y: &mut [f64], left: &[f64], right: &[f64]) {
        let n = self.len();
        let mut u = 0.0;
        for i in (0..n).rev() {
            if i + 1 < n {
                u = self.transfer[i] * (u + right[i + 1] * x[i + 1]);
            }
            y[i] = self.diag[i] * x[i] + left[i] * u;
        }
    }
}

impl LinearOperator for SemiseparableOperator {
    fn nrows(&self) -> usize {
        self.len()
    }

    fn ncols(&self) -> usize {
        self.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        match self.triangle {
            Triangle::Lower => self.lower_sweep(x, y, &self.left, &self.right),
            Triangle::Upper => self.upper_sweep(x, y, &self.left, &self.right),
        }
    }

    fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        match self.triangle {
            Triangle::Lower => {
                // (M^T)(j,i) = right[j] prod_{p=j+1}^{i} transfer[p] left[i], i > j.
                let mut u = 0.0;
                for j in (0..n).rev() {
                    if j + 1 < n {
                        u = self.transfer[j + 1] * (u + self.left[j + 1] * x[j + 1]);
                    }
                    y[j] = self.diag[j] * x[j] + self.right[j] * u;
                }
            }
            Triangle::Upper => {
                // (M^T)(j,i) = right[j] prod_{p=i}^{j-1} transfer[p] left[i], i < j.
                let mut t = 0.0;
                for j in 0..n {
                    if j > 0 {
                        t = self.transfer[j - 1] * (t + self.left[j - 1] * x[j - 1]);
                    }
                    y[j] = self.diag[j] * x[j] + self.right[j] * t;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn euclid(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest singular value by plain power iteration on `v -> M^T M v`.
///
/// Starts from the normalized all-ones vector. The returned value is
/// `||M v||` for a unit `v`, hence never above the true largest singular
/// value. Stops when successive estimates differ by at most `tol` relative,
/// or after [`MAX_POWER_ITERATIONS`] with `converged = false`. Slow when the
/// top singular values cluster; [`operator_norm`] is the accelerated form.
pub fn power_iteration<M: LinearOperator + ?Sized>(m: &M, tol: f64) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut v = vec![1.0 / (nc as f64).sqrt(); nc];
    let mut mv = vec![0.0; nr];
    let mut mtmv = vec![0.0; nc];
    let mut prev = 0.0_f64;
    for it in 1..=MAX_POWER_ITERATIONS {
        m.apply(&v, &mut mv);
        let sigma = euclid(&mv);
        if sigma == 0.0 {
            return Ok(NormEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        if (sigma - prev).abs() <= tol * sigma {
            return Ok(NormEstimate {
                value: sigma,
                iterations: it,
                converged: true,
            });
        }
        prev = sigma;
        m.apply_transpose(&mv, &mut mtmv);
        let len = euclid(&mtmv);
        v.iter_mut().zip(&mtmv).for_each(|(a, b)| *a = b / len);
    }
    Ok(NormEstimate {
        value: prev,
        iterations: MAX_POWER_ITERATIONS,
        converged: false,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0_f64;
    for (i, a) in alpha.iter().enumerate() {
        let off = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1]
        };
        d = a - x - if i == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (x.abs() + 1.0);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by bisection.
fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let radius = |i: usize| {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { beta[i].abs() } else { 0.0 };
        left + right
    };
    let mut lo = (0..n)
        .map(|i| alpha[i] - radius(i))
        .fold(f64::INFINITY, f64::min);
    let mut hi = (0..n)
        .map(|i| alpha[i] + radius(i))
        .fold(f64::NEG_INFINITY, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) < n {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Consecutive iterations the Ritz value must stay within `tol` to stop.
const LANCZOS_STABLE_STEPS: usize = 5;

/// Largest singular value by Lanczos iteration on `v -> M^T M v`.
///
/// Krylov acceleration of [`power_iteration`] from the same normalized
/// all-ones start, with full reorthogonalization. The estimate is the largest
/// Ritz value, i.e. `||M v||^2` for a unit `v` in the Krylov space, so it
/// never exceeds the true value. Stops once the Ritz value has moved by at most
/// `tol` relative for several consecutive steps, when the Krylov space stops
/// growing, or after [`MAX_POWER_ITERATIONS`] with `converged = false`.
pub fn operator_norm<M: LinearOperator + ?Sized>(m: &M, tol: f64) -> Result<NormEstimate> {
    if !(tol > 0.0) {
        return Err(Error::Precondition(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let (nr, nc) = (m.nrows(), m.ncols());
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (nc as f64).sqrt(); nc]];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut mv = vec![0.0; nr];
    let mut w = vec![0.0; nc];
    let mut theta = 0.0_f64;
    let mut stable = 0;
    let cap = MAX_POWER_ITERATIONS.min(nc);
    for it in 1..=cap {
        let q = basis.last().expect("basis is non-empty");
        m.apply(q, &mut mv);
        m.apply_transpose(&mv, &mut w);
        alpha.push(dot(q, &w));
        // Two passes of Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for b in &basis {
                let p = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= p * y);
            }
        }
        let next = tridiagonal_max_eigenvalue(&alpha, &beta).max(0.0);
        if (next - theta).abs() <= tol * next {
            stable += 1;
        } else {
            stable = 0;
        }
        theta = next;
        let b = euclid(&w);
        let exhausted = b <= f64::EPSILON * alpha.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        if stable >= LANCZOS_STABLE_STEPS || exhausted || it == nc || theta == 0.0 {
            return Ok(NormEstimate {
                value: theta.sqrt(),
                iterations: it,
                converged: true,
            });
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
    Ok(NormEstimate {
        value: theta.sqrt(),
        iterations: cap,
        converged: false,
    })
}

fn mode_coefficients(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<ModeCoefficients> {
    ModeCoefficients::new(ws, n, variant, window.k_min, window.k_max)
}

/// Dense matrix of `spec` on `window` in the orthonormalized basis.
pub fn assemble_matrix(
    ws: &WeightSequence,
    spec: ModeOperatorSpec,
    window: TruncationWindow,
) -> Result<OperatorMatrix> {
    if window.width() < 4 {
        return Err(Error::Precondition(format!(
            "window width {} is below 4",
            window.width()
        )));
    }
    let coeffs = ModeCoefficients::new(ws, spec.n, spec.variant, window.k_min, window.k_max + 1)?;
    Ok(match spec.kind {
        OperatorKind::A | OperatorKind::A0 => OperatorMatrix::from_fn(window, window, |k, l| {
            if l == k {
                coeffs.a(k)
            } else if l == k + 1 {
                -(coeffs.ln_c(k) - 0.5 * (coeffs.ln_measure(k) + coeffs.ln_measure(l))).exp()
            } else {
                0.0
            }
        }),
        OperatorKind::Q => OperatorMatrix::from_fn(window, window, |k, l| {
            coeffs.ln_kernel(k, l).map_or(0.0, |(sign, ln)| {
                sign * (ln + 0.5 * (coeffs.ln_measure(k) + coeffs.ln_measure(l))).exp()
            })
        }),
    })
}

/// The parametrix of mode `n` on `window` as an `O(width)` operator, in the
/// same orthonormalized basis as [`assemble_matrix`].
pub fn parametrix_operator(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<SemiseparableOperator> {
    let c = mode_coefficients(ws, n, variant, window)?;
    let sqrt_m: Vec<f64> = window
        .iter()
        .map(|k| (0.5 * c.ln_measure(k)).exp())
        .collect();
    let len = window.width();
    Ok(if n >= 0 {
        // transfer[i] = P(k-1)/P(k) links row k to row k-1.
        let transfer = window
            .iter()
            .map(|k| {
                if k == window.k_min {
                    0.0
                } else {
                    (c.ln_p(k - 1) - c.ln_p(k)).exp()
                }
            })
            .collect();
        SemiseparableOperator {
            triangle: Triangle::Lower,
            diag: vec![0.0; len],
            left: sqrt_m.iter().map(|v| -v).collect(),
            right: sqrt_m,
            transfer,
        }
    } else {
        // transfer[i] = P(k)/P(k+1) = c(k).
        let transfer = window
            .iter()
            .map(|k| {
                if k == window.k_max {
                    0.0
                } else {
                    (c.ln_p(k) - c.ln_p(k + 1)).exp()
                }
            })
            .collect();
        SemiseparableOperator {
            triangle: Triangle::Upper,
            diag: window.iter().map(|k| c.measure(k)).collect(),
            left: sqrt_m.clone(),
            right: sqrt_m,
            transfer,
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailExponent {
    /// `f(t) = t^(-1/2)`.
    MinusHalf,
    /// `f(t) = t^(-3/2)`.
    MinusThreeHalves,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    /// Integral over `(0, w(edge)^2)`.
    Lower,
    /// Integral over `(w(edge)^2, w+^2)`.
    Upper,
}

/// `w+ - w(k)`, from the cancellation-free deficit.
fn w_gap(ws: &WeightSequence, k: i64) -> Result<f64> {
    let w = ws.w(k)?;
    Ok(ws.deficit_sq(k)? / (ws.w_plus() + w))
}

/// Closed-form integral of `f` beyond the window edge, the analytic tail
/// used to bound sums of the form `sum f(w(k)^2) S(k)`.
pub fn integral_tail(
    ws: &WeightSequence,
    exponent: TailExponent,
    edge: i64,
    side: TailSide,
) -> Result<f64> {
    Ok(match (exponent, side) {
        (TailExponent::MinusHalf, TailSide::Lower) => 2.0 * ws.w(edge)?,
        (TailExponent::MinusHalf, TailSide::Upper) => 2.0 * w_gap(ws, edge)?,
        (TailExponent::MinusThreeHalves, TailSide::Upper) => {
            2.0 * w_gap(ws, edge)? / (ws.w(edge)? * ws.w_plus())
        }
        (TailExponent::MinusThreeHalves, TailSide::Lower) => f64::INFINITY,
    })
}

/// Row and column sums of `|K|` against the measure, restricted to a window,
/// with analytic bounds on the omitted parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurSums {
    pub window: TruncationWindow,
    /// `sum_{l in W} |K(k,l)| m(l)` for each row `k` in the window.
    pub rows: Vec<f64>,
    /// `sum_{k in W} |K(k,l)| m(k)` for each column `l` in the window.
    pub cols: Vec<f64>,
    pub row_tails: Vec<f64>,
    pub col_tails: Vec<f64>,
}

impl SchurSums {
    pub fn row_sup(&self) -> f64 {
        self.rows
            .iter()
            .zip(&self.row_tails)
            .map(|(a, b)| a + b)
            .fold(0.0, f64::max)
    }

    pub fn col_sup(&self) -> f64 {
        self.cols
            .iter()
            .zip(&self.col_tails)
            .map(|(a, b)| a + b)
            .fold(0.0, f64::max)
    }

    pub fn row_sup_truncated(&self) -> f64 {
        self.rows.iter().copied().fold(0.0, f64::max)
    }

    pub fn col_sup_truncated(&self) -> f64 {
        self.cols.iter().copied().fold(0.0, f64::max)
    }
}

/// Analytic bounds on the parts of the row/column sums outside the window.
/// The primary sums carry the measure `S(l)/w(l)^2`, the shifted ones
/// `S(l+n)/w(l+n)^2`; the balanced measure is their geometric mean.
pub(crate) struct Tails<'a> {
    ws: &'a WeightSequence,
    n: i64,
    window: TruncationWindow,
    ratio: f64,
}

impl<'a> Tails<'a> {
    pub(crate) fn new(ws: &'a WeightSequence, n: i64, window: TruncationWindow) -> Result<Self> {
        Ok(Self {
            ws,
            n,
            window,
            ratio: weights::sup_ratio(ws, window)?,
        })
    }

    /// Row and column tails for index `k` under `variant`.
    pub(crate) fn for_variant(&self, variant: Variant, k: i64) -> Result<(f64, f64)> {
        Ok(match variant {
            Variant::Unbalanced => (self.row_primary(k)?, self.col_primary(k)?),
            // Cauchy–Schwarz on the omitted part: sum r sqrt(m m') <= sqrt(sum r m) sqrt(sum r m').
            Variant::Balanced => (
                (self.row_primary(k)? * self.row_shifted(k)?).sqrt(),
                (self.col_primary(k)? * self.col_shifted(k)?).sqrt(),
            ),
        })
    }

    fn w(&self, k: i64) -> Result<f64> {
        self.ws.w(k)
    }

    /// Omitted part of `sum_l r(k,l) S(l)/w(l)^2`.
    pub(crate) fn row_primary(&self, k: i64) -> Result<f64> {
        let (lo, hi) = (self.window.k_min, self.window.k_max);
        if self.n > 0 {
            // r <= w(l)/w(k); sum_{l < lo} S(l)/w(l) <= 2 w(lo-1).
            Ok(
                integral_tail(self.ws, TailExponent::MinusHalf, lo - 1, TailSide::Lower)?
                    / self.w(k)?,
            )
        } else {
            // r <= w(k-1)/w(l-1) <= ratio w(k-1)/w(l).
            Ok(self.ratio
                * self.w(k - 1)?
                * integral_tail(self.ws, TailExponent::MinusThreeHalves, hi, TailSide::Upper)?)
        }
    }

    /// Omitted part of `sum_k r(k,l) S(k)/w(k)^2`.
    pub(crate) fn col_primary(&self, l: i64) -> Result<f64> {
        let (lo, hi) = (self.window.k_min, self.window.k_max);
        if self.n > 0 {
            // r <= w(l)/w(k); sum_{k > hi} S(k)/w(k)^3.
            Ok(self.w(l)?
                * integral_tail(self.ws, TailExponent::MinusThreeHalves, hi, TailSide::Upper)?)
        } else {
            // r <= w(k)/w(l-1); sum_{k < lo} S(k)/w(k) <= 2 w(lo-1).
            Ok(
                integral_tail(self.ws, TailExponent::MinusHalf, lo - 1, TailSide::Lower)?
                    / self.w(l - 1)?,
            )
        }
    }

    /// Omitted part of `sum_l r(k,l) S(l+n)/w(l+n)^2`.
    pub(crate) fn row_shifted(&self, k: i64) -> Result<f64> {
        let (lo, hi, n) = (self.window.k_min, self.window.k_max, self.n);
        if n > 0 {
            // r <= w(l+n-1)/w(k+n-1) <= w(l+n)/w(k+n-1).
            Ok(integral_tail(
                self.ws,
                TailExponent::MinusHalf,
                lo + n - 1,
                TailSide::Lower,
            )? / self.w(k + n - 1)?)
        } else {
            // r <= w(k-1)/w(l-1) <= w(k-1)/w(l+n).
            Ok(self.w(k - 1)?
                * integral_tail(
                    self.ws,
                    TailExponent::MinusThreeHalves,
                    hi + n,
                    TailSide::Upper,
                )?)
        }
    }

    /// Omitted part of `sum_k r(k,l) S(k+n)/w(k+n)^2`.
    pub(crate) fn col_shifted(&self, l: i64) -> Result<f64> {
        let (lo, hi, n) = (self.window.k_min, self.window.k_max, self.n);
        if n > 0 {
            // r <= w(l+n-1)/w(k+n-1) <= ratio w(l+n-1)/w(k+n).
            Ok(self.ratio
                * self.w(l + n - 1)?
                * integral_tail(
                    self.ws,
                    TailExponent::MinusThreeHalves,
                    hi + n,
                    TailSide::Upper,
                )?)
        } else {
            // r <= w(k+n)/w(l+n).
            Ok(integral_tail(
                self.ws,
                TailExponent::MinusHalf,
                lo + n - 1,
                TailSide::Lower,
            )? / self.w(l + n)?)
        }
    }
}

/// Schur–Young row and column sums of the parametrix kernel of mode `n != 0`.
pub fn schur_sums(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<SchurSums> {
    if n == 0 {
        return Err(Error::Precondition(
            "Schur–Young sums are only defined for n != 0".to_string(),
        ));
    }
    let c = mode_coefficients(ws, n, variant, window)?;
    let width = window.width();
    let mut rows = vec![0.0; width];
    let mut cols = vec![0.0; width];
    for (i, k) in window.iter().enumerate() {
        for (j, l) in window.iter().enumerate() {
            if let Some((_, ln)) = c.ln_kernel(k, l) {
                rows[i] += (ln + c.ln_measure(l)).exp();
                cols[j] += (ln + c.ln_measure(k)).exp();
            }
        }
    }

    let tails = Tails::new(ws, n, window)?;
    let mut row_tails = Vec::with_capacity(width);
    let mut col_tails = Vec::with_capacity(width);
    for k in window.iter() {
        let (row, col) = tails.for_variant(variant, k)?;
        row_tails.push(row);
        col_tails.push(col);
    }
    Ok(SchurSums {
        window,
        rows,
        cols,
        row_tails,
        col_tails,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurYoungBound {
    /// `sqrt(row_sup * col_sup)` including analytic tails.
    pub bound: f64,
    /// Amount the tails add to the truncated bound.
    pub tail: f64,
    pub row_sup: f64,
    pub col_sup: f64,
}

pub fn schur_young_bound(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<SchurYoungBound> {
    let sums = schur_sums(ws, n, variant, window)?;
    let (row_sup, col_sup) = (sums.row_sup(), sums.col_sup());
    let bound = (row_sup * col_sup).sqrt();
    let truncated = (sums.row_sup_truncated() * sums.col_sup_truncated()).sqrt();
    Ok(SchurYoungBound {
        bound,
        tail: bound - truncated,
        row_sup,
        col_sup,
    })
}

/// Closed-form norm bound: `2` for `n > 0`, `2 sup_l w(l)/w(l-1)` for `n < 0`;
/// none for the balanced variant, which only has a qualitative bound.
pub fn paper_bound(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<Option<f64>> {
    if n == 0 {
        return Err(Error::Precondition(
            "no bound is claimed for n = 0".to_string(),
        ));
    }
    Ok(match variant {
        Variant::Balanced => None,
        Variant::Unbalanced if n > 0 => Some(2.0),
        Variant::Unbalanced => Some(2.0 * weights::sup_ratio(ws, window)?),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub n: i64,
    pub variant: Variant,
    pub window: TruncationWindow,
    pub norm_estimate: f64,
    pub norm_converged: bool,
    pub iterations: usize,
    pub schur_young_bound: f64,
    pub paper_bound: Option<f64>,
    pub tail_bound_used: f64,
    pub pass: bool,
}

impl BoundReport {
    /// Distance from the norm estimate to the tightest bound (positive is good).
    pub fn margin(&self) -> f64 {
        self.paper_bound
            .map_or(self.schur_young_bound, |p| p.min(self.schur_young_bound))
            - self.norm_estimate
    }
}

/// Truncated parametrix norm of mode `n` against its Schur–Young and closed-form bounds.
pub fn bound_report(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: TruncationWindow,
) -> Result<BoundReport> {
    let op = parametrix_operator(ws, n, variant, window)?;
    let norm = operator_norm(&op, NORM_TOLERANCE)?;
    let sy = schur_young_bound(ws, n, variant, window)?;
    let paper = paper_bound(ws, n, variant, window)?;
    let limit = paper.map_or(sy.bound, |p| p.min(sy.bound));
    Ok(BoundReport {
        n,
        variant,
        window,
        norm_estimate: norm.value,
        norm_converged: norm.converged,
        iterations: norm.iterations,
        schur_young_bound: sy.bound,
        paper_bound: paper,
        tail_bound_used: sy.tail,
        pass: norm.value <= limit + DOMINANCE_SLACK,
    })
}

/// `ln(w(y)^2 - w(x)^2)` for `x < y` without cancellation or underflow.
fn ln_sq_diff(ws: &WeightSequence, x: i64, y: i64) -> Result<f64> {
    if x >= 0 {
        Ok((ws.deficit_sq(x)? - ws.deficit_sq(y)?).ln())
    } else {
        let (lwx, lwy) = (ws.ln_w(x)?, ws.ln_w(y)?);
        Ok(2.0 * lwy + (-(2.0 * (lwx - lwy)).exp_m1()).ln())
    }
}

/// `ln` of the integral of `f` over `(w(x)^2, w(y)^2)`, `x < y`.
fn ln_integral(ws: &WeightSequence, exponent: TailExponent, x: i64, y: i64) -> Result<f64> {
    let (lwx, lwy) = (ws.ln_w(x)?, ws.ln_w(y)?);
    // ln(w(x) + w(y))
    let ln_sum = lwy + (lwx - lwy).exp().ln_1p();
    let base = std::f64::consts::LN_2 + ln_sq_diff(ws, x, y)? - ln_sum;
    Ok(match exponent {
        TailExponent::MinusHalf => base,
        TailExponent::MinusThreeHalves => base - lwx - lwy,
    })
}

/// Outcome of the sum/integral comparisons on one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SumIntegralCheck {
    /// `sum_{k=l+1}^{b} f(w(k)^2) S(k) <= int_{w(l)^2}^{w(b)^2} f` for all `l`.
    pub upper_tail_holds: bool,
    /// `sum_{k=a}^{l} f(w(k)^2) S(k) <= int_{w(a-1)^2}^{w(l)^2} f` for all `l`.
    pub lower_tail_holds: bool,
    /// `sum_{k=a}^{b} f(w(k-1)^2) S(k) >= int_{w(a-1)^2}^{w(b)^2} f`.
    pub full_sum_holds: bool,
    /// Largest `lhs/rhs` over the two upper-bound inequalities.
    pub worst_upper_ratio: f64,
    /// `rhs/lhs` of the lower-bound inequality.
    pub lower_ratio: f64,
}

impl SumIntegralCheck {
    pub fn passed(&self) -> bool {
        self.upper_tail_holds && self.lower_tail_holds && self.full_sum_holds
    }
}

/// Relative slack allowed in the sum/integral comparisons.
pub const SUM_INTEGRAL_SLACK: f64 = 1e-12;

/// Compares weighted sums with their integrals for `f(t) = t^(-1/2)` or
/// `t^(-3/2)`, restricted to `window = [a, b]`. The restricted forms imply the
/// full-line inequalities for decreasing `f`.
pub fn check_sum_integral(
    ws: &WeightSequence,
    exponent: TailExponent,
    window: TruncationWindow,
) -> Result<SumIntegralCheck> {
    let p = match exponent {
        TailExponent::MinusHalf => 1.0,
        TailExponent::MinusThreeHalves => 3.0,
    };
    let (a, b) = (window.k_min, window.k_max);
    // Everything in log space: the left tails underflow quickly.
    // ln f(w(k)^2) S(k) = ln S(k) - p ln w(k).
    let terms: Vec<f64> = window
        .iter()
        .map(|k| Ok(ws.ln_s(k)? - p * ws.ln_w(k)?))
        .collect::<Result<_>>()?;
    let ln_slack = SUM_INTEGRAL_SLACK.ln_1p();

    let mut worst = f64::NEG_INFINITY;
    let mut upper_ok = true;
    let mut suffix = f64::NEG_INFINITY;
    for l in (a..b).rev() {
        suffix = ln_add_exp(suffix, terms[(l + 1 - a) as usize]);
        let rhs = ln_integral(ws, exponent, l, b)?;
        worst = worst.max(suffix - rhs);
        upper_ok &= suffix <= rhs + ln_slack;
    }

    let mut lower_ok = true;
    let mut prefix = f64::NEG_INFINITY;
    for l in a..=b {
        prefix = ln_add_exp(prefix, terms[(l - a) as usize]);
        let rhs = ln_integral(ws, exponent, a - 1, l)?;
        worst = worst.max(prefix - rhs);
        lower_ok &= prefix <= rhs + ln_slack;
    }

    let mut full = f64::NEG_INFINITY;
    for k in window.iter() {
        full = ln_add_exp(full, ws.ln_s(k)? - p * ws.ln_w(k - 1)?);
    }
    let rhs = ln_integral(ws, exponent, a - 1, b)?;
    Ok(SumIntegralCheck {
        upper_tail_holds: upper_ok,
        lower_tail_holds: lower_ok,
        full_sum_holds: full + ln_slack >= rhs,
        worst_upper_ratio: worst.exp(),
        lower_ratio: (rhs - full).exp(),
    })
}
