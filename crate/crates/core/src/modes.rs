//! Fourier-mode operators on weighted sequence spaces.
//!
//! On mode `n` the Dirac operator acts on `g: Z -> C` as
//! `A g(k) = a(k) (g(k) - c(k) g(k+1))` with `c(k) = w(k+n)/w(k)`. Its inverse
//! `Q` is a summation operator `Q g(k) = sum_l K(k,l) m(l) g(l)` against the
//! measure `m = 1/a` of the space, where the kernel is a ratio of weight
//! products:
//!
//! * `n > 0`: `K(k,l) = -P(l)/P(k)` for `l < k`, `P(k) = w(k) ... w(k+n-1)`;
//! * `n = 0`: `K(k,l) = -1` for `l < k`;
//! * `n < 0`: `K(k,l) = P(k)/P(l)` for `l >= k`, `P(k) = w(k+n) ... w(k-1)`.
//!
//! The balanced variant uses the same formulas with `a(k)` replaced by
//! `a(n)(k) = w(k) w(k+n) / sqrt(S(k) S(k+n))`; both share [`ModeCoefficients`].
//! Products of weights are accumulated in log space and exponentiated once.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::TruncationWindow;
use crate::weights::WeightSequence;

/// Cauchy increment below which a windowed tail is considered converged.
pub const BOUNDARY_INCREMENT: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Unbalanced,
    Balanced,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Unbalanced => "unbalanced",
            Variant::Balanced => "balanced",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "unbalanced" => Ok(Variant::Unbalanced),
            "balanced" => Ok(Variant::Balanced),
            other => Err(Error::Config(format!("unknown variant `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    /// Mode operator on its maximal domain.
    A,
    /// Mode operator restricted to `lim g(k) = 0` at `+inf`.
    A0,
    /// Parametrix.
    Q,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeOperatorSpec {
    pub n: i64,
    pub variant: Variant,
    pub kind: OperatorKind,
}

impl ModeOperatorSpec {
    pub fn new(n: i64, variant: Variant, kind: OperatorKind) -> Result<Self> {
        if kind == OperatorKind::A0 && n > 0 {
            return Err(Error::Precondition(format!(
                "A0 carries the boundary condition of modes n <= 0, got n = {n}"
            )));
        }
        Ok(Self { n, variant, kind })
    }

    /// The component of `D` on mode `n`: `A` for `n > 0`, `A0` for `n <= 0`.
    pub fn dirac(n: i64, variant: Variant) -> Self {
        let kind = if n > 0 {
            OperatorKind::A
        } else {
            OperatorKind::A0
        };
        Self { n, variant, kind }
    }

    pub fn parametrix(n: i64, variant: Variant) -> Self {
        Self {
            n,
            variant,
            kind: OperatorKind::Q,
        }
    }
}

/// Finitely supported sequence `Z -> C`, zero off its support.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModeVector {
    entries: BTreeMap<i64, Complex64>,
}

impl ModeVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn delta(k: i64) -> Self {
        Self::from_entries([(k, Complex64::new(1.0, 0.0))])
    }

    /// Random vector supported in `[-half_width, half_width]`: a random
    /// sub-interval with entries uniform in the unit square.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, half_width: i64) -> Self {
        let lo = rng.random_range(-half_width..=half_width);
        let hi = rng.random_range(lo..=half_width);
        Self::from_entries((lo..=hi).map(|k| {
            let re = rng.random_range(-1.0..1.0);
            let im = rng.random_range(-1.0..1.0);
            (k, Complex64::new(re, im))
        }))
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (i64, Complex64)>) -> Self {
        let mut v = Self::new();
        for (k, z) in entries {
            *v.entries.entry(k).or_default() += z;
        }
        v
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.entries.get(&k).copied().unwrap_or_default()
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        self.entries.insert(k, value);
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries.iter().map(|(k, z)| (*k, *z))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Smallest and largest explicitly stored index.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = *self.entries.keys().next()?;
        let hi = *self.entries.keys().next_back()?;
        Some((lo, hi))
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|(k, z)| (*k, z * factor)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, z) in other.iter() {
            *out.entries.entry(k).or_default() += z;
        }
        out
    }
}

/// Values of a (generally infinitely supported) sequence on a window.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowedVector {
    window: TruncationWindow,
    values: Vec<Complex64>,
}

impl WindowedVector {
    pub fn new(window: TruncationWindow, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != window.width() {
            return Err(Error::Precondition(format!(
                "{} values for a window of width {}",
                values.len(),
                window.width()
            )));
        }
        Ok(Self { window, values })
    }

    pub fn window(&self) -> TruncationWindow {
        self.window
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Value at `k`; `None` outside the window.
    pub fn get(&self, k: i64) -> Option<Complex64> {
        self.window.offset(k).map(|i| self.values[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.window.iter().zip(self.values.iter().copied())
    }

    pub fn to_mode_vector(&self) -> ModeVector {
        ModeVector::from_entries(self.iter().filter(|(_, z)| *z != Complex64::default()))
    }
}

/// Log-space coefficients of mode `n` for one variant over `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct ModeCoefficients {
    n: i64,
    variant: Variant,
    lo: i64,
    hi: i64,
    ln_c: Vec<f64>,
    ln_p: Vec<f64>,
    ln_m: Vec<f64>,
}

impl ModeCoefficients {
    pub fn new(ws: &WeightSequence, n: i64, variant: Variant, lo: i64, hi: i64) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvalidWindow {
                k_min: lo,
                k_max: hi,
            });
        }
        let w_lo = lo + n.min(0);
        let w_hi = hi + n.max(0);
        let ln_w = (w_lo..=w_hi)
            .map(|k| ws.ln_w(k))
            .collect::<Result<Vec<_>>>()?;
        let lw = |k: i64| ln_w[(k - w_lo) as usize];

        let s_lo = if variant == Variant::Balanced {
            w_lo
        } else {
            lo
        };
        let s_hi = if variant == Variant::Balanced {
            w_hi
        } else {
            hi
        };
        let ln_s = (s_lo..=s_hi)
            .map(|k| ws.ln_s(k))
            .collect::<Result<Vec<_>>>()?;
        let ls = |k: i64| ln_s[(k - s_lo) as usize];

        let mut ln_c = Vec::with_capacity((hi - lo + 1) as usize);
        let mut ln_p = Vec::with_capacity((hi - lo + 1) as usize);
        let mut ln_m = Vec::with_capacity((hi - lo + 1) as usize);
        for k in lo..=hi {
            ln_c.push(lw(k + n) - lw(k));
            let p: f64 = if n > 0 {
                (k..k + n).map(lw).sum()
            } else {
                (k + n..k).map(lw).sum()
            };
            ln_p.push(p);
            ln_m.push(match variant {
                Variant::Unbalanced => ls(k) - 2.0 * lw(k),
                Variant::Balanced => 0.5 * (ls(k) + ls(k + n)) - lw(k) - lw(k + n),
            });
        }
        Ok(Self {
            n,
            variant,
            lo,
            hi,
            ln_c,
            ln_p,
            ln_m,
        })
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    fn idx(&self, k: i64) -> usize {
        debug_assert!(
            (self.lo..=self.hi).contains(&k),
            "k = {k} outside coefficient range [{}, {}]",
            self.lo,
            self.hi
        );
        (k - self.lo) as usize
    }

    /// `ln m(k)`, the log of the norm weight `1/a(k)` (or `1/a(n)(k)`).
    pub fn ln_measure(&self, k: i64) -> f64 {
        self.ln_m[self.idx(k)]
    }

    pub fn measure(&self, k: i64) -> f64 {
        self.ln_measure(k).exp()
    }

    pub fn a(&self, k: i64) -> f64 {
        (-self.ln_measure(k)).exp()
    }

    pub fn ln_c(&self, k: i64) -> f64 {
        self.ln_c[self.idx(k)]
    }

    pub fn c(&self, k: i64) -> f64 {
        self.ln_c(k).exp()
    }

    /// `ln P(k)` for the kernel product of this mode (0 for `n = 0`).
    pub fn ln_p(&self, k: i64) -> f64 {
        self.ln_p[self.idx(k)]
    }

    /// Sign and `ln |K(k,l)|` of the parametrix kernel; `None` off its support.
    pub fn ln_kernel(&self, k: i64, l: i64) -> Option<(f64, f64)> {
        match self.n.signum() {
            1 if l < k => Some((-1.0, self.ln_p(l) - self.ln_p(k))),
            0 if l < k => Some((-1.0, 0.0)),
            -1 if l >= k => Some((1.0, self.ln_p(k) - self.ln_p(l))),
            _ => None,
        }
    }

    pub fn kernel(&self, k: i64, l: i64) -> f64 {
        self.ln_kernel(k, l)
            .map_or(0.0, |(sign, ln)| sign * ln.exp())
    }

    /// `K(k,l) m(l)`: the weight of `g(l)` in `Q g(k)`.
    pub fn q_weight(&self, k: i64, l: i64) -> f64 {
        self.ln_kernel(k, l)
            .map_or(0.0, |(sign, ln)| sign * (ln + self.ln_measure(l)).exp())
    }

    /// `(A g)(k) = a(k) (g(k) - c(k) g(k+1))`.
    pub fn apply_a(&self, g: &ModeVector) -> ModeVector {
        let mut out = ModeVector::new();
        for (k, _) in g.iter() {
            for j in [k - 1, k] {
                if !out.entries.contains_key(&j) {
                    let z = self.a(j) * (g.get(j) - self.c(j) * g.get(j + 1));
                    out.set(j, z);
                }
            }
        }
        out
    }

    /// Exact `(Q g)(k)`; `g` has finite support so this is a finite sum.
    pub fn apply_q_at(&self, g: &ModeVector, k: i64) -> Complex64 {
        g.iter().map(|(l, z)| z * self.q_weight(k, l)).sum()
    }

    pub fn norm(&self, g: &ModeVector) -> f64 {
        g.iter()
            .map(|(k, z)| z.norm_sqr() * self.measure(k))
            .sum::<f64>()
            .sqrt()
    }

    fn norm_windowed(&self, window: TruncationWindow, values: impl Fn(i64) -> Complex64) -> f64 {
        window
            .iter()
            .map(|k| values(k).norm_sqr() * self.measure(k))
            .sum::<f64>()
            .sqrt()
    }
}

fn coefficients_for(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    window: Option<TruncationWindow>,
    g: &ModeVector,
) -> Result<ModeCoefficients> {
    let (mut lo, mut hi) = match (window, g.support()) {
        (Some(w), Some((a, b))) => (w.k_min.min(a), w.k_max.max(b)),
        (Some(w), None) => (w.k_min, w.k_max),
        (None, Some((a, b))) => (a, b),
        (None, None) => (0, 0),
    };
    lo -= 1;
    hi += 1;
    ModeCoefficients::new(ws, n, variant, lo, hi)
}

pub(crate) fn apply_a_variant(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    g: &ModeVector,
) -> Result<ModeVector> {
    if g.is_empty() {
        return Ok(ModeVector::new());
    }
    let coeffs = coefficients_for(ws, n, variant, None, g)?;
    Ok(coeffs.apply_a(g))
}

pub(crate) fn apply_q_variant(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<WindowedVector> {
    if let Some((lo, hi)) = g.support() {
        if !window.contains(lo) || !window.contains(hi) {
            return Err(Error::Precondition(format!(
                "window [{}, {}] does not cover the support [{lo}, {hi}]",
                window.k_min, window.k_max
            )));
        }
    }
    let coeffs = coefficients_for(ws, n, variant, Some(window), g)?;
    let values = window.iter().map(|k| coeffs.apply_q_at(g, k)).collect();
    WindowedVector::new(window, values)
}

pub(crate) fn norm_variant(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    g: &ModeVector,
) -> Result<f64> {
    if g.is_empty() {
        return Ok(0.0);
    }
    let coeffs = coefficients_for(ws, n, variant, None, g)?;
    Ok(coeffs.norm(g))
}

/// `A(n) g`, unbalanced.
pub fn apply_a(ws: &WeightSequence, n: i64, g: &ModeVector) -> Result<ModeVector> {
    apply_a_variant(ws, n, Variant::Unbalanced, g)
}

/// `Q(n) g` on `window`, unbalanced. The window must cover the support of `g`.
pub fn apply_q(
    ws: &WeightSequence,
    n: i64,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<WindowedVector> {
    apply_q_variant(ws, n, Variant::Unbalanced, g, window)
}

/// `||g||_a = (sum_k |g(k)|^2 / a(k))^(1/2)`.
pub fn weighted_norm(ws: &WeightSequence, g: &ModeVector) -> Result<f64> {
    norm_variant(ws, 0, Variant::Unbalanced, g)
}

/// `ln R(n)(k)`: the formal kernel element of `A(n)`.
pub fn ln_kernel_r(ws: &WeightSequence, n: i64, k: i64) -> Result<f64> {
    let ln_wp = ws.w_plus().ln();
    if n > 0 {
        let p: f64 = (k..k + n).map(|j| ws.ln_w(j)).sum::<Result<f64>>()?;
        Ok(n as f64 * ln_wp - p)
    } else if n < 0 {
        let p: f64 = (k + n..k).map(|j| ws.ln_w(j)).sum::<Result<f64>>()?;
        Ok(p + n as f64 * ln_wp)
    } else {
        Ok(0.0)
    }
}

/// `R(n)(k) = prod_{l >= k} c(n)(l)`, in closed form.
pub fn kernel_r(ws: &WeightSequence, n: i64, k: i64) -> Result<f64> {
    Ok(ln_kernel_r(ws, n, k)?.exp())
}

pub fn windowed_kernel_r(
    ws: &WeightSequence,
    n: i64,
    window: TruncationWindow,
) -> Result<WindowedVector> {
    let values = window
        .iter()
        .map(|k| kernel_r(ws, n, k).map(|r| Complex64::new(r, 0.0)))
        .collect::<Result<Vec<_>>>()?;
    WindowedVector::new(window, values)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseResidual {
    /// `||A Q g - g||` on the window.
    pub right: f64,
    /// `||Q A g - g||` on the window.
    pub left: f64,
    pub g_norm: f64,
}

impl InverseResidual {
    pub fn relative(&self) -> (f64, f64) {
        if self.g_norm == 0.0 {
            (self.right, self.left)
        } else {
            (self.right / self.g_norm, self.left / self.g_norm)
        }
    }

    pub fn worst_relative(&self) -> f64 {
        let (r, l) = self.relative();
        r.max(l)
    }
}

/// Minimum distance between the support of `g` and the window edges.
pub const RESIDUAL_MARGIN: i64 = 2;

pub(crate) fn residual_inverse_variant(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<InverseResidual> {
    if let Some((lo, hi)) = g.support() {
        if lo - window.k_min < RESIDUAL_MARGIN || window.k_max - hi < RESIDUAL_MARGIN {
            return Err(Error::Precondition(format!(
                "support [{lo}, {hi}] needs a margin of {RESIDUAL_MARGIN} inside [{}, {}]",
                window.k_min, window.k_max
            )));
        }
    }
    let coeffs = coefficients_for(ws, n, variant, Some(window), g)?;

    // A applied pointwise to Q g; Q g is evaluable one index past the window.
    let f: Vec<Complex64> = (window.k_min..=window.k_max + 1)
        .map(|k| coeffs.apply_q_at(g, k))
        .collect();
    let f_at = |k: i64| f[(k - window.k_min) as usize];
    let right = coeffs.norm_windowed(window, |k| {
        coeffs.a(k) * (f_at(k) - coeffs.c(k) * f_at(k + 1)) - g.get(k)
    });

    let ag = coeffs.apply_a(g);
    let left = coeffs.norm_windowed(window, |k| coeffs.apply_q_at(&ag, k) - g.get(k));

    Ok(InverseResidual {
        right,
        left,
        g_norm: coeffs.norm(g),
    })
}

/// Residuals of `A Q = I` and `Q A = I` on mode `n` for the input `g`.
pub fn residual_inverse(
    ws: &WeightSequence,
    n: i64,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<InverseResidual> {
    residual_inverse_variant(ws, n, Variant::Unbalanced, g, window)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLimit {
    pub estimate: Complex64,
    /// `|v(k_max) - v(k_max - 1)|`.
    pub increment: f64,
    pub converged: bool,
}

impl BoundaryLimit {
    /// The limit estimate, only when the tail has converged.
    pub fn value(&self) -> Option<Complex64> {
        self.converged.then_some(self.estimate)
    }
}

/// Estimates `lim_{k -> inf} v(k)` from the right edge of the window.
pub fn boundary_limit(v: &WindowedVector) -> BoundaryLimit {
    let vals = v.values();
    let last = *vals.last().expect("windows are non-empty");
    let increment = if vals.len() >= 2 {
        (last - vals[vals.len() - 2]).norm()
    } else {
        f64::INFINITY
    };
    BoundaryLimit {
        estimate: last,
        increment,
        converged: increment < BOUNDARY_INCREMENT,
    }
}

/// Growth record of `sum_{k=-K}^{0} |R(n)(k)|^2 / a(k)` for `n >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DivergenceEvidence {
    pub n: i64,
    pub k_max: u32,
    pub threshold: f64,
    /// Log of the partial sum at `K = k_max`.
    pub ln_final_sum: f64,
    pub strictly_increasing: bool,
    /// First `K` whose partial sum exceeds `threshold`.
    pub first_k_exceeding: Option<u32>,
}

impl DivergenceEvidence {
    pub fn passed(&self) -> bool {
        self.strictly_increasing && self.first_k_exceeding.is_some()
    }
}

/// `ln(e^a + e^b)`.
pub(crate) fn ln_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Accumulates the partial norms of `R(n)` towards `-inf` in log space.
///
/// Divergence is not decidable at finite `K`; this records monotone growth
/// past `threshold` as evidence.
pub fn kernel_divergence(
    ws: &WeightSequence,
    n: i64,
    k_max: u32,
    threshold: f64,
) -> Result<DivergenceEvidence> {
    if n < 0 {
        return Err(Error::Precondition(format!(
            "divergence evidence applies to n >= 0, got {n}"
        )));
    }
    let ln_threshold = threshold.ln();
    let mut ln_sum = f64::NEG_INFINITY;
    let mut strictly_increasing = true;
    let mut first_k_exceeding = None;
    for big_k in 0..=k_max {
        let k = -(big_k as i64);
        let term = 2.0 * ln_kernel_r(ws, n, k)? - ws.ln_a(k)?;
        let next = ln_add_exp(ln_sum, term);
        if !(next > ln_sum) {
            strictly_increasing = false;
        }
        ln_sum = next;
        if first_k_exceeding.is_none() && ln_sum > ln_threshold {
            first_k_exceeding = Some(big_k);
        }
    }
    Ok(DivergenceEvidence {
        n,
        k_max,
        threshold,
        ln_final_sum: ln_sum,
        strictly_increasing,
        first_k_exceeding,
    })
}

/// `||R(n)||_a` restricted to `[-K, K]`.
pub fn kernel_r_norm(ws: &WeightSequence, n: i64, big_k: u32) -> Result<f64> {
    let big_k = big_k as i64;
    let mut sum = 0.0;
    for k in -big_k..=big_k {
        sum += (2.0 * ln_kernel_r(ws, n, k)? - ws.ln_a(k)?).exp();
    }
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn win(a: i64, b: i64) -> TruncationWindow {
        TruncationWindow::new(a, b).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn apply_a_on_deltas() {
        let ws = WeightSequence::default();
        assert!(apply_a(&ws, 3, &ModeVector::new()).unwrap().is_empty());

        let out = apply_a(&ws, 0, &ModeVector::delta(0)).unwrap();
        assert_relative_eq!(out.get(0).re, ws.a(0).unwrap(), max_relative = 1e-14);
        assert_relative_eq!(out.get(-1).re, -ws.a(-1).unwrap(), max_relative = 1e-14);
        assert_eq!(out.len(), 2);

        let out = apply_a(&ws, 1, &ModeVector::delta(0)).unwrap();
        let expect = -ws.a(-1).unwrap() * ws.c(1, -1).unwrap();
        assert_relative_eq!(out.get(-1).re, expect, max_relative = 1e-13);
        assert_relative_eq!(out.get(0).re, ws.a(0).unwrap(), max_relative = 1e-13);
    }

    #[test]
    fn apply_q_on_deltas() {
        let ws = WeightSequence::default();
        let w = win(-20, 20);
        let zero = apply_q(&ws, 2, &ModeVector::new(), w).unwrap();
        assert!(zero.values().iter().all(|z| *z == Complex64::default()));

        let m0 = ws.s(0).unwrap() / ws.w(0).unwrap().powi(2);
        let q0 = apply_q(&ws, 0, &ModeVector::delta(0), w).unwrap();
        for (k, z) in q0.iter() {
            let expect = if k >= 1 { -m0 } else { 0.0 };
            assert_relative_eq!(z.re, expect, max_relative = 1e-13);
        }

        let qm1 = apply_q(&ws, -1, &ModeVector::delta(0), w).unwrap();
        let w_m1 = ws.w(-1).unwrap();
        for (k, z) in qm1.iter() {
            let expect = if k > 0 {
                0.0
            } else {
                ws.w(k - 1).unwrap() / w_m1 * m0
            };
            assert_relative_eq!(z.re, expect, max_relative = 1e-13, epsilon = 1e-300);
        }
    }

    #[test]
    fn apply_q_rejects_uncovered_support() {
        let ws = WeightSequence::default();
        let g = ModeVector::delta(30);
        assert!(matches!(
            apply_q(&ws, 1, &g, win(-5, 5)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn kernel_r_values() {
        let ws = WeightSequence::default();
        assert_eq!(kernel_r(&ws, 0, 17).unwrap(), 1.0);
        assert_relative_eq!(
            kernel_r(&ws, 1, 0).unwrap(),
            2.0_f64.sqrt(),
            max_relative = 1e-14
        );
        for k in 60..80 {
            assert!((kernel_r(&ws, -2, k).unwrap() - 1.0).abs() < 1e-8);
        }
        // A R = 0 away from truncation effects.
        for n in [-3_i64, -1, 0, 1, 4] {
            for k in -20..20 {
                let r0 = kernel_r(&ws, n, k).unwrap();
                let r1 = kernel_r(&ws, n, k + 1).unwrap();
                let val = r0 - ws.c(n, k).unwrap() * r1;
                assert!(val.abs() < 1e-13 * r0.abs().max(1.0), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn weighted_norm_examples() {
        let ws = WeightSequence::default();
        assert_eq!(weighted_norm(&ws, &ModeVector::new()).unwrap(), 0.0);
        for k in [-40, 0, 13] {
            assert_relative_eq!(
                weighted_norm(&ws, &ModeVector::delta(k)).unwrap(),
                ws.a(k).unwrap().powf(-0.5),
                max_relative = 1e-13
            );
        }
        let g = ModeVector::delta(0).add(&ModeVector::delta(1));
        let expect = (1.0 / ws.a(0).unwrap() + 1.0 / ws.a(1).unwrap()).sqrt();
        assert_relative_eq!(
            weighted_norm(&ws, &g).unwrap(),
            expect,
            max_relative = 1e-13
        );
    }

    #[test]
    fn inverse_identities_for_deltas() {
        let ws = WeightSequence::default();
        for n in [3, -2, 0, 1, -1] {
            let r = residual_inverse(&ws, n, &ModeVector::delta(0), win(-12, 12)).unwrap();
            assert!(r.worst_relative() < 1e-12, "n = {n}: {r:?}");
        }
        let q = apply_q(&ws, -2, &ModeVector::delta(0), win(-10, 40)).unwrap();
        let lim = boundary_limit(&q);
        assert_eq!(lim.value(), Some(Complex64::default()));
    }

    #[test]
    fn residual_requires_margin() {
        let ws = WeightSequence::default();
        let g = ModeVector::delta(11);
        assert!(residual_inverse(&ws, 1, &g, win(-12, 12)).is_err());
    }

    #[test]
    fn boundary_limits() {
        let ws = WeightSequence::default();
        for n in [-1, -2, -3] {
            let r = windowed_kernel_r(&ws, n, win(-50, 200)).unwrap();
            let lim = boundary_limit(&r);
            assert!((lim.value().unwrap().re - 1.0).abs() < 1e-8);
        }
        let zero = WindowedVector::new(win(0, 3), vec![Complex64::default(); 4]).unwrap();
        assert_eq!(boundary_limit(&zero).value(), Some(Complex64::default()));
        let ramp =
            WindowedVector::new(win(0, 3), (0..4).map(|i| c(i as f64, 0.0)).collect()).unwrap();
        assert!(boundary_limit(&ramp).value().is_none());
    }

    #[test]
    fn divergence_and_exclusion_evidence() {
        let ws = WeightSequence::default();
        for n in 0..=3 {
            let ev = kernel_divergence(&ws, n, 10_000, 1e3).unwrap();
            assert!(ev.passed(), "{ev:?}");
        }
        let a = kernel_r_norm(&ws, -2, 200).unwrap();
        let b = kernel_r_norm(&ws, -2, 400).unwrap();
        assert!(a.is_finite());
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }

    #[test]
    fn a0_requires_nonpositive_mode() {
        assert!(ModeOperatorSpec::new(2, Variant::Unbalanced, OperatorKind::A0).is_err());
        assert_eq!(
            ModeOperatorSpec::dirac(0, Variant::Balanced).kind,
            OperatorKind::A0
        );
        assert_eq!(
            ModeOperatorSpec::dirac(1, Variant::Balanced).kind,
            OperatorKind::A
        );
    }
}
