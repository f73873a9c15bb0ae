//! Balanced variants of the mode operators.
//!
//! The balanced norm weighs mode `n` by `1/a(n)(k)` with
//! `a(n)(k) = w(k) w(k+n) / sqrt(S(k) S(k+n))`. Operators are the unbalanced
//! ones with `a(k)` replaced by `a(n)(k)`, evaluated by the engine in
//! [`crate::modes`].

use crate::error::{Error, Result};
use crate::modes::{self, InverseResidual, ModeCoefficients, ModeVector, Variant, WindowedVector};
use crate::numerics::{Tails, TruncationWindow};
use crate::weights::WeightSequence;

/// `A(n) g` with balanced coefficients.
pub fn apply_a_balanced(ws: &WeightSequence, n: i64, g: &ModeVector) -> Result<ModeVector> {
    modes::apply_a_variant(ws, n, Variant::Balanced, g)
}

/// `Q(n) g` on `window` with the balanced measure.
pub fn apply_q_balanced(
    ws: &WeightSequence,
    n: i64,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<WindowedVector> {
    modes::apply_q_variant(ws, n, Variant::Balanced, g, window)
}

/// `(sum_k |g(k)|^2 / a(n)(k))^(1/2)`.
pub fn balanced_norm(ws: &WeightSequence, n: i64, g: &ModeVector) -> Result<f64> {
    modes::norm_variant(ws, n, Variant::Balanced, g)
}

pub fn residual_inverse_balanced(
    ws: &WeightSequence,
    n: i64,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<InverseResidual> {
    modes::residual_inverse_variant(ws, n, Variant::Balanced, g, window)
}

/// One value of the balanced Schur–Young sums, split into its windowed part
/// and the analytic bound on the rest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaValue {
    pub truncated: f64,
    pub tail: f64,
}

impl SigmaValue {
    pub fn total(&self) -> f64 {
        self.truncated + self.tail
    }
}

/// Row sum `sigma1(k)` and column sum `sigma2(l)` of the balanced kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSums {
    pub n: i64,
    pub k: i64,
    pub l: i64,
    pub sigma1: SigmaValue,
    pub sigma2: SigmaValue,
}

/// `sigma1(k) = sum_l |K(k,l)| m(l)` and `sigma2(l) = sum_k |K(k,l)| m(k)`
/// with the balanced measure `m`, summed over `window` and bounded beyond it.
///
/// For `n > 0` the kernel lives on `l < k` instead of `l >= k`; the same
/// Cauchy–Schwarz split applies with the roles of the window edges swapped.
pub fn sigma_sums(
    ws: &WeightSequence,
    n: i64,
    k: i64,
    l: i64,
    window: TruncationWindow,
) -> Result<SigmaSums> {
    if n == 0 {
        return Err(Error::Precondition("sigma sums need n != 0".to_string()));
    }
    if !window.contains(k) || !window.contains(l) {
        return Err(Error::Precondition(format!(
            "indices ({k}, {l}) must lie in [{}, {}]",
            window.k_min, window.k_max
        )));
    }
    let c = ModeCoefficients::new(ws, n, Variant::Balanced, window.k_min, window.k_max)?;
    let row: f64 = window
        .iter()
        .filter_map(|j| {
            c.ln_kernel(k, j)
                .map(|(_, ln)| (ln + c.ln_measure(j)).exp())
        })
        .sum();
    let col: f64 = window
        .iter()
        .filter_map(|j| {
            c.ln_kernel(j, l)
                .map(|(_, ln)| (ln + c.ln_measure(j)).exp())
        })
        .sum();
    let tails = Tails::new(ws, n, window)?;
    let (row_tail, _) = tails.for_variant(Variant::Balanced, k)?;
    let (_, col_tail) = tails.for_variant(Variant::Balanced, l)?;
    Ok(SigmaSums {
        n,
        k,
        l,
        sigma1: SigmaValue {
            truncated: row,
            tail: row_tail,
        },
        sigma2: SigmaValue {
            truncated: col,
            tail: col_tail,
        },
    })
}

/// Largest `sigma1` and `sigma2` (with tails) over all indices of the window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaSup {
    pub n: i64,
    pub sigma1: f64,
    pub sigma2: f64,
}

pub fn sigma_sup(ws: &WeightSequence, n: i64, window: TruncationWindow) -> Result<SigmaSup> {
    let sums = crate::numerics::schur_sums(ws, n, Variant::Balanced, window)?;
    Ok(SigmaSup {
        n,
        sigma1: sums.row_sup(),
        sigma2: sums.col_sup(),
    })
}

/// The two factors of the Cauchy–Schwarz split of `sigma1(k)` on a window:
/// `sum |K| S(l)/w(l)^2` and `sum |K| S(l+n)/w(l+n)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchySchwarzSplit {
    pub sigma1: f64,
    pub primary: f64,
    pub shifted: f64,
}

impl CauchySchwarzSplit {
    pub fn bound(&self) -> f64 {
        (self.primary * self.shifted).sqrt()
    }

    pub fn holds(&self) -> bool {
        self.sigma1 <= self.bound() * (1.0 + 1e-12)
    }
}

pub fn cauchy_schwarz_split(
    ws: &WeightSequence,
    n: i64,
    k: i64,
    window: TruncationWindow,
) -> Result<CauchySchwarzSplit> {
    let c = ModeCoefficients::new(ws, n, Variant::Balanced, window.k_min, window.k_max)?;
    let ln_m = |j: i64| -> Result<f64> { Ok(ws.ln_s(j)? - 2.0 * ws.ln_w(j)?) };
    let (mut sigma1, mut primary, mut shifted) = (0.0, 0.0, 0.0);
    for j in window.iter() {
        if let Some((_, ln)) = c.ln_kernel(k, j) {
            sigma1 += (ln + c.ln_measure(j)).exp();
            primary += (ln + ln_m(j)?).exp();
            shifted += (ln + ln_m(j + n)?).exp();
        }
    }
    Ok(CauchySchwarzSplit {
        sigma1,
        primary,
        shifted,
    })
}
