//! Weight sequences `w: Z -> (0, w+)` and the coefficients derived from them.
//!
//! A weight sequence must be strictly increasing, tend to `0` at `-inf` and to
//! `w+` at `+inf`, and have bounded consecutive ratios. Every family here is
//! evaluated log-first: far out in either direction `w(k)` either underflows or
//! rounds to `w+`, while `ln w(k)`, `ln S(k)` and the deficit `w+^2 - w(k)^2`
//! stay accurate. All closed forms are arranged so that no difference of
//! nearly equal numbers is ever taken.

use std::f64::consts::{LN_2, PI};

use crate::error::{Error, Result};
use crate::numerics::TruncationWindow;

/// Validation threshold for the decay condition `w(k) -> 0`, relative to `w+`.
pub const DECAY_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    Logistic,
    Arctan,
    PiecewiseExponential,
    UserTable,
}

impl FamilyKind {
    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::Logistic => "logistic",
            FamilyKind::Arctan => "arctan",
            FamilyKind::PiecewiseExponential => "piecewise-exponential",
            FamilyKind::UserTable => "user-table",
        }
    }
}

impl std::str::FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "logistic" => Ok(FamilyKind::Logistic),
            "arctan" => Ok(FamilyKind::Arctan),
            "piecewise-exponential" | "piecewise_exponential" | "piecewise" => {
                Ok(FamilyKind::PiecewiseExponential)
            }
            "user-table" | "user_table" | "table" => Ok(FamilyKind::UserTable),
            other => Err(Error::Config(format!("unknown weight family `{other}`"))),
        }
    }
}

/// How a user table is continued outside the tabulated range.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// Queries outside the table are errors.
    Reject,
    /// Below the table `w` decays geometrically, `w(k) = w(first) * lower_ratio^(k - first)`
    /// with `lower_ratio > 1`; above it the deficit `w+ - w(k)` shrinks by
    /// `upper_ratio` in `(0, 1)` per step.
    Geometric { lower_ratio: f64, upper_ratio: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightTable {
    first: i64,
    values: Vec<f64>,
    tail: TailRule,
}

impl WeightTable {
    pub fn new(first: i64, values: Vec<f64>, tail: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyTable);
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::BadTableEntry {
                k: first + pos as i64,
            });
        }
        if let TailRule::Geometric {
            lower_ratio,
            upper_ratio,
        } = tail
        {
            if !(lower_ratio > 1.0 && lower_ratio.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "tail_lower_ratio",
                    value: lower_ratio,
                    reason: "must be finite and > 1",
                });
            }
            if !(upper_ratio > 0.0 && upper_ratio < 1.0) {
                return Err(Error::InvalidParameter {
                    name: "tail_upper_ratio",
                    value: upper_ratio,
                    reason: "must lie in (0, 1)",
                });
            }
        }
        Ok(Self {
            first,
            values,
            tail,
        })
    }

    /// Builds a table from `(k, w)` pairs; the indices must be consecutive.
    pub fn from_pairs(mut pairs: Vec<(i64, f64)>, tail: TailRule) -> Result<Self> {
        pairs.sort_by_key(|p| p.0);
        let Some(&(first, _)) = pairs.first() else {
            return Err(Error::EmptyTable);
        };
        for (i, (k, _)) in pairs.iter().enumerate() {
            if *k != first + i as i64 {
                return Err(Error::Config(format!(
                    "weight table indices must be consecutive; gap or duplicate at k = {k}"
                )));
            }
        }
        Self::new(first, pairs.into_iter().map(|p| p.1).collect(), tail)
    }

    pub fn first(&self) -> i64 {
        self.first
    }

    pub fn last(&self) -> i64 {
        self.first + self.values.len() as i64 - 1
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    fn value(&self, k: i64, w_plus: f64) -> Result<f64> {
        let (lo, hi) = (self.first, self.last());
        if (lo..=hi).contains(&k) {
            return Ok(self.values[(k - lo) as usize]);
        }
        match self.tail {
            TailRule::Reject => Err(Error::OutsideTable { k, lo, hi }),
            TailRule::Geometric {
                lower_ratio,
                upper_ratio,
            } => {
                if k < lo {
                    Ok(self.values[0] * lower_ratio.powf((k - lo) as f64))
                } else {
                    let top = *self.values.last().expect("non-empty table");
                    Ok(w_plus - (w_plus - top) * upper_ratio.powf((k - hi) as f64))
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Family {
    Logistic { tau: f64 },
    Arctan { tau: f64 },
    Piecewise { tau: f64 },
    Table(WeightTable),
}

/// A weight sequence from one of the supported families.
///
/// Immutable after construction. `shift` re-indexes the sequence,
/// `w_shifted(k) = w(k + shift)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    family: Family,
    w_plus: f64,
    shift: i64,
}

impl Default for WeightSequence {
    fn default() -> Self {
        Self::logistic(1.0, 2.0).expect("default parameters are valid")
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and positive",
        })
    }
}

/// `ln(1 + e^y)` without overflow.
fn softplus(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// Logistic function `1 / (1 + e^-x)`.
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `w(k)^2 / w+^2` for the arctan family at `x = k / tau`.
fn arctan_fraction(x: f64) -> f64 {
    if x < 0.0 {
        (-1.0 / x).atan() / PI
    } else if x == 0.0 {
        0.5
    } else {
        1.0 - (1.0 / x).atan() / PI
    }
}

fn ln_arctan_fraction(x: f64) -> f64 {
    if x > 0.0 {
        (-(1.0 / x).atan() / PI).ln_1p()
    } else {
        arctan_fraction(x).ln()
    }
}

/// Compensated (Neumaier) summation.
pub(crate) fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

impl WeightSequence {
    /// `w(k)^2 = w+^2 / (1 + e^(-k/tau))`.
    pub fn logistic(w_plus: f64, tau: f64) -> Result<Self> {
        check_positive("w_plus", w_plus)?;
        check_positive("tau", tau)?;
        Ok(Self {
            family: Family::Logistic { tau },
            w_plus,
            shift: 0,
        })
    }

    /// `w(k)^2 = w+^2 (1/2 + arctan(k/tau)/pi)`.
    pub fn arctan(w_plus: f64, tau: f64) -> Result<Self> {
        check_positive("w_plus", w_plus)?;
        check_positive("tau", tau)?;
        Ok(Self {
            family: Family::Arctan { tau },
            w_plus,
            shift: 0,
        })
    }

    /// `w(k) = (w+/2) e^(k/tau)` for `k < 0`, `w+ (1 - e^(-k/tau)/2)` for `k >= 0`.
    pub fn piecewise_exponential(w_plus: f64, tau: f64) -> Result<Self> {
        check_positive("w_plus", w_plus)?;
        check_positive("tau", tau)?;
        Ok(Self {
            family: Family::Piecewise { tau },
            w_plus,
            shift: 0,
        })
    }

    pub fn from_table(w_plus: f64, table: WeightTable) -> Result<Self> {
        check_positive("w_plus", w_plus)?;
        Ok(Self {
            family: Family::Table(table),
            w_plus,
            shift: 0,
        })
    }

    /// Closed-form families by kind; `UserTable` needs [`WeightSequence::from_table`].
    pub fn closed_form(kind: FamilyKind, w_plus: f64, tau: f64) -> Result<Self> {
        match kind {
            FamilyKind::Logistic => Self::logistic(w_plus, tau),
            FamilyKind::Arctan => Self::arctan(w_plus, tau),
            FamilyKind::PiecewiseExponential => Self::piecewise_exponential(w_plus, tau),
            FamilyKind::UserTable => Err(Error::Config(
                "user-table family requires a table".to_string(),
            )),
        }
    }

    /// The same sequence re-indexed by `offset`: `w'(k) = w(k + offset)`.
    pub fn shifted(&self, offset: i64) -> Self {
        Self {
            shift: self.shift + offset,
            ..self.clone()
        }
    }

    pub fn kind(&self) -> FamilyKind {
        match self.family {
            Family::Logistic { .. } => FamilyKind::Logistic,
            Family::Arctan { .. } => FamilyKind::Arctan,
            Family::Piecewise { .. } => FamilyKind::PiecewiseExponential,
            Family::Table(_) => FamilyKind::UserTable,
        }
    }

    pub fn w_plus(&self) -> f64 {
        self.w_plus
    }

    /// Indices where `w` is defined, when that is not all of `Z`.
    pub fn domain(&self) -> Option<(i64, i64)> {
        match &self.family {
            Family::Table(t) if t.tail == TailRule::Reject => {
                Some((t.first() - self.shift, t.last() - self.shift))
            }
            _ => None,
        }
    }

    /// `sup_k w(k)/w(k-1)` in closed form, for families that have one.
    pub fn analytic_sup_ratio(&self) -> Option<f64> {
        match self.family {
            Family::Logistic { tau } => Some((0.5 / tau).exp()),
            Family::Piecewise { tau } => Some((1.0 / tau).exp()),
            Family::Arctan { .. } | Family::Table(_) => None,
        }
    }

    pub fn w(&self, k: i64) -> Result<f64> {
        let k = k + self.shift;
        let wp = self.w_plus;
        Ok(match &self.family {
            Family::Logistic { tau } => wp * sigmoid(k as f64 / tau).sqrt(),
            Family::Arctan { tau } => wp * arctan_fraction(k as f64 / tau).sqrt(),
            Family::Piecewise { tau } => {
                let x = k as f64 / tau;
                if k < 0 {
                    0.5 * wp * x.exp()
                } else {
                    wp * (1.0 - 0.5 * (-x).exp())
                }
            }
            Family::Table(t) => t.value(k, wp)?,
        })
    }

    pub fn ln_w(&self, k: i64) -> Result<f64> {
        let k = k + self.shift;
        let ln_wp = self.w_plus.ln();
        Ok(match &self.family {
            Family::Logistic { tau } => ln_wp - 0.5 * softplus(-(k as f64) / tau),
            Family::Arctan { tau } => ln_wp + 0.5 * ln_arctan_fraction(k as f64 / tau),
            Family::Piecewise { tau } => {
                let x = k as f64 / tau;
                if k < 0 {
                    ln_wp - LN_2 + x
                } else {
                    ln_wp + (-0.5 * (-x).exp()).ln_1p()
                }
            }
            Family::Table(t) => t.value(k, self.w_plus)?.ln(),
        })
    }

    /// `S(k) = w(k)^2 - w(k-1)^2`. Underflows to 0 far in the left tail; use
    /// [`WeightSequence::ln_s`] there.
    pub fn s(&self, k: i64) -> Result<f64> {
        let k = k + self.shift;
        let wp2 = self.w_plus * self.w_plus;
        Ok(match &self.family {
            Family::Logistic { tau } => {
                let (x, d) = (k as f64 / tau, 1.0 / tau);
                let y = x - d;
                if x <= 0.0 {
                    wp2 * y.exp() * d.exp_m1() / ((1.0 + x.exp()) * (1.0 + y.exp()))
                } else {
                    wp2 * (-x).exp() * d.exp_m1() / ((1.0 + (-x).exp()) * (1.0 + (-y).exp()))
                }
            }
            Family::Arctan { tau } => {
                let kf = k as f64;
                wp2 / PI * ((1.0 / tau) / (1.0 + kf * (kf - 1.0) / (tau * tau))).atan()
            }
            Family::Piecewise { tau } => {
                let (x, d) = (k as f64 / tau, 1.0 / tau);
                if k <= 0 {
                    0.25 * wp2 * (2.0 * x).exp() * -(-2.0 * d).exp_m1()
                } else {
                    let u = 0.5 * (-x).exp();
                    let v = u * d.exp();
                    wp2 * u * d.exp_m1() * (2.0 - u - v)
                }
            }
            Family::Table(t) => {
                let hi = t.value(k, self.w_plus)?;
                let lo = t.value(k - 1, self.w_plus)?;
                hi * hi - lo * lo
            }
        })
    }

    /// `ln S(k)`; NaN when `S(k) <= 0` (only possible for an invalid table).
    pub fn ln_s(&self, k: i64) -> Result<f64> {
        let k = k + self.shift;
        let ln_wp2 = 2.0 * self.w_plus.ln();
        Ok(match &self.family {
            Family::Logistic { tau } => {
                let (x, d) = (k as f64 / tau, 1.0 / tau);
                let y = x - d;
                if x <= 0.0 {
                    ln_wp2 + y + d.exp_m1().ln() - softplus(x) - softplus(y)
                } else {
                    ln_wp2 - x + d.exp_m1().ln() - softplus(-x) - softplus(-y)
                }
            }
            Family::Arctan { tau } => {
                let kf = k as f64;
                ln_wp2 - PI.ln()
                    + ((1.0 / tau) / (1.0 + kf * (kf - 1.0) / (tau * tau)))
                        .atan()
                        .ln()
            }
            Family::Piecewise { tau } => {
                let (x, d) = (k as f64 / tau, 1.0 / tau);
                if k <= 0 {
                    ln_wp2 - 2.0 * LN_2 + 2.0 * x + (-(-2.0 * d).exp_m1()).ln()
                } else {
                    let u = 0.5 * (-x).exp();
                    let v = u * d.exp();
                    ln_wp2 + u.ln() + d.exp_m1().ln() + (2.0 - u - v).ln()
                }
            }
            Family::Table(_) => {
                let s = self.s(k - self.shift)?;
                if s > 0.0 {
                    s.ln()
                } else {
                    f64::NAN
                }
            }
        })
    }

    /// `w+^2 - w(k)^2`, computed without cancellation.
    pub fn deficit_sq(&self, k: i64) -> Result<f64> {
        let k = k + self.shift;
        let wp2 = self.w_plus * self.w_plus;
        Ok(match &self.family {
            Family::Logistic { tau } => wp2 * sigmoid(-(k as f64) / tau),
            Family::Arctan { tau } => {
                let x = k as f64 / tau;
                if x > 0.0 {
                    wp2 * (1.0 / x).atan() / PI
                } else {
                    wp2 * (1.0 - arctan_fraction(x))
                }
            }
            Family::Piecewise { tau } => {
                let x = k as f64 / tau;
                if k < 0 {
                    wp2 * (1.0 - 0.25 * (2.0 * x).exp())
                } else {
                    let u = 0.5 * (-x).exp();
                    wp2 * u * (2.0 - u)
                }
            }
            Family::Table(t) => {
                let w = t.value(k, self.w_plus)?;
                wp2 - w * w
            }
        })
    }

    /// `a(k) = w(k)^2 / S(k)`.
    pub fn a(&self, k: i64) -> Result<f64> {
        let w = self.w(k)?;
        let s = self.s(k)?;
        if w > 1e-150 && s > 1e-300 {
            Ok(w * w / s)
        } else {
            Ok(self.ln_a(k)?.exp())
        }
    }

    pub fn ln_a(&self, k: i64) -> Result<f64> {
        Ok(2.0 * self.ln_w(k)? - self.ln_s(k)?)
    }

    /// `c(n)(k) = w(k+n) / w(k)`.
    pub fn c(&self, n: i64, k: i64) -> Result<f64> {
        if n == 0 {
            return Ok(1.0);
        }
        let num = self.w(k + n)?;
        let den = self.w(k)?;
        if num > 1e-300 && den > 1e-300 {
            Ok(num / den)
        } else {
            Ok(self.ln_c(n, k)?.exp())
        }
    }

    pub fn ln_c(&self, n: i64, k: i64) -> Result<f64> {
        if n == 0 {
            return Ok(0.0);
        }
        if n < 0 {
            return Ok(-self.ln_c(-n, k + n)?);
        }
        if k >= 0 {
            // ln(w(k+n)/w(k)) = ln(1 + (D(k) - D(k+n)) / w(k)^2) / 2 with D the deficit.
            let w = self.w(k)?;
            let gap = self.deficit_sq(k)? - self.deficit_sq(k + n)?;
            return Ok(0.5 * (gap / (w * w)).ln_1p());
        }
        Ok(self.ln_w(k + n)? - self.ln_w(k)?)
    }

    /// Balanced coefficient `a(n)(k) = w(k) w(k+n) / sqrt(S(k) S(k+n))`.
    pub fn a_balanced(&self, n: i64, k: i64) -> Result<f64> {
        if n == 0 {
            return self.a(k);
        }
        let (w0, w1) = (self.w(k)?, self.w(k + n)?);
        let (s0, s1) = (self.s(k)?, self.s(k + n)?);
        if w0 > 1e-150 && w1 > 1e-150 && s0 > 1e-300 && s1 > 1e-300 {
            Ok((w0 / s0.sqrt()) * (w1 / s1.sqrt()))
        } else {
            Ok(self.ln_a_balanced(n, k)?.exp())
        }
    }

    pub fn ln_a_balanced(&self, n: i64, k: i64) -> Result<f64> {
        Ok(self.ln_w(k)? + self.ln_w(k + n)? - 0.5 * (self.ln_s(k)? + self.ln_s(k + n)?))
    }

    /// Partial trace `sum_{|k| <= K} S(k)` and the telescoped distance to `w+^2`.
    pub fn trace_s_partial(&self, big_k: u32) -> Result<TracePartial> {
        let big_k = big_k as i64;
        let terms = (-big_k..=big_k)
            .map(|k| self.s(k))
            .collect::<Result<Vec<_>>>()?;
        let value = neumaier_sum(terms);
        let w_lo = self.w(-big_k - 1)?;
        let tail_bound = w_lo * w_lo + self.deficit_sq(big_k)?;
        Ok(TracePartial {
            k: big_k as u32,
            value,
            tail_bound,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePartial {
    pub k: u32,
    pub value: f64,
    /// `w(-K-1)^2 + (w+^2 - w(K)^2)`, the exact gap `w+^2 - value`.
    pub tail_bound: f64,
}

impl TracePartial {
    /// `|value - w+^2| <= tail_bound`, allowing `ulps` units of rounding in `w+^2`.
    pub fn brackets(&self, w_plus: f64, ulps: f64) -> bool {
        let target = w_plus * w_plus;
        (self.value - target).abs() <= self.tail_bound + ulps * f64::EPSILON * target
    }
}

/// The four admissibility conditions on a weight sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightCondition {
    /// `w(k) < w(k+1)`.
    Increasing = 1,
    /// `0 < w(k) < w+` (the limit at `+inf` exists and bounds the sequence).
    BelowLimit = 2,
    /// `w(k) -> 0` as `k -> -inf`, checked as `w(k_min) < 1e-3 w+`.
    VanishesAtMinusInfinity = 3,
    /// `sup_k w(k)/w(k-1) < inf`.
    BoundedRatio = 4,
}

impl WeightCondition {
    pub const ALL: [WeightCondition; 4] = [
        WeightCondition::Increasing,
        WeightCondition::BelowLimit,
        WeightCondition::VanishesAtMinusInfinity,
        WeightCondition::BoundedRatio,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub condition: WeightCondition,
    pub k: i64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    /// Window actually checked (clamped to the table for rejecting tables).
    pub window: TruncationWindow,
    /// First violation of each failed condition.
    pub violations: Vec<Violation>,
    pub empirical_sup_ratio: f64,
    pub analytic_sup_ratio: Option<f64>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violation(&self, condition: WeightCondition) -> Option<&Violation> {
        self.violations.iter().find(|v| v.condition == condition)
    }
}

/// Checks the admissibility conditions numerically over `window`.
///
/// Monotonicity is decided by the sign of the cancellation-free `S(k)`, since
/// `w(k)` itself rounds to `w+` in the right tail of the closed-form families.
pub fn validate_weights(ws: &WeightSequence, window: TruncationWindow) -> Result<ValidationReport> {
    let window = match ws.domain() {
        Some((lo, hi)) => TruncationWindow::new(window.k_min.max(lo), window.k_max.min(hi))?,
        None => window,
    };
    let mut violations = Vec::new();
    let first = |condition, k, detail: String, violations: &mut Vec<Violation>| {
        if !violations
            .iter()
            .any(|v: &Violation| v.condition == condition)
        {
            violations.push(Violation {
                condition,
                k,
                detail,
            });
        }
    };

    let mut sup_ratio = 0.0_f64;
    let mut ratio_at = window.k_min;
    for k in window.iter() {
        let w = ws.w(k)?;
        let deficit = ws.deficit_sq(k)?;
        if !(w > 0.0 && deficit > 0.0 && w <= ws.w_plus()) {
            first(
                WeightCondition::BelowLimit,
                k,
                format!("w({k}) = {w} is not in (0, w+ = {})", ws.w_plus()),
                &mut violations,
            );
        }
        if k == window.k_min {
            continue;
        }
        let prev = ws.w(k - 1)?;
        let s = ws.s(k)?;
        let ln_s = ws.ln_s(k)?;
        let increasing = (s > 0.0 || ln_s.is_finite()) && prev <= w;
        if !increasing {
            first(
                WeightCondition::Increasing,
                k,
                format!("w({}) = {prev} is not below w({k}) = {w}", k - 1),
                &mut violations,
            );
        }
        let ratio = (ws.ln_w(k)? - ws.ln_w(k - 1)?).exp();
        if !ratio.is_finite() {
            first(
                WeightCondition::BoundedRatio,
                k,
                format!("w({k})/w({}) is not finite", k - 1),
                &mut violations,
            );
        } else if ratio > sup_ratio {
            sup_ratio = ratio;
            ratio_at = k;
        }
    }

    let w_edge = ws.w(window.k_min)?;
    if !(w_edge < DECAY_THRESHOLD * ws.w_plus()) {
        first(
            WeightCondition::VanishesAtMinusInfinity,
            window.k_min,
            format!(
                "w({}) = {w_edge} is not below {DECAY_THRESHOLD:e} * w+",
                window.k_min
            ),
            &mut violations,
        );
    }

    let analytic = ws.analytic_sup_ratio();
    if let Some(bound) = analytic {
        if sup_ratio > bound * (1.0 + 1e-12) {
            first(
                WeightCondition::BoundedRatio,
                ratio_at,
                format!("ratio {sup_ratio} exceeds the analytic supremum {bound}"),
                &mut violations,
            );
        }
    }
    violations.sort_by_key(|v| v.condition);

    Ok(ValidationReport {
        window,
        violations,
        empirical_sup_ratio: sup_ratio,
        analytic_sup_ratio: analytic,
    })
}

/// Supremum of `w(k)/w(k-1)`: analytic when the family provides it, otherwise
/// the maximum over `window`.
pub fn sup_ratio(ws: &WeightSequence, window: TruncationWindow) -> Result<f64> {
    if let Some(r) = ws.analytic_sup_ratio() {
        return Ok(r);
    }
    let mut best = 0.0_f64;
    for k in (window.k_min + 1)..=window.k_max {
        best = best.max((ws.ln_w(k)? - ws.ln_w(k - 1)?).exp());
    }
    Ok(best)
}
