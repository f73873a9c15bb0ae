//! Batch runner: flat `key = value` configs, verification suites, CSV and
//! JSON reports.
//!
//! Every suite writes `<suite>.csv` and `<suite>_summary.json` into the output
//! directory. CSV bodies depend only on the config and seed; the JSON summary
//! carries the only timestamp.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{SystemTime, UNIX_EPOCH};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::balanced;
use crate::classical::{self, LogGrid};
use crate::error::{Error, Result};
use crate::modes::{self, ModeVector, Variant, RESIDUAL_MARGIN};
use crate::numerics::{self, TruncationWindow};
use crate::weights::{self, FamilyKind, TailRule, WeightCondition, WeightSequence, WeightTable};

/// Environment variable capping the worker threads of the sweep.
pub const THREADS_ENV: &str = "QDISK_THREADS";

/// Relative residual accepted for the inverse identities.
pub const RESIDUAL_TOLERANCE: f64 = 1e-12;
/// Tolerance for `R(n)(k) -> 1` at the right edge.
pub const BOUNDARY_TOLERANCE: f64 = 1e-8;
/// Slack above `1/|n|` for the classical norms.
pub const CLASSICAL_UPPER_SLACK: f64 = 1e-3;
/// Fraction of `1/|n|` the classical norms must reach.
pub const CLASSICAL_LOWER_FRACTION: f64 = 0.9;
/// Allowed distance of the observed residual order from 2.
pub const ORDER_TOLERANCE: f64 = 0.1;
/// Partial traces may differ from `w+^2` by this many ulps beyond the tail.
pub const TRACE_ULPS: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Validate,
    Invert,
    Bounds,
    Classical,
    Kernels,
    Sweep,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Validate,
        Suite::Invert,
        Suite::Bounds,
        Suite::Classical,
        Suite::Kernels,
        Suite::Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Validate => "validate",
            Suite::Invert => "invert",
            Suite::Bounds => "bounds",
            Suite::Classical => "classical",
            Suite::Kernels => "kernels",
            Suite::Sweep => "sweep",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

/// Everything a suite needs, parsed and checked.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub weights: WeightSequence,
    pub variants: Vec<Variant>,
    pub n_min: i64,
    pub n_max: i64,
    pub window: TruncationWindow,
    pub grid: LogGrid,
    /// Random inputs per mode for the inverse identities.
    pub samples: usize,
    /// Random inputs are supported in `[-support, support]`.
    pub support: i64,
    /// `K` of the divergence evidence.
    pub kernel_k: u32,
    pub kernel_threshold: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            weights: WeightSequence::default(),
            variants: vec![Variant::Unbalanced, Variant::Balanced],
            n_min: -12,
            n_max: 12,
            window: TruncationWindow::default(),
            grid: LogGrid::default(),
            samples: 50,
            support: 10,
            kernel_k: 10_000,
            kernel_threshold: 1e3,
            seed: 0,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("cannot parse `{key}` from `{value}`")))
}

/// Reads a `k,w` CSV with a header row.
pub fn read_weight_table(path: &Path, tail: TailRule) -> Result<WeightTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut pairs = Vec::new();
    for record in reader.deserialize::<(i64, f64)>() {
        pairs.push(record?);
    }
    WeightTable::from_pairs(pairs, tail)
}

impl RunConfig {
    /// Parses `key = value` lines; `#` starts a comment. Relative table paths
    /// resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut cfg = Self::default();
        let mut family = FamilyKind::Logistic;
        let (mut w_plus, mut tau) = (1.0, 2.0);
        let mut table: Option<PathBuf> = None;
        let mut tail = String::from("reject");
        let (mut lower_ratio, mut upper_ratio) = (2.0, 0.5);
        let (mut k_min, mut k_max) = (cfg.window.k_min, cfg.window.k_max);
        let (mut grid_t, mut grid_m) = (cfg.grid.t_max(), cfg.grid.len());

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "family" => family = value.parse()?,
                "w_plus" => w_plus = parse_value(key, value)?,
                "tau" => tau = parse_value(key, value)?,
                "table" => table = Some(base_dir.join(value)),
                "tail" => tail = value.to_string(),
                "tail_lower_ratio" => lower_ratio = parse_value(key, value)?,
                "tail_upper_ratio" => upper_ratio = parse_value(key, value)?,
                "variant" => {
                    cfg.variants = match value {
                        "both" => vec![Variant::Unbalanced, Variant::Balanced],
                        v => vec![v.parse()?],
                    }
                }
                "n_min" => cfg.n_min = parse_value(key, value)?,
                "n_max" => cfg.n_max = parse_value(key, value)?,
                "k_min" => k_min = parse_value(key, value)?,
                "k_max" => k_max = parse_value(key, value)?,
                "grid_t" => grid_t = parse_value(key, value)?,
                "grid_m" => grid_m = parse_value(key, value)?,
                "samples" => cfg.samples = parse_value(key, value)?,
                "support" => cfg.support = parse_value(key, value)?,
                "kernel_k" => cfg.kernel_k = parse_value(key, value)?,
                "kernel_threshold" => cfg.kernel_threshold = parse_value(key, value)?,
                "seed" => cfg.seed = parse_value(key, value)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }

        let tail = match tail.as_str() {
            "reject" => TailRule::Reject,
            "geometric" => TailRule::Geometric {
                lower_ratio,
                upper_ratio,
            },
            other => return Err(Error::Config(format!("unknown tail rule `{other}`"))),
        };
        cfg.weights = match family {
            FamilyKind::UserTable => {
                let path = table.ok_or_else(|| {
                    Error::Config("family = user-table needs `table = PATH`".to_string())
                })?;
                WeightSequence::from_table(w_plus, read_weight_table(&path, tail)?)?
            }
            kind => WeightSequence::closed_form(kind, w_plus, tau)?,
        };
        if cfg.n_min > cfg.n_max {
            return Err(Error::Config(format!(
                "n_min = {} exceeds n_max = {}",
                cfg.n_min, cfg.n_max
            )));
        }
        cfg.window = TruncationWindow::new(k_min, k_max)?;
        cfg.grid = LogGrid::new(grid_t, grid_m)?;
        if cfg.support < 0
            || !cfg.window.contains(-cfg.support - RESIDUAL_MARGIN)
            || !cfg.window.contains(cfg.support + RESIDUAL_MARGIN)
        {
            return Err(Error::Config(format!(
                "support {} with margin {RESIDUAL_MARGIN} does not fit in the window",
                cfg.support
            )));
        }
        if !(cfg.kernel_threshold > 0.0) {
            return Err(Error::Config(
                "kernel_threshold must be positive".to_string(),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Nonzero modes of the configured range.
    pub fn nonzero_modes(&self) -> impl Iterator<Item = i64> {
        (self.n_min..=self.n_max).filter(|n| *n != 0)
    }

    fn residual_window(&self) -> TruncationWindow {
        let half = self.support + RESIDUAL_MARGIN;
        TruncationWindow {
            k_min: -half,
            k_max: half,
        }
    }
}

/// Tally of one suite run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteSummary {
    pub suite: String,
    pub pass_count: usize,
    pub fail_count: usize,
    pub inconclusive_count: usize,
    /// Smallest distance to a threshold over all checks; negative on failure.
    pub worst_margin: Option<f64>,
    pub timestamp: u64,
}

impl SuiteSummary {
    pub fn passed(&self) -> bool {
        self.fail_count == 0 && self.inconclusive_count == 0
    }

    /// 0 when every check passed, 1 on any failure, 3 when only
    /// non-convergence stands in the way.
    pub fn exit_code(&self) -> i32 {
        if self.fail_count > 0 {
            1
        } else if self.inconclusive_count > 0 {
            3
        } else {
            0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Default)]
struct Tally {
    pass: usize,
    fail: usize,
    inconclusive: usize,
    worst: Option<f64>,
}

impl Tally {
    fn record(&mut self, outcome: Outcome, margin: Option<f64>) {
        match outcome {
            Outcome::Pass => self.pass += 1,
            Outcome::Fail => self.fail += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
        }
        if let Some(m) = margin {
            self.worst = Some(self.worst.map_or(m, |w: f64| w.min(m)));
        }
    }

    fn check(&mut self, ok: bool, margin: Option<f64>) -> bool {
        self.record(if ok { Outcome::Pass } else { Outcome::Fail }, margin);
        ok
    }

    fn summary(self, suite: Suite) -> SuiteSummary {
        SuiteSummary {
            suite: suite.name().to_string(),
            pass_count: self.pass,
            fail_count: self.fail,
            inconclusive_count: self.inconclusive,
            worst_margin: self.worst,
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Runs `suite` and writes its reports into `out_dir`.
pub fn run_suite(suite: Suite, cfg: &RunConfig, out_dir: &Path) -> Result<SuiteSummary> {
    fs::create_dir_all(out_dir)?;
    let csv_path = out_dir.join(format!("{suite}.csv"));
    let summary = match suite {
        Suite::Validate => run_validate(cfg, &csv_path)?,
        Suite::Invert => run_invert(cfg, &csv_path)?,
        Suite::Bounds => run_bounds(cfg, &csv_path)?,
        Suite::Classical => run_classical(cfg, &csv_path)?,
        Suite::Kernels => run_kernels(cfg, &csv_path)?,
        Suite::Sweep => run_sweep(cfg, &csv_path)?,
    };
    let json = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Config(format!("cannot serialize summary: {e}")))?;
    fs::write(out_dir.join(format!("{suite}_summary.json")), json + "\n")?;
    Ok(summary)
}

#[derive(Serialize)]
struct ValidateRow {
    check: String,
    pass: bool,
    k: Option<i64>,
    detail: String,
}

fn run_validate(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let ws = &cfg.weights;
    let report = weights::validate_weights(ws, cfg.window)?;
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for cond in WeightCondition::ALL {
        let violation = report.violation(cond);
        let margin = match (cond, report.analytic_sup_ratio) {
            (WeightCondition::BoundedRatio, Some(bound)) => {
                Some(bound - report.empirical_sup_ratio)
            }
            _ => None,
        };
        tally.check(violation.is_none(), margin);
        let detail = match (violation, cond) {
            (Some(v), _) => v.detail.clone(),
            (None, WeightCondition::BoundedRatio) => format!(
                "empirical sup ratio {} (analytic {})",
                report.empirical_sup_ratio,
                report
                    .analytic_sup_ratio
                    .map_or("unknown".to_string(), |r| r.to_string())
            ),
            (None, _) => String::new(),
        };
        rows.push(ValidateRow {
            check: format!("condition {}", cond.number()),
            pass: violation.is_none(),
            k: violation.map(|v| v.k),
            detail,
        });
    }

    // The trace identity needs the sequence on [-K-1, K].
    let half = cfg.window.k_max.min(-cfg.window.k_min - 1);
    if half >= 1 && ws.domain().is_none() {
        let trace = ws.trace_s_partial(half as u32)?;
        let ok = trace.brackets(ws.w_plus(), TRACE_ULPS);
        tally.check(ok, None);
        rows.push(ValidateRow {
            check: "trace".to_string(),
            pass: ok,
            k: Some(half),
            detail: format!(
                "partial trace {} against w+^2 = {}, tail bound {:e}",
                trace.value,
                ws.w_plus() * ws.w_plus(),
                trace.tail_bound
            ),
        });
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Validate))
}

#[derive(Serialize)]
struct InvertRow {
    n: i64,
    variant: Variant,
    sample: usize,
    right_residual: f64,
    left_residual: f64,
    pass: bool,
}

fn residual_for(
    ws: &WeightSequence,
    n: i64,
    variant: Variant,
    g: &ModeVector,
    window: TruncationWindow,
) -> Result<modes::InverseResidual> {
    match variant {
        Variant::Unbalanced => modes::residual_inverse(ws, n, g, window),
        Variant::Balanced => balanced::residual_inverse_balanced(ws, n, g, window),
    }
}

fn run_invert(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let window = cfg.residual_window();
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for &variant in &cfg.variants {
        for n in cfg.n_min..=cfg.n_max {
            for sample in 0..cfg.samples {
                let g = ModeVector::random(&mut rng, cfg.support);
                let r = residual_for(&cfg.weights, n, variant, &g, window)?;
                let (right, left) = r.relative();
                let worst = right.max(left);
                let pass =
                    tally.check(worst < RESIDUAL_TOLERANCE, Some(RESIDUAL_TOLERANCE - worst));
                rows.push(InvertRow {
                    n,
                    variant,
                    sample,
                    right_residual: right,
                    left_residual: left,
                    pass,
                });
            }
        }
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Invert))
}

#[derive(Serialize)]
struct BoundsRow {
    n: i64,
    variant: Variant,
    k_min: i64,
    k_max: i64,
    norm: f64,
    sy_bound: f64,
    paper_bound: Option<f64>,
    tail: f64,
    pass: bool,
}

impl From<&numerics::BoundReport> for BoundsRow {
    fn from(r: &numerics::BoundReport) -> Self {
        Self {
            n: r.n,
            variant: r.variant,
            k_min: r.window.k_min,
            k_max: r.window.k_max,
            norm: r.norm_estimate,
            sy_bound: r.schur_young_bound,
            paper_bound: r.paper_bound,
            tail: r.tail_bound_used,
            pass: r.pass,
        }
    }
}

fn record_bound(tally: &mut Tally, r: &numerics::BoundReport) {
    let outcome = match (r.pass, r.norm_converged) {
        (false, _) => Outcome::Fail,
        (true, false) => Outcome::Inconclusive,
        (true, true) => Outcome::Pass,
    };
    tally.record(outcome, Some(r.margin()));
}

fn run_bounds(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for &variant in &cfg.variants {
        for n in cfg.nonzero_modes() {
            let r = numerics::bound_report(&cfg.weights, n, variant, cfg.window)?;
            record_bound(&mut tally, &r);
            rows.push(BoundsRow::from(&r));
        }
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Bounds))
}

#[derive(Serialize)]
struct ClassicalRow {
    n: i64,
    t_max: f64,
    m: usize,
    norm: f64,
    lower: f64,
    upper: f64,
    row_sup: f64,
    col_sup: f64,
    residual: f64,
    residual_refined: f64,
    order: f64,
    pass: bool,
}

fn run_classical(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let grid = &cfg.grid;
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for n in cfg.nonzero_modes() {
        let inv = 1.0 / n.unsigned_abs() as f64;
        let (lower, upper) = (CLASSICAL_LOWER_FRACTION * inv, inv + CLASSICAL_UPPER_SLACK);
        let est = classical::classical_norm_estimate(n, grid)?;
        let sums = classical::classical_schur_sums(n, grid);
        let conv =
            classical::residual_convergence(n, |_| num_complex::Complex64::new(1.0, 0.0), grid)?;
        let in_band = est.value >= lower && est.value <= upper;
        let second_order = (conv.order - 2.0).abs() < ORDER_TOLERANCE;
        let pass = in_band && second_order;
        let margin = (upper - est.value)
            .min(est.value - lower)
            .min(ORDER_TOLERANCE - (conv.order - 2.0).abs());
        let outcome = match (pass, est.converged) {
            (false, _) => Outcome::Fail,
            (true, false) => Outcome::Inconclusive,
            (true, true) => Outcome::Pass,
        };
        tally.record(outcome, Some(margin));
        rows.push(ClassicalRow {
            n,
            t_max: grid.t_max(),
            m: grid.len(),
            norm: est.value,
            lower,
            upper,
            row_sup: sums.row_sup,
            col_sup: sums.col_sup,
            residual: conv.coarse,
            residual_refined: conv.fine,
            order: conv.order,
            pass,
        });
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Classical))
}

#[derive(Serialize)]
struct KernelRow {
    n: i64,
    check: &'static str,
    k: i64,
    value: f64,
    target: f64,
    pass: bool,
}

fn run_kernels(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let ws = &cfg.weights;
    let mut tally = Tally::default();
    let mut rows = Vec::new();
    for n in cfg.n_min..=cfg.n_max {
        if n >= 0 {
            // Partial norms of R(n) towards -inf must keep growing past the threshold.
            let ev = modes::kernel_divergence(ws, n, cfg.kernel_k, cfg.kernel_threshold)?;
            let target = cfg.kernel_threshold.ln();
            let pass = tally.check(ev.passed(), Some(ev.ln_final_sum - target));
            rows.push(KernelRow {
                n,
                check: "divergence",
                k: cfg.kernel_k as i64,
                value: ev.ln_final_sum,
                target,
                pass,
            });
        } else {
            // R(n) tends to 1 at +inf, so it violates the boundary condition.
            let r = modes::windowed_kernel_r(ws, n, cfg.window)?;
            let lim = modes::boundary_limit(&r);
            let dist = (lim.estimate - 1.0).norm();
            let pass = tally.check(
                lim.converged && dist < BOUNDARY_TOLERANCE,
                Some(BOUNDARY_TOLERANCE - dist),
            );
            rows.push(KernelRow {
                n,
                check: "boundary",
                k: cfg.window.k_max,
                value: lim.estimate.re,
                target: 1.0,
                pass,
            });
        }
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Kernels))
}

#[derive(Serialize)]
struct SweepRow {
    n: i64,
    variant: Variant,
    worst_residual: f64,
    norm: f64,
    sy_bound: f64,
    paper_bound: Option<f64>,
    sigma1: Option<f64>,
    sigma2: Option<f64>,
    pass: bool,
}

struct SweepResult {
    row: SweepRow,
    report: numerics::BoundReport,
}

fn sweep_one(cfg: &RunConfig, index: usize, n: i64, variant: Variant) -> Result<SweepResult> {
    let ws = &cfg.weights;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let window = cfg.residual_window();
    let mut worst = 0.0_f64;
    for _ in 0..cfg.samples {
        let g = ModeVector::random(&mut rng, cfg.support);
        worst = worst.max(residual_for(ws, n, variant, &g, window)?.worst_relative());
    }
    let report = numerics::bound_report(ws, n, variant, cfg.window)?;
    let sigma = match variant {
        Variant::Balanced => Some(balanced::sigma_sup(ws, n, cfg.window)?),
        Variant::Unbalanced => None,
    };
    let pass = report.pass && worst < RESIDUAL_TOLERANCE;
    Ok(SweepResult {
        row: SweepRow {
            n,
            variant,
            worst_residual: worst,
            norm: report.norm_estimate,
            sy_bound: report.schur_young_bound,
            paper_bound: report.paper_bound,
            sigma1: sigma.map(|s| s.sigma1),
            sigma2: sigma.map(|s| s.sigma2),
            pass,
        },
        report,
    })
}

/// Worker threads for the sweep: `QDISK_THREADS` when set and positive.
pub fn thread_limit() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

fn run_sweep(cfg: &RunConfig, path: &Path) -> Result<SuiteSummary> {
    let tasks: Vec<(usize, i64, Variant)> = cfg
        .variants
        .iter()
        .flat_map(|&v| cfg.nonzero_modes().map(move |n| (n, v)))
        .enumerate()
        .map(|(i, (n, v))| (i, n, v))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = thread_limit() {
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker threads: {e}")))?;
    let results: Vec<SweepResult> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(i, n, v)| sweep_one(cfg, i, n, v))
            .collect::<Result<_>>()
    })?;

    let mut tally = Tally::default();
    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let residual_ok = r.row.worst_residual < RESIDUAL_TOLERANCE;
        let margin = r
            .report
            .margin()
            .min(RESIDUAL_TOLERANCE - r.row.worst_residual);
        let outcome = match (r.row.pass && residual_ok, r.report.norm_converged) {
            (false, _) => Outcome::Fail,
            (true, false) => Outcome::Inconclusive,
            (true, true) => Outcome::Pass,
        };
        tally.record(outcome, Some(margin));
        rows.push(r.row);
    }
    write_csv(path, &rows)?;
    Ok(tally.summary(Suite::Sweep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_defaults_and_overrides() {
        let cfg = RunConfig::parse("", Path::new(".")).unwrap();
        assert_eq!(cfg.window, TruncationWindow::default());
        assert_eq!(cfg.variants.len(), 2);

        let text = "# comment\nfamily = arctan\ntau = 1.5  # inline\nvariant = balanced\nn_min = -3\nn_max = 4\nk_min = -50\nk_max = 60\ngrid_m = 100\n";
        let cfg = RunConfig::parse(text, Path::new(".")).unwrap();
        assert_eq!(cfg.weights.kind(), FamilyKind::Arctan);
        assert_eq!(cfg.variants, vec![Variant::Balanced]);
        assert_eq!(cfg.nonzero_modes().count(), 7);
        assert_eq!(cfg.window, TruncationWindow::new(-50, 60).unwrap());
        assert_eq!(cfg.grid.len(), 100);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "tau = -1",
            "family = hyperbolic",
            "bogus = 3",
            "n_min = 3\nn_max = 1",
            "k_min = 5\nk_max = 5",
            "grid_m = 8",
            "support = 300",
            "family = user-table",
            "no equals sign",
            "tail = spline",
        ] {
            assert!(RunConfig::parse(text, Path::new(".")).is_err(), "{text}");
        }
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn exit_codes() {
        let mut t = Tally::default();
        t.check(true, Some(0.5));
        assert_eq!(t.summary(Suite::Bounds).exit_code(), 0);
        let mut t = Tally::default();
        t.record(Outcome::Inconclusive, None);
        assert_eq!(t.summary(Suite::Bounds).exit_code(), 3);
        let mut t = Tally::default();
        t.record(Outcome::Inconclusive, None);
        t.check(false, Some(-1.0));
        let s = t.summary(Suite::Bounds);
        assert_eq!(s.exit_code(), 1);
        assert_eq!(s.worst_margin, Some(-1.0));
    }
}
