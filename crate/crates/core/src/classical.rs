//! Continuum modes on the punctured disk in the coordinate `t = -ln r`.
//!
//! On mode `n` the operator becomes `A f = f'(t) - n f(t)` on `[0, T]` with the
//! Lebesgue measure `dt`. Its inverse is a convolution-type integral:
//!
//! * `n > 0`: `Q g(t) = -int_t^T e^(-n (s - t)) g(s) ds`;
//! * `n <= 0`: `Q g(t) = int_0^t e^(-|n| (t - s)) g(s) ds`, so `Q g(0) = 0`.
//!
//! Integrals use the trapezoid rule on a uniform grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{
    operator_norm, LinearOperator, NormEstimate, OperatorMatrix, SemiseparableOperator, Triangle,
    TruncationWindow,
};

/// Fewest grid points accepted.
pub const MIN_GRID_POINTS: usize = 16;

/// Uniform grid on `[0, T]` with trapezoid weights.
#[derive(Debug, Clone, PartialEq)]
pub struct LogGrid {
    t_max: f64,
    m: usize,
}

impl LogGrid {
    pub fn new(t_max: f64, m: usize) -> Result<Self> {
        if !(t_max.is_finite() && t_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "grid_t",
                value: t_max,
                reason: "must be finite and positive",
            });
        }
        if m < MIN_GRID_POINTS {
            return Err(Error::GridTooCoarse {
                m,
                min: MIN_GRID_POINTS,
            });
        }
        Ok(Self { t_max, m })
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.t_max / (self.m - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.m {
            self.t_max
        } else {
            i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.node(i)).collect()
    }

    pub fn quad_weight(&self, i: usize) -> f64 {
        let h = self.spacing();
        if i == 0 || i + 1 == self.m {
            0.5 * h
        } else {
            h
        }
    }

    pub fn quad_weights(&self) -> Vec<f64> {
        (0..self.m).map(|i| self.quad_weight(i)).collect()
    }

    /// The grid with every interval halved: `2m - 1` points.
    pub fn refined(&self) -> Self {
        Self {
            t_max: self.t_max,
            m: 2 * self.m - 1,
        }
    }
}

impl Default for LogGrid {
    fn default() -> Self {
        Self {
            t_max: 20.0,
            m: 2000,
        }
    }
}

/// Samples of one Fourier mode on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModeFunction {
    pub values: Vec<Complex64>,
}

impl ClassicalModeFunction {
    pub fn new(grid: &LogGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Precondition(format!(
                "{} samples for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { values })
    }

    pub fn from_fn(grid: &LogGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self {
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn zeros(grid: &LogGrid) -> Self {
        Self {
            values: vec![Complex64::default(); grid.len()],
        }
    }

    /// `(sum_i q_i |f_i|^2)^(1/2)` with trapezoid weights `q`.
    pub fn l2_norm(&self, grid: &LogGrid) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, z)| grid.quad_weight(i) * z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// The discretized parametrix as a structured operator. `normalized`
/// conjugates by the square roots of the trapezoid weights so Euclidean
/// norms are `L^2(dt)` norms.
fn structured(n: i64, grid: &LogGrid, normalized: bool) -> SemiseparableOperator {
    let m = grid.len();
    let h = grid.spacing();
    let rho = (-(n.unsigned_abs() as f64) * h).exp();
    let sq: Vec<f64> = (0..m)
        .map(|i| {
            if normalized {
                grid.quad_weight(i).sqrt()
            } else {
                1.0
            }
        })
        .collect();
    if n <= 0 {
        // Row i integrates over [0, t_i]: weight h/2 at s = 0 and s = t_i.
        let right = (0..m)
            .map(|j| if j == 0 { 0.5 * h } else { h } / sq[j])
            .collect();
        let diag = (0..m).map(|i| if i == 0 { 0.0 } else { 0.5 * h }).collect();
        SemiseparableOperator {
            triangle: Triangle::Lower,
            diag,
            left: sq,
            right,
            transfer: vec![rho; m],
        }
    } else {
        // Row i integrates over [t_i, T]: weight h/2 at s = t_i and s = T.
        let right = (0..m)
            .map(|j| if j + 1 == m { 0.5 * h } else { h } / sq[j])
            .collect();
        let diag = (0..m)
            .map(|i| if i + 1 == m { 0.0 } else { -0.5 * h })
            .collect();
        SemiseparableOperator {
            triangle: Triangle::Upper,
            diag,
            left: sq.iter().map(|v| -v).collect(),
            right,
            transfer: vec![rho; m],
        }
    }
}

fn grid_window(grid: &LogGrid) -> TruncationWindow {
    TruncationWindow {
        k_min: 0,
        k_max: grid.len() as i64 - 1,
    }
}

/// Dense matrix of the discretized parametrix in the `L^2(dt)`-orthonormalized
/// basis, indexed by grid nodes.
pub fn classical_q_matrix(n: i64, grid: &LogGrid) -> OperatorMatrix {
    structured(n, grid, true).to_dense(grid_window(grid))
}

/// The same operator as [`classical_q_matrix`] with `O(m)` application.
pub fn classical_q_operator(n: i64, grid: &LogGrid) -> SemiseparableOperator {
    structured(n, grid, true)
}

/// `Q g` by trapezoid quadrature.
pub fn apply_classical_q(
    n: i64,
    g: &ClassicalModeFunction,
    grid: &LogGrid,
) -> Result<ClassicalModeFunction> {
    if g.values.len() != grid.len() {
        return Err(Error::Precondition(format!(
            "{} samples for a grid of {} points",
            g.values.len(),
            grid.len()
        )));
    }
    let op = structured(n, grid, false);
    let m = grid.len();
    let re: Vec<f64> = g.values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = g.values.iter().map(|z| z.im).collect();
    let (mut yr, mut yi) = (vec![0.0; m], vec![0.0; m]);
    op.apply(&re, &mut yr);
    op.apply(&im, &mut yi);
    Ok(ClassicalModeFunction {
        values: yr
            .into_iter()
            .zip(yi)
            .map(|(a, b)| Complex64::new(a, b))
            .collect(),
    })
}

/// Tolerance used for classical norm estimates; the top singular values
/// cluster for large `|n|`, so tighter values only cost iterations.
pub const CLASSICAL_NORM_TOLERANCE: f64 = 1e-12;

/// Largest singular value of the discretized parametrix.
pub fn classical_norm_estimate(n: i64, grid: &LogGrid) -> Result<NormEstimate> {
    if n == 0 {
        return Err(Error::Precondition("no norm claim for n = 0".to_string()));
    }
    operator_norm(&classical_q_operator(n, grid), CLASSICAL_NORM_TOLERANCE)
}

/// Largest row and column integrals of `|K|` under the quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalSchurSums {
    pub row_sup: f64,
    pub col_sup: f64,
}

pub fn classical_schur_sums(n: i64, grid: &LogGrid) -> ClassicalSchurSums {
    let m = grid.len();
    let ones = vec![1.0; m];
    let sup = |op: SemiseparableOperator| {
        let mut y = vec![0.0; m];
        op.apply(&ones, &mut y);
        y.iter().map(|x| x.abs()).fold(0.0, f64::max)
    };
    // The kernel depends on t - s only, so column integrals of mode n are the
    // row integrals of mode -n.
    ClassicalSchurSums {
        row_sup: sup(structured(n, grid, false)),
        col_sup: sup(structured(-n, grid, false)),
    }
}

/// Discrete `L^2` norm of `(Q g)' - n Q g - g` over interior nodes, using
/// central differences and dropping two nodes at each end.
pub fn classical_residual(n: i64, g: &ClassicalModeFunction, grid: &LogGrid) -> Result<f64> {
    let f = apply_classical_q(n, g, grid)?;
    let h = grid.spacing();
    let m = grid.len();
    let nf = n as f64;
    let sum: f64 = (2..m - 2)
        .map(|i| {
            let d = (f.values[i + 1] - f.values[i - 1]) / (2.0 * h);
            (d - nf * f.values[i] - g.values[i]).norm_sqr() * h
        })
        .sum();
    Ok(sum.sqrt())
}

/// Residuals on a grid and its refinement, with the observed order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceOrder {
    pub coarse: f64,
    pub fine: f64,
    pub order: f64,
}

/// Compares [`classical_residual`] on `grid` and on `grid.refined()` for
/// input `g` given as a function of `t`.
pub fn residual_convergence(
    n: i64,
    g: impl Fn(f64) -> Complex64,
    grid: &LogGrid,
) -> Result<ConvergenceOrder> {
    let coarse = classical_residual(n, &ClassicalModeFunction::from_fn(grid, &g), grid)?;
    let fine_grid = grid.refined();
    let fine = classical_residual(
        n,
        &ClassicalModeFunction::from_fn(&fine_grid, &g),
        &fine_grid,
    )?;
    Ok(ConvergenceOrder {
        coarse,
        fine,
        order: (coarse / fine).log2(),
    })
}
