//! Certified escape-rate (dynamical Green) functions on fibers and their
//! restriction to marked points over a parameter grid.
//!
//! For a homogeneous lift `F` of degree `d` the Green function is
//! `G(Z) = lim d^-n log ‖F^n(Z)‖` (sup norm). With `Ẑ_k` the normalized
//! iterates, `G(Z) = log ‖Z‖ + Σ_k d^-(k+1) log ‖F(Ẑ_k)‖`, and each summand is
//! bounded by `C = sup_{‖W‖=1} |log ‖F(W)‖|`, so stopping after `n` terms
//! leaves an error at most `C d^-n / (d - 1)`.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::GaussianRational;
use crate::error::{GreenError, MeasureError};
use crate::family::{FiberMap, MapFamily, MarkedPoint, NumericFamily};
use crate::grid::{par_map, Grid};
use crate::preperiodic::{self, Persistence};

/// Iteration budget per evaluation; cells that need more are masked.
pub const MAX_ITERATIONS: u64 = 10_000;

/// Rounding slack charged per floating-point operation.
const OP_SLACK: f64 = 1e-15;

/// Green value with a certified error radius, in natural-log units.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GreenValue {
    pub value: f64,
    pub error: f64,
    pub iterations: u64,
}

impl GreenValue {
    pub fn contains(&self, x: f64) -> bool {
        (self.value - x).abs() <= self.error
    }
}

/// `sup |log ‖F(W)‖|` over the unit sphere of the sup norm.
pub fn escape_constant(f: &FiberMap) -> Result<f64, GreenError> {
    let (lower, upper) = f.norm_bounds().ok_or(GreenError::NoLowerBound)?;
    if !(lower > 0.0) {
        return Err(GreenError::NoLowerBound);
    }
    Ok(lower.ln().abs().max(upper.ln().abs()))
}

/// Rounding model: each summand carries a relative error of a few ulps per
/// operation and enters with weight `d^-(k+1)`, so the total stays bounded
/// independently of the number of terms.
fn rounding_slack(d: usize, c: f64, log_norm: f64) -> f64 {
    let ops_per_step = (6 * (d + 1) + 6) as f64;
    let weights = d as f64 / (d as f64 - 1.0);
    OP_SLACK * (ops_per_step * weights * (1.0 + c) + 1.0 + log_norm.abs())
}

fn truncation(c: f64, d: usize, n: u64) -> f64 {
    c * (d as f64).powf(-(n as f64)) / (d as f64 - 1.0)
}

/// Green function of the lift `z` (a homogeneous pair), to within `tol`.
pub fn green_value(f: &FiberMap, z: [Complex64; 2], tol: f64) -> Result<GreenValue, GreenError> {
    if !(tol > 0.0) {
        return Err(GreenError::BadTolerance);
    }
    let norm = z[0].norm().max(z[1].norm());
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(GreenError::InvalidPoint);
    }
    let c = escape_constant(f)?;
    let d = f.degree();
    let log_norm = norm.ln();
    let mut n = if c == 0.0 {
        0
    } else {
        let need = (c / ((d as f64 - 1.0) * 0.5 * tol)).ln() / (d as f64).ln();
        need.ceil().max(0.0) as u64
    };
    while n <= MAX_ITERATIONS
        && truncation(c, d, n) + rounding_slack(d, c, log_norm) > tol
    {
        n += 1;
    }
    if n > MAX_ITERATIONS {
        return Err(GreenError::NonConvergence {
            required: n,
            budget: MAX_ITERATIONS,
        });
    }
    evaluate(f, z, n, c)
}

/// Green function truncated after exactly `n` iterations.
pub fn green_value_with_iterations(
    f: &FiberMap,
    z: [Complex64; 2],
    n: u64,
) -> Result<GreenValue, GreenError> {
    let c = escape_constant(f)?;
    evaluate(f, z, n, c)
}

fn evaluate(f: &FiberMap, z: [Complex64; 2], n: u64, c: f64) -> Result<GreenValue, GreenError> {
    let d = f.degree();
    let norm = z[0].norm().max(z[1].norm());
    if !(norm > 0.0) || !norm.is_finite() {
        return Err(GreenError::InvalidPoint);
    }
    let log_norm = norm.ln();
    let mut w = [z[0] / norm, z[1] / norm];
    let mut value = log_norm;
    let mut weight = 1.0;
    let inv_d = 1.0 / d as f64;
    for _ in 0..n {
        let fw = f.apply(w);
        let m = fw[0].norm().max(fw[1].norm());
        weight *= inv_d;
        value += weight * m.ln();
        w = [fw[0] / m, fw[1] / m];
    }
    Ok(GreenValue {
        value,
        error: truncation(c, d, n) + rounding_slack(d, c, log_norm),
        iterations: n,
    })
}

/// `g(s) = G_{f_s}(a(s))` sampled at the cell centers of a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridPotential {
    pub grid: Grid,
    /// Row-major values, `NaN` on masked cells.
    pub values: Vec<f64>,
    /// Uniform certified error over unmasked cells.
    pub error: f64,
    /// Requested tolerance.
    pub tol: f64,
    /// Cells whose fiber was degenerate or whose evaluation did not converge.
    pub mask: Vec<bool>,
    /// Set when the marked point was certified persistently preperiodic,
    /// in which case the potential is pluriharmonic in `s`.
    pub persistent: Option<(usize, usize)>,
    pub max_iterations: u64,
}

impl GridPotential {
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.grid.nx + i]
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn min_unmasked(&self) -> Option<f64> {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .map(|(&v, _)| v)
            .reduce(f64::min)
    }

    pub fn max_abs_unmasked(&self) -> f64 {
        self.values
            .iter()
            .zip(&self.mask)
            .filter(|(_, &m)| !m)
            .fold(0.0, |acc, (&v, _)| acc.max(v.abs()))
    }

    /// A potential sampled from an arbitrary function, error `tol` everywhere.
    pub fn from_fn(grid: Grid, tol: f64, f: impl Fn(Complex64) -> f64 + Sync + Send) -> Self {
        let values = par_map(grid.len(), |idx| f(grid.center_of(idx)));
        let mask = values.iter().map(|v| !v.is_finite()).collect();
        Self {
            grid,
            values,
            error: tol,
            tol,
            mask,
            persistent: None,
            max_iterations: 0,
        }
    }
}

struct CellEval {
    fam: NumericFamily,
    a: [Vec<Complex64>; 2],
    shift: Complex64,
}

impl CellEval {
    fn new(fam: &MapFamily, a: &MarkedPoint, shift: &GaussianRational) -> Self {
        Self {
            fam: fam.numeric(),
            a: [a.a().to_complex(), a.b().to_complex()],
            shift: shift.to_complex(),
        }
    }

    fn eval(&self, s: Complex64, tol: f64) -> Option<GreenValue> {
        let s = s + self.shift;
        let f = self.fam.fiber(s).ok()?;
        let z = [
            crate::arith::horner(&self.a[0], s),
            crate::arith::horner(&self.a[1], s),
        ];
        green_value(&f, z, tol).ok()
    }
}

/// Persistence depth checked before sampling a marked potential.
const PERSISTENCE_PROBE: usize = 2;

fn fill(
    grid: Grid,
    tol: f64,
    entries: &[(MapFamily, MarkedPoint, GaussianRational)],
) -> GridPotential {
    let evals: Vec<CellEval> = entries
        .iter()
        .map(|(fam, a, shift)| CellEval::new(fam, a, shift))
        .collect();
    let cells: Vec<Option<GreenValue>> = par_map(grid.len(), |idx| {
        let s = grid.center_of(idx);
        let mut best: Option<GreenValue> = None;
        for e in &evals {
            let g = e.eval(s, tol)?;
            best = Some(match best {
                None => g,
                Some(b) => GreenValue {
                    value: b.value.max(g.value),
                    error: b.error.max(g.error),
                    iterations: b.iterations.max(g.iterations),
                },
            });
        }
        best
    });
    let mut error: f64 = 0.0;
    let mut max_iterations = 0;
    let mut values = Vec::with_capacity(cells.len());
    let mut mask = Vec::with_capacity(cells.len());
    for c in &cells {
        match c {
            Some(g) => {
                error = error.max(g.error);
                max_iterations = max_iterations.max(g.iterations);
                values.push(g.value);
                mask.push(false);
            }
            None => {
                values.push(f64::NAN);
                mask.push(true);
            }
        }
    }
    GridPotential {
        grid,
        values,
        error,
        tol,
        mask,
        persistent: None,
        max_iterations,
    }
}

/// Samples the marked-point potential on the cell centers of `grid`.
/// Degenerate or non-converging cells are masked, never fatal.
pub fn marked_potential_grid(
    fam: &MapFamily,
    a: &MarkedPoint,
    grid: Grid,
    tol: f64,
) -> Result<GridPotential, MeasureError> {
    if !(tol > 0.0) {
        return Err(MeasureError::BadTolerance(tol));
    }
    let mut pot = fill(grid, tol, &[(fam.clone(), a.clone(), GaussianRational::zero())]);
    if let Persistence::Persistent { tail, period } =
        preperiodic::is_persistently_preperiodic(fam, a, PERSISTENCE_PROBE)
    {
        pot.persistent = Some((tail, period));
    }
    Ok(pot)
}

/// Pointwise maximum of marked potentials, each evaluated at `s + shift`.
pub fn product_potential_grid(
    entries: &[(MapFamily, MarkedPoint, GaussianRational)],
    grid: Grid,
    tol: f64,
) -> Result<GridPotential, MeasureError> {
    if !(tol > 0.0) {
        return Err(MeasureError::BadTolerance(tol));
    }
    if entries.is_empty() {
        return Err(MeasureError::GridMismatch);
    }
    Ok(fill(grid, tol, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Rect;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one() -> Complex64 {
        c(1.0, 0.0)
    }

    fn square() -> FiberMap {
        FiberMap::polynomial(&[c(0.0, 0.0), c(0.0, 0.0), one()]).unwrap()
    }

    #[test]
    fn power_map_values() {
        let g = green_value(&square(), [c(2.0, 0.0), one()], 1e-9).unwrap();
        assert!(g.contains(2f64.ln()) && g.error <= 1e-9);
        let g = green_value(&square(), [c(0.5, 0.0), one()], 1e-9).unwrap();
        assert!(g.contains(0.0));
    }

    #[test]
    fn chebyshev_value() {
        // z = w + 1/w with w + 1/w = 3
        let f = FiberMap::polynomial(&[c(-2.0, 0.0), c(0.0, 0.0), one()]).unwrap();
        let g = green_value(&f, [c(3.0, 0.0), one()], 1e-8).unwrap();
        let w: f64 = (3.0 + 5f64.sqrt()) / 2.0;
        assert!(g.contains(w.ln()), "{g:?}");
        assert!((g.value - 0.9624236501).abs() < 1e-8);
    }

    #[test]
    fn error_shrinks_by_degree_per_iteration() {
        let f = FiberMap::polynomial(&[c(0.3, 0.4), c(0.0, 0.0), one()]).unwrap();
        let z = [c(0.1, 0.0), one()];
        for n in 0..8 {
            let a = green_value_with_iterations(&f, z, n).unwrap();
            let b = green_value_with_iterations(&f, z, n + 1).unwrap();
            assert!(((a.error / b.error) - 2.0).abs() < 1e-6, "n={n}");
            // successive truncations stay within each other's radius
            assert!((a.value - b.value).abs() <= a.error);
        }
    }

    #[test]
    fn functional_equation_on_a_rational_map() {
        // (X^2 + 0.3 XY : X Y + 2 Y^2 - 0.5 X^2)
        let f = FiberMap::new(
            vec![c(0.0, 0.0), c(0.3, 0.1), one()],
            vec![c(2.0, 0.0), one(), c(-0.5, 0.0)],
        )
        .unwrap();
        let tol = 1e-10;
        for k in 0..20 {
            let t = k as f64;
            let z = [c((0.7 * t).cos() * 3.0, (1.3 * t).sin()), c(1.0, 0.2 * t)];
            let g = green_value(&f, z, tol).unwrap();
            let gf = green_value(&f, f.apply(z), tol).unwrap();
            assert!((gf.value - 2.0 * g.value).abs() <= 3.0 * tol);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            green_value(&square(), [c(0.0, 0.0), c(0.0, 0.0)], 1e-9),
            Err(GreenError::InvalidPoint)
        );
        assert_eq!(
            green_value(&square(), [one(), one()], 0.0),
            Err(GreenError::BadTolerance)
        );
    }

    #[test]
    fn potential_grid_masks_degenerate_cells() {
        use crate::arith::ParamPolynomial;
        use crate::family::Form;
        // P = X^2, Q = s Y^2: the fiber over s = 0 is degenerate
        let p = Form::new(vec![ParamPolynomial::zero(), ParamPolynomial::zero(), ParamPolynomial::one()]);
        let q = Form::new(vec![ParamPolynomial::var(), ParamPolynomial::zero(), ParamPolynomial::zero()]);
        let fam = MapFamily::new(p, q).unwrap();
        let grid = Grid::new(Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 3, 3).unwrap();
        let pot = marked_potential_grid(&fam, &MarkedPoint::identity(), grid, 1e-6).unwrap();
        assert!(pot.mask[4]);
        assert_eq!(pot.masked_count(), 1);
    }

    #[test]
    fn mandelbrot_potential_values() {
        let grid = Grid::new(Rect::new(-1.0, 3.0, -1.0, 1.0).unwrap(), 2, 1).unwrap();
        let fam = MapFamily::quadratic();
        let a = MarkedPoint::constant(GaussianRational::zero());
        let pot = marked_potential_grid(&fam, &a, grid, 1e-8).unwrap();
        // centers s = 0 and s = 2
        assert!(pot.values[0].abs() <= 1e-8);
        let f = fam.specialize(c(2.0, 0.0)).unwrap();
        let direct = green_value(&f, [c(0.0, 0.0), one()], 1e-12).unwrap();
        assert!((pot.values[1] - direct.value).abs() <= 2e-8 && pot.values[1] > 0.0);
        assert_eq!(pot.persistent, None);

        let inf = marked_potential_grid(&fam, &MarkedPoint::infinity(), grid, 1e-8).unwrap();
        assert_eq!(inf.persistent, Some((0, 1)));
    }
}
