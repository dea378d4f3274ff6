//! Discrete dd^c of grid potentials, masses, the marked-point rank test and
//! comparison of measures on dyadic boxes.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::MeasureError;
use crate::family::{MapFamily, MarkedPoint};
use crate::green::{marked_potential_grid, GridPotential};
use crate::grid::{par_map, Grid};
use crate::preperiodic::{is_persistently_preperiodic, Persistence};

/// Factor between the discretization slack and the "mass-positive" cutoff.
pub const SUPPORT_FACTOR: f64 = 10.0;

/// Nonnegative cell masses on a grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    pub grid: Grid,
    /// Row-major masses, clamped at 0; excluded cells hold 0.
    pub masses: Vec<f64>,
    /// Masses before clamping.
    pub signed: Vec<f64>,
    /// Sum of `masses`.
    pub total: f64,
    /// Sum of `signed`.
    pub signed_total: f64,
    /// Number of cell rings skipped at the boundary.
    pub interior_margin: usize,
    /// Cells excluded from the measure (boundary ring, masked neighbours).
    pub mask: Vec<bool>,
    /// Smallest signed mass over included cells.
    pub min_signed: f64,
    /// Discretization slack; signed masses below `-slack` indicate an error.
    pub slack: f64,
}

impl DiscreteMeasure {
    fn from_masses(grid: Grid, signed: Vec<f64>, mask: Vec<bool>, margin: usize, slack: f64) -> Self {
        let masses: Vec<f64> = signed.iter().map(|&m| m.max(0.0)).collect();
        let total = masses.iter().sum();
        let signed_total = signed.iter().sum();
        let min_signed = signed
            .iter()
            .zip(&mask)
            .filter(|(_, &x)| !x)
            .map(|(&m, _)| m)
            .fold(f64::INFINITY, f64::min);
        Self {
            grid,
            masses,
            signed,
            total,
            signed_total,
            interior_margin: margin,
            mask,
            min_signed: if min_signed.is_finite() { min_signed } else { 0.0 },
            slack,
        }
    }

    pub fn mass(&self, i: usize, j: usize) -> f64 {
        self.masses[j * self.grid.nx + i]
    }

    /// Cutoff above which a cell counts as carrying genuine mass.
    pub fn support_threshold(&self) -> f64 {
        SUPPORT_FACTOR * self.slack
    }

    /// Cells whose mass exceeds [`Self::support_threshold`].
    pub fn support(&self) -> Vec<bool> {
        let t = self.support_threshold();
        self.masses.iter().map(|&m| m > t).collect()
    }

    /// Whether some support cell lies within `radius` cells (Chebyshev
    /// distance) of the cell containing `z`.
    pub fn near_support(&self, support: &[bool], z: Complex64, radius: usize) -> bool {
        let Some((i, j)) = self.grid.cell_of(z) else {
            return false;
        };
        let (nx, ny) = (self.grid.nx, self.grid.ny);
        let (i0, i1) = (i.saturating_sub(radius), (i + radius).min(nx - 1));
        let (j0, j1) = (j.saturating_sub(radius), (j + radius).min(ny - 1));
        (j0..=j1).any(|jj| (i0..=i1).any(|ii| support[jj * nx + ii]))
    }

    /// Cellwise `alpha * self + other` on signed masses.
    pub fn combine(&self, alpha: f64, other: &DiscreteMeasure) -> Result<DiscreteMeasure, MeasureError> {
        if self.grid != other.grid {
            return Err(MeasureError::GridMismatch);
        }
        let signed = self
            .signed
            .iter()
            .zip(&other.signed)
            .map(|(a, b)| alpha * a + b)
            .collect();
        let mask = self.mask.iter().zip(&other.mask).map(|(a, b)| *a || *b).collect();
        Ok(Self::from_masses(
            self.grid,
            signed,
            mask,
            self.interior_margin.max(other.interior_margin),
            alpha.abs() * self.slack + other.slack,
        ))
    }
}

/// `(1/2π)` times the 5-point Laplacian of `pot`. The outer ring and every
/// cell touching a masked cell are excluded.
pub fn ddc(pot: &GridPotential) -> Result<DiscreteMeasure, MeasureError> {
    let grid = pot.grid;
    let (nx, ny) = (grid.nx, grid.ny);
    if nx < 3 || ny < 3 {
        return Err(MeasureError::GridTooSmall { nx, ny });
    }
    let (hx, hy) = (grid.hx(), grid.hy());
    let (wx, wy) = (hy / hx, hx / hy);
    let v = &pot.values;
    let masked = &pot.mask;
    let cells: Vec<Option<f64>> = par_map(grid.len(), |idx| {
        let (i, j) = (idx % nx, idx / nx);
        if i == 0 || j == 0 || i == nx - 1 || j == ny - 1 {
            return None;
        }
        let nb = [idx, idx - 1, idx + 1, idx - nx, idx + nx];
        if nb.iter().any(|&k| masked[k]) {
            return None;
        }
        let c = v[idx];
        let lap = wx * (v[idx + 1] + v[idx - 1] - 2.0 * c) + wy * (v[idx + nx] + v[idx - nx] - 2.0 * c);
        Some(lap / TAU)
    });
    let mask: Vec<bool> = cells.iter().map(Option::is_none).collect();
    let signed: Vec<f64> = cells.iter().map(|c| c.unwrap_or(0.0)).collect();
    let tol = pot.tol.max(pot.error);
    // sum of absolute stencil weights is 8 on square cells
    let weight = 4.0 * (wx + wy);
    let slack = weight * tol / TAU + 1e-12 * pot.max_abs_unmasked();
    Ok(DiscreteMeasure::from_masses(grid, signed, mask, 1, slack))
}

pub fn total_mass(mu: &DiscreteMeasure) -> f64 {
    mu.total
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "rank", rename_all = "snake_case")]
pub enum PhiRank {
    /// Rank 0 with an exact persistence certificate.
    Zero { tail: usize, period: usize },
    /// Rank 1: mass above the threshold.
    One { mass: f64, slack: f64 },
    /// Mass below the threshold but no certificate: zero within resolution.
    Inconclusive { mass: f64, slack: f64 },
}

impl PhiRank {
    pub fn value(&self) -> Option<u8> {
        match self {
            PhiRank::Zero { .. } => Some(0),
            PhiRank::One { .. } => Some(1),
            PhiRank::Inconclusive { .. } => None,
        }
    }
}

/// Persistence depth probed before falling back to the mass test.
pub const RANK_PERSISTENCE_DEPTH: usize = 6;

/// Rank of the graph of `a`: certified 0 when `a` is persistently
/// preperiodic, otherwise decided by the dd^c mass of its potential.
pub fn phi_rank_marked(
    fam: &MapFamily,
    a: &MarkedPoint,
    grid: Grid,
    tol: f64,
    threshold: f64,
) -> Result<(PhiRank, Option<DiscreteMeasure>), MeasureError> {
    if let Persistence::Persistent { tail, period } =
        is_persistently_preperiodic(fam, a, RANK_PERSISTENCE_DEPTH)
    {
        return Ok((PhiRank::Zero { tail, period }, None));
    }
    let pot = marked_potential_grid(fam, a, grid, tol)?;
    let mu = ddc(&pot)?;
    if !(threshold > mu.slack) {
        return Err(MeasureError::ThresholdBelowSlack {
            threshold,
            slack: mu.slack,
        });
    }
    let (mass, slack) = (mu.total, mu.slack);
    let rank = if mass > threshold {
        PhiRank::One { mass, slack }
    } else {
        PhiRank::Inconclusive { mass, slack }
    };
    Ok((rank, Some(mu)))
}

/// Each point inside the rectangle carries `1 / (points inside)`.
pub fn empirical_measure(points: &[Complex64], grid: Grid) -> DiscreteMeasure {
    let cells: Vec<(usize, usize)> = points.iter().filter_map(|&z| grid.cell_of(z)).collect();
    let mut signed = vec![0.0; grid.len()];
    if !cells.is_empty() {
        let w = 1.0 / cells.len() as f64;
        for (i, j) in cells {
            signed[j * grid.nx + i] += w;
        }
    }
    DiscreteMeasure::from_masses(grid, signed, vec![false; grid.len()], 0, 0.0)
}

/// Normalized arc length of the circle `|s - center| = radius` in each cell.
pub fn uniform_circle_measure(grid: Grid, center: Complex64, radius: f64) -> DiscreteMeasure {
    let mut angles = vec![0.0, TAU];
    let mut crossings = |offset: f64, horizontal: bool| {
        if offset.abs() > radius {
            return;
        }
        let t = (offset / radius).acos();
        for a in [t, -t] {
            let a = if horizontal { PI / 2.0 - a } else { a };
            angles.push(a.rem_euclid(TAU));
        }
    };
    for k in 0..=grid.nx {
        crossings(grid.rect.x0 + k as f64 * grid.hx() - center.re, false);
    }
    for k in 0..=grid.ny {
        crossings(grid.rect.y0 + k as f64 * grid.hy() - center.im, true);
    }
    angles.sort_by(f64::total_cmp);
    let mut signed = vec![0.0; grid.len()];
    for w in angles.windows(2) {
        let arc = w[1] - w[0];
        if arc <= 0.0 {
            continue;
        }
        let mid = 0.5 * (w[0] + w[1]);
        if let Some((i, j)) = grid.cell_of(center + Complex64::from_polar(radius, mid)) {
            signed[j * grid.nx + i] += arc / TAU;
        }
    }
    DiscreteMeasure::from_masses(grid, signed, vec![false; grid.len()], 0, 0.0)
}

/// Largest difference of normalized masses over the `4^level` dyadic boxes.
pub fn box_discrepancy(mu: &DiscreteMeasure, nu: &DiscreteMeasure, level: u32) -> Result<f64, MeasureError> {
    if mu.grid != nu.grid {
        return Err(MeasureError::GridMismatch);
    }
    let (nx, ny) = (mu.grid.nx, mu.grid.ny);
    let k = 1usize.checked_shl(level).filter(|&k| k <= nx && k <= ny && nx % k == 0 && ny % k == 0);
    let Some(k) = k else {
        return Err(MeasureError::BadLevel { level, nx, ny });
    };
    if !(mu.total > 0.0) || !(nu.total > 0.0) {
        return Err(MeasureError::ZeroTotal);
    }
    let boxes = |m: &DiscreteMeasure| {
        let mut b = vec![0.0; k * k];
        for j in 0..ny {
            for i in 0..nx {
                b[(j / (ny / k)) * k + i / (nx / k)] += m.masses[j * nx + i];
            }
        }
        b.into_iter().map(|x| x / m.total).collect::<Vec<_>>()
    };
    let (bm, bn) = (boxes(mu), boxes(nu));
    Ok(bm
        .iter()
        .zip(&bn)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
