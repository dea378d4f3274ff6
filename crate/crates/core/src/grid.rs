//! Rectangular parameter grids and the data-parallel cell map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::MeasureError;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]` in the parameter plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, MeasureError> {
        let ok = [x0, x1, y0, y1].iter().all(|v| v.is_finite()) && x1 > x0 && y1 > y0;
        if !ok {
            return Err(MeasureError::BadRect);
        }
        Ok(Self { x0, x1, y0, y1 })
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (self.x0..=self.x1).contains(&z.re) && (self.y0..=self.y1).contains(&z.im)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// A rectangle subdivided into `nx × ny` cells; cell `(i, j)` is stored at
/// `j * nx + i` with `j` counting upward from `y0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
}

impl Grid {
    pub fn new(rect: Rect, nx: usize, ny: usize) -> Result<Self, MeasureError> {
        if nx == 0 || ny == 0 {
            return Err(MeasureError::GridTooSmall { nx, ny });
        }
        Ok(Self { rect, nx, ny })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn hx(&self) -> f64 {
        self.rect.width() / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.rect.height() / self.ny as f64
    }

    pub fn center(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.rect.x0 + (i as f64 + 0.5) * self.hx(),
            self.rect.y0 + (j as f64 + 0.5) * self.hy(),
        )
    }

    pub fn center_of(&self, idx: usize) -> Complex64 {
        self.center(idx % self.nx, idx / self.nx)
    }

    /// Cell containing `z`; points on the far edges go to the last cell.
    pub fn cell_of(&self, z: Complex64) -> Option<(usize, usize)> {
        if !self.rect.contains(z) {
            return None;
        }
        let i = (((z.re - self.rect.x0) / self.hx()) as usize).min(self.nx - 1);
        let j = (((z.im - self.rect.y0) / self.hy()) as usize).min(self.ny - 1);
        Some((i, j))
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self == other
    }
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is on.
/// Output order is the index order regardless of scheduling.
pub fn par_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
