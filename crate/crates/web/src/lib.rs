//! Browser bindings: potential heatmaps, dd^c masses and centers of
//! hyperbolic components, for the static page in `www/`.

use prepllab::descriptor::{builtin, FamilyDescriptor, LoadedFamily};
use prepllab::experiments::{unicritical_centers, CENTER_DEDUP};
use prepllab::{ddc, marked_potential_grid, Error, Grid, GridPotential, Rect};
use wasm_bindgen::prelude::*;

const TOL: f64 = 1e-8;

/// A builtin name such as `quad` or `unicritical:3`, or descriptor JSON.
pub fn load(spec: &str) -> Result<LoadedFamily, Error> {
    if spec.trim_start().starts_with('{') {
        FamilyDescriptor::from_json(spec)?.load()
    } else {
        builtin(spec)
    }
}

fn potential(spec: &str, rect: [f64; 4], nx: usize, ny: usize) -> Result<GridPotential, Error> {
    let loaded = load(spec)?;
    let grid = Grid::new(Rect::new(rect[0], rect[1], rect[2], rect[3])?, nx, ny)?;
    Ok(marked_potential_grid(&loaded.family, &loaded.default_marked(), grid, TOL)?)
}

fn shade(v: f64, error: f64) -> [u8; 4] {
    if !v.is_finite() {
        return [90, 0, 0, 255];
    }
    if v <= error {
        return [0, 0, 0, 255];
    }
    let t = v.log2();
    let channel = |phase: f64| (127.5 + 127.5 * (0.9 * t + phase).cos()) as u8;
    [channel(0.0), channel(2.1), channel(4.2), 255]
}

/// RGBA pixels, top row at `y1`.
pub fn potential_rgba(spec: &str, rect: [f64; 4], nx: usize, ny: usize) -> Result<Vec<u8>, Error> {
    let pot = potential(spec, rect, nx, ny)?;
    let mut out = Vec::with_capacity(4 * nx * ny);
    for j in (0..ny).rev() {
        for i in 0..nx {
            out.extend_from_slice(&shade(pot.value(i, j), pot.error));
        }
    }
    Ok(out)
}

/// `[total, signed_total, slack]` of the dd^c measure on the rectangle.
pub fn ddc_summary(spec: &str, rect: [f64; 4], n: usize) -> Result<[f64; 3], Error> {
    let mu = ddc(&potential(spec, rect, n, n)?)?;
    Ok([mu.total, mu.signed_total, mu.slack])
}

/// Distinct centers of period at most `n_max` for `z^d + s`, as
/// interleaved `re, im` pairs.
pub fn center_coordinates(d: usize, n_max: usize) -> Result<Vec<f64>, Error> {
    let centers = unicritical_centers(d, n_max, CENTER_DEDUP)?;
    Ok(centers.points.iter().flat_map(|z| [z.re, z.im]).collect())
}

fn js(e: Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = renderPotential)]
pub fn render_potential(spec: &str, x0: f64, x1: f64, y0: f64, y1: f64, nx: usize, ny: usize) -> Result<Vec<u8>, JsError> {
    potential_rgba(spec, [x0, x1, y0, y1], nx, ny).map_err(js)
}

#[wasm_bindgen(js_name = ddcMass)]
pub fn ddc_mass(spec: &str, x0: f64, x1: f64, y0: f64, y1: f64, n: usize) -> Result<Vec<f64>, JsError> {
    ddc_summary(spec, [x0, x1, y0, y1], n).map(Vec::from).map_err(js)
}

#[wasm_bindgen]
pub fn centers(d: usize, n_max: usize) -> Result<Vec<f64>, JsError> {
    if n_max > 12 {
        return Err(JsError::new("period bound above 12 is too slow for the page"));
    }
    center_coordinates(d, n_max).map_err(js)
}
