//! Grid serialization: CSV with a one-line header, 16-bit PGM heatmaps with a
//! JSON sidecar, and atomic file replacement.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use prepllab::Grid;
use serde_json::json;

/// `# rect x0 x1 y0 y1 nx ny tol`, then one line per row starting at `y0`,
/// 17 significant digits, `nan` for missing cells.
pub fn grid_csv(grid: &Grid, tol: f64, values: &[f64]) -> String {
    let r = grid.rect;
    let mut out = format!(
        "# rect {:e} {:e} {:e} {:e} {} {} {:e}\n",
        r.x0, r.x1, r.y0, r.y1, grid.nx, grid.ny, tol
    );
    for row in values.chunks(grid.nx) {
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                out.push(',');
            }
            if v.is_finite() {
                write!(out, "{v:.16e}").unwrap();
            } else {
                out.push_str("nan");
            }
        }
        out.push('\n');
    }
    out
}

/// `(rect, nx, ny, tol, values)` as read back from a CSV grid.
pub type CsvGrid = ([f64; 4], usize, usize, f64, Vec<f64>);

/// Parses [`grid_csv`] output.
pub fn parse_grid_csv(text: &str) -> Option<CsvGrid> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next()?.split_whitespace().collect();
    if header.len() != 9 || header[0] != "#" || header[1] != "rect" {
        return None;
    }
    let f = |k: usize| header[k].parse::<f64>().ok();
    let rect = [f(2)?, f(3)?, f(4)?, f(5)?];
    let (nx, ny) = (header[6].parse().ok()?, header[7].parse().ok()?);
    let tol = f(8)?;
    let values = lines
        .flat_map(|l| l.split(','))
        .map(|t| if t == "nan" { Some(f64::NAN) } else { t.parse().ok() })
        .collect::<Option<Vec<f64>>>()?;
    (values.len() == nx * ny).then_some((rect, nx, ny, tol, values))
}

/// Binary PGM (`P5`, maxval 65535) with the top row at `y1`, mapping
/// `[min, max]` of the finite values linearly; missing cells are black.
pub fn grid_pgm(grid: &Grid, values: &[f64]) -> (Vec<u8>, f64, f64) {
    let (min, max) = values
        .iter()
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let (min, max) = if min.is_finite() { (min, max) } else { (0.0, 0.0) };
    let span = if max > min { max - min } else { 1.0 };
    let mut out = format!("P5\n{} {}\n65535\n", grid.nx, grid.ny).into_bytes();
    for row in values.chunks(grid.nx).rev() {
        for &v in row {
            let level = if v.is_finite() {
                (((v - min) / span) * 65535.0).round().clamp(0.0, 65535.0) as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    (out, min, max)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn pgm_sidecar(grid: &Grid, min: f64, max: f64, quantity: &str) -> String {
    let doc = json!({
        "quantity": quantity,
        "rect": grid.rect,
        "nx": grid.nx,
        "ny": grid.ny,
        "min": min,
        "max": max,
        "maxval": 65535,
        "orientation": "first row is y1",
    });
    serde_json::to_string_pretty(&doc).unwrap() + "\n"
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
