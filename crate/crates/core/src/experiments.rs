//! Packaged scenarios producing JSON reports with pass/fail verdicts.
//!
//! Reports contain only deterministic data; the wall time is kept on the
//! side so that reruns with different thread counts serialize identically.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::arith::GaussianRational;
use crate::descriptor::{quadratic_label, FamilyDescriptor};
use crate::error::Error;
use crate::family::{MapFamily, MarkedPoint};
use crate::green::{marked_potential_grid, product_potential_grid};
use crate::grid::{Grid, Rect};
use crate::measures::{box_discrepancy, ddc, empirical_measure, DiscreteMeasure};
use crate::preperiodic::{
    self, intersect_prep_sets, is_persistently_preperiodic, orbit_test, prep_equation, prep_parameters,
    push_distinct, sort_points, solve_parameters, MatchMode, Persistence,
};
use crate::roots::SolveOptions;

/// Ids accepted by the `experiment` subcommand.
pub const SCENARIOS: &[&str] = &[
    "stability-dichotomy",
    "pcf-density",
    "double-mandelbrot",
    "simultaneous-prep",
    "common-prep-table",
];

/// Distinct certified parameters required to witness a dense prep set.
pub const DENSE_WITNESS_COUNT: usize = 10;

/// Cells (Chebyshev distance) within which a parameter counts as lying on
/// the support.
pub const SUPPORT_RADIUS: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub inputs: BTreeMap<String, Value>,
    pub outputs: BTreeMap<String, Value>,
    pub verdicts: BTreeMap<String, Verdict>,
    pub provenance: BTreeMap<String, Value>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    fn new(scenario: &str) -> Self {
        let mut provenance = BTreeMap::new();
        provenance.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        Self {
            scenario: scenario.into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            provenance,
            wall_time: Duration::ZERO,
        }
    }

    fn input(&mut self, key: &str, v: impl Serialize) {
        self.inputs.insert(key.into(), json!(v));
    }

    fn output(&mut self, key: &str, v: impl Serialize) {
        self.outputs.insert(key.into(), json!(v));
    }

    fn verdict(&mut self, key: &str, v: Verdict) {
        self.verdicts.insert(key.into(), v);
    }

    fn note(&mut self, key: &str, v: impl Serialize) {
        self.provenance.insert(key.into(), json!(v));
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// A value together with the tolerance it was computed under.
fn measured(value: f64, tolerance: f64) -> Value {
    json!({ "value": value, "tolerance": tolerance })
}

fn family_input(label: &str, fam: &MapFamily, marked: &[MarkedPoint]) -> FamilyDescriptor {
    let marked: Vec<(Option<String>, MarkedPoint)> = marked.iter().map(|m| (None, m.clone())).collect();
    FamilyDescriptor::from_family(Some(label.to_string()), fam, &marked)
}

fn grid_inputs(report: &mut ExperimentReport, grid: &Grid, tol: f64) {
    report.input("rect", grid.rect);
    report.input("res", [grid.nx, grid.ny]);
    report.input("tol", tol);
}

/// Fields shared by every experiment that samples a potential.
#[derive(Clone, Copy, Debug)]
pub struct GridSettings {
    pub grid: Grid,
    pub tol: f64,
}

impl GridSettings {
    pub fn new(rect: Rect, nx: usize, ny: usize, tol: f64) -> Result<Self, Error> {
        Ok(Self {
            grid: Grid::new(rect, nx, ny)?,
            tol,
        })
    }

    /// `[-2.5, 1.5] × [-2, 2]` at 512², tolerance `1e-8`.
    pub fn mandelbrot() -> Self {
        Self::new(Rect::new(-2.5, 1.5, -2.0, 2.0).unwrap(), 512, 512, 1e-8).unwrap()
    }
}

/// Largest `L ≤ max` with `2^L` dividing both resolutions.
fn max_level(grid: &Grid, max: u32) -> u32 {
    (0..=max)
        .take_while(|&l| grid.nx % (1 << l) == 0 && grid.ny % (1 << l) == 0)
        .last()
        .unwrap_or(0)
}

fn mass_outputs(report: &mut ExperimentReport, mu: &DiscreteMeasure) {
    report.output("total_mass", measured(mu.total, mu.slack * mu.grid.len() as f64));
    report.output("signed_total_mass", mu.signed_total);
    report.output("min_signed_cell_mass", mu.min_signed);
    report.output("laplacian_slack", mu.slack);
    report.output("support_threshold", mu.support_threshold());
}

/// Persistent, unstable, or stable within resolution.
pub fn run_stability_dichotomy(
    label: &str,
    fam: &MapFamily,
    a: &MarkedPoint,
    settings: GridSettings,
    depth: usize,
) -> Result<ExperimentReport, Error> {
    let start = Instant::now();
    let mut report = ExperimentReport::new("stability-dichotomy");
    report.input("family", family_input(label, fam, std::slice::from_ref(a)));
    grid_inputs(&mut report, &settings.grid, settings.tol);
    report.input("depth", depth);

    if let Persistence::Persistent { tail, period } = is_persistently_preperiodic(fam, a, depth) {
        report.output("classification", "persistent");
        report.output("certificate", json!({ "tail": tail, "period": period }));
        report.verdict(
            "classified",
            Verdict::new(true, format!("f^{}(a) = f^{}(a) identically", tail + period, tail)),
        );
        report.wall_time = start.elapsed();
        return Ok(report);
    }

    let pot = marked_potential_grid(fam, a, settings.grid, settings.tol)?;
    let mu = ddc(&pot)?;
    mass_outputs(&mut report, &mu);
    report.note("max_green_iterations", pot.max_iterations);
    report.note("masked_cells", pot.masked_count());

    if mu.total <= mu.support_threshold() {
        report.output("classification", "stable_within_resolution");
        report.output(
            "prediction",
            "zero mass without persistence: isotrivial family and never-preperiodic point expected (not certified)",
        );
        report.verdict("classified", Verdict::new(true, "mass below the support threshold"));
        report.wall_time = start.elapsed();
        return Ok(report);
    }

    let search = prep_parameters(fam, a, depth)?;
    let support = mu.support();
    let mut certified = Vec::new();
    let mut strict_in_rect = 0;
    let mut strict_near = 0;
    let mut near = 0;
    let mut in_rect = 0;
    let mut failed = 0;
    for &z in &search.points {
        let Some((m, n)) = orbit_test(fam, a, z, depth) else {
            failed += 1;
            continue;
        };
        certified.push(json!({ "value": z, "tail": m, "period": n }));
        if settings.grid.rect.contains(z) {
            in_rect += 1;
            let close = mu.near_support(&support, z, SUPPORT_RADIUS);
            near += close as usize;
            if m > 0 {
                strict_in_rect += 1;
                strict_near += close as usize;
            }
        }
    }
    report.output("classification", "unstable");
    report.output("prep_parameters", certified);
    report.output("prep_parameters_in_rect", in_rect);
    report.output("prep_parameters_near_support", near);
    report.output("strictly_preperiodic_in_rect", strict_in_rect);
    report.output("strictly_preperiodic_near_support", strict_near);
    report.note("unconverged_roots", search.unconverged);
    let count = search.points.len() - failed;
    report.verdict(
        "dense_witness",
        Verdict::new(
            count >= DENSE_WITNESS_COUNT,
            format!("{count} distinct certified parameters (need {DENSE_WITNESS_COUNT})"),
        ),
    );
    report.verdict(
        "orbit_tests",
        Verdict::new(failed == 0, format!("{failed} roots failed the orbit test")),
    );
    report.verdict(
        "on_support",
        Verdict::new(
            strict_near == strict_in_rect && near > 0,
            format!(
                "{strict_near}/{strict_in_rect} strictly preperiodic parameters within {SUPPORT_RADIUS} cells of the support"
            ),
        ),
    );
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Distinct centers of `z^d + s` with period at most `n_max`, and the counts
/// with multiplicity per exact period.
pub struct Centers {
    pub points: Vec<Complex64>,
    /// Points first found at each period, for prefix statistics.
    pub by_period: Vec<Vec<Complex64>>,
    pub counts: Vec<usize>,
    pub residual_max: f64,
    pub unconverged: usize,
    pub orbit_failures: usize,
}

pub fn unicritical_centers(d: usize, n_max: usize, dedup: f64) -> Result<Centers, Error> {
    let fam = MapFamily::unicritical(d)?;
    let a = MarkedPoint::constant(GaussianRational::zero());
    let opts = SolveOptions::default();
    let mut points = Vec::new();
    let mut by_period = Vec::new();
    let mut counts = Vec::new();
    let mut residual_max: f64 = 0.0;
    let mut unconverged = 0;
    let mut orbit_failures = 0;
    for n in 1..=n_max {
        let eq = prep_equation(&fam, &a, 0, n, false)?
            .equation()
            .expect("the critical point of z^d + s is not persistently periodic");
        let out = solve_parameters(&eq, &opts);
        counts.push(out.count_with_multiplicity());
        unconverged += out.unconverged.len();
        let mut fresh = Vec::new();
        for r in &out.roots {
            residual_max = residual_max.max(r.residual);
            if preperiodic::orbit_return_distance(&fam, &a, r.value, 0, n) > preperiodic::ORBIT_TOLERANCE {
                orbit_failures += 1;
            }
            let before = points.len();
            push_distinct(&mut points, r.value, dedup);
            if points.len() > before {
                fresh.push(r.value);
            }
        }
        by_period.push(fresh);
    }
    sort_points(&mut points);
    Ok(Centers {
        points,
        by_period,
        counts,
        residual_max,
        unconverged,
        orbit_failures,
    })
}

/// Dedup tolerance for center sets.
pub const CENTER_DEDUP: f64 = 1e-10;

/// Centers versus the bifurcation measure of `z^d + s`.
pub fn run_unicritical_pcf_density(d: usize, n_max: usize, settings: GridSettings) -> Result<ExperimentReport, Error> {
    let start = Instant::now();
    let mut report = ExperimentReport::new("pcf-density");
    let fam = MapFamily::unicritical(d)?;
    let a = MarkedPoint::constant(GaussianRational::zero());
    report.input("family", family_input(&format!("z^{d} + s"), &fam, std::slice::from_ref(&a)));
    report.input("n_max", n_max);
    grid_inputs(&mut report, &settings.grid, settings.tol);

    let centers = unicritical_centers(d, n_max, CENTER_DEDUP)?;
    let expected: Vec<usize> = (1..=n_max).map(|n| d.pow(n as u32 - 1)).collect();
    report.output("center_counts", &centers.counts);
    report.output("distinct_centers", centers.points.len());
    report.output("residual_max", centers.residual_max);
    let radius = 2f64.powf(1.0 / (d as f64 - 1.0)) + 1.0;
    let max_modulus = centers.points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    report.output("max_center_modulus", max_modulus);
    report.verdict(
        "degree_law",
        Verdict::new(
            centers.counts == expected && centers.unconverged == 0,
            format!("counts {:?}, expected {:?}", centers.counts, expected),
        ),
    );
    report.verdict(
        "escape_bound",
        Verdict::new(max_modulus <= radius, format!("max |s| = {max_modulus:.6}, bound {radius:.6}")),
    );
    report.verdict(
        "orbit_tests",
        Verdict::new(
            centers.orbit_failures == 0,
            format!("{} roots failed the orbit test", centers.orbit_failures),
        ),
    );

    let pot = marked_potential_grid(&fam, &a, settings.grid, settings.tol)?;
    let mu = ddc(&pot)?;
    mass_outputs(&mut report, &mu);
    report.note("max_green_iterations", pot.max_iterations);

    let emp = empirical_measure(&centers.points, settings.grid);
    let levels = max_level(&settings.grid, 4);
    let mut disc = BTreeMap::new();
    for level in 1..=levels {
        disc.insert(level.to_string(), box_discrepancy(&emp, &mu, level)?);
    }
    report.output("discrepancy_by_level", &disc);
    if let Some(&d3) = disc.get("3") {
        report.verdict(
            "equidistribution_level3",
            Verdict::new(d3 <= 0.10, format!("level-3 discrepancy {d3:.6} (limit 0.10)")),
        );
    }

    // fraction of centers off the support, for growing period bounds
    let threshold = mu.support_threshold();
    let mut fractions = BTreeMap::new();
    let mut sequence = Vec::new();
    let mut prefix: Vec<Complex64> = Vec::new();
    for (k, fresh) in centers.by_period.iter().enumerate() {
        prefix.extend(fresh);
        let n = k + 1;
        if [4, 6, 8, 10].contains(&n) {
            let inside: Vec<&Complex64> = prefix.iter().filter(|z| settings.grid.rect.contains(**z)).collect();
            let off = inside
                .iter()
                .filter(|z| {
                    let (i, j) = settings.grid.cell_of(***z).unwrap();
                    mu.mass(i, j) <= threshold
                })
                .count();
            let frac = off as f64 / inside.len().max(1) as f64;
            fractions.insert(n.to_string(), frac);
            sequence.push(frac);
        }
    }
    report.output("off_support_fraction", &fractions);
    if sequence.len() >= 2 {
        let decreasing = sequence.windows(2).all(|w| w[1] < w[0]);
        report.verdict(
            "off_support_fraction_decreasing",
            Verdict::new(decreasing, format!("{sequence:?}")),
        );
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Mass of `dd^c ½ max(log|s|, log|s + c|)` inside `rect`: the measure lives
/// on the bisector of `0` and `-c`, where it equals the angle subtended at
/// `0` divided by `2π`.
pub fn bisector_mass(c: Complex64, rect: &Rect) -> f64 {
    let mid = -c / 2.0;
    let dir = Complex64::new(0.0, 1.0) * c / c.norm();
    // clip the line mid + t dir to the rectangle
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (p, v, a, b) in [(mid.re, dir.re, rect.x0, rect.x1), (mid.im, dir.im, rect.y0, rect.y1)] {
        if v.abs() < 1e-300 {
            if p < a || p > b {
                return 0.0;
            }
            continue;
        }
        let (t0, t1) = ((a - p) / v, (b - p) / v);
        lo = lo.max(t0.min(t1));
        hi = hi.min(t0.max(t1));
    }
    if lo >= hi {
        return 0.0;
    }
    let (e0, e1) = (mid + dir * lo, mid + dir * hi);
    (e1 / e0).arg().abs() / (2.0 * PI)
}

/// The pair `z^2 + s`, `z^2 + s + shift` with critical marked points.
pub fn run_double_mandelbrot(
    shift: &GaussianRational,
    settings: GridSettings,
    depth: usize,
) -> Result<ExperimentReport, Error> {
    let start = Instant::now();
    let mut report = ExperimentReport::new("double-mandelbrot");
    let fam = MapFamily::quadratic();
    let shifted = fam.shifted(shift);
    let a = MarkedPoint::constant(GaussianRational::zero());
    report.input("family", family_input("z^2 + s", &fam, std::slice::from_ref(&a)));
    report.input("shifted_family", family_input("z^2 + s + shift", &shifted, std::slice::from_ref(&a)));
    report.input("shift", shift.to_string());
    grid_inputs(&mut report, &settings.grid, settings.tol);
    report.input("depth", depth);
    let c = shift.to_complex();
    if c.norm() <= 4.0 {
        report.output("warning", "|shift| <= 4: the two Mandelbrot sets may overlap");
    }

    let pot = product_potential_grid(
        &[(fam.clone(), a.clone(), GaussianRational::zero()), (fam.clone(), a.clone(), shift.clone())],
        settings.grid,
        settings.tol,
    )?;
    let min = pot.min_unmasked().unwrap_or(f64::NAN);
    report.output("min_potential", measured(min, pot.error));
    report.output("certified_error", pot.error);
    report.note("max_green_iterations", pot.max_iterations);
    report.note("masked_cells", pot.masked_count());
    report.verdict(
        "min_potential_exceeds_error",
        Verdict::new(
            min > 10.0 * pot.error,
            format!("min {min:.6e} vs 10 x error {:.3e}", 10.0 * pot.error),
        ),
    );

    let mu = ddc(&pot)?;
    mass_outputs(&mut report, &mu);
    if c.norm() > 4.0 {
        report.output("bisector_mass_in_rect", bisector_mass(c, &settings.grid.rect));
    }
    report.verdict(
        "mass_is_half",
        Verdict::new(
            (mu.total - 0.5).abs() <= 0.025,
            format!("total mass {:.6} (target 0.5 ± 0.025)", mu.total),
        ),
    );

    let inter = intersect_prep_sets(&fam, &a, &shifted, &a, depth, MatchMode::Exact)?;
    report.output("simultaneous_prep_counts", &inter.counts);
    report.output("gcd_degrees", &inter.gcd_degrees);
    report.output("simultaneous_prep_points", &inter.points);
    let empty = inter.gcd_degrees.iter().all(|&g| g == 0) && !inter.everything && !inter.persistent_side;
    report.verdict(
        "prep_set_empty",
        Verdict::new(
            empty,
            format!("largest gcd degree per depth {:?}", inter.gcd_degrees),
        ),
    );
    report.wall_time = start.elapsed();
    Ok(report)
}

fn orbit_failures(fam: &MapFamily, a: &MarkedPoint, points: &[Complex64], depth: usize) -> usize {
    points.iter().filter(|&&z| orbit_test(fam, a, z, depth).is_none()).count()
}

/// Parameters where `a` and `b` are simultaneously preperiodic.
pub fn run_simultaneous_prep(
    label: &str,
    fam: &MapFamily,
    a: &MarkedPoint,
    b: &MarkedPoint,
    depth: usize,
) -> Result<ExperimentReport, Error> {
    let start = Instant::now();
    let mut report = ExperimentReport::new("simultaneous-prep");
    report.input("family", family_input(label, fam, &[a.clone(), b.clone()]));
    report.input("depth", depth);
    let inter = intersect_prep_sets(fam, a, fam, b, depth, MatchMode::Exact)?;
    report.output("counts", &inter.counts);
    report.output("points", &inter.points);
    report.output("stabilized", inter.stabilized());
    report.output("identical_points", a == b);
    report.output("every_parameter", inter.everything);
    report.output("one_side_persistent", inter.persistent_side);
    report.note("unconverged_roots", inter.unconverged);
    let failures = orbit_failures(fam, a, &inter.points, depth) + orbit_failures(fam, b, &inter.points, depth);
    report.verdict(
        "orbit_tests",
        Verdict::new(failures == 0, format!("{failures} orbit tests failed")),
    );
    report.wall_time = start.elapsed();
    Ok(report)
}

/// A named pair of maps with constant coefficients.
#[derive(Clone, Debug)]
pub struct MapPair {
    pub label: String,
    pub f: MapFamily,
    pub g: MapFamily,
}

impl MapPair {
    pub fn quadratic(c1: GaussianRational, c2: GaussianRational) -> Self {
        Self {
            label: format!("({}, {})", quadratic_label(&c1), quadratic_label(&c2)),
            f: MapFamily::quadratic_constant(c1),
            g: MapFamily::quadratic_constant(c2),
        }
    }

    /// `(z², z² − 2)`, `(z², z²)`, `(z² + 1, z² − 1)`, `(z² + i, z² − i)`.
    pub fn default_table() -> Vec<Self> {
        let gi = |re: i64, im: i64| GaussianRational::from_parts((re, 1), (im, 1));
        vec![
            Self::quadratic(gi(0, 0), gi(-2, 0)),
            Self::quadratic(gi(0, 0), gi(0, 0)),
            Self::quadratic(gi(1, 0), gi(-1, 0)),
            Self::quadratic(gi(0, 1), gi(0, -1)),
        ]
    }
}

/// Common preperiodic points for each pair, with stabilization flags.
pub fn run_common_prep_table(pairs: &[MapPair], depth: usize) -> Result<ExperimentReport, Error> {
    let start = Instant::now();
    let mut report = ExperimentReport::new("common-prep-table");
    let labels: Vec<&str> = pairs.iter().map(|p| p.label.as_str()).collect();
    report.input("pairs", &labels);
    report.input("depth", depth);
    let z = MarkedPoint::identity();
    let mut rows = Vec::new();
    let mut failures = 0;
    let mut unstable_rows = Vec::new();
    for pair in pairs {
        let out = preperiodic::common_preperiodic(&pair.f, &pair.g, depth, MatchMode::Exact)?;
        let pts = &out.intersection.points;
        failures += orbit_failures(&pair.f, &z, pts, depth) + orbit_failures(&pair.g, &z, pts, depth);
        let stabilized = out.intersection.stabilized();
        let flag = if out.identical_maps {
            "identical prep sets"
        } else if stabilized {
            "stabilized"
        } else {
            "growing"
        };
        if !out.identical_maps && !stabilized {
            unstable_rows.push(pair.label.clone());
        }
        rows.push(json!({
            "pair": pair.label,
            "counts": out.intersection.counts,
            "count": pts.len(),
            "points": pts,
            "infinity_common": out.infinity_common,
            "flag": flag,
        }));
    }
    report.output("rows", rows);
    report.verdict(
        "orbit_tests",
        Verdict::new(failures == 0, format!("{failures} orbit tests failed")),
    );
    report.verdict(
        "distinct_pairs_stabilized",
        Verdict::new(
            unstable_rows.is_empty(),
            format!("still growing at depth {depth}: {unstable_rows:?}"),
        ),
    );
    report.wall_time = start.elapsed();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisector_mass_matches_the_arctangent() {
        let rect = Rect::new(-13.0, 3.0, -3.0, 3.0).unwrap();
        let m = bisector_mass(Complex64::new(10.0, 0.0), &rect);
        assert!((m - (0.6f64).atan() / PI).abs() < 1e-15);
        let far = Rect::new(-13.0, 3.0, -1e9, 1e9).unwrap();
        assert!((bisector_mass(Complex64::new(10.0, 0.0), &far) - 0.5).abs() < 1e-8);
    }

    #[test]
    fn persistent_point_is_classified_without_a_grid() {
        let settings = GridSettings::new(Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 8, 8, 1e-8).unwrap();
        let r = run_stability_dichotomy(
            "z^2",
            &MapFamily::power(2).unwrap(),
            &MarkedPoint::constant(GaussianRational::zero()),
            settings,
            3,
        )
        .unwrap();
        assert_eq!(r.outputs["classification"], json!("persistent"));
        assert!(r.all_pass());
    }

    #[test]
    fn small_center_sets() {
        let c = unicritical_centers(2, 1, CENTER_DEDUP).unwrap();
        assert_eq!(c.points, vec![Complex64::new(0.0, 0.0)]);
        let c = unicritical_centers(3, 4, CENTER_DEDUP).unwrap();
        assert_eq!(c.counts, vec![1, 3, 9, 27]);
        assert_eq!(c.orbit_failures, 0);
    }

    #[test]
    fn common_prep_rows() {
        let r = run_common_prep_table(&MapPair::default_table()[..2], 4).unwrap();
        let rows = r.outputs["rows"].as_array().unwrap();
        assert_eq!(rows[0]["counts"], json!([0, 2, 3, 3]));
        assert_eq!(rows[1]["flag"], json!("identical prep sets"));
        assert!(r.all_pass());
    }
}
