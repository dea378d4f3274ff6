//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use prepllab::experiments::{self, unicritical_centers, GridSettings, CENTER_DEDUP};
use prepllab::family::FiberMap;
use prepllab::green::{green_value, marked_potential_grid};
use prepllab::measures::{box_discrepancy, ddc, empirical_measure, phi_rank_marked, uniform_circle_measure, PhiRank};
use prepllab::preperiodic::{common_preperiodic, orbit_return_distance, orbit_test, prep_equation, solve_parameters, MatchMode};
use prepllab::{GaussianRational, Grid, MapFamily, MarkedPoint, Rect, SolveOptions};

type Outcome = (bool, String);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn zero_point() -> MarkedPoint {
    MarkedPoint::constant(GaussianRational::zero())
}

fn mandelbrot_grid() -> Grid {
    GridSettings::mandelbrot().grid
}

fn green_exactness() -> Outcome {
    let tol = 1e-9;
    let f = FiberMap::polynomial(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
    let golden = PI * (3.0 - 5f64.sqrt());
    let mut worst_value: f64 = 0.0;
    let mut worst_equation: f64 = 0.0;
    for k in 0..100 {
        let r = 0.1 * 10f64.powf(4.0 * k as f64 / 99.0);
        let z = Complex64::from_polar(r, golden * k as f64);
        let g = match green_value(&f, [z, c(1.0, 0.0)], tol) {
            Ok(g) => g,
            Err(e) => return (false, format!("sample {k}: {e}")),
        };
        worst_value = worst_value.max((g.value - r.ln().max(0.0)).abs());
        let gf = green_value(&f, f.apply([z, c(1.0, 0.0)]), tol).unwrap();
        worst_equation = worst_equation.max((gf.value - 2.0 * g.value).abs());
    }
    (
        worst_value <= tol && worst_equation <= 3.0 * tol,
        format!("max |G - log+|z|| = {worst_value:.2e}, max |G(f z) - 2G(z)| = {worst_equation:.2e}"),
    )
}

fn quadratic_mass() -> Outcome {
    let fam = MapFamily::quadratic();
    let pot = marked_potential_grid(&fam, &zero_point(), mandelbrot_grid(), 1e-8).unwrap();
    let mass = ddc(&pot).unwrap().total;
    // same cell size on the doubled rectangle
    let doubled = Grid::new(Rect::new(-4.5, 3.5, -4.0, 4.0).unwrap(), 1024, 1024).unwrap();
    let pot2 = marked_potential_grid(&fam, &zero_point(), doubled, 1e-8).unwrap();
    let mass2 = ddc(&pot2).unwrap().total;
    let drift = (mass2 - mass).abs() / mass;
    (
        (mass - 0.5).abs() <= 0.025 && drift <= 0.01,
        format!("mass {mass:.6} (0.5 ± 0.025), doubled rectangle {mass2:.6}, drift {:.3}%", 100.0 * drift),
    )
}

/// Real root of `s^3 + 2 s^2 + s + 1` by bisection.
fn bisection_root() -> f64 {
    let p = |s: f64| ((s + 2.0) * s + 1.0) * s + 1.0;
    let (mut lo, mut hi) = (-2.0, -1.5);
    assert!(p(lo) < 0.0 && p(hi) > 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn center_counts() -> Outcome {
    let fam = MapFamily::quadratic();
    let a = zero_point();
    let mut notes = Vec::new();
    let mut ok = true;
    for n in 1..=6 {
        let eq = prep_equation(&fam, &a, 0, n, false).unwrap().equation().unwrap();
        let expected = 1usize << (n - 1);
        let out = solve_parameters(&eq, &SolveOptions::default());
        let residual = out.roots.iter().map(|r| r.residual).fold(0.0, f64::max);
        let distance = out
            .roots
            .iter()
            .map(|r| orbit_return_distance(&fam, &a, r.value, 0, n))
            .fold(0.0, f64::max);
        let good = eq.degree() == expected
            && out.count_with_multiplicity() == expected
            && out.is_complete()
            && residual < 1e-10
            && distance < 1e-6;
        ok &= good;
        if n == 6 || !good {
            notes.push(format!("n={n}: degree {} roots {} residual {residual:.1e} return {distance:.1e}", eq.degree(), out.count_with_multiplicity()));
        }
    }
    let eq = prep_equation(&fam, &a, 0, 3, false).unwrap().equation().unwrap();
    let oracle = bisection_root();
    let found = solve_parameters(&eq, &SolveOptions::default())
        .values()
        .into_iter()
        .map(|z| (z - c(oracle, 0.0)).norm())
        .fold(f64::INFINITY, f64::min);
    ok &= found < 1e-8;
    notes.push(format!("root near {oracle:.10} matched to {found:.1e}"));
    (ok, notes.join("; "))
}

fn equidistribution() -> Outcome {
    let centers = unicritical_centers(2, 10, CENTER_DEDUP).unwrap();
    let total: usize = centers.counts.iter().sum();
    let fam = MapFamily::quadratic();
    let pot = marked_potential_grid(&fam, &zero_point(), mandelbrot_grid(), 1e-8).unwrap();
    let mu = ddc(&pot).unwrap();
    let d = box_discrepancy(&empirical_measure(&centers.points, mu.grid), &mu, 3).unwrap();
    (
        total == 1023 && centers.unconverged == 0 && d <= 0.10,
        format!("{total} roots, {} distinct, level-3 discrepancy {d:.4} (limit 0.10)", centers.points.len()),
    )
}

fn double_mandelbrot() -> Outcome {
    let settings = GridSettings::new(Rect::new(-13.0, 3.0, -3.0, 3.0).unwrap(), 512, 512, 1e-8).unwrap();
    let r = experiments::run_double_mandelbrot(&GaussianRational::from_integer(10), settings, 5).unwrap();
    let line = |k: &str| {
        let v = &r.verdicts[k];
        format!("{} {k}: {}", if v.pass { "pass" } else { "FAIL" }, v.detail)
    };
    (
        r.all_pass(),
        format!(
            "{}; {}; {}; mass predicted for this rectangle {:.6}",
            line("min_potential_exceeds_error"),
            line("mass_is_half"),
            line("prep_set_empty"),
            r.outputs["bisector_mass_in_rect"].as_f64().unwrap_or(f64::NAN)
        ),
    )
}

fn persistence_and_rank() -> Outcome {
    let grid = Grid::new(Rect::new(-2.0, 2.0, -2.0, 2.0).unwrap(), 512, 512).unwrap();
    let tol = 1e-8;
    let sq = MapFamily::power(2).unwrap();
    let mut ok = true;
    let mut notes = Vec::new();

    let (r0, _) = phi_rank_marked(&sq, &zero_point(), grid, tol, 1e-6).unwrap();
    ok &= matches!(r0, PhiRank::Zero { .. });
    notes.push(format!("(z^2, 0): {r0:?}"));

    for (name, fam, a, g) in [
        ("(z^2+s, 0)", MapFamily::quadratic(), zero_point(), mandelbrot_grid()),
        ("(z^2, s)", sq.clone(), MarkedPoint::identity(), grid),
    ] {
        let pot = marked_potential_grid(&fam, &a, g, tol).unwrap();
        let threshold = ddc(&pot).unwrap().support_threshold();
        let (r, mu) = phi_rank_marked(&fam, &a, g, tol, threshold).unwrap();
        let mu = mu.unwrap();
        let good = r.value() == Some(1) && mu.total > 10.0 * mu.slack;
        ok &= good;
        notes.push(format!("{name}: rank {:?} mass {:.4} vs 10 x slack {:.1e}", r.value(), mu.total, 10.0 * mu.slack));
        if name == "(z^2, s)" {
            let circle = uniform_circle_measure(g, c(0.0, 0.0), 1.0);
            let d = box_discrepancy(&mu, &circle, 3).unwrap();
            ok &= d <= 0.02;
            notes.push(format!("circle discrepancy {d:.4} (limit 0.02)"));
        }
    }
    (ok, notes.join("; "))
}

/// Preperiodic points of `z^2` and of `z^2 - 2 = w^2 + w^-2 ∘ (w + 1/w)` up
/// to depth 5, enumerated from roots of unity.
fn brute_force_common(depth: u32) -> Vec<Complex64> {
    let mut square = vec![c(0.0, 0.0)];
    let mut cheb = Vec::new();
    for k in 1..=depth {
        for m in 0..k {
            let n = k - m;
            let p = 1u64 << m;
            for order in [p * ((1 << n) - 1), p * ((1 << n) + 1)] {
                for j in 0..order {
                    let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / order as f64);
                    if order == p * ((1 << n) - 1) {
                        square.push(w);
                    }
                    cheb.push(w + w.inv());
                }
            }
        }
    }
    let close = |a: Complex64, b: Complex64| (a - b).norm() < 1e-9;
    let mut common: Vec<Complex64> = Vec::new();
    for &z in &square {
        if cheb.iter().any(|&w| close(z, w)) && !common.iter().any(|&w| close(z, w)) {
            common.push(z);
        }
    }
    common
}

fn common_points() -> Outcome {
    let f = MapFamily::power(2).unwrap();
    let g = MapFamily::quadratic_constant(GaussianRational::from_integer(-2));
    let out = common_preperiodic(&f, &g, 5, MatchMode::Exact).unwrap();
    let x = &out.intersection;
    let z = MarkedPoint::identity();
    let orbits = x
        .points
        .iter()
        .all(|&p| orbit_test(&f, &z, p, 5).is_some() && orbit_test(&g, &z, p, 5).is_some());
    let oracle = brute_force_common(5);
    let matches = oracle.len() == x.points.len()
        && oracle.iter().all(|o| x.points.iter().any(|p| (p - o).norm() < 1e-9));
    let contains = [-1.0, 0.0, 1.0].iter().all(|&t| x.points.iter().any(|p| (p - c(t, 0.0)).norm() < 1e-12));
    let n = x.counts.len();
    (
        x.stabilized() && x.counts[n - 1] == x.counts[n - 2] && orbits && matches && contains,
        format!("counts by depth {:?}, points {:?}, oracle has {}", x.counts, x.points.iter().map(|p| p.re).collect::<Vec<_>>(), oracle.len()),
    )
}

fn run_cli(dir: &Path, threads: usize, tag: &str, args: &[&str]) -> Result<(Vec<u8>, Vec<u8>), String> {
    let out = dir.join(format!("{tag}-{threads}.out"));
    let status = Command::new(env!("CARGO_BIN_EXE_prepllab"))
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .arg("--out")
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let file = std::fs::read(&out).map_err(|e| format!("{tag}: {e}"))?;
    Ok((file, status.stdout))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, Vec<&str>); 3] = [
        ("ddc", vec!["ddc", "--family", "builtin:quad", "--rect", "-2.5,1.5,-2,2", "--res", "512", "--tol", "1e-8", "--format", "csv"]),
        ("pcf", vec!["experiment", "pcf-density"]),
        ("double", vec!["experiment", "double-mandelbrot", "--depth", "5"]),
    ];
    let mut notes = Vec::new();
    let mut ok = true;
    for (tag, args) in &runs {
        let one = run_cli(dir.path(), 1, tag, args);
        let eight = run_cli(dir.path(), 8, tag, args);
        let same = match (&one, &eight) {
            (Ok(a), Ok(b)) => a == b && !a.0.is_empty(),
            _ => false,
        };
        ok &= same;
        let size = one.as_ref().map(|o| o.0.len()).unwrap_or(0);
        notes.push(format!("{tag} {} ({size} bytes)", if same { "identical" } else { "DIFFERENT" }));
    }
    (ok, notes.join(", "))
}

fn main() {
    // (name, check, runtime budget in seconds)
    let criteria: [(&str, fn() -> Outcome, f64); 8] = [
        ("1 green exactness", green_exactness, 1.0),
        ("2 quadratic bifurcation mass", quadratic_mass, 60.0),
        ("3 center counts and residuals", center_counts, 10.0),
        ("4 equidistribution of centers", equidistribution, 120.0),
        ("5 double Mandelbrot", double_mandelbrot, 180.0),
        ("6 persistence and rank", persistence_and_rank, 60.0),
        ("7 common preperiodic points", common_points, 30.0),
        ("8 determinism across thread counts", determinism, f64::INFINITY),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, run, budget) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let (ok, detail) = run();
        let secs = start.elapsed().as_secs_f64();
        let pass = ok && secs < budget;
        let limit = if budget.is_finite() { format!(" of {budget} s") } else { String::new() };
        println!("criterion {name}: {} [{secs:.1} s{limit}] {detail}", if pass { "PASS" } else { "FAIL" });
        failed += usize::from(!pass);
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
