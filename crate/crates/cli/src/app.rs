//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::json;

use prepllab::descriptor::{builtin, FamilyDescriptor, LoadedFamily};
use prepllab::experiments::{self, ExperimentReport, GridSettings, MapPair};
use prepllab::preperiodic::{self, MatchMode, Prep};
use prepllab::{
    ddc, green_value, marked_potential_grid, phi_rank_marked, Error, GaussianRational, Grid, MarkedPoint,
    ParamPolynomial, ParseError, Rect, SolveOptions,
};

use crate::formats::{grid_csv, grid_pgm, pgm_sidecar, sidecar_path, write_atomic};

/// Exit status for a failed verdict in an experiment run.
pub const EXIT_VERDICT: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "prepllab", version, about = "Green functions, bifurcation measures and preperiodic parameters")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Parameter rectangle `x0,x1,y0,y1`.
    #[arg(long, global = true, value_parser = parse_rect, allow_hyphen_values = true)]
    pub rect: Option<Rect>,
    /// Grid resolution `NX[,NY]`.
    #[arg(long, global = true, value_parser = parse_res)]
    pub res: Option<(usize, usize)>,
    /// Requested accuracy of Green function values.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Bound on tail + period.
    #[arg(long, global = true)]
    pub depth: Option<usize>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format for grids and reports.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Pgm,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    /// `builtin:NAME` or a path to a family descriptor.
    #[arg(long, visible_alias = "map", default_value = "builtin:quad")]
    pub family: String,
    /// Index into the descriptor's marked points.
    #[arg(long, default_value_t = 0)]
    pub marked: usize,
    /// Explicit marked point `A[;B]`, coefficient lists by power of `s`
    /// (e.g. `0,1` for `s`, `1;0,1` for `1/s`), or `inf`.
    #[arg(long, allow_hyphen_values = true)]
    pub point: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Green function of one point under one map.
    GreenEval {
        #[command(flatten)]
        family: FamilyArgs,
        /// Point `z` (Gaussian rational or `re,im`), or `inf`.
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        /// Parameter `s` for non-constant families.
        #[arg(long, allow_hyphen_values = true, default_value = "0")]
        s: String,
    },
    /// Marked-point potential on a grid.
    Potential {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// dd^c measure of the marked-point potential.
    Ddc {
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Preperiodicity equation and its certified roots.
    PrepParams {
        #[command(flatten)]
        family: FamilyArgs,
        /// Tail length.
        #[arg(long, short = 'm', default_value_t = 0)]
        tail: usize,
        /// Period.
        #[arg(long, short = 'n')]
        period: usize,
        /// Remove factors of equations with smaller tail or dividing period.
        #[arg(long)]
        deflate: bool,
    },
    /// Common preperiodic points of pairs of maps.
    CommonPrep {
        /// Pair `F,G` of map specs; repeatable.
        #[arg(long = "pair", required = true)]
        pairs: Vec<String>,
        /// Match separately computed roots instead of exact gcds.
        #[arg(long)]
        numeric: bool,
    },
    /// Rank of the graph of a marked point.
    Rank {
        #[command(flatten)]
        family: FamilyArgs,
        /// Mass threshold; defaults to ten times the discretization slack.
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Run a packaged scenario.
    Experiment(ExperimentArgs),
}

#[derive(Args, Debug)]
pub struct ExperimentArgs {
    /// One of stability-dichotomy, pcf-density, double-mandelbrot,
    /// simultaneous-prep, common-prep-table.
    pub id: String,
    #[command(flatten)]
    pub family: FamilyArgs,
    /// Second marked point for simultaneous-prep (`A[;B]`).
    #[arg(long, allow_hyphen_values = true)]
    pub point2: Option<String>,
    /// Shift for double-mandelbrot.
    #[arg(long, allow_hyphen_values = true, default_value = "10")]
    pub shift: String,
    /// Degree for pcf-density.
    #[arg(long, default_value_t = 2)]
    pub degree: usize,
    /// Largest period for pcf-density.
    #[arg(long, default_value_t = 10)]
    pub n_max: usize,
    /// Pairs for common-prep-table (`F,G`; repeatable).
    #[arg(long = "pair")]
    pub pairs: Vec<String>,
}

fn parse_list(s: &str, n: usize) -> Result<Vec<f64>, String> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("`{t}`: {e}")))
        .collect::<Result<_, _>>()?;
    if v.len() != n {
        return Err(format!("expected {n} comma-separated numbers"));
    }
    Ok(v)
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let v = parse_list(s, 4)?;
    Rect::new(v[0], v[1], v[2], v[3]).map_err(|e| e.to_string())
}

fn parse_res(s: &str) -> Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let p = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    match parts.as_slice() {
        [n] => Ok((p(n)?, p(n)?)),
        [x, y] => Ok((p(x)?, p(y)?)),
        _ => Err("expected NX or NX,NY".into()),
    }
}

fn input_error(msg: impl ToString) -> Error {
    Error::Parse(ParseError::Json(msg.to_string()))
}

fn parse_complex(s: &str) -> Result<Complex64, Error> {
    if let Ok(g) = s.parse::<GaussianRational>() {
        return Ok(g.to_complex());
    }
    parse_list(s, 2)
        .map(|v| Complex64::new(v[0], v[1]))
        .map_err(|_| input_error(format!("invalid complex number `{s}`")))
}

fn parse_poly_list(s: &str) -> Result<ParamPolynomial, Error> {
    let coeffs = s
        .split(',')
        .map(|t| t.parse::<GaussianRational>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParamPolynomial::new(coeffs))
}

fn parse_point(s: &str) -> Result<MarkedPoint, Error> {
    if s == "inf" {
        return Ok(MarkedPoint::infinity());
    }
    let (a, b) = s.split_once(';').unwrap_or((s, "1"));
    Ok(MarkedPoint::new(parse_poly_list(a)?, parse_poly_list(b)?)?)
}

fn load_family(spec: &str) -> Result<LoadedFamily, Error> {
    if spec.starts_with("builtin:") {
        return builtin(spec);
    }
    let text = std::fs::read_to_string(spec)?;
    FamilyDescriptor::from_json(&text)?.load()
}

fn resolve(args: &FamilyArgs) -> Result<(LoadedFamily, MarkedPoint), Error> {
    let fam = load_family(&args.family)?;
    let point = match &args.point {
        Some(p) => parse_point(p)?,
        None if fam.marked.is_empty() => MarkedPoint::constant(GaussianRational::zero()),
        None => fam
            .marked
            .get(args.marked)
            .map(|(_, m)| m.clone())
            .ok_or_else(|| input_error(format!("family has no marked point {}", args.marked)))?,
    };
    Ok((fam, point))
}

fn label_of(fam: &LoadedFamily, spec: &str) -> String {
    fam.label.clone().unwrap_or_else(|| spec.to_string())
}

struct Context {
    global: Global,
}

impl Context {
    fn settings(&self, rect: Rect, res: (usize, usize), tol: f64) -> Result<GridSettings, Error> {
        let rect = self.global.rect.unwrap_or(rect);
        let (nx, ny) = self.global.res.unwrap_or(res);
        GridSettings::new(rect, nx, ny, self.global.tol.unwrap_or(tol))
    }

    fn grid_settings(&self) -> Result<GridSettings, Error> {
        self.settings(Rect::new(-2.5, 1.5, -2.0, 2.0).unwrap(), (512, 512), 1e-8)
    }

    fn depth(&self, default: usize) -> usize {
        self.global.depth.unwrap_or(default)
    }

    fn format(&self, default: Format) -> Format {
        self.global.format.unwrap_or_else(|| {
            match self.global.out.as_deref().and_then(Path::extension).and_then(|e| e.to_str()) {
                Some("pgm") => Format::Pgm,
                Some("json") => Format::Json,
                Some("csv") => Format::Csv,
                _ => default,
            }
        })
    }

    /// Sends text to `--out` or standard output.
    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.global.out {
            Some(p) => write_atomic(p, text.as_bytes())?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_grid(&self, grid: &Grid, tol: f64, values: &[f64], quantity: &str, summary: serde_json::Value) -> Result<(), Error> {
        match self.format(Format::Csv) {
            Format::Csv => {
                self.emit(&grid_csv(grid, tol, values))?;
                if self.global.out.is_some() {
                    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
                } else {
                    eprintln!("{}", serde_json::to_string_pretty(&summary).unwrap());
                }
            }
            Format::Pgm => {
                let path = self
                    .global
                    .out
                    .as_ref()
                    .ok_or_else(|| input_error("--format pgm needs --out"))?;
                let (bytes, min, max) = grid_pgm(grid, values);
                write_atomic(path, &bytes)?;
                write_atomic(&sidecar_path(path), pgm_sidecar(grid, min, max, quantity).as_bytes())?;
                println!("{}", serde_json::to_string_pretty(&summary).unwrap());
            }
            Format::Json => {
                let mut doc = summary;
                doc["rect"] = json!(grid.rect);
                doc["nx"] = json!(grid.nx);
                doc["ny"] = json!(grid.ny);
                doc["values"] = json!(values);
                self.emit(&(serde_json::to_string_pretty(&doc).unwrap() + "\n"))?;
            }
        }
        Ok(())
    }
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).unwrap() + "\n"
}

fn green_eval(ctx: &Context, family: &FamilyArgs, z: &str, s: &str) -> Result<i32, Error> {
    let (fam, _) = resolve(family)?;
    let s = parse_complex(s)?;
    let f = fam.family.specialize(s)?;
    let point = if z == "inf" {
        [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]
    } else {
        [parse_complex(z)?, Complex64::new(1.0, 0.0)]
    };
    let tol = ctx.global.tol.unwrap_or(1e-9);
    let g = green_value(&f, point, tol)?;
    if ctx.format(Format::Csv) == Format::Json {
        ctx.emit(&pretty(&json!({ "value": g.value, "error": g.error, "iterations": g.iterations, "tol": tol })))?;
    } else {
        ctx.emit(&format!("value {:.16e}\nerror {:.3e}\niterations {}\n", g.value, g.error, g.iterations))?;
    }
    Ok(0)
}

fn potential(ctx: &Context, family: &FamilyArgs) -> Result<i32, Error> {
    let (fam, a) = resolve(family)?;
    let st = ctx.grid_settings()?;
    let pot = marked_potential_grid(&fam.family, &a, st.grid, st.tol)?;
    let summary = json!({
        "certified_error": pot.error,
        "masked_cells": pot.masked_count(),
        "max_iterations": pot.max_iterations,
        "persistent": pot.persistent,
        "tol": st.tol,
    });
    ctx.emit_grid(&st.grid, st.tol, &pot.values, "potential", summary)?;
    Ok(0)
}

fn ddc_cmd(ctx: &Context, family: &FamilyArgs) -> Result<i32, Error> {
    let (fam, a) = resolve(family)?;
    let st = ctx.grid_settings()?;
    let pot = marked_potential_grid(&fam.family, &a, st.grid, st.tol)?;
    let mu = ddc(&pot)?;
    let summary = json!({
        "total_mass": mu.total,
        "signed_total_mass": mu.signed_total,
        "min_signed_cell_mass": mu.min_signed,
        "slack": mu.slack,
        "interior_margin": mu.interior_margin,
        "tol": st.tol,
    });
    ctx.emit_grid(&st.grid, st.tol, &mu.masses, "ddc", summary)?;
    Ok(0)
}

fn prep_params(ctx: &Context, family: &FamilyArgs, m: usize, n: usize, deflate: bool) -> Result<i32, Error> {
    let (fam, a) = resolve(family)?;
    let label = label_of(&fam, &family.family);
    let prep = preperiodic::prep_equation(&fam.family, &a, m, n, deflate)?;
    let descriptor = FamilyDescriptor::from_family(Some(label), &fam.family, &[(None, a.clone())]);
    let doc = match prep {
        Prep::Persistent { tail, period } => json!({
            "family": descriptor,
            "tail": m,
            "period": n,
            "status": "persistent",
            "certificate": { "tail": tail, "period": period },
        }),
        Prep::Equation(eq) => {
            let out = preperiodic::solve_parameters(&eq, &SolveOptions::default());
            let depth = m + n;
            let roots: Vec<_> = out
                .roots
                .iter()
                .map(|r| {
                    json!({
                        "root": r,
                        "return_distance": preperiodic::orbit_return_distance(&fam.family, &a, r.value, m, n),
                        "orbit_test": preperiodic::orbit_test(&fam.family, &a, r.value, depth),
                    })
                })
                .collect();
            json!({
                "family": descriptor,
                "tail": m,
                "period": n,
                "status": "equation",
                "deflated": eq.deflated,
                "degree": eq.degree(),
                "polynomial": eq.poly.to_string(),
                "count_with_multiplicity": out.count_with_multiplicity(),
                "roots": roots,
                "unconverged": out.unconverged,
                "iterations": out.iterations,
            })
        }
    };
    ctx.emit(&pretty(&doc))?;
    let complete = doc["unconverged"].as_array().is_none_or(|u| u.is_empty());
    Ok(if complete { 0 } else { 2 })
}

fn parse_pair(spec: &str) -> Result<MapPair, Error> {
    let (f, g) = spec
        .split_once(',')
        .ok_or_else(|| input_error(format!("pair `{spec}` must be F,G")))?;
    let (lf, lg) = (load_family(f.trim())?, load_family(g.trim())?);
    Ok(MapPair {
        label: format!("({}, {})", label_of(&lf, f), label_of(&lg, g)),
        f: lf.family,
        g: lg.family,
    })
}

fn common_prep(ctx: &Context, pairs: &[String], numeric: bool) -> Result<i32, Error> {
    let depth = ctx.depth(5);
    let mode = if numeric { MatchMode::Numeric } else { MatchMode::Exact };
    let mut rows = Vec::new();
    for spec in pairs {
        let pair = parse_pair(spec)?;
        let out = preperiodic::common_preperiodic(&pair.f, &pair.g, depth, mode)?;
        let z = MarkedPoint::identity();
        let pts = &out.intersection.points;
        let ok = pts.iter().all(|&p| {
            preperiodic::orbit_test(&pair.f, &z, p, depth).is_some() && preperiodic::orbit_test(&pair.g, &z, p, depth).is_some()
        });
        rows.push(json!({ "pair": pair.label, "result": out, "orbit_tests_pass": ok }));
    }
    ctx.emit(&pretty(&json!({ "depth": depth, "rows": rows })))?;
    Ok(0)
}

fn rank(ctx: &Context, family: &FamilyArgs, threshold: Option<f64>) -> Result<i32, Error> {
    let (fam, a) = resolve(family)?;
    let st = ctx.grid_settings()?;
    let threshold = match threshold {
        Some(t) => t,
        None => {
            // ten times the slack of the same grid
            let pot = marked_potential_grid(&fam.family, &a, st.grid, st.tol)?;
            ddc(&pot)?.support_threshold()
        }
    };
    let (rank, _) = phi_rank_marked(&fam.family, &a, st.grid, st.tol, threshold)?;
    ctx.emit(&pretty(&json!({ "rank": rank.value(), "verdict": rank, "threshold": threshold })))?;
    Ok(0)
}

fn experiment(ctx: &Context, args: &ExperimentArgs) -> Result<i32, Error> {
    let report: ExperimentReport = match args.id.as_str() {
        "stability-dichotomy" => {
            let (fam, a) = resolve(&args.family)?;
            let st = ctx.settings(Rect::new(-2.5, 1.5, -2.0, 2.0).unwrap(), (256, 256), 1e-8)?;
            experiments::run_stability_dichotomy(&label_of(&fam, &args.family.family), &fam.family, &a, st, ctx.depth(5))?
        }
        "pcf-density" => experiments::run_unicritical_pcf_density(args.degree, args.n_max, ctx.grid_settings()?)?,
        "double-mandelbrot" => {
            let shift: GaussianRational = args.shift.parse()?;
            let st = ctx.settings(Rect::new(-13.0, 3.0, -3.0, 3.0).unwrap(), (512, 512), 1e-8)?;
            experiments::run_double_mandelbrot(&shift, st, ctx.depth(5))?
        }
        "simultaneous-prep" => {
            let (fam, a) = resolve(&args.family)?;
            let b = match &args.point2 {
                Some(p) => parse_point(p)?,
                None => MarkedPoint::constant(GaussianRational::one()),
            };
            experiments::run_simultaneous_prep(&label_of(&fam, &args.family.family), &fam.family, &a, &b, ctx.depth(4))?
        }
        "common-prep-table" => {
            let pairs = if args.pairs.is_empty() {
                MapPair::default_table()
            } else {
                args.pairs.iter().map(|p| parse_pair(p)).collect::<Result<_, _>>()?
            };
            experiments::run_common_prep_table(&pairs, ctx.depth(5))?
        }
        other => {
            return Err(input_error(format!(
                "unknown experiment `{other}`, expected one of {}",
                experiments::SCENARIOS.join(", ")
            )))
        }
    };
    ctx.emit(&report.to_json())?;
    eprintln!("{}: wall time {:.3} s", report.scenario, report.wall_time.as_secs_f64());
    for (name, v) in &report.verdicts {
        eprintln!("  {} {name}: {}", if v.pass { "pass" } else { "FAIL" }, v.detail);
    }
    Ok(if report.all_pass() { 0 } else { EXIT_VERDICT })
}

fn dispatch(cli: &Cli) -> Result<i32, Error> {
    let ctx = Context {
        global: cli.global.clone(),
    };
    match &cli.command {
        Command::GreenEval { family, z, s } => green_eval(&ctx, family, z, s),
        Command::Potential { family } => potential(&ctx, family),
        Command::Ddc { family } => ddc_cmd(&ctx, family),
        Command::PrepParams {
            family,
            tail,
            period,
            deflate,
        } => prep_params(&ctx, family, *tail, *period, *deflate),
        Command::CommonPrep { pairs, numeric } => common_prep(&ctx, pairs, *numeric),
        Command::Rank { family, threshold } => rank(&ctx, family, *threshold),
        Command::Experiment(args) => experiment(&ctx, args),
    }
}

/// Runs the command line and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.global.threads {
        Some(k) => match rayon::ThreadPoolBuilder::new().num_threads(k.max(1)).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(input_error(e)),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
