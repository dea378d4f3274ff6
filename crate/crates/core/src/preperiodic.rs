//! Preperiodicity equations, persistence, parameter solving and common
//! preperiodic points of pairs of maps.

use num_complex::Complex64;
use serde::Serialize;

use crate::arith::{horner, ParamPolynomial};
use crate::error::{FamilyError, PrepError};
use crate::family::{MapFamily, MarkedPoint, Orbit, DEFAULT_ITERATION_CAP};
use crate::grid::par_map;
use crate::numeric::chordal;
use crate::roots::{self, Evaluator, Jet, SolveOptions, SolveOutcome};

/// Return distance (chordal) accepted by the numeric orbit test.
pub const ORBIT_TOLERANCE: f64 = 1e-6;

/// Two numeric points closer than this (relative) are the same point.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Exact equation `A_{m+n} B_m - A_m B_{m+n} = 0` in the parameter.
#[derive(Clone, Debug)]
pub struct PrepEquation {
    /// Monic; its roots are the parameters with `f^{m+n}(a) = f^m(a)`.
    pub poly: ParamPolynomial,
    pub tail: usize,
    pub period: usize,
    /// Factors shared with equations of smaller tail or dividing period removed.
    pub deflated: bool,
    orbit_eval: Option<OrbitEvaluator>,
}

impl PrepEquation {
    pub fn degree(&self) -> usize {
        self.poly.degree().unwrap_or(0)
    }

    /// Evaluator through the orbit recursion, when it is proportional to `poly`.
    pub fn orbit_evaluator(&self) -> Option<&OrbitEvaluator> {
        self.orbit_eval.as_ref()
    }
}

#[derive(Clone, Debug)]
pub enum Prep {
    Equation(PrepEquation),
    /// The identity holds for every parameter.
    Persistent { tail: usize, period: usize },
}

impl Prep {
    pub fn equation(self) -> Option<PrepEquation> {
        match self {
            Prep::Equation(e) => Some(e),
            Prep::Persistent { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Persistence {
    Persistent { tail: usize, period: usize },
    NotPersistent { checked_up_to: usize },
}

fn cross(orbit: &Orbit, m: usize, n: usize) -> ParamPolynomial {
    let (hi, lo) = (&orbit.points[m + n], &orbit.points[m]);
    &(hi.a() * lo.b()) - &(lo.a() * hi.b())
}

fn check_period(n: usize) -> Result<(), PrepError> {
    if n == 0 {
        Err(PrepError::ZeroPeriod)
    } else {
        Ok(())
    }
}

/// Equation from a precomputed orbit of length at least `m + n + 1`.
fn equation_from_orbit(
    fam: &MapFamily,
    a: &MarkedPoint,
    orbit: &Orbit,
    m: usize,
    n: usize,
    deflate: bool,
) -> Prep {
    let raw = cross(orbit, m, n);
    if raw.is_zero() {
        return Prep::Persistent { tail: m, period: n };
    }
    let mut poly = raw.monic();
    let mut deflated = false;
    if deflate {
        for n2 in (1..=n).filter(|d| n % d == 0) {
            for m2 in 0..=m {
                if (m2, n2) == (m, n) {
                    continue;
                }
                let lower = cross(orbit, m2, n2);
                loop {
                    let g = poly.gcd(&lower);
                    if g.is_constant() {
                        break;
                    }
                    poly = poly.exact_div(&g).expect("gcd divides").monic();
                    deflated = true;
                }
            }
        }
    }
    let orbit_eval = (!deflated && orbit.exact_chain).then(|| OrbitEvaluator {
        fam: fam.numeric().p.clone(),
        fam_q: fam.numeric().q.clone(),
        a: [a.a().to_complex(), a.b().to_complex()],
        tail: m,
        period: n,
        degree: poly.degree().unwrap_or(0),
    });
    Prep::Equation(PrepEquation {
        poly,
        tail: m,
        period: n,
        deflated: deflate,
        orbit_eval,
    })
}

pub fn prep_equation(
    fam: &MapFamily,
    a: &MarkedPoint,
    m: usize,
    n: usize,
    deflate: bool,
) -> Result<Prep, PrepError> {
    prep_equation_capped(fam, a, m, n, deflate, DEFAULT_ITERATION_CAP)
}

pub fn prep_equation_capped(
    fam: &MapFamily,
    a: &MarkedPoint,
    m: usize,
    n: usize,
    deflate: bool,
    cap: usize,
) -> Result<Prep, PrepError> {
    check_period(n)?;
    let orbit = fam.orbit(a, m + n, cap)?;
    Ok(equation_from_orbit(fam, a, &orbit, m, n, deflate))
}

/// Exact check of `f^{m+n}(a) ≡ f^m(a)` for all `m + n ≤ bound`, smallest
/// `m + n` first, then smallest tail.
pub fn is_persistently_preperiodic(fam: &MapFamily, a: &MarkedPoint, bound: usize) -> Persistence {
    let mut checked = 0;
    for k in 1..=bound {
        let orbit = match fam.orbit(a, k, DEFAULT_ITERATION_CAP) {
            Ok(o) => o,
            Err(_) => break,
        };
        for m in 0..k {
            if cross(&orbit, m, k - m).is_zero() {
                return Persistence::Persistent {
                    tail: m,
                    period: k - m,
                };
            }
        }
        checked = k;
    }
    Persistence::NotPersistent {
        checked_up_to: checked,
    }
}

pub fn solve_parameters(eq: &PrepEquation, opts: &SolveOptions) -> SolveOutcome {
    roots::solve(
        &eq.poly,
        eq.orbit_eval.as_ref().map(|e| e as &dyn Evaluator),
        opts,
    )
}

/// Largest degree at which [`distinct_parameters`] still takes the exact
/// squarefree part before solving.
pub const SQUAREFREE_MAX_DEGREE: usize = 128;

/// Roots of the equation as distinct values: the squarefree part is solved
/// when cheap, otherwise the equation itself (clusters are then reported).
pub fn distinct_parameters(eq: &PrepEquation, opts: &SolveOptions) -> SolveOutcome {
    if eq.degree() <= SQUAREFREE_MAX_DEGREE {
        let sq = eq.poly.squarefree();
        if sq != eq.poly {
            return roots::solve(&sq, None, opts);
        }
    }
    solve_parameters(eq, opts)
}

/// Preperiodicity polynomial of a single map in its own variable `z`.
pub fn preperiodic_points_map(
    f: &MapFamily,
    m: usize,
    n: usize,
    deflate: bool,
) -> Result<Prep, PrepError> {
    if !f.is_constant() {
        return Err(FamilyError::NotConstant.into());
    }
    prep_equation(f, &MarkedPoint::identity(), m, n, deflate)
}

/// Evaluates `A_{m+n} B_m - A_m B_{m+n}` at numeric `s` through the
/// homogeneous recursion, carrying second-order Taylor jets in `s` and
/// rescaling each step. Both products share the accumulated scale, so the
/// result is the exact polynomial up to a nonzero factor.
#[derive(Clone, Debug)]
pub struct OrbitEvaluator {
    fam: Vec<Vec<Complex64>>,
    fam_q: Vec<Vec<Complex64>>,
    a: [Vec<Complex64>; 2],
    tail: usize,
    period: usize,
    degree: usize,
}

#[derive(Clone, Copy)]
struct T2(Complex64, Complex64, Complex64);

impl T2 {
    fn constant(c: Complex64) -> Self {
        Self(c, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
    fn mul(self, o: Self) -> Self {
        Self(
            self.0 * o.0,
            self.0 * o.1 + self.1 * o.0,
            self.0 * o.2 + self.1 * o.1 + self.2 * o.0,
        )
    }
    fn add(self, o: Self) -> Self {
        Self(self.0 + o.0, self.1 + o.1, self.2 + o.2)
    }
    fn sub(self, o: Self) -> Self {
        Self(self.0 - o.0, self.1 - o.1, self.2 - o.2)
    }
    fn scale(self, k: f64) -> Self {
        Self(self.0 * k, self.1 * k, self.2 * k)
    }
    fn magnitude(self) -> f64 {
        self.0.norm().max(self.1.norm()).max(self.2.norm())
    }
}

fn horner_t2(coeffs: &[Complex64], s: T2) -> T2 {
    coeffs
        .iter()
        .rev()
        .fold(T2::constant(Complex64::new(0.0, 0.0)), |acc, &c| {
            acc.mul(s).add(T2::constant(c))
        })
}

impl OrbitEvaluator {
    fn apply(p: &[T2], q: &[T2], x: T2, y: T2) -> (T2, T2) {
        let d = p.len() - 1;
        let one = T2::constant(Complex64::new(1.0, 0.0));
        let mut xp = vec![one; d + 1];
        let mut yp = vec![one; d + 1];
        for k in 1..=d {
            xp[k] = xp[k - 1].mul(x);
            yp[k] = yp[k - 1].mul(y);
        }
        let zero = T2::constant(Complex64::new(0.0, 0.0));
        let (mut u, mut v) = (zero, zero);
        for k in 0..=d {
            let mono = xp[k].mul(yp[d - k]);
            u = u.add(p[k].mul(mono));
            v = v.add(q[k].mul(mono));
        }
        (u, v)
    }
}

impl Evaluator for OrbitEvaluator {
    fn degree(&self) -> usize {
        self.degree
    }

    fn jet(&self, s: Complex64) -> Jet {
        let sv = T2(s, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        let p: Vec<T2> = self.fam.iter().map(|c| horner_t2(c, sv)).collect();
        let q: Vec<T2> = self.fam_q.iter().map(|c| horner_t2(c, sv)).collect();
        let mut x = horner_t2(&self.a[0], sv);
        let mut y = horner_t2(&self.a[1], sv);
        let mut at_tail = (x, y);
        for k in 0..self.tail + self.period {
            if k == self.tail {
                at_tail = (x, y);
            }
            let (u, v) = Self::apply(&p, &q, x, y);
            let m = u.magnitude().max(v.magnitude());
            let k = if m > 0.0 && m.is_finite() { 1.0 / m } else { 1.0 };
            x = u.scale(k);
            y = v.scale(k);
            // the tail point is rescaled by the same factors after it is stored
        }
        if self.period == 0 {
            at_tail = (x, y);
        }
        let e = x.mul(at_tail.1).sub(at_tail.0.mul(y));
        [e.0, e.1, e.2]
    }
}

/// Chordal distance between `f_s^{m+n}(a(s))` and `f_s^m(a(s))`.
pub fn orbit_return_distance(fam: &MapFamily, a: &MarkedPoint, s: Complex64, m: usize, n: usize) -> f64 {
    let Ok(f) = fam.specialize(s) else {
        return f64::INFINITY;
    };
    let mut z = a.eval(s);
    let normalize = |w: [Complex64; 2]| {
        let k = w[0].norm().max(w[1].norm());
        [w[0] / k, w[1] / k]
    };
    z = normalize(z);
    let mut at_tail = z;
    for k in 0..m + n {
        if k == m {
            at_tail = z;
        }
        z = normalize(f.apply(z));
    }
    if n == 0 {
        at_tail = z;
    }
    chordal(z, at_tail)
}

/// First `(m, n)` with `m + n ≤ depth` for which the numeric orbit of `a(s)`
/// returns within [`ORBIT_TOLERANCE`].
pub fn orbit_test(fam: &MapFamily, a: &MarkedPoint, s: Complex64, depth: usize) -> Option<(usize, usize)> {
    (1..=depth)
        .flat_map(|k| (0..k).map(move |m| (m, k - m)))
        .find(|&(m, n)| orbit_return_distance(fam, a, s, m, n) <= ORBIT_TOLERANCE)
}

/// Appends `z` unless a point within the relative dedup tolerance is present.
pub fn push_distinct(points: &mut Vec<Complex64>, z: Complex64, tol: f64) {
    if !points
        .iter()
        .any(|p| (p - z).norm() <= tol * (1.0 + p.norm().max(z.norm())))
    {
        points.push(z);
    }
}

pub fn sort_points(points: &mut [Complex64]) {
    points.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Roots of exact gcds of the two equation families.
    Exact,
    /// Mutual-nearest-neighbour matching of separately computed roots.
    Numeric,
}

/// Intersection of the preperiodic sets of two marked sections, depth by depth.
#[derive(Clone, Debug, Serialize)]
pub struct PrepIntersection {
    pub method: MatchMode,
    pub depth: usize,
    /// Distinct common points at the maximal depth, sorted.
    pub points: Vec<Complex64>,
    /// `counts[k - 1]` is the number of distinct common points at depth `k`.
    pub counts: Vec<usize>,
    /// Largest gcd degree encountered at each depth (exact mode); all zero
    /// certifies the intersection is empty.
    pub gcd_degrees: Vec<usize>,
    /// One side is persistently preperiodic at that depth, so the common set
    /// is the other side's whole preperiodic set.
    pub persistent_side: bool,
    /// Both sides persistently preperiodic: every parameter is common.
    pub everything: bool,
    /// Points with more than one candidate partner (numeric mode).
    pub ambiguous: Vec<Complex64>,
    /// Maximal root count (with multiplicity) that failed to converge.
    pub unconverged: usize,
}

impl PrepIntersection {
    pub fn stabilized(&self) -> bool {
        let n = self.counts.len();
        n >= 2 && self.counts[n - 1] == self.counts[n - 2]
    }
}

/// Maximal-tail equations at depth `k`: every `(m, n)` with `m + n ≤ k` has
/// its root set inside that of `(k - n, n)`.
fn depth_equations(fam: &MapFamily, a: &MarkedPoint, orbit: &Orbit, k: usize) -> Vec<Prep> {
    (1..=k)
        .map(|n| equation_from_orbit(fam, a, orbit, k - n, n, false))
        .collect()
}

fn roots_of(eq: &PrepEquation, opts: &SolveOptions, unconverged: &mut usize) -> Vec<Complex64> {
    let out = distinct_parameters(eq, opts);
    *unconverged += out.unconverged.len();
    out.values()
}

/// Common preperiodic parameters of `(fam_a, a)` and `(fam_b, b)` over all
/// `(m, n)`, `(m', n')` with `m + n, m' + n' ≤ depth`.
pub fn intersect_prep_sets(
    fam_a: &MapFamily,
    a: &MarkedPoint,
    fam_b: &MapFamily,
    b: &MarkedPoint,
    depth: usize,
    mode: MatchMode,
) -> Result<PrepIntersection, PrepError> {
    let orbit_a = fam_a.orbit(a, depth, DEFAULT_ITERATION_CAP)?;
    let orbit_b = fam_b.orbit(b, depth, DEFAULT_ITERATION_CAP)?;
    let opts = SolveOptions::default();
    let mut result = PrepIntersection {
        method: mode,
        depth,
        points: Vec::new(),
        counts: Vec::new(),
        gcd_degrees: Vec::new(),
        persistent_side: false,
        everything: false,
        ambiguous: Vec::new(),
        unconverged: 0,
    };
    for k in 1..=depth {
        let ea = depth_equations(fam_a, a, &orbit_a, k);
        let eb = depth_equations(fam_b, b, &orbit_b, k);
        let a_all = ea.iter().any(|e| matches!(e, Prep::Persistent { .. }));
        let b_all = eb.iter().any(|e| matches!(e, Prep::Persistent { .. }));
        let mut points = Vec::new();
        let mut max_gcd = 0;
        let mut unconverged = 0;
        if a_all && b_all {
            result.everything = true;
        } else if a_all || b_all {
            result.persistent_side = true;
            let other = if a_all { &eb } else { &ea };
            for e in other.iter().filter_map(|e| e.clone().equation()) {
                for z in roots_of(&e, &opts, &mut unconverged) {
                    push_distinct(&mut points, z, DEDUP_TOLERANCE);
                }
            }
        } else {
            let ea: Vec<PrepEquation> = ea.into_iter().filter_map(Prep::equation).collect();
            let eb: Vec<PrepEquation> = eb.into_iter().filter_map(Prep::equation).collect();
            match mode {
                MatchMode::Exact => {
                    let pairs: Vec<(usize, usize)> = (0..ea.len())
                        .flat_map(|i| (0..eb.len()).map(move |j| (i, j)))
                        .collect();
                    let gcds = par_map(pairs.len(), |t| {
                        let (i, j) = pairs[t];
                        ea[i].poly.gcd(&eb[j].poly)
                    });
                    for g in &gcds {
                        let deg = g.degree().unwrap_or(0);
                        max_gcd = max_gcd.max(deg);
                        if deg == 0 {
                            continue;
                        }
                        let out = roots::solve(g, None, &opts);
                        unconverged += out.unconverged.len();
                        for z in out.values() {
                            push_distinct(&mut points, z, DEDUP_TOLERANCE);
                        }
                    }
                }
                MatchMode::Numeric => {
                    let mut pa = Vec::new();
                    let mut pb = Vec::new();
                    for e in &ea {
                        for z in roots_of(e, &opts, &mut unconverged) {
                            push_distinct(&mut pa, z, DEDUP_TOLERANCE);
                        }
                    }
                    for e in &eb {
                        for z in roots_of(e, &opts, &mut unconverged) {
                            push_distinct(&mut pb, z, DEDUP_TOLERANCE);
                        }
                    }
                    let (matched, ambiguous) = mutual_nearest(&pa, &pb, 1e-8);
                    points = matched;
                    if k == depth {
                        result.ambiguous = ambiguous;
                    }
                }
            }
        }
        sort_points(&mut points);
        result.counts.push(points.len());
        result.gcd_degrees.push(max_gcd);
        result.unconverged = result.unconverged.max(unconverged);
        if k == depth {
            result.points = points;
        }
    }
    Ok(result)
}

fn mutual_nearest(pa: &[Complex64], pb: &[Complex64], tol: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let near = |z: Complex64, set: &[Complex64]| -> Vec<usize> {
        set.iter()
            .enumerate()
            .filter(|(_, w)| (z - **w).norm() <= tol)
            .map(|(k, _)| k)
            .collect()
    };
    let mut matched = Vec::new();
    let mut ambiguous = Vec::new();
    for &z in pa {
        let cand = near(z, pb);
        match cand.len() {
            0 => {}
            1 => {
                let w = pb[cand[0]];
                if near(w, pa).len() == 1 {
                    matched.push(0.5 * (z + w));
                } else {
                    ambiguous.push(z);
                }
            }
            _ => ambiguous.push(z),
        }
    }
    (matched, ambiguous)
}

/// Common preperiodic points of two maps with constant coefficients.
#[derive(Clone, Debug, Serialize)]
pub struct CommonPrep {
    #[serde(flatten)]
    pub intersection: PrepIntersection,
    /// `∞` is preperiodic for both maps within the depth.
    pub infinity_common: bool,
    pub identical_maps: bool,
}

pub fn common_preperiodic(
    f: &MapFamily,
    g: &MapFamily,
    depth: usize,
    mode: MatchMode,
) -> Result<CommonPrep, PrepError> {
    if !f.is_constant() || !g.is_constant() {
        return Err(FamilyError::NotConstant.into());
    }
    let z = MarkedPoint::identity();
    let intersection = intersect_prep_sets(f, &z, g, &z, depth, mode)?;
    let inf = MarkedPoint::infinity();
    let prep_at_inf = |h: &MapFamily| {
        matches!(
            is_persistently_preperiodic(h, &inf, depth),
            Persistence::Persistent { .. }
        )
    };
    Ok(CommonPrep {
        intersection,
        infinity_common: prep_at_inf(f) && prep_at_inf(g),
        identical_maps: f == g,
    })
}

/// Distinct preperiodic parameters with `m + n ≤ depth`.
#[derive(Clone, Debug, Serialize)]
pub struct PrepSearch {
    pub depth: usize,
    /// Sorted distinct parameters.
    pub points: Vec<Complex64>,
    /// Approximations that failed to converge.
    pub unconverged: usize,
    /// Set when `a` is persistently preperiodic (every parameter qualifies).
    pub persistent: Option<(usize, usize)>,
}

pub fn prep_parameters(fam: &MapFamily, a: &MarkedPoint, depth: usize) -> Result<PrepSearch, PrepError> {
    let orbit = fam.orbit(a, depth, DEFAULT_ITERATION_CAP)?;
    let opts = SolveOptions::default();
    let mut points = Vec::new();
    let mut unconverged = 0;
    let mut persistent = None;
    for prep in depth_equations(fam, a, &orbit, depth) {
        match prep {
            Prep::Persistent { tail, period } => persistent = persistent.or(Some((tail, period))),
            Prep::Equation(e) => {
                for z in roots_of(&e, &opts, &mut unconverged) {
                    push_distinct(&mut points, z, DEDUP_TOLERANCE);
                }
            }
        }
    }
    sort_points(&mut points);
    Ok(PrepSearch {
        depth,
        points,
        unconverged,
        persistent,
    })
}

/// Numeric value of a marked point section.
pub fn marked_value(a: &MarkedPoint, s: Complex64) -> [Complex64; 2] {
    [horner(&a.a().to_complex(), s), horner(&a.b().to_complex(), s)]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::GaussianRational;

    fn poly(c: &[i64]) -> ParamPolynomial {
        ParamPolynomial::from_integers(c)
    }

    fn zero_point() -> MarkedPoint {
        MarkedPoint::constant(GaussianRational::zero())
    }

    fn eq(fam: &MapFamily, a: &MarkedPoint, m: usize, n: usize) -> PrepEquation {
        prep_equation(fam, a, m, n, false).unwrap().equation().unwrap()
    }

    #[test]
    fn quadratic_center_equations() {
        let fam = MapFamily::quadratic();
        assert_eq!(eq(&fam, &zero_point(), 0, 2).poly, poly(&[0, 1, 1]));
        assert_eq!(eq(&fam, &zero_point(), 0, 3).poly, poly(&[0, 1, 1, 2, 1]));
        for n in 1..=6 {
            assert_eq!(eq(&fam, &zero_point(), 0, n).degree(), 1 << (n - 1));
        }
    }

    #[test]
    fn fixed_point_is_persistent() {
        let fam = MapFamily::power(2).unwrap();
        assert!(matches!(
            prep_equation(&fam, &zero_point(), 0, 1, false).unwrap(),
            Prep::Persistent { tail: 0, period: 1 }
        ));
        assert_eq!(
            is_persistently_preperiodic(&fam, &zero_point(), 2),
            Persistence::Persistent { tail: 0, period: 1 }
        );
        assert_eq!(
            is_persistently_preperiodic(&MapFamily::quadratic(), &MarkedPoint::infinity(), 2),
            Persistence::Persistent { tail: 0, period: 1 }
        );
        assert_eq!(
            is_persistently_preperiodic(&MapFamily::quadratic(), &zero_point(), 6),
            Persistence::NotPersistent { checked_up_to: 6 }
        );
        assert_eq!(
            prep_equation(&fam, &zero_point(), 0, 0, false).unwrap_err(),
            PrepError::ZeroPeriod
        );
    }

    #[test]
    fn orbit_evaluator_is_proportional_to_the_polynomial() {
        let fam = MapFamily::quadratic();
        let e = eq(&fam, &zero_point(), 2, 3);
        let ev = e.orbit_evaluator().expect("exact chain");
        let coeff = roots::CoeffEvaluator::from_poly(&e.poly);
        let pts = [Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.4), Complex64::new(0.05, 0.9)];
        let ratios: Vec<Complex64> = pts.iter().map(|&s| ev.jet(s)[0] / coeff.jet(s)[0]).collect();
        // both scales vary, but the Newton quotient and the certificate must agree
        for &s in &pts {
            let [a0, a1, a2] = ev.jet(s);
            let [b0, b1, b2] = coeff.jet(s);
            assert!(((a0 / a1) - (b0 / b1)).norm() < 1e-10 * (b0 / b1).norm());
            assert!(((a2 / a1) - (b2 / b1)).norm() < 1e-9 * (b2 / b1).norm());
        }
        assert!(ratios.iter().all(|r| r.is_finite() && r.norm() > 0.0));
    }

    #[test]
    fn map_preperiodic_points() {
        let sq = MapFamily::power(2).unwrap();
        let e = preperiodic_points_map(&sq, 0, 1, false).unwrap().equation().unwrap();
        assert_eq!(e.poly, poly(&[0, -1, 1]));
        let full = preperiodic_points_map(&sq, 1, 1, false).unwrap().equation().unwrap();
        assert_eq!(full.poly, poly(&[0, 0, -1, 0, 1]));
        let defl = preperiodic_points_map(&sq, 1, 1, true).unwrap().equation().unwrap();
        assert_eq!(defl.poly, poly(&[1, 1]));
        assert!(defl.deflated && defl.orbit_evaluator().is_none());
        assert!(preperiodic_points_map(&MapFamily::quadratic(), 0, 1, false).is_err());
    }

    #[test]
    fn chebyshev_period_two_points() {
        let f = MapFamily::quadratic_constant(GaussianRational::from_integer(-2));
        let e = preperiodic_points_map(&f, 0, 2, false).unwrap().equation().unwrap();
        assert_eq!(e.degree(), 4);
        let out = solve_parameters(&e, &SolveOptions::default());
        // fixed points 2, -1 and the 2-cycle 2cos(2π/5), 2cos(4π/5)
        let mut expected = vec![2.0, -1.0];
        for k in [1.0, 2.0] {
            expected.push(2.0 * (std::f64::consts::TAU * k / 5.0).cos());
        }
        for x in expected {
            assert!(out.values().iter().any(|r| (r - Complex64::new(x, 0.0)).norm() < 1e-12), "{x}");
        }
    }

    #[test]
    fn common_points_of_square_and_chebyshev() {
        let f = MapFamily::power(2).unwrap();
        let g = MapFamily::quadratic_constant(GaussianRational::from_integer(-2));
        let out = common_preperiodic(&f, &g, 4, MatchMode::Exact).unwrap();
        assert_eq!(out.intersection.counts, vec![0, 2, 3, 3]);
        assert!(out.infinity_common);
        let numeric = common_preperiodic(&f, &g, 4, MatchMode::Numeric).unwrap();
        assert_eq!(numeric.intersection.counts, out.intersection.counts);
    }

    #[test]
    fn misiurewicz_parameters_of_the_quadratic_family() {
        let out = prep_parameters(&MapFamily::quadratic(), &zero_point(), 3).unwrap();
        // centers 0, -1, the period-3 centers and s = -2 (tail 2, period 1)
        assert_eq!(out.points.len(), 6);
        assert!(out.points.iter().any(|z| (z - Complex64::new(-2.0, 0.0)).norm() < 1e-12));
        for &z in &out.points {
            assert!(orbit_test(&MapFamily::quadratic(), &zero_point(), z, 3).is_some());
        }
    }

    #[test]
    fn orbit_distance_detects_period() {
        let fam = MapFamily::quadratic();
        let a = zero_point();
        assert!(orbit_return_distance(&fam, &a, Complex64::new(-1.0, 0.0), 0, 2) < 1e-15);
        assert!(orbit_return_distance(&fam, &a, Complex64::new(-1.0, 0.0), 0, 1) > 0.1);
        assert_eq!(orbit_test(&fam, &a, Complex64::new(-2.0, 0.0), 4), Some((2, 1)));
    }
}
