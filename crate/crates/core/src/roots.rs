//! Simultaneous (Aberth–Ehrlich) root finding with per-root certificates.
//!
//! The iteration only needs the Newton quotient `p/p'` at each approximation,
//! so any evaluator that returns the Taylor jet `(p, p', p''/2)` up to a common
//! nonzero factor can drive it. Besides plain coefficient evaluation this
//! allows evaluating preperiodicity polynomials through the orbit recursion,
//! which stays accurate at degrees where the expanded coefficients do not.

use num_complex::Complex64;
use serde::Serialize;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

use crate::arith::{GaussianRational, ParamPolynomial};
use crate::numeric::EPS;

/// Taylor jet `(p, p', p''/2)` scaled by an unspecified common factor.
pub type Jet = [Complex64; 3];

pub trait Evaluator: Sync {
    fn degree(&self) -> usize;
    fn jet(&self, z: Complex64) -> Jet;
}

/// Evaluation from binary64 coefficients, switching to the reversed
/// polynomial outside the unit disk so large degrees do not overflow.
#[derive(Clone, Debug)]
pub struct CoeffEvaluator {
    coeffs: Vec<Complex64>,
}

impl CoeffEvaluator {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn from_poly(p: &ParamPolynomial) -> Self {
        Self::new(p.to_complex())
    }
}

fn horner_jet<'a>(coeffs: impl DoubleEndedIterator<Item = &'a Complex64>, z: Complex64) -> Jet {
    let zero = Complex64::new(0.0, 0.0);
    let (mut p, mut d1, mut d2) = (zero, zero, zero);
    for c in coeffs.rev() {
        d2 = d2 * z + d1;
        d1 = d1 * z + p;
        p = p * z + c;
    }
    [p, d1, d2]
}

impl Evaluator for CoeffEvaluator {
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn jet(&self, z: Complex64) -> Jet {
        if z.norm() <= 1.0 {
            return horner_jet(self.coeffs.iter(), z);
        }
        // p(z) = z^n r(1/z) with r the reversed polynomial; drop the z^n factor
        let n = self.degree() as f64;
        let w = z.inv();
        let [r, r1, r2] = horner_jet(self.coeffs.iter().rev(), w);
        let w2 = w * w;
        let w3 = w2 * w;
        let d1 = w * r * n - w2 * r1;
        let d2 = w2 * r * (n * (n - 1.0)) - w3 * r1 * (2.0 * n - 2.0) + w2 * w2 * r2 * 2.0;
        [r, d1, d2 * 0.5]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RootKind {
    Simple,
    /// Approximations that could not be separated; `multiplicity` of them
    /// were merged into this entry.
    Cluster { multiplicity: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertifiedRoot {
    pub value: Complex64,
    /// Upper bound on `|p(value)|`, evaluated exactly at the binary64 value.
    pub residual: f64,
    /// Distance to the nearest other reported root.
    pub separation: f64,
    /// `|p| |p''| / |p'|^2` at the approximation; below 1/4 for simple roots.
    pub alpha: f64,
    #[serde(flatten)]
    pub kind: RootKind,
}

impl CertifiedRoot {
    pub fn multiplicity(&self) -> usize {
        match self.kind {
            RootKind::Simple => 1,
            RootKind::Cluster { multiplicity } => multiplicity,
        }
    }

    pub fn is_simple(&self) -> bool {
        self.kind == RootKind::Simple
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolveOptions {
    pub max_iterations: usize,
    /// Relative size of the last correction at which a root is accepted.
    pub tolerance: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            tolerance: 4.0 * EPS,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveOutcome {
    pub roots: Vec<CertifiedRoot>,
    /// Approximations still moving when the iteration budget ran out.
    pub unconverged: Vec<Complex64>,
    pub iterations: usize,
}

impl SolveOutcome {
    pub fn count_with_multiplicity(&self) -> usize {
        self.roots.iter().map(CertifiedRoot::multiplicity).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.unconverged.is_empty()
    }

    pub fn values(&self) -> Vec<Complex64> {
        self.roots.iter().map(|r| r.value).collect()
    }
}

/// Starting points on circles read off the Newton polygon of
/// `(k, log |a_k|)`; exact zero roots are placed at the origin.
pub fn initial_approximations(log_abs: &[f64]) -> Vec<Complex64> {
    let n = log_abs.len() - 1;
    let low = log_abs.iter().position(|v| v.is_finite()).unwrap_or(n);
    let mut out = vec![Complex64::new(0.0, 0.0); low];
    // upper convex hull over the finite points
    let pts: Vec<(usize, f64)> = (low..=n)
        .filter(|&k| log_abs[k].is_finite())
        .map(|k| (k, log_abs[k]))
        .collect();
    let mut hull: Vec<(usize, f64)> = Vec::new();
    for &p in &pts {
        while hull.len() >= 2 {
            let (k1, v1) = hull[hull.len() - 2];
            let (k2, v2) = hull[hull.len() - 1];
            let cross = (k2 as f64 - k1 as f64) * (p.1 - v1) - (v2 - v1) * (p.0 as f64 - k1 as f64);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    const OFFSET: f64 = 0.7;
    for w in hull.windows(2) {
        let ((ka, va), (kb, vb)) = (w[0], w[1]);
        let m = kb - ka;
        let radius = ((va - vb) / m as f64).exp();
        for j in 0..m {
            let theta = std::f64::consts::TAU * (j as f64 / m as f64 + ka as f64 / n as f64) + OFFSET;
            out.push(Complex64::from_polar(radius, theta));
        }
    }
    out
}

fn aberth(eval: &dyn Evaluator, z: &mut [Complex64], opts: &SolveOptions) -> (Vec<bool>, usize) {
    let n = z.len();
    let mut done = vec![false; n];
    let mut last_corr = vec![f64::INFINITY; n];
    let mut stalls = vec![0usize; n];
    let mut iterations = 0;
    for it in 0..opts.max_iterations {
        iterations = it + 1;
        let mut active = false;
        for i in 0..n {
            if done[i] {
                continue;
            }
            let [p, d1, _] = eval.jet(z[i]);
            if p.norm() == 0.0 {
                done[i] = true;
                continue;
            }
            active = true;
            let newton = if d1.norm() == 0.0 || !d1.is_finite() {
                // nudge off a critical point of p
                Complex64::new(1e-8, 1e-8) * (1.0 + z[i].norm())
            } else {
                p / d1
            };
            let mut sum = Complex64::new(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    let diff = z[i] - z[j];
                    if diff.norm() > 0.0 {
                        sum += diff.inv();
                    }
                }
            }
            let denom = Complex64::new(1.0, 0.0) - newton * sum;
            let corr = if denom.norm() > 0.0 && denom.is_finite() {
                newton / denom
            } else {
                newton
            };
            if !corr.is_finite() {
                continue;
            }
            z[i] -= corr;
            let size = corr.norm();
            if size <= opts.tolerance * z[i].norm() || size < f64::MIN_POSITIVE {
                done[i] = true;
            } else if it > 20 {
                // clusters stagnate at the rounding floor instead of converging
                if size >= 0.5 * last_corr[i] {
                    stalls[i] += 1;
                    if stalls[i] >= 8 && size <= 1e-6 * (1.0 + z[i].norm()) {
                        done[i] = true;
                    }
                } else {
                    stalls[i] = 0;
                }
            }
            last_corr[i] = size;
        }
        if !active {
            break;
        }
    }
    (done, iterations)
}

/// Gaussian integer as a binary64 mantissa and a power-of-two exponent.
fn scaled(re: &BigInt, im: &BigInt) -> (Complex64, i64) {
    let bits = re.bits().max(im.bits());
    let shift = bits.saturating_sub(60);
    let f = |n: &BigInt| (n >> shift).to_f64().unwrap_or(0.0);
    (Complex64::new(f(re), f(im)), shift as i64)
}

/// Exact evaluation of `p` and `p'` at binary64 points, in Gaussian
/// integers after clearing denominators.
struct ExactPoly {
    /// `L * c_k` for the common denominator `L`.
    coeffs: Vec<(BigInt, BigInt)>,
    ln_denominator: f64,
}

/// `p(z)` and `p'(z)` as mantissa/exponent pairs, both relative to the same
/// factor `L`, plus the binary exponent `-e` of `z = w 2^-e`.
struct ExactValue {
    p: (Complex64, i64),
    dp: (Complex64, i64),
    degree: usize,
    e: i64,
    ln_denominator: f64,
}

impl ExactValue {
    fn ln2_abs((m, k): (Complex64, i64)) -> f64 {
        if m.norm() == 0.0 {
            f64::NEG_INFINITY
        } else {
            m.norm().log2() + k as f64
        }
    }

    /// `|p(z)|`, rounded up.
    fn residual(&self) -> f64 {
        let l2 = Self::ln2_abs(self.p) - (self.e * self.degree as i64) as f64;
        (l2 * std::f64::consts::LN_2 - self.ln_denominator).exp() * (1.0 + 4.0 * EPS)
    }

    /// `p(z) / p'(z)`, or `None` when `p'(z) = 0`.
    fn newton(&self) -> Option<Complex64> {
        if self.dp.0.norm() == 0.0 {
            return None;
        }
        if self.p.0.norm() == 0.0 {
            return Some(Complex64::new(0.0, 0.0));
        }
        let exp = self.p.1 - self.dp.1 - self.e;
        let ratio = self.p.0 / self.dp.0;
        Some(ratio * 2f64.powi(exp.clamp(-2000, 2000) as i32))
    }
}

impl ExactPoly {
    fn new(poly: &ParamPolynomial) -> Self {
        let mut l = BigInt::one();
        for c in poly.coeffs() {
            l = l.lcm(c.re().denom()).lcm(c.im().denom());
        }
        let scale = |r: &BigRational| r.numer() * (&l / r.denom());
        let coeffs = poly.coeffs().iter().map(|c| (scale(c.re()), scale(c.im()))).collect();
        let ln_denominator = GaussianRational::new(BigRational::from_integer(l), BigRational::zero()).ln_abs();
        Self { coeffs, ln_denominator }
    }

    fn eval(&self, z: Complex64) -> Option<ExactValue> {
        if !z.is_finite() {
            return None;
        }
        let parts = |x: f64| {
            let (m, e, sign) = x.integer_decode();
            (BigInt::from(sign) * BigInt::from(m), e as i64)
        };
        let ((mut xr, er), (mut xi, ei)) = (parts(z.re), parts(z.im));
        let emin = er.min(ei);
        xr <<= (er - emin) as usize;
        xi <<= (ei - emin) as usize;
        let e = if emin >= 0 {
            xr <<= emin as usize;
            xi <<= emin as usize;
            0
        } else {
            -emin
        };
        let degree = self.coeffs.len() - 1;
        let mul = |(a, b): &(BigInt, BigInt)| (a * &xr - b * &xi, a * &xi + b * &xr);
        // Horner in w = z 2^e on the coefficients a_k 2^(e(D-k)); the
        // w-derivative is 2^(-e) times the z-derivative at the same scale
        let mut p = self.coeffs[degree].clone();
        let mut dp = (BigInt::zero(), BigInt::zero());
        for k in (0..degree).rev() {
            let (dr, di) = mul(&dp);
            dp = (dr + &p.0, di + &p.1);
            let (pr, pi) = mul(&p);
            let bits = e as usize * (degree - k);
            p = (pr + (&self.coeffs[k].0 << bits), pi + (&self.coeffs[k].1 << bits));
        }
        Some(ExactValue {
            p: scaled(&p.0, &p.1),
            dp: scaled(&dp.0, &dp.1),
            degree,
            e,
            ln_denominator: self.ln_denominator,
        })
    }
}

/// All roots of `poly` (nonzero). `eval` overrides coefficient evaluation;
/// it must vanish exactly on the roots of `poly` with the same degree.
pub fn solve(
    poly: &ParamPolynomial,
    eval: Option<&dyn Evaluator>,
    opts: &SolveOptions,
) -> SolveOutcome {
    let degree = poly.degree().expect("nonzero polynomial");
    if degree == 0 {
        return SolveOutcome {
            roots: Vec::new(),
            unconverged: Vec::new(),
            iterations: 0,
        };
    }
    let fallback = CoeffEvaluator::from_poly(poly);
    let eval: &dyn Evaluator = eval.unwrap_or(&fallback);
    assert_eq!(eval.degree(), degree, "evaluator degree must match the polynomial");
    let log_abs: Vec<f64> = poly.coeffs().iter().map(GaussianRational::ln_abs).collect();
    let mut z = initial_approximations(&log_abs);
    let (done, iterations) = aberth(eval, &mut z, opts);

    let converged: Vec<Complex64> = z.iter().zip(&done).filter(|(_, &d)| d).map(|(&v, _)| v).collect();
    let unconverged: Vec<Complex64> =
        z.iter().zip(&done).filter(|(_, &d)| !d).map(|(&v, _)| v).collect();

    // certificates and inclusion radii
    // exact Newton steps: binary64 evaluation rounds to zero inside clusters
    let exact = ExactPoly::new(poly);
    let values: Vec<Option<ExactValue>> = crate::grid::par_map(converged.len(), |i| exact.eval(converged[i]));
    let info: Vec<(f64, f64)> = converged
        .iter()
        .zip(&values)
        .map(|(&v, ev)| {
            // p' vanishes exactly: a multiple root or a critical point, never certified
            let Some(newton) = ev.as_ref().and_then(ExactValue::newton) else {
                return (f64::INFINITY, 0.0);
            };
            let [_, d1, d2] = eval.jet(v);
            let alpha = 2.0 * newton.norm() * (d2 / d1).norm();
            let alpha = if alpha.is_finite() {
                alpha * (1.0 + 1e-6)
            } else {
                f64::INFINITY
            };
            (alpha, degree as f64 * newton.norm())
        })
        .collect();
    let simple: Vec<bool> = info.iter().map(|&(a, _)| a < 0.25).collect();

    // group approximations whose inclusion discs overlap and that are not
    // individually certified
    let m = converged.len();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for i in 0..m {
        for j in i + 1..m {
            if simple[i] && simple[j] {
                continue;
            }
            let dist = (converged[i] - converged[j]).norm();
            let reach = 2.0 * (info[i].1 + info[j].1)
                + 8.0 * EPS * converged[i].norm().max(converged[j].norm());
            if dist <= reach {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..m {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut roots: Vec<CertifiedRoot> = groups
        .values()
        .map(|members| {
            let value = members.iter().map(|&i| converged[i]).sum::<Complex64>() / members.len() as f64;
            let (kind, alpha) = if members.len() == 1 && simple[members[0]] {
                (RootKind::Simple, info[members[0]].0)
            } else {
                (
                    RootKind::Cluster {
                        multiplicity: members.len(),
                    },
                    members.iter().map(|&i| info[i].0).fold(0.0, f64::max),
                )
            };
            CertifiedRoot {
                value,
                residual: exact.eval(value).map_or(f64::INFINITY, |e| e.residual()),
                separation: f64::INFINITY,
                alpha,
                kind,
            }
        })
        .collect();
    roots.sort_by(|a, b| {
        a.value
            .re
            .total_cmp(&b.value.re)
            .then(a.value.im.total_cmp(&b.value.im))
    });
    let values: Vec<Complex64> = roots.iter().map(|r| r.value).collect();
    for (i, r) in roots.iter_mut().enumerate() {
        r.separation = values
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, v)| (v - r.value).norm())
            .fold(f64::INFINITY, f64::min);
    }
    SolveOutcome {
        roots,
        unconverged,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[i64]) -> ParamPolynomial {
        ParamPolynomial::from_integers(c)
    }

    #[test]
    fn quadratic_roots() {
        let out = solve(&poly(&[0, 1, 1]), None, &SolveOptions::default());
        assert!(out.is_complete());
        let v = out.values();
        assert_eq!(v.len(), 2);
        assert!((v[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!(v[1].norm() < 1e-14);
        assert!(out.roots.iter().all(|r| r.is_simple() && r.residual < 1e-12));
    }

    #[test]
    fn double_root_is_flagged_as_cluster() {
        let out = solve(&poly(&[1, -2, 1]), None, &SolveOptions::default());
        assert_eq!(out.roots.len(), 1);
        let r = out.roots[0];
        assert_eq!(r.kind, RootKind::Cluster { multiplicity: 2 });
        assert!((r.value - Complex64::new(1.0, 0.0)).norm() < 1e-6);
        assert_eq!(out.count_with_multiplicity(), 2);
    }

    #[test]
    fn zero_roots_are_exact() {
        // z^4 - z^2 = z^2 (z - 1)(z + 1)
        let out = solve(&poly(&[0, 0, -1, 0, 1]), None, &SolveOptions::default());
        assert_eq!(out.count_with_multiplicity(), 4);
        let zero = out.roots.iter().find(|r| r.value.norm() < 1e-12).unwrap();
        assert_eq!(zero.multiplicity(), 2);
    }

    #[test]
    fn roots_of_unity_high_degree() {
        let mut c = vec![0i64; 65];
        c[0] = -1;
        c[64] = 1;
        let out = solve(&poly(&c), None, &SolveOptions::default());
        assert_eq!(out.roots.len(), 64);
        for r in &out.roots {
            assert!((r.value.norm() - 1.0).abs() < 1e-13);
            assert!(r.is_simple());
        }
    }

    #[test]
    fn reversed_jet_matches_direct_derivatives() {
        let e = CoeffEvaluator::new(vec![
            Complex64::new(1.0, 2.0),
            Complex64::new(-3.0, 0.0),
            Complex64::new(0.5, -1.0),
            Complex64::new(2.0, 0.0),
        ]);
        let z = Complex64::new(1.7, -2.2);
        let [p, d1, d2] = e.jet(z);
        let [q, e1, e2] = horner_jet(e.coeffs.iter(), z);
        // same up to the common factor z^-3
        let s = q / p;
        assert!((d1 * s - e1).norm() < 1e-12 * e1.norm());
        assert!((d2 * s - e2).norm() < 1e-12 * e2.norm());
    }

    #[test]
    fn newton_polygon_radii() {
        // (z - 1000)(z - 1/1000): radii 1e3 and 1e-3
        let c = [1.0f64, -1000.001, 1.0];
        let logs: Vec<f64> = c.iter().map(|v| v.abs().ln()).collect();
        let init = initial_approximations(&logs);
        let mut radii: Vec<f64> = init.iter().map(|z| z.norm()).collect();
        radii.sort_by(f64::total_cmp);
        assert!((radii[0] - 1.0 / 1000.001).abs() < 1e-9);
        assert!((radii[1] - 1000.001).abs() < 1e-6);
    }
}
