//! Algebraic families of self-maps of the projective line over the
//! affine parameter line, marked points, and their exact iteration.

use num_complex::Complex64;

use crate::arith::{horner, GaussianRational, ParamPolynomial};
use crate::error::FamilyError;
use crate::numeric;

/// Default bound on stored coefficients during symbolic iteration.
pub const DEFAULT_ITERATION_CAP: usize = 10_000_000;

/// Relative tolerance on `|Res|` below which a fiber counts as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Homogeneous binary form: `coeffs[k]` multiplies `X^k Y^(degree - k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Form {
    coeffs: Vec<ParamPolynomial>,
}

impl Form {
    pub fn new(coeffs: Vec<ParamPolynomial>) -> Self {
        assert!(!coeffs.is_empty(), "a form needs at least one coefficient slot");
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[ParamPolynomial] {
        &self.coeffs
    }

    /// Coefficient of `X^k Y^(d-k)`.
    pub fn coeff(&self, k: usize) -> &ParamPolynomial {
        &self.coeffs[k]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(ParamPolynomial::is_zero)
    }

    pub fn partial_x(&self) -> Form {
        let d = self.degree();
        if d == 0 {
            return Form::new(vec![ParamPolynomial::zero()]);
        }
        Form::new(
            (0..d)
                .map(|k| {
                    self.coeffs[k + 1].scale(&GaussianRational::from_integer(k as i64 + 1))
                })
                .collect(),
        )
    }

    pub fn partial_y(&self) -> Form {
        let d = self.degree();
        if d == 0 {
            return Form::new(vec![ParamPolynomial::zero()]);
        }
        Form::new(
            (0..d)
                .map(|k| self.coeffs[k].scale(&GaussianRational::from_integer((d - k) as i64)))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Form) -> Form {
        let mut out = vec![ParamPolynomial::zero(); self.degree() + other.degree() + 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Form::new(out)
    }

    pub fn sub(&self, other: &Form) -> Form {
        assert_eq!(self.degree(), other.degree());
        Form::new(
            self.coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        )
    }

    /// Substitute polynomial coordinates: `Σ c_k A^k B^(d-k)`.
    pub fn apply(&self, a: &ParamPolynomial, b: &ParamPolynomial) -> ParamPolynomial {
        let d = self.degree();
        let b_is_one = b == &ParamPolynomial::one();
        let mut b_pows = vec![ParamPolynomial::one()];
        if !b_is_one {
            for k in 1..=d {
                let next = &b_pows[k - 1] * b;
                b_pows.push(next);
            }
        }
        // Horner in A with B powers interleaved
        let mut acc = ParamPolynomial::zero();
        for k in (0..=d).rev() {
            acc = &acc * a;
            if !self.coeffs[k].is_zero() {
                let term = if b_is_one {
                    self.coeffs[k].clone()
                } else {
                    &self.coeffs[k] * &b_pows[d - k]
                };
                acc = &acc + &term;
            }
        }
        acc
    }

    fn shift(&self, c: &GaussianRational) -> Form {
        Form::new(self.coeffs.iter().map(|p| p.shift(c)).collect())
    }

    /// Numeric coefficients (in `s`) of each slot.
    pub fn to_complex(&self) -> Vec<Vec<Complex64>> {
        self.coeffs.iter().map(ParamPolynomial::to_complex).collect()
    }
}

/// Degree-`d` family `s ↦ f_s = (P_s : Q_s)` over the `s`-line.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MapFamily {
    p: Form,
    q: Form,
}

impl MapFamily {
    pub fn new(p: Form, q: Form) -> Result<Self, FamilyError> {
        if p.degree() != q.degree() {
            return Err(FamilyError::DegreeMismatch {
                numerator: p.degree(),
                denominator: q.degree(),
            });
        }
        if p.degree() < 2 {
            return Err(FamilyError::DegreeTooSmall(p.degree()));
        }
        let fam = Self { p, q };
        if fam.resultant_locus().is_zero() {
            return Err(FamilyError::VanishingResultant);
        }
        Ok(fam)
    }

    /// Polynomial family `z ↦ Σ coeffs[k](s) z^k` with `Q = Y^d`.
    pub fn polynomial(coeffs: Vec<ParamPolynomial>) -> Result<Self, FamilyError> {
        let d = coeffs.len().saturating_sub(1);
        let mut q = vec![ParamPolynomial::zero(); d + 1];
        q[0] = ParamPolynomial::one();
        Self::new(Form::new(coeffs), Form::new(q))
    }

    /// `z^d + s`.
    pub fn unicritical(d: usize) -> Result<Self, FamilyError> {
        let mut p = vec![ParamPolynomial::zero(); d + 1];
        p[0] = ParamPolynomial::var();
        p[d] = ParamPolynomial::one();
        Self::polynomial(p)
    }

    /// `z^2 + s`.
    pub fn quadratic() -> Self {
        Self::unicritical(2).expect("z^2 + s is a valid family")
    }

    /// The constant power map `z^d`.
    pub fn power(d: usize) -> Result<Self, FamilyError> {
        let mut p = vec![ParamPolynomial::zero(); d + 1];
        p[d] = ParamPolynomial::one();
        Self::polynomial(p)
    }

    /// The constant map `z^2 + c`.
    pub fn quadratic_constant(c: GaussianRational) -> Self {
        Self::polynomial(vec![
            ParamPolynomial::constant(c),
            ParamPolynomial::zero(),
            ParamPolynomial::one(),
        ])
        .expect("z^2 + c is a valid map")
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    pub fn numerator(&self) -> &Form {
        &self.p
    }

    pub fn denominator(&self) -> &Form {
        &self.q
    }

    /// No coefficient depends on `s`.
    pub fn is_constant(&self) -> bool {
        self.p
            .coeffs()
            .iter()
            .chain(self.q.coeffs())
            .all(ParamPolynomial::is_constant)
    }

    /// True when `Q = c·Y^d`, i.e. `∞` is a totally invariant point.
    pub fn is_polynomial(&self) -> bool {
        self.q.coeffs()[1..].iter().all(ParamPolynomial::is_zero)
            && !self.q.coeff(0).is_zero()
            && !self.p.coeff(self.degree()).is_zero()
    }

    /// The family reparametrized by `s ↦ s + shift`.
    pub fn shifted(&self, shift: &GaussianRational) -> Self {
        Self {
            p: self.p.shift(shift),
            q: self.q.shift(shift),
        }
    }

    /// `Res(P_s, Q_s)` as a polynomial in `s`, via a fraction-free
    /// elimination of the Sylvester matrix.
    pub fn resultant_locus(&self) -> ParamPolynomial {
        let d = self.degree();
        let n = 2 * d;
        let mut m = vec![vec![ParamPolynomial::zero(); n]; n];
        for i in 0..d {
            for k in 0..=d {
                m[i][i + k] = self.p.coeff(d - k).clone();
                m[d + i][i + k] = self.q.coeff(d - k).clone();
            }
        }
        bareiss_det(m)
    }

    /// Homogeneous Wronskian `P_X Q_Y - P_Y Q_X`, a form of degree `2d - 2`
    /// whose fiberwise roots are the critical points.
    pub fn critical_form(&self) -> Form {
        self.p
            .partial_x()
            .mul(&self.q.partial_y())
            .sub(&self.p.partial_y().mul(&self.q.partial_x()))
    }

    pub fn numeric(&self) -> NumericFamily {
        NumericFamily {
            degree: self.degree(),
            p: self.p.to_complex(),
            q: self.q.to_complex(),
        }
    }

    pub fn specialize(&self, s: Complex64) -> Result<FiberMap, FamilyError> {
        self.numeric().fiber(s)
    }

    /// Image of a marked point under one step, normalized.
    fn step(&self, a: &MarkedPoint) -> (MarkedPoint, bool) {
        let na = self.p.apply(&a.a, &a.b);
        let nb = self.q.apply(&a.a, &a.b);
        MarkedPoint::normalize(na, nb)
    }

    /// Exact orbit `a, f(a), …, f^n(a)` in normalized coordinates.
    pub fn orbit(&self, a: &MarkedPoint, n: usize, cap: usize) -> Result<Orbit, FamilyError> {
        let d = self.degree();
        let coeff_deg = self
            .p
            .coeffs()
            .iter()
            .chain(self.q.coeffs())
            .filter_map(ParamPolynomial::degree)
            .max()
            .unwrap_or(0);
        let mut points = vec![a.clone()];
        let mut exact_chain = true;
        let mut stored = a.coefficient_count();
        for _ in 0..n {
            let last = points.last().unwrap();
            let predicted_deg = d
                .saturating_mul(last.degree())
                .saturating_add(coeff_deg);
            let predicted = stored.saturating_add(2 * (predicted_deg + 1));
            if predicted > cap {
                return Err(FamilyError::IterationCap { predicted, cap });
            }
            let (next, constant_gcd) = self.step(last);
            exact_chain &= constant_gcd;
            stored += next.coefficient_count();
            points.push(next);
        }
        Ok(Orbit {
            points,
            exact_chain,
        })
    }

    /// `f_s^n(a(s))` as exact coordinates with common factors removed.
    pub fn iterate_marked(&self, a: &MarkedPoint, n: usize) -> Result<MarkedPoint, FamilyError> {
        self.iterate_marked_capped(a, n, DEFAULT_ITERATION_CAP)
    }

    pub fn iterate_marked_capped(
        &self,
        a: &MarkedPoint,
        n: usize,
        cap: usize,
    ) -> Result<MarkedPoint, FamilyError> {
        Ok(self.orbit(a, n, cap)?.points.pop().unwrap())
    }
}

/// Exact orbit of a marked point.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub points: Vec<MarkedPoint>,
    /// Every normalization divided by a constant only, so the unnormalized
    /// homogeneous recursion is proportional to the stored coordinates.
    pub exact_chain: bool,
}

fn bareiss_det(mut m: Vec<Vec<ParamPolynomial>>) -> ParamPolynomial {
    let n = m.len();
    let mut negate = false;
    let mut prev = ParamPolynomial::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return ParamPolynomial::zero(),
            }
        }
        if k + 1 == n {
            break;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num.exact_div(&prev).expect("Bareiss division is exact");
            }
            m[i][k] = ParamPolynomial::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Section `s ↦ (A(s) : B(s))` of the trivial `P^1`-bundle.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MarkedPoint {
    a: ParamPolynomial,
    b: ParamPolynomial,
}

impl MarkedPoint {
    /// Normalizes: common factor removed, `B` monic (or `(1:0)` when `B = 0`).
    pub fn new(a: ParamPolynomial, b: ParamPolynomial) -> Result<Self, FamilyError> {
        if a.is_zero() && b.is_zero() {
            return Err(FamilyError::ZeroMarkedPoint);
        }
        Ok(Self::normalize(a, b).0)
    }

    /// Affine marked point `s ↦ a(s)`.
    pub fn affine(a: ParamPolynomial) -> Self {
        Self {
            a,
            b: ParamPolynomial::one(),
        }
    }

    pub fn constant(c: GaussianRational) -> Self {
        Self::affine(ParamPolynomial::constant(c))
    }

    pub fn infinity() -> Self {
        Self {
            a: ParamPolynomial::one(),
            b: ParamPolynomial::zero(),
        }
    }

    /// The section `a(s) = s`, used to study a single map in its own variable.
    pub fn identity() -> Self {
        Self::affine(ParamPolynomial::var())
    }

    pub fn a(&self) -> &ParamPolynomial {
        &self.a
    }

    pub fn b(&self) -> &ParamPolynomial {
        &self.b
    }

    pub fn degree(&self) -> usize {
        self.a.degree().unwrap_or(0).max(self.b.degree().unwrap_or(0))
    }

    fn coefficient_count(&self) -> usize {
        self.a.coeffs().len() + self.b.coeffs().len()
    }

    /// Returns the normalized point and whether the removed gcd was constant.
    fn normalize(a: ParamPolynomial, b: ParamPolynomial) -> (Self, bool) {
        let g = a.gcd(&b);
        let constant_gcd = g.is_constant();
        let (a, b) = if constant_gcd {
            (a, b)
        } else {
            (
                a.exact_div(&g).expect("gcd divides"),
                b.exact_div(&g).expect("gcd divides"),
            )
        };
        let lead = if b.is_zero() {
            a.leading().cloned()
        } else {
            b.leading().cloned()
        }
        .expect("not both zero");
        let inv = lead.inv().unwrap();
        (
            Self {
                a: a.scale(&inv),
                b: b.scale(&inv),
            },
            constant_gcd,
        )
    }

    pub fn shifted(&self, shift: &GaussianRational) -> Self {
        Self::normalize(self.a.shift(shift), self.b.shift(shift)).0
    }

    pub fn eval(&self, s: Complex64) -> [Complex64; 2] {
        [self.a.eval(s), self.b.eval(s)]
    }
}

/// Family coefficients converted to binary64, for fast specialization.
#[derive(Clone, Debug)]
pub struct NumericFamily {
    pub degree: usize,
    pub p: Vec<Vec<Complex64>>,
    pub q: Vec<Vec<Complex64>>,
}

impl NumericFamily {
    pub fn fiber(&self, s: Complex64) -> Result<FiberMap, FamilyError> {
        FiberMap::new(
            self.p.iter().map(|c| horner(c, s)).collect(),
            self.q.iter().map(|c| horner(c, s)).collect(),
        )
    }
}

/// A single map `(p : q)` of the projective line with complex coefficients,
/// `p[k]` multiplying `X^k Y^(d-k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberMap {
    p: Vec<Complex64>,
    q: Vec<Complex64>,
}

impl FiberMap {
    /// Checks `|Res(p, q)| > 1e-12 · scale^(2d)`.
    pub fn new(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self, FamilyError> {
        if p.len() != q.len() {
            return Err(FamilyError::DegreeMismatch {
                numerator: p.len().saturating_sub(1),
                denominator: q.len().saturating_sub(1),
            });
        }
        if p.len() < 3 {
            return Err(FamilyError::DegreeTooSmall(p.len().saturating_sub(1)));
        }
        let f = Self { p, q };
        let res = f.resultant().norm();
        let tolerance = f.degeneracy_tolerance();
        if !(res > tolerance) {
            return Err(FamilyError::DegenerateFiber {
                resultant: res,
                tolerance,
            });
        }
        Ok(f)
    }

    /// `z ↦ Σ coeffs[k] z^k`.
    pub fn polynomial(coeffs: &[Complex64]) -> Result<Self, FamilyError> {
        let mut q = vec![Complex64::new(0.0, 0.0); coeffs.len()];
        q[0] = Complex64::new(1.0, 0.0);
        Self::new(coeffs.to_vec(), q)
    }

    pub fn degree(&self) -> usize {
        self.p.len() - 1
    }

    pub fn p(&self) -> &[Complex64] {
        &self.p
    }

    pub fn q(&self) -> &[Complex64] {
        &self.q
    }

    fn scale(&self) -> f64 {
        self.p
            .iter()
            .chain(&self.q)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    pub fn degeneracy_tolerance(&self) -> f64 {
        DEGENERACY_TOLERANCE * self.scale().powi(2 * self.degree() as i32)
    }

    fn sylvester(&self) -> Vec<Vec<Complex64>> {
        let d = self.degree();
        let n = 2 * d;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..d {
            for k in 0..=d {
                m[i][i + k] = self.p[d - k];
                m[d + i][i + k] = self.q[d - k];
            }
        }
        m
    }

    pub fn resultant(&self) -> Complex64 {
        numeric::det(self.sylvester())
    }

    /// `(P(X, Y), Q(X, Y))`.
    pub fn apply(&self, [x, y]: [Complex64; 2]) -> [Complex64; 2] {
        let d = self.degree();
        let mut xp = Vec::with_capacity(d + 1);
        let mut yp = Vec::with_capacity(d + 1);
        xp.push(Complex64::new(1.0, 0.0));
        yp.push(Complex64::new(1.0, 0.0));
        for k in 1..=d {
            xp.push(xp[k - 1] * x);
            yp.push(yp[k - 1] * y);
        }
        let mut out = [Complex64::new(0.0, 0.0); 2];
        for k in 0..=d {
            let mono = xp[k] * yp[d - k];
            out[0] += self.p[k] * mono;
            out[1] += self.q[k] * mono;
        }
        out
    }

    /// Affine image of `z`, `∞` when the denominator vanishes.
    pub fn apply_affine(&self, z: Complex64) -> [Complex64; 2] {
        self.apply([z, Complex64::new(1.0, 0.0)])
    }

    /// Sup-norm bounds `lower ≤ ‖F(Z)‖ ≤ upper` over `‖Z‖ = 1`. The lower
    /// bound comes from Bézout identities `U P + V Q = X^(2d-1)` (and
    /// `Y^(2d-1)`) solved numerically, with the residual accounted for.
    pub fn norm_bounds(&self) -> Option<(f64, f64)> {
        let d = self.degree();
        let n = 2 * d;
        let upper_p: f64 = self.p.iter().map(|c| c.norm()).sum();
        let upper_q: f64 = self.q.iter().map(|c| c.norm()).sum();
        let upper = upper_p.max(upper_q) * (1.0 + 4.0 * (d + 1) as f64 * numeric::EPS);

        // column j ↦ u_j, column d + j ↦ v_j; row t ↦ coefficient of X^t Y^(2d-1-t)
        let mut m = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for j in 0..d {
            for k in 0..=d {
                m[j + k][j] = self.p[k];
                m[j + k][d + j] = self.q[k];
            }
        }
        let mut worst_k: f64 = 0.0;
        let mut worst_r: f64 = 0.0;
        for target in [n - 1, 0] {
            let mut rhs = vec![Complex64::new(0.0, 0.0); n];
            rhs[target] = Complex64::new(1.0, 0.0);
            let x = numeric::solve(&m, &rhs)?;
            let k: f64 = x.iter().map(|c| c.norm()).sum();
            let mut resid = 0.0;
            for (t, row) in m.iter().enumerate() {
                let mut acc = -rhs[t];
                let mut mag = 1.0;
                for (a, b) in row.iter().zip(&x) {
                    acc += a * b;
                    mag += a.norm() * b.norm();
                }
                resid += acc.norm() + 4.0 * n as f64 * numeric::EPS * mag;
            }
            worst_k = worst_k.max(k);
            worst_r = worst_r.max(resid);
        }
        if !(worst_r < 0.5) || !worst_k.is_finite() {
            return None;
        }
        let lower = (1.0 - worst_r) / worst_k * (1.0 - 4.0 * n as f64 * numeric::EPS);
        Some((lower, upper))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn poly(coeffs: &[i64]) -> ParamPolynomial {
        ParamPolynomial::from_integers(coeffs)
    }

    #[test]
    fn quadratic_resultant_is_one() {
        let r = MapFamily::quadratic().resultant_locus();
        assert!(r.is_constant() && !r.is_zero());
        assert_eq!(r.coeff(0).to_complex().norm(), 1.0);
    }

    #[test]
    fn resultant_detects_degenerate_parameter() {
        // P = X^2, Q = s Y^2
        let p = Form::new(vec![poly(&[]), poly(&[]), poly(&[1])]);
        let q = Form::new(vec![poly(&[0, 1]), poly(&[]), poly(&[])]);
        let fam = MapFamily::new(p, q).unwrap();
        let r = fam.resultant_locus();
        assert_eq!(r.degree(), Some(2));
        assert!(r.coeff(0).is_zero() && r.coeff(1).is_zero());
        assert!(matches!(
            fam.specialize(c(0.0, 0.0)),
            Err(FamilyError::DegenerateFiber { .. })
        ));
        assert!(fam.specialize(c(0.5, 0.0)).is_ok());
    }

    #[test]
    fn common_factor_is_rejected() {
        // P = XY, Q = Y^2
        let p = Form::new(vec![poly(&[]), poly(&[1]), poly(&[])]);
        let q = Form::new(vec![poly(&[1]), poly(&[]), poly(&[])]);
        assert_eq!(MapFamily::new(p, q), Err(FamilyError::VanishingResultant));
        assert_eq!(
            MapFamily::polynomial(vec![poly(&[0, 1]), poly(&[1])]),
            Err(FamilyError::DegreeTooSmall(1))
        );
    }

    #[test]
    fn cubic_resultant_matches_numeric_sylvester() {
        // z^3 - 3z + s
        let fam = MapFamily::polynomial(vec![poly(&[0, 1]), poly(&[-3]), poly(&[]), poly(&[1])])
            .unwrap();
        let exact = fam.resultant_locus();
        for s in [c(0.3, -1.2), c(2.0, 0.5)] {
            let numeric = fam.specialize(s).unwrap().resultant();
            assert!((exact.eval(s) - numeric).norm() < 1e-12 * (1.0 + numeric.norm()));
        }
    }

    #[test]
    fn specialize_quadratic() {
        let f = MapFamily::quadratic().specialize(c(-1.0, 0.0)).unwrap();
        assert_eq!(f.p(), &[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let f = MapFamily::quadratic().specialize(c(0.0, 1.0)).unwrap();
        assert_eq!(f.p()[0], c(0.0, 1.0));
    }

    #[test]
    fn iterate_critical_point_of_quadratic() {
        let fam = MapFamily::quadratic();
        let a = MarkedPoint::constant(GaussianRational::zero());
        let a2 = fam.iterate_marked(&a, 2).unwrap();
        assert_eq!(a2, MarkedPoint::affine(poly(&[0, 1, 1])));
        assert_eq!(fam.iterate_marked(&a, 0).unwrap(), a);
        for n in 1..=6 {
            let an = fam.iterate_marked(&a, n).unwrap();
            assert_eq!(an.a().degree(), Some(1 << (n - 1)));
        }
    }

    #[test]
    fn iterate_power_map() {
        let fam = MapFamily::power(2).unwrap();
        let a = MarkedPoint::identity();
        let a3 = fam.iterate_marked(&a, 3).unwrap();
        assert_eq!(a3, MarkedPoint::affine(ParamPolynomial::monomial(GaussianRational::one(), 8)));
    }

    #[test]
    fn iteration_cap_refuses() {
        let fam = MapFamily::quadratic();
        let a = MarkedPoint::constant(GaussianRational::zero());
        assert!(matches!(
            fam.iterate_marked_capped(&a, 12, 1000),
            Err(FamilyError::IterationCap { .. })
        ));
    }

    #[test]
    fn marked_point_normalization_removes_gcd() {
        // ((s-1)s : (s-1)) = (s : 1)
        let p = MarkedPoint::new(poly(&[0, -1, 1]), poly(&[-1, 1])).unwrap();
        assert_eq!(p, MarkedPoint::identity());
        assert_eq!(MarkedPoint::new(poly(&[2]), poly(&[])).unwrap(), MarkedPoint::infinity());
        assert_eq!(MarkedPoint::new(poly(&[]), poly(&[])), Err(FamilyError::ZeroMarkedPoint));
    }

    #[test]
    fn critical_form_of_quadratic_and_power_maps() {
        let w = MapFamily::quadratic().critical_form();
        assert_eq!(w.degree(), 2);
        assert!(w.coeff(0).is_zero() && w.coeff(2).is_zero());
        assert!(w.coeff(1).is_constant() && !w.coeff(1).is_zero());
        for d in 2..=5 {
            let w = MapFamily::power(d).unwrap().critical_form();
            for k in 0..=2 * d - 2 {
                assert_eq!(w.coeff(k).is_zero(), k != d - 1, "d={d} k={k}");
            }
        }
    }

    #[test]
    fn cubic_critical_points_are_simple() {
        // z^3 - 3z + s: W = 9 (X^2 - Y^2) Y^2, the Y^2 factor being the critical point at infinity
        let fam = MapFamily::polynomial(vec![poly(&[0, 1]), poly(&[-3]), poly(&[]), poly(&[1])])
            .unwrap();
        let w = fam.critical_form();
        // dehomogenize at Y = 1 after removing the Y^2 factor from infinity
        let affine: Vec<ParamPolynomial> = w.coeffs().to_vec();
        assert!(affine[3].is_zero() && affine[4].is_zero());
        let q = ParamPolynomial::new(affine[..3].iter().map(|p| p.coeff(0)).collect());
        assert_eq!(q.squarefree(), q.monic());
        assert_eq!(q.degree(), Some(2));
    }

    #[test]
    fn norm_bounds_for_quadratic() {
        let f = FiberMap::polynomial(&[c(2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        let (lo, hi) = f.norm_bounds().unwrap();
        assert!((hi - 3.0).abs() < 1e-12);
        assert!((lo - 1.0 / 3.0).abs() < 1e-12);
        // the bound is valid on random unit vectors
        for k in 0..200 {
            let t = k as f64 * 0.37;
            let z = [c(t.cos(), t.sin() * 0.3), c(1.0, 0.0)];
            let w = f.apply(z);
            let nz = z[0].norm().max(z[1].norm());
            let nw = w[0].norm().max(w[1].norm());
            let r = nw / nz.powi(2);
            assert!(lo <= r + 1e-12 && r <= hi + 1e-12);
        }
    }

    #[test]
    fn shifted_family_evaluates_at_translated_parameter() {
        let fam = MapFamily::quadratic().shifted(&GaussianRational::from_integer(10));
        let f = fam.specialize(c(-9.0, 0.0)).unwrap();
        assert_eq!(f.p()[0], c(1.0, 0.0));
    }
}
