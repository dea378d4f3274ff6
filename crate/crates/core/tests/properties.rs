use num_complex::Complex64;
use proptest::prelude::*;

use prepllab::family::FiberMap;
use prepllab::green::green_value;
use prepllab::{chordal, prep_equation, GaussianRational, MapFamily, MarkedPoint, ParamPolynomial};

fn small_rational() -> impl Strategy<Value = GaussianRational> {
    (-6i64..=6, 1i64..=4, -6i64..=6, 1i64..=4).prop_map(|(a, b, c, d)| GaussianRational::from_parts((a, b), (c, d)))
}

fn point() -> impl Strategy<Value = Complex64> {
    (-50.0f64..50.0, -50.0f64..50.0).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn gaussian_rationals_form_a_field(a in small_rational(), b in small_rational(), c in small_rational()) {
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&(&a - &b) + &b, a.clone());
        if let Some(inv) = a.inv() {
            prop_assert!((&a * &inv).is_one());
        }
        let back: GaussianRational = a.to_string().parse().unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn polynomial_division_identity(
        p in prop::collection::vec(small_rational(), 1..6),
        q in prop::collection::vec(small_rational(), 1..4),
    ) {
        let (p, q) = (ParamPolynomial::new(p), ParamPolynomial::new(q));
        prop_assume!(!q.is_zero());
        let (quo, rem) = p.div_rem(&q);
        prop_assert_eq!(&(&quo * &q) + &rem, p);
        prop_assert!(rem.is_zero() || rem.degree() < q.degree());
    }

    #[test]
    fn chordal_distance_is_a_metric(a in point(), b in point(), c in point()) {
        let one = Complex64::new(1.0, 0.0);
        let (a, b, c) = ([a, one], [b, one], [c, one]);
        let ab = chordal(a, b);
        prop_assert!((0.0..=1.0 + 1e-15).contains(&ab));
        prop_assert!((ab - chordal(b, a)).abs() < 1e-15);
        prop_assert!(chordal(a, a) < 1e-15);
        prop_assert!(ab <= chordal(a, c) + chordal(c, b) + 1e-12);
        let scaled = [a[0] * Complex64::new(0.0, 3.0), a[1] * Complex64::new(0.0, 3.0)];
        prop_assert!((chordal(scaled, b) - ab).abs() < 1e-12);
    }

    #[test]
    fn green_functional_equation(c in point(), z in point()) {
        let c = c / 25.0;
        let f = FiberMap::polynomial(&[c, Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let tol = 1e-10;
        let one = Complex64::new(1.0, 0.0);
        let g = green_value(&f, [z, one], tol).unwrap();
        let gf = green_value(&f, f.apply([z, one]), tol).unwrap();
        prop_assert!((gf.value - 2.0 * g.value).abs() <= 3.0 * tol);
        prop_assert!(g.value >= -tol);
    }

    #[test]
    fn prep_equations_are_functorial(
        d in 2usize..=3,
        a0 in -2i64..=2,
        a1 in -1i64..=1,
        m in 0usize..=2,
        n in 1usize..=2,
    ) {
        let fam = MapFamily::unicritical(d).unwrap();
        let a = MarkedPoint::affine(ParamPolynomial::from_integers(&[a0, a1]));
        let base = prep_equation(&fam, &a, m, n, false).unwrap().equation();
        prop_assume!(base.is_some());
        let base = base.unwrap().poly;
        for (m2, n2) in [(m + 1, n), (m, 2 * n)] {
            if m2 + n2 > 6 - d {
                continue;
            }
            if let Some(eq) = prep_equation(&fam, &a, m2, n2, false).unwrap().equation() {
                prop_assert!(eq.poly.exact_div(&base).is_some(), "E({m},{n}) does not divide E({m2},{n2})");
            }
        }
    }
}
