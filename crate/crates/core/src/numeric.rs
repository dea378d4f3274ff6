//! Small dense complex linear algebra used for fiber-map certificates.

use num_complex::Complex64;

pub(crate) const EPS: f64 = f64::EPSILON;

/// LU factorization with partial pivoting, in place. Returns the row
/// permutation and the permutation sign, or `None` for an exactly singular matrix.
fn lu(a: &mut [Vec<Complex64>]) -> Option<(Vec<usize>, f64)> {
    let n = a.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].norm().total_cmp(&a[j][k].norm()))
            .unwrap();
        if a[p][k].norm() == 0.0 {
            return None;
        }
        if p != k {
            a.swap(p, k);
            perm.swap(p, k);
            sign = -sign;
        }
        let pivot = a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / pivot;
            a[i][k] = f;
            for j in k + 1..n {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
    }
    Some((perm, sign))
}

pub(crate) fn det(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    match lu(&mut a) {
        None => Complex64::new(0.0, 0.0),
        Some((_, sign)) => (0..a.len()).fold(Complex64::new(sign, 0.0), |acc, k| acc * a[k][k]),
    }
}

pub(crate) fn solve(a: &[Vec<Complex64>], b: &[Complex64]) -> Option<Vec<Complex64>> {
    let n = a.len();
    let mut m = a.to_vec();
    let (perm, _) = lu(&mut m)?;
    let mut y: Vec<Complex64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = m[i][j] * y[j];
            y[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = m[i][j] * y[j];
            y[i] -= t;
        }
        y[i] /= m[i][i];
    }
    y.iter().all(|v| v.is_finite()).then_some(y)
}

/// Chordal distance on the Riemann sphere between projective points.
pub fn chordal([a0, a1]: [Complex64; 2], [b0, b1]: [Complex64; 2]) -> f64 {
    let cross = (a0 * b1 - a1 * b0).norm();
    let na = a0.norm().hypot(a1.norm());
    let nb = b0.norm().hypot(b1.norm());
    if na == 0.0 || nb == 0.0 {
        return f64::NAN;
    }
    // scale first to avoid overflow in the product
    cross / na / nb
}
