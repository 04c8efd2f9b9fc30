//! Univariate polynomials over [`Scalar`] and their roots.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::scalar::Scalar;

/// Coefficients, lowest degree first, without trailing zeros.
pub type Poly = Vec<Scalar>;

/// A root with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub value: Scalar,
    pub multiplicity: usize,
}

pub fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Scalar::is_zero) {
        p.pop();
    }
    p
}

fn trim_tol(mut p: Poly, tol: f64) -> Poly {
    let scale = p.iter().map(Scalar::abs).fold(0.0, f64::max).max(1.0);
    while p.last().is_some_and(|c| c.is_negligible(tol * scale)) {
        p.pop();
    }
    p
}

pub fn degree(p: &Poly) -> Option<usize> {
    let p = trim(p.clone());
    (!p.is_empty()).then(|| p.len() - 1)
}

pub fn eval(p: &[Scalar], x: &Scalar) -> Scalar {
    p.iter().rev().fold(Scalar::zero(), |acc, c| &(&acc * x) + c)
}

pub fn eval_c64(p: &[Scalar], x: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + c.to_c64())
}

pub fn derivative(p: &[Scalar]) -> Poly {
    p.iter().enumerate().skip(1).map(|(k, c)| c * &Scalar::int(k as i64)).collect()
}

/// Quotient and remainder.
pub fn div_rem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let b = trim(b.clone());
    assert!(!b.is_empty(), "division by the zero polynomial");
    let mut r = trim(a.clone());
    if r.len() < b.len() {
        return (vec![], r);
    }
    let lead = b.last().unwrap().clone();
    let mut q = vec![Scalar::zero(); r.len() - b.len() + 1];
    while r.len() >= b.len() && !r.is_empty() {
        let shift = r.len() - b.len();
        let c = r.last().unwrap() / &lead;
        for (k, bk) in b.iter().enumerate() {
            r[shift + k] = &r[shift + k] - &(&c * bk);
        }
        q[shift] = c;
        r.pop();
        r = trim(r);
    }
    (q, r)
}

/// Monic greatest common divisor (exact coefficients).
pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let (mut a, mut b) = (trim(a.clone()), trim(b.clone()));
    while !b.is_empty() {
        let (_, r) = div_rem(&a, &b);
        a = b;
        b = r;
    }
    if let Some(l) = a.last().cloned() {
        a = a.iter().map(|c| c / &l).collect();
    }
    a
}

fn divisors(n: &BigInt, cap: u64) -> Option<Vec<BigInt>> {
    let n = n.abs().to_u64()?;
    if n == 0 || n > cap {
        return None;
    }
    let mut out = Vec::new();
    let mut k = 1;
    while k * k <= n {
        if n % k == 0 {
            out.push(BigInt::from(k));
            if k * k != n {
                out.push(BigInt::from(n / k));
            }
        }
        k += 1;
    }
    Some(out)
}

/// Rational roots of a polynomial with real rational coefficients.
fn rational_root(p: &Poly) -> Option<Scalar> {
    let rs: Option<Vec<BigRational>> = p.iter().map(Scalar::as_rational).collect();
    let rs = rs?;
    let den = rs.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = rs.iter().map(|r| (r * BigRational::from_integer(den.clone())).to_integer()).collect();
    let a0 = ints.first()?;
    let an = ints.last()?;
    if a0.is_zero() {
        return Some(Scalar::zero());
    }
    let ps = divisors(a0, 1_000_000)?;
    let qs = divisors(an, 1_000_000)?;
    for p_ in &ps {
        for q_ in &qs {
            for sign in [1, -1] {
                let cand = Scalar::rational(BigRational::new(p_ * sign, q_.clone()));
                if eval(p, &cand).is_zero() {
                    return Some(cand);
                }
            }
        }
    }
    None
}

fn deflate(p: &Poly, r: &Scalar) -> Poly {
    let (q, _) = div_rem(p, &vec![-r, Scalar::one()]);
    q
}

fn push_root(out: &mut Vec<Root>, v: Scalar, tol: f64) {
    if let Some(r) = out.iter_mut().find(|r| r.value.approx_eq(&v, tol)) {
        r.multiplicity += 1;
    } else {
        out.push(Root { value: v, multiplicity: 1 });
    }
}

fn quadratic_roots(p: &Poly, out: &mut Vec<Root>, tol: f64) {
    let (c, b, a) = (&p[0], &p[1], &p[2]);
    let disc = &(b * b) - &(&Scalar::int(4) * &(a * c));
    let two_a = &Scalar::int(2) * a;
    let sq = disc.sqrt();
    let r1 = (&(-b) - &sq) / two_a.clone();
    let r2 = (&(-b) + &sq) / two_a;
    push_root(out, r1, tol);
    push_root(out, r2, tol);
}

/// Float roots by the eigenvalues of the companion matrix, Newton-polished.
fn companion_roots(p: &Poly) -> Vec<Complex64> {
    let n = p.len() - 1;
    let lead = p[n].to_c64();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for k in 1..n {
        m[(k, k - 1)] = Complex64::new(1.0, 0.0);
    }
    for k in 0..n {
        m[(k, n - 1)] = -p[k].to_c64() / lead;
    }
    let eig = m.schur().eigenvalues().map(|v| v.iter().cloned().collect::<Vec<_>>()).unwrap_or_default();
    let dp = derivative(p);
    eig.into_iter()
        .map(|mut z| {
            for _ in 0..8 {
                let d = eval_c64(&dp, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = eval_c64(p, z) / d;
                z -= step;
                if step.norm() < 1e-15 * (1.0 + z.norm()) {
                    break;
                }
            }
            z
        })
        .collect()
}

/// All roots with multiplicities. Exact polynomials keep rational and
/// quadratic-irrational-free roots exact; the rest are floats deduplicated at `tol`.
pub fn roots(p: &Poly, tol: f64) -> Vec<Root> {
    let mut p = trim_tol(p.clone(), 0.0);
    let mut out = Vec::new();
    if p.len() <= 1 {
        return out;
    }
    let exact = p.iter().all(Scalar::is_exact);
    if exact {
        while p.len() > 3 {
            match rational_root(&p) {
                Some(r) => {
                    p = deflate(&p, &r);
                    push_root(&mut out, r, tol);
                }
                None => break,
            }
        }
    } else {
        p = trim_tol(p, 1e-14);
    }
    match p.len() {
        0 | 1 => {}
        2 => push_root(&mut out, &(-&p[0]) / &p[1], tol),
        3 => {
            if exact {
                if let Some(r) = rational_root(&p) {
                    let q = deflate(&p, &r);
                    push_root(&mut out, r, tol);
                    push_root(&mut out, &(-&q[0]) / &q[1], tol);
                    return out;
                }
            }
            quadratic_roots(&p, &mut out, tol);
        }
        _ => {
            for z in companion_roots(&p) {
                push_root(&mut out, Scalar::from_c64(z), tol.max(1e-8));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Poly {
        v.iter().map(|&k| Scalar::int(k)).collect()
    }

    #[test]
    fn family_quadratic() {
        // 2w^2 + 5w + 2
        let r = roots(&ints(&[2, 5, 2]), 1e-10);
        let vals: Vec<Scalar> = r.iter().map(|r| r.value.clone()).collect();
        assert!(vals.contains(&Scalar::int(-2)));
        assert!(vals.contains(&Scalar::ratio(-1, 2)));
        assert!(r.iter().all(|r| r.value.is_exact()));
    }

    #[test]
    fn double_root() {
        let r = roots(&ints(&[2, 4, 2]), 1e-10);
        assert_eq!(r, vec![Root { value: Scalar::int(-1), multiplicity: 2 }]);
    }

    #[test]
    fn cubic_with_irrational_part() {
        // (w - 1)(w^2 - 2)
        let r = roots(&ints(&[2, -2, -1, 1]), 1e-10);
        assert_eq!(r.len(), 3);
        assert!(r.iter().any(|r| r.value == Scalar::int(1)));
        assert!(r.iter().any(|r| (r.value.to_c64().re - 2f64.sqrt()).abs() < 1e-12));
    }

    #[test]
    fn companion_matrix_roots() {
        // w^5 - 3 has no rational root
        let mut p = ints(&[-3, 0, 0, 0, 0, 1]);
        let r = roots(&p, 1e-10);
        assert_eq!(r.len(), 5);
        for root in &r {
            assert!(eval_c64(&p, root.value.to_c64()).norm() < 1e-10);
        }
        p[0] = Scalar::float(-3.0, 0.0);
        assert_eq!(roots(&p, 1e-10).len(), 5);
    }

    #[test]
    fn gcd_of_polys() {
        let a = ints(&[2, 5, 2]);
        let b = ints(&[1, 2]);
        assert_eq!(gcd(&a, &b), vec![Scalar::ratio(1, 2), Scalar::one()]);
    }
}
