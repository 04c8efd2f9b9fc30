//! Coefficient field: exact complex rationals or double-precision complex.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type ExactComplex = Complex<BigRational>;

/// A coefficient. Arithmetic between two exact values stays exact; anything
/// touching a float becomes a float.
#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(ExactComplex),
    Float(Complex64),
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn rat_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // huge numerator/denominator: scale down through the float of each part
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(Complex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Scalar::int(1)
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(Complex::new(BigRational::from_integer(n.into()), BigRational::zero()))
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Exact(Complex::new(rat(n, d), BigRational::zero()))
    }

    pub fn rational(r: BigRational) -> Self {
        Scalar::Exact(Complex::new(r, BigRational::zero()))
    }

    pub fn complex_rational(re: BigRational, im: BigRational) -> Self {
        Scalar::Exact(Complex::new(re, im))
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        Scalar::Exact(Complex::new(BigRational::zero(), BigRational::one()))
    }

    pub fn float(re: f64, im: f64) -> Self {
        Scalar::Float(Complex64::new(re, im))
    }

    pub fn from_c64(z: Complex64) -> Self {
        Scalar::Float(z)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    /// Exact zero test for exact values; bitwise zero for floats.
    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Exact(z) => z.re.is_zero() && z.im.is_zero(),
            Scalar::Float(z) => z.re == 0.0 && z.im == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Exact(z) => z.re.is_one() && z.im.is_zero(),
            Scalar::Float(z) => z.re == 1.0 && z.im == 0.0,
        }
    }

    /// Zero within `tol` (exact values ignore the tolerance).
    pub fn is_negligible(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(_) => self.is_zero(),
            Scalar::Float(z) => z.norm() <= tol,
        }
    }

    pub fn to_c64(&self) -> Complex64 {
        match self {
            Scalar::Exact(z) => Complex64::new(rat_to_f64(&z.re), rat_to_f64(&z.im)),
            Scalar::Float(z) => *z,
        }
    }

    pub fn to_float(&self) -> Scalar {
        Scalar::Float(self.to_c64())
    }

    pub fn abs(&self) -> f64 {
        self.to_c64().norm()
    }

    /// The value as an exact real rational, if it is one.
    pub fn as_rational(&self) -> Option<BigRational> {
        match self {
            Scalar::Exact(z) if z.im.is_zero() => Some(z.re.clone()),
            _ => None,
        }
    }

    /// The value as an exact integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational().filter(|r| r.is_integer()).map(|r| r.to_integer())
    }

    pub fn as_i64(&self) -> Option<i64> {
        self.as_integer().and_then(|n| n.to_i64())
    }

    pub fn exact_parts(&self) -> Option<(&BigRational, &BigRational)> {
        match self {
            Scalar::Exact(z) => Some((&z.re, &z.im)),
            Scalar::Float(_) => None,
        }
    }

    /// True for exact real rationals strictly greater than zero.
    pub fn is_positive_rational(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_positive())
    }

    pub fn is_negative_rational(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_negative())
    }

    /// Real rational value: exact, or a float recognized by continued
    /// fractions with denominator at most `max_den` to within `tol`.
    pub fn rationalize(&self, max_den: i64, tol: f64) -> Option<BigRational> {
        match self {
            Scalar::Exact(_) => self.as_rational(),
            Scalar::Float(z) => {
                if z.im.abs() > tol * (1.0 + z.re.abs()) || !z.re.is_finite() {
                    return None;
                }
                let x = z.re;
                let (mut h0, mut h1, mut k0, mut k1) = (0i64, 1i64, 1i64, 0i64);
                let mut r = x;
                for _ in 0..40 {
                    let a = r.floor();
                    if a.abs() > 1e12 {
                        return None;
                    }
                    let a = a as i64;
                    let (h2, k2) = (a * h1 + h0, a * k1 + k0);
                    if k2 > max_den {
                        return None;
                    }
                    if (h2 as f64 / k2 as f64 - x).abs() <= tol * (1.0 + x.abs()) {
                        return Some(BigRational::new(BigInt::from(h2), BigInt::from(k2)));
                    }
                    (h0, h1, k0, k1) = (h1, h2, k1, k2);
                    let frac = r - a as f64;
                    if frac.abs() < 1e-300 {
                        return None;
                    }
                    r = 1.0 / frac;
                }
                None
            }
        }
    }

    pub fn conj(&self) -> Scalar {
        match self {
            Scalar::Exact(z) => Scalar::Exact(z.conj()),
            Scalar::Float(z) => Scalar::Float(z.conj()),
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Exact(a), Scalar::Exact(b)) => {
                if b.re.is_zero() && b.im.is_zero() {
                    return Err(Error::DivisionByZero);
                }
                let den = &b.re * &b.re + &b.im * &b.im;
                let re = (&a.re * &b.re + &a.im * &b.im) / &den;
                let im = (&a.im * &b.re - &a.re * &b.im) / &den;
                Ok(Scalar::Exact(Complex::new(re, im)))
            }
            _ => {
                let b = rhs.to_c64();
                if b.re == 0.0 && b.im == 0.0 {
                    return Err(Error::DivisionByZero);
                }
                Ok(Scalar::Float(self.to_c64() / b))
            }
        }
    }

    pub fn recip(&self) -> Result<Scalar> {
        Scalar::one().checked_div(self)
    }

    /// Integer power; negative exponents invert.
    pub fn powi(&self, e: i64) -> Result<Scalar> {
        if e < 0 {
            return self.recip()?.powi(-e);
        }
        let mut base = self.clone();
        let mut acc = Scalar::one();
        let mut k = e as u64;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            k >>= 1;
        }
        Ok(acc)
    }

    /// An exact square root when one exists in the complex rationals.
    pub fn exact_sqrt(&self) -> Option<Scalar> {
        let (a, b) = self.exact_parts()?;
        if b.is_zero() {
            if let Some(r) = rational_sqrt(&a.abs()) {
                return Some(if a.is_negative() {
                    Scalar::complex_rational(BigRational::zero(), r)
                } else {
                    Scalar::rational(r)
                });
            }
            return None;
        }
        // (c + d i)^2 = a + b i  =>  c^2 = (a + m)/2 with m = |a + b i|
        let m = rational_sqrt(&(a * a + b * b))?;
        let two = BigRational::from_integer(2.into());
        let c = rational_sqrt(&((a + &m) / &two))?;
        if c.is_zero() {
            return None;
        }
        let d = b / (&two * &c);
        Some(Scalar::complex_rational(c, d))
    }

    /// Square root: exact when possible, principal float root otherwise.
    pub fn sqrt(&self) -> Scalar {
        self.exact_sqrt().unwrap_or_else(|| Scalar::Float(self.to_c64().sqrt()))
    }

    /// Exact `n`-th root of an exact value when it exists (real rationals only).
    pub fn exact_root(&self, n: u32) -> Option<Scalar> {
        if n == 1 {
            return Some(self.clone());
        }
        let r = self.as_rational()?;
        if r.is_negative() {
            if n % 2 == 0 {
                return None;
            }
            let root = rational_nth_root(&-r, n)?;
            return Some(Scalar::rational(-root));
        }
        rational_nth_root(&r, n).map(Scalar::rational)
    }

    /// Principal `n`-th root, exact if available.
    pub fn root(&self, n: u32) -> Scalar {
        if let Some(r) = self.exact_root(n) {
            if !r.as_rational().is_some_and(|q| q.is_negative()) {
                return r;
            }
        }
        Scalar::Float(self.to_c64().powf(1.0 / n as f64))
    }

    /// Ordering used for deterministic tie-breaks: real part, then imaginary part.
    pub fn lex_cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a.re.cmp(&b.re).then(a.im.cmp(&b.im)),
            _ => {
                let (a, b) = (self.to_c64(), other.to_c64());
                a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
            }
        }
    }

    /// Exact equality for exact pairs, tolerance comparison otherwise.
    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => (self.to_c64() - other.to_c64()).norm() <= tol * (1.0 + other.abs()),
        }
    }
}

pub(crate) fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    rational_nth_root(r, 2)
}

pub(crate) fn rational_nth_root(r: &BigRational, n: u32) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let num = r.numer().nth_root(n);
    let den = r.denom().nth_root(n);
    if num.pow(n) == *r.numer() && den.pow(n) == *r.denom() {
        Some(BigRational::new(num, den))
    } else {
        None
    }
}

/// Least common multiple of the denominators of a list of rationals.
impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(a), Scalar::Exact(b)) => a == b,
            _ => self.to_c64() == other.to_c64(),
        }
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::rational(r)
    }
}

impl From<Complex64> for Scalar {
    fn from(z: Complex64) -> Self {
        Scalar::Float(z)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                match (self, rhs) {
                    (Scalar::Exact(a), Scalar::Exact(b)) => Scalar::Exact(a $op b),
                    _ => Scalar::Float(self.to_c64() $op rhs.to_c64()),
                }
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                &self $op &rhs
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                &self $op rhs
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self $op &rhs
            }
        }
    };
}

binop!(Add, add, +);
binop!(Sub, sub, -);
binop!(Mul, mul, *);

impl Div<&Scalar> for &Scalar {
    type Output = Scalar;
    /// Panics on exact division by zero; use [`Scalar::checked_div`] to handle it.
    fn div(self, rhs: &Scalar) -> Scalar {
        self.checked_div(rhs).expect("division by exact zero")
    }
}

impl Div<Scalar> for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(a) => Scalar::Exact(-a.clone()),
            Scalar::Float(a) => Scalar::Float(-a),
        }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

fn fmt_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn fmt_float(x: f64) -> String {
    let s = format!("{x:?}");
    if s.contains('e') {
        // the expression grammar has no exponent notation
        format!("{x:.17}").trim_end_matches('0').to_string()
    } else {
        s
    }
}

impl Scalar {
    /// True when printing needs parentheses to survive as a product factor.
    pub(crate) fn needs_parens(&self) -> bool {
        match self {
            Scalar::Exact(z) => !z.re.is_zero() && !z.im.is_zero(),
            Scalar::Float(z) => z.re != 0.0 && z.im != 0.0,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im, re0, im0) = match self {
            Scalar::Exact(z) => (
                fmt_rational(&z.re),
                fmt_rational(&z.im.abs()),
                z.re.is_zero(),
                z.im.is_zero(),
            ),
            Scalar::Float(z) => (fmt_float(z.re), fmt_float(z.im.abs()), z.re == 0.0, z.im == 0.0),
        };
        let im_neg = match self {
            Scalar::Exact(z) => z.im.is_negative(),
            Scalar::Float(z) => z.im < 0.0,
        };
        let im_term = if im == "1" { "i".to_string() } else { format!("{im}*i") };
        match (re0, im0) {
            (_, true) => write!(f, "{re}"),
            (true, false) => write!(f, "{}{im_term}", if im_neg { "-" } else { "" }),
            (false, false) => write!(f, "{re}{}{im_term}", if im_neg { "-" } else { "+" }),
        }
    }
}

impl serde::Serialize for Scalar {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}
