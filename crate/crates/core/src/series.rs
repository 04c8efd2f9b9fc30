//! Sparse multivariate power series truncated at a total degree.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Order marker for series known exactly (polynomials).
pub const EXACT_ORDER: u32 = 1 << 20;

/// Default truncation order.
pub const DEFAULT_ORDER: u32 = 12;

pub type Exps = Vec<u32>;

/// A power series in at most three named variables. Terms of total degree
/// above `order` are unknown and never stored.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries {
    vars: Vec<String>,
    order: u32,
    terms: BTreeMap<Exps, Scalar>,
}

pub(crate) fn total(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// Owned variable names.
pub fn names(vars: &[&str]) -> Vec<String> {
    vars.iter().map(|s| s.to_string()).collect()
}

impl TruncSeries {
    pub fn zero(vars: &[String], order: u32) -> Self {
        assert!(vars.len() <= 3, "at most three variables");
        TruncSeries { vars: vars.to_vec(), order, terms: BTreeMap::new() }
    }

    pub fn constant(vars: &[String], order: u32, c: Scalar) -> Self {
        Self::monomial(vars, order, vec![0; vars.len()], c)
    }

    pub fn one(vars: &[String], order: u32) -> Self {
        Self::constant(vars, order, Scalar::one())
    }

    /// The coordinate function of variable `i`.
    pub fn var(vars: &[String], order: u32, i: usize) -> Self {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Self::monomial(vars, order, e, Scalar::one())
    }

    pub fn monomial(vars: &[String], order: u32, exps: Exps, c: Scalar) -> Self {
        let mut s = Self::zero(vars, order);
        s.add_term(exps, c);
        s
    }

    pub fn from_terms(
        vars: &[String],
        order: u32,
        terms: impl IntoIterator<Item = (Exps, Scalar)>,
    ) -> Self {
        let mut s = Self::zero(vars, order);
        for (e, c) in terms {
            s.add_term(e, c);
        }
        s
    }

    /// Univariate series from coefficients `c[0] + c[1] t + ...`.
    pub fn from_coeffs(var: &str, order: u32, coeffs: &[Scalar]) -> Self {
        let vars = vec![var.to_string()];
        Self::from_terms(
            &vars,
            order,
            coeffs.iter().enumerate().map(|(k, c)| (vec![k as u32], c.clone())),
        )
    }

    /// Adds `c * x^exps`, dropping it when beyond the order and keeping the
    /// map free of zero coefficients.
    pub fn add_term(&mut self, exps: Exps, c: Scalar) {
        assert_eq!(exps.len(), self.vars.len(), "exponent arity");
        if total(&exps) > self.order || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&exps) {
            Some(v) => {
                let s = &*v + &c;
                if s.is_zero() {
                    self.terms.remove(&exps);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(exps, c);
            }
        }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_polynomial(&self) -> bool {
        self.order >= EXACT_ORDER
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exps, &Scalar)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// All coefficients are exact.
    pub fn is_exact(&self) -> bool {
        self.terms.values().all(Scalar::is_exact)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn coeff(&self, exps: &[u32]) -> Scalar {
        self.terms.get(exps).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn constant_term(&self) -> Scalar {
        self.coeff(&vec![0; self.nvars()])
    }

    /// Lowest total degree of a stored term.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().map(|e| total(e)).min()
    }

    /// Highest total degree of a stored term.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| total(e)).max()
    }

    /// Highest exponent of variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|e| e[i]).max().unwrap_or(0)
    }

    pub fn with_order(mut self, order: u32) -> Self {
        self.order = order;
        self.terms.retain(|e, _| total(e) <= order);
        self
    }

    pub fn truncate(&self, order: u32) -> Self {
        self.clone().with_order(order.min(self.order))
    }

    /// Drops float coefficients of modulus at most `tol`.
    pub fn chop(&self, tol: f64) -> Self {
        let mut s = self.clone();
        s.terms.retain(|_, c| !c.is_negligible(tol));
        s
    }

    pub fn homogeneous(&self, d: u32) -> Self {
        let mut s = Self::zero(&self.vars, self.order);
        for (e, c) in self.terms.iter().filter(|(e, _)| total(e) == d) {
            s.terms.insert(e.clone(), c.clone());
        }
        s
    }

    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        Self::from_terms(&self.vars, self.order, self.terms.iter().map(|(e, c)| (e.clone(), f(c))))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map_coeffs(|v| v * c)
    }

    pub fn to_float(&self) -> Self {
        self.map_coeffs(Scalar::to_float)
    }

    fn check_vars(&self, other: &Self) {
        assert!(
            self.vars == other.vars,
            "variable mismatch: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn same_vars(&self, other: &Self) -> Result<()> {
        if self.vars == other.vars {
            Ok(())
        } else {
            Err(Error::VariableMismatch(format!("{:?} vs {:?}", self.vars, other.vars)))
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(&self.vars, self.order);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Partial derivative. A truncated series loses one degree of validity.
    pub fn derivative(&self, i: usize) -> Self {
        let order = if self.is_polynomial() { self.order } else { self.order.saturating_sub(1) };
        let mut s = Self::zero(&self.vars, order);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut f = e.clone();
            f[i] -= 1;
            s.add_term(f, c * &Scalar::int(e[i] as i64));
        }
        s
    }

    /// Multiplicative inverse of a unit, valid to `min(order, cap)`.
    pub fn inverse(&self, cap: u32) -> Result<Self> {
        let c0 = self.constant_term();
        let inv0 = c0.recip().map_err(|_| Error::DivisionByZero)?;
        let order = self.order.min(cap);
        // 1/(c0 (1 + w)) = inv0 * sum (-w)^k, w of positive valuation
        let w = (self.truncate(order) - Self::constant(&self.vars, order, c0)).scale(&inv0);
        let minus_w = -&w;
        let mut acc = Self::one(&self.vars, order);
        let mut p = Self::one(&self.vars, order);
        for _ in 0..order.min(EXACT_ORDER - 1) {
            p = &p * &minus_w;
            if p.is_zero() {
                break;
            }
            acc = &acc + &p;
        }
        Ok(acc.scale(&inv0))
    }

    /// Exact division by a monomial, `None` when some term is not divisible.
    pub fn divide_monomial(&self, m: &[u32]) -> Option<Self> {
        let d = total(m);
        let order = if self.is_polynomial() { self.order } else { self.order.saturating_sub(d) };
        let mut s = Self::zero(&self.vars, order);
        for (e, c) in &self.terms {
            if e.iter().zip(m).any(|(a, b)| a < b) {
                return None;
            }
            s.terms.insert(e.iter().zip(m).map(|(a, b)| a - b).collect(), c.clone());
        }
        Some(s)
    }

    pub fn mul_monomial(&self, m: &[u32]) -> Self {
        let d = total(m);
        let order = if self.is_polynomial() { self.order } else { self.order + d };
        Self::from_terms(
            &self.vars,
            order,
            self.terms.iter().map(|(e, c)| (e.iter().zip(m).map(|(a, b)| a + b).collect(), c.clone())),
        )
    }

    /// Componentwise minimum exponent over all terms (zero series gives zeros).
    pub fn monomial_gcd(&self) -> Exps {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return vec![0; self.nvars()];
        };
        let mut g = first.clone();
        for e in it {
            for (a, b) in g.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        g
    }

    /// Restriction to the hyperplane `x_i = 0`.
    pub fn restrict_zero(&self, i: usize) -> Self {
        let mut s = self.clone();
        s.terms.retain(|e, _| e[i] == 0);
        s
    }

    /// Substitutes a constant for variable `i`. Nonzero constants need an
    /// exactly known series.
    pub fn set_var(&self, i: usize, value: &Scalar) -> Result<Self> {
        if value.is_zero() {
            return Ok(self.restrict_zero(i));
        }
        if !self.is_polynomial() {
            return Err(Error::Truncation(format!(
                "cannot evaluate {} at a nonzero point of a series truncated at order {}",
                self.vars[i], self.order
            )));
        }
        let mut s = Self::zero(&self.vars, self.order);
        for (e, c) in &self.terms {
            let mut f = e.clone();
            let k = f[i];
            f[i] = 0;
            s.add_term(f, c * &value.powi(k as i64)?);
        }
        Ok(s)
    }

    /// The change of variable `x_i -> x_i + c`.
    pub fn translate(&self, i: usize, c: &Scalar) -> Result<Self> {
        if c.is_zero() {
            return Ok(self.clone());
        }
        if !self.is_polynomial() {
            return Err(Error::Truncation(format!(
                "cannot recenter {} on a series truncated at order {}",
                self.vars[i], self.order
            )));
        }
        let mut comps: Vec<TruncSeries> =
            (0..self.nvars()).map(|j| Self::var(&self.vars, self.order, j)).collect();
        comps[i] = &comps[i] + &Self::constant(&self.vars, self.order, c.clone());
        self.compose(&comps, &self.vars)
    }

    /// Substitutes `x_j = comps[j]`; the components live over `new_vars`.
    pub fn compose(&self, comps: &[TruncSeries], new_vars: &[String]) -> Result<Self> {
        if comps.len() != self.nvars() {
            return Err(Error::VariableMismatch(format!(
                "{} components for {} variables",
                comps.len(),
                self.nvars()
            )));
        }
        for c in comps {
            if c.vars() != new_vars {
                return Err(Error::VariableMismatch(format!("{:?} vs {:?}", c.vars(), new_vars)));
            }
        }
        let mut order = comps.iter().map(|c| c.order).fold(self.order, u32::min);
        let constant_part = comps.iter().any(|c| !c.constant_term().is_zero());
        if constant_part && !self.is_polynomial() {
            return Err(Error::Truncation(
                "substitution with a constant term into a truncated series".into(),
            ));
        }
        if constant_part {
            order = comps.iter().map(|c| c.order).min().unwrap_or(EXACT_ORDER);
        }
        if order == 0 && !self.is_zero() && self.degree().unwrap_or(0) > 0 {
            return Err(Error::Truncation("composition drops below order 1".into()));
        }
        // cache powers per component
        let mut powers: Vec<Vec<TruncSeries>> = comps
            .iter()
            .map(|c| vec![TruncSeries::one(new_vars, order), c.truncate(order)])
            .collect();
        let mut out = TruncSeries::zero(new_vars, order);
        for (e, c) in &self.terms {
            let mut term = TruncSeries::constant(new_vars, order, c.clone());
            for (j, &k) in e.iter().enumerate() {
                while powers[j].len() <= k as usize {
                    let next = &powers[j][powers[j].len() - 1] * &powers[j][1];
                    powers[j].push(next);
                }
                term = &term * &powers[j][k as usize];
                if term.is_zero() {
                    break;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Re-expresses the series over a larger ordered variable set.
    pub fn embed(&self, new_vars: &[String]) -> Result<Self> {
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| {
                new_vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::UnknownVariable(v.clone()))
            })
            .collect::<Result<_>>()?;
        let mut s = Self::zero(new_vars, self.order);
        for (e, c) in &self.terms {
            let mut f = vec![0; new_vars.len()];
            for (k, &j) in map.iter().enumerate() {
                f[j] = e[k];
            }
            s.add_term(f, c.clone());
        }
        Ok(s)
    }

    /// Renames variables without touching exponents.
    pub fn rename(&self, new_vars: &[String]) -> Self {
        assert_eq!(new_vars.len(), self.nvars());
        TruncSeries { vars: new_vars.to_vec(), order: self.order, terms: self.terms.clone() }
    }

    pub fn eval_c64(&self, point: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(point)
                    .fold(c.to_c64(), |acc, (&k, x)| acc * x.powu(k))
            })
            .sum()
    }

    pub fn eval(&self, point: &[Scalar]) -> Scalar {
        let mut acc = Scalar::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (&k, x) in e.iter().zip(point) {
                t = &t * &x.powi(k as i64).expect("nonnegative power");
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Coefficients of a univariate series, lowest degree first.
    pub fn univariate_coeffs(&self) -> Vec<Scalar> {
        assert_eq!(self.nvars(), 1);
        let deg = self.degree().unwrap_or(0) as usize;
        let mut v = vec![Scalar::zero(); deg + 1];
        for (e, c) in &self.terms {
            v[e[0] as usize] = c.clone();
        }
        v
    }

    /// Coefficients in variable `i`, each a series in all variables with
    /// `x_i` absent.
    pub fn coeffs_in(&self, i: usize) -> Vec<TruncSeries> {
        let deg = self.degree_in(i) as usize;
        let mut v = vec![TruncSeries::zero(&self.vars, self.order); deg + 1];
        for (e, c) in &self.terms {
            let mut f = e.clone();
            f[i] = 0;
            v[e[i] as usize].terms.insert(f, c.clone());
        }
        v
    }

    /// Maximum coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(Scalar::abs).fold(0.0, f64::max)
    }

    /// Terms in printing order: descending total degree, then descending
    /// lexicographic exponents.
    pub fn sorted_terms(&self) -> Vec<(&Exps, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| total(b.0).cmp(&total(a.0)).then(b.0.cmp(a.0)));
        v
    }

    pub(crate) fn monomial_string(vars: &[String], e: &[u32]) -> String {
        e.iter()
            .zip(vars)
            .filter(|(k, _)| **k > 0)
            .map(|(k, v)| if *k == 1 { v.clone() } else { format!("{v}^{k}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

pub(crate) fn term_string(vars: &[String], e: &[u32], c: &Scalar) -> String {
    let m = TruncSeries::monomial_string(vars, e);
    if m.is_empty() {
        return c.to_string();
    }
    if c.is_one() {
        return m;
    }
    if (-c).is_one() {
        return format!("-{m}");
    }
    if c.needs_parens() {
        format!("({c})*{m}")
    } else {
        format!("{c}*{m}")
    }
}

pub(crate) fn join_terms(parts: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    for p in parts {
        if out.is_empty() || p.starts_with('-') {
            out.push_str(&p);
        } else {
            out.push('+');
            out.push_str(&p);
        }
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.sorted_terms().into_iter().map(|(e, c)| term_string(&self.vars, e, c));
        f.write_str(&join_terms(parts))
    }
}

impl Add<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        self.check_vars(rhs);
        let mut s = self.clone().with_order(self.order.min(rhs.order));
        for (e, c) in &rhs.terms {
            s.add_term(e.clone(), c.clone());
        }
        s
    }
}

impl Sub<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        self.check_vars(rhs);
        let mut s = self.clone().with_order(self.order.min(rhs.order));
        for (e, c) in &rhs.terms {
            s.add_term(e.clone(), -c);
        }
        s
    }
}

impl Mul<&TruncSeries> for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        self.check_vars(rhs);
        let order = self.order.min(rhs.order);
        let mut s = TruncSeries::zero(&self.vars, order);
        for (e1, c1) in &self.terms {
            let d1 = total(e1);
            for (e2, c2) in &rhs.terms {
                if d1 + total(e2) > order {
                    continue;
                }
                let e: Exps = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                s.add_term(e, c1 * c2);
            }
        }
        s
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        self.map_coeffs(|c| -c)
    }
}

impl Neg for TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        -&self
    }
}

macro_rules! owned_ops {
    ($trait:ident, $method:ident) => {
        impl $trait<TruncSeries> for TruncSeries {
            type Output = TruncSeries;
            fn $method(self, rhs: TruncSeries) -> TruncSeries {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&TruncSeries> for TruncSeries {
            type Output = TruncSeries;
            fn $method(self, rhs: &TruncSeries) -> TruncSeries {
                (&self).$method(rhs)
            }
        }
        impl $trait<TruncSeries> for &TruncSeries {
            type Output = TruncSeries;
            fn $method(self, rhs: TruncSeries) -> TruncSeries {
                self.$method(&rhs)
            }
        }
    };
}

owned_ops!(Add, add);
owned_ops!(Sub, sub);
owned_ops!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn v2() -> Vec<String> {
        names(&["t", "z"])
    }

    #[test]
    fn normalization_drops_zero_terms() {
        let vars = v2();
        let t = TruncSeries::var(&vars, 5, 0);
        let d = &t - &t;
        assert!(d.is_zero());
        assert_eq!(d.len(), 0);
    }

    #[test]
    fn truncation_and_order_min() {
        let vars = v2();
        let a = TruncSeries::var(&vars, 3, 0);
        let b = TruncSeries::var(&vars, 5, 1);
        let p = (&a + &b).pow(4);
        assert_eq!(p.order(), 3);
        assert!(p.is_zero());
    }

    #[test]
    fn inverse_of_unit() {
        let vars = names(&["t"]);
        let u = TruncSeries::from_coeffs("t", EXACT_ORDER, &[Scalar::one(), Scalar::one()]);
        let inv = u.inverse(6).unwrap();
        let prod = &u.truncate(6) * &inv;
        assert_eq!(prod, TruncSeries::one(&vars, 6));
        assert_eq!(inv.coeff(&[5]), Scalar::int(-1));
    }

    #[test]
    fn compose_and_translate() {
        let vars = v2();
        let t = TruncSeries::var(&vars, EXACT_ORDER, 0);
        let z = TruncSeries::var(&vars, EXACT_ORDER, 1);
        let f = &(&z * &z) + &t;
        let g = f.translate(1, &Scalar::int(2)).unwrap();
        // (z+2)^2 + t
        assert_eq!(g.coeff(&[0, 0]), Scalar::int(4));
        assert_eq!(g.coeff(&[0, 1]), Scalar::int(4));
        assert!(f.truncate(4).translate(1, &Scalar::one()).is_err());
    }

    #[test]
    fn display_order() {
        let vars = names(&["x", "y", "w"]);
        let w = TruncSeries::var(&vars, EXACT_ORDER, 2);
        let s = &(&w * &w).scale(&Scalar::int(2)) + &w.scale(&Scalar::int(5));
        let s = &s + &TruncSeries::constant(&vars, EXACT_ORDER, Scalar::int(2));
        assert_eq!(s.to_string(), "2*w^2+5*w+2");
        let h = TruncSeries::monomial(&vars, 4, vec![0, 0, 1], Scalar::ratio(-1, 2));
        assert_eq!(h.to_string(), "-1/2*w");
    }

    #[test]
    fn gcd_and_division() {
        let vars = names(&["x", "y"]);
        let s = TruncSeries::from_terms(
            &vars,
            EXACT_ORDER,
            [(vec![2, 1], Scalar::one()), (vec![1, 3], Scalar::int(3))],
        );
        assert_eq!(s.monomial_gcd(), vec![1, 1]);
        let q = s.divide_monomial(&[1, 1]).unwrap();
        assert_eq!(q.coeff(&[0, 2]), Scalar::int(3));
        assert!(s.divide_monomial(&[2, 2]).is_none());
    }
}
