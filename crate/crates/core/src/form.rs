//! Differential forms, logarithmic 1-forms and vector fields over series.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{join_terms, term_string, Exps, TruncSeries, EXACT_ORDER};

/// Basis monomials `dx_I` of degree `d` in `n` variables, as bitmasks in
/// ascending order (so `dx^dy`, `dx^dz`, `dy^dz` for n = 3, d = 2).
pub fn basis(n: usize, d: usize) -> Vec<u8> {
    (0u8..(1 << n)).filter(|m| m.count_ones() as usize == d).collect()
}

fn basis_index(n: usize, mask: u8) -> usize {
    basis(n, mask.count_ones() as usize)
        .iter()
        .position(|&m| m == mask)
        .expect("mask in basis")
}

fn bits(mask: u8) -> Vec<usize> {
    (0..8).filter(|i| mask & (1 << i) != 0).collect()
}

/// Sign of the shuffle placing the bits of `a` before those of `b`.
fn merge_sign(a: u8, b: u8) -> i64 {
    let mut inversions = 0;
    for i in bits(a) {
        for j in bits(b) {
            if i > j {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// A holomorphic differential form of degree 0..=3 with one series
/// coefficient per basis monomial.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffForm {
    vars: Vec<String>,
    degree: usize,
    coeffs: Vec<TruncSeries>,
}

impl DiffForm {
    pub fn zero(vars: &[String], degree: usize, order: u32) -> Self {
        assert!(degree <= vars.len());
        let coeffs = basis(vars.len(), degree).iter().map(|_| TruncSeries::zero(vars, order)).collect();
        DiffForm { vars: vars.to_vec(), degree, coeffs }
    }

    pub fn from_coeffs(vars: &[String], degree: usize, coeffs: Vec<TruncSeries>) -> Result<Self> {
        let n = basis(vars.len(), degree).len();
        if coeffs.len() != n {
            return Err(Error::VariableMismatch(format!(
                "{} coefficients for {} basis forms",
                coeffs.len(),
                n
            )));
        }
        for c in &coeffs {
            if c.vars() != vars {
                return Err(Error::VariableMismatch(format!("{:?} vs {:?}", c.vars(), vars)));
            }
        }
        Ok(DiffForm { vars: vars.to_vec(), degree, coeffs })
    }

    /// A 1-form `sum c_i dx_i`.
    pub fn one_form(coeffs: Vec<TruncSeries>) -> Self {
        let vars = coeffs[0].vars().to_vec();
        Self::from_coeffs(&vars, 1, coeffs).expect("one coefficient per variable")
    }

    /// A function viewed as a 0-form.
    pub fn function(f: TruncSeries) -> Self {
        DiffForm { vars: f.vars().to_vec(), degree: 0, coeffs: vec![f] }
    }

    /// The basis differential `dx_i`.
    pub fn dvar(vars: &[String], i: usize, order: u32) -> Self {
        let mut w = Self::zero(vars, 1, order);
        w.coeffs[i] = TruncSeries::one(vars, order);
        w
    }

    /// `f dx_I` for the basis mask `mask`.
    pub fn basis_form(f: TruncSeries, mask: u8) -> Self {
        let vars = f.vars().to_vec();
        let d = mask.count_ones() as usize;
        let mut w = Self::zero(&vars, d, f.order());
        w.coeffs[basis_index(vars.len(), mask)] = f;
        w
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[TruncSeries] {
        &self.coeffs
    }

    pub fn coeff(&self, mask: u8) -> &TruncSeries {
        &self.coeffs[basis_index(self.nvars(), mask)]
    }

    /// Coefficient of `dx_i` in a 1-form.
    pub fn c(&self, i: usize) -> &TruncSeries {
        assert_eq!(self.degree, 1);
        &self.coeffs[i]
    }

    pub fn masks(&self) -> Vec<u8> {
        basis(self.nvars(), self.degree)
    }

    pub fn order(&self) -> u32 {
        self.coeffs.iter().map(TruncSeries::order).min().unwrap_or(EXACT_ORDER)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(TruncSeries::is_zero)
    }

    pub fn is_exact(&self) -> bool {
        self.coeffs.iter().all(TruncSeries::is_exact)
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> Self {
        DiffForm { vars: self.vars.clone(), degree: self.degree, coeffs: self.coeffs.iter().map(f).collect() }
    }

    pub fn try_map(&self, f: impl Fn(&TruncSeries) -> Result<TruncSeries>) -> Result<Self> {
        Ok(DiffForm {
            vars: self.vars.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn truncate(&self, order: u32) -> Self {
        self.map(|c| c.truncate(order))
    }

    pub fn chop(&self, tol: f64) -> Self {
        self.map(|c| c.chop(tol))
    }

    pub fn to_float(&self) -> Self {
        self.map(TruncSeries::to_float)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        self.map(|s| s.scale(c))
    }

    /// Multiplication by a function.
    pub fn mul_fn(&self, f: &TruncSeries) -> Self {
        self.map(|s| s * f)
    }

    pub fn embed(&self, new_vars: &[String]) -> Result<Self> {
        let n = new_vars.len();
        let map: Vec<usize> = self
            .vars
            .iter()
            .map(|v| new_vars.iter().position(|w| w == v).ok_or_else(|| Error::UnknownVariable(v.clone())))
            .collect::<Result<_>>()?;
        let mut out = DiffForm::zero(new_vars, self.degree, self.order());
        for (mask, c) in self.masks().into_iter().zip(&self.coeffs) {
            let idx: Vec<usize> = bits(mask).into_iter().map(|b| map[b]).collect();
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            // sign of the permutation sorting idx
            let mut inv = 0;
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    if idx[a] > idx[b] {
                        inv += 1;
                    }
                }
            }
            let new_mask = sorted.iter().fold(0u8, |m, &b| m | (1 << b));
            let c = c.embed(new_vars)?;
            let c = if inv % 2 == 1 { -c } else { c };
            let k = basis_index(n, new_mask);
            out.coeffs[k] = &out.coeffs[k] + &c;
        }
        Ok(out)
    }

    /// Exterior derivative.
    pub fn d(&self) -> Result<Self> {
        if self.degree >= self.nvars() || self.degree > 2 {
            return Err(Error::TopDegree(format!(
                "d of a {}-form in {} variables",
                self.degree,
                self.nvars()
            )));
        }
        let n = self.nvars();
        let order = self.coeffs.iter().map(|c| c.derivative(0).order()).min().unwrap_or(EXACT_ORDER);
        let mut out = DiffForm::zero(&self.vars, self.degree + 1, order);
        for (mask, c) in self.masks().into_iter().zip(&self.coeffs) {
            for j in 0..n {
                if mask & (1 << j) != 0 {
                    continue;
                }
                // dx_j moved past the bits of mask below it
                let below = (mask & ((1 << j) - 1)).count_ones();
                let dc = c.derivative(j);
                let dc = if below % 2 == 1 { -dc } else { dc };
                let k = basis_index(n, mask | (1 << j));
                out.coeffs[k] = &out.coeffs[k] + &dc;
            }
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &DiffForm) -> Result<Self> {
        if self.vars != other.vars {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", self.vars, other.vars)));
        }
        let n = self.nvars();
        if self.degree + other.degree > n {
            return Err(Error::DegreeOverflow(self.degree, other.degree));
        }
        let order = self.order().min(other.order());
        let mut out = DiffForm::zero(&self.vars, self.degree + other.degree, order);
        for (ma, ca) in self.masks().into_iter().zip(&self.coeffs) {
            if ca.is_zero() {
                continue;
            }
            for (mb, cb) in other.masks().into_iter().zip(&other.coeffs) {
                if ma & mb != 0 || cb.is_zero() {
                    continue;
                }
                let prod = ca * cb;
                let prod = if merge_sign(ma, mb) < 0 { -prod } else { prod };
                let k = basis_index(n, ma | mb);
                out.coeffs[k] = &out.coeffs[k] + &prod;
            }
        }
        Ok(out)
    }

    pub fn interior(&self, x: &VectorField) -> Result<Self> {
        if self.vars != x.vars {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", self.vars, x.vars)));
        }
        if self.degree == 0 {
            return Err(Error::TopDegree("interior product of a function".into()));
        }
        let n = self.nvars();
        let order = self.order().min(x.order());
        let mut out = DiffForm::zero(&self.vars, self.degree - 1, order);
        for (mask, c) in self.masks().into_iter().zip(&self.coeffs) {
            for (pos, j) in bits(mask).into_iter().enumerate() {
                let term = c * &x.comps[j];
                let term = if pos % 2 == 1 { -term } else { term };
                let k = basis_index(n, mask & !(1 << j));
                out.coeffs[k] = &out.coeffs[k] + &term;
            }
        }
        Ok(out)
    }

    /// Integrability defect `w ^ dw` of a 1-form.
    pub fn integrability(&self) -> Result<Self> {
        self.wedge(&self.d()?)
    }

    /// Common monomial factor of all coefficients.
    pub fn monomial_gcd(&self) -> Exps {
        let mut g: Option<Exps> = None;
        for c in self.coeffs.iter().filter(|c| !c.is_zero()) {
            let m = c.monomial_gcd();
            g = Some(match g {
                None => m,
                Some(g) => g.iter().zip(&m).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        g.unwrap_or_else(|| vec![0; self.nvars()])
    }

    /// Removes the maximal common monomial factor; returns the quotient and
    /// the factor as a series.
    pub fn saturate(&self) -> Result<(DiffForm, TruncSeries)> {
        if self.is_zero() {
            return Err(Error::ZeroForm);
        }
        let m = self.monomial_gcd();
        let sat = self.try_map(|c| {
            c.divide_monomial(&m).ok_or_else(|| Error::Truncation("monomial division".into()))
        })?;
        let cof = TruncSeries::monomial(&self.vars, EXACT_ORDER, m, Scalar::one());
        Ok((sat, cof))
    }

    pub fn eval_c64(&self, point: &[Complex64]) -> Vec<Complex64> {
        self.coeffs.iter().map(|c| c.eval_c64(point)).collect()
    }

    /// Restriction of every coefficient to `x_i = 0`.
    pub fn restrict_zero(&self, i: usize) -> Self {
        self.map(|c| c.restrict_zero(i))
    }

    pub fn translate(&self, i: usize, c: &Scalar) -> Result<Self> {
        self.try_map(|s| s.translate(i, c))
    }

    /// Dual vector field of a 1-form in two variables, `-c_b d/da + c_a d/db`.
    pub fn dual_field(&self) -> Result<VectorField> {
        if self.degree != 1 || self.nvars() != 2 {
            return Err(Error::VariableMismatch("dual field needs a 1-form in two variables".into()));
        }
        Ok(VectorField { vars: self.vars.clone(), comps: vec![-&self.coeffs[1], self.coeffs[0].clone()] })
    }

    pub fn basis_string(vars: &[String], mask: u8) -> String {
        bits(mask).into_iter().map(|b| format!("d{}", vars[b])).collect::<Vec<_>>().join("*")
    }

    /// Printed form of `c * dx_I`, factoring the monomial content of `c`.
    fn term_string(vars: &[String], c: &TruncSeries, basis: &str) -> String {
        let factor = coefficient_string(vars, c);
        match factor.as_str() {
            "1" => basis.to_string(),
            "-1" => format!("-{basis}"),
            _ => format!("{factor}*{basis}"),
        }
    }

    /// Pretty printing that recognizes a `G*(a*m_x*dx+b*m_y*dy)` block in a
    /// 1-form of three variables, as produced by axis blow-ups.
    pub fn display_factored(&self) -> String {
        if self.degree != 1 || self.nvars() != 3 {
            return self.to_string();
        }
        let Some((g, (mx, a), (my, b))) = factor_pair(&self.coeffs[0], &self.coeffs[1]) else {
            return self.to_string();
        };
        let vars = &self.vars;
        let mono = |e: Exps, c: Scalar| TruncSeries::monomial(vars, EXACT_ORDER, e, c);
        let inner = join_terms([
            DiffForm::term_string(vars, &mono(mx, a), &DiffForm::basis_string(vars, 0b001)),
            DiffForm::term_string(vars, &mono(my, b), &DiffForm::basis_string(vars, 0b010)),
        ]);
        let g_str = coefficient_string(vars, &g);
        let head = if g_str == "1" { format!("({inner})") } else { format!("{g_str}*({inner})") };
        let tail = (!self.coeffs[2].is_zero())
            .then(|| DiffForm::term_string(vars, &self.coeffs[2], &DiffForm::basis_string(vars, 0b100)));
        join_terms(std::iter::once(head).chain(tail))
    }
}

/// Splits `cx = g * a_c * m_x`, `cy = g * b_c * m_y` with monomials `m_x`,
/// `m_y` and scalars `a_c`, `b_c` chosen as coprime integers when rational.
#[allow(clippy::type_complexity)]
fn factor_pair(cx: &TruncSeries, cy: &TruncSeries) -> Option<(TruncSeries, (Exps, Scalar), (Exps, Scalar))> {
    if cx.is_zero() || cy.is_zero() {
        return None;
    }
    let mx = cx.monomial_gcd();
    let my = cy.monomial_gcd();
    let rx = cx.divide_monomial(&mx)?;
    let ry = cy.divide_monomial(&my)?;
    if rx.len() < 2 {
        return None;
    }
    let (e0, c0) = rx.terms().next()?;
    let d0 = ry.coeff(e0);
    if d0.is_zero() {
        return None;
    }
    let ratio = d0.checked_div(c0).ok()?;
    if rx.scale(&ratio) != ry {
        return None;
    }
    let (a, b) = match ratio.as_rational() {
        Some(r) => (Scalar::rational(r.denom().clone().into()), Scalar::rational(r.numer().clone().into())),
        None => (Scalar::one(), ratio),
    };
    let g = rx.scale(&a.recip().ok()?);
    Some((g, (mx, a), (my, b)))
}

/// A series printed as a product factor, monomial content pulled out.
pub(crate) fn coefficient_string(vars: &[String], c: &TruncSeries) -> String {
    if c.is_zero() {
        return "0".into();
    }
    if c.len() == 1 {
        let (e, k) = c.terms().next().unwrap();
        let s = term_string(vars, e, k);
        return if k.needs_parens() && TruncSeries::monomial_string(vars, e).is_empty() {
            format!("({s})")
        } else {
            s
        };
    }
    let m = c.monomial_gcd();
    let rest = c.divide_monomial(&m).expect("gcd divides");
    let mono = TruncSeries::monomial_string(vars, &m);
    if mono.is_empty() {
        format!("({rest})")
    } else {
        format!("{mono}*({rest})")
    }
}

impl fmt::Display for DiffForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "{}", self.coeffs[0]);
        }
        let parts = self
            .masks()
            .into_iter()
            .zip(&self.coeffs)
            .filter(|(_, c)| !c.is_zero())
            .map(|(m, c)| DiffForm::term_string(&self.vars, c, &DiffForm::basis_string(&self.vars, m)));
        f.write_str(&join_terms(parts))
    }
}

impl Serialize for DiffForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl Add<&DiffForm> for &DiffForm {
    type Output = DiffForm;
    fn add(self, rhs: &DiffForm) -> DiffForm {
        assert!(self.vars == rhs.vars && self.degree == rhs.degree, "form shape mismatch");
        DiffForm {
            vars: self.vars.clone(),
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&DiffForm> for &DiffForm {
    type Output = DiffForm;
    fn sub(self, rhs: &DiffForm) -> DiffForm {
        self + &(-rhs)
    }
}

impl Neg for &DiffForm {
    type Output = DiffForm;
    fn neg(self) -> DiffForm {
        self.map(|c| -c)
    }
}

impl Add for DiffForm {
    type Output = DiffForm;
    fn add(self, rhs: DiffForm) -> DiffForm {
        &self + &rhs
    }
}

impl Sub for DiffForm {
    type Output = DiffForm;
    fn sub(self, rhs: DiffForm) -> DiffForm {
        &self - &rhs
    }
}

/// A 1-form `sum a_i dx_i/x_i (i in poles) + sum a_i dx_i (otherwise)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogForm {
    vars: Vec<String>,
    coeffs: Vec<TruncSeries>,
    poles: Vec<bool>,
}

impl LogForm {
    pub fn new(coeffs: Vec<TruncSeries>, poles: Vec<bool>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() != poles.len() {
            return Err(Error::VariableMismatch("one coefficient and pole flag per variable".into()));
        }
        let vars = coeffs[0].vars().to_vec();
        if coeffs.len() != vars.len() {
            return Err(Error::VariableMismatch("one coefficient per variable".into()));
        }
        Ok(LogForm { vars, coeffs, poles })
    }

    /// `sum lambda_i dx_i/x_i` over all variables.
    pub fn diagonal(vars: &[String], lambdas: &[Scalar], order: u32) -> Self {
        let coeffs = lambdas.iter().map(|l| TruncSeries::constant(vars, order, l.clone())).collect();
        LogForm { vars: vars.to_vec(), coeffs, poles: vec![true; vars.len()] }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn coeffs(&self) -> &[TruncSeries] {
        &self.coeffs
    }

    pub fn poles(&self) -> &[bool] {
        &self.poles
    }

    /// Product of the pole variables.
    pub fn pole_monomial(&self) -> Exps {
        self.poles.iter().map(|&p| p as u32).collect()
    }

    /// Residues `a_i(0)` at the pole variables, `None` elsewhere.
    pub fn residues(&self) -> Vec<Option<Scalar>> {
        self.coeffs
            .iter()
            .zip(&self.poles)
            .map(|(a, &p)| p.then(|| a.constant_term()))
            .collect()
    }

    /// Multiplies through by the product of the poles.
    pub fn to_holomorphic(&self) -> DiffForm {
        let p = self.pole_monomial();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let mut m = p.clone();
                if self.poles[i] {
                    m[i] -= 1;
                }
                a.mul_monomial(&m)
            })
            .collect();
        DiffForm::from_coeffs(&self.vars, 1, coeffs).expect("shape")
    }

    /// Inverse of [`LogForm::to_holomorphic`] for the given pole set.
    pub fn from_holomorphic(w: &DiffForm, poles: Vec<bool>) -> Result<Self> {
        if w.degree() != 1 || poles.len() != w.nvars() {
            return Err(Error::VariableMismatch("log presentation of a 1-form".into()));
        }
        let p: Exps = poles.iter().map(|&b| b as u32).collect();
        let coeffs = w
            .coeffs()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut m = p.clone();
                if poles[i] {
                    m[i] -= 1;
                }
                c.divide_monomial(&m).ok_or_else(|| {
                    Error::UnexpectedShape(format!("coefficient of d{} not divisible by the poles", w.vars()[i]))
                })
            })
            .collect::<Result<_>>()?;
        Ok(LogForm { vars: w.vars().to_vec(), coeffs, poles })
    }
}

impl fmt::Display for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = self.coeffs.iter().enumerate().filter(|(_, c)| !c.is_zero()).map(|(i, c)| {
            let v = &self.vars[i];
            let basis = if self.poles[i] { format!("d{v}/{v}") } else { format!("d{v}") };
            DiffForm::term_string(&self.vars, c, &basis)
        });
        f.write_str(&join_terms(parts))
    }
}

/// A vector field `sum X_i d/dx_i`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    vars: Vec<String>,
    comps: Vec<TruncSeries>,
}

impl VectorField {
    pub fn new(comps: Vec<TruncSeries>) -> Result<Self> {
        let vars = comps.first().ok_or_else(|| Error::VariableMismatch("empty field".into()))?.vars().to_vec();
        if comps.len() != vars.len() || comps.iter().any(|c| c.vars() != vars) {
            return Err(Error::VariableMismatch("component count must match variables".into()));
        }
        Ok(VectorField { vars, comps })
    }

    /// The linear field `x' = A x`.
    pub fn linear(vars: &[String], a: &[Vec<Scalar>], order: u32) -> Self {
        let comps = a
            .iter()
            .map(|row| {
                TruncSeries::from_terms(
                    vars,
                    order,
                    row.iter().enumerate().map(|(j, c)| {
                        let mut e = vec![0; vars.len()];
                        e[j] = 1;
                        (e, c.clone())
                    }),
                )
            })
            .collect();
        VectorField { vars: vars.to_vec(), comps }
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn comps(&self) -> &[TruncSeries] {
        &self.comps
    }

    pub fn order(&self) -> u32 {
        self.comps.iter().map(TruncSeries::order).min().unwrap_or(EXACT_ORDER)
    }

    /// Derivation `X(f)`.
    pub fn apply(&self, f: &TruncSeries) -> TruncSeries {
        let mut acc = TruncSeries::zero(&self.vars, self.order().min(f.order()));
        for (i, c) in self.comps.iter().enumerate() {
            acc = &acc + &(c * &f.derivative(i));
        }
        acc
    }

    /// Jacobian at the origin, `a[i][j] = d X_i / d x_j (0)`.
    pub fn linear_part(&self) -> Vec<Vec<Scalar>> {
        let n = self.vars.len();
        self.comps
            .iter()
            .map(|c| {
                (0..n)
                    .map(|j| {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        c.coeff(&e)
                    })
                    .collect()
            })
            .collect()
    }

    pub fn eval_c64(&self, point: &[Complex64]) -> Vec<Complex64> {
        self.comps.iter().map(|c| c.eval_c64(point)).collect()
    }

    pub fn map(&self, f: impl Fn(&TruncSeries) -> TruncSeries) -> Self {
        VectorField { vars: self.vars.clone(), comps: self.comps.iter().map(f).collect() }
    }
}
