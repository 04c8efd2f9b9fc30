//! Local analysis at a singular point: linear part, adapted order and
//! multiplicity, resonance invariant, matching to the formal models, and the
//! first-integral verdict per model.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use serde_json::{Map, Value};

use crate::blowup::{blowup_point_2d, FoliationGerm, PointChart};
use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::linalg::{nullspace, rank, Matrix};
use crate::normal_form::{center_manifold, eigenvalues, mat2, poincare_dulac};
use crate::scalar::Scalar;
use crate::series::{total, Exps, TruncSeries};
use crate::verdict::{Status, Verdict};

/// Coefficients below this modulus count as zero for float input.
pub const TOL: f64 = 1e-9;
/// Largest denominator accepted when recognizing a float as a rational.
pub const MAX_DEN: i64 = 24;
/// Largest weight tried in the resonance-invariant search.
pub const MAX_WEIGHT: u32 = 20;
/// Jet degree used for the dimensional type bounds.
pub const JET_DEGREE: u32 = 2;

pub const LOCAL_FI: &str = "local_meromorphic_first_integral";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Label {
    Regular,
    SimpleA,
    SimpleBResonant,
    SaddleNode,
    DulacC,
    ResonantLinearizableCandidate,
    DicriticalRadial,
    Unclassified,
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).map_err(|_| fmt::Error)?;
        f.write_str(v.as_str().unwrap_or("?"))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parameters {
    /// Eigenvalues of the dual field (planar) or residues (model A).
    Eigenvalues { values: Vec<Scalar> },
    /// Integer exponents and the coefficient vector of models B and C.
    Model { p: Vec<i64>, alpha: Vec<Scalar> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularityClass {
    pub label: Label,
    pub vars: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parameters: Option<Parameters>,
    pub order: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction_order: Option<u32>,
    /// Model B with one nonzero exponent: whether the residual spectrum is resonant.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_resonant: Option<bool>,
    pub evidence: Map<String, Value>,
}

impl SingularityClass {
    fn new(label: Label, vars: &[String], order: u32) -> Self {
        SingularityClass {
            label,
            vars: vars.to_vec(),
            parameters: None,
            order,
            obstruction_order: None,
            residual_resonant: None,
            evidence: Map::new(),
        }
    }

    fn eigen(mut self, values: Vec<Scalar>) -> Self {
        self.parameters = Some(Parameters::Eigenvalues { values });
        self
    }

    fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.evidence.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn eigenvalues(&self) -> Option<&[Scalar]> {
        match &self.parameters {
            Some(Parameters::Eigenvalues { values }) => Some(values),
            _ => None,
        }
    }

    pub fn model(&self) -> Option<(&[i64], &[Scalar])> {
        match &self.parameters {
            Some(Parameters::Model { p, alpha }) => Some((p, alpha)),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinearPart {
    pub matrix: Vec<Vec<Scalar>>,
    pub eigenvalues: Vec<Scalar>,
    pub nilpotent: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptedInvariants {
    pub nu: u32,
    pub mu: u32,
    pub rs: u8,
    pub dimensional_type_bounds: (usize, usize),
    pub dicritical_components: Vec<String>,
    pub pre_simple: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<u32>>,
    pub notes: Vec<String>,
}

fn negligible(c: &Scalar) -> bool {
    c.is_negligible(TOL)
}

fn clean(s: &TruncSeries) -> TruncSeries {
    if s.is_exact() { s.clone() } else { s.chop(TOL) }
}

/// Real rational value of an exact scalar, or of a float close to one.
pub fn rational_value(c: &Scalar) -> Option<BigRational> {
    c.rationalize(MAX_DEN, TOL)
}

fn to_bigint_vec(v: &[BigRational]) -> Vec<BigInt> {
    let den = v.iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let ints: Vec<BigInt> = v.iter().map(|r| (r * BigRational::from_integer(den.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, k| acc.gcd(k));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|k| k / &g).collect()
}

/// Primitive integer vector proportional to `v`, when all ratios are rational.
pub fn primitive_integer_vector(v: &[Scalar]) -> Option<Vec<i64>> {
    let pivot = v.iter().find(|c| !negligible(c))?;
    let ratios: Option<Vec<BigRational>> =
        v.iter().map(|c| if negligible(c) { Some(BigRational::zero()) } else { rational_value(&(c / pivot)) }).collect();
    to_bigint_vec(&ratios?).iter().map(ToPrimitive::to_i64).collect()
}

/// Linear matrix and eigenvalues of the dual field (two variables) or the
/// residue vector of the logarithmic presentation (three variables).
pub fn linear_part(germ: &FoliationGerm) -> Result<LinearPart> {
    if !germ.is_singular() {
        return Err(Error::NotSingular(format!("{} does not vanish at the origin", germ.form)));
    }
    match germ.vars().len() {
        2 => {
            let x = germ.form.dual_field()?;
            let m = mat2(&x);
            let ev = eigenvalues(&m).to_vec();
            let nilpotent = ev.iter().all(negligible);
            Ok(LinearPart { matrix: m.iter().map(|r| r.to_vec()).collect(), eigenvalues: ev, nilpotent })
        }
        3 => {
            let b = log_coefficients(&germ.form, &[0, 1, 2])?;
            let res: Vec<Scalar> = b.iter().map(TruncSeries::constant_term).collect();
            let n = res.len();
            let matrix = (0..n)
                .map(|i| (0..n).map(|j| if i == j { res[i].clone() } else { Scalar::zero() }).collect())
                .collect();
            let nilpotent = res.iter().all(negligible);
            Ok(LinearPart { matrix, eigenvalues: res, nilpotent })
        }
        n => Err(Error::VariableMismatch(format!("{n} variables"))),
    }
}

/// Coefficients `a_i` of `sum_{i in A} a_i dx_i/x_i + sum_{i not in A} a_i dx_i`
/// with the common monomial factor removed.
pub fn log_coefficients(form: &DiffForm, poles: &[usize]) -> Result<Vec<TruncSeries>> {
    if form.degree() != 1 {
        return Err(Error::VariableMismatch("log coefficients of a 1-form".into()));
    }
    let n = form.nvars();
    let raw: Vec<TruncSeries> = (0..n)
        .map(|i| {
            let c = clean(form.c(i));
            if poles.contains(&i) {
                let mut e = vec![0; n];
                e[i] = 1;
                c.mul_monomial(&e)
            } else {
                c
            }
        })
        .collect();
    if raw.iter().all(TruncSeries::is_zero) {
        return Err(Error::ZeroForm);
    }
    let g = raw.iter().filter(|c| !c.is_zero()).map(TruncSeries::monomial_gcd).reduce(|a, b| {
        a.iter().zip(&b).map(|(x, y)| *x.min(y)).collect()
    });
    let g = g.unwrap_or_else(|| vec![0; n]);
    raw.iter()
        .map(|c| c.divide_monomial(&g).ok_or_else(|| Error::Truncation("monomial division".into())))
        .collect()
}

fn order_of(s: &TruncSeries) -> Option<u32> {
    s.valuation()
}

fn radially_dicritical(germ: &FoliationGerm) -> Result<bool> {
    if !germ.is_singular() {
        return Ok(false);
    }
    if germ.vars().len() == 2 {
        let bare = FoliationGerm { form: germ.form.clone(), divisor: vec![] };
        let r = blowup_point_2d(&bare, PointChart::Main)?;
        let exc = &r.chart.target_vars()[0];
        return Ok(r.divisor.iter().any(|d| &d.var == exc && !d.invariant));
    }
    // the exceptional divisor of a point blow-up is dicritical exactly when the
    // initial part of the form kills the radial field
    let coeffs: Vec<TruncSeries> = germ.form.coeffs().iter().map(clean).collect();
    let d = coeffs.iter().filter_map(TruncSeries::valuation).min().ok_or(Error::ZeroForm)?;
    let n = coeffs.len();
    let contraction = coeffs.iter().enumerate().fold(TruncSeries::zero(germ.vars(), d + 1), |acc, (i, c)| {
        let mut e = vec![0; n];
        e[i] = 1;
        &acc + &c.homogeneous(d).mul_monomial(&e)
    });
    Ok(clean(&contraction).is_zero())
}

fn weights_search(initial: &[TruncSeries]) -> (Option<Vec<u32>>, bool) {
    let m = initial.len();
    if m == 0 {
        return (None, false);
    }
    // kernel of the coefficient matrix of the initial parts
    let mut monos: Vec<Exps> = initial.iter().flat_map(|s| s.terms().map(|(e, _)| e.clone())).collect();
    monos.sort();
    monos.dedup();
    let mat: Matrix = monos.iter().map(|e| initial.iter().map(|s| s.coeff(e)).collect()).collect();
    let kernel = if mat.is_empty() { m } else { nullspace(&mat, m, TOL).len() };
    if kernel == 0 {
        return (None, false);
    }
    let mut phi = vec![1u32; m];
    loop {
        let sum = initial.iter().zip(&phi).fold(TruncSeries::zero(initial[0].vars(), initial[0].order()), |acc, (s, &w)| {
            &acc + &s.scale(&Scalar::int(w as i64))
        });
        if clean(&sum).is_zero() {
            return (Some(phi), true);
        }
        let mut k = 0;
        loop {
            if k == m {
                return (None, true);
            }
            phi[k] += 1;
            if phi[k] <= MAX_WEIGHT {
                break;
            }
            phi[k] = 1;
            k += 1;
        }
    }
}

fn exps_of_degree(n: usize, d: u32) -> Vec<Exps> {
    if n == 1 {
        return vec![vec![d]];
    }
    (0..=d)
        .rev()
        .flat_map(|a| {
            exps_of_degree(n - 1, d - a).into_iter().map(move |mut rest| {
                rest.insert(0, a);
                rest
            })
        })
        .collect()
}

/// Bounds on the dimensional type from `omega(X) = 0`: solutions on `jet`-jets
/// give an upper bound on `dim X(0)`, exact polynomial solutions a lower one.
pub fn dimensional_type_bounds(form: &DiffForm, jet: u32) -> (usize, usize) {
    let n = form.nvars();
    let singular = form.coeffs().iter().all(|c| negligible(&c.constant_term()));
    if !singular {
        return (1, 1);
    }
    let monos: Vec<Exps> = (0..=jet).flat_map(|d| exps_of_degree(n, d)).collect();
    let unknowns: Vec<(usize, &Exps)> = (0..n).flat_map(|i| monos.iter().map(move |m| (i, m))).collect();
    let x0_cols: Vec<usize> = unknowns.iter().enumerate().filter(|(_, (_, m))| total(m) == 0).map(|(k, _)| k).collect();
    let solve = |truncate: Option<u32>| -> usize {
        let cols: Vec<TruncSeries> = unknowns
            .iter()
            .map(|(i, m)| {
                let s = clean(form.c(*i)).mul_monomial(m);
                match truncate {
                    Some(k) => s.truncate(k),
                    None => s,
                }
            })
            .collect();
        let mut rows: Vec<Exps> = cols.iter().flat_map(|s| s.terms().map(|(e, _)| e.clone())).collect();
        rows.sort();
        rows.dedup();
        let mat: Matrix = rows.iter().map(|e| cols.iter().map(|s| s.coeff(e)).collect()).collect();
        let ker = if mat.is_empty() {
            (0..unknowns.len())
                .map(|k| (0..unknowns.len()).map(|j| if j == k { Scalar::one() } else { Scalar::zero() }).collect())
                .collect()
        } else {
            nullspace(&mat, unknowns.len(), TOL)
        };
        let proj: Matrix = ker.iter().map(|v| x0_cols.iter().map(|&k| v[k].clone()).collect()).collect();
        if proj.is_empty() { 0 } else { rank(&proj, TOL) }
    };
    let lower = (n - solve(Some(jet))).max(2);
    let upper = if form.coeffs().iter().all(TruncSeries::is_polynomial) { n - solve(None) } else { n };
    (lower, upper.max(lower))
}

/// Adapted order, adapted multiplicity, resonance invariant, dimensional type
/// bounds and the pre-simple test for the germ and its divisor.
pub fn adapted_invariants(germ: &FoliationGerm) -> Result<AdaptedInvariants> {
    let n = germ.vars().len();
    if germ.divisor.iter().any(|d| !germ.vars().contains(d)) {
        return Err(Error::UnknownVariable(format!("divisor {:?} is not made of coordinate hyperplanes", germ.divisor)));
    }
    let a_idx = germ.divisor_indices();
    let a = log_coefficients(&germ.form, &a_idx)?;
    let ords: Vec<Option<u32>> = a.iter().map(order_of).collect();
    let nu = ords.iter().flatten().copied().min().ok_or(Error::ZeroForm)?;
    let mu = (0..n)
        .filter_map(|i| ords[i].map(|o| if a_idx.contains(&i) { o } else { o + 1 }))
        .min()
        .unwrap_or(nu);
    let mut notes = Vec::new();
    let dicritical_components: Vec<String> = a_idx
        .iter()
        .filter(|&&i| a[i].restrict_zero(i).is_zero())
        .map(|&i| germ.vars()[i].clone())
        .collect();
    let mut rs = 0u8;
    let mut weights = None;
    if nu == mu {
        if radially_dicritical(germ)? {
            rs = 1;
        } else {
            let initial: Vec<TruncSeries> = a_idx.iter().map(|&i| a[i].homogeneous(nu)).collect();
            let (found, kernel) = weights_search(&initial);
            if let Some(w) = found {
                rs = 2;
                weights = Some(w);
            } else if kernel {
                notes.push(format!("initial parts are dependent but no positive weight <= {MAX_WEIGHT} cancels them"));
            }
        }
    }
    let directrix_ok = directrix_normal_crossings(&a, &a_idx, n);
    let pre_simple = dicritical_components.is_empty() && (nu == 0 || (nu == 1 && mu == 1 && rs == 0 && directrix_ok));
    if !dicritical_components.is_empty() {
        notes.push(format!("dicritical components {dicritical_components:?}"));
    }
    Ok(AdaptedInvariants {
        nu,
        mu,
        rs,
        dimensional_type_bounds: dimensional_type_bounds(&germ.form, JET_DEGREE),
        dicritical_components,
        pre_simple,
        weights,
        notes,
    })
}

fn linear_row(s: &TruncSeries, n: usize) -> Vec<Scalar> {
    (0..n)
        .map(|j| {
            let mut e = vec![0; n];
            e[j] = 1;
            s.coeff(&e)
        })
        .collect()
}

fn directrix_normal_crossings(a: &[TruncSeries], a_idx: &[usize], n: usize) -> bool {
    let rows: Matrix = a_idx.iter().map(|&i| linear_row(&a[i], n)).filter(|r| !r.iter().all(negligible)).collect();
    if rows.is_empty() || rank(&rows, TOL) != 1 {
        return false;
    }
    let ell = &rows[0];
    let support: Vec<usize> = (0..n).filter(|&j| !negligible(&ell[j])).collect();
    if support.len() == 1 && a_idx.contains(&support[0]) {
        return true;
    }
    let mut m = vec![ell.clone()];
    for &i in a_idx {
        m.push((0..n).map(|j| if i == j { Scalar::one() } else { Scalar::zero() }).collect());
    }
    rank(&m, TOL) == a_idx.len() + 1
}

fn ratio_class(l1: &Scalar, l2: &Scalar) -> Option<BigRational> {
    rational_value(&(l1 / l2))
}

fn classify_2d(germ: &FoliationGerm, order: u32) -> Result<SingularityClass> {
    let vars = germ.vars().to_vec();
    let x = germ.form.dual_field()?;
    let m = mat2(&x);
    let ev = eigenvalues(&m);
    let zero_matrix = m.iter().flatten().all(negligible);
    if zero_matrix {
        return Ok(SingularityClass::new(Label::Unclassified, &vars, order)
            .with("reason", "zero linear part; blow up further"));
    }
    let zeros = ev.iter().filter(|c| negligible(c)).count();
    if zeros == 2 {
        return Err(Error::NotPreSimple("nilpotent linear part; blow up further".into()));
    }
    if zeros == 1 {
        let cm = center_manifold(&x, order)?;
        return Ok(match &cm.leading {
            Some((deg, c)) => SingularityClass::new(Label::SaddleNode, &vars, order)
                .eigen(ev.to_vec())
                .with("reduced_order", deg)
                .with("reduced_coefficient", c)
                .with("center_manifold", cm.phi.to_string()),
            None => SingularityClass::new(Label::Unclassified, &vars, order)
                .eigen(ev.to_vec())
                .with("reason", format!("reduced dynamics vanish to order {order}")),
        });
    }
    let [l1, l2] = ev.clone();
    let scalar = negligible(&m[0][1]) && negligible(&m[1][0]) && negligible(&(&m[0][0] - &m[1][1]));
    if scalar {
        return Ok(SingularityClass::new(Label::DicriticalRadial, &vars, order).eigen(ev.to_vec()));
    }
    match ratio_class(&l1, &l2) {
        Some(r) if r.is_positive() => {
            let pd = poincare_dulac(&x, order)?;
            let cls = match pd.obstruction_order() {
                Some(k) => {
                    let mut c = SingularityClass::new(Label::DulacC, &vars, order).eigen(ev.to_vec());
                    c.obstruction_order = Some(k);
                    c
                }
                None => SingularityClass::new(Label::ResonantLinearizableCandidate, &vars, order).eigen(ev.to_vec()),
            };
            Ok(cls.with("ratio", r.to_string()).with("normal_form", &pd))
        }
        Some(r) => {
            let pd = poincare_dulac(&x, order)?;
            let mut c = SingularityClass::new(Label::SimpleBResonant, &vars, order).eigen(ev.to_vec());
            c.obstruction_order = pd.obstruction_order();
            Ok(c.with("ratio", r.to_string()).with("normal_form", &pd))
        }
        None => Ok(SingularityClass::new(Label::SimpleA, &vars, order).eigen(ev.to_vec())),
    }
}

fn lowest_term(s: &TruncSeries) -> Option<(Exps, Scalar)> {
    s.terms().min_by_key(|(e, _)| total(e)).map(|(e, c)| (e.clone(), c.clone()))
}

/// Model B: `sum p_i dx_i/x_i + psi(x^p) sum alpha_i dx_i/x_i`.
fn match_model_b(b: &[TruncSeries], res: &[Scalar], vars: &[String], order: u32) -> Option<SingularityClass> {
    let p = primitive_integer_vector(res)?;
    if p.iter().any(|&k| k < 0) {
        return None;
    }
    let j0 = p.iter().position(|&k| k != 0)?;
    let scale = &Scalar::int(p[j0]) / &res[j0];
    let d: Vec<TruncSeries> =
        b.iter().zip(&p).map(|(s, &k)| clean(&(&s.scale(&scale) - &TruncSeries::constant(s.vars(), s.order(), Scalar::int(k))))).collect();
    let nonzero_p = p.iter().filter(|&&k| k != 0).count();
    let Some(js) = d.iter().position(|s| !s.is_zero()) else {
        // no unit part: a linear log form in fewer variables
        let values: Vec<Scalar> = res.iter().filter(|c| !negligible(c)).cloned().collect();
        return Some(SingularityClass::new(Label::SimpleA, vars, order).eigen(values).with("dimensional_type", nonzero_p));
    };
    let (lead_e, lead_c) = lowest_term(&d[js])?;
    let psi = d[js].scale(&lead_c.recip().ok()?);
    for (e, _) in psi.terms() {
        let t = p.iter().zip(e).find(|(&k, _)| k != 0).map(|(&k, &x)| x as i64 / k)?;
        if t < 1 || p.iter().zip(e).any(|(&k, &x)| k * t != x as i64) {
            return None;
        }
    }
    let alpha: Vec<Scalar> = d.iter().map(|s| s.coeff(&lead_e)).collect();
    for (s, a) in d.iter().zip(&alpha) {
        if !clean(&(s - &psi.scale(a))).is_zero() {
            return None;
        }
    }
    let mut cls = match nonzero_p {
        2 => SingularityClass::new(Label::SaddleNode, vars, order),
        1 => {
            let zero_alpha: Vec<&Scalar> = p.iter().zip(&alpha).filter(|(&k, _)| k == 0).map(|(_, a)| a).collect();
            let resonant = zero_alpha.len() == 2
                && !negligible(zero_alpha[1])
                && rational_value(&(zero_alpha[0] / zero_alpha[1])).is_some_and(|r| r.is_negative());
            let mut c = SingularityClass::new(Label::SimpleBResonant, vars, order);
            c.residual_resonant = Some(resonant);
            c
        }
        _ => return None,
    };
    cls.parameters = Some(Parameters::Model { p, alpha });
    Some(cls.with("psi", psi.to_string()))
}

/// Model C: `dx_1 - x_1 sum p_i dx_i/x_i + x^p sum alpha_i dx_i/x_i`.
fn match_model_c(b: &[TruncSeries], vars: &[String], order: u32) -> Option<SingularityClass> {
    let n = b.len();
    for j in 0..n {
        let mut ej = vec![0; n];
        ej[j] = 1;
        let c = b[j].coeff(&ej);
        if negligible(&c) {
            continue;
        }
        let mut p = vec![0i64; n];
        let mut ok = true;
        for i in (0..n).filter(|&i| i != j) {
            match rational_value(&(-&(&b[i].coeff(&ej) / &c))) {
                Some(r) if r.is_integer() && !r.is_negative() => p[i] = r.to_integer().to_i64().unwrap_or(-1),
                _ => ok = false,
            }
        }
        if !ok || p.iter().all(|&k| k == 0) || p.iter().any(|&k| k < 0) {
            continue;
        }
        let xp: Exps = p.iter().map(|&k| k as u32).collect();
        let inv = c.recip().ok()?;
        let model_lin: Vec<Scalar> = (0..n).map(|i| if i == j { Scalar::one() } else { Scalar::int(-p[i]) }).collect();
        let mut alpha = Vec::with_capacity(n);
        let mut tail = false;
        for i in 0..n {
            let mut r = b[i].scale(&inv);
            r.add_term(ej.clone(), -&model_lin[i]);
            let a = r.coeff(&xp);
            r.add_term(xp.clone(), -&a);
            let r = clean(&r);
            if !linear_row(&r, n).iter().all(negligible) || !negligible(&r.constant_term()) {
                ok = false;
                break;
            }
            tail |= !r.is_zero();
            alpha.push(a);
        }
        if !ok {
            continue;
        }
        let mut cls = SingularityClass::new(Label::DulacC, vars, order);
        cls.parameters = Some(Parameters::Model { p, alpha });
        return Some(cls.with("dulac_variable", &vars[j]).with("higher_order_tail", tail));
    }
    None
}

fn classify_3d(germ: &FoliationGerm, order: u32) -> Result<SingularityClass> {
    let vars = germ.vars().to_vec();
    let b = log_coefficients(&germ.form, &[0, 1, 2])?;
    let res: Vec<Scalar> = b.iter().map(TruncSeries::constant_term).collect();
    if res.iter().all(|c| !negligible(c)) {
        return Ok(SingularityClass::new(Label::SimpleA, &vars, order).eigen(res));
    }
    let matched = if res.iter().any(|c| !negligible(c)) {
        match_model_b(&b, &res, &vars, order)
    } else {
        match_model_c(&b, &vars, order)
    };
    if let Some(c) = matched {
        return Ok(c);
    }
    let inv = adapted_invariants(germ)?;
    if !inv.pre_simple {
        return Err(Error::NotPreSimple(format!(
            "adapted order {}, multiplicity {}, Rs {}; continue the reduction",
            inv.nu, inv.mu, inv.rs
        )));
    }
    Ok(SingularityClass::new(Label::Unclassified, &vars, order)
        .with("reason", format!("pre-simple but no model matched at order {order}"))
        .with("invariants", &inv))
}

/// Matches a germ to a formal model, working to truncation `order`.
pub fn classify_simple_type(germ: &FoliationGerm, order: u32) -> Result<SingularityClass> {
    let vars = germ.vars().to_vec();
    if !germ.is_singular() {
        return Ok(SingularityClass::new(Label::Regular, &vars, order));
    }
    match vars.len() {
        2 => classify_2d(germ, order),
        3 => classify_3d(germ, order),
        n => Err(Error::VariableMismatch(format!("{n} variables"))),
    }
}

fn monomial_witness(vars: &[String], exps: &[i64]) -> String {
    let parts: Vec<String> = vars
        .iter()
        .zip(exps)
        .filter(|(_, &k)| k != 0)
        .map(|(v, &k)| if k == 1 { v.clone() } else { format!("{v}^{k}") })
        .collect();
    if parts.is_empty() { "1".into() } else { parts.join("*") }
}

/// Existence of a local meromorphic first integral for a classified point.
pub fn first_integral_local_verdict(cls: &SingularityClass) -> Verdict {
    let label = cls.label.to_string();
    let base = |v: Verdict| v.with("label", &label).at_order(cls.order);
    match cls.label {
        Label::Regular => base(Verdict::holds(LOCAL_FI, "regular point: a rectifying coordinate is a first integral")),
        Label::DicriticalRadial => base(Verdict::holds(LOCAL_FI, "radial point: a ratio of linear coordinates is a first integral")),
        Label::SimpleA => {
            let ev = cls.eigenvalues().unwrap_or(&[]);
            if cls.vars.len() == 3 && ev.len() == 3 {
                match primitive_integer_vector(ev) {
                    Some(p) => base(
                        Verdict::holds(LOCAL_FI, "rational residue ratios")
                            .with("witness", monomial_witness(&cls.vars, &p))
                            .with("witness_exponents", &p),
                    ),
                    None => base(Verdict::fails(LOCAL_FI, "irrational residue ratio: holonomy is not periodic")),
                }
            } else if ev.len() == 2 && ratio_class(&ev[0], &ev[1]).is_none() {
                base(Verdict::fails(LOCAL_FI, "irrational or non-real eigenvalue ratio"))
            } else {
                base(Verdict::inconclusive(LOCAL_FI, "linear log form in fewer variables"))
            }
        }
        Label::SaddleNode => base(Verdict::fails(LOCAL_FI, "saddle-node: leaves are not closed")),
        Label::SimpleBResonant => {
            if cls.residual_resonant == Some(true) {
                return base(Verdict::fails(LOCAL_FI, "resonant residual spectrum leads to a saddle-node after blow-ups"));
            }
            if cls.vars.len() == 2 {
                return match cls.obstruction_order {
                    Some(k) => base(
                        Verdict::fails(LOCAL_FI, format!("resonant saddle with a normal form obstruction at order {k}"))
                            .with("obstruction_order", k),
                    ),
                    None => base(
                        Verdict::inconclusive(LOCAL_FI, "resonant saddle with no obstruction through the working order")
                            .leaning(Status::Holds)
                            .semidecision(),
                    ),
                };
            }
            base(Verdict::inconclusive(LOCAL_FI, "simple resonant point: holonomy of the divisor decides"))
        }
        Label::DulacC => match cls.model() {
            Some((p, alpha)) => {
                let rest = alpha.iter().enumerate().filter(|(i, _)| p[*i] != 0).any(|(_, a)| !negligible(a));
                if rest {
                    base(Verdict::fails(LOCAL_FI, "Dulac type with nonzero (alpha_2, alpha_3): holonomy is not periodic"))
                } else if alpha.iter().all(negligible) {
                    let j = cls.vars.iter().position(|v| Some(v.as_str()) == cls.evidence.get("dulac_variable").and_then(Value::as_str));
                    let exps: Vec<i64> = (0..p.len()).map(|i| if Some(i) == j { 1 } else { -p[i] }).collect();
                    base(
                        Verdict::holds(LOCAL_FI, "Dulac type with vanishing coefficients")
                            .with("witness", monomial_witness(&cls.vars, &exps))
                            .with("witness_exponents", &exps),
                    )
                } else {
                    base(Verdict::inconclusive(LOCAL_FI, "Dulac type with only the first coefficient nonzero"))
                }
            }
            None => base(
                Verdict::fails(LOCAL_FI, "planar Dulac node: resonant normal form term obstructs closed leaves")
                    .with("obstruction_order", cls.obstruction_order),
            ),
        },
        Label::ResonantLinearizableCandidate => {
            let mut v = Verdict::holds(LOCAL_FI, "no resonant obstruction through the working order").semidecision();
            if let Some(ev) = cls.eigenvalues() {
                if let Some(p) = primitive_integer_vector(&[ev[1].clone(), -&ev[0]]) {
                    v = v.with("witness", format!("{} in eigen-coordinates", monomial_witness(&["y1".into(), "y2".into()], &p)));
                }
            }
            base(v)
        }
        Label::Unclassified => base(Verdict::inconclusive(LOCAL_FI, "point not classified at the working order")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::singular_points_on_divisor;
    use crate::parse::{parse_form, parse_log_form};
    use crate::series::names;

    fn germ2(text: &str, vars: &[&str], div: &[&str]) -> FoliationGerm {
        FoliationGerm::new(parse_form(text, &names(vars), 12).unwrap(), div)
    }

    fn germ3(text: &str) -> FoliationGerm {
        germ2(text, &["x", "y", "z"], &["x", "y", "z"])
    }

    #[test]
    fn linear_part_examples() {
        let lp = linear_part(&germ2("2*t*dt + (5*t+2*z)*dz", &["t", "z"], &[])).unwrap();
        assert!(lp.eigenvalues.contains(&Scalar::int(-1)) && lp.eigenvalues.contains(&Scalar::int(-4)));
        let lp = linear_part(&germ2("-3*u*dt + t*du", &["t", "u"], &[])).unwrap();
        let r = &lp.eigenvalues[0] / &lp.eigenvalues[1];
        assert!(r == Scalar::int(3) || r == Scalar::ratio(1, 3));
        let cusp = linear_part(&germ2("d(z^2 + t^3)", &["t", "z"], &[])).unwrap();
        assert!(cusp.nilpotent);
        assert!(matches!(linear_part(&germ2("dt", &["t", "z"], &[])), Err(Error::NotSingular(_))));
    }

    #[test]
    fn invariants_of_log_saddle() {
        let inv = adapted_invariants(&germ2("2*dx/x + 3*dy/y", &["x", "y"], &["x", "y"])).unwrap();
        assert_eq!((inv.nu, inv.mu), (0, 0));
        assert!(inv.pre_simple);
        assert_eq!(inv.rs, 0);
    }

    #[test]
    fn radial_resonance_invariant() {
        let free = adapted_invariants(&germ2("x*dy - y*dx", &["x", "y"], &[])).unwrap();
        assert_eq!((free.nu, free.mu, free.rs), (1, 2, 0));
        let adapted = adapted_invariants(&germ2("x*dy - y*dx", &["x", "y"], &["x", "y"])).unwrap();
        assert_eq!(adapted.rs, 1);
    }

    #[test]
    fn weighted_cancellation() {
        let g = germ2("(2*(x-y) + x^2)*dx/x + (-(x-y) + y^2)*dy/y", &["x", "y"], &["x", "y"]);
        let inv = adapted_invariants(&g).unwrap();
        assert_eq!(inv.nu, 1);
        assert_eq!(inv.rs, 2);
        assert_eq!(inv.weights, Some(vec![1, 2]));
    }

    #[test]
    fn dimensional_type_of_planar_and_cylinder() {
        let w = parse_form("2*y*z*dx + 3*x*z*dy - 5*x*y*dz", &names(&["x", "y", "z"]), 10).unwrap();
        assert_eq!(dimensional_type_bounds(&w, 2), (3, 3));
        let w = parse_form("2*y*dx + 3*x*dy", &names(&["x", "y", "z"]), 10).unwrap();
        assert_eq!(dimensional_type_bounds(&w, 2), (2, 2));
    }

    #[test]
    fn model_a() {
        let g = FoliationGerm::new(parse_log_form("2*dx/x + 3*dy/y - 5*dz/z", &names(&["x", "y", "z"]), 10).unwrap().to_holomorphic(), &["x", "y", "z"]);
        let c = classify_simple_type(&g, 10).unwrap();
        assert_eq!(c.label, Label::SimpleA);
        assert_eq!(c.eigenvalues().unwrap(), &[Scalar::int(2), Scalar::int(3), Scalar::int(-5)]);
        let v = first_integral_local_verdict(&c);
        assert!(v.is_holds());
        assert_eq!(v.evidence["witness"], "x^2*y^3*z^-5");
    }

    #[test]
    fn model_a_irrational() {
        let vars = names(&["x", "y", "z"]);
        let lf = crate::form::LogForm::diagonal(&vars, &[Scalar::one(), Scalar::float(2f64.sqrt(), 0.0), Scalar::one()], 10);
        let g = FoliationGerm::new(lf.to_holomorphic(), &["x", "y", "z"]);
        let c = classify_simple_type(&g, 10).unwrap();
        assert_eq!(c.label, Label::SimpleA);
        assert!(first_integral_local_verdict(&c).is_fails());
    }

    #[test]
    fn model_b_saddle_node_and_residual() {
        let c = classify_simple_type(&germ3("dx/x + 2*dy/y + x*y^2*(dy/y + 3*dz/z)"), 10).unwrap();
        assert_eq!(c.label, Label::SaddleNode);
        assert_eq!(c.model().unwrap().0, &[1, 2, 0]);
        assert!(first_integral_local_verdict(&c).is_fails());

        let c = classify_simple_type(&germ3("dx/x + x^2*(2*dy/y - 3*dz/z)"), 10).unwrap();
        assert_eq!(c.label, Label::SimpleBResonant);
        assert_eq!(c.residual_resonant, Some(true));
        assert_eq!(c.model().unwrap().1, &[Scalar::zero(), Scalar::int(2), Scalar::int(-3)]);
        assert!(first_integral_local_verdict(&c).is_fails());

        let c = classify_simple_type(&germ3("dx/x + x*(2*dy/y + 3*dz/z)"), 10).unwrap();
        assert_eq!(c.residual_resonant, Some(false));
        assert_eq!(first_integral_local_verdict(&c).status, Status::Inconclusive);
    }

    #[test]
    fn model_c() {
        let c = classify_simple_type(&germ3("dx - x*(dy/y + 2*dz/z) + y*z^2*dy/y"), 10).unwrap();
        assert_eq!(c.label, Label::DulacC);
        let (p, alpha) = c.model().unwrap();
        assert_eq!(p, &[0, 1, 2]);
        assert_eq!(alpha, &[Scalar::zero(), Scalar::one(), Scalar::zero()]);
        assert!(first_integral_local_verdict(&c).is_fails());

        let c = classify_simple_type(&germ3("dx - x*(dy/y + 2*dz/z)"), 10).unwrap();
        let v = first_integral_local_verdict(&c);
        assert!(v.is_holds());
        assert_eq!(v.evidence["witness"], "x*y^-1*z^-2");
    }

    #[test]
    fn family_points_after_one_blowup() {
        let g = germ2("2*t*dt + (5*t + 2*z)*dz", &["t", "z"], &[]);
        let r = blowup_point_2d(&g, PointChart::Main).unwrap();
        let pts = singular_points_on_divisor(&r, "t").unwrap();
        let ratios: Vec<Scalar> = pts
            .iter()
            .map(|p| {
                let lp = linear_part(&p.germ).unwrap();
                // quotient along the divisor over transverse
                let m = &lp.matrix;
                &m[1][1] / &m[0][0]
            })
            .collect();
        assert!(ratios.contains(&Scalar::int(3)) || ratios.contains(&Scalar::ratio(1, 3)));
        let c = classify_simple_type(&pts[1].germ, 12).unwrap();
        assert_eq!(c.label, Label::SimpleBResonant);
    }

    #[test]
    fn saddle_node_point() {
        let g = germ2("(-5*r + 2*r^2 + 4*s^2)*ds + 2*s*r*dr", &["s", "r"], &[]);
        let c = classify_simple_type(&g, 10).unwrap();
        assert_eq!(c.label, Label::SaddleNode);
        assert!(first_integral_local_verdict(&c).is_fails());
    }

    #[test]
    fn planar_labels() {
        let radial = classify_simple_type(&germ2("x*dy - y*dx", &["x", "y"], &[]), 8).unwrap();
        assert_eq!(radial.label, Label::DicriticalRadial);
        let zero = classify_simple_type(&germ2("d(x^3 + y^3)", &["x", "y"], &[]), 8).unwrap();
        assert_eq!(zero.label, Label::Unclassified);
        assert!(classify_simple_type(&germ2("d(y^2 + x^3)", &["x", "y"], &[]), 8).is_err());
        // x' = x, y' = 2y + x^2 has a resonant term at order 2
        let dulac = classify_simple_type(&germ2("(2*y + x^2)*dx - x*dy", &["x", "y"], &[]), 8).unwrap();
        assert_eq!(dulac.label, Label::DulacC);
        assert_eq!(dulac.obstruction_order, Some(2));
        assert!(first_integral_local_verdict(&dulac).is_fails());
        let lin = classify_simple_type(&germ2("2*y*dx - x*dy", &["x", "y"], &[]), 8).unwrap();
        assert_eq!(lin.label, Label::ResonantLinearizableCandidate);
        assert!(first_integral_local_verdict(&lin).is_holds());
    }
}
