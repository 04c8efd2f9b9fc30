//! First integrals, Puiseux separatrices, rectification and dicriticalness
//! sections.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;
use serde_json::json;

use crate::blowup::{apply_chart, ChartMap, FoliationGerm};
use crate::classify::Label;
use crate::criteria::{family_classify, phi_map, FamilyClass, FamilyParams, FamilyPoint};
use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::scalar::Scalar;
use crate::series::{names, Exps, TruncSeries, EXACT_ORDER};
use crate::subst::SubstitutionMap;
use crate::verdict::Verdict;

pub const FIRST_INTEGRAL: &str = "first_integral";
pub const SEPARATRIX: &str = "separatrix";

/// A quotient of series with the common monomial factor removed.
#[derive(Clone, Debug, PartialEq)]
pub struct MeroFunction {
    pub num: TruncSeries,
    pub den: TruncSeries,
}

impl MeroFunction {
    pub fn new(num: TruncSeries, den: TruncSeries) -> Result<Self> {
        num.same_vars(&den)?;
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let g: Exps = if num.is_zero() {
            den.monomial_gcd()
        } else {
            num.monomial_gcd().iter().zip(den.monomial_gcd()).map(|(a, b)| (*a).min(b)).collect()
        };
        let num = num.divide_monomial(&g).expect("gcd divides");
        let den = den.divide_monomial(&g).expect("gcd divides");
        Ok(MeroFunction { num, den })
    }

    pub fn parse(text: &str, vars: &[String]) -> Result<Self> {
        let (n, d) = crate::parse::parse_fraction(text, vars)?;
        Self::new(n, d)
    }

    pub fn vars(&self) -> &[String] {
        self.num.vars()
    }

    pub fn order(&self) -> u32 {
        self.num.order().min(self.den.order())
    }

    /// `den dnum - num dden`, the numerator of `dF`.
    pub fn differential_numerator(&self) -> Result<DiffForm> {
        let dn = DiffForm::function(self.num.clone()).d()?;
        let dd = DiffForm::function(self.den.clone()).d()?;
        Ok(&dn.mul_fn(&self.den) - &dd.mul_fn(&self.num))
    }
}

impl std::fmt::Display for MeroFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})/({})", self.num, self.den)
    }
}

impl Serialize for MeroFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        json!({ "num": self.num.to_string(), "den": self.den.to_string() }).serialize(s)
    }
}

fn order_label(order: u32) -> serde_json::Value {
    if order >= EXACT_ORDER {
        json!("exact")
    } else {
        json!(order)
    }
}

/// Lowest-degree surviving term of a form, as text.
fn first_term(w: &DiffForm) -> Option<String> {
    w.masks()
        .into_iter()
        .zip(w.coeffs())
        .filter_map(|(m, c)| c.sorted_terms().first().map(|(e, k)| (e.iter().sum::<u32>(), m, (*e).clone(), (*k).clone())))
        .min_by_key(|(d, ..)| *d)
        .map(|(_, m, e, k)| {
            let mono = TruncSeries::monomial(w.vars(), EXACT_ORDER, e, k);
            format!("({mono}) {}", DiffForm::basis_string(w.vars(), m))
        })
}

/// `dF ^ omega = 0` with denominators cleared.
pub fn verify_first_integral(f: &MeroFunction, omega: &DiffForm) -> Result<Verdict> {
    if f.vars() != omega.vars() {
        return Err(Error::VariableMismatch(format!("{:?} vs {:?}", f.vars(), omega.vars())));
    }
    let df = f.differential_numerator()?;
    if df.is_zero() {
        return Err(Error::InvalidParams("constant function".into()));
    }
    let r = df.wedge(omega)?;
    let order = r.order();
    let v = if !r.is_zero() {
        Verdict::fails(FIRST_INTEGRAL, "dF ^ omega has a surviving term").with("first_term", first_term(&r))
    } else if order == 0 {
        Verdict::inconclusive(FIRST_INTEGRAL, "truncation leaves no term to check; raise the order").with("required_order", 1)
    } else if order >= EXACT_ORDER {
        Verdict::holds(FIRST_INTEGRAL, "dF ^ omega vanishes identically")
    } else {
        Verdict::holds(FIRST_INTEGRAL, "dF ^ omega vanishes to the working order").at_order(order)
    };
    Ok(v.with("candidate", f).with("certified_order", order_label(order)))
}

/// `F o phi`.
pub fn pullback_integral(f: &MeroFunction, phi: &SubstitutionMap) -> Result<MeroFunction> {
    let num = phi.pullback_series(&f.num)?;
    let den = phi.pullback_series(&f.den)?;
    if den.is_zero() {
        return Err(Error::Pole("denominator vanishes identically after pullback".into()));
    }
    MeroFunction::new(num, den)
}

/// A curve or surface parameterised after the ramification `param -> param^denominator`.
#[derive(Clone, Debug, PartialEq)]
pub struct PuiseuxCurve {
    pub params: Vec<String>,
    pub target: Vec<String>,
    pub comps: Vec<TruncSeries>,
    pub denominator: u32,
    pub order: u32,
}

impl PuiseuxCurve {
    pub fn map(&self) -> Result<SubstitutionMap> {
        SubstitutionMap::new(&self.params, &self.target, self.comps.clone())
    }
}

impl Serialize for PuiseuxCurve {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let comps: Vec<String> = self.target.iter().zip(&self.comps).map(|(v, c)| format!("{v} = {c}")).collect();
        json!({
            "params": self.params,
            "exponent_denominator": self.denominator,
            "components": comps,
            "order": self.order,
        })
        .serialize(s)
    }
}

/// The positive-quotient point of a dicritical candidate and its quotient `a/b`.
fn dicritical_point(params: &FamilyParams, order: u32) -> Result<(FamilyPoint, u32, u32)> {
    let report = family_classify(params, order)?;
    if report.class != FamilyClass::ResonantDicriticalCandidate {
        return Err(Error::NotDicritical(format!("family class {:?}", report.class)));
    }
    let pt = report.points[report.p1.expect("candidate has a positive point")].clone();
    if pt.class.label == Label::DulacC {
        return Err(Error::NotDicritical("no dicritical family at a Dulac point".into()));
    }
    let q = pt.quotient.rationalize(10_000, 1e-9).ok_or_else(|| Error::NotDicritical("irrational quotient".into()))?;
    let (a, b) = (q.numer().to_u32(), q.denom().to_u32());
    match (a, b) {
        (Some(a), Some(b)) if a > 0 => Ok((pt, a, b)),
        _ => Err(Error::NotDicritical(format!("quotient {q} is not a positive rational"))),
    }
}

/// Leaf of the dicritical family through the positive-quotient point, with
/// leading coefficient `c`: in the recentred chart `u = c t^(a/b) + ...`, so
/// `c = 0` is the separatrix through the point. Planar, in the coordinates of
/// the shadow form.
pub fn separatrix_family(params: &FamilyParams, c: &Scalar, order: u32) -> Result<PuiseuxCurve> {
    let (pt, a, b) = dicritical_point(params, order)?;
    let w = &pt.germ.form;
    let (ca, cb) = (w.c(0), w.c(1));
    let a_u = ca.coeff(&[0, 1]);
    let b_t = cb.coeff(&[1, 0]);
    let s = names(&["s"]);
    let n = order + 1;
    let tpar = TruncSeries::monomial(&s, EXACT_ORDER, vec![b], Scalar::one());
    let mut u = TruncSeries::zero(&s, n);
    let residual = |u: &TruncSeries| -> Result<TruncSeries> {
        let map = SubstitutionMap::new(&s, w.vars(), vec![tpar.clone(), u.clone()])?;
        Ok(map.pullback(w)?.c(0).clone())
    };
    for j in 1..=n {
        let r = residual(&u)?.coeff(&[j + b - 1]);
        let lin = &(&a_u * &Scalar::int(i64::from(b))) + &(&b_t * &Scalar::int(i64::from(j)));
        let cj = if j == a {
            if !r.is_negligible(1e-12) {
                return Err(Error::NotDicritical(format!("resonant obstruction {r} at order {a}")));
            }
            c.clone()
        } else {
            -&r.checked_div(&lin)?
        };
        u.add_term(vec![j], cj);
    }
    let line = [tpar, u];
    let comps = pt.chart.map.comps().iter().map(|f| f.compose(&line, &s)).collect::<Result<Vec<_>>>()?;
    Ok(PuiseuxCurve { params: s, target: pt.chart.target_vars().to_vec(), comps, denominator: b, order })
}

/// The planar family composed with `(x, y) -> x^p y^q`, after ramifying
/// `x = u^d`, `y = v^d`.
pub fn separatrix_family_3d(params: &FamilyParams, c: &Scalar, order: u32) -> Result<PuiseuxCurve> {
    let planar = separatrix_family(params, c, order)?;
    let d = planar.denominator;
    let uv = names(&["u", "v"]);
    let s = TruncSeries::monomial(&uv, EXACT_ORDER, vec![params.p, params.q], Scalar::one());
    let z = planar.comps[1].compose(&[s], &uv)?;
    let comps = vec![
        TruncSeries::monomial(&uv, EXACT_ORDER, vec![d, 0], Scalar::one()),
        TruncSeries::monomial(&uv, EXACT_ORDER, vec![0, d], Scalar::one()),
        z,
    ];
    Ok(PuiseuxCurve { params: uv, target: names(&["x", "y", "z"]), comps, denominator: d, order })
}

/// The parameterisation pulls `omega` back to zero.
pub fn verify_separatrix(curve: &PuiseuxCurve, omega: &DiffForm) -> Result<Verdict> {
    let pulled = curve.map()?.pullback(omega)?;
    let order = pulled.order();
    let v = if !pulled.is_zero() {
        Verdict::fails(SEPARATRIX, "the parameterisation is not tangent to the foliation").with("first_term", first_term(&pulled))
    } else if order == 0 {
        Verdict::inconclusive(SEPARATRIX, "truncation leaves no term to check; raise the order").with("required_order", 1)
    } else {
        Verdict::holds(SEPARATRIX, "the pullback vanishes to the working order")
    };
    Ok(v.with("curve", curve).with("certified_order", order_label(order)))
}

fn integrate(f: &TruncSeries, i: usize) -> TruncSeries {
    let terms = f.terms().map(|(e, c)| {
        let mut e = e.clone();
        e[i] += 1;
        let k = Scalar::int(i64::from(e[i]));
        (e, c / &k)
    });
    TruncSeries::from_terms(f.vars(), f.order().saturating_add(1).min(EXACT_ORDER), terms)
}

/// For `omega = A dt + C dz` with `A(0,0) != 0` and `t = 0` a leaf, the unit
/// `S1` with `S1(0,0) = 1` such that `S(t,z) = (t S1, z)` pulls `omega` back
/// to a multiple of `dt`.
pub fn rectify(omega: &DiffForm, order: u32) -> Result<TruncSeries> {
    if omega.nvars() != 2 || omega.degree() != 1 {
        return Err(Error::VariableMismatch("rectification needs a planar 1-form".into()));
    }
    let vars = omega.vars().to_vec();
    let a = omega.c(0).truncate(order);
    if a.constant_term().is_negligible(1e-14) {
        return Err(Error::UnexpectedShape(format!("d{} coefficient is not a unit", vars[0])));
    }
    let b = (omega.c(1) * &a.inverse(order)?).truncate(order);
    let bt = b.divide_monomial(&[1, 0]).ok_or_else(|| {
        Error::UnexpectedShape(format!("axis {} = 0 not invariant; choose other axis convention", vars[0]))
    })?;
    let t = TruncSeries::var(&vars, EXACT_ORDER, 0);
    let z = TruncSeries::var(&vars, EXACT_ORDER, 1);
    let one = TruncSeries::one(&vars, order);
    let mut s1 = one.clone();
    // Picard iteration for dS1/dz = -S1 B~(t S1, z), S1(t, 0) = 1
    for _ in 0..=order {
        let rhs = &s1 * &bt.compose(&[&t * &s1, z.clone()], &vars)?;
        let next = (&one - &integrate(&rhs, 1)).truncate(order);
        if next == s1 {
            break;
        }
        s1 = next;
    }
    Ok(s1)
}

/// `u^r` for a unit `u`, by the binomial series around its constant term.
pub fn unit_power(u: &TruncSeries, r: &BigRational, order: u32) -> Result<TruncSeries> {
    let c = u.constant_term();
    if c.is_zero() {
        return Err(Error::UnexpectedShape("fractional power of a non-unit".into()));
    }
    let (num, den) = (r.numer().to_i64().unwrap_or(0), r.denom().to_u32().unwrap_or(1));
    let cr = c.root(den).powi(num)?;
    let w = (u.truncate(order).scale(&c.recip()?) - TruncSeries::one(u.vars(), order)).truncate(order);
    let mut acc = TruncSeries::one(u.vars(), order);
    let mut p = TruncSeries::one(u.vars(), order);
    let mut binom = BigRational::one();
    for k in 0..order.min(EXACT_ORDER - 1) {
        p = &p * &w;
        if p.is_zero() {
            break;
        }
        binom = binom * (r - BigRational::from_integer(k.into())) / BigRational::from_integer((k + 1).into());
        acc = &acc + &p.scale(&Scalar::rational(binom.clone()));
    }
    Ok(acc.scale(&cr))
}

/// How `f` enters `(x, y, z) -> (f(x, y), z)`.
#[derive(Clone, Debug, PartialEq)]
pub enum FData {
    /// `f = x^p1 y^p2`.
    Monomial { p1: u32, p2: u32 },
    /// A monomialization `f o rho = x^a y^b V` with `V(0,0) != 0`; the section
    /// is built in the coordinates of `rho`.
    Monomialized { a: u32, b: u32, v: TruncSeries },
}

impl FData {
    /// `(x, y, z) -> (f, z)` in the coordinates the section lands in.
    pub fn phi(&self) -> Result<SubstitutionMap> {
        match self {
            FData::Monomial { p1, p2 } => Ok(phi_map(*p1, *p2)),
            FData::Monomialized { a, b, v } => {
                let xyz = names(&["x", "y", "z"]);
                let f = v.embed(&xyz)?.mul_monomial(&[*a, *b, 0]);
                SubstitutionMap::new(&xyz, &names(&["t", "z"]), vec![f, TruncSeries::var(&xyz, EXACT_ORDER, 2)])
            }
        }
    }
}

/// Exponents of the blow-up chain `(t, u) = (t^n1 z^m1, t^n2 z^m2)` at the
/// positive-quotient point, with `n1 m2 - m1 n2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ChainData {
    pub n1: u32,
    pub m1: u32,
    pub n2: u32,
    pub m2: u32,
}

impl ChainData {
    /// Leaves `u^b = C t^a` of the linear model become `t = const` with `z = 0` dicritical.
    pub fn for_quotient(a: u32, b: u32) -> Result<Self> {
        if a == 0 || b == 0 || a.gcd(&b) != 1 {
            return Err(Error::InvalidParams(format!("quotient {a}/{b} not in lowest terms")));
        }
        let n1 = (1..=b).find(|n| (a * n - 1) % b == 0).expect("a is invertible mod b");
        Ok(ChainData { n1, m1: b, n2: (a * n1 - 1) / b, m2: a })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SectionCertificate {
    /// `sigma^* Omega ^ dt` vanishes through this order.
    pub residual_order: u32,
    pub pullback_nonzero: bool,
    pub maps_origin_to_origin: bool,
}

/// A dicriticalness section `sigma(t, z)` of the three-dimensional form.
#[derive(Clone, Debug, PartialEq)]
pub struct SectionMap {
    pub map: SubstitutionMap,
    pub chain: ChainData,
    pub quotient: (u32, u32),
    pub position: Scalar,
    pub s1: TruncSeries,
    /// Variable of the 2D chart kept constant along the rectified leaves.
    pub leaf_axis: String,
    /// Reparametrization `(t, z) -> (phi1, phi2)` before `E o S`.
    pub phi: Vec<TruncSeries>,
    /// The shadow was written in `z = alpha Z`; the section lands in those coordinates.
    pub rescaled: bool,
    pub certificate: SectionCertificate,
}

impl Serialize for SectionMap {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let comps: Vec<String> =
            self.map.target().iter().zip(self.map.comps()).map(|(v, c)| format!("sigma_{v} = {c}")).collect();
        json!({
            "components": comps,
            "chain": self.chain,
            "quotient": format!("{}/{}", self.quotient.0, self.quotient.1),
            "position": self.position,
            "s1": self.s1.to_string(),
            "leaf_axis": self.leaf_axis,
            "phi": self.phi.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            "rescaled": self.rescaled,
            "certificate": self.certificate,
        })
        .serialize(s)
    }
}

/// Fixed point of `g -> base * S1(...)^(-e)` where `S1` is evaluated with
/// `g` in slot `slot` and `other` in the remaining one.
fn implicit_solve(
    base: &TruncSeries,
    s1: &TruncSeries,
    other: &TruncSeries,
    slot: usize,
    e: &BigRational,
    order: u32,
) -> Result<TruncSeries> {
    let vars = base.vars().to_vec();
    let mut g = base.truncate(order);
    for _ in 0..=order {
        let args = if slot == 1 { [other.clone(), g.clone()] } else { [g.clone(), other.clone()] };
        let next = (base * &unit_power(&s1.compose(&args, &vars)?, &-e, order)?).truncate(order);
        if next == g {
            break;
        }
        g = next;
    }
    Ok(g)
}

/// Section `sigma` with `sigma^* Omega ^ dt = 0`, `sigma^* Omega != 0` and
/// `sigma(0) = 0`, built from the blow-up chain at the positive-quotient
/// point, a rectification, and a lift through `(x, y, z) -> (f, z)`.
///
/// The pullback can vanish to a degree above `order`; the working order is
/// then raised until a term survives.
pub fn dicriticalness_section(params: &FamilyParams, fdata: &FData, order: u32) -> Result<SectionMap> {
    let mut working = order.max(1);
    loop {
        let s = build_section(params, fdata, working)?;
        if s.certificate.pullback_nonzero {
            return Ok(s);
        }
        if working >= MAX_SECTION_ORDER {
            return Err(Error::Numeric(format!("section pullback vanishes through order {working}")));
        }
        working = (2 * working).min(MAX_SECTION_ORDER);
    }
}

const MAX_SECTION_ORDER: u32 = 64;

fn build_section(params: &FamilyParams, fdata: &FData, order: u32) -> Result<SectionMap> {
    let (pt, a, b) = dicritical_point(params, order)?;
    let chain = ChainData::for_quotient(a, b)?;
    let tz = names(&["t", "z"]);
    let step = ChartMap::monomial(
        pt.germ.vars(),
        &tz,
        vec![vec![chain.n1, chain.n2], vec![chain.m1, chain.m2]],
        &format!("(t, u) = (t^{}*z^{}, t^{}*z^{})", chain.n1, chain.m1, chain.n2, chain.m2),
    );
    let e_chart = pt.chart.then(&step)?;
    let (shadow, rescaled) = params.shadow_form();
    let tr = apply_chart(&FoliationGerm::new(shadow.clone(), &[]), &e_chart)?;
    let form = tr.form.truncate(order);
    // the axis whose differential survives at the origin labels the leaves
    let leaf = if !form.c(0).constant_term().is_negligible(1e-14) {
        0
    } else if !form.c(1).constant_term().is_negligible(1e-14) {
        1
    } else {
        return Err(Error::NotDicritical("no axis is transversal at the end of the chain".into()));
    };
    let swapped = if leaf == 0 {
        form.clone()
    } else {
        DiffForm::one_form(vec![form.c(1).clone(), form.c(0).clone()]).map(|c| {
            TruncSeries::from_terms(c.vars(), c.order(), c.terms().map(|(e, k)| (vec![e[1], e[0]], k.clone())))
        })
    };
    let s1_swapped = rectify(&swapped, order)?;
    let s1 = if leaf == 0 {
        s1_swapped
    } else {
        TruncSeries::from_terms(&tz, s1_swapped.order(), s1_swapped.terms().map(|(e, k)| (vec![e[1], e[0]], k.clone())))
    };
    let mono = |i: u32, j: u32| TruncSeries::monomial(&tz, EXACT_ORDER, vec![i, j], Scalar::one());
    let frac = |n: u32, d: u32| BigRational::new(n.into(), d.into());
    let (n1, m1) = (chain.n1, chain.m1);
    // sigma1, sigma2 and the reparametrization phi with f(sigma1, sigma2) = E_t(S(phi))
    let (s_x, s_y, phi1, phi2) = match fdata {
        FData::Monomial { p1, p2 } => {
            let phi1 = mono(*p1, 0);
            let phi2 = mono(0, *p2);
            let s1phi = s1.compose(&[phi1.clone(), phi2.clone()], &tz)?.truncate(order);
            if leaf == 0 {
                let sx = &mono(n1, 0) * &unit_power(&s1phi, &frac(n1, *p1), order)?;
                (sx.truncate(order), mono(0, m1), phi1, phi2)
            } else {
                let sy = &mono(0, m1) * &unit_power(&s1phi, &frac(m1, *p2), order)?;
                (mono(n1, 0), sy.truncate(order), phi1, phi2)
            }
        }
        FData::Monomialized { a: fa, b: fb, v } => {
            let vt = v.compose(&[mono(n1, 0), mono(0, m1)], &tz)?.truncate(order);
            if vt.constant_term().is_negligible(1e-14) {
                return Err(Error::UnexpectedShape("V(0,0) = 0: implicit function solve fails".into()));
            }
            if leaf == 0 {
                // z^fb V^(1/m1) = S1(t^fa, phi2)^(n1/m1) phi2
                let phi1 = mono(*fa, 0);
                let base = &mono(0, *fb) * &unit_power(&vt, &frac(1, m1), order)?;
                let phi2 = implicit_solve(&base, &s1, &phi1, 1, &frac(n1, m1), order)?;
                (mono(n1, 0), mono(0, m1), phi1, phi2)
            } else {
                let phi2 = mono(0, *fb);
                let base = &mono(*fa, 0) * &unit_power(&vt, &frac(1, n1), order)?;
                let phi1 = implicit_solve(&base, &s1, &phi2, 0, &frac(m1, n1), order)?;
                (mono(n1, 0), mono(0, m1), phi1, phi2)
            }
        }
    };
    let s1phi = s1.compose(&[phi1.clone(), phi2.clone()], &tz)?.truncate(order);
    let rect = if leaf == 0 {
        [(&phi1 * &s1phi).truncate(order), phi2.clone()]
    } else {
        [phi1.clone(), (&phi2 * &s1phi).truncate(order)]
    };
    let s_z = e_chart.map.comps()[1].compose(&rect, &tz)?.truncate(order);
    let map = SubstitutionMap::new(&tz, &names(&["x", "y", "z"]), vec![s_x, s_y, s_z])?;
    let omega = fdata.phi()?.pullback(&shadow)?;
    let pulled = map.pullback(&omega)?;
    let wedge = pulled.wedge(&DiffForm::dvar(&tz, 0, EXACT_ORDER))?;
    let certificate = SectionCertificate {
        residual_order: if wedge.is_zero() { wedge.order().saturating_sub(1) } else { 0 },
        pullback_nonzero: !pulled.is_zero(),
        maps_origin_to_origin: map.comps().iter().all(|c| c.constant_term().is_zero()),
    };
    if !wedge.is_zero() || !certificate.maps_origin_to_origin {
        return Err(Error::Numeric(format!("section certificate failed: {}", first_term(&wedge).unwrap_or_default())));
    }
    Ok(SectionMap {
        map,
        chain,
        quotient: (a, b),
        position: pt.position.clone(),
        s1,
        leaf_axis: tz[leaf].clone(),
        phi: vec![phi1, phi2],
        rescaled,
        certificate,
    })
}
