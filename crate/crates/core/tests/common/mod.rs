//! Seeded generators and invariant checks shared by the acceptance harness
//! and the property suites.
#![allow(dead_code)]

use foliate::blowup::{blowup_axis_3d, blowup_point_2d, singular_points_on_divisor, Axis, FoliationGerm, PointChart, PointKind};
use foliate::classify::classify_simple_type;
use foliate::criteria::FamilyParams;
use foliate::form::DiffForm;
use foliate::parse::parse_form;
use foliate::series::{names, EXACT_ORDER};
use foliate::subst::SubstitutionMap;
use foliate::{Scalar, TruncSeries};
use rand::rngs::StdRng;
use rand::Rng;

pub fn xyz() -> Vec<String> {
    names(&["x", "y", "z"])
}

pub fn small_rational(rng: &mut StdRng) -> Scalar {
    let n = rng.gen_range(-5i64..=5);
    let d = rng.gen_range(1i64..=3);
    Scalar::ratio(if n == 0 { 1 } else { n }, d)
}

/// A polynomial with up to `terms` monomials of degree at most `deg`.
pub fn series(rng: &mut StdRng, vars: &[String], deg: u32, terms: usize, constant: bool) -> TruncSeries {
    let mut s = TruncSeries::zero(vars, EXACT_ORDER);
    for _ in 0..rng.gen_range(1..=terms) {
        let lo = if constant { 0 } else { 1 };
        let total = rng.gen_range(lo..=deg);
        let mut e = vec![0u32; vars.len()];
        for _ in 0..total {
            e[rng.gen_range(0..vars.len())] += 1;
        }
        s = &s + &TruncSeries::monomial(vars, EXACT_ORDER, e, small_rational(rng));
    }
    s
}

/// A random `degree`-form with polynomial coefficients.
pub fn form(rng: &mut StdRng, vars: &[String], degree: usize) -> DiffForm {
    let n = DiffForm::zero(vars, degree, EXACT_ORDER).coeffs().len();
    let keep = rng.gen_range(0..n);
    let coeffs = (0..n)
        .map(|i| if i == keep || rng.gen_bool(0.7) { series(rng, vars, 3, 3, true) } else { TruncSeries::zero(vars, EXACT_ORDER) })
        .collect();
    DiffForm::from_coeffs(vars, degree, coeffs).expect("basis size")
}

/// A polynomial map fixing the origin.
pub fn map(rng: &mut StdRng, source: &[String], target: &[String]) -> SubstitutionMap {
    let comps = target.iter().map(|_| series(rng, source, 2, 2, false)).collect();
    SubstitutionMap::new(source, target, comps).expect("components over the source")
}

pub fn dd_vanishes(w: &DiffForm) -> bool {
    w.d().and_then(|dw| dw.d()).map(|ddw| ddw.is_zero()).unwrap_or(false)
}

/// `a ^ b = (-1)^(deg a deg b) b ^ a`.
pub fn wedge_graded(a: &DiffForm, b: &DiffForm) -> bool {
    let (Ok(ab), Ok(ba)) = (a.wedge(b), b.wedge(a)) else {
        return a.degree() + b.degree() > a.nvars();
    };
    let sign = if (a.degree() * b.degree()) % 2 == 0 { Scalar::one() } else { -Scalar::one() };
    (&ab - &ba.scale(&sign)).is_zero()
}

/// `(phi o psi)^* w = psi^* phi^* w`, and pullback commutes with `d` and `^`.
pub fn pullback_functorial(phi: &SubstitutionMap, psi: &SubstitutionMap, w: &DiffForm, v: &DiffForm) -> bool {
    let check = || -> foliate::Result<bool> {
        let composed = phi.compose(psi)?.pullback(w)?;
        let stepwise = psi.pullback(&phi.pullback(w)?)?;
        let d_commutes = phi.pullback(&w.d()?)? == phi.pullback(w)?.d()?;
        let lhs = phi.pullback(&w.wedge(v)?)?;
        let rhs = phi.pullback(w)?.wedge(&phi.pullback(v)?)?;
        Ok(composed == stepwise && d_commutes && (&lhs - &rhs).is_zero())
    };
    check().unwrap_or(false)
}

/// Saturating twice changes nothing, and the cofactor restores the form.
pub fn saturation_idempotent(w: &DiffForm) -> bool {
    let check = || -> foliate::Result<bool> {
        let (sat, cof) = w.saturate()?;
        let (again, cof2) = sat.saturate()?;
        Ok(again == sat && cof2 == TruncSeries::one(w.vars(), EXACT_ORDER) && sat.mul_fn(&cof) == *w)
    };
    check().unwrap_or(false)
}

/// `alpha = 2 (r + 1/r)` makes the divisor points `-r` and `-1/r` rational.
pub fn shadow_with_rational_points(r: &Scalar, u: TruncSeries) -> DiffForm {
    let alpha = &(r + &r.recip().expect("r != 0")) * &Scalar::int(2);
    FamilyParams::new(1, 1, 2, 1, alpha, u).expect("valid family").shadow_form().0
}

/// Points seen in both charts of a point blow-up get the same class and the
/// same eigenvalue quotient up to inversion.
pub fn charts_agree(w: &DiffForm, order: u32) -> bool {
    let check = || -> foliate::Result<bool> {
        let germ = FoliationGerm::new(w.clone(), &[]);
        let main = blowup_point_2d(&germ, PointChart::Main)?;
        let other = blowup_point_2d(&germ, PointChart::Other)?;
        let main_div = main.divisor[0].var.clone();
        let other_div = other.divisor[0].var.clone();
        let pm = singular_points_on_divisor(&main, &main_div)?;
        let po = singular_points_on_divisor(&other, &other_div)?;
        let mut matched = 0;
        for a in pm.iter().filter(|p| matches!(p.kind, PointKind::Point { .. })) {
            let wa = &a.coords[1];
            if wa.is_zero() {
                continue;
            }
            let inv = wa.recip()?;
            let Some(b) = po.iter().find(|p| p.coords[0].approx_eq(&inv, 1e-9)) else {
                return Ok(false);
            };
            let ca = classify_simple_type(&a.germ, order)?;
            let cb = classify_simple_type(&b.germ, order)?;
            if ca.label != cb.label {
                return Ok(false);
            }
            if let (Some(ea), Some(eb)) = (ca.eigenvalues(), cb.eigenvalues()) {
                let qa = ea[1].checked_div(&ea[0])?;
                let qb = eb[1].checked_div(&eb[0])?;
                if !(qa.approx_eq(&qb, 1e-9) || qa.approx_eq(&qb.recip()?, 1e-9)) {
                    return Ok(false);
                }
            }
            matched += 1;
        }
        Ok(matched > 0)
    };
    check().unwrap_or(false)
}

/// Axis chain `z = (x^p y^q)^n w` of the three-dimensional family.
pub fn axis_chain(params: &FamilyParams) -> foliate::Result<DiffForm> {
    let germ = FoliationGerm::new(params.form_3d()?, &["x", "y"]);
    let r = blowup_axis_3d(&germ, Axis::Y, params.p * params.n)?;
    Ok(blowup_axis_3d(&r.germ(), Axis::X, params.q * params.n)?.form)
}

/// `(2w^2 + alpha w U + 2)(pn y dx + qn x dy) + xy (2w + alpha U) dw` with
/// `U = U(x^p y^q)`.
pub fn expected_axis_transform(params: &FamilyParams) -> DiffForm {
    let v = names(&["x", "y", "w"]);
    let f = TruncSeries::monomial(&v, EXACT_ORDER, vec![params.p, params.q, 0], Scalar::one());
    let u = params.u.compose(&[f], &v).expect("U in one variable");
    let w = TruncSeries::var(&v, EXACT_ORDER, 2);
    let a = &params.alpha;
    let two = Scalar::int(2);
    let bracket = &(&(&w * &w).scale(&two) + &(&w * &u).scale(a)) + &TruncSeries::constant(&v, EXACT_ORDER, two.clone());
    let pn = Scalar::int((params.p * params.n) as i64);
    let qn = Scalar::int((params.q * params.n) as i64);
    let xy = TruncSeries::monomial(&v, EXACT_ORDER, vec![1, 1, 0], Scalar::one());
    let dx = (&bracket * &TruncSeries::var(&v, EXACT_ORDER, 1)).scale(&pn);
    let dy = (&bracket * &TruncSeries::var(&v, EXACT_ORDER, 0)).scale(&qn);
    let dw = &xy * &(&w.scale(&two) + &u.scale(a));
    DiffForm::one_form(vec![dx, dy, dw])
}

/// The `dx`, `dy` part is a multiple of `p y dx + q x dy`.
pub fn has_prop5_shape(w: &DiffForm, p: u32, q: u32) -> bool {
    let v = w.vars();
    let x = TruncSeries::var(v, EXACT_ORDER, 0);
    let y = TruncSeries::var(v, EXACT_ORDER, 1);
    let lhs = (w.c(0) * &x).scale(&Scalar::int(q as i64));
    let rhs = (w.c(1) * &y).scale(&Scalar::int(p as i64));
    !w.c(0).is_zero() && lhs == rhs
}

pub fn unit(rng: &mut StdRng, deg: u32) -> TruncSeries {
    let t = names(&["t"]);
    let mut u = TruncSeries::one(&t, EXACT_ORDER);
    for e in 1..=deg {
        if rng.gen_bool(0.7) {
            u.add_term(vec![e], Scalar::int(rng.gen_range(-3..=3)));
        }
    }
    u
}

pub fn parse2(text: &str) -> DiffForm {
    parse_form(text, &names(&["t", "z"]), EXACT_ORDER).expect("valid form")
}
