//! Arithmetic of the cuspidal family and the evaluators that combine
//! blow-ups, classification and holonomy probes into verdicts.

use num_traits::Signed;
use serde::Serialize;
use serde_json::Value;

use crate::blowup::{apply_chart, singular_points_on_divisor, ChartMap, FoliationGerm, PointKind, TransformResult};
use crate::classify::{classify_simple_type, first_integral_local_verdict, linear_part, Label, SingularityClass};
use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::scalar::Scalar;
use crate::series::{names, TruncSeries, EXACT_ORDER};
use crate::subst::SubstitutionMap;
use crate::verdict::{Status, Verdict};

pub const PROP5: &str = "prop5";
pub const COR4: &str = "cor4";
pub const THM6: &str = "thm6";
pub const THM7: &str = "thm7";

const FLOAT_TOL: f64 = 1e-9;

/// `d(z^2 + (x^p y^q)^k) + alpha (x^p y^q)^n U(x^p y^q) dz`.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyParams {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub n: u32,
    pub alpha: Scalar,
    pub alpha_sq: Scalar,
    /// Unit in the variable `t`.
    pub u: TruncSeries,
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 { a } else { gcd(b, a % b) }
}

impl FamilyParams {
    pub fn new(p: u32, q: u32, k: u32, n: u32, alpha: Scalar, u: TruncSeries) -> Result<Self> {
        let alpha_sq = &alpha * &alpha;
        Self::build(p, q, k, n, alpha, alpha_sq, u)
    }

    /// Parameters given through `alpha^2`; `alpha` is its principal root,
    /// exact when `alpha^2` is a square.
    pub fn from_alpha_sq(p: u32, q: u32, k: u32, n: u32, alpha_sq: Scalar, u: TruncSeries) -> Result<Self> {
        let alpha = alpha_sq.exact_sqrt().unwrap_or_else(|| alpha_sq.sqrt());
        Self::build(p, q, k, n, alpha, alpha_sq, u)
    }

    fn build(p: u32, q: u32, k: u32, n: u32, alpha: Scalar, alpha_sq: Scalar, u: TruncSeries) -> Result<Self> {
        if p == 0 || q == 0 || k == 0 || n == 0 {
            return Err(Error::InvalidParams("p, q, k, n must be positive".into()));
        }
        if gcd(p, q) != 1 {
            return Err(Error::InvalidParams(format!("gcd({p}, {q}) != 1")));
        }
        if alpha_sq.is_negligible(1e-300) {
            return Err(Error::InvalidParams("alpha must be nonzero".into()));
        }
        if u.nvars() != 1 {
            return Err(Error::InvalidParams("U must be a series in one variable".into()));
        }
        if !(&u.constant_term() - &Scalar::one()).is_negligible(FLOAT_TOL) {
            return Err(Error::InvalidParams(format!("U(0) = {} != 1", u.constant_term())));
        }
        let u = u.rename(&names(&["t"]));
        Ok(FamilyParams { p, q, k, n, alpha, alpha_sq, u })
    }

    /// `U = 1`.
    pub fn unit_one() -> TruncSeries {
        TruncSeries::one(&names(&["t"]), EXACT_ORDER)
    }

    pub fn alpha_is_exact(&self) -> bool {
        self.alpha.is_exact()
    }

    /// The planar form `d(z^2 + t^k) + alpha t^n U(t) dz`. When `alpha` is not
    /// exact but `alpha^2` is, the form is written in `z = alpha Z`, which keeps
    /// every coefficient in the field of `alpha^2`; the flag reports this.
    pub fn shadow_form(&self) -> (DiffForm, bool) {
        let vars = names(&["t", "z"]);
        let rescale = !self.alpha.is_exact() && self.alpha_sq.is_exact();
        let (c2, c1) = if rescale {
            (self.alpha_sq.clone(), self.alpha_sq.clone())
        } else {
            (Scalar::one(), self.alpha.clone())
        };
        let order = if self.u.is_polynomial() { EXACT_ORDER } else { self.u.order() + self.n };
        let t = |e: u32| vec![e, 0];
        let dt = TruncSeries::monomial(&vars, EXACT_ORDER, t(self.k - 1), Scalar::int(self.k as i64));
        let ut = self.u.embed(&vars).expect("t is a shadow variable").mul_monomial(&t(self.n)).with_order(order);
        let dz = &TruncSeries::monomial(&vars, EXACT_ORDER, vec![0, 1], &Scalar::int(2) * &c2) + &ut.scale(&c1);
        (DiffForm::one_form(vec![dt, dz]), rescale)
    }

    /// The three-dimensional form, as the pullback of the planar one by
    /// `(x, y, z) -> (x^p y^q, z)`.
    pub fn form_3d(&self) -> Result<DiffForm> {
        let (w, rescale) = self.shadow_form();
        if rescale {
            return Err(Error::InvalidParams("three-dimensional form needs an exact alpha".into()));
        }
        phi_map(self.p, self.q).pullback(&w)
    }
}

/// `(x, y, z) -> (t, z) = (x^p y^q, z)`.
pub fn phi_map(p: u32, q: u32) -> SubstitutionMap {
    SubstitutionMap::monomial(
        &names(&["x", "y", "z"]),
        &names(&["t", "z"]),
        &[vec![p, 0], vec![q, 0], vec![0, 1]],
        &[Scalar::one(), Scalar::one()],
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResonanceSolution {
    pub alpha_sq: Scalar,
    /// Nonnegative rational solution of `alpha^2 = (16+r)^2/(16+2r)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Scalar>,
    /// `r = 0`, i.e. `alpha = +-4`.
    pub boundary: bool,
    /// Roots of `2y^2 + alpha y + 2`, when `alpha` is given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha_roots: Option<(Scalar, Scalar)>,
    /// Eigenvalue quotients for unit exponent, positive one first when present.
    pub quotients: (Scalar, Scalar),
}

impl ResonanceSolution {
    /// Resonant in the sense `r` rational and strictly positive.
    pub fn resonant(&self) -> bool {
        self.r.is_some() && !self.boundary
    }
}

/// `sqrt(A (A - 16))`, exact when it is rational.
fn resonance_root(a: &Scalar) -> Scalar {
    let disc = a * &(a - &Scalar::int(16));
    disc.exact_sqrt().unwrap_or_else(|| disc.sqrt())
}

/// Solves `r^2 + (32 - 2A) r + (256 - 16A) = 0` for `A = alpha^2`.
pub fn alpha_resonance_solve(alpha_sq: &Scalar) -> Result<ResonanceSolution> {
    if alpha_sq.is_negligible(1e-300) {
        return Err(Error::InvalidParams("alpha^2 = 0".into()));
    }
    let a = alpha_sq;
    let s = resonance_root(a);
    let base = a - &Scalar::int(16);
    let candidates = [&base + &s, &base - &s];
    let rational = |c: &Scalar| if c.is_exact() { c.as_rational() } else { c.rationalize(10_000, FLOAT_TOL) };
    let r = candidates.iter().filter_map(rational).find(|r| !r.is_negative()).map(Scalar::rational);
    let boundary = r.as_ref().is_some_and(|r| r.is_zero());
    let eighth = Scalar::ratio(1, 8);
    let mut quotients = (&candidates[0] * &eighth, &candidates[1] * &eighth);
    if !quotients.0.is_positive_rational() && quotients.1.is_positive_rational() {
        quotients = (quotients.1, quotients.0);
    }
    Ok(ResonanceSolution { alpha_sq: a.clone(), r, boundary, alpha_roots: None, quotients })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quotients {
    pub alpha_roots: (Scalar, Scalar),
    pub quotients: (Scalar, Scalar),
    pub tie_break: String,
}

/// Roots of `2y^2 + alpha y + 2`.
pub fn alpha_roots(alpha: &Scalar) -> (Scalar, Scalar) {
    let d = &(alpha * alpha) - &Scalar::int(16);
    let s = d.exact_sqrt().filter(|_| alpha.is_exact()).unwrap_or_else(|| d.sqrt());
    let quarter = Scalar::ratio(1, 4);
    let (a, b) = (&(&(-alpha) + &s) * &quarter, &(&(-alpha) - &s) * &quarter);
    if a.lex_cmp(&b).is_le() { (a, b) } else { (b, a) }
}

/// Eigenvalue quotients at the two non-corner points after the first weighted
/// blow-up, labeled so that the first is a positive rational when possible.
pub fn eigen_quotients(p: u32, alpha: &Scalar) -> Result<Quotients> {
    let a = alpha * alpha;
    if (&a - &Scalar::int(16)).is_negligible(1e-300) {
        return Err(Error::DoubleRoot("alpha = +-4 gives a double root".into()));
    }
    let (r1, r2) = alpha_roots(alpha);
    let pp = Scalar::int(p as i64);
    // quotient at a root y is p (y^2 - 1); exact in alpha^2 as p (A - 16 +- s) / 8
    let s = resonance_root(&a);
    let base = &a - &Scalar::int(16);
    let exact = [&(&pp * &(&base + &s)) * &Scalar::ratio(1, 8), &(&pp * &(&base - &s)) * &Scalar::ratio(1, 8)];
    let at = |y: &Scalar| {
        let direct = &pp * &(&(y * y) - &Scalar::one());
        exact
            .iter()
            .min_by(|u, v| (&direct - *u).abs().total_cmp(&(&direct - *v).abs()))
            .cloned()
            .unwrap_or(direct)
    };
    let (l1, l2) = (at(&r1), at(&r2));
    Ok(if l2.is_positive_rational() && !l1.is_positive_rational() {
        Quotients { alpha_roots: (r2, r1), quotients: (l2, l1), tie_break: "positive rational quotient".into() }
    } else if l1.is_positive_rational() {
        Quotients { alpha_roots: (r1, r2), quotients: (l1, l2), tie_break: "positive rational quotient".into() }
    } else {
        Quotients { alpha_roots: (r1, r2), quotients: (l1, l2), tie_break: "lexicographic on (re, im)".into() }
    })
}

/// A non-corner singular point on the first exceptional component.
#[derive(Clone, Debug, PartialEq)]
pub struct FamilyPoint {
    /// Position on the divisor in the unscaled `z/t^n` coordinate.
    pub position: Scalar,
    /// Eigenvalue along the divisor over the transverse one.
    pub quotient: Scalar,
    pub class: SingularityClass,
    pub germ: FoliationGerm,
    pub chart: ChartMap,
}

impl Serialize for FamilyPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        serde_json::json!({
            "position": self.position,
            "quotient": self.quotient,
            "class": self.class,
            "germ": self.germ.form.to_string(),
            "chart": self.chart.label,
        })
        .serialize(s)
    }
}

/// The chart `z = t^n w` of the planar form.
pub fn shadow_transform(params: &FamilyParams) -> Result<(TransformResult, bool)> {
    let (w, rescaled) = params.shadow_form();
    let germ = FoliationGerm::new(w, &[]);
    let mut cm = ChartMap::monomial(
        &names(&["t", "z"]),
        &names(&["t", "w"]),
        vec![vec![1, params.n], vec![0, 1]],
        &format!("z = t^{}*w", params.n),
    );
    cm.divisor_components.push(("t".into(), 0));
    Ok((apply_chart(&germ, &cm)?, rescaled))
}

/// Singular points on `t = 0` in the chart `z = t^n w`, classified to `order`.
pub fn family_points(params: &FamilyParams, order: u32) -> Result<Vec<FamilyPoint>> {
    let (tr, rescaled) = shadow_transform(params)?;
    let mut out = Vec::new();
    for pt in singular_points_on_divisor(&tr, "t")? {
        if !matches!(pt.kind, PointKind::Point { .. }) {
            continue;
        }
        let lp = linear_part(&pt.germ)?;
        let quotient = if lp.matrix[0][0].is_negligible(1e-300) {
            Scalar::float(f64::INFINITY, 0.0)
        } else {
            &lp.matrix[1][1] / &lp.matrix[0][0]
        };
        let class = classify_simple_type(&pt.germ, order)?;
        let w = pt.coords[1].clone();
        let position = if rescaled { &w * &params.alpha } else { w };
        out.push(FamilyPoint { position, quotient, class, germ: pt.germ, chart: pt.chart });
    }
    Ok(out)
}

/// Necessary condition `k = 2n` for a pure meromorphic first integral.
pub fn prop5_check(params: &FamilyParams, order: u32) -> Verdict {
    let (k, n) = (params.k, params.n);
    if k == 2 * n {
        return Verdict::holds(PROP5, "k = 2n").with("k", k).with("n", n);
    }
    if 2 * n > k {
        return Verdict::fails(PROP5, "2n > k: generalized surface, no pure meromorphic first integral question here")
            .with("k", k)
            .with("n", n);
    }
    let mut v = Verdict::fails(PROP5, "2n < k: a saddle-node appears after blowing up").with("k", k).with("n", n);
    match family_points(params, order) {
        Ok(points) => {
            if let Some(sn) = points.iter().find(|p| p.class.label == Label::SaddleNode) {
                let expected = &(-&params.alpha) * &Scalar::ratio(1, 2);
                v = v
                    .with("saddle_node_at", &sn.position)
                    .with("matches_minus_alpha_over_2", sn.position.approx_eq(&expected, FLOAT_TOL))
                    .with("local_verdict", first_integral_local_verdict(&sn.class));
            }
            v.with("points", &points).at_order(order)
        }
        Err(e) => v.with("pipeline_error", e.to_string()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyClass {
    Generic,
    ResonantDicriticalCandidate,
    ResonantDulac,
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FamilyReport {
    pub class: FamilyClass,
    pub resonance: ResonanceSolution,
    pub points: Vec<FamilyPoint>,
    /// Index in `points` of the point with positive rational quotient.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<usize>,
    /// Residues `(pn, qn, c)` of the lower-order log form of the
    /// three-dimensional germ at that point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1_log_residues: Option<(u32, u32, Scalar)>,
    pub order: u32,
}

/// Generic versus resonant behavior of the family with `k = 2n`.
pub fn family_classify(params: &FamilyParams, order: u32) -> Result<FamilyReport> {
    if params.k != 2 * params.n {
        return Err(Error::InvalidParams(format!("family classification needs k = 2n, got k={}, n={}", params.k, params.n)));
    }
    let mut resonance = alpha_resonance_solve(&params.alpha_sq)?;
    let scaled = |s: &Scalar| s * &Scalar::int(params.n as i64);
    resonance.quotients = (scaled(&resonance.quotients.0), scaled(&resonance.quotients.1));
    if resonance.boundary {
        return Ok(FamilyReport { class: FamilyClass::Boundary, resonance, points: vec![], p1: None, p1_log_residues: None, order });
    }
    resonance.alpha_roots = Some(alpha_roots(&params.alpha));
    let points = family_points(params, order)?;
    let p1 = points.iter().position(|p| p.quotient.is_positive_rational() || (p.quotient.rationalize(24, FLOAT_TOL).is_some_and(|r| r.is_positive())));
    let class = if !resonance.resonant() {
        FamilyClass::Generic
    } else {
        match p1.map(|i| points[i].class.label) {
            Some(Label::DulacC) => FamilyClass::ResonantDulac,
            Some(Label::ResonantLinearizableCandidate | Label::DicriticalRadial) => FamilyClass::ResonantDicriticalCandidate,
            _ => FamilyClass::Generic,
        }
    };
    let p1_log_residues = p1.map(|i| {
        let nq = Scalar::int(params.n as i64);
        (params.p * params.n, params.q * params.n, -&(&nq / &points[i].quotient))
    });
    Ok(FamilyReport { class, resonance, points, p1, p1_log_residues, order })
}

/// Numeric summary of the projective holonomy used by the holomorphic
/// first-integral criterion.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct HolonomyProbe {
    /// Every generator returned to the start after some iterate.
    pub periodic: Option<bool>,
    /// All pairwise commutators act trivially.
    pub abelian: Option<bool>,
    pub residuals: serde_json::Map<String, Value>,
}

/// Holomorphic first integral for `d(z^2 + f^n) + alpha f^p U(f) dz`.
pub fn corollary4_check(n: u32, p: u32, alpha_sq: &Scalar, probe: Option<&HolonomyProbe>) -> Verdict {
    let base = |v: Verdict| v.with("n", n).with("p", p).with("alpha_sq", alpha_sq);
    if n > 2 * p {
        return base(Verdict::fails(COR4, "n > 2p: the reduction contains dicritical components or saddle-nodes"));
    }
    if n == 2 * p {
        match alpha_resonance_solve(alpha_sq) {
            Ok(sol) if sol.r.is_some() => {
                let reason = if sol.boundary {
                    "alpha^2 = (16+r)^2/(16+2r) with r = 0 (boundary alpha = +-4)"
                } else {
                    "alpha^2 = (16+r)^2/(16+2r) for a positive rational r"
                };
                return base(Verdict::fails(COR4, reason).with("r", sol.r).with("boundary", sol.boundary));
            }
            Ok(_) => {}
            Err(e) => return base(Verdict::fails(COR4, e.to_string())),
        }
    }
    let branch = if n < 2 * p { "n < 2p" } else { "n = 2p, non-resonant alpha" };
    let Some(probe) = probe else {
        return base(Verdict::inconclusive(COR4, format!("{branch}; projective holonomy not probed")));
    };
    let v = match (probe.periodic, probe.abelian) {
        (Some(false), _) => Verdict::fails(COR4, format!("{branch}; a generator is not of finite order")),
        (_, Some(false)) => Verdict::fails(COR4, format!("{branch}; generators do not commute")),
        (Some(true), Some(true)) => Verdict::inconclusive(COR4, format!("{branch}; holonomy finite and abelian at probe precision"))
            .leaning(Status::Holds),
        _ => Verdict::inconclusive(COR4, format!("{branch}; holonomy probe not decisive")),
    };
    base(v.with("holonomy", probe))
}

/// Result of testing a candidate rational function against holonomy generators.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InvarianceProbe {
    pub candidate: String,
    pub residuals: Vec<f64>,
    pub tol: f64,
}

impl InvarianceProbe {
    pub fn invariant(&self) -> bool {
        !self.residuals.is_empty() && self.residuals.iter().all(|r| *r < self.tol)
    }
}

/// Meromorphic first integral: `k = 2n` and an invariant rational function
/// of the special component's holonomy.
pub fn theorem6_check(params: &FamilyParams, probe: Option<&InvarianceProbe>, order: u32) -> Verdict {
    let p5 = prop5_check(params, order);
    if !p5.is_holds() {
        return Verdict::fails(THM6, "k != 2n").with("prop5", p5);
    }
    let report = match family_classify(params, order) {
        Ok(r) => r,
        Err(e) => return Verdict::inconclusive(THM6, e.to_string()),
    };
    let v = match report.class {
        FamilyClass::Boundary => Verdict::inconclusive(THM6, "alpha = +-4 is outside the criterion"),
        FamilyClass::ResonantDulac => Verdict::fails(THM6, "Dulac point on the special component excludes a meromorphic first integral"),
        _ => match probe {
            None => Verdict::inconclusive(
                THM6,
                "needs a rational function on the transversal invariant by the projective holonomy",
            ),
            Some(pr) if pr.invariant() => {
                Verdict::holds(THM6, "candidate rational function is invariant by every computed generator").semidecision()
            }
            Some(_) => Verdict::inconclusive(THM6, "candidate rational function is not invariant; others may be")
                .leaning(Status::Fails),
        },
    };
    let v = v.with("family", &report).at_order(order);
    match probe {
        Some(pr) => v.with("invariance", pr),
        None => v,
    }
}

/// Dicriticalness of the three-dimensional family through its planar shadow.
/// `monomial_f` states that `f` is a monomial or comes with a monomialization.
pub fn theorem7_check(params: &FamilyParams, monomial_f: bool, section: Option<Value>, order: u32) -> Result<Verdict> {
    if !monomial_f {
        return Err(Error::InvalidParams("a non-monomial f needs a monomialization".into()));
    }
    let attach = |v: Verdict| match &section {
        Some(s) => v.with("section", s),
        None => v,
    };
    if params.k != 2 * params.n {
        return Ok(Verdict::fails(THM7, "not dicritical: the exponents violate n = 2p").with("k", params.k).with("n", params.n));
    }
    let report = family_classify(params, order)?;
    if report.class == FamilyClass::Boundary {
        return Ok(Verdict::fails(THM7, "not dicritical: alpha = +-4"));
    }
    let Some(i) = report.p1 else {
        return Ok(Verdict::fails(THM7, "not dicritical: no positive rational eigenvalue quotient").with("family", &report));
    };
    let pt = &report.points[i];
    let q = pt.quotient.rationalize(10_000, FLOAT_TOL).expect("p1 quotient is rational");
    let resonant = q.is_integer() || q.recip().is_integer();
    let v = match pt.class.label {
        Label::DulacC => Verdict::fails(THM7, "not dicritical: the positive-quotient point is of Dulac type"),
        Label::ResonantLinearizableCandidate | Label::DicriticalRadial if !resonant => {
            Verdict::holds(THM7, "dicritical: positive quotient is neither an integer nor an inverse integer")
        }
        Label::ResonantLinearizableCandidate | Label::DicriticalRadial => {
            Verdict::holds(THM7, "dicritical: no resonant obstruction at the positive-quotient point").semidecision()
        }
        _ => Verdict::inconclusive(THM7, format!("unexpected class {} at the positive-quotient point", pt.class.label)),
    };
    Ok(attach(v.with("quotient", &pt.quotient).with("family", &report).at_order(order)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_series;

    fn alpha5() -> FamilyParams {
        FamilyParams::new(1, 1, 2, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap()
    }

    #[test]
    fn resonance_examples() {
        let s = alpha_resonance_solve(&Scalar::int(25)).unwrap();
        assert_eq!(s.r, Some(Scalar::int(24)));
        assert_eq!(s.quotients, (Scalar::int(3), Scalar::ratio(-3, 4)));
        assert_eq!(alpha_resonance_solve(&Scalar::ratio(64, 3)).unwrap().r, Some(Scalar::int(16)));
        assert_eq!(alpha_resonance_solve(&Scalar::int(17)).unwrap().r, None);
        let b = alpha_resonance_solve(&Scalar::int(16)).unwrap();
        assert!(b.boundary && b.r == Some(Scalar::zero()));
        assert!(alpha_resonance_solve(&Scalar::zero()).is_err());
    }

    #[test]
    fn quotients_at_alpha_five() {
        let q = eigen_quotients(1, &Scalar::int(5)).unwrap();
        assert_eq!(q.alpha_roots, (Scalar::int(-2), Scalar::ratio(-1, 2)));
        assert_eq!(q.quotients, (Scalar::int(3), Scalar::ratio(-3, 4)));
        let q2 = eigen_quotients(2, &Scalar::int(5)).unwrap();
        assert_eq!(q2.quotients, (Scalar::int(6), Scalar::ratio(-3, 2)));
        assert!(matches!(eigen_quotients(1, &Scalar::int(4)), Err(Error::DoubleRoot(_))));
    }

    #[test]
    fn pipeline_matches_arithmetic() {
        let pts = family_points(&alpha5(), 10).unwrap();
        assert_eq!(pts.len(), 2);
        let by_pos = |y: Scalar| pts.iter().find(|p| p.position == y).unwrap();
        assert_eq!(by_pos(Scalar::int(-2)).quotient, Scalar::int(3));
        assert_eq!(by_pos(Scalar::ratio(-1, 2)).quotient, Scalar::ratio(-3, 4));
        assert_eq!(by_pos(Scalar::ratio(-1, 2)).class.label, Label::SimpleBResonant);
    }

    #[test]
    fn irrational_alpha_stays_exact() {
        let fp = FamilyParams::from_alpha_sq(1, 1, 2, 1, Scalar::ratio(64, 3), FamilyParams::unit_one()).unwrap();
        let pts = family_points(&fp, 8).unwrap();
        let qs: Vec<&Scalar> = pts.iter().map(|p| &p.quotient).collect();
        assert!(qs.contains(&&Scalar::int(2)) && qs.contains(&&Scalar::ratio(-2, 3)));
    }

    #[test]
    fn family_classes() {
        let r = family_classify(&alpha5(), 10).unwrap();
        assert_eq!(r.class, FamilyClass::ResonantDicriticalCandidate);
        assert_eq!(r.p1_log_residues, Some((1, 1, Scalar::ratio(-1, 3))));
        let g = FamilyParams::from_alpha_sq(1, 1, 2, 1, Scalar::int(17), FamilyParams::unit_one()).unwrap();
        assert_eq!(family_classify(&g, 8).unwrap().class, FamilyClass::Generic);
        let b = FamilyParams::new(1, 1, 2, 1, Scalar::int(4), FamilyParams::unit_one()).unwrap();
        assert_eq!(family_classify(&b, 8).unwrap().class, FamilyClass::Boundary);
    }

    #[test]
    fn dulac_unit() {
        let u = parse_series("1 + t", &names(&["t"]), 12).unwrap();
        let fp = FamilyParams::new(1, 1, 2, 1, Scalar::int(5), u).unwrap();
        let r = family_classify(&fp, 10).unwrap();
        assert_eq!(r.class, FamilyClass::ResonantDulac);
        assert_eq!(r.points[r.p1.unwrap()].class.obstruction_order, Some(3));
    }

    #[test]
    fn prop5_branches() {
        let fp = FamilyParams::new(1, 1, 4, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        let v = prop5_check(&fp, 10);
        assert!(v.is_fails());
        assert_eq!(v.evidence["saddle_node_at"], "-5/2");
        assert_eq!(v.evidence["local_verdict"]["status"], "fails");
        assert!(prop5_check(&alpha5(), 10).is_holds());
        let gs = FamilyParams::new(1, 1, 1, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        assert!(prop5_check(&gs, 10).reason.contains("generalized surface"));
    }

    #[test]
    fn corollary4_arithmetic() {
        assert!(corollary4_check(3, 1, &Scalar::int(17), None).is_fails());
        assert!(corollary4_check(2, 1, &Scalar::int(25), None).is_fails());
        let v = corollary4_check(2, 1, &Scalar::int(17), None);
        assert_eq!(v.status, Status::Inconclusive);
        let bad = HolonomyProbe { periodic: Some(true), abelian: Some(false), ..Default::default() };
        assert!(corollary4_check(3, 2, &Scalar::int(4), Some(&bad)).is_fails());
        let good = HolonomyProbe { periodic: Some(true), abelian: Some(true), ..Default::default() };
        let v = corollary4_check(2, 1, &Scalar::int(17), Some(&good));
        assert_eq!((v.status, v.leaning), (Status::Inconclusive, Some(Status::Holds)));
    }

    #[test]
    fn theorem7_branches() {
        assert!(theorem7_check(&alpha5(), true, None, 10).unwrap().is_holds());
        let g = FamilyParams::from_alpha_sq(1, 1, 2, 1, Scalar::int(17), FamilyParams::unit_one()).unwrap();
        assert!(theorem7_check(&g, true, None, 8).unwrap().is_fails());
        let k = FamilyParams::new(1, 1, 3, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        assert!(theorem7_check(&k, true, None, 8).unwrap().is_fails());
        assert!(theorem7_check(&alpha5(), false, None, 8).is_err());
    }

    #[test]
    fn theorem6_without_candidate() {
        let v = theorem6_check(&alpha5(), None, 10);
        assert_eq!(v.status, Status::Inconclusive);
        let k = FamilyParams::new(1, 1, 4, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        assert!(theorem6_check(&k, None, 10).is_fails());
    }
}
