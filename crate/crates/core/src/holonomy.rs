//! Numerical projective holonomy: loop lifting on a transversal, composition,
//! Dulac maps and adjunction, and invariance of rational functions.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::blowup::{apply_chart, divisor_invariant, ChartMap, FoliationGerm, TransformResult};
use crate::criteria::{FamilyParams, HolonomyProbe, InvarianceProbe};
use crate::error::{Error, Result};
use crate::ode::Dopri;
use crate::poly::{self, Poly};
use crate::scalar::Scalar;
use crate::series::{names, TruncSeries, EXACT_ORDER};
use crate::verdict::{Status, Verdict};

/// Sample points for the extrapolated multiplier.
pub const RICHARDSON_T0: [f64; 3] = [0.05, 0.025, 0.0125];
/// Largest iterate tried when looking for a period.
pub const MAX_PERIOD: u32 = 12;
pub const INVARIANCE: &str = "holonomy_invariance";

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Thresholds {
    pub holds: f64,
    pub fails: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { holds: 1e-6, fails: 1e-2 }
    }
}

/// A loop on a divisor component: out along a segment from the base point to
/// the circle, once around it, and back.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoopSpec {
    pub component: String,
    pub center: Complex64,
    pub radius: f64,
    pub base: Complex64,
    /// `1` counterclockwise, `-1` clockwise.
    pub orientation: i8,
}

#[derive(Clone, Copy, Debug)]
enum Piece {
    Line { from: Complex64, to: Complex64 },
    Arc { center: Complex64, radius: f64, start: f64, sweep: f64 },
}

impl Piece {
    fn length(&self) -> f64 {
        match *self {
            Piece::Line { from, to } => (to - from).norm(),
            Piece::Arc { sweep, .. } => sweep.abs(),
        }
    }

    /// Position and velocity at parameter `s` in `[0, length]`.
    fn at(&self, s: f64) -> (Complex64, Complex64) {
        match *self {
            Piece::Line { from, to } => {
                let u = (to - from) / (to - from).norm();
                (from + u * s, u)
            }
            Piece::Arc { center, radius, start, sweep } => {
                let th = start + sweep.signum() * s;
                let e = Complex64::from_polar(1.0, th);
                (center + e * radius, Complex64::i() * e * radius * sweep.signum())
            }
        }
    }
}

impl LoopSpec {
    pub fn new(component: &str, center: Complex64, radius: f64, base: Complex64) -> Self {
        LoopSpec { component: component.into(), center, radius, base, orientation: 1 }
    }

    pub fn reversed(&self) -> Self {
        LoopSpec { orientation: -self.orientation, ..self.clone() }
    }

    /// Other marked points must sit at least twice the radius from the center
    /// and at least one radius from the access segment.
    pub fn check_clearance(&self, marked: &[Complex64]) -> Result<()> {
        let start = self.start();
        for &p in marked {
            if (p - self.center).norm() < 1e-12 {
                continue;
            }
            if (p - self.center).norm() < 2.0 * self.radius {
                return Err(Error::RadiusTooLarge(format!(
                    "loop of radius {} around {} comes within a factor 2 of {}",
                    self.radius, self.center, p
                )));
            }
            if segment_distance(p, self.base, start) < self.radius {
                return Err(Error::RadiusTooLarge(format!("access path from {} passes near {}", self.base, p)));
            }
        }
        Ok(())
    }

    fn start(&self) -> Complex64 {
        let d = self.base - self.center;
        if d.norm() == 0.0 {
            self.center + self.radius
        } else {
            self.center + d / d.norm() * self.radius
        }
    }

    fn pieces(&self) -> Vec<Piece> {
        let start = self.start();
        let arc = Piece::Arc {
            center: self.center,
            radius: self.radius,
            start: (start - self.center).arg(),
            sweep: 2.0 * PI * f64::from(self.orientation),
        };
        if (self.base - start).norm() < 1e-12 {
            vec![arc]
        } else {
            vec![Piece::Line { from: self.base, to: start }, arc, Piece::Line { from: start, to: self.base }]
        }
    }
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    if ab.norm() == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a) * ab.conj()).re / ab.norm_sqr();
    (p - (a + ab * s.clamp(0.0, 1.0))).norm()
}

/// The path-lifting problem on the fiber transverse to an invariant divisor
/// component of a planar germ.
#[derive(Clone, Debug)]
pub struct Transversal {
    pub component: String,
    pub along: String,
    /// Float terms `(e_t, e_b, c)` of the coefficients of `dt` and `db`.
    terms: [Vec<(u32, u32, Complex64)>; 2],
    pub ode: Dopri,
    /// Radius of the working disk for the transversal coordinate.
    pub escape: f64,
}

impl Transversal {
    pub fn new(germ: &FoliationGerm, component: &str) -> Result<Self> {
        let form = &germ.form;
        if form.nvars() != 2 || form.degree() != 1 {
            return Err(Error::VariableMismatch("holonomy needs a planar 1-form".into()));
        }
        let ti = form.vars().iter().position(|v| v == component).ok_or_else(|| Error::UnknownVariable(component.into()))?;
        if !divisor_invariant(form, component)? {
            return Err(Error::Dicritical(format!("{component} = 0 is not invariant")));
        }
        let bi = 1 - ti;
        let compile = |c: &TruncSeries| c.terms().map(|(e, k)| (e[ti], e[bi], k.to_c64())).collect::<Vec<_>>();
        Ok(Transversal {
            component: component.into(),
            along: form.vars()[bi].clone(),
            terms: [compile(form.c(ti)), compile(form.c(bi))],
            ode: Dopri::default(),
            escape: 1.0,
        })
    }

    fn coeffs(&self, t: Complex64, b: Complex64) -> (Complex64, Complex64) {
        let ev = |ts: &[(u32, u32, Complex64)]| ts.iter().map(|&(i, j, c)| c * t.powu(i) * b.powu(j)).sum::<Complex64>();
        (ev(&self.terms[0]), ev(&self.terms[1]))
    }

    /// Lifts a concatenation of loops in the logarithm `l = ln t` of the
    /// transversal coordinate, which keeps track of the winding.
    fn lift_log(&self, loops: &[LoopSpec], l0: Complex64) -> Result<Complex64> {
        let mut l = l0;
        for (n, lp) in loops.iter().enumerate() {
            for (m, piece) in lp.pieces().into_iter().enumerate() {
                let rhs = |s: f64, y: &[Complex64]| -> Result<Vec<Complex64>> {
                    let (b, db) = piece.at(s);
                    let t = y[0].exp();
                    if !t.norm().is_finite() || t.norm() > self.escape {
                        return Err(Error::RadiusTooLarge(format!(
                            "lift leaves the disk |{}| <= {} on loop {n}, piece {m}, arc {s:.4}",
                            self.component, self.escape
                        )));
                    }
                    let (ct, cb) = self.coeffs(t, b);
                    if ct.norm() < 1e-12 * (1.0 + (cb / t).norm()) {
                        return Err(Error::TransversalityLost(format!("loop {n}, piece {m}, arc {s:.4} at {b}")));
                    }
                    Ok(vec![-(cb / (ct * t)) * db])
                };
                l = self.ode.solve(rhs, 0.0, piece.length(), &[l])?[0];
            }
        }
        Ok(l)
    }
}

/// Endpoint of the lift of `lp` through `germ` starting at `t0` on the fiber
/// over the base point.
pub fn lift_loop(germ: &FoliationGerm, lp: &LoopSpec, t0: Complex64) -> Result<Complex64> {
    let tr = Transversal::new(germ, &lp.component)?;
    Ok(tr.lift_log(std::slice::from_ref(lp), t0.ln())?.exp())
}

/// Corner `p y dx + q x dy` with the branch of `t^(p/q)` fixed near `base_arg`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DulacCorner {
    pub p: u32,
    pub q: u32,
    pub base_arg: f64,
}

impl DulacCorner {
    pub fn new(p: u32, q: u32) -> Self {
        DulacCorner { p, q, base_arg: 0.0 }
    }

    fn ratio(&self) -> f64 {
        f64::from(self.p) / f64::from(self.q)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DulacValue {
    pub value: Complex64,
    /// Argument of `t` used for the power.
    pub arg: f64,
    /// `|D^q - t^p| / |t|^p`: `(t, 1)` and `(1, D)` on one leaf of `x^p y^q`.
    pub leaf_residual: f64,
}

pub fn dulac_map(corner: &DulacCorner, t: Complex64) -> Result<DulacValue> {
    if t == Complex64::new(0.0, 0.0) {
        return Err(Error::Pole("Dulac map at t = 0".into()));
    }
    let mut d = t.arg() - corner.base_arg;
    d -= 2.0 * PI * ((d + PI) / (2.0 * PI)).floor();
    let arg = corner.base_arg + d;
    let value = Complex64::from_polar(t.norm().powf(corner.ratio()), arg * corner.ratio());
    let tp = t.powu(corner.p);
    let leaf_residual = (value.powu(corner.q) - tp).norm() / tp.norm();
    Ok(DulacValue { value, arg, leaf_residual })
}

/// A germ of one-variable map given numerically, evaluated on logarithms so
/// that compositions and fractional powers keep their branches.
#[derive(Clone, Debug)]
pub enum HolonomyMap {
    Lift { transversal: Arc<Transversal>, loops: Vec<LoopSpec> },
    /// `t -> exp(log_multiplier) t`.
    Linear { log_multiplier: Complex64 },
    /// Applied left to right.
    Compose(Vec<HolonomyMap>),
    /// `D o h o D^-1`.
    Adjoint { corner: DulacCorner, inner: Box<HolonomyMap> },
}

impl HolonomyMap {
    pub fn identity() -> Self {
        HolonomyMap::Linear { log_multiplier: Complex64::new(0.0, 0.0) }
    }

    pub fn rotation(turns: f64) -> Self {
        HolonomyMap::Linear { log_multiplier: Complex64::new(0.0, 2.0 * PI * turns) }
    }

    pub fn lift(transversal: Arc<Transversal>, lp: LoopSpec) -> Self {
        HolonomyMap::Lift { transversal, loops: vec![lp] }
    }

    pub fn eval_log(&self, l: Complex64) -> Result<Complex64> {
        match self {
            HolonomyMap::Lift { transversal, loops } => transversal.lift_log(loops, l),
            HolonomyMap::Linear { log_multiplier } => Ok(l + log_multiplier),
            HolonomyMap::Compose(maps) => maps.iter().try_fold(l, |acc, m| m.eval_log(acc)),
            HolonomyMap::Adjoint { corner, inner } => Ok(inner.eval_log(l / corner.ratio())? * corner.ratio()),
        }
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        if t.norm() == 0.0 {
            return Ok(t);
        }
        Ok(self.eval_log(t.ln())?.exp())
    }

    /// Value with an error estimate from a second pass at a hundredfold
    /// tighter integration tolerance.
    pub fn eval_with_error(&self, t: Complex64) -> Result<(Complex64, f64)> {
        let v = self.eval(t)?;
        let fine = self.with_tol_factor(0.01).eval(t)?;
        Ok((v, (v - fine).norm()))
    }

    fn with_tol_factor(&self, f: f64) -> Self {
        match self {
            HolonomyMap::Lift { transversal, loops } => {
                let mut tr = (**transversal).clone();
                tr.ode.tol *= f;
                HolonomyMap::Lift { transversal: Arc::new(tr), loops: loops.clone() }
            }
            HolonomyMap::Linear { .. } => self.clone(),
            HolonomyMap::Compose(ms) => HolonomyMap::Compose(ms.iter().map(|m| m.with_tol_factor(f)).collect()),
            HolonomyMap::Adjoint { corner, inner } => {
                HolonomyMap::Adjoint { corner: *corner, inner: Box::new(inner.with_tol_factor(f)) }
            }
        }
    }

    /// `self` first, then `next`: the holonomy of the concatenated loop.
    pub fn then(&self, next: &HolonomyMap) -> Self {
        let mut v = match self {
            HolonomyMap::Compose(ms) => ms.clone(),
            m => vec![m.clone()],
        };
        match next {
            HolonomyMap::Compose(ms) => v.extend(ms.iter().cloned()),
            m => v.push(m.clone()),
        }
        HolonomyMap::Compose(v)
    }

    pub fn inverse(&self) -> Self {
        match self {
            HolonomyMap::Lift { transversal, loops } => HolonomyMap::Lift {
                transversal: transversal.clone(),
                loops: loops.iter().rev().map(LoopSpec::reversed).collect(),
            },
            HolonomyMap::Linear { log_multiplier } => HolonomyMap::Linear { log_multiplier: -log_multiplier },
            HolonomyMap::Compose(ms) => HolonomyMap::Compose(ms.iter().rev().map(HolonomyMap::inverse).collect()),
            HolonomyMap::Adjoint { corner, inner } => {
                HolonomyMap::Adjoint { corner: *corner, inner: Box::new(inner.inverse()) }
            }
        }
    }

    pub fn power(&self, k: i32) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        HolonomyMap::Compose(vec![base; k.unsigned_abs() as usize])
    }

    /// `h'(0)` by Richardson extrapolation of `h(t)/t` over [`RICHARDSON_T0`].
    pub fn multiplier(&self) -> Result<Complex64> {
        let q = RICHARDSON_T0
            .iter()
            .map(|&t| {
                let l = Complex64::new(t.ln(), 0.0);
                Ok((self.eval_log(l)? - l).exp())
            })
            .collect::<Result<Vec<_>>>()?;
        let r1 = [q[1] * 2.0 - q[0], q[2] * 2.0 - q[1]];
        Ok((r1[1] * 4.0 - r1[0]) / 3.0)
    }

    /// Smallest `k <= MAX_PERIOD` with `|h^k(t0) - t0| < tol`, and its residual.
    pub fn period(&self, t0: Complex64, tol: f64) -> Result<(Option<u32>, f64)> {
        let l0 = t0.ln();
        let mut l = l0;
        let mut best = f64::INFINITY;
        for k in 1..=MAX_PERIOD {
            l = self.eval_log(l)?;
            let r = (l.exp() - t0).norm();
            if r < tol {
                return Ok((Some(k), r));
            }
            best = best.min(r);
        }
        Ok((None, best))
    }
}

/// `a b a^-1 b^-1`, with the loop-concatenation convention.
pub fn commutator(a: &HolonomyMap, b: &HolonomyMap) -> HolonomyMap {
    a.then(b).then(&a.inverse()).then(&b.inverse())
}

/// `h^D = D o h o D^-1`, with branches carried by the logarithm.
pub fn adjoin(corner: &DulacCorner, h: &HolonomyMap) -> HolonomyMap {
    HolonomyMap::Adjoint { corner: *corner, inner: Box::new(h.clone()) }
}

/// A rational function of the transversal coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalFn {
    pub num: Poly,
    pub den: Poly,
}

impl RationalFn {
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let den = poly::trim(den);
        if den.is_empty() {
            return Err(Error::DivisionByZero);
        }
        Ok(RationalFn { num: poly::trim(num), den })
    }

    pub fn constant(c: Scalar) -> Self {
        RationalFn { num: poly::trim(vec![c]), den: vec![Scalar::one()] }
    }

    /// `num / den` evaluated along `T -> comps(T)`, each component a series
    /// in the single variable `T`.
    pub fn restrict(num: &TruncSeries, den: &TruncSeries, comps: &[TruncSeries]) -> Result<Self> {
        let t = names(&["T"]);
        let n = num.compose(comps, &t)?.univariate_coeffs();
        let d = den.compose(comps, &t)?.univariate_coeffs();
        RationalFn::new(n, d)
    }

    pub fn eval(&self, t: Complex64) -> Result<Complex64> {
        let d = poly::eval_c64(&self.den, t);
        if d.norm() < 1e-14 {
            return Err(Error::Pole(format!("sample {t} at a pole")));
        }
        Ok(poly::eval_c64(&self.num, t) / d)
    }
}

impl std::fmt::Display for RationalFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = |p: &Poly| TruncSeries::from_coeffs("T", EXACT_ORDER, p).to_string();
        write!(f, "({})/({})", s(&self.num), s(&self.den))
    }
}

/// Largest relative displacement `|r(h(t)) - r(t)| / (1 + |r(t)|)` per generator.
pub fn invariance_residuals(gens: &[HolonomyMap], r: &RationalFn, samples: &[Complex64]) -> Result<Vec<f64>> {
    gens.iter()
        .map(|h| {
            samples.iter().try_fold(0.0f64, |acc, &t| {
                let rt = r.eval(t)?;
                let rh = r.eval(h.eval(t)?)?;
                Ok(acc.max((rh - rt).norm() / (1.0 + rt.norm())))
            })
        })
        .collect()
}

pub fn invariant_rational_test(
    gens: &[HolonomyMap],
    r: &RationalFn,
    samples: &[Complex64],
    th: &Thresholds,
) -> Result<Verdict> {
    let res = invariance_residuals(gens, r, samples)?;
    let max = res.iter().copied().fold(0.0, f64::max);
    let v = if max < th.holds {
        Verdict::holds(INVARIANCE, "invariant by every generator at all samples")
    } else if max > th.fails {
        Verdict::fails(INVARIANCE, "a generator moves the level sets")
    } else {
        Verdict::inconclusive(INVARIANCE, "residual inside the undecided band").leaning(Status::Holds)
    };
    Ok(v.with("candidate", r.to_string())
        .with("max_residual", max)
        .with("residuals", &res)
        .with("samples", samples.len())
        .with("thresholds", th))
}

pub fn invariance_probe(gens: &[HolonomyMap], r: &RationalFn, samples: &[Complex64], th: &Thresholds) -> Result<InvarianceProbe> {
    Ok(InvarianceProbe { candidate: r.to_string(), residuals: invariance_residuals(gens, r, samples)?, tol: th.holds })
}

/// A generator of the holonomy of a component; `center` is `None` for the
/// loop around every marked point.
#[derive(Clone, Debug)]
pub struct Generator {
    pub id: String,
    pub center: Option<Complex64>,
    pub map: HolonomyMap,
}

/// Loops from a common base point around each singular point of an invariant
/// component, followed by one loop enclosing all of them.
pub fn holonomy_generators(tr: &TransformResult, component: &str) -> Result<Vec<Generator>> {
    let germ = tr.germ();
    let transversal = Arc::new(Transversal::new(&germ, component)?);
    let bi = germ.vars().iter().position(|v| *v == transversal.along).expect("along is a chart variable");
    let ti = 1 - bi;
    // on an invariant component the point is singular where the transverse coefficient vanishes
    let restricted = germ.form.c(ti).restrict_zero(ti);
    if restricted.is_zero() {
        return Err(Error::UnexpectedShape(format!("{component} = 0 is a curve of singular points")));
    }
    let along = restricted.coeffs_in(bi).iter().map(|c| c.constant_term()).collect::<Poly>();
    let mut marked: Vec<Complex64> = Vec::new();
    for root in poly::roots(&along, 1e-10) {
        let c = root.value.to_c64();
        if marked.iter().all(|m| (m - c).norm() > 1e-9) {
            marked.push(c);
        }
    }
    if marked.is_empty() {
        return Ok(vec![]);
    }
    marked.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let n = marked.len() as f64;
    let centroid = marked.iter().sum::<Complex64>() / n;
    let spread = marked.iter().map(|m| (m - centroid).norm()).fold(0.0, f64::max);
    let radii: Vec<f64> = marked
        .iter()
        .map(|m| {
            let gap = marked.iter().filter(|o| *o != m).map(|o| (o - m).norm()).fold(f64::INFINITY, f64::min);
            (0.5 * gap).min(0.5)
        })
        .collect();
    let reach = spread + radii.iter().copied().fold(0.0, f64::max) + 1.0;
    let loops = (0..24)
        .map(|i| centroid + Complex64::from_polar(reach, PI / 2.0 + f64::from(i) * PI / 12.0))
        .find_map(|base| {
            let ls: Vec<LoopSpec> =
                marked.iter().zip(&radii).map(|(&c, &r)| LoopSpec::new(component, c, r, base)).collect();
            ls.iter().all(|l| l.check_clearance(&marked).is_ok()).then_some((base, ls))
        });
    let Some((base, loops)) = loops else {
        return Err(Error::RadiusTooLarge("no base point clears every marked point".into()));
    };
    let mut out: Vec<Generator> = loops
        .into_iter()
        .enumerate()
        .map(|(i, l)| Generator {
            id: format!("h{}", i + 1),
            center: Some(l.center),
            map: HolonomyMap::lift(transversal.clone(), l),
        })
        .collect();
    let outer = LoopSpec::new(component, centroid, (base - centroid).norm(), base);
    out.push(Generator { id: "h_inf".into(), center: None, map: HolonomyMap::lift(transversal, outer) });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeneratorRow {
    pub id: String,
    pub center: Option<Complex64>,
    pub multiplier: Complex64,
    pub period: Option<u32>,
    pub period_residual: f64,
}

pub fn generator_table(gens: &[Generator], t0: f64, tol: f64) -> Result<Vec<GeneratorRow>> {
    gens.iter()
        .map(|g| {
            let (period, period_residual) = g.map.period(Complex64::new(t0, 0.0), tol)?;
            Ok(GeneratorRow { id: g.id.clone(), center: g.center, multiplier: g.map.multiplier()?, period, period_residual })
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProbeConfig {
    pub t0: f64,
    /// Return residual accepted as periodic.
    pub period_tol: f64,
    /// Commutator displacements below this count as commuting.
    pub abelian_tol: f64,
    /// and above this as not commuting.
    pub nonabelian_tol: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { t0: 0.05, period_tol: 1e-5, abelian_tol: 1e-6, nonabelian_tol: 1e-3 }
    }
}

/// Periodicity and commutation evidence for the holomorphic criterion.
pub fn holonomy_probe(gens: &[Generator], cfg: &ProbeConfig) -> Result<HolonomyProbe> {
    let t0 = Complex64::new(cfg.t0, 0.0);
    let mut residuals = Map::new();
    let mut periodic = true;
    for row in generator_table(gens, cfg.t0, cfg.period_tol)? {
        periodic &= row.period.is_some();
        residuals.insert(row.id.clone(), serde_json::to_value(&row).unwrap_or(Value::Null));
    }
    let mut worst = 0.0f64;
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            let d = (commutator(&a.map, &b.map).eval(t0)? - t0).norm();
            residuals.insert(format!("[{},{}]", a.id, b.id), json!(d));
            worst = worst.max(d);
        }
    }
    let abelian = if worst < cfg.abelian_tol {
        Some(true)
    } else if worst > cfg.nonabelian_tol {
        Some(false)
    } else {
        None
    };
    residuals.insert("max_commutator_displacement".into(), json!(worst));
    Ok(HolonomyProbe { periodic: (!gens.is_empty()).then_some(periodic), abelian, residuals })
}

/// Chart of the cusp `z^2 + t^k` whose exceptional component carries the
/// projective holonomy: `z = t^(k/2) w` for even `k`, and
/// `(t, z) = (a^2 b, a^k b^((k+1)/2))` for odd `k`. Returns the component.
pub fn cusp_chart(vars: &[String], k: u32) -> (ChartMap, String) {
    if k % 2 == 0 {
        let new = vec![vars[0].clone(), "w".to_string()];
        let mut cm = ChartMap::monomial(vars, &new, vec![vec![1, k / 2], vec![0, 1]], &format!("{} = {}^{}*w", vars[1], vars[0], k / 2));
        cm.divisor_components.push((vars[0].clone(), 0));
        (cm, vars[0].clone())
    } else {
        let new = names(&["a", "b"]);
        let label = format!("({}, {}) = (a^2*b, a^{}*b^{})", vars[0], vars[1], k, (k + 1) / 2);
        let mut cm = ChartMap::monomial(vars, &new, vec![vec![2, k], vec![1, (k + 1) / 2]], &label);
        cm.divisor_components.push(("a".into(), 0));
        cm.divisor_components.push(("b".into(), 0));
        (cm, "a".into())
    }
}

/// The planar family in its cusp chart, and the special component.
pub fn special_component(params: &FamilyParams) -> Result<(TransformResult, String)> {
    let (w, _) = params.shadow_form();
    let (cm, comp) = cusp_chart(w.vars(), params.k);
    Ok((apply_chart(&FoliationGerm::new(w, &[]), &cm)?, comp))
}

/// Candidate `num/den` restricted to the fiber over `base` of a chart, as a
/// function of the transversal coordinate `T`.
pub fn restrict_to_fiber(num: &TruncSeries, den: &TruncSeries, tr: &TransformResult, component: &str, base: Complex64) -> Result<RationalFn> {
    let vars = tr.form.vars();
    let t = names(&["T"]);
    let line: Vec<TruncSeries> = vars
        .iter()
        .map(|v| {
            if v == component {
                TruncSeries::var(&t, EXACT_ORDER, 0)
            } else {
                TruncSeries::constant(&t, EXACT_ORDER, Scalar::from_c64(base))
            }
        })
        .collect();
    let comps = tr.chart.map.comps().iter().map(|c| c.compose(&line, &t)).collect::<Result<Vec<_>>>()?;
    RationalFn::restrict(num, den, &comps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::family_points;
    use crate::parse::parse_form;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn corner(p: i64, q: i64) -> FoliationGerm {
        let w = parse_form(&format!("{p}*z*dx + {q}*x*dz"), &names(&["x", "z"]), EXACT_ORDER).unwrap();
        FoliationGerm::new(w, &["x", "z"])
    }

    fn alpha5() -> (TransformResult, String) {
        let params = FamilyParams::new(1, 1, 2, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        special_component(&params).unwrap()
    }

    #[test]
    fn corner_half_turn() {
        let lp = LoopSpec::new("z", c(0.0, 0.0), 1.0, c(1.0, 0.0));
        let h = lift_loop(&corner(1, 2), &lp, c(0.05, 0.0)).unwrap();
        assert!((h + 0.05).norm() < 1e-6, "{h}");
        let h = lift_loop(&corner(1, 1), &lp, c(0.05, 0.0)).unwrap();
        assert!((h - 0.05).norm() < 1e-6, "{h}");
    }

    #[test]
    fn dicritical_component_is_refused() {
        let w = parse_form("dx", &names(&["x", "z"]), EXACT_ORDER).unwrap();
        let germ = FoliationGerm::new(w, &["z"]);
        let lp = LoopSpec::new("z", c(0.0, 0.0), 1.0, c(1.0, 0.0));
        assert!(matches!(lift_loop(&germ, &lp, c(0.05, 0.0)), Err(Error::Dicritical(_))));
    }

    #[test]
    fn escape_is_reported() {
        let lp = LoopSpec::new("z", c(0.0, 0.0), 0.5, c(1.0, 0.0));
        let r = lift_loop(&corner(3, 1), &lp, c(0.5, 0.0));
        assert!(matches!(r, Err(Error::RadiusTooLarge(_))), "{r:?}");
    }

    #[test]
    fn alpha5_multipliers_follow_the_eigenvalue_quotients() {
        let (tr, comp) = alpha5();
        let tv = Arc::new(Transversal::new(&tr.germ(), &comp).unwrap());
        let params = FamilyParams::new(1, 1, 2, 1, Scalar::int(5), FamilyParams::unit_one()).unwrap();
        for pt in family_points(&params, 6).unwrap() {
            let w = pt.position.to_c64();
            let h = HolonomyMap::lift(tv.clone(), LoopSpec::new(&comp, w, 0.5, w + 0.5));
            let expected = Complex64::from_polar(1.0, 2.0 * PI / pt.quotient.to_c64().re);
            assert!((h.multiplier().unwrap() - expected).norm() < 1e-5);
        }
    }

    #[test]
    fn homotopy_inverse_and_concatenation() {
        let (tr, comp) = alpha5();
        let tv = Arc::new(Transversal::new(&tr.germ(), &comp).unwrap());
        let base = c(-1.25, 1.5);
        let t0 = c(0.05, 0.0);
        let small = HolonomyMap::lift(tv.clone(), LoopSpec::new(&comp, c(-0.5, 0.0), 0.3, base));
        let large = HolonomyMap::lift(tv.clone(), LoopSpec::new(&comp, c(-0.5, 0.0), 0.7, base));
        assert!((small.eval(t0).unwrap() - large.eval(t0).unwrap()).norm() < 1e-6);
        let back = small.then(&small.inverse()).eval(t0).unwrap();
        assert!((back - t0).norm() < 1e-6);
        let g1 = LoopSpec::new(&comp, c(-0.5, 0.0), 0.5, base);
        let g2 = LoopSpec::new(&comp, c(-2.0, 0.0), 0.5, base);
        let joint = HolonomyMap::Lift { transversal: tv.clone(), loops: vec![g1.clone(), g2.clone()] };
        let split = HolonomyMap::lift(tv.clone(), g1).then(&HolonomyMap::lift(tv, g2));
        assert!((joint.eval(t0).unwrap() - split.eval(t0).unwrap()).norm() < 1e-6);
    }

    #[test]
    fn error_estimate_is_small() {
        let lp = LoopSpec::new("z", c(0.0, 0.0), 1.0, c(1.0, 0.0));
        let h = HolonomyMap::lift(Arc::new(Transversal::new(&corner(1, 3), "z").unwrap()), lp);
        let (v, e) = h.eval_with_error(c(0.05, 0.0)).unwrap();
        assert!(e < 1e-8);
        assert!((v - Complex64::from_polar(0.05, -2.0 * PI / 3.0)).norm() < 1e-6);
    }

    #[test]
    fn dulac_values() {
        let d = dulac_map(&DulacCorner::new(1, 2), c(0.04, 0.0)).unwrap();
        assert!((d.value - 0.2).norm() < 1e-12 && d.leaf_residual < 1e-12);
        let d = dulac_map(&DulacCorner::new(1, 1), c(0.3, 0.1)).unwrap();
        assert!((d.value - c(0.3, 0.1)).norm() < 1e-12);
        let d = dulac_map(&DulacCorner::new(2, 1), c(0.1, 0.0)).unwrap();
        assert!((d.value - 0.01).norm() < 1e-12);
        assert!(dulac_map(&DulacCorner::new(1, 2), c(0.0, 0.0)).is_err());
    }

    #[test]
    fn dulac_branch_follows_base_argument() {
        let corner = DulacCorner { p: 1, q: 2, base_arg: PI };
        let d = dulac_map(&corner, c(-0.04, -1e-9)).unwrap();
        assert!(d.arg > PI && (d.value - c(0.0, 0.2)).norm() < 1e-6);
    }

    #[test]
    fn adjunction_of_rotations() {
        let t = c(0.03, 0.01);
        let id = adjoin(&DulacCorner::new(1, 2), &HolonomyMap::identity());
        assert!((id.eval(t).unwrap() - t).norm() < 1e-15);
        // continuation of the winding of e^{-2 pi i q/p} across the corner closes up
        let h = adjoin(&DulacCorner::new(1, 2), &HolonomyMap::rotation(-2.0));
        assert!((h.eval(t).unwrap() - t).norm() < 1e-12);
        // a half turn becomes a quarter turn
        let h = adjoin(&DulacCorner::new(1, 2), &HolonomyMap::rotation(-0.5));
        let xi = h.eval(t).unwrap() / t;
        assert!((xi - c(0.0, -1.0)).norm() < 1e-12);
    }

    #[test]
    fn rational_invariance() {
        let samples = [c(0.05, 0.0), c(0.0, 0.04), c(-0.03, 0.02)];
        let quarter = HolonomyMap::rotation(0.75);
        let th = Thresholds::default();
        let r = RationalFn::new(vec![Scalar::zero(), Scalar::one()], vec![Scalar::one()]).unwrap();
        assert!(invariant_rational_test(&[quarter.clone()], &r, &samples, &th).unwrap().is_fails());
        let k = RationalFn::constant(Scalar::int(3));
        assert!(invariant_rational_test(&[quarter.clone()], &k, &samples, &th).unwrap().is_holds());
        let t4 = RationalFn::new(vec![Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::zero(), Scalar::one()], vec![Scalar::one()]).unwrap();
        assert!(invariant_rational_test(&[quarter], &t4, &samples, &th).unwrap().is_holds());
        let pole = RationalFn::new(vec![Scalar::one()], vec![Scalar::ratio(-1, 20), Scalar::one()]).unwrap();
        assert!(matches!(invariance_residuals(&[HolonomyMap::identity()], &pole, &samples), Err(Error::Pole(_))));
    }

    #[test]
    fn alpha5_generators_keep_the_first_integral() {
        let (tr, comp) = alpha5();
        let gens = holonomy_generators(&tr, &comp).unwrap();
        assert_eq!(gens.len(), 3);
        let HolonomyMap::Lift { loops, .. } = &gens[0].map else { panic!() };
        let vars = names(&["t", "z"]);
        let num = crate::parse::parse_series("(t+2*z)^4", &vars, EXACT_ORDER).unwrap();
        let den = crate::parse::parse_series("2*t+z", &vars, EXACT_ORDER).unwrap();
        let r = restrict_to_fiber(&num, &den, &tr, &comp, loops[0].base).unwrap();
        let maps: Vec<HolonomyMap> = gens.iter().map(|g| g.map.clone()).collect();
        let samples = [c(0.05, 0.0), c(0.0, 0.03)];
        assert!(invariant_rational_test(&maps, &r, &samples, &Thresholds::default()).unwrap().is_holds());
        let probe = holonomy_probe(&gens, &ProbeConfig::default()).unwrap();
        assert_eq!(probe.periodic, Some(true));
        assert_eq!(probe.abelian, Some(true));
    }
}
