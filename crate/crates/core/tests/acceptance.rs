//! Acceptance harness: one PASS/FAIL line per criterion.

mod common;

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

use foliate::blowup::FoliationGerm;
use foliate::classify::Label;
use foliate::criteria::{
    alpha_resonance_solve, alpha_roots, corollary4_check, eigen_quotients, family_points, phi_map, prop5_check,
    theorem6_check, theorem7_check, FamilyParams,
};
use foliate::holonomy::{
    commutator, cusp_chart, holonomy_generators, holonomy_probe, invariance_probe, lift_loop, restrict_to_fiber,
    special_component, Generator, HolonomyMap, LoopSpec, ProbeConfig, Thresholds, Transversal,
};
use foliate::integral::{
    dicriticalness_section, pullback_integral, separatrix_family, separatrix_family_3d, verify_first_integral,
    verify_separatrix, FData, MeroFunction,
};
use foliate::series::{names, EXACT_ORDER};
use foliate::verdict::Status;
use foliate::{Scalar, TruncSeries};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde_json::json;

use common::*;

type Outcome = Result<String, String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn family(p: u32, q: u32, k: u32, n: u32, alpha: Scalar) -> FamilyParams {
    FamilyParams::new(p, q, k, n, alpha, FamilyParams::unit_one()).expect("valid family")
}

fn alpha5() -> FamilyParams {
    family(1, 1, 2, 1, Scalar::int(5))
}

fn level_function() -> MeroFunction {
    MeroFunction::parse("(t + 2*z)^4/(2*t + z)", &names(&["t", "z"])).expect("candidate parses")
}

fn criterion_1() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let coprime = [(1, 1), (1, 2), (2, 1), (1, 3), (3, 1), (2, 3), (3, 2)];
    let mut shapes = 0;
    for i in 0..25 {
        let (p, q) = coprime[rng.gen_range(0..coprime.len())];
        let n = rng.gen_range(1..=2);
        let alpha = Scalar::int([3, 5, 7][rng.gen_range(0..3)]);
        let params = FamilyParams::new(p, q, 2 * n, n, alpha.clone(), unit(&mut rng, 4)).map_err(e)?;
        let got = axis_chain(&params).map_err(e)?;
        let want = expected_axis_transform(&params);
        ensure(got == want, format!("tuple {i} (p={p}, q={q}, n={n}, alpha={alpha}): {got} != {want}"))?;
        let k = 2 * n + rng.gen_range(1..=3);
        let sn = FamilyParams::new(p, q, k, n, alpha, unit(&mut rng, 4)).map_err(e)?;
        let got = axis_chain(&sn).map_err(e)?;
        ensure(has_prop5_shape(&got, p, q), format!("k={k} > 2n={}: shape lost in {got}", 2 * n))?;
        shapes += 1;
    }
    Ok(format!("25/25 transforms equal, {shapes}/25 shapes with 2n < k"))
}

fn criterion_2() -> Outcome {
    let (r1, r2) = alpha_roots(&Scalar::int(5));
    ensure(r1 == Scalar::int(-2) && r2 == Scalar::ratio(-1, 2), format!("roots {r1}, {r2}"))?;
    let q = eigen_quotients(1, &Scalar::int(5)).map_err(e)?.quotients;
    ensure(q == (Scalar::int(3), Scalar::ratio(-3, 4)), format!("quotients {}, {}", q.0, q.1))?;
    let r = |a: Scalar| alpha_resonance_solve(&a).map_err(e);
    ensure(r(Scalar::int(25))?.r == Some(Scalar::int(24)), "A = 25")?;
    ensure(r(Scalar::ratio(64, 3))?.r == Some(Scalar::int(16)), "A = 64/3")?;
    ensure(r(Scalar::int(17))?.r.is_none(), "A = 17")?;
    ensure(r(Scalar::int(16))?.boundary, "A = 16")?;
    Ok("roots {-2, -1/2}, quotients {3, -3/4}, r = 24, 16, none, boundary".into())
}

fn criterion_3() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    for _ in 0..200 {
        let r = Scalar::ratio(rng.gen_range(0..=500), rng.gen_range(1..=60));
        let sixteen = Scalar::int(16);
        let num = &(&sixteen + &r) * &(&sixteen + &r);
        let a = num.checked_div(&(&sixteen + &(&r * &Scalar::int(2)))).map_err(e)?;
        let got = alpha_resonance_solve(&a).map_err(e)?.r;
        ensure(got.as_ref() == Some(&r), format!("r = {r} came back as {got:?}"))?;
    }
    Ok("200/200 exact round trips".into())
}

fn criterion_4() -> Outcome {
    let params = family(1, 1, 4, 1, Scalar::int(5));
    let points = family_points(&params, 10).map_err(e)?;
    let sn = points.iter().find(|p| p.class.label == Label::SaddleNode).ok_or("no saddle-node on the divisor")?;
    ensure(sn.position == Scalar::ratio(-5, 2), format!("saddle-node at {}", sn.position))?;
    let v = prop5_check(&params, 10);
    ensure(v.status == Status::Fails, format!("prop5 verdict {:?}", v.status))?;
    ensure(v.evidence.get("matches_minus_alpha_over_2") == Some(&json!(true)), "evidence does not locate -alpha/2")?;
    Ok(format!("saddle-node at t = -5/2, verdict: {}", v.reason))
}

fn criterion_5() -> Outcome {
    let (w, _) = alpha5().shadow_form();
    let v = verify_first_integral(&level_function(), &w).map_err(e)?;
    ensure(v.status == Status::Holds && v.evidence["certified_order"] == json!("exact"), format!("planar: {:?}", v.status))?;
    for (p, q) in [(1, 1), (2, 3)] {
        let params = family(p, q, 2, 1, Scalar::int(5));
        let f = pullback_integral(&level_function(), &phi_map(p, q)).map_err(e)?;
        let f = MeroFunction::new(f.num.truncate(12), f.den.truncate(12)).map_err(e)?;
        let v = verify_first_integral(&f, &params.form_3d().map_err(e)?).map_err(e)?;
        let order = v.evidence["certified_order"].as_u64().unwrap_or(u64::MAX);
        ensure(v.status == Status::Holds && order >= 11, format!("f = x^{p} y^{q}: {:?} at order {order}", v.status))?;
    }
    Ok("planar residual identically zero; pullbacks by xy and x^2y^3 vanish through the truncation at 12".into())
}

fn criterion_6() -> Outcome {
    let params = alpha5();
    let (w, _) = params.shadow_form();
    let threed = family(2, 3, 2, 1, Scalar::int(5));
    let w3 = threed.form_3d().map_err(e)?;
    let cs = [
        Scalar::int(1),
        Scalar::int(-1),
        Scalar::int(2),
        Scalar::ratio(1, 2),
        Scalar::int(3),
        Scalar::ratio(-5, 3),
        Scalar::int(7),
        Scalar::i(),
        &Scalar::one() + &Scalar::i(),
        Scalar::ratio(-81, 4),
    ];
    let certified = |v: &foliate::verdict::Verdict| {
        v.status == Status::Holds && v.evidence["certified_order"].as_u64().is_some_and(|o| o >= 8)
    };
    for cc in &cs {
        let curve = separatrix_family(&params, cc, 8).map_err(e)?;
        ensure(certified(&verify_separatrix(&curve, &w).map_err(e)?), format!("planar C = {cc}"))?;
        let slope = curve.comps[1].coeff(&[curve.denominator]);
        ensure(slope == Scalar::int(-2), format!("C = {cc}: tangent {slope}"))?;
        let curve3 = separatrix_family_3d(&threed, cc, 8).map_err(e)?;
        ensure(certified(&verify_separatrix(&curve3, &w3).map_err(e)?), format!("3D C = {cc}"))?;
    }
    let line = separatrix_family(&params, &Scalar::zero(), 8).map_err(e)?;
    let s = names(&["s"]);
    let expect = TruncSeries::monomial(&s, EXACT_ORDER, vec![1], Scalar::int(-2));
    ensure(line.comps[1].truncate(8) == expect.truncate(8), format!("C = 0: z = {}", line.comps[1]))?;
    let uv = names(&["u", "v"]);
    let line3 = separatrix_family_3d(&family(1, 1, 2, 1, Scalar::int(5)), &Scalar::zero(), 8).map_err(e)?;
    let want = TruncSeries::monomial(&uv, EXACT_ORDER, vec![1, 1], Scalar::int(-2));
    ensure(line3.comps[2].truncate(8) == want.truncate(8), format!("C = 0 in 3D: z = {}", line3.comps[2]))?;
    Ok("10 values of C certified through order 8 in 2D and 3D, tangent -2, C = 0 gives z = -2t and z = -2xy".into())
}

fn corner(p: i64, q: i64) -> FoliationGerm {
    let w = foliate::parse::parse_form(&format!("{p}*z*dx + {q}*x*dz"), &names(&["x", "z"]), EXACT_ORDER).expect("form");
    FoliationGerm::new(w, &["x", "z"])
}

fn moussu() -> Result<Vec<Generator>, String> {
    let w = parse2("d(z^2 + t^3) + t*(2*t*dz - 3*z*dt)");
    let (chart, comp) = cusp_chart(w.vars(), 3);
    let tr = foliate::blowup::apply_chart(&FoliationGerm::new(w, &[]), &chart).map_err(e)?;
    holonomy_generators(&tr, &comp).map_err(e)
}

fn pick(gens: &[Generator], center: Option<f64>) -> Result<&HolonomyMap, String> {
    gens.iter()
        .find(|g| match (g.center, center) {
            (Some(z), Some(x)) => (z - x).norm() < 1e-9,
            (None, None) => true,
            _ => false,
        })
        .map(|g| &g.map)
        .ok_or_else(|| format!("no generator at {center:?}"))
}

/// Returns the failing sub-checks separately so the known discrepancy in the
/// multiplier cannot hide a regression elsewhere.
fn criterion_7() -> (Outcome, Vec<String>) {
    let mut failed = Vec::new();
    let mut notes = Vec::new();
    let t0 = c(0.05, 0.0);
    let mut run = |name: &str, r: Result<String, String>| match r {
        Ok(s) => notes.push(format!("{name} ok ({s})")),
        Err(s) => {
            notes.push(format!("{name} FAILED ({s})"));
            failed.push(name.to_string());
        }
    };
    run("corner", (|| {
        let lp = LoopSpec::new("z", c(0.0, 0.0), 1.0, c(1.0, 0.0));
        let h = lift_loop(&corner(1, 2), &lp, t0).map_err(e)?;
        let r = (h + 0.05).norm();
        ensure(r < 1e-6, format!("|h(0.05) + 0.05| = {r:.1e}"))?;
        Ok(format!("|h(0.05) + 0.05| = {r:.1e}"))
    })());
    run("homotopy", (|| {
        let (tr, comp) = special_component(&alpha5()).map_err(e)?;
        let tv = Arc::new(Transversal::new(&tr.germ(), &comp).map_err(e)?);
        let base = c(-1.25, 1.5);
        let small = HolonomyMap::lift(tv.clone(), LoopSpec::new(&comp, c(-0.5, 0.0), 0.3, base));
        let large = HolonomyMap::lift(tv.clone(), LoopSpec::new(&comp, c(-0.5, 0.0), 0.7, base));
        let r = (small.eval(t0).map_err(e)? - large.eval(t0).map_err(e)?).norm();
        ensure(r < 1e-6, format!("{r:.1e}"))?;
        Ok(format!("{r:.1e}"))
    })());
    run("anti-homomorphism", (|| {
        // the loop around both points is homotopic to the left loop followed
        // by the right one, so its holonomy is h_right o h_left
        let gens = moussu()?;
        let (left, right, big) = (pick(&gens, Some(-1.0))?, pick(&gens, Some(0.0))?, pick(&gens, None)?);
        let b = big.eval(t0).map_err(e)?;
        let r = (b - right.eval(left.eval(t0).map_err(e)?).map_err(e)?).norm();
        let swapped = (b - left.eval(right.eval(t0).map_err(e)?).map_err(e)?).norm();
        ensure(r < 1e-6 && swapped > 1e-4, format!("{r:.1e}, reversed order {swapped:.1e}"))?;
        Ok(format!("{r:.1e}, reversed order {swapped:.1e}"))
    })());
    let (tr, comp) = match special_component(&alpha5()) {
        Ok(x) => x,
        Err(err) => return (Err(err.to_string()), vec!["setup".into()]),
    };
    let multiplier = holonomy_generators(&tr, &comp)
        .map_err(e)
        .and_then(|g| pick(&g, Some(-0.5)).cloned())
        .and_then(|h| h.multiplier().map_err(e));
    match multiplier {
        Ok(m) => {
            let stated = Complex64::from_polar(1.0, 1.5 * PI);
            let derived = Complex64::from_polar(1.0, 2.0 * PI / -0.75);
            let (ds, dd) = ((m - stated).norm(), (m - derived).norm());
            run("multiplier vs exp(3 pi i/2)", if ds < 1e-5 { Ok(format!("{ds:.1e}")) } else { Err(format!("measured {m:.6}, off by {ds:.2}")) });
            run("multiplier vs exp(2 pi i/quotient)", if dd < 1e-5 { Ok(format!("{dd:.1e}")) } else { Err(format!("off by {dd:.1e}")) });
        }
        Err(err) => run("multiplier", Err(err)),
    }
    let line = notes.join("; ");
    (if failed.is_empty() { Ok(line) } else { Err(line) }, failed)
}

fn criterion_8() -> Outcome {
    let gens = moussu()?;
    let t0 = c(0.05, 0.0);
    let h1 = pick(&gens, Some(0.0))?;
    let h2 = pick(&gens, None)?;
    let r1 = (h1.power(2).eval(t0).map_err(e)? - t0).norm();
    let r2 = (h2.power(3).eval(t0).map_err(e)? - t0).norm();
    let dc = (commutator(h1, h2).eval(t0).map_err(e)? - t0).norm();
    ensure(r1 < 1e-4 && r2 < 1e-4 && dc > 1e-3, format!("|h1^2 - id| = {r1:.1e}, |h2^3 - id| = {r2:.1e}, commutator {dc:.1e}"))?;
    let probe = holonomy_probe(&gens, &ProbeConfig::default()).map_err(e)?;
    let v = corollary4_check(3, 2, &Scalar::one(), Some(&probe));
    ensure(v.status == Status::Fails, format!("cor4 verdict {:?}", v.status))?;
    Ok(format!("|h1^2 - id| = {r1:.1e}, |h2^3 - id| = {r2:.1e}, commutator displacement {dc:.2e}, cor4 fails"))
}

fn criterion_9() -> Outcome {
    let params = alpha5();
    let section = dicriticalness_section(&params, &FData::Monomial { p1: 1, p2: 1 }, 8).map_err(e)?;
    let ro = section.certificate.residual_order;
    ensure(ro >= 8, format!("section certified through {ro}"))?;
    let v7 = theorem7_check(&params, true, Some(serde_json::to_value(&section).map_err(e)?), 8).map_err(e)?;
    ensure(v7.status == Status::Holds, format!("alpha = 5 thm7 {:?}", v7.status))?;
    let (tr, comp) = special_component(&params).map_err(e)?;
    let gens = holonomy_generators(&tr, &comp).map_err(e)?;
    let HolonomyMap::Lift { loops, .. } = &gens[0].map else { return Err("generator is not a lift".into()) };
    let f = level_function();
    let r = restrict_to_fiber(&f.num, &f.den, &tr, &comp, loops[0].base).map_err(e)?;
    let maps: Vec<HolonomyMap> = gens.iter().map(|g| g.map.clone()).collect();
    let probe = invariance_probe(&maps, &r, &[c(0.05, 0.0), c(0.0, 0.03)], &Thresholds::default()).map_err(e)?;
    let worst = probe.residuals.iter().cloned().fold(0.0, f64::max);
    let v6 = theorem6_check(&params, Some(&probe), 8);
    ensure(v6.status == Status::Holds && worst < 1e-6, format!("alpha = 5 thm6 {:?}, residual {worst:.1e}", v6.status))?;
    let generic = FamilyParams::from_alpha_sq(1, 1, 2, 1, Scalar::int(17), FamilyParams::unit_one()).map_err(e)?;
    let g7 = theorem7_check(&generic, true, None, 8).map_err(e)?;
    ensure(g7.status == Status::Fails, format!("alpha^2 = 17 thm7 {:?}", g7.status))?;
    let g6 = theorem6_check(&generic, None, 8);
    ensure(g6.status != Status::Holds, "alpha^2 = 17 thm6 holds")?;
    Ok(format!(
        "alpha = 5 dicritical with section certified through {ro}, invariance residual {worst:.1e}; alpha^2 = 17 not dicritical, thm6 {:?}",
        g6.status
    ))
}

fn criterion_10() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    let v = xyz();
    let mut tally = Vec::new();
    let mut suite = |name: &str, ok: usize, total: usize| tally.push((name.to_string(), ok, total));
    let cases = 100;
    suite("d o d = 0", (0..cases).filter(|i| dd_vanishes(&form(&mut rng, &v, i % 2))).count(), cases);
    suite(
        "wedge antisymmetry",
        (0..cases)
            .filter(|i| {
                let a = form(&mut rng, &v, 1 + i % 2);
                let b = form(&mut rng, &v, 1);
                wedge_graded(&a, &b)
            })
            .count(),
        cases,
    );
    suite(
        "pullback functoriality",
        (0..cases)
            .filter(|_| {
                let (phi, psi) = (map(&mut rng, &v, &v), map(&mut rng, &v, &v));
                let (w, u) = (form(&mut rng, &v, 1), form(&mut rng, &v, 1));
                pullback_functorial(&phi, &psi, &w, &u)
            })
            .count(),
        cases,
    );
    suite(
        "saturation idempotence",
        (0..cases)
            .filter(|_| {
                let mono = TruncSeries::monomial(&v, EXACT_ORDER, (0..3).map(|_| rng.gen_range(0..3)).collect(), Scalar::one());
                saturation_idempotent(&form(&mut rng, &v, 1).mul_fn(&mono))
            })
            .count(),
        cases,
    );
    let rs = [2, 3, 4, 5, 6];
    suite(
        "chart overlap",
        (0..cases)
            .filter(|_| {
                let n = rs[rng.gen_range(0..rs.len())];
                let r = if rng.gen_bool(0.5) { Scalar::int(n) } else { Scalar::ratio(-1, n) };
                charts_agree(&shadow_with_rational_points(&r, unit(&mut rng, 2)), 6)
            })
            .count(),
        cases,
    );
    let line = tally.iter().map(|(n, ok, t)| format!("{n} {ok}/{t}")).collect::<Vec<_>>().join(", ");
    if tally.iter().all(|(_, ok, t)| ok == t) {
        Ok(line)
    } else {
        Err(line)
    }
}

struct Line {
    number: u32,
    name: &'static str,
    outcome: Outcome,
    elapsed: Duration,
    limit: Option<Duration>,
}

impl Line {
    fn passed(&self) -> bool {
        self.outcome.is_ok() && self.limit.is_none_or(|l| self.elapsed < l)
    }

    fn print(&self) {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let detail = match &self.outcome {
            Ok(s) | Err(s) => s,
        };
        let timing = match self.limit {
            Some(l) => format!("{:.2}s of {}s", self.elapsed.as_secs_f64(), l.as_secs()),
            None => format!("{:.2}s", self.elapsed.as_secs_f64()),
        };
        println!("criterion {:>2} ({}): {status} [{timing}] {detail}", self.number, self.name);
    }
}

fn timed(number: u32, name: &'static str, limit: Option<u64>, f: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let outcome = f();
    Line { number, name, outcome, elapsed: start.elapsed(), limit: limit.map(Duration::from_secs) }
}

fn main() {
    let mut crit7_failures = Vec::new();
    let lines = vec![
        timed(1, "transform fidelity", Some(5), criterion_1),
        timed(2, "singular-point arithmetic", Some(1), criterion_2),
        timed(3, "resonance round-trip", None, criterion_3),
        timed(4, "saddle-node fixture", None, criterion_4),
        timed(5, "first-integral certificate", Some(2), criterion_5),
        timed(6, "separatrix family", None, criterion_6),
        timed(7, "holonomy numerics", Some(10), || {
            let (o, f) = criterion_7();
            crit7_failures = f;
            o
        }),
        timed(8, "moussu fixture", Some(30), criterion_8),
        timed(9, "dicriticalness end-to-end", Some(60), criterion_9),
        timed(10, "calculus invariants", None, criterion_10),
    ];
    for l in &lines {
        l.print();
    }
    // The stated multiplier is the only tolerated failure; the derived one must hold.
    let tolerated = |l: &Line| {
        l.number == 7
            && l.limit.is_none_or(|lim| l.elapsed < lim)
            && crit7_failures.iter().all(|f| f == "multiplier vs exp(3 pi i/2)")
    };
    let unexpected: Vec<u32> = lines.iter().filter(|l| !l.passed() && !tolerated(l)).map(|l| l.number).collect();
    let passed = lines.iter().filter(|l| l.passed()).count();
    println!("acceptance: {passed}/{} criteria pass", lines.len());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
