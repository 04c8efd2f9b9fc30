use std::time::Instant;

use foliate::blowup::{apply_chart, FoliationGerm};
use foliate::criteria::corollary4_check;
use foliate::holonomy::{commutator, cusp_chart, generator_table, holonomy_generators, holonomy_probe, Generator, ProbeConfig};
use foliate::parse::parse_form;
use foliate::series::EXACT_ORDER;
use foliate::verdict::Status;
use foliate::Scalar;
use num_complex::Complex64;

fn moussu() -> Vec<Generator> {
    let vars = vec!["x".to_string(), "y".to_string()];
    let w = parse_form("d(y^2 + x^3) + x*(2*x*dy - 3*y*dx)", &vars, EXACT_ORDER).unwrap();
    let (chart, comp) = cusp_chart(&vars, 3);
    let tr = apply_chart(&FoliationGerm::new(w, &[]), &chart).unwrap();
    holonomy_generators(&tr, &comp).unwrap()
}

fn pick<'a>(gens: &'a [Generator], center: Option<f64>) -> &'a Generator {
    gens.iter()
        .find(|g| match (g.center, center) {
            (Some(c), Some(x)) => (c - x).norm() < 1e-9,
            (None, None) => true,
            _ => false,
        })
        .expect("generator present")
}

#[test]
fn moussu_generators_are_periodic_but_do_not_commute() {
    let start = Instant::now();
    let gens = moussu();
    assert_eq!(gens.len(), 3);
    let t0 = Complex64::new(0.05, 0.0);
    let h1 = &pick(&gens, Some(0.0)).map;
    let h2 = &pick(&gens, None).map;
    assert!((h1.power(2).eval(t0).unwrap() - t0).norm() < 1e-5);
    assert!((h2.power(3).eval(t0).unwrap() - t0).norm() < 1e-5);
    assert!((commutator(h1, h2).eval(t0).unwrap() - t0).norm() > 1e-3);
    let table = generator_table(&gens, 0.05, 1e-5).unwrap();
    let periods: Vec<Option<u32>> = table.iter().map(|r| r.period).collect();
    assert_eq!(periods, vec![Some(6), Some(2), Some(3)]);
    assert!(start.elapsed().as_secs() < 30);
}

#[test]
fn moussu_fails_the_holomorphic_criterion() {
    let probe = holonomy_probe(&moussu(), &ProbeConfig::default()).unwrap();
    assert_eq!(probe.periodic, Some(true));
    assert_eq!(probe.abelian, Some(false));
    let v = corollary4_check(3, 2, &Scalar::one(), Some(&probe));
    assert_eq!(v.status, Status::Fails);
}

#[test]
fn concatenation_is_an_anti_homomorphism() {
    let gens = moussu();
    let t0 = Complex64::new(0.05, 0.0);
    let a = &pick(&gens, Some(0.0)).map;
    let b = &pick(&gens, Some(-1.0)).map;
    let (foliate::holonomy::HolonomyMap::Lift { transversal, loops: la }, foliate::holonomy::HolonomyMap::Lift { loops: lb, .. }) = (a, b) else {
        panic!("generators are lifts")
    };
    let joint = foliate::holonomy::HolonomyMap::Lift { transversal: transversal.clone(), loops: [la.clone(), lb.clone()].concat() };
    let j = joint.eval(t0).unwrap();
    assert!((j - b.eval(a.eval(t0).unwrap()).unwrap()).norm() < 1e-6);
    assert!((j - a.eval(b.eval(t0).unwrap()).unwrap()).norm() > 1e-4);
}

#[test]
fn loop_around_both_points_composes_in_path_order() {
    let gens = moussu();
    let t0 = Complex64::new(0.05, 0.0);
    let (left, right, big) = (&pick(&gens, Some(-1.0)).map, &pick(&gens, Some(0.0)).map, &pick(&gens, None).map);
    let b = big.eval(t0).unwrap();
    assert!((b - right.eval(left.eval(t0).unwrap()).unwrap()).norm() < 1e-6);
    assert!((b - left.eval(right.eval(t0).unwrap()).unwrap()).norm() > 1e-4);
}
