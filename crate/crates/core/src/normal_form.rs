//! Planar vector fields at a singular point: linear algebra, the resonant
//! Poincaré–Dulac normal form to finite order, and center manifolds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::VectorField;
use crate::scalar::Scalar;
use crate::series::{names, TruncSeries, EXACT_ORDER};

pub type Mat2 = [[Scalar; 2]; 2];

const FLOAT_TOL: f64 = 1e-10;

pub fn mat2(x: &VectorField) -> Mat2 {
    let a = x.linear_part();
    [[a[0][0].clone(), a[0][1].clone()], [a[1][0].clone(), a[1][1].clone()]]
}

pub fn trace_det(m: &Mat2) -> (Scalar, Scalar) {
    (&m[0][0] + &m[1][1], &(&m[0][0] * &m[1][1]) - &(&m[0][1] * &m[1][0]))
}

/// Eigenvalues, exact when the discriminant is a square in the Gaussian rationals.
pub fn eigenvalues(m: &Mat2) -> [Scalar; 2] {
    let (t, d) = trace_det(m);
    let disc = &(&t * &t) - &(&Scalar::int(4) * &d);
    let s = disc.sqrt();
    let half = Scalar::ratio(1, 2);
    let l1 = &(&t + &s) * &half;
    let l2 = &(&t - &s) * &half;
    // a zero eigenvalue should come out as an exact zero when it is one
    if d.is_zero() {
        if t.is_zero() {
            return [Scalar::zero(), Scalar::zero()];
        }
        return [t, Scalar::zero()];
    }
    [l1, l2]
}

fn is_zeroish(c: &Scalar) -> bool {
    c.is_negligible(FLOAT_TOL)
}

/// A nonzero eigenvector for the eigenvalue `l`.
pub fn eigenvector(m: &Mat2, l: &Scalar) -> [Scalar; 2] {
    let a = &m[0][0] - l;
    let d = &m[1][1] - l;
    if !is_zeroish(&m[0][1]) || !is_zeroish(&a) {
        if is_zeroish(&m[0][1]) {
            return [Scalar::zero(), Scalar::one()];
        }
        return [m[0][1].clone(), -&a];
    }
    if !is_zeroish(&m[1][0]) || !is_zeroish(&d) {
        if is_zeroish(&m[1][0]) {
            return [Scalar::one(), Scalar::zero()];
        }
        return [-&d, m[1][0].clone()];
    }
    [Scalar::one(), Scalar::zero()]
}

fn inverse2(p: &Mat2) -> Result<Mat2> {
    let (_, det) = trace_det(p);
    if is_zeroish(&det) {
        return Err(Error::Numeric("singular change of basis".into()));
    }
    let inv = det.recip()?;
    Ok([
        [&p[1][1] * &inv, -&(&p[0][1] * &inv)],
        [-&(&p[1][0] * &inv), &p[0][0] * &inv],
    ])
}

/// `P^{-1} X(P y)` in the new coordinates.
pub fn linear_change(x: &VectorField, p: &Mat2, new_vars: &[String]) -> Result<VectorField> {
    let order = x.order();
    let lin = |row: &[Scalar; 2]| {
        TruncSeries::from_terms(new_vars, EXACT_ORDER, [(vec![1, 0], row[0].clone()), (vec![0, 1], row[1].clone())])
    };
    let comps = [lin(&p[0]), lin(&p[1])];
    let xc: Vec<TruncSeries> = x
        .comps()
        .iter()
        .map(|c| c.compose(&comps, new_vars).map(|s| s.truncate(order)))
        .collect::<Result<_>>()?;
    let q = inverse2(p)?;
    let y0 = &xc[0].scale(&q[0][0]) + &xc[1].scale(&q[0][1]);
    let y1 = &xc[1].scale(&q[1][1]) + &xc[0].scale(&q[1][0]);
    VectorField::new(vec![y0, y1])
}

/// `(I + Dh)^{-1} X(y + h)`, the field in the coordinates `x = y + h(y)`.
fn near_identity_change(x: &VectorField, h: &[TruncSeries; 2], order: u32) -> Result<VectorField> {
    let vars = x.vars().to_vec();
    let comps: Vec<TruncSeries> =
        (0..2).map(|i| &TruncSeries::var(&vars, EXACT_ORDER, i) + &h[i]).collect();
    let xc: Vec<TruncSeries> = x
        .comps()
        .iter()
        .map(|c| c.compose(&comps, &vars).map(|s| s.truncate(order)))
        .collect::<Result<_>>()?;
    let dh = [[h[0].derivative(0), h[0].derivative(1)], [h[1].derivative(0), h[1].derivative(1)]];
    let mut acc = xc.clone();
    let mut term = xc;
    for _ in 0..order {
        let next = [
            -&(&(&dh[0][0] * &term[0]) + &(&dh[0][1] * &term[1])).truncate(order),
            -&(&(&dh[1][0] * &term[0]) + &(&dh[1][1] * &term[1])).truncate(order),
        ];
        if next.iter().all(TruncSeries::is_zero) {
            break;
        }
        acc = vec![&acc[0] + &next[0], &acc[1] + &next[1]];
        term = next.to_vec();
    }
    VectorField::new(acc)
}

/// Outcome of the finite-order resonant normal form computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PdOutcome {
    /// Every resonant coefficient vanishes through `order`.
    LinearizableSoFar { order: u32 },
    /// First nonzero resonant coefficient.
    Obstruction { order: u32, component: usize, monomial: Vec<u32>, coefficient: String },
    /// Equal eigenvalues with a nontrivial nilpotent part.
    JordanBlock,
    /// Linear part is a nonzero multiple of the identity.
    Radial { order: u32 },
}

impl PdOutcome {
    pub fn obstruction_order(&self) -> Option<u32> {
        match self {
            PdOutcome::Obstruction { order, .. } => Some(*order),
            PdOutcome::JordanBlock => Some(1),
            _ => None,
        }
    }
}

/// Poincaré–Dulac reduction of a planar field with nonzero linear part to
/// `order`, reporting the first resonant obstruction.
pub fn poincare_dulac(x: &VectorField, order: u32) -> Result<PdOutcome> {
    let m = mat2(x);
    let [l1, l2] = eigenvalues(&m);
    if is_zeroish(&l1) || is_zeroish(&l2) {
        return Err(Error::Numeric("normal form needs nonzero eigenvalues".into()));
    }
    let vars = names(&["y1", "y2"]);
    let equal = (&l1 - &l2).is_negligible(FLOAT_TOL * (1.0 + l1.abs()));
    let p: Mat2 = if equal {
        let nil = is_zeroish(&m[0][1]) && is_zeroish(&m[1][0]) && is_zeroish(&(&m[0][0] - &m[1][1]));
        if !nil {
            return Ok(PdOutcome::JordanBlock);
        }
        [[Scalar::one(), Scalar::zero()], [Scalar::zero(), Scalar::one()]]
    } else {
        let v1 = eigenvector(&m, &l1);
        let v2 = eigenvector(&m, &l2);
        [[v1[0].clone(), v2[0].clone()], [v1[1].clone(), v2[1].clone()]]
    };
    let mut y = linear_change(&x.map(|c| c.truncate(order)), &p, &vars)?;
    let lambda = [l1, l2];
    let radial = equal;
    for k in 2..=order {
        let mut h = [TruncSeries::zero(&vars, EXACT_ORDER), TruncSeries::zero(&vars, EXACT_ORDER)];
        let mut resonant: Option<(usize, Vec<u32>, Scalar)> = None;
        for j in 0..2 {
            for (e, c) in y.comps()[j].homogeneous(k).terms() {
                if is_zeroish(c) {
                    continue;
                }
                let delta = &(&(&lambda[0] * &Scalar::int(e[0] as i64)) + &(&lambda[1] * &Scalar::int(e[1] as i64))) - &lambda[j];
                if delta.is_negligible(FLOAT_TOL * (1.0 + lambda[j].abs())) {
                    if resonant.is_none() {
                        resonant = Some((j, e.clone(), c.clone()));
                    }
                } else {
                    h[j].add_term(e.clone(), c / &delta);
                }
            }
        }
        if let Some((component, monomial, c)) = resonant {
            return Ok(PdOutcome::Obstruction { order: k, component, monomial, coefficient: c.to_string() });
        }
        if !(h[0].is_zero() && h[1].is_zero()) {
            y = near_identity_change(&y, &h, order)?;
        }
    }
    Ok(if radial { PdOutcome::Radial { order } } else { PdOutcome::LinearizableSoFar { order } })
}

/// Center manifold data for a field with eigenvalues `0` and `lambda != 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CenterManifold {
    pub lambda: Scalar,
    /// Graph `v = phi(u)` in eigen-coordinates.
    pub phi: TruncSeries,
    /// Reduced dynamics `u' = g(u)`.
    pub reduced: TruncSeries,
    /// Degree and coefficient of the first nonzero term of `g`.
    pub leading: Option<(u32, Scalar)>,
}

pub fn center_manifold(x: &VectorField, order: u32) -> Result<CenterManifold> {
    let m = mat2(x);
    let [a, b] = eigenvalues(&m);
    let (zero, lambda) = if is_zeroish(&b) { (b, a) } else if is_zeroish(&a) { (a, b) } else {
        return Err(Error::Numeric("no zero eigenvalue".into()));
    };
    if is_zeroish(&lambda) {
        return Err(Error::Numeric("nilpotent linear part".into()));
    }
    let v0 = eigenvector(&m, &zero);
    let v1 = eigenvector(&m, &lambda);
    let p = [[v0[0].clone(), v1[0].clone()], [v0[1].clone(), v1[1].clone()]];
    let vars = names(&["u", "v"]);
    let y = linear_change(&x.map(|c| c.truncate(order)), &p, &vars)?;
    let uvars = names(&["u"]);
    let u = TruncSeries::var(&uvars, order, 0);
    let mut phi = TruncSeries::zero(&uvars, order);
    let on_graph = |s: &TruncSeries, phi: &TruncSeries| s.compose(&[u.clone(), phi.clone()], &uvars);
    for k in 2..=order {
        let yv = on_graph(&y.comps()[1], &phi)?;
        let yu = on_graph(&y.comps()[0], &phi)?;
        let r = &yv - &(&phi.derivative(0).with_order(order) * &yu);
        let rk = r.coeff(&[k]);
        if !is_zeroish(&rk) {
            phi.add_term(vec![k], -&(&rk / &lambda));
        }
    }
    let reduced = on_graph(&y.comps()[0], &phi)?.chop(FLOAT_TOL);
    let leading = reduced.terms().next().map(|(e, c)| (e[0], c.clone()));
    Ok(CenterManifold { lambda, phi, reduced, leading })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_form;

    fn field(text: &str) -> VectorField {
        parse_form(text, &names(&["t", "z"]), 12).unwrap().dual_field().unwrap()
    }

    #[test]
    fn node_eigenvalues() {
        let x = field("2*t*dt + (5*t+2*z)*dz");
        let ev = eigenvalues(&mat2(&x));
        assert!(ev.contains(&Scalar::int(-1)) && ev.contains(&Scalar::int(-4)));
    }

    #[test]
    fn linear_node_has_no_obstruction() {
        let x = field("2*t*dt + (5*t+2*z)*dz");
        assert_eq!(poincare_dulac(&x, 8).unwrap(), PdOutcome::LinearizableSoFar { order: 8 });
    }

    #[test]
    fn dulac_node_is_obstructed() {
        // x' = x, y' = 2y + x^2: resonance at order 2
        let vars = names(&["x", "y"]);
        let x = VectorField::new(vec![
            TruncSeries::var(&vars, EXACT_ORDER, 0),
            TruncSeries::from_terms(&vars, EXACT_ORDER, [(vec![0, 1], Scalar::int(2)), (vec![2, 0], Scalar::one())]),
        ])
        .unwrap();
        let out = poincare_dulac(&x, 6).unwrap();
        assert_eq!(out.obstruction_order(), Some(2));
    }

    #[test]
    fn nonresonant_terms_are_removed() {
        // x' = x + y^2, y' = 3y: y^2 in the first component is not resonant (2*3 != 1)
        let vars = names(&["x", "y"]);
        let x = VectorField::new(vec![
            TruncSeries::from_terms(&vars, EXACT_ORDER, [(vec![1, 0], Scalar::one()), (vec![0, 2], Scalar::one())]),
            TruncSeries::monomial(&vars, EXACT_ORDER, vec![0, 1], Scalar::int(3)),
        ])
        .unwrap();
        assert_eq!(poincare_dulac(&x, 7).unwrap(), PdOutcome::LinearizableSoFar { order: 7 });
    }

    #[test]
    fn jordan_and_radial() {
        let vars = names(&["x", "y"]);
        let j = VectorField::linear(&vars, &[vec![Scalar::one(), Scalar::one()], vec![Scalar::zero(), Scalar::one()]], EXACT_ORDER);
        assert_eq!(poincare_dulac(&j, 5).unwrap(), PdOutcome::JordanBlock);
        let r = VectorField::linear(&vars, &[vec![Scalar::one(), Scalar::zero()], vec![Scalar::zero(), Scalar::one()]], EXACT_ORDER);
        assert_eq!(poincare_dulac(&r, 5).unwrap(), PdOutcome::Radial { order: 5 });
    }

    #[test]
    fn saddle_node_center_manifold() {
        // germ at t = -5/2 of the order-four family after one blow-up
        let vars = names(&["s", "r"]);
        let w = parse_form("(-5*r + 2*r^2 + 4*s^2)*ds + 2*s*r*dr", &vars, 10).unwrap();
        let cm = center_manifold(&w.dual_field().unwrap(), 8).unwrap();
        let (deg, c) = cm.leading.unwrap();
        assert_eq!(deg, 3);
        assert_eq!(c, Scalar::ratio(-8, 5));
    }
}
