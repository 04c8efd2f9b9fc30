//! Monomial charts, strict transforms and singular points on the divisor.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::form::DiffForm;
use crate::poly::{self, Poly};
use crate::scalar::Scalar;
use crate::series::TruncSeries;
use crate::subst::SubstitutionMap;

/// A foliation germ: a defining 1-form and the coordinate hyperplanes of an
/// adapted normal-crossings divisor.
#[derive(Clone, Debug, PartialEq)]
pub struct FoliationGerm {
    pub form: DiffForm,
    pub divisor: Vec<String>,
}

impl FoliationGerm {
    pub fn new(form: DiffForm, divisor: &[&str]) -> Self {
        FoliationGerm { form, divisor: divisor.iter().map(|s| s.to_string()).collect() }
    }

    pub fn vars(&self) -> &[String] {
        self.form.vars()
    }

    pub fn divisor_indices(&self) -> Vec<usize> {
        self.divisor.iter().filter_map(|d| self.vars().iter().position(|v| v == d)).collect()
    }

    /// True when the form vanishes at the origin.
    pub fn is_singular(&self) -> bool {
        self.form.coeffs().iter().all(|c| c.constant_term().is_negligible(1e-12))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisorComponent {
    pub var: String,
    pub invariant: bool,
    pub multiplicity: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChartStep {
    /// `old_j = prod_i new_i^{matrix[i][j]}`.
    Monomial { matrix: Vec<Vec<u32>> },
    /// `old_var = new_var + value`.
    Translate { var: String, value: String },
    /// Renaming of one coordinate.
    Rename { from: String, to: String },
}

/// A composable chart map from new coordinates to the original ones.
#[derive(Clone, Debug, PartialEq)]
pub struct ChartMap {
    pub map: SubstitutionMap,
    pub steps: Vec<ChartStep>,
    pub divisor_components: Vec<(String, u32)>,
    pub label: String,
}

fn mat_mul(a: &[Vec<u32>], b: &[Vec<u32>]) -> Vec<Vec<u32>> {
    let n = a.len();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum()).collect())
        .collect()
}

impl ChartMap {
    pub fn identity(vars: &[String]) -> Self {
        ChartMap { map: SubstitutionMap::identity(vars), steps: vec![], divisor_components: vec![], label: "identity".into() }
    }

    /// Monomial chart with new variable names `new_vars`; row `i` of
    /// `matrix` lists the exponents of `new_i` in each old variable.
    pub fn monomial(old_vars: &[String], new_vars: &[String], matrix: Vec<Vec<u32>>, label: &str) -> Self {
        let ones = vec![Scalar::one(); old_vars.len()];
        let map = SubstitutionMap::monomial(new_vars, old_vars, &matrix, &ones);
        let mut steps = vec![ChartStep::Monomial { matrix }];
        for (o, n) in old_vars.iter().zip(new_vars) {
            if o != n {
                steps.push(ChartStep::Rename { from: o.clone(), to: n.clone() });
            }
        }
        ChartMap { map, steps, divisor_components: vec![], label: label.into() }
    }

    pub fn translation(vars: &[String], i: usize, value: Scalar) -> Self {
        let label = format!("{} -> {} + {}", vars[i], vars[i], value);
        ChartMap {
            map: SubstitutionMap::translation(vars, i, value.clone()),
            steps: vec![ChartStep::Translate { var: vars[i].clone(), value: value.to_string() }],
            divisor_components: vec![],
            label,
        }
    }

    pub fn source_vars(&self) -> &[String] {
        self.map.source()
    }

    pub fn target_vars(&self) -> &[String] {
        self.map.target()
    }

    /// `self` followed by the finer chart `next` (whose targets are our sources).
    pub fn then(&self, next: &ChartMap) -> Result<ChartMap> {
        let map = self.map.compose(&next.map)?;
        let mut steps = self.steps.clone();
        steps.extend(next.steps.iter().cloned());
        let mut comps = self.divisor_components.clone();
        for (v, m) in &next.divisor_components {
            match comps.iter_mut().find(|(w, _)| w == v) {
                Some(c) => c.1 = *m,
                None => comps.push((v.clone(), *m)),
            }
        }
        let label = if self.steps.is_empty() {
            next.label.clone()
        } else if next.steps.is_empty() {
            self.label.clone()
        } else {
            format!("{} ; {}", self.label, next.label)
        };
        Ok(ChartMap { map, steps, divisor_components: comps, label })
    }

    /// Product of the monomial step matrices, when the chart has no translation.
    pub fn exponent_matrix(&self) -> Option<Vec<Vec<u32>>> {
        let n = self.source_vars().len();
        let mut acc: Vec<Vec<u32>> = (0..n).map(|i| (0..n).map(|j| (i == j) as u32).collect()).collect();
        for s in &self.steps {
            match s {
                ChartStep::Monomial { matrix } => acc = mat_mul(matrix, &acc),
                ChartStep::Translate { .. } => return None,
                ChartStep::Rename { .. } => {}
            }
        }
        Some(acc)
    }

    pub fn eval_c64(&self, p: &[Complex64]) -> Vec<Complex64> {
        self.map.eval_c64(p)
    }
}

/// Strict transform of a germ under a chart.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformResult {
    pub chart: ChartMap,
    pub form: DiffForm,
    pub cofactor: TruncSeries,
    pub divisor: Vec<DivisorComponent>,
}

impl TransformResult {
    pub fn germ(&self) -> FoliationGerm {
        FoliationGerm { form: self.form.clone(), divisor: self.divisor.iter().map(|d| d.var.clone()).collect() }
    }

    /// Composite exponent matrix as rows of strings, for reports.
    pub fn report(&self) -> serde_json::Value {
        serde_json::json!({
            "chart": self.chart.label,
            "exponent_matrix": self.chart.exponent_matrix(),
            "steps": self.chart.steps,
            "divisor": self.divisor,
            "cofactor": self.cofactor.to_string(),
            "form": self.form.display_factored(),
        })
    }
}

/// Invariance of the hyperplane `var = 0`: every other coefficient is divisible by `var`.
pub fn divisor_invariant(form: &DiffForm, var: &str) -> Result<bool> {
    let i = form.vars().iter().position(|v| v == var).ok_or_else(|| Error::UnknownVariable(var.into()))?;
    if form.degree() != 1 {
        return Err(Error::VariableMismatch("invariance test needs a 1-form".into()));
    }
    Ok((0..form.nvars()).filter(|&j| j != i).all(|j| form.c(j).restrict_zero(i).is_zero()))
}

/// Pulls a germ back through a chart, saturates, and tracks the divisor.
pub fn apply_chart(germ: &FoliationGerm, chart: &ChartMap) -> Result<TransformResult> {
    let pulled = chart.map.pullback(&germ.form)?;
    let (form, cofactor) = pulled.saturate()?;
    let vars = form.vars().to_vec();
    let m = cofactor.monomial_gcd();
    let mut comps: Vec<String> = Vec::new();
    // total transform of the old divisor
    for d in &germ.divisor {
        if let Some(j) = chart.target_vars().iter().position(|v| v == d) {
            for (i, c) in chart.map.comps()[j].monomial_gcd().iter().enumerate() {
                if *c > 0 && !comps.contains(&vars[i]) {
                    comps.push(vars[i].clone());
                }
            }
        }
    }
    for (v, _) in &chart.divisor_components {
        if vars.contains(v) && !comps.contains(v) {
            comps.push(v.clone());
        }
    }
    let divisor = comps
        .iter()
        .map(|v| {
            let i = vars.iter().position(|w| w == v).unwrap();
            Ok(DivisorComponent { var: v.clone(), invariant: divisor_invariant(&form, v)?, multiplicity: m[i] })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut chart = chart.clone();
    for d in &divisor {
        match chart.divisor_components.iter_mut().find(|(v, _)| *v == d.var) {
            Some(c) => c.1 = d.multiplicity,
            None => chart.divisor_components.push((d.var.clone(), d.multiplicity)),
        }
    }
    Ok(TransformResult { chart, form, cofactor, divisor })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PointChart {
    /// `(a, b) = (a, a b')`.
    Main,
    /// `(a, b) = (a' b, b)`.
    Other,
}

fn fresh(vars: &[String], wanted: &str, fallback: &str) -> String {
    if vars.iter().any(|v| v == wanted) {
        fallback.to_string()
    } else {
        wanted.to_string()
    }
}

/// One point blow-up of a planar germ.
pub fn blowup_point_2d(germ: &FoliationGerm, chart: PointChart) -> Result<TransformResult> {
    let vars = germ.vars().to_vec();
    if vars.len() != 2 {
        return Err(Error::VariableMismatch("point blow-up needs two variables".into()));
    }
    if !germ.is_singular() {
        return Err(Error::NothingToBlowUp("regular point".into()));
    }
    let (new_vars, matrix, exc) = match chart {
        PointChart::Main => {
            let w = fresh(&vars, "w", &vars[1]);
            (vec![vars[0].clone(), w], vec![vec![1, 1], vec![0, 1]], 0)
        }
        PointChart::Other => {
            let u = fresh(&vars, "u", &vars[0]);
            (vec![u, vars[1].clone()], vec![vec![1, 0], vec![1, 1]], 1)
        }
    };
    let label = match chart {
        PointChart::Main => format!("{} = {}*{}", vars[1], new_vars[0], new_vars[1]),
        PointChart::Other => format!("{} = {}*{}", vars[0], new_vars[0], new_vars[1]),
    };
    let mut cm = ChartMap::monomial(&vars, &new_vars, matrix, &label);
    cm.divisor_components.push((new_vars[exc].clone(), 0));
    apply_chart(germ, &cm)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// The axis `x = z = 0`, blown up by `z = x z'`.
    Y,
    /// The axis `y = z = 0`, blown up by `z = y z'`.
    X,
}

fn singular_along(form: &DiffForm, zero: &[usize]) -> bool {
    form.coeffs().iter().all(|c| zero.iter().fold(c.clone(), |acc, &i| acc.restrict_zero(i)).is_zero())
}

/// `count` blow-ups of a coordinate axis of a germ in variables `(x, y, z)`,
/// realized as the chart `z = w x^count` or `z = w y^count`.
pub fn blowup_axis_3d(germ: &FoliationGerm, axis: Axis, count: u32) -> Result<TransformResult> {
    let vars = germ.vars().to_vec();
    if vars.len() != 3 {
        return Err(Error::VariableMismatch("axis blow-up needs three variables".into()));
    }
    let mut result = TransformResult {
        chart: ChartMap::identity(&vars),
        form: germ.form.clone(),
        cofactor: TruncSeries::one(&vars, crate::series::EXACT_ORDER),
        divisor: germ
            .divisor
            .iter()
            .map(|v| Ok(DivisorComponent { var: v.clone(), invariant: divisor_invariant(&germ.form, v)?, multiplicity: 0 }))
            .collect::<Result<_>>()?,
    };
    let base = match axis {
        Axis::Y => 0,
        Axis::X => 1,
    };
    for _ in 0..count {
        let cur = result.form.vars().to_vec();
        if !singular_along(&result.form, &[base, 2]) {
            return Err(Error::UnexpectedShape(format!(
                "axis {}={}=0 is not in the singular locus",
                cur[base], cur[2]
            )));
        }
        let w = fresh(&cur, "w", &cur[2]);
        let new_vars = vec![cur[0].clone(), cur[1].clone(), w.clone()];
        let mut matrix = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        matrix[base][2] = 1;
        let step = ChartMap::monomial(&cur, &new_vars, matrix, &format!("{} = {}*{}", cur[2], cur[base], w));
        let chart = result.chart.then(&step)?;
        let mut germ_now = germ.clone();
        germ_now.divisor.push(cur[base].clone());
        germ_now.divisor.dedup();
        let mut chart = chart;
        if !chart.divisor_components.iter().any(|(v, _)| *v == cur[base]) {
            chart.divisor_components.push((cur[base].clone(), 0));
        }
        result = apply_chart(&germ_now, &chart)?;
    }
    Ok(result)
}

/// Where a singular point sits on the divisor.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PointKind {
    /// Intersection with another divisor component; a curve in dimension three.
    Corner { other: String, curve: bool },
    /// A zero of the restricted coefficient system away from the corners.
    Point { multiplicity: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DivisorPoint {
    pub kind: PointKind,
    /// Coordinates in the chart of the transform.
    pub coords: Vec<Scalar>,
    /// Germ recentred at the point.
    pub germ: FoliationGerm,
    /// Chart from the recentred coordinates to the original ones.
    pub chart: ChartMap,
}

/// Singular points on the component `var = 0` of a transform.
pub fn singular_points_on_divisor(result: &TransformResult, var: &str) -> Result<Vec<DivisorPoint>> {
    let form = &result.form;
    let vars = form.vars().to_vec();
    let v = vars.iter().position(|w| w == var).ok_or_else(|| Error::UnknownVariable(var.into()))?;
    let others: Vec<usize> = result
        .divisor
        .iter()
        .filter_map(|d| vars.iter().position(|w| *w == d.var))
        .filter(|&i| i != v)
        .collect();
    let free: Vec<usize> = (0..vars.len()).filter(|i| *i != v && !others.contains(i)).collect();
    if free.len() > 1 {
        return Err(Error::UnexpectedShape(format!(
            "more than one free coordinate on {var} = 0; blow up an axis first"
        )));
    }
    let germ = result.germ();
    let mut out = Vec::new();
    for &o in &others {
        let at_corner = form.coeffs().iter().all(|c| {
            let r = c.restrict_zero(v).restrict_zero(o);
            free.iter().fold(r, |acc, &i| acc.restrict_zero(i)).is_zero()
        });
        let curve = !free.is_empty();
        if at_corner || curve {
            out.push(DivisorPoint {
                kind: PointKind::Corner { other: vars[o].clone(), curve },
                coords: vec![Scalar::zero(); vars.len()],
                germ: germ.clone(),
                chart: result.chart.clone(),
            });
        }
    }
    let Some(&u) = free.first() else {
        if others.is_empty() && form.coeffs().iter().all(|c| c.constant_term().is_zero()) {
            return Err(Error::UnexpectedShape("no free coordinate on the divisor".into()));
        }
        return Ok(out);
    };
    // restricted system in the free coordinate
    let mut polys: Vec<Poly> = Vec::new();
    for c in form.coeffs() {
        let mut r = c.restrict_zero(v);
        for &o in &others {
            let mut e = vec![0; vars.len()];
            e[o] = r.monomial_gcd()[o];
            r = r.divide_monomial(&e).expect("gcd divides").restrict_zero(o);
        }
        if !r.is_polynomial() && r.degree_in(u) as u32 >= r.order() {
            return Err(Error::Truncation("restricted coefficient not known exactly".into()));
        }
        let mut p: Poly = vec![Scalar::zero(); r.degree_in(u) as usize + 1];
        for (e, k) in r.terms() {
            if e.iter().enumerate().any(|(i, &x)| i != u && x > 0) {
                continue;
            }
            p[e[u] as usize] = k.clone();
        }
        polys.push(poly::trim(p));
    }
    let nonzero: Vec<&Poly> = polys.iter().filter(|p| !p.is_empty()).collect();
    if nonzero.is_empty() {
        if divisor_invariant(form, var)? {
            return Err(Error::UnexpectedShape(format!("{var} = 0 is a curve of singular points")));
        }
        return Ok(out);
    }
    let exact = nonzero.iter().all(|p| p.iter().all(Scalar::is_exact));
    let tol = 1e-8;
    let roots = if exact {
        let g = nonzero.iter().skip(1).fold(nonzero[0].clone(), |g, p| poly::gcd(&g, p));
        let mult_source = nonzero.iter().min_by_key(|p| p.len()).unwrap();
        poly::roots(&g, 1e-10)
            .into_iter()
            .map(|r| {
                let m = poly::roots(mult_source, 1e-10)
                    .into_iter()
                    .find(|s| s.value == r.value)
                    .map(|s| s.multiplicity)
                    .unwrap_or(r.multiplicity);
                poly::Root { value: r.value, multiplicity: m }
            })
            .collect::<Vec<_>>()
    } else {
        let base = nonzero.iter().min_by_key(|p| p.len()).unwrap();
        poly::roots(base, tol)
            .into_iter()
            .filter(|r| {
                nonzero.iter().all(|p| {
                    let scale = p.iter().map(Scalar::abs).fold(0.0, f64::max).max(1.0);
                    poly::eval_c64(p, r.value.to_c64()).norm() <= 1e-7 * scale
                })
            })
            .collect()
    };
    let mut roots = roots;
    roots.sort_by(|a, b| a.value.lex_cmp(&b.value));
    for r in roots {
        if r.value.is_negligible(tol) && !others.is_empty() {
            // the corner itself
            continue;
        }
        let tr = ChartMap::translation(&vars, u, r.value.clone());
        let local = FoliationGerm { form: form.translate(u, &r.value)?, divisor: vec![var.to_string()] };
        let mut coords = vec![Scalar::zero(); vars.len()];
        coords[u] = r.value.clone();
        out.push(DivisorPoint {
            kind: PointKind::Point { multiplicity: r.multiplicity },
            coords,
            germ: local,
            chart: result.chart.then(&tr)?,
        });
    }
    Ok(out)
}
