//! Subcommand orchestration and report assembly.

use std::collections::BTreeMap;
use std::path::Path;

use foliate::blowup::{apply_chart, blowup_axis_3d, blowup_point_2d, Axis, ChartMap, FoliationGerm, PointChart, TransformResult};
use foliate::criteria::{
    corollary4_check, family_classify, family_points, phi_map, prop5_check, theorem6_check, theorem7_check,
    HolonomyProbe, InvarianceProbe,
};
use foliate::holonomy::{
    cusp_chart, generator_table, holonomy_generators, holonomy_probe, invariance_probe, restrict_to_fiber, Generator,
    HolonomyMap, ProbeConfig, Thresholds,
};
use foliate::integral::{
    dicriticalness_section, pullback_integral, separatrix_family, verify_first_integral, verify_separatrix,
};
use foliate::verdict::Verdict;
use foliate::{Error, Scalar};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{AnalysisConfig, Setup};

pub const SCHEMA_VERSION: u32 = 1;

/// Failure of a whole command, mapped to the exit-code contract.
#[derive(Debug)]
pub enum CliError {
    Config(anyhow::Error),
    Run(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Run(e) => error_code(e),
        }
    }

    pub fn record(&self) -> ErrorRecord {
        match self {
            CliError::Config(e) => ErrorRecord { kind: "config".into(), message: format!("{e:#}"), exit_code: 2 },
            CliError::Run(e) => ErrorRecord::from(e),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e:#}"),
            CliError::Run(e) => write!(f, "{e}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Config(e)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

/// Errors that describe the input rather than a numeric breakdown.
fn error_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::DoubleRoot(_)
        | Error::Syntax { .. }
        | Error::UnknownVariable(_)
        | Error::VariableMismatch(_)
        | Error::NothingToBlowUp(_) => 2,
        _ => 3,
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::DivisionByZero => "division_by_zero",
        Error::VariableMismatch(_) => "variable_mismatch",
        Error::TopDegree(_) => "top_degree",
        Error::DegreeOverflow(..) => "degree_overflow",
        Error::Truncation(_) => "truncation",
        Error::ZeroForm => "zero_form",
        Error::Syntax { .. } => "syntax",
        Error::UnknownVariable(_) => "unknown_variable",
        Error::NothingToBlowUp(_) => "nothing_to_blow_up",
        Error::UnexpectedShape(_) => "unexpected_shape",
        Error::NotSingular(_) => "not_singular",
        Error::NotPreSimple(_) => "not_pre_simple",
        Error::DoubleRoot(_) => "double_root",
        Error::InvalidParams(_) => "invalid_params",
        Error::NotDicritical(_) => "not_dicritical",
        Error::RadiusTooLarge(_) => "radius_too_large",
        Error::TransversalityLost(_) => "transversality_lost",
        Error::Numeric(_) => "numeric",
        Error::Dicritical(_) => "dicritical_component",
        Error::Pole(_) => "pole",
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        ErrorRecord { kind: error_kind(e).into(), message: e.to_string(), exit_code: error_code(e) }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Tolerances {
    pub order: u32,
    pub tol: f64,
    pub t0: f64,
}

/// Everything a command produced. Maps are ordered, and no field depends on
/// the clock, so exact-mode reports are reproducible byte for byte.
#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub schema_version: u32,
    pub command: String,
    pub mode: &'static str,
    pub tolerances: Tolerances,
    pub config: AnalysisConfig,
    pub checks: BTreeMap<String, Verdict>,
    pub results: BTreeMap<String, Value>,
    pub errors: BTreeMap<String, ErrorRecord>,
}

impl Report {
    pub fn new(command: &str, setup: &Setup) -> Self {
        Report {
            tool: "foliate",
            version: env!("CARGO_PKG_VERSION"),
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            mode: if setup.float { "float" } else { "exact" },
            tolerances: Tolerances { order: setup.order, tol: setup.tol, t0: setup.config.holonomy.t0 },
            config: setup.config.clone(),
            checks: BTreeMap::new(),
            results: BTreeMap::new(),
            errors: BTreeMap::new(),
        }
    }

    /// 0 when nothing errored, otherwise the most severe error code.
    pub fn exit_code(&self) -> i32 {
        self.errors.values().map(|e| e.exit_code).max().unwrap_or(0)
    }

    fn verdict(&mut self, name: &str, v: Verdict) {
        self.checks.insert(name.into(), v);
    }

    fn result(&mut self, name: &str, v: impl Serialize) {
        self.results.insert(name.into(), serde_json::to_value(v).unwrap_or(Value::Null));
    }

    fn error(&mut self, name: &str, e: &Error) {
        self.errors.insert(name.into(), ErrorRecord::from(e));
    }

    /// One line per check and per error.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.checks {
            let status = serde_json::to_value(v.status).unwrap_or(Value::Null);
            out.push_str(&format!("{k}: {} ({})\n", status.as_str().unwrap_or("?"), v.reason));
        }
        for (k, e) in &self.errors {
            out.push_str(&format!("{k}: error [{}] {}\n", e.kind, e.message));
        }
        out
    }
}

/// Projective holonomy of the special component of the planar form.
pub struct HolonomyData {
    pub transform: TransformResult,
    pub component: String,
    pub generators: Vec<Generator>,
}

pub fn holonomy_data(setup: &Setup) -> Result<HolonomyData, Error> {
    let (chart, component) = match &setup.config.holonomy.component {
        Some(c) => (ChartMap::identity(setup.planar.vars()), c.clone()),
        None => cusp_chart(setup.planar.vars(), setup.params.k),
    };
    let germ = FoliationGerm::new(setup.planar.clone(), &[]);
    let transform = apply_chart(&germ, &chart)?;
    let generators = if germ.is_singular() { holonomy_generators(&transform, &component)? } else { Vec::new() };
    Ok(HolonomyData { transform, component, generators })
}

fn probe_config(setup: &Setup) -> ProbeConfig {
    ProbeConfig { t0: setup.config.holonomy.t0, ..ProbeConfig::default() }
}

fn invariance(setup: &Setup, hol: &HolonomyData) -> Result<Option<InvarianceProbe>, Error> {
    let Some(cand) = &setup.candidate else { return Ok(None) };
    let Some(base) = hol.generators.iter().find_map(|g| match &g.map {
        HolonomyMap::Lift { loops, .. } => loops.first().map(|l| l.base),
        _ => None,
    }) else {
        return Ok(None);
    };
    let r = restrict_to_fiber(&cand.num, &cand.den, &hol.transform, &hol.component, base)?;
    let maps: Vec<HolonomyMap> = hol.generators.iter().map(|g| g.map.clone()).collect();
    let t0 = setup.config.holonomy.t0;
    let samples = [Complex64::new(t0, 0.0), Complex64::new(0.0, 0.6 * t0)];
    let th = Thresholds { holds: setup.tol, ..Thresholds::default() };
    invariance_probe(&maps, &r, &samples, &th).map(Some)
}

/// Pullback of the candidate through `(x, y, z) -> (x^p y^q, z)`, checked on
/// the three-dimensional form.
fn first_integral_3d(setup: &Setup) -> Option<Result<Verdict, Error>> {
    let cand = setup.candidate.as_ref()?;
    if setup.overridden || !setup.params.alpha_is_exact() {
        return None;
    }
    let run = || {
        let f = pullback_integral(cand, &phi_map(setup.params.p, setup.params.q))?;
        verify_first_integral(&f, &setup.params.form_3d()?)
    };
    Some(run())
}

/// The resonant pipeline excludes `alpha = +-4`.
fn refuse_boundary(setup: &Setup) -> Result<(), CliError> {
    let resonant = ["thm6", "thm7", "section"].iter().any(|c| setup.config.wants(c));
    if resonant && setup.boundary() && !setup.overridden {
        return Err(CliError::Run(Error::DoubleRoot(
            "2y^2 + alpha*y + 2 has a double root: alpha = +-4 is the boundary r = 0, outside the resonant pipeline"
                .into(),
        )));
    }
    Ok(())
}

pub fn run_analyze(setup: &Setup) -> Result<Report, CliError> {
    refuse_boundary(setup)?;
    let mut rep = Report::new("analyze", setup);
    let (params, order) = (&setup.params, setup.order);
    let needs_holonomy = ["cor4", "thm6", "holonomy"].iter().any(|c| setup.config.wants(c));
    let hol = if needs_holonomy {
        match holonomy_data(setup) {
            Ok(h) => Some(h),
            Err(e) => {
                rep.error("holonomy", &e);
                None
            }
        }
    } else {
        None
    };
    if setup.config.wants("prop5") {
        rep.verdict("prop5", prop5_check(params, order));
    }
    if setup.config.wants("cor4") {
        let bare = corollary4_check(params.k, params.n, &params.alpha_sq, None);
        let v = match (&hol, bare.is_holds() || bare.is_fails()) {
            (Some(h), false) => match holonomy_probe(&h.generators, &probe_config(setup)) {
                Ok(probe) => corollary4_check(params.k, params.n, &params.alpha_sq, Some(&probe)),
                Err(e) => {
                    rep.error("cor4", &e);
                    bare
                }
            },
            _ => bare,
        };
        rep.verdict("cor4", v);
    }
    if setup.config.wants("holonomy") {
        if let Some(h) = &hol {
            holonomy_results(&mut rep, setup, h);
        }
    }
    if setup.config.wants("thm6") {
        let probe = match &hol {
            Some(h) if params.k == 2 * params.n => invariance(setup, h).unwrap_or_else(|e| {
                rep.error("thm6", &e);
                None
            }),
            _ => None,
        };
        rep.verdict("thm6", theorem6_check(params, probe.as_ref(), order));
        first_integral_results(&mut rep, setup);
    }
    if setup.config.wants("thm7") || setup.config.wants("section") {
        let section = section_result(&mut rep, setup);
        if setup.config.wants("thm7") {
            match theorem7_check(params, true, section, order) {
                Ok(v) => rep.verdict("thm7", v),
                Err(e) => rep.error("thm7", &e),
            }
        }
    }
    Ok(rep)
}

fn first_integral_results(rep: &mut Report, setup: &Setup) {
    let Some(cand) = &setup.candidate else { return };
    match verify_first_integral(cand, &setup.planar) {
        Ok(v) => rep.result("first_integral", v),
        Err(e) => rep.error("first_integral", &e),
    }
    match first_integral_3d(setup) {
        Some(Ok(v)) => rep.result("first_integral_3d", v),
        Some(Err(e)) => rep.error("first_integral_3d", &e),
        None => {}
    }
}

/// Records the section and returns it for the dicriticalness verdict.
fn section_result(rep: &mut Report, setup: &Setup) -> Option<Value> {
    match dicriticalness_section(&setup.params, &setup.fdata, setup.order) {
        Ok(s) => {
            let v = serde_json::to_value(&s).unwrap_or(Value::Null);
            rep.result("section", &v);
            Some(v)
        }
        Err(Error::NotDicritical(reason)) => {
            rep.result("section", json!({ "constructed": false, "reason": reason }));
            None
        }
        Err(e) => {
            rep.error("section", &e);
            None
        }
    }
}

fn holonomy_results(rep: &mut Report, setup: &Setup, h: &HolonomyData) {
    let t0 = setup.config.holonomy.t0;
    match generator_table(&h.generators, t0, 1e-5) {
        Ok(rows) => rep.result(
            "holonomy",
            json!({
                "component": h.component,
                "chart": h.transform.chart.label,
                "generators": rows,
            }),
        ),
        Err(e) => rep.error("holonomy", &e),
    }
    if h.generators.len() > 1 {
        match holonomy_probe(&h.generators, &probe_config(setup)) {
            Ok(p) => rep.result("holonomy_probe", p),
            Err(e) => rep.error("holonomy_probe", &e),
        }
    } else {
        rep.result("holonomy_probe", HolonomyProbe::default());
    }
}

pub fn run_holonomy(setup: &Setup, csv_path: Option<&Path>) -> Result<Report, CliError> {
    let mut rep = Report::new("holonomy", setup);
    let h = holonomy_data(setup)?;
    holonomy_results(&mut rep, setup, &h);
    if let Some(path) = csv_path {
        write_orbits(setup, &h.generators, path).map_err(CliError::Config)?;
        rep.result("csv", path.display().to_string());
    }
    Ok(rep)
}

/// Images of sample points on `|t| = t0` under every generator.
fn write_orbits(setup: &Setup, gens: &[Generator], path: &Path) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["sample_t_re", "sample_t_im", "image_re", "image_im", "generator_id"])?;
    let n = setup.config.holonomy.samples.max(1);
    for g in gens {
        for j in 0..n {
            let t = Complex64::from_polar(setup.config.holonomy.t0, std::f64::consts::TAU * j as f64 / n as f64);
            let img = g.map.eval(t).map_err(|e| anyhow::anyhow!("{}: {e}", g.id))?;
            w.write_record([t.re.to_string(), t.im.to_string(), img.re.to_string(), img.im.to_string(), g.id.clone()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn run_classify(setup: &Setup) -> Result<Report, CliError> {
    let mut rep = Report::new("classify", setup);
    let (params, order) = (&setup.params, setup.order);
    if params.k == 2 * params.n {
        rep.result("family", family_classify(params, order)?);
    } else {
        rep.result("points", family_points(params, order)?);
        rep.verdict("prop5", prop5_check(params, order));
    }
    Ok(rep)
}

/// `steps` rounds of blow-ups. In three dimensions a round is `p` blow-ups of
/// the `y`-axis followed by `q` of the `x`-axis, so `n` rounds give
/// `z = (x^p y^q)^n w`; in the plane a round is one point blow-up.
pub fn run_blowup(setup: &Setup, steps: u32, planar: bool) -> Result<Report, CliError> {
    let mut rep = Report::new("blowup", setup);
    let mut trace = Vec::new();
    if planar {
        let mut germ = FoliationGerm::new(setup.planar.clone(), &[]);
        trace.push(json!({ "step": 0, "form": germ.form.to_string() }));
        for step in 1..=steps {
            let r = blowup_point_2d(&germ, PointChart::Main)?;
            let mut entry = r.report();
            entry["step"] = json!(step);
            trace.push(entry);
            germ = r.germ();
        }
    } else {
        let form = setup.params.form_3d()?;
        let mut germ = FoliationGerm::new(form, &["x", "y"]);
        trace.push(json!({ "step": 0, "form": germ.form.display_factored() }));
        for step in 1..=steps {
            let r = blowup_axis_3d(&germ, Axis::Y, setup.params.p)?;
            let r = blowup_axis_3d(&r.germ(), Axis::X, setup.params.q)?;
            let mut entry = r.report();
            entry["step"] = json!(step);
            trace.push(entry);
            germ = r.germ();
        }
    }
    rep.result("blowup", trace);
    Ok(rep)
}

/// The last transform of a blow-up report, as text.
pub fn final_form(rep: &Report) -> Option<String> {
    rep.results.get("blowup")?.as_array()?.last()?.get("form")?.as_str().map(str::to_string)
}

pub fn run_section(setup: &Setup) -> Result<Report, CliError> {
    refuse_boundary(setup)?;
    let mut rep = Report::new("section", setup);
    let section = section_result(&mut rep, setup);
    rep.verdict("thm7", theorem7_check(&setup.params, true, section, setup.order)?);
    Ok(rep)
}

pub fn run_verify_integral(setup: &Setup, separatrix: Option<&Scalar>) -> Result<Report, CliError> {
    if setup.candidate.is_none() && separatrix.is_none() {
        return Err(CliError::Config(anyhow::anyhow!("nothing to verify: give candidate.first_integral or --separatrix")));
    }
    let mut rep = Report::new("verify-integral", setup);
    if let Some(cand) = &setup.candidate {
        rep.verdict("first_integral", verify_first_integral(cand, &setup.planar)?);
        if let Some(v) = first_integral_3d(setup) {
            rep.verdict("first_integral_3d", v?);
        }
    }
    if let Some(c) = separatrix {
        let curve = separatrix_family(&setup.params, c, setup.order)?;
        rep.verdict("separatrix", verify_separatrix(&curve, &setup.params.shadow_form().0)?);
    }
    Ok(rep)
}
