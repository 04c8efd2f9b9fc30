//! TOML analysis configuration.
//!
//! ```toml
//! [family]
//! p = 1
//! q = 1
//! k = 2
//! n = 1
//! alpha = "5"          # or alpha_sq = "17"
//! u = "1"              # unit U(t)
//! f = "x*y"            # monomial x^p*y^q, the default
//!
//! [family.monomialization]   # instead of a monomial f
//! a = 1
//! b = 1
//! v = "1 + x"
//!
//! [analysis]
//! order = 10
//! tol = 1e-6
//! checks = ["prop5", "cor4", "thm6", "thm7", "holonomy", "section"]
//!
//! [candidate]
//! first_integral = "(t + 2*z)^4/(2*t + z)"
//!
//! [holonomy]
//! t0 = 0.05
//! form = "d(z^2 + t^3) + t*(2*t*dz - 3*z*dt)"   # replaces the planar form
//! component = "z"      # with `form`: the form is already resolved along z = 0
//! ```

use std::path::Path;

use anyhow::{bail, ensure, Context};
use foliate::criteria::FamilyParams;
use foliate::form::DiffForm;
use foliate::integral::{FData, MeroFunction};
use foliate::parse::{parse_form, parse_scalar, parse_series};
use foliate::series::{names, EXACT_ORDER};
use foliate::Scalar;
use serde::{Deserialize, Serialize};

pub const CHECKS: [&str; 6] = ["prop5", "cor4", "thm6", "thm7", "holonomy", "section"];

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub family: FamilyConfig,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub candidate: CandidateSection,
    #[serde(default)]
    pub holonomy: HolonomySection,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub p: u32,
    pub q: u32,
    pub k: u32,
    pub n: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_sq: Option<String>,
    #[serde(default = "one")]
    pub u: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monomialization: Option<Monomialization>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Monomialization {
    pub a: u32,
    pub b: u32,
    pub v: String,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    #[serde(default = "default_order")]
    pub order: u32,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_checks")]
    pub checks: Vec<String>,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection { order: default_order(), tol: default_tol(), checks: default_checks() }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_integral: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct HolonomySection {
    #[serde(default = "default_t0")]
    pub t0: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
    /// Invariant curve `var = 0` of an already resolved form; skips the cusp chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub component: Option<String>,
    /// Orbit samples per generator written to CSV.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

impl Default for HolonomySection {
    fn default() -> Self {
        HolonomySection { t0: default_t0(), form: None, component: None, samples: default_samples() }
    }
}

fn one() -> String {
    "1".into()
}
fn default_order() -> u32 {
    10
}
fn default_tol() -> f64 {
    1e-6
}
fn default_t0() -> f64 {
    0.05
}
fn default_samples() -> usize {
    8
}
fn default_checks() -> Vec<String> {
    CHECKS.iter().map(|s| s.to_string()).collect()
}

impl AnalysisConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn wants(&self, check: &str) -> bool {
        self.analysis.checks.iter().any(|c| c == check)
    }
}

/// A validated configuration with parsed expressions.
#[derive(Clone, Debug)]
pub struct Setup {
    pub config: AnalysisConfig,
    pub params: FamilyParams,
    pub fdata: FData,
    /// Planar form, either the family's shadow or the override.
    pub planar: DiffForm,
    pub overridden: bool,
    pub candidate: Option<MeroFunction>,
    pub order: u32,
    pub tol: f64,
    pub float: bool,
}

impl Setup {
    pub fn new(config: AnalysisConfig, float: bool) -> anyhow::Result<Self> {
        let fam = &config.family;
        for c in &config.analysis.checks {
            ensure!(CHECKS.contains(&c.as_str()), "unknown check `{c}`; expected one of {CHECKS:?}");
        }
        ensure!(config.analysis.tol > 0.0, "tol must be positive");
        ensure!(config.holonomy.t0 > 0.0, "holonomy.t0 must be positive");
        let order = config.analysis.order;
        let tol = config.analysis.tol;
        let u = parse_series(&fam.u, &names(&["t"]), EXACT_ORDER).context("family.u")?;
        let u = if u.is_polynomial() { u } else { u.with_order(order) };
        let params = match (&fam.alpha, &fam.alpha_sq) {
            (Some(a), None) => {
                let a = parse_scalar(a).context("family.alpha")?;
                FamilyParams::new(fam.p, fam.q, fam.k, fam.n, if float { a.to_float() } else { a }, u)?
            }
            (None, Some(a2)) => {
                let a2 = parse_scalar(a2).context("family.alpha_sq")?;
                FamilyParams::from_alpha_sq(fam.p, fam.q, fam.k, fam.n, if float { a2.to_float() } else { a2 }, u)?
            }
            _ => bail!("give exactly one of family.alpha and family.alpha_sq"),
        };
        let fdata = match (&fam.f, &fam.monomialization) {
            (Some(_), Some(_)) => bail!("give family.f or family.monomialization, not both"),
            (Some(f), None) => monomial_f(f, fam.p, fam.q)?,
            (None, Some(m)) => {
                let v = parse_series(&m.v, &names(&["x", "y"]), order).context("family.monomialization.v")?;
                ensure!(!v.constant_term().is_zero(), "monomialization unit V must not vanish at the origin");
                FData::Monomialized { a: m.a, b: m.b, v }
            }
            (None, None) => FData::Monomial { p1: fam.p, p2: fam.q },
        };
        let (planar, overridden) = match &config.holonomy.form {
            Some(text) => (parse_form(text, &names(&["t", "z"]), EXACT_ORDER).context("holonomy.form")?, true),
            None => (params.shadow_form().0, false),
        };
        if let Some(c) = &config.holonomy.component {
            ensure!(overridden, "holonomy.component needs holonomy.form");
            ensure!(planar.vars().contains(c), "holonomy.component must be t or z, got `{c}`");
        }
        let candidate = match &config.candidate.first_integral {
            Some(text) => Some(candidate(text)?),
            None => None,
        };
        Ok(Setup { config, params, fdata, planar, overridden, candidate, order, tol, float })
    }

    /// `alpha = +-4` has a double root and sits outside the resonant pipeline.
    pub fn boundary(&self) -> bool {
        (&self.params.alpha_sq - &Scalar::int(16)).is_negligible(1e-12)
    }
}

/// `x^p*y^q`, checked against the family exponents.
fn monomial_f(text: &str, p: u32, q: u32) -> anyhow::Result<FData> {
    let f = parse_series(text, &names(&["x", "y"]), EXACT_ORDER).context("family.f")?;
    let terms: Vec<_> = f.terms().collect();
    ensure!(
        terms.len() == 1 && terms[0].1.is_one(),
        "family.f = {text} is not a monomial; give family.monomialization instead"
    );
    let e = terms[0].0;
    ensure!(e[0] == p && e[1] == q, "family.f = {text} does not match p = {p}, q = {q}");
    Ok(FData::Monomial { p1: p, p2: q })
}

/// A candidate in the planar variables `t, z`.
fn candidate(text: &str) -> anyhow::Result<MeroFunction> {
    MeroFunction::parse(text, &names(&["t", "z"])).context("candidate.first_integral")
}
