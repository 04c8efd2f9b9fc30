//! Substitution maps between coordinate systems and pullback of forms.

use crate::error::{Error, Result};
use crate::form::{basis, DiffForm};
use crate::scalar::Scalar;
use crate::series::{TruncSeries, EXACT_ORDER};

/// A map from the source coordinates to the target coordinates, given by one
/// series in the source variables per target variable.
#[derive(Clone, Debug, PartialEq)]
pub struct SubstitutionMap {
    source: Vec<String>,
    target: Vec<String>,
    comps: Vec<TruncSeries>,
}

impl SubstitutionMap {
    pub fn new(source: &[String], target: &[String], comps: Vec<TruncSeries>) -> Result<Self> {
        if comps.len() != target.len() {
            return Err(Error::VariableMismatch(format!(
                "{} components for {} target variables",
                comps.len(),
                target.len()
            )));
        }
        if let Some(c) = comps.iter().find(|c| c.vars() != source) {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", c.vars(), source)));
        }
        Ok(SubstitutionMap { source: source.to_vec(), target: target.to_vec(), comps })
    }

    pub fn identity(vars: &[String]) -> Self {
        let comps = (0..vars.len()).map(|i| TruncSeries::var(vars, EXACT_ORDER, i)).collect();
        SubstitutionMap { source: vars.to_vec(), target: vars.to_vec(), comps }
    }

    /// The monomial map `target_j = c_j * prod_i source_i^{m[i][j]}`;
    /// column `j` of `m` holds the exponents of target variable `j`.
    pub fn monomial(source: &[String], target: &[String], m: &[Vec<u32>], coeffs: &[Scalar]) -> Self {
        let comps = (0..target.len())
            .map(|j| {
                let e = (0..source.len()).map(|i| m[i][j]).collect();
                TruncSeries::monomial(source, EXACT_ORDER, e, coeffs[j].clone())
            })
            .collect();
        SubstitutionMap { source: source.to_vec(), target: target.to_vec(), comps }
    }

    /// `x_i -> x_i + c` on a single variable.
    pub fn translation(vars: &[String], i: usize, c: Scalar) -> Self {
        let mut map = Self::identity(vars);
        map.comps[i] = &map.comps[i] + &TruncSeries::constant(vars, EXACT_ORDER, c);
        map
    }

    pub fn source(&self) -> &[String] {
        &self.source
    }

    pub fn target(&self) -> &[String] {
        &self.target
    }

    pub fn comps(&self) -> &[TruncSeries] {
        &self.comps
    }

    pub fn with_source_names(&self, names: &[String]) -> Self {
        SubstitutionMap {
            source: names.to_vec(),
            target: self.target.clone(),
            comps: self.comps.iter().map(|c| c.rename(names)).collect(),
        }
    }

    /// `self` after `inner`: `(self o inner)(a) = self(inner(a))`.
    pub fn compose(&self, inner: &SubstitutionMap) -> Result<SubstitutionMap> {
        if inner.target != self.source {
            return Err(Error::VariableMismatch(format!(
                "cannot chain {:?} into {:?}",
                inner.target, self.source
            )));
        }
        let comps = self
            .comps
            .iter()
            .map(|c| c.compose(&inner.comps, &inner.source))
            .collect::<Result<_>>()?;
        Ok(SubstitutionMap { source: inner.source.clone(), target: self.target.clone(), comps })
    }

    pub fn pullback_series(&self, f: &TruncSeries) -> Result<TruncSeries> {
        if f.vars() != self.target {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", f.vars(), self.target)));
        }
        f.compose(&self.comps, &self.source)
    }

    pub fn pullback(&self, w: &DiffForm) -> Result<DiffForm> {
        if w.vars() != self.target {
            return Err(Error::VariableMismatch(format!("{:?} vs {:?}", w.vars(), self.target)));
        }
        let d = w.degree();
        if d > self.source.len() {
            return Err(Error::DegreeOverflow(d, 0));
        }
        if d == 0 {
            return Ok(DiffForm::function(self.pullback_series(&w.coeffs()[0])?));
        }
        let dphi: Vec<DiffForm> = self
            .comps
            .iter()
            .map(|c| DiffForm::function(c.clone()).d())
            .collect::<Result<_>>()?;
        let mut out: Option<DiffForm> = None;
        for (mask, c) in basis(self.target.len(), d).into_iter().zip(w.coeffs()) {
            if c.is_zero() {
                continue;
            }
            let mut piece = DiffForm::function(self.pullback_series(c)?);
            for (j, dp) in dphi.iter().enumerate() {
                if mask & (1 << j) != 0 {
                    piece = piece.wedge(dp)?;
                }
            }
            out = Some(match out {
                None => piece,
                Some(acc) => &acc + &piece,
            });
        }
        let order = w.order();
        Ok(out.unwrap_or_else(|| DiffForm::zero(&self.source, d, order)))
    }

    /// Numeric evaluation of the map.
    pub fn eval_c64(&self, point: &[num_complex::Complex64]) -> Vec<num_complex::Complex64> {
        self.comps.iter().map(|c| c.eval_c64(point)).collect()
    }
}
