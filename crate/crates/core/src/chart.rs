//! Parametric hypersurface charts.
//!
//! A chart is one expression per ambient coordinate over `n` named
//! parameters, a closed domain box, and optional positivity constraints
//! that carve excluded loci (a cone chart removes its vertex with
//! `require v`, i.e. admissible points satisfy `v > 0`).

use crate::error::{GeomError, Result};
use crate::expr::{parse, Expr};
use crate::jet::{eval_jet3, Jet3};
use crate::linalg::AmbientMetric;
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct ImmersionChart {
    pub name: String,
    /// Parameter names; their order fixes the orientation of the normal.
    pub vars: Vec<String>,
    /// One expression per ambient coordinate (`ambient.dim()` of them).
    pub components: Vec<Expr>,
    pub ambient: AmbientMetric,
    /// Closed interval per parameter.
    pub domain: Vec<(f64, f64)>,
    /// Admissible points must evaluate every entry to a strictly positive
    /// value; zero sets of these expressions are removed loci.
    pub require: Vec<Expr>,
    /// Named constants available to the expressions.
    pub params: BTreeMap<String, f64>,
}

impl ImmersionChart {
    /// Parse a chart from expression sources.
    #[allow(clippy::too_many_arguments)]
    pub fn parse_new(
        name: &str,
        vars: &[&str],
        components: &[&str],
        ambient: AmbientMetric,
        domain: &[(f64, f64)],
        require: &[&str],
        params: BTreeMap<String, f64>,
    ) -> Result<Self> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        if components.len() != ambient.dim() {
            return Err(GeomError::Config(format!(
                "chart `{name}`: {} components for ambient dimension {}",
                components.len(),
                ambient.dim()
            )));
        }
        if domain.len() != vars.len() {
            return Err(GeomError::Config(format!(
                "chart `{name}`: {} domain intervals for {} variables",
                domain.len(),
                vars.len()
            )));
        }
        if vars.is_empty() || ambient.dim() != vars.len() + 1 {
            return Err(GeomError::Config(format!(
                "chart `{name}`: a hypersurface needs ambient dimension = variables + 1"
            )));
        }
        for (lo, hi) in domain {
            if !(lo < hi) {
                return Err(GeomError::Config(format!(
                    "chart `{name}`: empty domain interval [{lo}, {hi}]"
                )));
            }
        }
        let components = components
            .iter()
            .map(|src| parse(src, &vars, &params))
            .collect::<Result<Vec<_>>>()?;
        let require = require
            .iter()
            .map(|src| parse(src, &vars, &params))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_string(),
            vars,
            components,
            ambient,
            domain,
            require,
            params,
        })
    }

    pub fn n(&self) -> usize {
        self.vars.len()
    }

    /// Domain-box and excluded-locus admissibility.
    pub fn admissible(&self, point: &[f64]) -> bool {
        if point.len() != self.n() {
            return false;
        }
        for (p, (lo, hi)) in point.iter().zip(&self.domain) {
            if p < lo || p > hi {
                return false;
            }
        }
        for pred in &self.require {
            match eval_jet3(pred, point, &self.params) {
                Ok(j) if j.v > 0.0 => {}
                _ => return false,
            }
        }
        true
    }

    /// Third-order jets of every ambient component at `point`. This is the
    /// sole input the frame computation consumes.
    pub fn eval(&self, point: &[f64]) -> Result<Vec<Jet3>> {
        if !self.admissible(point) {
            return Err(GeomError::OutOfDomain(point.to_vec()));
        }
        self.components
            .iter()
            .map(|c| eval_jet3(c, point, &self.params))
            .collect()
    }
}
