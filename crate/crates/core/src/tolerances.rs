//! Operational thresholds, overridable per run.
//!
//! These gate *decisions* (soliton verdicts, classification branches,
//! degeneracy detection). The tolerances of the certified identities
//! themselves are fixed constants in [`crate::verify`].

use crate::error::{GeomError, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Tolerances {
    /// Normalized soliton residual at or below which a chart is a soliton.
    pub soliton: f64,
    /// Upper edge of the borderline band; residuals in (soliton, borderline]
    /// are reported but not classified.
    pub borderline: f64,
    /// Scale factor of the support-function zero band:
    /// `|lambda| <= lambda * (1 + max |x|)` counts as zero.
    pub lambda: f64,
    /// Mean curvature at or below this is treated as zero (hyperplane branch).
    pub alpha: f64,
    /// Max-norm distance from A to its trace part allowed by the umbilicity
    /// certificate.
    pub umbilic: f64,
    /// Variance bound for fitted constants (normal direction, offset, center).
    pub variance: f64,
    /// Bound for the cone certificates.
    pub certificate: f64,
    /// Scale factor of the metric degeneracy floor:
    /// `|det g| > metric * scale^n` with scale the largest tangent row norm.
    pub metric: f64,
    /// Eigenvalue clustering width factor for shape-operator type detection.
    pub cluster: f64,
    /// Euclidean distance to the origin below which the radial field of a
    /// cone is not defined.
    pub radius: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            soliton: 1e-8,
            borderline: 1e-4,
            lambda: 1e-7,
            alpha: 1e-7,
            umbilic: 1e-8,
            variance: 1e-8,
            certificate: 1e-8,
            metric: 1e-10,
            cluster: 1e-7,
            radius: 1e-8,
        }
    }
}

impl Tolerances {
    /// Set a threshold by its CLI name (`--tol name=value`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !(value.is_finite() && value > 0.0) {
            return Err(GeomError::Config(format!(
                "tolerance `{name}` must be a positive finite number, got {value}"
            )));
        }
        match name {
            "soliton" => self.soliton = value,
            "borderline" => self.borderline = value,
            "lambda" => self.lambda = value,
            "alpha" => self.alpha = value,
            "umbilic" => self.umbilic = value,
            "variance" => self.variance = value,
            "certificate" => self.certificate = value,
            "metric" => self.metric = value,
            "cluster" => self.cluster = value,
            "radius" => self.radius = value,
            other => {
                return Err(GeomError::Config(format!("unknown tolerance `{other}`")))
            }
        }
        Ok(())
    }

    /// Width of the `lambda = 0` band for samples whose largest Euclidean
    /// position norm is `max_x`.
    pub fn lambda_band(&self, max_x: f64) -> f64 {
        self.lambda * (1.0 + max_x)
    }
}
