//! Signature-aware linear algebra over the flat ambient metric.
//!
//! The ambient space is R^m with the diagonal metric
//! `diag(-1 x index, +1 x (m - index))` — negative axes first. Everything
//! here is plain dense arithmetic specialised to that metric: the indefinite
//! dot product, the metric-raised generalized cross product that yields the
//! normal direction of a parametric hypersurface, and normalization of
//! non-null vectors.

use crate::error::{GeomError, Result};
use nalgebra::{DMatrix, DVector};

/// Scale-invariant threshold under which `g(w,w)` counts as lightlike:
/// `|g(w,w)| <= NULL_NORMAL_REL * |w|_euclid^2`.
pub const NULL_NORMAL_REL: f64 = 1e-10;

/// Flat pseudo-Euclidean metric of dimension `dim` and index `index`
/// (number of negative axes; they come first).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AmbientMetric {
    dim: usize,
    index: usize,
}

impl AmbientMetric {
    pub fn new(dim: usize, index: usize) -> Result<Self> {
        if dim == 0 || index > dim {
            return Err(GeomError::BadSignature { dim, index });
        }
        Ok(Self { dim, index })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self { dim, index: 0 }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn index(&self) -> usize {
        self.index
    }

    /// Sign of coordinate axis `a`: -1 for `a < index`, +1 otherwise.
    #[inline]
    pub fn sign(&self, a: usize) -> f64 {
        if a < self.index {
            -1.0
        } else {
            1.0
        }
    }

    /// Indefinite dot product `sum_a sign(a) * x_a * y_a`.
    ///
    /// Panics on length mismatch; the lengths are a structural contract of
    /// every caller in this crate.
    pub fn dot(&self, a: &[f64], b: &[f64]) -> f64 {
        assert_eq!(a.len(), self.dim, "ambient dot: left vector has wrong length");
        assert_eq!(b.len(), self.dim, "ambient dot: right vector has wrong length");
        let mut acc = 0.0;
        for i in 0..self.dim {
            acc += self.sign(i) * a[i] * b[i];
        }
        acc
    }

    pub fn dot_v(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.dot(a.as_slice(), b.as_slice())
    }

    /// Raise (equivalently lower) the index of a covector: flips the first
    /// `index` components.
    pub fn raise(&self, w: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.dim, |i, _| self.sign(i) * w[i])
    }
}

/// Metric-orthogonal complement direction of `n = dim - 1` tangent vectors,
/// given as the rows of `tangents`.
///
/// The covector `v -> det(t_1, ..., t_n, v)` is computed by cofactor
/// expansion and its index raised with the ambient metric, so the result `w`
/// satisfies `g(w, t_i) = 0` for every row. `w` vanishes exactly when the
/// rows are linearly dependent; the zero vector is returned in that case and
/// the caller decides.
pub fn generalized_cross(tangents: &DMatrix<f64>, ambient: &AmbientMetric) -> DVector<f64> {
    let m = ambient.dim();
    let n = m - 1;
    assert_eq!(tangents.nrows(), n, "generalized cross: need dim-1 tangent rows");
    assert_eq!(tangents.ncols(), m, "generalized cross: tangent rows have wrong length");

    let mut cov = DVector::zeros(m);
    for a in 0..m {
        // minor with column a removed
        let mut minor = DMatrix::zeros(n, n);
        let mut col = 0;
        for c in 0..m {
            if c == a {
                continue;
            }
            for r in 0..n {
                minor[(r, col)] = tangents[(r, c)];
            }
            col += 1;
        }
        let sign = if (n + a) % 2 == 0 { 1.0 } else { -1.0 };
        cov[a] = sign * minor.determinant();
    }
    ambient.raise(&cov)
}

/// Normalize a non-null vector to unit causal character.
///
/// Returns `(w / sqrt(|g(w,w)|), sign(g(w,w)))`. Fails with `NullNormal`
/// when `|g(w,w)|` is below `NULL_NORMAL_REL` times the squared Euclidean
/// norm, i.e. when the direction is lightlike or zero.
pub fn normalize_normal(w: &DVector<f64>, ambient: &AmbientMetric) -> Result<(DVector<f64>, f64)> {
    let q = ambient.dot_v(w, w);
    let euclid_sq = w.norm_squared();
    if q.abs() <= NULL_NORMAL_REL * euclid_sq || euclid_sq == 0.0 {
        return Err(GeomError::NullNormal { point: Vec::new() });
    }
    let scale = q.abs().sqrt();
    Ok((w / scale, q.signum()))
}

/// Induced metric at a point: components, inverse and determinant.
#[derive(Debug, Clone)]
pub struct MetricMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    det: f64,
}

impl MetricMatrix {
    /// Builds the metric from its (symmetric) component matrix.
    ///
    /// `degeneracy_floor` is the caller's scale-aware lower bound on
    /// `|det g|`; at or below it the point counts as lightlike and the
    /// construction fails.
    pub fn new(entries: DMatrix<f64>, degeneracy_floor: f64) -> Result<Self> {
        let det = entries.clone().determinant();
        if !det.is_finite() || det.abs() <= degeneracy_floor {
            return Err(GeomError::DegenerateMetric { point: Vec::new(), det });
        }
        let inverse = entries
            .clone()
            .try_inverse()
            .ok_or(GeomError::DegenerateMetric { point: Vec::new(), det })?;
        Ok(Self { entries, inverse, det })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// `g(a, b)` for chart-component vectors.
    pub fn pairing(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        (a.transpose() * &self.entries * b)[(0, 0)]
    }
}

/// Max-norm of a matrix (largest absolute entry).
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(parts: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(parts)
    }

    #[test]
    fn dot_respects_signature() {
        let g1 = AmbientMetric::new(3, 1).unwrap();
        assert_eq!(g1.dot(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0]), -1.0);
        let g0 = AmbientMetric::euclidean(3);
        assert_eq!(g0.dot(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 14.0);
        // lightlike direction
        assert_eq!(g1.dot(&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]), 0.0);
    }

    #[test]
    #[should_panic(expected = "wrong length")]
    fn dot_rejects_mismatched_lengths() {
        let g = AmbientMetric::euclidean(3);
        g.dot(&[1.0, 2.0], &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn cross_matches_euclidean_convention() {
        let g = AmbientMetric::euclidean(3);
        let t = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        let w = generalized_cross(&t, &g);
        assert_eq!(w, v(&[0.0, 0.0, 1.0]));
    }

    #[test]
    fn cross_raises_against_timelike_axis() {
        // t1 = e2, t2 = e3 in E^3_1: the cofactor covector is e1, raising
        // flips its sign.
        let g = AmbientMetric::new(3, 1).unwrap();
        let t = DMatrix::from_row_slice(2, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let w = generalized_cross(&t, &g);
        assert_eq!(w, v(&[-1.0, 0.0, 0.0]));
        for r in 0..2 {
            assert_eq!(g.dot_v(&w, &t.row(r).transpose()), 0.0);
        }
    }

    #[test]
    fn cross_of_dependent_rows_is_zero() {
        let g = AmbientMetric::euclidean(3);
        let t = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 1.0, 2.0, 3.0]);
        let w = generalized_cross(&t, &g);
        assert!(w.norm() == 0.0);
    }

    #[test]
    fn normalize_spacelike_and_timelike() {
        let g = AmbientMetric::new(3, 1).unwrap();
        let (n, eps) = normalize_normal(&v(&[0.0, 0.0, 2.0]), &g).unwrap();
        assert_eq!(n, v(&[0.0, 0.0, 1.0]));
        assert_eq!(eps, 1.0);

        let (n, eps) = normalize_normal(&v(&[2.0, 0.0, 0.0]), &g).unwrap();
        assert_eq!(n, v(&[1.0, 0.0, 0.0]));
        assert_eq!(eps, -1.0);
    }

    #[test]
    fn normalize_rejects_null_directions() {
        let g = AmbientMetric::new(3, 1).unwrap();
        let err = normalize_normal(&v(&[1.0, 1.0, 0.0]), &g).unwrap_err();
        assert!(matches!(err, GeomError::NullNormal { .. }));
    }

    #[test]
    fn metric_matrix_checks_degeneracy() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        assert!(MetricMatrix::new(g, 1e-10).is_err());

        // indefinite but nondegenerate: the null-coordinate plane metric
        let g = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, -1.0, 0.0]);
        let m = MetricMatrix::new(g, 1e-10).unwrap();
        assert_eq!(m.det(), -1.0);
        let id = m.entries() * m.inverse();
        assert!(max_abs(&(id - DMatrix::identity(2, 2))) < 1e-12);
    }
}
