//! Eigenstructure of small non-symmetric real matrices.
//!
//! A shape operator that is self-adjoint with respect to an indefinite
//! metric need not be diagonalizable over R. In the Lorentz case it falls
//! into one of four canonical types: real diagonalizable, one complex
//! conjugate pair, or a real eigenvalue carried by a Jordan block of size
//! two or three. [`eigen_structure`] recovers the type from floating-point
//! data by clustering nearby eigenvalues and probing the rank filtration of
//! `(A - kappa I)^k`.

use nalgebra::DMatrix;
use serde::Serialize;

/// Canonical shape-operator types over a Lorentzian or Euclidean ambient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShapeOperatorType {
    DiagonalizableReal,
    ComplexPair,
    Jordan2,
    Jordan3,
}

impl std::fmt::Display for ShapeOperatorType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Self::DiagonalizableReal => "DiagonalizableReal",
            Self::ComplexPair => "ComplexPair",
            Self::Jordan2 => "Jordan2",
            Self::Jordan3 => "Jordan3",
        };
        f.write_str(s)
    }
}

/// One clustered eigenvalue (a real value, or the upper half of a complex
/// conjugate pair when `im > 0`).
#[derive(Debug, Clone, Serialize)]
pub struct EigenCluster {
    pub re: f64,
    pub im: f64,
    /// Number of raw eigenvalues merged into this cluster (a conjugate pair
    /// counts once, on its `im > 0` representative).
    pub algebraic: usize,
    /// Kernel dimension of `A - kappa I` for real clusters; taken equal to
    /// `algebraic` for complex pairs, whose fine Jordan structure is not
    /// probed.
    pub geometric: usize,
    /// Largest Jordan block attached to the cluster (1 when diagonalizable).
    pub max_block: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    /// Raw eigenvalues as (re, im) pairs, sorted lexicographically.
    pub eigenvalues: Vec<(f64, f64)>,
    pub clusters: Vec<EigenCluster>,
    pub type_tag: ShapeOperatorType,
    /// Smallest gap between distinct clusters divided by the clustering
    /// width; values near 1 mean the type decision is borderline. `None`
    /// when there is a single cluster.
    pub cluster_margin: Option<f64>,
}

impl SpectralReport {
    /// Eigenvalue multiset as cluster representatives repeated by algebraic
    /// multiplicity, sorted; conjugate pairs contribute both halves.
    pub fn eigenvalue_multiset(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for c in &self.clusters {
            for _ in 0..c.algebraic {
                out.push((c.re, c.im));
                if c.im > 0.0 {
                    out.push((c.re, -c.im));
                }
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out
    }

    /// All clustered values are real and every Jordan block is trivial.
    pub fn is_diagonalizable_real(&self) -> bool {
        self.type_tag == ShapeOperatorType::DiagonalizableReal
    }
}

/// Numerical rank: number of singular values above `floor`.
fn rank_with_floor(m: &DMatrix<f64>, floor: f64) -> usize {
    m.clone().singular_values().iter().filter(|s| **s > floor).count()
}

/// Spectral analysis of a general real matrix.
///
/// Eigenvalues closer than `tol * max(1, |A|_F)` are merged before the rank
/// tests, and the same width is used as the singular-value floor, so the
/// reported Jordan structure is stable under perturbations well below the
/// clustering width.
pub fn eigen_structure(a: &DMatrix<f64>, tol: f64) -> SpectralReport {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigen_structure: matrix must be square");
    let width = tol * a.norm().max(1.0);

    let eig = a.clone().complex_eigenvalues();
    let mut raw: Vec<(f64, f64)> = eig.iter().map(|z| (z.re, z.im)).collect();
    // collapse numerically-real eigenvalues onto the axis
    for ev in raw.iter_mut() {
        if ev.1.abs() <= width {
            ev.1 = 0.0;
        }
    }
    raw.sort_by(|a, b| a.partial_cmp(b).unwrap());

    // single-linkage clustering in the closed upper half plane
    let upper: Vec<(f64, f64)> = raw.iter().filter(|e| e.1 >= 0.0).copied().collect();
    let mut assignment = vec![usize::MAX; upper.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..upper.len() {
        if assignment[i] != usize::MAX {
            continue;
        }
        let gid = groups.len();
        let mut stack = vec![i];
        assignment[i] = gid;
        let mut members = vec![i];
        while let Some(j) = stack.pop() {
            for k in 0..upper.len() {
                if assignment[k] == usize::MAX {
                    let d = ((upper[j].0 - upper[k].0).powi(2)
                        + (upper[j].1 - upper[k].1).powi(2))
                    .sqrt();
                    if d <= width {
                        assignment[k] = gid;
                        members.push(k);
                        stack.push(k);
                    }
                }
            }
        }
        groups.push(members);
    }

    let mut clusters = Vec::new();
    for members in &groups {
        let algebraic = members.len();
        let re = members.iter().map(|&i| upper[i].0).sum::<f64>() / algebraic as f64;
        let im = members.iter().map(|&i| upper[i].1).sum::<f64>() / algebraic as f64;
        if im > 0.0 {
            clusters.push(EigenCluster { re, im, algebraic, geometric: algebraic, max_block: 1 });
            continue;
        }
        // real cluster: probe the kernel filtration of (A - re I)^k
        let shifted = a - DMatrix::identity(n, n) * re;
        let mut power = DMatrix::identity(n, n);
        let mut geometric = 0;
        let mut max_block = 1;
        let mut prev_null = 0;
        for k in 1..=algebraic {
            power = &power * &shifted;
            let null = n - rank_with_floor(&power, width);
            if k == 1 {
                geometric = null;
            }
            if null > prev_null {
                max_block = k;
            }
            if null >= algebraic {
                break;
            }
            prev_null = null;
        }
        clusters.push(EigenCluster { re, im: 0.0, algebraic, geometric, max_block });
    }
    clusters.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());

    let has_complex = clusters.iter().any(|c| c.im > 0.0);
    let biggest_block = clusters.iter().map(|c| c.max_block).max().unwrap_or(1);
    let type_tag = if has_complex {
        ShapeOperatorType::ComplexPair
    } else if biggest_block >= 3 {
        ShapeOperatorType::Jordan3
    } else if biggest_block == 2 {
        ShapeOperatorType::Jordan2
    } else {
        ShapeOperatorType::DiagonalizableReal
    };

    let mut margin: Option<f64> = None;
    for i in 0..clusters.len() {
        for j in (i + 1)..clusters.len() {
            let d = ((clusters[i].re - clusters[j].re).powi(2)
                + (clusters[i].im - clusters[j].im).powi(2))
            .sqrt();
            let m = d / width;
            margin = Some(margin.map_or(m, |cur: f64| cur.min(m)));
        }
    }

    SpectralReport { eigenvalues: raw, clusters, type_tag, cluster_margin: margin }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-7;

    #[test]
    fn distinct_real_spectrum() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 3.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::DiagonalizableReal);
        assert_eq!(r.clusters.len(), 2);
        assert!((r.clusters[0].re - 2.0).abs() < 1e-12);
        assert!((r.clusters[1].re - 3.0).abs() < 1e-12);
    }

    #[test]
    fn rotation_like_block_reports_complex_pair() {
        // [[1,-1],[1,1]] has characteristic polynomial (1-k)^2 + 1,
        // eigenvalues 1 +- i.
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, 1.0, 1.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::ComplexPair);
        assert_eq!(r.clusters.len(), 1);
        assert!((r.clusters[0].re - 1.0).abs() < 1e-10);
        assert!((r.clusters[0].im - 1.0).abs() < 1e-10);
    }

    #[test]
    fn size_two_jordan_block() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 1.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::Jordan2);
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].algebraic, 2);
        assert_eq!(r.clusters[0].geometric, 1);
    }

    #[test]
    fn size_three_jordan_block() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.0, 0.0, 1.0, 2.0, 0.0, 0.0, 1.0, 2.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::Jordan3);
        assert_eq!(r.clusters[0].max_block, 3);
    }

    #[test]
    fn nilpotent_block_with_double_zero() {
        // the B-scroll shape operator
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, -1.0, 0.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::Jordan2);
        assert!(r.clusters[0].re.abs() < 1e-10);
    }

    #[test]
    fn repeated_diagonalizable_eigenvalue() {
        let a = DMatrix::from_row_slice(2, 2, &[5.0, 0.0, 0.0, 5.0]);
        let r = eigen_structure(&a, TOL);
        assert_eq!(r.type_tag, ShapeOperatorType::DiagonalizableReal);
        assert_eq!(r.clusters[0].algebraic, 2);
        assert_eq!(r.clusters[0].geometric, 2);
    }
}
