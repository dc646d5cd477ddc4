//! Pointwise geometric state of a hypersurface chart.
//!
//! From the third-order jets of the immersion this module assembles, with
//! one fixed sign convention, everything the soliton and classification
//! layers consume: induced metric and its first derivatives, unit normal
//! `N` with causal character `eps_n`, second fundamental form
//! `b_ij = g(d_i d_j x, N)`, shape operator `A = g^{-1} b`, mean curvature
//! `alpha = eps_n tr(A)/n` (so the mean curvature vector is `alpha N`),
//! support function `lambda = g(N, x)` and Christoffel symbols.
//!
//! The normal is the normalized generalized cross product of the tangents
//! in chart-variable order. Reversing that order (or any orientation flip)
//! flips `N`, `b`, `A`, `alpha`, `lambda` together, leaving `eps_n` and the
//! products `lambda * alpha`, `eps_n * lambda * kappa_i` unchanged; all
//! classification decisions are built from those invariants.

use crate::chart::ImmersionChart;
use crate::error::{GeomError, Result};
use crate::jet::{idx2, Jet3};
use crate::linalg::{self, AmbientMetric, MetricMatrix};
use crate::spectral::{eigen_structure, ShapeOperatorType, SpectralReport};
use crate::tolerances::Tolerances;
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct FrameData {
    pub point: Vec<f64>,
    /// Component jets of the immersion; downstream layers differentiate
    /// through these rather than re-evaluating the chart.
    pub jets: Vec<Jet3>,
    /// Ambient position (the position vector field evaluated at the point).
    pub x: DVector<f64>,
    /// Row i is the tangent d_i x.
    pub tangents: DMatrix<f64>,
    pub metric: MetricMatrix,
    /// Entry k is the matrix (d_k g)_ij.
    pub dmetric: Vec<DMatrix<f64>>,
    pub normal: DVector<f64>,
    /// g(N, N), +1 or -1.
    pub eps_n: f64,
    /// Second fundamental form scalars b_ij = g(d_i d_j x, N).
    pub b: DMatrix<f64>,
    /// Shape operator A = g^{-1} b.
    pub shape: DMatrix<f64>,
    /// Spectral data of the shape operator (principal structure).
    pub spectral: SpectralReport,
    /// Mean curvature, H = alpha N.
    pub alpha: f64,
    /// Support function g(N, x).
    pub lambda: f64,
    /// Entry k is the matrix Gamma^k_ij.
    pub christoffel: Vec<DMatrix<f64>>,
    pub ambient: AmbientMetric,
}

impl FrameData {
    pub fn n(&self) -> usize {
        self.point.len()
    }

    /// Second-derivative vector d_i d_j x read off the jets.
    pub fn d2x(&self, i: usize, j: usize) -> DVector<f64> {
        DVector::from_fn(self.ambient.dim(), |a, _| self.jets[a].d2(i, j))
    }

    /// Third-derivative vector d_i d_j d_k x read off the jets.
    pub fn d3x(&self, i: usize, j: usize, k: usize) -> DVector<f64> {
        DVector::from_fn(self.ambient.dim(), |a, _| self.jets[a].d3(i, j, k))
    }

    /// Ambient derivative of the unit normal along d_i, by the Weingarten
    /// relation: tangential with components -A(:, i), no normal part.
    pub fn dnormal(&self, i: usize) -> DVector<f64> {
        let n = self.n();
        let mut out = DVector::zeros(self.ambient.dim());
        for m in 0..n {
            out += self.tangents.row(m).transpose() * (-self.shape[(m, i)]);
        }
        out
    }

    /// Named self-consistency residuals of the stored fields.
    pub fn consistency_residuals(&self) -> Vec<(&'static str, f64)> {
        let n = self.n();
        let mut tangency = 0.0f64;
        for i in 0..n {
            let t = self.tangents.row(i).transpose();
            tangency = tangency.max(self.ambient.dot_v(&self.normal, &t).abs());
        }
        let unit = (self.ambient.dot_v(&self.normal, &self.normal) - self.eps_n).abs();
        let ga = self.metric.entries() * &self.shape;
        let self_adjoint = linalg::max_abs(&(ga - &self.b));
        let mean = (self.alpha - self.eps_n * self.shape.trace() / n as f64).abs();
        vec![
            ("normal_tangency", tangency),
            ("unit_normal", unit),
            ("shape_self_adjoint", self_adjoint),
            ("mean_curvature_trace", mean),
        ]
    }
}

/// Full frame computation at an admissible point.
pub fn frame_at(chart: &ImmersionChart, point: &[f64], tol: &Tolerances) -> Result<FrameData> {
    let jets = chart.eval(point)?;
    let n = chart.n();
    let m = chart.ambient.dim();

    let x = DVector::from_fn(m, |a, _| jets[a].v);
    let tangents = DMatrix::from_fn(n, m, |i, a| jets[a].d1(i));

    // induced metric, mirrored for exact symmetry
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let gij = chart
                .ambient
                .dot_v(&tangents.row(i).transpose(), &tangents.row(j).transpose());
            g[(i, j)] = gij;
            g[(j, i)] = gij;
        }
    }
    let scale = (0..n)
        .map(|i| tangents.row(i).norm())
        .fold(0.0f64, f64::max);
    let floor = tol.metric * scale.powi(n as i32);
    let metric = MetricMatrix::new(g, floor).map_err(|e| match e {
        GeomError::DegenerateMetric { det, .. } => {
            GeomError::DegenerateMetric { point: point.to_vec(), det }
        }
        other => other,
    })?;

    let w = linalg::generalized_cross(&tangents, &chart.ambient);
    let (normal, eps_n) = linalg::normalize_normal(&w, &chart.ambient)
        .map_err(|_| GeomError::NullNormal { point: point.to_vec() })?;

    let second: Vec<DVector<f64>> = {
        let mut v = Vec::with_capacity(n * (n + 1) / 2);
        for j in 0..n {
            for i in 0..=j {
                v.push(DVector::from_fn(m, |a, _| jets[a].d2(i, j)));
            }
        }
        // stored in idx2 order: idx2(i, j) for i <= j enumerates exactly this
        v
    };
    let d2 = |i: usize, j: usize| -> &DVector<f64> { &second[idx2(i, j)] };

    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let bij = chart.ambient.dot_v(d2(i, j), &normal);
            b[(i, j)] = bij;
            b[(j, i)] = bij;
        }
    }
    let shape = metric.inverse() * &b;
    let spectral = eigen_structure(&shape, tol.cluster);
    let alpha = eps_n * shape.trace() / n as f64;
    let lambda = chart.ambient.dot_v(&normal, &x);

    // d_k g_ij = g(d_k d_i x, d_j x) + g(d_i x, d_k d_j x)
    let mut dmetric = Vec::with_capacity(n);
    for k in 0..n {
        let mut dg = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = chart.ambient.dot_v(d2(k, i), &tangents.row(j).transpose())
                    + chart.ambient.dot_v(&tangents.row(i).transpose(), d2(k, j));
                dg[(i, j)] = v;
                dg[(j, i)] = v;
            }
        }
        dmetric.push(dg);
    }

    // Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    let ginv = metric.inverse();
    let mut christoffel = Vec::with_capacity(n);
    for k in 0..n {
        let mut gk = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = 0.0;
                for l in 0..n {
                    acc += ginv[(k, l)]
                        * (dmetric[i][(j, l)] + dmetric[j][(i, l)] - dmetric[l][(i, j)]);
                }
                let v = 0.5 * acc;
                gk[(i, j)] = v;
                gk[(j, i)] = v;
            }
        }
        christoffel.push(gk);
    }

    Ok(FrameData {
        point: point.to_vec(),
        jets,
        x,
        tangents,
        metric,
        dmetric,
        normal,
        eps_n,
        b,
        shape,
        spectral,
        alpha,
        lambda,
        christoffel,
        ambient: chart.ambient,
    })
}

/// Max-norm residuals of the structure equations for a flat ambient space.
///
/// Both vanish identically in exact arithmetic for any immersion into flat
/// space, so they certify that jets, Christoffels, second fundamental form
/// and signature conventions are mutually consistent.
#[derive(Debug, Clone, Copy)]
pub struct CurvatureResiduals {
    pub gauss: f64,
    pub codazzi: f64,
}

pub fn curvature_residuals(frame: &FrameData) -> CurvatureResiduals {
    let n = frame.n();
    let ginv = frame.metric.inverse();
    let g = frame.metric.entries();
    let eps = frame.eps_n;

    // second metric derivatives from the order-3 jets
    // dd(m, i)[(j, l)] = d_m d_i g_jl
    let ddg = |mi: usize, i: usize, j: usize, l: usize| -> f64 {
        let a = &frame.ambient;
        a.dot_v(&frame.d3x(mi, i, j), &frame.tangents.row(l).transpose())
            + a.dot_v(&frame.d2x(i, j), &frame.d2x(mi, l))
            + a.dot_v(&frame.d2x(mi, j), &frame.d2x(i, l))
            + a.dot_v(&frame.tangents.row(j).transpose(), &frame.d3x(mi, i, l))
    };

    // d_m g^{kl} = -(g^{-1} d_m g g^{-1})^{kl}
    let mut dginv = Vec::with_capacity(n);
    for mi in 0..n {
        dginv.push(-(ginv * &frame.dmetric[mi] * ginv));
    }

    // d_m Gamma^k_ij
    let dgamma = |mi: usize, k: usize, i: usize, j: usize| -> f64 {
        let mut acc = 0.0;
        for l in 0..n {
            acc += dginv[mi][(k, l)]
                * (frame.dmetric[i][(j, l)] + frame.dmetric[j][(i, l)] - frame.dmetric[l][(i, j)]);
            acc += ginv[(k, l)] * (ddg(mi, i, j, l) + ddg(mi, j, i, l) - ddg(mi, l, i, j));
        }
        0.5 * acc
    };

    let mut gauss = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                // coefficient of d_l in R(d_i, d_j) d_k
                let mut coeff = vec![0.0; n];
                for (l, c) in coeff.iter_mut().enumerate() {
                    let mut v = dgamma(i, l, j, k) - dgamma(j, l, i, k);
                    for m in 0..n {
                        v += frame.christoffel[m][(j, k)] * frame.christoffel[l][(i, m)]
                            - frame.christoffel[m][(i, k)] * frame.christoffel[l][(j, m)];
                    }
                    *c = v;
                }
                for l in 0..n {
                    let mut rm = 0.0;
                    for (lp, c) in coeff.iter().enumerate() {
                        rm += g[(l, lp)] * c;
                    }
                    let target = eps
                        * (frame.b[(i, l)] * frame.b[(j, k)] - frame.b[(i, k)] * frame.b[(j, l)]);
                    gauss = gauss.max((rm - target).abs());
                }
            }
        }
    }

    // d_i b_jk via the product rule and the Weingarten relation for dN
    let db = |i: usize, j: usize, k: usize| -> f64 {
        frame.ambient.dot_v(&frame.d3x(i, j, k), &frame.normal)
            + frame.ambient.dot_v(&frame.d2x(j, k), &frame.dnormal(i))
    };
    let covb = |i: usize, j: usize, k: usize| -> f64 {
        let mut v = db(i, j, k);
        for m in 0..n {
            v -= frame.christoffel[m][(i, j)] * frame.b[(m, k)];
            v -= frame.christoffel[m][(i, k)] * frame.b[(j, m)];
        }
        v
    };
    let mut codazzi = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                codazzi = codazzi.max((covb(i, j, k) - covb(j, i, k)).abs());
            }
        }
    }

    CurvatureResiduals { gauss, codazzi }
}

/// Canonical type of the shape operator per the Lorentz-Minkowski theory.
///
/// The canonical forms are tabulated for ambient index 0 and 1 only; larger
/// indices get [`GeomError::UnsupportedIndex`] (the raw spectral report on
/// the frame is still available).
pub fn shape_operator_type(frame: &FrameData) -> Result<ShapeOperatorType> {
    let s = frame.ambient.index();
    if s > 1 {
        return Err(GeomError::UnsupportedIndex(s));
    }
    let tag = frame.spectral.type_tag;
    if s == 0 {
        assert!(
            tag == ShapeOperatorType::DiagonalizableReal,
            "shape operator over a Euclidean ambient must diagonalize (got {tag}, margin {:?})",
            frame.spectral.cluster_margin
        );
    }
    Ok(tag)
}
