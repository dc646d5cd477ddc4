//! Truncated third-order Taylor arithmetic (forward-mode jets).
//!
//! A [`Jet3`] carries the value of a scalar together with all partial
//! derivatives up to order three at a point, stored densely over sorted
//! multi-indices so the symmetry of mixed partials is structural. Every
//! arithmetic operation and elementary function propagates the full jet
//! exactly (to rounding), which is what keeps downstream curvature and
//! Lie-derivative residuals at machine-noise level instead of
//! finite-difference level.

use crate::error::{GeomError, Result};
use crate::expr::{const_value, BinOp, Expr, UnaryOp};
use std::collections::BTreeMap;

/// Position of the pair `(i, j)` with `i <= j` in upper-triangle storage.
#[inline]
pub fn idx2(mut i: usize, mut j: usize) -> usize {
    if i > j {
        std::mem::swap(&mut i, &mut j);
    }
    j * (j + 1) / 2 + i
}

/// Position of the sorted triple in tetrahedral storage.
#[inline]
pub fn idx3(i: usize, j: usize, k: usize) -> usize {
    let mut t = [i, j, k];
    t.sort_unstable();
    let [a, b, c] = t;
    c * (c + 1) * (c + 2) / 6 + b * (b + 1) / 2 + a
}

pub fn len2(n: usize) -> usize {
    n * (n + 1) / 2
}

pub fn len3(n: usize) -> usize {
    n * (n + 1) * (n + 2) / 6
}

/// Value and partial derivatives up to order 3 of a scalar in `n` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    n: usize,
    pub v: f64,
    d1: Vec<f64>,
    d2: Vec<f64>,
    d3: Vec<f64>,
}

impl Jet3 {
    pub fn constant(n: usize, v: f64) -> Self {
        Self { n, v, d1: vec![0.0; n], d2: vec![0.0; len2(n)], d3: vec![0.0; len3(n)] }
    }

    /// The coordinate function `u_i` seeded at value `v`.
    pub fn variable(n: usize, i: usize, v: f64) -> Self {
        let mut jet = Self::constant(n, v);
        jet.d1[i] = 1.0;
        jet
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn d1(&self, i: usize) -> f64 {
        self.d1[i]
    }

    #[inline]
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        self.d2[idx2(i, j)]
    }

    #[inline]
    pub fn d3(&self, i: usize, j: usize, k: usize) -> f64 {
        self.d3[idx3(i, j, k)]
    }

    pub fn is_constant(&self) -> bool {
        self.d1.iter().all(|x| *x == 0.0)
            && self.d2.iter().all(|x| *x == 0.0)
            && self.d3.iter().all(|x| *x == 0.0)
    }

    fn same_shape(&self, rhs: &Self) {
        assert_eq!(self.n, rhs.n, "jet arity mismatch");
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.same_shape(rhs);
        let mut out = self.clone();
        out.v += rhs.v;
        for (a, b) in out.d1.iter_mut().zip(&rhs.d1) {
            *a += b;
        }
        for (a, b) in out.d2.iter_mut().zip(&rhs.d2) {
            *a += b;
        }
        for (a, b) in out.d3.iter_mut().zip(&rhs.d3) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.v *= s;
        out.d1.iter_mut().for_each(|x| *x *= s);
        out.d2.iter_mut().for_each(|x| *x *= s);
        out.d3.iter_mut().for_each(|x| *x *= s);
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1.0)
    }

    /// Leibniz product through order 3.
    pub fn mul(&self, rhs: &Self) -> Self {
        self.same_shape(rhs);
        let n = self.n;
        let (f, g) = (self, rhs);
        let mut out = Jet3::constant(n, f.v * g.v);
        for i in 0..n {
            out.d1[i] = f.d1(i) * g.v + f.v * g.d1(i);
        }
        for j in 0..n {
            for i in 0..=j {
                out.d2[idx2(i, j)] = f.d2(i, j) * g.v
                    + f.d1(i) * g.d1(j)
                    + f.d1(j) * g.d1(i)
                    + f.v * g.d2(i, j);
            }
        }
        for k in 0..n {
            for j in 0..=k {
                for i in 0..=j {
                    out.d3[idx3(i, j, k)] = f.d3(i, j, k) * g.v
                        + f.d2(i, j) * g.d1(k)
                        + f.d2(i, k) * g.d1(j)
                        + f.d2(j, k) * g.d1(i)
                        + f.d1(i) * g.d2(j, k)
                        + f.d1(j) * g.d2(i, k)
                        + f.d1(k) * g.d2(i, j)
                        + f.v * g.d3(i, j, k);
                }
            }
        }
        out
    }

    /// Chain rule for a univariate map with derivatives `f1, f2, f3` at
    /// `self.v`.
    fn compose(&self, f0: f64, f1: f64, f2: f64, f3: f64) -> Self {
        let n = self.n;
        let g = self;
        let mut out = Jet3::constant(n, f0);
        for i in 0..n {
            out.d1[i] = f1 * g.d1(i);
        }
        for j in 0..n {
            for i in 0..=j {
                out.d2[idx2(i, j)] = f2 * g.d1(i) * g.d1(j) + f1 * g.d2(i, j);
            }
        }
        for k in 0..n {
            for j in 0..=k {
                for i in 0..=j {
                    out.d3[idx3(i, j, k)] = f3 * g.d1(i) * g.d1(j) * g.d1(k)
                        + f2 * (g.d2(i, j) * g.d1(k) + g.d2(i, k) * g.d1(j) + g.d2(j, k) * g.d1(i))
                        + f1 * g.d3(i, j, k);
                }
            }
        }
        out
    }

    pub fn recip(&self) -> Result<Self> {
        if self.v == 0.0 {
            return Err(GeomError::Domain("division by zero".into()));
        }
        let w = 1.0 / self.v;
        Ok(self.compose(w, -w * w, 2.0 * w * w * w, -6.0 * w * w * w * w))
    }

    pub fn div(&self, rhs: &Self) -> Result<Self> {
        Ok(self.mul(&rhs.recip()?))
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.v.sin_cos();
        self.compose(c, -s, -c, s)
    }

    pub fn tan(&self) -> Self {
        let t = self.v.tan();
        let sec2 = 1.0 + t * t;
        self.compose(t, sec2, 2.0 * t * sec2, sec2 * (2.0 + 6.0 * t * t))
    }

    pub fn sinh(&self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(s, c, s, c)
    }

    pub fn cosh(&self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.compose(c, s, c, s)
    }

    pub fn tanh(&self) -> Self {
        let t = self.v.tanh();
        let sech2 = 1.0 - t * t;
        self.compose(t, sech2, -2.0 * t * sech2, sech2 * (6.0 * t * t - 2.0))
    }

    pub fn exp(&self) -> Self {
        let w = self.v.exp();
        self.compose(w, w, w, w)
    }

    pub fn log(&self) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(GeomError::Domain(format!("log of non-positive value {}", self.v)));
        }
        let w = 1.0 / self.v;
        Ok(self.compose(self.v.ln(), w, -w * w, 2.0 * w * w * w))
    }

    pub fn sqrt(&self) -> Result<Self> {
        // derivatives of sqrt blow up at 0, so the whole closed ray v <= 0
        // is outside the jet domain
        if self.v <= 0.0 {
            return Err(GeomError::Domain(format!(
                "sqrt of non-positive value {} (derivatives undefined)",
                self.v
            )));
        }
        let r = self.v.sqrt();
        let d1 = 0.5 / r;
        let d2 = -0.25 / (r * self.v);
        let d3 = 0.375 / (r * self.v * self.v);
        Ok(self.compose(r, d1, d2, d3))
    }

    /// Integer power by repeated multiplication (exact for negative bases).
    pub fn powi(&self, k: i64) -> Result<Self> {
        if k == 0 {
            return Ok(Jet3::constant(self.n, 1.0));
        }
        if k < 0 {
            if self.v == 0.0 {
                return Err(GeomError::Domain("zero raised to a negative power".into()));
            }
            return self.powi(-k)?.recip();
        }
        let mut acc = self.clone();
        for _ in 1..k {
            acc = acc.mul(self);
        }
        Ok(acc)
    }

    /// Real power of a positive base.
    pub fn powf(&self, p: f64) -> Result<Self> {
        if self.v <= 0.0 {
            return Err(GeomError::Domain(format!(
                "{} raised to non-integer power {p}",
                self.v
            )));
        }
        let f0 = self.v.powf(p);
        let f1 = p * self.v.powf(p - 1.0);
        let f2 = p * (p - 1.0) * self.v.powf(p - 2.0);
        let f3 = p * (p - 1.0) * (p - 2.0) * self.v.powf(p - 3.0);
        Ok(self.compose(f0, f1, f2, f3))
    }

    /// `self ^ rhs`. A constant integer exponent goes through repeated
    /// multiplication; anything else uses `exp(rhs * log(self))` and thus
    /// needs a positive base.
    pub fn pow(&self, rhs: &Self) -> Result<Self> {
        if rhs.is_constant() {
            let p = rhs.v;
            if p.fract() == 0.0 && p.abs() <= i64::MAX as f64 {
                return self.powi(p as i64);
            }
            return self.powf(p);
        }
        Ok(rhs.mul(&self.log()?).exp())
    }
}

/// Evaluate an expression as a third-order jet at `point`.
pub fn eval_jet3(e: &Expr, point: &[f64], params: &BTreeMap<String, f64>) -> Result<Jet3> {
    let n = point.len();
    match e {
        Expr::Num(v) => Ok(Jet3::constant(n, *v)),
        Expr::Var(i) => {
            assert!(*i < n, "variable index out of range for evaluation point");
            Ok(Jet3::variable(n, *i, point[*i]))
        }
        Expr::Const(name) => {
            let v = const_value(name, params)
                .ok_or_else(|| GeomError::UnknownIdentifier(name.clone()))?;
            Ok(Jet3::constant(n, v))
        }
        Expr::Unary(op, inner) => {
            let a = eval_jet3(inner, point, params)?;
            Ok(match op {
                UnaryOp::Neg => a.neg(),
                UnaryOp::Sqrt => a.sqrt()?,
                UnaryOp::Exp => a.exp(),
                UnaryOp::Log => a.log()?,
                UnaryOp::Sin => a.sin(),
                UnaryOp::Cos => a.cos(),
                UnaryOp::Tan => a.tan(),
                UnaryOp::Sinh => a.sinh(),
                UnaryOp::Cosh => a.cosh(),
                UnaryOp::Tanh => a.tanh(),
            })
        }
        Expr::Binary(op, l, r) => {
            let a = eval_jet3(l, point, params)?;
            let b = eval_jet3(r, point, params)?;
            Ok(match op {
                BinOp::Add => a.add(&b),
                BinOp::Sub => a.sub(&b),
                BinOp::Mul => a.mul(&b),
                BinOp::Div => a.div(&b)?,
                BinOp::Pow => a.pow(&b)?,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn eval(src: &str, vars: &[&str], point: &[f64]) -> Result<Jet3> {
        let vars: Vec<String> = vars.iter().map(|s| s.to_string()).collect();
        let params = BTreeMap::new();
        let e = parse(src, &vars, &params).unwrap();
        eval_jet3(&e, point, &params)
    }

    #[test]
    fn square_of_a_single_variable() {
        let j = eval("u1^2", &["u1"], &[3.0]).unwrap();
        assert_eq!(j.v, 9.0);
        assert_eq!(j.d1(0), 6.0);
        assert_eq!(j.d2(0, 0), 2.0);
        assert_eq!(j.d3(0, 0, 0), 0.0);
    }

    #[test]
    fn mixed_partials_of_sin_times_linear() {
        // d/du1 = cos(u1) u2, d/du2 = sin(u1); at (0, 2) the only nonzero
        // second partial is the mixed one and d111 = -cos(0)*2 = -2.
        let j = eval("sin(u1)*u2", &["u1", "u2"], &[0.0, 2.0]).unwrap();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.d1(0), 2.0);
        assert_eq!(j.d1(1), 0.0);
        assert_eq!(j.d2(0, 0), 0.0);
        assert_eq!(j.d2(0, 1), 1.0);
        assert_eq!(j.d2(1, 1), 0.0);
        assert_eq!(j.d3(0, 0, 0), -2.0);
        assert_eq!(j.d3(0, 0, 1), 0.0);
        assert_eq!(j.d3(0, 1, 1), 0.0);
        assert_eq!(j.d3(1, 1, 1), 0.0);
    }

    #[test]
    fn division_by_zero_is_a_domain_error() {
        let err = eval("1/u1", &["u1"], &[0.0]).unwrap_err();
        assert!(matches!(err, GeomError::Domain(_)));
    }

    #[test]
    fn log_and_sqrt_domains() {
        assert!(eval("log(u1)", &["u1"], &[-1.0]).is_err());
        assert!(eval("sqrt(u1)", &["u1"], &[-1.0]).is_err());
        assert!(eval("u1^0.5", &["u1"], &[-1.0]).is_err());
        // integer exponents survive negative bases
        let j = eval("u1^3", &["u1"], &[-2.0]).unwrap();
        assert_eq!(j.v, -8.0);
        assert_eq!(j.d1(0), 12.0);
    }

    #[test]
    fn pythagorean_identity_holds_jetwise() {
        let j = eval("sin(u1)^2 + cos(u1)^2", &["u1"], &[0.7]).unwrap();
        assert!((j.v - 1.0).abs() < 1e-13);
        assert!(j.d1(0).abs() < 1e-13);
        assert!(j.d2(0, 0).abs() < 1e-13);
        assert!(j.d3(0, 0, 0).abs() < 1e-13);
    }

    #[test]
    fn third_derivative_of_reciprocal() {
        // 1/u: derivatives -1/u^2, 2/u^3, -6/u^4 at u = 2
        let j = eval("1/u1", &["u1"], &[2.0]).unwrap();
        assert!((j.v - 0.5).abs() < 1e-15);
        assert!((j.d1(0) + 0.25).abs() < 1e-15);
        assert!((j.d2(0, 0) - 0.25).abs() < 1e-15);
        assert!((j.d3(0, 0, 0) + 0.375).abs() < 1e-15);
    }

    #[test]
    fn variable_exponent_uses_exp_log() {
        // u1^u2 at (2, 3): value 8, d/du2 = 8 ln 2
        let j = eval("u1^u2", &["u1", "u2"], &[2.0, 3.0]).unwrap();
        assert!((j.v - 8.0).abs() < 1e-12);
        assert!((j.d1(1) - 8.0 * 2.0f64.ln()).abs() < 1e-12);
        assert!((j.d1(0) - 12.0).abs() < 1e-12);
    }
}
