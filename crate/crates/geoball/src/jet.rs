//! Truncated multivariate Taylor arithmetic.
//!
//! A [`Jet`] carries the Taylor coefficients of an analytic function about a
//! point, up to a fixed total degree in up to four variables. Arithmetic on
//! jets propagates coefficients exactly, so partial derivatives of composite
//! expressions come out at machine precision instead of finite-difference
//! accuracy. That is what makes fourth-order metric derivatives (and hence
//! the Laplacian of scalar curvature) computable without symbolic algebra.
//!
//! Coefficients are stored against a graded-lexicographic list of
//! multi-indices owned by a per-(dimension, degree) [`JetTable`]. The table
//! also holds the sparse multiplication triples and the index shifts used by
//! [`Jet::derivative`], so the hot operations are flat table-driven loops.
//!
//! Truncation rule: a jet of degree `d` built from exact inputs has exact
//! coefficients through total degree `d`; each application of
//! [`Jet::derivative`] lowers the trustworthy degree by one (the top band is
//! zeroed, not recovered). Callers are responsible for budgeting degrees.

use std::collections::HashMap;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

/// Largest chart dimension the tables support.
pub const MAX_DIM: usize = 4;
/// Largest truncation degree the tables support.
pub const MAX_DEG: usize = 4;
/// Coefficient capacity: binomial(MAX_DIM + MAX_DEG, MAX_DEG).
pub const JET_CAP: usize = 70;

/// Shared coefficient layout for all jets of one (dimension, degree) pair.
pub struct JetTable {
    dim: usize,
    degree: usize,
    len: usize,
    /// Multi-indices in graded lex order; entries beyond `dim` are zero.
    exps: Vec<[u8; MAX_DIM]>,
    index_of: HashMap<[u8; MAX_DIM], usize>,
    /// Sparse product: for each (dst, lhs, rhs), dst accumulates lhs*rhs.
    prod: Vec<(u32, u32, u32)>,
    /// shift_up[i][m] = index of exps[i] + e_m, or -1 when that exceeds degree.
    shift_up: Vec<[i32; MAX_DIM]>,
    /// alpha! for each stored multi-index.
    fact: Vec<f64>,
}

static REGISTRY: OnceLock<Mutex<HashMap<(usize, usize), &'static JetTable>>> = OnceLock::new();

fn factorial(k: u8) -> f64 {
    (1..=k as u64).product::<u64>() as f64
}

impl JetTable {
    /// Returns the process-wide table for `dim` variables truncated at total
    /// degree `degree`, building it on first use.
    pub fn get(dim: usize, degree: usize) -> &'static JetTable {
        assert!((1..=MAX_DIM).contains(&dim), "jet dimension out of range");
        assert!(degree <= MAX_DEG, "jet degree out of range");
        let reg = REGISTRY.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = reg.lock().unwrap();
        map.entry((dim, degree))
            .or_insert_with(|| &*Box::leak(Box::new(JetTable::build(dim, degree))))
    }

    fn build(dim: usize, degree: usize) -> JetTable {
        let mut exps: Vec<[u8; MAX_DIM]> = Vec::new();
        let d = degree as u8;
        for a0 in 0..=d {
            for a1 in 0..=d {
                for a2 in 0..=d {
                    for a3 in 0..=d {
                        let e = [a0, a1, a2, a3];
                        let sum = a0 + a1 + a2 + a3;
                        let uses_hidden = e.iter().skip(dim).any(|&x| x > 0);
                        if sum <= d && !uses_hidden {
                            exps.push(e);
                        }
                    }
                }
            }
        }
        exps.sort_by_key(|e| (e.iter().map(|&x| x as u32).sum::<u32>(), *e));
        let len = exps.len();
        assert!(len <= JET_CAP);

        let index_of: HashMap<[u8; MAX_DIM], usize> =
            exps.iter().enumerate().map(|(i, e)| (*e, i)).collect();

        let mut prod = Vec::new();
        for (i, ei) in exps.iter().enumerate() {
            for (j, ej) in exps.iter().enumerate() {
                let mut s = [0u8; MAX_DIM];
                for m in 0..MAX_DIM {
                    s[m] = ei[m] + ej[m];
                }
                if s.iter().map(|&x| x as u32).sum::<u32>() <= degree as u32 {
                    let k = index_of[&s];
                    prod.push((k as u32, i as u32, j as u32));
                }
            }
        }
        prod.sort_unstable();

        let mut shift_up = vec![[-1i32; MAX_DIM]; len];
        for (i, e) in exps.iter().enumerate() {
            for m in 0..dim {
                let mut s = *e;
                s[m] += 1;
                if let Some(&k) = index_of.get(&s) {
                    shift_up[i][m] = k as i32;
                }
            }
        }

        let fact = exps
            .iter()
            .map(|e| e.iter().map(|&x| factorial(x)).product())
            .collect();

        JetTable { dim, degree, len, exps, index_of, prod, shift_up, fact }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Number of stored coefficients: binomial(dim + degree, degree).
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Multi-index stored at position `idx`.
    pub fn multi_index(&self, idx: usize) -> [u8; MAX_DIM] {
        self.exps[idx]
    }

    fn index(&self, alpha: &[u8]) -> usize {
        let mut key = [0u8; MAX_DIM];
        key[..alpha.len()].copy_from_slice(alpha);
        *self
            .index_of
            .get(&key)
            .unwrap_or_else(|| panic!("multi-index {alpha:?} outside table"))
    }
}

/// Taylor coefficients of one scalar quantity, tied to a shared [`JetTable`].
#[derive(Clone, Copy)]
pub struct Jet {
    tab: &'static JetTable,
    c: [f64; JET_CAP],
}

impl Jet {
    pub fn constant(tab: &'static JetTable, v: f64) -> Jet {
        let mut c = [0.0; JET_CAP];
        c[0] = v;
        Jet { tab, c }
    }

    /// Seeds coordinate `axis` as an independent variable with value `v`.
    pub fn variable(tab: &'static JetTable, v: f64, axis: usize) -> Jet {
        assert!(axis < tab.dim, "variable axis outside table dimension");
        let mut out = Jet::constant(tab, v);
        if tab.degree >= 1 {
            let mut e = [0u8; MAX_DIM];
            e[axis] = 1;
            out.c[tab.index_of[&e]] = 1.0;
        }
        out
    }

    pub fn table(&self) -> &'static JetTable {
        self.tab
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Raw Taylor coefficient for the `idx`-th multi-index.
    pub fn coeff(&self, idx: usize) -> f64 {
        self.c[idx]
    }

    /// Partial derivative `∂^alpha` evaluated at the expansion point:
    /// the Taylor coefficient times `alpha!`.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let idx = self.tab.index(alpha);
        self.c[idx] * self.tab.fact[idx]
    }

    /// Constant jet carrying `v` in this jet's table.
    pub fn lift(&self, v: f64) -> Jet {
        Jet::constant(self.tab, v)
    }

    /// Formal derivative along `axis`. The top-degree band of the result is
    /// zeroed: information above the input's truncation does not exist.
    pub fn derivative(&self, axis: usize) -> Jet {
        assert!(axis < self.tab.dim);
        let mut out = Jet { tab: self.tab, c: [0.0; JET_CAP] };
        for i in 0..self.tab.len {
            let k = self.tab.shift_up[i][axis];
            if k >= 0 {
                out.c[i] = self.c[k as usize] * (self.tab.exps[i][axis] as f64 + 1.0);
            }
        }
        out
    }

    /// Composes `f` after `self`, given `derivs[k] = f^(k)` at `self.value()`.
    /// Horner evaluation in the nilpotent part keeps every truncated
    /// coefficient exact.
    fn compose(&self, derivs: &[f64]) -> Jet {
        let deg = self.tab.degree;
        debug_assert!(derivs.len() > deg);
        let mut w = *self;
        w.c[0] = 0.0;
        let mut acc = Jet::constant(self.tab, derivs[deg] / factorial(deg as u8));
        for k in (0..deg).rev() {
            acc = acc * w;
            acc.c[0] += derivs[k] / factorial(k as u8);
        }
        acc
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c, s])
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s, c])
    }

    pub fn exp(self) -> Jet {
        let e = self.value().exp();
        self.compose(&[e, e, e, e, e])
    }

    pub fn sinh(self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[s, c, s, c, s])
    }

    pub fn cosh(self) -> Jet {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[c, s, c, s, c])
    }

    pub fn ln(self) -> Jet {
        let u = self.value();
        let r = u.recip();
        self.compose(&[u.ln(), r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r])
    }

    pub fn sqrt(self) -> Jet {
        let u = self.value();
        let s = u.sqrt();
        let r = u.recip();
        self.compose(&[
            s,
            0.5 * s * r,
            -0.25 * s * r * r,
            0.375 * s * r * r * r,
            -0.9375 * s * r * r * r * r,
        ])
    }

    pub fn recip(self) -> Jet {
        let r = self.value().recip();
        let r2 = r * r;
        self.compose(&[r, -r2, 2.0 * r2 * r, -6.0 * r2 * r2, 24.0 * r2 * r2 * r])
    }

    pub fn powi(self, n: i32) -> Jet {
        if n < 0 {
            return self.powi(-n).recip();
        }
        let mut acc = Jet::constant(self.tab, 1.0);
        let mut base = self;
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base;
            }
            k >>= 1;
            if k > 0 {
                base = base * base;
            }
        }
        acc
    }
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.tab.dim)
            .field("degree", &self.tab.degree)
            .field("value", &self.c[0])
            .finish()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, rhs: Jet) -> Jet {
        debug_assert!(std::ptr::eq(self.tab, rhs.tab), "mixed jet tables");
        for i in 0..self.tab.len {
            self.c[i] += rhs.c[i];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: Jet) -> Jet {
        debug_assert!(std::ptr::eq(self.tab, rhs.tab), "mixed jet tables");
        for i in 0..self.tab.len {
            self.c[i] -= rhs.c[i];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for i in 0..self.tab.len {
            self.c[i] = -self.c[i];
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        debug_assert!(std::ptr::eq(self.tab, rhs.tab), "mixed jet tables");
        let mut out = Jet { tab: self.tab, c: [0.0; JET_CAP] };
        for &(k, i, j) in &self.tab.prod {
            out.c[k as usize] += self.c[i as usize] * rhs.c[j as usize];
        }
        out
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.c[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, rhs: f64) -> Jet {
        for i in 0..self.tab.len {
            self.c[i] *= rhs;
        }
        self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: f64) -> Jet {
        self * rhs.recip()
    }
}

/// Scalar type the metric catalog is generic over: plain `f64` for cheap
/// pointwise evaluation, [`Jet`] for derivatives. Only operations every
/// catalog entry needs are included.
pub trait Analytic:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Lifts a plain constant into the same context as `self`.
    fn lift(self, v: f64) -> Self;
    fn value(self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn exp(self) -> Self;
    fn sinh(self) -> Self;
    fn cosh(self) -> Self;
    fn sqrt(self) -> Self;
    fn ln(self) -> Self;
    fn recip(self) -> Self;
    fn powi(self, n: i32) -> Self;
}

impl Analytic for f64 {
    fn lift(self, v: f64) -> f64 {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn sin(self) -> f64 {
        f64::sin(self)
    }
    fn cos(self) -> f64 {
        f64::cos(self)
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn sinh(self) -> f64 {
        f64::sinh(self)
    }
    fn cosh(self) -> f64 {
        f64::cosh(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn recip(self) -> f64 {
        f64::recip(self)
    }
    fn powi(self, n: i32) -> f64 {
        f64::powi(self, n)
    }
}

impl Analytic for Jet {
    fn lift(self, v: f64) -> Jet {
        Jet::lift(&self, v)
    }
    fn value(self) -> f64 {
        Jet::value(&self)
    }
    fn sin(self) -> Jet {
        Jet::sin(self)
    }
    fn cos(self) -> Jet {
        Jet::cos(self)
    }
    fn exp(self) -> Jet {
        Jet::exp(self)
    }
    fn sinh(self) -> Jet {
        Jet::sinh(self)
    }
    fn cosh(self) -> Jet {
        Jet::cosh(self)
    }
    fn sqrt(self) -> Jet {
        Jet::sqrt(self)
    }
    fn ln(self) -> Jet {
        Jet::ln(self)
    }
    fn recip(self) -> Jet {
        Jet::recip(self)
    }
    fn powi(self, n: i32) -> Jet {
        Jet::powi(self, n)
    }
}
