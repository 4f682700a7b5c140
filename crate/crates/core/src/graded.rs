//! Singular value decomposition of row-graded matrices `diag(d) · G` whose
//! scales `d` span far more than the `f64` exponent range.
//!
//! Entries are held as [`Ext`] values (an `f64` mantissa with an unbounded
//! binary exponent). Rows are sorted by decreasing scale, reduced to a
//! triangular factor by Givens rotations with row and column pivoting, and the
//! factor is orthogonalized by one-sided Jacobi.

use std::cmp::Ordering;
use std::f64::consts::LN_2;
use std::ops::{Add, Div, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// `mant · 2^exp` with `0.5 ≤ |mant| < 1`, or `mant = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Ext {
    mant: f64,
    exp: i64,
}

fn frexp(x: f64) -> (f64, i64) {
    if x == 0.0 || !x.is_finite() {
        return (x, 0);
    }
    let bits = x.to_bits();
    let biased = ((bits >> 52) & 0x7ff) as i64;
    if biased == 0 {
        let (m, e) = frexp(x * 2f64.powi(64));
        return (m, e - 64);
    }
    let m = f64::from_bits((bits & !(0x7ffu64 << 52)) | (1022u64 << 52));
    (m, biased - 1022)
}

fn pow2(e: i64) -> f64 {
    debug_assert!((-1022..=1023).contains(&e));
    f64::from_bits(((e + 1023) as u64) << 52)
}

fn ldexp(x: f64, e: i64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let (m, e0) = frexp(x);
    let total = e0 + e;
    if total > 1024 {
        return f64::INFINITY.copysign(x);
    }
    if total < -1075 {
        return 0.0f64.copysign(x);
    }
    let half = total / 2;
    m * pow2(half) * pow2(total - half)
}

impl Ext {
    pub const ZERO: Ext = Ext { mant: 0.0, exp: 0 };
    pub const ONE: Ext = Ext { mant: 0.5, exp: 1 };

    fn new(mant: f64, exp: i64) -> Ext {
        let (m, e) = frexp(mant);
        if m == 0.0 {
            Ext::ZERO
        } else {
            Ext { mant: m, exp: exp + e }
        }
    }

    pub fn from_f64(x: f64) -> Ext {
        Ext::new(x, 0)
    }

    /// `e^l`.
    pub fn from_ln(l: f64) -> Ext {
        let e = (l / LN_2).floor();
        Ext::new((l - e * LN_2).exp(), e as i64)
    }

    pub fn to_f64(self) -> f64 {
        ldexp(self.mant, self.exp)
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0.0
    }

    /// Natural log of `|self|`; `−∞` at zero.
    pub fn ln_abs(self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mant.abs().ln() + self.exp as f64 * LN_2
        }
    }

    pub fn abs(self) -> Ext {
        Ext { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn signum(self) -> f64 {
        if self.mant < 0.0 {
            -1.0
        } else {
            1.0
        }
    }

    pub fn cmp_abs(self, other: Ext) -> Ordering {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => Ordering::Equal,
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => self.exp.cmp(&other.exp).then(self.mant.abs().total_cmp(&other.mant.abs())),
        }
    }

    pub fn sqrt(self) -> Ext {
        debug_assert!(self.mant >= 0.0);
        if self.is_zero() {
            return Ext::ZERO;
        }
        let (m, e) = if self.exp.rem_euclid(2) == 1 { (self.mant * 2.0, self.exp - 1) } else { (self.mant, self.exp) };
        Ext::new(m.sqrt(), e / 2)
    }

    /// `√(a² + b²)` without intermediate overflow.
    pub fn hypot(a: Ext, b: Ext) -> Ext {
        let (big, small) = if a.cmp_abs(b) == Ordering::Less { (b.abs(), a.abs()) } else { (a.abs(), b.abs()) };
        if big.is_zero() {
            return Ext::ZERO;
        }
        let r = (small / big).to_f64();
        big * Ext::from_f64((1.0 + r * r).sqrt())
    }
}

impl Add for Ext {
    type Output = Ext;
    fn add(self, rhs: Ext) -> Ext {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (hi, lo) = if self.exp >= rhs.exp { (self, rhs) } else { (rhs, self) };
        let shift = hi.exp - lo.exp;
        if shift > 1100 {
            return hi;
        }
        Ext::new(hi.mant + ldexp(lo.mant, -shift), hi.exp)
    }
}

impl Neg for Ext {
    type Output = Ext;
    fn neg(self) -> Ext {
        Ext { mant: -self.mant, exp: self.exp }
    }
}

impl Sub for Ext {
    type Output = Ext;
    fn sub(self, rhs: Ext) -> Ext {
        self + (-rhs)
    }
}

impl Mul for Ext {
    type Output = Ext;
    fn mul(self, rhs: Ext) -> Ext {
        Ext::new(self.mant * rhs.mant, self.exp + rhs.exp)
    }
}

impl Div for Ext {
    type Output = Ext;
    fn div(self, rhs: Ext) -> Ext {
        assert!(!rhs.is_zero(), "division by zero");
        Ext::new(self.mant / rhs.mant, self.exp - rhs.exp)
    }
}

fn dot(x: &[Ext], y: &[Ext]) -> Ext {
    x.iter().zip(y).fold(Ext::ZERO, |acc, (&a, &b)| acc + a * b)
}

const MAX_SWEEPS: usize = 80;

/// Right singular vectors of `F = diag(e^{ln_scale}) · g` and the natural logs
/// of the matching singular values, in descending singular-value order.
///
/// `g` must have at least as many rows as columns and full column rank.
pub(crate) fn graded_right_svd(g: &DMatrix<f64>, ln_scale: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (rows, cols) = g.shape();
    assert_eq!(ln_scale.len(), rows);
    assert!(rows >= cols, "graded SVD needs a tall matrix");
    if cols == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }

    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&i, &j| ln_scale[j].total_cmp(&ln_scale[i]).then(i.cmp(&j)));
    let mut f: Vec<Vec<Ext>> = order
        .iter()
        .map(|&i| {
            let s = Ext::from_ln(ln_scale[i]);
            g.row(i).iter().map(|&x| Ext::from_f64(x) * s).collect()
        })
        .collect();
    let mut perm: Vec<usize> = (0..cols).collect();

    for j in 0..cols {
        let pivot_col = (j..cols)
            .max_by(|&p, &q| {
                let np = (j..rows).fold(Ext::ZERO, |acc, i| acc + f[i][p] * f[i][p]);
                let nq = (j..rows).fold(Ext::ZERO, |acc, i| acc + f[i][q] * f[i][q]);
                np.cmp_abs(nq).then(q.cmp(&p))
            })
            .expect("non-empty column range");
        if pivot_col != j {
            for row in f.iter_mut() {
                row.swap(j, pivot_col);
            }
            perm.swap(j, pivot_col);
        }
        let pivot_row = (j..rows).max_by(|&p, &q| f[p][j].cmp_abs(f[q][j]).then(q.cmp(&p))).expect("non-empty row range");
        f.swap(j, pivot_row);
        for i in j + 1..rows {
            if f[i][j].is_zero() {
                continue;
            }
            let h = Ext::hypot(f[j][j], f[i][j]);
            let c = f[j][j] / h;
            let s = f[i][j] / h;
            for t in j..cols {
                let a = f[j][t];
                let b = f[i][t];
                f[j][t] = c * a + s * b;
                f[i][t] = c * b - s * a;
            }
            f[i][j] = Ext::ZERO;
        }
    }

    // Columns of Rᵀ are the rows of R.
    let mut m: Vec<Vec<Ext>> = f.into_iter().take(cols).collect();
    let threshold = 4.0 * f64::EPSILON;
    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = dot(&m[p], &m[p]);
                let beta = dot(&m[q], &m[q]);
                let gamma = dot(&m[p], &m[q]);
                if gamma.is_zero() || (gamma / (alpha * beta).sqrt()).to_f64().abs() <= threshold {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (Ext::from_f64(2.0) * gamma);
                let t = Ext::from_f64(zeta.signum()) / (zeta.abs() + (Ext::ONE + zeta * zeta).sqrt());
                let c = Ext::ONE / (Ext::ONE + t * t).sqrt();
                let s = c * t;
                for i in 0..cols {
                    let x = m[p][i];
                    let y = m[q][i];
                    m[p][i] = c * x - s * y;
                    m[q][i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS, off_diagonal: f64::NAN });
    }

    let mut triples: Vec<(f64, Vec<f64>)> = Vec::with_capacity(cols);
    for col in &m {
        let sigma = dot(col, col).sqrt();
        if sigma.is_zero() {
            return Err(Error::Domain("graded matrix is rank deficient".into()));
        }
        let mut u = vec![0.0; cols];
        for (j, &x) in col.iter().enumerate() {
            u[perm[j]] = (x / sigma).to_f64();
        }
        triples.push((sigma.ln_abs(), u));
    }
    triples.sort_by(|a, b| b.0.total_cmp(&a.0));
    let ln_sigma = triples.iter().map(|t| t.0).collect();
    let mut u = DMatrix::zeros(cols, cols);
    for (k, (_, v)) in triples.iter().enumerate() {
        for (i, &x) in v.iter().enumerate() {
            u[(i, k)] = x;
        }
    }
    Ok((ln_sigma, u))
}
