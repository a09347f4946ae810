//! Pfaffians of dense skew-symmetric matrices over `f64` or `Complex64`.
//!
//! [`pfaffian`] is the reference evaluator: Parlett-Reid skew
//! tridiagonalization with partial pivoting, `O(n³)`. [`prefix_pfaffians`]
//! evaluates a whole family of nested sub-Pfaffians with one unpivoted
//! elimination sweep and estimates the rounding error of each value, so the
//! caller can fall back to the reference where the estimate is too large.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest `|M + M^T|` entry accepted as skew-symmetric.
pub const SKEW_TOL: f64 = 1e-12;

/// Pivots below this magnitude are treated as exact zeros.
pub const PIVOT_UNDERFLOW: f64 = 1e-300;

/// Largest dimension accepted by the recursive expansion.
pub const ORACLE_MAX_DIM: usize = 10;

/// Field the Pfaffian routines work over.
pub trait Scalar:
    Copy
    + Debug
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + MulAssign
    + Mul<f64, Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn modulus(self) -> f64;
}

impl Scalar for f64 {
    const ZERO: Self = 0.0;
    const ONE: Self = 1.0;
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Scalar for C64 {
    const ZERO: Self = C64::new(0.0, 0.0);
    const ONE: Self = C64::new(1.0, 0.0);
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Dense row-major matrix with `M = -M^T` and an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix<T = C64> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SkewMatrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![T::ZERO; dim * dim],
        }
    }

    /// Builds the matrix from its strict upper triangle, `upper(i, j)` for `i < j`.
    pub fn from_upper(dim: usize, mut upper: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                let v = upper(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = -v;
            }
        }
        m
    }

    /// Validates a full row-major matrix and zeroes its diagonal.
    pub fn from_dense(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::InvalidParams(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                worst = worst.max((data[i * dim + j] + data[j * dim + i]).modulus());
            }
        }
        if worst >= SKEW_TOL {
            return Err(Error::NotSkewSymmetric(worst));
        }
        let mut m = Self { dim, data };
        for i in 0..dim {
            m.data[i * dim + i] = T::ZERO;
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.dim + j]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> Self {
        Self::from_upper(indices.len(), |i, j| self.get(indices[i], indices[j]))
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * c).collect(),
        }
    }

    /// `D M D` for the diagonal matrix `D = diag(d)`.
    pub fn congruence(&self, d: &[f64]) -> Self {
        assert_eq!(d.len(), self.dim);
        let n = self.dim;
        Self {
            dim: n,
            data: (0..n * n).map(|idx| self.data[idx] * (d[idx / n] * d[idx % n])).collect(),
        }
    }
}

/// Pfaffian by Parlett-Reid tridiagonalization with partial pivoting.
pub fn pfaffian<T: Scalar>(m: &SkewMatrix<T>) -> T {
    let n = m.dim;
    if n == 0 {
        return T::ONE;
    }
    if n % 2 == 1 {
        return T::ZERO;
    }
    let mut a = m.data.clone();
    let mut pf = T::ONE;
    let at = |i: usize, j: usize| i * n + j;
    let mut tau = vec![T::ZERO; n];
    let mut col = vec![T::ZERO; n];
    for k in (0..n - 1).step_by(2) {
        // Pivot: largest entry in column k below the diagonal.
        let (kp, best) = (k + 1..n)
            .map(|i| (i, a[at(i, k)].modulus()))
            .fold((k + 1, -1.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
        if kp != k + 1 {
            for j in 0..n {
                a.swap(at(k + 1, j), at(kp, j));
            }
            for i in 0..n {
                a.swap(at(i, k + 1), at(i, kp));
            }
            pf = -pf;
        }
        if best < PIVOT_UNDERFLOW {
            return T::ZERO;
        }
        let pivot = a[at(k, k + 1)];
        pf *= pivot;
        if k + 2 < n {
            let inv = T::ONE / pivot;
            for j in k + 2..n {
                tau[j] = a[at(k, j)] * inv;
                col[j] = a[at(j, k + 1)];
            }
            for i in k + 2..n {
                let (ti, ci) = (tau[i], col[i]);
                let row = &mut a[at(i, 0)..at(i, 0) + n];
                for j in k + 2..n {
                    row[j] += ti * col[j] - ci * tau[j];
                }
            }
        }
    }
    pf
}

/// Recursive expansion along the first row. Exponential cost; used to check
/// [`pfaffian`] on small matrices.
pub fn pfaffian_oracle<T: Scalar>(m: &SkewMatrix<T>) -> Result<T> {
    if m.dim > ORACLE_MAX_DIM {
        return Err(Error::DimensionTooLarge {
            dim: m.dim,
            max: ORACLE_MAX_DIM,
        });
    }
    let indices: Vec<usize> = (0..m.dim).collect();
    Ok(expand(m, &indices))
}

fn expand<T: Scalar>(m: &SkewMatrix<T>, indices: &[usize]) -> T {
    match indices.len() {
        0 => T::ONE,
        n if n % 2 == 1 => T::ZERO,
        _ => {
            let first = indices[0];
            let rest = &indices[1..];
            let mut total = T::ZERO;
            for (pos, &j) in rest.iter().enumerate() {
                let remaining: Vec<usize> = rest
                    .iter()
                    .enumerate()
                    .filter(|&(p, _)| p != pos)
                    .map(|(_, &x)| x)
                    .collect();
                let term = m.get(first, j) * expand(m, &remaining);
                if pos % 2 == 0 {
                    total += term;
                } else {
                    total += -term;
                }
            }
            total
        }
    }
}

/// Output of [`prefix_pfaffians`]. The vectors stop early if an exactly
/// vanishing pivot ends the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PrefixPfaffians<T = C64> {
    /// `even[j] = pf(M[0..2j+2])`.
    pub even: Vec<T>,
    /// `bordered[j] = pf(M[{0..2j+1} ∪ {2j+2}])`, present while `2j+2 < dim`.
    pub bordered: Vec<T>,
    /// Estimated absolute rounding error of each `even` value.
    pub even_err: Vec<f64>,
    /// Estimated absolute rounding error of each `bordered` value.
    pub bordered_err: Vec<f64>,
}

/// All leading even-order Pfaffians of `m`, plus the "bordered" variants
/// that replace the last index `2j+1` of each leading block by `2j+2`.
///
/// Block elimination of the 2x2 leading pivot `[[0, p], [-p, 0]]` leaves the
/// Schur complement `S`, and `pf(M) = p · pf(S)`; the Schur complement of a
/// larger leading block restricted to any index set equals that index set's
/// own Schur complement, so one sweep yields every prefix value.
///
/// Without pivoting, a leading block close to singular amplifies rounding
/// errors in every later value. The sweep is therefore run a second time on
/// `D M D` with a fixed non-dyadic diagonal `D`, which changes every rounding
/// but not the exact result (up to the known factor `det D`); the difference
/// of the two runs is reported as the error estimate.
pub fn prefix_pfaffians<T: Scalar>(m: &SkewMatrix<T>) -> PrefixPfaffians<T> {
    let d: Vec<f64> = (0..m.dim).map(|i| 1.0 + 0.37 * (1.7 * i as f64 + 0.3).sin()).collect();
    let (even, bordered) = prefix_sweep(m);
    let (even2, bordered2) = prefix_sweep(&m.congruence(&d));
    let mut even_err = Vec::with_capacity(even.len());
    let mut bordered_err = Vec::with_capacity(bordered.len());
    let mut det = 1.0;
    for j in 0..even.len() {
        let (a, b) = (2 * j, 2 * j + 1);
        let lead = det * d[a];
        det = lead * d[b];
        even_err.push(match even2.get(j) {
            Some(&v) => (even[j] - v * (1.0 / det)).modulus(),
            None => f64::INFINITY,
        });
        if let Some(&v) = bordered.get(j) {
            bordered_err.push(match bordered2.get(j) {
                Some(&w) => (v - w * (1.0 / (lead * d[b + 1]))).modulus(),
                None => f64::INFINITY,
            });
        }
    }
    PrefixPfaffians {
        even,
        bordered,
        even_err,
        bordered_err,
    }
}

fn prefix_sweep<T: Scalar>(m: &SkewMatrix<T>) -> (Vec<T>, Vec<T>) {
    let n = m.dim;
    let pairs = n / 2;
    let mut even = Vec::with_capacity(pairs);
    let mut bordered = Vec::with_capacity(pairs);
    // Only the strict upper triangle is read or written.
    let mut s = m.data.clone();
    let mut pf_prev = T::ONE;
    for j in 0..pairs {
        let a = 2 * j;
        let b = a + 1;
        let p = s[a * n + b];
        if p.modulus() < PIVOT_UNDERFLOW {
            break;
        }
        let pf = pf_prev * p;
        even.push(pf);
        if b + 1 < n {
            bordered.push(pf_prev * s[a * n + b + 1]);
        }
        pf_prev = pf;
        let inv = T::ONE / p;
        for i in b + 1..n {
            let ci = s[b * n + i] * inv;
            let di = s[a * n + i] * inv;
            let (head, tail) = s.split_at_mut(i * n);
            let row_i = &mut tail[..n];
            let ra = &head[a * n..a * n + n];
            let rb = &head[b * n..b * n + n];
            for l in i + 1..n {
                row_i[l] += ci * ra[l] - di * rb[l];
            }
        }
    }
    (even, bordered)
}
