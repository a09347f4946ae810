//! Equal-time spin-spin correlators `G_n^{αβ} = ⟨S^α_1 S^β_{1+n}⟩` as
//! Pfaffians of Majorana contraction matrices.
//!
//! With `A_l = a_l† + a_l` and `B_l = a_l† - a_l` the Jordan-Wigner strings
//! collapse to
//!
//! | family | prefactor      | operator string                       |
//! |--------|----------------|---------------------------------------|
//! | xx     | `1/4`          | `B_1 A_2 B_2 … A_n B_n A_{n+1}`       |
//! | yy     | `(-1)^n / 4`   | `A_1 B_2 A_2 … B_n A_n B_{n+1}`       |
//! | xy     | `-i/4`         | `B_1 A_2 B_2 … A_n B_n B_{n+1}`       |
//! | yx     | `i(-1)^n / 4`  | `A_1 B_2 A_2 … B_n A_n A_{n+1}`       |
//! | zz     | `1/4`          | `A_1 B_1 A_{n+1} B_{n+1}`             |
//!
//! The xx string for separation `n` is a prefix of the one for `n + 1`, and
//! the xy string is that prefix with its last operator advanced by one
//! position; likewise for yy/yx. [`Method::Nested`] exploits this to get all
//! separations from one elimination sweep per pair of families.
//!
//! Every contraction is either real (`⟨A B⟩`, `⟨B A⟩`) or imaginary
//! (`⟨A A⟩`, `⟨B B⟩`). Rescaling each `B` by `-i` makes all of them
//! imaginary, so the Pfaffians are evaluated in real arithmetic as
//! `pf(M) = i^(n + #B) pf(R)` for a `2n × 2n` string with `#B` operators `B`.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pfaffian::{pfaffian, prefix_pfaffians, SkewMatrix};
use crate::quench::{ContractionKernel, Majorana};

/// Largest tolerated imaginary part of a correlator before truncation.
pub const IMAG_RESIDUE_TOL: f64 = 1e-9;

/// Largest estimated error of a nested-sweep Pfaffian before the separation
/// is recomputed with the pivoted Pfaffian.
pub const NESTED_ERR_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CorrelatorKind {
    XX,
    YY,
    XY,
    YX,
}

impl CorrelatorKind {
    pub const ALL: [CorrelatorKind; 4] = [Self::XX, Self::YY, Self::XY, Self::YX];

    pub fn label(self) -> &'static str {
        match self {
            Self::XX => "xx",
            Self::YY => "yy",
            Self::XY => "xy",
            Self::YX => "yx",
        }
    }

    /// `D_n^{αβ}`.
    pub fn prefactor(self, n: usize) -> C64 {
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        match self {
            Self::XX => C64::new(0.25, 0.0),
            Self::YY => C64::new(0.25 * sign, 0.0),
            Self::XY => C64::new(0.0, -0.25),
            Self::YX => C64::new(0.0, 0.25 * sign),
        }
    }

    fn x_series(self) -> bool {
        matches!(self, Self::XX | Self::XY)
    }

    /// `D_n · i^(n + #B)`, the factor in front of the real Pfaffian.
    fn real_prefactor(self, n: usize) -> C64 {
        let b_count = operator_string(self, n)
            .iter()
            .filter(|op| matches!(op, Majorana::B(_)))
            .count();
        self.prefactor(n) * C64::i().powu((n + b_count) as u32 % 4)
    }
}

/// Operator at position `p` of the long x-series string `B_0 A_1 B_1 A_2 B_2 …`
/// (or the y-series `A_0 B_1 A_1 B_2 A_2 …`), sites counted from zero.
fn series_op(x_series: bool, p: usize) -> Majorana {
    if p == 0 {
        return if x_series { Majorana::B(0) } else { Majorana::A(0) };
    }
    let site = (p + 1) / 2;
    match (x_series, p % 2 == 1) {
        (true, true) | (false, false) => Majorana::A(site),
        (true, false) | (false, true) => Majorana::B(site),
    }
}

/// Operator string whose expectation gives `G_n` up to the prefactor.
pub fn operator_string(kind: CorrelatorKind, n: usize) -> Vec<Majorana> {
    let x = kind.x_series();
    let mut ops: Vec<Majorana> = (0..2 * n - 1).map(|p| series_op(x, p)).collect();
    ops.push(match kind {
        CorrelatorKind::XX | CorrelatorKind::YX => Majorana::A(n),
        CorrelatorKind::YY | CorrelatorKind::XY => Majorana::B(n),
    });
    ops
}

fn check_separation(kernel: &ContractionKernel, n: usize) -> Result<()> {
    let max = kernel.n_sites() - 1;
    if n == 0 || n > max {
        return Err(Error::SeparationOutOfRange { n, max });
    }
    Ok(())
}

fn contraction_matrix(kernel: &ContractionKernel, ops: &[Majorana]) -> SkewMatrix {
    SkewMatrix::from_upper(ops.len(), |i, j| kernel.contraction(ops[i], ops[j]))
}

/// Contraction with every `B` replaced by `-i B`, divided by `i`.
fn rotated_contraction(kernel: &ContractionKernel, left: Majorana, right: Majorana) -> f64 {
    let r = right.site() - left.site();
    match (left, right) {
        (Majorana::A(_), Majorana::A(_)) => kernel.aa[r].im,
        (Majorana::B(_), Majorana::B(_)) => -kernel.aa[r].im,
        (Majorana::A(_), Majorana::B(_)) => -kernel.ab[r],
        (Majorana::B(_), Majorana::A(_)) => -kernel.ba[r],
    }
}

fn rotated_matrix(kernel: &ContractionKernel, ops: &[Majorana]) -> SkewMatrix<f64> {
    SkewMatrix::from_upper(ops.len(), |i, j| rotated_contraction(kernel, ops[i], ops[j]))
}

/// The `2n × 2n` matrix of contractions `⟨φ_i φ_j⟩` for one correlator.
pub fn assemble_string_matrix(
    kernel: &ContractionKernel,
    n: usize,
    kind: CorrelatorKind,
) -> Result<SkewMatrix> {
    check_separation(kernel, n)?;
    Ok(contraction_matrix(kernel, &operator_string(kind, n)))
}

fn to_real(value: C64, kind: &'static str, n: usize) -> Result<f64> {
    if value.im.abs() >= IMAG_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue {
            kind,
            n,
            residue: value.im,
        });
    }
    Ok(value.re)
}

/// `G_n^{zz} = ¼ pf` of the 4×4 matrix over `(A_1, B_1, A_{n+1}, B_{n+1})`.
pub fn gzz(kernel: &ContractionKernel, n: usize) -> Result<f64> {
    check_separation(kernel, n)?;
    let ops = [Majorana::A(0), Majorana::B(0), Majorana::A(n), Majorana::B(n)];
    let m = contraction_matrix(kernel, &ops);
    let pf = m.get(0, 1) * m.get(2, 3) - m.get(0, 2) * m.get(1, 3) + m.get(0, 3) * m.get(1, 2);
    to_real(0.25 * pf, "zz", n)
}

/// Single correlator by direct pivoted Pfaffian of its own matrix.
pub fn correlator(kernel: &ContractionKernel, n: usize, kind: CorrelatorKind) -> Result<f64> {
    check_separation(kernel, n)?;
    let pf = pfaffian(&rotated_matrix(kernel, &operator_string(kind, n)));
    to_real(kind.real_prefactor(n) * pf, kind.label(), n)
}

/// How the `O(N)` Pfaffians per family are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Method {
    /// Every separation up to `N/2` from one unpivoted elimination sweep
    /// per family pair, `O(N³)`, with fallback to the pivoted Pfaffian wherever the
    /// sweep's error estimate is too large.
    #[default]
    Nested,
    /// Independent pivoted Pfaffian for every separation, `O(N⁴)`.
    Direct,
}

/// Correlators for separations `n = 1..N-1`; index `n - 1` holds `G_n`.
///
/// Separations are measured along the shorter arc of the ring, so
/// `G_n = G_{N-n}` and only `n ≤ N/2` is ever evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatorSet {
    pub gxx: Vec<f64>,
    pub gyy: Vec<f64>,
    pub gxy: Vec<f64>,
    pub gyx: Vec<f64>,
    pub gzz: Vec<f64>,
}

impl CorrelatorSet {
    pub fn max_separation(&self) -> usize {
        self.gxx.len()
    }

    pub fn get(&self, kind: CorrelatorKind, n: usize) -> f64 {
        let v = match kind {
            CorrelatorKind::XX => &self.gxx,
            CorrelatorKind::YY => &self.gyy,
            CorrelatorKind::XY => &self.gxy,
            CorrelatorKind::YX => &self.gyx,
        };
        v[n - 1]
    }
}

pub fn correlators_at(kernel: &ContractionKernel) -> Result<CorrelatorSet> {
    correlators_with(kernel, Method::default())
}

pub fn correlators_with(kernel: &ContractionKernel, method: Method) -> Result<CorrelatorSet> {
    let n_sites = kernel.n_sites();
    let (x, y) = match method {
        Method::Direct => {
            let family = |kind| -> Result<Vec<f64>> {
                let half: Vec<f64> = (1..=n_sites / 2)
                    .into_par_iter()
                    .map(|n| correlator(kernel, n, kind))
                    .collect::<Result<_>>()?;
                Ok(mirror(&half, n_sites))
            };
            rayon::join(
                || Ok((family(CorrelatorKind::XX)?, family(CorrelatorKind::XY)?)),
                || Ok((family(CorrelatorKind::YY)?, family(CorrelatorKind::YX)?)),
            )
        }
        Method::Nested => rayon::join(
            || nested_pair(kernel, true),
            || nested_pair(kernel, false),
        ),
    };
    let (gxx, gxy) = x?;
    let (gyy, gyx) = y?;
    let gzz = (1..n_sites).map(|n| gzz(kernel, n)).collect::<Result<_>>()?;
    Ok(CorrelatorSet {
        gxx,
        gyy,
        gxy,
        gyx,
        gzz,
    })
}

/// xx and xy (or yy and yx) up to `N/2` from one series string, then mirrored.
fn nested_pair(kernel: &ContractionKernel, x_series: bool) -> Result<(Vec<f64>, Vec<f64>)> {
    let n_sites = kernel.n_sites();
    let (diag_kind, off_kind) = if x_series {
        (CorrelatorKind::XX, CorrelatorKind::XY)
    } else {
        (CorrelatorKind::YY, CorrelatorKind::YX)
    };
    let last = n_sites / 2;
    let ops: Vec<Majorana> = (0..2 * last + 1).map(|p| series_op(x_series, p)).collect();
    let sweep = prefix_pfaffians(&rotated_matrix(kernel, &ops));
    let trusted = (1..=last)
        .take_while(|&n| {
            let ok = |errs: &[f64]| errs.get(n - 1).is_some_and(|&e| e <= NESTED_ERR_TOL);
            ok(&sweep.even_err) && ok(&sweep.bordered_err)
        })
        .count();
    let values: Vec<(f64, f64)> = (1..=last)
        .into_par_iter()
        .map(|n| {
            if n <= trusted {
                Ok((
                    to_real(diag_kind.real_prefactor(n) * sweep.even[n - 1], diag_kind.label(), n)?,
                    to_real(off_kind.real_prefactor(n) * sweep.bordered[n - 1], off_kind.label(), n)?,
                ))
            } else {
                Ok((correlator(kernel, n, diag_kind)?, correlator(kernel, n, off_kind)?))
            }
        })
        .collect::<Result<_>>()?;
    let (diag, off): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
    Ok((mirror(&diag, n_sites), mirror(&off, n_sites)))
}

/// Extends values for `n = 1..=N/2` to `n = 1..N` by `G_n = G_{N-n}`.
fn mirror(half: &[f64], n_sites: usize) -> Vec<f64> {
    (1..n_sites).map(|n| half[n.min(n_sites - n) - 1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ModelParams;
    use crate::quench::make_quench;
    use approx::assert_abs_diff_eq;

    fn kernel(n: usize, delta: f64, h1: f64, h2: f64, t: f64) -> ContractionKernel {
        make_quench(&ModelParams::new(n, delta).unwrap(), h1, h2)
            .unwrap()
            .kernel_at(t)
            .unwrap()
    }

    #[test]
    fn strings_match_table() {
        use Majorana::{A, B};
        assert_eq!(operator_string(CorrelatorKind::XX, 2), vec![B(0), A(1), B(1), A(2)]);
        assert_eq!(operator_string(CorrelatorKind::YY, 2), vec![A(0), B(1), A(1), B(2)]);
        assert_eq!(operator_string(CorrelatorKind::XY, 2), vec![B(0), A(1), B(1), B(2)]);
        assert_eq!(operator_string(CorrelatorKind::YX, 2), vec![A(0), B(1), A(1), A(2)]);
        assert_eq!(operator_string(CorrelatorKind::XX, 1), vec![B(0), A(1)]);
    }

    #[test]
    fn separation_range_is_checked() {
        let k = kernel(6, 0.8, 0.5, 1.0, 0.3);
        assert!(matches!(
            assemble_string_matrix(&k, 0, CorrelatorKind::XX),
            Err(Error::SeparationOutOfRange { n: 0, max: 5 })
        ));
        assert!(assemble_string_matrix(&k, 6, CorrelatorKind::XX).is_err());
        assert!(gzz(&k, 6).is_err());
        assert!(assemble_string_matrix(&k, 5, CorrelatorKind::YX).is_ok());
    }

    #[test]
    fn nearest_neighbour_closed_forms() {
        let k = kernel(10, 0.8, 0.5, 1.5, 0.7);
        let xx = assemble_string_matrix(&k, 1, CorrelatorKind::XX).unwrap();
        assert_eq!(xx.get(0, 1), C64::new(k.ba[1], 0.0));
        assert_abs_diff_eq!(correlator(&k, 1, CorrelatorKind::XX).unwrap(), 0.25 * k.ba[1]);
        let xy = correlator(&k, 1, CorrelatorKind::XY).unwrap();
        assert_abs_diff_eq!(xy, 0.25 * k.aa[1].im, epsilon = 1e-16);
        let zz = gzz(&k, 1).unwrap();
        let expected = 0.25 * (k.ab[0] * k.ab[0] - (k.aa[1] * k.aa[1]).re + k.ab[1] * k.ba[1]);
        assert_abs_diff_eq!(zz, expected, epsilon = 1e-15);
    }

    #[test]
    fn null_quench_has_no_off_diagonal_correlations() {
        let k = kernel(12, 0.8, 0.8, 0.8, 3.0);
        let set = correlators_at(&k).unwrap();
        for n in 1..12 {
            assert_abs_diff_eq!(set.get(CorrelatorKind::XY, n), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(set.get(CorrelatorKind::YX, n), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn nested_agrees_with_direct() {
        for &(n, delta, h1, h2, t) in &[
            (16, 0.8, 0.5, 1.5, 0.7),
            (30, 0.8, 0.8, 1.0, 12.0),
            (31, 0.4, 2.0, 0.2, 4.4),
            (24, 1.0, 0.0, 0.0, 0.0),
            (20, 0.8, 50.0, 50.0, 0.0),
            (40, 0.8, 0.6, 0.6, 0.0),
            (60, 0.8, 3.0, 0.2, 30.0),
            (64, 0.8, 1.0, 1.0, 0.0),
        ] {
            let k = kernel(n, delta, h1, h2, t);
            let a = correlators_with(&k, Method::Nested).unwrap();
            let b = correlators_with(&k, Method::Direct).unwrap();
            for kind in CorrelatorKind::ALL {
                for s in 1..n {
                    let (x, y) = (a.get(kind, s), b.get(kind, s));
                    assert!((x - y).abs() < 1e-11, "{n} {delta} {h1} {h2} {t} {kind:?} {s}: {x} vs {y}");
                }
            }
            assert_eq!(a.gzz, b.gzz);
        }
    }

    #[test]
    fn real_evaluation_matches_complex_matrix() {
        let k = kernel(14, 0.7, 0.4, 1.3, 2.2);
        for kind in CorrelatorKind::ALL {
            for n in 1..14 {
                let m = assemble_string_matrix(&k, n, kind).unwrap();
                let complex = kind.prefactor(n) * pfaffian(&m);
                assert_abs_diff_eq!(complex.im, 0.0, epsilon = 1e-14);
                assert_abs_diff_eq!(correlator(&k, n, kind).unwrap(), complex.re, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn real_prefactors_are_quarter_signs() {
        for n in 1..6 {
            let s = if n % 2 == 0 { 0.25 } else { -0.25 };
            assert_eq!(CorrelatorKind::XX.real_prefactor(n), C64::new(s, 0.0));
            assert_eq!(CorrelatorKind::YY.real_prefactor(n), C64::new(0.25, 0.0));
            assert_eq!(CorrelatorKind::XY.real_prefactor(n), C64::new(s, 0.0));
            assert_eq!(CorrelatorKind::YX.real_prefactor(n), C64::new(0.25, 0.0));
        }
    }

    #[test]
    fn diagonal_kernel_matches_direct() {
        let q = make_quench(&ModelParams::new(16, 0.8).unwrap(), 0.5, 1.5).unwrap();
        let k = q.diagonal_kernel();
        let a = correlators_with(&k, Method::Nested).unwrap();
        let b = correlators_with(&k, Method::Direct).unwrap();
        for kind in CorrelatorKind::ALL {
            for s in 1..16 {
                assert_abs_diff_eq!(a.get(kind, s), b.get(kind, s), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn correlators_are_bounded() {
        let k = kernel(40, 0.7, 0.3, 1.8, 6.1);
        let set = correlators_at(&k).unwrap();
        for v in set.gxx.iter().chain(&set.gyy).chain(&set.gxy).chain(&set.gyx).chain(&set.gzz) {
            assert!(v.abs() <= 0.25 + 1e-12);
        }
    }

    #[test]
    fn polarized_zz_factorizes() {
        let k = kernel(21, 0.8, 50.0, 50.0, 0.0);
        let m = k.magnetization();
        for n in 1..21 {
            let g = gzz(&k, n).unwrap();
            assert_abs_diff_eq!(g, 0.25, epsilon = 1e-3);
            assert_abs_diff_eq!(g, m * m, epsilon = 1e-3);
        }
    }
}
