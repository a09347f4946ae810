//! Brute-force reference: the quadratic fermion Hamiltonian of the periodic
//! ("c-cycle") chain in the full `2^N` Fock space, exact time evolution by
//! dense diagonalization, and direct measurement of fermion bilinears, spin
//! correlators and collective-spin moments.
//!
//! Basis states are bit masks, bit `j` set meaning site `j` is occupied
//! (spin up). Fermion operators carry the Jordan-Wigner sign
//! `(-1)^(occupied sites below j)`. Spin operators act locally on bits and
//! never see that sign, which keeps the spin correlators measured here
//! independent of the Majorana-string algebra used in [`crate::correlators`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::correlators::{correlators_at, CorrelatorKind};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::observables::sample_kernel;
use crate::quench::{make_quench, Majorana};

pub const ORACLE_MAX_SITES: usize = 10;

/// Parity-sector minima closer than this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

fn check_size(params: &ModelParams) -> Result<()> {
    if params.n_sites() > ORACLE_MAX_SITES {
        return Err(Error::SizeTooLarge {
            n_sites: params.n_sites(),
            max: ORACLE_MAX_SITES,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy)]
enum Ladder {
    Create(usize),
    Annihilate(usize),
}

/// Applies one ladder operator to a basis state; `None` if it annihilates it.
fn ladder(op: Ladder, state: usize) -> Option<(f64, usize)> {
    let (site, create) = match op {
        Ladder::Create(j) => (j, true),
        Ladder::Annihilate(j) => (j, false),
    };
    let bit = 1usize << site;
    let occupied = state & bit != 0;
    if occupied == create {
        return None;
    }
    let sign = if (state & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((sign, state ^ bit))
}

/// Product of ladder operators, rightmost applied first.
fn apply_product(ops: &[Ladder], state: usize) -> Option<(f64, usize)> {
    ops.iter().rev().try_fold((1.0, state), |(amp, s), &op| {
        ladder(op, s).map(|(sign, next)| (amp * sign, next))
    })
}

/// Dense real-symmetric Fock-space Hamiltonian at field `h`.
pub fn fock_hamiltonian(params: &ModelParams, h: f64) -> Result<DMatrix<f64>> {
    check_size(params)?;
    let n = params.n_sites();
    let dim = 1usize << n;
    let delta = params.delta();
    let mut hmat = DMatrix::<f64>::zeros(dim, dim);
    use Ladder::{Annihilate as Ann, Create as Cr};
    for s in 0..dim {
        let occupied = s.count_ones() as f64;
        hmat[(s, s)] -= h * (occupied - 0.5 * n as f64);
        for j in 0..n {
            let l = (j + 1) % n;
            let terms: [(f64, [Ladder; 2]); 4] = [
                (-0.5, [Cr(j), Ann(l)]),
                (-0.5, [Cr(l), Ann(j)]),
                (-0.5 * delta, [Cr(j), Cr(l)]),
                (-0.5 * delta, [Ann(l), Ann(j)]),
            ];
            for (coeff, ops) in terms {
                if let Some((sign, out)) = apply_product(&ops, s) {
                    hmat[(out, s)] += coeff * sign;
                }
            }
        }
    }
    Ok(hmat)
}

/// State vector over the occupation basis.
#[derive(Debug, Clone)]
pub struct FockState {
    pub params: ModelParams,
    pub field: f64,
    pub energy: f64,
    pub amplitudes: DVector<C64>,
}

impl FockState {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    fn dim(&self) -> usize {
        self.amplitudes.len()
    }
}

/// Lowest eigenvalue of the Fock Hamiltonian over both parity sectors.
pub fn fock_ground_energy(params: &ModelParams, h: f64) -> Result<f64> {
    Ok(SymmetricEigen::new(fock_hamiltonian(params, h)?).eigenvalues.min())
}

/// Ground space of the Fock Hamiltonian, one state per parity sector.
///
/// The Hamiltonian conserves fermion parity, so each parity block is
/// diagonalized on its own. Normally one sector wins; the minima meet only
/// when a zero mode sits on the grid (`h = 1`, even `N`), and then both
/// states are returned. Reference values treat them as an equal mixture.
pub fn fock_ground_space(params: &ModelParams, h: f64) -> Result<Vec<FockState>> {
    let hmat = fock_hamiltonian(params, h)?;
    let sector = |odd: bool| {
        let basis: Vec<usize> = (0..hmat.nrows()).filter(|s| (s.count_ones() % 2 == 1) == odd).collect();
        let block = DMatrix::from_fn(basis.len(), basis.len(), |i, j| hmat[(basis[i], basis[j])]);
        let eig = SymmetricEigen::new(block);
        let lowest = eig.eigenvalues.imin();
        let mut amplitudes = DVector::from_element(hmat.nrows(), C64::new(0.0, 0.0));
        for (i, &s) in basis.iter().enumerate() {
            amplitudes[s] = C64::new(eig.eigenvectors[(i, lowest)], 0.0);
        }
        let norm = amplitudes.norm();
        FockState {
            params: *params,
            field: h,
            energy: eig.eigenvalues[lowest],
            amplitudes: amplitudes.unscale(norm),
        }
    };
    let states = [sector(true), sector(false)];
    let e_min = states[0].energy.min(states[1].energy);
    Ok(states.into_iter().filter(|s| s.energy - e_min <= DEGENERACY_TOL).collect())
}

/// The unique ground state; errors on the degenerate `h = 1`, even `N` case.
pub fn fock_ground_state(params: &ModelParams, h: f64) -> Result<FockState> {
    let mut space = fock_ground_space(params, h)?;
    if space.len() > 1 {
        return Err(Error::InvalidParams(format!(
            "ground space at h = {h} is degenerate; use fock_ground_space"
        )));
    }
    Ok(space.remove(0))
}

/// Time evolution under a fixed Hamiltonian via its full eigendecomposition.
pub struct Evolver {
    params: ModelParams,
    field: f64,
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
    /// Initial state in the eigenbasis.
    coeffs: DVector<C64>,
}

impl Evolver {
    pub fn new(initial: &FockState, h: f64) -> Result<Self> {
        let hmat = fock_hamiltonian(&initial.params, h)?;
        let eig = SymmetricEigen::new(hmat);
        let vt = eig.eigenvectors.transpose().map(|x| C64::new(x, 0.0));
        let coeffs = vt * &initial.amplitudes;
        Ok(Self {
            params: initial.params,
            field: h,
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            coeffs,
        })
    }

    pub fn state_at(&self, t: f64) -> FockState {
        let phased = DVector::from_iterator(
            self.coeffs.len(),
            self.coeffs
                .iter()
                .zip(self.energies.iter())
                .map(|(c, &e)| c * C64::from_polar(1.0, -e * t)),
        );
        let amplitudes = self.vectors.map(|x| C64::new(x, 0.0)) * phased;
        let energy = self
            .coeffs
            .iter()
            .zip(self.energies.iter())
            .map(|(c, e)| c.norm_sqr() * e)
            .sum();
        FockState {
            params: self.params,
            field: self.field,
            energy,
            amplitudes,
        }
    }
}

/// Local operators the oracle can apply to a state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LocalOp {
    Fermion(Majorana),
    /// Pauli σ^x on a site (bit flip).
    SigmaX(usize),
    /// Pauli σ^y on a site.
    SigmaY(usize),
    /// Pauli σ^z on a site, `2n - 1`.
    SigmaZ(usize),
    /// `a_j†`
    Create(usize),
    /// `a_j`
    Annihilate(usize),
}

fn apply_local(op: LocalOp, v: &DVector<C64>) -> DVector<C64> {
    let dim = v.len();
    let mut out = DVector::<C64>::zeros(dim);
    for s in 0..dim {
        let amp = v[s];
        if amp == C64::new(0.0, 0.0) {
            continue;
        }
        match op {
            LocalOp::Fermion(m) => {
                let (site, sign_b) = match m {
                    Majorana::A(j) => (j, 1.0),
                    Majorana::B(j) => (j, -1.0),
                };
                if let Some((sg, t)) = ladder(Ladder::Create(site), s) {
                    out[t] += amp * sg;
                }
                if let Some((sg, t)) = ladder(Ladder::Annihilate(site), s) {
                    out[t] += amp * sg * sign_b;
                }
            }
            LocalOp::Create(j) => {
                if let Some((sg, t)) = ladder(Ladder::Create(j), s) {
                    out[t] += amp * sg;
                }
            }
            LocalOp::Annihilate(j) => {
                if let Some((sg, t)) = ladder(Ladder::Annihilate(j), s) {
                    out[t] += amp * sg;
                }
            }
            LocalOp::SigmaX(j) => out[s ^ (1 << j)] += amp,
            LocalOp::SigmaY(j) => {
                // σ^y |down> = -i |up>, σ^y |up> = i |down>
                let up = s & (1 << j) != 0;
                let factor = if up { C64::new(0.0, 1.0) } else { C64::new(0.0, -1.0) };
                out[s ^ (1 << j)] += amp * factor;
            }
            LocalOp::SigmaZ(j) => {
                let z = if s & (1 << j) != 0 { 1.0 } else { -1.0 };
                out[s] += amp * z;
            }
        }
    }
    out
}

/// `⟨ψ| op_1 op_2 … op_k |ψ⟩`.
pub fn fock_measure(state: &FockState, ops: &[LocalOp]) -> C64 {
    let mut v = state.amplitudes.clone();
    for &op in ops.iter().rev() {
        v = apply_local(op, &v);
    }
    state.amplitudes.dotc(&v)
}

/// `⟨J_z⟩` and `⟨J_z²⟩` with `J_z = Σ_j (n_j - 1/2)`, read off the diagonal.
pub fn jz_moments(state: &FockState) -> (f64, f64) {
    let n = state.params.n_sites() as f64;
    (0..state.dim()).fold((0.0, 0.0), |(m1, m2), s| {
        let p = state.amplitudes[s].norm_sqr();
        let jz = s.count_ones() as f64 - 0.5 * n;
        (m1 + p * jz, m2 + p * jz * jz)
    })
}

/// Spin correlator `⟨S^α_0 S^β_n⟩` measured with local Pauli operators.
///
/// This is the Jordan-Wigner string from site 0 to `n`; see
/// [`record_from_state`] for the shorter-arc convention.
pub fn spin_correlator(state: &FockState, kind: CorrelatorKind, n: usize) -> C64 {
    let (first, second) = match kind {
        CorrelatorKind::XX => (LocalOp::SigmaX(0), LocalOp::SigmaX(n)),
        CorrelatorKind::YY => (LocalOp::SigmaY(0), LocalOp::SigmaY(n)),
        CorrelatorKind::XY => (LocalOp::SigmaX(0), LocalOp::SigmaY(n)),
        CorrelatorKind::YX => (LocalOp::SigmaY(0), LocalOp::SigmaX(n)),
    };
    0.25 * fock_measure(state, &[first, second])
}

pub fn spin_zz(state: &FockState, n: usize) -> C64 {
    0.25 * fock_measure(state, &[LocalOp::SigmaZ(0), LocalOp::SigmaZ(n)])
}

/// Squeezing parameter from the collective transverse covariance matrix,
/// `(4/N) λ_min` of `[[⟨J_x²⟩, ½⟨{J_x,J_y}⟩], [·, ⟨J_y²⟩]]`, with the
/// translation-averaged moments `⟨J_α J_β⟩ = N⟨S^α S^β⟩_0 + N Σ_n G_n^{αβ}`.
pub fn squeezing_from_moments(n_sites: usize, corr: &OracleCorrelators) -> f64 {
    let n = n_sites as f64;
    let sum = |v: &[f64]| v.iter().sum::<f64>();
    let jxx = n * 0.25 + n * sum(&corr.gxx);
    let jyy = n * 0.25 + n * sum(&corr.gyy);
    // S^x S^y + S^y S^x vanishes on one site.
    let anti = n * (sum(&corr.gxy) + sum(&corr.gyx));
    let cov = nalgebra::Matrix2::new(jxx, 0.5 * anti, 0.5 * anti, jyy);
    let lambda = cov.symmetric_eigenvalues().min();
    4.0 * lambda / n
}

/// Everything measured on one oracle state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCorrelators {
    pub gxx: Vec<f64>,
    pub gyy: Vec<f64>,
    pub gxy: Vec<f64>,
    pub gyx: Vec<f64>,
    pub gzz: Vec<f64>,
}

/// Reference values for one `(N, δ, h1, h2, t)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRecord {
    pub n_sites: usize,
    pub delta: f64,
    pub h1: f64,
    pub h2: f64,
    pub time: f64,
    /// Imaginary part of `⟨A_0 A_r⟩`, `r = 0..N`.
    pub aa_im: Vec<f64>,
    /// Imaginary part of `⟨B_0 B_r⟩`, `r = 0..N`.
    pub bb_im: Vec<f64>,
    pub ab: Vec<f64>,
    pub ba: Vec<f64>,
    pub density: Vec<f64>,
    pub correlators: OracleCorrelators,
    pub xi2: f64,
    pub var_jz: f64,
    pub mz: f64,
    pub norm: f64,
    pub energy: f64,
}

/// Full set of reference quantities after the quench `h1 -> h2` at time `t`.
pub fn reference_point(params: &ModelParams, h1: f64, h2: f64, t: f64) -> Result<OracleRecord> {
    let states = fock_ground_space(params, h1)?
        .iter()
        .map(|gs| Evolver::new(gs, h2).map(|ev| ev.state_at(t)))
        .collect::<Result<Vec<_>>>()?;
    Ok(record_from_states(&states, h1, t))
}

pub fn record_from_state(state: &FockState, h1: f64, t: f64) -> OracleRecord {
    record_from_states(std::slice::from_ref(state), h1, t)
}

/// Reference quantities of the equal mixture of `states`. Expectation values
/// are averaged; `ξ²` and `ν(J_z)` are then formed from the averages.
pub fn record_from_states(states: &[FockState], h1: f64, t: f64) -> OracleRecord {
    let first = &states[0];
    let n = first.params.n_sites();
    let avg = |f: &dyn Fn(&FockState) -> f64| states.iter().map(f).sum::<f64>() / states.len() as f64;
    let table = |f: &dyn Fn(&FockState, usize) -> f64, range: std::ops::Range<usize>| {
        range.map(|r| avg(&|s| f(s, r))).collect::<Vec<_>>()
    };
    let pair = |s: &FockState, l: Majorana, r: Majorana| {
        fock_measure(s, &[LocalOp::Fermion(l), LocalOp::Fermion(r)])
    };
    // r = 0 entries of aa/bb are the operator squares (±1); only r ≥ 1 enter strings.
    let aa_im = table(
        &|s, r| if r == 0 { 0.0 } else { pair(s, Majorana::A(0), Majorana::A(r)).im },
        0..n,
    );
    let bb_im = table(
        &|s, r| if r == 0 { 0.0 } else { pair(s, Majorana::B(0), Majorana::B(r)).im },
        0..n,
    );
    let ab = table(&|s, r| pair(s, Majorana::A(0), Majorana::B(r)).re, 0..n);
    let ba = table(&|s, r| pair(s, Majorana::B(0), Majorana::A(r)).re, 0..n);
    let density = table(
        &|s, r| fock_measure(s, &[LocalOp::Create(0), LocalOp::Annihilate(r)]).re,
        0..n,
    );
    // Separations along the shorter arc of the ring.
    let family = |kind| table(&|s, d| spin_correlator(s, kind, d.min(n - d)).re, 1..n);
    let correlators = OracleCorrelators {
        gxx: family(CorrelatorKind::XX),
        gyy: family(CorrelatorKind::YY),
        gxy: family(CorrelatorKind::XY),
        gyx: family(CorrelatorKind::YX),
        gzz: table(&|s, d| spin_zz(s, d).re, 1..n),
    };
    let xi2 = squeezing_from_moments(n, &correlators);
    let jz = avg(&|s| jz_moments(s).0);
    let jz2 = avg(&|s| jz_moments(s).1);
    OracleRecord {
        n_sites: n,
        delta: first.params.delta(),
        h1,
        h2: first.field,
        time: t,
        aa_im,
        bb_im,
        ab,
        ba,
        density,
        correlators,
        xi2,
        var_jz: jz2 - jz * jz,
        mz: jz / n as f64,
        norm: avg(&|s| s.norm()),
        energy: avg(&|s| s.energy),
    }
}

/// Largest absolute difference between an oracle record and the
/// free-fermion pipeline at the same point, over every kernel entry, every
/// correlator and the three observables.
pub fn pipeline_deviation(rec: &OracleRecord) -> Result<f64> {
    let params = ModelParams::new(rec.n_sites, rec.delta)?;
    let kernel = make_quench(&params, rec.h1, rec.h2)?.kernel_at(rec.time)?;
    let corr = correlators_at(&kernel)?;
    let sample = sample_kernel(&kernel)?;
    let aa_im: Vec<f64> = kernel.aa.iter().map(|z| z.im).collect();
    let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    // r = 0 entries of aa/bb are not contractions
    let worst = [
        diff(&aa_im[1..], &rec.aa_im[1..]),
        diff(&aa_im[1..], &rec.bb_im[1..]),
        diff(&kernel.ab, &rec.ab),
        diff(&kernel.ba, &rec.ba),
        diff(&kernel.density, &rec.density),
        diff(&corr.gxx, &rec.correlators.gxx),
        diff(&corr.gyy, &rec.correlators.gyy),
        diff(&corr.gxy, &rec.correlators.gxy),
        diff(&corr.gyx, &rec.correlators.gyx),
        diff(&corr.gzz, &rec.correlators.gzz),
        (sample.xi2 - rec.xi2).abs(),
        (sample.var_jz - rec.var_jz).abs(),
        (sample.mz - rec.mz).abs(),
    ];
    Ok(worst.into_iter().fold(0.0, f64::max))
}
