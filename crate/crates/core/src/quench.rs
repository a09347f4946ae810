//! Sudden field quench `h1 -> h2` and the time-dependent two-point
//! contractions of the Majorana-like operators `A_l = a_l† + a_l`,
//! `B_l = a_l† - a_l`.
//!
//! Sign convention: the fermion occupation `a_l† a_l = 1` is spin up, so the
//! ground state at large field is fully occupied and `M_z -> +1/2`. With the
//! Bogoliubov angle taken from `atan2(δ sin k, cos k + h) / 2`, this fixes
//! the overall sign of the `⟨A B⟩`, `⟨B A⟩` and density sums (checked against
//! the Fock-space oracle in `crate::oracle`).
//!
//! The pre-quench state is the quasiparticle vacuum at `h1`. Its fermion
//! parity is odd below the critical field and, for even `N`, even above it.
//! In the even sector the periodic fermions describe a chain with a twisted
//! boundary, and a string correlator across the long arc picks up the parity
//! sign, `⟨S_0 S_{N-n}⟩ = -⟨S_0 S_n⟩`. Spin correlators on the ring are
//! therefore taken along the shorter arc, `G_n = G_{N-n}`, in both sectors.
//!
//! At `h1 = 1` with even `N` the `k = π` mode has zero energy and the two
//! parity sectors are degenerate. The pre-quench state is then their equal
//! mixture (the zero-temperature limit of the thermal state): the zero mode
//! is half filled and drops out of every contraction.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::model::{momentum_grid, BogoliubovFrame, ModelParams, MomentumGrid};

#[derive(Debug, Clone)]
pub struct QuenchSpec {
    params: ModelParams,
    grid: MomentumGrid,
    pub h1: f64,
    pub h2: f64,
    pub frame1: BogoliubovFrame,
    pub frame2: BogoliubovFrame,
    /// `Φ_k = θ_k(h2) - θ_k(h1)` on the shared grid.
    pub phi: Vec<f64>,
    modes: Vec<ModeTerms>,
    /// `cos(2πj/N)` and `sin(2πj/N)` for `j = 0..N`.
    cos_table: Vec<f64>,
    sin_table: Vec<f64>,
}

/// Per-mode trigonometric factors that do not depend on time.
#[derive(Debug, Clone, Copy)]
struct ModeTerms {
    label: i64,
    /// 0 for a half-filled pre-quench zero mode, 1 otherwise.
    weight: f64,
    cos_2theta: f64,
    sin_2theta: f64,
    cos_2phi: f64,
    sin_2phi: f64,
    energy: f64,
}

pub fn make_quench(params: &ModelParams, h1: f64, h2: f64) -> Result<QuenchSpec> {
    for (name, h) in [("h1", h1), ("h2", h2)] {
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "{name} must be a finite non-negative field, got {h}"
            )));
        }
    }
    let grid = momentum_grid(params);
    let frame1 = BogoliubovFrame::new(params, &grid, h1);
    let frame2 = BogoliubovFrame::new(params, &grid, h2);
    let phi: Vec<f64> = frame1
        .modes
        .iter()
        .zip(&frame2.modes)
        .map(|(m1, m2)| m2.theta - m1.theta)
        .collect();
    let modes = grid
        .labels()
        .iter()
        .zip(frame1.modes.iter().zip(&frame2.modes))
        .zip(&phi)
        .map(|((&label, (m1, m2)), &phi)| ModeTerms {
            label,
            weight: if m1.is_zero_mode() { 0.0 } else { 1.0 },
            cos_2theta: (2.0 * m2.theta).cos(),
            sin_2theta: (2.0 * m2.theta).sin(),
            cos_2phi: (2.0 * phi).cos(),
            sin_2phi: (2.0 * phi).sin(),
            energy: m2.energy,
        })
        .collect();
    let n = params.n_sites();
    let cos_table = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).cos()).collect();
    let sin_table = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
    Ok(QuenchSpec {
        params: *params,
        grid,
        h1,
        h2,
        frame1,
        frame2,
        phi,
        modes,
        cos_table,
        sin_table,
    })
}

impl QuenchSpec {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn grid(&self) -> &MomentumGrid {
        &self.grid
    }

    pub fn n_sites(&self) -> usize {
        self.params.n_sites()
    }

    pub fn is_null(&self) -> bool {
        self.h1 == self.h2
    }

    /// Contractions at time `t` after the quench.
    pub fn kernel_at(&self, t: f64) -> Result<ContractionKernel> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "time must be finite and non-negative, got {t}"
            )));
        }
        Ok(self.build_kernel(t, |energy| {
            let w = 2.0 * energy * t;
            (w.cos(), w.sin())
        }))
    }

    /// Infinite-time average of the contractions: oscillating `cos(2εt)` and
    /// `sin(2εt)` factors dropped mode by mode (zero modes are not oscillating).
    pub fn diagonal_kernel(&self) -> ContractionKernel {
        let mut kernel = self.build_kernel(0.0, |energy| {
            if energy == 0.0 {
                (1.0, 0.0)
            } else {
                (0.0, 0.0)
            }
        });
        kernel.time = f64::INFINITY;
        kernel
    }

    fn build_kernel(&self, t: f64, phase: impl Fn(f64) -> (f64, f64)) -> ContractionKernel {
        let n = self.n_sites();
        let inv_n = 1.0 / n as f64;
        let mut aa = vec![C64::new(0.0, 0.0); n];
        let mut ab = vec![0.0; n];
        let mut ba = vec![0.0; n];
        let mut density = vec![0.0; n];
        for m in &self.modes {
            let (c2et, s2et) = phase(m.energy);
            let static_part = m.weight * m.cos_2phi;
            let dynamic_part = m.weight * m.sin_2phi * c2et;
            let pair_amp = m.weight * m.sin_2phi * s2et;
            // cos(2θ ± kr) and sin(2θ ± kr) via angle addition on the table.
            let idx = m.label.rem_euclid(n as i64) as usize;
            for r in 0..n {
                let j = (idx * r) % n;
                let (ckr, skr) = (self.cos_table[j], self.sin_table[j]);
                let cos_plus = m.cos_2theta * ckr - m.sin_2theta * skr;
                let sin_plus = m.sin_2theta * ckr + m.cos_2theta * skr;
                let cos_minus = m.cos_2theta * ckr + m.sin_2theta * skr;
                let sin_minus = m.sin_2theta * ckr - m.cos_2theta * skr;
                aa[r].im += skr * pair_amp;
                ab[r] -= cos_plus * static_part + sin_plus * dynamic_part;
                ba[r] += cos_minus * static_part + sin_minus * dynamic_part;
                density[r] += (m.sin_2theta * dynamic_part + m.cos_2theta * static_part) * ckr;
            }
        }
        for r in 0..n {
            aa[r] *= inv_n;
            ab[r] *= inv_n;
            ba[r] *= inv_n;
            density[r] *= 0.5 * inv_n;
        }
        density[0] += 0.5;
        ContractionKernel {
            time: t,
            aa,
            ab,
            ba,
            density,
        }
    }
}

/// One of the two Majorana-like operators on a site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Majorana {
    /// `A_l = a_l† + a_l`
    A(usize),
    /// `B_l = a_l† - a_l`
    B(usize),
}

impl Majorana {
    pub fn site(self) -> usize {
        match self {
            Majorana::A(s) | Majorana::B(s) => s,
        }
    }
}

/// Elementary contractions at one time, indexed by site separation `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionKernel {
    pub time: f64,
    /// `⟨A_l A_{l+r}⟩ = ⟨B_l B_{l+r}⟩`, purely imaginary.
    pub aa: Vec<C64>,
    /// `⟨A_l B_{l+r}⟩`
    pub ab: Vec<f64>,
    /// `⟨B_l A_{l+r}⟩`
    pub ba: Vec<f64>,
    /// `⟨a_l† a_{l+r}⟩`
    pub density: Vec<f64>,
}

impl ContractionKernel {
    pub fn n_sites(&self) -> usize {
        self.ab.len()
    }

    /// `⟨left right⟩` for operators ordered with `left.site() <= right.site()`.
    ///
    /// Same-type operators on the same site never occur inside a string and
    /// return the formula value at `r = 0`, which is zero.
    pub fn contraction(&self, left: Majorana, right: Majorana) -> C64 {
        debug_assert!(left.site() <= right.site());
        let r = right.site() - left.site();
        match (left, right) {
            (Majorana::A(_), Majorana::A(_)) | (Majorana::B(_), Majorana::B(_)) => self.aa[r],
            (Majorana::A(_), Majorana::B(_)) => C64::new(self.ab[r], 0.0),
            (Majorana::B(_), Majorana::A(_)) => C64::new(self.ba[r], 0.0),
        }
    }

    pub fn magnetization(&self) -> f64 {
        self.density[0] - 0.5
    }
}
