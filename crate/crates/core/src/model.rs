//! XY chain parameterization: momentum grid, quasiparticle dispersion and
//! Bogoliubov angles.
//!
//! The chain is
//! ```text
//! H = -J Σ_n [(1+δ) S^x_n S^x_{n+1} + (1-δ) S^y_n S^y_{n+1}] - h Σ_n S^z_n
//! ```
//! with `J = 1`. After the Jordan-Wigner mapping (periodic fermions, boundary
//! term dropped) every momentum pair `(k, -k)` is an independent two-level
//! problem with coefficients `A_k = cos k + h`, `B_k = δ sin k` and energy
//! `ε_k = sqrt(A_k² + B_k²)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fields closer than this to the critical value are treated as critical.
const CRITICAL_FIELD_TOL: f64 = 1e-12;

/// Modes with energy at or below this are zero modes.
pub const ZERO_MODE_TOL: f64 = 16.0 * f64::EPSILON;

/// Coarse sample count for the group-velocity scan before local refinement.
const VELOCITY_SCAN_POINTS: usize = 8192;

/// Step used for the central-difference derivative of the dispersion.
const VELOCITY_FD_STEP: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    n_sites: usize,
    delta: f64,
}

impl ModelParams {
    pub fn new(n_sites: usize, delta: f64) -> Result<Self> {
        if n_sites < 2 {
            return Err(Error::InvalidParams(format!(
                "n_sites must be at least 2, got {n_sites}"
            )));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParams(format!(
                "anisotropy delta must lie in (0, 1], got {delta}"
            )));
        }
        Ok(Self { n_sites, delta })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Exchange coupling; fixed to one, which sets the unit of energy and time.
    pub fn coupling(&self) -> f64 {
        1.0
    }

    pub fn a_coeff(&self, h: f64, k: f64) -> f64 {
        k.cos() + h
    }

    /// `δ sin k`, exactly zero at `k = ±π` where `sin` rounds to `1.2e-16`.
    pub fn b_coeff(&self, k: f64) -> f64 {
        if k.abs() == PI {
            0.0
        } else {
            self.delta * k.sin()
        }
    }
}

/// Allowed momenta `k = 2πm/N` of the periodic fermion problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    n_sites: usize,
    /// Integer labels `m`, ordered `0, 1, -1, 2, -2, ...` with `N/2` last for even `N`.
    labels: Vec<i64>,
    modes: Vec<f64>,
}

impl MomentumGrid {
    pub fn modes(&self) -> &[f64] {
        &self.modes
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }
}

pub fn momentum_grid(params: &ModelParams) -> MomentumGrid {
    let n = params.n_sites as i64;
    let mut labels = Vec::with_capacity(params.n_sites);
    labels.push(0);
    let half = if n % 2 == 0 { n / 2 - 1 } else { (n - 1) / 2 };
    for m in 1..=half {
        labels.push(m);
        labels.push(-m);
    }
    if n % 2 == 0 {
        labels.push(n / 2);
    }
    let modes = labels
        .iter()
        .map(|&m| {
            if 2 * m == n {
                PI
            } else {
                2.0 * PI * m as f64 / n as f64
            }
        })
        .collect();
    MomentumGrid {
        n_sites: params.n_sites,
        labels,
        modes,
    }
}

pub fn dispersion(params: &ModelParams, h: f64, k: f64) -> f64 {
    params.a_coeff(h, k).hypot(params.b_coeff(k))
}

/// Half the two-argument arctangent of `(B_k, A_k)`, so `2θ ∈ (-π, π]`.
///
/// Fails with [`Error::DegenerateMode`] when `ε_k = 0`; callers building a
/// frame use `θ = 0` for that mode.
pub fn bogoliubov_angle(params: &ModelParams, h: f64, k: f64) -> Result<f64> {
    let a = params.a_coeff(h, k);
    let b = params.b_coeff(k);
    if a == 0.0 && b == 0.0 {
        return Err(Error::DegenerateMode { h, k });
    }
    // atan2(+0, negative) = π but atan2(-0, negative) = -π; keep the branch at +π.
    let b = if b == 0.0 { 0.0 } else { b };
    Ok(0.5 * b.atan2(a))
}

/// Per-mode Bogoliubov data at one field value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrame {
    pub k: f64,
    pub a_coeff: f64,
    pub b_coeff: f64,
    pub theta: f64,
    pub energy: f64,
}

impl ModeFrame {
    pub fn is_zero_mode(&self) -> bool {
        self.energy <= ZERO_MODE_TOL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovFrame {
    pub field: f64,
    pub modes: Vec<ModeFrame>,
}

impl BogoliubovFrame {
    pub fn new(params: &ModelParams, grid: &MomentumGrid, h: f64) -> Self {
        let modes = grid
            .modes()
            .iter()
            .map(|&k| {
                // A zero mode (h = 1, k = π) only shows up when the grid contains π.
                let a_coeff = params.a_coeff(h, k);
                let b_coeff = params.b_coeff(k);
                let energy = a_coeff.hypot(b_coeff);
                let theta = if energy <= ZERO_MODE_TOL {
                    0.0
                } else {
                    bogoliubov_angle(params, h, k).unwrap_or(0.0)
                };
                ModeFrame {
                    k,
                    a_coeff,
                    b_coeff,
                    theta,
                    energy,
                }
            })
            .collect();
        Self { field: h, modes }
    }

    /// `Σ_k ε_k (n_k - 1/2)` evaluated in the quasiparticle vacuum.
    pub fn vacuum_energy(&self) -> f64 {
        -0.5 * self.modes.iter().map(|m| m.energy).sum::<f64>()
    }

    /// Fermion parity of the vacuum, `None` when a zero mode leaves it
    /// undetermined. Paired modes hold zero or two fermions; an unpaired mode
    /// (`k = 0` or `π`) is filled when its angle is 0 and empty when it is `π/2`.
    pub fn is_odd_parity(&self) -> Option<bool> {
        if self.modes.iter().any(ModeFrame::is_zero_mode) {
            return None;
        }
        let filled = self
            .modes
            .iter()
            .filter(|m| m.b_coeff == 0.0 && m.theta.abs() < 0.25 * PI)
            .count();
        Some(filled % 2 == 1)
    }
}

/// Largest quasiparticle group velocity `|dε/dk|` at field `h`.
///
/// At the critical field the revival-controlling velocity is the anisotropy
/// itself, and that value is returned directly.
pub fn max_group_velocity(params: &ModelParams, h: f64) -> f64 {
    if (h - 1.0).abs() < CRITICAL_FIELD_TOL {
        return params.delta;
    }
    let slope = |k: f64| {
        (dispersion(params, h, k + VELOCITY_FD_STEP) - dispersion(params, h, k - VELOCITY_FD_STEP))
            .abs()
            / (2.0 * VELOCITY_FD_STEP)
    };
    let dk = 2.0 * PI / VELOCITY_SCAN_POINTS as f64;
    let (best_idx, _) = (0..VELOCITY_SCAN_POINTS)
        .map(|i| (i, slope(-PI + i as f64 * dk)))
        .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
    let centre = -PI + best_idx as f64 * dk;
    golden_section_max(&slope, centre - dk, centre + dk, 1e-10)
}

fn golden_section_max(f: &impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2)
}
