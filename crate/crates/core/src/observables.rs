//! Physical outputs: squeezing parameter, `J_z` variance, magnetization,
//! trajectories, windowed long-time averages, ground-state sweeps and
//! revival-time fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::correlators::{correlators_at, CorrelatorSet};
use crate::error::{Error, Result};
use crate::model::{max_group_velocity, ModelParams};
use crate::quench::{make_quench, ContractionKernel, QuenchSpec};

/// Negative square-root arguments above this are rounding noise.
pub const DISCRIMINANT_TOL: f64 = 1e-12;

/// Negative variances above this are rounding noise.
pub const VARIANCE_TOL: f64 = 1e-9;

/// Post-quench transient skipped by default in averages and statistics.
pub const DEFAULT_TRANSIENT: f64 = 5.0;

/// Default averaging step.
pub const DEFAULT_AVG_STEP: f64 = 0.1;

/// Default window end as a fraction of the predicted first revival.
pub const DEFAULT_WINDOW_FRACTION: f64 = 0.8;

/// Hard cap on the window end as a fraction of the predicted first revival.
pub const MAX_WINDOW_FRACTION: f64 = 0.9;

/// Default revival threshold in baseline standard deviations.
pub const DEFAULT_THRESHOLD_SIGMAS: f64 = 6.0;

/// Squeezing parameter from the correlator sums:
/// `1 + 2Σ(G^xx + G^yy) - 2 sqrt([Σ(G^xx - G^yy)]² + [Σ(G^xy + G^yx)]²)`.
pub fn xi_squared(corrs: &CorrelatorSet, n_sites: usize) -> Result<f64> {
    check_complete(corrs, n_sites)?;
    let mut sum_plus = 0.0;
    let mut sum_minus = 0.0;
    let mut sum_off = 0.0;
    for i in 0..n_sites - 1 {
        sum_plus += corrs.gxx[i] + corrs.gyy[i];
        sum_minus += corrs.gxx[i] - corrs.gyy[i];
        sum_off += corrs.gxy[i] + corrs.gyx[i];
    }
    let disc = sum_minus * sum_minus + sum_off * sum_off;
    // A sum of squares; kept for parity with the general formula.
    let disc = clamp_non_negative(disc, DISCRIMINANT_TOL).ok_or(Error::NegativeDiscriminant(disc))?;
    Ok(1.0 + 2.0 * sum_plus - 2.0 * disc.sqrt())
}

fn clamp_non_negative(x: f64, tol: f64) -> Option<f64> {
    if x >= 0.0 {
        Some(x)
    } else if x > -tol {
        Some(0.0)
    } else {
        None
    }
}

fn check_complete(corrs: &CorrelatorSet, n_sites: usize) -> Result<()> {
    if corrs.max_separation() + 1 != n_sites {
        return Err(Error::InvalidParams(format!(
            "correlator set covers {} separations, chain has {n_sites} sites",
            corrs.max_separation()
        )));
    }
    Ok(())
}

/// `M_z = ⟨J_z⟩ / N`, in `[-1/2, 1/2]`.
pub fn magnetization(kernel: &ContractionKernel) -> f64 {
    kernel.magnetization()
}

/// `ν(J_z) = N(1/4 + Σ_n G_n^zz) - (N M_z)²`.
pub fn variance_jz(kernel: &ContractionKernel, corrs: &CorrelatorSet, n_sites: usize) -> Result<f64> {
    check_complete(corrs, n_sites)?;
    let n = n_sites as f64;
    let var = n * (0.25 + corrs.gzz.iter().sum::<f64>()) - (n * magnetization(kernel)).powi(2);
    clamp_non_negative(var, VARIANCE_TOL).ok_or(Error::NegativeVariance(var))
}

/// Observables at a single time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub xi2: f64,
    pub var_jz: f64,
    pub mz: f64,
}

pub fn sample_kernel(kernel: &ContractionKernel) -> Result<Sample> {
    let n = kernel.n_sites();
    let corrs = correlators_at(kernel)?;
    Ok(Sample {
        time: kernel.time,
        xi2: xi_squared(&corrs, n)?,
        var_jz: variance_jz(kernel, &corrs, n)?,
        mz: magnetization(kernel),
    })
}

pub fn sample_at(quench: &QuenchSpec, t: f64) -> Result<Sample> {
    quench
        .kernel_at(t)
        .and_then(|k| sample_kernel(&k))
        .map_err(|e| e.at_time(t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub params: ModelParams,
    pub h1: f64,
    pub h2: f64,
    pub times: Vec<f64>,
    pub xi2: Vec<f64>,
    pub var_jz: Vec<f64>,
    pub mz: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Uniform grid `t_min, t_min + step, …` up to `t_max` (inclusive within rounding).
pub fn uniform_grid(t_min: f64, t_max: f64, step: f64) -> Vec<f64> {
    let count = ((t_max - t_min) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| t_min + i as f64 * step).collect()
}

/// Evaluates every time point independently; results keep grid order.
pub fn evolve(quench: &QuenchSpec, t_grid: &[f64]) -> Result<Trajectory> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParams("time grid is empty".into()));
    }
    if t_grid.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams(
            "time grid must be non-negative and nondecreasing".into(),
        ));
    }
    let samples: Vec<Sample> = t_grid
        .par_iter()
        .map(|&t| sample_at(quench, t))
        .collect::<Result<_>>()?;
    Ok(Trajectory {
        params: *quench.params(),
        h1: quench.h1,
        h2: quench.h2,
        times: samples.iter().map(|s| s.time).collect(),
        xi2: samples.iter().map(|s| s.xi2).collect(),
        var_jz: samples.iter().map(|s| s.var_jz).collect(),
        mz: samples.iter().map(|s| s.mz).collect(),
    })
}

/// `N / (2 v_max)` for the post-quench field.
pub fn predicted_revival(params: &ModelParams, h2: f64) -> f64 {
    params.n_sites() as f64 / (2.0 * max_group_velocity(params, h2))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AveragingWindow {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
}

impl AveragingWindow {
    /// `[5, 0.8 T]` with step 0.1, where `T` is the earliest predicted revival
    /// over the given post-quench fields. One window serves a whole sweep.
    pub fn default_for(params: &ModelParams, h2_values: &[f64]) -> Self {
        let revival = h2_values
            .iter()
            .map(|&h| predicted_revival(params, h))
            .fold(f64::INFINITY, f64::min);
        Self {
            t_min: DEFAULT_TRANSIENT,
            t_max: DEFAULT_WINDOW_FRACTION * revival,
            step: DEFAULT_AVG_STEP,
        }
    }

    fn validate(&self, params: &ModelParams, h2: f64) -> Result<()> {
        if !(self.t_min >= 0.0 && self.t_max > self.t_min && self.step > 0.0) {
            return Err(Error::InvalidParams(format!(
                "averaging window [{}, {}] with step {} is empty or malformed",
                self.t_min, self.t_max, self.step
            )));
        }
        let revival = predicted_revival(params, h2);
        if self.t_max >= MAX_WINDOW_FRACTION * revival {
            return Err(Error::WindowTooLong {
                t_max: self.t_max,
                revival,
            });
        }
        Ok(())
    }
}

/// Trapezoid-weighted mean of equally spaced samples.
fn trapezoid_mean(values: &[f64]) -> f64 {
    match values.len() {
        0 => f64::NAN,
        1 => values[0],
        n => {
            let inner: f64 = values[1..n - 1].iter().sum();
            (inner + 0.5 * (values[0] + values[n - 1])) / (n - 1) as f64
        }
    }
}

/// Windowed time averages `(mean ξ², mean ν(J_z))`.
pub fn long_time_average(quench: &QuenchSpec, window: &AveragingWindow) -> Result<(f64, f64)> {
    window.validate(quench.params(), quench.h2)?;
    let grid = uniform_grid(window.t_min, window.t_max, window.step);
    let traj = evolve(quench, &grid)?;
    Ok((trapezoid_mean(&traj.xi2), trapezoid_mean(&traj.var_jz)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageCurve {
    pub h1: f64,
    pub h2_values: Vec<f64>,
    pub xi2_avg: Vec<f64>,
    pub var_avg: Vec<f64>,
    /// The averaging window is capped below the first revival.
    pub window: AveragingWindow,
}

pub fn average_sweep(
    params: &ModelParams,
    h1: f64,
    h2_values: &[f64],
    window: &AveragingWindow,
) -> Result<AverageCurve> {
    if h2_values.is_empty() {
        return Err(Error::InvalidParams("h2 list is empty".into()));
    }
    if h2_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("h2 list must be increasing".into()));
    }
    let averages: Vec<(f64, f64)> = h2_values
        .par_iter()
        .map(|&h2| long_time_average(&make_quench(params, h1, h2)?, window))
        .collect::<Result<_>>()?;
    Ok(AverageCurve {
        h1,
        h2_values: h2_values.to_vec(),
        xi2_avg: averages.iter().map(|a| a.0).collect(),
        var_avg: averages.iter().map(|a| a.1).collect(),
        window: *window,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundSweep {
    pub h: Vec<f64>,
    pub xi2: Vec<f64>,
}

/// Ground-state squeezing parameter for each field (null quench at `t = 0`).
pub fn ground_state_sweep(params: &ModelParams, h_values: &[f64]) -> Result<GroundSweep> {
    let xi2 = h_values
        .par_iter()
        .map(|&h| sample_at(&make_quench(params, h, h)?, 0.0).map(|s| s.xi2))
        .collect::<Result<_>>()?;
    Ok(GroundSweep {
        h: h_values.to_vec(),
        xi2,
    })
}

/// Abscissae where `ys` crosses `level`, by linear interpolation.
pub fn crossings(xs: &[f64], ys: &[f64], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..xs.len().saturating_sub(1) {
        let (a, b) = (ys[i] - level, ys[i + 1] - level);
        if a == 0.0 {
            out.push(xs[i]);
        } else if a * b < 0.0 {
            out.push(xs[i] + (xs[i + 1] - xs[i]) * a / (a - b));
        }
    }
    if let (Some(&x), Some(&y)) = (xs.last(), ys.last()) {
        if y == level {
            out.push(x);
        }
    }
    out
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// First revival of the squeezing parameter after a quasi-stationary plateau.
///
/// The plateau statistics come from `baseline = [t_a, t_b]`. The revival is
/// the first sample after `t_b` deviating from the plateau mean by more than
/// `threshold_sigmas` standard deviations, moved to the largest deviation of
/// that excursion (until it falls back under the threshold) and refined by a
/// parabola through the neighbouring samples.
pub fn detect_revival(traj: &Trajectory, baseline: (f64, f64), threshold_sigmas: f64) -> Result<f64> {
    let (t_a, t_b) = baseline;
    if !(threshold_sigmas > 0.0 && t_b > t_a) {
        return Err(Error::InvalidParams(
            "revival detection needs t_b > t_a and a positive threshold".into(),
        ));
    }
    let plateau: Vec<f64> = traj
        .times
        .iter()
        .zip(&traj.xi2)
        .filter(|(t, _)| **t >= t_a && **t <= t_b)
        .map(|(_, x)| *x)
        .collect();
    if plateau.len() < 2 {
        return Err(Error::InvalidParams(
            "baseline window holds fewer than two samples".into(),
        ));
    }
    let (mean, std) = mean_std(&plateau);
    let horizon = traj.times.last().copied().unwrap_or(0.0);
    let deviation: Vec<f64> = traj.xi2.iter().map(|x| (x - mean).abs()).collect();
    let start = traj
        .times
        .iter()
        .position(|&t| t > t_b)
        .ok_or(Error::NoRevivalFound { horizon })?;
    let first = (start..traj.len())
        .find(|&i| deviation[i] > threshold_sigmas * std)
        .ok_or(Error::NoRevivalFound { horizon })?;
    let end = (first..traj.len())
        .find(|&i| deviation[i] <= threshold_sigmas * std)
        .unwrap_or(traj.len());
    let peak = (first..end).fold(first, |best, i| if deviation[i] > deviation[best] { i } else { best });
    if peak + 1 == traj.len() {
        // still rising at the horizon: no extremum inside the data
        return Err(Error::NoRevivalFound { horizon });
    }
    let (t0, t1, t2) = (traj.times[peak - 1], traj.times[peak], traj.times[peak + 1]);
    let (d0, d1, d2) = (deviation[peak - 1], deviation[peak], deviation[peak + 1]);
    let curvature = d0 - 2.0 * d1 + d2;
    let equal_spacing = ((t1 - t0) - (t2 - t1)).abs() < 1e-9 * (t2 - t0);
    if curvature < 0.0 && equal_spacing {
        Ok(t1 + 0.5 * (t1 - t0) * (d0 - d2) / curvature)
    } else {
        Ok(t1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevivalFit {
    pub sizes: Vec<usize>,
    pub revival_times: Vec<f64>,
    /// `k` in `T_rev = k N`.
    pub slope: f64,
    pub slope_err: f64,
    /// `T_rev - k N` per size.
    pub residuals: Vec<f64>,
}

impl RevivalFit {
    /// Velocity implied by `T_rev = N / (2 v)`.
    pub fn implied_velocity(&self) -> f64 {
        1.0 / (2.0 * self.slope)
    }

    pub fn max_relative_residual(&self) -> f64 {
        self.sizes
            .iter()
            .zip(&self.residuals)
            .map(|(&n, r)| (r / (self.slope * n as f64)).abs())
            .fold(0.0, f64::max)
    }
}

/// Least-squares line through the origin.
pub fn fit_through_origin(sizes: &[usize], revival_times: &[f64]) -> Result<RevivalFit> {
    const MIN_SIZES: usize = 3;
    if sizes.len() < MIN_SIZES || sizes.len() != revival_times.len() {
        return Err(Error::InsufficientSizes {
            needed: MIN_SIZES,
            got: sizes.len().min(revival_times.len()),
        });
    }
    let sxx: f64 = sizes.iter().map(|&n| (n as f64).powi(2)).sum();
    let sxy: f64 = sizes.iter().zip(revival_times).map(|(&n, t)| n as f64 * t).sum();
    let slope = sxy / sxx;
    let residuals: Vec<f64> = sizes
        .iter()
        .zip(revival_times)
        .map(|(&n, t)| t - slope * n as f64)
        .collect();
    let dof = (sizes.len() - 1) as f64;
    let slope_err = (residuals.iter().map(|r| r * r).sum::<f64>() / dof / sxx).sqrt();
    Ok(RevivalFit {
        sizes: sizes.to_vec(),
        revival_times: revival_times.to_vec(),
        slope,
        slope_err,
        residuals,
    })
}

/// Time sampling used to locate one revival.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RevivalOptions {
    /// Baseline window as fractions of the predicted revival time.
    pub baseline: (f64, f64),
    /// Trajectory end as a fraction of the predicted revival time.
    pub horizon: f64,
    pub dt: f64,
    pub threshold_sigmas: f64,
}

impl Default for RevivalOptions {
    fn default() -> Self {
        Self {
            baseline: (0.4, 0.8),
            horizon: 1.3,
            dt: 0.25,
            threshold_sigmas: DEFAULT_THRESHOLD_SIGMAS,
        }
    }
}

/// Trajectory and first revival for one chain size.
pub fn revival_time(params: &ModelParams, h1: f64, h2: f64, opts: &RevivalOptions) -> Result<(f64, Trajectory)> {
    let predicted = predicted_revival(params, h2);
    let t_a = opts.baseline.0 * predicted;
    let t_b = opts.baseline.1 * predicted;
    let grid = uniform_grid(t_a, opts.horizon * predicted, opts.dt);
    let traj = evolve(&make_quench(params, h1, h2)?, &grid)?;
    let t = detect_revival(&traj, (t_a, t_b), opts.threshold_sigmas)?;
    Ok((t, traj))
}

/// Revival time for every size and the line `T_rev = k N` through them.
pub fn revival_scan(delta: f64, h1: f64, h2: f64, sizes: &[usize], opts: &RevivalOptions) -> Result<RevivalFit> {
    let times = sizes
        .iter()
        .map(|&n| revival_time(&ModelParams::new(n, delta)?, h1, h2, opts).map(|(t, _)| t))
        .collect::<Result<Vec<_>>>()?;
    fit_through_origin(sizes, &times)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn set_from(gxx: Vec<f64>, gyy: Vec<f64>, gxy: Vec<f64>, gyx: Vec<f64>) -> CorrelatorSet {
        let gzz = vec![0.0; gxx.len()];
        CorrelatorSet { gxx, gyy, gxy, gyx, gzz }
    }

    #[test]
    fn xi_squared_closed_form() {
        let s = set_from(vec![0.1, 0.05], vec![-0.02, 0.01], vec![0.03, 0.0], vec![0.01, -0.02]);
        let plus: f64 = 0.1 + 0.05 - 0.02 + 0.01;
        let minus: f64 = 0.1 + 0.05 + 0.02 - 0.01;
        let off: f64 = 0.03 + 0.01 - 0.02;
        let expected = 1.0 + 2.0 * plus - 2.0 * (minus * minus + off * off).sqrt();
        assert_abs_diff_eq!(xi_squared(&s, 3).unwrap(), expected, epsilon = 1e-15);
        assert!(xi_squared(&s, 4).is_err());
    }

    #[test]
    fn uncorrelated_state_is_coherent() {
        let s = set_from(vec![0.0; 5], vec![0.0; 5], vec![0.0; 5], vec![0.0; 5]);
        assert_eq!(xi_squared(&s, 6).unwrap(), 1.0);
    }

    #[test]
    fn grid_and_trapezoid() {
        let g = uniform_grid(5.0, 6.0, 0.1);
        assert_eq!(g.len(), 11);
        assert_abs_diff_eq!(*g.last().unwrap(), 6.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trapezoid_mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_abs_diff_eq!(trapezoid_mean(&[0.0, 0.0, 3.0]), 0.75);
        assert_eq!(trapezoid_mean(&[4.0]), 4.0);
    }

    #[test]
    fn crossing_interpolation() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [2.0, 0.0, -1.0, 1.0];
        let c = crossings(&xs, &ys, 0.5);
        assert_eq!(c.len(), 2);
        assert_abs_diff_eq!(c[0], 0.75);
        assert_abs_diff_eq!(c[1], 2.75);
    }

    fn synthetic(times: Vec<f64>, xi2: Vec<f64>) -> Trajectory {
        let n = times.len();
        Trajectory {
            params: ModelParams::new(10, 0.8).unwrap(),
            h1: 0.9,
            h2: 1.0,
            times,
            xi2,
            var_jz: vec![0.0; n],
            mz: vec![0.0; n],
        }
    }

    #[test]
    fn constant_trajectory_has_no_revival() {
        let t = uniform_grid(0.0, 50.0, 0.5);
        let x = vec![0.7; t.len()];
        assert!(matches!(
            detect_revival(&synthetic(t, x), (5.0, 20.0), 6.0),
            Err(Error::NoRevivalFound { .. })
        ));
    }

    #[test]
    fn finds_gaussian_bump() {
        let t = uniform_grid(0.0, 80.0, 0.25);
        let x: Vec<f64> = t
            .iter()
            .map(|&t| 0.7 + 1e-4 * (3.1 * t).sin() + 0.05 * (-(t - 60.3f64).powi(2) / 2.0).exp())
            .collect();
        let found = detect_revival(&synthetic(t, x), (10.0, 40.0), 6.0).unwrap();
        assert_abs_diff_eq!(found, 60.3, epsilon = 0.05);
    }

    #[test]
    fn origin_fit() {
        let sizes = [80, 100, 150, 200];
        let times: Vec<f64> = sizes.iter().map(|&n| 0.625 * n as f64).collect();
        let fit = fit_through_origin(&sizes, &times).unwrap();
        assert_abs_diff_eq!(fit.slope, 0.625, epsilon = 1e-14);
        assert_abs_diff_eq!(fit.slope_err, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.implied_velocity(), 0.8, epsilon = 1e-12);
        assert!(matches!(
            fit_through_origin(&[100], &[62.5]),
            Err(Error::InsufficientSizes { needed: 3, got: 1 })
        ));
    }

    #[test]
    fn window_guard() {
        let p = ModelParams::new(100, 0.8).unwrap();
        let w = AveragingWindow { t_min: 5.0, t_max: 60.0, step: 0.1 };
        assert!(matches!(w.validate(&p, 1.0), Err(Error::WindowTooLong { .. })));
        let w = AveragingWindow::default_for(&p, &[1.0]);
        assert_abs_diff_eq!(w.t_max, 0.8 * 62.5, epsilon = 1e-12);
        assert!(w.validate(&p, 1.0).is_ok());
    }
}
