use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use squeezechain::observables::{
    average_sweep, evolve, fit_through_origin, ground_state_sweep, revival_time, uniform_grid, AveragingWindow,
};
use squeezechain::oracle::{pipeline_deviation, reference_point};
use squeezechain::{make_quench, Error, ModelParams};

use crate::config::{
    AverageSweepConfig, GroundSweepConfig, OracleCheckConfig, QuenchConfig, Resolved, RevivalScanConfig,
};
use crate::output::Table;
use crate::CliError;

/// `steps + 1` evenly spaced points from `lo` to `hi`, endpoints exact.
fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| if i == steps { hi } else { lo + (hi - lo) * i as f64 / steps as f64 })
        .collect()
}

pub fn run(command: &Resolved) -> Result<(Table, Value), CliError> {
    match command {
        Resolved::GroundSweep(c) => ground(c),
        Resolved::Quench(c) => quench(c),
        Resolved::AverageSweep(c) => averages(c),
        Resolved::RevivalScan(c) => revivals(c),
        Resolved::OracleCheck(c) => oracle_check(c),
    }
}

fn ground(c: &GroundSweepConfig) -> Result<(Table, Value), CliError> {
    let params = ModelParams::new(c.n_sites, c.delta)?;
    let sweep = ground_state_sweep(&params, &linspace(c.h_min, c.h_max, c.steps))?;
    let mut table = Table::new(vec!["h", "xi2"]);
    table.rows = sweep.h.iter().zip(&sweep.xi2).map(|(&h, &x)| vec![h, x]).collect();
    Ok((table, Value::Null))
}

fn quench(c: &QuenchConfig) -> Result<(Table, Value), CliError> {
    let params = ModelParams::new(c.n_sites, c.delta)?;
    let traj = evolve(&make_quench(&params, c.h1, c.h2)?, &uniform_grid(0.0, c.t_max, c.dt))?;
    let mut table = Table::new(vec!["t", "xi2", "var_jz", "mz"]);
    table.rows = (0..traj.len())
        .map(|i| vec![traj.times[i], traj.xi2[i], traj.var_jz[i], traj.mz[i]])
        .collect();
    Ok((table, Value::Null))
}

fn averages(c: &AverageSweepConfig) -> Result<(Table, Value), CliError> {
    let params = ModelParams::new(c.n_sites, c.delta)?;
    let h2 = linspace(c.h2_min, c.h2_max, c.h2_steps);
    let window = c.avg_window.unwrap_or_else(|| AveragingWindow::default_for(&params, &h2));
    let curve = average_sweep(&params, c.h1, &h2, &window)?;
    let mut table = Table::new(vec!["h2", "xi2_avg", "var_avg"]);
    table.rows = (0..h2.len())
        .map(|i| vec![curve.h2_values[i], curve.xi2_avg[i], curve.var_avg[i]])
        .collect();
    Ok((table, json!({ "window": window })))
}

fn revivals(c: &RevivalScanConfig) -> Result<(Table, Value), CliError> {
    let mut sizes = Vec::new();
    let mut times = Vec::new();
    let mut skipped = Vec::new();
    for &n in &c.sizes {
        match revival_time(&ModelParams::new(n, c.delta)?, c.h1, c.h2, &c.options) {
            Ok((t, _)) => {
                sizes.push(n);
                times.push(t);
            }
            Err(e @ Error::NoRevivalFound { .. }) => {
                eprintln!("warning: N = {n}: {e}; excluded from the fit");
                skipped.push(n);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let fit = fit_through_origin(&sizes, &times).map_err(|e| CliError::Compute(e.to_string()))?;
    eprintln!(
        "slope k = {:.6} ± {:.6} (implied group velocity {:.6})",
        fit.slope,
        fit.slope_err,
        fit.implied_velocity()
    );
    let mut table = Table::new(vec!["N", "T_rev"]);
    table.integer_columns.push("N");
    table.rows = sizes.iter().zip(&times).map(|(&n, &t)| vec![n as f64, t]).collect();
    let summary = json!({
        "slope": fit.slope,
        "slope_err": fit.slope_err,
        "implied_velocity": fit.implied_velocity(),
        "max_relative_residual": fit.max_relative_residual(),
        "excluded_sizes": skipped,
    });
    Ok((table, summary))
}

fn oracle_check(c: &OracleCheckConfig) -> Result<(Table, Value), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let mut points = Vec::new();
    for &n in &c.sizes {
        for _ in 0..c.tuples {
            let delta = rng.gen_range(0.1..=1.0);
            let h1 = rng.gen_range(0.0..2.5);
            let h2 = rng.gen_range(0.0..2.5);
            let t = rng.gen_range(0.0..12.0);
            points.push((n, delta, h1, h2, t));
        }
        // the zero mode at the critical field
        points.push((n, 0.8, 1.0, 0.6, 2.5));
    }
    let mut table = Table::new(vec!["n_sites", "delta", "h1", "h2", "t", "max_deviation"]);
    table.integer_columns.push("n_sites");
    let mut worst = 0.0_f64;
    for (n, delta, h1, h2, t) in points {
        let rec = reference_point(&ModelParams::new(n, delta)?, h1, h2, t)?;
        let dev = pipeline_deviation(&rec)?;
        worst = worst.max(dev);
        table.rows.push(vec![n as f64, delta, h1, h2, t, dev]);
    }
    let failures = table.rows.iter().filter(|r| !(r[5] <= c.tolerance)).count();
    eprintln!(
        "oracle check: {} points, max deviation {worst:e}, {failures} above {:e}",
        table.rows.len(),
        c.tolerance
    );
    Ok((table, json!({ "max_deviation": worst, "failures": failures })))
}
