// SPDX-License-Identifier: Apache-2.0

//! Entanglement survival, sudden death and revival, and the critical
//! coupling that separates initial growth from initial decay.

use rayon::prelude::*;

use crate::bath::BathSpec;
use crate::dynamics::{evolve, ModelKind, SystemParams, Trajectory};
use crate::error::{Error, Result};

/// Default E_N threshold for death detection.
pub const DEFAULT_EPS: f64 = 1e-10;

/// Default probe time for the initial-growth classifier.
pub const DEFAULT_PROBE_DT: f64 = 1e-2;

fn mean_occupation(kt: f64) -> Result<f64> {
    if !(kt > 0.0) {
        return Err(Error::Domain(format!("temperature must be > 0, got {kt}")));
    }
    Ok(1.0 / (1.0 / kt).exp_m1())
}

/// Squeezing r_c = ½ln(2N̄ + 1) above which a thermalizing common bath
/// cannot fully disentangle the pair (Ω_r = 1).
pub fn survival_threshold(kt: f64) -> Result<f64> {
    Ok(0.5 * (2.0 * mean_occupation(kt)? + 1.0).ln())
}

/// Time at which the Markovian rotating-wave reference becomes separable,
/// or `None` if it never does (r ≥ r_c).
pub fn markovian_separability_time(r: f64, kt: f64, gamma0: f64) -> Result<Option<f64>> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("squeezing r must be finite and >= 0, got {r}")));
    }
    if !(gamma0 > 0.0 && gamma0.is_finite()) {
        return Err(Error::Domain(format!("gamma0 must be finite and > 0, got {gamma0}")));
    }
    let width = 2.0 * mean_occupation(kt)? + 1.0;
    if r >= survival_threshold(kt)? {
        return Ok(None);
    }
    let gamma = 2.0 * gamma0;
    let t = ((width - (-2.0 * r).exp()) / (width - (2.0 * r).exp())).ln() / (2.0 * gamma);
    Ok(Some(t))
}

/// Entanglement deaths and revivals detected along a trajectory.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SeparabilityEvents {
    pub death_times: Vec<f64>,
    pub revival_times: Vec<f64>,
    /// E_N is still positive at the last sample.
    pub survived: bool,
}

// Where V_s crosses ½ between samples i−1 and i; V_s is smooth where E_N is
// clamped, so it interpolates better.
fn crossing(traj: &Trajectory, i: usize) -> f64 {
    let (t0, t1) = (traj.times[i - 1], traj.times[i]);
    let (a, b) = (traj.v_s[i - 1] - 0.5, traj.v_s[i] - 0.5);
    if a == b || a.signum() == b.signum() {
        return t1;
    }
    t0 + (t1 - t0) * a / (a - b)
}

/// Scans E_N: a death is E_N falling below `eps` after exceeding 10·eps, a
/// revival is E_N exceeding 10·eps again after a death.
pub fn separability_events(traj: &Trajectory, eps: f64) -> Result<SeparabilityEvents> {
    if traj.is_empty() {
        return Err(Error::Domain("empty trajectory".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be > 0, got {eps}")));
    }
    let mut events = SeparabilityEvents::default();
    let mut alive = traj.log_neg[0] > 10.0 * eps;
    // Last sample at or above the separability boundary.
    let mut last_separable = 0;
    for i in 1..traj.len() {
        let e = traj.log_neg[i];
        if alive && e < eps {
            events.death_times.push(crossing(traj, i));
            alive = false;
        } else if !alive && e > 10.0 * eps {
            if !events.death_times.is_empty() {
                events.revival_times.push(crossing(traj, last_separable + 1));
            }
            alive = true;
        }
        if traj.v_s[i] >= 0.5 {
            last_separable = i;
        }
    }
    events.survived = *traj.log_neg.last().unwrap() > eps;
    Ok(events)
}

// E_N(probe_dt) − E_N(0) for the isolated pair.
fn initial_growth(r: f64, lambda: f64, probe_dt: f64) -> Result<f64> {
    let params = SystemParams::new(1.0, lambda, r, BathSpec::with_defaults(0.0)?)?;
    let traj = evolve(&params, ModelKind::Isolated, probe_dt, probe_dt)?;
    Ok(traj.log_neg[traj.len() - 1] - traj.log_neg[0])
}

/// Coupling λ_c ∈ (0, 1) where the isolated pair switches from initially
/// losing to initially gaining entanglement, to absolute accuracy `tol`.
/// `None` when the growth does not change sign on the bracket.
pub fn critical_lambda(r: f64, probe_dt: f64, tol: f64) -> Result<Option<f64>> {
    if !(probe_dt > 0.0 && probe_dt <= 1e-2) {
        return Err(Error::Domain(format!("probe_dt must lie in (0, 0.01], got {probe_dt}")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be > 0, got {tol}")));
    }
    let mut lo = tol.min(1e-3);
    let mut hi = 1.0 - tol.min(1e-3);
    let (s_lo, s_hi) = (initial_growth(r, lo, probe_dt)?, initial_growth(r, hi, probe_dt)?);
    if !(s_lo < 0.0 && s_hi > 0.0) {
        return Ok(None);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if initial_growth(r, mid, probe_dt)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// λ_c over a list of squeezing values, evaluated concurrently.
pub fn phase_line(rs: &[f64], probe_dt: f64, tol: f64) -> Result<Vec<(f64, Option<f64>)>> {
    rs.par_iter()
        .map(|&r| critical_lambda(r, probe_dt, tol).map(|l| (r, l)))
        .collect()
}
