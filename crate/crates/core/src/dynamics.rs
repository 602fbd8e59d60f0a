// SPDX-License-Identifier: Apache-2.0

//! Covariance dynamics V̇ = AV + VAᵀ + B for the isolated pair and the two
//! bath models.
//!
//! Model A couples each oscillator to its own bath; Model B couples x₁ + x₂
//! to a single common bath, so only the symmetric normal mode dissipates.
//! K_i = Ω_c² + Ω̃_i²(t) is the renormalized frequency shift of mode i.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;

use crate::bath::{counterterm_sq, thermal_occupation, BathSpec};
use crate::coefficients::{build_table, mode_frequencies, CoefficientSet, CoefficientTable, ModeFrequencies};
use crate::error::{Error, Result};
use crate::gaussian::{log_negativity_from, smallest_pt_eigenvalue, symplectic_eigenvalues, tmsv_covariance, CovarianceMatrix};

/// Which dynamics to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Isolated,
    /// Model A: one bath per oscillator.
    IndependentBaths,
    /// Model B: one bath coupled to x₁ + x₂.
    CommonBath,
    /// Closed-form Markovian rotating-wave reference, λ = 0 only.
    MarkovianRwa,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [Self::Isolated, Self::IndependentBaths, Self::CommonBath, Self::MarkovianRwa];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Isolated => "isolated",
            Self::IndependentBaths => "model_a",
            Self::CommonBath => "model_b",
            Self::MarkovianRwa => "markovian_rwa",
        }
    }

    pub fn uses_bath(&self) -> bool {
        !matches!(self, Self::Isolated)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown model '{s}' (expected isolated, model_a, model_b or markovian_rwa)")))
    }
}

/// Oscillator pair, initial squeezing and bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub omega_r: f64,
    pub lambda: f64,
    pub r: f64,
    pub bath: BathSpec,
}

impl SystemParams {
    pub fn new(omega_r: f64, lambda: f64, r: f64, bath: BathSpec) -> Result<Self> {
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::Domain(format!("squeezing r must be finite and >= 0, got {r}")));
        }
        mode_frequencies(omega_r, lambda)?;
        Ok(Self {
            omega_r,
            lambda,
            r,
            bath,
        })
    }

    pub fn modes(&self) -> Result<ModeFrequencies> {
        mode_frequencies(self.omega_r, self.lambda)
    }
}

/// Drift matrix at the coefficients `c`; the isolated model ignores them.
pub fn drift_matrix(model: ModelKind, params: &SystemParams, c: &CoefficientSet) -> Result<Matrix4<f64>> {
    let w2 = params.omega_r * params.omega_r;
    let lam = params.lambda;
    let oc = counterterm_sq(&params.bath);
    let k = [oc + c.omega_shift_sq[0], oc + c.omega_shift_sq[1]];
    let g = c.gamma;
    // (self x, self p, other x, other p) coefficients of ṗ₁; ṗ₂ mirrors them.
    let (sx, sp, ox, op) = match model {
        ModelKind::Isolated => (-w2, 0.0, -lam, 0.0),
        ModelKind::IndependentBaths => (
            -w2 - 0.5 * (k[0] + k[1]),
            -(g[0] + g[1]),
            -lam + 0.5 * (k[0] - k[1]),
            g[0] - g[1],
        ),
        ModelKind::CommonBath => (-w2 - k[1], -2.0 * g[1], -lam - k[1], -2.0 * g[1]),
        ModelKind::MarkovianRwa => {
            return Err(Error::Unsupported("the Markovian reference has no drift matrix".into()));
        }
    };
    #[rustfmt::skip]
    let a = Matrix4::new(
        0.0, 1.0, 0.0, 0.0,
        sx,  sp,  ox,  op,
        0.0, 0.0, 0.0, 1.0,
        ox,  op,  sx,  sp,
    );
    Ok(a)
}

/// Diffusion matrix at the coefficients `c`.
pub fn diffusion_matrix(model: ModelKind, c: &CoefficientSet) -> Result<Matrix4<f64>> {
    let [d1, d2] = c.diff_d;
    let [f1, f2] = c.diff_f;
    // (x₁p₁, p₁p₁, x₁p₂, p₁p₂); the matrix is symmetric under mode exchange.
    let (xp, pp, xq, pq) = match model {
        ModelKind::Isolated => return Ok(Matrix4::zeros()),
        ModelKind::IndependentBaths => (-0.5 * (f1 + f2), d1 + d2, -0.5 * (f2 - f1), d2 - d1),
        ModelKind::CommonBath => (-f2, 2.0 * d2, -f2, 2.0 * d2),
        ModelKind::MarkovianRwa => {
            return Err(Error::Unsupported("the Markovian reference has no diffusion matrix".into()));
        }
    };
    #[rustfmt::skip]
    let b = Matrix4::new(
        0.0, xp,  0.0, xq,
        xp,  pp,  xq,  pq,
        0.0, xq,  0.0, xp,
        xq,  pq,  xp,  pp,
    );
    Ok(b)
}

/// V̇ = AV + VAᵀ + B at the coefficients `c`.
pub fn covariance_rate(model: ModelKind, params: &SystemParams, c: &CoefficientSet, v: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let a = drift_matrix(model, params, c)?;
    let b = diffusion_matrix(model, c)?;
    Ok(a * v + v * a.transpose() + b)
}

/// Symplectic propagator of the isolated pair: x₁ ∓ x₂ rotate at Ω₁ and Ω₂.
pub fn isolated_propagator(t: f64, modes: &ModeFrequencies) -> Matrix4<f64> {
    let rot = |w: f64| {
        let (s, c) = (w * t).sin_cos();
        nalgebra::Matrix2::new(c, s / w, -w * s, c)
    };
    let (r1, r2) = (rot(modes.omega1), rot(modes.omega2));
    let same = (r1 + r2) * 0.5;
    let cross = (r2 - r1) * 0.5;
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(&same);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(&same);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(&cross);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(&cross);
    m
}

/// Closed-form covariance of the Markovian rotating-wave reference at λ = 0.
///
/// The antisymmetric mode x₁ − x₂ decouples from the common bath and keeps
/// its squeezing; the symmetric mode relaxes at rate 4γ₀ towards a thermal
/// state with N̄ = N(Ω_r).
pub fn markovian_rwa_covariance(t: f64, r: f64, bath: &BathSpec) -> Result<CovarianceMatrix> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("time must be >= 0, got {t}")));
    }
    let thermal = thermal_occupation(1.0, bath)? + 0.5;
    let (sq, anti) = (0.5 * (-2.0 * r).exp(), 0.5 * (2.0 * r).exp());
    let weight = -(-4.0 * bath.gamma0 * t).exp_m1();
    let dx = 0.5 * weight * (thermal - sq);
    let dp = 0.5 * weight * (thermal - anti);
    let mut upper = *tmsv_covariance(r).upper();
    // x₁x₁, x₁x₂, x₂x₂ and p₁p₁, p₁p₂, p₂p₂ in packed order
    for idx in [0, 2, 7] {
        upper[idx] += dx;
    }
    for idx in [4, 6, 9] {
        upper[idx] += dp;
    }
    Ok(CovarianceMatrix::from_upper(upper))
}

/// Step-size control for [`evolve_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOptions {
    /// Largest RK4 step outside the initial bath transient; record
    /// intervals longer than this are subdivided.
    pub max_step: f64,
    /// RK4 step during t < 50/Λ, in units of 1/Λ.
    pub transient_step: f64,
    /// Base sample count for the coefficient table; refinement adds nodes
    /// where the coefficients vary.
    pub table_samples: usize,
}

impl Default for StepOptions {
    fn default() -> Self {
        Self {
            max_step: 5e-3,
            transient_step: 0.04,
            table_samples: 64,
        }
    }
}

/// Recorded covariance history.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub model: ModelKind,
    pub params: SystemParams,
    pub times: Vec<f64>,
    pub covariances: Vec<CovarianceMatrix>,
    pub log_neg: Vec<f64>,
    /// Smallest symplectic eigenvalue of the partial transpose.
    pub v_s: Vec<f64>,
    /// Smallest symplectic eigenvalue of V is at least 1/2 (within 1e-9).
    pub physicality_flags: Vec<bool>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, v: CovarianceMatrix) -> Result<()> {
        let vs = smallest_pt_eigenvalue(&v)?;
        let nu = symplectic_eigenvalues(&v)?;
        self.times.push(t);
        self.covariances.push(v);
        self.log_neg.push(log_negativity_from(vs)?);
        self.v_s.push(vs);
        self.physicality_flags.push(nu[0] >= 0.5 - 1e-9);
        Ok(())
    }
}

/// Largest accepted recording step.
pub const MAX_DT: f64 = 1e-2;

fn record_times(t_end: f64, dt: f64) -> Result<Vec<f64>> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("t_end must be finite and > 0, got {t_end}")));
    }
    if !(dt > 0.0 && dt <= MAX_DT) {
        return Err(Error::Domain(format!("dt must lie in (0, {MAX_DT}], got {dt}")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=n).map(|k| (k as f64 * dt).min(t_end)).collect())
}

/// Integrates from the two-mode squeezed vacuum and records the state at
/// t_k = k·dt up to `t_end`, using default step control.
pub fn evolve(params: &SystemParams, model: ModelKind, t_end: f64, dt: f64) -> Result<Trajectory> {
    evolve_with(params, model, t_end, dt, &StepOptions::default())
}

pub fn evolve_with(params: &SystemParams, model: ModelKind, t_end: f64, dt: f64, opts: &StepOptions) -> Result<Trajectory> {
    let times = record_times(t_end, dt)?;
    let last = *times.last().unwrap();
    let table = match model {
        ModelKind::IndependentBaths | ModelKind::CommonBath if !params.bath.is_decoupled() && last > 0.0 => {
            Some(build_table(last, opts.table_samples.max(16), &params.modes()?, &params.bath)?)
        }
        _ => None,
    };
    evolve_on_grid(model, params, &times, table.as_ref(), opts)
}

/// As [`evolve_with`], reusing a prebuilt coefficient table that covers
/// `t_end`.
pub fn evolve_with_table(
    params: &SystemParams,
    model: ModelKind,
    table: &CoefficientTable,
    t_end: f64,
    dt: f64,
    opts: &StepOptions,
) -> Result<Trajectory> {
    let times = record_times(t_end, dt)?;
    evolve_on_grid(model, params, &times, Some(table), opts)
}

fn evolve_on_grid(
    model: ModelKind,
    params: &SystemParams,
    times: &[f64],
    table: Option<&CoefficientTable>,
    opts: &StepOptions,
) -> Result<Trajectory> {
    params.modes()?;
    let mut traj = Trajectory {
        model,
        params: *params,
        times: Vec::with_capacity(times.len()),
        covariances: Vec::with_capacity(times.len()),
        log_neg: Vec::with_capacity(times.len()),
        v_s: Vec::with_capacity(times.len()),
        physicality_flags: Vec::with_capacity(times.len()),
    };

    if model == ModelKind::MarkovianRwa {
        if params.lambda != 0.0 || params.omega_r != 1.0 {
            return Err(Error::Unsupported(format!(
                "the Markovian reference needs lambda = 0 and omega_r = 1, got {} and {}",
                params.lambda, params.omega_r
            )));
        }
        for &t in times {
            traj.push(t, markovian_rwa_covariance(t, params.r, &params.bath)?)?;
        }
        return Ok(traj);
    }

    let coupled = model.uses_bath() && !params.bath.is_decoupled();
    if !coupled {
        // Linear and time-invariant: propagate exactly so that nothing accumulates.
        let modes = params.modes()?;
        let v0 = tmsv_covariance(params.r).to_matrix();
        for &t in times {
            let s = isolated_propagator(t, &modes);
            traj.push(t, CovarianceMatrix::from_matrix(&(s * v0 * s.transpose())))?;
        }
        return Ok(traj);
    }

    let table = table.ok_or_else(|| Error::Domain("bath dynamics need a coefficient table".into()))?;
    let coeffs = |t: f64| table.at(t.min(table.t_end()));
    let rhs = |t: f64, v: &Matrix4<f64>| covariance_rate(model, params, &coeffs(t)?, v);

    let transient_end = 50.0 / params.bath.cutoff;
    let mut v = tmsv_covariance(params.r).to_matrix();
    traj.push(times[0], CovarianceMatrix::from_matrix(&v))?;
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let mut steps = (span / opts.max_step).ceil().max(1.0) as usize;
        if t0 < transient_end {
            let fine = (span * params.bath.cutoff / opts.transient_step).ceil() as usize;
            steps = steps.max(fine).max(50);
        }
        let h = span / steps as f64;
        for i in 0..steps {
            let t = t0 + h * i as f64;
            let k1 = rhs(t, &v)?;
            let k2 = rhs(t + 0.5 * h, &(v + k1 * (0.5 * h)))?;
            let k3 = rhs(t + 0.5 * h, &(v + k2 * (0.5 * h)))?;
            let k4 = rhs(t + h, &(v + k3 * h))?;
            v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            v = (v + v.transpose()) * 0.5;
        }
        let state = CovarianceMatrix::from_matrix(&v);
        if !state.is_finite() {
            return Err(Error::Integration {
                t: t1,
                last_good_time: t0,
            });
        }
        traj.push(t1, state)?;
    }
    Ok(traj)
}
