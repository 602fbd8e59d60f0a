// SPDX-License-Identifier: Apache-2.0

//! Time-dependent master-equation coefficients for the two normal modes.
//!
//! For a mode of frequency Ω:
//!
//! Ω̃²(t) = −2∫₀^t cos(Ωs)η(s)ds,      γ(t) = (1/Ω)∫₀^t sin(Ωs)η(s)ds,
//! D(t)  =  ∫₀^t cos(Ωs)ν(s)ds,       f(t) = −(1/Ω)∫₀^t sin(Ωs)ν(s)ds.
//!
//! η is known in closed form and vanishes to machine precision after
//! 60/Λ, so Ω̃² and γ are integrated in time. D and f split ν into its
//! closed-form vacuum part, integrated in time, and its thermal excess,
//! integrated in frequency against the exact time kernels.

use rayon::prelude::*;

use crate::bath::{counterterm_sq, dissipation_kernel, noise_kernel, oscillation_period, vacuum_noise_kernel, BathSpec};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_scalar, Tolerance};

/// Normal-mode frequencies Ω₁ = √(Ω_r² − λ), Ω₂ = √(Ω_r² + λ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeFrequencies {
    pub omega1: f64,
    pub omega2: f64,
}

impl ModeFrequencies {
    pub fn as_array(&self) -> [f64; 2] {
        [self.omega1, self.omega2]
    }
}

pub fn mode_frequencies(omega_r: f64, lambda: f64) -> Result<ModeFrequencies> {
    if !(omega_r > 0.0 && omega_r.is_finite()) || !lambda.is_finite() {
        return Err(Error::Domain(format!("need omega_r > 0 and finite lambda, got {omega_r}, {lambda}")));
    }
    let limit = omega_r * omega_r;
    if lambda.abs() >= limit {
        return Err(Error::Unstable { lambda, limit });
    }
    Ok(ModeFrequencies {
        omega1: (limit - lambda).sqrt(),
        omega2: (limit + lambda).sqrt(),
    })
}

/// Coefficients of both modes at one time; index 0 is mode 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientSet {
    pub t: f64,
    pub omega_shift_sq: [f64; 2],
    pub gamma: [f64; 2],
    pub diff_d: [f64; 2],
    pub diff_f: [f64; 2],
}

/// Column labels in the order of [`CoefficientSet::to_array`].
pub const COEFFICIENT_LABELS: [&str; 8] = [
    "omega_shift_sq_1",
    "omega_shift_sq_2",
    "gamma_1",
    "gamma_2",
    "d_1",
    "d_2",
    "f_1",
    "f_2",
];

impl CoefficientSet {
    pub fn zero(t: f64) -> Self {
        Self::from_array(t, [0.0; 8])
    }

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.omega_shift_sq[0],
            self.omega_shift_sq[1],
            self.gamma[0],
            self.gamma[1],
            self.diff_d[0],
            self.diff_d[1],
            self.diff_f[0],
            self.diff_f[1],
        ]
    }

    pub fn from_array(t: f64, a: [f64; 8]) -> Self {
        Self {
            t,
            omega_shift_sq: [a[0], a[1]],
            gamma: [a[2], a[3]],
            diff_d: [a[4], a[5]],
            diff_f: [a[6], a[7]],
        }
    }
}

// Time-domain breakpoints on [0, upper]: doubling from 2/Λ, then unit steps.
fn time_breakpoints(upper: f64, cutoff: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut s = 2.0 / cutoff;
    while s < upper.min(1.0) {
        pts.push(s);
        s *= 4.0;
    }
    let mut k = 1.0;
    while k < upper {
        pts.push(k);
        k += 1.0;
    }
    pts.push(upper);
    pts
}

fn dissipative_part(t: f64, modes: &[f64; 2], bath: &BathSpec) -> Result<[f64; 4]> {
    let upper = t.min(60.0 / bath.cutoff);
    let [w1, w2] = *modes;
    let est = integrate(
        |s| {
            let eta = dissipation_kernel(s, bath);
            let (s1, c1) = (w1 * s).sin_cos();
            let (s2, c2) = (w2 * s).sin_cos();
            [-2.0 * c1 * eta, -2.0 * c2 * eta, s1 * eta / w1, s2 * eta / w2]
        },
        &time_breakpoints(upper, bath.cutoff),
        f64::INFINITY,
        Tolerance::new(1e-14, 1e-13),
    )?;
    Ok(est.value)
}

fn vacuum_diffusion(t: f64, modes: &[f64; 2], bath: &BathSpec) -> Result<[f64; 4]> {
    let [w1, w2] = *modes;
    let est = integrate(
        |s| {
            let nu = vacuum_noise_kernel(s, bath);
            let (s1, c1) = (w1 * s).sin_cos();
            let (s2, c2) = (w2 * s).sin_cos();
            [c1 * nu, c2 * nu, -s1 * nu / w1, -s2 * nu / w2]
        },
        &time_breakpoints(t, bath.cutoff),
        f64::INFINITY,
        Tolerance::new(1e-13, 1e-12),
    )?;
    Ok(est.value)
}

// sin(xt)/x, regular at x = 0.
fn sin_ratio(x: f64, t: f64) -> f64 {
    let u = x * t;
    if u.abs() < 1e-4 {
        t * (1.0 - u * u / 6.0)
    } else {
        u.sin() / x
    }
}

// (1 − cos(xt))/x = 2sin²(xt/2)/x, regular at x = 0.
fn versin_ratio(x: f64, t: f64) -> f64 {
    let u = x * t;
    if u.abs() < 1e-4 {
        0.5 * u * t * (1.0 - u * u / 12.0)
    } else {
        let h = (0.5 * u).sin();
        2.0 * h * h / x
    }
}

// Thermal excess of D₁, D₂, f₁, f₂ and ν(t), integrated over frequency.
fn thermal_diffusion(t: f64, modes: &[f64; 2], bath: &BathSpec) -> Result<[f64; 5]> {
    let w = bath.thermal_limit();
    let mut pts = vec![0.0];
    let mut sorted = *modes;
    sorted.sort_by(f64::total_cmp);
    pts.extend(sorted.iter().copied().filter(|&m| m < w));
    pts.push(w);
    pts.dedup();
    let trig = modes.map(|m| (m * t).sin_cos());
    let est = integrate(
        |omega| {
            let h = bath.thermal_excess(omega);
            let (sw, cw) = (omega * t).sin_cos();
            let mut out = [0.0; 5];
            for i in 0..2 {
                let m = modes[i];
                let (sm, cm) = trig[i];
                let plus = omega + m;
                let sin_plus = sw * cm + cw * sm;
                let cos_plus = cw * cm - sw * sm;
                out[i] = h * 0.5 * (sin_plus / plus + sin_ratio(omega - m, t));
                out[2 + i] = -h / m * 0.5 * ((1.0 - cos_plus) / plus + versin_ratio(m - omega, t));
            }
            out[4] = h * cw;
            out
        },
        &pts,
        oscillation_period(t),
        Tolerance::new(1e-13, 1e-12),
    )?;
    Ok(est.value)
}

fn validate(t: f64, modes: &ModeFrequencies) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("coefficient time must be finite and >= 0, got {t}")));
    }
    if !(modes.omega1 > 0.0 && modes.omega2 > 0.0) {
        return Err(Error::Domain(format!("mode frequencies must be positive, got {modes:?}")));
    }
    Ok(())
}

/// Coefficients and their time derivatives at `t`.
pub fn coefficient_set_with_rates(t: f64, modes: &ModeFrequencies, bath: &BathSpec) -> Result<(CoefficientSet, [f64; 8])> {
    validate(t, modes)?;
    if bath.is_decoupled() {
        return Ok((CoefficientSet::zero(t), [0.0; 8]));
    }
    let m = modes.as_array();
    let (values, nu_thermal) = if t == 0.0 {
        ([0.0; 8], thermal_at_zero(bath)?)
    } else {
        let dis = dissipative_part(t, &m, bath)?;
        let vac = vacuum_diffusion(t, &m, bath)?;
        let th = thermal_diffusion(t, &m, bath)?;
        let mut v = [0.0; 8];
        v[..4].copy_from_slice(&dis);
        for k in 0..4 {
            v[4 + k] = vac[k] + th[k];
        }
        (v, th[4])
    };
    let eta = dissipation_kernel(t, bath);
    let nu = vacuum_noise_kernel(t, bath) + nu_thermal;
    let mut rates = [0.0; 8];
    for i in 0..2 {
        let (s, c) = (m[i] * t).sin_cos();
        rates[i] = -2.0 * c * eta;
        rates[2 + i] = s * eta / m[i];
        rates[4 + i] = c * nu;
        rates[6 + i] = -s * nu / m[i];
    }
    Ok((CoefficientSet::from_array(t, values), rates))
}

fn thermal_at_zero(bath: &BathSpec) -> Result<f64> {
    let (v, _) = integrate_scalar(
        |omega| bath.thermal_excess(omega),
        &[0.0, bath.thermal_limit()],
        f64::INFINITY,
        Tolerance::new(1e-13, 1e-12),
    )?;
    Ok(v)
}

/// Coefficients at time `t`.
pub fn coefficient_set(t: f64, modes: &ModeFrequencies, bath: &BathSpec) -> Result<CoefficientSet> {
    Ok(coefficient_set_with_rates(t, modes, bath)?.0)
}

/// D and f evaluated entirely in the time domain against the directly
/// integrated noise kernel. Slower than [`coefficient_set`]; kept as an
/// independent cross-check of the frequency-domain thermal part.
pub fn diffusion_time_domain(t: f64, modes: &ModeFrequencies, bath: &BathSpec) -> Result<([f64; 2], [f64; 2])> {
    validate(t, modes)?;
    if bath.is_decoupled() || t == 0.0 {
        return Ok(([0.0; 2], [0.0; 2]));
    }
    let [w1, w2] = modes.as_array();
    // At kT > 0 ν(s) decays like e^{-2πkT s}; beyond e^{-60} it is below the
    // cancellation noise of the direct kernel and is dropped.
    let upper = t.min(60.0 / (2.0 * std::f64::consts::PI * bath.temperature) + 60.0 / bath.cutoff);
    let mut pts = time_breakpoints(upper, bath.cutoff);
    pts.extend((1..40).map(|k| k as f64 * 0.025).filter(|&s| s < upper));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let failure = std::cell::Cell::new(None);
    let est = integrate(
        |s| {
            let nu = noise_kernel(s, bath).unwrap_or_else(|e| {
                failure.set(Some(e));
                0.0
            });
            let (s1, c1) = (w1 * s).sin_cos();
            let (s2, c2) = (w2 * s).sin_cos();
            [c1 * nu, c2 * nu, -s1 * nu / w1, -s2 * nu / w2]
        },
        &pts,
        f64::INFINITY,
        Tolerance {
            abs: 1e-9,
            rel: 1e-9,
            max_intervals: 4000,
        },
    )?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let v = est.value;
    Ok(([v[0], v[1]], [v[2], v[3]]))
}

// PV∫₀^∞ G(ω)/(Ω² − ω²)dω with G = J coth, by subtracting the pole on [0, 2Ω].
fn principal_value(m: f64, bath: &BathSpec) -> Result<f64> {
    let g = |omega: f64| bath.thermal_weight(omega) / (m + omega);
    let g_pole = g(m);
    let tol = Tolerance::new(1e-14, 1e-13);
    let (near, _) = integrate_scalar(|omega| (g(omega) - g_pole) / (m - omega), &[0.0, m, 2.0 * m], f64::INFINITY, tol)?;
    let w = bath.frequency_limit();
    let mut pts = vec![2.0 * m];
    pts.extend(
        [10.0 * bath.temperature, 0.5 * bath.cutoff, bath.cutoff, 2.0 * bath.cutoff]
            .into_iter()
            .filter(|&p| p > 2.0 * m && p < w),
    );
    pts.push(w);
    let (far, _) = integrate_scalar(|omega| bath.thermal_weight(omega) / ((m - omega) * (m + omega)), &pts, f64::INFINITY, tol)?;
    Ok(near + far)
}

/// Long-time limits of the coefficients, tagged with t = ∞.
pub fn asymptotic_set(modes: &ModeFrequencies, bath: &BathSpec) -> Result<CoefficientSet> {
    validate(0.0, modes)?;
    if bath.is_decoupled() {
        return Ok(CoefficientSet::zero(f64::INFINITY));
    }
    let m = modes.as_array();
    let shift = -counterterm_sq(bath);
    let j = m.map(|w| 2.0 / std::f64::consts::PI * bath.gamma0 * w * (-(w / bath.cutoff).powi(2)).exp());
    let half_pi = 0.5 * std::f64::consts::PI;
    let mut set = CoefficientSet::zero(f64::INFINITY);
    for i in 0..2 {
        set.omega_shift_sq[i] = shift;
        set.gamma[i] = half_pi * j[i] / m[i];
        set.diff_d[i] = half_pi * bath.thermal_weight(m[i]);
        set.diff_f[i] = -principal_value(m[i], bath)?;
    }
    Ok(set)
}

const TABLE_ABS_TOL: f64 = 1e-9;
const TABLE_REL_TOL: f64 = 1e-12;
const MAX_BASE_SPACING: f64 = 0.25;
const MIN_SPACING: f64 = 1e-12;

/// Coefficients tabulated on [0, t_end] with cubic Hermite interpolation
/// using exact time derivatives. The grid is refined until every interval
/// midpoint reproduces a direct evaluation to 1e-9.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    t_end: f64,
    times: Vec<f64>,
    values: Vec<[f64; 8]>,
    rates: Vec<[f64; 8]>,
}

fn hermite(a: f64, b: f64, va: &[f64; 8], da: &[f64; 8], vb: &[f64; 8], db: &[f64; 8], t: f64) -> [f64; 8] {
    let h = b - a;
    let s = (t - a) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    std::array::from_fn(|k| h00 * va[k] + h10 * h * da[k] + h01 * vb[k] + h11 * h * db[k])
}

fn base_grid(t_end: f64, n_samples: usize, cutoff: f64) -> Vec<f64> {
    let spacing = (t_end / n_samples as f64).min(MAX_BASE_SPACING);
    let mut grid = vec![0.0];
    let mut s = 10.0 / cutoff * 0.5f64.powi(12);
    while s < t_end && s < spacing {
        grid.push(s);
        s *= 2.0;
    }
    let start = *grid.last().unwrap();
    let n = ((t_end - start) / spacing).ceil().max(1.0) as usize;
    for k in 1..n {
        grid.push(start + (t_end - start) * k as f64 / n as f64);
    }
    grid.push(t_end);
    grid
}

pub fn build_table(t_end: f64, n_samples: usize, modes: &ModeFrequencies, bath: &BathSpec) -> Result<CoefficientTable> {
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::Domain(format!("table end must be finite and > 0, got {t_end}")));
    }
    if n_samples < 16 {
        return Err(Error::Domain(format!("need at least 16 samples, got {n_samples}")));
    }
    validate(0.0, modes)?;
    let grid = base_grid(t_end, n_samples, bath.cutoff);
    let eval = |t: f64| coefficient_set_with_rates(t, modes, bath).map(|(c, r)| (t, c.to_array(), r));
    let mut nodes: Vec<(f64, [f64; 8], [f64; 8])> = grid.par_iter().map(|&t| eval(t)).collect::<Result<_>>()?;

    // Intervals still to verify.
    let mut pending: Vec<(f64, f64)> = nodes.windows(2).map(|w| (w[0].0, w[1].0)).collect();
    if bath.is_decoupled() {
        pending.clear();
    }
    while !pending.is_empty() {
        let probes: Vec<_> = pending
            .par_iter()
            .map(|&(a, b)| eval(0.5 * (a + b)).map(|node| ((a, b), node)))
            .collect::<Result<_>>()?;
        nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut next = Vec::new();
        let mut inserted = Vec::with_capacity(probes.len());
        for ((a, b), mid) in probes {
            let ia = nodes.partition_point(|n| n.0 < a);
            let (na, nb) = (&nodes[ia], &nodes[ia + 1]);
            let interp = hermite(a, b, &na.1, &na.2, &nb.1, &nb.2, mid.0);
            let ok = (0..8).all(|k| (interp[k] - mid.1[k]).abs() <= TABLE_ABS_TOL + TABLE_REL_TOL * mid.1[k].abs());
            if !ok && b - a > MIN_SPACING {
                next.push((a, mid.0));
                next.push((mid.0, b));
            }
            inserted.push(mid);
        }
        nodes.extend(inserted);
        pending = next;
    }
    nodes.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(CoefficientTable {
        t_end,
        times: nodes.iter().map(|n| n.0).collect(),
        values: nodes.iter().map(|n| n.1).collect(),
        rates: nodes.into_iter().map(|n| n.2).collect(),
    })
}

impl CoefficientTable {
    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    /// Grid times, increasing, starting at 0 and ending at `t_end`.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Tabulated set at grid node `i`.
    pub fn node(&self, i: usize) -> CoefficientSet {
        CoefficientSet::from_array(self.times[i], self.values[i])
    }

    pub fn at(&self, t: f64) -> Result<CoefficientSet> {
        if !(t >= 0.0 && t <= self.t_end) {
            return Err(Error::OutOfRange { t, t_end: self.t_end });
        }
        let n = self.times.len();
        let i = self.times.partition_point(|&x| x <= t).saturating_sub(1).min(n - 2);
        let v = hermite(
            self.times[i],
            self.times[i + 1],
            &self.values[i],
            &self.rates[i],
            &self.values[i + 1],
            &self.rates[i + 1],
            t,
        );
        Ok(CoefficientSet::from_array(t, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(g: f64) -> BathSpec {
        BathSpec::with_defaults(g).unwrap()
    }

    fn modes(lambda: f64) -> ModeFrequencies {
        mode_frequencies(1.0, lambda).unwrap()
    }

    #[test]
    fn mode_frequency_limits() {
        let m = modes(0.8);
        assert!((m.omega1 - 0.2f64.sqrt()).abs() < 1e-15);
        assert!((m.omega2 - 1.8f64.sqrt()).abs() < 1e-15);
        assert!(matches!(mode_frequencies(1.0, 1.0), Err(Error::Unstable { .. })));
        assert!(matches!(mode_frequencies(1.0, -1.2), Err(Error::Unstable { .. })));
    }

    #[test]
    fn vanish_at_origin_and_without_bath() {
        assert_eq!(coefficient_set(0.0, &modes(0.2), &bath(0.06)).unwrap(), CoefficientSet::zero(0.0));
        assert_eq!(coefficient_set(3.0, &modes(0.2), &bath(0.0)).unwrap(), CoefficientSet::zero(3.0));
        assert!(coefficient_set(-1.0, &modes(0.2), &bath(0.06)).is_err());
    }

    #[test]
    fn saturate_to_asymptotes() {
        let b = bath(0.06);
        let m = modes(0.2);
        let c = coefficient_set(5.0, &m, &b).unwrap();
        let inf = asymptotic_set(&m, &b).unwrap();
        for i in 0..2 {
            assert!(((c.gamma[i] - inf.gamma[i]) / inf.gamma[i]).abs() < 1e-3, "{c:?} {inf:?}");
            assert!(((c.diff_d[i] - inf.diff_d[i]) / inf.diff_d[i]).abs() < 1e-2);
            assert!(((c.omega_shift_sq[i] - inf.omega_shift_sq[i]) / inf.omega_shift_sq[i]).abs() < 1e-3);
            assert!(((c.diff_f[i] - inf.diff_f[i]) / inf.diff_f[i]).abs() < 1e-2, "{c:?} {inf:?}");
        }
        // γ(∞) = (π/2Ω)J(Ω) = γ₀ e^{-Ω²/Λ²}
        assert!((inf.gamma[0] - 0.06 * (-0.8 / 4e6f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn swapping_coupling_sign_swaps_modes_exactly() {
        let b = bath(0.06);
        for &t in &[1e-3, 0.07, 2.5] {
            let p = coefficient_set(t, &modes(0.8), &b).unwrap().to_array();
            let q = coefficient_set(t, &modes(-0.8), &b).unwrap().to_array();
            for k in 0..4 {
                assert_eq!(p[2 * k], q[2 * k + 1]);
                assert_eq!(p[2 * k + 1], q[2 * k]);
            }
        }
    }

    #[test]
    fn frequency_and_time_domain_agree() {
        let b = bath(0.06);
        let m = modes(0.2);
        for &t in &[0.1, 1.0, 5.0] {
            let c = coefficient_set(t, &m, &b).unwrap();
            let (d, f) = diffusion_time_domain(t, &m, &b).unwrap();
            for i in 0..2 {
                assert!((c.diff_d[i] - d[i]).abs() < 1e-7, "t = {t}: {:?} vs {d:?}", c.diff_d);
                assert!((c.diff_f[i] - f[i]).abs() < 1e-7, "t = {t}: {:?} vs {f:?}", c.diff_f);
            }
        }
    }

    #[test]
    fn rates_match_finite_differences() {
        let b = bath(1.0);
        let m = modes(-0.2);
        let h = 1e-6;
        for &t in &[0.3, 2.0] {
            let (_, r) = coefficient_set_with_rates(t, &m, &b).unwrap();
            let up = coefficient_set(t + h, &m, &b).unwrap().to_array();
            let dn = coefficient_set(t - h, &m, &b).unwrap().to_array();
            for k in 0..8 {
                let fd = (up[k] - dn[k]) / (2.0 * h);
                assert!((fd - r[k]).abs() < 1e-4 * (1.0 + r[k].abs()), "t = {t}, k = {k}: {fd} vs {}", r[k]);
            }
        }
    }

    #[test]
    fn table_reproduces_direct_evaluation() {
        let b = bath(0.06);
        let m = modes(0.2);
        let table = build_table(3.0, 16, &m, &b).unwrap();
        assert_eq!(table.times()[0], 0.0);
        assert_eq!(*table.times().last().unwrap(), 3.0);
        // Nodes are exact; midpoints of arbitrary intervals are interpolated.
        let n = table.len();
        for k in 0..32 {
            let i = (k * 7919) % (n - 1);
            let node = table.node(i);
            assert_eq!(table.at(node.t).unwrap().to_array(), node.to_array());
            let t = 0.5 * (table.times()[i] + table.times()[i + 1]);
            let got = table.at(t).unwrap().to_array();
            let want = coefficient_set(t, &m, &b).unwrap().to_array();
            for j in 0..8 {
                assert!((got[j] - want[j]).abs() < 1e-8, "t = {t}, j = {j}: {} vs {}", got[j], want[j]);
            }
        }
        assert!(matches!(table.at(3.5), Err(Error::OutOfRange { .. })));
        assert!(build_table(3.0, 8, &m, &b).is_err());
    }
}
