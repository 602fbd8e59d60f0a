// SPDX-License-Identifier: Apache-2.0

//! Ohmic heat bath with a Gaussian cutoff.
//!
//! J(ω) = (2/π) γ₀ ω e^{-ω²/Λ²}, thermal occupation N(ω) = 1/(e^{ω/kT} − 1),
//! and the two bath correlation kernels
//!
//! η(t) = ∫₀^∞ J(ω) sin(ωt) dω,      ν(t) = ∫₀^∞ J(ω) coth(ω/2kT) cos(ωt) dω.
//!
//! Units: ħ = M = Ω_r = 1.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_scalar, Tolerance};
use crate::special::dawson_prime;

const SQRT_PI: f64 = 1.772_453_850_905_516_f64;

/// Environment parameters shared by every reservoir in a scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    pub gamma0: f64,
    pub cutoff: f64,
    pub temperature: f64,
    pub ohmic_exponent: u32,
}

impl BathSpec {
    pub fn new(gamma0: f64, cutoff: f64, temperature: f64) -> Result<Self> {
        Self::with_exponent(gamma0, cutoff, temperature, 1)
    }

    pub fn with_exponent(gamma0: f64, cutoff: f64, temperature: f64, ohmic_exponent: u32) -> Result<Self> {
        if !(gamma0 >= 0.0 && gamma0.is_finite()) {
            return Err(Error::Domain(format!("gamma0 must be finite and >= 0, got {gamma0}")));
        }
        if !(cutoff > 0.0 && cutoff.is_finite()) {
            return Err(Error::Domain(format!("cutoff must be finite and > 0, got {cutoff}")));
        }
        if !(temperature > 0.0 && temperature.is_finite()) {
            return Err(Error::Domain(format!("temperature must be finite and > 0, got {temperature}")));
        }
        if ohmic_exponent != 1 {
            return Err(Error::Domain(format!(
                "only ohmic baths (exponent 1) are supported, got {ohmic_exponent}"
            )));
        }
        Ok(Self {
            gamma0,
            cutoff,
            temperature,
            ohmic_exponent,
        })
    }

    /// The default scenario bath: Λ = 2000, kT = 10.
    pub fn with_defaults(gamma0: f64) -> Result<Self> {
        Self::new(gamma0, 2000.0, 10.0)
    }

    pub fn is_decoupled(&self) -> bool {
        self.gamma0 == 0.0
    }

    /// Upper frequency limit beyond which e^{-ω²/Λ²} < 1e-15.
    pub fn frequency_limit(&self) -> f64 {
        6.0 * self.cutoff
    }

    /// Upper frequency limit for the thermal excess 2N(ω)J(ω).
    pub(crate) fn thermal_limit(&self) -> f64 {
        (50.0 * self.temperature).min(self.frequency_limit())
    }

    // (2/π) γ₀ e^{-ω²/Λ²} without the linear factor.
    fn envelope(&self, omega: f64) -> f64 {
        let u = omega / self.cutoff;
        2.0 / PI * self.gamma0 * (-u * u).exp()
    }

    /// J(ω) coth(ω/2kT), continuous at ω = 0 with value (2/π)γ₀·2kT.
    pub fn thermal_weight(&self, omega: f64) -> f64 {
        self.envelope(omega) * omega_coth(omega, self.temperature)
    }

    /// 2N(ω)J(ω), continuous at ω = 0 with value (2/π)γ₀·2kT.
    pub(crate) fn thermal_excess(&self, omega: f64) -> f64 {
        let x = omega / self.temperature;
        // ω·2/(e^{ω/kT}-1) = 2kT · x/expm1(x)
        let bose = if x < 1e-8 { 1.0 - 0.5 * x } else { x / x.exp_m1() };
        self.envelope(omega) * 2.0 * self.temperature * bose
    }
}

// ω coth(ω/2kT), regular at ω = 0.
fn omega_coth(omega: f64, kt: f64) -> f64 {
    let x = omega / (2.0 * kt);
    let x_coth = if x.abs() < 1e-4 {
        1.0 + x * x / 3.0
    } else if x > 20.0 {
        x
    } else {
        x / x.tanh()
    };
    2.0 * kt * x_coth
}

/// Spectral density J(ω) = (2/π)γ₀ ω e^{-ω²/Λ²}.
pub fn spectral_density(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega >= 0.0) {
        return Err(Error::Domain(format!("spectral density needs omega >= 0, got {omega}")));
    }
    Ok(bath.envelope(omega) * omega)
}

/// Bose–Einstein occupation 1/(e^{ω/kT} − 1).
pub fn thermal_occupation(omega: f64, bath: &BathSpec) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("thermal occupation needs omega > 0, got {omega}")));
    }
    Ok(1.0 / (omega / bath.temperature).exp_m1())
}

/// Dissipation kernel in closed form: η(t) = γ₀Λ³t/(2√π) · e^{-Λ²t²/4}.
pub fn dissipation_kernel(t: f64, bath: &BathSpec) -> f64 {
    let l = bath.cutoff;
    let u = 0.5 * l * t;
    bath.gamma0 * l * l * l * t / (2.0 * SQRT_PI) * (-u * u).exp()
}

/// Noise kernel ν(t) by direct adaptive quadrature of J(ω)coth(ω/2kT)cos(ωt)
/// over [0, 6Λ].
pub fn noise_kernel(t: f64, bath: &BathSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("noise kernel needs t >= 0, got {t}")));
    }
    if bath.is_decoupled() {
        return Ok(0.0);
    }
    let w = bath.frequency_limit();
    let (v, _) = integrate_scalar(
        |omega| bath.thermal_weight(omega) * (omega * t).cos(),
        &[0.0, 0.5 * bath.cutoff, bath.cutoff, 2.0 * bath.cutoff, w],
        oscillation_period(t),
        Tolerance::new(1e-12, 1e-10),
    )?;
    Ok(v)
}

/// Zero-temperature part ∫J(ω)cos(ωt)dω = (γ₀Λ²/π)·F'(Λt/2), with F Dawson's
/// integral.
pub fn vacuum_noise_kernel(t: f64, bath: &BathSpec) -> f64 {
    let l = bath.cutoff;
    bath.gamma0 * l * l / PI * dawson_prime(0.5 * l * t)
}

/// Thermal excess ∫2N(ω)J(ω)cos(ωt)dω by adaptive quadrature.
pub fn thermal_noise_kernel(t: f64, bath: &BathSpec) -> Result<f64> {
    if bath.is_decoupled() {
        return Ok(0.0);
    }
    let w = bath.thermal_limit();
    let (v, _) = integrate_scalar(
        |omega| bath.thermal_excess(omega) * (omega * t).cos(),
        &[0.0, w],
        oscillation_period(t),
        Tolerance::new(1e-13, 1e-12),
    )?;
    Ok(v)
}

/// ν(t) as the closed-form vacuum part plus the quadrature thermal part.
pub fn split_noise_kernel(t: f64, bath: &BathSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("noise kernel needs t >= 0, got {t}")));
    }
    Ok(vacuum_noise_kernel(t, bath) + thermal_noise_kernel(t, bath)?)
}

/// Frequency counter-term Ω_c² = 2∫J(ω)/ω dω = 2γ₀Λ/√π.
pub fn counterterm_sq(bath: &BathSpec) -> f64 {
    2.0 * bath.gamma0 * bath.cutoff / SQRT_PI
}

/// Ω_c² by quadrature of 2∫J(ω)/ω dω.
pub fn counterterm_sq_quadrature(bath: &BathSpec) -> Result<f64> {
    let w = bath.frequency_limit();
    let est = integrate(
        |omega| [2.0 * bath.envelope(omega)],
        &[0.0, bath.cutoff, w],
        0.25 * bath.cutoff,
        Tolerance::new(1e-14, 1e-14),
    )?;
    Ok(est.value[0])
}

// Starting panel width for integrands oscillating like cos(ωt) in ω.
pub(crate) fn oscillation_period(t: f64) -> f64 {
    if t > 0.0 {
        2.0 * PI / t
    } else {
        f64::INFINITY
    }
}
