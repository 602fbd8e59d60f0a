// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// |λ| ≥ Ω_r² makes a normal-mode frequency imaginary.
    #[error("unstable coupling: |lambda| = {lambda} must be below omega_r^2 = {limit}")]
    Unstable { lambda: f64, limit: f64 },

    /// Adaptive quadrature ran out of its interval budget.
    #[error("quadrature did not converge: estimated error {error_estimate:e} after {intervals} intervals")]
    Quadrature {
        error_estimate: f64,
        intervals: usize,
    },

    /// The eigen-solver failed or returned a spectrum that is not ±-paired.
    #[error("symplectic spectrum inconsistent: {0}")]
    Spectrum(String),

    /// Smallest partially transposed symplectic eigenvalue is not positive.
    #[error("invalid state: smallest symplectic eigenvalue {0:e} is not positive")]
    InvalidState(f64),

    /// Requested time lies outside a coefficient table.
    #[error("time {t} outside coefficient table range [0, {t_end}]")]
    OutOfRange { t: f64, t_end: f64 },

    /// The covariance integration produced non-finite values.
    #[error("integration failed at t = {t}: last good time {last_good_time}")]
    Integration { t: f64, last_good_time: f64 },

    /// The operation is not defined for the chosen model.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
