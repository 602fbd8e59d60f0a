// SPDX-License-Identifier: Apache-2.0

//! Entanglement dynamics of two coupled harmonic oscillators prepared in a
//! two-mode squeezed vacuum, isolated or coupled to ohmic heat baths, in
//! natural units ħ = M = Ω_r = 1.

pub mod analysis;
pub mod bath;
pub mod cli;
pub mod coefficients;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
