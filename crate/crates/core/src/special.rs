// SPDX-License-Identifier: Apache-2.0

//! Dawson's integral F(x) = e^{-x²} ∫₀^x e^{t²} dt and its derivative.
//!
//! Rybicki's exponential sum with step 0.2 (truncation error below
//! e^{-(π/0.4)²}) for moderate arguments, the Maclaurin series near zero
//! and the asymptotic expansion for large arguments.

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_286_948_079_451_560_772_6;
const STEP: f64 = 0.2;
const TERMS: usize = 18;
const SERIES_LIMIT: f64 = 0.2;
const ASYMPTOTIC_LIMIT: f64 = 8.0;

/// Dawson's integral.
pub fn dawson(x: f64) -> f64 {
    let ax = x.abs();
    let value = if ax < SERIES_LIMIT {
        series(ax)
    } else if ax >= ASYMPTOTIC_LIMIT {
        // F(x) ~ (1/2x) Σ (2k-1)!!/(2x²)^k
        let inv = 1.0 / (2.0 * ax * ax);
        0.5 / ax * (1.0 + asymptotic_tail(inv))
    } else {
        rybicki(ax)
    };
    value.copysign(x)
}

/// F'(x) = 1 − 2x F(x), evaluated without cancellation for large x.
pub fn dawson_prime(x: f64) -> f64 {
    let ax = x.abs();
    if ax >= ASYMPTOTIC_LIMIT {
        let inv = 1.0 / (2.0 * ax * ax);
        -asymptotic_tail(inv)
    } else {
        1.0 - 2.0 * ax * dawson(ax)
    }
}

// Σ_{k≥1} (2k-1)!! inv^k, stopped at the smallest term.
fn asymptotic_tail(inv: f64) -> f64 {
    let mut term = 1.0;
    let mut tail: f64 = 0.0;
    let mut k = 1.0;
    loop {
        let next = term * (2.0 * k - 1.0) * inv;
        if next >= term || next < 1e-18 * tail.max(f64::MIN_POSITIVE) {
            break;
        }
        tail += next;
        term = next;
        k += 1.0;
    }
    tail
}

fn series(x: f64) -> f64 {
    // F(x) = Σ (-1)^n 2^n x^{2n+1} / (2n+1)!!
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    loop {
        n += 1.0;
        term *= -2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

fn rybicki(x: f64) -> f64 {
    let n0 = 2.0 * (0.5 * x / STEP).round();
    let xp = x - n0 * STEP;
    let mut e1 = (2.0 * xp * STEP).exp();
    let e2 = e1 * e1;
    let mut d1 = n0 + 1.0;
    let mut d2 = d1 - 2.0;
    let mut sum = 0.0;
    for i in 0..TERMS {
        let c = (-((2 * i + 1) as f64 * STEP).powi(2)).exp();
        sum += c * (e1 / d1 + 1.0 / (d2 * e1));
        d1 += 2.0;
        d2 -= 2.0;
        e1 *= e2;
    }
    FRAC_1_SQRT_PI * (-xp * xp).exp() * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_scalar, Tolerance};

    // F(x) = ∫₀^x e^{-(x-t)(x+t)} dt, integrated directly.
    fn dawson_oracle(x: f64) -> f64 {
        integrate_scalar(|t| (-(x - t) * (x + t)).exp(), &[0.0, x], x / 8.0, Tolerance::new(1e-17, 1e-15))
            .unwrap()
            .0
    }

    #[test]
    fn matches_direct_integral() {
        for &x in &[0.05, 0.19, 0.21, 0.5, 0.9241388730, 1.5, 3.0, 5.0, 7.9, 8.1, 12.0] {
            let got = dawson(x);
            let want = dawson_oracle(x);
            assert!(((got - want) / want).abs() < 2e-14, "x = {x}: {got} vs {want}");
        }
    }

    #[test]
    fn odd_symmetry() {
        for &x in &[0.1, 1.0, 10.0] {
            assert_eq!(dawson(-x), -dawson(x));
        }
    }

    #[test]
    fn maximum_location() {
        // F'(x) vanishes at the maximum x ≈ 0.9241388730.
        assert!(dawson_prime(0.924_138_873_0).abs() < 1e-9);
    }

    #[test]
    fn derivative_is_continuous_across_branches() {
        let below = dawson_prime(ASYMPTOTIC_LIMIT - 1e-12);
        let above = dawson_prime(ASYMPTOTIC_LIMIT);
        assert!(((below - above) / above).abs() < 1e-12, "{below} {above}");
    }

    #[test]
    fn derivative_large_argument() {
        // 1 − 2xF(x) ~ −1/(2x²) − 3/(4x⁴)
        let x: f64 = 1e4;
        let want = -1.0 / (2.0 * x * x) - 3.0 / (4.0 * x.powi(4));
        assert!(((dawson_prime(x) - want) / want).abs() < 1e-14);
    }
}
