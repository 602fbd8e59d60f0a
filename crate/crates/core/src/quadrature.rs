// SPDX-License-Identifier: Apache-2.0

//! Adaptive 21-point Gauss–Kronrod quadrature for vector-valued integrands.
//!
//! Several coefficients share the same integration variable and most of
//! their expensive factors, so the integrand returns `[f64; N]` and all
//! components share one panel subdivision. Error estimates follow the
//! QUADPACK rescaling of |K21 − G10|.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Convergence targets for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 1e-10,
            max_intervals: 200_000,
        }
    }
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            ..Self::default()
        }
    }
}

/// Integral value with its error estimate, per component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<const N: usize> {
    pub value: [f64; N],
    pub error: [f64; N],
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel<const N: usize> {
    a: f64,
    b: f64,
    value: [f64; N],
    error: [f64; N],
    // ∫|f| over the panel
    magnitude: [f64; N],
    // error is at the round-off floor; bisecting cannot help
    floored: bool,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> (f64, bool) {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    let mut floored = false;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err >= scaled {
            scaled = min_err;
            floored = true;
        }
    }
    (scaled, floored)
}

fn gk21<const N: usize, F>(f: &F, a: f64, b: f64) -> Panel<N>
where
    F: Fn(f64) -> [f64; N],
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let abs_half = half.abs();

    let mut fvals = [[0.0; N]; 21];
    fvals[0] = f(center);
    for j in 0..10 {
        let dx = half * XGK[j];
        fvals[1 + 2 * j] = f(center - dx);
        fvals[2 + 2 * j] = f(center + dx);
    }

    let mut value = [0.0; N];
    let mut error = [0.0; N];
    let mut magnitude = [0.0; N];
    let mut floored = true;
    for k in 0..N {
        let fc = fvals[0][k];
        let mut res_k = fc * WGK[10];
        let mut res_g = 0.0;
        let mut res_abs = res_k.abs();
        for j in 0..10 {
            let (f1, f2) = (fvals[1 + 2 * j][k], fvals[2 + 2 * j][k]);
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            // Gauss nodes sit at the odd Kronrod abscissae.
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            let (f1, f2) = (fvals[1 + 2 * j][k], fvals[2 + 2 * j][k]);
            res_asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
        }
        let (err, at_floor) = rescale_error(
            (res_k - res_g) * half,
            res_abs * abs_half,
            res_asc * abs_half,
        );
        value[k] = res_k * half;
        error[k] = err;
        magnitude[k] = res_abs * abs_half;
        floored &= at_floor || err == 0.0;
    }
    Panel {
        a,
        b,
        value,
        error,
        magnitude,
        floored,
    }
}

/// Integrates `f` over the segments delimited by `points` (at least two,
/// increasing). Each segment starts as equal panels no wider than
/// `max_panel`; oscillatory integrands need roughly one panel per period to
/// avoid a spuriously small first error estimate. Pass `f64::INFINITY` for
/// one panel per segment.
///
/// A panel is accepted when, for every component, its error is below the
/// component's tolerance scaled by the panel's share of the total length.
/// The tolerance never drops below 100ε·∫|f|, the cancellation limit.
pub fn integrate<const N: usize, F>(
    f: F,
    points: &[f64],
    max_panel: f64,
    tol: Tolerance,
) -> Result<Estimate<N>>
where
    F: Fn(f64) -> [f64; N],
{
    assert!(points.len() >= 2, "need at least one segment");
    let lo = points[0];
    let hi = points[points.len() - 1];
    let total_len = hi - lo;
    if total_len == 0.0 {
        return Ok(Estimate {
            value: [0.0; N],
            error: [0.0; N],
            intervals: 0,
        });
    }

    let mut active: Vec<Panel<N>> = Vec::new();
    for seg in points.windows(2) {
        let (a, b) = (seg[0], seg[1]);
        if b <= a {
            continue;
        }
        let n0 = ((b - a) / max_panel).ceil().clamp(1.0, 1e7) as usize;
        let h = (b - a) / n0 as f64;
        for i in 0..n0 {
            let pa = a + h * i as f64;
            let pb = if i + 1 == n0 { b } else { a + h * (i + 1) as f64 };
            active.push(gk21(&f, pa, pb));
        }
    }

    let mut done_value = [0.0; N];
    let mut done_error = [0.0; N];
    let mut done_magnitude = [0.0; N];
    let mut intervals = active.len();

    loop {
        let mut total = done_value;
        let mut total_err = done_error;
        let mut total_mag = done_magnitude;
        for p in &active {
            for k in 0..N {
                total[k] += p.value[k];
                total_err[k] += p.error[k];
                total_mag[k] += p.magnitude[k];
            }
        }
        let budget: [f64; N] = std::array::from_fn(|k| {
            tol.abs
                .max(tol.rel * total[k].abs())
                .max(100.0 * f64::EPSILON * total_mag[k])
        });

        if total_err.iter().zip(&budget).all(|(e, b)| e <= b) {
            return Ok(Estimate {
                value: total,
                error: total_err,
                intervals,
            });
        }

        let mut next = Vec::new();
        for p in active.drain(..) {
            let share = (p.b - p.a) / total_len;
            let ok = p.floored
                || (0..N).all(|k| p.error[k] <= budget[k] * share)
                || (p.b - p.a) <= 4.0 * f64::EPSILON * p.a.abs().max(p.b.abs());
            if ok {
                for k in 0..N {
                    done_value[k] += p.value[k];
                    done_error[k] += p.error[k];
                    done_magnitude[k] += p.magnitude[k];
                }
            } else {
                let mid = 0.5 * (p.a + p.b);
                next.push(gk21(&f, p.a, mid));
                next.push(gk21(&f, mid, p.b));
                intervals += 1;
            }
        }
        if next.is_empty() {
            // Every panel met its share; only round-off floors can push the
            // sum past the budget, and bisecting does not reduce those.
            return Ok(Estimate {
                value: done_value,
                error: done_error,
                intervals,
            });
        }
        if intervals > tol.max_intervals {
            let worst = total_err.iter().cloned().fold(0.0_f64, f64::max);
            return Err(Error::Quadrature {
                error_estimate: worst,
                intervals,
            });
        }
        active = next;
    }
}

/// Scalar convenience wrapper around [`integrate`].
pub fn integrate_scalar<F>(f: F, points: &[f64], max_panel: f64, tol: Tolerance) -> Result<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let est = integrate(|x| [f(x)], points, max_panel, tol)?;
    Ok((est.value[0], est.error[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let (v, _) = integrate_scalar(|x| x.powi(5) - 3.0 * x * x, &[0.0, 2.0], f64::INFINITY, Tolerance::default()).unwrap();
        assert!((v - (64.0 / 6.0 - 8.0)).abs() < 1e-13);
    }

    #[test]
    fn gaussian_moment() {
        // ∫₀^∞ x e^{-x²} dx = 1/2
        let (v, _) = integrate_scalar(|x| x * (-x * x).exp(), &[0.0, 10.0], f64::INFINITY, Tolerance::new(1e-14, 1e-13)).unwrap();
        assert!((v - 0.5).abs() < 1e-13);
    }

    #[test]
    fn oscillatory_with_panels() {
        // ∫₀^{20π} sin²(x) dx = 10π
        let (v, _) = integrate_scalar(|x| x.sin().powi(2), &[0.0, 20.0 * PI], PI, Tolerance::default()).unwrap();
        assert!((v - 10.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn vector_components_share_panels() {
        let est = integrate(|x| [x.cos(), x.sin(), 1.0], &[0.0, 0.5 * PI, PI], 1.0, Tolerance::new(1e-13, 1e-13)).unwrap();
        assert!((est.value[0] - 0.0).abs() < 1e-13);
        assert!((est.value[1] - 2.0).abs() < 1e-13);
        assert!((est.value[2] - PI).abs() < 1e-13);
    }

    #[test]
    fn empty_range_is_zero() {
        let (v, e) = integrate_scalar(|x| x, &[1.0, 1.0], 0.25, Tolerance::default()).unwrap();
        assert_eq!((v, e), (0.0, 0.0));
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 0.0,
            max_intervals: 10,
        };
        let res = integrate_scalar(|x: f64| (1.0 / x.max(1e-300)).sqrt() * (1000.0 / x.max(1e-3)).sin(), &[0.0, 1.0], f64::INFINITY, tol);
        assert!(matches!(res, Err(Error::Quadrature { .. })));
    }
}
