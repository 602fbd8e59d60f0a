// SPDX-License-Identifier: Apache-2.0

//! Reference evolutions shared by the integration tests.

#![allow(dead_code)]

use gaussdyn::bath::{counterterm_sq, BathSpec};
use gaussdyn::coefficients::{build_table, CoefficientTable};
use gaussdyn::dynamics::{evolve_with_table, ModelKind, StepOptions, SystemParams, Trajectory};
use gaussdyn::gaussian::tmsv_covariance;
use nalgebra::Matrix2;

/// Model A at λ = 0 next to the same physics written as two separate
/// Brownian oscillators plus their passively rotated correlation block.
pub struct Reduction {
    pub model_a: Trajectory,
    /// Upper triangles (v11..v44) from the per-oscillator equations.
    pub reference: Vec<[f64; 10]>,
}

impl Reduction {
    pub fn max_abs_diff(&self) -> f64 {
        self.model_a
            .covariances
            .iter()
            .zip(&self.reference)
            .flat_map(|(v, w)| v.upper().iter().zip(w.iter()).map(|(a, b)| (a - b).abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }
}

pub fn reduction(r: f64, gamma0: f64, t_end: f64, dt: f64) -> Reduction {
    let bath = BathSpec::with_defaults(gamma0).unwrap();
    let params = SystemParams::new(1.0, 0.0, r, bath).unwrap();
    let opts = StepOptions::default();
    let table = build_table(t_end, opts.table_samples, &params.modes().unwrap(), &bath).unwrap();
    let model_a = evolve_with_table(&params, ModelKind::IndependentBaths, &table, t_end, dt, &opts).unwrap();
    let reference = brownian_pair(&table, &bath, r, &model_a.times, &opts);
    Reduction { model_a, reference }
}

// One oscillator: v̇xx = 2vxp, v̇xp = vpp − (1+K)vxx − 2γvxp − f,
// v̇pp = −2(1+K)vxp − 4γvpp + 2D; the cross block obeys Ċ = aC + Caᵀ.
fn brownian_pair(table: &CoefficientTable, bath: &BathSpec, r: f64, times: &[f64], opts: &StepOptions) -> Vec<[f64; 10]> {
    let oc = counterterm_sq(bath);
    let drift = |t: f64| {
        let c = table.at(t.min(table.t_end())).unwrap();
        let a = Matrix2::new(0.0, 1.0, -(1.0 + oc + c.omega_shift_sq[0]), -2.0 * c.gamma[0]);
        let b = Matrix2::new(0.0, -c.diff_f[0], -c.diff_f[0], 2.0 * c.diff_d[0]);
        (a, b)
    };
    let rate = |t: f64, s: &[Matrix2<f64>; 3]| {
        let (a, b) = drift(t);
        [
            a * s[0] + s[0] * a.transpose() + b,
            a * s[1] + s[1] * a.transpose() + b,
            a * s[2] + s[2] * a.transpose(),
        ]
    };
    let axpy = |s: &[Matrix2<f64>; 3], k: &[Matrix2<f64>; 3], h: f64| [s[0] + k[0] * h, s[1] + k[1] * h, s[2] + k[2] * h];

    let v0 = tmsv_covariance(r).to_matrix();
    let block = |i: usize, j: usize| Matrix2::new(v0[(i, j)], v0[(i, j + 1)], v0[(i + 1, j)], v0[(i + 1, j + 1)]);
    let mut s = [block(0, 0), block(2, 2), block(0, 2)];
    let pack = |s: &[Matrix2<f64>; 3]| {
        [
            s[0][(0, 0)], s[0][(0, 1)], s[2][(0, 0)], s[2][(0, 1)],
            s[0][(1, 1)], s[2][(1, 0)], s[2][(1, 1)],
            s[1][(0, 0)], s[1][(0, 1)],
            s[1][(1, 1)],
        ]
    };

    let transient_end = 50.0 / bath.cutoff;
    let mut out = vec![pack(&s)];
    for w in times.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        let span = t1 - t0;
        let mut steps = (span / opts.max_step).ceil().max(1.0) as usize;
        if t0 < transient_end {
            steps = steps.max((span * bath.cutoff / opts.transient_step).ceil() as usize).max(50);
        }
        let h = span / steps as f64;
        for i in 0..steps {
            let t = t0 + h * i as f64;
            let k1 = rate(t, &s);
            let k2 = rate(t + 0.5 * h, &axpy(&s, &k1, 0.5 * h));
            let k3 = rate(t + 0.5 * h, &axpy(&s, &k2, 0.5 * h));
            let k4 = rate(t + h, &axpy(&s, &k3, h));
            for j in 0..3 {
                s[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (h / 6.0);
            }
        }
        out.push(pack(&s));
    }
    out
}
