// SPDX-License-Identifier: Apache-2.0

//! Two-mode Gaussian states in the (x₁, p₁, x₂, p₂) ordering.
//!
//! Covariances follow V_ij = ½⟨{ΔX_i, ΔX_j}⟩, so the vacuum is ½·I and the
//! separability boundary for the smallest partially transposed symplectic
//! eigenvalue is 1/2.

use nalgebra::{Cholesky, Matrix4};

use crate::error::{Error, Result};

/// Index pairs of the stored upper triangle, in CSV column order.
pub const UPPER: [(usize, usize); 10] = [
    (0, 0),
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 1),
    (1, 2),
    (1, 3),
    (2, 2),
    (2, 3),
    (3, 3),
];

/// Column labels matching [`UPPER`].
pub const UPPER_LABELS: [&str; 10] = ["v11", "v12", "v13", "v14", "v22", "v23", "v24", "v33", "v34", "v44"];

const PAIRING_TOL: f64 = 1e-9;
const SEPARABILITY_TOL: f64 = 1e-12;

/// Symmetric 4×4 covariance matrix stored as its upper triangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix {
    upper: [f64; 10],
}

impl CovarianceMatrix {
    pub fn from_upper(upper: [f64; 10]) -> Self {
        Self { upper }
    }

    /// Symmetrizes as (M + Mᵀ)/2.
    pub fn from_matrix(m: &Matrix4<f64>) -> Self {
        let upper = UPPER.map(|(i, j)| 0.5 * (m[(i, j)] + m[(j, i)]));
        Self { upper }
    }

    pub fn upper(&self) -> &[f64; 10] {
        &self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // row offsets into the packed triangle: 0, 4, 7, 9
        const OFFSET: [usize; 4] = [0, 4, 7, 9];
        self.upper[OFFSET[i] + j - i]
    }

    pub fn to_matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.get(i, j))
    }

    pub fn scaled_identity(a: f64) -> Self {
        Self::from_matrix(&(Matrix4::identity() * a))
    }

    pub fn is_finite(&self) -> bool {
        self.upper.iter().all(|v| v.is_finite())
    }

    pub fn determinant(&self) -> f64 {
        self.to_matrix().determinant()
    }

    /// Swaps the roles of the two oscillators.
    pub fn swap_modes(&self) -> Self {
        let perm = [2, 3, 0, 1];
        Self::from_matrix(&Matrix4::from_fn(|i, j| self.get(perm[i], perm[j])))
    }
}

/// σ = J ⊕ J with J = [[0, 1], [−1, 0]].
pub fn symplectic_form() -> Matrix4<f64> {
    let mut s = Matrix4::zeros();
    s[(0, 1)] = 1.0;
    s[(1, 0)] = -1.0;
    s[(2, 3)] = 1.0;
    s[(3, 2)] = -1.0;
    s
}

/// Two-mode squeezed vacuum with a = cosh(2r)/2, c = sinh(2r)/2.
pub fn tmsv_covariance(r: f64) -> CovarianceMatrix {
    let a = 0.5 * (2.0 * r).cosh();
    let c = 0.5 * (2.0 * r).sinh();
    CovarianceMatrix::from_upper([a, 0.0, -c, 0.0, a, 0.0, c, a, 0.0, a])
}

/// P V P with P = diag(1, 1, 1, −1).
pub fn partial_transpose(v: &CovarianceMatrix) -> CovarianceMatrix {
    let mut upper = *v.upper();
    for (k, &(i, j)) in UPPER.iter().enumerate() {
        if (i == 3) != (j == 3) {
            upper[k] = -upper[k];
        }
    }
    CovarianceMatrix::from_upper(upper)
}

/// The two symplectic eigenvalues, ascending.
///
/// With V = LLᵀ, iσV is similar to i·LᵀσL and K = LᵀσL is antisymmetric,
/// so its singular values are ν₁, ν₁, ν₂, ν₂. A real SVD resolves the small
/// pair to absolute accuracy ε‖V‖, which matters for strongly squeezed
/// states.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<[f64; 2]> {
    let vm = v.to_matrix();
    let chol = Cholesky::new(vm).ok_or_else(|| Error::Spectrum("covariance is not positive definite".into()))?;
    let l = chol.l();
    let k = l.transpose() * symplectic_form() * l;
    let mut sv: [f64; 4] = k
        .singular_values()
        .as_slice()
        .try_into()
        .expect("4x4 spectrum");
    if sv.iter().any(|l| !l.is_finite()) {
        return Err(Error::Spectrum("non-finite singular value".into()));
    }
    sv.sort_by(|a, b| a.total_cmp(b));
    let scale = sv[3].max(1.0);
    if (sv[1] - sv[0]).abs() > PAIRING_TOL * scale || (sv[3] - sv[2]).abs() > PAIRING_TOL * scale {
        return Err(Error::Spectrum(format!("unpaired spectrum {sv:?}")));
    }
    Ok([0.5 * (sv[0] + sv[1]), 0.5 * (sv[2] + sv[3])])
}

/// Smallest symplectic eigenvalue of the partial transpose.
pub fn smallest_pt_eigenvalue(v: &CovarianceMatrix) -> Result<f64> {
    Ok(symplectic_eigenvalues(&partial_transpose(v))?[0])
}

/// E_N = max(0, −log₂ 2V_s).
pub fn log_negativity(v: &CovarianceMatrix) -> Result<f64> {
    let vs = smallest_pt_eigenvalue(v)?;
    log_negativity_from(vs)
}

/// E_N for a known smallest partially transposed symplectic eigenvalue.
pub fn log_negativity_from(vs: f64) -> Result<f64> {
    if !(vs > 0.0) {
        return Err(Error::InvalidState(vs));
    }
    Ok((-(2.0 * vs).log2()).max(0.0))
}

/// PPT criterion with a 1e-12 allowance at the boundary.
pub fn is_separable(v: &CovarianceMatrix) -> Result<bool> {
    let vs = smallest_pt_eigenvalue(v)?;
    if !(vs > 0.0) {
        return Err(Error::InvalidState(vs));
    }
    Ok(vs >= 0.5 - SEPARABILITY_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::LN_2;

    // Oracle: −σVσV has eigenvalues ν₁², ν₁², ν₂², ν₂², so its trace gives
    // 2(ν₁² + ν₂²) while ν₁ν₂ = √det V.
    fn squared_route(v: &CovarianceMatrix) -> [f64; 2] {
        let s = symplectic_form();
        let vm = v.to_matrix();
        let m = -(s * vm * s * vm);
        let sum = 0.5 * m.trace();
        let prod = vm.determinant().sqrt();
        let disc = (sum * sum - 4.0 * prod * prod).max(0.0).sqrt();
        [(0.5 * (sum - disc)).sqrt(), (0.5 * (sum + disc)).sqrt()]
    }

    #[test]
    fn symplectic_form_identities() {
        let s = symplectic_form();
        assert_eq!(s.transpose(), -s);
        assert_eq!(s * s, -Matrix4::identity());
    }

    #[test]
    fn packed_storage_round_trip() {
        let m = Matrix4::from_fn(|i, j| (1 + i.min(j)) as f64 * 10.0 + i.max(j) as f64);
        let v = CovarianceMatrix::from_matrix(&m);
        assert_eq!(v.to_matrix(), m);
        assert_eq!(v.get(3, 1), m[(1, 3)]);
    }

    #[test]
    fn tmsv_entries() {
        assert_eq!(tmsv_covariance(0.0), CovarianceMatrix::scaled_identity(0.5));
        let v = tmsv_covariance(2.0);
        assert!((v.get(0, 0) - 13.654_116_418).abs() < 1e-8);
        assert!((v.get(1, 3) - 13.644_958_599).abs() < 1e-8);
        assert_eq!(v.get(0, 2), -v.get(1, 3));
    }

    #[test]
    fn tmsv_is_pure() {
        for &r in &[0.0, 0.1, 1.0, 2.0] {
            let nu = symplectic_eigenvalues(&tmsv_covariance(r)).unwrap();
            assert!((nu[0] - 0.5).abs() < 1e-12 && (nu[1] - 0.5).abs() < 1e-12, "r = {r}: {nu:?}");
        }
    }

    #[test]
    fn partial_transpose_involution() {
        let v = tmsv_covariance(0.7);
        assert_eq!(partial_transpose(&partial_transpose(&v)), v);
        let vac = CovarianceMatrix::scaled_identity(0.5);
        assert_eq!(partial_transpose(&vac), vac);
        let pt = partial_transpose(&v);
        assert_eq!(pt.get(1, 3), -v.get(1, 3));
        assert_eq!(pt.get(0, 2), v.get(0, 2));
    }

    #[test]
    fn pt_spectrum_of_tmsv() {
        let pt = partial_transpose(&tmsv_covariance(2.0));
        let nu = symplectic_eigenvalues(&pt).unwrap();
        let oracle = squared_route(&pt);
        assert!((nu[0] - (-4.0_f64).exp() / 2.0).abs() < 1e-12);
        assert!((nu[1] - 4.0_f64.exp() / 2.0).abs() < 1e-10);
        assert!((nu[0] - 0.009_157_8).abs() < 1e-7 && (nu[1] - 27.299_07).abs() < 1e-4);
        assert!((nu[0] - oracle[0]).abs() < 1e-9 && (nu[1] - oracle[1]).abs() < 1e-9);
    }

    #[test]
    fn scaled_identity_spectrum() {
        for &a in &[0.5, 2.5] {
            let nu = symplectic_eigenvalues(&CovarianceMatrix::scaled_identity(a)).unwrap();
            assert!((nu[0] - a).abs() < 1e-14 && (nu[1] - a).abs() < 1e-14);
        }
    }

    #[test]
    fn tmsv_log_negativity() {
        assert_eq!(log_negativity(&tmsv_covariance(0.0)).unwrap(), 0.0);
        let e = log_negativity(&tmsv_covariance(2.0)).unwrap();
        assert!((e - 4.0 / LN_2).abs() < 1e-10);
        assert!((e - 5.770_78).abs() < 1e-5);
        for k in 0..=30 {
            let r = 0.1 * k as f64;
            let e = log_negativity(&tmsv_covariance(r)).unwrap();
            assert!((e - 2.0 * r / LN_2).abs() < 1e-10, "r = {r}: {e}");
        }
    }

    #[test]
    fn boundary_is_separable() {
        assert_eq!(log_negativity_from(0.5).unwrap(), 0.0);
        assert!(is_separable(&tmsv_covariance(0.0)).unwrap());
        assert!(!is_separable(&tmsv_covariance(0.1)).unwrap());
        assert!(matches!(log_negativity_from(0.0), Err(Error::InvalidState(_))));
    }

    #[test]
    fn rotated_weakly_squeezed_state() {
        // A TMSV after local rotations; the spectrum is that of the TMSV.
        let v = CovarianceMatrix::from_upper([
            0.510033377809538,
            0.0,
            -0.09541113755570362,
            -0.03210547165411928,
            0.510033377809538,
            -0.03210547165411928,
            0.09541113755570362,
            0.510033377809538,
            0.0,
            0.510033377809538,
        ]);
        let pt = partial_transpose(&v);
        let nu = symplectic_eigenvalues(&pt).unwrap();
        let oracle = squared_route(&pt);
        assert!((nu[0] - oracle[0]).abs() < 1e-12 && (nu[1] - oracle[1]).abs() < 1e-12, "{nu:?} {oracle:?}");
    }

    #[test]
    fn corrupted_input_is_rejected() {
        // Indefinite "covariance": σV acquires a real eigenvalue pair.
        let v = CovarianceMatrix::from_upper([1.0, 3.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        assert!(matches!(symplectic_eigenvalues(&v), Err(Error::Spectrum(_))));
    }
}
