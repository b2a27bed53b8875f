//! Density matrices of M_k(C) and their Bloch-style coordinates.
//!
//! A state rho corresponds to coordinates x_j = tr(rho b_j) through the
//! affine parametrization rho = I/k + sum_j x_j b_j / tr(b_j^2). Membership
//! of a coordinate vector in the state space is decided without
//! diagonalization: rho has unit trace, so it is positive semidefinite
//! exactly when all elementary symmetric polynomials of its spectrum are
//! nonnegative, and those are recovered from power sums tr(rho^m) by the
//! Newton identities.

use num_complex::Complex64;

use crate::error::{CwqError, Result};
use crate::liealg::{CMatrix, SuBasis};

/// Tolerance on the elementary symmetric polynomials in `membership`.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// A point of R^(k^2-1) in generator coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct StateCoordinates {
    k: usize,
    x: Vec<f64>,
}

impl StateCoordinates {
    /// Wrap a coordinate vector; the length must be k^2 - 1.
    pub fn new(k: usize, x: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(CwqError::Dimension(format!("k must be >= 2, got {k}")));
        }
        if x.len() != k * k - 1 {
            return Err(CwqError::Dimension(format!(
                "expected {} coordinates for k = {k}, got {}",
                k * k - 1,
                x.len()
            )));
        }
        Ok(StateCoordinates { k, x })
    }

    /// The origin, i.e. the maximally mixed state.
    pub fn origin(k: usize) -> Result<Self> {
        Self::new(k, vec![0.0; k * k - 1])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    /// Euclidean norm of the coordinate vector.
    pub fn norm(&self) -> f64 {
        self.x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A validated density matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    k: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validate Hermiticity, unit trace, and positive semidefiniteness.
    pub fn try_new(mat: CMatrix) -> Result<Self> {
        let k = mat.nrows();
        if k < 2 || mat.ncols() != k {
            return Err(CwqError::Dimension(format!(
                "density matrix must be square with k >= 2, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let herm_defect = (&mat - mat.adjoint()).norm();
        if herm_defect > 1e-10 {
            return Err(CwqError::NotAState(format!(
                "not Hermitian, defect {herm_defect:.3e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(CwqError::NotAState(format!("trace {tr} is not 1")));
        }
        let sym = (&mat + mat.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = sym.symmetric_eigenvalues();
        let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-10 {
            return Err(CwqError::NotAState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(DensityMatrix { k, mat })
    }

    /// Rank-one projector onto a (not necessarily normalized) vector.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let k = psi.len();
        let nrm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if k < 2 || nrm2 <= 0.0 {
            return Err(CwqError::Dimension(
                "pure state needs a nonzero vector of length >= 2".into(),
            ));
        }
        let mut mat = CMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                mat[(i, j)] = psi[i] * psi[j].conj() / nrm2;
            }
        }
        Ok(DensityMatrix { k, mat })
    }

    pub fn maximally_mixed(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(CwqError::Dimension(format!("k must be >= 2, got {k}")));
        }
        let mat = CMatrix::identity(k, k) * Complex64::new(1.0 / k as f64, 0.0);
        Ok(DensityMatrix { k, mat })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Build the matrix I/k + sum_j x_j b_j / tr(b_j^2) without any state check.
pub fn f_k_matrix(x: &StateCoordinates, basis: &SuBasis) -> Result<CMatrix> {
    let k = basis.k();
    if x.k() != k {
        return Err(CwqError::Dimension(format!(
            "coordinates are for k = {}, basis for k = {k}",
            x.k()
        )));
    }
    let mut mat = CMatrix::identity(k, k) * Complex64::new(1.0 / k as f64, 0.0);
    let t = basis.generator_norm_sq();
    for (j, g) in basis.generators().iter().enumerate() {
        mat += g * Complex64::new(x.coords()[j] / t, 0.0);
    }
    Ok(mat)
}

/// The parametrization map: coordinates to a validated density matrix.
///
/// Fails with `NotAState` when the coordinates lie outside the state space.
pub fn f_k(x: &StateCoordinates, basis: &SuBasis) -> Result<DensityMatrix> {
    let m = membership(x, basis)?;
    if !m.is_state {
        return Err(CwqError::NotAState(format!(
            "coordinates outside the state space, margin {:.3e}",
            m.margin
        )));
    }
    let mat = f_k_matrix(x, basis)?;
    Ok(DensityMatrix { k: basis.k(), mat })
}

/// The inverse parametrization: x_j = tr(rho b_j).
pub fn f_k_inverse(rho: &DensityMatrix, basis: &SuBasis) -> Result<StateCoordinates> {
    let k = basis.k();
    if rho.k() != k {
        return Err(CwqError::Dimension(format!(
            "state is for k = {}, basis for k = {k}",
            rho.k()
        )));
    }
    let mut x = Vec::with_capacity(basis.dim());
    for g in basis.generators() {
        let tr: Complex64 = (rho.matrix() * g).trace();
        if tr.im.abs() > 1e-9 {
            return Err(CwqError::Numerical(format!(
                "tr(rho b_j) has imaginary residue {:.3e}",
                tr.im
            )));
        }
        x.push(tr.re);
    }
    StateCoordinates::new(k, x)
}

/// Outcome of a state-space membership test.
#[derive(Debug, Clone)]
pub struct MembershipResult {
    /// Whether the coordinates describe a state (all coefficients >= -tolerance).
    pub is_state: bool,
    /// Smallest elementary symmetric polynomial of the spectrum.
    pub margin: f64,
    /// e_1, ..., e_k of the spectrum of f_k(x).
    pub coefficients: Vec<f64>,
}

/// Elementary symmetric polynomials e_1..e_k of the spectrum of f_k(x).
///
/// Power sums p_m = tr(rho^m) feed the Newton identities
/// j e_j = sum_{i=1..j} (-1)^(i-1) e_(j-i) p_i.
pub fn char_poly_coefficients(x: &StateCoordinates, basis: &SuBasis) -> Result<Vec<f64>> {
    let k = basis.k();
    let mat = f_k_matrix(x, basis)?;
    let mut power = mat.clone();
    let mut p = Vec::with_capacity(k);
    p.push(power.trace().re);
    for _ in 2..=k {
        power = &power * &mat;
        p.push(power.trace().re);
    }
    let mut e = vec![1.0f64];
    for j in 1..=k {
        let mut acc = 0.0;
        let mut sign = 1.0;
        for i in 1..=j {
            acc += sign * e[j - i] * p[i - 1];
            sign = -sign;
        }
        e.push(acc / j as f64);
    }
    Ok(e[1..].to_vec())
}

/// Decide membership of coordinates in the state space.
pub fn membership(x: &StateCoordinates, basis: &SuBasis) -> Result<MembershipResult> {
    let coefficients = char_poly_coefficients(x, basis)?;
    let margin = coefficients.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(MembershipResult {
        is_state: margin >= -MEMBERSHIP_TOL,
        margin,
        coefficients,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::Convention;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn origin_is_maximally_mixed() {
        for k in 2..=4 {
            let basis = SuBasis::new(k, Convention::Orthonormal).unwrap();
            let x = StateCoordinates::origin(k).unwrap();
            let rho = f_k(&x, &basis).unwrap();
            let mm = DensityMatrix::maximally_mixed(k).unwrap();
            assert_relative_eq!((rho.matrix() - mm.matrix()).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn origin_coefficients_are_binomial_over_power() {
        // spectrum of I/k is 1/k repeated, so e_j = C(k, j) / k^j
        for k in 2..=5 {
            let basis = SuBasis::new(k, Convention::Orthonormal).unwrap();
            let x = StateCoordinates::origin(k).unwrap();
            let e = char_poly_coefficients(&x, &basis).unwrap();
            for (j, &ej) in e.iter().enumerate() {
                let jj = j + 1;
                let binom = crate::numerics::ln_binomial(k as u64, jj as u64).exp();
                assert_relative_eq!(ej, binom / (k as f64).powi(jj as i32), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn round_trip_through_pure_states() {
        for (k, conv) in [(2, Convention::Pauli), (2, Convention::Orthonormal), (3, Convention::Orthonormal)] {
            let basis = SuBasis::new(k, conv).unwrap();
            let mut psi: Vec<Complex64> = (0..k)
                .map(|i| c(1.0 / (i as f64 + 1.0), 0.3 * i as f64 - 0.2))
                .collect();
            psi[0] += c(0.1, 0.0);
            let rho = DensityMatrix::pure(&psi).unwrap();
            let x = f_k_inverse(&rho, &basis).unwrap();
            let rho2 = f_k(&x, &basis).unwrap();
            assert_relative_eq!((rho.matrix() - rho2.matrix()).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn pauli_ball_boundary() {
        // for k = 2 in the Pauli convention the state space is the unit ball
        let basis = SuBasis::new(2, Convention::Pauli).unwrap();
        let dirs = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.6, 0.0, 0.8],
            [0.36, 0.48, 0.8],
        ];
        for d in dirs {
            let inside = StateCoordinates::new(2, d.iter().map(|v| 0.99 * v).collect()).unwrap();
            let outside = StateCoordinates::new(2, d.iter().map(|v| 1.01 * v).collect()).unwrap();
            assert!(membership(&inside, &basis).unwrap().is_state);
            assert!(!membership(&outside, &basis).unwrap().is_state);
            let on = StateCoordinates::new(2, d.to_vec()).unwrap();
            let m = membership(&on, &basis).unwrap();
            assert!(m.margin.abs() <= 1e-12);
            assert!(m.is_state);
        }
    }

    #[test]
    fn orthonormal_ball_radius_scales_by_sqrt_t() {
        // pure states sit at radius sqrt(t (1 - 1/k)) from the origin
        for (k, conv, t) in [
            (2, Convention::Pauli, 2.0),
            (2, Convention::Orthonormal, 1.0),
            (3, Convention::Orthonormal, 1.0),
        ] {
            let basis = SuBasis::new(k, conv).unwrap();
            let psi: Vec<Complex64> = (0..k).map(|i| if i == 0 { c(1.0, 0.0) } else { c(0.0, 0.0) }).collect();
            let rho = DensityMatrix::pure(&psi).unwrap();
            let x = f_k_inverse(&rho, &basis).unwrap();
            let expect = (t * (1.0 - 1.0 / k as f64)).sqrt();
            assert_relative_eq!(x.norm(), expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn membership_agrees_with_eigenvalues() {
        // pseudo-random coordinates, compare the Newton-identity verdict with
        // a direct spectral check
        let basis = SuBasis::new(3, Convention::Orthonormal).unwrap();
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (seed >> 11) as f64 / (1u64 << 53) as f64
        };
        let mut both_kinds = (false, false);
        for _ in 0..200 {
            let raw: Vec<f64> = (0..8).map(|_| 2.0 * next() - 1.0).collect();
            let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-9);
            let r = 1.2 * next();
            let x: Vec<f64> = raw.iter().map(|v| v * r / norm).collect();
            let x = StateCoordinates::new(3, x).unwrap();
            let verdict = membership(&x, &basis).unwrap();
            let mat = f_k_matrix(&x, &basis).unwrap();
            let min_eig = mat
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if min_eig > 1e-8 {
                assert!(verdict.is_state, "min eigenvalue {min_eig:.3e} but margin {:.3e}", verdict.margin);
            }
            if min_eig < -1e-8 {
                assert!(!verdict.is_state, "min eigenvalue {min_eig:.3e} but margin {:.3e}", verdict.margin);
            }
            if verdict.is_state {
                both_kinds.0 = true;
            } else {
                both_kinds.1 = true;
            }
        }
        assert!(both_kinds.0 && both_kinds.1, "sample should straddle the boundary");
    }

    #[test]
    fn try_new_rejects_bad_matrices() {
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5, 0.0), c(0.3, 0.0), c(0.1, 0.0), c(0.5, 0.0)]);
        assert!(DensityMatrix::try_new(not_herm).is_err());
        let bad_trace = CMatrix::identity(2, 2);
        assert!(DensityMatrix::try_new(bad_trace).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.2, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-0.2, 0.0)]);
        assert!(DensityMatrix::try_new(negative).is_err());
    }
}
