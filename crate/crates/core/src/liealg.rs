//! Hermitian traceless generator bases of su(k) and their structure constants.
//!
//! Two normalizations are supported: `Orthonormal` (generalized Gell-Mann
//! matrices scaled to tr(b_i b_j) = delta_ij) and `Pauli` (k = 2 only,
//! tr(sigma_i sigma_j) = 2 delta_ij). Generator ordering: symmetric pairs
//! (i < j, lexicographic), then antisymmetric pairs, then diagonal matrices.

use num_complex::Complex64;

use crate::error::{CwqError, Result};

/// Dense complex matrix used throughout the crate.
pub type CMatrix = nalgebra::DMatrix<Complex64>;
/// Dense complex vector used throughout the crate.
pub type CVector = nalgebra::DVector<Complex64>;

/// Generator normalization convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// tr(b_i b_j) = delta_ij for any k >= 2.
    Orthonormal,
    /// The Pauli matrices themselves, tr(sigma_i sigma_j) = 2 delta_ij; k = 2 only.
    Pauli,
}

impl std::fmt::Display for Convention {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Convention::Orthonormal => write!(f, "orthonormal"),
            Convention::Pauli => write!(f, "pauli"),
        }
    }
}

/// A concrete generator basis of su(k).
#[derive(Debug, Clone)]
pub struct SuBasis {
    k: usize,
    convention: Convention,
    generators: Vec<CMatrix>,
}

fn unit(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl SuBasis {
    /// Build the generator basis; `Pauli` requires k = 2.
    pub fn new(k: usize, convention: Convention) -> Result<Self> {
        if k < 2 {
            return Err(CwqError::Dimension(format!("k must be >= 2, got {k}")));
        }
        if convention == Convention::Pauli && k != 2 {
            return Err(CwqError::Dimension(format!(
                "the Pauli convention is defined for k = 2 only, got k = {k}"
            )));
        }
        let scale = match convention {
            Convention::Orthonormal => 1.0 / 2f64.sqrt(),
            Convention::Pauli => 1.0,
        };
        let mut generators = Vec::with_capacity(k * k - 1);
        // symmetric pairs
        for i in 0..k {
            for j in (i + 1)..k {
                let mut m = CMatrix::zeros(k, k);
                m[(i, j)] = unit(scale, 0.0);
                m[(j, i)] = unit(scale, 0.0);
                generators.push(m);
            }
        }
        // antisymmetric pairs
        for i in 0..k {
            for j in (i + 1)..k {
                let mut m = CMatrix::zeros(k, k);
                m[(i, j)] = unit(0.0, -scale);
                m[(j, i)] = unit(0.0, scale);
                generators.push(m);
            }
        }
        // diagonal generators, l = 1..k-1
        for l in 1..k {
            let lf = l as f64;
            let norm = match convention {
                Convention::Orthonormal => 1.0 / (lf * (lf + 1.0)).sqrt(),
                Convention::Pauli => (2.0 / (lf * (lf + 1.0))).sqrt(),
            };
            let mut m = CMatrix::zeros(k, k);
            for d in 0..l {
                m[(d, d)] = unit(norm, 0.0);
            }
            m[(l, l)] = unit(-lf * norm, 0.0);
            generators.push(m);
        }
        Ok(SuBasis { k, convention, generators })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of generators, k^2 - 1.
    pub fn dim(&self) -> usize {
        self.k * self.k - 1
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    pub fn generators(&self) -> &[CMatrix] {
        &self.generators
    }

    pub fn generator(&self, j: usize) -> &CMatrix {
        &self.generators[j]
    }

    /// tr(b_j b_j), identical for every generator of the basis.
    pub fn generator_norm_sq(&self) -> f64 {
        match self.convention {
            Convention::Orthonormal => 1.0,
            Convention::Pauli => 2.0,
        }
    }

    /// Structure constants Cms [b_r, b_s] = i sum_l C[r][s][l] b_l.
    pub fn structure_constants(&self) -> Result<StructureConstants> {
        StructureConstants::compute(self)
    }
}

/// Fully antisymmetric structure constants of a generator basis.
#[derive(Debug, Clone)]
pub struct StructureConstants {
    dim: usize,
    table: Vec<f64>,
    nonzero: Vec<(usize, usize, usize, f64)>,
}

impl StructureConstants {
    fn compute(basis: &SuBasis) -> Result<Self> {
        let dim = basis.dim();
        let norm_sq = basis.generator_norm_sq();
        let mut table = vec![0.0; dim * dim * dim];
        let mut nonzero = Vec::new();
        for r in 0..dim {
            for s in 0..dim {
                if r == s {
                    continue;
                }
                let br = basis.generator(r);
                let bs = basis.generator(s);
                let comm = br * bs - bs * br;
                for l in 0..dim {
                    let tr: Complex64 = (&comm * basis.generator(l)).trace();
                    // tr([b_r, b_s] b_l) is purely imaginary for Hermitian generators
                    if tr.re.abs() > 1e-10 {
                        return Err(CwqError::Numerical(format!(
                            "structure constant ({r},{s},{l}) has real residue {:.3e}",
                            tr.re
                        )));
                    }
                    let c = tr.im / norm_sq;
                    if c.abs() > 1e-12 {
                        table[(r * dim + s) * dim + l] = c;
                        nonzero.push((r, s, l, c));
                    }
                }
            }
        }
        Ok(StructureConstants { dim, table, nonzero })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// C[r][s][l] with 0-based indices.
    pub fn get(&self, r: usize, s: usize, l: usize) -> f64 {
        self.table[(r * self.dim + s) * self.dim + l]
    }

    /// Non-vanishing entries (r, s, l, value).
    pub fn nonzero(&self) -> &[(usize, usize, usize, f64)] {
        &self.nonzero
    }

    /// Sum of squares of all entries, invariant under basis rotations.
    pub fn sum_sq(&self) -> f64 {
        self.nonzero.iter().map(|&(_, _, _, c)| c * c).sum()
    }
}

/// Frobenius inner product tr(a^dagger b).
pub fn frobenius_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pauli() -> [CMatrix; 3] {
        let s1 = CMatrix::from_row_slice(2, 2, &[unit(0., 0.), unit(1., 0.), unit(1., 0.), unit(0., 0.)]);
        let s2 = CMatrix::from_row_slice(2, 2, &[unit(0., 0.), unit(0., -1.), unit(0., 1.), unit(0., 0.)]);
        let s3 = CMatrix::from_row_slice(2, 2, &[unit(1., 0.), unit(0., 0.), unit(0., 0.), unit(-1., 0.)]);
        [s1, s2, s3]
    }

    #[test]
    fn pauli_basis_is_the_pauli_matrices() {
        let basis = SuBasis::new(2, Convention::Pauli).unwrap();
        for (g, p) in basis.generators().iter().zip(pauli()) {
            assert_relative_eq!((g - p).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn orthonormal_k2_is_pauli_over_sqrt2() {
        let basis = SuBasis::new(2, Convention::Orthonormal).unwrap();
        let s = 1.0 / 2f64.sqrt();
        for (g, p) in basis.generators().iter().zip(pauli()) {
            assert_relative_eq!((g - p * unit(s, 0.0)).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn generators_are_hermitian_traceless_orthogonal() {
        for (k, conv) in [(2, Convention::Pauli), (2, Convention::Orthonormal), (3, Convention::Orthonormal), (4, Convention::Orthonormal), (5, Convention::Orthonormal)] {
            let basis = SuBasis::new(k, conv).unwrap();
            assert_eq!(basis.generators().len(), k * k - 1);
            let t = basis.generator_norm_sq();
            for (i, g) in basis.generators().iter().enumerate() {
                assert_relative_eq!((g - g.adjoint()).norm(), 0.0, epsilon = 1e-14);
                assert_relative_eq!(g.trace().norm(), 0.0, epsilon = 1e-14);
                for (j, h) in basis.generators().iter().enumerate() {
                    let inner = frobenius_inner(g, h);
                    let expect = if i == j { t } else { 0.0 };
                    assert_relative_eq!(inner.re, expect, epsilon = 1e-13);
                    assert_relative_eq!(inner.im, 0.0, epsilon = 1e-13);
                }
            }
        }
    }

    #[test]
    fn pauli_structure_constants_are_twice_levi_civita() {
        let basis = SuBasis::new(2, Convention::Pauli).unwrap();
        let sc = basis.structure_constants().unwrap();
        let eps = |r: usize, s: usize, l: usize| -> f64 {
            match (r, s, l) {
                (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
                (1, 0, 2) | (0, 2, 1) | (2, 1, 0) => -1.0,
                _ => 0.0,
            }
        };
        for r in 0..3 {
            for s in 0..3 {
                for l in 0..3 {
                    assert_relative_eq!(sc.get(r, s, l), 2.0 * eps(r, s, l), epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn orthonormal_k2_c123_is_sqrt2() {
        let basis = SuBasis::new(2, Convention::Orthonormal).unwrap();
        let sc = basis.structure_constants().unwrap();
        assert_relative_eq!(sc.get(0, 1, 2), 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn structure_constants_are_totally_antisymmetric() {
        for k in [2usize, 3, 4] {
            let basis = SuBasis::new(k, Convention::Orthonormal).unwrap();
            let sc = basis.structure_constants().unwrap();
            let d = basis.dim();
            for r in 0..d {
                for s in 0..d {
                    for l in 0..d {
                        let c = sc.get(r, s, l);
                        assert_relative_eq!(c, -sc.get(s, r, l), epsilon = 1e-12);
                        assert_relative_eq!(c, -sc.get(r, l, s), epsilon = 1e-12);
                        assert_relative_eq!(c, sc.get(s, l, r), epsilon = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn commutator_closure_reconstructs_from_constants() {
        // [b_r, b_s] = i sum_l C[r][s][l] b_l
        for (k, conv) in [(2, Convention::Pauli), (3, Convention::Orthonormal)] {
            let basis = SuBasis::new(k, conv).unwrap();
            let sc = basis.structure_constants().unwrap();
            let d = basis.dim();
            for r in 0..d {
                for s in 0..d {
                    let br = basis.generator(r);
                    let bs = basis.generator(s);
                    let mut rhs = CMatrix::zeros(k, k);
                    for l in 0..d {
                        rhs += basis.generator(l) * unit(0.0, sc.get(r, s, l));
                    }
                    let lhs = br * bs - bs * br;
                    assert_relative_eq!((lhs - rhs).norm(), 0.0, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn sum_of_squares_is_invariant_under_unitary_conjugation() {
        // conjugate the whole basis by a fixed unitary and recompute
        let k = 3;
        let basis = SuBasis::new(k, Convention::Orthonormal).unwrap();
        let sc = basis.structure_constants().unwrap();
        // unitary from a Householder-free construction: product of Givens rotations
        let mut u = CMatrix::identity(k, k);
        let planes = [(0usize, 1usize, 0.6, 0.2), (1, 2, -0.8, 1.3), (0, 2, 0.3, -0.5)];
        for &(p, q, th, ph) in &planes {
            let mut g = CMatrix::identity(k, k);
            let (c, s) = (f64::cos(th), f64::sin(th));
            let e = Complex64::from_polar(1.0, ph);
            g[(p, p)] = unit(c, 0.0);
            g[(q, q)] = unit(c, 0.0);
            g[(p, q)] = s * e;
            g[(q, p)] = -s * e.conj();
            u = &u * &g;
        }
        let rotated: Vec<CMatrix> = basis.generators().iter().map(|b| &u * b * u.adjoint()).collect();
        let mut conj_basis = basis.clone();
        conj_basis.generators = rotated;
        let sc2 = conj_basis.structure_constants().unwrap();
        assert_relative_eq!(sc.sum_sq(), sc2.sum_sq(), max_relative = 1e-8);
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(SuBasis::new(1, Convention::Orthonormal).is_err());
        assert!(SuBasis::new(3, Convention::Pauli).is_err());
    }
}
