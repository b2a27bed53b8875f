//! Cross-module consistency checks on the public API.
//!
//! These tests exercise compositions that no single module owns: classical
//! minimization feeding the state-space membership test, the tridiagonal
//! ground-state solver against its own quadratic form, and the quantization
//! map acting on random vectors.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cwq_core::{
    cw_symbol, ground_state, membership, minimize_classical, quantize_words, Convention,
    CwHamiltonian, Polynomial, SuBasis,
};

#[test]
fn classical_minimizers_are_boundary_states_at_the_expected_energy() {
    let basis = SuBasis::new(2, Convention::Pauli).unwrap();
    let symbol = cw_symbol(1.0, 0.5);
    let data = minimize_classical(1.0, 0.5).unwrap();
    assert_eq!(data.minima.len(), 2, "symmetry-broken phase has two minima");

    for point in &data.minima {
        let verdict = membership(point, &basis).unwrap();
        assert!(verdict.is_state, "margin {:.3e}", verdict.margin);
        assert!(
            (point.norm() - 1.0).abs() < 1e-9,
            "minimizer should sit on the Bloch sphere, |x| = {}",
            point.norm()
        );
        let value = symbol.evaluate(point.coords()).unwrap();
        assert!((value.re - -0.625).abs() < 1e-9, "energy {}", value.re);
        assert!(value.im.abs() < 1e-12);
    }
}

#[test]
fn ground_state_energy_equals_the_tridiagonal_quadratic_form() {
    for n in [5usize, 12, 30, 40, 60] {
        let ham = CwHamiltonian::new(n, 1.0, 0.5).unwrap();
        let gs = ground_state(n, 1.0, 0.5).unwrap();
        let c = &gs.c;
        let diag_part: f64 = ham.diag().iter().zip(c).map(|(d, v)| d * v * v).sum();
        let off_part: f64 = ham
            .off()
            .iter()
            .zip(c.windows(2))
            .map(|(e, w)| 2.0 * e * w[0] * w[1])
            .sum();
        let quad = diag_part + off_part;
        // Near-degenerate doublets let the parity projection move the Rayleigh
        // quotient by at most the gap.
        let tol = 1e-10 + gs.gap;
        assert!(
            (quad - gs.energy).abs() <= tol,
            "N={n}: quadratic form {quad} vs energy {} (gap {:.3e})",
            gs.energy,
            gs.gap
        );
        let norm: f64 = c.iter().map(|v| v * v).sum();
        assert!((norm - 1.0).abs() < 1e-12, "N={n}: norm {norm}");
    }
}

fn random_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<Complex64> {
    (0..dim)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn poly_from_coeffs(coeffs: &[f64]) -> Polynomial {
    let mut f = Polynomial::zero(3);
    let mut idx = 0;
    for a in 0..=2u16 {
        for b in 0..=2u16 {
            for c in 0..=2u16 {
                if a + b + c <= 2 {
                    let term =
                        Polynomial::monomial(3, &[a, b, c], Complex64::new(coeffs[idx], 0.0))
                            .unwrap();
                    f = f.add(&term).unwrap();
                    idx += 1;
                }
            }
        }
    }
    f
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn quantize_words_is_linear_and_hermitian(
        fc in proptest::collection::vec(-1.0f64..1.0, 10),
        gc in proptest::collection::vec(-1.0f64..1.0, 10),
        n in 2usize..=6,
        seed in 0u64..1000,
    ) {
        let basis = SuBasis::new(2, Convention::Pauli).unwrap();
        let f = poly_from_coeffs(&fc);
        let g = poly_from_coeffs(&gc);
        let sum = f.add(&g).unwrap();

        let qf = quantize_words(&f, n, &basis).unwrap();
        let qg = quantize_words(&g, n, &basis).unwrap();
        let qsum = quantize_words(&sum, n, &basis).unwrap();
        let dim = qf.dim();

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_vector(&mut rng, dim);
        let y = random_vector(&mut rng, dim);

        let mut fx = vec![Complex64::default(); dim];
        let mut gx = vec![Complex64::default(); dim];
        let mut sx = vec![Complex64::default(); dim];
        qf.apply(&x, &mut fx);
        qg.apply(&x, &mut gx);
        qsum.apply(&x, &mut sx);
        for i in 0..dim {
            prop_assert!((sx[i] - (fx[i] + gx[i])).norm() < 1e-12);
        }

        let mut fy = vec![Complex64::default(); dim];
        qf.apply(&y, &mut fy);
        let lhs = inner(&y, &fx);
        let rhs = inner(&fy, &x);
        prop_assert!((lhs - rhs).norm() < 1e-10,
            "Hermiticity defect {:.3e} at N={n}", (lhs - rhs).norm());
    }
}
