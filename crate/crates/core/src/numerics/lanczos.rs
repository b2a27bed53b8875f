//! Lanczos iteration with full reorthogonalization for extreme eigenvalues of
//! Hermitian operators given only as matrix-vector products.

use num_complex::Complex64;

use super::tridiag::eigenvalue_by_index;

/// Deterministic pseudo-random unit vector (SplitMix64 stream).
pub fn seeded_unit_vector(dim: usize, seed: u64) -> Vec<Complex64> {
    let mut state = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z = z ^ (z >> 31);
        (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut v: Vec<Complex64> = (0..dim).map(|_| Complex64::new(next(), next())).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in v.iter_mut() {
        *z /= norm;
    }
    v
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Smallest and largest eigenvalue of a Hermitian operator of dimension `dim`
/// whose action is given by `apply`.
pub fn hermitian_extremes<F>(dim: usize, mut apply: F, seed: u64) -> (f64, f64)
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    assert!(dim >= 1);
    if dim == 1 {
        let mut y = vec![Complex64::ZERO; 1];
        apply(&[Complex64::ONE], &mut y);
        return (y[0].re, y[0].re);
    }
    let max_steps = dim.min(180);
    let mut basis: Vec<Vec<Complex64>> = Vec::with_capacity(max_steps);
    let mut alphas: Vec<f64> = Vec::with_capacity(max_steps);
    let mut betas: Vec<f64> = Vec::with_capacity(max_steps);
    basis.push(seeded_unit_vector(dim, seed));
    let mut w = vec![Complex64::ZERO; dim];
    let mut extremes = (f64::INFINITY, f64::NEG_INFINITY);
    let mut stable_steps = 0usize;
    for step in 0..max_steps {
        let q = basis[step].clone();
        apply(&q, &mut w);
        let alpha = dot(&q, &w).re;
        alphas.push(alpha);
        // two-pass reorthogonalization against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                for (wi, bi) in w.iter_mut().zip(b) {
                    *wi -= c * bi;
                }
            }
        }
        let beta = norm(&w);
        let lo = eigenvalue_by_index(&alphas, &betas, 0);
        let hi = eigenvalue_by_index(&alphas, &betas, alphas.len() - 1);
        let scale = lo.abs().max(hi.abs()).max(1e-300);
        let moved = (lo - extremes.0).abs().max((hi - extremes.1).abs());
        extremes = (lo, hi);
        if step >= 1 && moved <= 1e-14 * scale {
            stable_steps += 1;
            if stable_steps >= 2 {
                break;
            }
        } else {
            stable_steps = 0;
        }
        if beta <= 1e-15 * scale.max(1.0) || basis.len() == dim {
            break;
        }
        betas.push(beta);
        let mut qnext = w.clone();
        for z in qnext.iter_mut() {
            *z /= beta;
        }
        basis.push(qnext);
    }
    extremes
}

/// Operator norm of a (not necessarily Hermitian) operator from its action and
/// the action of its adjoint, via the largest eigenvalue of A*A.
pub fn operator_norm<F, G>(dim: usize, mut apply: F, mut apply_adjoint: G, seed: u64) -> f64
where
    F: FnMut(&[Complex64], &mut [Complex64]),
    G: FnMut(&[Complex64], &mut [Complex64]),
{
    let mut mid = vec![Complex64::ZERO; dim];
    let gram = |x: &[Complex64], y: &mut [Complex64]| {
        apply(x, &mut mid);
        apply_adjoint(&mid, y);
    };
    let (_, top) = hermitian_extremes(dim, gram, seed);
    top.max(0.0).sqrt()
}
