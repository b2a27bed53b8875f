//! Symmetric tridiagonal eigensolver: Sturm-sequence bisection for selected
//! eigenvalues plus inverse iteration (with partial pivoting) for their vectors.
//!
//! Only a handful of extreme eigenpairs are ever needed here, so bisection on
//! the eigenvalue index beats a full decomposition for the dimensions involved.

/// Number of eigenvalues of T strictly below `x`, via the shifted LDL^T sign count.
pub fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    const PIVMIN: f64 = 1e-300;
    let mut count = 0usize;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] / q };
        q = diag[i] - x - coupling;
        if q.abs() < PIVMIN {
            q = -PIVMIN;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn gershgorin_bounds(diag: &[f64], off: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let mut r = 0.0;
        if i > 0 {
            r += off[i - 1].abs();
        }
        if i + 1 < n {
            r += off[i].abs();
        }
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    (lo, hi)
}

/// The `idx`-th (0-based, ascending) eigenvalue by bisection.
pub fn eigenvalue_by_index(diag: &[f64], off: &[f64], idx: usize) -> f64 {
    let n = diag.len();
    assert!(idx < n);
    if n == 1 {
        return diag[0];
    }
    let (mut lo, mut hi) = gershgorin_bounds(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    lo -= 1e-12 * scale;
    hi += 1e-12 * scale;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > idx {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Solve (T - sigma) x = rhs by Gaussian elimination with partial pivoting.
fn solve_shifted(diag: &[f64], off: &[f64], sigma: f64, rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let tiny = f64::EPSILON
        * diag.iter().chain(off.iter()).fold(1e-300f64, |a, &b| a.max(b.abs()));
    let mut d: Vec<f64> = diag.iter().map(|&a| a - sigma).collect();
    let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { off[i] } else { 0.0 }).collect();
    let mut u2 = vec![0.0f64; n];
    let mut r = rhs.to_vec();
    for i in 0..n.saturating_sub(1) {
        let mut low = off[i];
        if low.abs() > d[i].abs() {
            std::mem::swap(&mut d[i], &mut low);
            std::mem::swap(&mut u1[i], &mut d[i + 1]);
            std::mem::swap(&mut u2[i], &mut u1[i + 1]);
            r.swap(i, i + 1);
        }
        if d[i] == 0.0 {
            d[i] = tiny;
        }
        let m = low / d[i];
        d[i + 1] -= m * u1[i];
        u1[i + 1] -= m * u2[i];
        r[i + 1] -= m * r[i];
    }
    let mut x = vec![0.0f64; n];
    for i in (0..n).rev() {
        let mut v = r[i];
        if i + 1 < n {
            v -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            v -= u2[i] * x[i + 2];
        }
        let piv = if d[i] == 0.0 { tiny } else { d[i] };
        x[i] = v / piv;
    }
    x
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm > 0.0 {
        for a in v.iter_mut() {
            *a /= norm;
        }
    }
    norm
}

fn orthogonalize_against(v: &mut [f64], basis: &[f64]) {
    let dot: f64 = v.iter().zip(basis).map(|(a, b)| a * b).sum();
    for (a, b) in v.iter_mut().zip(basis) {
        *a -= dot * b;
    }
}

fn inverse_iteration(
    diag: &[f64],
    off: &[f64],
    eigenvalue: f64,
    scale: f64,
    previous: Option<&[f64]>,
) -> Vec<f64> {
    let n = diag.len();
    // a deterministic, structureless start vector
    let mut v: Vec<f64> = (0..n)
        .map(|i| {
            let z = (i as u64).wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(0x1234567);
            let z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
            (z >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect();
    if let Some(prev) = previous {
        orthogonalize_against(&mut v, prev);
    }
    normalize(&mut v);
    let sigma = eigenvalue + 8.0 * f64::EPSILON * scale;
    for _ in 0..6 {
        let mut x = solve_shifted(diag, off, sigma, &v);
        if let Some(prev) = previous {
            orthogonalize_against(&mut x, prev);
        }
        if normalize(&mut x) == 0.0 {
            break;
        }
        // residual || (T - lambda) x ||
        let mut res = 0.0f64;
        for i in 0..n {
            let mut t = (diag[i] - eigenvalue) * x[i];
            if i > 0 {
                t += off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                t += off[i] * x[i + 1];
            }
            res += t * t;
        }
        v = x;
        if res.sqrt() <= 1e-13 * scale {
            break;
        }
    }
    v
}

/// The two lowest eigenpairs `(e0, e1, v0, v1)` of the symmetric tridiagonal
/// matrix with the given diagonal and off-diagonal. Requires dimension >= 2.
pub fn lowest_two(diag: &[f64], off: &[f64]) -> (f64, f64, Vec<f64>, Vec<f64>) {
    let n = diag.len();
    assert!(n >= 2, "need at least a 2x2 matrix for two eigenpairs");
    assert_eq!(off.len(), n - 1);
    let (lo, hi) = gershgorin_bounds(diag, off);
    let scale = lo.abs().max(hi.abs()).max(1e-300);
    let e0 = eigenvalue_by_index(diag, off, 0);
    let e1 = eigenvalue_by_index(diag, off, 1);
    let v0 = inverse_iteration(diag, off, e0, scale, None);
    let near_degenerate = (e1 - e0).abs() <= 1e-8 * scale;
    let v1 = inverse_iteration(diag, off, e1, scale, near_degenerate.then_some(v0.as_slice()));
    (e0, e1, v0, v1)
}
