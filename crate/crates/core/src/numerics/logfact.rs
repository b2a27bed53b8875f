//! Logarithms of factorials and binomial coefficients.
//!
//! Values up to a fixed cutoff come from a cumulative table built with Kahan
//! summation; larger arguments use a Stirling series whose truncation error is
//! far below f64 resolution in that range.

use std::sync::OnceLock;

const TABLE_LEN: usize = 4097;

fn table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; TABLE_LEN];
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for n in 1..TABLE_LEN {
            let term = (n as f64).ln() - comp;
            let next = sum + term;
            comp = (next - sum) - term;
            sum = next;
            t[n] = sum;
        }
        t
    })
}

/// ln(n!) for any non-negative integer.
pub fn ln_factorial(n: u64) -> f64 {
    if (n as usize) < TABLE_LEN {
        return table()[n as usize];
    }
    // Stirling series; the 1/n^7 term leaves an error below 1e-30 for n > 4096.
    let x = n as f64;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    (x + 0.5) * x.ln() - x
        + 0.5 * (2.0 * std::f64::consts::PI).ln()
        + inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)))
}

/// ln C(n, k); negative infinity outside the support 0 <= k <= n.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// Exact n! in 128-bit arithmetic; `None` once it overflows (n >= 35).
pub fn factorial_u128(n: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 2..=n as u128 {
        acc = acc.checked_mul(i)?;
    }
    Some(acc)
}
