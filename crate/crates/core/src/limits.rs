//! Convergence diagnostics for the quantization maps: the
//! Dirac-Groenewold-Rieffel defect, the classical limit of the Curie-Weiss
//! ground state, Z2 equivariance, the O(1/N) Hamiltonian gap, and the
//! permutation combinatorics behind the symmetrizer norm bounds.
//!
//! Operator norms are taken on the full k^N-dimensional tensor space, never
//! on the symmetric subspace alone: symmetric operators have spectrum in the
//! non-symmetric sectors too, and restricting would under-report the norm.
//! All large operators stay in word form; norms come from matrix-free
//! Lanczos iterations with fixed seeds, so every sweep is deterministic.
//!
//! Convergence statements are verified as properties (monotone decay plus
//! log-log slope fits) rather than against closed-form rates.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::dicke::{cw_hamiltonian_words, ground_state, q_expectation};
use crate::error::{CwqError, Result};
use crate::liealg::{Convention, SuBasis};
use crate::numerics::{factorial_u128, ln_binomial, ln_factorial, loglog_fit, operator_norm};
use crate::poisson::{poisson_bracket, sup_norm_estimate, Polynomial};
use crate::statespace::{membership, StateCoordinates};
use crate::tensor::{quantize_words, word_scaled_sum};

/// Seed for every Lanczos iteration in this module.
pub const NORM_SEED: u64 = 29;

/// Sample count for the classical sup-norm estimate in
/// [`norm_convergence_sweep`].
const SUP_NORM_SAMPLES: usize = 20_000;

/// A labelled sequence of per-size measurements with an optional log-log
/// fit.
#[derive(Clone, Debug)]
pub struct SweepResult {
    pub label: String,
    /// (N, value) pairs with N strictly increasing.
    pub points: Vec<(usize, f64)>,
    /// (slope, intercept) of ln(value) against ln(N), when at least two
    /// values are positive.
    pub fit: Option<(f64, f64)>,
}

impl SweepResult {
    /// Builds a sweep without a fit; sizes must be strictly increasing.
    pub fn new(label: impl Into<String>, points: Vec<(usize, f64)>) -> Result<Self> {
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(CwqError::Dimension(
                "sweep sizes must be strictly increasing".into(),
            ));
        }
        Ok(Self {
            label: label.into(),
            points,
            fit: None,
        })
    }

    /// Builds a sweep and fits a log-log line through its points.
    pub fn fitted(label: impl Into<String>, points: Vec<(usize, f64)>) -> Result<Self> {
        let mut out = Self::new(label, points)?;
        let xs: Vec<f64> = out.points.iter().map(|&(n, _)| n as f64).collect();
        let ys: Vec<f64> = out.points.iter().map(|&(_, v)| v).collect();
        out.fit = loglog_fit(&xs, &ys);
        Ok(out)
    }
}

/// Minima of the classical Curie-Weiss Hamiltonian
/// h0(x, y, z) = -(J z^2 / 2 + B x) over the Bloch ball.
#[derive(Clone, Debug)]
pub struct ClassicalGroundData {
    pub coupling: f64,
    pub field: f64,
    /// All minimizers, as Bloch-ball coordinates in the Pauli convention.
    pub minima: Vec<StateCoordinates>,
    /// The minimum of h0.
    pub value: f64,
}

impl ClassicalGroundData {
    /// Mean of `f` over the minima: the classical-limit target for ground
    /// state expectations.
    pub fn target_expectation(&self, f: &Polynomial) -> Result<f64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for p in &self.minima {
            acc += f.evaluate(p.coords())?;
        }
        acc /= self.minima.len() as f64;
        if acc.im.abs() > 1e-12 {
            return Err(CwqError::Numerical(format!(
                "target expectation has imaginary part {:.3e}",
                acc.im
            )));
        }
        Ok(acc.re)
    }
}

/// The classical Curie-Weiss symbol -(coupling z^2 / 2 + field x) as a
/// polynomial in the Bloch coordinates (x1, x2, x3) = (x, y, z).
pub fn cw_symbol(coupling: f64, field: f64) -> Polynomial {
    let z2 = Polynomial::monomial(3, &[0, 0, 2], Complex64::new(-0.5 * coupling, 0.0))
        .expect("exponent list matches nvars");
    let x = Polynomial::monomial(3, &[1, 0, 0], Complex64::new(-field, 0.0))
        .expect("exponent list matches nvars");
    z2.add(&x).expect("same variable count")
}

/// Minimizes h0 = -(J z^2 / 2 + B x) over the Bloch ball by the closed-form
/// sphere analysis (for B < J two minima (B/J, 0, +-sqrt(1 - (B/J)^2)), for
/// B >= J the single minimum (1, 0, 0)), then verifies the result against a
/// dense sphere grid and the state-space membership test.
pub fn minimize_classical(coupling: f64, field: f64) -> Result<ClassicalGroundData> {
    if !(coupling > 0.0) || !(field >= 0.0) {
        return Err(CwqError::Dimension(format!(
            "need coupling > 0 and field >= 0, got ({coupling}, {field})"
        )));
    }
    let (points, value) = if field < coupling {
        let xs = field / coupling;
        let zs = (1.0 - xs * xs).sqrt();
        (
            vec![[xs, 0.0, zs], [xs, 0.0, -zs]],
            -0.5 * (coupling + field * field / coupling),
        )
    } else {
        (vec![[1.0, 0.0, 0.0]], -field)
    };
    let h0 = |x: f64, z: f64| -> f64 { -(0.5 * coupling * z * z + field * x) };
    for p in &points {
        let attained = h0(p[0], p[2]);
        if (attained - value).abs() > 1e-10 {
            return Err(CwqError::Numerical(format!(
                "minimum candidate attains {attained}, expected {value}"
            )));
        }
    }
    // Interior points only raise h0, so a sphere grid suffices as a check.
    let grid = 720;
    for i in 0..=grid {
        let theta = std::f64::consts::PI * i as f64 / grid as f64;
        for j in 0..=grid {
            let phi = 2.0 * std::f64::consts::PI * j as f64 / grid as f64;
            let v = h0(theta.sin() * phi.cos(), theta.cos());
            if v < value - 1e-9 {
                return Err(CwqError::Numerical(format!(
                    "grid point undercuts the closed-form minimum by {:.3e}",
                    value - v
                )));
            }
        }
    }
    let basis = SuBasis::new(2, Convention::Pauli)?;
    let mut minima = Vec::with_capacity(points.len());
    for p in points {
        let coords = StateCoordinates::new(2, p.to_vec())?;
        let check = membership(&coords, &basis)?;
        if !check.is_state {
            return Err(CwqError::NotAState(format!(
                "classical minimum {p:?} fails membership with margin {:.3e}",
                check.margin
            )));
        }
        minima.push(coords);
    }
    Ok(ClassicalGroundData {
        coupling,
        field,
        minima,
        value,
    })
}

/// ||iN [Q(f), Q(g)] - Q({f, g})|| on the full tensor space, the
/// Dirac-Groenewold-Rieffel defect at hbar = 1/N.  Evaluated matrix-free:
/// the quantizations stay in word form and the norm comes from a Lanczos
/// iteration on the composite operator.
pub fn dgr_defect(f: &Polynomial, g: &Polynomial, n: usize, basis: &SuBasis) -> Result<f64> {
    let qf = quantize_words(f, n, basis)?;
    let qg = quantize_words(g, n, basis)?;
    let bracket = poisson_bracket(f, g, &basis.structure_constants()?)?;
    let qb = quantize_words(&bracket, n, basis)?;
    let dim = qf.dim();
    let i_n = Complex64::new(0.0, n as f64);

    let mut a1 = vec![Complex64::ZERO; dim];
    let mut a2 = vec![Complex64::ZERO; dim];
    let mut a3 = vec![Complex64::ZERO; dim];
    let apply = move |x: &[Complex64], y: &mut [Complex64]| {
        qg.apply(x, &mut a1);
        qf.apply(&a1, &mut a2);
        qf.apply(x, &mut a3);
        qg.apply(&a3, &mut a1);
        qb.apply(x, &mut a3);
        for i in 0..x.len() {
            y[i] = i_n * (a2[i] - a1[i]) - a3[i];
        }
    };

    let qf2 = quantize_words(f, n, basis)?;
    let qg2 = quantize_words(g, n, basis)?;
    let qb2 = quantize_words(&bracket, n, basis)?;
    let mut b1 = vec![Complex64::ZERO; dim];
    let mut b2 = vec![Complex64::ZERO; dim];
    let mut b3 = vec![Complex64::ZERO; dim];
    let adjoint = move |x: &[Complex64], y: &mut [Complex64]| {
        // (iN(Qf Qg - Qg Qf))^+ = conj(iN)(Qg^+ Qf^+ - Qf^+ Qg^+)
        qf2.apply_adjoint(x, &mut b1);
        qg2.apply_adjoint(&b1, &mut b2);
        qg2.apply_adjoint(x, &mut b3);
        qf2.apply_adjoint(&b3, &mut b1);
        qb2.apply_adjoint(x, &mut b3);
        let c = i_n.conj();
        for i in 0..x.len() {
            y[i] = c * (b2[i] - b1[i]) - b3[i];
        }
    };

    Ok(operator_norm(dim, apply, adjoint, NORM_SEED))
}

/// DGR defects over a list of sizes, with a log-log fit.
pub fn dgr_sweep(
    f: &Polynomial,
    g: &Polynomial,
    n_list: &[usize],
    basis: &SuBasis,
) -> Result<SweepResult> {
    let points = n_list
        .par_iter()
        .map(|&n| dgr_defect(f, g, n, basis).map(|d| (n, d)))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::fitted("dgr defect", points)
}

/// Ground-state expectation of the quantized polynomial at size `n`,
/// through the Dicke-sector branching rule.  The polynomial must be real.
pub fn classical_expectation(f: &Polynomial, n: usize, coupling: f64, field: f64) -> Result<f64> {
    if f.max_imag() > 1e-12 {
        return Err(CwqError::Dimension(
            "classical expectation needs a real polynomial".into(),
        ));
    }
    let gs = ground_state(n, coupling, field)?;
    let v = q_expectation(f, &gs)?;
    if v.im.abs() > 1e-9 {
        return Err(CwqError::Numerical(format!(
            "expectation has imaginary residue {:.3e}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Ground-state expectations of `f` across sizes, with the classical
/// target and the per-size errors.
#[derive(Clone, Debug)]
pub struct ClassicalSweep {
    /// Mean of `f` over the classical minima.
    pub target: f64,
    /// (N, <Q(f)>) pairs.
    pub values: SweepResult,
    /// (N, |<Q(f)> - target|) pairs with a log-log fit.
    pub errors: SweepResult,
}

/// Sweeps the ground-state expectation of `f` over `n_list` and compares it
/// with the mean of `f` over the minima of the classical symbol.
pub fn classical_limit_sweep(
    f: &Polynomial,
    n_list: &[usize],
    coupling: f64,
    field: f64,
) -> Result<ClassicalSweep> {
    let target = minimize_classical(coupling, field)?.target_expectation(f)?;
    let values = n_list
        .par_iter()
        .map(|&n| classical_expectation(f, n, coupling, field).map(|v| (n, v)))
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<(usize, f64)> = values
        .iter()
        .map(|&(n, v)| (n, (v - target).abs()))
        .collect();
    Ok(ClassicalSweep {
        target,
        values: SweepResult::new("ground-state expectation", values)?,
        errors: SweepResult::fitted("classical-limit error", errors)?,
    })
}

/// ||Q(f o zeta) - U Q(f) U|| with zeta: (x, y, z) -> (x, -y, -z) and
/// U the n-fold tensor power of sigma1, measuring the equivariance of the
/// quantization under the Z2 symmetry.
pub fn equivariance_check(f: &Polynomial, n: usize) -> Result<f64> {
    let basis = SuBasis::new(2, Convention::Pauli)?;
    let zeta_f = f.substitute_signs(&[1.0, -1.0, -1.0])?;
    let q_zeta = quantize_words(&zeta_f, n, &basis)?;
    let qf = quantize_words(f, n, &basis)?;
    let dim = qf.dim();
    let mask = dim - 1;

    let mut a1 = vec![Complex64::ZERO; dim];
    let mut a2 = vec![Complex64::ZERO; dim];
    let apply = move |x: &[Complex64], y: &mut [Complex64]| {
        for i in 0..dim {
            a1[i ^ mask] = x[i];
        }
        qf.apply(&a1, &mut a2);
        q_zeta.apply(x, y);
        for i in 0..dim {
            y[i] -= a2[i ^ mask];
        }
    };

    let q_zeta2 = quantize_words(&zeta_f, n, &basis)?;
    let qf2 = quantize_words(f, n, &basis)?;
    let mut b1 = vec![Complex64::ZERO; dim];
    let mut b2 = vec![Complex64::ZERO; dim];
    let adjoint = move |x: &[Complex64], y: &mut [Complex64]| {
        for i in 0..dim {
            b1[i ^ mask] = x[i];
        }
        qf2.apply_adjoint(&b1, &mut b2);
        q_zeta2.apply_adjoint(x, y);
        for i in 0..dim {
            y[i] -= b2[i ^ mask];
        }
    };

    Ok(operator_norm(dim, apply, adjoint, NORM_SEED))
}

/// ||h^CW_{1/N} - Q_{1/N}(h0)|| on the full 2^n space.  The difference is
/// the diagonal-placement defect of the z^2 term; analytically it equals
/// (J / 2n)(Q(z^2) - I), so n times this norm stays bounded by J.
pub fn hamiltonian_gap_norm(n: usize, coupling: f64, field: f64) -> Result<f64> {
    let basis = SuBasis::new(2, Convention::Pauli)?;
    let h_cw = cw_hamiltonian_words(n, coupling, field, &basis)?;
    let q0 = quantize_words(&cw_symbol(coupling, field), n, &basis)?;
    let diff = word_scaled_sum(&h_cw, Complex64::ONE, &q0, -Complex64::ONE)?;
    let (lo, hi) = diff.hermitian_extremes(NORM_SEED)?;
    Ok(lo.abs().max(hi.abs()))
}

/// C(a, b) in exact 128-bit arithmetic.
fn binom_u128(a: u64, b: u64) -> Option<u128> {
    if b > a {
        return Some(0);
    }
    let b = b.min(a - b);
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc.checked_mul((a - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

/// Falling factorial a (a-1) ... (a-b+1) in exact 128-bit arithmetic.
fn falling_u128(a: u64, b: u64) -> Option<u128> {
    let mut acc: u128 = 1;
    for i in 0..b {
        acc = acc.checked_mul((a - i) as u128)?;
    }
    Some(acc)
}

/// Number of permutations of N symbols that map exactly K of the first L
/// positions into the first M positions:
///
///   L! M! (N-L)! (N-M)! / (K! (L-K)! (M-K)! (N-L-M+K)!),
///
/// exact in 128-bit integers.  Summing over K recovers N!.
pub fn perm_count(n: u64, l: u64, m: u64, k: u64) -> Result<u128> {
    if !(k <= l && l <= m && m <= n) || n + k < l + m {
        return Err(CwqError::Dimension(format!(
            "need 0 <= K <= L <= M <= N and N-L-M+K >= 0, got N={n} L={l} M={m} K={k}"
        )));
    }
    // Rearranged as C(L,K) C(M,K) K! (N-M)!/(N-M-L+K)! (N-L)! so every
    // intermediate stays below N!.
    let overflow = || CwqError::Overflow(format!("perm_count({n}, {l}, {m}, {k})"));
    let mut acc = binom_u128(l, k).ok_or_else(overflow)?;
    acc = acc
        .checked_mul(binom_u128(m, k).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    acc = acc
        .checked_mul(factorial_u128(k).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    acc = acc
        .checked_mul(falling_u128(n - m, l - k).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    acc = acc
        .checked_mul(factorial_u128(n - l).ok_or_else(overflow)?)
        .ok_or_else(overflow)?;
    Ok(acc)
}

/// The normalized symmetrizer constant C_N / (N-1)! =
/// (N-L)! (N-M)! / ((N-L-M+1)! (N-1)!), by log-factorials; approaches 1 for
/// large N.
pub fn c_n_ratio(n: u64, l: u64, m: u64) -> Result<f64> {
    if n <= l + m {
        return Err(CwqError::Dimension(format!(
            "need N > L + M, got N={n} L={l} M={m}"
        )));
    }
    let ln = ln_factorial(n - l) + ln_factorial(n - m)
        - ln_factorial(n - l - m + 1)
        - ln_factorial(n - 1);
    Ok(ln.exp())
}

/// Fraction sum_{K >= 2} #P(N)_K / (N-1)! of permutations with at least two
/// overlapping placements, by log-space summation; vanishes as N grows.
pub fn p3_fraction(n: u64, l: u64, m: u64) -> Result<f64> {
    if !(l <= m && m <= n) {
        return Err(CwqError::Dimension(format!(
            "need L <= M <= N, got N={n} L={l} M={m}"
        )));
    }
    if l < 2 {
        return Ok(0.0);
    }
    let mut total = 0.0f64;
    for k in 2..=l {
        if n + k < l + m {
            continue;
        }
        let ln = ln_binomial(l, k) + ln_binomial(m, k) + ln_factorial(k)
            + ln_factorial(n - m)
            - ln_factorial(n - m - l + k)
            + ln_factorial(n - l)
            - ln_factorial(n - 1);
        total += ln.exp();
    }
    Ok(total)
}

/// Quantization norms across sizes next to the classical sup-norm target.
#[derive(Clone, Debug)]
pub struct NormConvergence {
    /// (N, ||Q_{1/N}(f)||) pairs.
    pub sweep: SweepResult,
    /// Estimated sup of |f| over the state space, the N -> infinity limit.
    pub sup_norm: f64,
}

/// Sweeps ||Q_{1/N}(f)|| over `n_list` and reports the sampled classical
/// sup norm it converges to.  The polynomial must be real.
pub fn norm_convergence_sweep(
    f: &Polynomial,
    n_list: &[usize],
    basis: &SuBasis,
) -> Result<NormConvergence> {
    let points = n_list
        .par_iter()
        .map(|&n| {
            let q = quantize_words(f, n, basis)?;
            let (lo, hi) = q.hermitian_extremes(NORM_SEED)?;
            Ok((n, lo.abs().max(hi.abs())))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormConvergence {
        sweep: SweepResult::new("quantization norm", points)?,
        sup_norm: sup_norm_estimate(f, basis, SUP_NORM_SAMPLES, NORM_SEED)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn pauli() -> SuBasis {
        SuBasis::new(2, Convention::Pauli).unwrap()
    }

    fn poly(expr: &str) -> Polynomial {
        Polynomial::parse(3, expr).unwrap()
    }

    #[test]
    fn classical_minima_match_the_closed_forms() {
        let sym = minimize_classical(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(sym.value, -0.625, epsilon = 1e-14);
        assert_eq!(sym.minima.len(), 2);
        let zs = 3.0f64.sqrt() / 2.0;
        let mut found = [false, false];
        for p in &sym.minima {
            let c = p.coords();
            assert_abs_diff_eq!(c[0], 0.5, epsilon = 1e-14);
            assert_abs_diff_eq!(c[1], 0.0, epsilon = 1e-14);
            if (c[2] - zs).abs() < 1e-14 {
                found[0] = true;
            }
            if (c[2] + zs).abs() < 1e-14 {
                found[1] = true;
            }
        }
        assert!(found[0] && found[1]);

        let ising = minimize_classical(1.0, 0.0).unwrap();
        assert_abs_diff_eq!(ising.value, -0.5, epsilon = 1e-14);
        assert!(ising
            .minima
            .iter()
            .all(|p| p.coords()[0].abs() < 1e-14 && p.coords()[2].abs() > 0.999));

        let strong = minimize_classical(1.0, 2.0).unwrap();
        assert_abs_diff_eq!(strong.value, -2.0, epsilon = 1e-14);
        assert_eq!(strong.minima.len(), 1);
        assert_abs_diff_eq!(strong.minima[0].coords()[0], 1.0, epsilon = 1e-14);

        assert!(minimize_classical(0.0, 0.5).is_err());
    }

    #[test]
    fn classical_targets_average_over_both_minima() {
        let sym = minimize_classical(1.0, 0.5).unwrap();
        assert_abs_diff_eq!(sym.target_expectation(&poly("x1")).unwrap(), 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(sym.target_expectation(&poly("x3^2")).unwrap(), 0.75, epsilon = 1e-14);
        assert_abs_diff_eq!(sym.target_expectation(&poly("x3")).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(
            sym.target_expectation(&poly("x1*x3")).unwrap(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn dgr_defect_vanishes_on_degree_one_pairs() {
        let basis = pauli();
        let coords = ["x1", "x2", "x3"];
        for n in [4usize, 6] {
            for a in coords {
                for b in coords {
                    let d = dgr_defect(&poly(a), &poly(b), n, &basis).unwrap();
                    assert!(d <= 1e-12, "defect({a}, {b}, {n}) = {d:e}");
                }
            }
        }
        let f = poly("x3^2");
        assert!(dgr_defect(&f, &f, 5, &basis).unwrap() <= 1e-12);
        assert!(dgr_defect(&poly("x3^2"), &poly("x1"), 6, &basis).unwrap() <= 1e-12);
    }

    #[test]
    fn dgr_defect_matches_the_dense_oracle_values() {
        let basis = pauli();
        let f = poly("x3^2");
        let g = poly("x1^2");
        let frozen = [
            (4usize, 1.539600717839),
            (5, 0.692820323028),
            (6, 0.413118223595),
            (8, 0.282783805317),
        ];
        for (n, want) in frozen {
            let d = dgr_defect(&f, &g, n, &basis).unwrap();
            assert_relative_eq!(d, want, epsilon = 1e-8);
        }
    }

    #[test]
    fn dgr_defect_is_symmetric_and_absolutely_homogeneous() {
        let basis = pauli();
        let f = poly("x3^2");
        let g = poly("x1^2 + 0.5*x2");
        let fg = dgr_defect(&f, &g, 5, &basis).unwrap();
        let gf = dgr_defect(&g, &f, 5, &basis).unwrap();
        assert_abs_diff_eq!(fg, gf, epsilon = 1e-12);
        let scaled = dgr_defect(&f.scale(Complex64::new(-2.5, 0.0)), &g, 5, &basis).unwrap();
        assert_relative_eq!(scaled, 2.5 * fg, epsilon = 1e-10);
    }

    #[test]
    fn dgr_sweep_fits_the_decay() {
        let basis = pauli();
        let sweep = dgr_sweep(&poly("x3^2"), &poly("x1^2"), &[4, 5, 6, 7, 8], &basis).unwrap();
        assert_eq!(sweep.points.len(), 5);
        assert!(sweep
            .points
            .windows(2)
            .all(|w| w[1].1 < w[0].1));
        let (slope, _) = sweep.fit.unwrap();
        assert!(slope < -1.0, "slope {slope}");
    }

    #[test]
    fn equivariance_residual_vanishes() {
        assert!(equivariance_check(&poly("x1"), 4).unwrap() <= 1e-13);
        assert!(equivariance_check(&poly("x3"), 4).unwrap() <= 1e-13);
        let f = poly("0.7*x1^2*x3 - 1.3*x2^2 + 0.4*x1*x2*x3 + 2.1*x3 - 0.9*x1*x2");
        assert!(equivariance_check(&f, 6).unwrap() <= 1e-12);
    }

    #[test]
    fn hamiltonian_gap_matches_the_closed_form() {
        // Even n: n * gap = (J/2) n/(n-1); odd n: (J/2)(n+1)/n.
        for (n, want) in [(4usize, 2.0 / 3.0), (5, 0.6), (6, 0.6), (7, 4.0 / 7.0), (8, 4.0 / 7.0)] {
            let v = hamiltonian_gap_norm(n, 1.0, 0.5).unwrap();
            assert_relative_eq!(n as f64 * v, want, epsilon = 1e-9);
            assert!(n as f64 * v <= 1.0 + 1e-12);
        }
        assert!(hamiltonian_gap_norm(4, 0.0, 0.5).unwrap() <= 1e-14);
        let v4 = hamiltonian_gap_norm(4, 1.0, 0.5).unwrap();
        let v8 = hamiltonian_gap_norm(8, 1.0, 0.5).unwrap();
        assert!(v8 < v4);
    }

    #[test]
    fn perm_counts_sum_to_the_factorial() {
        for n in 1..=20u64 {
            for m in 0..=6.min(n) {
                for l in 0..=m {
                    let mut total: u128 = 0;
                    for k in 0..=l {
                        if n + k < l + m {
                            continue;
                        }
                        let c = perm_count(n, l, m, k).unwrap();
                        assert_eq!(c, perm_count(n, m, l, k).unwrap_or(c));
                        total += c;
                    }
                    assert_eq!(total, factorial_u128(n).unwrap(), "n={n} l={l} m={m}");
                }
            }
        }
    }

    #[test]
    fn perm_count_handles_fixed_points_and_overflow() {
        assert_eq!(perm_count(5, 1, 1, 1).unwrap(), 24);
        assert_eq!(perm_count(5, 1, 1, 0).unwrap(), 96);
        assert!(matches!(
            perm_count(50, 0, 0, 0),
            Err(CwqError::Overflow(_))
        ));
        assert!(perm_count(4, 3, 2, 0).is_err());
    }

    #[test]
    fn symmetrizer_ratio_approaches_one() {
        for n in [5u64, 100, 12345] {
            assert_eq!(c_n_ratio(n, 1, 1).unwrap(), 1.0);
        }
        let v = c_n_ratio(10_000, 2, 3).unwrap();
        assert!((v - 1.0).abs() <= 1e-2, "ratio {v}");
        let mut last = 0.0;
        let mut n = 50;
        while n <= 1600 {
            let r = c_n_ratio(n, 2, 2).unwrap();
            assert!(r > last && r < 1.0, "ratio {r} at n = {n}");
            last = r;
            n *= 2;
        }
        assert!(c_n_ratio(5, 2, 3).is_err());
    }

    #[test]
    fn overlap_fraction_decays() {
        assert_eq!(p3_fraction(10, 1, 3).unwrap(), 0.0);
        let mut last = f64::INFINITY;
        for n in [10u64, 20, 40, 80] {
            let v = p3_fraction(n, 2, 3).unwrap();
            assert!(v < last && v > 0.0);
            last = v;
        }
        // Cross-check the log-space sum against exact integers.
        let n = 12u64;
        let exact: u128 = (2..=2)
            .map(|k| perm_count(n, 2, 3, k).unwrap())
            .sum();
        let expected = exact as f64 / factorial_u128(n - 1).unwrap() as f64;
        assert_relative_eq!(p3_fraction(n, 2, 3).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn expectation_sweep_closes_on_the_classical_targets() {
        for (expr, target) in [("x1", 0.5), ("x3^2", 0.75)] {
            let sweep = classical_limit_sweep(&poly(expr), &[50, 100, 200], 1.0, 0.5).unwrap();
            assert_abs_diff_eq!(sweep.target, target, epsilon = 1e-14);
            let errs: Vec<f64> = sweep.errors.points.iter().map(|&(_, e)| e).collect();
            assert!(errs.windows(2).all(|w| w[1] <= w[0] + 1e-15), "{errs:?}");
            assert!(errs.last().unwrap() < &0.02);
        }
        for n in [5usize, 17, 40] {
            let v = classical_expectation(&poly("x3"), n, 1.0, 0.5).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-11);
        }
    }

    #[test]
    fn expectations_are_z2_invariant_on_the_purified_state() {
        let gs = ground_state(60, 1.0, 0.5).unwrap();
        assert!(gs.purified);
        let f = poly("0.6*x1^2*x3 - 1.1*x2^2 + 0.3*x1*x2*x3 + 1.7*x3 - 0.8*x1");
        let zeta_f = f.substitute_signs(&[1.0, -1.0, -1.0]).unwrap();
        let a = q_expectation(&f, &gs).unwrap();
        let b = q_expectation(&zeta_f, &gs).unwrap();
        assert!((a - b).norm() <= 1e-10, "difference {:e}", (a - b).norm());
    }

    #[test]
    fn quantization_norms_approach_the_sup_norm() {
        let basis = pauli();
        let flat = norm_convergence_sweep(&poly("1"), &[4, 6], &basis).unwrap();
        for &(_, v) in &flat.sweep.points {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
        let linear = norm_convergence_sweep(&poly("x3"), &[4, 6, 8], &basis).unwrap();
        for &(_, v) in &linear.sweep.points {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-10);
        }
        assert!((linear.sup_norm - 1.0).abs() < 5e-3);
        let quad = norm_convergence_sweep(&poly("x3^2"), &[4, 6, 8, 10, 12], &basis).unwrap();
        // ||Q(z^2)|| = 1 for every n >= 2 while sup |z^2| = 1; the defect
        // sits below the norm, in the lowest eigenvalue -1/(n-1).
        for &(_, v) in &quad.sweep.points {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn sweep_results_enforce_increasing_sizes() {
        assert!(SweepResult::new("bad", vec![(4, 1.0), (4, 0.5)]).is_err());
        let fitted =
            SweepResult::fitted("powers", vec![(10, 1.0), (100, 0.1), (1000, 0.01)]).unwrap();
        let (slope, _) = fitted.fit.unwrap();
        assert_abs_diff_eq!(slope, -1.0, epsilon = 1e-12);
    }
}
