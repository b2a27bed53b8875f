//! End-to-end verification suite: eleven numbered criteria that exercise
//! the full pipeline against frozen reference values, closed-form
//! identities, and convergence properties.
//!
//! Each criterion produces a [`CriterionReport`] with one line per check;
//! a criterion passes when every gating check passes.  The suite is the
//! backend of the `verify-all` command and of the acceptance integration
//! tests, and it never weakens a tolerance to force a pass: a failing
//! criterion is reported with the measured values.
//!
//! The `quick` flag trims sweep ranges for a fast smoke run; tolerances are
//! never relaxed.  All randomness is seeded, so repeated runs are
//! bit-identical.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::coherent::{
    default_quadrature, exact_constant, exact_constant_reference, fwhm_scan, husimi_peaks,
    husimi_profile, resolution_identity_check, table1_integral, table2_integral, table3_integrals,
};
use crate::dicke::{
    cw_hamiltonian_words, dicke_vector_dense, ground_state, q_expectation, CwHamiltonian,
    GroundStateResult,
};
use crate::error::{CwqError, Result};
use crate::liealg::{Convention, SuBasis};
use crate::limits::{
    c_n_ratio, classical_limit_sweep, dgr_defect, hamiltonian_gap_norm, p3_fraction, perm_count,
    SweepResult,
};
use crate::numerics::factorial_u128;
use crate::poisson::Polynomial;
use crate::tensor::quantize_words;

/// Number of criteria in the suite.
pub const CRITERION_COUNT: usize = 11;

/// Coupling constant used by every criterion.
const COUPLING: f64 = 1.0;

/// Transverse field used by every criterion.
const FIELD: f64 = 0.5;

/// Seed for the random polynomials of criterion 4.
pub const POLY_SEED: u64 = 4871;

/// One labelled check inside a criterion.
#[derive(Clone, Debug)]
pub struct CheckLine {
    /// Description of the check together with the measured values.
    pub label: String,
    /// Whether the check passed; informational lines are always true.
    pub passed: bool,
    /// False for informational lines that do not gate the criterion.
    pub gating: bool,
}

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug)]
pub struct CriterionReport {
    /// Criterion number, 1 through [`CRITERION_COUNT`].
    pub index: usize,
    /// Short description of what the criterion verifies.
    pub title: &'static str,
    /// True when every gating check passed.
    pub passed: bool,
    /// Wall time of the criterion run.
    pub seconds: f64,
    /// Individual check lines in execution order.
    pub checks: Vec<CheckLine>,
}

impl CriterionReport {
    /// One-line PASS/FAIL summary.
    pub fn summary_line(&self) -> String {
        format!(
            "{} criterion {:>2}: {} ({:.1} s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.index,
            self.title,
            self.seconds
        )
    }

    /// Summary line followed by the indented check lines.
    pub fn render(&self) -> String {
        let mut out = self.summary_line();
        for check in &self.checks {
            let tag = if !check.gating {
                "note"
            } else if check.passed {
                "ok  "
            } else {
                "FAIL"
            };
            out.push_str(&format!("\n  {tag}  {}", check.label));
        }
        out
    }
}

/// Accumulator for the checks of one criterion.
struct Criterion {
    index: usize,
    title: &'static str,
    start: Instant,
    checks: Vec<CheckLine>,
}

impl Criterion {
    fn new(index: usize, title: &'static str) -> Self {
        Self {
            index,
            title,
            start: Instant::now(),
            checks: Vec::new(),
        }
    }

    fn check(&mut self, passed: bool, label: impl Into<String>) {
        self.checks.push(CheckLine {
            label: label.into(),
            passed,
            gating: true,
        });
    }

    fn note(&mut self, label: impl Into<String>) {
        self.checks.push(CheckLine {
            label: label.into(),
            passed: true,
            gating: false,
        });
    }

    fn check_time(&mut self, bound_seconds: f64) {
        let elapsed = self.start.elapsed().as_secs_f64();
        self.check(
            elapsed < bound_seconds,
            format!("runtime {elapsed:.1} s below the {bound_seconds:.0} s bound"),
        );
    }

    fn finish(mut self, outcome: Result<()>) -> CriterionReport {
        if let Err(e) = outcome {
            self.checks.push(CheckLine {
                label: format!("criterion aborted: {e}"),
                passed: false,
                gating: true,
            });
        }
        let passed = self.checks.iter().all(|c| !c.gating || c.passed);
        CriterionReport {
            index: self.index,
            title: self.title,
            passed,
            seconds: self.start.elapsed().as_secs_f64(),
            checks: self.checks,
        }
    }
}

/// Runs one criterion by number (1 through [`CRITERION_COUNT`]).
///
/// `quick` shrinks sweep ranges for a smoke run without touching any
/// tolerance.
pub fn criterion(index: usize, quick: bool) -> CriterionReport {
    type Body = fn(&mut Criterion, bool) -> Result<()>;
    let (title, body): (&'static str, Body) = match index {
        1 => ("table 1 grid residues match the references", criterion_1),
        2 => ("table 2 deviation measures match and decrease", criterion_2),
        3 => ("table 3 moment ratios match the references", criterion_3),
        4 => ("branching rule and projected Hamiltonian match brute force", criterion_4),
        5 => ("commutator defects on degree-one and mixed pairs", criterion_5),
        6 => ("permutation class counts and symmetrizer asymptotics", criterion_6),
        7 => ("resolution of identity and the exact overlap constant", criterion_7),
        8 => ("ground-state expectations approach the classical minima", criterion_8),
        9 => ("ground-state positivity, symmetry, and Husimi peaks", criterion_9),
        10 => ("scaled gap between the projected and quantized Hamiltonians", criterion_10),
        11 => ("Husimi peak width scaling", criterion_11),
        _ => panic!("criterion index {index} out of range 1..={CRITERION_COUNT}"),
    };
    let mut c = Criterion::new(index, title);
    let outcome = body(&mut c, quick);
    c.finish(outcome)
}

/// Runs the whole suite in order.
pub fn run_all(quick: bool) -> Vec<CriterionReport> {
    (1..=CRITERION_COUNT).map(|i| criterion(i, quick)).collect()
}

fn pauli_basis() -> Result<SuBasis> {
    SuBasis::new(2, Convention::Pauli)
}

/// Dicke-sector state embedded into the full 2^N tensor space.
fn embedded_state(gs: &GroundStateResult) -> Result<Vec<Complex64>> {
    let mut psi = vec![Complex64::new(0.0, 0.0); 1usize << gs.n];
    for (kk, &ck) in gs.c.iter().enumerate() {
        let v = dicke_vector_dense(gs.n, kk)?;
        for (slot, amp) in psi.iter_mut().zip(&v) {
            *slot += amp * ck;
        }
    }
    Ok(psi)
}

/// Random real polynomial over all monomials of degree at most 3.
fn random_polynomial(rng: &mut ChaCha8Rng) -> Result<Polynomial> {
    let mut f = Polynomial::zero(3);
    for a in 0..=3u16 {
        for b in 0..=(3 - a) {
            for c in 0..=(3 - a - b) {
                let coeff = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                f = f.add(&Polynomial::monomial(3, &[a, b, c], coeff)?)?;
            }
        }
    }
    Ok(f)
}

/// Azimuthal distance to zero with period 2 pi.
fn phi_distance(phi: f64) -> f64 {
    let d = phi.abs();
    d.min(2.0 * PI - d)
}

fn criterion_1(c: &mut Criterion, quick: bool) -> Result<()> {
    let small = [(10usize, 6.0e-3), (20, 4.09e-4), (30, 3.89e-5)];
    for (n, reference) in small {
        let gs = ground_state(n, COUPLING, FIELD)?;
        let value = table1_integral(n, &gs)?;
        let rel = (value - reference).abs() / reference.abs();
        c.check(
            rel <= 0.05,
            format!("N={n}: residue {value:.6e} vs {reference:.2e}, relative error {rel:.2e} <= 5e-2"),
        );
    }
    if quick {
        c.note("quick mode: sizes 60 and 180 skipped");
    } else {
        let large: [(usize, f64); 2] = [(60, -1.4394422850e-5), (180, -8.6072887218e-9)];
        for (n, reference) in large {
            let gs = ground_state(n, COUPLING, FIELD)?;
            let value = table1_integral(n, &gs)?;
            let dev = (value.abs() - reference.abs()).abs();
            c.check(
                dev <= 1e-5,
                format!(
                    "N={n}: |residue| {:.6e} within 1e-5 of |{reference:.4e}| (difference {dev:.2e})",
                    value.abs()
                ),
            );
        }
    }
    c.check_time(30.0);
    Ok(())
}

fn criterion_2(c: &mut Criterion, quick: bool) -> Result<()> {
    let sizes: Vec<usize> = if quick {
        vec![10, 150]
    } else {
        (10..=150).step_by(20).collect()
    };
    let references = [(1.0, 0.2559, 0.0540), (0.5, 0.4185, 0.1409)];
    for (ell, first, last) in references {
        let values = sizes
            .par_iter()
            .map(|&n| {
                let gs = ground_state(n, COUPLING, FIELD)?;
                table2_integral(n, ell, &gs)
            })
            .collect::<Result<Vec<f64>>>()?;
        for (reference, value, n) in [
            (first, values[0], sizes[0]),
            (last, *values.last().expect("sizes is non-empty"), *sizes.last().expect("sizes is non-empty")),
        ] {
            let rel = (value - reference).abs() / reference;
            c.check(
                rel <= 0.01,
                format!("ell={ell}: N={n} value {value:.6} vs {reference}, relative error {rel:.2e} <= 1e-2"),
            );
        }
        let non_increasing = values.windows(2).all(|w| w[1] <= w[0]);
        c.check(
            non_increasing,
            format!(
                "ell={ell}: non-increasing over sizes {sizes:?}: [{}]",
                values.iter().map(|v| format!("{v:.4}")).collect::<Vec<_>>().join(", ")
            ),
        );
    }
    c.check_time(120.0);
    Ok(())
}

fn criterion_3(c: &mut Criterion, _quick: bool) -> Result<()> {
    let gs50 = ground_state(50, COUPLING, FIELD)?;
    let (a_half, b_half) = table3_integrals(50, 0.5, &gs50)?;
    for (label, value, reference) in [("A", a_half, 2.7759), ("B", b_half, 2.7719)] {
        let rel = (value - reference).abs() / reference;
        c.check(
            rel <= 0.005,
            format!("N=50 ell=1/2: {label} = {value:.6} vs {reference}, relative error {rel:.2e} <= 5e-3"),
        );
    }
    let (a_one, b_one) = table3_integrals(50, 1.0, &gs50)?;
    for (label, value) in [("A", a_one), ("B", b_one)] {
        let dev = (value - 0.9997).abs();
        c.check(
            dev <= 1e-3,
            format!("N=50 ell=1: {label} = {value:.6} within 1e-3 of 0.9997"),
        );
    }
    let gs140 = ground_state(140, COUPLING, FIELD)?;
    let (a_lim, b_lim) = table3_integrals(140, 0.5, &gs140)?;
    let target = 2.0 * 2.0_f64.sqrt();
    for (label, value) in [("A", a_lim), ("B", b_lim)] {
        let rel = (value - target).abs() / target;
        c.check(
            rel <= 0.01,
            format!("N=140 ell=1/2: {label} = {value:.6} vs 2*sqrt(2) = {target:.6}, relative error {rel:.2e} <= 1e-2"),
        );
    }
    Ok(())
}

fn criterion_4(c: &mut Criterion, quick: bool) -> Result<()> {
    let basis = pauli_basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(POLY_SEED);
    let count = if quick { 10 } else { 50 };
    let sizes: Vec<usize> = (3..=10).collect();
    let mut worst = 0.0_f64;
    let mut worst_n = 0;
    for i in 0..count {
        let f = random_polynomial(&mut rng)?;
        let n = sizes[i % sizes.len()];
        let gs = ground_state(n, COUPLING, FIELD)?;
        let psi = embedded_state(&gs)?;
        let q = quantize_words(&f, n, &basis)?;
        let mut y = vec![Complex64::new(0.0, 0.0); q.dim()];
        q.apply(&psi, &mut y);
        let direct: Complex64 = psi.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let branched = q_expectation(&f, &gs)?;
        let dev = (branched - direct).norm();
        if dev > worst {
            worst = dev;
            worst_n = n;
        }
    }
    c.check(
        worst <= 1e-10,
        format!(
            "{count} random degree-<=3 polynomials over sizes 3..=10: worst branching-vs-tensor deviation {worst:.2e} (N={worst_n}) <= 1e-10"
        ),
    );

    let h_sizes: Vec<usize> = if quick { (2..=8).collect() } else { (2..=12).collect() };
    let mut worst_h = 0.0_f64;
    let mut worst_h_n = 0;
    for &n in &h_sizes {
        let ham = CwHamiltonian::new(n, COUPLING, FIELD)?;
        let words = cw_hamiltonian_words(n, COUPLING, FIELD, &basis)?;
        let vecs: Vec<Vec<Complex64>> = (0..=n)
            .map(|kk| dicke_vector_dense(n, kk))
            .collect::<Result<_>>()?;
        let mut y = vec![Complex64::new(0.0, 0.0); words.dim()];
        for kk in 0..=n {
            words.apply(&vecs[kk], &mut y);
            for (kp, vec_kp) in vecs.iter().enumerate() {
                let got: Complex64 = vec_kp.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
                let want = if kp == kk {
                    ham.diag()[kk]
                } else if kp + 1 == kk {
                    ham.off()[kp]
                } else if kk + 1 == kp {
                    ham.off()[kk]
                } else {
                    0.0
                };
                let dev = (got - want).norm();
                if dev > worst_h {
                    worst_h = dev;
                    worst_h_n = n;
                }
            }
        }
    }
    c.check(
        worst_h <= 1e-12,
        format!(
            "tridiagonal Hamiltonian vs projected full-space operator over sizes {:?}: worst entry deviation {worst_h:.2e} (N={worst_h_n}) <= 1e-12",
            (h_sizes[0], h_sizes[h_sizes.len() - 1])
        ),
    );
    Ok(())
}

fn criterion_5(c: &mut Criterion, quick: bool) -> Result<()> {
    let basis = pauli_basis()?;
    let sizes: Vec<usize> = if quick { (4..=8).collect() } else { (4..=12).collect() };
    let coords: Vec<Polynomial> = (0..3)
        .map(|j| Polynomial::coordinate(3, j))
        .collect::<Result<_>>()?;
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in (i + 1)..3 {
            let defects = sizes
                .par_iter()
                .map(|&n| dgr_defect(&coords[i], &coords[j], n, &basis))
                .collect::<Result<Vec<f64>>>()?;
            worst = defects.into_iter().fold(worst, f64::max);
        }
    }
    c.check(
        worst <= 1e-12,
        format!(
            "degree-one pairs over sizes {:?}: worst defect {worst:.2e} <= 1e-12",
            (sizes[0], sizes[sizes.len() - 1])
        ),
    );

    let f = Polynomial::parse(3, "x3^2")?;
    let g = Polynomial::parse(3, "x1")?;
    let slope_sizes: Vec<usize> = if quick { vec![4, 6, 8] } else { (4..=12).collect() };
    let points = slope_sizes
        .par_iter()
        .map(|&n| dgr_defect(&f, &g, n, &basis).map(|d| (n, d)))
        .collect::<Result<Vec<_>>>()?;
    let rendered = points
        .iter()
        .map(|&(n, d)| format!("({n}, {d:.3e})"))
        .collect::<Vec<_>>()
        .join(", ");
    let decreasing = points.windows(2).all(|w| w[1].1 < w[0].1);
    c.check(
        decreasing,
        format!("defect of (x3^2, x1) strictly decreasing: [{rendered}]"),
    );
    let sweep = SweepResult::fitted("pair defect", points)?;
    match sweep.fit {
        Some((slope, _)) => c.check(
            (slope + 1.0).abs() <= 0.3,
            format!("log-log slope {slope:.3} within -1 +/- 0.3"),
        ),
        None => c.check(false, "log-log slope unavailable: defects are not positive".to_string()),
    }
    Ok(())
}

fn criterion_6(c: &mut Criterion, quick: bool) -> Result<()> {
    let n_max: u64 = if quick { 12 } else { 20 };
    let mut combos = 0usize;
    let mut all_match = true;
    for n in 1..=n_max {
        let total_expected =
            factorial_u128(n).ok_or_else(|| CwqError::Overflow(format!("{n}! exceeds u128")))?;
        for m in 1..=n.min(6) {
            for l in 1..=m {
                let k_lo = (l + m).saturating_sub(n);
                let mut total: u128 = 0;
                for k in k_lo..=l {
                    total = total
                        .checked_add(perm_count(n, l, m, k)?)
                        .ok_or_else(|| CwqError::Overflow("class sum exceeds u128".into()))?;
                }
                combos += 1;
                all_match &= total == total_expected;
            }
        }
    }
    c.check(
        all_match,
        format!("class counts sum to N! exactly for all {combos} (N, L, M) combinations with N <= {n_max}, L <= M <= 6"),
    );

    let ratio = c_n_ratio(10_000, 2, 3)?;
    c.check(
        (ratio - 1.0).abs() <= 1e-2,
        format!("normalization ratio at N=10000, L=2, M=3: {ratio:.6} within 1e-2 of 1"),
    );

    let top: u64 = if quick { 1024 } else { 4096 };
    for (l, m) in [(2u64, 2u64), (2, 3), (3, 3)] {
        let mut sizes = Vec::new();
        let mut n = 64u64;
        while n <= top {
            sizes.push(n);
            n *= 2;
        }
        let fractions = sizes
            .iter()
            .map(|&n| p3_fraction(n, l, m))
            .collect::<Result<Vec<f64>>>()?;
        let decreasing = fractions.windows(2).all(|w| w[1] < w[0]);
        c.check(
            decreasing,
            format!(
                "multi-coincidence fraction (L={l}, M={m}) strictly decreasing over doublings {}..{}: [{}]",
                sizes[0],
                top,
                fractions.iter().map(|v| format!("{v:.3e}")).collect::<Vec<_>>().join(", ")
            ),
        );
    }
    Ok(())
}

fn criterion_7(c: &mut Criterion, quick: bool) -> Result<()> {
    let sizes: Vec<usize> = if quick {
        (1..=50).chain([100, 150, 200]).collect()
    } else {
        (1..=200).collect()
    };
    let residuals = sizes
        .par_iter()
        .map(|&n| {
            let quad = default_quadrature(n)?;
            resolution_identity_check(n, &quad).map(|r| (n, r))
        })
        .collect::<Result<Vec<_>>>()?;
    let (worst_n, worst) = residuals
        .into_iter()
        .fold((0usize, 0.0_f64), |acc, p| if p.1 > acc.1 { p } else { acc });
    c.check(
        worst <= 1e-10,
        format!(
            "resolution-of-identity residual over {} sizes up to N=200: worst {worst:.2e} (N={worst_n}) <= 1e-10",
            sizes.len()
        ),
    );

    let quad = default_quadrature(60)?;
    for ell in [0.5, 1.0] {
        let value = exact_constant(60, ell, &quad)?;
        let reference = exact_constant_reference(60, ell);
        let dev = (value - reference).abs();
        c.check(
            dev <= 1e-10,
            format!("overlap constant at N=60, ell={ell}: {value:.12} vs {reference:.12}, deviation {dev:.2e} <= 1e-10"),
        );
    }
    Ok(())
}

fn criterion_8(c: &mut Criterion, _quick: bool) -> Result<()> {
    let sizes = [100usize, 200, 400, 800];
    for (expr, target) in [("x1", 0.5), ("x3^2", 0.75)] {
        let f = Polynomial::parse(3, expr)?;
        let sweep = classical_limit_sweep(&f, &sizes, COUPLING, FIELD)?;
        c.check(
            (sweep.target - target).abs() <= 1e-12,
            format!("classical target for {expr}: {:.12} vs {target}", sweep.target),
        );
        let errors: Vec<f64> = sweep.errors.points.iter().map(|&(_, e)| e).collect();
        let rendered = errors
            .iter()
            .map(|e| format!("{e:.3e}"))
            .collect::<Vec<_>>()
            .join(", ");
        let non_increasing = errors.windows(2).all(|w| w[1] <= w[0]);
        c.check(
            non_increasing,
            format!("|<Q({expr})> - {target}| non-increasing over sizes {sizes:?}: [{rendered}]"),
        );
        let last = *errors.last().expect("sweep has points");
        c.check(
            last <= 0.1,
            format!("error at N=800 for {expr}: {last:.3e} <= 0.1"),
        );
    }
    c.check_time(60.0);
    Ok(())
}

/// Per-size measurements backing criterion 9.
struct GroundStateRow {
    n: usize,
    c_min: f64,
    asymmetry: f64,
    purified: bool,
    peaks_in_cell: bool,
}

fn criterion_9(c: &mut Criterion, quick: bool) -> Result<()> {
    let sizes: Vec<usize> = if quick {
        (1..=60).chain([80, 100, 150, 199, 200]).collect()
    } else {
        (1..=200).collect()
    };
    let rows = sizes
        .par_iter()
        .map(|&n| -> Result<GroundStateRow> {
            let gs = ground_state(n, COUPLING, FIELD)?;
            let c_min = gs.c.iter().cloned().fold(f64::INFINITY, f64::min);
            let asymmetry = (0..=n)
                .map(|k| (gs.c[k] - gs.c[n - k]).abs())
                .fold(0.0, f64::max);
            let profile = husimi_profile(&gs.c, 1.0, n + 2, 2 * n + 4)?;
            let ((north, _), (south, _)) = husimi_peaks(&profile);
            let cell_theta = PI / (n + 1) as f64;
            let cell_phi = PI / (n + 2) as f64;
            let d_theta = (north.theta() - PI / 6.0)
                .abs()
                .max((south.theta() - 5.0 * PI / 6.0).abs());
            let d_phi = phi_distance(north.phi()).max(phi_distance(south.phi()));
            let peaks_in_cell = d_theta <= cell_theta + 1e-12 && d_phi <= cell_phi + 1e-12;
            Ok(GroundStateRow {
                n,
                c_min,
                asymmetry,
                purified: gs.purified,
                peaks_in_cell,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let worst_min = rows.iter().map(|r| r.c_min).fold(f64::INFINITY, f64::min);
    c.check(
        worst_min >= -1e-9,
        format!("smallest coefficient over {} sizes: {worst_min:.2e} >= -1e-9", rows.len()),
    );
    let worst_asym = rows.iter().map(|r| r.asymmetry).fold(0.0, f64::max);
    c.check(
        worst_asym <= 1e-9,
        format!("worst spin-flip asymmetry max|c(k) - c(N-k)|: {worst_asym:.2e} <= 1e-9"),
    );

    let purified: Vec<&GroundStateRow> = rows.iter().filter(|r| r.purified).collect();
    let first_purified = purified.iter().map(|r| r.n).min();
    let all_purified_in_cell = purified.iter().all(|r| r.peaks_in_cell);
    c.check(
        !purified.is_empty() && all_purified_in_cell,
        format!(
            "Husimi peaks within one grid cell of (pi/6, 0) and (5pi/6, 0) for all {} purified sizes (smallest N={})",
            purified.len(),
            first_purified.map_or_else(|| "none".to_string(), |n| n.to_string()),
        ),
    );
    let outside: Vec<usize> = rows
        .iter()
        .filter(|r| !r.purified && !r.peaks_in_cell)
        .map(|r| r.n)
        .collect();
    c.note(format!(
        "peaks also within one cell at every other size except {outside:?}, where the field-dominated state has a single equatorial maximum"
    ));
    Ok(())
}

fn criterion_10(c: &mut Criterion, quick: bool) -> Result<()> {
    let sizes: Vec<usize> = if quick { (4..=10).collect() } else { (4..=12).collect() };
    let norms = sizes
        .par_iter()
        .map(|&n| hamiltonian_gap_norm(n, COUPLING, FIELD).map(|v| (n, n as f64 * v)))
        .collect::<Result<Vec<_>>>()?;
    let (worst_n, worst) = norms
        .into_iter()
        .fold((0usize, 0.0_f64), |acc, p| if p.1 > acc.1 { p } else { acc });
    c.check(
        worst <= COUPLING,
        format!(
            "N ||h - Q(h0)|| over sizes {:?}: worst {worst:.6} (N={worst_n}) <= J = {COUPLING}",
            (sizes[0], sizes[sizes.len() - 1])
        ),
    );
    Ok(())
}

fn criterion_11(c: &mut Criterion, quick: bool) -> Result<()> {
    let sizes: Vec<usize> = if quick { vec![50, 100, 200] } else { vec![50, 100, 200, 400] };
    let widths = sizes
        .par_iter()
        .map(|&n| {
            let gs = ground_state(n, COUPLING, FIELD)?;
            fwhm_scan(n, 1.0, &gs).map(|w| (n, w))
        })
        .collect::<Result<Vec<_>>>()?;
    let theta_points: Vec<(usize, f64)> = widths.iter().map(|&(n, (t, _))| (n, t)).collect();
    let phi_points: Vec<(usize, f64)> = widths.iter().map(|&(n, (_, p))| (n, p)).collect();
    let theta_fit = SweepResult::fitted("theta width", theta_points)?;
    match theta_fit.fit {
        Some((slope, _)) => c.check(
            (slope + 0.5).abs() <= 0.1,
            format!("theta-width log-log slope {slope:.4} within -0.5 +/- 0.1 over sizes {sizes:?}"),
        ),
        None => c.check(false, "theta-width slope unavailable".to_string()),
    }
    let phi_fit = SweepResult::fitted("phi width", phi_points)?;
    if let Some((slope, _)) = phi_fit.fit {
        c.note(format!("phi-width log-log slope {slope:.4}"));
    }
    Ok(())
}
