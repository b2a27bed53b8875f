//! Spin coherent states, sphere quadrature, and Husimi-type densities.
//!
//! A point Omega = (theta, phi) on the unit sphere labels the product state
//! |Omega>^{(x)N} whose Dicke components are
//!
//! ```text
//! c(k) = sqrt(C(N,k)) cos(theta/2)^k sin(theta/2)^(N-k) e^{i(N-k)phi},
//! ```
//!
//! with k the number of up spins.  These states are overcomplete:
//! (N+1)/(4 pi) Int |Omega><Omega| dOmega = 1 on the symmetric subspace.  The
//! Husimi-type density of a symmetric state Psi at scaling power ell in
//! {1/2, 1} is (N+1)/(4 pi) |<Psi, Omega>|^(2 ell), a positive portrait of
//! Psi per steradian.
//!
//! Two quadratures appear.  Identity-grade integrals (resolution of the
//! identity, the exact-constant check, delta-family rates) use a product
//! rule, Gauss-Legendre in cos(theta) times uniform phi, which integrates
//! the degree-N trigonometric integrands exactly.  The table diagnostics
//! instead pin the (N+1)-point-per-axis trapezoid grid with the sin(theta)
//! measure, whose discretization residues are themselves the quantities of
//! interest (the ell = 1 integral behind [`table1_integral`] vanishes
//! identically in the continuum).
//!
//! All binomial square roots are taken in log space; half-angle powers use
//! integer exponentiation, which is exact at the poles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dicke::GroundStateResult;
use crate::error::{CwqError, Result};
use crate::numerics::{gauss_legendre, ln_binomial, loglog_fit};

/// Half width of the scan grids used by [`fwhm_scan`], in points.
const FWHM_MIN_POINTS: usize = 1200;

/// A point on the unit sphere in polar coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpherePoint {
    theta: f64,
    phi: f64,
}

impl SpherePoint {
    /// Builds a point with `theta` in [0, pi]; `phi` is wrapped into
    /// (-pi, pi].
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !(0.0..=PI).contains(&theta) {
            return Err(CwqError::Dimension(format!(
                "polar angle {theta} outside [0, pi]"
            )));
        }
        if !phi.is_finite() {
            return Err(CwqError::Dimension(format!("azimuth {phi} not finite")));
        }
        let mut p = phi.rem_euclid(2.0 * PI);
        if p > PI {
            p -= 2.0 * PI;
        }
        Ok(Self { theta, phi: p })
    }

    /// Polar angle in [0, pi].
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Azimuth in (-pi, pi].
    pub fn phi(&self) -> f64 {
        self.phi
    }

    /// Cosine of the central angle between two points.
    pub fn cos_angle_to(&self, other: &SpherePoint) -> f64 {
        let c = self.theta.cos() * other.theta.cos()
            + self.theta.sin() * other.theta.sin() * (self.phi - other.phi).cos();
        c.clamp(-1.0, 1.0)
    }

    /// Geodesic distance in [0, pi].
    pub fn geodesic_distance(&self, other: &SpherePoint) -> f64 {
        self.cos_angle_to(other).acos()
    }
}

/// Nodes and positive weights summing to 4 pi (steradian measure).
#[derive(Clone, Debug)]
pub struct SphereQuadrature {
    nodes: Vec<SpherePoint>,
    weights: Vec<f64>,
    exactness: usize,
}

impl SphereQuadrature {
    /// Quadrature nodes.
    pub fn nodes(&self) -> &[SpherePoint] {
        &self.nodes
    }

    /// Weights, aligned with [`Self::nodes`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Largest spherical-polynomial degree integrated exactly.
    pub fn exactness(&self) -> usize {
        self.exactness
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    /// True when the rule has no nodes.
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over the sphere.  Node contributions are evaluated in
    /// parallel and reduced pairwise in a fixed order, so the result is
    /// independent of the worker count.
    pub fn integrate<F>(&self, f: F) -> f64
    where
        F: Fn(&SpherePoint) -> f64 + Sync,
    {
        let terms: Vec<f64> = self
            .nodes
            .par_iter()
            .zip(self.weights.par_iter())
            .map(|(p, w)| w * f(p))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Sums in a fixed balanced-tree order.
fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum(&xs[..n / 2]) + pairwise_sum(&xs[n / 2..]),
    }
}

/// Complex variant of [`pairwise_sum`].
fn pairwise_sum_c(xs: &[Complex64]) -> Complex64 {
    match xs.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => pairwise_sum_c(&xs[..n / 2]) + pairwise_sum_c(&xs[n / 2..]),
    }
}

/// Product rule, Gauss-Legendre in cos(theta) times uniform phi starting at
/// -pi.  Exactness degree is min(2 n_theta - 1, n_phi - 1); weights sum to
/// 4 pi.
pub fn build_quadrature(n_theta: usize, n_phi: usize) -> Result<SphereQuadrature> {
    if n_theta == 0 || n_phi == 0 {
        return Err(CwqError::Size(
            "quadrature needs at least one node per axis".into(),
        ));
    }
    let (xs, wx) = gauss_legendre(n_theta);
    let dphi = 2.0 * PI / n_phi as f64;
    let mut nodes = Vec::with_capacity(n_theta * n_phi);
    let mut weights = Vec::with_capacity(n_theta * n_phi);
    for (x, w) in xs.iter().zip(wx.iter()) {
        let theta = x.clamp(-1.0, 1.0).acos();
        for j in 0..n_phi {
            let phi = -PI + j as f64 * dphi;
            nodes.push(SpherePoint::new(theta, phi)?);
            weights.push(w * dphi);
        }
    }
    Ok(SphereQuadrature {
        nodes,
        weights,
        exactness: (2 * n_theta - 1).min(n_phi - 1),
    })
}

/// The default rule for symmetric states of `n` spins: (n+2) x (2n+4)
/// nodes, exact through degree 2n+3.
pub fn default_quadrature(n: usize) -> Result<SphereQuadrature> {
    build_quadrature(n + 2, 2 * n + 4)
}

/// Amplitudes sqrt(C(n,k)) cos(theta/2)^k sin(theta/2)^(n-k) for
/// k = 0..=n.
fn coherent_amplitudes(n: usize, theta: f64) -> Vec<f64> {
    let ct = (theta / 2.0).cos();
    let st = (theta / 2.0).sin();
    (0..=n)
        .map(|k| {
            let b = (0.5 * ln_binomial(n as u64, k as u64)).exp();
            b * ct.powi(k as i32) * st.powi((n - k) as i32)
        })
        .collect()
}

/// Dicke components of the coherent state |Omega>^{(x)n}.
pub fn coherent_components(n: usize, p: &SpherePoint) -> Result<Vec<Complex64>> {
    if n == 0 {
        return Err(CwqError::Size("coherent state needs n >= 1 spins".into()));
    }
    let amps = coherent_amplitudes(n, p.theta());
    Ok((0..=n)
        .map(|k| Complex64::from_polar(amps[k], (n - k) as f64 * p.phi()))
        .collect())
}

/// sum_k d(k) e^{i (n-k) phi} by incremental rotation.
fn phase_dot(d: &[Complex64], n: usize, phi: f64) -> Complex64 {
    let rot = Complex64::from_polar(1.0, -phi);
    let mut ph = Complex64::from_polar(1.0, n as f64 * phi);
    let mut acc = Complex64::new(0.0, 0.0);
    for &dk in d {
        acc += dk * ph;
        ph *= rot;
    }
    acc
}

/// |<Omega, Omega'>|^2 = ((1 + cos Phi)/2)^n with Phi the central angle.
pub fn overlap_squared(p: &SpherePoint, p_prime: &SpherePoint, n: usize) -> f64 {
    let base = 0.5 * (1.0 + p.cos_angle_to(p_prime));
    if base <= 0.0 {
        return 0.0;
    }
    (n as f64 * base.ln()).exp()
}

/// Seed for the random state pairs in [`resolution_identity_check`].
pub const RESOLUTION_SEED: u64 = 7;

/// Residual of the resolution of the identity on the symmetric subspace:
/// max over three seeded random pairs (Psi, Phi) of
/// |(n+1)/(4 pi) sum_j w_j <Psi, Omega_j><Omega_j, Phi> - <Psi, Phi>|.
/// An under-resolved rule (exactness below n) still reports its residual.
pub fn resolution_identity_check(n: usize, quad: &SphereQuadrature) -> Result<f64> {
    if n == 0 {
        return Err(CwqError::Size("resolution check needs n >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(RESOLUTION_SEED);
    let random_state = |rng: &mut ChaCha8Rng| -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..=n)
            .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / norm).collect()
    };
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let psi = random_state(&mut rng);
        let phi_state = random_state(&mut rng);
        let exact: Complex64 = psi
            .iter()
            .zip(phi_state.iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        let d_psi: Vec<Complex64> = psi.iter().map(|z| z.conj()).collect();
        let terms: Vec<Complex64> = quad
            .nodes()
            .par_iter()
            .zip(quad.weights().par_iter())
            .map(|(node, w)| {
                let amps = coherent_amplitudes(n, node.theta());
                let dp: Vec<Complex64> =
                    (0..=n).map(|k| d_psi[k] * amps[k]).collect();
                let dq: Vec<Complex64> =
                    (0..=n).map(|k| phi_state[k] * amps[k]).collect();
                let psi_om = phase_dot(&dp, n, node.phi());
                let om_phi = phase_dot(&dq, n, -node.phi());
                w * psi_om * om_phi
            })
            .collect();
        let approx = (n as f64 + 1.0) / (4.0 * PI) * pairwise_sum_c(&terms);
        worst = worst.max((approx - exact).norm());
    }
    Ok(worst)
}

/// Standard normal sample by the Box-Muller transform.
fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// (ell(n+1)/(4 pi)) Int |<Omega', Omega>|^(2 ell) dOmega evaluated with
/// `quad` and Omega' at the north pole; closed form in
/// [`exact_constant_reference`].
pub fn exact_constant(n: usize, ell: f64, quad: &SphereQuadrature) -> Result<f64> {
    validate_ell(ell)?;
    let power = ell * n as f64;
    let val = quad.integrate(|p| {
        let base = 0.5 * (1.0 + p.theta().cos());
        base.powf(power)
    });
    Ok(ell * (n as f64 + 1.0) / (4.0 * PI) * val)
}

/// The closed form ell(n+1)/(ell n + 1) of the integral in
/// [`exact_constant`].
pub fn exact_constant_reference(n: usize, ell: f64) -> f64 {
    let nf = n as f64;
    ell * (nf + 1.0) / (ell * nf + 1.0)
}

fn validate_ell(ell: f64) -> Result<()> {
    if (ell - 1.0).abs() < 1e-12 || (ell - 0.5).abs() < 1e-12 {
        Ok(())
    } else {
        Err(CwqError::Dimension(format!(
            "scaling power {ell} not in {{1/2, 1}}"
        )))
    }
}

/// A rectangular (theta, phi) sampling of the Husimi-type density
/// (n+1)/(4 pi) |<Psi, Omega>|^(2 ell) of a real symmetric state.
#[derive(Clone, Debug)]
pub struct HusimiProfile {
    n: usize,
    ell: f64,
    thetas: Vec<f64>,
    phis: Vec<f64>,
    /// Row-major samples, contiguous in phi.
    values: Vec<f64>,
}

impl HusimiProfile {
    /// Number of spins.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Scaling power, 1/2 or 1.
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Polar grid, uniform on [0, pi] including both endpoints.
    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    /// Azimuthal grid, uniform with period 2 pi starting at -pi.
    pub fn phis(&self) -> &[f64] {
        &self.phis
    }

    /// Density at grid indices (i, j).
    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.phis.len() + j]
    }

    /// All samples, row-major with phi contiguous.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Grid location and value of the density maximum restricted to rows
    /// with theta <= pi/2 (`north` = true) or theta >= pi/2.
    fn hemisphere_max(&self, north: bool) -> (SpherePoint, f64) {
        let mut best = (0usize, 0usize, f64::NEG_INFINITY);
        for (i, &t) in self.thetas.iter().enumerate() {
            let in_half = if north { t <= PI / 2.0 + 1e-12 } else { t >= PI / 2.0 - 1e-12 };
            if !in_half {
                continue;
            }
            for j in 0..self.phis.len() {
                let v = self.value(i, j);
                if v > best.2 {
                    best = (i, j, v);
                }
            }
        }
        let p = SpherePoint::new(self.thetas[best.0], self.phis[best.1])
            .expect("grid angles are in range");
        (p, best.2)
    }
}

/// Samples the Husimi-type density of the real symmetric state `c` on a
/// uniform (n_theta x n_phi) grid.
pub fn husimi_profile(
    c: &[f64],
    ell: f64,
    n_theta: usize,
    n_phi: usize,
) -> Result<HusimiProfile> {
    validate_ell(ell)?;
    if c.len() < 2 {
        return Err(CwqError::Size("state needs at least two components".into()));
    }
    if n_theta < 2 || n_phi < 1 {
        return Err(CwqError::Size("profile grid needs n_theta >= 2, n_phi >= 1".into()));
    }
    let n = c.len() - 1;
    let thetas: Vec<f64> = (0..n_theta)
        .map(|i| PI * i as f64 / (n_theta - 1) as f64)
        .collect();
    let phis: Vec<f64> = (0..n_phi)
        .map(|j| -PI + 2.0 * PI * j as f64 / n_phi as f64)
        .collect();
    let prefactor = (n as f64 + 1.0) / (4.0 * PI);
    let rows: Vec<Vec<f64>> = thetas
        .par_iter()
        .map(|&t| {
            let amps = coherent_amplitudes(n, t);
            let d: Vec<Complex64> = (0..=n)
                .map(|k| Complex64::new(c[k] * amps[k], 0.0))
                .collect();
            phis.iter()
                .map(|&phi| {
                    let mag2 = phase_dot(&d, n, phi).norm_sqr();
                    let m = if (ell - 1.0).abs() < 1e-12 { mag2 } else { mag2.sqrt() };
                    prefactor * m
                })
                .collect()
        })
        .collect();
    let values = rows.into_iter().flatten().collect();
    Ok(HusimiProfile { n, ell, thetas, phis, values })
}

/// Locations and heights of the density maxima on the northern and
/// southern closed hemispheres.
pub fn husimi_peaks(profile: &HusimiProfile) -> ((SpherePoint, f64), (SpherePoint, f64)) {
    (profile.hemisphere_max(true), profile.hemisphere_max(false))
}

/// Polar angle of the northern classical minimum: arccos(z*) with
/// z* = sqrt(1 - (field/coupling)^2) below the critical field and 0 above.
fn peak_theta(coupling: f64, field: f64) -> f64 {
    if field.abs() < coupling.abs() {
        let z = (1.0 - (field / coupling).powi(2)).sqrt();
        z.clamp(-1.0, 1.0).acos()
    } else {
        PI / 2.0
    }
}

/// The trapezoid grid behind the table diagnostics: n+1 uniform points per
/// axis on [0, pi] x [-pi, pi] with endpoint weights halved.
fn table_grid(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = n + 1;
    let dth = PI / n as f64;
    let dph = 2.0 * PI / n as f64;
    let thetas: Vec<f64> = (0..m).map(|i| i as f64 * dth).collect();
    let phis: Vec<f64> = (0..m).map(|j| -PI + j as f64 * dph).collect();
    let mut wth = vec![dth; m];
    wth[0] *= 0.5;
    wth[m - 1] *= 0.5;
    let mut wph = vec![dph; m];
    wph[0] *= 0.5;
    wph[m - 1] *= 0.5;
    (thetas, wth, phis, wph)
}

/// Validates a table-integral call and returns the ground-state components.
fn table_state(n: usize, gs: &GroundStateResult) -> Result<&[f64]> {
    if gs.n != n {
        return Err(CwqError::Dimension(format!(
            "table for n = {n} given a ground state with n = {}",
            gs.n
        )));
    }
    Ok(&gs.c)
}

/// The three density fields entering the table integrands at one grid
/// point: the state density H_Psi and the two coherent-peak densities with
/// their 2^(-ell) weights.
struct TableFields {
    h_psi: f64,
    h_plus: f64,
    h_minus: f64,
}

/// Evaluates the table integrand fields over the trapezoid grid; rows are
/// computed in parallel.
fn table_fields(
    c: &[f64],
    ell: f64,
    thetas: &[f64],
    phis: &[f64],
    theta_plus: f64,
) -> Vec<Vec<TableFields>> {
    let n = c.len() - 1;
    let nf = n as f64;
    let prefactor = (nf + 1.0) / (4.0 * PI);
    let weight = 0.5f64.powf(ell);
    let theta_minus = PI - theta_plus;
    thetas
        .par_iter()
        .map(|&t| {
            let amps = coherent_amplitudes(n, t);
            let d: Vec<Complex64> = (0..=n)
                .map(|k| Complex64::new(c[k] * amps[k], 0.0))
                .collect();
            phis.iter()
                .map(|&phi| {
                    let mag2 = phase_dot(&d, n, phi).norm_sqr();
                    let h_psi = prefactor
                        * if (ell - 1.0).abs() < 1e-12 { mag2 } else { mag2.sqrt() };
                    let base = |t0: f64| {
                        let cos_phi_c =
                            t0.cos() * t.cos() + t0.sin() * t.sin() * phi.cos();
                        (0.5 * (1.0 + cos_phi_c)).clamp(0.0, 1.0)
                    };
                    let h_plus =
                        prefactor * weight * base(theta_plus).powf(ell * nf);
                    let h_minus =
                        prefactor * weight * base(theta_minus).powf(ell * nf);
                    TableFields { h_psi, h_plus, h_minus }
                })
                .collect()
        })
        .collect()
}

/// Integrates a pointwise combination of the table fields over the
/// trapezoid grid with the sin(theta) measure.
fn table_integrate<F>(c: &[f64], ell: f64, n: usize, theta_plus: f64, f: F) -> f64
where
    F: Fn(&TableFields) -> f64,
{
    let (thetas, wth, phis, wph) = table_grid(n);
    let fields = table_fields(c, ell, &thetas, &phis, theta_plus);
    let rows: Vec<f64> = fields
        .iter()
        .zip(thetas.iter().zip(wth.iter()))
        .map(|(row, (&t, &w))| {
            let terms: Vec<f64> = row
                .iter()
                .zip(wph.iter())
                .map(|(tf, &wp)| wp * f(tf))
                .collect();
            w * t.sin() * pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&rows)
}

/// Int (H_Psi - H_+ - H_-) dOmega at ell = 1, where H_Psi is the Husimi
/// density of the ground state and H_+- are the half-weighted densities of
/// the coherent states at the classical minima.  Vanishes identically in
/// the continuum; the grid residue is the reported diagnostic.
pub fn table1_integral(n: usize, gs: &GroundStateResult) -> Result<f64> {
    let c = table_state(n, gs)?;
    let theta_plus = peak_theta(gs.coupling, gs.field);
    Ok(table_integrate(c, 1.0, n, theta_plus, |tf| {
        tf.h_psi - tf.h_plus - tf.h_minus
    }))
}

/// Int |H^ell_Psi - 2^(-ell) H^ell_+ - 2^(-ell) H^ell_-| dOmega, the
/// absolute-value variant of [`table1_integral`] at scaling power `ell`.
pub fn table2_integral(n: usize, ell: f64, gs: &GroundStateResult) -> Result<f64> {
    validate_ell(ell)?;
    let c = table_state(n, gs)?;
    let theta_plus = peak_theta(gs.coupling, gs.field);
    Ok(table_integrate(c, ell, n, theta_plus, |tf| {
        (tf.h_psi - tf.h_plus - tf.h_minus).abs()
    }))
}

/// The separate integrals A_n = Int H^ell_Psi dOmega and
/// B_n = Int 2^(-ell) (H^ell_+ + H^ell_-) dOmega.
pub fn table3_integrals(n: usize, ell: f64, gs: &GroundStateResult) -> Result<(f64, f64)> {
    validate_ell(ell)?;
    let c = table_state(n, gs)?;
    let theta_plus = peak_theta(gs.coupling, gs.field);
    let a = table_integrate(c, ell, n, theta_plus, |tf| tf.h_psi);
    let b = table_integrate(c, ell, n, theta_plus, |tf| tf.h_plus + tf.h_minus);
    Ok((a, b))
}

/// Supremum of the ground-state Husimi density over scan nodes lying
/// outside the geodesic disks of radius `disk_radius` around both classical
/// peaks; 0 when no node survives.  For fixed radius this decays in n.
pub fn assumption_c_sup(
    n: usize,
    ell: f64,
    gs: &GroundStateResult,
    disk_radius: f64,
) -> Result<f64> {
    validate_ell(ell)?;
    let c = table_state(n, gs)?;
    if !(disk_radius > 0.0) {
        return Err(CwqError::Dimension(format!(
            "disk radius {disk_radius} must be positive"
        )));
    }
    let theta_plus = peak_theta(gs.coupling, gs.field);
    let p_plus = SpherePoint::new(theta_plus, 0.0)?;
    let p_minus = SpherePoint::new(PI - theta_plus, 0.0)?;
    let profile = husimi_profile(c, ell, 2 * n + 2, 2 * n + 4)?;
    let mut sup = 0.0f64;
    for (i, &t) in profile.thetas().iter().enumerate() {
        for (j, &phi) in profile.phis().iter().enumerate() {
            let p = SpherePoint::new(t, phi)?;
            if p.geodesic_distance(&p_plus) > disk_radius
                && p.geodesic_distance(&p_minus) > disk_radius
            {
                sup = sup.max(profile.value(i, j));
            }
        }
    }
    Ok(sup)
}

/// Half-maximum crossing of `prof` walking from index `peak` in direction
/// `step`, linearly interpolated on `grid`; `None` when the profile never
/// drops below half inside the grid.
fn half_crossing(grid: &[f64], prof: &[f64], peak: usize, step: isize, half: f64) -> Option<f64> {
    let n = grid.len() as isize;
    let mut i = peak as isize;
    while i + step >= 0 && i + step < n && prof[(i + step) as usize] > half {
        i += step;
    }
    let j = i + step;
    if j < 0 || j >= n {
        return None;
    }
    let (i, j) = (i as usize, j as usize);
    let t = (half - prof[i]) / (prof[j] - prof[i]);
    Some(grid[i] + t * (grid[j] - grid[i]))
}

/// Full width at half maximum of a sampled profile around its maximum.
fn fwhm_of(grid: &[f64], prof: &[f64]) -> Option<f64> {
    let peak = prof
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)?;
    let half = prof[peak] / 2.0;
    let left = half_crossing(grid, prof, peak, -1, half)?;
    let right = half_crossing(grid, prof, peak, 1, half)?;
    Some(right - left)
}

/// Angular full widths at half maximum of the ground-state Husimi density:
/// along theta at phi = 0 within the northern hemisphere, and along phi at
/// the classical peak polar angle.  Scan resolution is
/// max(1200, 4 ceil(sqrt(n))) points per axis.
pub fn fwhm_scan(n: usize, ell: f64, gs: &GroundStateResult) -> Result<(f64, f64)> {
    validate_ell(ell)?;
    let c = table_state(n, gs)?;
    let points = FWHM_MIN_POINTS.max(4 * (n as f64).sqrt().ceil() as usize);
    let nf = n as f64;
    let prefactor = (nf + 1.0) / (4.0 * PI);
    let density = |d: &[Complex64], phi: f64| {
        let mag2 = phase_dot(d, n, phi).norm_sqr();
        prefactor * if (ell - 1.0).abs() < 1e-12 { mag2 } else { mag2.sqrt() }
    };
    let theta_grid: Vec<f64> = (0..points)
        .map(|i| 1e-9 + (PI / 2.0 - 1e-9) * i as f64 / (points - 1) as f64)
        .collect();
    let theta_prof: Vec<f64> = theta_grid
        .par_iter()
        .map(|&t| {
            let amps = coherent_amplitudes(n, t);
            let d: Vec<Complex64> = (0..=n)
                .map(|k| Complex64::new(c[k] * amps[k], 0.0))
                .collect();
            density(&d, 0.0)
        })
        .collect();
    let width_theta = fwhm_of(&theta_grid, &theta_prof)
        .ok_or_else(|| CwqError::Scan("no half-maximum crossing along theta".into()))?;
    let theta_peak = peak_theta(gs.coupling, gs.field);
    let amps = coherent_amplitudes(n, theta_peak);
    let d: Vec<Complex64> = (0..=n)
        .map(|k| Complex64::new(c[k] * amps[k], 0.0))
        .collect();
    let phi_grid: Vec<f64> = (0..points)
        .map(|j| -PI / 2.0 + PI * j as f64 / (points - 1) as f64)
        .collect();
    let phi_prof: Vec<f64> = phi_grid.par_iter().map(|&p| density(&d, p)).collect();
    let width_phi = fwhm_of(&phi_grid, &phi_prof)
        .ok_or_else(|| CwqError::Scan("no half-maximum crossing along phi".into()))?;
    Ok((width_theta, width_phi))
}

/// Delta-family approximation errors and their fitted log-log rate.
#[derive(Clone, Debug)]
pub struct DeltaFamilyResult {
    /// (n, e_n) with e_n = |h(p') - (ell(n+1)/4 pi) Int h |<Omega',Omega>|^(2 ell) dOmega|.
    pub errors: Vec<(usize, f64)>,
    /// Log-log slope of e_n against n; `None` when fewer than two errors
    /// are positive.
    pub rate: Option<f64>,
}

/// Measures how fast the smeared evaluations of `h` against the coherent
/// kernel centered at `p_prime` converge to the point value, over the
/// sizes in `n_list`.  Each size uses an (n+8) x (2n+8) exact rule.
pub fn delta_family_rate<H>(
    h: H,
    p_prime: &SpherePoint,
    ell: f64,
    n_list: &[usize],
) -> Result<DeltaFamilyResult>
where
    H: Fn(&SpherePoint) -> f64 + Sync,
{
    validate_ell(ell)?;
    if n_list.is_empty() {
        return Err(CwqError::Size("delta-family rate needs at least one size".into()));
    }
    let target = h(p_prime);
    let mut errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n == 0 {
            return Err(CwqError::Size("delta-family sizes must be positive".into()));
        }
        let quad = build_quadrature(n + 8, 2 * n + 8)?;
        let power = ell * n as f64;
        let val = quad.integrate(|p| {
            let base = 0.5 * (1.0 + p.cos_angle_to(p_prime));
            h(p) * base.powf(power)
        });
        let smeared = ell * (n as f64 + 1.0) / (4.0 * PI) * val;
        errors.push((n, (target - smeared).abs()));
    }
    let xs: Vec<f64> = errors.iter().map(|&(n, _)| n as f64).collect();
    let ys: Vec<f64> = errors.iter().map(|&(_, e)| e).collect();
    let rate = loglog_fit(&xs, &ys).map(|(slope, _)| slope);
    Ok(DeltaFamilyResult { errors, rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dicke::ground_state;
    use approx::assert_abs_diff_eq;

    fn point(theta: f64, phi: f64) -> SpherePoint {
        SpherePoint::new(theta, phi).unwrap()
    }

    #[test]
    fn sphere_point_wraps_phi_and_checks_theta() {
        let p = point(1.0, 3.0 * PI);
        assert_abs_diff_eq!(p.phi(), PI, epsilon = 1e-12);
        let q = point(1.0, -PI);
        assert_abs_diff_eq!(q.phi(), PI, epsilon = 1e-12);
        assert!(SpherePoint::new(-0.1, 0.0).is_err());
        assert!(SpherePoint::new(PI + 0.1, 0.0).is_err());
        assert_abs_diff_eq!(
            point(PI / 6.0, 0.0).geodesic_distance(&point(5.0 * PI / 6.0, 0.0)),
            2.0 * PI / 3.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn north_pole_components_are_a_point_mass() {
        let c = coherent_components(7, &point(0.0, 0.3)).unwrap();
        assert_abs_diff_eq!(c[7].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(c[7].im, 0.0, epsilon = 1e-15);
        for k in 0..7 {
            assert_eq!(c[k], Complex64::new(0.0, 0.0));
        }
        let south = coherent_components(7, &point(PI, 0.0)).unwrap();
        assert_abs_diff_eq!(south[0].norm(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn components_are_normalized_at_large_n() {
        for &(n, theta, phi) in &[(1usize, 0.7, 0.2), (200, 1.234, -2.1), (200, 3.0, 2.9)] {
            let c = coherent_components(n, &point(theta, phi)).unwrap();
            let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            assert_abs_diff_eq!(norm, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_is_the_single_spin_overlap_to_the_nth_power() {
        let pairs = [
            (point(0.3, 0.5), point(1.9, -2.0)),
            (point(2.8, 1.1), point(0.4, 2.2)),
            (point(1.55, 3.1), point(1.2, -0.7)),
        ];
        for (p, q) in pairs {
            let c1p = coherent_components(1, &p).unwrap();
            let c1q = coherent_components(1, &q).unwrap();
            let single: Complex64 = c1p.iter().zip(c1q.iter()).map(|(a, b)| a.conj() * b).sum();
            let cp = coherent_components(50, &p).unwrap();
            let cq = coherent_components(50, &q).unwrap();
            let many: Complex64 = cp.iter().zip(cq.iter()).map(|(a, b)| a.conj() * b).sum();
            assert_abs_diff_eq!((single.powu(50) - many).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlap_squared_matches_the_component_inner_product() {
        let p = point(1.1, 0.4);
        let q = point(2.0, -1.3);
        assert_abs_diff_eq!(overlap_squared(&p, &p, 77), 1.0, epsilon = 1e-13);
        let antipode = point(PI - 1.1, 0.4 + PI);
        assert_abs_diff_eq!(overlap_squared(&p, &antipode, 9), 0.0, epsilon = 1e-25);
        let cp = coherent_components(100, &p).unwrap();
        let cq = coherent_components(100, &q).unwrap();
        let inner: Complex64 = cp.iter().zip(cq.iter()).map(|(a, b)| a.conj() * b).sum();
        assert_abs_diff_eq!(
            overlap_squared(&p, &q, 100),
            inner.norm_sqr(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn quadrature_weights_total_the_sphere_area() {
        let quad = build_quadrature(12, 8).unwrap();
        let total: f64 = quad.weights().iter().sum();
        assert_abs_diff_eq!(total, 4.0 * PI, epsilon = 1e-12);
        assert_eq!(quad.exactness(), 7);
        assert_eq!(quad.len(), 96);
        assert_eq!(default_quadrature(10).unwrap().exactness(), 23);
    }

    /// Legendre polynomial by the three-term recurrence.
    fn legendre(l: usize, x: f64) -> f64 {
        let (mut p0, mut p1) = (1.0, x);
        if l == 0 {
            return 1.0;
        }
        for j in 1..l {
            let jf = j as f64;
            let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
            p0 = p1;
            p1 = p2;
        }
        p1
    }

    #[test]
    fn quadrature_kills_low_order_harmonics() {
        let quad = build_quadrature(12, 8).unwrap();
        for l in 1..=10 {
            let v = quad.integrate(|p| legendre(l, p.theta().cos()));
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
        let v = quad.integrate(|p| legendre(3, p.theta().cos()) * (2.0 * p.phi()).cos());
        assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn exact_constant_matches_the_closed_form() {
        let quad = default_quadrature(60).unwrap();
        for &ell in &[1.0, 0.5] {
            let v = exact_constant(60, ell, &quad).unwrap();
            assert_abs_diff_eq!(v, exact_constant_reference(60, ell), epsilon = 1e-10);
        }
        assert!(exact_constant(60, 0.7, &quad).is_err());
    }

    #[test]
    fn resolution_of_identity_holds_at_matched_exactness() {
        let quad = build_quadrature(21, 41).unwrap();
        assert_eq!(quad.exactness(), 40);
        let r = resolution_identity_check(10, &quad).unwrap();
        assert!(r <= 1e-12, "residual {r}");
        let coarse = build_quadrature(3, 4).unwrap();
        assert!(resolution_identity_check(10, &coarse).unwrap() > 1e-6);
    }

    #[test]
    fn husimi_profile_has_the_parity_symmetry() {
        let gs = ground_state(60, 1.0, 0.5).unwrap();
        let prof = husimi_profile(&gs.c, 1.0, 31, 24).unwrap();
        assert!(prof.values().iter().all(|&v| v >= 0.0));
        let (nt, np) = (prof.thetas().len(), prof.phis().len());
        for i in 0..nt {
            for j in 0..np {
                let mirrored = prof.value(nt - 1 - i, (np - j) % np);
                assert_abs_diff_eq!(prof.value(i, j), mirrored, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn husimi_peaks_sit_at_the_classical_minima() {
        let n = 60;
        let gs = ground_state(n, 1.0, 0.5).unwrap();
        let prof = husimi_profile(&gs.c, 1.0, n + 2, 2 * n + 4).unwrap();
        let ((p_n, v_n), (p_s, v_s)) = husimi_peaks(&prof);
        let cell_theta = PI / (n + 1) as f64;
        let cell_phi = 2.0 * PI / (2 * n + 4) as f64;
        assert!((p_n.theta() - PI / 6.0).abs() <= cell_theta);
        assert!((p_s.theta() - 5.0 * PI / 6.0).abs() <= cell_theta);
        assert!(p_n.phi().abs() <= cell_phi);
        assert!(p_s.phi().abs() <= cell_phi);
        assert!(v_n > 0.0 && v_s > 0.0);
        let ratio = v_n.min(v_s) / v_n.max(v_s);
        assert!(ratio > 0.99, "peak heights should match, ratio {ratio}");
    }

    #[test]
    fn table_values_match_the_frozen_grid_residues() {
        let gs10 = ground_state(10, 1.0, 0.5).unwrap();
        let t1 = table1_integral(10, &gs10).unwrap();
        assert_abs_diff_eq!(t1, 5.9547298581e-3, epsilon = 1e-9);
        let gs20 = ground_state(20, 1.0, 0.5).unwrap();
        assert_abs_diff_eq!(
            table1_integral(20, &gs20).unwrap(),
            4.0921510974e-4,
            epsilon = 1e-10
        );
        assert_abs_diff_eq!(table2_integral(10, 1.0, &gs10).unwrap(), 0.2558700998, epsilon = 1e-8);
        assert_abs_diff_eq!(table2_integral(10, 0.5, &gs10).unwrap(), 0.4185118795, epsilon = 1e-8);
        let gs50 = ground_state(50, 1.0, 0.5).unwrap();
        let (a, b) = table3_integrals(50, 0.5, &gs50).unwrap();
        assert_abs_diff_eq!(a, 2.7759074353, epsilon = 1e-8);
        assert_abs_diff_eq!(b, 2.7719421504, epsilon = 1e-8);
        let gs80 = ground_state(80, 1.0, 0.5).unwrap();
        let (a1, b1) = table3_integrals(80, 1.0, &gs80).unwrap();
        assert!((a1 - 1.0).abs() <= 1e-3 && (b1 - 1.0).abs() <= 1e-3);
        assert!(table1_integral(11, &gs10).is_err());
    }

    #[test]
    fn off_peak_density_sup_decays_with_n() {
        let mut last = f64::INFINITY;
        for &n in &[50usize, 100, 200] {
            let gs = ground_state(n, 1.0, 0.5).unwrap();
            let s = assumption_c_sup(n, 1.0, &gs, PI / 8.0).unwrap();
            assert!(s < last, "sup {s} did not decrease from {last} at n = {n}");
            last = s;
        }
        let gs = ground_state(100, 1.0, 0.5).unwrap();
        let half = assumption_c_sup(100, 0.5, &gs, PI / 8.0).unwrap();
        let one = assumption_c_sup(100, 1.0, &gs, PI / 8.0).unwrap();
        assert!(half >= one);
        assert_eq!(assumption_c_sup(100, 1.0, &gs, PI).unwrap(), 0.0);
    }

    #[test]
    fn fwhm_matches_the_frozen_widths() {
        let gs = ground_state(50, 1.0, 0.5).unwrap();
        let (wt, wp) = fwhm_scan(50, 1.0, &gs).unwrap();
        assert_abs_diff_eq!(wt, 0.490080, epsilon = 1e-4);
        assert_abs_diff_eq!(wp, 0.906108, epsilon = 1e-4);
        assert!(wt > 0.0 && wt < PI && wp > 0.0 && wp < PI);
        let ratio = wp / wt;
        assert!((1.5..2.5).contains(&ratio), "phi/theta width ratio {ratio}");
    }

    #[test]
    fn delta_family_reproduces_the_constant_bias_exactly() {
        let north = point(0.0, 0.0);
        let res = delta_family_rate(|_| 1.0, &north, 1.0, &[20, 40]).unwrap();
        for &(_, e) in &res.errors {
            assert!(e <= 1e-13, "ell = 1 constant bias {e}");
        }
        let res = delta_family_rate(|_| 1.0, &north, 0.5, &[20, 40]).unwrap();
        for &(n, e) in &res.errors {
            let expected = (1.0 - exact_constant_reference(n, 0.5)).abs();
            assert_abs_diff_eq!(e, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn delta_family_rates_match_the_frozen_slopes() {
        let sizes = [25, 50, 100, 200, 400];
        let north = point(0.0, 0.0);
        let res = delta_family_rate(|p| p.theta().cos(), &north, 1.0, &sizes).unwrap();
        let rate = res.rate.unwrap();
        assert_abs_diff_eq!(rate, -0.975, epsilon = 0.02);
        assert!(rate <= -0.9);
        let res =
            delta_family_rate(|p| p.theta().cos().powi(2), &north, 0.5, &sizes).unwrap();
        let rate = res.rate.unwrap();
        assert_abs_diff_eq!(rate, -0.905, epsilon = 0.02);
        assert!(rate <= -0.5);
    }
}
