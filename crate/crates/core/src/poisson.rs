//! Polynomials on generator coordinates and their Lie-Poisson bracket.
//!
//! A polynomial in the coordinates x_1, ..., x_d (d = k^2 - 1) is stored as
//! a sparse map from exponent vectors to complex coefficients. The bracket
//! is the Lie-Poisson one induced by the structure constants,
//!
//!   {f, g} = s * sum_{r,s,l} C[r][s][l] x_l (df/dx_r)(dg/dx_s),
//!
//! with the overall sign `s` fixed crate-wide by `DEFAULT_BRACKET_SIGN`.
//! The `chi` map identifies a polynomial with its sequence of symmetric
//! tensor coefficients, the form in which quantization consumes it.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{CwqError, Result};
use crate::liealg::{StructureConstants, SuBasis};
use crate::statespace::{membership, StateCoordinates};

/// Sign convention of the Lie-Poisson bracket.
pub const DEFAULT_BRACKET_SIGN: f64 = -1.0;

const PRUNE_EPS: f64 = 1e-15;

/// Sparse polynomial in d commuting real coordinates with complex coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Vec<u16>, Complex64>,
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, value: Complex64) -> Self {
        let mut p = Polynomial::zero(nvars);
        p.accumulate(vec![0; nvars], value);
        p
    }

    /// The coordinate function x_{j+1} (0-based index).
    pub fn coordinate(nvars: usize, j: usize) -> Result<Self> {
        if j >= nvars {
            return Err(CwqError::Dimension(format!(
                "coordinate index {j} out of range for {nvars} variables"
            )));
        }
        let mut exps = vec![0u16; nvars];
        exps[j] = 1;
        let mut p = Polynomial::zero(nvars);
        p.accumulate(exps, re(1.0));
        Ok(p)
    }

    /// A single monomial c * x^exps.
    pub fn monomial(nvars: usize, exps: &[u16], coeff: Complex64) -> Result<Self> {
        if exps.len() != nvars {
            return Err(CwqError::Dimension(format!(
                "exponent vector has length {}, expected {nvars}",
                exps.len()
            )));
        }
        let mut p = Polynomial::zero(nvars);
        p.accumulate(exps.to_vec(), coeff);
        p.prune();
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero polynomial has degree 0.
    pub fn degree(&self) -> usize {
        self.terms
            .keys()
            .map(|e| e.iter().map(|&v| v as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Iterate (exponents, coefficient) in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u16], Complex64)> {
        self.terms.iter().map(|(e, &c)| (e.as_slice(), c))
    }

    fn accumulate(&mut self, exps: Vec<u16>, coeff: Complex64) {
        let slot = self.terms.entry(exps).or_insert(re(0.0));
        *slot += coeff;
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() > PRUNE_EPS);
    }

    fn check_vars(&self, other: &Polynomial) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(CwqError::Dimension(format!(
                "polynomials over {} and {} variables",
                self.nvars, other.nvars
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.accumulate(e.to_vec(), c);
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        self.add(&other.scale(re(-1.0)))
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in self.terms() {
            out.accumulate(e.to_vec(), c * factor);
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_vars(other)?;
        let mut out = Polynomial::zero(self.nvars);
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let exps: Vec<u16> = ea.iter().zip(eb).map(|(&a, &b)| a + b).collect();
                out.accumulate(exps, ca * cb);
            }
        }
        out.prune();
        Ok(out)
    }

    /// Partial derivative with respect to x_{j+1}.
    pub fn partial(&self, j: usize) -> Result<Polynomial> {
        if j >= self.nvars {
            return Err(CwqError::Dimension(format!(
                "coordinate index {j} out of range for {} variables",
                self.nvars
            )));
        }
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in self.terms() {
            if e[j] == 0 {
                continue;
            }
            let mut exps = e.to_vec();
            exps[j] -= 1;
            out.accumulate(exps, c * re(e[j] as f64));
        }
        out.prune();
        Ok(out)
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<Complex64> {
        if x.len() != self.nvars {
            return Err(CwqError::Dimension(format!(
                "point has {} coordinates, expected {}",
                x.len(),
                self.nvars
            )));
        }
        let mut acc = re(0.0);
        for (e, c) in self.terms() {
            let mut m = 1.0;
            for (xi, &ei) in x.iter().zip(e) {
                m *= xi.powi(ei as i32);
            }
            acc += c * re(m);
        }
        Ok(acc)
    }

    /// Largest imaginary part among coefficients, in absolute value.
    pub fn max_imag(&self) -> f64 {
        self.terms().map(|(_, c)| c.im.abs()).fold(0.0, f64::max)
    }

    /// Pull back along the sign map x_j -> signs[j] * x_j.
    pub fn substitute_signs(&self, signs: &[f64]) -> Result<Polynomial> {
        if signs.len() != self.nvars {
            return Err(CwqError::Dimension(format!(
                "sign vector has {} entries, expected {}",
                signs.len(),
                self.nvars
            )));
        }
        let mut out = Polynomial::zero(self.nvars);
        for (e, c) in self.terms() {
            let mut factor = 1.0;
            for (&s, &ei) in signs.iter().zip(e) {
                factor *= s.powi(ei as i32);
            }
            out.accumulate(e.to_vec(), c * re(factor));
        }
        out.prune();
        Ok(out)
    }

    /// Parse an expression such as `x1^2 - 0.5*x3` or `2*x3^2 + x1*x2`.
    ///
    /// Grammar: signed terms joined by `+`/`-`; a term is a `*`-separated
    /// product of factors; a factor is a float literal or `xJ` / `xJ^E`
    /// with 1-based variable index J.
    pub fn parse(nvars: usize, input: &str) -> Result<Polynomial> {
        Parser::new(input).parse_expression(nvars)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms() {
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &ei)| ei > 0)
                .map(|(j, &ei)| {
                    if ei == 1 {
                        format!("x{}", j + 1)
                    } else {
                        format!("x{}^{}", j + 1, ei)
                    }
                })
                .collect();
            let var_part = vars.join("*");
            let (sign_neg, coeff_part) = if c.im == 0.0 {
                let mag = c.re.abs();
                let body = if mag == 1.0 && !var_part.is_empty() {
                    String::new()
                } else {
                    format!("{mag}")
                };
                (c.re < 0.0, body)
            } else {
                (false, format!("({}{}{}i)", c.re, if c.im < 0.0 { "-" } else { "+" }, c.im.abs()))
            };
            if first {
                if sign_neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if sign_neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            match (coeff_part.is_empty(), var_part.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{var_part}")?,
                (false, true) => write!(f, "{coeff_part}")?,
                (false, false) => write!(f, "{coeff_part}*{var_part}")?,
            }
        }
        Ok(())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn new(input: &str) -> Self {
        Parser { chars: input.chars().collect(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.chars.len() && self.chars[self.pos].is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn parse_expression(&mut self, nvars: usize) -> Result<Polynomial> {
        let mut acc = Polynomial::zero(nvars);
        self.skip_ws();
        if self.peek().is_none() {
            return Err(CwqError::Parse("empty expression".into()));
        }
        loop {
            let mut sign = 1.0;
            self.skip_ws();
            match self.peek() {
                Some('+') => {
                    self.pos += 1;
                }
                Some('-') => {
                    sign = -1.0;
                    self.pos += 1;
                }
                _ => {}
            }
            let term = self.parse_term(nvars)?;
            acc = acc.add(&term.scale(re(sign)))?;
            self.skip_ws();
            match self.peek() {
                None => break,
                Some('+') | Some('-') => continue,
                Some(c) => {
                    return Err(CwqError::Parse(format!(
                        "unexpected character '{c}' at position {}",
                        self.pos
                    )))
                }
            }
        }
        Ok(acc)
    }

    fn parse_term(&mut self, nvars: usize) -> Result<Polynomial> {
        let mut acc = self.parse_factor(nvars)?;
        loop {
            self.skip_ws();
            if self.peek() == Some('*') {
                self.pos += 1;
                self.skip_ws();
                let factor = self.parse_factor(nvars)?;
                acc = acc.mul(&factor)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn parse_factor(&mut self, nvars: usize) -> Result<Polynomial> {
        self.skip_ws();
        match self.peek() {
            Some('x') => {
                self.pos += 1;
                let idx = self.parse_uint()?;
                if idx == 0 || idx > nvars {
                    return Err(CwqError::Parse(format!(
                        "variable x{idx} out of range, expected x1..x{nvars}"
                    )));
                }
                let exp = if self.peek() == Some('^') {
                    self.pos += 1;
                    let e = self.parse_uint()?;
                    u16::try_from(e).map_err(|_| CwqError::Parse(format!("exponent {e} too large")))?
                } else {
                    1
                };
                let mut exps = vec![0u16; nvars];
                exps[idx - 1] = exp;
                Polynomial::monomial(nvars, &exps, re(1.0))
            }
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let value = self.parse_number()?;
                Ok(Polynomial::constant(nvars, re(value)))
            }
            Some(c) => Err(CwqError::Parse(format!(
                "unexpected character '{c}' at position {}",
                self.pos
            ))),
            None => Err(CwqError::Parse("unexpected end of expression".into())),
        }
    }

    fn parse_uint(&mut self) -> Result<usize> {
        let start = self.pos;
        while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(CwqError::Parse(format!("expected digits at position {start}")));
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<usize>()
            .map_err(|e| CwqError::Parse(format!("bad integer '{s}': {e}")))
    }

    fn parse_number(&mut self) -> Result<f64> {
        let start = self.pos;
        while self.pos < self.chars.len()
            && (self.chars[self.pos].is_ascii_digit() || self.chars[self.pos] == '.')
        {
            self.pos += 1;
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < self.chars.len() && self.chars[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if digits_start == self.pos {
                return Err(CwqError::Parse(format!(
                    "malformed exponent at position {digits_start}"
                )));
            }
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        s.parse::<f64>()
            .map_err(|e| CwqError::Parse(format!("bad number '{s}': {e}")))
    }
}

/// Lie-Poisson bracket with the crate default sign.
pub fn poisson_bracket(
    f: &Polynomial,
    g: &Polynomial,
    constants: &StructureConstants,
) -> Result<Polynomial> {
    poisson_bracket_signed(f, g, constants, DEFAULT_BRACKET_SIGN)
}

/// Lie-Poisson bracket with an explicit overall sign.
pub fn poisson_bracket_signed(
    f: &Polynomial,
    g: &Polynomial,
    constants: &StructureConstants,
    sign: f64,
) -> Result<Polynomial> {
    f.check_vars(g)?;
    let d = constants.dim();
    if f.nvars() != d {
        return Err(CwqError::Dimension(format!(
            "polynomials over {} variables, structure constants over {d}",
            f.nvars()
        )));
    }
    let mut out = Polynomial::zero(d);
    for (ef, cf) in f.terms() {
        for (eg, cg) in g.terms() {
            for &(r, s, l, c) in constants.nonzero() {
                if ef[r] == 0 || eg[s] == 0 {
                    continue;
                }
                let coeff = cf * cg * re(sign * c * ef[r] as f64 * eg[s] as f64);
                let mut exps = ef.to_vec();
                exps[r] -= 1;
                for (slot, &ei) in exps.iter_mut().zip(eg) {
                    *slot += ei;
                }
                exps[s] -= 1;
                exps[l] += 1;
                out.accumulate(exps, coeff);
            }
        }
    }
    out.prune();
    Ok(out)
}

/// A polynomial presented as its sequence of symmetric tensor coefficients.
///
/// Level L holds one coefficient per sorted index tuple (i_1 <= ... <= i_L);
/// the value is the symmetric tensor entry S[i_1, ..., i_L], related to the
/// monomial coefficient c of x^alpha by c = S * L! / prod_j alpha_j!.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolElement {
    nvars: usize,
    levels: BTreeMap<Vec<u16>, Complex64>,
}

impl SymbolElement {
    pub fn nvars(&self) -> usize {
        self.nvars
    }

    /// Iterate (sorted index tuple, tensor entry); the empty tuple is the
    /// constant part.
    pub fn entries(&self) -> impl Iterator<Item = (&[u16], Complex64)> {
        self.levels.iter().map(|(t, &c)| (t.as_slice(), c))
    }

    pub fn get(&self, tuple: &[u16]) -> Complex64 {
        let mut key = tuple.to_vec();
        key.sort_unstable();
        self.levels.get(&key).copied().unwrap_or(re(0.0))
    }

    pub fn degree(&self) -> usize {
        self.levels.keys().map(|t| t.len()).max().unwrap_or(0)
    }
}

fn ln_multiset_permutations(exps: &[u16]) -> f64 {
    let total: u64 = exps.iter().map(|&e| e as u64).sum();
    let mut v = crate::numerics::ln_factorial(total);
    for &e in exps {
        v -= crate::numerics::ln_factorial(e as u64);
    }
    v
}

/// Expand a polynomial into its symmetric tensor coefficients.
pub fn chi(f: &Polynomial) -> SymbolElement {
    let mut levels = BTreeMap::new();
    for (e, c) in f.terms() {
        let mut tuple = Vec::new();
        for (j, &ej) in e.iter().enumerate() {
            for _ in 0..ej {
                tuple.push(j as u16);
            }
        }
        let scale = (-ln_multiset_permutations(e)).exp();
        levels.insert(tuple, c * re(scale));
    }
    SymbolElement { nvars: f.nvars(), levels }
}

/// Rebuild the polynomial from its symmetric tensor coefficients.
pub fn chi_inverse(s: &SymbolElement) -> Polynomial {
    let mut out = Polynomial::zero(s.nvars());
    for (tuple, c) in s.entries() {
        let mut exps = vec![0u16; s.nvars()];
        for &idx in tuple {
            exps[idx as usize] += 1;
        }
        let scale = ln_multiset_permutations(&exps).exp();
        out.accumulate(exps, c * re(scale));
    }
    out.prune();
    out
}

/// Monte Carlo estimate of sup |f| over the state space.
///
/// Uniform candidates in the ball that circumscribes the state space are
/// filtered through `membership`, then the best few are polished by a
/// shrinking random walk constrained to remain inside.
pub fn sup_norm_estimate(
    f: &Polynomial,
    basis: &SuBasis,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    let d = basis.dim();
    if f.nvars() != d {
        return Err(CwqError::Dimension(format!(
            "polynomial over {} variables, basis needs {d}",
            f.nvars()
        )));
    }
    let k = basis.k() as f64;
    let radius = (basis.generator_norm_sq() * (1.0 - 1.0 / k)).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss_spare: Option<f64> = None;
    let mut gauss = move |rng: &mut ChaCha8Rng| -> f64 {
        if let Some(v) = gauss_spare.take() {
            return v;
        }
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        gauss_spare = Some(r * s);
        r * c
    };

    let value_at = |point: &[f64]| -> Result<Option<f64>> {
        let x = StateCoordinates::new(basis.k(), point.to_vec())?;
        if !membership(&x, basis)?.is_state {
            return Ok(None);
        }
        Ok(Some(f.evaluate(point)?.norm()))
    };

    const TOP: usize = 12;
    let mut best: Vec<(f64, Vec<f64>)> = Vec::new();
    let origin = vec![0.0; d];
    if let Some(v) = value_at(&origin)? {
        best.push((v, origin));
    }
    for _ in 0..samples.max(64) {
        let dir: Vec<f64> = (0..d).map(|_| gauss(&mut rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300);
        let r = radius * rng.gen::<f64>().powf(1.0 / d as f64);
        let point: Vec<f64> = dir.iter().map(|v| v * r / norm).collect();
        if let Some(v) = value_at(&point)? {
            best.push((v, point));
            best.sort_by(|a, b| b.0.total_cmp(&a.0));
            best.truncate(TOP);
        }
    }
    if best.is_empty() {
        return Err(CwqError::Numerical(
            "no sample landed inside the state space".into(),
        ));
    }

    let mut overall = best[0].0;
    for (start_value, start) in best {
        let mut current = start;
        let mut current_value = start_value;
        let mut sigma = 0.08 * radius;
        for _ in 0..70 {
            for _ in 0..6 {
                let candidate: Vec<f64> = current
                    .iter()
                    .map(|&v| v + sigma * gauss(&mut rng))
                    .collect();
                if let Some(v) = value_at(&candidate)? {
                    if v > current_value {
                        current_value = v;
                        current = candidate;
                    }
                }
            }
            sigma *= 0.9;
        }
        overall = overall.max(current_value);
    }
    Ok(overall)
}
