//! Symmetrization and quantization on N-fold tensor powers of C^k.
//!
//! Site 0 is the most significant digit of a tensor-product index, so the
//! operator at site s acts on digit s of a base-k expansion. Monomials
//! quantize through symmetrized words,
//!
//!   Q(x^alpha) = S(b^alpha tensor I^(N-L)), L = |alpha|,
//!
//! where the symmetrization averages over the D = N!/((N-L)! prod alpha_j!)
//! distinct placements of the generator multiset onto the N sites. Operators
//! built this way are kept in word form (a sum of few-site kernels), which
//! supports matrix-free application at dimensions where a dense matrix would
//! not fit.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{CwqError, Result};
use crate::liealg::{CMatrix, SuBasis};
use crate::numerics::{ln_factorial, operator_norm};
use crate::poisson::Polynomial;
use crate::statespace::{f_k_matrix, membership, StateCoordinates};

/// Largest tensor-space dimension for which dense matrices may be built.
pub const DENSE_DIM_CAP: usize = 16384;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// k^sites, guarded by `DENSE_DIM_CAP`.
pub fn dense_dim(k: usize, sites: usize) -> Result<usize> {
    if k < 2 || sites == 0 {
        return Err(CwqError::Dimension(format!(
            "need k >= 2 and sites >= 1, got k = {k}, sites = {sites}"
        )));
    }
    let mut dim: usize = 1;
    for _ in 0..sites {
        dim = dim
            .checked_mul(k)
            .filter(|&d| d <= DENSE_DIM_CAP)
            .ok_or_else(|| {
                CwqError::Size(format!(
                    "dimension k^sites = {k}^{sites} exceeds the dense cap {DENSE_DIM_CAP}"
                ))
            })?;
    }
    Ok(dim)
}

/// Matrix-free dimension guard for word operators.
fn word_dim(k: usize, sites: usize) -> Result<usize> {
    if k < 2 || sites == 0 {
        return Err(CwqError::Dimension(format!(
            "need k >= 2 and sites >= 1, got k = {k}, sites = {sites}"
        )));
    }
    let mut dim: usize = 1;
    for _ in 0..sites {
        dim = dim
            .checked_mul(k)
            .filter(|&d| d <= (1 << 22))
            .ok_or_else(|| {
                CwqError::Size(format!(
                    "dimension k^sites = {k}^{sites} exceeds the word-operator cap 2^22"
                ))
            })?;
    }
    Ok(dim)
}

/// A dense operator on (C^k)^(tensor sites).
#[derive(Debug, Clone)]
pub struct DenseOperator {
    k: usize,
    sites: usize,
    mat: CMatrix,
}

impl DenseOperator {
    pub fn identity(k: usize, sites: usize) -> Result<Self> {
        let dim = dense_dim(k, sites)?;
        Ok(DenseOperator { k, sites, mat: CMatrix::identity(dim, dim) })
    }

    pub fn from_matrix(k: usize, sites: usize, mat: CMatrix) -> Result<Self> {
        let dim = dense_dim(k, sites)?;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(CwqError::Dimension(format!(
                "matrix is {}x{}, expected {dim}x{dim}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(DenseOperator { k, sites, mat })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    fn check_shape(&self, other: &DenseOperator) -> Result<()> {
        if self.k != other.k || self.sites != other.sites {
            return Err(CwqError::Dimension(format!(
                "operators on k = {} sites = {} and k = {} sites = {}",
                self.k, self.sites, other.k, other.sites
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_shape(other)?;
        Ok(DenseOperator { k: self.k, sites: self.sites, mat: &self.mat + &other.mat })
    }

    pub fn sub(&self, other: &DenseOperator) -> Result<DenseOperator> {
        self.check_shape(other)?;
        Ok(DenseOperator { k: self.k, sites: self.sites, mat: &self.mat - &other.mat })
    }

    pub fn scale(&self, factor: Complex64) -> DenseOperator {
        DenseOperator { k: self.k, sites: self.sites, mat: &self.mat * factor }
    }
}

/// AB - BA for dense operators of matching shape.
pub fn commutator(a: &DenseOperator, b: &DenseOperator) -> Result<DenseOperator> {
    a.check_shape(b)?;
    let mat = &a.mat * &b.mat - &b.mat * &a.mat;
    Ok(DenseOperator { k: a.k, sites: a.sites, mat })
}

/// Operator norm of a dense operator: exact Gram spectrum at small
/// dimension, Lanczos on A^dagger A above.
pub fn operator_norm_dense(a: &DenseOperator) -> f64 {
    let dim = a.dim();
    if dim <= 512 {
        let gram = a.mat.adjoint() * &a.mat;
        let top = gram
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .fold(0.0f64, f64::max);
        return top.max(0.0).sqrt();
    }
    let apply = |x: &[Complex64], y: &mut [Complex64]| dense_matvec(&a.mat, x, y, false);
    let apply_adj = |x: &[Complex64], y: &mut [Complex64]| dense_matvec(&a.mat, x, y, true);
    operator_norm(dim, apply, apply_adj, 0x5eed)
}

fn dense_matvec(m: &CMatrix, x: &[Complex64], y: &mut [Complex64], adjoint: bool) {
    y.fill(ZERO);
    let (rows, cols) = (m.nrows(), m.ncols());
    if adjoint {
        // column-major walk: y[c] = sum_r conj(m[r, c]) x[r]
        for c in 0..cols {
            let mut acc = ZERO;
            for r in 0..rows {
                acc += m[(r, c)].conj() * x[r];
            }
            y[c] = acc;
        }
    } else {
        for c in 0..cols {
            let xc = x[c];
            if xc == ZERO {
                continue;
            }
            for r in 0..rows {
                y[r] += m[(r, c)] * xc;
            }
        }
    }
}

/// Iterated Kronecker product, site 0 first (most significant).
pub fn elementary_tensor(factors: &[CMatrix]) -> Result<CMatrix> {
    let first = factors
        .first()
        .ok_or_else(|| CwqError::Dimension("empty factor list".into()))?;
    let mut acc = first.clone();
    for f in &factors[1..] {
        acc = acc.kronecker(f);
    }
    Ok(acc)
}

/// Place `a` at one site of an N-site tensor product, identity elsewhere.
pub fn embed(a: &CMatrix, site: usize, sites: usize) -> Result<DenseOperator> {
    let k = a.nrows();
    if a.ncols() != k {
        return Err(CwqError::Dimension("embedded factor must be square".into()));
    }
    if site >= sites {
        return Err(CwqError::Dimension(format!(
            "site {site} out of range for {sites} sites"
        )));
    }
    dense_dim(k, sites)?;
    let eye = CMatrix::identity(k, k);
    let factors: Vec<CMatrix> = (0..sites)
        .map(|s| if s == site { a.clone() } else { eye.clone() })
        .collect();
    let mat = elementary_tensor(&factors)?;
    DenseOperator::from_matrix(k, sites, mat)
}

fn multiset_arrangement_count(counts: &[usize]) -> f64 {
    let total: u64 = counts.iter().map(|&c| c as u64).sum();
    let mut ln = ln_factorial(total);
    for &c in counts {
        ln -= ln_factorial(c as u64);
    }
    ln.exp().round()
}

/// Symmetrize an elementary tensor: average over the distinct arrangements
/// of the factor multiset.
pub fn symmetrize(factors: &[CMatrix]) -> Result<DenseOperator> {
    let sites = factors.len();
    let k = factors
        .first()
        .ok_or_else(|| CwqError::Dimension("empty factor list".into()))?
        .nrows();
    for f in factors {
        if f.nrows() != k || f.ncols() != k {
            return Err(CwqError::Dimension("factors must be square of equal size".into()));
        }
    }
    let dim = dense_dim(k, sites)?;
    if dim > 4096 {
        return Err(CwqError::Size(format!(
            "symmetrization materializes dense matrices; dimension {dim} exceeds 4096"
        )));
    }

    // group bitwise-identical factors
    let mut distinct: Vec<CMatrix> = Vec::new();
    let mut group: Vec<usize> = Vec::with_capacity(sites);
    for f in factors {
        let same = |a: &CMatrix| {
            a.iter()
                .zip(f.iter())
                .all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits())
        };
        match distinct.iter().position(same) {
            Some(i) => group.push(i),
            None => {
                distinct.push(f.clone());
                group.push(distinct.len() - 1);
            }
        }
    }
    let mut counts = vec![0usize; distinct.len()];
    for &g in &group {
        counts[g] += 1;
    }
    let total = multiset_arrangement_count(&counts);
    if total > 2e5 {
        return Err(CwqError::Size(format!(
            "{total} distinct arrangements exceed the symmetrization budget"
        )));
    }

    let mut acc = CMatrix::zeros(dim, dim);
    let mut arrangement: Vec<usize> = Vec::with_capacity(sites);
    fn rec(
        counts: &mut [usize],
        arrangement: &mut Vec<usize>,
        sites: usize,
        distinct: &[CMatrix],
        acc: &mut CMatrix,
    ) -> Result<()> {
        if arrangement.len() == sites {
            let factors: Vec<CMatrix> = arrangement.iter().map(|&g| distinct[g].clone()).collect();
            *acc += elementary_tensor(&factors)?;
            return Ok(());
        }
        for g in 0..counts.len() {
            if counts[g] == 0 {
                continue;
            }
            counts[g] -= 1;
            arrangement.push(g);
            rec(counts, arrangement, sites, distinct, acc)?;
            arrangement.pop();
            counts[g] += 1;
        }
        Ok(())
    }
    rec(&mut counts, &mut arrangement, sites, &distinct, &mut acc)?;
    acc /= Complex64::new(total, 0.0);
    DenseOperator::from_matrix(k, sites, acc)
}

/// One placed word: a coefficient times generators at distinct sites.
#[derive(Debug, Clone)]
struct WordTerm {
    coeff: Complex64,
    sites: Vec<u32>,
    gens: Vec<u8>,
    kernel: usize,
    offsets: Vec<usize>,
}

/// A sum of placed words plus a multiple of the identity, applied
/// matrix-free.
#[derive(Debug, Clone)]
pub struct WordOperator {
    k: usize,
    sites: usize,
    dim: usize,
    identity_coeff: Complex64,
    kernels: Vec<CMatrix>,
    terms: Vec<WordTerm>,
}

/// Accumulates words before kernels and offsets are laid out.
#[derive(Debug, Clone)]
pub struct WordOperatorBuilder {
    k: usize,
    sites: usize,
    identity: Complex64,
    words: BTreeMap<(Vec<u32>, Vec<u8>), Complex64>,
}

impl WordOperatorBuilder {
    pub fn new(k: usize, sites: usize) -> Result<Self> {
        word_dim(k, sites)?;
        Ok(WordOperatorBuilder { k, sites, identity: ZERO, words: BTreeMap::new() })
    }

    pub fn add_identity(&mut self, coeff: Complex64) {
        self.identity += coeff;
    }

    /// Add coeff times a product of generators at pairwise distinct sites.
    pub fn add_word(&mut self, coeff: Complex64, placements: &[(u32, u8)]) -> Result<()> {
        if placements.is_empty() {
            self.add_identity(coeff);
            return Ok(());
        }
        let gen_count = (self.k * self.k - 1) as u8;
        let mut sorted = placements.to_vec();
        sorted.sort_unstable_by_key(|&(s, _)| s);
        for w in sorted.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(CwqError::Dimension(format!(
                    "site {} appears twice in a word",
                    w[0].0
                )));
            }
        }
        for &(s, g) in &sorted {
            if s as usize >= self.sites {
                return Err(CwqError::Dimension(format!(
                    "site {s} out of range for {} sites",
                    self.sites
                )));
            }
            if g >= gen_count {
                return Err(CwqError::Dimension(format!(
                    "generator index {g} out of range for su({})",
                    self.k
                )));
            }
        }
        let (sites, gens): (Vec<u32>, Vec<u8>) = sorted.into_iter().unzip();
        *self.words.entry((sites, gens)).or_insert(ZERO) += coeff;
        Ok(())
    }

    pub fn build(self, basis: &SuBasis) -> Result<WordOperator> {
        if basis.k() != self.k {
            return Err(CwqError::Dimension(format!(
                "builder is for k = {}, basis for k = {}",
                self.k,
                basis.k()
            )));
        }
        let dim = word_dim(self.k, self.sites)?;
        let mut kernels: Vec<CMatrix> = Vec::new();
        let mut kernel_index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
        let mut terms = Vec::with_capacity(self.words.len());
        for ((sites, gens), coeff) in self.words {
            if coeff.norm() <= 1e-18 {
                continue;
            }
            let kernel = match kernel_index.get(&gens) {
                Some(&i) => i,
                None => {
                    let factors: Vec<CMatrix> =
                        gens.iter().map(|&g| basis.generator(g as usize).clone()).collect();
                    kernels.push(elementary_tensor(&factors)?);
                    kernel_index.insert(gens.clone(), kernels.len() - 1);
                    kernels.len() - 1
                }
            };
            let offsets = site_offsets(self.k, self.sites, &sites);
            terms.push(WordTerm { coeff, sites, gens, kernel, offsets });
        }
        Ok(WordOperator {
            k: self.k,
            sites: self.sites,
            dim,
            identity_coeff: self.identity,
            kernels,
            terms,
        })
    }
}

/// Full-index offsets of every local configuration of the listed sites.
fn site_offsets(k: usize, sites: usize, word_sites: &[u32]) -> Vec<usize> {
    let strides: Vec<usize> = word_sites
        .iter()
        .map(|&s| k.pow((sites - 1 - s as usize) as u32))
        .collect();
    let l = word_sites.len();
    let local_dim = k.pow(l as u32);
    let mut offsets = vec![0usize; local_dim];
    for (a, slot) in offsets.iter_mut().enumerate() {
        let mut rem = a;
        let mut off = 0;
        for t in (0..l).rev() {
            off += (rem % k) * strides[t];
            rem /= k;
        }
        *slot = off;
    }
    offsets
}

impl WordOperator {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn identity_coeff(&self) -> Complex64 {
        self.identity_coeff
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterate the placed words as (coefficient, sites, generators).
    pub fn words(&self) -> impl Iterator<Item = (Complex64, &[u32], &[u8])> {
        self.terms.iter().map(|t| (t.coeff, t.sites.as_slice(), t.gens.as_slice()))
    }

    /// Largest coefficient imaginary part; zero means the operator is
    /// Hermitian (kernels are products of Hermitian generators).
    pub fn max_imag_coeff(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coeff.im.abs())
            .fold(self.identity_coeff.im.abs(), f64::max)
    }

    pub fn scale(&self, factor: Complex64) -> WordOperator {
        let mut out = self.clone();
        out.identity_coeff *= factor;
        for t in &mut out.terms {
            t.coeff *= factor;
        }
        out
    }

    /// y = A x (y is overwritten).
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_impl(x, y, false)
    }

    /// y = A^dagger x (y is overwritten).
    pub fn apply_adjoint(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.apply_impl(x, y, true)
    }

    fn apply_impl(&self, x: &[Complex64], y: &mut [Complex64], adjoint: bool) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        let id = if adjoint { self.identity_coeff.conj() } else { self.identity_coeff };
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = id * xi;
        }
        let k = self.k;
        for term in &self.terms {
            let coeff = if adjoint { term.coeff.conj() } else { term.coeff };
            let kernel = &self.kernels[term.kernel];
            let local_dim = term.offsets.len();
            let outer_positions: Vec<usize> = {
                let taken: Vec<usize> = term.sites.iter().map(|&s| s as usize).collect();
                (0..self.sites).filter(|s| !taken.contains(s)).collect()
            };
            let outer_strides: Vec<usize> = outer_positions
                .iter()
                .map(|&s| k.pow((self.sites - 1 - s) as u32))
                .collect();
            let mut sub = vec![ZERO; local_dim];
            let mut out = vec![ZERO; local_dim];
            let mut digits = vec![0usize; outer_positions.len()];
            let mut base = 0usize;
            loop {
                for (a, slot) in sub.iter_mut().enumerate() {
                    *slot = x[base + term.offsets[a]];
                }
                for (r, slot) in out.iter_mut().enumerate() {
                    let mut acc = ZERO;
                    for (c, &sc) in sub.iter().enumerate() {
                        let e = kernel[(r, c)];
                        if e != ZERO {
                            acc += e * sc;
                        }
                    }
                    *slot = acc;
                }
                for (r, &v) in out.iter().enumerate() {
                    y[base + term.offsets[r]] += coeff * v;
                }
                // odometer over the outer digits
                let mut pos = digits.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    base += outer_strides[pos];
                    if digits[pos] < k {
                        break;
                    }
                    digits[pos] = 0;
                    base -= k * outer_strides[pos];
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
    }

    /// Materialize as a dense matrix, subject to the dense cap.
    pub fn to_dense(&self, basis: &SuBasis) -> Result<DenseOperator> {
        if basis.k() != self.k {
            return Err(CwqError::Dimension(format!(
                "operator is for k = {}, basis for k = {}",
                self.k,
                basis.k()
            )));
        }
        let dim = dense_dim(self.k, self.sites)?;
        let mut mat = CMatrix::identity(dim, dim) * self.identity_coeff;
        let k = self.k;
        for term in &self.terms {
            let kernel = &self.kernels[term.kernel];
            let local_dim = term.offsets.len();
            let outer_positions: Vec<usize> = {
                let taken: Vec<usize> = term.sites.iter().map(|&s| s as usize).collect();
                (0..self.sites).filter(|s| !taken.contains(s)).collect()
            };
            let outer_strides: Vec<usize> = outer_positions
                .iter()
                .map(|&s| k.pow((self.sites - 1 - s) as u32))
                .collect();
            let mut digits = vec![0usize; outer_positions.len()];
            let mut base = 0usize;
            loop {
                for r in 0..local_dim {
                    for c in 0..local_dim {
                        let e = kernel[(r, c)];
                        if e != ZERO {
                            mat[(base + term.offsets[r], base + term.offsets[c])] +=
                                term.coeff * e;
                        }
                    }
                }
                let mut pos = digits.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    digits[pos] += 1;
                    base += outer_strides[pos];
                    if digits[pos] < k {
                        break;
                    }
                    digits[pos] = 0;
                    base -= k * outer_strides[pos];
                }
                if digits.iter().all(|&d| d == 0) {
                    break;
                }
            }
        }
        DenseOperator::from_matrix(self.k, self.sites, mat)
    }

    /// Operator norm via Lanczos on A^dagger A.
    pub fn norm(&self, seed: u64) -> f64 {
        let apply = |x: &[Complex64], y: &mut [Complex64]| self.apply(x, y);
        let apply_adj = |x: &[Complex64], y: &mut [Complex64]| self.apply_adjoint(x, y);
        operator_norm(self.dim, apply, apply_adj, seed)
    }

    /// Extremal eigenvalues (min, max); requires real coefficients.
    pub fn hermitian_extremes(&self, seed: u64) -> Result<(f64, f64)> {
        if self.max_imag_coeff() > 1e-12 {
            return Err(CwqError::Numerical(format!(
                "coefficients have imaginary residue {:.3e}, operator is not Hermitian",
                self.max_imag_coeff()
            )));
        }
        let apply = |x: &[Complex64], y: &mut [Complex64]| self.apply(x, y);
        Ok(crate::numerics::hermitian_extremes(self.dim, apply, seed))
    }
}

/// a * ca + b * cb as a word operator, merging identical words.
pub fn word_scaled_sum(
    a: &WordOperator,
    ca: Complex64,
    b: &WordOperator,
    cb: Complex64,
) -> Result<WordOperator> {
    if a.k != b.k || a.sites != b.sites {
        return Err(CwqError::Dimension(format!(
            "operators on k = {} sites = {} and k = {} sites = {}",
            a.k, a.sites, b.k, b.sites
        )));
    }
    let mut merged: BTreeMap<(Vec<u32>, Vec<u8>), Complex64> = BTreeMap::new();
    let mut kernel_src: BTreeMap<Vec<u8>, CMatrix> = BTreeMap::new();
    for (op, f) in [(a, ca), (b, cb)] {
        for t in &op.terms {
            *merged.entry((t.sites.clone(), t.gens.clone())).or_insert(ZERO) += f * t.coeff;
            kernel_src
                .entry(t.gens.clone())
                .or_insert_with(|| op.kernels[t.kernel].clone());
        }
    }
    let mut kernels: Vec<CMatrix> = Vec::new();
    let mut kernel_index: BTreeMap<Vec<u8>, usize> = BTreeMap::new();
    let mut terms = Vec::new();
    for ((sites, gens), coeff) in merged {
        if coeff.norm() <= 1e-18 {
            continue;
        }
        let kernel = match kernel_index.get(&gens) {
            Some(&i) => i,
            None => {
                kernels.push(kernel_src[&gens].clone());
                kernel_index.insert(gens.clone(), kernels.len() - 1);
                kernels.len() - 1
            }
        };
        let offsets = site_offsets(a.k, a.sites, &sites);
        terms.push(WordTerm { coeff, sites, gens, kernel, offsets });
    }
    Ok(WordOperator {
        k: a.k,
        sites: a.sites,
        dim: a.dim,
        identity_coeff: ca * a.identity_coeff + cb * b.identity_coeff,
        kernels,
        terms,
    })
}

/// Enumerate all distinct placements of a generator multiset onto n sites;
/// each visit receives (site, generator) pairs sorted by site.
fn enumerate_placements<F: FnMut(&[(u32, u8)])>(
    n: usize,
    mults: &[(u8, u16)],
    visit: &mut F,
) {
    let free: Vec<u32> = (0..n as u32).collect();
    let mut assignment: Vec<(u32, u8)> = Vec::new();
    place_level(mults, &free, &mut assignment, visit);
}

fn place_level<F: FnMut(&[(u32, u8)])>(
    mults: &[(u8, u16)],
    free: &[u32],
    assignment: &mut Vec<(u32, u8)>,
    visit: &mut F,
) {
    let Some((&(gen, count), rest)) = mults.split_first() else {
        let mut sorted = assignment.clone();
        sorted.sort_unstable_by_key(|&(s, _)| s);
        visit(&sorted);
        return;
    };
    let m = count as usize;
    if m == 0 {
        place_level(rest, free, assignment, visit);
        return;
    }
    if m > free.len() {
        return;
    }
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let depth = assignment.len();
        for &i in &idx {
            assignment.push((free[i], gen));
        }
        let remaining: Vec<u32> = free
            .iter()
            .enumerate()
            .filter(|(i, _)| !idx.contains(i))
            .map(|(_, &s)| s)
            .collect();
        place_level(rest, &remaining, assignment, visit);
        assignment.truncate(depth);

        let mut j = m;
        let advanced = loop {
            if j == 0 {
                break false;
            }
            j -= 1;
            if idx[j] != j + free.len() - m {
                idx[j] += 1;
                for t in (j + 1)..m {
                    idx[t] = idx[t - 1] + 1;
                }
                break true;
            }
        };
        if !advanced {
            return;
        }
    }
}

/// Number of distinct placements of a multiset with the given
/// multiplicities onto n sites: n! / ((n - L)! prod alpha_j!).
fn placement_count(n: usize, mults: &[(u8, u16)]) -> f64 {
    let l: u64 = mults.iter().map(|&(_, c)| c as u64).sum();
    let mut ln = ln_factorial(n as u64) - ln_factorial(n as u64 - l);
    for &(_, c) in mults {
        ln -= ln_factorial(c as u64);
    }
    ln.exp().round()
}

/// Quantize a polynomial onto n sites in word form.
///
/// Monomials of degree above n map to zero; the constant term maps to a
/// multiple of the identity.
pub fn quantize_words(f: &Polynomial, n: usize, basis: &SuBasis) -> Result<WordOperator> {
    let d = basis.dim();
    if f.nvars() != d {
        return Err(CwqError::Dimension(format!(
            "polynomial over {} variables, basis needs {d}",
            f.nvars()
        )));
    }
    let mut builder = WordOperatorBuilder::new(basis.k(), n)?;
    for (exps, coeff) in f.terms() {
        let degree: usize = exps.iter().map(|&e| e as usize).sum();
        if degree == 0 {
            builder.add_identity(coeff);
            continue;
        }
        if degree > n {
            continue;
        }
        let mults: Vec<(u8, u16)> = exps
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > 0)
            .map(|(j, &e)| (j as u8, e))
            .collect();
        let count = placement_count(n, &mults);
        let weight = coeff / Complex64::new(count, 0.0);
        let mut err = Ok(());
        enumerate_placements(n, &mults, &mut |placement| {
            if err.is_ok() {
                err = builder.add_word(weight, placement);
            }
        });
        err?;
    }
    builder.build(basis)
}

/// Quantize a polynomial onto n sites as a dense operator.
pub fn quantize(f: &Polynomial, n: usize, basis: &SuBasis) -> Result<DenseOperator> {
    dense_dim(basis.k(), n)?;
    quantize_words(f, n, basis)?.to_dense(basis)
}

/// Symmetric injection of an M-site operator into N sites: decompose over
/// words in {I, b_1, ..., b_(k^2-1)} per site, then average each word over
/// all placements.
pub fn inject(b: &DenseOperator, n: usize, basis: &SuBasis) -> Result<DenseOperator> {
    let m = b.sites();
    let k = b.k();
    if basis.k() != k {
        return Err(CwqError::Dimension(format!(
            "operator is for k = {k}, basis for k = {}",
            basis.k()
        )));
    }
    if m > n {
        return Err(CwqError::Dimension(format!(
            "cannot inject {m} sites into {n}"
        )));
    }
    dense_dim(k, n)?;
    let d = basis.dim();
    let letters: usize = d + 1;
    let local = b.dim();
    let cost = (letters as f64).powi(m as i32) * (local as f64) * (local as f64);
    if cost > 2.5e8 {
        return Err(CwqError::Size(format!(
            "word decomposition cost {cost:.2e} exceeds the budget; reduce the source sites"
        )));
    }

    // letter matrices and their squared Frobenius norms
    let mut letter_mats: Vec<CMatrix> = Vec::with_capacity(letters);
    letter_mats.push(CMatrix::identity(k, k));
    for g in basis.generators() {
        letter_mats.push(g.clone());
    }
    let mut letter_norm = vec![k as f64];
    letter_norm.extend(std::iter::repeat_n(basis.generator_norm_sq(), d));

    // digit tables for the M-site indices
    let digit = |mut a: usize| -> Vec<usize> {
        let mut out = vec![0usize; m];
        for t in (0..m).rev() {
            out[t] = a % k;
            a /= k;
        }
        out
    };
    let rdigits: Vec<Vec<usize>> = (0..local).map(digit).collect();

    let mut builder = WordOperatorBuilder::new(k, n)?;
    let mut word = vec![0usize; m];
    loop {
        // c_w = <E_w, B> / prod_t norm(w_t)
        let mut inner = ZERO;
        for r in 0..local {
            for c in 0..local {
                let entry = b.matrix()[(r, c)];
                if entry == ZERO {
                    continue;
                }
                let mut factor = ONE;
                for t in 0..m {
                    let e = letter_mats[word[t]][(rdigits[r][t], rdigits[c][t])];
                    if e == ZERO {
                        factor = ZERO;
                        break;
                    }
                    factor *= e;
                }
                if factor != ZERO {
                    inner += entry * factor.conj();
                }
            }
        }
        let mut norm = 1.0;
        for &w in &word {
            norm *= letter_norm[w];
        }
        let coeff = inner / Complex64::new(norm, 0.0);
        if coeff.norm() > 1e-14 {
            let mut mult_map: BTreeMap<u8, u16> = BTreeMap::new();
            for &w in &word {
                if w > 0 {
                    *mult_map.entry((w - 1) as u8).or_insert(0) += 1;
                }
            }
            if mult_map.is_empty() {
                builder.add_identity(coeff);
            } else {
                let mults: Vec<(u8, u16)> = mult_map.into_iter().collect();
                let count = placement_count(n, &mults);
                let weight = coeff / Complex64::new(count, 0.0);
                let mut err = Ok(());
                enumerate_placements(n, &mults, &mut |placement| {
                    if err.is_ok() {
                        err = builder.add_word(weight, placement);
                    }
                });
                err?;
            }
        }
        // odometer over words
        let mut pos = m;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            word[pos] += 1;
            if word[pos] < letters {
                break;
            }
            word[pos] = 0;
        }
        if word.iter().all(|&w| w == 0) {
            break;
        }
    }
    builder.build(basis)?.to_dense(basis)
}

/// Expectation of a dense operator in the N-fold product of the state with
/// coordinates x.
pub fn product_state_functional(
    x: &StateCoordinates,
    a: &DenseOperator,
    basis: &SuBasis,
) -> Result<Complex64> {
    if !membership(x, basis)?.is_state {
        return Err(CwqError::NotAState(
            "functional evaluated outside the state space".into(),
        ));
    }
    if a.k() != basis.k() {
        return Err(CwqError::Dimension(format!(
            "operator is for k = {}, basis for k = {}",
            a.k(),
            basis.k()
        )));
    }
    let k = a.k();
    let rho = f_k_matrix(x, basis)?;
    // contract one site at a time, last site first
    let mut cur = a.matrix().clone();
    for _ in 0..a.sites() {
        let dim_out = cur.nrows() / k;
        let mut next = CMatrix::zeros(dim_out, dim_out);
        for rp in 0..dim_out {
            for cp in 0..dim_out {
                let mut acc = ZERO;
                for i in 0..k {
                    for j in 0..k {
                        acc += cur[(rp * k + i, cp * k + j)] * rho[(j, i)];
                    }
                }
                next[(rp, cp)] = acc;
            }
        }
        cur = next;
    }
    Ok(cur[(0, 0)])
}

/// Expectation of a word operator in the N-fold product state; exact
/// because each placed word contributes a product of single-site traces.
pub fn product_state_functional_words(
    x: &StateCoordinates,
    w: &WordOperator,
    basis: &SuBasis,
) -> Result<Complex64> {
    if !membership(x, basis)?.is_state {
        return Err(CwqError::NotAState(
            "functional evaluated outside the state space".into(),
        ));
    }
    if w.k() != basis.k() {
        return Err(CwqError::Dimension(format!(
            "operator is for k = {}, basis for k = {}",
            w.k(),
            basis.k()
        )));
    }
    // tr(rho b_j) = x_j
    let mut acc = w.identity_coeff();
    for (coeff, _, gens) in w.words() {
        let mut prod = ONE;
        for &g in gens {
            prod *= Complex64::new(x.coords()[g as usize], 0.0);
        }
        acc += coeff * prod;
    }
    Ok(acc)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(n, cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut cur, &mut used, &mut out);
    out
}

/// Residual of the commutator expansion
///
///   [S(a_1 ... a_N), S(b_1 ... b_N)]
///     = (1/N!) sum_pi ( S(a_1 b_pi(1), ..., a_N b_pi(N))
///                       - S(b_pi(1) a_1, ..., b_pi(N) a_N) )
///
/// in operator norm.
pub fn commutator_lemma_residual(a: &[CMatrix], b: &[CMatrix]) -> Result<f64> {
    let n = a.len();
    if n == 0 || b.len() != n {
        return Err(CwqError::Dimension(format!(
            "factor lists of lengths {} and {} must match and be nonempty",
            n,
            b.len()
        )));
    }
    if n > 6 {
        return Err(CwqError::Size(format!(
            "expansion over {n}! permutations exceeds the budget, need n <= 6"
        )));
    }
    let sa = symmetrize(a)?;
    let sb = symmetrize(b)?;
    let lhs = commutator(&sa, &sb)?;
    let dim = sa.dim();
    let mut rhs = CMatrix::zeros(dim, dim);
    let perms = permutations(n);
    let total = perms.len() as f64;
    for pi in &perms {
        let forward: Vec<CMatrix> = (0..n).map(|i| &a[i] * &b[pi[i]]).collect();
        let backward: Vec<CMatrix> = (0..n).map(|i| &b[pi[i]] * &a[i]).collect();
        rhs += symmetrize(&forward)?.matrix();
        rhs -= symmetrize(&backward)?.matrix();
    }
    rhs /= Complex64::new(total, 0.0);
    let diff = DenseOperator::from_matrix(sa.k(), n, lhs.matrix() - rhs)?;
    Ok(operator_norm_dense(&diff))
}
