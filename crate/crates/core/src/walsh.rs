//! Exact Walsh spectra over `Z[ω]`, `ω = e^{2πi/3}`.
//!
//! Two sign conventions appear. The Walsh transform is
//! `f̂(λ) = Σ_x ω^{f(x) - Tr(λx)}`, while the dual identity is stated for the
//! character sum `Σ_x ω^{Tr(a x^d + λx)}`. The latter is `f̂(-λ)`, and every
//! report in this module uses it.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rayon::prelude::*;
use serde::Serialize;

use crate::cmdual::{derive_params, DualRep};
use crate::error::{Error, Result};
use crate::gf3::{CmFunction, FieldCtx, FieldElement};
use crate::limits::brute_force_limit;
use crate::trits::pow3;

/// Largest `n` accepted by the fast transform (tables of `3^n` entries).
pub const FAST_MAX_N: u32 = 16;

/// `a + bω` with `ω² = -1 - ω`.
///
/// Components are `i64`; every value handled here is bounded by `3^16`
/// in magnitude, and norms are computed in `i128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
pub struct EisensteinInt {
    pub a: i64,
    pub b: i64,
}

impl EisensteinInt {
    pub const ZERO: Self = Self { a: 0, b: 0 };
    pub const ONE: Self = Self { a: 1, b: 0 };
    pub const OMEGA: Self = Self { a: 0, b: 1 };

    pub const fn new(a: i64, b: i64) -> Self {
        Self { a, b }
    }

    /// `ω^e` for `e` taken modulo 3.
    pub fn omega_pow(e: i64) -> Self {
        match e.rem_euclid(3) {
            0 => Self::ONE,
            1 => Self::OMEGA,
            _ => Self::new(-1, -1),
        }
    }

    /// `a² - ab + b²`.
    pub fn norm(&self) -> i128 {
        let (a, b) = (self.a as i128, self.b as i128);
        a * a - a * b + b * b
    }

    /// Multiplication by `ω`.
    #[inline]
    pub fn mul_omega(self) -> Self {
        Self::new(-self.b, self.a - self.b)
    }

    /// Multiplication by `ω²`.
    #[inline]
    pub fn mul_omega2(self) -> Self {
        Self::new(self.b - self.a, -self.a)
    }

    /// Multiplication by `ω^e`.
    pub fn rotate(self, e: i64) -> Self {
        match e.rem_euclid(3) {
            0 => self,
            1 => self.mul_omega(),
            _ => self.mul_omega2(),
        }
    }

    pub fn pow(self, mut e: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }

    /// Exact division by a rational integer, if it divides both components.
    pub fn div_exact(self, m: i64) -> Option<Self> {
        (m != 0 && self.a % m == 0 && self.b % m == 0).then(|| Self::new(self.a / m, self.b / m))
    }

    /// The exponent `e` with `self == ω^e`, if `self` is a cube root of unity.
    pub fn as_omega_power(self) -> Option<u8> {
        (0..3u8).find(|&e| Self::omega_pow(e as i64) == self)
    }
}

impl Add for EisensteinInt {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b)
    }
}

impl Sub for EisensteinInt {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b)
    }
}

impl Neg for EisensteinInt {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b)
    }
}

impl Mul for EisensteinInt {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self::new(
            self.a * o.a - self.b * o.b,
            self.a * o.b + o.a * self.b - self.b * o.b,
        )
    }
}

impl fmt::Display for EisensteinInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b < 0 {
            write!(f, "{}-{}w", self.a, -self.b)
        } else {
            write!(f, "{}+{}w", self.a, self.b)
        }
    }
}

pub fn eis_mul(x: EisensteinInt, y: EisensteinInt) -> EisensteinInt {
    x * y
}

pub fn eis_norm(x: EisensteinInt) -> i128 {
    x.norm()
}

/// `(-1)^{n+1} η(a) (1 + 2ω)^n`, which equals `(-1)^{n+1} η(a) i^n 3^{n/2}`.
pub fn reference_constant(n: u32, eta_a: i8) -> EisensteinInt {
    let c = EisensteinInt::new(1, 2).pow(n);
    let negate = n.is_multiple_of(2) != (eta_a < 0);
    if negate {
        -c
    } else {
        c
    }
}

/// `Σ_x ω^{Tr(a x^d + λ x)}` by direct summation.
pub fn char_sum(
    ctx: &FieldCtx,
    a: FieldElement,
    k: u32,
    lambda: FieldElement,
) -> Result<EisensteinInt> {
    let f = CmFunction::new(ctx, a, k)?;
    let table = f.tabulate();
    Ok(brute_walsh(ctx, &table, -lambda))
}

/// `Σ_x ω^{f(x) - Tr(λ x)}` by direct summation over a table in index order.
pub fn brute_walsh(ctx: &FieldCtx, table: &[u8], lambda: FieldElement) -> EisensteinInt {
    let mut counts = [0i64; 3];
    for (i, x) in ctx.elements().enumerate() {
        let e = (table[i] as i64 - ctx.trace(ctx.mul(lambda, x)) as i64).rem_euclid(3);
        counts[e as usize] += 1;
    }
    from_counts(counts)
}

/// `Σ_x ω^{Tr(λ x)}`: `3^n` at zero and 0 elsewhere.
pub fn additive_char_sum(ctx: &FieldCtx, lambda: FieldElement) -> EisensteinInt {
    let zero = vec![0u8; ctx.size() as usize];
    brute_walsh(ctx, &zero, -lambda)
}

fn from_counts(c: [i64; 3]) -> EisensteinInt {
    // c0 + c1 ω + c2 ω² = (c0 - c2) + (c1 - c2) ω
    EisensteinInt::new(c[0] - c[2], c[1] - c[2])
}

/// Solves a square system over GF(3) in place; `None` if singular.
fn solve_gf3(mut m: Vec<Vec<u8>>, mut rhs: Vec<u8>) -> Option<Vec<u8>> {
    let n = rhs.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| m[r][col] != 0)?;
        m.swap(col, pivot);
        rhs.swap(col, pivot);
        // 1 and 2 are their own inverses mod 3
        let inv = m[col][col];
        for v in m[col].iter_mut() {
            *v = *v * inv % 3;
        }
        rhs[col] = rhs[col] * inv % 3;
        for r in 0..n {
            if r != col && m[r][col] != 0 {
                let factor = m[r][col];
                let pivot_row = m[col].clone();
                for (x, p) in m[r].iter_mut().zip(pivot_row) {
                    *x = (*x + 3 - factor * p % 3) % 3;
                }
                rhs[r] = (rhs[r] + 3 - factor * rhs[col] % 3) % 3;
            }
        }
    }
    Some(rhs)
}

/// Basis `δ_0, ..., δ_{n-1}` with `Tr(x^i δ_j) = [i = j]`.
pub fn dual_basis(ctx: &FieldCtx) -> Result<Vec<FieldElement>> {
    let n = ctx.n() as usize;
    let basis: Vec<FieldElement> = (0..n)
        .map(|i| ctx.pow_u(FieldElement::from_index(3), i as u64))
        .collect();
    // Row i: Tr(x^i · x^c) for each coordinate c.
    let gram: Vec<Vec<u8>> = basis
        .iter()
        .map(|&bi| basis.iter().map(|&bc| ctx.trace(ctx.mul(bi, bc))).collect())
        .collect();
    (0..n)
        .map(|j| {
            let rhs: Vec<u8> = (0..n).map(|i| u8::from(i == j)).collect();
            let coeffs = solve_gf3(gram.clone(), rhs).ok_or(Error::SingularTraceForm)?;
            FieldElement::from_coeffs(&coeffs)
        })
        .collect()
}

/// In-place radix-3 transform over `Z_3^n`, kernel `ω^{-μ·x}` (`inverse`
/// selects `ω^{+μ·x}`). Index digits are the group coordinates.
fn dft3(data: &mut [EisensteinInt], n: u32, inverse: bool) {
    let mut stride = 1usize;
    for _ in 0..n {
        let block = 3 * stride;
        data.par_chunks_mut(block).for_each(|chunk| {
            let (p0, rest) = chunk.split_at_mut(stride);
            let (p1, p2) = rest.split_at_mut(stride);
            p0.par_iter_mut()
                .zip(p1.par_iter_mut())
                .zip(p2.par_iter_mut())
                .with_min_len(2048)
                .for_each(|((x0, x1), x2)| {
                    let (a0, a1, a2) = (*x0, *x1, *x2);
                    let (t1, t2) = if inverse {
                        (
                            a1.mul_omega() + a2.mul_omega2(),
                            a1.mul_omega2() + a2.mul_omega(),
                        )
                    } else {
                        (
                            a1.mul_omega2() + a2.mul_omega(),
                            a1.mul_omega() + a2.mul_omega2(),
                        )
                    };
                    *x0 = a0 + a1 + a2;
                    *x1 = a0 + t1;
                    *x2 = a0 + t2;
                });
        });
        stride = block;
    }
}

/// For each coordinate index `μ`, the index of `λ = Σ μ_i δ_i`. Then
/// `Tr(λ x) = Σ μ_i x_i` when `x` has polynomial coordinates `x_i`.
fn lambda_of_mu(ctx: &FieldCtx) -> Result<Vec<u32>> {
    let delta = dual_basis(ctx)?;
    let size = ctx.size() as usize;
    let n = ctx.n() as usize;
    let mut out = vec![0u32; size];
    out.par_iter_mut().enumerate().for_each(|(mu, slot)| {
        let mut m = mu;
        let mut lambda = FieldElement::ZERO;
        for d in delta.iter().take(n) {
            lambda = lambda + d.scale((m % 3) as u8);
            m /= 3;
        }
        *slot = lambda.index() as u32;
    });
    Ok(out)
}

fn check_table(ctx: &FieldCtx, len: usize) -> Result<()> {
    if ctx.n() > FAST_MAX_N {
        return Err(Error::SizeLimit {
            n: ctx.n(),
            max: FAST_MAX_N,
        });
    }
    let expected = ctx.size() as usize;
    if len != expected {
        return Err(Error::LengthMismatch { expected, got: len });
    }
    Ok(())
}

/// All values `f̂(λ) = Σ_x ω^{f(x) - Tr(λx)}`, indexed by `λ.index()`.
pub fn fast_spectrum(ctx: &FieldCtx, table: &[u8]) -> Result<Vec<EisensteinInt>> {
    check_table(ctx, table.len())?;
    let mut data: Vec<EisensteinInt> = table
        .par_iter()
        .map(|&v| EisensteinInt::omega_pow(v as i64))
        .collect();
    dft3(&mut data, ctx.n(), false);
    let relabel = lambda_of_mu(ctx)?;
    let mut out = vec![EisensteinInt::ZERO; data.len()];
    for (mu, value) in data.into_iter().enumerate() {
        out[relabel[mu] as usize] = value;
    }
    Ok(out)
}

/// [`fast_spectrum`] on a dedicated pool of `threads` workers.
pub fn fast_spectrum_with_threads(
    ctx: &FieldCtx,
    table: &[u8],
    threads: usize,
) -> Result<Vec<EisensteinInt>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::BadParameters(vec![format!("thread pool: {e}")]))?;
    pool.install(|| fast_spectrum(ctx, table))
}

/// `ω^{f(x)} = 3^{-n} Σ_λ f̂(λ) ω^{Tr(λx)}`, indexed by `x.index()`.
/// `None` if some entry is not divisible by `3^n`.
pub fn inverse_spectrum(
    ctx: &FieldCtx,
    spectrum: &[EisensteinInt],
) -> Result<Option<Vec<EisensteinInt>>> {
    check_table(ctx, spectrum.len())?;
    let relabel = lambda_of_mu(ctx)?;
    let mut data: Vec<EisensteinInt> = relabel.iter().map(|&l| spectrum[l as usize]).collect();
    dft3(&mut data, ctx.n(), true);
    let q = pow3(ctx.n()) as i64;
    Ok(data.into_iter().map(|v| v.div_exact(q)).collect())
}

/// Recovers a function table from its spectrum, if the spectrum is one.
pub fn table_from_spectrum(ctx: &FieldCtx, spectrum: &[EisensteinInt]) -> Result<Option<Vec<u8>>> {
    Ok(inverse_spectrum(ctx, spectrum)?
        .and_then(|vals| vals.into_iter().map(|v| v.as_omega_power()).collect()))
}

/// `true` iff every spectrum value of the table has norm `3^n`.
pub fn is_bent_table(ctx: &FieldCtx, table: &[u8]) -> Result<bool> {
    let q = pow3(ctx.n()) as i128;
    Ok(fast_spectrum(ctx, table)?.iter().all(|w| w.norm() == q))
}

/// Per-point data in a [`SpectrumReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LambdaRecord {
    /// Index of `λ`.
    pub lambda: u64,
    /// `Σ_x ω^{Tr(a x^d + λ x)}`.
    pub w: EisensteinInt,
    pub norm_ok: bool,
    /// `t` with `w = reference · ω^t`, if one exists.
    pub dual_value: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpectrumReport {
    pub n: u32,
    pub k: u32,
    /// `a` as a digit string.
    pub a: String,
    /// Always `"sum omega^Tr(a x^d + lambda x)"`.
    pub convention: &'static str,
    pub reference_constant: EisensteinInt,
    pub bent: bool,
    pub weakly_regular: bool,
    /// Only set by [`verify_weak_regularity`].
    pub dual_matches: Option<bool>,
    /// Indices of `λ` where a compared dual disagreed.
    pub mismatches: Vec<u64>,
    pub per_lambda: Vec<LambdaRecord>,
}

const CONVENTION: &str = "sum omega^Tr(a x^d + lambda x)";

fn check_brute_limit(n: u32) -> Result<()> {
    let max = brute_force_limit().min(FAST_MAX_N);
    if n > max {
        return Err(Error::SizeLimit { n, max });
    }
    Ok(())
}

/// `Σ_x ω^{Tr(a x^d + λ x)}` for every `λ`, indexed by `λ.index()`.
pub fn char_sum_spectrum(ctx: &FieldCtx, a: FieldElement, k: u32) -> Result<Vec<EisensteinInt>> {
    let f = CmFunction::new(ctx, a, k)?;
    let walsh = fast_spectrum(ctx, &f.tabulate())?;
    let mut out = vec![EisensteinInt::ZERO; walsh.len()];
    for x in ctx.elements() {
        out[x.index() as usize] = walsh[(-x).index() as usize];
    }
    Ok(out)
}

fn build_report(ctx: &FieldCtx, a: FieldElement, k: u32) -> Result<SpectrumReport> {
    derive_params(ctx.n(), k)?;
    check_brute_limit(ctx.n())?;
    let sums = char_sum_spectrum(ctx, a, k)?;
    let reference = reference_constant(ctx.n(), ctx.eta(a)?);
    let q = pow3(ctx.n()) as i128;
    let rotations = [reference, reference.mul_omega(), reference.mul_omega2()];
    let per_lambda: Vec<LambdaRecord> = sums
        .iter()
        .enumerate()
        .map(|(i, &w)| LambdaRecord {
            lambda: i as u64,
            w,
            norm_ok: w.norm() == q,
            dual_value: rotations.iter().position(|&r| r == w).map(|t| t as u8),
        })
        .collect();
    Ok(SpectrumReport {
        n: ctx.n(),
        k,
        a: a.to_digit_string(ctx.n()),
        convention: CONVENTION,
        reference_constant: reference,
        bent: per_lambda.iter().all(|r| r.norm_ok),
        weakly_regular: per_lambda.iter().all(|r| r.dual_value.is_some()),
        dual_matches: None,
        mismatches: Vec::new(),
        per_lambda,
    })
}

/// Checks `|W(λ)|² = 3^n` at every `λ`.
pub fn verify_bent(ctx: &FieldCtx, a: FieldElement, k: u32) -> Result<SpectrumReport> {
    build_report(ctx, a, k)
}

/// Checks `W(λ) = (-1)^{n+1} η(a) (1+2ω)^n ω^{g(λ)}` at every `λ`, with `g`
/// evaluated from `rep`.
pub fn verify_weak_regularity(
    ctx: &FieldCtx,
    a: FieldElement,
    k: u32,
    rep: &DualRep,
) -> Result<SpectrumReport> {
    if rep.params.n != ctx.n() || rep.params.k != k || rep.a != a {
        return Err(Error::BadParameters(vec![
            "dual representation was built for different (n, k, a)".into(),
        ]));
    }
    let mut report = build_report(ctx, a, k)?;
    let dual = rep.tabulate(ctx);
    report.mismatches = report
        .per_lambda
        .iter()
        .filter(|r| r.dual_value != Some(dual[r.lambda as usize]))
        .map(|r| r.lambda)
        .collect();
    report.dual_matches = Some(report.mismatches.is_empty());
    Ok(report)
}

/// The dual read off the spectrum: `g(λ)` is the rotation of the reference
/// constant that equals `W(λ)`. Indexed by `λ.index()`.
pub fn extract_dual(ctx: &FieldCtx, a: FieldElement, k: u32) -> Result<Vec<u8>> {
    let report = build_report(ctx, a, k)?;
    report
        .per_lambda
        .iter()
        .map(|r| {
            r.dual_value
                .ok_or(Error::NoMatchingRotation { lambda: r.lambda })
        })
        .collect()
}
