//! Trace representation of the dual of `Tr(a x^d)`, `d = (3^k + 1) / 2`.
//!
//! The dual is a sum of trace terms `Tr(±η(a) a^j x^{-jd})` where `j` runs
//! over one of two pairs of digit-constrained index sets. Which pair applies
//! is decided by the parity of `|A ∩ {n-k, ..., n-1}|`, where `w` is the
//! inverse of `k` modulo `n` and `A = {0, k, ..., (w-1)k} mod n`.
//!
//! Alongside the construction this module keeps the slower formulations it
//! must agree with: the brute-force scan for the exponent sets `S0`/`S1`,
//! the character-sum style sum over every `j` with `wt(j) + wt(-jd) = n + 1`,
//! and the explicit three-term duals for `n = 3t + 2` / `n = 3t + 1`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf3::{check_cm_parameters, cm_exponent, FieldCtx, FieldElement};
use crate::limits::brute_force_limit;
use crate::trits::{exponent_modulus, pow3, residue, TernaryIndex};

/// Which pair of index sets builds the dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    /// `|A ∩ {n-k, ..., n-1}|` even: sets `U0`, `V0`.
    Even,
    /// Odd: sets `U1`, `V1`.
    Odd,
}

impl Branch {
    pub fn of(parity_count: u32) -> Self {
        if parity_count.is_multiple_of(2) {
            Branch::Even
        } else {
            Branch::Odd
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Even => "even",
            Branch::Odd => "odd",
        }
    }
}

/// Derived quantities for a valid `(n, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CmParams {
    pub n: u32,
    pub k: u32,
    pub d: u64,
    /// `0 < w < n` with `w k ≡ 1 (mod n)`.
    pub w: u32,
    /// `|A ∩ {n-k, ..., n-1}|`.
    #[serde(rename = "parity")]
    pub parity_count: u32,
}

impl CmParams {
    pub fn branch(&self) -> Branch {
        Branch::of(self.parity_count)
    }

    /// `{0, k, ..., (w-1)k} mod n`.
    pub fn set_a(&self) -> Vec<u32> {
        (0..self.w).map(|i| i * self.k % self.n).collect()
    }

    /// `{wk, ..., (n-1)k} mod n`.
    pub fn set_b(&self) -> Vec<u32> {
        (self.w..self.n).map(|i| i * self.k % self.n).collect()
    }

    /// `w` on the even branch, `n - w` on the odd one.
    pub fn branch_length(&self) -> u32 {
        match self.branch() {
            Branch::Even => self.w,
            Branch::Odd => self.n - self.w,
        }
    }

    /// Number of trace terms, `F_{m+1}` with `m` the branch length.
    pub fn term_count(&self) -> u64 {
        fibonacci(self.branch_length() + 1)
    }

    /// Algebraic degree the construction must reach: `w + 1` or `n + 1 - w`.
    pub fn expected_degree(&self) -> u32 {
        self.branch_length() + 1
    }
}

/// Validates `(n, k)` and computes `d`, `w` and the parity count directly.
pub fn derive_params(n: u32, k: u32) -> Result<CmParams> {
    check_cm_parameters(n, k)?;
    let w = (1..n)
        .find(|&w| (w as u64 * k as u64) % n as u64 == 1 % n as u64)
        .expect("k is invertible modulo n");
    let window = (n - k)..n;
    let parity_count = (0..w)
        .map(|i| i * k % n)
        .filter(|p| window.contains(p))
        .count() as u32;
    Ok(CmParams {
        n,
        k,
        d: cm_exponent(k),
        w,
        parity_count,
    })
}

/// Standard Fibonacci numbers, `F_0 = 0`, `F_1 = 1`.
pub fn fibonacci(i: u32) -> u64 {
    let (mut a, mut b) = (0u64, 1u64);
    for _ in 0..i {
        (a, b) = (b, a + b);
    }
    a
}

/// Number of `{0, 2}` sequences of length `f` without two consecutive 2s,
/// extended below zero by `N(-1) = 1`, `N(-2) = 0`.
pub fn fib_count(f: i64) -> Result<u64> {
    if f < -2 {
        return Err(Error::BadParameters(vec![format!(
            "sequence length must be at least -2, got {f}"
        )]));
    }
    // N(-2), N(-1)
    let (mut prev, mut cur) = (0u64, 1u64);
    for _ in -1..f {
        (prev, cur) = (cur, prev + cur);
    }
    Ok(if f == -2 { prev } else { cur })
}

/// Index sets for the branch selected by the parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSets {
    pub branch: Branch,
    /// `U0` or `U1`, ascending.
    pub u: Vec<TernaryIndex>,
    /// `V0` or `V1`, ascending.
    pub v: Vec<TernaryIndex>,
}

const ZERO: u8 = 0b001;
const ONE: u8 = 0b010;
const TWO: u8 = 0b100;
const ZERO_OR_TWO: u8 = ZERO | TWO;

/// Digit constraints indexed by `i`, applying to digit position `i k mod n`.
struct OrbitPattern {
    allowed: Vec<u8>,
    /// Inclusive range of `i` inside which no two consecutive entries are 2.
    free_run: (i64, i64),
}

impl OrbitPattern {
    fn new(n: u32, free_run: (i64, i64)) -> Self {
        Self {
            allowed: vec![ZERO | ONE | TWO; n as usize],
            free_run,
        }
    }

    fn require(&mut self, i: i64, mask: u8) {
        if (0..self.allowed.len() as i64).contains(&i) {
            self.allowed[i as usize] &= mask;
        }
    }

    fn require_range(&mut self, lo: i64, hi: i64, mask: u8) {
        for i in lo..=hi {
            self.require(i, mask);
        }
    }

    /// Enumerates every digit assignment; conflicting constraints give none.
    fn enumerate(&self, params: &CmParams) -> Vec<TernaryIndex> {
        let n = params.n as usize;
        let positions: Vec<u32> = (0..params.n).map(|i| i * params.k % params.n).collect();
        let mut out = Vec::new();
        let mut digits = vec![0u8; n];
        self.descend(0, &positions, &mut digits, &mut out);
        out.sort();
        out
    }

    fn descend(&self, i: usize, positions: &[u32], digits: &mut [u8], out: &mut Vec<TernaryIndex>) {
        if i == self.allowed.len() {
            let j = TernaryIndex::from_digits(digits).expect("constrained digits form a residue");
            out.push(j);
            return;
        }
        let (lo, hi) = self.free_run;
        for d in 0..3u8 {
            if self.allowed[i] & (1 << d) == 0 {
                continue;
            }
            let ii = i as i64;
            if d == 2 && ii > lo && ii <= hi && digits[positions[i - 1] as usize] == 2 {
                continue;
            }
            digits[positions[i] as usize] = d;
            self.descend(i + 1, positions, digits, out);
        }
        digits[positions[i] as usize] = 0;
    }
}

/// Builds `(U0, V0)` or `(U1, V1)` by fixing digits along the orbit
/// `i ↦ i k mod n` and enumerating the free `{0, 2}` runs.
pub fn gen_sets(params: &CmParams) -> IndexSets {
    let n = params.n as i64;
    let w = params.w as i64;
    let branch = params.branch();
    let (u, v) = match branch {
        Branch::Even => {
            let mut u = OrbitPattern::new(params.n, (1, w - 2));
            u.require_range(w, n - 1, ONE);
            u.require(0, ZERO);
            u.require(w - 1, ZERO);
            u.require_range(1, w - 2, ZERO_OR_TWO);

            let mut v = OrbitPattern::new(params.n, (2, w - 2));
            v.require_range(w, n - 1, ONE);
            v.require(0, TWO);
            v.require(1, ZERO);
            v.require(w - 1, ZERO);
            v.require_range(2, w - 2, ZERO_OR_TWO);
            (u, v)
        }
        Branch::Odd => {
            let mut u = OrbitPattern::new(params.n, (w + 1, n - 2));
            u.require_range(0, w - 1, ONE);
            u.require(w, ZERO);
            u.require(n - 1, ZERO);
            u.require_range(w + 1, n - 2, ZERO_OR_TWO);

            let mut v = OrbitPattern::new(params.n, (w + 1, n - 3));
            v.require_range(0, w - 1, ONE);
            v.require(w, ZERO);
            v.require(n - 2, ZERO);
            v.require_range(w + 1, n - 3, ZERO_OR_TWO);
            v.require(n - 1, TWO);
            (u, v)
        }
    };
    IndexSets {
        branch,
        u: u.enumerate(params),
        v: v.enumerate(params),
    }
}

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

#[inline]
fn weight(mut v: u64) -> u32 {
    let mut w = 0;
    while v > 0 {
        w += (v % 3) as u32;
        v /= 3;
    }
    w
}

/// Scans every `0 < j < 3^n - 1` and returns `(S0, S1)`:
///
/// * `S0`: `wt(j) + wt(3^k j) = wt((3^k+1) j)` and `2 wt(-jd) = wt(-(3^k+1) j) + 2`
/// * `S1`: `wt(j) + wt(3^k j) = wt((3^k+1) j) + 2` and `2 wt(-jd) = wt(-(3^k+1) j)`
pub fn brute_s0_s1(params: &CmParams) -> Result<(BTreeSet<u64>, BTreeSet<u64>)> {
    let max = brute_force_limit();
    if params.n > max {
        return Err(Error::SizeLimit { n: params.n, max });
    }
    let m = exponent_modulus(params.n);
    let shift = pow3(params.k) % m;
    let shift1 = (pow3(params.k) + 1) % m;
    let d = params.d % m;
    let classified: Vec<(u64, u8)> = (1..m)
        .into_par_iter()
        .filter_map(|j| {
            let lhs = weight(j) + weight(mul_mod(j, shift, m));
            let h = weight(mul_mod(j, shift1, m));
            let neg_jd = weight(m - mul_mod(j, d, m));
            let neg_h = weight((m - mul_mod(j, shift1, m)) % m);
            let neg_jd = if mul_mod(j, d, m) == 0 { 0 } else { neg_jd };
            if lhs == h && 2 * neg_jd == neg_h + 2 {
                Some((j, 0))
            } else if lhs == h + 2 && 2 * neg_jd == neg_h {
                Some((j, 1))
            } else {
                None
            }
        })
        .collect();
    let mut s0 = BTreeSet::new();
    let mut s1 = BTreeSet::new();
    for (j, which) in classified {
        if which == 0 {
            s0.insert(j);
        } else {
            s1.insert(j);
        }
    }
    Ok((s0, s1))
}

/// One summand `Tr(coefficient · x^exponent)` of the dual.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TraceTerm {
    /// Index-set member the term comes from.
    pub j: TernaryIndex,
    /// `(-1)^{N2(j)+1}` for `U`, `(-1)^{N2(j)}` for `V`.
    pub sign: i8,
    /// `sign · η(a) · a^j`.
    pub coefficient: FieldElement,
    /// `-j d mod (3^n - 1)`.
    pub exponent: TernaryIndex,
}

/// The dual function as a list of trace terms, ordered by exponent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualRep {
    pub params: CmParams,
    pub a: FieldElement,
    pub eta_a: i8,
    pub terms: Vec<TraceTerm>,
}

/// Builds the trace representation of the dual of `Tr(a x^d)`.
pub fn dual_representation(ctx: &FieldCtx, a: FieldElement, k: u32) -> Result<DualRep> {
    let params = derive_params(ctx.n(), k)?;
    if a.is_zero() {
        return Err(Error::ZeroArgument);
    }
    let eta_a = ctx.eta(a)?;
    let sets = gen_sets(&params);
    let signed = sets
        .u
        .iter()
        .map(|j| (j, if j.n2() % 2 == 0 { -1i8 } else { 1 }))
        .chain(
            sets.v
                .iter()
                .map(|j| (j, if j.n2() % 2 == 0 { 1i8 } else { -1 })),
        );
    let mut terms: Vec<TraceTerm> = signed
        .map(|(j, sign)| {
            let power = ctx.pow_u(a, j.value());
            let coefficient = power.scale(if sign * eta_a > 0 { 1 } else { 2 });
            TraceTerm {
                j: *j,
                sign,
                coefficient,
                exponent: residue(-(j.value() as i128) * params.d as i128, params.n),
            }
        })
        .collect();
    terms.sort_by_key(|t| (t.exponent.value(), t.j.value()));
    Ok(DualRep {
        params,
        a,
        eta_a,
        terms,
    })
}

impl DualRep {
    pub fn n(&self) -> u32 {
        self.params.n
    }

    /// `g(x) = Σ Tr(c x^e)`, with `g(0) = 0`.
    pub fn eval(&self, ctx: &FieldCtx, x: FieldElement) -> u8 {
        if x.is_zero() {
            return 0;
        }
        let sum = self.terms.iter().fold(FieldElement::ZERO, |acc, t| {
            acc + ctx.mul(t.coefficient, ctx.pow_u(x, t.exponent.value()))
        });
        ctx.trace(sum)
    }

    /// Values at every element in index order, walking powers of the
    /// generator so each point costs one multiplication per term.
    pub fn tabulate(&self, ctx: &FieldCtx) -> Vec<u8> {
        let g = ctx.generator();
        let steps: Vec<FieldElement> = self
            .terms
            .iter()
            .map(|t| ctx.pow_u(g, t.exponent.value()))
            .collect();
        let mut current: Vec<FieldElement> = self.terms.iter().map(|t| t.coefficient).collect();
        let mut table = vec![0u8; ctx.size() as usize];
        let mut x = FieldElement::ONE;
        for _ in 0..ctx.group_order() {
            let sum = current.iter().fold(FieldElement::ZERO, |acc, &c| acc + c);
            table[x.index() as usize] = ctx.trace(sum);
            for (c, &s) in current.iter_mut().zip(&steps) {
                *c = ctx.mul(*c, s);
            }
            x = ctx.mul(x, g);
        }
        table
    }

    /// Human-readable form with decimal exponents.
    pub fn render(&self) -> String {
        let n = self.params.n;
        let mut out = String::from("g(x) = ");
        if self.terms.is_empty() {
            out.push('0');
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            let _ = write!(
                out,
                "Tr({}*x^{})",
                t.coefficient.to_digit_string(n),
                t.exponent.value()
            );
        }
        out
    }
}

impl Serialize for DualRep {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term {
            j: String,
            sign: i8,
            coeff: String,
            exp: String,
        }
        let n = self.params.n;
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|t| Term {
                j: t.j.to_digit_string(),
                sign: t.sign,
                coeff: t.coefficient.to_digit_string(n),
                exp: t.exponent.to_digit_string(),
            })
            .collect();
        let mut st = s.serialize_struct("DualRep", 8)?;
        st.serialize_field("n", &n)?;
        st.serialize_field("k", &self.params.k)?;
        st.serialize_field("d", &self.params.d)?;
        st.serialize_field("w", &self.params.w)?;
        st.serialize_field("parity", &self.params.parity_count)?;
        st.serialize_field("branch", &self.params.branch())?;
        st.serialize_field("a", &self.a.to_digit_string(n))?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}

/// Convenience wrapper over [`DualRep::eval`].
pub fn eval_dual(ctx: &FieldCtx, rep: &DualRep, x: FieldElement) -> u8 {
    rep.eval(ctx, x)
}

/// Maximum ternary weight over the exponents of the representation.
pub fn algebraic_degree(rep: &DualRep) -> Result<u32> {
    rep.terms
        .iter()
        .map(|t| t.exponent.weight())
        .max()
        .ok_or(Error::EmptyRepresentation)
}

/// The dual as `η(a) Σ σ(j) σ(-jd) (a / λ^d)^j` over every `j` with
/// `wt(j) + wt(-jd) = n + 1`, evaluated without any index-set structure.
#[derive(Debug, Clone)]
pub struct UniversalDual<'a> {
    ctx: &'a FieldCtx,
    a: FieldElement,
    eta_a: i8,
    d: u64,
    /// `(j, σ(j) σ(-jd) mod 3)` with nonzero scalar.
    summands: Vec<(u64, u8)>,
}

impl<'a> UniversalDual<'a> {
    pub fn new(ctx: &'a FieldCtx, a: FieldElement, k: u32) -> Result<Self> {
        let params = derive_params(ctx.n(), k)?;
        let max = brute_force_limit();
        if params.n > max {
            return Err(Error::SizeLimit { n: params.n, max });
        }
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let n = params.n;
        let summands = universal_index_set(&params)
            .into_iter()
            .filter_map(|j| {
                let j_idx = residue(j as i128, n);
                let neg_jd = residue(-(j as i128) * params.d as i128, n);
                let scalar = (j_idx.sigma() * neg_jd.sigma() % 3) as u8;
                (scalar != 0).then_some((j, scalar))
            })
            .collect();
        Ok(Self {
            ctx,
            a,
            eta_a: ctx.eta(a)?,
            d: params.d,
            summands,
        })
    }

    /// Number of exponents `j` in the sum.
    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    pub fn eval(&self, lambda: FieldElement) -> Result<u8> {
        if lambda.is_zero() {
            return Ok(0);
        }
        let ctx = self.ctx;
        let base = ctx.mul(self.a, ctx.inv(ctx.pow_u(lambda, self.d))?);
        let sum = self
            .summands
            .iter()
            .fold(FieldElement::ZERO, |acc, &(j, c)| {
                acc + ctx.pow_u(base, j).scale(c)
            });
        let value = if self.eta_a > 0 { sum } else { -sum };
        value.as_prime_subfield().ok_or(Error::NotInPrimeSubfield)
    }
}

/// `{0 < j < 3^n - 1 : wt(j) + wt(-jd) = n + 1}`, ascending.
pub fn universal_index_set(params: &CmParams) -> Vec<u64> {
    let n = params.n;
    let m = exponent_modulus(n);
    let d = params.d % m;
    (1..m)
        .into_par_iter()
        .filter(|&j| {
            let jd = mul_mod(j, d, m);
            let neg = if jd == 0 { 0 } else { m - jd };
            weight(j) + weight(neg) == n + 1
        })
        .collect()
}

/// Single-point form of [`UniversalDual::eval`].
pub fn universal_dual(ctx: &FieldCtx, a: FieldElement, k: u32, lambda: FieldElement) -> Result<u8> {
    UniversalDual::new(ctx, a, k)?.eval(lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreeTermVariant {
    /// `n = 3t + 2`, `k = 2t + 1`.
    One,
    /// `n = 3t + 1`, `k = 2t + 1`.
    Two,
}

impl ThreeTermVariant {
    /// The variant and `t` that match `(n, k)`, if any.
    pub fn detect(n: u32, k: u32) -> Option<(Self, u32)> {
        if k < 3 || k.is_multiple_of(2) {
            return None;
        }
        let t = (k - 1) / 2;
        if n == 3 * t + 2 {
            Some((ThreeTermVariant::One, t))
        } else if n == 3 * t + 1 {
            Some((ThreeTermVariant::Two, t))
        } else {
            None
        }
    }
}

/// The explicit three-term dual `Tr(c1 λ^{e1} + c2 λ^{e2} + c3 λ^{e3})`.
#[derive(Debug, Clone)]
pub struct ThreeTermDual<'a> {
    ctx: &'a FieldCtx,
    terms: [(FieldElement, u64); 3],
}

impl<'a> ThreeTermDual<'a> {
    pub fn new(
        ctx: &'a FieldCtx,
        a: FieldElement,
        variant: ThreeTermVariant,
        t: u32,
    ) -> Result<Self> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let n = ctx.n();
        let (expected_n, name) = match variant {
            ThreeTermVariant::One => (3 * t + 2, "n = 3t + 2"),
            ThreeTermVariant::Two => (3 * t + 1, "n = 3t + 1"),
        };
        if t < 1 || n != expected_n {
            return Err(Error::BadParameters(vec![format!(
                "three-term variant requires t >= 1 and {name}"
            )]));
        }
        let p = |e: u32| pow3(e) as i128;
        // (sign, exponent of λ, exponent of a in the denominator)
        let raw: [(i8, i128, i128); 3] = match variant {
            ThreeTermVariant::One => [
                (-1, p(2 * t + 2) + 1, p(2 * t + 2) - p(t + 1) + 3),
                (
                    -1,
                    2 * p(2 * t + 1) + p(t + 1) + 1,
                    p(2 * t + 2) + p(t + 1) + 1,
                ),
                (1, 2, -p(2 * t + 2) + p(t + 1) + 3),
            ],
            ThreeTermVariant::Two => [
                (-1, p(2 * t + 1) + p(t + 1) + 2, p(2 * t + 1) + p(t + 1) + 1),
                (-1, p(2 * t) + 1, -p(2 * t) + p(t) + 1),
                (1, 2, -p(2 * t + 1) + p(t + 1) + 1),
            ],
        };
        let m = ctx.group_order() as i128;
        let mut terms = [(FieldElement::ZERO, 0u64); 3];
        for (slot, (sign, lambda_exp, a_exp)) in terms.iter_mut().zip(raw) {
            let c = ctx.pow(a, -a_exp)?;
            *slot = (
                if sign < 0 { -c } else { c },
                lambda_exp.rem_euclid(m) as u64,
            );
        }
        Ok(Self { ctx, terms })
    }

    pub fn eval(&self, lambda: FieldElement) -> u8 {
        if lambda.is_zero() {
            return 0;
        }
        let ctx = self.ctx;
        let sum = self.terms.iter().fold(FieldElement::ZERO, |acc, &(c, e)| {
            acc + ctx.mul(c, ctx.pow_u(lambda, e))
        });
        ctx.trace(sum)
    }
}

/// Single-point form of [`ThreeTermDual::eval`].
pub fn three_term_dual(
    ctx: &FieldCtx,
    a: FieldElement,
    variant: ThreeTermVariant,
    t: u32,
    lambda: FieldElement,
) -> Result<u8> {
    Ok(ThreeTermDual::new(ctx, a, variant, t)?.eval(lambda))
}

/// Special `(n, k)` families with closed-form `w`, parity and term count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilyKind {
    /// `k | n + 1`, `k > 1`.
    KDividesNPlus1,
    /// `k | n - 1`, `k > 1`.
    KDividesNMinus1,
    /// `(n - k) | n + 1`, `1 < k < n - 1`.
    NMinusKDividesNPlus1,
    /// `(n - k) | n - 1`, `1 < k < n - 1`.
    NMinusKDividesNMinus1,
    /// `n = mt + m - 1`, `k = (m-1)t + m - 2`, `m >= 3`, `t >= 1`.
    MtPlusMMinus1 { m: u32, t: u32 },
    /// `n = mt + 1`, `k = (m-1)t + 1`, `m >= 3`, `t >= 1`.
    MtPlus1 { m: u32, t: u32 },
}

/// Predictions made by one special family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpecialFamily {
    #[serde(flatten)]
    pub kind: FamilyKind,
    pub w: u32,
    pub parity: u32,
    pub branch: Branch,
    pub terms: u64,
}

/// Lists every special family `(n, k)` belongs to, with the closed-form
/// predictions of each. Never consulted by the construction itself.
pub fn classify_special(n: u32, k: u32) -> Result<Vec<SpecialFamily>> {
    check_cm_parameters(n, k)?;
    let mut out = Vec::new();
    if k > 1 && (n + 1).is_multiple_of(k) {
        let w = (n + 1) / k;
        out.push(SpecialFamily {
            kind: FamilyKind::KDividesNPlus1,
            w,
            parity: 1,
            branch: Branch::Odd,
            terms: fibonacci((n + 1) * (k - 1) / k),
        });
    }
    if k > 1 && (n - 1).is_multiple_of(k) {
        let w = n - (n - 1) / k;
        out.push(SpecialFamily {
            kind: FamilyKind::KDividesNMinus1,
            w,
            parity: k - 1,
            branch: Branch::Even,
            terms: fibonacci(n - (n - 1) / k + 1),
        });
    }
    if 1 < k && k < n - 1 {
        let nk = n - k;
        if (n + 1).is_multiple_of(nk) {
            let x = (n + 1) / nk;
            let y = (k + 1) / nk;
            let (branch, terms) = if y % 2 == 1 {
                (Branch::Even, fibonacci(n - x + 1))
            } else {
                (Branch::Odd, fibonacci(x + 1))
            };
            let parity = k - y;
            out.push(SpecialFamily {
                kind: FamilyKind::NMinusKDividesNPlus1,
                w: n - x,
                parity,
                branch,
                terms,
            });
            // n = mt + m - 1 with t = n - k - 1, m = (n + 1) / (n - k)
            let (m, t) = (x, nk - 1);
            if m >= 3 && t >= 1 {
                let (branch, terms) = if m % 2 == 1 {
                    (Branch::Odd, fibonacci(m + 1))
                } else {
                    (Branch::Even, fibonacci(n - m + 1))
                };
                out.push(SpecialFamily {
                    kind: FamilyKind::MtPlusMMinus1 { m, t },
                    w: n - m,
                    parity: k - (m - 1),
                    branch,
                    terms,
                });
            }
        }
        if (n - 1).is_multiple_of(nk) {
            let x = (n - 1) / nk;
            let y = k / nk;
            let (branch, terms) = if y.is_multiple_of(2) {
                (Branch::Even, fibonacci(x + 1))
            } else {
                (Branch::Odd, fibonacci(n - x + 1))
            };
            out.push(SpecialFamily {
                kind: FamilyKind::NMinusKDividesNMinus1,
                w: x,
                parity: y,
                branch,
                terms,
            });
        }
    }
    // Also covers t = 1, i.e. k = n - 1, where the (n - k) | n - 1 parity
    // formula does not hold.
    if k < n && (n - 1).is_multiple_of(n - k) {
        let (m, t) = ((n - 1) / (n - k), n - k);
        if m >= 3 {
            let (branch, terms) = if m % 2 == 1 {
                (Branch::Even, fibonacci(m + 1))
            } else {
                (Branch::Odd, fibonacci(n - m + 1))
            };
            out.push(SpecialFamily {
                kind: FamilyKind::MtPlus1 { m, t },
                w: m,
                parity: m - 1,
                branch,
                terms,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn strings(v: &[TernaryIndex]) -> Vec<String> {
        v.iter().map(|j| j.to_digit_string()).collect()
    }

    fn sorted(v: Vec<&str>) -> Vec<String> {
        let mut v: Vec<String> = v.into_iter().map(String::from).collect();
        v.sort_by_key(|s| TernaryIndex::parse(s).unwrap().value());
        v
    }

    #[test]
    fn derive_params_examples() {
        let p = derive_params(8, 7).unwrap();
        assert_eq!((p.w, p.parity_count, p.d), (7, 6, 1094));
        let p = derive_params(9, 7).unwrap();
        assert_eq!((p.w, p.parity_count), (4, 3));
        let p = derive_params(9, 5).unwrap();
        assert_eq!((p.w, p.parity_count, p.d), (2, 1, 122));
        assert!(matches!(derive_params(8, 4), Err(Error::BadParameters(_))));
        assert!(matches!(derive_params(9, 3), Err(Error::BadParameters(_))));
        assert!(matches!(derive_params(5, 7), Err(Error::BadParameters(_))));
    }

    #[test]
    fn a_and_b_partition_positions() {
        for n in 2..=20 {
            for k in (1..n).step_by(2) {
                let Ok(p) = derive_params(n, k) else { continue };
                let mut all: Vec<u32> = p.set_a().into_iter().chain(p.set_b()).collect();
                all.sort();
                assert_eq!(all, (0..n).collect::<Vec<_>>());
                let window = |s: Vec<u32>| s.into_iter().filter(|&x| x >= n - k).count() as u32;
                assert_eq!(window(p.set_a()) + window(p.set_b()), k);
                assert_eq!(window(p.set_a()), p.parity_count);
            }
        }
    }

    #[test]
    fn fib_count_examples() {
        assert_eq!(fib_count(0).unwrap(), 1);
        assert_eq!(fib_count(1).unwrap(), 2);
        assert_eq!(fib_count(5).unwrap(), 13);
        assert_eq!(fib_count(-1).unwrap(), 1);
        assert_eq!(fib_count(-2).unwrap(), 0);
        assert!(fib_count(-3).is_err());
        for f in -2..30 {
            assert_eq!(fib_count(f).unwrap(), fibonacci((f + 2) as u32));
        }
    }

    // Oracle for N(f): count {0,2}-strings with no "22" by enumeration.
    #[test]
    fn fib_count_matches_enumeration() {
        for f in 0..=12u32 {
            let count = (0u32..1 << f).filter(|m| m & (m >> 1) == 0).count() as u64;
            assert_eq!(fib_count(f as i64).unwrap(), count);
        }
    }

    #[test]
    fn gen_sets_example_n8_k7() {
        let sets = gen_sets(&derive_params(8, 7).unwrap());
        assert_eq!(sets.branch, Branch::Even);
        assert_eq!(
            strings(&sets.u),
            sorted(vec![
                "00000010", "00002010", "00020010", "00200010", "00202010", "02000010", "02002010",
                "02020010", "20000010", "20002010", "20020010", "20200010", "20202010",
            ])
        );
        assert_eq!(
            strings(&sets.v),
            sorted(vec![
                "00000012", "00002012", "00020012", "00200012", "00202012", "02000012", "02002012",
                "02020012",
            ])
        );
    }

    #[test]
    fn gen_sets_example_n9_k7() {
        let sets = gen_sets(&derive_params(9, 7).unwrap());
        assert_eq!(sets.branch, Branch::Odd);
        assert_eq!(
            strings(&sets.u),
            sorted(vec![
                "010101001",
                "010121001",
                "012101001",
                "210101001",
                "210121001"
            ])
        );
        assert_eq!(
            strings(&sets.v),
            sorted(vec!["010101201", "012101201", "210101201"])
        );
    }

    #[test]
    fn gen_sets_example_n9_k5() {
        let sets = gen_sets(&derive_params(9, 5).unwrap());
        assert_eq!((sets.u.len(), sets.v.len()), (13, 8));
    }

    #[test]
    fn gen_sets_k1_is_single_quadratic_index() {
        for n in 2..=9 {
            let sets = gen_sets(&derive_params(n, 1).unwrap());
            assert_eq!(sets.u.len(), 1);
            assert!(sets.v.is_empty());
        }
    }

    #[test]
    fn brute_force_examples() {
        let (s0, s1) = brute_s0_s1(&derive_params(8, 7).unwrap()).unwrap();
        assert_eq!((s0.len(), s1.len()), (104, 64));
        assert!(s0.is_disjoint(&s1));
        let (s0, s1) = brute_s0_s1(&derive_params(9, 7).unwrap()).unwrap();
        assert_eq!((s0.len(), s1.len()), (45, 27));
        assert!(s0.is_disjoint(&s1));
    }

    #[test]
    fn dual_term_counts() {
        for (n, k, count) in [(8, 7, 21), (9, 7, 8), (11, 5, 55)] {
            let ctx = FieldCtx::new(n, None).unwrap();
            let rep = dual_representation(&ctx, ctx.generator(), k).unwrap();
            assert_eq!(rep.terms.len(), count);
            assert_eq!(rep.params.term_count(), count as u64);
        }
    }

    #[test]
    fn dual_rejects_zero_a() {
        let ctx = FieldCtx::new(5, None).unwrap();
        assert_eq!(
            dual_representation(&ctx, FieldElement::ZERO, 3).unwrap_err(),
            Error::ZeroArgument
        );
        assert!(matches!(
            dual_representation(&ctx, FieldElement::ONE, 2),
            Err(Error::BadParameters(_))
        ));
    }

    #[test]
    fn eval_dual_at_zero_and_empty_rep() {
        let ctx = FieldCtx::new(5, None).unwrap();
        let rep = dual_representation(&ctx, FieldElement::ONE, 3).unwrap();
        assert_eq!(rep.eval(&ctx, FieldElement::ZERO), 0);
        let empty = DualRep {
            terms: Vec::new(),
            ..rep
        };
        assert!(ctx.elements().all(|x| empty.eval(&ctx, x) == 0));
        assert_eq!(algebraic_degree(&empty), Err(Error::EmptyRepresentation));
    }

    #[test]
    fn tabulate_matches_eval() {
        let ctx = FieldCtx::new(5, None).unwrap();
        let rep = dual_representation(&ctx, ctx.gen_pow(2), 3).unwrap();
        let table = rep.tabulate(&ctx);
        for x in ctx.elements() {
            assert_eq!(table[x.index() as usize], rep.eval(&ctx, x));
        }
    }

    #[test]
    fn k1_dual_is_minus_x_squared_over_a() {
        // Completing the square: the dual of Tr(a x^2) is Tr(-x^2 / a).
        let ctx = FieldCtx::new(4, None).unwrap();
        for a in [FieldElement::ONE, ctx.generator(), ctx.gen_pow(7)] {
            let rep = dual_representation(&ctx, a, 1).unwrap();
            let inv_a = ctx.inv(a).unwrap();
            for x in ctx.elements() {
                let expected = ctx.trace(-ctx.mul(ctx.mul(x, x), inv_a));
                assert_eq!(rep.eval(&ctx, x), expected);
            }
        }
    }

    #[test]
    fn algebraic_degree_examples() {
        let ctx = FieldCtx::new(8, None).unwrap();
        let rep = dual_representation(&ctx, FieldElement::ONE, 7).unwrap();
        assert_eq!(algebraic_degree(&rep).unwrap(), 8);
        let ctx = FieldCtx::new(9, None).unwrap();
        let rep = dual_representation(&ctx, FieldElement::ONE, 7).unwrap();
        assert_eq!(algebraic_degree(&rep).unwrap(), 6);
        let rep = dual_representation(&ctx, FieldElement::ONE, 1).unwrap();
        assert_eq!(algebraic_degree(&rep).unwrap(), 2);
    }

    #[test]
    fn universal_dual_zero_and_index_set() {
        let ctx = FieldCtx::new(5, None).unwrap();
        assert_eq!(
            universal_dual(&ctx, FieldElement::ONE, 3, FieldElement::ZERO).unwrap(),
            0
        );
        for (n, k) in [(5, 3), (7, 3), (8, 7)] {
            let p = derive_params(n, k).unwrap();
            let (s0, s1) = brute_s0_s1(&p).unwrap();
            let union: BTreeSet<u64> = s0.union(&s1).copied().collect();
            let idx: BTreeSet<u64> = universal_index_set(&p).into_iter().collect();
            assert_eq!(idx, union, "n={n} k={k}");
        }
    }

    #[test]
    fn three_term_detection() {
        assert_eq!(
            ThreeTermVariant::detect(5, 3),
            Some((ThreeTermVariant::One, 1))
        );
        assert_eq!(
            ThreeTermVariant::detect(7, 5),
            Some((ThreeTermVariant::Two, 2))
        );
        assert_eq!(
            ThreeTermVariant::detect(4, 3),
            Some((ThreeTermVariant::Two, 1))
        );
        assert_eq!(
            ThreeTermVariant::detect(8, 5),
            Some((ThreeTermVariant::One, 2))
        );
        assert_eq!(ThreeTermVariant::detect(8, 7), None);
        let ctx = FieldCtx::new(6, None).unwrap();
        assert!(ThreeTermDual::new(&ctx, FieldElement::ONE, ThreeTermVariant::One, 1).is_err());
    }

    #[test]
    fn three_term_matches_general_dual_small() {
        for (n, k) in [(5, 3), (4, 3)] {
            let ctx = FieldCtx::new(n, None).unwrap();
            let (variant, t) = ThreeTermVariant::detect(n, k).unwrap();
            for a in [FieldElement::ONE, ctx.generator()] {
                let three = ThreeTermDual::new(&ctx, a, variant, t).unwrap();
                let rep = dual_representation(&ctx, a, k).unwrap();
                assert_eq!(rep.terms.len(), 3);
                for x in ctx.elements() {
                    assert_eq!(three.eval(x), rep.eval(&ctx, x), "n={n} x={x:?}");
                }
            }
        }
    }

    #[test]
    fn classify_special_examples() {
        let fams = classify_special(9, 5).unwrap();
        let f = fams
            .iter()
            .find(|f| f.kind == FamilyKind::KDividesNPlus1)
            .unwrap();
        assert_eq!((f.w, f.parity, f.terms), (2, 1, 21));

        let fams = classify_special(11, 5).unwrap();
        let f = fams
            .iter()
            .find(|f| f.kind == FamilyKind::KDividesNMinus1)
            .unwrap();
        assert_eq!((f.w, f.parity, f.terms), (9, 4, 55));

        let fams = classify_special(9, 7).unwrap();
        let f = fams
            .iter()
            .find(|f| f.kind == FamilyKind::MtPlusMMinus1 { m: 5, t: 1 })
            .unwrap();
        assert_eq!(f.terms, 8);

        assert!(classify_special(13, 5).unwrap().is_empty());
        assert!(classify_special(8, 4).is_err());
    }

    #[test]
    fn render_and_json() {
        let ctx = FieldCtx::new(9, None).unwrap();
        let rep = dual_representation(&ctx, ctx.generator(), 7).unwrap();
        let text = rep.render();
        assert!(text.starts_with("g(x) = Tr("));
        assert_eq!(text.matches("Tr(").count(), 8);
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["n"], 9);
        assert_eq!(v["k"], 7);
        assert_eq!(v["d"], 1094);
        assert_eq!(v["w"], 4);
        assert_eq!(v["parity"], 3);
        assert_eq!(v["branch"], "odd");
        assert_eq!(v["terms"].as_array().unwrap().len(), 8);
        let t0 = &v["terms"][0];
        assert_eq!(t0["exp"].as_str().unwrap().len(), 9);
        let keys = serde_json::to_string(&rep).unwrap();
        assert!(keys.starts_with(r#"{"n":9,"k":7,"d":1094,"w":4,"parity":3,"branch":"odd","a":"#));
    }
}
