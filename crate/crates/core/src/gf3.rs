//! The field GF(3^n) in polynomial basis.
//!
//! Elements are bit-sliced: one `u64` mask marks the coefficients equal to 1
//! and a second marks those equal to 2, so addition is a handful of bitwise
//! operations and multiplication is a shift-and-add over `n` steps.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::trits::{exponent_modulus, pow3, MAX_N};

/// An element of GF(3^n) as a coefficient vector in the basis `1, x, ..., x^{n-1}`.
///
/// Elements do not carry their field; every operation that needs the
/// modulus goes through a [`FieldCtx`].
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement {
    ones: u64,
    twos: u64,
}

impl FieldElement {
    pub const ZERO: Self = Self { ones: 0, twos: 0 };
    pub const ONE: Self = Self { ones: 1, twos: 0 };

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.ones | self.twos == 0
    }

    /// Builds an element from least-significant-first coefficients.
    pub fn from_coeffs(coeffs: &[u8]) -> Result<Self> {
        if coeffs.len() > 64 {
            return Err(Error::Parse("too many coefficients".into()));
        }
        let mut e = Self::ZERO;
        for (i, &c) in coeffs.iter().enumerate() {
            match c {
                0 => {}
                1 => e.ones |= 1 << i,
                2 => e.twos |= 1 << i,
                _ => return Err(Error::Parse(format!("coefficient {c} is not in GF(3)"))),
            }
        }
        Ok(e)
    }

    /// The constant `c mod 3`.
    pub fn constant(c: u8) -> Self {
        match c % 3 {
            0 => Self::ZERO,
            1 => Self::ONE,
            _ => Self { ones: 0, twos: 1 },
        }
    }

    /// Coefficient of `x^i`.
    #[inline]
    pub fn coeff(&self, i: u32) -> u8 {
        ((self.ones >> i) & 1) as u8 | ((((self.twos >> i) & 1) as u8) << 1)
    }

    /// First `n` coefficients, least significant first.
    pub fn coeffs(&self, n: u32) -> Vec<u8> {
        (0..n).map(|i| self.coeff(i)).collect()
    }

    /// The element whose coefficient vector is the base-3 expansion of `index`.
    pub fn from_index(mut index: u64) -> Self {
        let mut e = Self::ZERO;
        let mut i = 0;
        while index > 0 {
            match index % 3 {
                1 => e.ones |= 1 << i,
                2 => e.twos |= 1 << i,
                _ => {}
            }
            index /= 3;
            i += 1;
        }
        e
    }

    /// `Σ c_i 3^i`, the position of this element in index-ordered tables.
    #[inline]
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        let mut m = self.ones;
        while m != 0 {
            idx += POW3[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        let mut m = self.twos;
        while m != 0 {
            idx += 2 * POW3[m.trailing_zeros() as usize];
            m &= m - 1;
        }
        idx
    }

    /// Most-significant-first coefficient string of length `n`.
    pub fn to_digit_string(&self, n: u32) -> String {
        (0..n)
            .rev()
            .map(|i| char::from(b'0' + self.coeff(i)))
            .collect()
    }

    /// `c · self` for `c` in GF(3).
    pub fn scale(self, c: u8) -> Self {
        match c % 3 {
            0 => Self::ZERO,
            1 => self,
            _ => -self,
        }
    }

    /// Value of the constant coefficient when every other coefficient is zero.
    pub fn as_prime_subfield(&self) -> Option<u8> {
        if (self.ones | self.twos) & !1 != 0 {
            None
        } else {
            Some(self.coeff(0))
        }
    }
}

const POW3: [u64; 41] = {
    let mut t = [1u64; 41];
    let mut i = 1;
    while i < 41 {
        t[i] = t[i - 1] * 3;
        i += 1;
    }
    t
};

impl Add for FieldElement {
    type Output = Self;
    #[inline]
    fn add(self, y: Self) -> Self {
        let x0 = !(self.ones | self.twos);
        let y0 = !(y.ones | y.twos);
        Self {
            ones: (self.ones & y0) | (x0 & y.ones) | (self.twos & y.twos),
            twos: (self.twos & y0) | (x0 & y.twos) | (self.ones & y.ones),
        }
    }
}

impl Neg for FieldElement {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            ones: self.twos,
            twos: self.ones,
        }
    }
}

impl Sub for FieldElement {
    type Output = Self;
    #[inline]
    fn sub(self, y: Self) -> Self {
        self + (-y)
    }
}

impl fmt::Debug for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let top = 64 - (self.ones | self.twos).leading_zeros();
        write!(f, "F[{}]", self.to_digit_string(top.max(1)))
    }
}

/// Polynomial arithmetic modulo a monic degree-`n` polynomial, irreducible
/// or not. Shared by the field and by the irreducibility test.
#[derive(Clone, Debug)]
struct ReductionRing {
    n: u32,
    mask: u64,
    /// `x^n` reduced, i.e. minus the low part of the modulus.
    x_to_n: FieldElement,
}

impl ReductionRing {
    fn new(modulus: &[u8]) -> Self {
        let n = (modulus.len() - 1) as u32;
        let low =
            FieldElement::from_coeffs(&modulus[..n as usize]).expect("validated coefficients");
        Self {
            n,
            mask: if n == 64 { u64::MAX } else { (1u64 << n) - 1 },
            x_to_n: -low,
        }
    }

    #[inline]
    fn mul_x(&self, v: FieldElement) -> FieldElement {
        let top = v.coeff(self.n - 1);
        let shifted = FieldElement {
            ones: (v.ones << 1) & self.mask,
            twos: (v.twos << 1) & self.mask,
        };
        match top {
            0 => shifted,
            1 => shifted + self.x_to_n,
            _ => shifted - self.x_to_n,
        }
    }

    #[inline]
    fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        let mut acc = FieldElement::ZERO;
        let top = 64 - (y.ones | y.twos).leading_zeros();
        for i in (0..top).rev() {
            acc = self.mul_x(acc);
            if (y.ones >> i) & 1 == 1 {
                acc = acc + x;
            } else if (y.twos >> i) & 1 == 1 {
                acc = acc - x;
            }
        }
        acc
    }

    fn pow(&self, x: FieldElement, mut e: u64) -> FieldElement {
        let mut base = x;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }
}

// Dense polynomials over GF(3), least significant first, used only for gcd.
fn trim(p: &mut Vec<u8>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

fn poly_rem(mut a: Vec<u8>, b: &[u8]) -> Vec<u8> {
    trim(&mut a);
    let db = b.len() - 1;
    // leading coefficient inverse in GF(3): 1 -> 1, 2 -> 2
    let inv = b[db];
    while a.len() > db {
        let shift = a.len() - 1 - db;
        let factor = (a[a.len() - 1] * inv) % 3;
        for (i, &c) in b.iter().enumerate() {
            a[shift + i] = (a[shift + i] + 3 * 3 - factor * c) % 3;
        }
        trim(&mut a);
    }
    a
}

fn poly_gcd(a: &[u8], b: &[u8]) -> Vec<u8> {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let r = poly_rem(a, &b);
        a = b;
        b = r;
    }
    a
}

/// Ben-Or irreducibility test for a monic polynomial, coefficients least
/// significant first.
pub fn is_irreducible(modulus: &[u8]) -> bool {
    let n = modulus.len().saturating_sub(1);
    if n == 0 {
        return false;
    }
    if n == 1 {
        return true;
    }
    let ring = ReductionRing::new(modulus);
    let x = FieldElement {
        ones: 0b10,
        twos: 0,
    };
    let mut h = x;
    for _ in 1..=n / 2 {
        h = ring.pow(h, 3);
        let diff = (h - x).coeffs(n as u32);
        if poly_gcd(modulus, &diff).len() != 1 {
            return false;
        }
    }
    true
}

fn check_degree(n: u32) -> Result<()> {
    if !(2..=MAX_N).contains(&n) {
        return Err(Error::BadParameters(vec![format!(
            "n must satisfy 2 <= n <= {MAX_N}"
        )]));
    }
    Ok(())
}

/// The lexicographically smallest monic irreducible polynomial of degree
/// `n`, compared on most-significant-first coefficient strings. Returned
/// least significant first, length `n + 1`.
pub fn find_irreducible(n: u32) -> Result<Vec<u8>> {
    check_degree(n)?;
    // Lexicographic order on "1 c_{n-1} ... c_0" is numeric order of Σ c_i 3^i.
    for v in 0..pow3(n) {
        let mut poly = FieldElement::from_index(v).coeffs(n);
        poly.push(1);
        if is_irreducible(&poly) {
            return Ok(poly);
        }
    }
    unreachable!("irreducible polynomials exist in every degree")
}

/// Distinct prime factors of `m`, by trial division.
pub fn prime_factors(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= m {
        if m.is_multiple_of(p) {
            out.push(p);
            while m.is_multiple_of(p) {
                m /= p;
            }
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Parses a most-significant-first polynomial string such as `"1021"`.
pub fn parse_polynomial(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .rev()
        .map(|ch| {
            ch.to_digit(3)
                .map(|d| d as u8)
                .ok_or_else(|| Error::Parse(format!("invalid coefficient {ch:?} in {s:?}")))
        })
        .collect()
}

/// Immutable description of GF(3^n).
#[derive(Clone, Debug)]
pub struct FieldCtx {
    n: u32,
    modulus: Vec<u8>,
    ring: ReductionRing,
    generator: FieldElement,
    order_factors: Vec<u64>,
    trace_ones: u64,
    trace_twos: u64,
}

impl FieldCtx {
    /// Builds GF(3^n), with the default modulus when none is given.
    pub fn new(n: u32, modulus: Option<&[u8]>) -> Result<Self> {
        check_degree(n)?;
        let modulus = match modulus {
            None => find_irreducible(n)?,
            Some(m) => {
                let mut m = m.to_vec();
                trim(&mut m);
                if m.iter().any(|&c| c > 2) {
                    return Err(Error::Parse("modulus coefficients must be ternary".into()));
                }
                let got = m.len().saturating_sub(1) as u32;
                if got != n {
                    return Err(Error::DegreeMismatch { expected: n, got });
                }
                if m[n as usize] != 1 {
                    return Err(Error::NotMonic);
                }
                if !is_irreducible(&m) {
                    return Err(Error::ReducibleModulus);
                }
                m
            }
        };
        let ring = ReductionRing::new(&modulus);
        let order = exponent_modulus(n);
        let order_factors = prime_factors(order);
        let mut ctx = Self {
            n,
            modulus,
            ring,
            generator: FieldElement::ZERO,
            order_factors,
            trace_ones: 0,
            trace_twos: 0,
        };
        for i in 0..n {
            let basis = FieldElement {
                ones: 1 << i,
                twos: 0,
            };
            match ctx.trace_by_definition(basis)? {
                1 => ctx.trace_ones |= 1 << i,
                2 => ctx.trace_twos |= 1 << i,
                _ => {}
            }
        }
        ctx.generator = (1..pow3(n))
            .map(FieldElement::from_index)
            .find(|&x| ctx.has_full_order(x))
            .expect("the multiplicative group is cyclic");
        Ok(ctx)
    }

    /// Builds the field from a most-significant-first modulus string.
    pub fn with_modulus_str(n: u32, modulus: &str) -> Result<Self> {
        Self::new(n, Some(&parse_polynomial(modulus)?))
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Number of elements, `3^n`.
    #[inline]
    pub fn size(&self) -> u64 {
        pow3(self.n)
    }

    /// Order of the multiplicative group, `3^n - 1`.
    #[inline]
    pub fn group_order(&self) -> u64 {
        exponent_modulus(self.n)
    }

    /// Modulus coefficients, least significant first.
    pub fn modulus(&self) -> &[u8] {
        &self.modulus
    }

    pub fn modulus_string(&self) -> String {
        self.modulus
            .iter()
            .rev()
            .map(|&d| char::from(b'0' + d))
            .collect()
    }

    pub fn generator(&self) -> FieldElement {
        self.generator
    }

    /// Distinct primes dividing `3^n - 1`.
    pub fn order_factors(&self) -> &[u64] {
        &self.order_factors
    }

    fn has_full_order(&self, x: FieldElement) -> bool {
        let m = self.group_order();
        !x.is_zero()
            && self.pow_u(x, m) == FieldElement::ONE
            && self
                .order_factors
                .iter()
                .all(|&q| self.pow_u(x, m / q) != FieldElement::ONE)
    }

    #[inline]
    pub fn mul(&self, x: FieldElement, y: FieldElement) -> FieldElement {
        self.ring.mul(x, y)
    }

    /// `x^e` for a nonnegative exponent; `pow_u(0, 0) = 1`.
    pub fn pow_u(&self, x: FieldElement, e: u64) -> FieldElement {
        if x.is_zero() {
            return if e == 0 {
                FieldElement::ONE
            } else {
                FieldElement::ZERO
            };
        }
        self.ring.pow(x, e % self.group_order())
    }

    /// `x^e` for any integer exponent. Negative powers of zero fail.
    pub fn pow(&self, x: FieldElement, e: i128) -> Result<FieldElement> {
        if x.is_zero() {
            return match e {
                0 => Ok(FieldElement::ONE),
                e if e > 0 => Ok(FieldElement::ZERO),
                _ => Err(Error::ZeroInverse),
            };
        }
        let m = self.group_order() as i128;
        Ok(self.ring.pow(x, e.rem_euclid(m) as u64))
    }

    pub fn inv(&self, x: FieldElement) -> Result<FieldElement> {
        self.pow(x, -1)
    }

    /// `g^e` for the context generator.
    pub fn gen_pow(&self, e: i128) -> FieldElement {
        self.pow(self.generator, e).expect("generator is nonzero")
    }

    /// Absolute trace to GF(3), from the precomputed traces of the basis.
    #[inline]
    pub fn trace(&self, x: FieldElement) -> u8 {
        let (o, t) = (x.ones, x.twos);
        let s = (o & self.trace_ones).count_ones()
            + 2 * (o & self.trace_twos).count_ones()
            + 2 * (t & self.trace_ones).count_ones()
            + (t & self.trace_twos).count_ones();
        (s % 3) as u8
    }

    /// `x + x^3 + ... + x^{3^{n-1}}` evaluated literally.
    pub fn trace_by_definition(&self, x: FieldElement) -> Result<u8> {
        let mut acc = FieldElement::ZERO;
        let mut y = x;
        for _ in 0..self.n {
            acc = acc + y;
            y = self.ring.pow(y, 3);
        }
        acc.as_prime_subfield().ok_or(Error::NotInPrimeSubfield)
    }

    /// Quadratic character: +1 on nonzero squares, -1 otherwise.
    pub fn eta(&self, a: FieldElement) -> Result<i8> {
        if a.is_zero() {
            return Err(Error::ZeroArgument);
        }
        let h = self.pow_u(a, self.group_order() / 2);
        Ok(if h == FieldElement::ONE { 1 } else { -1 })
    }

    /// Element at position `index` of index-ordered tables.
    #[inline]
    pub fn element(&self, index: u64) -> FieldElement {
        debug_assert!(index < self.size());
        FieldElement::from_index(index)
    }

    /// All elements in index order.
    pub fn elements(&self) -> impl Iterator<Item = FieldElement> {
        (0..self.size()).map(FieldElement::from_index)
    }

    pub fn format(&self, x: FieldElement) -> String {
        x.to_digit_string(self.n)
    }

    /// Parses `"201"` (most significant first, at most `n` digits, left
    /// padded), `"g"` or `"g^e"` with a possibly negative `e`.
    pub fn parse_element(&self, s: &str) -> Result<FieldElement> {
        let s = s.trim();
        if s == "g" {
            return Ok(self.generator);
        }
        if let Some(e) = s.strip_prefix("g^") {
            let e: i128 = e
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in {s:?}")))?;
            return Ok(self.gen_pow(e));
        }
        if s.is_empty() || s.len() > self.n as usize {
            return Err(Error::Parse(format!(
                "element {s:?} must have 1..={} digits",
                self.n
            )));
        }
        FieldElement::from_coeffs(&parse_polynomial(s)?)
    }
}

impl Serialize for FieldCtx {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FieldCtx", 3)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("modulus", &self.modulus_string())?;
        st.serialize_field("generator", &self.format(self.generator))?;
        st.end()
    }
}

/// Checks `n >= 2`, `k` odd, `1 <= k < n` and `gcd(n, k) = 1`, collecting
/// every failed condition.
pub fn check_cm_parameters(n: u32, k: u32) -> Result<()> {
    let mut reasons = Vec::new();
    if !(2..=MAX_N).contains(&n) {
        reasons.push(format!("n must satisfy 2 <= n <= {MAX_N}"));
    }
    if k.is_multiple_of(2) {
        reasons.push("k must be odd".to_string());
    }
    if k < 1 || k >= n {
        reasons.push("k must satisfy 1 <= k < n".to_string());
    }
    if gcd(n, k) != 1 {
        reasons.push("gcd(n, k) must be 1".to_string());
    }
    if reasons.is_empty() {
        Ok(())
    } else {
        Err(Error::BadParameters(reasons))
    }
}

pub fn gcd(mut a: u32, mut b: u32) -> u32 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// The exponent `(3^k + 1) / 2`.
pub fn cm_exponent(k: u32) -> u64 {
    pow3(k).div_ceil(2)
}

/// The Coulter-Matthews function `x ↦ Tr(a x^d)` with `d = (3^k + 1) / 2`.
#[derive(Clone, Copy, Debug)]
pub struct CmFunction<'a> {
    ctx: &'a FieldCtx,
    a: FieldElement,
    k: u32,
    d: u64,
}

impl<'a> CmFunction<'a> {
    pub fn new(ctx: &'a FieldCtx, a: FieldElement, k: u32) -> Result<Self> {
        let mut reasons = match check_cm_parameters(ctx.n, k) {
            Ok(()) => Vec::new(),
            Err(Error::BadParameters(r)) => r,
            Err(e) => return Err(e),
        };
        if a.is_zero() {
            reasons.push("a must be nonzero".to_string());
        }
        if !reasons.is_empty() {
            return Err(Error::BadParameters(reasons));
        }
        Ok(Self {
            ctx,
            a,
            k,
            d: cm_exponent(k),
        })
    }

    pub fn ctx(&self) -> &'a FieldCtx {
        self.ctx
    }

    pub fn a(&self) -> FieldElement {
        self.a
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn exponent(&self) -> u64 {
        self.d
    }

    pub fn eval(&self, x: FieldElement) -> u8 {
        self.ctx
            .trace(self.ctx.mul(self.a, self.ctx.pow_u(x, self.d)))
    }

    /// Values at every element, in index order. Walks the generator's
    /// powers so each entry costs two multiplications.
    pub fn tabulate(&self) -> Vec<u8> {
        let ctx = self.ctx;
        let mut table = vec![0u8; ctx.size() as usize];
        let g = ctx.generator();
        let g_d = ctx.pow_u(g, self.d);
        let mut x = FieldElement::ONE;
        let mut y = self.a;
        for _ in 0..ctx.group_order() {
            table[x.index() as usize] = ctx.trace(y);
            x = ctx.mul(x, g);
            y = ctx.mul(y, g_d);
        }
        table
    }
}
