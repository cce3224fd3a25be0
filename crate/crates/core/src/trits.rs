//! Ternary representations of exponents modulo `3^n - 1`.
//!
//! Every exponent that appears in a trace representation over GF(3^n) is a
//! residue modulo `3^n - 1`. This module holds the digit-level machinery the
//! dual construction is phrased in: ternary weight, the digit-factorial
//! product `sigma`, the cyclic add-with-carry relation and cyclotomic cosets.
//!
//! Digits are stored least-significant first. All textual forms are
//! most-significant first and exactly `n` characters long, so `3` with
//! `n = 8` prints as `"00000010"`.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported extension degree; keeps `3^n - 1` below `2^61`.
pub const MAX_N: u32 = 38;

/// `3^e` as a `u64`. Panics past `3^40`.
pub fn pow3(e: u32) -> u64 {
    3u64.checked_pow(e).expect("3^e overflows u64")
}

/// The modulus `3^n - 1` that exponents live in.
pub fn exponent_modulus(n: u32) -> u64 {
    pow3(n) - 1
}

fn check_n(n: u32) {
    assert!(
        (1..=MAX_N).contains(&n),
        "n must be in 1..={MAX_N}, got {n}"
    );
}

/// An exponent in `[0, 3^n - 1)` together with its digit count.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryIndex {
    n: u32,
    value: u64,
}

/// Reduces any integer into `[0, 3^n - 1)`.
pub fn residue(j: i128, n: u32) -> TernaryIndex {
    check_n(n);
    let m = exponent_modulus(n) as i128;
    TernaryIndex {
        n,
        value: j.rem_euclid(m) as u64,
    }
}

impl TernaryIndex {
    /// Wraps a value that is already reduced. Fails when `value >= 3^n - 1`.
    pub fn new(value: u64, n: u32) -> Result<Self> {
        check_n(n);
        if value >= exponent_modulus(n) {
            return Err(Error::Parse(format!(
                "{value} is not a residue modulo 3^{n}-1"
            )));
        }
        Ok(Self { n, value })
    }

    pub fn zero(n: u32) -> Self {
        check_n(n);
        Self { n, value: 0 }
    }

    /// Builds an index from least-significant-first digits.
    pub fn from_digits(digits: &[u8]) -> Result<Self> {
        let n = digits.len() as u32;
        if n == 0 || n > MAX_N {
            return Err(Error::Parse(format!("digit count {n} out of range")));
        }
        let mut value = 0u64;
        for &d in digits.iter().rev() {
            if d > 2 {
                return Err(Error::Parse(format!("digit {d} is not ternary")));
            }
            value = value * 3 + d as u64;
        }
        Self::new(value, n)
    }

    /// Parses a most-significant-first digit string; its length fixes `n`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut digits = Vec::with_capacity(s.len());
        for ch in s.chars().rev() {
            match ch.to_digit(3) {
                Some(d) => digits.push(d as u8),
                None => {
                    return Err(Error::Parse(format!(
                        "invalid ternary digit {ch:?} in {s:?}"
                    )))
                }
            }
        }
        Self::from_digits(&digits)
    }

    #[inline]
    pub fn n(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn value(&self) -> u64 {
        self.value
    }

    /// Digit `i` (coefficient of `3^i`); `i` is taken modulo `n`.
    #[inline]
    pub fn digit(&self, i: i64) -> u8 {
        let i = i.rem_euclid(self.n as i64) as u32;
        ((self.value / pow3(i)) % 3) as u8
    }

    /// Digits, least significant first.
    pub fn digits(&self) -> Vec<u8> {
        let mut v = self.value;
        (0..self.n)
            .map(|_| {
                let d = (v % 3) as u8;
                v /= 3;
                d
            })
            .collect()
    }

    /// Most-significant-first string of exactly `n` digits.
    pub fn to_digit_string(&self) -> String {
        self.digits()
            .iter()
            .rev()
            .map(|d| char::from(b'0' + d))
            .collect()
    }

    /// `-j` reduced; for nonzero `j` this is the digit complement.
    pub fn neg(&self) -> Self {
        residue(-(self.value as i128), self.n)
    }

    /// Sum of digits.
    pub fn weight(&self) -> u32 {
        let mut v = self.value;
        let mut w = 0;
        while v > 0 {
            w += (v % 3) as u32;
            v /= 3;
        }
        w
    }

    /// Number of digits equal to 2.
    pub fn n2(&self) -> u32 {
        let mut v = self.value;
        let mut c = 0;
        while v > 0 {
            if v % 3 == 2 {
                c += 1;
            }
            v /= 3;
        }
        c
    }

    /// Product of digit factorials, which is `2^{n2}`.
    pub fn sigma(&self) -> u64 {
        self.digits()
            .iter()
            .map(|&d| if d == 2 { 2 } else { 1 })
            .product()
    }

    /// `j * 3^m` reduced, i.e. a cyclic digit rotation by `m` places.
    pub fn rotate(&self, m: u32) -> Self {
        self.mul(pow3(m % self.n) as i128)
    }

    /// `j * c` reduced modulo `3^n - 1`.
    pub fn mul(&self, c: i128) -> Self {
        let m = exponent_modulus(self.n) as i128;
        let c = c.rem_euclid(m);
        residue(self.value as i128 * c, self.n)
    }

    /// `j + c` reduced modulo `3^n - 1`.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "digit counts differ");
        residue(self.value as i128 + other.value as i128, self.n)
    }
}

impl fmt::Debug for TernaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.to_digit_string(), self.value)
    }
}

impl fmt::Display for TernaryIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_digit_string())
    }
}

impl Serialize for TernaryIndex {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_digit_string())
    }
}

/// Carries `c_0, ..., c_{n-1}` of a cyclic ternary addition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarryVector {
    pub bits: Vec<u8>,
}

impl CarryVector {
    pub fn weight(&self) -> u32 {
        self.bits.iter().map(|&b| b as u32).sum()
    }
}

/// Solves `t_i + 3 c_i = r_i + s_i + c_{i-1}` with indices taken modulo `n`.
///
/// The carry into position 0 is the carry out of position `n - 1`, so both
/// choices are tried and the wrap-around checked. When `r + s ≡ 0` both
/// choices close up, one giving the all-twos string; that string equals
/// `3^n - 1` and is not a residue, so the all-ones carry solution is kept.
pub fn add_with_carry(r: &TernaryIndex, s: &TernaryIndex) -> (TernaryIndex, CarryVector) {
    assert_eq!(r.n, s.n, "digit counts differ");
    let n = r.n as usize;
    let rd = r.digits();
    let sd = s.digits();
    for wrap in [0u8, 1u8] {
        let mut carry = wrap;
        let mut t = vec![0u8; n];
        let mut c = vec![0u8; n];
        for i in 0..n {
            let sum = rd[i] + sd[i] + carry;
            t[i] = sum % 3;
            c[i] = sum / 3;
            carry = c[i];
        }
        if carry != wrap || t.iter().all(|&d| d == 2) {
            continue;
        }
        let t = TernaryIndex::from_digits(&t).expect("digits are ternary and t < 3^n - 1");
        debug_assert_eq!(t, r.add(s));
        return (t, CarryVector { bits: c });
    }
    unreachable!("cyclic carry system always has a residue solution")
}

/// Digit test for `wt(r) + wt(s) == wt(r + s)`: every `r_i + s_i <= 2` and
/// at least one position sums below 2.
pub fn wt_sum_eq(r: &TernaryIndex, s: &TernaryIndex) -> bool {
    assert_eq!(r.n, s.n, "digit counts differ");
    let sums: Vec<u8> = r
        .digits()
        .iter()
        .zip(s.digits())
        .map(|(a, b)| a + b)
        .collect();
    sums.iter().all(|&x| x <= 2) && sums.iter().any(|&x| x < 2)
}

/// Digit test for `wt(r) + wt(s) == wt(r + s) + 2`: one position `j` sums
/// to at least 3, position `j + 1` (cyclically) sums to at most 1, and all
/// other positions sum to at most 2.
pub fn wt_sum_plus2(r: &TernaryIndex, s: &TernaryIndex) -> bool {
    assert_eq!(r.n, s.n, "digit counts differ");
    let n = r.n as usize;
    let sums: Vec<u8> = r
        .digits()
        .iter()
        .zip(s.digits())
        .map(|(a, b)| a + b)
        .collect();
    (0..n).any(|j| {
        let next = (j + 1) % n;
        sums[j] >= 3
            && sums[next] <= 1
            && (0..n)
                .filter(|&i| i != j && i != next)
                .all(|i| sums[i] <= 2)
    })
}

/// A cyclotomic coset modulo `3^n - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coset {
    pub n: u32,
    /// Smallest member.
    pub leader: u64,
    /// Members in orbit order `leader, 3 leader, 9 leader, ...`.
    pub members: Vec<u64>,
}

impl Coset {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, j: u64) -> bool {
        self.members.contains(&j)
    }
}

/// Orbit of `j` under multiplication by 3.
pub fn orbit(j: u64, n: u32) -> Vec<u64> {
    check_n(n);
    let m = exponent_modulus(n) as u128;
    let mut members = vec![j];
    let mut x = (j as u128 * 3 % m) as u64;
    while x != j {
        members.push(x);
        x = (x as u128 * 3 % m) as u64;
    }
    members
}

/// The coset containing `j`, listed from its leader.
pub fn coset_of(j: u64, n: u32) -> Coset {
    check_n(n);
    assert!(j < exponent_modulus(n), "j must be below 3^n - 1");
    let leader = *orbit(j, n).iter().min().expect("orbit is nonempty");
    Coset {
        n,
        leader,
        members: orbit(leader, n),
    }
}

/// All coset leaders modulo `3^n - 1`, ascending. Linear in `3^n`.
pub fn coset_leaders(n: u32) -> Vec<u64> {
    check_n(n);
    let m = exponent_modulus(n);
    (0..m)
        .filter(|&j| {
            let mut x = j;
            for _ in 1..n {
                x = (x as u128 * 3 % m as u128) as u64;
                if x < j {
                    return false;
                }
            }
            true
        })
        .collect()
}
