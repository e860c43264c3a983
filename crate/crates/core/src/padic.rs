//! Truncated p-adic integers and valuations of linear forms `yξ − x`.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Trial-division primality test, enough for the small primes used here.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Checks `p` and narrows it to `u32`.
pub fn check_prime(p: u64) -> Result<u32> {
    if p > u64::from(u32::MAX) || !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(p as u32)
}

/// `p^e` as a big integer.
pub fn p_pow(p: u32, e: u64) -> BigUint {
    if p == 2 {
        return BigUint::one() << e;
    }
    let e = u32::try_from(e).expect("exponent fits in u32");
    BigUint::from(p).pow(e)
}

/// p-adic valuation of a nonzero big integer.
pub fn vp_biguint(n: &BigUint, p: u32) -> u64 {
    assert!(!n.is_zero(), "valuation of zero");
    if p == 2 {
        return n.trailing_zeros().expect("nonzero");
    }
    // Strip squared powers p^(2^i) from the largest one down.
    let mut powers = vec![BigUint::from(p)];
    while powers.last().unwrap().bits() * 2 <= n.bits() + 1 {
        let last = powers.last().unwrap();
        powers.push(last * last);
    }
    let mut v = 0u64;
    let mut m = n.clone();
    for (i, pw) in powers.iter().enumerate().rev() {
        loop {
            let (q, r) = m.div_rem(pw);
            if !r.is_zero() {
                break;
            }
            m = q;
            v += 1u64 << i;
        }
    }
    v
}

/// p-adic valuation of a nonzero signed big integer.
pub fn vp_bigint(n: &BigInt, p: u32) -> u64 {
    vp_biguint(n.magnitude(), p)
}

/// Valuation of a quantity known only modulo a power of p.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Valuation {
    Exact(u64),
    /// The computed residue vanished to full usable precision.
    AtLeast(u64),
}

impl Valuation {
    pub fn value(self) -> u64 {
        match self {
            Valuation::Exact(v) | Valuation::AtLeast(v) => v,
        }
    }

    pub fn is_exact(self) -> bool {
        matches!(self, Valuation::Exact(_))
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Exact(v) => write!(f, "{v}"),
            Valuation::AtLeast(v) => write!(f, ">={v}"),
        }
    }
}

/// A p-adic integer known through its first `precision` Hensel digits.
///
/// `digits[i]` is the coefficient of `p^i`.
pub struct PAdicNumber {
    p: u32,
    digits: Vec<u32>,
    residue: OnceLock<BigUint>,
}

impl Clone for PAdicNumber {
    fn clone(&self) -> Self {
        PAdicNumber {
            p: self.p,
            digits: self.digits.clone(),
            residue: self.residue.clone(),
        }
    }
}

impl PartialEq for PAdicNumber {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.digits == other.digits
    }
}

impl Eq for PAdicNumber {}

impl fmt::Debug for PAdicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shown: Vec<u32> = self.digits.iter().take(16).copied().collect();
        f.debug_struct("PAdicNumber")
            .field("p", &self.p)
            .field("precision", &self.digits.len())
            .field("low_digits", &shown)
            .finish()
    }
}

impl PAdicNumber {
    pub fn from_digits(p: u64, digits: Vec<u32>) -> Result<Self> {
        let p = check_prime(p)?;
        if digits.is_empty() {
            return Err(Error::EmptyDigits);
        }
        if let Some((index, &digit)) = digits.iter().enumerate().find(|(_, &d)| d >= p) {
            return Err(Error::DigitOutOfRange {
                index,
                digit: u64::from(digit),
                p,
            });
        }
        Ok(PAdicNumber {
            p,
            digits,
            residue: OnceLock::new(),
        })
    }

    /// The p-adic expansion of `num / den` to `precision` digits.
    pub fn from_rational(p: u64, num: &BigInt, den: &BigInt, precision: usize) -> Result<Self> {
        let p = check_prime(p)?;
        if precision == 0 {
            return Err(Error::EmptyDigits);
        }
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        let pb = BigInt::from(p);
        if (den % &pb).is_zero() {
            return Err(Error::DenominatorDivisibleByP(p));
        }
        let modulus = BigInt::from(p_pow(p, precision as u64));
        let den_mod = den.mod_floor(&modulus);
        let inv = den_mod
            .modinv(&modulus)
            .expect("den is a unit modulo p^precision");
        let value = (num.mod_floor(&modulus) * inv).mod_floor(&modulus);
        let value = value.to_biguint().expect("reduced value is non-negative");
        Ok(Self::from_residue_unchecked(p, &value, precision))
    }

    /// Digits of a non-negative integer reduced modulo `p^precision`.
    pub fn from_integer(p: u64, value: &BigUint, precision: usize) -> Result<Self> {
        let p = check_prime(p)?;
        if precision == 0 {
            return Err(Error::EmptyDigits);
        }
        let value = value % p_pow(p, precision as u64);
        Ok(Self::from_residue_unchecked(p, &value, precision))
    }

    fn from_residue_unchecked(p: u32, value: &BigUint, precision: usize) -> Self {
        let mut digits = integer_to_digits(value, p);
        digits.resize(precision, 0);
        let residue = OnceLock::new();
        let _ = residue.set(value.clone());
        PAdicNumber { p, digits, residue }
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.digits.len()
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    /// `Σ_{i < precision} digits[i] p^i`, computed once.
    pub fn full_residue(&self) -> &BigUint {
        self.residue
            .get_or_init(|| digits_to_integer(&self.digits, self.p))
    }

    /// `ξ mod p^v` as the integer `Σ_{i < v} digits[i] p^i`.
    pub fn residue(&self, v: usize) -> Result<BigUint> {
        if v > self.precision() {
            return Err(Error::PrecisionExceeded {
                requested: v as u64,
                precision: self.precision() as u64,
            });
        }
        if v == self.precision() {
            return Ok(self.full_residue().clone());
        }
        if self.p == 2 {
            let mask = (BigUint::one() << v) - 1u32;
            return Ok(self.full_residue() & mask);
        }
        Ok(digits_to_integer(&self.digits[..v], self.p))
    }

    /// `Σ_{i ≤ cutoff} digits[i] p^i`, an integer agreeing with ξ to `cutoff + 1` digits.
    pub fn truncation_integer(&self, cutoff: usize) -> Result<BigUint> {
        if cutoff >= self.precision() {
            return Err(Error::PrecisionExceeded {
                requested: cutoff as u64 + 1,
                precision: self.precision() as u64,
            });
        }
        self.residue(cutoff + 1)
    }

    /// Valuation of `yξ − x`.
    ///
    /// With `e = v_p(y)` the form is known modulo `p^(precision + e)`, so any
    /// valuation at or beyond that bound is reported as `AtLeast`.
    pub fn linear_form_valuation(&self, x: &BigInt, y: &BigInt) -> Result<Valuation> {
        if y.is_zero() {
            if x.is_zero() {
                return Err(Error::ZeroForm);
            }
            return Ok(Valuation::Exact(vp_bigint(x, self.p)));
        }
        let cap = self.precision() as u64 + vp_bigint(y, self.p);
        let r = BigInt::from_biguint(Sign::Plus, self.full_residue().clone());
        let form = y * r - x;
        if form.is_zero() {
            return Ok(Valuation::AtLeast(cap));
        }
        let t = vp_bigint(&form, self.p);
        Ok(if t < cap {
            Valuation::Exact(t)
        } else {
            Valuation::AtLeast(cap)
        })
    }

    /// Exact p-adic valuation of ξ itself, if it is visible at this precision.
    pub fn valuation(&self) -> Valuation {
        match self.digits.iter().position(|&d| d != 0) {
            Some(i) => Valuation::Exact(i as u64),
            None => Valuation::AtLeast(self.precision() as u64),
        }
    }
}

fn digits_to_integer(digits: &[u32], p: u32) -> BigUint {
    if digits.is_empty() {
        return BigUint::zero();
    }
    if p <= 256 {
        let bytes: Vec<u8> = digits.iter().map(|&d| d as u8).collect();
        return BigUint::from_radix_le(&bytes, p).expect("digits below radix");
    }
    // Split in halves so the multiplications stay balanced.
    if digits.len() <= 64 {
        let mut acc = BigUint::zero();
        for &d in digits.iter().rev() {
            acc = acc * p + d;
        }
        return acc;
    }
    let mid = digits.len() / 2;
    let lo = digits_to_integer(&digits[..mid], p);
    let hi = digits_to_integer(&digits[mid..], p);
    lo + hi * p_pow(p, mid as u64)
}

fn integer_to_digits(value: &BigUint, p: u32) -> Vec<u32> {
    if value.is_zero() {
        return Vec::new();
    }
    if p <= 256 {
        return value.to_radix_le(p).into_iter().map(u32::from).collect();
    }
    let mut out = Vec::new();
    let mut m = value.clone();
    let pb = BigUint::from(p);
    while !m.is_zero() {
        let (q, r) = m.div_rem(&pb);
        out.push(r.to_u32().expect("digit below p"));
        m = q;
    }
    out
}

/// An integer pair `(x, y)` together with the valuation of `yξ − x` and its heights.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxPair {
    pub x: BigInt,
    pub y: BigInt,
    pub val: Valuation,
    /// `max(|x|, |y|)`.
    pub height_sup: BigUint,
    /// `|x| |y|`, the square of the multiplicative height.
    pub height_mult_sq: BigUint,
}

impl ApproxPair {
    pub fn new(xi: &PAdicNumber, x: BigInt, y: BigInt) -> Result<Self> {
        let val = xi.linear_form_valuation(&x, &y)?;
        Ok(Self::with_valuation(x, y, val))
    }

    pub fn with_valuation(x: BigInt, y: BigInt, val: Valuation) -> Self {
        let ax = x.magnitude();
        let ay = y.magnitude();
        let height_sup = ax.max(ay).clone();
        let height_mult_sq = ax * ay;
        ApproxPair {
            x,
            y,
            val,
            height_sup,
            height_mult_sq,
        }
    }

    /// Flips both signs so that `y > 0` (or `x > 0` when `y = 0`).
    pub fn normalized(mut self) -> Self {
        if self.y.is_negative() || (self.y.is_zero() && self.x.is_negative()) {
            self.x = -self.x;
            self.y = -self.y;
        }
        self
    }

    pub fn is_coprime(&self) -> bool {
        self.x.gcd(&self.y).is_one()
    }

    /// Natural log of the sup height.
    pub fn ln_height_sup(&self) -> f64 {
        ln_biguint(&self.height_sup)
    }

    /// Natural log of `√|xy|`.
    pub fn ln_height_mult(&self) -> f64 {
        ln_biguint(&self.height_mult_sq) / 2.0
    }
}

/// Natural logarithm of a positive big integer, accurate for any size.
pub fn ln_biguint(n: &BigUint) -> f64 {
    assert!(!n.is_zero(), "log of zero");
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().expect("64-bit head");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}
