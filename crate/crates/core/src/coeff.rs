//! Exact scalars for every computation in the crate.
//!
//! [`LocalizedRational`] is an arbitrary-precision rational number kept in
//! lowest terms. The common case (numerator and denominator fitting in an
//! `i64`) is stored inline and only promoted to big integers when a result
//! overflows, so the hot loops of the coproduct expansions stay allocation
//! free.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoeffError {
    #[error("the p-adic valuation of zero is undefined")]
    ZeroValuation,
    #[error("{value} is not integral at p = {p}")]
    NotIntegral { value: String, p: u64 },
    #[error("C(p, k)/p needs 1 <= k <= p - 1, got k = {k}, p = {p}")]
    BinomialIndex { k: u64, p: u64 },
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("division by zero")]
    DivisionByZero,
    #[error("malformed rational {0:?}")]
    Parse(String),
}

#[derive(Clone, PartialEq, Eq, Hash)]
enum Repr {
    /// `den > 0`, `gcd(num, den) = 1`.
    Small { num: i64, den: i64 },
    /// Only used when the reduced value does not fit `Small`.
    Big(Box<(BigInt, BigInt)>),
}

/// A rational number in lowest terms with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LocalizedRational(Repr);

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    if a == 0 {
        return b;
    }
    if b == 0 {
        return a;
    }
    let shift = (a | b).trailing_zeros();
    a >>= a.trailing_zeros();
    loop {
        b >>= b.trailing_zeros();
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        b -= a;
        if b == 0 {
            return a << shift;
        }
    }
}

impl LocalizedRational {
    pub fn zero() -> Self {
        Self(Repr::Small { num: 0, den: 1 })
    }

    pub fn one() -> Self {
        Self(Repr::Small { num: 1, den: 1 })
    }

    pub fn from_int(n: i64) -> Self {
        Self(Repr::Small { num: n, den: 1 })
    }

    pub fn new(num: i64, den: i64) -> Result<Self, CoeffError> {
        if den == 0 {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(Self::from_i128(num as i128, den as i128))
    }

    pub fn from_bigints(num: BigInt, den: BigInt) -> Result<Self, CoeffError> {
        if den.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        Ok(Self::from_big_unreduced(num, den))
    }

    fn from_i128(mut num: i128, mut den: i128) -> Self {
        debug_assert!(den != 0);
        if num == 0 {
            return Self::zero();
        }
        if den < 0 {
            // i128::MIN never occurs: inputs are products of two i64 values.
            num = -num;
            den = -den;
        }
        let g = gcd_u128(num.unsigned_abs(), den as u128) as i128;
        if g > 1 {
            num /= g;
            den /= g;
        }
        match (i64::try_from(num), i64::try_from(den)) {
            (Ok(num), Ok(den)) => Self(Repr::Small { num, den }),
            _ => Self(Repr::Big(Box::new((BigInt::from(num), BigInt::from(den))))),
        }
    }

    fn from_big_unreduced(mut num: BigInt, mut den: BigInt) -> Self {
        if num.is_zero() {
            return Self::zero();
        }
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() {
            num /= &g;
            den /= &g;
        }
        match (num.to_i64(), den.to_i64()) {
            (Some(num), Some(den)) => Self(Repr::Small { num, den }),
            _ => Self(Repr::Big(Box::new((num, den)))),
        }
    }

    fn to_big(&self) -> (BigInt, BigInt) {
        match &self.0 {
            Repr::Small { num, den } => (BigInt::from(*num), BigInt::from(*den)),
            Repr::Big(b) => (b.0.clone(), b.1.clone()),
        }
    }

    pub fn numer(&self) -> BigInt {
        self.to_big().0
    }

    pub fn denom(&self) -> BigInt {
        self.to_big().1
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small { num: 0, .. })
    }

    pub fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small { num: 1, den: 1 })
    }

    pub fn is_integer(&self) -> bool {
        matches!(self.0, Repr::Small { den: 1, .. }) || matches!(&self.0, Repr::Big(b) if b.1.is_one())
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small { num, .. } => *num < 0,
            Repr::Big(b) => b.0.is_negative(),
        }
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn recip(&self) -> Result<Self, CoeffError> {
        if self.is_zero() {
            return Err(CoeffError::DivisionByZero);
        }
        let (n, d) = self.to_big();
        Ok(Self::from_big_unreduced(d, n))
    }

    /// Exponent of `p` in the reduced fraction.
    pub fn p_valuation(&self, p: u64) -> Result<i64, CoeffError> {
        match &self.0 {
            Repr::Small { num: 0, .. } => Err(CoeffError::ZeroValuation),
            Repr::Small { num, den } => {
                Ok(small_valuation(num.unsigned_abs(), p) - small_valuation(*den as u64, p))
            }
            Repr::Big(b) => Ok(big_valuation(&b.0, p) - big_valuation(&b.1, p)),
        }
    }

    /// True when `p` does not divide the denominator.
    pub fn is_p_integral(&self, p: u64) -> bool {
        match &self.0 {
            Repr::Small { den, .. } => (*den as u64) % p != 0,
            Repr::Big(b) => !(&b.1 % BigInt::from(p)).is_zero(),
        }
    }

    /// Image in `F_p`, as a residue in `0..p`.
    pub fn residue(&self, p: u64) -> Result<u64, CoeffError> {
        if !self.is_p_integral(p) {
            return Err(CoeffError::NotIntegral { value: self.to_string(), p });
        }
        let (n, d) = match &self.0 {
            Repr::Small { num, den } => (
                num.rem_euclid(p as i64) as u64,
                (*den as u64) % p,
            ),
            Repr::Big(b) => {
                let pb = BigInt::from(p);
                (
                    b.0.mod_floor(&pb).to_u64().unwrap(),
                    b.1.mod_floor(&pb).to_u64().unwrap(),
                )
            }
        };
        Ok(mul_mod(n, inv_mod(d, p), p))
    }

    /// The representative of `self mod p` closest to zero, as a rational.
    pub fn reduce_mod_p(&self, p: u64) -> Result<Self, CoeffError> {
        Ok(Self::from_int(symmetric_residue(self.residue(p)?, p)))
    }

    /// Divides by `p^k` exactly (used to pass from `p * x` to `x`).
    pub fn div_p_pow(&self, p: u64, k: u32) -> Self {
        self / &Self::from_int(p as i64).pow(k as u64)
    }
}

/// Maps a residue in `0..p` to the range `-(p-1)/2..=(p-1)/2`.
pub fn symmetric_residue(r: u64, p: u64) -> i64 {
    if r > p / 2 {
        r as i64 - p as i64
    } else {
        r as i64
    }
}

fn small_valuation(mut n: u64, p: u64) -> i64 {
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

fn big_valuation(n: &BigInt, p: u64) -> i64 {
    let pb = BigInt::from(p);
    let mut m = n.abs();
    let mut v = 0;
    loop {
        let (q, r) = m.div_rem(&pb);
        if !r.is_zero() {
            return v;
        }
        m = q;
        v += 1;
    }
}

pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    acc
}

/// Inverse modulo a prime via Fermat.
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u64, CoeffError> {
    if is_prime(p) {
        Ok(p)
    } else {
        Err(CoeffError::NotPrime(p))
    }
}

/// `C(p, k) / p` for `1 <= k <= p - 1`.
pub fn binom_over_p(k: u64, p: u64) -> Result<BigInt, CoeffError> {
    check_prime(p)?;
    if k == 0 || k >= p {
        return Err(CoeffError::BinomialIndex { k, p });
    }
    Ok(binomial(p, k) / BigInt::from(p))
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Sum of the base-`p` digits of `n`.
pub fn digit_sum(mut n: u64, p: u64) -> u64 {
    let mut s = 0;
    while n > 0 {
        s += n % p;
        n /= p;
    }
    s
}

impl Default for LocalizedRational {
    fn default() -> Self {
        Self::zero()
    }
}

impl From<i64> for LocalizedRational {
    fn from(n: i64) -> Self {
        Self::from_int(n)
    }
}

impl From<BigInt> for LocalizedRational {
    fn from(n: BigInt) -> Self {
        Self::from_big_unreduced(n, BigInt::one())
    }
}

impl<'a> Add<&'a LocalizedRational> for &'a LocalizedRational {
    type Output = LocalizedRational;
    fn add(self, rhs: &LocalizedRational) -> LocalizedRational {
        match (&self.0, &rhs.0) {
            (Repr::Small { num: 0, .. }, _) => rhs.clone(),
            (_, Repr::Small { num: 0, .. }) => self.clone(),
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                if b == d {
                    LocalizedRational::from_i128(*a as i128 + *c as i128, *b as i128)
                } else {
                    LocalizedRational::from_i128(
                        *a as i128 * *d as i128 + *c as i128 * *b as i128,
                        *b as i128 * *d as i128,
                    )
                }
            }
            _ => {
                let (a, b) = self.to_big();
                let (c, d) = rhs.to_big();
                LocalizedRational::from_big_unreduced(a * &d + c * &b, b * d)
            }
        }
    }
}

impl<'a> Sub<&'a LocalizedRational> for &'a LocalizedRational {
    type Output = LocalizedRational;
    fn sub(self, rhs: &LocalizedRational) -> LocalizedRational {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a LocalizedRational> for &'a LocalizedRational {
    type Output = LocalizedRational;
    fn mul(self, rhs: &LocalizedRational) -> LocalizedRational {
        match (&self.0, &rhs.0) {
            (Repr::Small { num: 0, .. }, _) | (_, Repr::Small { num: 0, .. }) => {
                LocalizedRational::zero()
            }
            (Repr::Small { num: a, den: b }, Repr::Small { num: c, den: d }) => {
                LocalizedRational::from_i128(*a as i128 * *c as i128, *b as i128 * *d as i128)
            }
            _ => {
                let (a, b) = self.to_big();
                let (c, d) = rhs.to_big();
                LocalizedRational::from_big_unreduced(a * c, b * d)
            }
        }
    }
}

impl<'a> Div<&'a LocalizedRational> for &'a LocalizedRational {
    type Output = LocalizedRational;
    /// Panics on division by zero; use [`LocalizedRational::recip`] to handle it.
    fn div(self, rhs: &LocalizedRational) -> LocalizedRational {
        self * &rhs.recip().expect("division by zero")
    }
}

impl Neg for &LocalizedRational {
    type Output = LocalizedRational;
    fn neg(self) -> LocalizedRational {
        match &self.0 {
            Repr::Small { num, den } if *num != i64::MIN => {
                LocalizedRational(Repr::Small { num: -num, den: *den })
            }
            _ => {
                let (a, b) = self.to_big();
                LocalizedRational::from_big_unreduced(-a, b)
            }
        }
    }
}

impl Neg for LocalizedRational {
    type Output = LocalizedRational;
    fn neg(self) -> LocalizedRational {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LocalizedRational> for LocalizedRational {
            type Output = LocalizedRational;
            fn $m(self, rhs: LocalizedRational) -> LocalizedRational {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&LocalizedRational> for LocalizedRational {
    fn add_assign(&mut self, rhs: &LocalizedRational) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&LocalizedRational> for LocalizedRational {
    fn sub_assign(&mut self, rhs: &LocalizedRational) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&LocalizedRational> for LocalizedRational {
    fn mul_assign(&mut self, rhs: &LocalizedRational) {
        *self = &*self * rhs;
    }
}

impl fmt::Display for LocalizedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small { num, den: 1 } => write!(f, "{num}"),
            Repr::Small { num, den } => write!(f, "{num}/{den}"),
            Repr::Big(b) if b.1.is_one() => write!(f, "{}", b.0),
            Repr::Big(b) => write!(f, "{}/{}", b.0, b.1),
        }
    }
}

impl fmt::Debug for LocalizedRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for LocalizedRational {
    type Err = CoeffError;
    fn from_str(s: &str) -> Result<Self, CoeffError> {
        let err = || CoeffError::Parse(s.to_string());
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| err())?;
        let d: BigInt = d.parse().map_err(|_| err())?;
        Self::from_bigints(n, d)
    }
}

impl Serialize for LocalizedRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LocalizedRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
