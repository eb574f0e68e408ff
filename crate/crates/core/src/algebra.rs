//! Sparse graded-commutative algebras over named generator families.
//!
//! Every ring used in the crate (`BP_*`, `BP_*BP`, `H_*BP`, the dual
//! Steenrod algebra and its polynomial part, the associated graded
//! `F_p[q_0, q_1, ...]`) is a free graded-commutative algebra on some of the
//! families below, so one monomial type covers all of them. The active
//! [`RingContext`] says which families are legal and how scalars behave.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

use crate::coeff::{CoeffError, LocalizedRational};

pub type Scalar = LocalizedRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("ring contexts differ: {0} vs {1}")]
    ContextMismatch(String, String),
    #[error("generator family {family} is not allowed in {presentation:?}")]
    IllegalFamily { family: Family, presentation: Presentation },
    #[error("exterior generator {0} raised to a power above 1")]
    ExteriorPower(String),
    #[error("malformed monomial {0:?}")]
    Parse(String),
    #[error(transparent)]
    Coeff(#[from] CoeffError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    T,
    V,
    M,
    Q,
    A,
    Xi,
    Tau,
    TauTilde,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::T,
        Family::V,
        Family::M,
        Family::Q,
        Family::A,
        Family::Xi,
        Family::Tau,
        Family::TauTilde,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            Family::T => "t",
            Family::V => "v",
            Family::M => "m",
            Family::Q => "q",
            Family::A => "a",
            Family::Xi => "xi",
            Family::Tau => "tau",
            Family::TauTilde => "taut",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.symbol() == s)
    }

    /// Exterior families.
    pub fn is_odd(self) -> bool {
        matches!(self, Family::Tau | Family::TauTilde)
    }

    /// Families whose index-0 member is the unit.
    pub fn zero_is_unit(self) -> bool {
        matches!(self, Family::T | Family::M | Family::Xi)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneratorId {
    pub family: Family,
    pub index: u32,
}

impl GeneratorId {
    pub const fn new(family: Family, index: u32) -> Self {
        Self { family, index }
    }

    pub const fn t(i: u32) -> Self {
        Self::new(Family::T, i)
    }

    pub const fn v(i: u32) -> Self {
        Self::new(Family::V, i)
    }

    pub const fn q(i: u32) -> Self {
        Self::new(Family::Q, i)
    }

    pub fn degree(self, p: u64) -> u64 {
        let pn = p.pow(self.index);
        match self.family {
            Family::Tau | Family::TauTilde | Family::A => 2 * pn - 1,
            _ => 2 * (pn - 1),
        }
    }

    pub fn is_odd(self) -> bool {
        self.family.is_odd()
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family, self.index)
    }
}

/// A product of generator powers, sorted by generator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial(SmallVec<[(GeneratorId, u64); 3]>);

impl Monomial {
    pub fn one() -> Self {
        Self(SmallVec::new())
    }

    /// `g^e`; index-0 units collapse to `1`.
    pub fn generator(g: GeneratorId, e: u64) -> Self {
        if e == 0 || (g.index == 0 && g.family.zero_is_unit()) {
            return Self::one();
        }
        let mut v = SmallVec::new();
        v.push((g, e));
        Self(v)
    }

    /// Builds a monomial from arbitrary (possibly repeated) factors.
    pub fn from_factors(
        factors: impl IntoIterator<Item = (GeneratorId, u64)>,
    ) -> Result<(Self, bool), AlgebraError> {
        let mut acc = Self::one();
        let mut negative = false;
        for (g, e) in factors {
            if g.is_odd() && e > 1 {
                return Err(AlgebraError::ExteriorPower(g.to_string()));
            }
            match acc.mul(&Self::generator(g, e)) {
                Some((m, neg)) => {
                    acc = m;
                    negative ^= neg;
                }
                None => return Err(AlgebraError::ExteriorPower(g.to_string())),
            }
        }
        Ok((acc, negative))
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (GeneratorId, u64)> + '_ {
        self.0.iter().copied()
    }

    pub fn exponent(&self, g: GeneratorId) -> u64 {
        self.0
            .iter()
            .find(|(h, _)| *h == g)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Total exponent over a family.
    pub fn family_weight(&self, family: Family) -> u64 {
        self.0
            .iter()
            .filter(|(g, _)| g.family == family)
            .map(|(_, e)| e)
            .sum()
    }

    pub fn families(&self) -> impl Iterator<Item = Family> + '_ {
        self.0.iter().map(|(g, _)| g.family)
    }

    /// Number of exterior generators, mod 2.
    pub fn is_odd(&self) -> bool {
        self.0.iter().filter(|(g, _)| g.is_odd()).count() % 2 == 1
    }

    pub fn internal_degree(&self, p: u64) -> u64 {
        self.0.iter().map(|(g, e)| g.degree(p) * e).sum()
    }

    /// Splits into (generators satisfying `pred`, the rest).
    pub fn split(&self, pred: impl Fn(GeneratorId) -> bool) -> (Monomial, Monomial) {
        let mut a = Monomial::one();
        let mut b = Monomial::one();
        for &(g, e) in &self.0 {
            if pred(g) {
                a.0.push((g, e));
            } else {
                b.0.push((g, e));
            }
        }
        (a, b)
    }

    /// Product with the sign from reordering exterior generators, or `None`
    /// when an exterior generator would be squared. The flag is `true` when
    /// the product picks up a minus sign.
    pub fn mul(&self, other: &Monomial) -> Option<(Monomial, bool)> {
        if other.is_one() {
            return Some((self.clone(), false));
        }
        if self.is_one() {
            return Some((other.clone(), false));
        }
        let mut out: SmallVec<[(GeneratorId, u64); 3]> = SmallVec::new();
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        let mut negative = false;
        // odd generators of `self` not yet passed in the merge
        let mut odd_left_remaining = a.iter().filter(|(g, _)| g.is_odd()).count();
        while i < a.len() || j < b.len() {
            if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
                if a[i].0.is_odd() {
                    odd_left_remaining -= 1;
                }
                out.push(a[i]);
                i += 1;
            } else if i == a.len() || b[j].0 < a[i].0 {
                if b[j].0.is_odd() && odd_left_remaining % 2 == 1 {
                    negative = !negative;
                }
                out.push(b[j]);
                j += 1;
            } else {
                if a[i].0.is_odd() {
                    return None;
                }
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
        Some((Monomial(out), negative))
    }

    /// `self^e` for a monomial without exterior generators (or `e <= 1`).
    pub fn pow(&self, e: u64) -> Option<Monomial> {
        if e == 0 {
            return Some(Monomial::one());
        }
        if e > 1 && self.0.iter().any(|(g, _)| g.is_odd()) {
            return None;
        }
        Some(Monomial(self.0.iter().map(|&(g, x)| (g, x * e)).collect()))
    }

    /// Divides out `other`, if it divides `self`.
    pub fn checked_div(&self, other: &Monomial) -> Option<Monomial> {
        let mut out = self.clone();
        for &(g, e) in &other.0 {
            let pos = out.0.iter().position(|(h, _)| *h == g)?;
            let have = out.0[pos].1;
            if have < e {
                return None;
            }
            if have == e {
                out.0.remove(pos);
            } else {
                out.0[pos].1 = have - e;
            }
        }
        Some(out)
    }

    /// Renames families (e.g. `q -> v`), merging exponents.
    pub fn map_families(&self, f: impl Fn(GeneratorId) -> GeneratorId) -> Monomial {
        let mut out = Monomial::one();
        for &(g, e) in &self.0 {
            let (m, _) = out.mul(&Monomial::generator(f(g), e)).expect("even rename");
            out = m;
        }
        out
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (g, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            if *e == 1 {
                write!(f, "{g}")?;
            } else {
                write!(f, "{g}^{e}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Parses the plain textual form `v1*t1^5` (numeric exponents only).
impl FromStr for Monomial {
    type Err = AlgebraError;
    fn from_str(s: &str) -> Result<Self, AlgebraError> {
        let err = || AlgebraError::Parse(s.to_string());
        let s = s.trim();
        if s == "1" {
            return Ok(Monomial::one());
        }
        let mut factors = Vec::new();
        for part in s.split('*') {
            let (gen, exp) = match part.trim().split_once('^') {
                Some((g, e)) => (g, e.parse::<u64>().map_err(|_| err())?),
                None => (part.trim(), 1),
            };
            let split = gen.find(|c: char| c.is_ascii_digit()).ok_or_else(err)?;
            let family = Family::from_symbol(&gen[..split]).ok_or_else(err)?;
            let index = gen[split..].parse::<u32>().map_err(|_| err())?;
            factors.push((GeneratorId::new(family, index), exp));
        }
        let (m, negative) = Monomial::from_factors(factors)?;
        if negative {
            return Err(err());
        }
        Ok(m)
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Presentation {
    /// `BP_* = Z_(p)[v_1, v_2, ...]`
    BpBase,
    /// `BP_*BP = BP_*[t_1, t_2, ...]`
    BpBp,
    /// `H_*BP`-side presentation with `m`-generators.
    HBp,
    /// The dual Steenrod algebra in both generator systems.
    Steenrod,
    /// `P_* = BP_*BP / I = F_p[t_1, t_2, ...]`
    PStar,
    /// `E_0 BP_* = F_p[q_0, q_1, ...]` together with `P_*`.
    GradedI,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Discipline {
    /// Arbitrary rationals; integrality is checked explicitly.
    RationalIntermediate,
    /// Results must be `p`-locally integral.
    PLocal,
    /// Coefficients live in `F_p`.
    ModP,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RingContext {
    pub prime: u64,
    pub presentation: Presentation,
    pub discipline: Discipline,
}

impl RingContext {
    pub fn new(prime: u64, presentation: Presentation) -> Self {
        let discipline = match presentation {
            Presentation::BpBase | Presentation::BpBp => Discipline::PLocal,
            Presentation::HBp => Discipline::RationalIntermediate,
            Presentation::Steenrod | Presentation::PStar | Presentation::GradedI => Discipline::ModP,
        };
        Self { prime, presentation, discipline }
    }

    pub fn with_discipline(mut self, discipline: Discipline) -> Self {
        self.discipline = discipline;
        self
    }

    pub fn allows(&self, family: Family) -> bool {
        use Family::*;
        match self.presentation {
            Presentation::BpBase => family == V,
            Presentation::BpBp => matches!(family, V | T),
            Presentation::HBp => matches!(family, M | T | V),
            Presentation::Steenrod => matches!(family, T | TauTilde | Xi | Tau),
            Presentation::PStar => family == T,
            Presentation::GradedI => matches!(family, Q | T),
        }
    }

    pub fn is_mod_p(&self) -> bool {
        self.discipline == Discipline::ModP
    }

    /// Brings a coefficient to the context's normal form.
    pub fn normalize(&self, c: &Scalar) -> Result<Scalar, CoeffError> {
        if self.is_mod_p() {
            c.reduce_mod_p(self.prime)
        } else {
            Ok(c.clone())
        }
    }

    pub fn check_monomial(&self, m: &Monomial) -> Result<(), AlgebraError> {
        for family in m.families() {
            if !self.allows(family) {
                return Err(AlgebraError::IllegalFamily { family, presentation: self.presentation });
            }
        }
        Ok(())
    }
}

/// `v_p(coef)` plus the total `v`-exponent; no integrality requirement.
pub fn gauss_length(coef: &Scalar, m: &Monomial, p: u64) -> i64 {
    coef.p_valuation(p).expect("zero coefficient in a normalized element") + m.family_weight(Family::V) as i64
}

/// I-adic length of the term `coef * m`: `v_p(coef)` plus the `v`-exponents.
pub fn i_adic_length(coef: &Scalar, m: &Monomial, p: u64) -> Result<u64, CoeffError> {
    let v = coef.p_valuation(p)?;
    if v < 0 {
        return Err(CoeffError::NotIntegral { value: coef.to_string(), p });
    }
    Ok(v as u64 + m.family_weight(Family::V))
}

pub fn internal_degree(m: &Monomial, p: u64) -> u64 {
    m.internal_degree(p)
}

/// A finite linear combination of monomials in one ring context.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    ctx: RingContext,
    terms: BTreeMap<Monomial, Scalar>,
}

impl AlgebraElement {
    pub fn zero(ctx: RingContext) -> Self {
        Self { ctx, terms: BTreeMap::new() }
    }

    pub fn one(ctx: RingContext) -> Self {
        Self::from_term(ctx, Monomial::one(), Scalar::one())
    }

    pub fn scalar(ctx: RingContext, c: Scalar) -> Self {
        Self::from_term(ctx, Monomial::one(), c)
    }

    pub fn from_term(ctx: RingContext, m: Monomial, c: Scalar) -> Self {
        let mut e = Self::zero(ctx);
        e.add_term(m, c);
        e
    }

    pub fn generator(ctx: RingContext, g: GeneratorId) -> Result<Self, AlgebraError> {
        let m = Monomial::generator(g, 1);
        ctx.check_monomial(&m)?;
        Ok(Self::from_term(ctx, m, Scalar::one()))
    }

    pub fn context(&self) -> RingContext {
        self.ctx
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: Monomial, c: Scalar) {
        use std::collections::btree_map::Entry;
        let ctx = self.ctx;
        let norm = |x: Scalar| ctx.normalize(&x).expect("coefficient not reducible in this context");
        match self.terms.entry(m) {
            Entry::Vacant(slot) => {
                let c = norm(c);
                if !c.is_zero() {
                    slot.insert(c);
                }
            }
            Entry::Occupied(mut slot) => {
                let sum = norm(slot.get() + &c);
                if sum.is_zero() {
                    slot.remove();
                } else {
                    *slot.get_mut() = sum;
                }
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), AlgebraError> {
        if self.ctx != other.ctx {
            return Err(AlgebraError::ContextMismatch(
                format!("{:?}", self.ctx),
                format!("{:?}", other.ctx),
            ));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.add(&other.scale(&-Scalar::one()))
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        let mut out = Self::zero(self.ctx);
        for (m, d) in &self.terms {
            out.add_term(m.clone(), d * c);
        }
        out
    }

    /// Graded-commutative product.
    pub fn mul(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.check_same(other)?;
        let mut acc: BTreeMap<Monomial, Scalar> = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                if let Some((m, negative)) = m1.mul(m2) {
                    let mut c = c1 * c2;
                    if negative {
                        c = -c;
                    }
                    let e = acc.entry(m).or_default();
                    *e += &c;
                }
            }
        }
        let mut out = Self::zero(self.ctx);
        for (m, c) in acc {
            out.add_term(m, c);
        }
        Ok(out)
    }

    pub fn pow(&self, e: u64) -> Result<Self, AlgebraError> {
        let mut acc = Self::one(self.ctx);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Keeps the terms for which `keep` holds.
    pub fn filter(&self, keep: impl Fn(&Monomial, &Scalar) -> bool) -> Self {
        Self {
            ctx: self.ctx,
            terms: self
                .terms
                .iter()
                .filter(|(m, c)| keep(m, c))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Drops every term of I-adic length `>= k`.
    pub fn reduce_mod_ik(&self, k: u64) -> Self {
        let p = self.ctx.prime;
        self.filter(|m, c| gauss_length(c, m, p) < k as i64)
    }

    pub fn is_p_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_p_integral(self.ctx.prime))
    }

    /// Reinterprets the element in another context, checking families.
    pub fn with_context(&self, ctx: RingContext) -> Result<Self, AlgebraError> {
        let mut out = Self::zero(ctx);
        for (m, c) in &self.terms {
            ctx.check_monomial(m)?;
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    /// Applies a ring map given on monomials.
    pub fn map_monomials(
        &self,
        ctx: RingContext,
        f: impl Fn(&Monomial) -> Monomial,
    ) -> Self {
        let mut out = Self::zero(ctx);
        for (m, c) in &self.terms {
            out.add_term(f(m), c.clone());
        }
        out
    }

    /// Total degrees of the terms.
    pub fn degrees(&self) -> Vec<u64> {
        let p = self.ctx.prime;
        let mut d: Vec<u64> = self.terms.keys().map(|m| m.internal_degree(p)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().enumerate() {
            write_signed_term(f, k == 0, c, &m.to_string())?;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Writes `± c*body` with the usual conventions for `1` and `-1`.
pub(crate) fn write_signed_term(
    f: &mut impl fmt::Write,
    first: bool,
    c: &Scalar,
    body: &str,
) -> fmt::Result {
    let negative = c.is_negative();
    let abs = if negative { -c } else { c.clone() };
    match (first, negative) {
        (true, false) => {}
        (true, true) => f.write_str("-")?,
        (false, false) => f.write_str(" + ")?,
        (false, true) => f.write_str(" - ")?,
    }
    if body == "1" {
        write!(f, "{abs}")
    } else if abs.is_one() {
        f.write_str(body)
    } else {
        write!(f, "{abs}*{body}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(pres: Presentation) -> RingContext {
        RingContext::new(5, pres)
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn gen(ctx: RingContext, s: &str) -> AlgebraElement {
        AlgebraElement::from_term(ctx, mono(s), Scalar::one())
    }

    #[test]
    fn exterior_square_vanishes() {
        let c = ctx(Presentation::Steenrod);
        let t0 = gen(c, "taut0");
        assert!(t0.mul(&t0).unwrap().is_zero());
    }

    #[test]
    fn koszul_sign_on_swap() {
        let c = ctx(Presentation::Steenrod);
        let a = gen(c, "taut0").mul(&gen(c, "taut1")).unwrap();
        let b = gen(c, "taut1").mul(&gen(c, "taut0")).unwrap();
        assert_eq!(a, b.scale(&-Scalar::one()));
    }

    #[test]
    fn even_square() {
        let c = ctx(Presentation::BpBp);
        assert_eq!(gen(c, "t1").mul(&gen(c, "t1")).unwrap(), gen(c, "t1^2"));
    }

    #[test]
    fn degrees() {
        assert_eq!(mono("t1").internal_degree(5), 8);
        assert_eq!(mono("taut1").internal_degree(5), 9);
        assert_eq!(mono("t4^5").internal_degree(5), 6240);
        assert_eq!(mono("a0").internal_degree(5), 1);
    }

    #[test]
    fn lengths() {
        let p = 5;
        assert_eq!(i_adic_length(&Scalar::from_int(5), &mono("v1"), p), Ok(2));
        assert_eq!(i_adic_length(&Scalar::one(), &Monomial::one(), p), Ok(0));
        assert_eq!(i_adic_length(&Scalar::from_int(3), &mono("v2^3*t1"), p), Ok(3));
        assert!(i_adic_length(&Scalar::new(1, 5).unwrap(), &mono("v1"), p).is_err());
    }

    #[test]
    fn reduce_mod_ik_examples() {
        let c = ctx(Presentation::BpBp);
        let x = gen(c, "v1")
            .add(&gen(c, "t1").scale(&Scalar::from_int(5)))
            .unwrap()
            .add(&gen(c, "t1^2").scale(&Scalar::from_int(25)))
            .unwrap();
        let expected = gen(c, "v1").add(&gen(c, "t1").scale(&Scalar::from_int(5))).unwrap();
        assert_eq!(x.reduce_mod_ik(2), expected);
        assert!(gen(c, "v1").reduce_mod_ik(0).is_zero());
    }

    #[test]
    fn index_zero_units() {
        assert!(Monomial::generator(GeneratorId::t(0), 3).is_one());
        assert!(Monomial::generator(GeneratorId::new(Family::Xi, 0), 1).is_one());
        assert!(!Monomial::generator(GeneratorId::q(0), 1).is_one());
    }

    #[test]
    fn context_rules() {
        let c = ctx(Presentation::PStar);
        assert!(AlgebraElement::generator(c, GeneratorId::v(1)).is_err());
        let a = gen(ctx(Presentation::BpBp), "t1");
        let b = gen(ctx(Presentation::PStar), "t1");
        assert!(matches!(a.mul(&b), Err(AlgebraError::ContextMismatch(..))));
    }

    #[test]
    fn mod_p_normalizes() {
        let c = ctx(Presentation::PStar);
        let x = gen(c, "t1").scale(&Scalar::from_int(6));
        assert_eq!(x, gen(c, "t1"));
        assert!(gen(c, "t1").scale(&Scalar::from_int(5)).is_zero());
    }

    #[test]
    fn text_form() {
        assert_eq!(mono("t1^5*v1").to_string(), "t1^5*v1");
        assert_eq!(mono("tau0*taut1").to_string(), "tau0*taut1");
        assert!("taut1*tau0".parse::<Monomial>().is_err());
        assert!("taut0^2".parse::<Monomial>().is_err());
    }

    use proptest::prelude::*;

    fn arb_monomial() -> impl Strategy<Value = Monomial> {
        prop::collection::vec((0usize..5, 0u32..4, 1u64..4), 0..4).prop_map(|v| {
            let fams = [Family::T, Family::V, Family::Xi, Family::Tau, Family::TauTilde];
            let mut m = Monomial::one();
            for (f, i, e) in v {
                let g = GeneratorId::new(fams[f], i);
                let e = if g.is_odd() { 1 } else { e };
                if let Some((n, _)) = m.mul(&Monomial::generator(g, e)) {
                    m = n;
                }
            }
            m
        })
    }

    /// Sign of a product computed by listing the odd generators and
    /// counting inversions directly.
    fn brute_sign(a: &Monomial, b: &Monomial) -> Option<bool> {
        let odd: Vec<GeneratorId> = a
            .iter()
            .chain(b.iter())
            .filter(|(g, _)| g.is_odd())
            .map(|(g, _)| g)
            .collect();
        let mut inversions = 0;
        for i in 0..odd.len() {
            for j in i + 1..odd.len() {
                if odd[i] == odd[j] {
                    return None;
                }
                if odd[i] > odd[j] {
                    inversions += 1;
                }
            }
        }
        Some(inversions % 2 == 1)
    }

    proptest! {
        #[test]
        fn product_sign_matches_inversion_count(a in arb_monomial(), b in arb_monomial()) {
            let got = a.mul(&b).map(|(_, s)| s);
            prop_assert_eq!(got, brute_sign(&a, &b));
        }

        #[test]
        fn monomial_product_associative(a in arb_monomial(), b in arb_monomial(), c in arb_monomial()) {
            let left = a.mul(&b).and_then(|(ab, s1)| ab.mul(&c).map(|(m, s2)| (m, s1 ^ s2)));
            let right = b.mul(&c).and_then(|(bc, s1)| a.mul(&bc).map(|(m, s2)| (m, s1 ^ s2)));
            prop_assert_eq!(left, right);
        }

        #[test]
        fn graded_commutative(a in arb_monomial(), b in arb_monomial()) {
            let ab = a.mul(&b);
            let ba = b.mul(&a);
            match (ab, ba) {
                (None, None) => {}
                (Some((m1, s1)), Some((m2, s2))) => {
                    prop_assert_eq!(&m1, &m2);
                    let both_odd = a.is_odd() && b.is_odd();
                    prop_assert_eq!(s1 ^ s2, both_odd);
                }
                _ => prop_assert!(false, "asymmetric vanishing"),
            }
        }

        #[test]
        fn degree_and_length_additive(a in arb_monomial(), b in arb_monomial(), x in 1i64..500, y in 1i64..500) {
            if let Some((ab, _)) = a.mul(&b) {
                prop_assert_eq!(ab.internal_degree(5), a.internal_degree(5) + b.internal_degree(5));
                let cx = Scalar::from_int(x);
                let cy = Scalar::from_int(y);
                prop_assert_eq!(
                    i_adic_length(&(&cx * &cy), &ab, 5).unwrap(),
                    i_adic_length(&cx, &a, 5).unwrap() + i_adic_length(&cy, &b, 5).unwrap()
                );
            }
        }

        #[test]
        fn reduce_idempotent(terms in prop::collection::vec((arb_monomial(), 1i64..200), 0..6), k in 0u64..5) {
            let c = RingContext::new(5, Presentation::Steenrod).with_discipline(Discipline::PLocal);
            let mut x = AlgebraElement::zero(c);
            for (m, n) in terms {
                x.add_term(m, Scalar::from_int(n));
            }
            let once = x.reduce_mod_ik(k);
            prop_assert_eq!(once.reduce_mod_ik(k), once);
        }
    }
}
