//! Sparse elements of `A ⊗ Γ^{⊗n}` with all coefficient-ring generators
//! collected in the head slot.
//!
//! For `(BP_*, BP_*BP)` the iterated tensor product over `BP_*` is again a
//! polynomial ring, `BP_*[t^(1), ..., t^(n)]`, so a basis element is a head
//! monomial in `v` (or `q`) together with one `t`-monomial per slot, and
//! multiplication is slotwise. The same representation with an empty head
//! serves the Steenrod side, where the Koszul sign rule matters.

use std::fmt;

use rustc_hash::FxHashMap;
use smallvec::SmallVec;

use crate::algebra::{write_signed_term, Family, Monomial, Scalar};

pub type Factors = SmallVec<[Monomial; 4]>;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TensorKey {
    pub head: Monomial,
    pub factors: Factors,
}

impl TensorKey {
    pub fn new(head: Monomial, factors: impl IntoIterator<Item = Monomial>) -> Self {
        Self { head, factors: factors.into_iter().collect() }
    }

    pub fn arity(&self) -> usize {
        self.factors.len()
    }

    /// Total `v`-exponent over every slot.
    pub fn v_weight(&self) -> u64 {
        self.head.family_weight(Family::V)
            + self.factors.iter().map(|f| f.family_weight(Family::V)).sum::<u64>()
    }

    pub fn internal_degree(&self, p: u64) -> u64 {
        self.head.internal_degree(p) + self.factors.iter().map(|f| f.internal_degree(p)).sum::<u64>()
    }

    /// Slotwise product with the Koszul sign; `None` if some slot vanishes.
    pub fn mul(&self, other: &TensorKey) -> Option<(TensorKey, bool)> {
        debug_assert_eq!(self.arity(), other.arity());
        let (head, mut negative) = self.head.mul(&other.head)?;
        let mut factors = Factors::new();
        for (a, b) in self.factors.iter().zip(&other.factors) {
            let (m, s) = a.mul(b)?;
            negative ^= s;
            factors.push(m);
        }
        // moving slot b of `other` past slots a > b of `self`
        let odd_self: SmallVec<[bool; 6]> = std::iter::once(&self.head)
            .chain(&self.factors)
            .map(Monomial::is_odd)
            .collect();
        if odd_self.iter().any(|x| *x) {
            let odd_other = std::iter::once(&other.head).chain(&other.factors).map(Monomial::is_odd);
            for (b, ob) in odd_other.enumerate() {
                if ob {
                    let passes = odd_self[b + 1..].iter().filter(|x| **x).count();
                    negative ^= passes % 2 == 1;
                }
            }
        }
        Some((TensorKey { head, factors }, negative))
    }

    pub fn has_unit_factor(&self) -> bool {
        self.factors.iter().any(Monomial::is_one)
    }
}

impl fmt::Display for TensorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        for m in &self.factors {
            write!(f, " | {m}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for TensorKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// How coefficients are cut down after each operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reduction {
    pub prime: u64,
    /// Drop terms of I-adic length `>= k`.
    pub ideal_power: Option<u64>,
    pub mod_p: bool,
}

impl Reduction {
    pub fn exact(prime: u64) -> Self {
        Self { prime, ideal_power: None, mod_p: false }
    }

    pub fn mod_ideal(prime: u64, k: u64) -> Self {
        Self { prime, ideal_power: Some(k), mod_p: false }
    }

    pub fn mod_prime(prime: u64) -> Self {
        Self { prime, ideal_power: None, mod_p: true }
    }

    /// The reduced coefficient, or `None` if the term is dropped.
    pub fn apply(&self, key: &TensorKey, c: Scalar) -> Option<Scalar> {
        if c.is_zero() {
            return None;
        }
        if let Some(k) = self.ideal_power {
            let len = c.p_valuation(self.prime).expect("nonzero") + key.v_weight() as i64;
            if len >= k as i64 {
                return None;
            }
        }
        if self.mod_p {
            let r = c.reduce_mod_p(self.prime).expect("coefficient not p-integral");
            return (!r.is_zero()).then_some(r);
        }
        Some(c)
    }
}

/// A finite sum of tensor words of a fixed arity.
#[derive(Clone, Default)]
pub struct Tensor {
    arity: usize,
    terms: FxHashMap<TensorKey, Scalar>,
}

impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.terms == other.terms
    }
}

impl Eq for Tensor {}

impl Tensor {
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: FxHashMap::default() }
    }

    pub fn unit(arity: usize) -> Self {
        let key = TensorKey::new(Monomial::one(), (0..arity).map(|_| Monomial::one()));
        Self::from_term(key, Scalar::one())
    }

    pub fn from_term(key: TensorKey, c: Scalar) -> Self {
        let mut t = Self::zero(key.arity());
        t.add_term(key, c);
        t
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TensorKey, &Scalar)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, key: &TensorKey) -> Scalar {
        self.terms.get(key).cloned().unwrap_or_default()
    }

    /// Terms in canonical order.
    pub fn sorted_terms(&self) -> Vec<(&TensorKey, &Scalar)> {
        let mut v: Vec<_> = self.terms.iter().collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }

    pub fn add_term(&mut self, key: TensorKey, c: Scalar) {
        debug_assert_eq!(key.arity(), self.arity);
        if c.is_zero() {
            return;
        }
        use std::collections::hash_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += &c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn add_assign(&mut self, other: &Tensor) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c.clone());
        }
    }

    pub fn add_scaled(&mut self, other: &Tensor, s: &Scalar) {
        for (k, c) in &other.terms {
            self.add_term(k.clone(), c * s);
        }
    }

    pub fn scale(&self, s: &Scalar) -> Tensor {
        let mut out = Tensor::zero(self.arity);
        out.add_scaled(self, s);
        out
    }

    pub fn neg(&self) -> Tensor {
        self.scale(&-Scalar::one())
    }

    pub fn sub(&self, other: &Tensor) -> Tensor {
        let mut out = self.clone();
        out.add_scaled(other, &-Scalar::one());
        out
    }

    pub fn reduce(&self, r: &Reduction) -> Tensor {
        let mut out = Tensor::zero(self.arity);
        for (k, c) in &self.terms {
            if let Some(c) = r.apply(k, c.clone()) {
                out.add_term(k.clone(), c);
            }
        }
        out
    }

    pub fn filter(&self, keep: impl Fn(&TensorKey, &Scalar) -> bool) -> Tensor {
        Tensor {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .filter(|(k, c)| keep(k, c))
                .map(|(k, c)| (k.clone(), c.clone()))
                .collect(),
        }
    }

    /// Applies `f` to every term and sums the results.
    pub fn map_terms(
        &self,
        arity: usize,
        mut f: impl FnMut(&TensorKey, &Scalar) -> Vec<(TensorKey, Scalar)>,
    ) -> Tensor {
        let mut out = Tensor::zero(arity);
        for (k, c) in &self.terms {
            for (k2, c2) in f(k, c) {
                out.add_term(k2, c2);
            }
        }
        out
    }

    /// Product, reduced after every term.
    pub fn mul(&self, other: &Tensor, r: &Reduction) -> Tensor {
        assert_eq!(self.arity, other.arity, "tensor arities differ");
        let (small, large, swapped) = if self.len() <= other.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc: FxHashMap<TensorKey, Scalar> = FxHashMap::default();
        for (k1, c1) in &small.terms {
            for (k2, c2) in &large.terms {
                let prod = if swapped { k2.mul(k1) } else { k1.mul(k2) };
                let Some((key, negative)) = prod else { continue };
                if let Some(k) = r.ideal_power {
                    let len = c1.p_valuation(r.prime).unwrap()
                        + c2.p_valuation(r.prime).unwrap()
                        + key.v_weight() as i64;
                    if len >= k as i64 {
                        continue;
                    }
                }
                let mut c = c1 * c2;
                if negative {
                    c = -c;
                }
                let e = acc.entry(key).or_default();
                *e += &c;
            }
        }
        let mut out = Tensor::zero(self.arity);
        for (k, c) in acc {
            if let Some(c) = r.apply(&k, c) {
                out.terms.insert(k, c);
            }
        }
        out
    }

    pub fn pow(&self, mut e: u64, r: &Reduction) -> Tensor {
        let mut acc = Tensor::unit(self.arity).reduce(r);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base, r);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, r);
            }
        }
        acc
    }

    /// Wraps every term as a wider tensor (e.g. `x ↦ x ⊗ 1`).
    pub fn widen(&self, arity: usize, place: impl Fn(&TensorKey) -> TensorKey) -> Tensor {
        self.map_terms(arity, |k, c| vec![(place(k), c.clone())])
    }

    /// Highest I-adic length present, if any.
    pub fn max_length(&self, p: u64) -> Option<i64> {
        self.terms
            .iter()
            .map(|(k, c)| c.p_valuation(p).unwrap() + k.v_weight() as i64)
            .max()
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.terms.values().all(|c| c.is_p_integral(p))
    }
}

impl fmt::Display for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, c)) in self.sorted_terms().into_iter().enumerate() {
            write_signed_term(f, i == 0, c, &k.head.to_string())?;
            for m in &k.factors {
                write!(f, " | {m}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
