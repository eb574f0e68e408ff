//! Cobar complexes `Ω_{BP_*BP}(BP_*)` and `Ω_{P_*}(I^k/I^{k+1})`.
//!
//! The second is computed as the associated graded of the first: a chain in
//! `Ω_{P_*}(I^k/I^{k+1})` is lifted (`q_0 ↦ p`, `q_i ↦ v_i`), differentiated
//! modulo `I^{k+1}`, and the part of I-adic length exactly `k` is reduced
//! mod `p` again.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Family, GeneratorId, Monomial, Presentation, RingContext, Scalar};
use crate::structmaps::BpMaps;
use crate::tensor::{Factors, Reduction, Tensor, TensorKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CobarError {
    #[error("factor {0} lies outside the augmentation ideal")]
    UnitFactor(usize),
    #[error("generator family {0} cannot appear in slot {1}")]
    IllegalFamily(Family, usize),
    #[error("the chain mixes cohomological degrees")]
    MixedDegree,
    #[error("coefficient {0} is not p-integral")]
    NotIntegral(String),
    #[error("operation needs a {0:?} chain")]
    WrongContext(Presentation),
}

/// A cobar chain: a tensor of fixed arity `s` in a BP or associated-graded
/// context.
#[derive(Clone, PartialEq, Eq)]
pub struct CobarElement {
    ctx: RingContext,
    tensor: Tensor,
}

impl CobarElement {
    pub fn new(ctx: RingContext, tensor: Tensor) -> Result<Self, CobarError> {
        let x = Self { ctx, tensor };
        x.validate()?;
        Ok(x)
    }

    pub fn zero(ctx: RingContext, s: usize) -> Self {
        Self { ctx, tensor: Tensor::zero(s) }
    }

    fn validate(&self) -> Result<(), CobarError> {
        let head_family = match self.ctx.presentation {
            Presentation::BpBp | Presentation::BpBase => Family::V,
            Presentation::GradedI => Family::Q,
            other => return Err(CobarError::WrongContext(other)),
        };
        for (k, c) in self.tensor.iter() {
            for f in k.head.families() {
                if f != head_family {
                    return Err(CobarError::IllegalFamily(f, 0));
                }
            }
            for (i, m) in k.factors.iter().enumerate() {
                if m.is_one() {
                    return Err(CobarError::UnitFactor(i + 1));
                }
                for f in m.families() {
                    if f != Family::T {
                        return Err(CobarError::IllegalFamily(f, i + 1));
                    }
                }
            }
            if !c.is_p_integral(self.ctx.prime) {
                return Err(CobarError::NotIntegral(c.to_string()));
            }
        }
        Ok(())
    }

    pub fn context(&self) -> RingContext {
        self.ctx
    }

    pub fn tensor(&self) -> &Tensor {
        &self.tensor
    }

    pub fn into_tensor(self) -> Tensor {
        self.tensor
    }

    pub fn prime(&self) -> u64 {
        self.ctx.prime
    }

    /// Cohomological degree `s`.
    pub fn s(&self) -> usize {
        self.tensor.arity()
    }

    pub fn is_zero(&self) -> bool {
        self.tensor.is_zero()
    }

    pub fn len(&self) -> usize {
        self.tensor.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensor.is_empty()
    }

    pub fn is_bp(&self) -> bool {
        self.ctx.presentation == Presentation::BpBp
    }

    pub fn terms(&self) -> Vec<(&TensorKey, &Scalar)> {
        self.tensor.sorted_terms()
    }

    pub fn coefficient(&self, k: &TensorKey) -> Scalar {
        self.tensor.coefficient(k)
    }

    pub fn add(&self, other: &CobarElement) -> Result<CobarElement, CobarError> {
        if other.s() != self.s() {
            return Err(CobarError::MixedDegree);
        }
        if other.ctx != self.ctx {
            return Err(CobarError::WrongContext(other.ctx.presentation));
        }
        let mut t = self.tensor.clone();
        t.add_assign(&other.tensor);
        Ok(self.with_tensor(t))
    }

    pub fn scale(&self, c: &Scalar) -> CobarElement {
        self.with_tensor(self.tensor.scale(c))
    }

    pub fn filter(&self, keep: impl Fn(&TensorKey, &Scalar) -> bool) -> CobarElement {
        self.with_tensor(self.tensor.filter(keep))
    }

    fn with_tensor(&self, tensor: Tensor) -> CobarElement {
        let tensor = if self.ctx.is_mod_p() { tensor.reduce(&Reduction::mod_prime(self.ctx.prime)) } else { tensor };
        CobarElement { ctx: self.ctx, tensor }
    }

    /// Internal degrees occurring in the chain.
    pub fn internal_degrees(&self) -> Vec<u64> {
        let p = self.prime();
        let mut d: Vec<u64> = self.tensor.iter().map(|(k, _)| k.internal_degree(p)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// JSON records `{coef, head, factors}` in canonical order.
    pub fn to_records(&self) -> Vec<WordRecord> {
        self.terms()
            .into_iter()
            .map(|(k, c)| WordRecord {
                coef: c.to_string(),
                head: k.head.to_string(),
                factors: k.factors.iter().map(|m| m.to_string()).collect(),
            })
            .collect()
    }
}

impl fmt::Display for CobarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.tensor, f)
    }
}

impl fmt::Debug for CobarElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.tensor, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WordRecord {
    pub coef: String,
    pub head: String,
    pub factors: Vec<String>,
}

/// I-adic filtration of a BP word: `v_p(coef)` plus the `v`-exponents.
pub fn filtration(key: &TensorKey, c: &Scalar, p: u64) -> i64 {
    c.p_valuation(p).expect("nonzero coefficient") + key.v_weight() as i64
}

/// The differential engine; holds the structure-map caches.
#[derive(Clone)]
pub struct Cobar {
    maps: Arc<BpMaps>,
}

impl Cobar {
    pub fn new(p: u64) -> Self {
        Self { maps: Arc::new(BpMaps::new(p)) }
    }

    pub fn with_maps(maps: Arc<BpMaps>) -> Self {
        Self { maps }
    }

    pub fn maps(&self) -> &Arc<BpMaps> {
        &self.maps
    }

    pub fn prime(&self) -> u64 {
        self.maps.prime()
    }

    pub fn bp_context(&self) -> RingContext {
        RingContext::new(self.prime(), Presentation::BpBp)
    }

    pub fn graded_context(&self) -> RingContext {
        RingContext::new(self.prime(), Presentation::GradedI)
    }

    /// `(−1)^λ` with `λ = i + |x_1| + ... + |x_{i−1}| + |x'|`, as a flag
    /// that is `true` for an odd exponent.
    pub fn sign_exponent_is_odd(&self, i: usize, before: &[Monomial], x_prime: &Monomial) -> bool {
        let p = self.prime();
        let deg: u64 = before.iter().map(|m| m.internal_degree(p)).sum::<u64>() + x_prime.internal_degree(p);
        (i as u64 + deg) % 2 == 1
    }

    /// Differential of a single BP word, modulo `I^k`.
    fn d_word(&self, key: &TensorKey, c: &Scalar, k: u64) -> Tensor {
        let p = self.prime();
        let r = Reduction::mod_ideal(p, k);
        let s = key.arity();
        let mut out = Tensor::zero(s + 1);
        let val = c.p_valuation(p).expect("nonzero").max(0) as u64;
        let base = val + key.v_weight();
        if base >= k {
            return out;
        }
        let kk = Some(k - base);
        if !key.head.is_one() {
            let eta = self.maps.eta_r_monomial(&key.head, Some(k - val));
            for (ek, c2) in eta.iter() {
                if ek.factors[0].is_one() {
                    continue;
                }
                let mut factors = Factors::new();
                factors.push(ek.factors[0].clone());
                factors.extend(key.factors.iter().cloned());
                let nk = TensorKey { head: ek.head.clone(), factors };
                if let Some(v) = r.apply(&nk, -(c * c2)) {
                    out.add_term(nk, v);
                }
            }
        }
        for i in 1..=s {
            let rd = self.maps.reduced_delta_monomial(&key.factors[i - 1], kk);
            for (dk, c2) in rd.iter() {
                let odd = self.sign_exponent_is_odd(i, &key.factors[..i - 1], &dk.factors[0]);
                // −(−1)^λ
                let sign = if odd { Scalar::one() } else { -Scalar::one() };
                let base = &(c * c2) * &sign;
                let carry = self.maps.carry_left(&dk.head, i - 1, kk);
                for (ck, c3) in carry.iter() {
                    let Some((head, _)) = key.head.mul(&ck.head) else { continue };
                    let mut factors = Factors::new();
                    for (x, y) in key.factors[..i - 1].iter().zip(&ck.factors) {
                        factors.push(x.mul(y).expect("even").0);
                    }
                    factors.push(dk.factors[0].clone());
                    factors.push(dk.factors[1].clone());
                    factors.extend(key.factors[i..].iter().cloned());
                    let nk = TensorKey { head, factors };
                    if let Some(v) = r.apply(&nk, &base * c3) {
                        out.add_term(nk, v);
                    }
                }
            }
        }
        out
    }

    /// `d` on `Ω_{BP_*BP}(BP_*)`, modulo `I^k`.
    pub fn d_bp(&self, x: &CobarElement, k: u64) -> Result<CobarElement, CobarError> {
        if !x.is_bp() {
            return Err(CobarError::WrongContext(Presentation::BpBp));
        }
        let terms: Vec<(&TensorKey, &Scalar)> = x.tensor.iter().collect();
        let arity = x.s() + 1;
        let out = terms
            .par_iter()
            .fold(
                || Tensor::zero(arity),
                |mut acc, (key, c)| {
                    acc.add_assign(&self.d_word(key, c, k));
                    acc
                },
            )
            .reduce(
                || Tensor::zero(arity),
                |mut a, b| {
                    a.add_assign(&b);
                    a
                },
            );
        Ok(CobarElement { ctx: x.ctx, tensor: out.reduce(&Reduction::mod_ideal(self.prime(), k)) })
    }

    /// Lifts an associated-graded chain to BP (`q_0 ↦ p`, `q_i ↦ v_i`).
    pub fn lift(&self, x: &CobarElement) -> Result<CobarElement, CobarError> {
        if x.ctx.presentation != Presentation::GradedI {
            return Err(CobarError::WrongContext(Presentation::GradedI));
        }
        let p = self.prime() as i64;
        let tensor = x.tensor.map_terms(x.s(), |k, c| {
            let q0 = k.head.exponent(GeneratorId::q(0));
            let head = k
                .head
                .iter()
                .filter(|(g, _)| g.index > 0)
                .fold(Monomial::one(), |acc, (g, e)| {
                    acc.mul(&Monomial::generator(GeneratorId::v(g.index), e)).unwrap().0
                });
            let coef = c * &Scalar::from_int(p).pow(q0);
            vec![(TensorKey { head, factors: k.factors.clone() }, coef)]
        });
        Ok(CobarElement { ctx: self.bp_context(), tensor })
    }

    /// The filtration-`k` part of a BP chain, reduced into `Ω_{P_*}(I^k/I^{k+1})`.
    pub fn shadow(&self, x: &CobarElement, k: u64) -> Result<CobarElement, CobarError> {
        if !x.is_bp() {
            return Err(CobarError::WrongContext(Presentation::BpBp));
        }
        let p = self.prime();
        let tensor = x.tensor.map_terms(x.s(), |key, c| {
            if filtration(key, c, p) != k as i64 {
                return vec![];
            }
            let a = c.p_valuation(p).unwrap();
            let unit = c.div_p_pow(p, a as u32);
            let head = key.head.iter().fold(Monomial::generator(GeneratorId::q(0), a as u64), |acc, (g, e)| {
                acc.mul(&Monomial::generator(GeneratorId::q(g.index), e)).unwrap().0
            });
            vec![(TensorKey { head, factors: key.factors.clone() }, unit.reduce_mod_p(p).unwrap())]
        });
        Ok(CobarElement { ctx: self.graded_context(), tensor: tensor.reduce(&Reduction::mod_prime(p)) })
    }

    /// `d` on `Ω_{P_*}(I^k/I^{k+1})`, for chains homogeneous in `q`-degree
    /// per term.
    pub fn d_graded(&self, x: &CobarElement) -> Result<CobarElement, CobarError> {
        let mut by_degree: BTreeMap<u64, Tensor> = BTreeMap::new();
        for (key, c) in x.tensor.iter() {
            let deg = key.head.family_weight(Family::Q);
            by_degree.entry(deg).or_insert_with(|| Tensor::zero(x.s())).add_term(key.clone(), c.clone());
        }
        let mut out = Tensor::zero(x.s() + 1);
        for (deg, part) in by_degree {
            let lifted = self.lift(&CobarElement { ctx: x.ctx, tensor: part })?;
            let d = self.d_bp(&lifted, deg + 1)?;
            out.add_assign(self.shadow(&d, deg)?.tensor());
        }
        Ok(CobarElement { ctx: x.ctx, tensor: out.reduce(&Reduction::mod_prime(self.prime())) })
    }

    /// `d` in whichever context `x` lives; BP chains are reduced mod `I^k`.
    pub fn cobar_d(&self, x: &CobarElement, k: u64) -> Result<CobarElement, CobarError> {
        match x.ctx.presentation {
            Presentation::BpBp => self.d_bp(x, k),
            Presentation::GradedI => self.d_graded(x),
            other => Err(CobarError::WrongContext(other)),
        }
    }

    /// `d(t_n^{p^i})` modulo `I^2`.
    pub fn d_t_power(&self, n: u32, i: u32) -> CobarElement {
        let x = Monomial::generator(GeneratorId::t(n), self.prime().pow(i));
        let word = Tensor::from_term(TensorKey::new(Monomial::one(), [x]), Scalar::one());
        self.d_bp(&CobarElement { ctx: self.bp_context(), tensor: word }, 2).expect("BP chain")
    }

    /// `d(d(x)) ≡ 0`, modulo `I^k` for BP chains and exactly for graded ones.
    pub fn d_squared_check(&self, x: &CobarElement, k: u64) -> Result<bool, CobarError> {
        let dd = self.cobar_d(&self.cobar_d(x, k)?, k)?;
        Ok(dd.is_zero())
    }
}

/// Partitions a BP chain by I-adic filtration.
pub fn split_by_filtration(x: &CobarElement) -> BTreeMap<u64, CobarElement> {
    let p = x.prime();
    let mut out: BTreeMap<u64, Tensor> = BTreeMap::new();
    for (k, c) in x.tensor().iter() {
        let f = filtration(k, c, p).max(0) as u64;
        out.entry(f).or_insert_with(|| Tensor::zero(x.s())).add_term(k.clone(), c.clone());
    }
    out.into_iter().map(|(f, t)| (f, CobarElement { ctx: x.context(), tensor: t })).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 5;

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn word(ctx: RingContext, c: i64, head: &str, fs: &[&str]) -> CobarElement {
        let t = Tensor::from_term(TensorKey::new(mono(head), fs.iter().map(|f| mono(f))), Scalar::from_int(c));
        CobarElement::new(ctx, t).unwrap()
    }

    #[test]
    fn d_q1_graded() {
        let cobar = Cobar::new(P);
        let x = word(cobar.graded_context(), 1, "q1", &[]);
        let d = cobar.cobar_d(&x, 0).unwrap();
        assert_eq!(d.to_string(), "-q0 | t1");
    }

    #[test]
    fn t1_is_primitive() {
        let cobar = Cobar::new(P);
        let x = word(cobar.bp_context(), 1, "1", &["t1"]);
        assert!(cobar.cobar_d(&x, 2).unwrap().is_zero());
    }

    #[test]
    fn d_t1_p_is_p_b10() {
        let cobar = Cobar::new(P);
        let d = cobar.d_t_power(1, 1);
        let b = cobar.maps().b_element(1, 0).unwrap().scale(&Scalar::from_int(5));
        assert_eq!(d.tensor(), &b);
        assert_eq!(d.to_string(), "5 | t1 | t1^4 + 10 | t1^2 | t1^3 + 10 | t1^3 | t1^2 + 5 | t1^4 | t1");
    }

    #[test]
    fn unit_factor_rejected() {
        let cobar = Cobar::new(P);
        let t = Tensor::from_term(TensorKey::new(Monomial::one(), [Monomial::one()]), Scalar::one());
        assert_eq!(CobarElement::new(cobar.bp_context(), t), Err(CobarError::UnitFactor(1)));
    }

    #[test]
    fn split_examples() {
        let cobar = Cobar::new(P);
        let ctx = cobar.bp_context();
        let x = word(ctx, 5, "1", &["t1"]);
        let parts = split_by_filtration(&x);
        assert_eq!(parts.keys().copied().collect::<Vec<_>>(), vec![1]);
        let y = word(ctx, 1, "v1", &["t1"]).add(&word(ctx, 25, "1", &["t2"])).unwrap();
        let parts = split_by_filtration(&y);
        assert_eq!(parts[&1].to_string(), "v1 | t1");
        assert_eq!(parts[&2].to_string(), "25 | t2");
    }

    #[test]
    fn lift_and_shadow_are_inverse() {
        let cobar = Cobar::new(P);
        let x = word(cobar.graded_context(), 2, "q0^2*q1", &["t1^5", "t2"]);
        let lifted = cobar.lift(&x).unwrap();
        assert_eq!(lifted.to_string(), "50*v1 | t1^5 | t2");
        assert_eq!(cobar.shadow(&lifted, 3).unwrap(), x);
    }
}
