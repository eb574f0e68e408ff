//! Structure maps of `(BP_*, BP_*BP)` and of the dual Steenrod algebra.
//!
//! The BP-side maps are computed through the logarithm generators `m_n`,
//! eliminated in favour of `v`-polynomials with rational coefficients. Every
//! intermediate then has nonnegative I-adic length in the Gauss sense
//! (`v_p(coef) + v-exponents`), which is multiplicative, so dropping terms of
//! length `>= k` after each product yields results that are exact modulo
//! `I^k`.

use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use rustc_hash::FxHashMap;
use thiserror::Error;

use crate::algebra::{
    AlgebraElement, Family, GeneratorId, Monomial, Presentation, RingContext, Scalar,
};
use crate::coeff::binom_over_p;
use crate::tensor::{Reduction, Tensor, TensorKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructError {
    #[error("{what} has a coefficient that is not p-integral")]
    NotIntegral { what: String },
    #[error("{0}")]
    Domain(String),
}

/// A computed structure-map value, exact unless `truncation` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureMapResult<T> {
    pub value: T,
    /// The value is correct modulo `I^k`.
    pub truncation: Option<u64>,
}

fn t_pow(i: u32, e: u64) -> Monomial {
    Monomial::generator(GeneratorId::t(i), e)
}

fn v_mon(i: u32, e: u64) -> Monomial {
    Monomial::generator(GeneratorId::v(i), e)
}

fn key(head: Monomial, factors: impl IntoIterator<Item = Monomial>) -> TensorKey {
    TensorKey::new(head, factors)
}

type Cache<K> = Mutex<FxHashMap<K, Arc<Tensor>>>;

fn cached<K: std::hash::Hash + Eq + Clone>(
    cache: &Cache<K>,
    k: K,
    compute: impl FnOnce() -> Tensor,
) -> Arc<Tensor> {
    if let Some(hit) = cache.lock().unwrap().get(&k) {
        return hit.clone();
    }
    let value = Arc::new(compute());
    cache.lock().unwrap().entry(k).or_insert(value).clone()
}

const MEMO_LIMIT: usize = 4096;

/// Like [`cached`], but results larger than `MEMO_LIMIT` terms are not kept.
fn cached_small<K: std::hash::Hash + Eq + Clone>(
    cache: &Cache<K>,
    k: K,
    compute: impl FnOnce() -> Tensor,
) -> Arc<Tensor> {
    if let Some(hit) = cache.lock().unwrap().get(&k) {
        return hit.clone();
    }
    let value = Arc::new(compute());
    if value.len() > MEMO_LIMIT {
        return value;
    }
    cache.lock().unwrap().entry(k).or_insert(value).clone()
}

/// Structure maps of `(BP_*, BP_*BP)` at a fixed prime, with write-once
/// memo tables keyed by the truncation.
pub struct BpMaps {
    p: u64,
    m: Cache<u32>,
    eta_v: Cache<(u32, Option<u64>)>,
    eta_ppow: Cache<(u32, u32, Option<u64>)>,
    delta: Cache<(u32, Option<u64>)>,
    delta_ppow: Cache<(u32, u32, Option<u64>)>,
    delta_mono: Cache<(Monomial, Option<u64>)>,
    eta_mono: Cache<(Monomial, Option<u64>)>,
    carry: Cache<(usize, Monomial, Option<u64>)>,
    b: Cache<(u32, u32)>,
}

impl BpMaps {
    pub fn new(p: u64) -> Self {
        Self {
            p,
            m: Default::default(),
            eta_v: Default::default(),
            eta_ppow: Default::default(),
            delta: Default::default(),
            delta_ppow: Default::default(),
            delta_mono: Default::default(),
            eta_mono: Default::default(),
            carry: Default::default(),
            b: Default::default(),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    fn reduction(&self, k: Option<u64>) -> Reduction {
        match k {
            Some(k) => Reduction::mod_ideal(self.p, k),
            None => Reduction::exact(self.p),
        }
    }

    fn ps(&self) -> Scalar {
        Scalar::from_int(self.p as i64)
    }

    fn ppow(&self, i: u32) -> u64 {
        self.p.pow(i)
    }

    /// `m_n` as a rational polynomial in the `v_i` (arity 0).
    pub fn m_in_v(&self, n: u32) -> Arc<Tensor> {
        cached(&self.m, n, || {
            if n == 0 {
                return Tensor::unit(0);
            }
            let r = Reduction::exact(self.p);
            let mut acc = Tensor::from_term(key(v_mon(n, 1), []), Scalar::one());
            for i in 1..n {
                let v = Tensor::from_term(key(v_mon(n - i, self.ppow(i)), []), Scalar::one());
                acc.add_assign(&v.mul(&self.m_in_v(i), &r));
            }
            acc.scale(&Scalar::new(1, self.p as i64).unwrap())
        })
    }

    /// `m_i` placed in the head of an `arity`-fold tensor.
    fn m_head(&self, i: u32, arity: usize) -> Tensor {
        self.m_in_v(i)
            .widen(arity, |k| key(k.head.clone(), (0..arity).map(|_| Monomial::one())))
    }

    /// `η_R(m_n) = Σ m_i t_j^{p^i}` with the `m_i` written in `v`.
    pub fn eta_r_m_in_v(&self, n: u32) -> Tensor {
        let mut out = Tensor::zero(1);
        for i in 0..=n {
            let j = n - i;
            let m = self.m_in_v(i);
            for (k, c) in m.iter() {
                out.add_term(key(k.head.clone(), [t_pow(j, self.ppow(i))]), c.clone());
            }
        }
        out
    }

    /// `η_R(v_n)` in `BP_*BP`, as an arity-1 tensor (`v` head, `t` slot).
    pub fn eta_r_v_tensor(&self, n: u32, k: Option<u64>) -> Arc<Tensor> {
        cached(&self.eta_v, (n, k), || {
            let r = self.reduction(k);
            if n == 0 {
                return Tensor::from_term(key(Monomial::one(), [Monomial::one()]), self.ps()).reduce(&r);
            }
            let mut acc = self.eta_r_m_in_v(n).scale(&self.ps()).reduce(&r);
            for i in 1..n {
                let pow = self.eta_r_v_ppow(n - i, i, k);
                let prod = pow.mul(&self.eta_r_m_in_v(i).reduce(&r), &r);
                acc.add_scaled(&prod, &-Scalar::one());
            }
            acc
        })
    }

    /// `η_R(v_n)^{p^i}`.
    fn eta_r_v_ppow(&self, n: u32, i: u32, k: Option<u64>) -> Arc<Tensor> {
        if i == 0 {
            return self.eta_r_v_tensor(n, k);
        }
        cached(&self.eta_ppow, (n, i, k), || {
            self.eta_r_v_ppow(n, i - 1, k).pow(self.p, &self.reduction(k))
        })
    }

    /// `η_R(v_n)` as an element of `BP_*BP`, asserted integral.
    pub fn eta_r_v(&self, n: u32, k: Option<u64>) -> Result<StructureMapResult<AlgebraElement>, StructError> {
        if n == 0 {
            return Err(StructError::Domain("eta_R(v_n) needs n >= 1".into()));
        }
        let t = self.eta_r_v_tensor(n, k);
        if !t.is_p_integral(self.p) {
            return Err(StructError::NotIntegral { what: format!("eta_R(v{n})") });
        }
        Ok(StructureMapResult { value: slot_product(&t, RingContext::new(self.p, Presentation::BpBp)), truncation: k })
    }

    /// `η_R(m_n)` in the `H_*BP` presentation.
    pub fn eta_r_m(&self, n: u32) -> AlgebraElement {
        let ctx = RingContext::new(self.p, Presentation::HBp);
        let mut out = AlgebraElement::zero(ctx);
        for i in 0..=n {
            let m = Monomial::generator(GeneratorId::new(Family::M, i), 1);
            let (mono, _) = m.mul(&t_pow(n - i, self.ppow(i))).unwrap();
            out.add_term(mono, Scalar::one());
        }
        out
    }

    /// `η_R` of a `v`-monomial, as an arity-1 tensor.
    pub fn eta_r_monomial(&self, v: &Monomial, k: Option<u64>) -> Arc<Tensor> {
        cached(&self.eta_mono, (v.clone(), k), || {
            let r = self.reduction(k);
            let mut acc = Tensor::unit(1).reduce(&r);
            for (g, e) in v.iter() {
                assert_eq!(g.family, Family::V, "eta_R is applied to v-monomials");
                acc = acc.mul(&self.eta_r_v_tensor(g.index, k).pow(e, &r), &r);
            }
            acc
        })
    }

    /// `Δ(t_n)` as an arity-2 tensor.
    pub fn delta_t_tensor(&self, n: u32, k: Option<u64>) -> Arc<Tensor> {
        cached(&self.delta, (n, k), || {
            let r = self.reduction(k);
            if n == 0 {
                return Tensor::unit(2);
            }
            let mut acc = Tensor::zero(2);
            for i in 0..=n {
                for j in 0..=n - i {
                    let l = n - i - j;
                    let factors = [t_pow(j, self.ppow(i)), t_pow(l, self.ppow(i + j))];
                    for (mk, c) in self.m_in_v(i).iter() {
                        acc.add_term(key(mk.head.clone(), factors.clone()), c.clone());
                    }
                }
            }
            let mut acc = acc.reduce(&r);
            for i in 1..=n {
                let pow = self.delta_t_ppow(n - i, i, k);
                let prod = self.m_head(i, 2).reduce(&r).mul(&pow, &r);
                acc.add_scaled(&prod, &-Scalar::one());
            }
            acc
        })
    }

    /// `Δ(t_n)^{p^i} = Δ(t_n^{p^i})`.
    pub fn delta_t_ppow(&self, n: u32, i: u32, k: Option<u64>) -> Arc<Tensor> {
        if i == 0 {
            return self.delta_t_tensor(n, k);
        }
        if n == 0 {
            return Arc::new(Tensor::unit(2));
        }
        cached(&self.delta_ppow, (n, i, k), || {
            self.delta_t_ppow(n, i - 1, k).pow(self.p, &self.reduction(k))
        })
    }

    /// `Δ(t_n)`, asserted integral.
    pub fn delta_t(&self, n: u32, k: Option<u64>) -> Result<StructureMapResult<Tensor>, StructError> {
        let t = self.delta_t_tensor(n, k);
        if !t.is_p_integral(self.p) {
            return Err(StructError::NotIntegral { what: format!("Delta(t{n})") });
        }
        Ok(StructureMapResult { value: (*t).clone(), truncation: k })
    }

    /// `Δ` of a `t`-monomial via base-`p` digits of each exponent.
    pub fn delta_monomial(&self, x: &Monomial, k: Option<u64>) -> Arc<Tensor> {
        cached_small(&self.delta_mono, (x.clone(), k), || {
            let r = self.reduction(k);
            let mut acc = Tensor::unit(2);
            for (g, e) in x.iter() {
                assert_eq!(g.family, Family::T, "Delta is applied to t-monomials");
                let mut e = e;
                let mut j = 0;
                while e > 0 {
                    let d = e % self.p;
                    if d > 0 {
                        acc = acc.mul(&self.delta_t_ppow(g.index, j, k).pow(d, &r), &r);
                    }
                    e /= self.p;
                    j += 1;
                }
            }
            acc
        })
    }

    /// `Δ(x) − 1⊗x − x⊗1` for a `t`-monomial `x`.
    pub fn reduced_delta_monomial(&self, x: &Monomial, k: Option<u64>) -> Tensor {
        self.delta_monomial(x, k).filter(|key, _| !key.has_unit_factor())
    }

    /// Moves a `v`-monomial sitting as left coefficient of slot `slots + 1`
    /// into the head, through slots `slots, ..., 1` (an arity-`slots` tensor).
    pub fn carry_left(&self, v: &Monomial, slots: usize, k: Option<u64>) -> Arc<Tensor> {
        if slots == 0 {
            return Arc::new(Tensor::from_term(key(v.clone(), []), Scalar::one()));
        }
        cached(&self.carry, (slots, v.clone(), k), || {
            let eta = self.eta_r_monomial(v, k);
            let r = self.reduction(k);
            let mut out = Tensor::zero(slots);
            for (ek, c) in eta.iter() {
                let inner = self.carry_left(&ek.head, slots - 1, k);
                for (ik, c2) in inner.iter() {
                    let mut factors = ik.factors.clone();
                    factors.push(ek.factors[0].clone());
                    let nk = TensorKey { head: ik.head.clone(), factors };
                    if let Some(c3) = r.apply(&nk, c * c2) {
                        out.add_term(nk, c3);
                    }
                }
            }
            out
        })
    }

    /// The element `b_{i,j}` of `BP_*BP ⊗ BP_*BP`, exactly.
    pub fn b_element(&self, i: u32, j: u32) -> Result<Arc<Tensor>, StructError> {
        if i == 0 {
            return Err(StructError::Domain("b_{i,j} needs i >= 1".into()));
        }
        let t = cached(&self.b, (i, j), || {
            let mut pw = self.milnor_power(i, self.ppow(j + 1));
            for kk in 0..=i {
                let f = [t_pow(i - kk, self.ppow(j + 1)), t_pow(kk, self.ppow(i - kk + j + 1))];
                pw.add_term(key(Monomial::one(), f), -Scalar::one());
            }
            pw.scale(&Scalar::new(1, self.p as i64).unwrap())
        });
        if !t.is_p_integral(self.p) {
            return Err(StructError::NotIntegral { what: format!("b_({i},{j})") });
        }
        Ok(t)
    }

    /// `(Σ_k t_{i−k} ⊗ t_k^{p^{i−k}})^n` over the integers, expanded by
    /// multinomial coefficients.
    fn milnor_power(&self, i: u32, n: u64) -> Tensor {
        fn go(
            maps: &BpMaps,
            i: u32,
            k: u32,
            rem: u64,
            coef: &BigInt,
            left: &Monomial,
            right: &Monomial,
            out: &mut Tensor,
        ) {
            let lf = |e: u64| t_pow(i - k, e);
            let rf = |e: u64| t_pow(k, e * maps.ppow(i - k));
            if k == i {
                let l = left.mul(&lf(rem)).unwrap().0;
                let r = right.mul(&rf(rem)).unwrap().0;
                out.add_term(key(Monomial::one(), [l, r]), Scalar::from(coef.clone()));
                return;
            }
            let mut c = coef.clone();
            for m in 0..=rem {
                let l = left.mul(&lf(m)).unwrap().0;
                let r = right.mul(&rf(m)).unwrap().0;
                go(maps, i, k + 1, rem - m, &c, &l, &r, out);
                c = c * BigInt::from(rem - m) / BigInt::from(m + 1);
            }
        }
        let mut out = Tensor::zero(2);
        go(self, i, 0, n, &BigInt::from(1), &Monomial::one(), &Monomial::one(), &mut out);
        out
    }

    /// `b̃_{i,j} = Σ_k (C(p,k)/p) t_i^{k p^j} ⊗ t_i^{(p−k) p^j}`.
    pub fn b_tilde(&self, i: u32, j: u32) -> Tensor {
        let mut out = Tensor::zero(2);
        let pj = self.ppow(j);
        for kk in 1..self.p {
            let c = binom_over_p(kk, self.p).unwrap();
            out.add_term(
                key(Monomial::one(), [t_pow(i, kk * pj), t_pow(i, (self.p - kk) * pj)]),
                Scalar::from(c),
            );
        }
        out
    }
}

/// Multiplies the slots of each word together (`A ⊗ Γ^{⊗n} → Γ`).
pub fn slot_product(t: &Tensor, ctx: RingContext) -> AlgebraElement {
    let mut out = AlgebraElement::zero(ctx);
    for (k, c) in t.iter() {
        let mut m = k.head.clone();
        let mut negative = false;
        for f in &k.factors {
            let Some((n, s)) = m.mul(f) else { continue };
            m = n;
            negative ^= s;
        }
        out.add_term(m, if negative { -c } else { c.clone() });
    }
    out
}

/// `Σ_{i=0}^n v_i t_{n−i}^{p^i}` with `v_0 = p`.
pub fn eta_r_v_leading(p: u64, n: u32) -> AlgebraElement {
    let ctx = RingContext::new(p, Presentation::BpBp);
    let mut out = AlgebraElement::zero(ctx);
    out.add_term(t_pow(n, 1), Scalar::from_int(p as i64));
    for i in 1..=n {
        let (m, _) = v_mon(i, 1).mul(&t_pow(n - i, p.pow(i))).unwrap();
        out.add_term(m, Scalar::one());
    }
    out
}

/// `Σ_{k=0}^n t_{n−k} ⊗ t_k^{p^{n−k}}`.
pub fn delta_t_leading(p: u64, n: u32) -> Tensor {
    let mut out = Tensor::zero(2);
    for k in 0..=n {
        out.add_term(key(Monomial::one(), [t_pow(n - k, 1), t_pow(k, p.pow(n - k))]), Scalar::one());
    }
    out
}

/// `ψ(q_n) = Σ q_i ⊗ t_{n−i}^{p^i}` in `E_0BP_* ⊗ P_*` (arity 1, `q` head).
pub fn psi_q(p: u64, n: u32) -> Tensor {
    let mut out = Tensor::zero(1);
    for i in 0..=n {
        out.add_term(
            key(Monomial::generator(GeneratorId::q(i), 1), [t_pow(n - i, p.pow(i))]),
            Scalar::one(),
        );
    }
    out
}

/// Coproduct on the `t`/`τ̃` generators of the dual Steenrod algebra.
pub fn steenrod_delta(p: u64, g: GeneratorId) -> Result<Tensor, StructError> {
    let mut out = Tensor::zero(2);
    let n = g.index;
    match g.family {
        Family::T => {
            for i in 0..=n {
                out.add_term(key(Monomial::one(), [t_pow(i, 1), t_pow(n - i, p.pow(i))]), Scalar::one());
            }
        }
        Family::TauTilde => {
            for i in 0..=n {
                let tau = Monomial::generator(GeneratorId::new(Family::TauTilde, i), 1);
                out.add_term(key(Monomial::one(), [tau, t_pow(n - i, p.pow(i))]), Scalar::one());
            }
            let tau = Monomial::generator(g, 1);
            out.add_term(key(Monomial::one(), [Monomial::one(), tau]), Scalar::one());
        }
        _ => return Err(StructError::Domain(format!("steenrod_delta is defined on t and taut, got {g}"))),
    }
    Ok(out)
}

/// Milnor's coproduct on `ξ_n` and `τ_n`.
pub fn milnor_delta(p: u64, g: GeneratorId) -> Result<Tensor, StructError> {
    let mut out = Tensor::zero(2);
    let n = g.index;
    let xi = |i: u32, e: u64| Monomial::generator(GeneratorId::new(Family::Xi, i), e);
    match g.family {
        Family::Xi => {
            for i in 0..=n {
                out.add_term(key(Monomial::one(), [xi(n - i, p.pow(i)), xi(i, 1)]), Scalar::one());
            }
        }
        Family::Tau => {
            out.add_term(key(Monomial::one(), [Monomial::generator(g, 1), Monomial::one()]), Scalar::one());
            for i in 0..=n {
                let tau = Monomial::generator(GeneratorId::new(Family::Tau, i), 1);
                out.add_term(key(Monomial::one(), [xi(n - i, p.pow(i)), tau]), Scalar::one());
            }
        }
        _ => return Err(StructError::Domain(format!("milnor_delta is defined on xi and tau, got {g}"))),
    }
    Ok(out)
}

/// The conjugate `c(ξ_n)` or `c(τ_n)` written in the Milnor generators.
pub fn conjugate(p: u64, g: GeneratorId) -> Result<AlgebraElement, StructError> {
    let ctx = RingContext::new(p, Presentation::Steenrod);
    let xi = |i: u32, e: u64| {
        AlgebraElement::from_term(ctx, Monomial::generator(GeneratorId::new(Family::Xi, i), e), Scalar::one())
    };
    match g.family {
        Family::Xi => {
            // c(ξ_n) = −Σ_{i<n} ξ_{n−i}^{p^i} c(ξ_i)
            let mut cs: Vec<AlgebraElement> = vec![AlgebraElement::one(ctx)];
            for n in 1..=g.index {
                let mut acc = AlgebraElement::zero(ctx);
                for (i, ci) in cs.iter().enumerate() {
                    let term = xi(n - i as u32, p.pow(i as u32)).mul(ci).unwrap();
                    acc = acc.sub(&term).unwrap();
                }
                cs.push(acc);
            }
            Ok(cs.pop().unwrap())
        }
        Family::Tau => {
            // c(τ_n) = −τ_n − Σ_{i<n} ξ_{n−i}^{p^i} c(τ_i)
            let mut cs: Vec<AlgebraElement> = Vec::new();
            for n in 0..=g.index {
                let tau = AlgebraElement::generator(ctx, GeneratorId::new(Family::Tau, n)).unwrap();
                let mut acc = AlgebraElement::zero(ctx).sub(&tau).unwrap();
                for (i, ci) in cs.iter().enumerate() {
                    let term = xi(n - i as u32, p.pow(i as u32)).mul(ci).unwrap();
                    acc = acc.sub(&term).unwrap();
                }
                cs.push(acc);
            }
            Ok(cs.pop().unwrap())
        }
        _ => Err(StructError::Domain(format!("conjugate is defined on xi and tau, got {g}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;

    const P: u64 = 5;

    fn bp() -> RingContext {
        RingContext::new(P, Presentation::BpBp)
    }

    fn mono(s: &str) -> Monomial {
        s.parse().unwrap()
    }

    fn elem(terms: &[(i64, &str)]) -> AlgebraElement {
        let mut e = AlgebraElement::zero(bp());
        for (c, m) in terms {
            e.add_term(mono(m), Scalar::from_int(*c));
        }
        e
    }

    fn k2(a: &str, b: &str) -> TensorKey {
        TensorKey::new(Monomial::one(), [mono(a), mono(b)])
    }

    #[test]
    fn eta_r_m_small() {
        let maps = BpMaps::new(P);
        assert_eq!(maps.eta_r_m(0).to_string(), "1");
        assert_eq!(maps.eta_r_m(1).to_string(), "t1 + m1");
        assert_eq!(maps.eta_r_m(2).to_string(), "t1^5*m1 + t2 + m2");
    }

    #[test]
    fn eta_r_v1_exact() {
        let maps = BpMaps::new(P);
        let got = maps.eta_r_v(1, None).unwrap().value;
        assert_eq!(got, elem(&[(1, "v1"), (5, "t1")]));
    }

    #[test]
    fn eta_r_v2_closed_form() {
        // η_R(v_2) = v_2 + v_1 t_1^p + p t_2 − (p+1) v_1^p t_1
        //           − Σ_{k≥2} C(p+1,k) p^{k−1} v_1^{p+1−k} t_1^k
        let maps = BpMaps::new(P);
        let got = maps.eta_r_v(2, None).unwrap().value;
        let mut want = elem(&[(1, "v2"), (1, "v1*t1^5"), (5, "t2"), (-6, "v1^5*t1")]);
        for kk in 2..=6u64 {
            let c = crate::coeff::binomial(6, kk) * num_bigint::BigInt::from(5u64.pow(kk as u32 - 1));
            let m = Monomial::generator(GeneratorId::v(1), 6 - kk)
                .mul(&Monomial::generator(GeneratorId::t(1), kk))
                .unwrap()
                .0;
            want.add_term(m, -Scalar::from(c));
        }
        assert_eq!(got, want);
    }

    #[test]
    fn b10_expansion() {
        let maps = BpMaps::new(P);
        let b = maps.b_element(1, 0).unwrap();
        let mut want = Tensor::zero(2);
        for (c, a, bb) in [(1, "t1", "t1^4"), (2, "t1^2", "t1^3"), (2, "t1^3", "t1^2"), (1, "t1^4", "t1")] {
            want.add_term(k2(a, bb), Scalar::from_int(c));
        }
        assert_eq!(*b, want);
        assert_eq!(maps.b_tilde(1, 0), want);
    }

    #[test]
    fn delta_t1_and_t2() {
        let maps = BpMaps::new(P);
        assert_eq!(maps.delta_t(1, None).unwrap().value, delta_t_leading(P, 1));
        let d2 = maps.delta_t(2, Some(2)).unwrap().value;
        let mut want = delta_t_leading(P, 2);
        let b = maps.b_element(1, 0).unwrap();
        for (k, c) in b.iter() {
            want.add_term(TensorKey { head: mono("v1"), factors: k.factors.clone() }, -c);
        }
        assert_eq!(d2, want);
    }

    #[test]
    fn psi_q_small() {
        assert_eq!(psi_q(P, 0).to_string(), "q0 | 1");
        assert_eq!(psi_q(P, 1).to_string(), "q0 | t1 + q1 | 1");
        assert_eq!(psi_q(P, 2).to_string(), "q0 | t2 + q1 | t1^5 + q2 | 1");
    }

    #[test]
    fn steenrod_small() {
        assert_eq!(steenrod_delta(P, GeneratorId::t(1)).unwrap().to_string(), "1 | 1 | t1 + 1 | t1 | 1");
        let tt = |i| GeneratorId::new(Family::TauTilde, i);
        assert_eq!(steenrod_delta(P, tt(0)).unwrap().to_string(), "1 | 1 | taut0 + 1 | taut0 | 1");
        assert_eq!(
            steenrod_delta(P, tt(1)).unwrap().to_string(),
            "1 | 1 | taut1 + 1 | taut0 | t1 + 1 | taut1 | 1"
        );
        assert!(steenrod_delta(P, GeneratorId::v(1)).is_err());
    }

    #[test]
    fn conjugates_small() {
        let ctx = RingContext::new(P, Presentation::Steenrod);
        let xi1 = AlgebraElement::generator(ctx, GeneratorId::new(Family::Xi, 1)).unwrap();
        assert_eq!(conjugate(P, GeneratorId::new(Family::Xi, 1)).unwrap(), xi1.scale(&-Scalar::one()));
        let tau0 = AlgebraElement::generator(ctx, GeneratorId::new(Family::Tau, 0)).unwrap();
        assert_eq!(conjugate(P, GeneratorId::new(Family::Tau, 0)).unwrap(), tau0.scale(&-Scalar::one()));
        assert_eq!(conjugate(P, GeneratorId::new(Family::Xi, 0)).unwrap(), AlgebraElement::one(ctx));
    }

    #[test]
    fn carry_left_one_slot_is_eta() {
        let maps = BpMaps::new(P);
        let c = maps.carry_left(&mono("v1"), 1, None);
        assert_eq!(c.to_string(), "5 | t1 + v1 | 1");
    }
}
