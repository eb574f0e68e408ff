use cobar_core::algebra::{GeneratorId, Monomial, Scalar};
use cobar_core::structmaps::BpMaps;
use cobar_core::tensor::{Reduction, Tensor, TensorKey};

use super::P;

pub fn t(i: u32, e: u64) -> Monomial {
    Monomial::generator(GeneratorId::t(i), e)
}

pub fn v(i: u32) -> Monomial {
    Monomial::generator(GeneratorId::v(i), 1)
}

pub fn key(head: Monomial, factors: impl IntoIterator<Item = Monomial>) -> TensorKey {
    TensorKey::new(head, factors)
}

pub fn pw(i: u32) -> u64 {
    P.pow(i)
}

/// `Σ_{k=0}^{n} t_{n−k}^{p^i} ⊗ t_k^{p^{n−k+i}}`, unit factors included.
pub fn primitive_sum(n: u32, i: u32) -> Tensor {
    let mut out = Tensor::zero(2);
    for k in 0..=n {
        out.add_term(key(Monomial::one(), [t(n - k, pw(i)), t(k, pw(n - k + i))]), Scalar::one());
    }
    out
}

/// `b_{i,j}` straight from its definition, by one exact power.
pub fn b_oracle(i: u32, j: u32) -> Tensor {
    let whole = primitive_sum(i, 0).pow(pw(j + 1), &Reduction::exact(P));
    let diff = whole.sub(&primitive_sum(i, j + 1));
    let b = diff.scale(&Scalar::new(1, P as i64).unwrap());
    assert!(b.is_p_integral(P));
    assert!(b.iter().all(|(k, _)| !k.has_unit_factor()));
    b
}

/// `a ≡ b` modulo `I^k`.
pub fn congruent(a: &Tensor, b: &Tensor, k: u64) -> bool {
    a.sub(b).reduce(&Reduction::mod_ideal(P, k)).is_zero()
}

pub fn with_head(x: &Tensor, h: &Monomial) -> Tensor {
    x.map_terms(x.arity(), |k, c| vec![(key(h.mul(&k.head).unwrap().0, k.factors.iter().cloned()), c.clone())])
}

/// Applies `Δ` to slot `slot` (0 or 1) of an arity-2 tensor, carrying the
/// coefficients of the new slots to the head.
pub fn expand(maps: &BpMaps, x: &Tensor, slot: usize, k: Option<u64>) -> Tensor {
    let r = k.map_or(Reduction::exact(P), |k| Reduction::mod_ideal(P, k));
    let mut out = Tensor::zero(3);
    for (xk, c) in x.iter() {
        let d = maps.delta_monomial(&xk.factors[slot], k);
        for (dk, c2) in d.iter() {
            let c = c * c2;
            if slot == 0 {
                let h = xk.head.mul(&dk.head).unwrap().0;
                let nk = key(h, [dk.factors[0].clone(), dk.factors[1].clone(), xk.factors[1].clone()]);
                if let Some(c) = r.apply(&nk, c) {
                    out.add_term(nk, c);
                }
            } else {
                for (ck, c3) in maps.carry_left(&dk.head, 1, k).iter() {
                    let h = xk.head.mul(&ck.head).unwrap().0;
                    let a = ck.factors[0].mul(&xk.factors[0]).unwrap().0;
                    let nk = key(h, [a, dk.factors[0].clone(), dk.factors[1].clone()]);
                    if let Some(c) = r.apply(&nk, &c * c3) {
                        out.add_term(nk, c);
                    }
                }
            }
        }
    }
    out
}
