//! May filtration: weights, leading terms, bounded enumeration of cobar words
//! and of May `E_1` monomials, and the conventional `E_1` names.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Family, GeneratorId, Monomial, Scalar};
use crate::cobar::CobarElement;
use crate::coeff::digit_sum;
use crate::tensor::{Factors, Tensor, TensorKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MayError {
    #[error("leading term of zero")]
    Zero,
    #[error("enumeration exceeded the cap of {0} words")]
    CapExceeded(usize),
}

/// May weight of a monomial: `(2i−1)·digit_sum(e)` for `t_i^e` and `ξ_i^e`,
/// `(2i+1)·e` for `q_i^e`, `v_i^e`, `a_i^e`, `τ_i^e`, `τ̃_i^e`.
pub fn monomial_may_weight(m: &Monomial, p: u64) -> u64 {
    m.iter()
        .map(|(g, e)| match g.family {
            Family::T | Family::Xi => (2 * g.index as u64 - 1) * digit_sum(e, p),
            Family::Q | Family::A | Family::V | Family::TauTilde | Family::Tau => (2 * g.index as u64 + 1) * e,
            Family::M => 0,
        })
        .sum()
}

/// May degree of a cobar word. The `p`-adic valuation of the coefficient
/// counts as a power of `q_0`.
pub fn word_may_degree(key: &TensorKey, c: &Scalar, p: u64) -> u64 {
    let q0 = if c.is_zero() { 0 } else { c.p_valuation(p).unwrap_or(0).max(0) as u64 };
    q0 + monomial_may_weight(&key.head, p) + key.factors.iter().map(|m| monomial_may_weight(m, p)).sum::<u64>()
}

/// Largest May degree among the terms of `x`.
pub fn may_degree(x: &CobarElement) -> Option<u64> {
    max_may(x.tensor(), x.prime())
}

pub fn max_may(t: &Tensor, p: u64) -> Option<u64> {
    t.iter().map(|(k, c)| word_may_degree(k, c, p)).max()
}

/// The maximal May degree and the sub-sum attaining it.
pub fn leading_term(x: &CobarElement) -> Result<(u64, CobarElement), MayError> {
    let p = x.prime();
    let m = may_degree(x).ok_or(MayError::Zero)?;
    Ok((m, x.filter(|k, c| word_may_degree(k, c, p) == m)))
}

/// Bounds for [`enumerate_words`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WordQuery {
    /// Cohomological degree.
    pub s: usize,
    /// Internal degree.
    pub t: u64,
    /// Strict upper bound on the May degree.
    pub may_bound: u64,
    /// Largest generator index; derived from `t` when absent.
    pub max_index: Option<u32>,
    /// Total `q`-degree of the head (0 for filtration-0 words).
    pub head_degree: u64,
}

fn t_degree(p: u64, i: u32) -> u64 {
    2 * (p.pow(i) - 1)
}

fn index_bound(p: u64, t: u64) -> u32 {
    let mut n = 0;
    while t_degree(p, n + 1) <= t {
        n += 1;
    }
    n
}

/// All `q`-monomials of total exponent `k` with degree at most `t` and May
/// weight below `may_bound`.
fn head_monomials(p: u64, k: u64, t: u64, may_bound: u64, max_index: u32) -> Vec<Monomial> {
    fn go(p: u64, from: u32, max: u32, left: u64, t: u64, may: u64, acc: &Monomial, out: &mut Vec<Monomial>) {
        if left == 0 {
            out.push(acc.clone());
            return;
        }
        for i in from..=max {
            let g = Monomial::generator(GeneratorId::q(i), 1);
            let d = t_degree(p, i);
            let w = 2 * i as u64 + 1;
            if d > t || w > may {
                break;
            }
            let next = acc.mul(&g).unwrap().0;
            go(p, i, max, left - 1, t - d, may - w, &next, out);
        }
    }
    let mut out = Vec::new();
    if may_bound > 0 {
        go(p, 0, max_index, k, t, may_bound - 1, &Monomial::one(), &mut out);
    }
    out
}

/// Nonempty `t`-monomials with degree at most `t_max` and May weight at most
/// `may_max`.
fn t_monomials(p: u64, max_index: u32, t_max: u64, may_max: u64) -> Vec<(Monomial, u64, u64)> {
    let mut out = vec![(Monomial::one(), 0u64, 0u64)];
    for i in 1..=max_index {
        let d = t_degree(p, i);
        let w = 2 * i as u64 - 1;
        let mut next = Vec::new();
        for (m, deg, may) in &out {
            next.push((m.clone(), *deg, *may));
            let mut e = 1;
            while deg + e * d <= t_max {
                let mw = may + w * digit_sum(e, p);
                if mw <= may_max {
                    let g = Monomial::generator(GeneratorId::t(i), e);
                    next.push((m.mul(&g).unwrap().0, deg + e * d, mw));
                }
                e += 1;
            }
        }
        out = next;
    }
    out.retain(|(m, _, _)| !m.is_one());
    out.sort_by(|a, b| (a.2, a.1, &a.0).cmp(&(b.2, b.1, &b.0)));
    out
}

/// Enumerated words, stored as indices into a head table and a factor table.
#[derive(Debug, Clone, Default)]
pub struct WordSet {
    pub heads: Vec<Monomial>,
    /// `(monomial, internal degree, May weight)`.
    pub factors: Vec<(Monomial, u64, u64)>,
    pub s: usize,
    /// Stride `s + 1`: head index, then factor indices.
    flat: Vec<u32>,
}

impl WordSet {
    pub fn len(&self) -> usize {
        self.flat.len() / (self.s + 1)
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_empty()
    }

    /// Head index and factor indices of word `n`.
    pub fn word(&self, n: usize) -> (usize, &[u32]) {
        let w = &self.flat[n * (self.s + 1)..(n + 1) * (self.s + 1)];
        (w[0] as usize, &w[1..])
    }

    pub fn key(&self, n: usize) -> TensorKey {
        let (h, fs) = self.word(n);
        TensorKey::new(self.heads[h].clone(), fs.iter().map(|&i| self.factors[i as usize].0.clone()))
    }
}

/// All words `head | f_1 | ... | f_s` with `q`-head of the given degree and
/// `t`-monomial factors satisfying the query, in canonical order. Fails
/// rather than truncating once more than `cap` words are found.
pub fn enumerate_words(p: u64, q: &WordQuery, cap: usize) -> Result<Vec<TensorKey>, MayError> {
    let ws = enumerate_word_set(p, q, cap)?;
    let mut out: Vec<TensorKey> = (0..ws.len()).map(|n| ws.key(n)).collect();
    out.sort();
    Ok(out)
}

/// As [`enumerate_words`], in compact form and unordered.
pub fn enumerate_word_set(p: u64, q: &WordQuery, cap: usize) -> Result<WordSet, MayError> {
    let max_index = q.max_index.unwrap_or_else(|| index_bound(p, q.t)).min(index_bound(p, q.t));
    let heads = head_monomials(p, q.head_degree, q.t, q.may_bound, max_index);
    if q.may_bound == 0 || q.s == 0 {
        let mut ws = WordSet { s: q.s, ..Default::default() };
        if q.s == 0 {
            ws.heads = heads
                .into_iter()
                .filter(|h| h.internal_degree(p) == q.t && monomial_may_weight(h, p) < q.may_bound)
                .collect();
            ws.flat = (0..ws.heads.len() as u32).collect();
        }
        if ws.len() > cap {
            return Err(MayError::CapExceeded(cap));
        }
        return Ok(ws);
    }
    let may_max = q.may_bound - 1;
    let monos = t_monomials(p, max_index, q.t, may_max);
    let mut by_degree: FxHashMap<u64, Vec<usize>> = FxHashMap::default();
    for (idx, (_, d, _)) in monos.iter().enumerate() {
        by_degree.entry(*d).or_default().push(idx);
    }
    let min_deg = t_degree(p, 1);
    let found = std::sync::atomic::AtomicUsize::new(0);

    struct Ctx<'a> {
        monos: &'a [(Monomial, u64, u64)],
        by_degree: &'a FxHashMap<u64, Vec<usize>>,
        s: usize,
        min_deg: u64,
        cap: usize,
        found: &'a std::sync::atomic::AtomicUsize,
    }

    fn go(cx: &Ctx, slot: usize, t_left: u64, may_left: u64, acc: &mut Vec<u32>, out: &mut Vec<u32>) -> bool {
        let rest = (cx.s - slot - 1) as u64;
        if slot + 1 == cx.s {
            if let Some(list) = cx.by_degree.get(&t_left) {
                for &idx in list {
                    if cx.monos[idx].2 <= may_left {
                        out.extend_from_slice(acc);
                        out.push(idx as u32);
                        if cx.found.fetch_add(1, std::sync::atomic::Ordering::Relaxed) >= cx.cap {
                            return false;
                        }
                    }
                }
            }
            return true;
        }
        for (idx, (_, d, w)) in cx.monos.iter().enumerate() {
            if *w + rest > may_left {
                break;
            }
            if *d + rest * cx.min_deg > t_left {
                continue;
            }
            acc.push(idx as u32);
            let ok = go(cx, slot + 1, t_left - d, may_left - w, acc, out);
            acc.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    let cx = Ctx { monos: &monos, by_degree: &by_degree, s: q.s, min_deg, cap, found: &found };
    let results: Vec<Result<Vec<u32>, MayError>> = heads
        .par_iter()
        .enumerate()
        .map(|(hi, h)| {
            let hd = h.internal_degree(p);
            let hw = monomial_may_weight(h, p);
            if hd > q.t || hw > may_max {
                return Ok(vec![]);
            }
            let mut raw = Vec::new();
            if !go(&cx, 0, q.t - hd, may_max - hw, &mut vec![hi as u32], &mut raw) {
                return Err(MayError::CapExceeded(cap));
            }
            Ok(raw)
        })
        .collect();
    let mut flat = Vec::new();
    for r in results {
        flat.extend(r?);
    }
    let ws = WordSet { heads, factors: monos, s: q.s, flat };
    if ws.len() > cap {
        return Err(MayError::CapExceeded(cap));
    }
    Ok(ws)
}

/// May `E_1` generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum E1Gen {
    A(u32),
    B(u32, u32),
    H(u32, u32),
}

impl E1Gen {
    fn order_key(&self) -> (u8, i64, i64) {
        match *self {
            E1Gen::A(i) => (0, i as i64, 0),
            E1Gen::B(i, j) => (1, -(i as i64), j as i64),
            E1Gen::H(i, j) => (2, -(i as i64), j as i64),
        }
    }

    pub fn s(&self) -> usize {
        match self {
            E1Gen::B(..) => 2,
            _ => 1,
        }
    }

    pub fn degree(&self, p: u64) -> u64 {
        match *self {
            E1Gen::A(i) => 2 * p.pow(i) - 1,
            E1Gen::B(i, j) => t_degree(p, i) * p.pow(j + 1),
            E1Gen::H(i, j) => t_degree(p, i) * p.pow(j),
        }
    }

    pub fn may(&self, p: u64) -> u64 {
        match *self {
            E1Gen::A(i) => 2 * i as u64 + 1,
            E1Gen::B(i, _) => p * (2 * i as u64 - 1),
            E1Gen::H(i, _) => 2 * i as u64 - 1,
        }
    }

    pub fn is_exterior(&self) -> bool {
        matches!(self, E1Gen::H(..))
    }
}

impl PartialOrd for E1Gen {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for E1Gen {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.order_key().cmp(&other.order_key())
    }
}

impl fmt::Display for E1Gen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            E1Gen::A(i) => write!(f, "a_{i}"),
            E1Gen::B(i, j) => write!(f, "b_{{{i},{j}}}"),
            E1Gen::H(i, j) => write!(f, "h_{{{i},{j}}}"),
        }
    }
}

/// A monomial in `E[h_{i,j}] ⊗ P[b_{i,j}] ⊗ P[a_i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct E1Monomial(BTreeMap<E1Gen, u64>);

impl E1Monomial {
    pub fn one() -> Self {
        Self::default()
    }

    pub fn from_gens(gens: impl IntoIterator<Item = (E1Gen, u64)>) -> Option<Self> {
        let mut m = Self::one();
        for (g, e) in gens {
            m = m.times(g, e)?;
        }
        Some(m)
    }

    /// Multiplies by `g^e`; `None` when an exterior generator would square.
    pub fn times(&self, g: E1Gen, e: u64) -> Option<Self> {
        if e == 0 {
            return Some(self.clone());
        }
        let mut m = self.0.clone();
        let x = m.entry(g).or_insert(0);
        *x += e;
        if g.is_exterior() && *x > 1 {
            return None;
        }
        Some(Self(m))
    }

    pub fn gens(&self) -> impl Iterator<Item = (E1Gen, u64)> + '_ {
        self.0.iter().map(|(g, e)| (*g, *e))
    }

    pub fn s(&self) -> usize {
        self.gens().map(|(g, e)| g.s() * e as usize).sum()
    }

    pub fn degree(&self, p: u64) -> u64 {
        self.gens().map(|(g, e)| g.degree(p) * e).sum()
    }

    pub fn may(&self, p: u64) -> u64 {
        self.gens().map(|(g, e)| g.may(p) * e).sum()
    }

    pub fn tokens(&self) -> Vec<E1Token> {
        self.gens().map(|(g, e)| E1Token::Gen(g, e)).collect()
    }

    /// Raw form, e.g. `a_0 h_{4,1} h_{3,1}`.
    pub fn raw(&self) -> String {
        render_tokens(&self.tokens(), false)
    }

    /// Conventional name with the `g`, `k`, `h_i`, `b_i` abbreviations.
    pub fn name(&self) -> String {
        e1_name(&self.tokens())
    }
}

/// A token of an `E_1` name: a generator power, one of the composite
/// abbreviations, or an unrecognised raw factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum E1Token {
    Gen(E1Gen, u64),
    G(u32),
    K(u32),
    Raw(String),
}

/// Applies the abbreviations `h_{2,i} h_{1,i} ↦ g_i` and
/// `h_{2,i} h_{1,i+1} ↦ k_i`, scanning left to right.
pub fn contract(tokens: &[E1Token]) -> Vec<E1Token> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut idx = 0;
    while idx < tokens.len() {
        if let (E1Token::Gen(E1Gen::H(2, a), 1), Some(E1Token::Gen(E1Gen::H(1, b), 1))) = (&tokens[idx], tokens.get(idx + 1)) {
            if b == a {
                out.push(E1Token::G(*a));
                idx += 2;
                continue;
            }
            if *b == a + 1 {
                out.push(E1Token::K(*a));
                idx += 2;
                continue;
            }
        }
        out.push(tokens[idx].clone());
        idx += 1;
    }
    out
}

fn render_tokens(tokens: &[E1Token], short: bool) -> String {
    let mut parts = Vec::new();
    for t in tokens {
        let (base, e) = match t {
            E1Token::Gen(E1Gen::H(1, j), e) if short => (format!("h_{j}"), *e),
            E1Token::Gen(E1Gen::B(1, j), e) if short => (format!("b_{j}"), *e),
            E1Token::Gen(g, e) => (g.to_string(), *e),
            E1Token::G(i) => (format!("g_{i}"), 1),
            E1Token::K(i) => (format!("k_{i}"), 1),
            E1Token::Raw(s) => (s.clone(), 1),
        };
        if e > 1 {
            parts.push(format!("{base}^{e}"));
        } else {
            parts.push(base);
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join(" ")
    }
}

/// Conventional display name of a token sequence.
pub fn e1_name(tokens: &[E1Token]) -> String {
    render_tokens(&contract(tokens), true)
}

/// Tokens of a cobar word: `q_i^e ↦ a_i^e` for the head, `t_i^{p^j} ↦ h_{i,j}`
/// for each factor, anything else kept raw.
pub fn word_tokens(key: &TensorKey, p: u64) -> Vec<E1Token> {
    let mut out = Vec::new();
    for (g, e) in key.head.iter() {
        match g.family {
            Family::Q | Family::V | Family::A => out.push(E1Token::Gen(E1Gen::A(g.index), e)),
            _ => out.push(E1Token::Raw(Monomial::generator(g, e).to_string())),
        }
    }
    out.extend(key.factors.iter().map(|m| factor_token(m, p)));
    out
}

/// `t_i^{p^j} ↦ h_{i,j}`; other monomials stay raw.
pub fn factor_token(m: &Monomial, p: u64) -> E1Token {
    if m.len() == 1 {
        let (g, e) = m.iter().next().unwrap();
        if g.family == Family::T {
            if let Some(j) = log_p(e, p) {
                return E1Token::Gen(E1Gen::H(g.index, j), 1);
            }
        }
    }
    E1Token::Raw(m.to_string())
}

pub fn log_p(mut e: u64, p: u64) -> Option<u32> {
    let mut j = 0;
    while e % p == 0 {
        e /= p;
        j += 1;
    }
    (e == 1).then_some(j)
}

/// All May `E_1` generators of internal degree at most `t`, in raw order.
pub fn e1_generators(p: u64, t: u64) -> Vec<E1Gen> {
    let mut out = Vec::new();
    let mut i = 0;
    while 2 * p.pow(i) - 1 <= t {
        out.push(E1Gen::A(i));
        i += 1;
    }
    for i in 1..=index_bound(p, t) {
        let mut j = 0;
        while t_degree(p, i) * p.pow(j + 1) <= t {
            out.push(E1Gen::B(i, j));
            j += 1;
        }
        let mut j = 0;
        while t_degree(p, i) * p.pow(j) <= t {
            out.push(E1Gen::H(i, j));
            j += 1;
        }
    }
    out.sort();
    out
}

/// All `E_1` monomials with cohomological degree `s`, internal degree `t` and
/// (when given) May degree strictly below `may_bound`, in canonical order.
pub fn enumerate_e1(p: u64, s: usize, t: u64, may_bound: Option<u64>) -> Vec<E1Monomial> {
    let gens = e1_generators(p, t);
    let mut out = Vec::new();
    fn go(
        p: u64,
        gens: &[E1Gen],
        from: usize,
        s_left: usize,
        t_left: u64,
        may_left: Option<u64>,
        acc: &E1Monomial,
        out: &mut Vec<E1Monomial>,
    ) {
        if s_left == 0 {
            if t_left == 0 {
                out.push(acc.clone());
            }
            return;
        }
        for (idx, g) in gens.iter().enumerate().skip(from) {
            let mut e = 1u64;
            loop {
                let need_s = g.s() * e as usize;
                let need_t = g.degree(p) * e;
                if need_s > s_left || need_t > t_left {
                    break;
                }
                let m = g.may(p) * e;
                if let Some(ml) = may_left {
                    if m > ml {
                        break;
                    }
                }
                let Some(next) = acc.times(*g, e) else { break };
                go(p, gens, idx + 1, s_left - need_s, t_left - need_t, may_left.map(|ml| ml - m), &next, out);
                if g.is_exterior() {
                    break;
                }
                e += 1;
            }
        }
    }
    match may_bound {
        Some(0) => {}
        _ => go(p, &gens, 0, s, t, may_bound.map(|b| b - 1), &E1Monomial::one(), &mut out),
    }
    out.sort();
    out
}

/// One line of `e1 enumerate` output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct E1Line {
    pub name: String,
    pub raw: String,
    pub s: usize,
    pub t: u64,
    #[serde(rename = "M")]
    pub may: u64,
}

impl E1Line {
    pub fn new(m: &E1Monomial, p: u64) -> Self {
        Self { name: m.name(), raw: m.raw(), s: m.s(), t: m.degree(p), may: m.may(p) }
    }
}

impl fmt::Display for E1Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}\t{}", self.name, self.raw, self.s, self.t, self.may)
    }
}

/// Rebuilds a word from factors, for tests and callers assembling keys.
pub fn word(head: Monomial, factors: impl IntoIterator<Item = Monomial>) -> TensorKey {
    TensorKey { head, factors: factors.into_iter().collect::<Factors>() }
}


/// Parses a written `E_1` name such as `a_1^2 h_{2,0} h_1` or `g_0 b_{2,1}`
/// into tokens, keeping the written order. `h_j`, `b_j` are short for
/// `h_{1,j}`, `b_{1,j}`; `g_i`, `k_i` are kept as composites.
pub fn parse_e1_tokens(s: &str) -> Result<Vec<E1Token>, String> {
    let mut out = Vec::new();
    for word in s.split_whitespace() {
        let (base, e) = match word.rsplit_once('^') {
            Some((b, e)) if !b.ends_with('_') => (b, e.parse::<u64>().map_err(|_| format!("bad exponent in {word}"))?),
            _ => (word, 1),
        };
        let (letter, sub) = base.split_once('_').ok_or_else(|| format!("missing subscript in {word}"))?;
        let nums: Vec<u32> = sub
            .trim_start_matches('{')
            .trim_end_matches('}')
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| format!("bad subscript in {word}")))
            .collect::<Result<_, _>>()?;
        let tok = match (letter, nums.as_slice()) {
            ("a", [i]) => E1Token::Gen(E1Gen::A(*i), e),
            ("h", [j]) => E1Token::Gen(E1Gen::H(1, *j), e),
            ("h", [i, j]) if *i >= 1 => E1Token::Gen(E1Gen::H(*i, *j), e),
            ("b", [j]) => E1Token::Gen(E1Gen::B(1, *j), e),
            ("b", [i, j]) if *i >= 1 => E1Token::Gen(E1Gen::B(*i, *j), e),
            ("g", [i]) if e == 1 => E1Token::G(*i),
            ("k", [i]) if e == 1 => E1Token::K(*i),
            _ => return Err(format!("unknown generator {word}")),
        };
        out.push(tok);
    }
    Ok(out)
}

/// The monomial of a token list, `None` if a token is raw or an exterior
/// generator repeats.
pub fn tokens_monomial(tokens: &[E1Token]) -> Option<E1Monomial> {
    let mut m = E1Monomial::one();
    for t in tokens {
        m = match *t {
            E1Token::Gen(g, e) => m.times(g, e)?,
            E1Token::G(i) => m.times(E1Gen::H(2, i), 1)?.times(E1Gen::H(1, i), 1)?,
            E1Token::K(i) => m.times(E1Gen::H(2, i), 1)?.times(E1Gen::H(1, i + 1), 1)?,
            E1Token::Raw(_) => return None,
        };
    }
    Some(m)
}
