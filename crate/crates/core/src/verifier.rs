//! Leading-term verification of secondary differentials.
//!
//! A claim `d_2(x) = y` with `x` in filtration `k` is checked by lifting `x`
//! to the BP cobar complex, differentiating modulo `I^{k+2}`, and comparing
//! the May-leading part of the filtration-`k+1` component with `y` up to a
//! nonzero scalar. Every lower-May word that could be added to `x` to make
//! it a cocycle is enumerated, and its contribution to filtration `k+1` must
//! stay strictly below `M(y)`. When some candidates exceed that, the claim
//! still holds if the filtration-`k` part `R` of `d(x)` is already spanned
//! by the `d` of the remaining candidates, since a cocycle can then be built
//! from those alone.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use rustc_hash::FxHashMap;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Family, Scalar};
use crate::cobar::{filtration, Cobar, CobarElement};
use crate::coeff::{inv_mod, mul_mod, symmetric_residue};
use crate::expr::{self, word_e1_tokens, Expr, ExprError, Side};
use crate::algebra::Monomial;
use crate::may::{self, e1_name, enumerate_e1, max_may, word_may_degree, E1Gen, E1Monomial, E1Token, MayError, WordQuery, WordSet};
use crate::tensor::{Tensor, TensorKey};

pub const DEFAULT_CAP: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("malformed claim: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// The leading part of `d(x)` is one scalar multiple of the whole target.
    #[default]
    Strict,
    /// Each target summand occurs with its own nonzero scalar.
    Relaxed,
}

/// A claimed secondary differential, fully instantiated.
#[derive(Debug, Clone)]
pub struct Claim {
    pub source: Expr,
    pub target: Expr,
    pub prime: u64,
    pub indices: BTreeMap<String, i64>,
    pub expected_scalar: Option<i64>,
    pub mode: Mode,
}

impl Claim {
    pub fn new(source: &str, target: &str, prime: u64) -> Result<Self, VerifyError> {
        Ok(Self {
            source: expr::parse(source).map_err(ExprError::from)?,
            target: expr::parse(target).map_err(ExprError::from)?,
            prime,
            indices: BTreeMap::new(),
            expected_scalar: None,
            mode: Mode::Strict,
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    pub cap: usize,
    pub r_coverage: bool,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { cap: DEFAULT_CAP, r_coverage: false }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimInfo {
    pub source: String,
    pub target: String,
    pub p: u64,
    pub indices: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Corrections {
    pub count: usize,
    /// Largest May degree of a filtration-`k+1` term of `d(y)`, over the
    /// candidates `y`. Exact for candidates differentiated in full, an upper
    /// bound for the others.
    #[serde(rename = "mayMax")]
    pub may_max: Option<u64>,
    /// Candidates differentiated in full.
    pub exact: usize,
    /// Candidates whose contribution reaches `M(target)`.
    #[serde(rename = "aboveTarget")]
    pub above_target: usize,
    /// Whether `R` lies in the span of `d` of the candidates below the
    /// target; computed only when some candidate is above it.
    #[serde(rename = "safeSpan", skip_serializing_if = "Option::is_none")]
    pub safe_span: Option<bool>,
}

/// A word of a stored term list: canonical text, residue mod `p` in
/// symmetric form, and May degree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StoredTerm {
    pub word: String,
    pub coef: i64,
    pub may: u64,
}

/// Term lists kept in a report so its verdict can be re-derived.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Default)]
pub struct Evidence {
    /// Filtration-`k` part of `d(x)`, the obstruction `R`.
    pub residue: Vec<StoredTerm>,
    /// Filtration-`k+1` part of `d(x)`.
    pub next: Vec<StoredTerm>,
    /// The target, one list per summand, signs included.
    pub target: Vec<Vec<StoredTerm>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub claim: ClaimInfo,
    /// The scalar `c` with `lead(d x) = c · lead(target)`; per-summand
    /// scalars in relaxed mode.
    pub scalar: Option<i64>,
    #[serde(rename = "summandScalars", skip_serializing_if = "Vec::is_empty")]
    pub summand_scalars: Vec<Option<i64>>,
    #[serde(rename = "relativeSign", skip_serializing_if = "Option::is_none")]
    pub relative_sign: Option<i64>,
    pub mode: Mode,
    #[serde(rename = "mayTarget")]
    pub may_target: u64,
    #[serde(rename = "maySource")]
    pub may_source: u64,
    #[serde(rename = "mayCompetitorMax")]
    pub may_competitor_max: Option<u64>,
    pub corrections: Corrections,
    #[serde(rename = "rCoverage", skip_serializing_if = "Option::is_none")]
    pub r_coverage: Option<bool>,
    #[serde(rename = "expectedScalar", skip_serializing_if = "Option::is_none")]
    pub expected_scalar: Option<i64>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub adams: Option<String>,
    #[serde(skip)]
    pub evidence: Evidence,
}

fn residue(c: &Scalar, p: u64) -> u64 {
    c.residue(p).expect("p-integral")
}

fn sym(r: u64, p: u64) -> i64 {
    symmetric_residue(r % p, p)
}

fn store(t: &Tensor, p: u64) -> Vec<StoredTerm> {
    t.sorted_terms()
        .into_iter()
        .map(|(k, c)| StoredTerm { word: k.to_string(), coef: sym(residue(c, p), p), may: word_may_degree(k, c, p) })
        .collect()
}

fn q_degree(k: &TensorKey) -> u64 {
    k.head.family_weight(Family::Q)
}

fn single<T: PartialEq + Copy + fmt::Debug>(mut it: impl Iterator<Item = T>, what: &str) -> Result<T, VerifyError> {
    let first = it.next().ok_or_else(|| VerifyError::Malformed(format!("{what}: empty chain")))?;
    if it.any(|x| x != first) {
        return Err(VerifyError::Malformed(format!("{what} is not homogeneous")));
    }
    Ok(first)
}

/// Scalar `c` with `lhs = c · rhs` on the keys of both, if any.
fn proportionality(lhs: &FxHashMap<String, i64>, rhs: &FxHashMap<String, i64>, p: u64) -> Option<i64> {
    let (key, r0) = rhs.iter().min_by(|a, b| a.0.cmp(b.0))?;
    let l0 = *lhs.get(key)?;
    let c = mul_mod(l0.rem_euclid(p as i64) as u64, inv_mod(r0.rem_euclid(p as i64) as u64, p), p);
    if c == 0 {
        return None;
    }
    for k in lhs.keys().chain(rhs.keys()) {
        let l = lhs.get(k).copied().unwrap_or(0).rem_euclid(p as i64) as u64;
        let r = rhs.get(k).copied().unwrap_or(0).rem_euclid(p as i64) as u64;
        if l != mul_mod(c, r, p) {
            return None;
        }
    }
    Some(sym(c, p))
}

fn as_map(terms: &[StoredTerm], pred: impl Fn(&StoredTerm) -> bool) -> FxHashMap<String, i64> {
    terms.iter().filter(|t| pred(t)).map(|t| (t.word.clone(), t.coef)).collect()
}

/// The three conditions, evaluated on stored term lists only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub may_target: u64,
    pub scalar: Option<i64>,
    pub summand_scalars: Vec<Option<i64>>,
    pub may_competitor_max: Option<u64>,
}

pub fn assess(ev: &Evidence, mode: Mode, p: u64) -> Assessment {
    let may_target = ev.target.iter().flatten().map(|t| t.may).max().unwrap_or(0);
    let d_lead = as_map(&ev.next, |t| t.may == may_target);
    let mut residual: FxHashMap<String, i64> = ev.next.iter().map(|t| (t.word.clone(), t.coef)).collect();
    let mut subtract = |m: &FxHashMap<String, i64>, c: i64| {
        for (k, v) in m {
            let e = residual.entry(k.clone()).or_insert(0);
            *e = (*e - c * v).rem_euclid(p as i64);
        }
    };
    let (scalar, summand_scalars) = match mode {
        Mode::Strict => {
            let mut total: FxHashMap<String, i64> = FxHashMap::default();
            for s in &ev.target {
                for t in s.iter().filter(|t| t.may == may_target) {
                    let e = total.entry(t.word.clone()).or_insert(0);
                    *e = (*e + t.coef).rem_euclid(p as i64);
                }
            }
            total.retain(|_, v| *v != 0);
            let c = proportionality(&d_lead, &total, p);
            if let Some(c) = c {
                subtract(&total, c);
            }
            (c, vec![])
        }
        Mode::Relaxed => {
            let mut cs = Vec::new();
            for s in &ev.target {
                let lead = as_map(s, |t| t.may == may_target);
                let restricted: FxHashMap<String, i64> =
                    d_lead.iter().filter(|(k, _)| lead.contains_key(*k)).map(|(k, v)| (k.clone(), *v)).collect();
                let c = proportionality(&restricted, &lead, p);
                if let Some(c) = c {
                    subtract(&lead, c);
                }
                cs.push(c);
            }
            (cs.first().copied().flatten(), cs)
        }
    };
    let words: FxHashMap<&str, u64> = ev.next.iter().map(|t| (t.word.as_str(), t.may)).collect();
    let target_may: FxHashMap<&str, u64> = ev.target.iter().flatten().map(|t| (t.word.as_str(), t.may)).collect();
    let may_competitor_max = residual
        .iter()
        .filter(|(_, v)| v.rem_euclid(p as i64) != 0)
        .map(|(k, _)| words.get(k.as_str()).or_else(|| target_may.get(k.as_str())).copied().unwrap_or(0))
        .max();
    Assessment { may_target, scalar, summand_scalars, may_competitor_max }
}

fn decide(
    a: &Assessment,
    corrections: &Corrections,
    inconclusive: Option<String>,
    expected: Option<i64>,
    mode: Mode,
) -> (Verdict, Option<String>) {
    if let Some(r) = inconclusive {
        return (Verdict::Inconclusive, Some(r));
    }
    let present = match mode {
        Mode::Strict => a.scalar.is_some(),
        Mode::Relaxed => !a.summand_scalars.is_empty() && a.summand_scalars.iter().all(Option::is_some),
    };
    if !present {
        return (Verdict::Fail, Some("claimed term is not the leading part of d(source)".into()));
    }
    if let Some(m) = a.may_competitor_max {
        if m >= a.may_target {
            return (Verdict::Fail, Some(format!("another term of d(source) has May degree {m}")));
        }
    }
    if let Some(m) = corrections.may_max {
        if m >= a.may_target && corrections.safe_span != Some(true) {
            return (
                Verdict::Fail,
                Some(format!("a correction candidate contributes May degree {m} and cannot be avoided")),
            );
        }
    }
    if mode == Mode::Strict {
        if let (Some(e), Some(c)) = (expected, a.scalar) {
            if e != c {
                return (Verdict::Fail, Some(format!("scalar {c} differs from the stated {e}")));
            }
        }
    }
    (Verdict::Pass, None)
}

/// Re-derives the verdict of a report from its stored data alone.
pub fn recheck(r: &Report) -> Verdict {
    let a = assess(&r.evidence, r.mode, r.claim.p);
    if r.verdict == Verdict::Inconclusive {
        return Verdict::Inconclusive;
    }
    decide(&a, &r.corrections, None, r.expected_scalar, r.mode).0
}

/// Sparse row reduction over `F_p`, used for the optional `R`-coverage check.
struct Span {
    p: u64,
    rows: Vec<(usize, Vec<(usize, u64)>)>,
    pivots: FxHashMap<usize, usize>,
}

impl Span {
    fn new(p: u64) -> Self {
        Self { p, rows: Vec::new(), pivots: FxHashMap::default() }
    }

    fn reduce(&self, mut v: BTreeMap<usize, u64>) -> BTreeMap<usize, u64> {
        loop {
            let Some((&col, &val)) = v.iter().find(|(c, _)| self.pivots.contains_key(c)) else { return v };
            let (_, row) = &self.rows[self.pivots[&col]];
            for &(c, x) in row {
                let e = v.entry(c).or_insert(0);
                *e = (*e + self.p - mul_mod(val, x, self.p)) % self.p;
                if *e == 0 {
                    v.remove(&c);
                }
            }
            let _ = col;
        }
    }

    fn insert(&mut self, v: BTreeMap<usize, u64>) {
        let v = self.reduce(v);
        let Some((&col, &val)) = v.iter().next() else { return };
        let inv = inv_mod(val, self.p);
        let row: Vec<(usize, u64)> = v.into_iter().map(|(c, x)| (c, mul_mod(x, inv, self.p))).collect();
        self.pivots.insert(col, self.rows.len());
        self.rows.push((col, row));
    }
}

/// The verifier; shares structure-map caches across claims.
#[derive(Clone)]
pub struct Verifier {
    cobar: Cobar,
}

struct Prepared {
    source: CobarElement,
    target_summands: Vec<CobarElement>,
    k: u64,
    s: usize,
    t: u64,
}

impl Verifier {
    pub fn new(p: u64) -> Self {
        Self { cobar: Cobar::new(p) }
    }

    pub fn with_cobar(cobar: Cobar) -> Self {
        Self { cobar }
    }

    pub fn cobar(&self) -> &Cobar {
        &self.cobar
    }

    pub fn prime(&self) -> u64 {
        self.cobar.prime()
    }

    fn prepare(&self, claim: &Claim) -> Result<Prepared, VerifyError> {
        if claim.prime != self.prime() {
            return Err(VerifyError::Malformed(format!("claim is for p = {}, verifier for p = {}", claim.prime, self.prime())));
        }
        let p = self.prime();
        let source = expr::elaborate(&claim.source, &self.cobar, Side::Graded)?;
        if source.is_zero() {
            return Err(VerifyError::Malformed("source is zero".into()));
        }
        let k = single(source.tensor().iter().map(|(key, _)| q_degree(key)), "source filtration")?;
        let t = single(source.tensor().iter().map(|(key, _)| key.internal_degree(p)), "source internal degree")?;
        let s = source.s();
        let mut target_summands = Vec::new();
        for sm in claim.target.summands() {
            let e = expr::elaborate(&Expr::Sum(vec![sm]), &self.cobar, Side::Graded)?;
            if e.is_zero() {
                return Err(VerifyError::Malformed("a target summand is zero".into()));
            }
            if e.s() != s + 1 {
                return Err(VerifyError::Malformed(format!("target has s = {}, expected {}", e.s(), s + 1)));
            }
            for (key, _) in e.tensor().iter() {
                if key.internal_degree(p) != t {
                    return Err(VerifyError::Malformed("source and target internal degrees differ".into()));
                }
                if q_degree(key) != k + 1 {
                    return Err(VerifyError::Malformed("target filtration is not source filtration + 1".into()));
                }
            }
            target_summands.push(e);
        }
        Ok(Prepared { source, target_summands, k, s, t })
    }

    /// `(filtration k, filtration k+1)` components of `d` of a graded chain,
    /// computed on its lift.
    pub fn split_d(&self, x: &CobarElement, k: u64) -> (CobarElement, CobarElement) {
        let lifted = self.cobar.lift(x).expect("graded chain");
        let d = self.cobar.d_bp(&lifted, k + 2).expect("BP chain");
        (self.cobar.shadow(&d, k).unwrap(), self.cobar.shadow(&d, k + 1).unwrap())
    }

    /// Largest May degree among the filtration-1 terms of `Δ(t_j^{p^r})`
    /// after moving their coefficient into the head through `i − 1` slots.
    fn atom_bound(&self, j: u32, r: u32, i: usize) -> Option<u64> {
        let p = self.prime();
        let maps = self.cobar.maps();
        let delta = maps.delta_t_ppow(j, r, Some(2));
        let mut best = None;
        for (dk, c2) in delta.iter() {
            if filtration(dk, c2, p) != 1 {
                continue;
            }
            let carry = maps.carry_left(&dk.head, i - 1, Some(2));
            for (ck, c3) in carry.iter() {
                let c = c2 * c3;
                let key = TensorKey::new(ck.head.clone(), ck.factors.iter().chain(dk.factors.iter()).cloned());
                if filtration(&key, &c, p) == 1 {
                    best = best.max(Some(word_may_degree(&key, &c, p)));
                }
            }
        }
        best
    }

    /// Upper bound for the May degree of the filtration-1 terms that the
    /// factor `a` in slot `i` (from 1) contributes to `d` of a filtration-0
    /// word, counting the other factors as weight 0.
    ///
    /// `Δ(a)` is the product of `Δ(t_j^{p^r})` over the base-`p` digits of
    /// the exponents of `a`. A filtration-1 term takes its filtration either
    /// from one of these or from a coefficient `p` in the product, and May
    /// weight is subadditive under multiplication.
    fn slot_bound(&self, a: &Monomial, i: usize, atoms: &FxHashMap<(u32, u32, usize), Option<u64>>) -> u64 {
        let p = self.prime();
        let m = may::monomial_may_weight(a, p);
        let mut extra = 1;
        for (g, mut e) in a.iter() {
            let mut r = 0;
            while e > 0 {
                if e % p != 0 {
                    if let Some(b) = atoms[&(g.index, r, i)] {
                        extra = extra.max(b.saturating_sub(2 * g.index as u64 - 1));
                    }
                }
                e /= p;
                r += 1;
            }
        }
        m + extra
    }

    /// Differentiates the candidates, in full where the cheap bound does not
    /// settle them, and decides whether `R` can be reached without the
    /// candidates that reach `m_t`.
    fn census(&self, ws: &WordSet, k: u64, m_t: u64, residue: &Tensor, r_coverage: bool) -> (Corrections, Option<bool>) {
        let p = self.prime();
        let n = ws.len();
        let ctx = self.cobar.graded_context();
        let element = |w: usize| CobarElement::new(ctx, Tensor::from_term(ws.key(w), Scalar::one())).expect("candidate word");
        let bounds: Vec<Option<u64>> = if k == 0 {
            let mut keys: Vec<(u32, u32, usize)> = Vec::new();
            for (m, _, _) in &ws.factors {
                for (g, mut e) in m.iter() {
                    let mut r = 0;
                    while e > 0 {
                        keys.extend((1..=ws.s).map(|i| (g.index, r, i)));
                        e /= p;
                        r += 1;
                    }
                }
            }
            keys.sort_unstable();
            keys.dedup();
            let atoms: FxHashMap<(u32, u32, usize), Option<u64>> =
                keys.par_iter().map(|&(j, r, i)| ((j, r, i), self.atom_bound(j, r, i))).collect();
            let table: Vec<Vec<u64>> = ws
                .factors
                .par_iter()
                .map(|(m, _, _)| (1..=ws.s).map(|i| self.slot_bound(m, i, &atoms)).collect())
                .collect();
            (0..n)
                .into_par_iter()
                .map(|w| {
                    let (_, fs) = ws.word(w);
                    let total: u64 = fs.iter().map(|&f| ws.factors[f as usize].2).sum();
                    fs.iter().enumerate().map(|(i, &f)| total - ws.factors[f as usize].2 + table[f as usize][i]).max()
                })
                .collect()
        } else {
            vec![None; n]
        };
        let values: Vec<(Option<u64>, bool)> = (0..n)
            .into_par_iter()
            .map(|w| match bounds[w] {
                Some(b) if b < m_t => (Some(b), false),
                _ => {
                    let (_, e1) = self.split_d(&element(w), k);
                    (max_may(e1.tensor(), p), true)
                }
            })
            .collect();
        let above: Vec<bool> = values.iter().map(|(m, _)| m.is_some_and(|m| m >= m_t)).collect();
        let above_target = above.iter().filter(|x| **x).count();
        let d0_span = |keep: &dyn Fn(usize) -> bool| -> bool {
            let mut span = Span::new(p);
            let mut index: FxHashMap<TensorKey, usize> = FxHashMap::default();
            let chosen: Vec<usize> = (0..n).filter(|w| keep(*w)).collect();
            for chunk in chosen.chunks(4096) {
                let rows: Vec<Tensor> = chunk.par_iter().map(|&w| self.residue_d(&element(w), k).into_tensor()).collect();
                for r in &rows {
                    span.insert(sparse(r, &mut index, p));
                }
            }
            span.reduce(sparse(residue, &mut index, p)).is_empty()
        };
        let safe_span = (above_target > 0).then(|| d0_span(&|w| !above[w]));
        let coverage = r_coverage.then(|| d0_span(&|_| true));
        let corrections = Corrections {
            count: n,
            may_max: values.iter().filter_map(|v| v.0).max(),
            exact: values.iter().filter(|v| v.1).count(),
            above_target,
            safe_span,
        };
        (corrections, coverage)
    }

    /// Filtration-`k` component of `d` of a graded chain.
    pub fn residue_d(&self, x: &CobarElement, k: u64) -> CobarElement {
        let lifted = self.cobar.lift(x).expect("graded chain");
        let d = self.cobar.d_bp(&lifted, k + 1).expect("BP chain");
        self.cobar.shadow(&d, k).unwrap()
    }

    pub fn verify(&self, claim: &Claim, opts: &VerifyOptions) -> Result<Report, VerifyError> {
        let p = self.prime();
        let prep = self.prepare(claim)?;
        let (d0, d1) = self.split_d(&prep.source, prep.k);
        let evidence = Evidence {
            residue: store(d0.tensor(), p),
            next: store(d1.tensor(), p),
            target: prep.target_summands.iter().map(|e| store(e.tensor(), p)).collect(),
        };
        let assessment = assess(&evidence, claim.mode, p);
        let may_source = may::may_degree(&prep.source).unwrap();

        let query = WordQuery { s: prep.s, t: prep.t, may_bound: may_source, max_index: None, head_degree: prep.k };
        let (corrections, inconclusive, r_coverage) = match may::enumerate_word_set(p, &query, opts.cap) {
            Err(MayError::CapExceeded(c)) => {
                (Corrections::default(), Some(format!("more than {c} correction candidates")), None)
            }
            Err(MayError::Zero) => unreachable!(),
            Ok(ws) => {
                let (c, cov) = self.census(&ws, prep.k, assessment.may_target, d0.tensor(), opts.r_coverage);
                (c, None, cov)
            }
        };
        let (verdict, reason) = decide(&assessment, &corrections, inconclusive, claim.expected_scalar, claim.mode);
        let relative_sign = match (claim.mode, assessment.summand_scalars.as_slice()) {
            (Mode::Relaxed, [Some(a), Some(b), ..]) => {
                let a = (*a).rem_euclid(p as i64) as u64;
                let b = (*b).rem_euclid(p as i64) as u64;
                Some(sym(mul_mod(b, inv_mod(a, p), p), p))
            }
            _ => None,
        };
        let mut report = Report {
            claim: ClaimInfo {
                source: claim.source.to_string(),
                target: claim.target.to_string(),
                p,
                indices: claim.indices.clone(),
            },
            scalar: assessment.scalar,
            summand_scalars: assessment.summand_scalars.clone(),
            relative_sign,
            mode: claim.mode,
            may_target: assessment.may_target,
            may_source,
            may_competitor_max: assessment.may_competitor_max,
            corrections,
            r_coverage,
            expected_scalar: claim.expected_scalar,
            verdict,
            reason,
            adams: None,
            evidence,
        };
        if report.verdict == Verdict::Pass {
            report.adams = Some(adams_rename(claim, &report));
        }
        Ok(report)
    }
}

fn sparse(t: &Tensor, index: &mut FxHashMap<TensorKey, usize>, p: u64) -> BTreeMap<usize, u64> {
    t.iter()
        .map(|(k, c)| {
            let n = index.len();
            (*index.entry(k.clone()).or_insert(n), residue(c, p))
        })
        .filter(|(_, c)| *c != 0)
        .collect()
}

/// `E_1` name of a word, with the `a`'s gathered in front.
fn summand_name(word: &expr::Word, p: u64) -> String {
    let (a, rest): (Vec<E1Token>, Vec<E1Token>) =
        word_e1_tokens(word, p).into_iter().partition(|t| matches!(t, E1Token::Gen(E1Gen::A(_), _)));
    e1_name(&[a, rest].concat())
}

/// Renders a passing report as an Adams differential, e.g.
/// `d2(h_{4,1} h_{3,1} g_1) = a_0 b_{4,0} h_{3,1} g_1`.
pub fn adams_rename(claim: &Claim, report: &Report) -> String {
    let p = claim.prime;
    let src: Vec<String> = claim.source.summands().iter().map(|s| summand_name(&s.word, p)).collect();
    let summands = claim.target.summands();
    let mut out = String::new();
    for (n, s) in summands.iter().enumerate() {
        let c = match report.mode {
            Mode::Strict => report.scalar.unwrap_or(1),
            Mode::Relaxed => report.summand_scalars.get(n).copied().flatten().unwrap_or(1),
        };
        let c = if s.negative { -c } else { c };
        let mag = c.abs();
        match (n, c < 0) {
            (0, true) => out.push_str("- "),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if mag != 1 {
            out.push_str(&format!("{mag} "));
        }
        out.push_str(&summand_name(&s.word, p));
    }
    format!("d2({}) = {}", src.join(" + "), out)
}

/// Outcome of the degree-inspection argument.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NontrivialityReport {
    pub target: String,
    pub p: u64,
    pub s: usize,
    pub t: u64,
    #[serde(rename = "mayTarget")]
    pub may_target: u64,
    pub stratum: Vec<may::E1Line>,
    pub competitors: Vec<may::E1Line>,
    pub verdict: Verdict,
}

/// Reads a cobar word as an `E_1` monomial (`q ↦ a`, `t_i^{p^j} ↦ h_{i,j}`,
/// `b(i,j) ↦ b_{i,j}`).
pub fn e1_monomial_of(expr: &Expr, p: u64) -> Result<E1Monomial, VerifyError> {
    let summands = expr.summands();
    if summands.len() != 1 {
        return Err(VerifyError::Malformed("an E1 monomial must be a single word".into()));
    }
    let mut m = E1Monomial::one();
    for tok in word_e1_tokens(&summands[0].word, p) {
        match tok {
            E1Token::Gen(g, e) => {
                m = m.times(g, e).ok_or_else(|| VerifyError::Malformed("repeated exterior generator".into()))?;
            }
            other => return Err(VerifyError::Malformed(format!("not an E1 generator: {other:?}"))),
        }
    }
    Ok(m)
}

/// Enumerates the `E_1` monomials of cohomological degree `s − 1` in the
/// target's internal degree and passes iff all have May degree at most
/// `M(target)`, so none can hit the target by a May differential.
pub fn nontriviality_by_degree(target: &E1Monomial, s: usize, p: u64) -> NontrivialityReport {
    let t = target.degree(p);
    let m = target.may(p);
    let stratum = if s == 0 { vec![] } else { enumerate_e1(p, s - 1, t, None) };
    let lines: Vec<may::E1Line> = stratum.iter().map(|x| may::E1Line::new(x, p)).collect();
    let competitors: Vec<may::E1Line> = lines.iter().filter(|l| l.may > m).cloned().collect();
    let verdict = if competitors.is_empty() { Verdict::Pass } else { Verdict::Fail };
    NontrivialityReport { target: target.name(), p, s, t, may_target: m, stratum: lines, competitors, verdict }
}

/// Convenience for `E_1` generator lists.
pub fn e1(gens: &[(E1Gen, u64)]) -> E1Monomial {
    E1Monomial::from_gens(gens.iter().copied()).expect("valid monomial")
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u64 = 5;

    #[test]
    fn first_line() {
        let v = Verifier::new(P);
        let claim = Claim::new("t1^p", "q0*b(1,0)", P).unwrap();
        let r = v.verify(&claim, &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert_eq!(r.scalar, Some(1));
        assert_eq!(r.corrections.count, 0);
        assert_eq!(r.adams.as_deref(), Some("d2(h_1) = a_0 b_0"));
        assert_eq!(recheck(&r), Verdict::Pass);
    }

    #[test]
    fn wrong_target_fails() {
        let v = Verifier::new(P);
        let claim = Claim::new("t1^p", "[q0*b(1,0)] + [q0*t1^4 | t1]", P).unwrap();
        let r = v.verify(&claim, &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(recheck(&r), Verdict::Fail);
    }

    #[test]
    fn malformed_claims() {
        let v = Verifier::new(P);
        let claim = Claim::new("t1^p", "q0*b(1,1)", P).unwrap();
        assert!(matches!(v.verify(&claim, &VerifyOptions::default()), Err(VerifyError::Malformed(_))));
        let claim = Claim::new("t1^p", "q0^2*b(1,0)", P).unwrap();
        assert!(matches!(v.verify(&claim, &VerifyOptions::default()), Err(VerifyError::Malformed(_))));
    }

    #[test]
    fn cap_gives_inconclusive() {
        let v = Verifier::new(P);
        let claim = Claim::new("t2 | t1", "q1*b(1,0) | t1", P).unwrap();
        let r = v.verify(&claim, &VerifyOptions { cap: 1, r_coverage: false }).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
    }
}
