//! Surface syntax for cobar chains.
//!
//! ```text
//! expr    := word | summand (("+"|"-") summand)*
//! summand := [coef "*"] "[" word "]"
//! word    := element ("|" element)*
//! element := ["+"|"-"] term (("+"|"-") term)*
//! term    := coef | [coef "*"] factor ("*" factor)*
//! factor  := gen ["^" exponent]
//! gen     := ("t"|"v"|"m"|"q"|"a"|"xi"|"tau"|"taut") nat | "b(" nat "," nat ")"
//! exponent:= nat | "p" ["^" nat]
//! coef    := nat ["/" nat]
//! ```
//!
//! The first element of a word is the head when it has no `t`, `ξ`, `τ`,
//! `τ̃` or `b` generator.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::{Family, GeneratorId, Monomial, Presentation, RingContext, Scalar};
use crate::cobar::{Cobar, CobarElement, CobarError};
use crate::may::{E1Gen, E1Token};
use crate::tensor::{Factors, Reduction, Tensor, TensorKey};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {pos}: {msg}")]
pub struct ParseError {
    pub pos: usize,
    pub msg: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{0}")]
    Elaborate(String),
    #[error(transparent)]
    Cobar(#[from] CobarError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exponent {
    Nat(u64),
    /// `p^j`; plain `p` is `PPow(1)`.
    PPow(u32),
}

impl Exponent {
    pub fn value(self, p: u64) -> u64 {
        match self {
            Exponent::Nat(n) => n,
            Exponent::PPow(j) => p.pow(j),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Gen {
    Simple(Family, u32),
    B(u32, u32),
}

impl Gen {
    fn is_slot_generator(self) -> bool {
        match self {
            Gen::B(..) => true,
            Gen::Simple(f, _) => matches!(f, Family::T | Family::Xi | Family::Tau | Family::TauTilde),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factor {
    pub gen: Gen,
    pub exp: Option<Exponent>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Term {
    pub negative: bool,
    pub coef: Option<Scalar>,
    pub factors: Vec<Factor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    pub terms: Vec<Term>,
}

impl Element {
    fn has_slot_generator(&self) -> bool {
        self.terms.iter().any(|t| t.factors.iter().any(|f| f.gen.is_slot_generator()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word {
    pub elements: Vec<Element>,
}

impl Word {
    /// Whether the first element is a head rather than a tensor factor.
    pub fn has_head(&self) -> bool {
        !self.elements[0].has_slot_generator()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summand {
    pub negative: bool,
    pub coef: Option<Scalar>,
    pub word: Word,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Word(Word),
    Sum(Vec<Summand>),
}

impl Expr {
    /// Signed summands; a plain word is a single positive summand.
    pub fn summands(&self) -> Vec<Summand> {
        match self {
            Expr::Word(w) => vec![Summand { negative: false, coef: None, word: w.clone() }],
            Expr::Sum(s) => s.clone(),
        }
    }
}

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: input.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

impl std::str::FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError { pos: self.pos, msg: msg.into() }
    }

    fn ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", c as char)))
        }
    }

    fn starts_with(&mut self, s: &str) -> bool {
        self.ws();
        self.src[self.pos..].starts_with(s.as_bytes())
    }

    fn digits(&mut self) -> Result<&str, ParseError> {
        self.ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).unwrap())
    }

    fn nat(&mut self) -> Result<u64, ParseError> {
        let at = self.pos;
        self.digits()?.parse().map_err(|_| ParseError { pos: at, msg: "number too large".into() })
    }

    fn small(&mut self) -> Result<u32, ParseError> {
        let at = self.pos;
        let n = self.nat()?;
        u32::try_from(n).map_err(|_| ParseError { pos: at, msg: "index too large".into() })
    }

    fn coef(&mut self) -> Result<Scalar, ParseError> {
        let at = self.pos;
        let mut text = self.digits()?.to_string();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            text.push('/');
            text.push_str(self.digits()?);
        }
        text.parse().map_err(|_| ParseError { pos: at, msg: "invalid coefficient".into() })
    }

    fn is_bracketed(&mut self) -> bool {
        let save = self.pos;
        self.eat(b'-');
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) && self.coef().is_ok() && !self.eat(b'*') {
            self.pos = save;
            return false;
        }
        let found = self.peek() == Some(b'[');
        self.pos = save;
        found
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        if !self.is_bracketed() {
            return Ok(Expr::Word(self.word()?));
        }
        let negative = self.eat(b'-');
        let mut out = vec![self.summand(negative)?];
        loop {
            let negative = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                _ => break,
            };
            self.pos += 1;
            out.push(self.summand(negative)?);
        }
        Ok(Expr::Sum(out))
    }

    fn summand(&mut self, negative: bool) -> Result<Summand, ParseError> {
        let coef = if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            let c = self.coef()?;
            self.expect(b'*')?;
            Some(c)
        } else {
            None
        };
        self.expect(b'[')?;
        let word = self.word()?;
        self.expect(b']')?;
        Ok(Summand { negative, coef, word })
    }

    fn word(&mut self) -> Result<Word, ParseError> {
        let mut elements = vec![self.element()?];
        while self.eat(b'|') {
            elements.push(self.element()?);
        }
        Ok(Word { elements })
    }

    fn element(&mut self) -> Result<Element, ParseError> {
        let mut negative = match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let mut terms = Vec::new();
        loop {
            terms.push(self.term(negative)?);
            negative = match self.peek() {
                Some(b'+') => false,
                Some(b'-') => true,
                _ => break,
            };
            self.pos += 1;
        }
        Ok(Element { terms })
    }

    fn term(&mut self, negative: bool) -> Result<Term, ParseError> {
        let mut coef = None;
        let mut factors = Vec::new();
        if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            coef = Some(self.coef()?);
            if !self.eat(b'*') {
                return Ok(Term { negative, coef, factors });
            }
        }
        factors.push(self.factor()?);
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok(Term { negative, coef, factors })
    }

    fn factor(&mut self) -> Result<Factor, ParseError> {
        let at = self.pos;
        let gen = self.gen()?;
        let exp = if self.eat(b'^') {
            if self.eat(b'p') {
                if self.peek() == Some(b'^') && self.lookahead_digit() {
                    self.pos += 1;
                    Some(Exponent::PPow(self.small()?))
                } else {
                    Some(Exponent::PPow(1))
                }
            } else {
                Some(Exponent::Nat(self.nat()?))
            }
        } else {
            None
        };
        if let Gen::Simple(f, _) = gen {
            if f.is_odd() {
                let big = match exp {
                    Some(Exponent::Nat(n)) => n != 1,
                    Some(Exponent::PPow(j)) => j != 0,
                    None => false,
                };
                if big {
                    return Err(ParseError { pos: at, msg: "exterior generator with exponent other than 1".into() });
                }
            }
        }
        Ok(Factor { gen, exp })
    }

    fn lookahead_digit(&self) -> bool {
        let mut i = self.pos + 1;
        while i < self.src.len() && self.src[i].is_ascii_whitespace() {
            i += 1;
        }
        matches!(self.src.get(i), Some(c) if c.is_ascii_digit())
    }

    fn gen(&mut self) -> Result<Gen, ParseError> {
        if self.starts_with("b(") {
            self.pos += 2;
            let i = self.small()?;
            self.expect(b',')?;
            let j = self.small()?;
            self.expect(b')')?;
            if i == 0 {
                return Err(self.err("b(i,j) needs i >= 1"));
            }
            return Ok(Gen::B(i, j));
        }
        for sym in ["taut", "tau", "xi", "t", "v", "m", "q", "a"] {
            if self.starts_with(sym) {
                let at = self.pos;
                self.pos += sym.len();
                if !matches!(self.src.get(self.pos), Some(c) if c.is_ascii_digit()) {
                    self.pos = at;
                    continue;
                }
                let family = Family::from_symbol(sym).unwrap();
                return Ok(Gen::Simple(family, self.small()?));
            }
        }
        Err(self.err("unknown generator"))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Nat(n) => write!(f, "{n}"),
            Exponent::PPow(1) => write!(f, "p"),
            Exponent::PPow(j) => write!(f, "p^{j}"),
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gen {
            Gen::Simple(fam, i) => write!(f, "{}{}", fam.symbol(), i)?,
            Gen::B(i, j) => write!(f, "b({i},{j})")?,
        }
        if let Some(e) = self.exp {
            write!(f, "^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        if let Some(c) = &self.coef {
            write!(f, "{c}")?;
            first = false;
        }
        for x in &self.factors {
            if !first {
                write!(f, "*")?;
            }
            write!(f, "{x}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, t) in self.terms.iter().enumerate() {
            match (n, t.negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, e) in self.elements.iter().enumerate() {
            if n > 0 {
                write!(f, " | ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Word(w) => write!(f, "{w}"),
            Expr::Sum(ss) => {
                for (n, s) in ss.iter().enumerate() {
                    match (n, s.negative) {
                        (0, true) => write!(f, "-")?,
                        (0, false) => {}
                        (_, true) => write!(f, " - ")?,
                        (_, false) => write!(f, " + ")?,
                    }
                    if let Some(c) = &s.coef {
                        write!(f, "{c}*")?;
                    }
                    write!(f, "[{}]", s.word)?;
                }
                Ok(())
            }
        }
    }
}

/// Where an expression is elaborated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `Ω_{BP_*BP}(BP_*)`, modulo `I^k` when given; `q_i` is read as `v_i`.
    Bp(Option<u64>),
    /// `Ω_{P_*}(I^k/I^{k+1})`; the expression must be homogeneous in `q`.
    Graded,
}

fn elab_err(msg: impl Into<String>) -> ExprError {
    ExprError::Elaborate(msg.into())
}

/// A single term split into its parts.
struct TermParts {
    coef: Scalar,
    /// Coefficient-ring part, in `v`'s (with `q_0` folded into `coef`).
    left: Monomial,
    q_degree: u64,
    slot: SlotPart,
}

enum SlotPart {
    None,
    Mono(Monomial),
    B(u32, u32),
}

impl SlotPart {
    fn width(&self) -> usize {
        match self {
            SlotPart::None => 0,
            SlotPart::Mono(_) => 1,
            SlotPart::B(..) => 2,
        }
    }
}

fn term_parts(t: &Term, p: u64, graded: bool) -> Result<TermParts, ExprError> {
    let mut coef = t.coef.clone().unwrap_or_else(Scalar::one);
    if graded {
        coef = coef.reduce_mod_p(p).map_err(|e| elab_err(e.to_string()))?;
    }
    if t.negative {
        coef = -coef;
    }
    let mut left = Monomial::one();
    let mut slot_mono = Monomial::one();
    let mut b = None;
    let mut q_degree = 0;
    for f in &t.factors {
        let e = f.exp.map_or(1, |x| x.value(p));
        match f.gen {
            Gen::B(i, j) => {
                if b.is_some() {
                    return Err(elab_err("a term may hold at most one b(i,j)"));
                }
                if e != 1 {
                    return Err(elab_err("powers of b(i,j) are not supported inside one term"));
                }
                b = Some((i, j));
            }
            Gen::Simple(Family::Q | Family::V, 0) => {
                coef = &coef * &Scalar::from_int(p as i64).pow(e);
                q_degree += e;
            }
            Gen::Simple(Family::Q | Family::V, i) => {
                left = left.mul(&Monomial::generator(GeneratorId::v(i), e)).unwrap().0;
                q_degree += e;
            }
            Gen::Simple(Family::T, i) => {
                slot_mono = slot_mono.mul(&Monomial::generator(GeneratorId::t(i), e)).unwrap().0;
            }
            Gen::Simple(fam, _) => {
                return Err(elab_err(format!("generator family {} is not available in a cobar chain", fam.symbol())))
            }
        }
    }
    let slot = match b {
        Some((i, j)) => {
            if !slot_mono.is_one() {
                return Err(elab_err("b(i,j) cannot share a term with t generators"));
            }
            SlotPart::B(i, j)
        }
        None if slot_mono.is_one() => SlotPart::None,
        None => SlotPart::Mono(slot_mono),
    };
    Ok(TermParts { coef, left, q_degree, slot })
}

/// Tensor of `a` with `b`, concatenating slots.
fn concat(a: &Tensor, b: &Tensor, r: &Reduction) -> Tensor {
    let mut out = Tensor::zero(a.arity() + b.arity());
    for (ka, ca) in a.iter() {
        for (kb, cb) in b.iter() {
            let Some((head, _)) = ka.head.mul(&kb.head) else { continue };
            let mut factors: Factors = ka.factors.clone();
            factors.extend(kb.factors.iter().cloned());
            let key = TensorKey { head, factors };
            if let Some(c) = r.apply(&key, ca * cb) {
                out.add_term(key, c);
            }
        }
    }
    out
}

fn elaborate_word(word: &Word, cobar: &Cobar, graded: bool, k: Option<u64>) -> Result<(Tensor, u64), ExprError> {
    let p = cobar.prime();
    let maps = cobar.maps();
    let r = match k {
        Some(k) => Reduction::mod_ideal(p, k),
        None => Reduction::exact(p),
    };
    let mut acc = Tensor::unit(0);
    let mut elements = word.elements.as_slice();
    let mut q_total = 0;
    let check_q = |terms: &[TermParts]| -> Result<u64, ExprError> {
        let d = terms[0].q_degree;
        if graded && terms.iter().any(|t| t.q_degree != d) {
            return Err(elab_err("terms of one slot differ in q-degree"));
        }
        Ok(d)
    };
    if word.has_head() {
        let parts: Vec<TermParts> =
            elements[0].terms.iter().map(|t| term_parts(t, p, graded)).collect::<Result<_, _>>()?;
        q_total += check_q(&parts)?;
        let mut head = Tensor::zero(0);
        for t in parts {
            let key = TensorKey::new(t.left, []);
            if let Some(c) = r.apply(&key, t.coef) {
                head.add_term(key, c);
            }
        }
        acc = head;
        elements = &elements[1..];
    }
    for el in elements {
        let parts: Vec<TermParts> = el.terms.iter().map(|t| term_parts(t, p, graded)).collect::<Result<_, _>>()?;
        q_total += check_q(&parts)?;
        let width = parts[0].slot.width();
        if parts.iter().any(|t| t.slot.width() != width) {
            return Err(elab_err("terms of one element span different numbers of slots"));
        }
        if width == 0 {
            return Err(elab_err(format!("factor '{el}' has no t generator")));
        }
        let n = acc.arity();
        let mut next = Tensor::zero(n + width);
        for t in parts {
            let carried = maps.carry_left(&t.left, n, k);
            let moved = acc.mul(&carried, &r).scale(&t.coef);
            let x: Arc<Tensor> = match t.slot {
                SlotPart::Mono(m) => Arc::new(Tensor::from_term(TensorKey::new(Monomial::one(), [m]), Scalar::one())),
                SlotPart::B(i, j) => maps.b_element(i, j).map_err(|e| elab_err(e.to_string()))?,
                SlotPart::None => unreachable!(),
            };
            next.add_assign(&concat(&moved, &x, &r));
        }
        acc = next;
    }
    Ok((acc, q_total))
}

fn word_q_degree(word: &Word, p: u64) -> Result<u64, ExprError> {
    let mut q = 0;
    for el in &word.elements {
        q += term_parts(&el.terms[0], p, true)?.q_degree;
    }
    Ok(q)
}

/// Elaborates an expression into a cobar chain.
pub fn elaborate(expr: &Expr, cobar: &Cobar, side: Side) -> Result<CobarElement, ExprError> {
    let p = cobar.prime();
    let summands = expr.summands();
    let graded = side == Side::Graded;
    let mut total: Option<Tensor> = None;
    let mut degree = None;
    for s in &summands {
        let mut coef = s.coef.clone().unwrap_or_else(Scalar::one);
        if s.negative {
            coef = -coef;
        }
        let (t, q) = if graded {
            let q = word_q_degree(&s.word, p)?;
            let (t, _) = elaborate_word(&s.word, cobar, true, Some(q + 1))?;
            let x = CobarElement::new(cobar.bp_context(), t)?;
            (cobar.shadow(&x, q)?.into_tensor(), q)
        } else {
            let Side::Bp(k) = side else { unreachable!() };
            elaborate_word(&s.word, cobar, false, k)?
        };
        if graded {
            if degree.is_some_and(|d| d != q) {
                return Err(elab_err("summands differ in q-degree"));
            }
            degree = Some(q);
            coef = coef.reduce_mod_p(p).map_err(|e| elab_err(e.to_string()))?;
        }
        let t = t.scale(&coef);
        match &mut total {
            None => total = Some(t),
            Some(acc) => {
                if acc.arity() != t.arity() {
                    return Err(CobarError::MixedDegree.into());
                }
                acc.add_assign(&t);
            }
        }
    }
    let total = total.expect("at least one summand");
    let ctx = if graded { cobar.graded_context() } else { cobar.bp_context() };
    let total = if graded { total.reduce(&Reduction::mod_prime(p)) } else { total };
    Ok(CobarElement::new(ctx, total)?)
}

/// Parses and elaborates in one step.
pub fn parse_chain(input: &str, cobar: &Cobar, side: Side) -> Result<CobarElement, ExprError> {
    elaborate(&parse(input)?, cobar, side)
}

/// `E_1` tokens of a word as written: `q_i`/`v_i ↦ a_i`, `t_i^{p^j} ↦ h_{i,j}`,
/// `b(i,j) ↦ b_{i,j}`, one group per element.
pub fn word_e1_tokens(word: &Word, p: u64) -> Vec<E1Token> {
    let mut out = Vec::new();
    for el in &word.elements {
        if el.terms.len() != 1 {
            out.push(E1Token::Raw(format!("({el})")));
            continue;
        }
        for f in &el.terms[0].factors {
            let e = f.exp.map_or(1, |x| x.value(p));
            match f.gen {
                Gen::Simple(Family::Q | Family::V, i) => out.push(E1Token::Gen(E1Gen::A(i), e)),
                Gen::Simple(Family::T, i) => match crate::may::log_p(e, p) {
                    Some(j) => out.push(E1Token::Gen(E1Gen::H(i, j), 1)),
                    None => out.push(E1Token::Raw(f.to_string())),
                },
                Gen::B(i, j) => out.push(E1Token::Gen(E1Gen::B(i, j), e)),
                _ => out.push(E1Token::Raw(f.to_string())),
            }
        }
    }
    out
}

/// Context for BP-side elaboration.
pub fn bp_context(p: u64) -> RingContext {
    RingContext::new(p, Presentation::BpBp)
}
