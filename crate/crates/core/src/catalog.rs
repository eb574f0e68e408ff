//! Embedded catalogs of claimed secondary differentials and `E_1` basis
//! tables, with index templates.
//!
//! Templates contain integer formulas in angle brackets, `t1^p^<i+1>` or
//! `b(2,<i-1>)`. Constraints are comparison chains over the same formulas,
//! `k - 4 >= j - 2 >= i >= 1` or `j != i + 2`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::may::{e1_name, parse_e1_tokens, tokens_monomial, E1Monomial};
use crate::verifier::{Claim, Mode, Report, Verifier, VerifyError, VerifyOptions};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown catalog {0}")]
    UnknownCatalog(String),
    #[error("unknown row {0}")]
    UnknownRow(String),
    #[error("bad formula `{0}`: {1}")]
    Formula(String, String),
    #[error("index {0} is not set")]
    MissingIndex(String),
    #[error("indices out of range: {0} fails")]
    OutOfRange(String),
    #[error(transparent)]
    Verify(#[from] VerifyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum CatalogId {
    P42,
    P43,
    P46,
    P51,
    P53,
}

impl CatalogId {
    pub const ALL: [CatalogId; 5] = [CatalogId::P42, CatalogId::P43, CatalogId::P46, CatalogId::P51, CatalogId::P53];

    fn source(self) -> &'static str {
        match self {
            CatalogId::P42 => include_str!("../data/p42.toml"),
            CatalogId::P43 => include_str!("../data/p43.toml"),
            CatalogId::P46 => include_str!("../data/p46.toml"),
            CatalogId::P51 => include_str!("../data/p51.toml"),
            CatalogId::P53 => include_str!("../data/p53.toml"),
        }
    }
}

impl fmt::Display for CatalogId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CatalogId::P42 => "P42",
            CatalogId::P43 => "P43",
            CatalogId::P46 => "P46",
            CatalogId::P51 => "P51",
            CatalogId::P53 => "P53",
        })
    }
}

impl FromStr for CatalogId {
    type Err = CatalogError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CatalogId::ALL
            .into_iter()
            .find(|c| c.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| CatalogError::UnknownCatalog(s.into()))
    }
}

pub type Indices = BTreeMap<String, i64>;

#[derive(Debug, Clone, Deserialize)]
pub struct Row {
    pub label: String,
    pub statement: String,
    pub source: String,
    pub target: String,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub defaults: Indices,
    pub expected_scalar: Option<i64>,
    #[serde(default)]
    pub mode: Option<String>,
    pub adams: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Catalog {
    pub id: String,
    pub title: String,
    #[serde(rename = "row")]
    pub rows: Vec<Row>,
}

pub fn load(id: CatalogId) -> Catalog {
    toml::from_str(id.source()).expect("embedded catalog")
}

// ---- integer formulas ----

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tok {
    Num(i64),
    Var(usize, usize),
    Op(u8),
    Cmp(&'static str),
}

fn lex(src: &str) -> Result<Vec<Tok>, String> {
    let b = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() {
            let st = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            out.push(Tok::Num(src[st..i].parse().map_err(|_| "number too large")?));
        } else if c.is_ascii_alphabetic() {
            let st = i;
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push(Tok::Var(st, i));
        } else if b"+-*^()".contains(&c) {
            out.push(Tok::Op(c));
            i += 1;
        } else {
            let two = src.get(i..i + 2).unwrap_or("");
            let cmp = match two {
                ">=" => ">=",
                "<=" => "<=",
                "==" => "==",
                "!=" => "!=",
                _ => match c {
                    b'>' => ">",
                    b'<' => "<",
                    _ => return Err(format!("unexpected `{}`", c as char)),
                },
            };
            i += cmp.len();
            out.push(Tok::Cmp(cmp));
        }
    }
    Ok(out)
}

struct Eval<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
    env: &'a Indices,
}

impl Eval<'_> {
    fn peek(&self) -> Option<Tok> {
        self.toks.get(self.pos).copied()
    }

    fn sum(&mut self) -> Result<i64, String> {
        let mut acc = self.product()?;
        while let Some(Tok::Op(op @ (b'+' | b'-'))) = self.peek() {
            self.pos += 1;
            let r = self.product()?;
            acc = if op == b'+' { acc.checked_add(r) } else { acc.checked_sub(r) }.ok_or("overflow")?;
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<i64, String> {
        let mut acc = self.power()?;
        while let Some(Tok::Op(b'*')) = self.peek() {
            self.pos += 1;
            acc = acc.checked_mul(self.power()?).ok_or("overflow")?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<i64, String> {
        let base = self.unary()?;
        if let Some(Tok::Op(b'^')) = self.peek() {
            self.pos += 1;
            let e = self.power()?;
            let e = u32::try_from(e).map_err(|_| "negative exponent")?;
            return base.checked_pow(e).ok_or_else(|| "overflow".into());
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<i64, String> {
        match self.peek() {
            Some(Tok::Op(b'-')) => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(Tok::Op(b'(')) => {
                self.pos += 1;
                let v = self.sum()?;
                if self.peek() != Some(Tok::Op(b')')) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(n)
            }
            Some(Tok::Var(a, b)) => {
                self.pos += 1;
                let name = &self.src[a..b];
                self.env.get(name).copied().ok_or_else(|| format!("unset variable {name}"))
            }
            _ => Err("expected a value".into()),
        }
    }
}

fn with_eval<T>(src: &str, env: &Indices, f: impl FnOnce(&mut Eval) -> Result<T, String>) -> Result<T, CatalogError> {
    let err = |m: String| CatalogError::Formula(src.into(), m);
    let toks = lex(src).map_err(err)?;
    let mut ev = Eval { src, toks, pos: 0, env };
    let v = f(&mut ev).map_err(err)?;
    if ev.pos != ev.toks.len() {
        return Err(err("trailing input".into()));
    }
    Ok(v)
}

/// Evaluates an integer formula in `+ - * ^ ( )`.
pub fn eval(src: &str, env: &Indices) -> Result<i64, CatalogError> {
    with_eval(src, env, |e| e.sum())
}

/// Evaluates a comparison chain; every adjacent comparison must hold.
pub fn check_constraint(src: &str, env: &Indices) -> Result<bool, CatalogError> {
    with_eval(src, env, |e| {
        let mut lhs = e.sum()?;
        let mut ok = true;
        let mut any = false;
        while let Some(Tok::Cmp(op)) = e.peek() {
            e.pos += 1;
            any = true;
            let rhs = e.sum()?;
            ok &= match op {
                ">=" => lhs >= rhs,
                "<=" => lhs <= rhs,
                ">" => lhs > rhs,
                "<" => lhs < rhs,
                "==" => lhs == rhs,
                _ => lhs != rhs,
            };
            lhs = rhs;
        }
        if !any {
            return Err("no comparison".into());
        }
        Ok(ok)
    })
}

fn variables(src: &str) -> BTreeSet<String> {
    lex(src)
        .unwrap_or_default()
        .into_iter()
        .filter_map(|t| match t {
            Tok::Var(a, b) => Some(src[a..b].to_string()),
            _ => None,
        })
        .collect()
}

/// Replaces every `<formula>` by its value.
pub fn substitute(template: &str, env: &Indices) -> Result<String, CatalogError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let close = rest[open..]
            .find('>')
            .ok_or_else(|| CatalogError::Formula(template.into(), "unclosed `<`".into()))?
            + open;
        out.push_str(&eval(&rest[open + 1..close], env)?.to_string());
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn template_variables(template: &str) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    let mut rest = template;
    while let (Some(open), Some(close)) = (rest.find('<'), rest.find('>')) {
        if close < open {
            break;
        }
        out.extend(variables(&rest[open + 1..close]));
        rest = &rest[close + 1..];
    }
    out
}

fn validate(constraints: &[String], env: &Indices, needed: &BTreeSet<String>) -> Result<(), CatalogError> {
    if let Some(v) = needed.iter().find(|v| !env.contains_key(*v)) {
        return Err(CatalogError::MissingIndex(v.clone()));
    }
    for c in constraints {
        if !check_constraint(c, env)? {
            return Err(CatalogError::OutOfRange(c.clone()));
        }
    }
    Ok(())
}

impl Row {
    /// Index names the row depends on.
    pub fn index_names(&self) -> BTreeSet<String> {
        let mut v = template_variables(&self.source);
        v.extend(template_variables(&self.target));
        v.extend(template_variables(&self.adams));
        for c in &self.constraints {
            v.extend(variables(c));
        }
        v
    }

    /// Defaults overridden by `given`, restricted to the row's indices.
    pub fn resolve(&self, given: &Indices) -> Indices {
        let names = self.index_names();
        let mut env: Indices = self.defaults.clone();
        for (k, v) in given {
            if names.contains(k) {
                env.insert(k.clone(), *v);
            }
        }
        env.retain(|k, _| names.contains(k));
        env
    }

    /// Checks the constraints, then builds the claim.
    pub fn instantiate(&self, env: &Indices, p: u64) -> Result<Claim, CatalogError> {
        validate(&self.constraints, env, &self.index_names())?;
        let mut claim = Claim::new(&substitute(&self.source, env)?, &substitute(&self.target, env)?, p)?;
        claim.indices = env.clone();
        claim.expected_scalar = self.expected_scalar;
        claim.mode = if self.mode.as_deref() == Some("relaxed") { Mode::Relaxed } else { Mode::Strict };
        Ok(claim)
    }

    pub fn expected_adams(&self, env: &Indices) -> Result<String, CatalogError> {
        substitute(&self.adams, env)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CatalogReport {
    pub catalog: CatalogId,
    pub row: String,
    pub statement: String,
    #[serde(rename = "adamsExpected")]
    pub adams_expected: String,
    #[serde(rename = "adamsMatch")]
    pub adams_match: Option<bool>,
    pub report: Report,
}

/// Verifies the rows of a catalog (one row if `row` is given) at the
/// row defaults overridden by `given`.
pub fn verify_catalog(
    verifier: &Verifier,
    id: CatalogId,
    given: &Indices,
    row: Option<&str>,
    opts: &VerifyOptions,
) -> Result<Vec<CatalogReport>, CatalogError> {
    let cat = load(id);
    let rows: Vec<&Row> = match row {
        Some(l) => vec![cat.rows.iter().find(|r| r.label == l).ok_or_else(|| CatalogError::UnknownRow(l.into()))?],
        None => cat.rows.iter().collect(),
    };
    let p = verifier.prime();
    let mut out = Vec::new();
    for r in rows {
        let env = r.resolve(given);
        let claim = r.instantiate(&env, p)?;
        let report = verifier.verify(&claim, opts)?;
        let adams_expected = r.expected_adams(&env)?;
        let adams_match = report.adams.as_ref().map(|a| adams_equivalent(a, &adams_expected));
        out.push(CatalogReport {
            catalog: id,
            row: r.label.clone(),
            statement: r.statement.clone(),
            adams_expected,
            adams_match,
            report,
        });
    }
    Ok(out)
}

/// Signed sum of `E_1` monomials, e.g. `- a_1 b_0 h_0 h_1 + a_0 g_0 b_0`.
fn e1_sum(s: &str) -> Option<BTreeMap<E1Monomial, i64>> {
    let mut out = BTreeMap::new();
    let mut push = |sign: i64, coef: i64, toks: &mut Vec<&str>| -> Option<()> {
        if toks.is_empty() {
            return None;
        }
        let m = tokens_monomial(&parse_e1_tokens(&toks.join(" ")).ok()?)?;
        *out.entry(m).or_insert(0) += sign * coef;
        toks.clear();
        Some(())
    };
    let (mut sign, mut coef, mut toks) = (1, 1, Vec::new());
    for w in s.split_whitespace() {
        match w {
            "+" | "-" => {
                if !toks.is_empty() {
                    push(sign, coef, &mut toks)?;
                }
                sign = if w == "-" { -1 } else { 1 };
                coef = 1;
            }
            _ => match w.parse::<i64>() {
                Ok(c) if toks.is_empty() => coef = c,
                _ => toks.push(w),
            },
        }
    }
    push(sign, coef, &mut toks)?;
    out.retain(|_, c| *c != 0);
    Some(out)
}

/// Whether two rendered differentials `d2(x) = y` name the same `E_1`
/// monomials with the same signs, regardless of the order of factors.
pub fn adams_equivalent(a: &str, b: &str) -> bool {
    let parts = |s: &str| -> Option<(BTreeMap<E1Monomial, i64>, BTreeMap<E1Monomial, i64>)> {
        let (src, tgt) = s.strip_prefix("d2(")?.split_once(") = ")?;
        Some((e1_sum(src)?, e1_sum(tgt)?))
    };
    match (parts(a), parts(b)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    }
}

// ---- basis tables ----

#[derive(Debug, Clone, Deserialize)]
pub struct TableRow {
    pub name: String,
    pub mss: String,
    pub degree: String,
    #[serde(default)]
    pub cobar: Option<String>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub defaults: Indices,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table {
    pub id: String,
    pub title: String,
    pub rows: Vec<TableRow>,
}

#[derive(Deserialize)]
struct Tables {
    table: Vec<Table>,
}

pub fn tables() -> Vec<Table> {
    toml::from_str::<Tables>(include_str!("../data/tables.toml")).expect("embedded tables").table
}

/// A table row evaluated at concrete indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub name: String,
    pub mss: E1Monomial,
    /// Name produced from the written representative.
    pub derived_name: String,
    pub degree: u64,
    pub cobar: Option<String>,
}

impl TableRow {
    pub fn instantiate(&self, env: &Indices, p: u64) -> Result<TableEntry, CatalogError> {
        let mut needed = template_variables(&self.name);
        needed.extend(template_variables(&self.mss));
        validate(&self.constraints, env, &needed)?;
        let mss_text = substitute(&self.mss, env)?;
        let bad = |m: String| CatalogError::Formula(mss_text.clone(), m);
        let tokens = parse_e1_tokens(&mss_text).map_err(bad)?;
        let mss = tokens_monomial(&tokens).ok_or_else(|| bad("not a monomial".into()))?;
        let mut denv = env.clone();
        denv.insert("p".into(), p as i64);
        denv.insert("q".into(), 2 * (p as i64 - 1));
        let degree = eval(&self.degree, &denv)?;
        Ok(TableEntry {
            name: substitute(&self.name, env)?,
            derived_name: e1_name(&tokens),
            mss,
            degree: u64::try_from(degree).map_err(|_| CatalogError::Formula(self.degree.clone(), "negative".into()))?,
            cobar: self.cobar.as_deref().map(|c| substitute(c, env)).transpose()?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env(pairs: &[(&str, i64)]) -> Indices {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn formulas() {
        let e = env(&[("i", 2), ("j", 5)]);
        assert_eq!(eval("2*(i+1)^2 - j", &e).unwrap(), 13);
        assert_eq!(eval("-i + 3", &e).unwrap(), 1);
        assert!(check_constraint("j - 2 >= i >= 1", &e).unwrap());
        assert!(!check_constraint("j - 4 >= i", &e).unwrap());
        assert!(check_constraint("j != i + 2", &e).unwrap());
        assert!(eval("i +", &e).is_err());
        assert!(matches!(eval("k", &e), Err(CatalogError::Formula(..))));
    }

    #[test]
    fn substitution() {
        let e = env(&[("i", 1)]);
        assert_eq!(substitute("q0*b(4,<i-1>) | t3^p^<i>", &e).unwrap(), "q0*b(4,0) | t3^p^1");
    }

    #[test]
    fn catalogs_load() {
        let counts: Vec<usize> = CatalogId::ALL.iter().map(|c| load(*c).rows.len()).collect();
        assert_eq!(counts, [1, 3, 2, 6, 16]);
        for id in CatalogId::ALL {
            for r in load(id).rows {
                let e = r.resolve(&Indices::new());
                r.instantiate(&e, 5).unwrap_or_else(|err| panic!("{id} row {}: {err}", r.label));
            }
        }
    }

    #[test]
    fn out_of_range_is_rejected() {
        let r = &load(CatalogId::P42).rows[0];
        assert!(matches!(r.instantiate(&env(&[("i", 0)]), 5), Err(CatalogError::OutOfRange(_))));
        assert!(matches!(r.instantiate(&Indices::new(), 5), Err(CatalogError::MissingIndex(_))));
    }

    #[test]
    fn adams_equivalence() {
        assert!(adams_equivalent("d2(a_0 g_1) = a_0^2 b_{2,0} h_1", "d2(g_1 a_0) = a_0^2 b_{2,0} h_1"));
        assert!(adams_equivalent("d2(h_1) = a_0 b_0", "d2(h_{1,1}) = a_0 b_{1,0}"));
        assert!(!adams_equivalent("d2(g_0) = - a_1 b_0 h_0", "d2(g_0) = a_1 b_0 h_0"));
        assert!(!adams_equivalent("d2(h_{2,1} g_2) = a_0 h_{2,1} k_1", "d2(h_{2,1} g_2) = a_0 h_{2,1} k_1"));
    }

    #[test]
    fn tables_load() {
        for t in tables() {
            for r in &t.rows {
                r.instantiate(&r.defaults, 5).unwrap_or_else(|e| panic!("{}: {e}", r.name));
            }
        }
    }
}
