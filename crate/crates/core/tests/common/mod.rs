#![allow(dead_code)]

pub mod oracles;

use std::sync::OnceLock;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use cobar_core::algebra::{GeneratorId, Monomial, Scalar};
use cobar_core::cobar::{filtration, split_by_filtration, CobarElement};
use cobar_core::expr::{parse, Expr};
use cobar_core::tensor::{Tensor, TensorKey};
use cobar_core::verifier::{recheck, Claim, Mode, Verdict, Verifier, VerifyOptions};

pub const P: u64 = 5;

pub fn verifier() -> &'static Verifier {
    static V: OnceLock<Verifier> = OnceLock::new();
    V.get_or_init(|| Verifier::new(P))
}

pub fn coef() -> impl Strategy<Value = String> {
    prop_oneof![
        (1u32..40).prop_map(|n| n.to_string()),
        (1u32..40, prop::sample::select(vec![2u32, 3, 4, 7])).prop_map(|(n, d)| format!("{n}/{d}")),
    ]
}

pub fn factor() -> impl Strategy<Value = String> {
    let exp = prop_oneof![
        Just(String::new()),
        (1u32..30).prop_map(|n| format!("^{n}")),
        Just("^p".to_string()),
        (1u32..4).prop_map(|j| format!("^p^{j}")),
    ];
    prop_oneof![
        (prop::sample::select(vec!["t", "v", "m", "q", "a", "xi"]), 0u32..6, exp).prop_map(|(f, i, e)| format!("{f}{i}{e}")),
        (prop::sample::select(vec!["tau", "taut"]), 0u32..6).prop_map(|(f, i)| format!("{f}{i}")),
        (1u32..5, 0u32..3).prop_map(|(i, j)| format!("b({i},{j})")),
    ]
}

/// Exterior generators may occur at most once per term.
fn exterior_free_of_repeats(fs: &[String]) -> bool {
    let ext: Vec<&String> = fs.iter().filter(|f| f.starts_with("tau")).collect();
    ext.iter().enumerate().all(|(n, f)| !ext[..n].contains(f))
}

pub fn term() -> impl Strategy<Value = String> {
    prop_oneof![
        coef(),
        (prop::option::of(coef()), prop::collection::vec(factor(), 1..4).prop_filter("repeated exterior factor", |fs| exterior_free_of_repeats(fs))).prop_map(|(c, fs)| {
            let body = fs.join("*");
            c.map_or(body.clone(), |c| format!("{c}*{body}"))
        }),
    ]
}

fn signed_join(parts: Vec<(bool, String)>) -> String {
    let mut out = String::new();
    for (n, (neg, s)) in parts.into_iter().enumerate() {
        match (n, neg) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        out.push_str(&s);
    }
    out
}

pub fn element() -> impl Strategy<Value = String> {
    prop::collection::vec((any::<bool>(), term()), 1..3).prop_map(signed_join)
}

pub fn word() -> impl Strategy<Value = String> {
    prop::collection::vec(element(), 1..4).prop_map(|es| es.join(" | "))
}

pub fn expr_text() -> impl Strategy<Value = String> {
    prop_oneof![
        word(),
        prop::collection::vec((any::<bool>(), prop::option::of(coef()), word()), 1..4).prop_map(|ss| {
            signed_join(ss.into_iter().map(|(neg, c, w)| (neg, c.map_or(format!("[{w}]"), |c| format!("{c}*[{w}]")))).collect())
        }),
    ]
}

pub fn chain(head: (u64, u64), factors: &[(u32, u32)], c: i64) -> CobarElement {
    let cobar = verifier().cobar();
    let mut h = Monomial::one();
    for (i, e) in [(1, head.0), (2, head.1)] {
        if e > 0 {
            h = h.mul(&Monomial::generator(GeneratorId::v(i), e)).unwrap().0;
        }
    }
    let fs = factors.iter().map(|&(n, i)| Monomial::generator(GeneratorId::t(n), P.pow(i)));
    let x = Tensor::from_term(TensorKey::new(h, fs), Scalar::from_int(c));
    CobarElement::new(cobar.bp_context(), x).unwrap()
}

/// Cheap claims `(source, target, expected scalar)` with a free index.
pub fn claim_text(row: usize, i: u32) -> (String, String, i64) {
    let pp = |j: u32| if j == 1 { "p".to_string() } else { format!("p^{j}") };
    match row {
        0 => (format!("t1^{}", pp(i)), format!("q0*b(1,{})", i - 1), 1),
        1 => (format!("q0*t1^{}", pp(i)), format!("q0^2*b(1,{})", i - 1), 1),
        2 => (format!("t2^{} | t1^{}", pp(i), pp(i)), format!("q0*b(2,{}) | t1^{}", i - 1, pp(i)), 1),
        _ => ("t2 | t1".to_string(), "q1*b(1,0) | t1".to_string(), -1),
    }
}

fn residue(x: i64) -> i64 {
    x.rem_euclid(P as i64)
}

fn inverse(u: i64) -> i64 {
    (1..P as i64).find(|w| residue(u * w) == 1).unwrap()
}

pub type Check = Result<(), TestCaseError>;

pub fn round_trip(text: &str) -> Check {
    let e: Expr = parse(text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
    let printed = e.to_string();
    let again = parse(&printed).map_err(|e| TestCaseError::fail(format!("{printed}: {e}")))?;
    prop_assert_eq!(&again, &e);
    prop_assert_eq!(again.to_string(), printed);
    Ok(())
}

pub fn split_reassembles(head: (u64, u64), factors: &[(u32, u32)], c: i64, k: u64) -> Check {
    let d = verifier().cobar().d_bp(&chain(head, factors, c), k).unwrap();
    let parts = split_by_filtration(&d);
    let mut sum = CobarElement::zero(d.context(), d.s());
    for (f, part) in &parts {
        prop_assert!(!part.is_zero());
        for (key, c) in part.terms() {
            prop_assert_eq!(filtration(key, c, P).max(0) as u64, *f);
        }
        sum = sum.add(part).unwrap();
    }
    prop_assert_eq!(sum, d);
    Ok(())
}

pub fn unit_scaling(row: usize, i: u32, u: i64, w: i64) -> Check {
    let (src, tgt, base) = claim_text(row, i);
    let opts = VerifyOptions::default();
    let plain = verifier().verify(&Claim::new(&src, &tgt, P).unwrap(), &opts).unwrap();
    prop_assert_eq!(&plain.verdict, &Verdict::Pass);
    prop_assert_eq!(plain.scalar.map(residue), Some(residue(base)));

    let claim = Claim::new(&format!("{u}*[{src}]"), &format!("{w}*[{tgt}]"), P).unwrap();
    let scaled = verifier().verify(&claim, &opts).unwrap();
    prop_assert_eq!(&scaled.verdict, &Verdict::Pass);
    prop_assert_eq!(scaled.scalar.map(residue), Some(residue(base * u * inverse(w))));
    prop_assert_eq!(scaled.may_target, plain.may_target);
    prop_assert_eq!(scaled.may_source, plain.may_source);
    Ok(())
}

pub fn recheck_agrees(row: usize, i: u32, expected: Option<i64>, relaxed: bool) -> Check {
    let (src, tgt, _) = claim_text(row, i);
    let mut claim = Claim::new(&src, &tgt, P).unwrap();
    if relaxed {
        claim.mode = Mode::Relaxed;
    }
    claim.expected_scalar = expected;
    let r = verifier().verify(&claim, &VerifyOptions::default()).unwrap();
    prop_assert_eq!(recheck(&r), r.verdict.clone());
    Ok(())
}

pub fn deterministic(row: usize, i: u32) -> Check {
    let (src, tgt, _) = claim_text(row, i);
    let claim = Claim::new(&src, &tgt, P).unwrap();
    let a = verifier().verify(&claim, &VerifyOptions::default()).unwrap();
    let b = Verifier::new(P).verify(&claim, &VerifyOptions::default()).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn split_case() -> impl Strategy<Value = ((u64, u64), Vec<(u32, u32)>, i64, u64)> {
    (
        (0u64..2, 0u64..2),
        prop::collection::vec((1u32..3, 0u32..2), 1..3),
        prop::sample::select(vec![1i64, -2, 5, 7, 25]),
        1u64..3,
    )
}

pub fn scaling_case() -> impl Strategy<Value = (usize, u32, i64, i64)> {
    (0usize..4, 1u32..3, 1i64..5, 1i64..5)
}
