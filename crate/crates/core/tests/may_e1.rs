use std::collections::BTreeSet;

use cobar_core::algebra::Scalar;
use cobar_core::catalog::{tables, CatalogError, Indices};
use cobar_core::cobar::Cobar;
use cobar_core::expr::{parse, parse_chain, Side};
use cobar_core::may::{e1_generators, enumerate_e1, may_degree, word_may_degree, E1Gen, E1Monomial};
use cobar_core::structmaps::BpMaps;
use cobar_core::tensor::Reduction;
use cobar_core::verifier::{e1, e1_monomial_of, nontriviality_by_degree, Verdict};

const P: u64 = 5;

#[test]
fn fourth_line_may_degrees() {
    let cobar = Cobar::new(P);
    let src = parse_chain("t4^p | t3^p | t2^p | t1^p", &cobar, Side::Bp(Some(2))).unwrap();
    assert_eq!(may_degree(&src), Some(16));
    let tgt = parse_chain("q0*b(4,0) | t3^p | t2^p | t1^p", &cobar, Side::Bp(Some(2))).unwrap();
    assert_eq!(may_degree(&tgt), Some(7 * P + 10));
}

#[test]
fn b_mod_i_leading_part() {
    let maps = BpMaps::new(P);
    for i in 1..=4u32 {
        for j in 0..=1u32 {
            let b = maps.b_element(i, j).unwrap().reduce(&Reduction::mod_ideal(P, 1));
            let top = P * (2 * i as u64 - 1);
            let mays: Vec<u64> = b.iter().map(|(k, c)| word_may_degree(k, c, P)).collect();
            assert_eq!(mays.iter().max(), Some(&top), "b({i},{j})");
            let lead = b.filter(|k, c| word_may_degree(k, c, P) == top);
            let lead = lead.reduce(&Reduction::mod_prime(P));
            assert_eq!(lead, maps.b_tilde(i, j).reduce(&Reduction::mod_prime(P)), "b({i},{j})");
            assert_eq!(mays.iter().all(|m| *m == top), i == 1, "b({i},{j})");
        }
    }
}

fn generators_oracle(p: u64, t: u64) -> BTreeSet<E1Gen> {
    let (p, t) = (p as u128, t as u128);
    let mut out = BTreeSet::new();
    for i in 0..12u32 {
        if 2 * p.pow(i) - 1 <= t {
            out.insert(E1Gen::A(i));
        }
        for j in 0..12u32 {
            if i >= 1 {
                let base = 2 * (p.pow(i) - 1);
                if base * p.pow(j) <= t {
                    out.insert(E1Gen::H(i, j));
                }
                if base * p.pow(j + 1) <= t {
                    out.insert(E1Gen::B(i, j));
                }
            }
        }
    }
    out
}

/// Every monomial with `s ≤ s_max`, `t ≤ t_max`, by repeated multiplication.
fn monomials_oracle(p: u64, s_max: usize, t_max: u64) -> BTreeSet<E1Monomial> {
    let gens = generators_oracle(p, t_max);
    let mut seen: BTreeSet<E1Monomial> = [E1Monomial::one()].into();
    let mut frontier = vec![E1Monomial::one()];
    while let Some(m) = frontier.pop() {
        for g in &gens {
            if let Some(n) = m.times(*g, 1) {
                if n.s() <= s_max && n.degree(p) <= t_max && seen.insert(n.clone()) {
                    frontier.push(n);
                }
            }
        }
    }
    seen
}

#[test]
fn e1_generators_match_oracle() {
    for p in [3, 5, 7] {
        for t in [0, 1, 5, 40, 239, 1000, 7761] {
            let got: BTreeSet<E1Gen> = e1_generators(p, t).into_iter().collect();
            assert_eq!(got, generators_oracle(p, t), "p = {p}, t = {t}");
        }
    }
}

#[test]
fn e1_enumeration_matches_oracle() {
    for (p, s_max, t_max) in [(3, 4, 120), (5, 3, 300), (5, 4, 130), (7, 3, 400)] {
        let all = monomials_oracle(p, s_max, t_max);
        for s in 0..=s_max {
            for t in 0..=t_max {
                let want: Vec<E1Monomial> = all.iter().filter(|m| m.s() == s && m.degree(p) == t).cloned().collect();
                assert_eq!(enumerate_e1(p, s, t, None), want, "p = {p}, s = {s}, t = {t}");
                for bound in [1, 3, 8] {
                    let cut: Vec<E1Monomial> = want.iter().filter(|m| m.may(p) < bound).cloned().collect();
                    assert_eq!(enumerate_e1(p, s, t, Some(bound)), cut);
                }
            }
        }
    }
}

#[test]
fn fourth_line_stratum() {
    let target = e1(&[(E1Gen::A(0), 1), (E1Gen::B(4, 0), 1), (E1Gen::H(3, 1), 1), (E1Gen::H(2, 1), 1), (E1Gen::H(1, 1), 1)]);
    assert_eq!(target.degree(P), 7761);
    assert_eq!(target.may(P), 45);
    let r = nontriviality_by_degree(&target, 6, P);
    assert_eq!(r.t, 7761);
    assert_eq!(r.may_target, 45);
    let raw: Vec<&str> = r.stratum.iter().map(|l| l.raw.as_str()).collect();
    assert_eq!(raw, ["a_0 h_{4,1} h_{3,1} h_{2,1} h_{1,1}", "a_1 h_{5,0} h_{4,0} h_{3,0} h_{1,0}"]);
    assert_eq!(r.stratum.iter().map(|l| l.may).collect::<Vec<_>>(), [17, 25]);
    assert!(r.competitors.is_empty());
    assert_eq!(r.verdict, Verdict::Pass);
}

#[test]
fn nontriviality_can_fail() {
    // a_1 sits in degree 2p−1 = 9 = |a_0 h_0| with May 3 > 2.
    let target = e1(&[(E1Gen::A(0), 1), (E1Gen::H(1, 0), 1)]);
    let r = nontriviality_by_degree(&target, 2, P);
    assert_eq!(r.verdict, Verdict::Fail);
    assert_eq!(r.competitors.len(), 1);
    assert_eq!(r.competitors[0].raw, "a_1");
}

#[test]
fn nontriviality_vacuous() {
    let target = e1(&[(E1Gen::H(1, 0), 1)]);
    let r = nontriviality_by_degree(&target, 1, P);
    assert!(r.stratum.is_empty());
    assert_eq!(r.verdict, Verdict::Pass);
    let r = nontriviality_by_degree(&target, 0, P);
    assert!(r.stratum.is_empty());
    assert_eq!(r.verdict, Verdict::Pass);
}

fn envs(names: &[String], hi: i64) -> Vec<Indices> {
    let mut out = vec![Indices::new()];
    for n in names {
        out = out
            .into_iter()
            .flat_map(|e| {
                (0..=hi).map(move |v| {
                    let mut e = e.clone();
                    e.insert(n.clone(), v);
                    e
                })
            })
            .collect();
    }
    out
}

#[test]
fn tables_are_consistent() {
    let cobar = Cobar::new(P);
    for table in tables() {
        for row in &table.rows {
            let names: Vec<String> = row.defaults.keys().cloned().collect();
            let mut admissible = 0;
            for env in envs(&names, 5) {
                for p in [3, 5, 7] {
                    let entry = match row.instantiate(&env, p) {
                        Ok(e) => e,
                        Err(CatalogError::OutOfRange(_)) => continue,
                        Err(e) => panic!("{}: {e}", row.name),
                    };
                    admissible += 1;
                    assert_eq!(entry.derived_name, entry.name, "{} at {env:?}", row.name);
                    assert_eq!(entry.degree, entry.mss.degree(p), "{} at {env:?}, p = {p}", row.name);
                    if let Some(word) = &entry.cobar {
                        let expr = parse(word).unwrap();
                        assert_eq!(e1_monomial_of(&expr, p).unwrap(), entry.mss, "{word}");
                    }
                }
            }
            assert!(admissible > 0, "{}", row.name);
            if let (Some(word), true) = (&row.cobar, table.id == "fourth") {
                let entry = row.instantiate(&row.defaults, P).unwrap();
                let x = parse_chain(&entry.cobar.clone().unwrap(), &cobar, Side::Bp(Some(1))).unwrap();
                assert_eq!(x.len(), 1, "{word}");
                let (k, c) = x.terms()[0];
                assert_eq!(word_may_degree(k, c, P), entry.mss.may(P));
                assert_eq!(k.internal_degree(P), entry.degree);
                assert_eq!(*c, Scalar::one());
            }
        }
    }
}
