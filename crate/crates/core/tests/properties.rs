mod common;

use proptest::prelude::*;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn printing_and_parsing_round_trip(text in expr_text()) {
        round_trip(&text)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filtration_split_reassembles((head, factors, c, k) in split_case()) {
        split_reassembles(head, &factors, c, k)?;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn verdict_is_invariant_under_unit_scaling((row, i, u, w) in scaling_case()) {
        unit_scaling(row, i, u, w)?;
    }

    #[test]
    fn recheck_reproduces_the_verdict(
        row in 0usize..4,
        i in 1u32..3,
        expected in prop::option::of(-2i64..3),
        relaxed in any::<bool>(),
    ) {
        recheck_agrees(row, i, expected, relaxed)?;
    }

    #[test]
    fn verification_is_deterministic(row in 0usize..4, i in 1u32..3) {
        deterministic(row, i)?;
    }
}
