//! Randomized properties of the scalar field and the scenario pipeline.

use proptest::prelude::*;

use folires::complex::Record;
use folires::scalar::Scalar;
use folires::scenarios::{
    darboux_jouanolou, parse_scenario, random_scenario, render_scenario, GeneratorParams,
    Mode,
};

fn coord() -> impl Strategy<Value = (i64, i64)> {
    (-40i64..=40, 1i64..=12)
}

prop_compose! {
    fn scalar()(a in coord(), b in coord(), c in coord(), d in coord()) -> Scalar {
        let part = |(p, q): (i64, i64), unit: Scalar| &Scalar::rational(p, q) * &unit;
        let mut s = Scalar::rational(a.0, a.1);
        s = &s + &part(b, Scalar::sqrt2());
        s = &s + &part(c, Scalar::i());
        s = &s + &part(d, &Scalar::sqrt2() * &Scalar::i());
        s
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn inverse_is_exact(s in scalar()) {
        if let Some(inv) = s.inverse() {
            prop_assert!((&s * &inv).is_one());
            prop_assert!((&inv * &s).is_one());
        } else {
            prop_assert!(s.is_zero());
        }
    }

    #[test]
    fn classification_matches_the_predicates(s in scalar()) {
        let unclassifiable = s.is_zero() || (s.is_rational() && s.real_sign() >= 0);
        prop_assert_eq!(s.classify().is_none(), unclassifiable);
    }

    #[test]
    fn reciprocal_preserves_the_class(s in scalar()) {
        if let Some(class) = s.classify() {
            let inv = s.inverse().expect("classifiable values are nonzero");
            prop_assert_eq!(inv.classify(), Some(class));
        }
    }

    #[test]
    fn render_parses_back(s in scalar()) {
        let text = s.render();
        let back: Scalar = text.parse().expect("rendered scalar parses");
        prop_assert_eq!(back, s);
    }

    #[test]
    fn multiplication_distributes(a in scalar(), b in scalar(), c in scalar()) {
        let left = &(&a + &b) * &c;
        let right = &(&a * &c) + &(&b * &c);
        prop_assert_eq!(left, right);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn generated_scenarios_round_trip(seed in any::<u64>()) {
        let params = GeneratorParams { seed, ..GeneratorParams::default() };
        let cx = random_scenario(params).expect("generation succeeds");
        let text = render_scenario(&cx);
        let back = parse_scenario(&text).expect("rendered scenario parses");
        prop_assert_eq!(back.records(), cx.records());
        prop_assert_eq!(render_scenario(&back), text);
    }

    #[test]
    fn equal_seeds_render_identically(seed in any::<u64>()) {
        let params = || GeneratorParams {
            seed,
            mode: Mode::AllIncomplete,
            ..GeneratorParams::default()
        };
        let a = random_scenario(params()).expect("generation succeeds");
        let b = random_scenario(params()).expect("generation succeeds");
        prop_assert_eq!(render_scenario(&a), render_scenario(&b));
    }
}

#[test]
fn darboux_jouanolou_round_trips_bytewise() {
    for m in 1..=3 {
        let cx = darboux_jouanolou(m).unwrap();
        let text = render_scenario(&cx);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back.records(), cx.records());
        assert_eq!(render_scenario(&back), text);
    }
}

#[test]
fn scenario_files_keep_every_record_kind() {
    // Germ, curve-step, restricted and trace records all survive the
    // round trip; scan seeds until a scenario carries all of them.
    let mut found = false;
    for seed in 0..64 {
        let params = GeneratorParams {
            seed,
            mode: Mode::AllIncomplete,
            curve_step_probability: 0.9,
            ..GeneratorParams::default()
        };
        let cx = random_scenario(params).unwrap();
        let has = |pred: fn(&Record) -> bool| cx.records().iter().any(pred);
        if !(has(|r| matches!(r, Record::Germ { .. }))
            && has(|r| matches!(r, Record::StepCurve { .. }))
            && has(|r| matches!(r, Record::Restricted { .. })))
        {
            continue;
        }
        let text = render_scenario(&cx);
        let back = parse_scenario(&text).unwrap();
        assert_eq!(back.records(), cx.records());
        found = true;
        break;
    }
    assert!(found, "no seed under 64 resolved a germ");
}
