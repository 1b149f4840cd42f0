use gapprob::{Error, IntervalUnion, PrecisionConfig, SignedLogValue, SourceSpec};
use proptest::prelude::*;

#[test]
fn parse_and_print() {
    let e = IntervalUnion::parse("0.5,1.7; -2,-0.5").unwrap();
    assert_eq!(e.intervals(), &[(-2.0, -0.5), (0.5, 1.7)]);
    assert_eq!(e.to_string(), "-2,-0.5;0.5,1.7");
    assert!(!IntervalUnion::parse("-inf,0").unwrap().is_real_line());
    assert!(IntervalUnion::parse("-inf,inf").unwrap().is_real_line());
    assert!(IntervalUnion::parse("empty").unwrap().is_empty());
}

#[test]
fn overlapping_pieces_merge() {
    let e = IntervalUnion::parse("0,2;1,3;5,6").unwrap();
    assert_eq!(e.intervals(), &[(0.0, 3.0), (5.0, 6.0)]);
}

#[test]
fn bad_input_is_rejected() {
    for s in ["1", "2,1", "a,b", "0,nan", "1,2,3"] {
        assert!(matches!(IntervalUnion::parse(s), Err(Error::Invalid(_))), "{s}");
    }
    assert!(SourceSpec::new(1.0, 0, 0).is_err());
    assert!(PrecisionConfig::with_digits(10).validate().is_err());
}

#[test]
fn complement_of_bounded_set() {
    let e = IntervalUnion::parse("-1,1;2,3").unwrap();
    let c = e.complement();
    assert_eq!(c.intervals(), &[(f64::NEG_INFINITY, -1.0), (1.0, 2.0), (3.0, f64::INFINITY)]);
    assert_eq!(c.complement(), e);
}

#[test]
fn dual_swaps_multiplicities() {
    let s = SourceSpec::new(0.7, 3, 1).unwrap();
    let d = s.dual();
    assert_eq!((d.a, d.k1, d.k2), (-0.7, 1, 3));
    assert_eq!(d.dual(), s);
}

#[test]
fn signed_log_arithmetic() {
    let a = SignedLogValue::<f64>::from_real(&-3.0);
    let b = SignedLogValue::<f64>::from_real(&5.0);
    assert!((a.mul(&b).to_f64() + 15.0).abs() < 1e-12);
    assert!((a.add(&b).to_f64() - 2.0).abs() < 1e-12);
    assert!((a.div(&b).unwrap().to_f64() + 0.6).abs() < 1e-12);
    assert!(SignedLogValue::<f64>::zero().recip().is_err());
}

fn union() -> impl Strategy<Value = IntervalUnion> {
    prop::collection::vec((-5.0..5.0f64, 0.01..2.0f64), 1..4)
        .prop_map(|v| IntervalUnion::normalize(v.into_iter().map(|(lo, w)| (lo, lo + w)).collect()).unwrap())
}

proptest! {
    #[test]
    fn display_round_trips(e in union()) {
        prop_assert_eq!(IntervalUnion::parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn complement_partitions(e in union(), x in -8.0..8.0f64) {
        let inside = e.intervals().iter().any(|(lo, hi)| *lo < x && x < *hi);
        let outside = e.complement().intervals().iter().any(|(lo, hi)| *lo < x && x < *hi);
        let on_edge = e.boundary_points().contains(&x);
        prop_assert!(on_edge || inside != outside);
    }

    #[test]
    fn reflection_is_an_involution(e in union()) {
        prop_assert_eq!(e.reflect().reflect(), e.clone());
        prop_assert!((e.reflect().total_length() - e.total_length()).abs() < 1e-12);
    }

    #[test]
    fn log_domain_product(x in -1e3..1e3f64, y in -1e3..1e3f64) {
        let p = SignedLogValue::<f64>::from_real(&x).mul(&SignedLogValue::from_real(&y)).to_f64();
        prop_assert!((p - x * y).abs() <= 1e-12 * (x * y).abs().max(1e-300));
    }
}
