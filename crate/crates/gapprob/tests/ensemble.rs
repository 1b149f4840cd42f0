use gapprob::ensemble_mc::{
    brownian_pair_probability, brownian_to_source, mc_gap_probability, mc_gap_probability_nested, sample_spectrum,
    McConfig,
};
use gapprob::tau::gap_probability;
use gapprob::{IntervalUnion, PrecisionConfig, SourceSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn set(s: &str) -> IntervalUnion {
    IntervalUnion::parse(s).unwrap()
}

#[test]
fn seeded_runs_repeat() {
    let s = SourceSpec::new(1.0, 2, 1).unwrap();
    let cfg = McConfig { samples: 25_000, seed: 9 };
    let a = mc_gap_probability(&s, &set("-2,2"), &cfg).unwrap();
    let b = mc_gap_probability(&s, &set("-2,2"), &cfg).unwrap();
    assert_eq!(a, b);
    let c = mc_gap_probability(&s, &set("-2,2"), &McConfig { seed: 10, ..cfg }).unwrap();
    assert_ne!(a.hits, c.hits);
}

#[test]
fn whole_line_and_standard_error() {
    let s = SourceSpec::new(0.5, 1, 1).unwrap();
    let est = mc_gap_probability(&s, &IntervalUnion::real_line(), &McConfig { samples: 1000, seed: 1 }).unwrap();
    assert_eq!((est.p_hat, est.std_err), (1.0, 0.0));
    assert!(mc_gap_probability(&s, &set("0,1"), &McConfig { samples: 0, seed: 1 }).is_err());
}

#[test]
fn nested_sets_give_monotone_counts() {
    let s = SourceSpec::new(1.0, 1, 1).unwrap();
    let sets: Vec<IntervalUnion> = [0.5, 1.0, 2.0, 3.0].iter().map(|r| IntervalUnion::interval(-r, *r).unwrap()).collect();
    let est = mc_gap_probability_nested(&s, &sets, &McConfig { samples: 20_000, seed: 4 }).unwrap();
    assert!(est.windows(2).all(|w| w[0].hits <= w[1].hits));
}

#[test]
fn spectrum_mean_tracks_the_source() {
    // E[tr M] = a (k1 - k2)
    let s = SourceSpec::new(1.5, 2, 1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let m = 20_000;
    let mean: f64 = (0..m).map(|_| sample_spectrum(&s, &mut rng).iter().sum::<f64>()).sum::<f64>() / m as f64;
    // Var tr M = n
    assert!((mean - 1.5).abs() < 4.0 * (3.0 / m as f64).sqrt(), "{mean}");
}

#[test]
fn mc_agrees_with_determinant() {
    let s = SourceSpec::new(1.0, 1, 1).unwrap();
    let e = set("-2,2");
    let p = gap_probability(&s, &e, &PrecisionConfig::with_digits(30)).unwrap();
    let est = mc_gap_probability(&s, &e, &McConfig { samples: 40_000, seed: 3 }).unwrap();
    assert!((est.p_hat - p).abs() < 4.0 * est.std_err, "{} vs {p}", est.p_hat);
}

#[test]
fn brownian_pair_matches_the_source_ensemble() {
    let (t, a) = (0.3, 1.0);
    let e = set("-1,1");
    let direct = brownian_pair_probability(t, a, &e).unwrap();
    let (u, v) = brownian_to_source(t, a, &e).unwrap();
    let p = gap_probability(&SourceSpec::new(u, 1, 1).unwrap(), &v, &PrecisionConfig::with_digits(30)).unwrap();
    assert!((direct - p).abs() < 1e-8, "{direct} vs {p}");
}

#[test]
fn brownian_map_symmetry() {
    // k1 = k2 and symmetric E: (a, E) and (-a, E) give the same probability
    let e = set("-0.8,0.8");
    let prec = PrecisionConfig::with_digits(30);
    let p = |a: f64| {
        let (u, v) = brownian_to_source(0.4, a, &e).unwrap();
        gap_probability(&SourceSpec::new(u, 2, 2).unwrap(), &v, &prec).unwrap()
    };
    assert!((p(0.9) - p(-0.9)).abs() < 1e-12);
    assert!(brownian_to_source(1.0, 1.0, &e).is_err());
}
