use gapprob::pearcey::fredholm::{fredholm_log_det, fredholm_log_det_mp, FredholmDiscretization};
use gapprob::pearcey::functions::{ode_residuals, pearcey_p, pearcey_q, PearceyEngine, QuadEngine, SeriesEngine};
use gapprob::pearcey::kernel::{kernel, kernel_diagonal, numerator, switch_rule};
use gapprob::pearcey::pde::{residual_pearcey_pde, PearceyFdConfig};
use gapprob::pearcey::scaling::scaling_limit_report;
use gapprob::ensemble_mc::scaled_qz;
use gapprob::{Error, IntervalUnion, PrecisionConfig};
use proptest::prelude::*;

fn set(s: &str) -> IntervalUnion {
    IntervalUnion::parse(s).unwrap()
}

#[test]
fn p_at_origin() {
    // Γ(1/4) / (π 4^{3/4})
    let expect = 3.625_609_908_221_908_f64 / (std::f64::consts::PI * 4f64.powf(0.75));
    assert!((pearcey_p(0.0, 0.0, 0) - expect).abs() < 1e-13);
    assert!((pearcey_q(0.0, 0.0, 1) - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-13);
}

#[test]
fn ode_residual_examples() {
    for (x, y, t) in [(0.0, 0.0, 0.0), (0.7, 1.3, 0.3), (0.5, 0.5, -2.0)] {
        let (rp, rq) = ode_residuals(x, y, t);
        assert!(rp.abs() < 1e-8 && rq.abs() < 1e-8, "({x},{y},{t}): {rp:e} {rq:e}");
    }
}

/// q(1) at t = 0 by RK4 marching of q''' = t q' - y q from the quadrature
/// values at 0.
#[test]
fn q_by_ode_marching() {
    let t = 0.0;
    let f = |y: f64, v: [f64; 3]| [v[1], v[2], t * v[1] - y * v[0]];
    let mut v = [0, 1, 2].map(|d| pearcey_q(0.0, t, d));
    let n = 2000;
    let h = 1.0 / n as f64;
    for i in 0..n {
        let y = i as f64 * h;
        let add = |v: [f64; 3], k: [f64; 3], s: f64| [v[0] + s * k[0], v[1] + s * k[1], v[2] + s * k[2]];
        let k1 = f(y, v);
        let k2 = f(y + h / 2.0, add(v, k1, h / 2.0));
        let k3 = f(y + h / 2.0, add(v, k2, h / 2.0));
        let k4 = f(y + h, add(v, k3, h));
        for j in 0..3 {
            v[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    }
    assert!((v[0] - pearcey_q(1.0, t, 0)).abs() < 1e-11, "{} vs {}", v[0], pearcey_q(1.0, t, 0));
}

#[test]
fn series_matches_quadrature() {
    for t in [-1.0, 0.0, 0.7] {
        let s = SeriesEngine::<f64>::new(&t, 3.0);
        let q = QuadEngine::new(t);
        for x in [-2.5, -0.3, 0.0, 1.1, 2.9] {
            for (a, b) in s.p(&x).iter().zip(q.p(&x)).chain(s.q(&x).iter().zip(q.q(&x))) {
                assert!((a - b).abs() < 1e-11, "t={t} x={x}: {a} vs {b}");
            }
        }
    }
}

#[test]
fn numerator_vanishes_on_the_diagonal() {
    let (x, t) = (0.5, 0.0);
    let e = QuadEngine::new(t);
    let (p, q) = (e.p(&x), e.q(&x));
    let big = p.iter().chain(q.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(numerator(&p, &q, &t).abs() < 1e-8 * big * big);
}

#[test]
fn kernel_is_continuous_across_the_switch() {
    for (x, t) in [(0.4, 0.0), (-1.2, 0.5), (0.0, -1.0)] {
        let e = QuadEngine::new(t);
        let d = kernel_diagonal(&x, &e.p(&x), &e.q(&x));
        for eta in [1e-6, -1e-6] {
            assert!((kernel(x, x + eta, t) - d).abs() < 1e-5 * d.abs().max(1.0), "x={x} eta={eta}");
        }
        let (delta, _) = switch_rule(&x);
        for side in [1.0, -1.0] {
            let inner = kernel(x, x + side * delta * (1.0 - 1e-9), t);
            let outer = kernel(x, x + side * delta * (1.0 + 1e-9), t);
            assert!((inner - outer).abs() < 1e-8 * d.abs().max(1.0), "x={x}: {inner} vs {outer}");
        }
    }
}

#[test]
fn kernel_derivative_along_the_diagonal() {
    // (∂x + ∂y) K = p(x) q(y) for the difference-quotient form
    let (x, y, t, h) = (0.3, -0.4, 0.1, 1e-4);
    let d = (kernel(x + h, y + h, t) - kernel(x - h, y - h, t)) / (2.0 * h);
    let pq = pearcey_p(x, t, 0) * pearcey_q(y, t, 0);
    assert!((d - pq).abs() < 1e-7, "{d} vs {pq}");
}

#[test]
fn fredholm_basics() {
    assert_eq!(fredholm_log_det(0.0, &IntervalUnion::empty(), 20).unwrap(), 0.0);
    let q = fredholm_log_det(0.0, &set("-1,1"), 40).unwrap();
    assert!((q + 0.452_697_561_969_135_4).abs() < 1e-12);
    let qmp = fredholm_log_det_mp(0.0, &set("-1,1"), 40, 30).unwrap();
    assert!((q - qmp).abs() < 1e-12);
    let t5 = fredholm_log_det(0.5, &set("-1,1"), 40).unwrap();
    assert!((t5 + 0.298_332_636_626_292_3).abs() < 1e-11);
    assert!(matches!(fredholm_log_det(0.0, &set("-inf,0"), 20), Err(Error::Unbounded(_))));
}

#[test]
fn small_interval_is_first_order() {
    let (x0, h, t) = (0.3, 1e-3, 0.0);
    let q = fredholm_log_det(t, &IntervalUnion::interval(x0 - h / 2.0, x0 + h / 2.0).unwrap(), 8).unwrap();
    let k = kernel(x0, x0, t);
    assert!((q + h * k).abs() < 10.0 * h * h, "{q} vs {}", -h * k);
}

#[test]
fn discretization_nodes_stay_inside() {
    let e = set("-1.5,-0.5;0.5,1.5");
    let d = FredholmDiscretization::build(&QuadEngine::new(0.0), &e, 12).unwrap();
    assert_eq!(d.nodes.len(), 24);
    assert!(d.nodes.iter().all(|x| e.contains(x)));
    assert!(d.weights.iter().all(|w| *w > 0.0));
}

#[test]
fn pearcey_pde_reflection() {
    let fd = PearceyFdConfig { order: 24, levels: 2, ..Default::default() };
    let a = residual_pearcey_pde(0.2, &set("-0.8,1.1"), &fd).unwrap();
    let b = residual_pearcey_pde(0.2, &set("-1.1,0.8"), &fd).unwrap();
    assert!((a.q - b.q).abs() < 1e-12);
    assert!((a.relative_residual - b.relative_residual).abs() < 1e-3 * a.relative_residual.max(1e-3));
}

#[test]
fn scaling_edge_cases() {
    let prec = PrecisionConfig::with_digits(30);
    assert_eq!(scaled_qz(0.0, &IntervalUnion::empty(), 4, 1, &prec).unwrap(), 0.0);
    let g = set("-1,1");
    let plus = scaled_qz(0.0, &g, 6, 1, &prec).unwrap();
    let minus = scaled_qz(0.0, &g, 6, -1, &prec).unwrap();
    assert!((plus - minus).abs() < 1e-12);
    assert!(plus < 0.0);
    assert!(scaled_qz(0.0, &g, 5, 1, &prec).is_err());
    assert!(scaling_limit_report(0.0, &g, &[8, 4], &prec).is_err());
    let r = scaling_limit_report(0.0, &IntervalUnion::empty(), &[2, 4], &prec).unwrap();
    assert!(r.rows.iter().all(|row| row.q_z == 0.0 && row.q == 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn parity(x in -3.0..3.0f64, t in -1.5..1.5f64) {
        prop_assert!((pearcey_p(-x, t, 0) - pearcey_p(x, t, 0)).abs() < 1e-13);
        prop_assert!((pearcey_q(-x, t, 0) + pearcey_q(x, t, 0)).abs() < 1e-12 * pearcey_q(x, t, 0).abs().max(1.0));
        prop_assert!(pearcey_p(0.0, t, 1).abs() < 1e-14);
        prop_assert!(pearcey_q(0.0, t, 0).abs() < 1e-14);
    }

    #[test]
    fn ode_holds(x in -2.0..2.0f64, y in -2.0..2.0f64, t in -1.0..1.0f64) {
        let (rp, rq) = ode_residuals(x, y, t);
        prop_assert!(rp.abs() < 1e-8 && rq.abs() < 1e-8);
    }

    #[test]
    fn log_det_is_monotone(lo in -1.5..0.0f64, w in 0.2..1.5f64, grow in 0.05..0.5f64, t in -0.5..0.5f64) {
        let small = fredholm_log_det(t, &IntervalUnion::interval(lo, lo + w).unwrap(), 24).unwrap();
        let big = fredholm_log_det(t, &IntervalUnion::interval(lo - grow, lo + w).unwrap(), 24).unwrap();
        prop_assert!(small <= 0.0);
        prop_assert!(big < small);
    }
}
