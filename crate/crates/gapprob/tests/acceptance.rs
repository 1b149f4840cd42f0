//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Exits 0 whatever the verdicts so that `cargo test` reflects build and
//! unit health; set ACCEPTANCE_STRICT=1 to exit 1 when any criterion fails.

use std::time::{Duration, Instant};

use gapprob::ensemble_mc::{mc_gap_probability, McConfig};
use gapprob::pde_source::{residual_source_pde, PdeFdConfig};
use gapprob::pearcey::fredholm::{fredholm_log_det, fredholm_log_det_mp};
use gapprob::pearcey::functions::{ode_residuals, pearcey_p, pearcey_q};
use gapprob::pearcey::kernel::{kernel, kernel_integral, INTEGRAL_CUTOFF};
use gapprob::pearcey::pde::{residual_pearcey_pde, residual_pearcey_pde_mp, ChartKind, PearceyFdConfig, PearceyForm};
use gapprob::pearcey::scaling::scaling_limit_report;
use gapprob::quad;
use gapprob::real::{with_digits, Mp};
use gapprob::tau::identities::{check_identity, FdConfig, IdentityId};
use gapprob::tau::{gap_probability, tau_fullline_closed, tau_truncated_line, tau_value};
use gapprob::{moments::DeformationPoint, IntervalUnion, PrecisionConfig, Real, SourceSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn set(s: &str) -> IntervalUnion {
    IntervalUnion::parse(s).expect("valid set")
}

fn within(limit: Duration, took: Duration) -> (bool, String) {
    (took <= limit, format!("{:.1}s of {}s", took.as_secs_f64(), limit.as_secs()))
}

fn c1_normalization() -> Verdict {
    let start = Instant::now();
    let prec = PrecisionConfig::with_digits(40);
    let mut worst: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        for k1 in 0..=4 {
            for k2 in 0..=4 {
                if k1 + k2 == 0 {
                    continue;
                }
                let spec = SourceSpec::new(a, k1, k2).unwrap();
                let num = tau_truncated_line(&spec, Some(40.0), &prec).unwrap();
                let exact = tau_fullline_closed(&a, k1, k2);
                let rel = if num.sign == exact.sign { (num.log_abs - exact.log_abs).exp_m1().abs() } else { f64::INFINITY };
                worst = worst.max(rel);
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(10), start.elapsed());
    verdict(worst < 1e-8 && fast, format!("max relative error {worst:.2e} over 72 cases, {time}"))
}

fn c2_monte_carlo() -> Verdict {
    let start = Instant::now();
    let prec = PrecisionConfig::with_digits(30);
    let cases = [
        (1, 0.5, "-2,2"),
        (1, 1.0, "0,3"),
        (1, 2.0, "-2,2"),
        (2, 0.5, "0,3"),
        (2, 1.0, "-2,2"),
        (2, 2.0, "0,3"),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (i, (k, a, e)) in cases.iter().enumerate() {
        let spec = SourceSpec::new(*a, *k, *k).unwrap();
        let e = set(e);
        let p = gap_probability(&spec, &e, &prec).unwrap();
        let cfg = McConfig { samples: 1_000_000, seed: 1000 + i as u64 };
        let est = mc_gap_probability(&spec, &e, &cfg).unwrap();
        let se = (p * (1.0 - p) / cfg.samples as f64).sqrt().max(est.std_err).max(1e-12);
        let z = (est.p_hat - p).abs() / se;
        worst = worst.max(z);
        parts.push(format!("{z:.2}"));
    }
    let (fast, time) = within(Duration::from_secs(120), start.elapsed());
    verdict(worst < 3.0 && fast, format!("|p_hat - P| / se = [{}], {time}", parts.join(", ")))
}

fn c3_duality() -> Verdict {
    let prec = PrecisionConfig::with_digits(40);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let a = rng.random_range(0.2..2.5) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let k1 = rng.random_range(0..=3usize);
        let k2 = rng.random_range(if k1 == 0 { 1 } else { 0 }..=3usize);
        let lo = rng.random_range(-3.0..0.5);
        let hi = lo + rng.random_range(0.5..4.0);
        let e = IntervalUnion::interval(lo, hi).unwrap();
        let spec = SourceSpec::new(a, k1, k2).unwrap();
        let p = gap_probability(&spec, &e, &prec).unwrap();
        let q = gap_probability(&spec.dual(), &e, &prec).unwrap();
        worst = worst.max((p - q).abs() / p.abs().max(1e-300));
    }
    verdict(worst < 1e-10, format!("max relative gap {worst:.2e} over 20 random points"))
}

/// k1! k2! τ for k1 = k2 = 1 from the two-point integrand (y - x) w₊(x) w₋(y).
fn c4_integral_oracle() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (a, e) in [(0.5, "-1,1.5"), (1.0, "-2,2"), (1.7, "-0.5,3")] {
        let e = set(e);
        let (lo, hi) = e.intervals()[0];
        let f = |x: f64, y: f64| (y - x) * (-x * x / 2.0 + a * x).exp() * (-y * y / 2.0 - a * y).exp();
        let oracle = quad::integrate_2d(f, (lo, hi), (lo, hi), 1e-15, 1e-13).value;
        let tau = with_digits(40, || {
            tau_value(&Mp::from_f64(a), 1, 1, &DeformationPoint::<Mp>::zero(), &e.to_mp()).unwrap().to_f64()
        });
        let rel = (oracle - tau).abs() / tau.abs();
        worst = worst.max(rel);
        parts.push(format!("{rel:.1e}"));
    }
    verdict(worst < 1e-8, format!("relative gaps [{}]", parts.join(", ")))
}

fn c5_identities() -> Verdict {
    let start = Instant::now();
    let prec = PrecisionConfig::with_digits(40);
    let e = set("-1.5,1.5");
    let ids = IdentityId::ALL.iter().copied().filter(|i| *i != IdentityId::Eq14Neg);
    let mut failed = Vec::new();
    let mut worst: f64 = 0.0;
    for id in ids {
        for k in [1usize, 2] {
            for a in [0.5, 1.0] {
                let spec = SourceSpec::new(a, k, k).unwrap();
                let r = check_identity(id, &spec, &e, &FdConfig::default(), &prec).unwrap();
                let ok = r.residual < 1e-6 && r.convergence_order.is_none_or(|o| o >= 1.8);
                if ok {
                    worst = worst.max(r.residual);
                } else {
                    failed.push(format!("{id}(k={k},a={a}: {:.1e})", r.residual));
                }
            }
        }
    }
    let spec = SourceSpec::new(1.0, 1, 1).unwrap();
    let neg = check_identity(IdentityId::Eq14Neg, &spec, &e, &FdConfig::default(), &prec).unwrap();
    let (fast, time) = within(Duration::from_secs(300), start.elapsed());
    let mut detail = format!("worst passing residual {worst:.1e}, {time}");
    if !failed.is_empty() {
        detail += &format!("; failing: {}", failed.join(" "));
        detail += &format!("; with the sign of the right side flipped eq14 gives {:.1e}", neg.residual);
    }
    verdict(failed.is_empty() && fast, detail)
}

fn c6_source_pde() -> Verdict {
    let start = Instant::now();
    let prec = PrecisionConfig::with_digits(40);
    let mut worst: f64 = 0.0;
    let mut monotone = true;
    for k in [1usize, 2] {
        for a in [1.0, 1.5] {
            for e in ["-1.3,1.6", "-2,-0.5;0.5,1.7"] {
                let spec = SourceSpec::new(a, k, k).unwrap();
                let r = residual_source_pde(&spec, &set(e), &PdeFdConfig::default(), &prec).unwrap();
                worst = worst.max(r.relative_residual);
                monotone &= r.decreasing;
            }
        }
    }
    let (fast, time) = within(Duration::from_secs(1800), start.elapsed());
    verdict(
        worst < 1e-3 && monotone && fast,
        format!("max relative residual {worst:.1e}, monotone refinement {monotone}, {time}"),
    )
}

fn c7_pearcey_functions() -> Verdict {
    let mut worst: f64 = 0.0;
    for t in [-1.0, 0.0, 1.0] {
        for x in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            for y in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let (rp, rq) = ode_residuals(x, y, t);
                worst = worst.max(rp.abs()).max(rq.abs());
            }
        }
    }
    let g = 3.625_609_908_221_908_f64;
    let p0 = g / (std::f64::consts::PI * 4f64.powf(0.75));
    let dp = (pearcey_p(0.0, 0.0, 0) - p0).abs();
    verdict(worst < 1e-8 && dp < 1e-10, format!("max ODE residual {worst:.1e}, |p(0) - closed form| {dp:.1e}"))
}

fn c8_kernel_forms() -> Verdict {
    let grid = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let mut worst: f64 = 0.0;
    let mut deriv: f64 = 0.0;
    for t in [-1.0, 0.0, 1.0] {
        for x in grid {
            for y in grid {
                let k = kernel(x, y, t);
                let i = kernel_integral(x, y, t, INTEGRAL_CUTOFF);
                worst = worst.max((k - i).abs() / k.abs().max(1e-12));
                // the integral form forces (∂x + ∂y)K = -p(x)q(y)
                let h = 1e-4;
                let d = (kernel(x + h, y + h, t) - kernel(x - h, y - h, t)) / (2.0 * h);
                let pq = pearcey_p(x, t, 0) * pearcey_q(y, t, 0);
                deriv = deriv.max((d - pq).abs());
            }
        }
    }
    verdict(
        worst < 1e-6,
        format!(
            "max relative gap {worst:.2e} (integral truncated at z = {INTEGRAL_CUTOFF}); \
             the quotient form satisfies (dx+dy)K = +p(x)q(y) to {deriv:.1e}"
        ),
    )
}

fn c9_fredholm() -> Verdict {
    let e = set("-1,1");
    let q40 = fredholm_log_det_mp(0.0, &e, 40, 30).unwrap();
    let q80 = fredholm_log_det_mp(0.0, &e, 80, 30).unwrap();
    let chain: Vec<f64> =
        [0.2, 0.4, 0.6, 0.8, 1.0].iter().map(|r| fredholm_log_det(0.0, &set(&format!("{},{r}", -r)), 40).unwrap()).collect();
    let nonpos = chain.iter().all(|q| *q <= 0.0) && q80 <= 0.0;
    let monotone = chain.windows(2).all(|w| w[1] < w[0]);
    let gap = (q40 - q80).abs();
    verdict(
        gap < 1e-10 && nonpos && monotone,
        format!("Q = {q80:.15}, |Q40 - Q80| {gap:.1e}, nested chain {chain:.6?}"),
    )
}

fn c10_pearcey_pde() -> Verdict {
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut pass = true;
    for t in [0.0, 0.5, -0.5] {
        for e in ["-1,1", "-1.5,-0.5;0.5,1.5"] {
            let e = set(e);
            let fd = PearceyFdConfig::default();
            let d = residual_pearcey_pde(t, &e, &fd).unwrap();
            let m = residual_pearcey_pde_mp(t, &e, &fd, 30).unwrap();
            let ok = d.relative_residual < 5e-2 && m.relative_residual < 1e-3 && d.decreasing && m.decreasing;
            pass &= ok;
            rows.push(format!("t={t} E={e}: {:.1e}/{:.1e} (scale {:.0e})", d.relative_residual, m.relative_residual, m.scale));
        }
    }
    // the same residual with the coefficients the kernel satisfies, on a set
    // without reflection symmetry where the equation is not identically 0 = 0
    let fd = PearceyFdConfig { form: PearceyForm::Corrected, chart: ChartKind::Orbit, ..Default::default() };
    let asym = set("-1,1.3");
    let printed = residual_pearcey_pde_mp(0.0, &asym, &PearceyFdConfig { chart: ChartKind::Orbit, ..Default::default() }, 30)
        .unwrap()
        .relative_residual;
    let corrected = residual_pearcey_pde_mp(0.0, &asym, &fd, 30).unwrap().relative_residual;
    let (fast, time) = within(Duration::from_secs(3600), start.elapsed());
    verdict(
        pass && fast,
        format!(
            "double/30-digit relative residuals {}; on E=[-1,1.3]: printed {printed:.1e}, \
             with 8 Q_ttt and 4 {{.,.}} {corrected:.1e}; {time}",
            rows.join("; ")
        ),
    )
}

fn c11_scaling() -> Verdict {
    let g = set("-1,1");
    let r = scaling_limit_report(0.0, &g, &[8, 32, 128], &PrecisionConfig::with_digits(30)).unwrap();
    let diffs: Vec<f64> = r.rows.iter().map(|row| row.abs_diff).collect();
    let slope = r.slope.unwrap_or(f64::NAN);
    let c = 2f64.powf(1.75);
    let q_wide = fredholm_log_det(0.0, &g.scale(&c), 80).unwrap();
    let wide: Vec<f64> = r.rows.iter().map(|row| (row.q_z - q_wide).abs()).collect();
    verdict(
        r.strictly_decreasing && slope > 0.0,
        format!(
            "|Q_z - Q| = {diffs:.4?}, slope {slope:.3}; against Q on 2^(7/4)·G the gaps are {wide:.4?}"
        ),
    )
}

fn main() {
    // cargo passes harness flags such as --nocapture; none apply here
    let filter: Option<String> = std::env::args().skip(1).find(|a| !a.starts_with('-'));
    let criteria: [(&str, fn() -> Verdict); 11] = [
        ("normalization closed form", c1_normalization),
        ("Monte Carlo vs determinant", c2_monte_carlo),
        ("duality a -> -a, k1 <-> k2", c3_duality),
        ("two-point integral oracle", c4_integral_oracle),
        ("integrable identities", c5_identities),
        ("PDE in (a; E)", c6_source_pde),
        ("Pearcey functions", c7_pearcey_functions),
        ("kernel representations", c8_kernel_forms),
        ("Fredholm determinant", c9_fredholm),
        ("Pearcey PDE", c10_pearcey_pde),
        ("scaling limit", c11_scaling),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        if let Some(flt) = &filter {
            if flt.parse::<usize>().ok() != Some(n) {
                continue;
            }
        }
        let v = f();
        if !v.pass {
            failures += 1;
        }
        println!("{} {n:>2} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
    }
    println!("acceptance: {failures} failing");
    if failures > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
