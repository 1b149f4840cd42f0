//! Monte Carlo sampling of the external-source ensemble, and the change of
//! variables from non-intersecting Brownian motions to that ensemble.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{IntervalUnion, PrecisionConfig, SourceSpec};
use crate::error::{Error, Result};
use crate::quad;
use crate::real::{with_digits, Mp, Real};
use crate::tau::log_gap_probability;

/// Samples drawn from one random substream.
const CHUNK: u64 = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.samples == 0 {
            return Err(Error::invalid("samples must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub p_hat: f64,
    pub std_err: f64,
    pub hits: u64,
    pub samples: u64,
    pub seed: u64,
}

impl McEstimate {
    fn from_hits(hits: u64, cfg: &McConfig) -> Self {
        let p = hits as f64 / cfg.samples as f64;
        McEstimate {
            p_hat: p,
            std_err: (p * (1.0 - p) / cfg.samples as f64).sqrt(),
            hits,
            samples: cfg.samples,
            seed: cfg.seed,
        }
    }
}

/// Eigenvalues of M = A + H, ascending. H has N(0,1) diagonal entries and
/// off-diagonal entries whose real and imaginary parts are N(0, 1/2);
/// A = diag(a × k1, -a × k2).
pub fn sample_spectrum<G: Rng>(spec: &SourceSpec, rng: &mut G) -> Vec<f64> {
    let n = spec.n();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        let shift = if i < spec.k1 { spec.a } else { -spec.a };
        let d: f64 = rng.sample(StandardNormal);
        m[(i, i)] = Complex64::new(d + shift, 0.0);
        for j in i + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(re * s, im * s);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    let mut ev: Vec<f64> = if n == 1 {
        vec![m[(0, 0)].re]
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    ev.sort_by(f64::total_cmp);
    ev
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Frequency of {all eigenvalues in E_j} for each set, from one shared
/// stream of samples. Nested sets therefore give pathwise-monotone counts.
pub fn mc_gap_probability_nested(spec: &SourceSpec, sets: &[IntervalUnion], cfg: &McConfig) -> Result<Vec<McEstimate>> {
    spec.validate()?;
    cfg.validate()?;
    let chunks = cfg.samples.div_ceil(CHUNK);
    let counts: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(cfg.seed, c);
            let len = CHUNK.min(cfg.samples - c * CHUNK);
            let mut hits = vec![0u64; sets.len()];
            for _ in 0..len {
                let ev = sample_spectrum(spec, &mut rng);
                for (h, e) in hits.iter_mut().zip(sets) {
                    if ev.iter().all(|x| e.contains(x)) {
                        *h += 1;
                    }
                }
            }
            hits
        })
        .collect();
    let mut total = vec![0u64; sets.len()];
    for c in counts {
        for (t, h) in total.iter_mut().zip(c) {
            *t += h;
        }
    }
    Ok(total.into_iter().map(|h| McEstimate::from_hits(h, cfg)).collect())
}

pub fn mc_gap_probability(spec: &SourceSpec, e: &IntervalUnion, cfg: &McConfig) -> Result<McEstimate> {
    Ok(mc_gap_probability_nested(spec, std::slice::from_ref(e), cfg)?.remove(0))
}

/// (u, V) with u = a √(2t/(1-t)) and V = E √(2/(t(1-t))).
pub fn brownian_to_source(t: f64, a: f64, e: &IntervalUnion) -> Result<(f64, IntervalUnion)> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("time {t} is outside (0, 1)")));
    }
    let u = a * (2.0 * t / (1.0 - t)).sqrt();
    let v = e.scale(&(2.0 / (t * (1.0 - t))).sqrt());
    Ok((u, v))
}

/// Avoidance probability of one pair of non-intersecting Brownian bridges
/// from 0 to ±a, at time t, from the path density integrated over E².
pub fn brownian_pair_probability(t: f64, a: f64, e: &IntervalUnion) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::invalid(format!("time {t} is outside (0, 1)")));
    }
    let var = t * (1.0 - t);
    let w = |x: f64, sign: f64| (-x * x / var + sign * 2.0 * a * x / (1.0 - t)).exp();
    let density = |x: f64, y: f64| (y - x) * w(x, 1.0) * w(y, -1.0);
    // effective support: centre ±a t, width √(t(1-t)/2)
    let reach = a.abs() * t + 12.0 * (var / 2.0).sqrt() + 1.0;
    let clip = |lo: f64, hi: f64| (lo.max(-reach), hi.min(reach));
    let mass = |set: &[(f64, f64)]| {
        let mut total = 0.0;
        for &(xl, xh) in set {
            for &(yl, yh) in set {
                let (xl, xh) = clip(xl, xh);
                let (yl, yh) = clip(yl, yh);
                if xh > xl && yh > yl {
                    total += quad::integrate_2d(density, (xl, xh), (yl, yh), 1e-16, 1e-13).value;
                }
            }
        }
        total
    };
    let line = [(f64::NEG_INFINITY, f64::INFINITY)];
    Ok(mass(e.intervals()) / mass(&line))
}

/// Log-probability Q_z that n = 2k non-intersecting paths avoid z·G at
/// time 1/2 + s z², z = (2/n)^{1/4}, source ±1/z² (sign eps).
pub fn scaled_qz(s: f64, gap: &IntervalUnion, n: usize, eps: i8, prec: &PrecisionConfig) -> Result<f64> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::invalid("n must be an even integer >= 2"));
    }
    if !gap.is_bounded() {
        return Err(Error::Unbounded("the scaled gap set must be compact"));
    }
    if eps != 1 && eps != -1 {
        return Err(Error::invalid("eps must be +1 or -1"));
    }
    prec.validate()?;
    if gap.is_empty() {
        return Ok(0.0);
    }
    let z = (2.0 / n as f64).powf(0.25);
    let z2 = z * z;
    if (s * z2).abs() >= 0.5 {
        return Err(Error::invalid("need |s| z^2 < 1/2"));
    }
    let k = n / 2;
    // the moment matrix loses about two digits per row
    let digits = prec.significant_digits + 2 * n as u32;
    with_digits(digits, || {
        let s = Mp::from_f64(s);
        let z = (Mp::from_i64(2) / Mp::from_i64(n as i64)).powf(&(Mp::one() / Mp::from_i64(4)));
        let z2 = z.clone() * z.clone();
        let half = Mp::one() / Mp::from_i64(2);
        let ratio = (half.clone() + s.clone() * z2.clone()) / (half.clone() - s.clone() * z2.clone());
        let u = Mp::from_i64(eps as i64) * Mp::from_i64(2).sqrt() / z2.clone() * ratio.sqrt();
        let quarter = half.clone() * half;
        let scale = z * Mp::from_i64(2).sqrt() / (quarter - s.clone() * s * z2.clone() * z2).sqrt();
        let avoid = gap.to_mp().scale(&scale).complement();
        log_gap_probability(&u, k, k, &avoid).map(|v| v.to_f64())
    })
}
