//! Moment determinants τ_{k1,k2}, their closed form on the real line, and
//! gap probabilities.

use crate::domain::{IntervalUnion, PrecisionConfig, SignedLogValue, SourceSpec};
use crate::error::{Error, Result};
use crate::linalg;
use crate::moments::{branch_moments, Branch, DeformationPoint};
use crate::real::{bits_to_digits, with_bits, with_digits, working_bits, Mp, Real};

pub mod identities;

/// Moment matrix: k1 rows of μ⁺ followed by k2 rows of μ⁻, row i holding
/// exponents i-1 .. i+n-2.
#[derive(Clone, Debug)]
pub struct MomentMatrix<R = Mp> {
    pub k1: usize,
    pub k2: usize,
    pub entries: Vec<Vec<R>>,
}

impl<R: Real> MomentMatrix<R> {
    pub fn build(a: &R, k1: usize, k2: usize, deform: &DeformationPoint<R>, e: &IntervalUnion<R>) -> Result<Self> {
        let n = k1 + k2;
        let mut entries = Vec::with_capacity(n);
        if k1 > 0 {
            let mu = branch_moments(k1 + n - 2, Branch::Plus, a, deform, e)?;
            for i in 1..=k1 {
                entries.push(mu[i - 1..i - 1 + n].to_vec());
            }
        }
        if k2 > 0 {
            let mu = branch_moments(k2 + n - 2, Branch::Minus, a, deform, e)?;
            for i in 1..=k2 {
                entries.push(mu[i - 1..i - 1 + n].to_vec());
            }
        }
        Ok(MomentMatrix { k1, k2, entries })
    }
}

const MAX_ESCALATIONS: u32 = 6;

/// τ_{k1,k2}(deform; E) as (sign, log|τ|). For `Mp` the computation is
/// repeated at doubled precision while the LU pivots indicate that more than
/// half of the working digits were lost.
pub fn tau_value<R: Real>(
    a: &R,
    k1: usize,
    k2: usize,
    deform: &DeformationPoint<R>,
    e: &IntervalUnion<R>,
) -> Result<SignedLogValue<R>> {
    if k1 + k2 == 0 {
        return Ok(SignedLogValue::one());
    }
    let base = working_bits();
    let mut bits = base;
    for attempt in 0..=MAX_ESCALATIONS {
        let det = with_bits(bits, || -> Result<_> {
            let m = MomentMatrix::build(a, k1, k2, deform, e)?;
            Ok(linalg::determinant(m.entries))
        })?;
        if R::precision_bits() == 53 {
            return Ok(det.value);
        }
        let digits = bits_to_digits(bits) as f64;
        if linalg::digits_lost(det.pivot_ratio) <= digits / 2.0 || det.value.is_zero() {
            return Ok(det.value);
        }
        if attempt == MAX_ESCALATIONS {
            return Err(Error::Precision(format!(
                "moment determinant n={} still ill-conditioned at {} digits",
                k1 + k2,
                digits
            )));
        }
        bits *= 2;
    }
    unreachable!()
}

/// Closed form τ(ℝ) = (-2)^{k1k2} (2π)^{n/2} ∏_{j<k1} j! ∏_{j<k2} j! · a^{k1k2} e^{n a²/2}.
pub fn tau_fullline_closed<R: Real>(a: &R, k1: usize, k2: usize) -> SignedLogValue<R> {
    let p = (k1 * k2) as i64;
    let n = (k1 + k2) as i64;
    if p > 0 && a.is_zero() {
        return SignedLogValue::zero();
    }
    let two = R::from_i64(2);
    let mut log_abs = R::from_i64(n) / two.clone() * (two.clone() * R::pi()).ln()
        + R::from_i64(n) * a.clone() * a.clone() / two.clone();
    if p > 0 {
        log_abs += R::from_i64(p) * (two * a.abs()).ln();
    }
    for k in [k1, k2] {
        for j in 2..k {
            log_abs += R::from_i64(j as i64 + 1).ln_gamma();
        }
    }
    let sign = if p % 2 == 1 && *a > R::zero() { -1 } else { 1 };
    SignedLogValue::from_parts(sign, log_abs)
}

/// log P_n(a; E) = log τ(E) - log τ(ℝ) at zero deformation.
pub fn log_gap_probability<R: Real>(a: &R, k1: usize, k2: usize, e: &IntervalUnion<R>) -> Result<R> {
    if k1 * k2 > 0 && a.is_zero() {
        return Err(Error::DegenerateSource);
    }
    if e.is_empty() {
        return Ok(R::neg_infinity());
    }
    let num = tau_value(a, k1, k2, &DeformationPoint::zero(), e)?;
    let den = tau_fullline_closed(a, k1, k2);
    let ratio = num.div(&den)?;
    match ratio.sign {
        1 => Ok(ratio.log_abs),
        0 => Ok(R::neg_infinity()),
        _ => Err(Error::Precision(format!("negative probability ratio, log|P| = {}", ratio.log_abs))),
    }
}

/// P_n(spec M ⊂ E) for the external-source ensemble.
pub fn gap_probability(spec: &SourceSpec, e: &IntervalUnion, prec: &PrecisionConfig) -> Result<f64> {
    spec.validate()?;
    prec.validate()?;
    if spec.is_degenerate() {
        return Err(Error::DegenerateSource);
    }
    with_digits(prec.significant_digits, || {
        let lp = log_gap_probability(&Mp::from_f64(spec.a), spec.k1, spec.k2, &e.to_mp())?;
        Ok(lp.to_f64().exp())
    })
}

/// τ over the box [-L, L] standing in for ℝ, with L from
/// [`crate::moments::truncation_radius`].
pub fn tau_truncated_line(spec: &SourceSpec, l: Option<f64>, prec: &PrecisionConfig) -> Result<SignedLogValue<f64>> {
    let n = spec.n();
    let l = l.unwrap_or_else(|| crate::moments::truncation_radius(spec.a, 2 * n, prec.significant_digits));
    with_digits(prec.significant_digits, || {
        let e = IntervalUnion::<Mp>::interval(Mp::from_f64(-l), Mp::from_f64(l))?;
        let v = tau_value(&Mp::from_f64(spec.a), spec.k1, spec.k2, &DeformationPoint::zero(), &e)?;
        Ok(SignedLogValue::from_parts(v.sign, v.log_abs.to_f64()))
    })
}
