//! Dense determinants by LU with full pivoting.

use crate::domain::SignedLogValue;
use crate::real::Real;

#[derive(Clone, Debug)]
pub struct Determinant<R: Real> {
    pub value: SignedLogValue<R>,
    /// min |pivot| / max |pivot| of the equilibrated factorization; a rough
    /// measure of how many digits the elimination consumed.
    pub pivot_ratio: f64,
}

/// Determinant of a square row-major matrix. Rows and then columns are
/// scaled to unit max-norm before elimination; the scale factors are folded
/// back into the log-magnitude.
pub fn determinant<R: Real>(mut m: Vec<Vec<R>>) -> Determinant<R> {
    let n = m.len();
    if n == 0 {
        return Determinant { value: SignedLogValue::one(), pivot_ratio: 1.0 };
    }
    let mut sign: i8 = 1;
    let mut log_scale = R::zero();

    for row in m.iter_mut() {
        let big = row.iter().fold(R::zero(), |acc, x| R::max_of(acc, x.abs()));
        if big.is_zero() {
            return Determinant { value: SignedLogValue::zero(), pivot_ratio: 0.0 };
        }
        log_scale += big.ln();
        for x in row.iter_mut() {
            *x /= big.clone();
        }
    }
    for j in 0..n {
        let big = (0..n).fold(R::zero(), |acc, i| R::max_of(acc, m[i][j].abs()));
        if big.is_zero() {
            return Determinant { value: SignedLogValue::zero(), pivot_ratio: 0.0 };
        }
        log_scale += big.ln();
        for row in m.iter_mut() {
            row[j] /= big.clone();
        }
    }

    let mut max_pivot = 0.0f64;
    let mut min_pivot = f64::INFINITY;
    let mut log_abs = log_scale;
    for k in 0..n {
        let (mut pi, mut pj) = (k, k);
        let mut best = R::zero();
        for (i, row) in m.iter().enumerate().skip(k) {
            for (j, x) in row.iter().enumerate().skip(k) {
                let ax = x.abs();
                if ax > best {
                    best = ax;
                    pi = i;
                    pj = j;
                }
            }
        }
        if best.is_zero() {
            return Determinant { value: SignedLogValue::zero(), pivot_ratio: 0.0 };
        }
        if pi != k {
            m.swap(pi, k);
            sign = -sign;
        }
        if pj != k {
            for row in m.iter_mut() {
                row.swap(pj, k);
            }
            sign = -sign;
        }
        let pivot = m[k][k].clone();
        let pf = best.to_f64();
        max_pivot = max_pivot.max(pf);
        min_pivot = min_pivot.min(pf);
        if pivot < R::zero() {
            sign = -sign;
        }
        log_abs += best.ln();
        let (upper, lower) = m.split_at_mut(k + 1);
        let prow = &upper[k];
        for row in lower.iter_mut() {
            if row[k].is_zero() {
                continue;
            }
            let factor = row[k].clone() / pivot.clone();
            for j in k + 1..n {
                let delta = factor.clone() * prow[j].clone();
                row[j] -= delta;
            }
        }
    }
    Determinant { value: SignedLogValue::from_parts(sign, log_abs), pivot_ratio: min_pivot / max_pivot }
}

/// Number of decimal digits the elimination appears to have lost.
pub fn digits_lost(pivot_ratio: f64) -> f64 {
    if pivot_ratio <= 0.0 {
        f64::INFINITY
    } else {
        -pivot_ratio.log10()
    }
}
