//! Gaussian moments ∫_E z^k exp(-z²/2 + az) dz and their deformations.

use crate::domain::IntervalUnion;
use crate::error::{Error, Result};
use crate::quad;
use crate::real::{with_bits, working_bits, Real};

/// Standard normal CDF difference Φ(hi) - Φ(lo), arranged to avoid
/// cancellation in either tail.
fn normal_mass<R: Real>(lo: &R, hi: &R) -> R {
    let half = R::one() / R::from_i64(2);
    let rt2 = R::from_i64(2).sqrt();
    let upper = |x: &R| -> R {
        if !x.is_finite() {
            return if *x > R::zero() { R::zero() } else { R::one() };
        }
        half.clone() * (x.clone() / rt2.clone()).erfc()
    };
    let lower = |x: &R| -> R {
        if !x.is_finite() {
            return if *x > R::zero() { R::one() } else { R::zero() };
        }
        half.clone() * (-(x.clone()) / rt2.clone()).erfc()
    };
    if *lo > R::zero() {
        upper(lo) - upper(hi)
    } else {
        lower(hi) - lower(lo)
    }
}

/// μ_k(a; E) for k = 0..=kmax by the three-term recurrence.
///
/// Digits lost to cancellation are estimated from the magnitude recurrence
/// g_k = |a| g_{k-1} + (k-1) g_{k-2} + |boundary terms|; when the estimate
/// exceeds the guard the computation is repeated with more guard bits.
pub fn gaussian_moments<R: Real>(kmax: usize, a: &R, e: &IntervalUnion<R>) -> Vec<R> {
    let base = working_bits();
    let mut guard = 32;
    loop {
        let (mu, lost_bits) = with_bits(base + guard, || moments_pass(kmax, a, e));
        if lost_bits + 16.0 <= guard as f64 || R::precision_bits() == 53 || guard > base * 4 {
            return mu;
        }
        guard = lost_bits.ceil() as u32 + 32;
    }
}

fn moments_pass<R: Real>(kmax: usize, a: &R, e: &IntervalUnion<R>) -> (Vec<R>, f64) {
    let two = R::from_i64(2);
    let scale = (two.clone() * R::pi()).sqrt() * (a.clone() * a.clone() / two.clone()).exp();
    let mut mu0 = R::zero();
    for (lo, hi) in e.intervals() {
        mu0 += normal_mass(&(lo.clone() - a.clone()), &(hi.clone() - a.clone()));
    }
    mu0 *= scale.clone();

    // finite boundary points with orientation: +1 for an upper end, -1 for a lower end
    let mut ends: Vec<(R, R, R)> = Vec::new(); // (z, w(z), orientation)
    for (lo, hi) in e.intervals() {
        for (z, orient) in [(hi, 1i64), (lo, -1i64)] {
            if z.is_finite() {
                let w = (-(z.clone() * z.clone()) / two.clone() + a.clone() * z.clone()).exp();
                ends.push((z.clone(), w, R::from_i64(orient)));
            }
        }
    }

    let mut mu = Vec::with_capacity(kmax + 1);
    let mut g: Vec<R> = Vec::with_capacity(kmax + 1);
    mu.push(mu0.clone());
    g.push(mu0.abs());
    // powers z^{k-1} w(z) at each boundary point, updated in place
    let mut zp: Vec<R> = ends.iter().map(|(_, w, _)| w.clone()).collect();
    for k in 1..=kmax {
        let mut boundary = R::zero();
        let mut boundary_mag = R::zero();
        for (idx, (z, _, orient)) in ends.iter().enumerate() {
            if k >= 2 {
                zp[idx] *= z.clone();
            }
            boundary += orient.clone() * zp[idx].clone();
            boundary_mag += zp[idx].abs();
        }
        let km1 = R::from_i64(k as i64 - 1);
        let prev2 = if k >= 2 { mu[k - 2].clone() } else { R::zero() };
        let gprev2 = if k >= 2 { g[k - 2].clone() } else { R::zero() };
        let next = a.clone() * mu[k - 1].clone() + km1.clone() * prev2 - boundary;
        let gnext = a.abs() * g[k - 1].clone() + km1 * gprev2 + boundary_mag;
        mu.push(next);
        g.push(gnext);
    }
    let half_bits = R::precision_bits() as f64 / 2.0;
    let mut lost = 0.0f64;
    for (m, gk) in mu.iter().zip(&g) {
        let gm = gk.to_f64();
        let mm = m.abs().to_f64();
        if gm > 0.0 && gm.is_finite() {
            let l = if mm > 0.0 { (gm / mm).log2() } else { half_bits };
            lost = lost.max(l.min(half_bits));
        }
    }
    (mu, lost)
}

/// ∫_E z^k exp(-z²/2 + lin·z + quad·z²) dz for k = 0..=kmax via the rescaling
/// z = w/√c, c = 1 - 2·quad.
pub fn quadratic_exponent_moments<R: Real>(kmax: usize, lin: &R, quad: &R, e: &IntervalUnion<R>) -> Result<Vec<R>> {
    if quad.is_zero() {
        return Ok(gaussian_moments(kmax, lin, e));
    }
    let c = R::one() - R::from_i64(2) * quad.clone();
    if c <= R::zero() {
        return Err(Error::Divergent(format!("quadratic coefficient {quad} leaves no Gaussian decay")));
    }
    let rc = c.sqrt();
    let scaled = e.scale(&rc);
    let mu = gaussian_moments(kmax, &(lin.clone() / rc.clone()), &scaled);
    let mut factor = R::one() / rc.clone();
    let inv = R::one() / rc;
    Ok(mu
        .into_iter()
        .map(|m| {
            let v = m * factor.clone();
            factor *= inv.clone();
            v
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Plus,
    Minus,
}

/// Truncated deformation times: t_k, s_k, u_k stored from k = 1, plus β.
#[derive(Clone, Debug, PartialEq)]
pub struct DeformationPoint<R = f64> {
    pub t: Vec<R>,
    pub s: Vec<R>,
    pub u: Vec<R>,
    pub beta: R,
}

impl<R: Real> Default for DeformationPoint<R> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<R: Real> DeformationPoint<R> {
    pub fn zero() -> Self {
        DeformationPoint { t: Vec::new(), s: Vec::new(), u: Vec::new(), beta: R::zero() }
    }

    fn get(v: &[R], k: usize) -> R {
        v.get(k - 1).cloned().unwrap_or_else(R::zero)
    }

    pub fn set(v: &mut Vec<R>, k: usize, value: R) {
        if v.len() < k {
            v.resize(k, R::zero());
        }
        v[k - 1] = value;
    }

    /// Coefficients c_1..c_d of the perturbation Σ c_k z^k added to
    /// -z²/2 for the given branch and source strength.
    pub fn exponent_coefficients(&self, branch: Branch, a: &R) -> Vec<R> {
        let len = self.t.len().max(self.s.len()).max(self.u.len()).max(2);
        let mut c = Vec::with_capacity(len);
        for k in 1..=len {
            let other = match branch {
                Branch::Plus => Self::get(&self.s, k),
                Branch::Minus => Self::get(&self.u, k),
            };
            c.push(Self::get(&self.t, k) - other);
        }
        match branch {
            Branch::Plus => {
                c[0] += a.clone();
                c[1] += self.beta.clone();
            }
            Branch::Minus => {
                c[0] -= a.clone();
                c[1] -= self.beta.clone();
            }
        }
        while c.len() > 2 && c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        c
    }
}

#[derive(Clone, Debug)]
pub struct MomentRequest<R = f64> {
    pub i: usize,
    pub j: usize,
    pub branch: Branch,
    pub a: R,
    pub deform: DeformationPoint<R>,
    pub e: IntervalUnion<R>,
}

/// All moments ∫_E z^k e^{V(z)} for k ≤ kmax on one branch. Degree ≤ 2
/// exponents use the exact rescaled recurrence; higher degrees fall back to
/// `f64` quadrature.
pub fn branch_moments<R: Real>(
    kmax: usize,
    branch: Branch,
    a: &R,
    deform: &DeformationPoint<R>,
    e: &IntervalUnion<R>,
) -> Result<Vec<R>> {
    let c = deform.exponent_coefficients(branch, a);
    check_convergence(&c, e)?;
    if c.len() <= 2 {
        return quadratic_exponent_moments(kmax, &c[0], &c[1], e);
    }
    let cf: Vec<f64> = c.iter().map(|x| x.to_f64()).collect();
    let ef = e.to_f64();
    Ok((0..=kmax).map(|k| R::from_f64(moment_quadrature(k, &cf, &ef, 1e-30, 1e-14))).collect())
}

fn check_convergence<R: Real>(c: &[R], e: &IntervalUnion<R>) -> Result<()> {
    if e.is_bounded() {
        return Ok(());
    }
    let d = c.len();
    let lead = if d == 2 { c[1].to_f64() - 0.5 } else { c[d - 1].to_f64() };
    let even = d % 2 == 0;
    if d == 2 && lead >= 0.0 {
        return Err(Error::Divergent("need |beta + t2 - s2| < 1/2 on an unbounded set".into()));
    }
    if d > 2 && (!even || lead >= 0.0) {
        return Err(Error::Divergent(format!("degree-{d} exponent does not decay on an unbounded set")));
    }
    Ok(())
}

/// Moment for a single request.
pub fn deformed_moment<R: Real>(req: &MomentRequest<R>) -> Result<R> {
    if req.i == 0 {
        return Err(Error::invalid("moment row index starts at 1"));
    }
    let k = req.i + req.j - 1;
    let all = branch_moments(k, req.branch, &req.a, &req.deform, &req.e)?;
    Ok(all[k].clone())
}

fn exponent_poly(c: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    for coef in c.iter().rev() {
        acc = (acc + coef) * z;
    }
    acc - 0.5 * z * z
}

/// Adaptive Gauss-Kronrod value of ∫_E z^k exp(-z²/2 + Σ c_j z^j) dz.
/// Unbounded ends are cut where the log-integrand falls to
/// log(abs_tol) - 50 below its peak.
pub fn moment_quadrature(k: usize, c: &[f64], e: &IntervalUnion<f64>, abs_tol: f64, rel_tol: f64) -> f64 {
    let logf = |z: f64| exponent_poly(c, z) + if k > 0 { k as f64 * z.abs().max(1e-300).ln() } else { 0.0 };
    // scan for the peak over the part of [-60, 60] covered by E
    let (mut peak, mut zpk) = (f64::NEG_INFINITY, 0.0);
    for &(lo, hi) in e.intervals() {
        let (lo, hi) = (lo.max(-60.0), hi.min(60.0));
        let steps = ((hi - lo) / 0.05).ceil().max(1.0) as usize;
        for i in 0..=steps {
            let z = lo + (hi - lo) * i as f64 / steps as f64;
            let v = logf(z);
            if v > peak {
                peak = v;
                zpk = z;
            }
        }
    }
    let cut = peak + abs_tol.ln() - 50.0;
    let radius = |dir: f64| {
        let mut r = zpk;
        while logf(r) > cut && r.abs() < 1e4 {
            r += dir * 0.25;
        }
        r
    };
    let (left, right) = (radius(-1.0), radius(1.0));
    let shift = peak.min(600.0);
    let f = |z: f64| (logf(z) - shift).exp() * if k % 2 == 1 && z < 0.0 { -1.0 } else { 1.0 };
    let mut total = 0.0;
    for &(lo, hi) in e.intervals() {
        let lo = if lo.is_finite() { lo } else { left.min(hi) };
        let hi = if hi.is_finite() { hi } else { right.max(lo) };
        if hi > lo {
            let panels = ((hi - lo) / 0.5).ceil().clamp(1.0, 400.0) as usize;
            total += quad::integrate(f, lo, hi, abs_tol * (-shift).exp(), rel_tol, panels).value;
        }
    }
    total * shift.exp()
}

/// Half-width L of the box [-L, L] whose discarded Gaussian tails are
/// negligible for moments up to `kmax` at the given number of digits.
pub fn truncation_radius(a: f64, kmax: usize, digits: u32) -> f64 {
    let target = (digits as f64 + 10.0) * std::f64::consts::LN_10;
    let logf = |z: f64| -0.5 * z * z + a.abs() * z + kmax as f64 * z.max(1.0).ln();
    let peak = (0..4000).map(|i| logf(i as f64 * 0.02)).fold(f64::NEG_INFINITY, f64::max);
    let mut l = a.abs() + (kmax as f64).sqrt() + 1.0;
    while logf(l) - peak > -target - 5.0 {
        l += 0.25;
    }
    l
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{with_digits, Mp};

    #[test]
    fn closed_moments_on_line() {
        let r = IntervalUnion::<f64>::real_line();
        let m = gaussian_moments(4, &0.0, &r);
        let s = (2.0 * std::f64::consts::PI).sqrt();
        assert!((m[0] - s).abs() < 1e-14);
        assert!(m[1].abs() < 1e-14);
        assert!((m[2] - s).abs() < 1e-13);
        assert!((m[4] - 3.0 * s).abs() < 1e-12);
    }

    #[test]
    fn closed_moment_matches_quadrature() {
        let e = IntervalUnion::interval(0.0, 1.0).unwrap();
        let m = with_digits(40, || gaussian_moments(2, &Mp::from_f64(1.0), &e.to_mp())[2].to_f64());
        let q = moment_quadrature(2, &[1.0], &e, 1e-16, 1e-15);
        assert!(((m - q) / m).abs() < 1e-12, "{m} {q}");
    }

    #[test]
    fn quadratic_rescaling_matches_quadrature() {
        let e = IntervalUnion::interval(-1.5, 2.0).unwrap();
        let m = with_digits(40, || {
            quadratic_exponent_moments(5, &Mp::from_f64(0.7), &Mp::from_f64(0.1), &e.to_mp()).unwrap()[5].to_f64()
        });
        let q = moment_quadrature(5, &[0.7, 0.1], &e, 1e-16, 1e-15);
        assert!(((m - q) / m).abs() < 1e-12, "{m} {q}");
    }

    #[test]
    fn divergent_exponent_rejected() {
        let d = DeformationPoint { t: vec![0.0, 0.6], s: vec![], u: vec![], beta: 0.0 };
        let r = branch_moments(2, Branch::Plus, &0.0, &d, &IntervalUnion::real_line());
        assert!(matches!(r, Err(Error::Divergent(_))));
        let d3 = DeformationPoint { t: vec![0.0, 0.0, 0.1], s: vec![], u: vec![], beta: 0.0 };
        assert!(branch_moments(2, Branch::Plus, &0.0, &d3, &IntervalUnion::real_line()).is_err());
        let bounded = IntervalUnion::interval(-1.0, 1.0).unwrap();
        assert!(branch_moments(2, Branch::Plus, &0.0, &d3, &bounded).is_ok());
    }

    #[test]
    fn truncation_radius_grows_with_order() {
        assert!(truncation_radius(1.0, 20, 40) > truncation_radius(1.0, 2, 40));
        assert!(truncation_radius(1.0, 4, 40) < 40.0);
    }
}
