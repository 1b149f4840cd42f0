//! The Pearcey integrals p, q and their derivatives.
//!
//! `f64` values come from adaptive quadrature of the integral
//! representations. Extended-precision values come from the Taylor series
//! at the origin, whose coefficients follow from the third-order ODEs
//! p''' = t p' + x p and q''' = t q' - y q.

use num_complex::Complex64;

use crate::quad;
use crate::real::{with_bits, working_bits, Real};

/// Default absolute tolerance of the quadrature path.
pub const ABS_TOL: f64 = 1e-14;

/// Smallest u ≥ 1 past which e^{-u⁴/4 - t u²/2 + c u} u^d stays below
/// abs_tol · 1e-5 (relative to 1).
pub fn radius(t: f64, growth: f64, d: usize, abs_tol: f64) -> f64 {
    let target = abs_tol.ln() - 5.0 * std::f64::consts::LN_10;
    let logf = |u: f64| -u.powi(4) / 4.0 - t * u * u / 2.0 + growth * u + d as f64 * u.ln();
    let mut u = 1.0f64;
    // past the peak first, then until the tail is negligible
    while u < 1e3 && !(logf(u) < target && logf(u + 0.1) < logf(u)) {
        u += 0.1;
    }
    u
}

fn trig(d: usize, v: f64) -> f64 {
    match d % 4 {
        0 => v.cos(),
        1 => -v.sin(),
        2 => -v.cos(),
        _ => v.sin(),
    }
}

/// d-th derivative of p(x) = (1/π)∫₀^∞ e^{-u⁴/4 - t u²/2} cos(ux) du.
pub fn pearcey_p(x: f64, t: f64, d: usize) -> f64 {
    pearcey_p_tol(x, t, d, ABS_TOL)
}

pub fn pearcey_p_tol(x: f64, t: f64, d: usize, abs_tol: f64) -> f64 {
    let r = radius(t, 0.0, d, abs_tol);
    let panels = ((r * x.abs() / std::f64::consts::PI).ceil() as usize).max(8);
    let f = |u: f64| (-u.powi(4) / 4.0 - t * u * u / 2.0).exp() * u.powi(d as i32) * trig(d, u * x);
    quad::integrate(f, 0.0, r, abs_tol * 0.1, 1e-15, panels).value / std::f64::consts::PI
}

/// d-th derivative of q(y) = Im[(ω/π)∫₀^∞ e^{-u⁴/4 - i t u²/2}(e^{ωuy} - e^{-ωuy}) du],
/// ω = e^{iπ/4}.
pub fn pearcey_q(y: f64, t: f64, d: usize) -> f64 {
    pearcey_q_tol(y, t, d, ABS_TOL)
}

pub fn pearcey_q_tol(y: f64, t: f64, d: usize, abs_tol: f64) -> f64 {
    let w = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
    let r = radius(0.0, y.abs() / std::f64::consts::SQRT_2, d, abs_tol);
    let panels = ((r * (y.abs() + t.abs() * r) / std::f64::consts::PI).ceil() as usize).max(8);
    let sign = if d % 2 == 0 { 1.0 } else { -1.0 };
    let f = |u: f64| {
        let base = Complex64::new(-u.powi(4) / 4.0, -t * u * u / 2.0).exp();
        let wu = w * u;
        let v = w / std::f64::consts::PI * base * wu.powi(d as i32) * ((wu * y).exp() - sign * (-wu * y).exp());
        v.im
    };
    quad::integrate(f, 0.0, r, abs_tol * 0.1, 1e-15, panels).value
}

/// Residuals p''' - t p' - x p and q''' - t q' + y q from independent quadratures.
pub fn ode_residuals(x: f64, y: f64, t: f64) -> (f64, f64) {
    let rp = pearcey_p(x, t, 3) - t * pearcey_p(x, t, 1) - x * pearcey_p(x, t, 0);
    let rq = pearcey_q(y, t, 3) - t * pearcey_q(y, t, 1) + y * pearcey_q(y, t, 0);
    (rp, rq)
}

/// Values (f, f', f'') of p at x and of q at y.
pub trait PearceyEngine<R: Real>: Sync {
    fn t(&self) -> R;
    fn p(&self, x: &R) -> [R; 3];
    fn q(&self, y: &R) -> [R; 3];
}

/// Quadrature engine in double precision.
#[derive(Clone, Copy, Debug)]
pub struct QuadEngine {
    pub t: f64,
    pub abs_tol: f64,
}

impl QuadEngine {
    pub fn new(t: f64) -> Self {
        QuadEngine { t, abs_tol: ABS_TOL }
    }
}

impl PearceyEngine<f64> for QuadEngine {
    fn t(&self) -> f64 {
        self.t
    }
    fn p(&self, x: &f64) -> [f64; 3] {
        [0, 1, 2].map(|d| pearcey_p_tol(*x, self.t, d, self.abs_tol))
    }
    fn q(&self, y: &f64) -> [f64; 3] {
        [0, 1, 2].map(|d| pearcey_q_tol(*y, self.t, d, self.abs_tol))
    }
}

/// ∫₀^∞ u^s e^{-u⁴/4 - t u²/2} du = Σ_m (-t/2)^m/m! · 4^{(s+2m+1)/4-1} Γ((s+2m+1)/4).
fn moment_series<R: Real>(s: usize, t: &R, tol: &R) -> R {
    let four = R::from_i64(4);
    let mut acc = R::zero();
    let mut coef = R::one(); // (-t/2)^m / m!
    for m in 0..10_000usize {
        let e = R::from_i64((s + 2 * m + 1) as i64) / four.clone();
        let term = coef.clone() * four.powf(&(e.clone() - R::one())) * e.gamma();
        acc += term.clone();
        if m > 2 && term.abs() <= tol.clone() * acc.abs() {
            break;
        }
        coef = coef * (-t.clone()) / R::from_i64(2 * (m as i64 + 1));
        if coef.is_zero() {
            break;
        }
    }
    acc
}

/// Taylor engine at the working precision at construction time.
#[derive(Clone, Debug)]
pub struct SeriesEngine<R> {
    t: R,
    pc: Vec<R>,
    qc: Vec<R>,
    bits: u32,
    /// Largest |x| at which the truncated series is trusted.
    pub reach: f64,
}

impl<R: Real> SeriesEngine<R> {
    /// Series good for |x| ≤ reach; extra guard bits absorb the
    /// cancellation between growing terms.
    pub fn new(t: &R, reach: f64) -> Self {
        let bits = working_bits();
        let guard = (0.75 * reach.powf(4.0 / 3.0) * std::f64::consts::LOG2_E).ceil() as u32 + 32;
        let (pc, qc) = with_bits(bits + guard, || {
            let t = t.clone();
            let eps = R::epsilon();
            let pi = R::pi();
            let p0 = moment_series(0, &t, &eps) / pi.clone();
            // Taylor coefficient p''(0)/2
            let p2 = -moment_series(2, &t, &eps) / (pi.clone() * R::from_i64(2));
            // q'(0) = (2/π) Σ_j (-1)^j (t/2)^{2j}/(2j)! 4^{j-1/2} Γ(j+1/2)
            let mut q1 = R::zero();
            let mut c = R::one();
            let half = R::one() / R::from_i64(2);
            for j in 0..10_000i64 {
                let jr = R::from_i64(j);
                let term = c.clone() * (R::from_i64(4).ln() * (jr.clone() - half.clone())).exp() * (jr + half.clone()).gamma();
                q1 += term.clone();
                if j > 2 && term.abs() <= eps.clone() * q1.abs() {
                    break;
                }
                c = -c * t.clone() * t.clone() / R::from_i64(4) / R::from_i64((2 * j + 1) * (2 * j + 2));
                if c.is_zero() {
                    break;
                }
            }
            q1 = q1 * R::from_i64(2) / pi;
            let pc = taylor(&t, [p0, R::zero(), p2], 1, reach);
            let qc = taylor(&t, [R::zero(), q1, R::zero()], -1, reach);
            (pc, qc)
        });
        SeriesEngine { t: t.clone(), pc, qc, bits: bits + guard, reach }
    }

    pub fn terms(&self) -> usize {
        self.pc.len().max(self.qc.len())
    }
}

/// Coefficients with (k+3)(k+2)(k+1)c_{k+3} = t(k+1)c_{k+1} + sgn c_{k-1}.
fn taylor<R: Real>(t: &R, seed: [R; 3], sgn: i64, reach: f64) -> Vec<R> {
    let mut c: Vec<R> = seed.to_vec();
    let eps = R::epsilon().to_f64().max(1e-300);
    let lr = reach.max(1.0).ln();
    let mut small = 0;
    let mut k = 0usize;
    while small < 8 && c.len() < 20_000 {
        let prev = if k >= 1 { c[k - 1].clone() } else { R::zero() };
        let num = t.clone() * R::from_i64(k as i64 + 1) * c[k + 1].clone() + R::from_i64(sgn) * prev;
        let next = num / R::from_i64(((k + 3) * (k + 2) * (k + 1)) as i64);
        let mag = next.abs().to_f64();
        let n = c.len() as f64;
        // magnitude of the second-derivative term at the reach
        let log_term = if mag > 0.0 { mag.ln() + n * lr + 2.0 * n.ln() } else { f64::NEG_INFINITY };
        small = if log_term < eps.ln() - 10.0 { small + 1 } else { 0 };
        c.push(next);
        k += 1;
    }
    c
}

fn horner<R: Real>(c: &[R], x: &R, d: usize) -> R {
    let mut acc = R::zero();
    for k in (d..c.len()).rev() {
        let f = ((k - d + 1)..=k).fold(1i64, |a, j| a * j as i64);
        acc = acc * x.clone() + c[k].clone() * R::from_i64(f);
    }
    acc
}

impl<R: Real> PearceyEngine<R> for SeriesEngine<R> {
    fn t(&self) -> R {
        self.t.clone()
    }
    fn p(&self, x: &R) -> [R; 3] {
        let out = with_bits(self.bits, || [0, 1, 2].map(|d| horner(&self.pc, x, d)));
        out.map(|v| round_to_working(v))
    }
    fn q(&self, y: &R) -> [R; 3] {
        let out = with_bits(self.bits, || [0, 1, 2].map(|d| horner(&self.qc, y, d)));
        out.map(|v| round_to_working(v))
    }
}

fn round_to_working<R: Real>(v: R) -> R {
    // arithmetic with a fresh zero rounds Mp values to the caller's precision
    R::zero() + v
}

/// Derivatives (f, f', ..., f^{(order)}) of p at x from (p, p', p'') via
/// p^{(k+3)} = t p^{(k+1)} + x p^{(k)} + k p^{(k-1)}.
pub fn extend_p<R: Real>(base: &[R; 3], x: &R, t: &R, order: usize) -> Vec<R> {
    extend(base, x, t, order, 1)
}

/// Same for q: q^{(k+3)} = t q^{(k+1)} - y q^{(k)} - k q^{(k-1)}.
pub fn extend_q<R: Real>(base: &[R; 3], y: &R, t: &R, order: usize) -> Vec<R> {
    extend(base, y, t, order, -1)
}

fn extend<R: Real>(base: &[R; 3], x: &R, t: &R, order: usize, sgn: i64) -> Vec<R> {
    let mut v = base.to_vec();
    let s = R::from_i64(sgn);
    let mut k = 0usize;
    while v.len() <= order {
        let prev = if k >= 1 { R::from_i64(k as i64) * v[k - 1].clone() } else { R::zero() };
        v.push(t.clone() * v[k + 1].clone() + s.clone() * (x.clone() * v[k].clone() + prev));
        k += 1;
    }
    v.truncate(order + 1);
    v
}
