//! The Pearcey kernel K_t(x, y).

use crate::pearcey::functions::{extend_q, pearcey_p, pearcey_q, PearceyEngine, QuadEngine};
use crate::quad;
use crate::real::Real;

/// N(x, y) = p(x) q''(y) - p'(x) q'(y) + p''(x) q(y) - t p(x) q(y).
pub fn numerator<R: Real>(p: &[R; 3], q: &[R; 3], t: &R) -> R {
    p[0].clone() * q[2].clone() - p[1].clone() * q[1].clone() + p[2].clone() * q[0].clone()
        - t.clone() * p[0].clone() * q[0].clone()
}

/// Threshold on |x - y| below which the Taylor form is used, and the number
/// of Taylor terms. Double precision keeps four terms at δ = 1e-4(1+|x|);
/// extended precision uses δ = 1e-3(1+|x|) with enough terms for δ^J < ε.
pub fn switch_rule<R: Real>(x: &R) -> (f64, usize) {
    let scale = 1.0 + x.to_f64().abs();
    if R::precision_bits() == 53 {
        (1e-4 * scale, 4)
    } else {
        let eps = R::epsilon().to_f64().max(1e-300);
        let delta = 1e-3 * scale;
        let j = (eps.ln() / delta.ln()).ceil().max(2.0) as usize + 1;
        (delta, j)
    }
}

/// K(x, y) from the values of p at x and q at y (and of q at x for the
/// near-diagonal expansion).
///
/// Near the diagonal K(x, x+η) = -Σ_{j≥1} η^{j-1} ∂_y^j N(x, x) / j!, with
/// ∂_y^j N = p q^{(2+j)} - p' q^{(1+j)} + p'' q^{(j)} - t p q^{(j)}.
pub fn kernel_from_values<R: Real>(x: &R, y: &R, t: &R, px: &[R; 3], qy: &[R; 3], qx: &[R; 3]) -> R {
    let eta = y.clone() - x.clone();
    let (delta, terms) = switch_rule(x);
    if eta.abs().to_f64() >= delta {
        return numerator(px, qy, t) / (x.clone() - y.clone());
    }
    let q = extend_q(qx, x, t, terms + 2);
    let mut acc = R::zero();
    let mut pow = R::one();
    let mut fact = R::one();
    for j in 1..=terms {
        fact *= R::from_i64(j as i64);
        let dn = px[0].clone() * q[2 + j].clone() - px[1].clone() * q[1 + j].clone() + px[2].clone() * q[j].clone()
            - t.clone() * px[0].clone() * q[j].clone();
        acc += pow.clone() * dn / fact.clone();
        pow *= eta.clone();
    }
    -acc
}

/// K(x, x) = x p q + p' q'' - p'' q'.
pub fn kernel_diagonal<R: Real>(x: &R, p: &[R; 3], q: &[R; 3]) -> R {
    x.clone() * p[0].clone() * q[0].clone() + p[1].clone() * q[2].clone() - p[2].clone() * q[1].clone()
}

pub fn kernel_with<R: Real, E: PearceyEngine<R>>(eng: &E, x: &R, y: &R) -> R {
    let t = eng.t();
    let px = eng.p(x);
    let qy = eng.q(y);
    let (delta, _) = switch_rule(x);
    if (y.clone() - x.clone()).abs().to_f64() >= delta {
        return numerator(&px, &qy, &t) / (x.clone() - y.clone());
    }
    let qx = eng.q(x);
    kernel_from_values(x, y, &t, &px, &qy, &qx)
}

/// K_t(x, y) in double precision from the quadrature representations.
pub fn kernel(x: f64, y: f64, t: f64) -> f64 {
    kernel_with(&QuadEngine::new(t), &x, &y)
}

/// Truncated form ∫₀^Z p(x+z) q(y+z) dz of the kernel.
pub fn kernel_integral(x: f64, y: f64, t: f64, z_max: f64) -> f64 {
    let f = |z: f64| pearcey_p(x + z, t, 0) * pearcey_q(y + z, t, 0);
    let panels = (z_max * 2.0).ceil().max(4.0) as usize;
    quad::integrate(f, 0.0, z_max, 1e-13, 1e-12, panels).value
}

/// Default truncation of [`kernel_integral`].
pub const INTEGRAL_CUTOFF: f64 = 12.0;
