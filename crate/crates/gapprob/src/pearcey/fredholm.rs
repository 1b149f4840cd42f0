//! Nyström discretization of det(I - K_t χ_E).

use rayon::prelude::*;

use crate::domain::IntervalUnion;
use crate::error::{Error, Result};
use crate::linalg;
use crate::pearcey::functions::{PearceyEngine, QuadEngine, SeriesEngine};
use crate::pearcey::kernel::kernel_from_values;
use crate::quad::gauss_legendre_on;
use crate::real::{with_bits, with_digits, working_bits, Mp, Real};

/// Nodes, weights and the matrix √w_i K(ξ_i, ξ_j) √w_j.
#[derive(Clone, Debug)]
pub struct FredholmDiscretization<R> {
    pub nodes: Vec<R>,
    pub weights: Vec<R>,
    pub order: usize,
    pub matrix: Vec<Vec<R>>,
}

impl<R: Real> FredholmDiscretization<R> {
    pub fn build<E: PearceyEngine<R>>(eng: &E, e: &IntervalUnion<R>, m: usize) -> Result<Self> {
        if !e.is_bounded() {
            return Err(Error::Unbounded("the Fredholm determinant needs a compact set"));
        }
        if m < 4 {
            return Err(Error::invalid("Gauss order must be at least 4"));
        }
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for (lo, hi) in e.intervals() {
            let (x, w) = gauss_legendre_on::<R>(m, lo, hi);
            nodes.extend(x);
            weights.extend(w);
        }
        let bits = working_bits();
        let vals: Vec<([R; 3], [R; 3])> =
            nodes.par_iter().map(|x| with_bits(bits, || (eng.p(x), eng.q(x)))).collect();
        let t = eng.t();
        let sw: Vec<R> = weights.iter().map(|w| w.sqrt()).collect();
        let n = nodes.len();
        let matrix: Vec<Vec<R>> = (0..n)
            .into_par_iter()
            .map(|i| {
                with_bits(bits, || {
                    (0..n)
                        .map(|j| {
                            let k = kernel_from_values(&nodes[i], &nodes[j], &t, &vals[i].0, &vals[j].1, &vals[i].1);
                            sw[i].clone() * k * sw[j].clone()
                        })
                        .collect()
                })
            })
            .collect();
        Ok(FredholmDiscretization { nodes, weights, order: m, matrix })
    }

    /// log det(I - G).
    pub fn log_det(&self) -> Result<R> {
        let n = self.matrix.len();
        let a: Vec<Vec<R>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let g = self.matrix[i][j].clone();
                        if i == j {
                            R::one() - g
                        } else {
                            -g
                        }
                    })
                    .collect()
            })
            .collect();
        let det = linalg::determinant(a);
        if det.value.sign <= 0 {
            return Err(Error::Discretization(format!(
                "det(I - K) has sign {} at order {}",
                det.value.sign, self.order
            )));
        }
        Ok(det.value.log_abs)
    }
}

/// log det(I - K_t χ_E) with any engine.
pub fn log_det_with<R: Real, E: PearceyEngine<R>>(eng: &E, e: &IntervalUnion<R>, m: usize) -> Result<R> {
    if e.is_empty() {
        return Ok(R::zero());
    }
    FredholmDiscretization::build(eng, e, m)?.log_det()
}

/// Q = log det(I - K_t χ_E) in double precision (quadrature Pearcey functions).
pub fn fredholm_log_det(t: f64, e: &IntervalUnion, m: usize) -> Result<f64> {
    log_det_with(&QuadEngine::new(t), e, m)
}

/// Reach of the Taylor engine needed for a set.
pub fn series_reach(e: &IntervalUnion<f64>) -> f64 {
    e.boundary_points().iter().fold(1.0f64, |acc, x| acc.max(x.abs())) + 1.0
}

/// Q at the given number of significant digits (series Pearcey functions).
pub fn fredholm_log_det_mp(t: f64, e: &IntervalUnion, m: usize, digits: u32) -> Result<f64> {
    with_digits(digits, || {
        let eng = SeriesEngine::new(&Mp::from_f64(t), series_reach(e));
        log_det_with(&eng, &e.to_mp(), m).map(|v| v.to_f64())
    })
}
