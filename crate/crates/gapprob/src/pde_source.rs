//! The quartic PDE in (a; b_1..b_2r) satisfied by log P_n, evaluated from
//! finite-difference jets of two independently built tables.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diffops::{build_table, jet, DerivativeTable, Jet, MultiIndex, OperatorExpr, Pick, WronskianConvention};
use crate::diffops::{boundary_op, wronskian};
use crate::domain::{IntervalUnion, PrecisionConfig, SourceSpec};
use crate::error::{Error, Result};
use crate::real::{with_digits, Mp, Real};
use crate::tau::log_gap_probability;

/// Minimum working precision accepted by [`residual_source_pde`].
pub const MIN_DIGITS: u32 = 30;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PdeFdConfig {
    /// Base step in a and in every endpoint; None picks 10^(-digits/12).
    pub step: Option<f64>,
    /// Step levels h, h/2, ...; four give three paired refinements.
    pub levels: usize,
}

impl Default for PdeFdConfig {
    fn default() -> Self {
        PdeFdConfig { step: None, levels: 4 }
    }
}

/// Values of the assembled objects at the evaluation point.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    pub f_plus: f64,
    pub f_minus: f64,
    pub h1_plus: f64,
    pub h1_minus: f64,
    pub h2_plus: f64,
    pub h2_minus: f64,
    pub g_plus: f64,
    pub g_minus: f64,
    pub bf_plus: f64,
    pub bf_minus: f64,
    pub b2f_plus: f64,
    pub b2f_minus: f64,
    pub bg_plus: f64,
    pub bg_minus: f64,
    /// Relative gap between F⁻ from the dual table and F⁻ rebuilt from the
    /// primary table by a → -a, k1 ↔ k2.
    pub duality_gap: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResidualReport {
    pub residual: f64,
    /// Largest magnitude among the eight products in the expanded equation.
    pub scale: f64,
    pub relative_residual: f64,
    /// Relative residual after one Richardson step at h/2^l, l = 0, 1, ...
    pub relative_by_refinement: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// Strict decrease of `relative_by_refinement`, or every entry at the
    /// rounding floor 10^(-digits/2).
    pub decreasing: bool,
    pub significant_digits: u32,
    pub intermediates: Intermediates,
}

/// Operators in (a; b) building F, H1, H2 for multiplicities (k1, k2).
struct Objects {
    f: OperatorExpr,
    h1: OperatorExpr,
    h2: OperatorExpr,
    bm1: OperatorExpr,
    da: OperatorExpr,
}

fn objects(nvars: usize, k1: usize, k2: usize) -> Result<Objects> {
    let b: Vec<usize> = (1..nvars).collect();
    let bm1 = boundary_op(-1, nvars, &b)?;
    let b0 = boundary_op(0, nvars, &b)?;
    let da = OperatorExpr::partial(nvars, 0);
    let mut a1 = vec![0; nvars];
    a1[0] = 1;
    let mut a_inv = vec![0; nvars];
    a_inv[0] = -1;
    let (k1f, k2f) = (k1 as f64, k2 as f64);

    let f = bm1.compose(&da.sub(&bm1))?.scale(2.0).add(&OperatorExpr::constant(nvars, -4.0 * k1f, vec![0; nvars]));
    let inner = b0.sub(&da.times(1.0, &a1)).sub(&bm1.times(1.0, &a1));
    let h1 = da
        .compose(&inner)?
        .add(&b0.compose(&bm1)?)
        .add(&da.scale(4.0))
        .add(&OperatorExpr::constant(nvars, 4.0 * k1f, a1.clone()))
        .add(&OperatorExpr::constant(nvars, 4.0 * k1f * k2f, a_inv));
    let outer = bm1.times(2.0, &a1).sub(&b0).add(&OperatorExpr::identity(nvars).scale(2.0));
    let h2 = da.compose(&inner)?.add(&outer.compose(&bm1)?);
    Ok(Objects { f, h1, h2, bm1, da })
}

/// F, G with their B_{-1} jets (F to depth 3, G to depth 2) from one table.
struct Assembled<R> {
    f: Jet<R>,
    g: Jet<R>,
    h1: R,
    h2: R,
}

fn assemble<R: Real>(o: &Objects, t: &DerivativeTable<R>, pick: Pick) -> Result<Assembled<R>> {
    let b = &o.bm1;
    let f = jet(&o.f, b, 3, t, pick)?;
    let h1 = jet(&o.h1, b, 2, t, pick)?;
    let h2 = jet(&o.h2, b, 1, t, pick)?;
    let bh1 = jet(&b.compose(&o.h1)?, b, 2, t, pick)?;
    let daf = jet(&o.da.compose(&o.f)?, b, 2, t, pick)?;
    let dah2 = jet(&o.da.compose(&o.h2)?, b, 2, t, pick)?;
    let h2j = jet(&o.h2, b, 2, t, pick)?;
    let f2 = f.truncate(2);
    let bf = Jet(vec![f.d(1).clone(), f.d(2).clone()]);
    let conv = WronskianConvention::GXfMinusFXg;
    // 2G = {H1, F}_B - {H2, F}_{∂a}
    let two_g = wronskian(conv, &h1, &f2, &bh1, &bf).sub(&wronskian(conv, &h2j, &f2, &dah2, &daf));
    let g = two_g.scale(&(R::one() / R::from_i64(2)));
    Ok(Assembled { f, g, h1: h1.value().clone(), h2: h2.value().clone() })
}

/// Residual of the quartic equation and the largest of its eight products.
fn equation<R: Real>(p: &Assembled<R>, m: &Assembled<R>) -> (R, R) {
    let (fp, fm) = (p.f.d(0).clone(), m.f.d(0).clone());
    let (bfp, bfm) = (p.f.d(1).clone(), m.f.d(1).clone());
    let (b2fp, b2fm) = (p.f.d(2).clone(), m.f.d(2).clone());
    let (gp, gm) = (p.g.d(0).clone(), m.g.d(0).clone());
    let (bgp, bgm) = (p.g.d(1).clone(), m.g.d(1).clone());
    let products = [
        fp.clone() * bgm.clone() * fp.clone() * bfm.clone(),
        -(fp.clone() * bgm.clone() * fm.clone() * bfp.clone()),
        fm.clone() * bgp.clone() * fp.clone() * bfm.clone(),
        -(fm.clone() * bgp.clone() * fm.clone() * bfp.clone()),
        -(fp.clone() * gm.clone() * fp.clone() * b2fm.clone()),
        fp.clone() * gm.clone() * fm.clone() * b2fp.clone(),
        -(fm.clone() * gp.clone() * fp.clone() * b2fm.clone()),
        fm.clone() * gp.clone() * fm.clone() * b2fp.clone(),
    ];
    let mut sum = R::zero();
    let mut scale = R::zero();
    for t in &products {
        sum += t.clone();
        scale = R::max_of(scale, t.abs());
    }
    (sum, scale)
}

fn log_prob_table(
    a: f64,
    k1: usize,
    k2: usize,
    b: &[f64],
    h: f64,
    required: &BTreeSet<MultiIndex>,
    levels: usize,
) -> Result<DerivativeTable<Mp>> {
    let mut center = vec![Mp::from_f64(a)];
    center.extend(b.iter().map(|x| Mp::from_f64(*x)));
    let steps = vec![h; center.len()];
    build_table(
        |x: &[Mp]| {
            let e = IntervalUnion::from_endpoints(&x[1..])?;
            log_gap_probability(&x[0], k1, k2, &e)
        },
        &center,
        &steps,
        required,
        levels,
    )
}

fn needed(o: &Objects) -> Result<BTreeSet<MultiIndex>> {
    let b = &o.bm1;
    let mut exprs = vec![o.f.clone(), o.h1.clone(), o.h2.clone()];
    let mut cur = o.f.clone();
    for _ in 0..2 {
        cur = b.compose(&cur)?;
        exprs.push(cur.clone());
    }
    let bh1 = b.compose(&o.h1)?;
    exprs.push(bh1.clone());
    exprs.push(b.compose(&bh1)?);
    exprs.push(b.compose(&o.h2)?);
    for base in [&o.f, &o.h2] {
        let d = o.da.compose(base)?;
        exprs.push(b.compose(&d)?);
        exprs.push(d);
    }
    Ok(exprs.iter().flat_map(|e| e.partials()).collect())
}

/// The quartic equation relating F±, G± and their B_{-1} derivatives,
/// evaluated at (a; E) with relative residual and a three-step refinement
/// trend.
pub fn residual_source_pde(
    spec: &SourceSpec,
    e: &IntervalUnion,
    fd: &PdeFdConfig,
    prec: &PrecisionConfig,
) -> Result<ResidualReport> {
    spec.validate()?;
    prec.validate()?;
    if spec.a == 0.0 {
        return Err(Error::DegenerateSource);
    }
    let digits = prec.significant_digits;
    if digits < MIN_DIGITS {
        return Err(Error::invalid(format!("the source PDE needs at least {MIN_DIGITS} digits")));
    }
    if fd.levels < 2 {
        return Err(Error::invalid("need at least two step levels"));
    }
    let b = e.finite_endpoints()?;
    if b.is_empty() {
        return Err(Error::invalid("the source PDE needs a non-empty set"));
    }
    let h = fd.step.unwrap_or_else(|| 10f64.powf(-(digits as f64) / 12.0));
    let nvars = 1 + b.len();
    let (k1, k2) = (spec.k1, spec.k2);
    let plus = objects(nvars, k1, k2)?;
    let minus = objects(nvars, k2, k1)?;

    with_digits(digits, || {
        // F⁻ rebuilt on the primary table: a → -a flips ∂a
        let mut flip = OperatorExpr::zero(nvars);
        for (alpha, mono, c) in minus.f.terms() {
            let sign = if alpha[0] % 2 == 1 { -1.0 } else { 1.0 };
            flip = flip.add(&OperatorExpr::partial_multi(nvars, alpha).times(c * sign, mono));
        }
        for (mono, c) in minus.f.constants() {
            flip = flip.add(&OperatorExpr::constant(nvars, c, mono.clone()));
        }

        let mut req_p = needed(&plus)?;
        req_p.extend(flip.partials());
        let req_m = needed(&minus)?;
        let (tp, tm) = rayon::join(
            || with_digits(digits, || log_prob_table(spec.a, k1, k2, &b, h, &req_p, fd.levels)),
            || with_digits(digits, || log_prob_table(-spec.a, k2, k1, &b, h, &req_m, fd.levels)),
        );
        let (tp, tm) = (tp?, tm?);

        let p = assemble(&plus, &tp, Pick::Extrapolated)?;
        let m = assemble(&minus, &tm, Pick::Extrapolated)?;
        let (res, scale) = equation(&p, &m);
        if scale.is_zero() {
            return Err(Error::Evaluation { point: format!("a={}", spec.a), reason: "all products vanish".into() });
        }
        let mut by_ref = Vec::new();
        for l in 0..fd.levels - 1 {
            let pl = assemble(&plus, &tp, Pick::Pair(l))?;
            let ml = assemble(&minus, &tm, Pick::Pair(l))?;
            let (r, s) = equation(&pl, &ml);
            by_ref.push((r.abs() / s).to_f64());
        }
        let f_minus_flip = flip.eval(&tp)?;
        let duality_gap = ((f_minus_flip.clone() - m.f.d(0).clone()).abs() / rel_scale(&f_minus_flip, m.f.d(0))).to_f64();
        let inter = Intermediates {
            f_plus: p.f.d(0).to_f64(),
            f_minus: m.f.d(0).to_f64(),
            h1_plus: p.h1.to_f64(),
            h1_minus: m.h1.to_f64(),
            h2_plus: p.h2.to_f64(),
            h2_minus: m.h2.to_f64(),
            g_plus: p.g.d(0).to_f64(),
            g_minus: m.g.d(0).to_f64(),
            bf_plus: p.f.d(1).to_f64(),
            bf_minus: m.f.d(1).to_f64(),
            b2f_plus: p.f.d(2).to_f64(),
            b2f_minus: m.f.d(2).to_f64(),
            bg_plus: p.g.d(1).to_f64(),
            bg_minus: m.g.d(1).to_f64(),
            duality_gap,
        };
        // symmetric configurations cancel exactly at every step; count the
        // rounding floor as converged
        let floor = 10f64.powf(-0.5 * digits as f64);
        let decreasing = by_ref.windows(2).all(|w| w[1] < w[0]) || by_ref.iter().all(|r| *r < floor);
        Ok(ResidualReport {
            residual: res.abs().to_f64(),
            scale: scale.to_f64(),
            relative_residual: (res.abs() / scale).to_f64(),
            relative_by_refinement: by_ref,
            step_sizes: (0..fd.levels).map(|l| h / (1u64 << l) as f64).collect(),
            decreasing,
            significant_digits: digits,
            intermediates: inter,
        })
    })
}

fn rel_scale(x: &Mp, y: &Mp) -> Mp {
    Mp::max_of(Mp::max_of(x.abs(), y.abs()), Mp::one())
}
