//! The fourth-order Wronskian PDE for Q(t; x_1..x_2r) = log det(I - K_t χ_E).

use serde::{Deserialize, Serialize};

use crate::diffops::{build_table, jet, required_partials, wronskian, Chart, DerivativeTable, OperatorExpr, Pick};
use crate::diffops::{Jet, WronskianConvention};
use crate::domain::IntervalUnion;
use crate::error::{Error, Result};
use crate::pearcey::fredholm::{log_det_with, series_reach};
use crate::pearcey::functions::{QuadEngine, SeriesEngine};
use crate::real::{with_digits, Mp, Real};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartKind {
    /// Differences in each endpoint separately.
    Endpoints,
    /// Differences along the translation/dilation orbit x ↦ e^λ x + ε.
    Orbit,
}

/// Coefficients of the inner expression A = c_t Q_ttt + (B0 - 2)B²Q + c_w {BQ_t, B²Q}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PearceyForm {
    /// c_t = 1/2, c_w = 1/16.
    Printed,
    /// c_t = 8, c_w = 4, the combination the kernel actually satisfies.
    Corrected,
}

impl PearceyForm {
    fn coefficients<R: Real>(self) -> (R, R) {
        match self {
            PearceyForm::Printed => (R::one() / R::from_i64(2), R::one() / R::from_i64(16)),
            PearceyForm::Corrected => (R::from_i64(8), R::from_i64(4)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PearceyFdConfig {
    /// Step in t; None picks the default for the precision.
    pub h_t: Option<f64>,
    /// Step in the endpoint (or orbit) variables.
    pub h_x: Option<f64>,
    pub levels: usize,
    /// Gauss-Legendre order per interval.
    pub order: usize,
    pub chart: ChartKind,
    pub form: PearceyForm,
}

impl Default for PearceyFdConfig {
    fn default() -> Self {
        PearceyFdConfig {
            h_t: None,
            h_x: None,
            levels: 4,
            order: 40,
            chart: ChartKind::Endpoints,
            form: PearceyForm::Printed,
        }
    }
}

impl PearceyFdConfig {
    /// Default base step: 0.2 in double precision, 10^(-digits/12) otherwise.
    pub fn default_step(digits: Option<u32>) -> f64 {
        match digits {
            None => 0.2,
            Some(d) => 10f64.powf(-(d as f64) / 12.0),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PearceyPdeReport {
    pub t: f64,
    pub set: IntervalUnion,
    pub residual: f64,
    /// Largest magnitude among the eight products of the expanded equation.
    pub scale: f64,
    pub relative_residual: f64,
    pub relative_by_refinement: Vec<f64>,
    pub h_t: Vec<f64>,
    pub h_x: Vec<f64>,
    pub decreasing: bool,
    /// None for double precision.
    pub significant_digits: Option<u32>,
    pub order: usize,
    pub chart: ChartKind,
    pub form: PearceyForm,
    pub q: f64,
    pub terms: PearceyTerms,
}

struct Ops {
    a1: OperatorExpr,
    a2: OperatorExpr,
    bqt: OperatorExpr,
    b2q: OperatorExpr,
    bm1: OperatorExpr,
}

fn ops(nvars: usize, chart: &Chart) -> Result<Ops> {
    let bm1 = chart.boundary_op(nvars, -1)?;
    let b0 = chart.boundary_op(nvars, 0)?;
    let dt = OperatorExpr::partial(nvars, 0);
    let dt3 = dt.compose(&dt)?.compose(&dt)?;
    let b2 = bm1.compose(&bm1)?;
    let a2 = b0.sub(&OperatorExpr::identity(nvars).scale(2.0)).compose(&b2)?;
    Ok(Ops { a1: dt3, a2, bqt: bm1.compose(&dt)?, b2q: b2, bm1 })
}

/// Brackets {X, C} with C = B²Q_t for X = Q_ttt, B0 B²Q, B²Q and
/// W = {BQ_t, B²Q}; the residual is c_t·qttt + b0_b2q - 2·b2q + c_w·w.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PearceyTerms {
    pub qttt: f64,
    pub b0_b2q: f64,
    pub b2q: f64,
    pub w: f64,
}

fn evaluate<R: Real>(o: &Ops, t: &DerivativeTable<R>, pick: Pick, form: PearceyForm) -> Result<(R, R, PearceyTerms)> {
    let b = &o.bm1;
    let (ct, cw): (R, R) = form.coefficients();
    let qttt = jet(&o.a1, b, 2, t, pick)?;
    let a1 = qttt.scale(&ct);
    let a2 = jet(&o.a2, b, 2, t, pick)?;
    let bqt = jet(&o.bqt, b, 3, t, pick)?;
    let b2q = jet(&o.b2q, b, 3, t, pick)?;
    let conv = WronskianConvention::GXfMinusFXg;
    let shift = |j: &Jet<R>| Jet(j.0[1..].to_vec());
    let inner = wronskian(conv, &bqt.truncate(2), &b2q.truncate(2), &shift(&bqt), &shift(&b2q));
    let a = a1.add(&a2).add(&inner.scale(&cw));
    let c = shift(&bqt);
    let outer = wronskian(conv, &a.truncate(1), &c.truncate(1), &shift(&a), &shift(&c));

    let (q2, q3, q4) = (b2q.d(0).clone(), b2q.d(1).clone(), b2q.d(2).clone());
    let (qt1, qt2, qt3) = (bqt.d(0).clone(), bqt.d(1).clone(), bqt.d(2).clone());
    let (cv, bc) = (c.d(0).clone(), c.d(1).clone());
    let products = [
        a1.d(1).clone() * cv.clone(),
        a2.d(1).clone() * cv.clone(),
        qt3 * q2.clone() * cv.clone() * cw.clone(),
        qt1.clone() * q4 * cv * cw.clone(),
        a1.d(0).clone() * bc.clone(),
        a2.d(0).clone() * bc.clone(),
        qt2 * q2 * bc.clone() * cw.clone(),
        qt1 * q3 * bc * cw,
    ];
    let scale = products.iter().fold(R::zero(), |m, p| R::max_of(m, p.abs()));
    let bracket = |x: &Jet<R>| wronskian(conv, &x.truncate(1), &c.truncate(1), &shift(x), &shift(&c)).d(0).to_f64();
    let two = R::from_i64(2);
    let terms = PearceyTerms {
        qttt: bracket(&qttt),
        b0_b2q: bracket(&a2.add(&b2q.truncate(2).scale(&two))),
        b2q: bracket(&b2q.truncate(2)),
        w: bracket(&inner),
    };
    Ok((outer.d(0).clone(), scale, terms))
}

/// Chart variables and the map from them to a set.
struct Layout {
    chart: Chart,
    base: Vec<f64>,
}

impl Layout {
    fn new(kind: ChartKind, base: Vec<f64>) -> Self {
        let chart = match kind {
            ChartKind::Endpoints => Chart::Endpoints((1..=base.len()).collect()),
            ChartKind::Orbit => Chart::Orbit { translate: 1, dilate: 2 },
        };
        Layout { chart, base }
    }

    fn nvars(&self) -> usize {
        match self.chart {
            Chart::Endpoints(_) => 1 + self.base.len(),
            Chart::Orbit { .. } => 3,
        }
    }

    fn center<R: Real>(&self, t: f64) -> Vec<R> {
        let mut c = vec![R::from_f64(t)];
        if let Chart::Endpoints(_) = self.chart {
            c.extend(self.base.iter().map(|b| R::from_f64(*b)));
        } else {
            c.extend([R::zero(), R::zero()]);
        }
        c
    }

    fn set<R: Real>(&self, v: &[R]) -> Result<IntervalUnion<R>> {
        match self.chart {
            Chart::Endpoints(_) => IntervalUnion::from_endpoints(&v[1..]),
            Chart::Orbit { .. } => {
                let s = v[2].exp();
                let pts: Vec<R> = self.base.iter().map(|b| s.clone() * R::from_f64(*b) + v[1].clone()).collect();
                IntervalUnion::from_endpoints(&pts)
            }
        }
    }
}

fn run<R: Real>(
    t: f64,
    e: &IntervalUnion,
    fd: &PearceyFdConfig,
    digits: Option<u32>,
    q_of: impl Fn(&R, &IntervalUnion<R>) -> Result<R> + Sync,
) -> Result<PearceyPdeReport> {
    let base = e.finite_endpoints()?;
    if base.is_empty() {
        return Err(Error::invalid("the Pearcey PDE needs a non-empty compact set"));
    }
    if fd.levels < 2 {
        return Err(Error::invalid("need at least two step levels"));
    }
    let lay = Layout::new(fd.chart, base);
    let n = lay.nvars();
    let o = ops(n, &lay.chart)?;
    let mut exprs = vec![o.a1.clone(), o.a2.clone(), o.bqt.clone(), o.b2q.clone()];
    for base in [&o.a1, &o.a2, &o.bqt, &o.b2q] {
        let mut cur = base.clone();
        for _ in 0..2 {
            cur = match o.bm1.compose(&cur) {
                Ok(c) => c,
                Err(Error::OrderOverflow(_)) => break,
                Err(err) => return Err(err),
            };
            exprs.push(cur.clone());
        }
    }
    let req = required_partials(&exprs);
    let default = PearceyFdConfig::default_step(digits);
    let h_t = fd.h_t.unwrap_or(default);
    let h_x = fd.h_x.unwrap_or(default);
    let mut steps = vec![h_x; n];
    steps[0] = h_t;
    let center: Vec<R> = lay.center(t);
    let table = build_table(|v: &[R]| q_of(&v[0], &lay.set(v)?), &center, &steps, &req, fd.levels)?;
    let q = q_of(&center[0], &lay.set(&center)?)?.to_f64();

    let (res, scale, terms) = evaluate(&o, &table, Pick::Extrapolated, fd.form)?;
    if scale.is_zero() {
        return Err(Error::Evaluation { point: format!("t={t}"), reason: "all products vanish".into() });
    }
    let mut by_ref = Vec::new();
    for l in 0..fd.levels - 1 {
        let (r, s, _) = evaluate(&o, &table, Pick::Pair(l), fd.form)?;
        by_ref.push((r.abs() / s).to_f64());
    }
    let decreasing = by_ref.windows(2).all(|w| w[1] < w[0]);
    Ok(PearceyPdeReport {
        t,
        set: e.clone(),
        residual: res.abs().to_f64(),
        scale: scale.to_f64(),
        relative_residual: (res.abs() / scale).to_f64(),
        relative_by_refinement: by_ref,
        h_t: (0..fd.levels).map(|l| h_t / (1u64 << l) as f64).collect(),
        h_x: (0..fd.levels).map(|l| h_x / (1u64 << l) as f64).collect(),
        decreasing,
        significant_digits: digits,
        order: fd.order,
        chart: fd.chart,
        form: fd.form,
        q,
        terms,
    })
}

/// Residual of the PDE with Q in double precision.
pub fn residual_pearcey_pde(t: f64, e: &IntervalUnion, fd: &PearceyFdConfig) -> Result<PearceyPdeReport> {
    let m = fd.order;
    run::<f64>(t, e, fd, None, |t, set| log_det_with(&QuadEngine::new(*t), set, m))
}

/// Residual of the PDE with Q at `digits` significant digits.
pub fn residual_pearcey_pde_mp(t: f64, e: &IntervalUnion, fd: &PearceyFdConfig, digits: u32) -> Result<PearceyPdeReport> {
    let m = fd.order;
    let reach = series_reach(e) + 0.5;
    with_digits(digits, || {
        run::<Mp>(t, e, fd, Some(digits), |t, set| log_det_with(&SeriesEngine::new(t, reach), set, m))
    })
}
