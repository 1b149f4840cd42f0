//! Numerical checks of the bilinear and Virasoro identities satisfied by
//! log τ at the origin of the deformation times.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::diffops::{build_table, boundary_op, DerivativeTable, MultiIndex, OperatorExpr};
use crate::domain::{IntervalUnion, PrecisionConfig, SourceSpec};
use crate::error::{Error, Result};
use crate::moments::DeformationPoint;
use crate::real::{with_digits, Mp, Real};
use crate::tau::tau_value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    Eq14,
    /// eq14 with the opposite sign on the right-hand side.
    Eq14Neg,
    Eq12,
    Eq13,
    VirT1,
    VirS1,
    VirT2,
    VirS2,
    VirT1S1,
    VirT1S2,
    VirT2S1,
}

impl IdentityId {
    pub const ALL: [IdentityId; 11] = [
        IdentityId::Eq14,
        IdentityId::Eq14Neg,
        IdentityId::Eq12,
        IdentityId::Eq13,
        IdentityId::VirT1,
        IdentityId::VirS1,
        IdentityId::VirT2,
        IdentityId::VirS2,
        IdentityId::VirT1S1,
        IdentityId::VirT1S2,
        IdentityId::VirT2S1,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityId::Eq14 => "eq14",
            IdentityId::Eq14Neg => "eq14_neg",
            IdentityId::Eq12 => "eq12",
            IdentityId::Eq13 => "eq13",
            IdentityId::VirT1 => "vir_t1",
            IdentityId::VirS1 => "vir_s1",
            IdentityId::VirT2 => "vir_t2",
            IdentityId::VirS2 => "vir_s2",
            IdentityId::VirT1S1 => "vir_t1s1",
            IdentityId::VirT1S2 => "vir_t1s2",
            IdentityId::VirT2S1 => "vir_t2s1",
        }
    }

    /// Human-readable statement of the identity being checked.
    pub fn statement(&self) -> &'static str {
        match self {
            IdentityId::Eq14 => "d2 log tau / dt1 ds1 = tau_{k1+1,k2} tau_{k1-1,k2} / tau^2",
            IdentityId::Eq14Neg => "d2 log tau / dt1 ds1 = -tau_{k1+1,k2} tau_{k1-1,k2} / tau^2",
            IdentityId::Eq12 => "d/dt1 log(tau_{k1+1}/tau_{k1-1}) = f_{t2 s1} / f_{t1 s1}",
            IdentityId::Eq13 => "-d/ds1 log(tau_{k1+1}/tau_{k1-1}) = f_{t1 s2} / f_{t1 s1}",
            IdentityId::VirT1 => "f_t1 = -B_{-1} f + a(k1-k2)",
            IdentityId::VirS1 => "f_s1 = 1/2 (B_{-1} - d_a) f + a/2 (k2-k1)",
            IdentityId::VirT2 => "f_t2 = (-B_0 + a d_a) f + k1^2 + k1 k2 + k2^2",
            IdentityId::VirS2 => "f_s2 = 1/2 (B_0 - a d_a - d_beta) f - 1/2 (k1^2 + k1 k2 + k2^2)",
            IdentityId::VirT1S1 => "2 f_{t1 s1} = B_{-1}(d_a - B_{-1}) f - 2 k1",
            IdentityId::VirT1S2 => "2 f_{t1 s2} = (a d_a + d_beta - B_0 + 1) B_{-1} f - 2 d_a f - 2a(k1-k2)",
            IdentityId::VirT2S1 => {
                "2 f_{t2 s1} = d_a (B_0 - a d_a + a B_{-1}) f - B_{-1}(B_0 - 1) f - 2a(k1-k2)"
            }
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown identity '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FdConfig {
    /// Base step; None picks 10^(-digits/5).
    pub step: Option<f64>,
    /// Number of step sizes h, h/2, ... (at least 2).
    pub levels: usize,
}

impl Default for FdConfig {
    fn default() -> Self {
        FdConfig { step: None, levels: 2 }
    }
}

impl FdConfig {
    pub fn step_for(&self, digits: u32, divisor: f64) -> f64 {
        self.step.unwrap_or_else(|| 10f64.powf(-(digits as f64) / divisor))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_id: IdentityId,
    pub statement: String,
    pub lhs: f64,
    pub rhs: f64,
    /// |lhs - rhs| / max(|lhs|, |rhs|, 1) with extrapolated derivatives.
    pub residual: f64,
    /// Same residual from the raw differences at each step level.
    pub residual_by_level: Vec<f64>,
    pub step_sizes: Vec<f64>,
    /// log2 of the residual ratio between the two coarsest levels; None when
    /// the residual is already at the rounding floor on every level.
    pub convergence_order: Option<f64>,
    pub converged: bool,
}

const T1: usize = 0;
const T2: usize = 1;
const S1: usize = 2;
const S2: usize = 3;
const U1: usize = 4;
const U2: usize = 5;
const BETA: usize = 6;
const NDEF: usize = 7;

/// Variable layout: a, b_1..b_2r, then t1 t2 s1 s2 u1 u2 β.
struct Layout {
    r2: usize,
}

impl Layout {
    fn nvars(&self) -> usize {
        1 + self.r2 + NDEF
    }
    fn a(&self) -> usize {
        0
    }
    fn b(&self) -> Vec<usize> {
        (1..=self.r2).collect()
    }
    fn def(&self, k: usize) -> usize {
        1 + self.r2 + k
    }
    fn d(&self, var: usize) -> OperatorExpr {
        OperatorExpr::partial(self.nvars(), var)
    }
    fn dd(&self, v1: usize, v2: usize) -> OperatorExpr {
        self.d(v1).compose(&self.d(v2)).expect("second order")
    }
    fn id(&self) -> OperatorExpr {
        OperatorExpr::identity(self.nvars())
    }
    fn times_a(&self, e: &OperatorExpr, c: f64, p: i32) -> OperatorExpr {
        let mut m = vec![0; self.nvars()];
        m[0] = p;
        e.times(c, &m)
    }
    fn constant(&self, c: f64, a_power: i32) -> OperatorExpr {
        let mut m = vec![0; self.nvars()];
        m[0] = a_power;
        OperatorExpr::constant(self.nvars(), c, m)
    }
    fn bm1(&self) -> OperatorExpr {
        boundary_op(-1, self.nvars(), &self.b()).expect("bounded")
    }
    fn b0(&self) -> OperatorExpr {
        boundary_op(0, self.nvars(), &self.b()).expect("bounded")
    }

    fn deform(&self, x: &[Mp]) -> DeformationPoint<Mp> {
        let o = 1 + self.r2;
        DeformationPoint {
            t: vec![x[o + T1].clone(), x[o + T2].clone()],
            s: vec![x[o + S1].clone(), x[o + S2].clone()],
            u: vec![x[o + U1].clone(), x[o + U2].clone()],
            beta: x[o + BETA].clone(),
        }
    }

    fn set(&self, x: &[Mp]) -> Result<IntervalUnion<Mp>> {
        IntervalUnion::from_endpoints(&x[1..=self.r2])
    }
}

/// Operator pairs (lhs, rhs) on f = log τ for the linear identities.
fn linear_sides(id: IdentityId, lay: &Layout, k1: usize, k2: usize) -> Result<(OperatorExpr, OperatorExpr)> {
    let (k1f, k2f) = (k1 as f64, k2 as f64);
    let kk = k1f * k1f + k1f * k2f + k2f * k2f;
    let da = lay.d(lay.a());
    let bm1 = lay.bm1();
    let b0 = lay.b0();
    let a_da = lay.times_a(&da, 1.0, 1);
    let dbeta = lay.d(lay.def(BETA));
    Ok(match id {
        IdentityId::VirT1 => (lay.d(lay.def(T1)), bm1.scale(-1.0).add(&lay.constant(k1f - k2f, 1))),
        IdentityId::VirS1 => {
            (lay.d(lay.def(S1)), bm1.sub(&da).scale(0.5).add(&lay.constant(0.5 * (k2f - k1f), 1)))
        }
        IdentityId::VirT2 => (lay.d(lay.def(T2)), b0.scale(-1.0).add(&a_da).add(&lay.constant(kk, 0))),
        IdentityId::VirS2 => (
            lay.d(lay.def(S2)),
            b0.sub(&a_da).sub(&dbeta).scale(0.5).add(&lay.constant(-0.5 * kk, 0)),
        ),
        IdentityId::VirT1S1 => (
            lay.dd(lay.def(T1), lay.def(S1)).scale(2.0),
            bm1.compose(&da.sub(&bm1))?.add(&lay.constant(-2.0 * k1f, 0)),
        ),
        IdentityId::VirT1S2 => {
            let outer = a_da.add(&dbeta).sub(&b0).add(&lay.id());
            (
                lay.dd(lay.def(T1), lay.def(S2)).scale(2.0),
                outer
                    .compose(&bm1)?
                    .sub(&da.scale(2.0))
                    .add(&lay.constant(-2.0 * (k1f - k2f), 1)),
            )
        }
        IdentityId::VirT2S1 => {
            let inner = b0.sub(&a_da).add(&lay.times_a(&bm1, 1.0, 1));
            (
                lay.dd(lay.def(T2), lay.def(S1)).scale(2.0),
                da.compose(&inner)?
                    .sub(&bm1.compose(&b0.sub(&lay.id()))?)
                    .add(&lay.constant(-2.0 * (k1f - k2f), 1)),
            )
        }
        _ => return Err(Error::invalid("not a linear identity")),
    })
}

fn relative<R: Real>(l: &R, r: &R) -> f64 {
    let scale = R::max_of(R::max_of(l.abs(), r.abs()), R::one());
    ((l.clone() - r.clone()).abs() / scale).to_f64()
}

fn log_abs_tau(lay: &Layout, k1: usize, k2: usize, x: &[Mp]) -> Result<Mp> {
    let v = tau_value(&x[0], k1, k2, &lay.deform(x), &lay.set(x)?)?;
    if v.is_zero() {
        return Err(Error::Precision("tau vanished on the stencil".into()));
    }
    Ok(v.log_abs)
}

fn table(
    lay: &Layout,
    k1: usize,
    k2: usize,
    center: &[Mp],
    h: f64,
    required: &BTreeSet<MultiIndex>,
    levels: usize,
) -> Result<DerivativeTable<Mp>> {
    let steps = vec![h; center.len()];
    build_table(|x: &[Mp]| log_abs_tau(lay, k1, k2, x), center, &steps, required, levels)
}

/// Evaluate one catalogued identity at the origin of the deformation times.
pub fn check_identity(
    id: IdentityId,
    spec: &SourceSpec,
    e: &IntervalUnion,
    fd: &FdConfig,
    prec: &PrecisionConfig,
) -> Result<IdentityReport> {
    spec.validate()?;
    prec.validate()?;
    if spec.is_degenerate() {
        return Err(Error::DegenerateSource);
    }
    let b = e.finite_endpoints()?;
    if b.is_empty() {
        return Err(Error::invalid("identity checks need a non-empty set"));
    }
    if fd.levels < 2 {
        return Err(Error::invalid("identity checks need at least two step levels"));
    }
    let (k1, k2) = (spec.k1, spec.k2);
    let lay = Layout { r2: b.len() };
    let digits = prec.significant_digits;
    let h = fd.step_for(digits, 5.0);
    let levels = fd.levels;

    with_digits(digits, || {
        let mut center = vec![Mp::zero(); lay.nvars()];
        center[0] = Mp::from_f64(spec.a);
        for (i, bi) in b.iter().enumerate() {
            center[1 + i] = Mp::from_f64(*bi);
        }

        let mut lhs_l = Vec::with_capacity(levels);
        let mut rhs_l = Vec::with_capacity(levels);
        let (lhs, rhs);
        match id {
            IdentityId::Eq14 | IdentityId::Eq14Neg | IdentityId::Eq12 | IdentityId::Eq13 => {
                if k1 == 0 {
                    return Err(Error::invalid("bilinear identities need k1 >= 1"));
                }
                let f_t1s1 = lay.dd(lay.def(T1), lay.def(S1));
                let f_t2s1 = lay.dd(lay.def(T2), lay.def(S1));
                let f_t1s2 = lay.dd(lay.def(T1), lay.def(S2));
                let req: BTreeSet<MultiIndex> = [&f_t1s1, &f_t2s1, &f_t1s2].iter().flat_map(|e| e.partials()).collect();
                let tf = table(&lay, k1, k2, &center, h, &req, levels)?;
                let up = tau_value(&center[0], k1 + 1, k2, &DeformationPoint::zero(), &lay.set(&center)?)?;
                let down = tau_value(&center[0], k1 - 1, k2, &DeformationPoint::zero(), &lay.set(&center)?)?;
                match id {
                    IdentityId::Eq14 | IdentityId::Eq14Neg => {
                        let base = tau_value(&center[0], k1, k2, &DeformationPoint::zero(), &lay.set(&center)?)?;
                        let mut exact = up.mul(&down).div(&base.mul(&base))?.to_real();
                        if id == IdentityId::Eq14Neg {
                            exact = -exact;
                        }
                        lhs = f_t1s1.eval(&tf)?;
                        rhs = exact.clone();
                        for l in 0..levels {
                            lhs_l.push(f_t1s1.eval_level(&tf, l)?);
                            rhs_l.push(exact.clone());
                        }
                    }
                    _ => {
                        // g = log|tau_{k1+1}| - log|tau_{k1-1}|
                        let (var, sign, num) = if id == IdentityId::Eq12 {
                            (lay.def(T1), 1.0, &f_t2s1)
                        } else {
                            (lay.def(S1), -1.0, &f_t1s2)
                        };
                        let dg = lay.d(var).scale(sign);
                        let steps = vec![h; center.len()];
                        let tg = build_table(
                            |x: &[Mp]| Ok(log_abs_tau(&lay, k1 + 1, k2, x)? - log_abs_tau(&lay, k1 - 1, k2, x)?),
                            &center,
                            &steps,
                            &dg.partials(),
                            levels,
                        )?;
                        lhs = dg.eval(&tg)?;
                        rhs = num.eval(&tf)? / f_t1s1.eval(&tf)?;
                        for l in 0..levels {
                            lhs_l.push(dg.eval_level(&tg, l)?);
                            rhs_l.push(num.eval_level(&tf, l)? / f_t1s1.eval_level(&tf, l)?);
                        }
                    }
                }
            }
            _ => {
                let (lop, rop) = linear_sides(id, &lay, k1, k2)?;
                let req: BTreeSet<MultiIndex> = lop.partials().union(&rop.partials()).cloned().collect();
                let tf = table(&lay, k1, k2, &center, h, &req, levels)?;
                lhs = lop.eval(&tf)?;
                rhs = rop.eval(&tf)?;
                for l in 0..levels {
                    lhs_l.push(lop.eval_level(&tf, l)?);
                    rhs_l.push(rop.eval_level(&tf, l)?);
                }
            }
        }
        let (lf, rf) = (lhs.to_f64(), rhs.to_f64());
        let residual_by_level: Vec<f64> =
            lhs_l.iter().zip(&rhs_l).map(|(l, r)| relative(l, r)).collect();
        let floor = 10f64.powf(-0.6 * digits as f64);
        let convergence_order = if residual_by_level.iter().all(|r| *r < floor) {
            None
        } else {
            Some((residual_by_level[0] / residual_by_level[1]).log2())
        };
        Ok(IdentityReport {
            identity_id: id,
            statement: id.statement().to_string(),
            lhs: lf,
            rhs: rf,
            residual: relative(&lhs, &rhs),
            residual_by_level,
            step_sizes: (0..levels).map(|l| h / (1u64 << l) as f64).collect(),
            convergence_order,
            converged: convergence_order.is_none_or(|o| o >= 1.0),
        })
    })
}
