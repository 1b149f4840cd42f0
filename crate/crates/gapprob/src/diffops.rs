//! Linear differential operators with monomial coefficients, expanded onto
//! raw partial derivatives, and finite-difference jets that evaluate them.
//!
//! Variables are numbered `0..nvars`. A term is `coef · x^m · ∂^α` with `m`
//! an integer exponent vector (negative powers allowed, for `1/a`) and `α`
//! a multi-index. An operator may also carry an additive constant part, so
//! that expressions such as `B_{-1}f + a(k1-k2)` are single objects.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::real::{with_bits, working_bits, Real};

pub type MultiIndex = Vec<u8>;
pub type Monomial = Vec<i32>;

pub const MAX_ORDER: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorExpr {
    nvars: usize,
    terms: BTreeMap<(MultiIndex, Monomial), f64>,
    constants: BTreeMap<Monomial, f64>,
}

fn falling(m: i32, g: u8) -> f64 {
    (0..g as i32).fold(1.0, |acc, j| acc * (m - j) as f64)
}

fn binom(n: u8, k: u8) -> f64 {
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

/// All multi-indices γ ≤ α componentwise.
fn sub_indices(alpha: &[u8]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::with_capacity(alpha.len())];
    for &a in alpha {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=a).map(move |g| {
                    let mut p = prefix.clone();
                    p.push(g);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn order_of(alpha: &[u8]) -> usize {
    alpha.iter().map(|&x| x as usize).sum()
}

impl OperatorExpr {
    pub fn zero(nvars: usize) -> Self {
        OperatorExpr { nvars, terms: BTreeMap::new(), constants: BTreeMap::new() }
    }

    pub fn identity(nvars: usize) -> Self {
        Self::multiplier(nvars, 1.0, vec![0; nvars])
    }

    /// Multiplication by coef · x^m.
    pub fn multiplier(nvars: usize, coef: f64, mono: Monomial) -> Self {
        let mut e = Self::zero(nvars);
        e.push_term(vec![0; nvars], mono, coef);
        e
    }

    pub fn partial(nvars: usize, var: usize) -> Self {
        let mut alpha = vec![0u8; nvars];
        alpha[var] = 1;
        let mut e = Self::zero(nvars);
        e.push_term(alpha, vec![0; nvars], 1.0);
        e
    }

    /// The constant function coef · x^m (independent of the operand).
    /// ∂^α.
    pub fn partial_multi(nvars: usize, alpha: &[u8]) -> Self {
        let mut e = Self::zero(nvars);
        e.push_term(alpha.to_vec(), vec![0; nvars], 1.0);
        e
    }

    pub fn constant(nvars: usize, coef: f64, mono: Monomial) -> Self {
        let mut e = Self::zero(nvars);
        e.push_constant(mono, coef);
        e
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn mono(&self, powers: &[(usize, i32)]) -> Monomial {
        let mut m = vec![0; self.nvars];
        for &(v, p) in powers {
            m[v] += p;
        }
        m
    }

    fn push_term(&mut self, alpha: MultiIndex, mono: Monomial, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let slot = self.terms.entry((alpha, mono)).or_insert(0.0);
        *slot += coef;
        if *slot == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    fn push_constant(&mut self, mono: Monomial, coef: f64) {
        if coef == 0.0 {
            return;
        }
        let slot = self.constants.entry(mono).or_insert(0.0);
        *slot += coef;
        if *slot == 0.0 {
            self.constants.retain(|_, c| *c != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Monomial, f64)> {
        self.terms.iter().map(|((a, m), c)| (a, m, *c))
    }

    pub fn constants(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.constants.iter().map(|(m, c)| (m, *c))
    }

    pub fn order(&self) -> usize {
        self.terms.keys().map(|(a, _)| order_of(a)).max().unwrap_or(0)
    }

    pub fn partials(&self) -> BTreeSet<MultiIndex> {
        self.terms.keys().map(|(a, _)| a.clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constants.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((a, m), c) in &other.terms {
            out.push_term(a.clone(), m.clone(), *c);
        }
        for (m, c) in &other.constants {
            out.push_constant(m.clone(), *c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, m), c) in &self.terms {
            out.push_term(a.clone(), m.clone(), c * s);
        }
        for (m, c) in &self.constants {
            out.push_constant(m.clone(), c * s);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Left multiplication by the function coef · x^m.
    pub fn times(&self, coef: f64, mono: &[i32]) -> Self {
        let mut out = Self::zero(self.nvars);
        for ((a, m), c) in &self.terms {
            let nm: Monomial = m.iter().zip(mono).map(|(x, y)| x + y).collect();
            out.push_term(a.clone(), nm, c * coef);
        }
        for (m, c) in &self.constants {
            let nm: Monomial = m.iter().zip(mono).map(|(x, y)| x + y).collect();
            out.push_constant(nm, c * coef);
        }
        out
    }

    /// Drop the constant part.
    pub fn linear_part(&self) -> Self {
        OperatorExpr { nvars: self.nvars, terms: self.terms.clone(), constants: BTreeMap::new() }
    }

    /// `self ∘ q`, expanded by the Leibniz rule. Constants of `q` are
    /// differentiated by `self`; constants of `self` are kept.
    pub fn compose(&self, q: &Self) -> Result<Self> {
        assert_eq!(self.nvars, q.nvars, "operator arity mismatch");
        let n = self.nvars;
        let mut out = Self::zero(n);
        for ((alpha, mp), cp) in &self.terms {
            let gammas = sub_indices(alpha);
            for ((beta, mq), cq) in &q.terms {
                for gamma in &gammas {
                    let Some((coef, mono)) = differentiate_monomial(mq, gamma) else { continue };
                    let w: f64 = alpha.iter().zip(gamma).map(|(&a, &g)| binom(a, g)).product();
                    let new_alpha: MultiIndex =
                        (0..n).map(|i| alpha[i] - gamma[i] + beta[i]).collect();
                    let ord = order_of(&new_alpha);
                    if ord > MAX_ORDER {
                        return Err(Error::OrderOverflow(ord));
                    }
                    let m: Monomial = mp.iter().zip(&mono).map(|(x, y)| x + y).collect();
                    out.push_term(new_alpha, m, cp * cq * w * coef);
                }
            }
            for (mq, cq) in &q.constants {
                let Some((coef, mono)) = differentiate_monomial(mq, alpha) else { continue };
                let m: Monomial = mp.iter().zip(&mono).map(|(x, y)| x + y).collect();
                out.push_constant(m, cp * cq * coef);
            }
        }
        for (m, c) in &self.constants {
            out.push_constant(m.clone(), *c);
        }
        Ok(out)
    }

    /// Commutator [p, q] of the linear parts.
    pub fn commutator(p: &Self, q: &Self) -> Result<Self> {
        Ok(p.linear_part().compose(&q.linear_part())?.sub(&q.linear_part().compose(&p.linear_part())?))
    }

    fn coefficient_value<R: Real>(mono: &[i32], point: &[R]) -> R {
        mono.iter()
            .zip(point)
            .filter(|(p, _)| **p != 0)
            .fold(R::one(), |acc, (p, x)| acc * x.powi(*p))
    }

    /// Evaluate against the extrapolated table values.
    pub fn eval<R: Real>(&self, table: &DerivativeTable<R>) -> Result<R> {
        self.eval_with(table, |e| Ok(e.value.clone()))
    }

    /// Evaluate against the unextrapolated values of one step level.
    pub fn eval_level<R: Real>(&self, table: &DerivativeTable<R>, level: usize) -> Result<R> {
        self.eval_pick(table, Pick::Raw(level))
    }

    pub fn eval_pick<R: Real>(&self, table: &DerivativeTable<R>, pick: Pick) -> Result<R> {
        self.eval_with(table, |e| e.pick(pick))
    }

    fn eval_with<R: Real>(
        &self,
        table: &DerivativeTable<R>,
        pick: impl Fn(&TableEntry<R>) -> Result<R>,
    ) -> Result<R> {
        if table.center.len() != self.nvars {
            return Err(Error::invalid("table dimension does not match operator"));
        }
        let mut acc = R::zero();
        for ((alpha, mono), c) in &self.terms {
            let entry = table.entry(alpha)?;
            acc += R::from_f64(*c) * Self::coefficient_value(mono, &table.center) * pick(entry)?;
        }
        for (mono, c) in &self.constants {
            acc += R::from_f64(*c) * Self::coefficient_value(mono, &table.center);
        }
        Ok(acc)
    }
}

fn differentiate_monomial(m: &[i32], gamma: &[u8]) -> Option<(f64, Monomial)> {
    let mut coef = 1.0;
    let mut out = Vec::with_capacity(m.len());
    for (&p, &g) in m.iter().zip(gamma) {
        let f = falling(p, g);
        if f == 0.0 {
            return None;
        }
        coef *= f;
        out.push(p - g as i32);
    }
    Some((coef, out))
}

/// How the boundary operators B_k act on the table variables.
#[derive(Clone, Debug, PartialEq)]
pub enum Chart {
    /// Raw endpoint coordinates: B_k = Σ x_i^{k+1} ∂_{x_i}.
    Endpoints(Vec<usize>),
    /// Orbit coordinates (ε, λ) of the point e^λ x + ε: B_{-1} = ∂_ε and
    /// B_0 = ∂_λ + ε ∂_ε. Only k ∈ {-1, 0} exist in this chart.
    Orbit { translate: usize, dilate: usize },
}

impl Chart {
    pub fn boundary_op(&self, nvars: usize, k: i32) -> Result<OperatorExpr> {
        if k < -1 {
            return Err(Error::invalid("boundary operators start at k = -1"));
        }
        match self {
            Chart::Endpoints(vars) => {
                let mut e = OperatorExpr::zero(nvars);
                for &v in vars {
                    let mut mono = vec![0; nvars];
                    mono[v] = k + 1;
                    e = e.add(&OperatorExpr::partial(nvars, v).times(1.0, &mono));
                }
                Ok(e)
            }
            Chart::Orbit { translate, dilate } => match k {
                -1 => Ok(OperatorExpr::partial(nvars, *translate)),
                0 => {
                    let mut mono = vec![0; nvars];
                    mono[*translate] = 1;
                    Ok(OperatorExpr::partial(nvars, *dilate).add(&OperatorExpr::partial(nvars, *translate).times(1.0, &mono)))
                }
                _ => Err(Error::invalid("orbit chart only carries B_-1 and B_0")),
            },
        }
    }
}

/// B_k = Σ b_i^{k+1} ∂/∂b_i over the given endpoint variables.
pub fn boundary_op(k: i32, nvars: usize, endpoint_vars: &[usize]) -> Result<OperatorExpr> {
    Chart::Endpoints(endpoint_vars.to_vec()).boundary_op(nvars, k)
}

#[derive(Clone, Debug)]
pub struct TableEntry<R> {
    /// Central-difference values at steps h, h/2, ...
    pub raw: Vec<R>,
    /// Richardson-extrapolated value.
    pub value: R,
    pub error_estimate: f64,
    /// log2 of successive raw-difference ratios; None with fewer than three levels.
    pub observed_order: Option<f64>,
}

impl<R: Real> TableEntry<R> {
    pub fn pick(&self, pick: Pick) -> Result<R> {
        let raw = |l: usize| self.raw.get(l).cloned().ok_or_else(|| Error::invalid(format!("table has no level {l}")));
        match pick {
            Pick::Extrapolated => Ok(self.value.clone()),
            Pick::Raw(l) => raw(l),
            Pick::Pair(l) => {
                let (c, f) = (raw(l)?, raw(l + 1)?);
                Ok(f.clone() + (f - c) / R::from_i64(3))
            }
        }
    }
}

/// Which estimate of each partial to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pick {
    /// Full Romberg extrapolation over all levels.
    Extrapolated,
    /// Plain central difference at step h / 2^l.
    Raw(usize),
    /// One Richardson step between levels l and l + 1.
    Pair(usize),
}

#[derive(Clone, Debug)]
pub struct DerivativeTable<R> {
    pub center: Vec<R>,
    pub steps: Vec<f64>,
    pub levels: usize,
    pub evaluations: usize,
    entries: BTreeMap<MultiIndex, TableEntry<R>>,
}

impl<R: Real> DerivativeTable<R> {
    pub fn entry(&self, alpha: &[u8]) -> Result<&TableEntry<R>> {
        self.entries.get(alpha).ok_or_else(|| Error::MissingPartial(format!("{alpha:?}")))
    }

    pub fn get(&self, alpha: &[u8]) -> Result<R> {
        Ok(self.entry(alpha)?.value.clone())
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &TableEntry<R>)> {
        self.entries.iter()
    }
}

fn stencil(d: u8) -> &'static [(i64, f64)] {
    match d {
        0 => &[(0, 1.0)],
        1 => &[(-1, -0.5), (1, 0.5)],
        2 => &[(-1, 1.0), (0, -2.0), (1, 1.0)],
        3 => &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
        4 => &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
        _ => &[],
    }
}

/// Tensor stencil of `alpha` at refinement `level` of `levels`, offsets in
/// units of h / 2^(levels-1).
fn tensor_stencil(alpha: &[u8], level: usize, levels: usize) -> Vec<(Vec<i64>, f64)> {
    let unit = 1i64 << (levels - 1 - level);
    let mut out = vec![(Vec::with_capacity(alpha.len()), 1.0)];
    for &d in alpha {
        out = out
            .into_iter()
            .flat_map(|(prefix, w)| {
                stencil(d).iter().map(move |&(o, sw)| {
                    let mut p = prefix.clone();
                    p.push(o * unit);
                    (p, w * sw)
                })
            })
            .collect();
    }
    out
}

/// Build central-difference estimates of every partial in `required`,
/// at steps h, h/2, ..., and Richardson-extrapolate in h².
pub fn build_table<R, F>(
    f: F,
    center: &[R],
    steps: &[f64],
    required: &BTreeSet<MultiIndex>,
    levels: usize,
) -> Result<DerivativeTable<R>>
where
    R: Real,
    F: Fn(&[R]) -> Result<R> + Sync,
{
    let n = center.len();
    if steps.len() != n {
        return Err(Error::invalid("one step per variable is required"));
    }
    if levels == 0 || levels > 6 {
        return Err(Error::invalid("levels must be in 1..=6"));
    }
    for alpha in required {
        if alpha.len() != n {
            return Err(Error::invalid("multi-index length does not match the center"));
        }
        if order_of(alpha) > MAX_ORDER {
            return Err(Error::OrderOverflow(order_of(alpha)));
        }
    }
    let mut points: BTreeSet<Vec<i64>> = BTreeSet::new();
    for alpha in required {
        for level in 0..levels {
            for (p, _) in tensor_stencil(alpha, level, levels) {
                points.insert(p);
            }
        }
    }
    let points: Vec<Vec<i64>> = points.into_iter().collect();
    let fine = (1u64 << (levels - 1)) as f64;
    let fine_steps: Vec<R> = steps.iter().map(|h| R::from_f64(*h) / R::from_f64(fine)).collect();
    let bits = working_bits();
    let values: Vec<Result<R>> = points
        .par_iter()
        .map(|p| {
            with_bits(bits, || {
                let x: Vec<R> = center
                    .iter()
                    .zip(p)
                    .zip(&fine_steps)
                    .map(|((c, &o), h)| if o == 0 { c.clone() } else { c.clone() + R::from_i64(o) * h.clone() })
                    .collect();
                f(&x).map_err(|err| Error::Evaluation {
                    point: format!("{:?}", x.iter().map(|v| v.to_f64()).collect::<Vec<_>>()),
                    reason: err.to_string(),
                })
            })
        })
        .collect();
    let mut cache: HashMap<Vec<i64>, R> = HashMap::with_capacity(points.len());
    for (p, v) in points.iter().zip(values) {
        let v = v?;
        if !v.is_finite() {
            return Err(Error::Evaluation { point: format!("offset {p:?}"), reason: "non-finite value".into() });
        }
        cache.insert(p.clone(), v);
    }

    let mut entries = BTreeMap::new();
    for alpha in required {
        let mut raw = Vec::with_capacity(levels);
        for level in 0..levels {
            let scale = (1u64 << level) as f64;
            let mut denom = R::one();
            for (h, &d) in steps.iter().zip(alpha.iter()) {
                let hl = R::from_f64(*h) / R::from_f64(scale);
                denom *= hl.powi(d as i32);
            }
            let mut acc = R::zero();
            for (p, w) in tensor_stencil(alpha, level, levels) {
                acc += R::from_f64(w) * cache[&p].clone();
            }
            raw.push(acc / denom);
        }
        // Romberg table in h²
        let mut row: Vec<R> = vec![raw[0].clone()];
        let mut err = f64::NAN;
        for l in 1..levels {
            let mut next = vec![raw[l].clone()];
            for j in 1..=l {
                let f4 = R::from_f64(4f64.powi(j as i32) - 1.0);
                let v = next[j - 1].clone() + (next[j - 1].clone() - row[j - 1].clone()) / f4;
                next.push(v);
            }
            err = (next[l].clone() - next[l - 1].clone()).abs().to_f64();
            row = next;
        }
        let observed_order = if levels >= 3 {
            let d1 = (raw[0].clone() - raw[1].clone()).abs().to_f64();
            let d2 = (raw[1].clone() - raw[2].clone()).abs().to_f64();
            Some((d1 / d2).log2())
        } else {
            None
        };
        entries.insert(
            alpha.clone(),
            TableEntry { value: row[levels - 1].clone(), raw, error_estimate: err, observed_order },
        );
    }
    Ok(DerivativeTable { center: center.to_vec(), steps: steps.to_vec(), levels, evaluations: points.len(), entries })
}

/// Every multi-index of total order ≤ `max_order` in `nvars` variables.
pub fn all_partials(nvars: usize, max_order: usize) -> BTreeSet<MultiIndex> {
    let mut out = BTreeSet::new();
    let mut cur = vec![0u8; nvars];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut BTreeSet<MultiIndex>) {
        if i == cur.len() {
            out.insert(cur.clone());
            return;
        }
        for d in 0..=left {
            cur[i] = d as u8;
            rec(i + 1, left - d, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, max_order, &mut cur, &mut out);
    out
}

/// Union of the partials needed by a set of operators.
pub fn required_partials<'a>(exprs: impl IntoIterator<Item = &'a OperatorExpr>) -> BTreeSet<MultiIndex> {
    exprs.into_iter().flat_map(|e| e.partials()).collect()
}

/// Truncated Taylor data (v, Xv, X²v, ...) along one derivation X.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet<R>(pub Vec<R>);

impl<R: Real> Jet<R> {
    pub fn depth(&self) -> usize {
        self.0.len()
    }

    pub fn value(&self) -> &R {
        &self.0[0]
    }

    pub fn d(&self, k: usize) -> &R {
        &self.0[k]
    }

    pub fn constant(v: R, depth: usize) -> Self {
        let mut c = vec![R::zero(); depth];
        c[0] = v;
        Jet(c)
    }

    pub fn add(&self, o: &Self) -> Self {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a.clone() + b.clone()).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        Jet(self.0.iter().zip(&o.0).map(|(a, b)| a.clone() - b.clone()).collect())
    }

    pub fn scale(&self, s: &R) -> Self {
        Jet(self.0.iter().map(|a| a.clone() * s.clone()).collect())
    }

    /// Leibniz product, truncated to the shorter depth.
    pub fn mul(&self, o: &Self) -> Self {
        let depth = self.depth().min(o.depth());
        Jet((0..depth)
            .map(|k| {
                (0..=k).fold(R::zero(), |acc, j| {
                    acc + R::from_f64(binom(k as u8, j as u8)) * self.0[j].clone() * o.0[k - j].clone()
                })
            })
            .collect())
    }

    pub fn truncate(&self, depth: usize) -> Self {
        Jet(self.0[..depth.min(self.depth())].to_vec())
    }
}

/// Jet of `expr` along the derivation `x`: (E, X∘E, X∘X∘E, ...) evaluated
/// on `table` with the chosen estimate of each partial.
pub fn jet<R: Real>(
    expr: &OperatorExpr,
    x: &OperatorExpr,
    depth: usize,
    table: &DerivativeTable<R>,
    pick: Pick,
) -> Result<Jet<R>> {
    let mut out = Vec::with_capacity(depth);
    let mut cur = expr.clone();
    for k in 0..depth {
        out.push(cur.eval_pick(table, pick)?);
        if k + 1 < depth {
            cur = x.compose(&cur)?;
        }
    }
    Ok(Jet(out))
}

/// Sign convention for the Wronskian {f, g}_X.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum WronskianConvention {
    /// g·Xf - f·Xg, which is the same expression as Xf·g - f·Xg.
    GXfMinusFXg,
    /// f·Xg - g·Xf.
    FXgMinusGXf,
}

/// {f, g}_X from the jets of f, g and of Xf, Xg (all along the same outer
/// derivation, so the result is again a jet).
pub fn wronskian<R: Real>(conv: WronskianConvention, f: &Jet<R>, g: &Jet<R>, xf: &Jet<R>, xg: &Jet<R>) -> Jet<R> {
    let w = g.mul(xf).sub(&f.mul(xg));
    match conv {
        WronskianConvention::GXfMinusFXg => w,
        WronskianConvention::FXgMinusGXf => w.scale(&-R::one()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_ops_and_commutator() {
        let n = 3;
        let bm1 = boundary_op(-1, n, &[1, 2]).unwrap();
        let b0 = boundary_op(0, n, &[1, 2]).unwrap();
        assert_eq!(bm1.terms().count(), 2);
        let comm = OperatorExpr::commutator(&bm1, &b0).unwrap();
        assert_eq!(comm, bm1);
        let da = OperatorExpr::partial(n, 0);
        assert_eq!(da.compose(&bm1).unwrap(), bm1.compose(&da).unwrap());
        let bb = bm1.compose(&bm1).unwrap();
        assert!(bb.terms().all(|(a, _, _)| order_of(a) == 2));
    }

    #[test]
    fn orbit_chart_commutator() {
        let chart = Chart::Orbit { translate: 1, dilate: 2 };
        let bm1 = chart.boundary_op(3, -1).unwrap();
        let b0 = chart.boundary_op(3, 0).unwrap();
        assert_eq!(OperatorExpr::commutator(&bm1, &b0).unwrap(), bm1);
    }

    #[test]
    fn order_overflow_is_reported() {
        let d = OperatorExpr::partial(1, 0);
        let d4 = d.compose(&d).unwrap().compose(&d).unwrap().compose(&d).unwrap();
        assert_eq!(d.compose(&d4), Err(Error::OrderOverflow(5)));
    }

    #[test]
    fn eval_examples() {
        let req = all_partials(2, 2);
        let t = build_table(|x: &[f64]| Ok(x[0] * x[1]), &[1.0, 2.0], &[1e-3, 1e-3], &req, 2).unwrap();
        let b0 = boundary_op(0, 2, &[0, 1]).unwrap();
        assert!((b0.eval(&t).unwrap() - 4.0).abs() < 1e-9);
        let t = build_table(|x: &[f64]| Ok(x[0] * x[0]), &[3.0, 0.0], &[1e-2, 1e-2], &req, 2).unwrap();
        let bm1 = boundary_op(-1, 2, &[0]).unwrap();
        assert!((bm1.compose(&bm1).unwrap().eval(&t).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn table_of_exponential() {
        let req = all_partials(2, 4);
        let t = build_table(|x: &[f64]| Ok((x[0] + x[1]).exp()), &[0.1, 0.2], &[2e-2, 2e-2], &req, 3).unwrap();
        let f0 = 0.3f64.exp();
        for (alpha, e) in t.entries() {
            assert!((e.value - f0).abs() < 1e-6 * f0, "{alpha:?} {}", e.value);
        }
    }

    #[test]
    fn quadratic_has_vanishing_high_partials() {
        let req = all_partials(2, 4);
        let t = build_table(|x: &[f64]| Ok(1.0 + x[0] - 2.0 * x[0] * x[1] + x[1] * x[1]), &[0.3, -0.7], &[0.1, 0.1], &req, 2)
            .unwrap();
        for (alpha, e) in t.entries() {
            if order_of(alpha) >= 3 {
                assert!(e.value.abs() < 1e-9, "{alpha:?}");
            }
        }
        assert!((t.get(&[1, 1]).unwrap() + 2.0).abs() < 1e-10);
    }

    #[test]
    fn jets_follow_leibniz() {
        let f = Jet(vec![2.0, 3.0, 5.0]);
        let g = Jet(vec![7.0, 11.0, 13.0]);
        let p = f.mul(&g);
        assert_eq!(p.0, vec![14.0, 2.0 * 11.0 + 3.0 * 7.0, 2.0 * 13.0 + 2.0 * 3.0 * 11.0 + 5.0 * 7.0]);
    }
}
