//! Quadrature rules: adaptive Gauss-Kronrod in `f64` and Gauss-Legendre
//! nodes at any precision.

use std::any::Any;
use std::collections::{BinaryHeap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::real::Real;

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// One 15-point Kronrod panel; returns (estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut rk = fc * WGK[7];
    let mut rg = fc * WG[3];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let fs = f(c - h * x) + f(c + h * x);
        rk += WGK[j] * fs;
        if j % 2 == 1 {
            rg += WG[j / 2] * fs;
        }
    }
    (rk * h, ((rk - rg) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, o: &Self) -> bool {
        self.error == o.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Panel {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&o.error)
    }
}

/// Globally adaptive Gauss-Kronrod over a finite interval, starting from
/// `initial` equal panels.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64, initial: usize) -> QuadResult {
    if a == b {
        return QuadResult { value: 0.0, error: 0.0, evaluations: 0 };
    }
    let n0 = initial.max(1);
    let mut heap = BinaryHeap::new();
    let (mut total, mut err) = (0.0, 0.0);
    for i in 0..n0 {
        let lo = a + (b - a) * i as f64 / n0 as f64;
        let hi = if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 };
        let (v, e) = gk15(&f, lo, hi);
        total += v;
        err += e;
        heap.push(Panel { a: lo, b: hi, value: v, error: e });
    }
    let mut evaluations = 15 * n0;
    let max_panels = 4000;
    while err > abs_tol.max(rel_tol * total.abs()) && heap.len() < max_panels {
        let p = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            heap.push(p);
            break;
        }
        let (v1, e1) = gk15(&f, p.a, mid);
        let (v2, e2) = gk15(&f, mid, p.b);
        evaluations += 30;
        total += v1 + v2 - p.value;
        err += e1 + e2 - p.error;
        heap.push(Panel { a: p.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: p.b, value: v2, error: e2 });
    }
    // re-sum to shed accumulated drift from the running totals
    let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error));
    QuadResult { value, error, evaluations }
}

/// Iterated adaptive quadrature of f(x, y) over [ax,bx] x [ay,by].
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    abs_tol: f64,
    rel_tol: f64,
) -> QuadResult {
    let inner = |x: f64| integrate(|y| f(x, y), ay, by, abs_tol * 1e-2, rel_tol * 1e-2, 4).value;
    integrate(inner, ax, bx, abs_tol, rel_tol, 4)
}

type NodeCache = Mutex<HashMap<(usize, u32, &'static str), Arc<dyn Any + Send + Sync>>>;

fn node_cache() -> &'static NodeCache {
    static CACHE: OnceLock<NodeCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Legendre nodes and weights on [-1, 1] at the current precision of `R`,
/// nodes ascending.
pub fn gauss_legendre<R: Real>(m: usize) -> Arc<(Vec<R>, Vec<R>)> {
    let key = (m, R::precision_bits(), std::any::type_name::<R>());
    if let Some(hit) = node_cache().lock().unwrap().get(&key) {
        if let Ok(v) = hit.clone().downcast::<(Vec<R>, Vec<R>)>() {
            return v;
        }
    }
    let rule = Arc::new(compute_gauss_legendre::<R>(m));
    node_cache().lock().unwrap().insert(key, rule.clone());
    rule
}

fn legendre_and_derivative<R: Real>(m: usize, x: &R) -> (R, R) {
    let mut p0 = R::one();
    let mut p1 = x.clone();
    for k in 2..=m {
        let kr = R::from_i64(k as i64);
        let p2 = (R::from_i64(2 * k as i64 - 1) * x.clone() * p1.clone() - R::from_i64(k as i64 - 1) * p0) / kr;
        p0 = p1;
        p1 = p2;
    }
    let dp = R::from_i64(m as i64) * (x.clone() * p1.clone() - p0) / (x.clone() * x.clone() - R::one());
    (p1, dp)
}

fn compute_gauss_legendre<R: Real>(m: usize) -> (Vec<R>, Vec<R>) {
    assert!(m >= 1);
    let mut nodes = vec![R::zero(); m];
    let mut weights = vec![R::zero(); m];
    let tol = R::epsilon() * R::from_i64(8);
    for i in 0..m.div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut x = R::from_f64(guess);
        let mut dp = R::one();
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(m, &x);
            let dx = p / d.clone();
            x -= dx.clone();
            dp = d;
            if dx.abs() <= tol.clone() * x.abs().max_with_one() {
                let (_, d) = legendre_and_derivative(m, &x);
                dp = d;
                break;
            }
        }
        let w = R::from_i64(2) / ((R::one() - x.clone() * x.clone()) * dp.clone() * dp);
        nodes[m - 1 - i] = x.clone();
        nodes[i] = -x;
        weights[i] = w.clone();
        weights[m - 1 - i] = w;
    }
    if m % 2 == 1 {
        nodes[m / 2] = R::zero();
    }
    (nodes, weights)
}

trait MaxWithOne {
    fn max_with_one(self) -> Self;
}
impl<R: Real> MaxWithOne for R {
    fn max_with_one(self) -> Self {
        if self > R::one() {
            self
        } else {
            R::one()
        }
    }
}

/// Gauss-Legendre rule mapped to [lo, hi].
pub fn gauss_legendre_on<R: Real>(m: usize, lo: &R, hi: &R) -> (Vec<R>, Vec<R>) {
    let rule = gauss_legendre::<R>(m);
    let half = (hi.clone() - lo.clone()) / R::from_i64(2);
    let mid = (hi.clone() + lo.clone()) / R::from_i64(2);
    let xs = rule.0.iter().map(|x| mid.clone() + half.clone() * x.clone()).collect();
    let ws = rule.1.iter().map(|w| half.clone() * w.clone()).collect();
    (xs, ws)
}
