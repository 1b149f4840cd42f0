//! Interval unions, source parameters and precision settings.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::real::{Mp, Real};

/// Sorted union of disjoint intervals with extended-real endpoints.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalUnion<R = f64> {
    intervals: Vec<(R, R)>,
}

impl<R: Real> IntervalUnion<R> {
    pub fn empty() -> Self {
        IntervalUnion { intervals: Vec::new() }
    }

    pub fn real_line() -> Self {
        IntervalUnion { intervals: vec![(R::neg_infinity(), R::infinity())] }
    }

    pub fn interval(lo: R, hi: R) -> Result<Self> {
        Self::normalize(vec![(lo, hi)])
    }

    /// Merge, sort and validate a raw list of intervals.
    pub fn normalize(raw: Vec<(R, R)>) -> Result<Self> {
        let mut raw = raw;
        for (lo, hi) in &raw {
            if lo.to_f64().is_nan() || hi.to_f64().is_nan() {
                return Err(Error::invalid("interval endpoint is NaN"));
            }
            if lo >= hi {
                return Err(Error::invalid(format!("interval [{lo}, {hi}] has lo >= hi")));
            }
            if *lo == R::infinity() || *hi == R::neg_infinity() {
                return Err(Error::invalid("interval lies entirely at infinity"));
            }
        }
        raw.sort_by(|x, y| x.0.cmp_total(&y.0));
        let mut out: Vec<(R, R)> = Vec::with_capacity(raw.len());
        for (lo, hi) in raw {
            if let Some(last) = out.last_mut() {
                if lo <= last.1 {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                    continue;
                }
            }
            out.push((lo, hi));
        }
        Ok(IntervalUnion { intervals: out })
    }

    /// Build from the flat endpoint list b1 < b2 < ... < b2r.
    pub fn from_endpoints(b: &[R]) -> Result<Self> {
        if b.len() % 2 != 0 {
            return Err(Error::invalid("endpoint list must have even length"));
        }
        for w in b.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::invalid("endpoints must be strictly increasing"));
            }
        }
        Ok(IntervalUnion { intervals: b.chunks(2).map(|c| (c[0].clone(), c[1].clone())).collect() })
    }

    pub fn intervals(&self) -> &[(R, R)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals.iter().all(|(lo, hi)| lo.is_finite() && hi.is_finite())
    }

    pub fn is_real_line(&self) -> bool {
        self.intervals.len() == 1 && !self.intervals[0].0.is_finite() && !self.intervals[0].1.is_finite()
    }

    /// The 2r finite boundary values, for bounded sets only.
    pub fn finite_endpoints(&self) -> Result<Vec<R>> {
        if !self.is_bounded() {
            return Err(Error::Unbounded("finite_endpoints"));
        }
        Ok(self.intervals.iter().flat_map(|(lo, hi)| [lo.clone(), hi.clone()]).collect())
    }

    /// Every finite boundary point, unbounded sets included.
    pub fn boundary_points(&self) -> Vec<R> {
        self.intervals
            .iter()
            .flat_map(|(lo, hi)| [lo.clone(), hi.clone()])
            .filter(|x| x.is_finite())
            .collect()
    }

    pub fn reflect(&self) -> Self {
        let intervals = self.intervals.iter().rev().map(|(lo, hi)| (-hi.clone(), -lo.clone())).collect();
        IntervalUnion { intervals }
    }

    pub fn complement(&self) -> Self {
        let mut out = Vec::new();
        let mut cursor = R::neg_infinity();
        for (lo, hi) in &self.intervals {
            if *lo > cursor {
                out.push((cursor.clone(), lo.clone()));
            }
            cursor = hi.clone();
        }
        if cursor < R::infinity() {
            out.push((cursor, R::infinity()));
        }
        IntervalUnion { intervals: out }
    }

    pub fn contains(&self, x: &R) -> bool {
        self.intervals.iter().any(|(lo, hi)| lo <= x && x <= hi)
    }

    pub fn is_subset_of(&self, other: &Self) -> bool {
        self.intervals
            .iter()
            .all(|(lo, hi)| other.intervals.iter().any(|(olo, ohi)| olo <= lo && hi <= ohi))
    }

    pub fn scale(&self, c: &R) -> Self {
        let mut iv: Vec<(R, R)> = self.intervals.iter().map(|(lo, hi)| (lo.clone() * c.clone(), hi.clone() * c.clone())).collect();
        if *c < R::zero() {
            iv = iv.into_iter().rev().map(|(lo, hi)| (hi, lo)).collect();
        }
        IntervalUnion { intervals: iv }
    }

    pub fn total_length(&self) -> R {
        self.intervals.iter().fold(R::zero(), |acc, (lo, hi)| acc + (hi.clone() - lo.clone()))
    }

    pub fn map<S: Real>(&self, f: impl Fn(&R) -> S) -> IntervalUnion<S> {
        IntervalUnion { intervals: self.intervals.iter().map(|(lo, hi)| (f(lo), f(hi))).collect() }
    }

    pub fn to_f64(&self) -> IntervalUnion<f64> {
        self.map(|x| x.to_f64())
    }
}

impl IntervalUnion<f64> {
    pub fn to_real<S: Real>(&self) -> IntervalUnion<S> {
        self.map(|x| S::from_f64(*x))
    }

    pub fn to_mp(&self) -> IntervalUnion<Mp> {
        self.to_real()
    }

    /// Parse "lo,hi;lo,hi" with `-inf` / `inf` accepted.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s == "empty" {
            return Ok(Self::empty());
        }
        let mut raw = Vec::new();
        for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
            let ends: Vec<&str> = part.split(',').map(str::trim).collect();
            if ends.len() != 2 {
                return Err(Error::invalid(format!("interval '{part}' must be 'lo,hi'")));
            }
            raw.push((parse_extended(ends[0])?, parse_extended(ends[1])?));
        }
        Self::normalize(raw)
    }
}

fn parse_extended(s: &str) -> Result<f64> {
    match s.to_ascii_lowercase().as_str() {
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        "inf" | "+inf" | "infinity" => Ok(f64::INFINITY),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::invalid(format!("bad endpoint '{s}'"))),
    }
}

fn fmt_extended(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x}")
    }
}

impl fmt::Display for IntervalUnion<f64> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "empty");
        }
        let parts: Vec<String> =
            self.intervals.iter().map(|(lo, hi)| format!("{},{}", fmt_extended(*lo), fmt_extended(*hi))).collect();
        write!(f, "{}", parts.join(";"))
    }
}

impl Serialize for IntervalUnion<f64> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IntervalUnion<f64> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        IntervalUnion::parse(&s).map_err(serde::de::Error::custom)
    }
}

/// External source with eigenvalue `a` of multiplicity k1 and `-a` of multiplicity k2.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub a: f64,
    pub k1: usize,
    pub k2: usize,
}

impl SourceSpec {
    pub fn new(a: f64, k1: usize, k2: usize) -> Result<Self> {
        let s = SourceSpec { a, k1, k2 };
        s.validate()?;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.k1 + self.k2
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::invalid("k1 + k2 must be at least 1"));
        }
        if !self.a.is_finite() {
            return Err(Error::invalid("a must be finite"));
        }
        Ok(())
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == 0.0 && self.k1 * self.k2 > 0
    }

    /// The dual ensemble (a, k1, k2) -> (-a, k2, k1).
    pub fn dual(&self) -> Self {
        SourceSpec { a: -self.a, k1: self.k2, k2: self.k1 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionConfig {
    pub significant_digits: u32,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for PrecisionConfig {
    fn default() -> Self {
        PrecisionConfig { significant_digits: 40, rel_tol: 1e-12, abs_tol: 1e-30 }
    }
}

impl PrecisionConfig {
    pub fn with_digits(digits: u32) -> Self {
        PrecisionConfig { significant_digits: digits, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.significant_digits < 15 {
            return Err(Error::invalid("significant_digits must be at least 15"));
        }
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::invalid("tolerances must be positive"));
        }
        Ok(())
    }

    pub fn bits(&self) -> u32 {
        crate::real::digits_to_bits(self.significant_digits)
    }
}

/// A real number stored as sign and log-magnitude.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedLogValue<R = Mp> {
    pub sign: i8,
    pub log_abs: R,
}

impl<R: Real> SignedLogValue<R> {
    pub fn zero() -> Self {
        SignedLogValue { sign: 0, log_abs: R::neg_infinity() }
    }

    pub fn one() -> Self {
        SignedLogValue { sign: 1, log_abs: R::zero() }
    }

    pub fn from_real(x: &R) -> Self {
        let sign = x.signum_i();
        if sign == 0 {
            Self::zero()
        } else {
            SignedLogValue { sign, log_abs: x.abs().ln() }
        }
    }

    pub fn from_parts(sign: i8, log_abs: R) -> Self {
        if sign == 0 {
            Self::zero()
        } else {
            SignedLogValue { sign: sign.signum(), log_abs }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn to_real(&self) -> R {
        match self.sign {
            0 => R::zero(),
            s => R::from_i64(s as i64) * self.log_abs.exp(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => s as f64 * self.log_abs.to_f64().exp(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self::from_parts(self.sign * other.sign, self.log_abs.clone() + other.log_abs.clone())
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        if other.sign == 0 {
            return Err(Error::Precision("division by a zero signed-log value".into()));
        }
        Ok(Self::from_parts(self.sign * other.sign, self.log_abs.clone() - other.log_abs.clone()))
    }

    pub fn recip(&self) -> Result<Self> {
        Self::one().div(self)
    }

    pub fn neg(&self) -> Self {
        Self::from_parts(-self.sign, self.log_abs.clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.sign == 0 {
            return other.clone();
        }
        if other.sign == 0 {
            return self.clone();
        }
        let (big, small) = if self.log_abs >= other.log_abs { (self, other) } else { (other, self) };
        let ratio = (small.log_abs.clone() - big.log_abs.clone()).exp();
        let factor = if big.sign == small.sign { R::one() + ratio } else { R::one() - ratio };
        if factor.is_zero() {
            return Self::zero();
        }
        Self::from_parts(big.sign, big.log_abs.clone() + factor.ln())
    }

    pub fn powi(&self, n: i64) -> Self {
        if n == 0 {
            return Self::one();
        }
        let sign = if self.sign == -1 && n % 2 != 0 { -1 } else { self.sign.abs() };
        Self::from_parts(sign, self.log_abs.clone() * R::from_i64(n))
    }
}
