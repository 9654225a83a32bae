//! The constant `C_r`, the comparison function `pi_{1/2}(x)`, the cutoff
//! `B(r)`, and the partial sums `sum_{B(r) < p <= x} H(r^2 - 4p) / 2p`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::arith::sieve_primes;
use crate::classnum::ClassNumberCache;
use crate::error::{Error, Result};

/// Truncation prime used wherever a single value of `C_r` is needed.
pub const DEFAULT_TRUNCATION: u64 = 1_000_000;

/// Relative tolerance of the `pi_{1/2}` quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantValue {
    pub r: i64,
    pub value: f64,
    pub truncation_prime: u64,
    /// Bound on `|log C_r - log(truncated product)|`.
    pub tail_bound: f64,
}

/// Euler factor at the prime `l`: `1 - 1/l^2` when `l | r`, otherwise
/// `l (l^2 - l - 1) / ((l - 1)(l^2 - 1))`.
pub fn euler_factor(l: u64, r: i64) -> f64 {
    1.0 - euler_defect(l, r)
}

/// `1 - euler_factor(l, r)`, computed without cancellation.
fn euler_defect(l: u64, r: i64) -> f64 {
    let lf = l as f64;
    if r % l as i64 == 0 {
        1.0 / (lf * lf)
    } else {
        1.0 / ((lf - 1.0) * (lf * lf - 1.0))
    }
}

/// `(2/pi) * prod_{l <= T} euler_factor(l, r)`. Every prime divides `0`, so
/// `r = 0` takes the `l | r` factor throughout.
pub fn euler_product_cr(r: i64, truncation_prime: u64) -> Result<ConstantValue> {
    if truncation_prime < 3 {
        return Err(Error::InvalidArgument(format!("truncation prime {truncation_prime} < 3")));
    }
    let primes = sieve_primes(truncation_prime)?;
    let log_product: f64 = primes.iter().map(|l| (-euler_defect(l, r)).ln_1p()).sum();
    let t = truncation_prime as f64;
    // |log(1 - y)| <= 2y for y <= 1/2.
    let tail_bound = if r == 0 || truncation_prime < r.unsigned_abs() { 2.0 / t } else { 1.0 / ((t - 1.0) * (t - 1.0)) };
    Ok(ConstantValue { r, value: 2.0 / PI * log_product.exp(), truncation_prime, tail_bound })
}

/// `C_0 = (2/pi) / zeta(2) = 12 / pi^3`.
pub fn c_zero_closed_form() -> f64 {
    12.0 / PI.powi(3)
}

/// `C_r` at the default truncation, or in closed form for `r = 0`.
pub fn constant_cr(r: i64) -> f64 {
    if r == 0 {
        c_zero_closed_form()
    } else {
        euler_product_cr(r, DEFAULT_TRUNCATION).expect("default truncation is valid").value
    }
}

/// `B(r) = max{3, r, r^2/4}` as a real number; sums run over primes `p > B(r)`.
pub fn b_of_r(r: i64) -> f64 {
    let rf = r as f64;
    3f64.max(rf).max(rf * rf / 4.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonPoint {
    pub x: f64,
    pub pi_half: f64,
    pub quadrature_error: f64,
}

/// `pi_{1/2}(x) = int_2^x dt / (2 sqrt(t) log t)`.
pub fn pi_half(x: f64) -> Result<ComparisonPoint> {
    let (value, error) = pi_half_between(2.0, x)?;
    Ok(ComparisonPoint { x, pi_half: value, quadrature_error: error })
}

/// `int_lo^hi dt / (2 sqrt(t) log t)` for `2 <= lo <= hi`, with an error estimate.
///
/// With `t = u^2` the integrand becomes `1 / (2 log u)` on `[sqrt(lo), sqrt(hi)]`,
/// which adaptive Simpson handles well. The interval is split at powers of two
/// so each piece sees a bounded range of scales.
pub fn pi_half_between(lo: f64, hi: f64) -> Result<(f64, f64)> {
    if lo.is_nan() || lo < 2.0 || hi.is_nan() || hi < lo || !hi.is_finite() {
        return Err(Error::InvalidArgument(format!("need 2 <= lo <= hi, got [{lo}, {hi}]")));
    }
    let f = |u: f64| 0.5 / u.ln();
    let (ulo, uhi) = (lo.sqrt(), hi.sqrt());
    let mut total = 0.0;
    let mut error = 0.0;
    let mut a = ulo;
    while a < uhi {
        let b = (a * 2.0).min(uhi);
        let whole = simpson(&f, a, b);
        let tol = QUADRATURE_TOLERANCE * whole.abs() * 1e-2;
        let (v, e) = adaptive_simpson(&f, a, b, whole, tol, 48);
        total += v;
        error += e;
        a = b;
    }
    Ok((total, error))
}

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
}

fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> (f64, f64) {
    let m = 0.5 * (a + b);
    let left = simpson(f, a, m);
    let right = simpson(f, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, delta.abs() / 15.0);
    }
    let (lv, le) = adaptive_simpson(f, a, m, left, tol / 2.0, depth - 1);
    let (rv, re) = adaptive_simpson(f, m, b, right, tol / 2.0, depth - 1);
    (lv + rv, le + re)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PartialSum {
    pub x: u64,
    pub r: i64,
    pub primes: usize,
    pub sum: f64,
    pub prediction: f64,
    pub ratio: f64,
}

/// `sum_{B(r) < p <= x} H(r^2 - 4p) / (2p)` against `C_r pi_{1/2}(x)`.
pub fn lemma3_partial_sum(x: u64, r: i64, cache: &ClassNumberCache) -> Result<PartialSum> {
    let prediction = if x >= 2 { constant_cr(r) * pi_half(x as f64)?.pi_half } else { 0.0 };
    let mut sum = 0.0;
    let mut count = 0;
    if x >= 2 && (x as f64) > b_of_r(r) {
        let primes = sieve_primes(x)?;
        let range = primes.between(b_of_r(r), x);
        let hs = cache.for_primes(r, range)?;
        sum = kahan_sum(range.iter().zip(&hs).map(|(&p, &h)| h as f64 / (2.0 * p as f64)));
        count = range.len();
    }
    let ratio = if count == 0 || prediction == 0.0 { 0.0 } else { sum / prediction };
    Ok(PartialSum { x, r, primes: count, sum, prediction, ratio })
}

/// Compensated summation in iteration order.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
