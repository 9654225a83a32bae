//! Primes and residue symbols modulo odd primes.
//!
//! All moduli are below [`MAX_MODULUS`] (2^31) so products of two residues fit
//! in a `u64` without overflow.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Largest modulus (exclusive) accepted by the modular routines.
pub const MAX_MODULUS: u64 = 1 << 31;

/// All primes up to and including `limit`, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeList {
    limit: u64,
    primes: Vec<u64>,
}

impl PrimeList {
    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn as_slice(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = u64> + '_ {
        self.primes.iter().copied()
    }

    /// Primes `p` with `lower < p <= upper`, where `lower` may be fractional.
    pub fn between(&self, lower: f64, upper: u64) -> &[u64] {
        let start = self.primes.partition_point(|&p| (p as f64) <= lower);
        let end = self.primes.partition_point(|&p| p <= upper);
        if start >= end {
            &[]
        } else {
            &self.primes[start..end]
        }
    }
}

/// Sieve of Eratosthenes over odd numbers.
pub fn sieve_primes(limit: u64) -> Result<PrimeList> {
    if limit < 2 {
        return Err(Error::EmptyRange(format!("no primes below {limit}")));
    }
    if limit > u32::MAX as u64 {
        return Err(Error::Resource(format!("sieve limit {limit} too large")));
    }
    // composite[i] describes the odd number 2i + 1.
    let half = ((limit - 1) / 2 + 1) as usize;
    let mut composite = vec![false; half];
    composite[0] = true;
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if !composite[i] {
            let step = 2 * i + 1;
            let mut j = (step * step) / 2;
            while j < half {
                composite[j] = true;
                j += step;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_prime_count(limit));
    primes.push(2);
    primes.extend(
        composite
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(i, _)| 2 * i as u64 + 1),
    );
    Ok(PrimeList { limit, primes })
}

fn estimate_prime_count(limit: u64) -> usize {
    let x = limit as f64;
    (1.3 * x / x.ln().max(1.0)) as usize + 8
}

/// `base^exp mod m` for `m <= 2^32`.
pub fn pow_mod(base: u64, mut exp: u64, m: u64) -> u64 {
    debug_assert!(m > 0 && m <= 1 << 32);
    if m == 1 {
        return 0;
    }
    let mut result = 1u64;
    let mut base = base % m;
    while exp > 0 {
        if exp & 1 == 1 {
            result = result * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    result
}

/// Deterministic Miller-Rabin for `n < 2^32` (bases 2, 7, 61).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for small in [2u64, 3, 5, 7, 11, 13, 61] {
        if n == small {
            return true;
        }
        if n.is_multiple_of(small) {
            return false;
        }
    }
    if n > u32::MAX as u64 {
        // Out of range for the fixed witness set; fall back to trial division.
        let mut d = 17;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 2;
        }
        return true;
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 7, 61] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = x * x % n;
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Least non-negative residue of `a` modulo `p`.
pub fn residue(a: i64, p: u64) -> u64 {
    a.rem_euclid(p as i64) as u64
}

pub(crate) fn check_prime(p: u64) -> Result<()> {
    if p >= MAX_MODULUS {
        return Err(Error::InvalidModulus { modulus: p, reason: "exceeds 2^31" });
    }
    if !is_prime(p) {
        return Err(Error::InvalidModulus { modulus: p, reason: "not prime" });
    }
    Ok(())
}

pub(crate) fn check_odd_prime(p: u64) -> Result<()> {
    if p == 2 {
        return Err(Error::InvalidModulus { modulus: p, reason: "even" });
    }
    check_prime(p)
}

/// Legendre symbol `(a/p)` by Euler's criterion.
pub fn legendre(a: i64, p: u64) -> Result<i8> {
    check_odd_prime(p)?;
    Ok(legendre_unchecked(residue(a, p), p))
}

pub(crate) fn legendre_unchecked(a: u64, p: u64) -> i8 {
    match pow_mod(a, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Distinct prime factors in ascending order.
pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Smallest primitive root modulo the odd prime `p`.
pub fn primitive_root(p: u64) -> Result<u64> {
    check_odd_prime(p)?;
    let factors = prime_factors(p - 1);
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .ok_or(Error::InvalidModulus { modulus: p, reason: "no primitive root" })
}

/// Value of the quartic residue symbol: zero, or `i^k` for `k` in `0..4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuarticSymbol {
    Zero,
    /// `i^k`, with `k` reduced mod 4.
    Unit(u8),
}

impl QuarticSymbol {
    pub const ONE: QuarticSymbol = QuarticSymbol::Unit(0);

    pub fn pow(self, k: i64) -> QuarticSymbol {
        match self {
            QuarticSymbol::Zero if k == 0 => QuarticSymbol::ONE,
            QuarticSymbol::Zero => QuarticSymbol::Zero,
            QuarticSymbol::Unit(e) => QuarticSymbol::Unit((e as i64 * k).rem_euclid(4) as u8),
        }
    }

    /// The square of a quartic symbol is the Legendre symbol.
    pub fn square(self) -> i8 {
        match self {
            QuarticSymbol::Zero => 0,
            QuarticSymbol::Unit(e) if e % 2 == 0 => 1,
            QuarticSymbol::Unit(_) => -1,
        }
    }

    pub fn to_complex(self) -> Complex64 {
        match self {
            QuarticSymbol::Zero => Complex64::new(0.0, 0.0),
            QuarticSymbol::Unit(0) => Complex64::new(1.0, 0.0),
            QuarticSymbol::Unit(1) => Complex64::new(0.0, 1.0),
            QuarticSymbol::Unit(2) => Complex64::new(-1.0, 0.0),
            QuarticSymbol::Unit(_) => Complex64::new(0.0, -1.0),
        }
    }
}

/// The order-4 character `chi_4` mod `p = 1 (mod 4)`, normalized by
/// `chi_4(g) = i` for the smallest primitive root `g`.
pub fn quartic_symbol(a: i64, p: u64) -> Result<QuarticSymbol> {
    check_odd_prime(p)?;
    if p % 4 != 1 {
        return Err(Error::UnsupportedModulus { modulus: p, reason: "quartic symbol needs p = 1 mod 4" });
    }
    let a = residue(a, p);
    if a == 0 {
        return Ok(QuarticSymbol::Zero);
    }
    let g = primitive_root(p)?;
    let zeta = pow_mod(g, (p - 1) / 4, p);
    let target = pow_mod(a, (p - 1) / 4, p);
    let mut power = 1;
    for k in 0..4u8 {
        if power == target {
            return Ok(QuarticSymbol::Unit(k));
        }
        power = power * zeta % p;
    }
    unreachable!("a^((p-1)/4) is a fourth root of unity")
}

/// Whether `a` is a fourth power modulo the odd prime `p`.
pub fn is_quartic_residue(a: i64, p: u64) -> Result<bool> {
    check_odd_prime(p)?;
    let r = residue(a, p);
    if r == 0 {
        return Err(Error::DivisibleByModulus { value: a, p });
    }
    let g = if p % 4 == 1 { 4 } else { 2 };
    Ok(pow_mod(r, (p - 1) / g, p) == 1)
}

/// Inverse of `a` modulo the prime `p`.
pub fn mod_inv(a: i64, p: u64) -> Result<u64> {
    check_prime(p)?;
    let r = residue(a, p);
    if r == 0 {
        return Err(Error::DivisibleByModulus { value: a, p });
    }
    Ok(inv_unchecked(r, p))
}

/// Extended Euclid; `a` must be a unit mod `m`.
pub(crate) fn inv_unchecked(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i64, m as i64);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i64) as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
