//! Short Weierstrass curves `y^2 = x^3 + ax + b` over `F_p`, `p > 3`.
//!
//! Two curves are `F_p`-isomorphic exactly when `(a', b') = (m^4 a, m^6 b)` for
//! some unit `m`, so isomorphism classes are orbits of that action. The trace
//! distribution fast path walks one curve per `j`-invariant and obtains its
//! quadratic twist for free; brute-force variants are kept alongside for
//! cross-checking.

use std::collections::HashMap;

use serde::Serialize;

use crate::arith::{self, gcd, inv_unchecked, legendre_unchecked, pow_mod, residue};
use crate::error::{Error, Result};

/// A curve `y^2 = x^3 + ax + b` over `F_p` with `a, b` reduced into `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveParams {
    p: u64,
    a: u64,
    b: u64,
}

pub(crate) fn check_curve_prime(p: u64) -> Result<()> {
    if p <= 3 {
        return Err(Error::UnsupportedPrime(p));
    }
    arith::check_prime(p)
}

impl CurveParams {
    pub fn new(p: u64, a: i64, b: i64) -> Result<Self> {
        check_curve_prime(p)?;
        Ok(Self::from_residues(p, residue(a, p), residue(b, p)))
    }

    pub(crate) fn from_residues(p: u64, a: u64, b: u64) -> Self {
        debug_assert!(a < p && b < p);
        CurveParams { p, a, b }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    pub fn b(&self) -> u64 {
        self.b
    }

    /// `4a^3 + 27b^2 mod p`.
    pub fn discriminant(&self) -> u64 {
        discriminant(self.a, self.b, self.p)
    }

    pub fn is_singular(&self) -> bool {
        self.discriminant() == 0
    }

    /// `j = 1728 * 4a^3 / (4a^3 + 27b^2)`, or `None` for a singular curve.
    pub fn j_invariant(&self) -> Option<u64> {
        let p = self.p;
        let delta = self.discriminant();
        if delta == 0 {
            return None;
        }
        let four_a3 = 4 * pow_mod(self.a, 3, p) % p;
        Some(1728 % p * four_a3 % p * inv_unchecked(delta, p) % p)
    }

    fn require_nonsingular(&self) -> Result<()> {
        if self.is_singular() {
            Err(Error::SingularCurve { p: self.p, a: self.a as i64, b: self.b as i64 })
        } else {
            Ok(())
        }
    }
}

fn discriminant(a: u64, b: u64, p: u64) -> u64 {
    (4 * pow_mod(a, 3, p) + 27 * (b * b % p)) % p
}

/// `floor(2 sqrt(p))`, the largest trace allowed by Hasse's bound.
pub fn hasse_bound(p: u64) -> i64 {
    let n = 4 * p;
    let mut s = (n as f64).sqrt() as u64;
    while s * s > n {
        s -= 1;
    }
    while (s + 1) * (s + 1) <= n {
        s += 1;
    }
    s as i64
}

/// Trace of Frobenius, `-sum_x (x^3 + ax + b / p)`, by direct point counting.
pub fn trace_of_frobenius(c: &CurveParams) -> Result<i64> {
    c.require_nonsingular()?;
    let p = c.p;
    let mut sum = 0i64;
    for x in 0..p {
        let v = (pow_mod(x, 3, p) + c.a * x + c.b) % p;
        sum += legendre_unchecked(v, p) as i64;
    }
    Ok(-sum)
}

/// Quadratic character and cube tables for one prime, for O(p) trace evaluation.
pub(crate) struct FieldTables {
    p: u64,
    chi: Vec<i8>,
    cubes: Vec<u64>,
}

impl FieldTables {
    pub(crate) fn new(p: u64) -> Self {
        let mut chi = vec![-1i8; p as usize];
        chi[0] = 0;
        for x in 1..p {
            chi[(x * x % p) as usize] = 1;
        }
        let cubes = (0..p).map(|x| x * x % p * x % p).collect();
        FieldTables { p, chi, cubes }
    }

    pub(crate) fn trace(&self, a: u64, b: u64) -> i64 {
        let p = self.p;
        let mut ax = 0u64;
        let mut sum = 0i64;
        for &cube in &self.cubes {
            let mut v = cube + ax + b;
            if v >= p {
                v -= p;
            }
            if v >= p {
                v -= p;
            }
            sum += self.chi[v as usize] as i64;
            ax += a;
            if ax >= p {
                ax -= p;
            }
        }
        -sum
    }
}

/// The orbit `{(m^4 a, m^6 b) : m in F_p*}`, sorted.
pub fn orbit(c: &CurveParams) -> Vec<(u64, u64)> {
    let p = c.p;
    let mut out: Vec<(u64, u64)> = (1..p)
        .map(|m| {
            let m2 = m * m % p;
            let m4 = m2 * m2 % p;
            (m4 * c.a % p, m4 * m2 % p * c.b % p)
        })
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Which of the orbit-size cases applies to a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrbitCase {
    /// `a = 0`, `p = 1 mod 3`: size `(p-1)/6`.
    ZeroA,
    /// `b = 0`, `p = 1 mod 4`: size `(p-1)/4`.
    ZeroB,
    /// `a, b != 0`: size `(p-1)/2`.
    Generic,
    /// `a = 0` with `p = 2 mod 3`, or `b = 0` with `p = 3 mod 4`. The size
    /// table does not single these out; they are sized by enumeration.
    Unlisted,
}

pub fn orbit_case(c: &CurveParams) -> OrbitCase {
    match (c.a, c.b) {
        (0, _) if c.p % 3 == 1 => OrbitCase::ZeroA,
        (_, 0) if c.p % 4 == 1 => OrbitCase::ZeroB,
        (0, _) | (_, 0) => OrbitCase::Unlisted,
        _ => OrbitCase::Generic,
    }
}

/// Number of `(a', b')` pairs isomorphic to `c`.
pub fn orbit_size(c: &CurveParams) -> Result<u64> {
    c.require_nonsingular()?;
    let p = c.p;
    Ok(match orbit_case(c) {
        OrbitCase::ZeroA => (p - 1) / 6,
        OrbitCase::ZeroB => (p - 1) / 4,
        OrbitCase::Generic => (p - 1) / 2,
        OrbitCase::Unlisted => orbit(c).len() as u64,
    })
}

fn same_field(c1: &CurveParams, c2: &CurveParams) -> Result<()> {
    if c1.p != c2.p {
        return Err(Error::FieldMismatch(c1.p, c2.p));
    }
    c1.require_nonsingular()?;
    c2.require_nonsingular()
}

/// Exhaustive search for `m` with `c = m^4 a` and `d = m^6 b`.
pub fn are_isomorphic_direct(c1: &CurveParams, c2: &CurveParams) -> Result<bool> {
    same_field(c1, c2)?;
    let p = c1.p;
    Ok((1..p).any(|m| {
        let m2 = m * m % p;
        let m4 = m2 * m2 % p;
        m4 * c1.a % p == c2.a && m4 * m2 % p * c1.b % p == c2.b
    }))
}

/// Isomorphism test through residue symbols, valid when `p` divides none of
/// the four coefficients.
///
/// For `p = 1 mod 4`: `c/a` is a fourth power and `(c/a)^3 = (d/b)^2`.
/// For `p = 3 mod 4`: `c/a` and `d/b` are squares and `(c/a)^3 = (d/b)^2`.
pub fn are_isomorphic_criterion(c1: &CurveParams, c2: &CurveParams) -> Result<bool> {
    same_field(c1, c2)?;
    let p = c1.p;
    if c1.a == 0 || c1.b == 0 || c2.a == 0 || c2.b == 0 {
        return Err(Error::CriterionInapplicable(p));
    }
    let ratio_a = c2.a * inv_unchecked(c1.a, p) % p;
    let ratio_b = c2.b * inv_unchecked(c1.b, p) % p;
    let linked = pow_mod(ratio_a, 3, p) == ratio_b * ratio_b % p;
    if !linked {
        return Ok(false);
    }
    if p % 4 == 1 {
        arith::is_quartic_residue(ratio_a as i64, p)
    } else {
        Ok(legendre_unchecked(ratio_a, p) == 1 && legendre_unchecked(ratio_b, p) == 1)
    }
}

/// A `p x p` bit table indexed by residue pairs `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitTable {
    side: u64,
    words: Vec<u64>,
}

impl BitTable {
    pub fn new(side: u64) -> Self {
        BitTable { side, words: vec![0; Self::word_count(side)] }
    }

    pub fn word_count(side: u64) -> usize {
        ((side * side).div_ceil(64)) as usize
    }

    pub fn from_words(side: u64, words: Vec<u64>) -> Option<Self> {
        (words.len() == Self::word_count(side)).then_some(BitTable { side, words })
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, a: u64, b: u64) -> bool {
        let i = a * self.side + b;
        self.words[(i >> 6) as usize] >> (i & 63) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, a: u64, b: u64) {
        let i = a * self.side + b;
        self.words[(i >> 6) as usize] |= 1 << (i & 63);
    }

    pub fn count_ones(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        let side = self.side;
        self.words.iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as u64;
                w &= w - 1;
                let i = wi as u64 * 64 + bit;
                Some((i / side, i % side))
            })
        })
    }
}

/// Which residue pairs mod `p` have trace `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Membership {
    pub r: i64,
    pub table: BitTable,
}

/// Exact trace histogram `r -> N_r(p)` over nonsingular pairs mod `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceDistribution {
    p: u64,
    hasse: i64,
    counts: Vec<u64>,
    membership: Option<Membership>,
}

impl TraceDistribution {
    pub(crate) fn from_parts(p: u64, counts: Vec<u64>, membership: Option<Membership>) -> Option<Self> {
        let hasse = hasse_bound(p);
        if counts.len() != (2 * hasse + 1) as usize {
            return None;
        }
        Some(TraceDistribution { p, hasse, counts, membership })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn hasse_bound(&self) -> i64 {
        self.hasse
    }

    /// `N_r(p)`; zero outside the Hasse interval.
    pub fn count(&self, r: i64) -> u64 {
        if r.abs() > self.hasse {
            0
        } else {
            self.counts[(r + self.hasse) as usize]
        }
    }

    /// Histogram entries for `r = -hasse ..= hasse`.
    pub fn raw_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, u64)> + '_ {
        self.counts.iter().enumerate().map(move |(i, &n)| (i as i64 - self.hasse, n))
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn membership(&self) -> Option<&Membership> {
        self.membership.as_ref()
    }

    pub fn into_membership(self) -> Option<Membership> {
        self.membership
    }
}

fn hasse_index(r: i64, hasse: i64) -> usize {
    debug_assert!(r.abs() <= hasse, "trace {r} beyond Hasse bound {hasse}");
    (r + hasse) as usize
}

fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&n| legendre_unchecked(n, p) == -1).expect("odd prime has a nonresidue")
}

fn mark_orbit(table: &mut BitTable, p: u64, a: u64, b: u64) {
    for m in 1..p {
        let m2 = m * m % p;
        let m4 = m2 * m2 % p;
        table.set(m4 * a % p, m4 * m2 % p * b % p);
    }
}

/// Exact trace distribution in O(p^2): one curve per `j`-invariant, with the
/// quadratic twist contributing the negated trace. The `j = 0` and `j = 1728`
/// families are split by cosets of sixth (resp. fourth) powers.
pub fn trace_distribution(p: u64, membership_for: Option<i64>) -> Result<TraceDistribution> {
    check_curve_prime(p)?;
    let tables = FieldTables::new(p);
    let hasse = hasse_bound(p);
    let mut counts = vec![0u64; (2 * hasse + 1) as usize];
    let mut table = membership_for.map(|_| BitTable::new(p));
    let wanted = membership_for.unwrap_or(i64::MIN);

    let half = (p - 1) / 2;
    let nonresidue = smallest_nonresidue(p);
    let n2 = nonresidue * nonresidue % p;
    let n3 = n2 * nonresidue % p;
    let c1728 = 1728 % p;
    for j in 1..p {
        if j == c1728 {
            continue;
        }
        let k = j * inv_unchecked((c1728 + p - j) % p, p) % p;
        let (a, b) = (3 * k % p, 2 * k % p);
        let t = tables.trace(a, b);
        counts[hasse_index(t, hasse)] += half;
        counts[hasse_index(-t, hasse)] += half;
        if let Some(table) = table.as_mut() {
            if t == wanted {
                mark_orbit(table, p, a, b);
            }
            if -t == wanted {
                mark_orbit(table, p, n2 * a % p, n3 * b % p);
            }
        }
    }

    // j = 0 (a = 0) and j = 1728 (b = 0): the class of the nonzero coefficient
    // is fixed by its image in F_p* / (F_p*)^g.
    for (g, zero_a) in [(gcd(6, p - 1), true), (gcd(4, p - 1), false)] {
        let mut by_coset: HashMap<u64, i64> = HashMap::with_capacity(g as usize);
        for v in 1..p {
            let key = pow_mod(v, (p - 1) / g, p);
            let (a, b) = if zero_a { (0, v) } else { (v, 0) };
            let t = *by_coset.entry(key).or_insert_with(|| tables.trace(a, b));
            counts[hasse_index(t, hasse)] += 1;
            if t == wanted {
                if let Some(table) = table.as_mut() {
                    table.set(a, b);
                }
            }
        }
    }

    let membership = membership_for.zip(table).map(|(r, table)| Membership { r, table });
    Ok(TraceDistribution { p, hasse, counts, membership })
}

/// O(p^3) reference: the trace of every nonsingular pair.
pub fn trace_distribution_brute(p: u64, membership_for: Option<i64>) -> Result<TraceDistribution> {
    check_curve_prime(p)?;
    let tables = FieldTables::new(p);
    let hasse = hasse_bound(p);
    let mut counts = vec![0u64; (2 * hasse + 1) as usize];
    let mut table = membership_for.map(|_| BitTable::new(p));
    for a in 0..p {
        for b in 0..p {
            if discriminant(a, b, p) == 0 {
                continue;
            }
            let t = tables.trace(a, b);
            counts[hasse_index(t, hasse)] += 1;
            if Some(t) == membership_for {
                table.as_mut().unwrap().set(a, b);
            }
        }
    }
    let membership = membership_for.zip(table).map(|(r, table)| Membership { r, table });
    Ok(TraceDistribution { p, hasse, counts, membership })
}

/// One `F_p`-isomorphism class: its trace, smallest member and size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoClass {
    pub trace: i64,
    pub representative: (u64, u64),
    pub size: u64,
}

impl IsoClass {
    /// Classes are either entirely `a, b != 0` or entirely on an axis.
    pub fn is_generic(&self) -> bool {
        self.representative.0 != 0 && self.representative.1 != 0
    }
}

/// Partition of every nonsingular pair mod `p` into isomorphism classes.
pub fn iso_classes(p: u64) -> Result<Vec<IsoClass>> {
    check_curve_prime(p)?;
    let tables = FieldTables::new(p);
    let mut seen = BitTable::new(p);
    let mut classes = Vec::new();
    for a in 0..p {
        for b in 0..p {
            if seen.get(a, b) || discriminant(a, b, p) == 0 {
                continue;
            }
            let members = orbit(&CurveParams::from_residues(p, a, b));
            for &(x, y) in &members {
                seen.set(x, y);
            }
            // Scanning in lexicographic order makes (a, b) the smallest member.
            classes.push(IsoClass { trace: tables.trace(a, b), representative: (a, b), size: members.len() as u64 });
        }
    }
    Ok(classes)
}

/// Isomorphism classes with a given trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsoClassSummary {
    pub p: u64,
    pub r: i64,
    /// All classes with trace `r`.
    pub class_count: u64,
    /// Classes whose members have `a, b != 0`.
    pub nonzero_class_count: u64,
    pub classes: Vec<IsoClass>,
}

impl IsoClassSummary {
    /// One `(u, v)` with `u, v != 0` per generic class.
    pub fn representatives(&self) -> Vec<(u64, u64)> {
        self.classes.iter().filter(|c| c.is_generic()).map(|c| c.representative).collect()
    }
}

pub fn iso_classes_with_trace(p: u64, r: i64) -> Result<IsoClassSummary> {
    check_curve_prime(p)?;
    if r.abs() > hasse_bound(p) {
        return Err(Error::OutsideHasse { p, r });
    }
    Ok(summarize_classes(p, r, iso_classes(p)?))
}

pub(crate) fn summarize_classes(p: u64, r: i64, all: Vec<IsoClass>) -> IsoClassSummary {
    let classes: Vec<IsoClass> = all.into_iter().filter(|c| c.trace == r).collect();
    IsoClassSummary {
        p,
        r,
        class_count: classes.len() as u64,
        nonzero_class_count: classes.iter().filter(|c| c.is_generic()).count() as u64,
        classes,
    }
}

/// Number of isomorphism classes containing a curve with `a = 0` or `b = 0`.
pub fn special_class_count(p: u64) -> Result<usize> {
    check_curve_prime(p)?;
    let mut seen = std::collections::HashSet::new();
    let mut classes = 0;
    let axis = (1..p).map(|b| (0, b)).chain((1..p).map(|a| (a, 0)));
    for (a, b) in axis {
        if seen.contains(&(a, b)) {
            continue;
        }
        classes += 1;
        seen.extend(orbit(&CurveParams::from_residues(p, a, b)));
    }
    Ok(classes)
}
