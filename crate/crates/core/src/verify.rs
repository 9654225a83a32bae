//! The invariant suite behind `lang-trotter verify-all`.
//!
//! Each check compares two independent computations of the same quantity
//! for every prime (or modulus) up to a cap and reports the first mismatch.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analytic::{c_zero_closed_form, euler_product_cr};
use crate::arith::sieve_primes;
use crate::characters::{
    box_count_via_characters, direct_box_count, lemma5_check, polya_vinogradov_scan, supported_moduli,
    CharacterTable,
};
use crate::classnum::{kronecker_h, FormCountTable};
use crate::curves::{
    are_isomorphic_criterion, are_isomorphic_direct, hasse_bound, iso_classes, orbit, orbit_case, orbit_size,
    trace_distribution, trace_distribution_brute, CurveParams, OrbitCase,
};
use crate::error::Result;
use crate::experiments::{average_pi_r, per_curve_counts, per_curve_counts_direct, ExperimentConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn from(name: &str, result: Result<std::result::Result<String, String>>) -> Self {
        let (passed, detail) = match result {
            Ok(Ok(detail)) => (true, detail),
            Ok(Err(detail)) => (false, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        CheckOutcome { name: name.to_string(), passed, detail }
    }
}

type Check = Result<std::result::Result<String, String>>;

fn curve_primes(max_p: u64) -> Result<Vec<u64>> {
    if max_p < 5 {
        return Ok(Vec::new());
    }
    Ok(sieve_primes(max_p)?.iter().filter(|&p| p >= 5).collect())
}

/// Number of isomorphism classes with trace `r`, from the class partition,
/// against `H(r^2 - 4p)` for `1 <= |r| <= 2 sqrt(p)`, `p ∤ r`.
pub fn check_class_count_identity(max_p: u64) -> Check {
    let mut pairs = 0;
    for p in curve_primes(max_p)? {
        let mut per_trace: BTreeMap<i64, u64> = BTreeMap::new();
        for class in iso_classes(p)? {
            *per_trace.entry(class.trace).or_default() += 1;
        }
        let hasse = hasse_bound(p);
        for r in (-hasse..=hasse).filter(|&r| r != 0 && r % p as i64 != 0) {
            let classes = per_trace.get(&r).copied().unwrap_or(0);
            let h = kronecker_h(r * r - 4 * p as i64)?.h_total;
            if classes != h {
                return Ok(Err(format!("p = {p}, r = {r}: {classes} classes, H = {h}")));
            }
            pairs += 1;
        }
    }
    Ok(Ok(format!("{pairs} (p, r) pairs")))
}

/// Orbit sizes against the case table; cases outside the table are sized by
/// enumeration and counted in the detail.
pub fn check_orbit_sizes(primes: &[u64]) -> Check {
    let (mut classes, mut unlisted) = (0, 0);
    for &p in primes {
        for class in iso_classes(p)? {
            let (a, b) = class.representative;
            let curve = CurveParams::from_residues(p, a, b);
            let size = orbit_size(&curve)?;
            if size != class.size || size != orbit(&curve).len() as u64 {
                return Ok(Err(format!("p = {p}, ({a}, {b}): table {size}, enumerated {}", class.size)));
            }
            if orbit_case(&curve) == OrbitCase::Unlisted {
                unlisted += 1;
            }
            classes += 1;
        }
    }
    Ok(Ok(format!("{classes} classes, {unlisted} sized by enumeration")))
}

/// Residue-symbol isomorphism test against the exhaustive search, on all
/// pairs of curves with nonzero coefficients.
pub fn check_isomorphism_criterion(primes: &[u64]) -> Check {
    let mut pairs = 0u64;
    for &p in primes {
        let curves: Vec<CurveParams> = (1..p)
            .flat_map(|a| (1..p).map(move |b| CurveParams::from_residues(p, a, b)))
            .filter(|c| !c.is_singular())
            .collect();
        for c1 in &curves {
            for c2 in &curves {
                if are_isomorphic_criterion(c1, c2)? != are_isomorphic_direct(c1, c2)? {
                    return Ok(Err(format!("p = {p}: {:?} vs {:?}", (c1.a(), c1.b()), (c2.a(), c2.b()))));
                }
                pairs += 1;
            }
        }
    }
    Ok(Ok(format!("{pairs} pairs")))
}

pub fn check_fast_distribution(max_p: u64) -> Check {
    let mut count = 0;
    for p in curve_primes(max_p)? {
        for r in [0, 1, -2] {
            if trace_distribution(p, Some(r))? != trace_distribution_brute(p, Some(r))? {
                return Ok(Err(format!("p = {p}, r = {r}")));
            }
        }
        count += 1;
    }
    Ok(Ok(format!("{count} primes")))
}

/// Class numbers from single-discriminant enumeration against the batch table.
pub fn check_class_number_routes(max_abs: u64) -> Check {
    let table = FormCountTable::build(max_abs, false);
    let mut count = 0;
    for n in 3..=max_abs as i64 {
        let d = -n;
        let Ok(record) = kronecker_h(d) else { continue };
        if table.kronecker(d) != Some(record.h_total) {
            return Ok(Err(format!("D = {d}")));
        }
        count += 1;
    }
    Ok(Ok(format!("{count} discriminants")))
}

/// Seeded uniform coefficients in the unit square.
fn coefficients(seed: u64, len: usize) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect()
}

pub fn check_character_identity(moduli: &[u64], vectors: usize) -> Check {
    let mut worst = 0.0f64;
    for &q in moduli {
        let table = CharacterTable::new(q)?;
        for v in 0..vectors {
            let coeffs = coefficients(q * 1000 + v as u64, q as usize - 1);
            let (lhs, rhs) = lemma5_check(&table, &coeffs);
            let rel = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Ok(Err(format!("q = {q}: {lhs} vs {rhs}")));
            }
        }
    }
    Ok(Ok(format!("max relative defect {worst:.3e}")))
}

pub fn check_polya_vinogradov(max_q: u64) -> Check {
    let moduli = supported_moduli(max_q);
    for &q in &moduli {
        let scan = polya_vinogradov_scan(&CharacterTable::new(q)?);
        if !scan.holds() {
            return Ok(Err(format!("q = {q}: {} > {}", scan.max_abs_sum, scan.bound)));
        }
    }
    Ok(Ok(format!("{} moduli", moduli.len())))
}

pub fn check_box_counts(primes: &[u64], boxes: &[(u64, u64)]) -> Check {
    let mut count = 0;
    for &p in primes {
        let dist = trace_distribution(p, None)?;
        for (r, n) in dist.iter() {
            if n == 0 {
                continue;
            }
            for &(a_box, b_box) in boxes {
                let dec = box_count_via_characters(p, r, a_box, b_box)?;
                let direct = direct_box_count(p, r, a_box, b_box)? as f64;
                let split = dec.main + dec.e1 + dec.e2;
                if (dec.total - direct).abs() > 1e-6 || (split - dec.total).abs() > 1e-6 {
                    return Ok(Err(format!("p = {p}, r = {r}, box ({a_box}, {b_box}): {} vs {direct}", dec.total)));
                }
                count += 1;
            }
        }
    }
    Ok(Ok(format!("{count} cases")))
}

pub fn check_constant(truncation: u64) -> Check {
    let product = euler_product_cr(0, truncation)?.value;
    let closed = c_zero_closed_form();
    let rel = (product / closed - 1.0).abs();
    if rel > 1e-6 {
        return Ok(Err(format!("product {product} vs 12/pi^3 = {closed}")));
    }
    for r in 1..=5 {
        if euler_product_cr(r, truncation)?.value != euler_product_cr(-r, truncation)?.value {
            return Ok(Err(format!("C_{r} differs from C_-{r}")));
        }
    }
    Ok(Ok(format!("relative gap {rel:.3e}")))
}

/// Residue-class mean and bitset counts against direct per-curve traces.
pub fn check_path_equivalence(x: u64, a_box: u64, b_box: u64, traces: &[i64]) -> Check {
    for &r in traces {
        let config = ExperimentConfig::new(x, a_box, b_box, r);
        let direct = per_curve_counts_direct(&config)?;
        if per_curve_counts(&config)? != direct {
            return Ok(Err(format!("per-curve counts differ for r = {r}")));
        }
        let total: u64 = direct.iter().map(|&k| k as u64).sum();
        let mean = average_pi_r(&config)?.mean;
        if mean != total as f64 / config.weight() {
            return Ok(Err(format!("r = {r}: mean {mean} vs direct {}", total as f64 / config.weight())));
        }
    }
    Ok(Ok(format!("x = {x}, box ({a_box}, {b_box}), {} traces", traces.len())))
}

/// Every check, scaled by `max_p`.
pub fn run_all(max_p: u64) -> Vec<CheckOutcome> {
    let small: Vec<u64> = curve_primes(max_p.min(37)).unwrap_or_default();
    let tiny: Vec<u64> = curve_primes(max_p.min(23)).unwrap_or_default();
    let split: Vec<u64> = small.iter().copied().filter(|p| p % 4 == 1).take(3).collect();
    let x = max_p.clamp(5, 50);
    let moduli: Vec<u64> = [7, 13, 15, 35].into_iter().filter(|&q| q <= max_p.max(7)).collect();
    vec![
        CheckOutcome::from("class_count_equals_hurwitz", check_class_count_identity(max_p)),
        CheckOutcome::from("orbit_sizes", check_orbit_sizes(&small)),
        CheckOutcome::from("isomorphism_criterion", check_isomorphism_criterion(&tiny)),
        CheckOutcome::from("fast_trace_distribution", check_fast_distribution(max_p.min(61))),
        CheckOutcome::from("class_number_routes", check_class_number_routes(4 * max_p.max(5))),
        CheckOutcome::from("character_vector_identity", check_character_identity(&moduli, 25)),
        CheckOutcome::from("polya_vinogradov", check_polya_vinogradov(max_p.max(7))),
        CheckOutcome::from("box_count_decomposition", check_box_counts(&split, &[(13, 13), (30, 25)])),
        CheckOutcome::from("constant_c0", check_constant(1_000_000)),
        CheckOutcome::from("path_equivalence", check_path_equivalence(x, 20, 20, &[0, 1, 2, -1])),
    ]
}
