//! Box experiments over `y^2 = x^3 + ax + b`, `|a| <= A`, `|b| <= B`.
//!
//! Means use the residue-class path: for each prime the pairs mod `p` with
//! trace `r` are weighted by how many box points reduce to them. Second
//! moments and censuses need every curve's own count, so they walk the box
//! and look each reduction up in the per-prime membership bitsets.
//!
//! Both paths count a prime `B(r) < p <= x` for a curve whenever the reduction
//! is nonsingular with trace `r`, including primes dividing `ab`. The stricter
//! `p ∤ ab` mean is reported as a diagnostic.

mod cache;
mod report;

use std::collections::BTreeMap;

use log::info;
use rayon::prelude::*;

pub use cache::{PrimeEntry, TraceCache};
pub use report::{AverageReport, ErrorTerm, ExperimentConfig, PrimeRow, Timing};

use crate::analytic::{b_of_r, constant_cr, kahan_sum, pi_half};
use crate::arith::sieve_primes;
use crate::curves::{trace_of_frobenius, BitTable, CurveParams};
use crate::error::{Error, Result};

/// Upper limit on bitset memory held at once.
pub const MEMORY_BUDGET_BYTES: u64 = 4 << 30;

/// Upper limit on membership lookups in the per-curve path.
pub const LOOKUP_BUDGET: u64 = 50_000_000_000;

/// Upper limit on the number of curves held by the per-curve path.
pub const CURVE_BUDGET: u64 = 1 << 28;

/// `#{a : |a| <= A, a = residue mod p}`.
pub fn box_residue_count(residue: u64, p: u64, a_box: u64) -> u64 {
    let (res, p, a) = (residue as i64, p as i64, a_box as i64);
    ((a - res).div_euclid(p) + (a + res).div_euclid(p) + 1) as u64
}

fn residue_counts(p: u64, a_box: u64) -> Vec<u64> {
    (0..p).map(|res| box_residue_count(res, p, a_box)).collect()
}

/// Primes `B(r) < p <= x`.
pub fn experiment_primes(x: u64, r: i64) -> Result<Vec<u64>> {
    if (x as f64) <= b_of_r(r) {
        return Ok(Vec::new());
    }
    Ok(sieve_primes(x)?.between(b_of_r(r), x).to_vec())
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Resource(format!("cannot start worker threads: {e}")))
}

fn open_cache(config: &ExperimentConfig) -> Result<TraceCache> {
    match &config.cache_dir {
        Some(dir) => TraceCache::open(dir),
        None => Ok(TraceCache::disabled()),
    }
}

fn bitset_bytes(p: u64) -> u64 {
    8 * BitTable::word_count(p) as u64
}

fn prediction(config: &ExperimentConfig) -> Result<(f64, f64)> {
    let point = pi_half(config.x as f64)?;
    Ok((constant_cr(config.r) * point.pi_half, point.quadrature_error))
}

fn error_budget(config: &ExperimentConfig) -> Vec<ErrorTerm> {
    let x = config.x as f64;
    let (a, b) = (config.a_box as f64, config.b_box as f64);
    let log = x.ln();
    vec![
        ErrorTerm { name: "box_edge".into(), value: (1.0 / a + 1.0 / b) * x * log },
        ErrorTerm { name: "character_sum".into(), value: x.powf(1.25) * log.powi(3) / (a * b).sqrt() },
        ErrorTerm { name: "threshold".into(), value: config.threshold() },
    ]
}

fn base_report(config: &ExperimentConfig, mean: f64) -> Result<AverageReport> {
    let (prediction, quadrature_error) = prediction(config)?;
    let mut diagnostics = BTreeMap::new();
    diagnostics.insert("b_of_r".to_string(), b_of_r(config.r));
    diagnostics.insert("quadrature_error".to_string(), quadrature_error);
    Ok(AverageReport {
        config: config.clone(),
        mean,
        prediction,
        second_moment: None,
        exceptional_count: None,
        threshold: None,
        error_budget: error_budget(config),
        timing: None,
        warnings: config.hypothesis_warnings(),
        diagnostics,
        per_prime_rows: None,
    })
}

struct PrimeTotals {
    p: u64,
    n_r: u64,
    weighted: u128,
    weighted_coprime: u128,
    updated: Option<PrimeEntry>,
}

/// The box mean `(1/4AB) sum_{B(r) < p <= x} #{(a, b) in box : a_p = r}` by
/// residue classes, with one row per prime.
pub fn average_pi_r(config: &ExperimentConfig) -> Result<AverageReport> {
    config.validate()?;
    let primes = experiment_primes(config.x, config.r)?;
    let largest = primes.last().copied().unwrap_or(0);
    if bitset_bytes(largest) * config.threads as u64 > MEMORY_BUDGET_BYTES {
        return Err(Error::Resource(format!("x = {} needs more than the memory budget", config.x)));
    }
    let mut cache = open_cache(config)?;
    let class_numbers = cache.load_class_numbers()?;
    let (a_box, b_box, r) = (config.a_box, config.b_box, config.r);

    info!("averaging over {} primes up to {}", primes.len(), config.x);
    let totals: Vec<PrimeTotals> = thread_pool(config.threads)?.install(|| {
        primes
            .par_iter()
            .map(|&p| {
                let fetched = cache.fetch(p, r)?;
                let membership = fetched.distribution.membership().expect("requested membership");
                let (wa, wb) = (residue_counts(p, a_box), residue_counts(p, b_box));
                let mut weighted = 0u128;
                let mut weighted_coprime = 0u128;
                for (alpha, beta) in membership.table.iter_ones() {
                    let w = wa[alpha as usize] as u128 * wb[beta as usize] as u128;
                    weighted += w;
                    if alpha != 0 && beta != 0 {
                        weighted_coprime += w;
                    }
                }
                Ok(PrimeTotals {
                    p,
                    n_r: fetched.distribution.count(r),
                    weighted,
                    weighted_coprime,
                    updated: fetched.updated,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let hs = class_numbers.for_primes(r, &primes)?;
    let weight = config.weight();
    let total: u128 = totals.iter().map(|t| t.weighted).sum();
    let coprime: u128 = totals.iter().map(|t| t.weighted_coprime).sum();
    let rows: Vec<PrimeRow> = totals
        .iter()
        .zip(&hs)
        .map(|(t, &h)| PrimeRow { p: t.p, n_r: t.n_r, h_rp: h, contrib: t.weighted as f64 / weight })
        .collect();

    let mut report = base_report(config, total as f64 / weight)?;
    let lemma3 = kahan_sum(primes.iter().zip(&hs).map(|(&p, &h)| h as f64 / (2.0 * p as f64)));
    report.diagnostics.insert("mean_coprime_ab".into(), coprime as f64 / weight);
    report.diagnostics.insert("class_number_sum".into(), lemma3);
    report.diagnostics.insert("primes".into(), primes.len() as f64);
    report.per_prime_rows = Some(rows);

    cache.commit(totals.into_iter().filter_map(|t| t.updated.map(|e| (t.p, e))))?;
    cache.save_class_numbers(&class_numbers)?;
    Ok(report)
}

/// `pi^r_E(x)` for every curve of the box, row-major in `a` then `b`, read off
/// the membership bitsets.
pub fn per_curve_counts(config: &ExperimentConfig) -> Result<Vec<u32>> {
    config.validate()?;
    let primes = experiment_primes(config.x, config.r)?;
    let curves = config.curve_count();
    if curves > CURVE_BUDGET || curves.saturating_mul(primes.len() as u64) > LOOKUP_BUDGET {
        return Err(Error::Resource(format!(
            "{curves} curves against {} primes exceeds the per-curve budget",
            primes.len()
        )));
    }
    let bytes: u64 = primes.iter().map(|&p| bitset_bytes(p)).sum();
    if bytes > MEMORY_BUDGET_BYTES {
        return Err(Error::Resource(format!("x = {} needs more than the memory budget", config.x)));
    }
    let mut cache = open_cache(config)?;
    let pool = thread_pool(config.threads)?;
    let fetched = pool.install(|| primes.par_iter().map(|&p| cache.fetch(p, config.r)).collect::<Result<Vec<_>>>())?;
    let mut tables = Vec::with_capacity(fetched.len());
    let mut updates = Vec::new();
    for (f, &p) in fetched.into_iter().zip(&primes) {
        if let Some(entry) = f.updated {
            updates.push((p, entry));
        }
        tables.push(f.distribution.into_membership().expect("requested membership").table);
    }
    cache.commit(updates)?;

    let (a_box, b_box) = (config.a_box as i64, config.b_box as i64);
    let rows: Vec<Vec<u32>> = pool.install(|| {
        (-a_box..=a_box)
            .into_par_iter()
            .map(|a| {
                let alphas: Vec<u64> = primes.iter().map(|&p| a.rem_euclid(p as i64) as u64).collect();
                let mut betas: Vec<u64> = primes.iter().map(|&p| (-b_box).rem_euclid(p as i64) as u64).collect();
                let mut row = Vec::with_capacity((2 * b_box + 1) as usize);
                for _ in -b_box..=b_box {
                    let mut k = 0u32;
                    for (i, table) in tables.iter().enumerate() {
                        k += table.get(alphas[i], betas[i]) as u32;
                        betas[i] += 1;
                        if betas[i] == primes[i] {
                            betas[i] = 0;
                        }
                    }
                    row.push(k);
                }
                row
            })
            .collect()
    });
    Ok(rows.concat())
}

/// Reference for [`per_curve_counts`]: each count from [`curve_pi_r`]'s
/// direct trace sums. Curves singular over `Q` count zero.
pub fn per_curve_counts_direct(config: &ExperimentConfig) -> Result<Vec<u32>> {
    config.validate()?;
    let primes = experiment_primes(config.x, config.r)?;
    let (a_box, b_box) = (config.a_box as i64, config.b_box as i64);
    let rows: Vec<Vec<u32>> = thread_pool(config.threads)?.install(|| {
        (-a_box..=a_box)
            .into_par_iter()
            .map(|a| (-b_box..=b_box).map(|b| count_with_primes(a, b, &primes, config.r)).collect())
            .collect()
    });
    Ok(rows.concat())
}

fn count_histogram(counts: &[u32]) -> Vec<u64> {
    let top = counts.iter().copied().max().unwrap_or(0) as usize;
    let mut hist = vec![0u64; top + 1];
    for &k in counts {
        hist[k as usize] += 1;
    }
    hist
}

fn moment_report(config: &ExperimentConfig, hist: &[u64]) -> Result<AverageReport> {
    let weight = config.weight();
    let total: u64 = hist.iter().enumerate().map(|(k, &n)| k as u64 * n).sum();
    let mut report = base_report(config, total as f64 / weight)?;
    let centre = report.prediction;
    let moment = kahan_sum(hist.iter().enumerate().map(|(k, &n)| n as f64 * (k as f64 - centre).powi(2))) / weight;
    report.second_moment = Some(moment);
    let x = config.x as f64;
    let scale = x.sqrt() * (10.0 * config.a_box as f64 * config.b_box as f64).ln().ln();
    report.error_budget.push(ErrorTerm { name: "moment_scale".into(), value: scale });
    report.diagnostics.insert("curves".into(), config.curve_count() as f64);
    report.diagnostics.insert("max_count".into(), (hist.len() - 1) as f64);
    Ok(report)
}

/// `(1/4AB) sum_{box} |pi^r_E(x) - C_r pi_{1/2}(x)|^2`.
pub fn second_moment(config: &ExperimentConfig) -> Result<AverageReport> {
    let counts = per_curve_counts(config)?;
    moment_report(config, &count_histogram(&counts))
}

/// Curves whose count strays from the prediction by more than
/// `sqrt(x) / log^c x`. The reference fraction `1 / log^d x` is reported
/// alongside.
pub fn exceptional_census(config: &ExperimentConfig, d: f64) -> Result<AverageReport> {
    if d.is_nan() {
        return Err(Error::InvalidArgument("d must be a number".into()));
    }
    let counts = per_curve_counts(config)?;
    let hist = count_histogram(&counts);
    let mut report = moment_report(config, &hist)?;
    let threshold = config.threshold();
    let centre = report.prediction;
    let exceptional: u64 =
        hist.iter().enumerate().filter(|(k, _)| (*k as f64 - centre).abs() > threshold).map(|(_, &n)| n).sum();
    report.second_moment = None;
    report.exceptional_count = Some(exceptional);
    report.threshold = Some(threshold);
    if d <= 2.0 * config.c {
        report.warnings.push(format!("d = {d} does not exceed 2c = {}", 2.0 * config.c));
    }
    let log = (config.x as f64).ln();
    report.diagnostics.insert("d".into(), d);
    report.diagnostics.insert("exceptional_fraction".into(), exceptional as f64 / config.curve_count() as f64);
    report.diagnostics.insert("reference_fraction_log_x_pow_neg_d".into(), log.powf(-d));
    Ok(report)
}

fn singular_over_q(a: i64, b: i64) -> bool {
    let (a, b) = (a as i128, b as i128);
    4 * a * a * a + 27 * b * b == 0
}

fn count_with_primes(a: i64, b: i64, primes: &[u64], r: i64) -> u32 {
    if singular_over_q(a, b) {
        return 0;
    }
    primes
        .iter()
        .filter(|&&p| {
            let curve = CurveParams::new(p, a, b).expect("primes above 3");
            !curve.is_singular() && trace_of_frobenius(&curve).expect("nonsingular") == r
        })
        .count() as u32
}

/// Primes `B(r) < p <= x` at which `y^2 = x^3 + ax + b` has good reduction and
/// trace `r`.
pub fn curve_pi_r(a: i64, b: i64, x: u64, r: i64) -> Result<u64> {
    if singular_over_q(a, b) {
        return Err(Error::InvalidArgument(format!("y^2 = x^3 + {a}x + {b} is singular")));
    }
    let primes = if x < 2 { Vec::new() } else { experiment_primes(x, r)? };
    Ok(count_with_primes(a, b, &primes, r) as u64)
}
