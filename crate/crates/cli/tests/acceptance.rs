//! Acceptance criteria, one line each. Criteria 1-6 and 8 fail the run;
//! criterion 7 is statistical and only reports a finding when out of range.

use std::collections::BTreeMap;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lang_trotter::analytic::{c_zero_closed_form, lemma3_partial_sum};
use lang_trotter::arith::sieve_primes;
use lang_trotter::characters::{
    box_count_via_characters, direct_box_count, fourth_moment_ratio, lemma5_check, polya_vinogradov_scan,
    supported_moduli,
};
use lang_trotter::classnum::ClassNumberCache;
use lang_trotter::curves::{
    are_isomorphic_criterion, are_isomorphic_direct, hasse_bound, iso_classes, orbit_case, orbit_size, OrbitCase,
};
use lang_trotter::experiments::{average_pi_r, curve_pi_r, per_curve_counts, second_moment, ExperimentConfig};
use lang_trotter::{euler_product_cr, kronecker_h, trace_distribution, CharacterTable, CurveParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<String, String>;

struct Criterion {
    id: &'static str,
    title: &'static str,
    budget: Duration,
    soft: bool,
    run: fn() -> Verdict,
}

fn primes_between(lo: u64, hi: u64) -> Vec<u64> {
    sieve_primes(hi).unwrap().iter().filter(|&p| p >= lo).collect()
}

/// Classes counted off the orbit partition; `H` from reduced forms.
fn class_count_identity() -> Verdict {
    let mut pairs = 0;
    for p in primes_between(5, 199) {
        let mut per_trace: BTreeMap<i64, u64> = BTreeMap::new();
        for class in iso_classes(p).unwrap() {
            *per_trace.entry(class.trace).or_default() += 1;
        }
        let hasse = hasse_bound(p);
        for r in (-hasse..=hasse).filter(|&r| r != 0 && r % p as i64 != 0) {
            let classes = per_trace.get(&r).copied().unwrap_or(0);
            let h = kronecker_h(r * r - 4 * p as i64).unwrap().h_total;
            if classes != h {
                return Err(format!("p = {p}, r = {r}: {classes} classes, H = {h}"));
            }
            pairs += 1;
        }
    }
    Ok(format!("{pairs} (p, r) pairs agree"))
}

fn orbits_and_isomorphism() -> Verdict {
    let (mut classes, mut unlisted, mut pairs) = (0, 0, 0u64);
    for p in [5u64, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        for class in iso_classes(p).unwrap() {
            let (a, b) = class.representative;
            let curve = CurveParams::new(p, a as i64, b as i64).unwrap();
            let size = orbit_size(&curve).unwrap();
            if size != class.size {
                return Err(format!("p = {p}, ({a}, {b}): size {size}, orbit has {}", class.size));
            }
            unlisted += (orbit_case(&curve) == OrbitCase::Unlisted) as u32;
            classes += 1;
        }
        let curves: Vec<CurveParams> = (1..p as i64)
            .flat_map(|a| (1..p as i64).map(move |b| CurveParams::new(p, a, b).unwrap()))
            .filter(|c| !c.is_singular())
            .collect();
        for c1 in &curves {
            for c2 in &curves {
                if are_isomorphic_criterion(c1, c2).unwrap() != are_isomorphic_direct(c1, c2).unwrap() {
                    return Err(format!("p = {p}: ({}, {}) vs ({}, {})", c1.a(), c1.b(), c2.a(), c2.b()));
                }
                pairs += 1;
            }
        }
    }
    Ok(format!("{classes} orbit sizes ({unlisted} via enumeration fallback), {pairs} pairs"))
}

fn character_box_counts() -> Verdict {
    let mut cases = 0;
    for p in [13u64, 17, 29] {
        let dist = trace_distribution(p, None).unwrap();
        for (r, n) in dist.iter() {
            if n == 0 {
                continue;
            }
            for (a_box, b_box) in [(13u64, 13u64), (30, 25), (40, 40)] {
                let dec = box_count_via_characters(p, r, a_box, b_box).unwrap();
                let direct = direct_box_count(p, r, a_box, b_box).unwrap() as f64;
                if (dec.total - direct).abs() > 1e-6 {
                    return Err(format!("p = {p}, r = {r}, ({a_box}, {b_box}): {} vs {direct}", dec.total));
                }
                if (dec.main + dec.e1 + dec.e2 - dec.total).abs() > 1e-6 {
                    return Err(format!("p = {p}, r = {r}, ({a_box}, {b_box}): M + E1 + E2 != total"));
                }
                cases += 1;
            }
        }
    }
    Ok(format!("{cases} cases"))
}

fn character_sum_lemmas() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for q in [7u64, 13, 15, 35] {
        let table = CharacterTable::new(q).unwrap();
        for _ in 0..25 {
            let len = rng.random_range(1..=200);
            let coeffs: Vec<Complex64> =
                (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
            let (lhs, rhs) = lemma5_check(&table, &coeffs);
            let rel = (lhs - rhs).abs() / rhs;
            worst = worst.max(rel);
            if rel > 1e-9 {
                return Err(format!("mean-square identity, q = {q}: {lhs} vs {rhs}"));
            }
        }
    }
    let moduli = supported_moduli(499);
    for &q in &moduli {
        let scan = polya_vinogradov_scan(&CharacterTable::new(q).unwrap());
        if !scan.holds() {
            return Err(format!("Polya-Vinogradov, q = {q}: {} > {}", scan.max_abs_sum, scan.bound));
        }
    }
    let mut max_ratio = (0.0f64, 0u64, 0u64);
    for q in primes_between(3, 101) {
        let table = CharacterTable::new(q).unwrap();
        for n in 1..=q {
            let (_, ratio) = fourth_moment_ratio(&table, n);
            if ratio > max_ratio.0 {
                max_ratio = (ratio, q, n);
            }
        }
    }
    if max_ratio.0 > 100.0 {
        return Err(format!("fourth-moment ratio {} at q = {}, N = {}", max_ratio.0, max_ratio.1, max_ratio.2));
    }
    Ok(format!(
        "identity defect {worst:.2e}; {} moduli within Polya-Vinogradov; max fourth-moment ratio {:.3e} (q = {}, N = {})",
        moduli.len(),
        max_ratio.0,
        max_ratio.1,
        max_ratio.2
    ))
}

/// Per-curve counts straight from traces of each reduction.
fn direct_counts(config: &ExperimentConfig) -> Vec<u64> {
    let (a_box, b_box) = (config.a_box as i64, config.b_box as i64);
    let mut out = Vec::new();
    for a in -a_box..=a_box {
        for b in -b_box..=b_box {
            out.push(curve_pi_r(a, b, config.x, config.r).unwrap_or(0));
        }
    }
    out
}

fn path_equivalence() -> Verdict {
    for r in [0, 1, 2, -1] {
        let config = ExperimentConfig::new(50, 60, 60, r);
        let total: u64 = direct_counts(&config).iter().sum();
        let mean = average_pi_r(&config).unwrap().mean;
        if mean != total as f64 / config.weight() {
            return Err(format!("average, r = {r}: {mean} vs {}", total as f64 / config.weight()));
        }
    }
    let config = ExperimentConfig::new(50, 30, 30, 1);
    let direct = direct_counts(&config);
    let via_tables: Vec<u64> = per_curve_counts(&config).unwrap().into_iter().map(u64::from).collect();
    if via_tables != direct {
        return Err("second moment: per-curve counts differ".into());
    }
    let report = second_moment(&config).unwrap();
    let centre = report.prediction;
    let expected: f64 = direct.iter().map(|&k| (k as f64 - centre).powi(2)).sum::<f64>() / config.weight();
    let got = report.second_moment.unwrap();
    if (got - expected).abs() > 1e-12 * expected {
        return Err(format!("second moment {got} vs {expected}"));
    }
    Ok(format!("means exact for r in {{0, 1, 2, -1}}; {} curve counts exact, moment {got:.9}", direct.len()))
}

fn constants() -> Verdict {
    let product = euler_product_cr(0, 1_000_000).unwrap().value;
    let closed = c_zero_closed_form();
    if format!("{product:.6}") != format!("{closed:.6}") {
        return Err(format!("C_0 = {product} vs 12/pi^3 = {closed}"));
    }
    for r in 0..=5 {
        let (plus, minus) = (euler_product_cr(r, 1_000_000).unwrap(), euler_product_cr(-r, 1_000_000).unwrap());
        if plus.value.to_bits() != minus.value.to_bits() {
            return Err(format!("C_{r} = {} but C_-{r} = {}", plus.value, minus.value));
        }
    }
    Ok(format!("C_0 = {product:.9}, 12/pi^3 = {closed:.9}; C_r = C_-r bitwise for r <= 5"))
}

fn convergence() -> Verdict {
    let cache = ClassNumberCache::new();
    let mut notes = Vec::new();
    let mut findings = Vec::new();
    for r in [0, 1, 2] {
        let sum = lemma3_partial_sum(100_000, r, &cache).unwrap();
        notes.push(format!("r = {r}: ratio {:.4}", sum.ratio));
        if r != 0 && !(0.8..=1.2).contains(&sum.ratio) {
            findings.push(format!("class-number ratio for r = {r} is {:.4}, outside [0.8, 1.2]", sum.ratio));
        }
    }
    let report = average_pi_r(&ExperimentConfig::new(2000, 2000, 2000, 1).with_threads(4)).unwrap();
    let deviation = (report.mean / report.prediction - 1.0).abs();
    notes.push(format!("mean {:.6} vs prediction {:.6} (|ratio - 1| = {deviation:.4})", report.mean, report.prediction));
    if deviation > 0.25 {
        findings.push(format!("|mean/prediction - 1| = {deviation:.4} exceeds 0.25"));
    }
    if findings.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{} [{}]", findings.join("; "), notes.join("; ")))
    }
}

fn determinism() -> Verdict {
    let exe = env!("CARGO_BIN_EXE_lang-trotter");
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let out = Command::new(exe)
            .args(["average", "--x", "500", "--A", "500", "--B", "500", "--r", "1", "--threads", threads])
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("threads = {threads}: exit {:?}", out.status.code()));
        }
        outputs.push(out.stdout);
    }
    if outputs.windows(2).any(|w| w[0] != w[1]) {
        return Err("JSON differs between thread counts".into());
    }
    Ok(format!("{} identical bytes for threads 1, 4, 8", outputs[0].len()))
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { id: "1", title: "class counts equal H(r^2 - 4p), p <= 199", budget: Duration::from_secs(60), soft: false, run: class_count_identity },
        Criterion { id: "2", title: "orbit sizes and isomorphism criterion", budget: Duration::from_secs(30), soft: false, run: orbits_and_isomorphism },
        Criterion { id: "3", title: "character-sum box counts", budget: Duration::from_secs(60), soft: false, run: character_box_counts },
        Criterion { id: "4", title: "character-sum identity and bounds", budget: Duration::from_secs(60), soft: false, run: character_sum_lemmas },
        Criterion { id: "5", title: "residue path equals per-curve path", budget: Duration::from_secs(120), soft: false, run: path_equivalence },
        Criterion { id: "6", title: "C_0 = 12/pi^3 and C_r = C_-r", budget: Duration::from_secs(10), soft: false, run: constants },
        Criterion { id: "7", title: "convergence toward C_r pi_1/2(x)", budget: Duration::from_secs(120), soft: true, run: convergence },
        Criterion { id: "8", title: "thread-count determinism", budget: Duration::from_secs(120), soft: false, run: determinism },
    ];
    let mut failed = 0;
    for c in &criteria {
        let start = Instant::now();
        let verdict = (c.run)();
        let elapsed = start.elapsed();
        let verdict = match verdict {
            Ok(detail) if elapsed > c.budget => Err(format!("{detail}; took {elapsed:.1?}, budget {:?}", c.budget)),
            other => other,
        };
        match verdict {
            Ok(detail) => println!("criterion {} PASS  {} ({elapsed:.1?}): {detail}", c.id, c.title),
            Err(detail) if c.soft => println!("criterion {} FINDING  {} ({elapsed:.1?}): {detail}", c.id, c.title),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL  {} ({elapsed:.1?}): {detail}", c.id, c.title);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} acceptance criteria failed");
        ExitCode::FAILURE
    }
}
