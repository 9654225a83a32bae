use std::fmt::Write as _;
use std::time::Instant;

use lang_trotter::analytic::{c_zero_closed_form, lemma3_partial_sum};
use lang_trotter::characters::{
    box_count_via_characters, direct_box_count, fourth_moment_ratio, lemma5_check, polya_vinogradov_scan,
};
use lang_trotter::classnum::{lemma8_diagnostics, ClassNumberCache};
use lang_trotter::curves::{iso_classes_with_trace, trace_distribution_brute};
use lang_trotter::experiments::{
    average_pi_r, exceptional_census, second_moment, AverageReport, ExperimentConfig, Timing, TraceCache,
};
use lang_trotter::{
    euler_product_cr, kronecker_h, trace_distribution, trace_of_frobenius, verify, CharacterTable, CurveParams,
    Result,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, to_value};

use crate::output::Rendered;
use crate::{Cli, Command, ExperimentArgs};

pub struct Outcome {
    pub rendered: Rendered,
    pub passed: bool,
}

impl Outcome {
    fn ok(rendered: Rendered) -> Self {
        Outcome { rendered, passed: true }
    }
}

fn threads(cli: &Cli) -> usize {
    cli.threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn config(cli: &Cli, args: &ExperimentArgs) -> ExperimentConfig {
    let mut config =
        ExperimentConfig::new(args.x, args.dims.a_box, args.dims.b_box, args.r).with_c(args.c).with_threads(threads(cli));
    if let Some(dir) = &cli.cache_dir {
        config = config.with_cache_dir(dir);
    }
    config
}

fn experiment(cli: &Cli, run: impl FnOnce() -> Result<AverageReport>) -> Result<Outcome> {
    let start = Instant::now();
    let mut report = run()?;
    if cli.timing {
        report.timing = Some(Timing { wall_seconds: start.elapsed().as_secs_f64() });
    }
    report.validate()?;
    let value = to_value(&report)?;
    Ok(Outcome::ok(match report.to_csv() {
        Some(table) => Rendered::with_table(value, table),
        None => Rendered::new(value),
    }))
}

fn class_number_cache(cli: &Cli) -> Result<(Option<TraceCache>, ClassNumberCache)> {
    match &cli.cache_dir {
        Some(dir) => {
            let cache = TraceCache::open(dir)?;
            let classes = cache.load_class_numbers()?;
            Ok((Some(cache), classes))
        }
        None => Ok((None, ClassNumberCache::new())),
    }
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        &Command::Trace { p, a, b } => {
            let curve = CurveParams::new(p, a, b)?;
            let r = trace_of_frobenius(&curve)?;
            Ok(Outcome::ok(Rendered::new(json!({ "p": p, "a": a, "b": b, "r": r }))))
        }
        &Command::Distribution { p, r, brute } => {
            let dist = if brute { trace_distribution_brute(p, r)? } else { trace_distribution(p, r)? };
            let mut table = String::from("r,count\n");
            let mut counts = Vec::new();
            for (t, n) in dist.iter() {
                writeln!(table, "{t},{n}").unwrap();
                counts.push(json!({ "r": t, "count": n }));
            }
            let mut value = json!({
                "p": p,
                "hasse_bound": dist.hasse_bound(),
                "total": dist.total(),
                "counts": counts,
            });
            if let Some(m) = dist.membership() {
                value["membership"] = json!({ "r": m.r, "pairs": m.table.count_ones() });
            }
            Ok(Outcome::ok(Rendered::with_table(value, table)))
        }
        &Command::Classnum { disc } => {
            let record = kronecker_h(disc)?;
            Ok(Outcome::ok(Rendered::new(to_value(record)?)))
        }
        &Command::Isoclasses { p, r } => {
            let summary = iso_classes_with_trace(p, r)?;
            let mut table = String::from("a,b,size,trace\n");
            for class in &summary.classes {
                let (a, b) = class.representative;
                writeln!(table, "{a},{b},{},{}", class.size, class.trace).unwrap();
            }
            let mut value = to_value(&summary)?;
            if r != 0 && r % p as i64 != 0 {
                value["H"] = json!(kronecker_h(r * r - 4 * p as i64)?.h_total);
            }
            Ok(Outcome::ok(Rendered::with_table(value, table)))
        }
        &Command::Charcheck { q, vectors, seed } => charcheck(q, vectors, seed),
        &Command::Boxcount { p, r, ref dims } => {
            let dec = box_count_via_characters(p, r, dims.a_box, dims.b_box)?;
            let direct = direct_box_count(p, r, dims.a_box, dims.b_box)?;
            let passed = (dec.total - direct as f64).abs() <= 1e-6 && (dec.main + dec.e1 + dec.e2 - dec.total).abs() <= 1e-6;
            let mut value = to_value(&dec)?;
            value["direct"] = json!(direct);
            value["agrees"] = json!(passed);
            Ok(Outcome { rendered: Rendered::new(value), passed })
        }
        &Command::Constants { r, truncation } => {
            let constant = euler_product_cr(r, truncation)?;
            let mut value = to_value(constant)?;
            if r == 0 {
                value["closed_form"] = json!(c_zero_closed_form());
            }
            Ok(Outcome::ok(Rendered::new(value)))
        }
        &Command::Lemma3 { x, r } => {
            let (cache, classes) = class_number_cache(cli)?;
            let partial = lemma3_partial_sum(x, r, &classes)?;
            let sums = lemma8_diagnostics(x, r, &classes)?;
            if let Some(cache) = cache {
                cache.save_class_numbers(&classes)?;
            }
            let mut value = to_value(partial)?;
            value["weighted_sums"] = to_value(sums.sums)?;
            Ok(Outcome::ok(Rendered::new(value)))
        }
        Command::Average(args) => {
            let config = config(cli, args);
            experiment(cli, || average_pi_r(&config))
        }
        Command::Moment(args) => {
            let config = config(cli, args);
            experiment(cli, || second_moment(&config))
        }
        Command::Census { experiment: args, d } => {
            let config = config(cli, args);
            experiment(cli, || exceptional_census(&config, *d))
        }
        &Command::VerifyAll { max_p } => {
            let outcomes = verify::run_all(max_p);
            let passed = outcomes.iter().all(|o| o.passed);
            let mut table = String::from("check,passed,detail\n");
            for o in &outcomes {
                writeln!(table, "{},{},\"{}\"", o.name, o.passed, o.detail.replace('"', "\"\"")).unwrap();
            }
            let value = json!({ "max_p": max_p, "passed": passed, "checks": to_value(&outcomes)? });
            Ok(Outcome { rendered: Rendered::with_table(value, table), passed })
        }
    }
}

/// Lemma-style checks for one modulus; fails when any bound or identity does.
fn charcheck(q: u64, vectors: usize, seed: u64) -> Result<Outcome> {
    let table = CharacterTable::new(q)?;
    let defect = table.orthogonality_defect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst_identity = 0.0f64;
    for _ in 0..vectors {
        let len = rng.random_range(1..=4 * q as usize);
        let coeffs: Vec<Complex64> =
            (0..len).map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let (lhs, rhs) = lemma5_check(&table, &coeffs);
        worst_identity = worst_identity.max((lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE));
    }

    let scan = polya_vinogradov_scan(&table);
    let (mut worst_ratio, mut worst_n) = (0.0f64, 0u64);
    for n in 1..=q {
        let (_, ratio) = fourth_moment_ratio(&table, n);
        if ratio > worst_ratio {
            (worst_ratio, worst_n) = (ratio, n);
        }
    }
    let passed = defect <= 1e-9 && worst_identity <= 1e-9 && scan.holds() && worst_ratio <= 100.0;
    let value = json!({
        "q": q,
        "phi": table.phi(),
        "orthogonality_defect": defect,
        "mean_square_identity": { "vectors": vectors, "seed": seed, "max_relative_defect": worst_identity },
        "polya_vinogradov": to_value(&scan)?,
        "polya_vinogradov_holds": scan.holds(),
        "fourth_moment": { "max_ratio": worst_ratio, "argmax_n": worst_n },
        "passed": passed,
    });
    Ok(Outcome { rendered: Rendered::new(value), passed })
}
