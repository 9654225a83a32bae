//! Class numbers of imaginary quadratic discriminants.
//!
//! `h(d)` counts primitive reduced positive-definite forms `(a, b, c)` with
//! `b^2 - 4ac = d`. The Kronecker class number `H(D)` sums `h(D/f^2)` over
//! conductors `f`; equivalently it counts every reduced form of discriminant
//! `D`, primitive or not. [`FormCountTable`] uses the second description to
//! tabulate `H` for all `|D| <= N` in one pass.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::RwLock;

use serde::Serialize;

use crate::analytic::b_of_r;
use crate::arith::{gcd, sieve_primes};
use crate::error::{Error, Result};

fn check_discriminant(d: i64) -> Result<()> {
    if d >= 0 || !matches!(d.rem_euclid(4), 0 | 1) {
        return Err(Error::InvalidDiscriminant(d));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FormClassCount {
    pub d: i64,
    pub h: u64,
}

/// Reduced forms `(a, b, c)` of discriminant `d`: `|b| <= a <= c`, with
/// `b >= 0` whenever `|b| = a` or `a = c`.
pub fn reduced_forms(d: i64, primitive_only: bool) -> Result<Vec<(i64, i64, i64)>> {
    check_discriminant(d)?;
    let n = -d;
    let mut forms = Vec::new();
    let mut a = 1i64;
    while 3 * a * a <= n {
        for b in (1 - a)..=a {
            if (b - d).rem_euclid(2) != 0 {
                continue;
            }
            let num = b * b + n;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if primitive_only && gcd(gcd(a as u64, b.unsigned_abs()), c as u64) != 1 {
                continue;
            }
            forms.push((a, b, c));
        }
        a += 1;
    }
    Ok(forms)
}

pub fn form_class_number(d: i64) -> Result<FormClassCount> {
    Ok(FormClassCount { d, h: reduced_forms(d, true)?.len() as u64 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConductorTerm {
    pub conductor: i64,
    pub discriminant: i64,
    pub h: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClassNumberRecord {
    pub discriminant: i64,
    #[serde(rename = "H")]
    pub h_total: u64,
    pub decomposition: Vec<ConductorTerm>,
}

/// `H(D) = sum of h(D/f^2)` over `f` with `f^2 | D` and `D/f^2 = 0, 1 mod 4`.
pub fn kronecker_h(d: i64) -> Result<ClassNumberRecord> {
    check_discriminant(d)?;
    let mut decomposition = Vec::new();
    let mut f = 1i64;
    while f * f <= -d {
        if d % (f * f) == 0 {
            let inner = d / (f * f);
            if matches!(inner.rem_euclid(4), 0 | 1) {
                decomposition.push(ConductorTerm { conductor: f, discriminant: inner, h: form_class_number(inner)?.h });
            }
        }
        f += 1;
    }
    let h_total = decomposition.iter().map(|t| t.h).sum();
    Ok(ClassNumberRecord { discriminant: d, h_total, decomposition })
}

/// Counts of reduced forms for every discriminant `-N <= D < 0`.
#[derive(Debug, Clone)]
pub struct FormCountTable {
    max_abs: u64,
    all: Vec<u32>,
    primitive: Option<Vec<u32>>,
}

impl FormCountTable {
    /// Enumerates all reduced forms with `4ac - b^2 <= max_abs`. With
    /// `with_primitive`, also keeps `h(d)` (one gcd per form).
    pub fn build(max_abs: u64, with_primitive: bool) -> Self {
        let n = max_abs as i64;
        let mut all = vec![0u32; max_abs as usize + 1];
        let mut primitive = with_primitive.then(|| vec![0u32; max_abs as usize + 1]);
        let mut a = 1i64;
        while 3 * a * a <= n {
            for b in (1 - a)..=a {
                let c_min = if b < 0 { a + 1 } else { a };
                let c_max = (n + b * b) / (4 * a);
                for c in c_min..=c_max {
                    let disc = (4 * a * c - b * b) as usize;
                    all[disc] += 1;
                    if let Some(prim) = primitive.as_mut() {
                        if gcd(gcd(a as u64, b.unsigned_abs()), c as u64) == 1 {
                            prim[disc] += 1;
                        }
                    }
                }
            }
            a += 1;
        }
        FormCountTable { max_abs, all, primitive }
    }

    pub fn max_abs(&self) -> u64 {
        self.max_abs
    }

    /// `H(d)`, or `None` when `d` is out of range or not a discriminant.
    pub fn kronecker(&self, d: i64) -> Option<u64> {
        self.index(d).map(|i| self.all[i] as u64)
    }

    /// `h(d)` when the table was built with primitive counts.
    pub fn form_class_number(&self, d: i64) -> Option<u64> {
        let i = self.index(d)?;
        self.primitive.as_ref().map(|p| p[i] as u64)
    }

    fn index(&self, d: i64) -> Option<usize> {
        (check_discriminant(d).is_ok() && d.unsigned_abs() <= self.max_abs).then_some(d.unsigned_abs() as usize)
    }
}

/// Memoized `H(D)` values, safe for concurrent lookups of distinct keys.
#[derive(Debug, Default)]
pub struct ClassNumberCache {
    values: RwLock<BTreeMap<i64, u64>>,
}

impl ClassNumberCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn kronecker(&self, d: i64) -> Result<u64> {
        if let Some(&h) = self.values.read().unwrap().get(&d) {
            return Ok(h);
        }
        let h = kronecker_h(d)?.h_total;
        self.values.write().unwrap().insert(d, h);
        Ok(h)
    }

    pub fn insert(&self, d: i64, h: u64) {
        self.values.write().unwrap().insert(d, h);
    }

    pub fn len(&self) -> usize {
        self.values.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `H(r^2 - 4p)` for each prime, filling the memo. Large batches are served
    /// from a [`FormCountTable`].
    pub fn for_primes(&self, r: i64, primes: &[u64]) -> Result<Vec<u64>> {
        let discs: Vec<i64> = primes.iter().map(|&p| r * r - 4 * p as i64).collect();
        let missing: Vec<i64> = {
            let values = self.values.read().unwrap();
            discs.iter().copied().filter(|d| !values.contains_key(d)).collect()
        };
        if missing.len() > 64 {
            let max_abs = missing.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0);
            let table = FormCountTable::build(max_abs, false);
            let mut values = self.values.write().unwrap();
            for &d in &missing {
                values.insert(d, table.kronecker(d).ok_or(Error::InvalidDiscriminant(d))?);
            }
        }
        discs.iter().map(|&d| self.kronecker(d)).collect()
    }

    /// Loads a tab-separated `D<TAB>H` file; malformed lines are skipped.
    pub fn load_tsv(path: &Path) -> Result<Self> {
        let cache = Self::new();
        if !path.exists() {
            return Ok(cache);
        }
        let reader = BufReader::new(fs::File::open(path)?);
        let mut values = cache.values.write().unwrap();
        for line in reader.lines() {
            let line = line?;
            let mut fields = line.split('\t');
            if let (Some(Ok(d)), Some(Ok(h))) =
                (fields.next().map(str::parse::<i64>), fields.next().map(str::parse::<u64>))
            {
                values.insert(d, h);
            }
        }
        drop(values);
        Ok(cache)
    }

    pub fn save_tsv(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("tsv.tmp");
        {
            let mut out = BufWriter::new(fs::File::create(&tmp)?);
            writeln!(out, "D\tH")?;
            for (d, h) in self.values.read().unwrap().iter() {
                writeln!(out, "{d}\t{h}")?;
            }
            out.flush()?;
        }
        fs::rename(tmp, path)?;
        Ok(())
    }
}

/// One of the weighted sums of `H_{r,p}` over `B(r) < p <= x`, with the
/// growth it is expected to stay within.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRatio {
    pub name: &'static str,
    pub sum: f64,
    pub bound: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma8Report {
    pub x: u64,
    pub r: i64,
    pub primes: usize,
    pub sums: Vec<SumRatio>,
}

/// `sum H^{1/2}`, `sum H/sqrt(p)`, `sum H/p`, `sum H/p^2` over `B(r) < p <= x`,
/// each divided by `x^{5/4}`, `x`, `sqrt(x)` and `1` respectively.
pub fn lemma8_diagnostics(x: u64, r: i64, cache: &ClassNumberCache) -> Result<Lemma8Report> {
    let xf = x as f64;
    let bounds = [xf.powf(1.25), xf, xf.sqrt(), 1.0];
    let names = ["sum_sqrt_H", "sum_H_over_sqrt_p", "sum_H_over_p", "sum_H_over_p2"];
    let mut sums = [0.0f64; 4];
    let mut count = 0;
    if x >= 2 && (x as f64) > b_of_r(r) {
        let primes = sieve_primes(x)?;
        let range = primes.between(b_of_r(r), x);
        let hs = cache.for_primes(r, range)?;
        for (&p, &h) in range.iter().zip(&hs) {
            let (h, p) = (h as f64, p as f64);
            sums[0] += h.sqrt();
            sums[1] += h / p.sqrt();
            sums[2] += h / p;
            sums[3] += h / (p * p);
        }
        count = range.len();
    }
    let sums = (0..4)
        .map(|i| SumRatio { name: names[i], sum: sums[i], bound: bounds[i], ratio: sums[i] / bounds[i] })
        .collect();
    Ok(Lemma8Report { x, r, primes: count, sums })
}
