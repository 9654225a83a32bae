//! On-disk cache of per-prime trace histograms and membership bitsets.
//!
//! Layout under the cache directory:
//!
//! * `p_<p>.bin`: little-endian `u32 p`, `u32 R` (the Hasse bound), `2R+1`
//!   `i64` histogram entries for traces `-R..=R`, then one bitset per cached
//!   trace, each `ceil(p^2/64)` `u64` words with bit `a*p + b` set when
//!   `y^2 = x^3 + ax + b` has that trace.
//! * `index.tsv`: `p<TAB>r<TAB>flags<TAB>offset`. Flag 1 marks the histogram
//!   row (whose `r` column holds `R`), flag 2 a membership bitset.
//! * `classnum.tsv`: memoized `H(D)` values.
//!
//! Entries that fail validation are rebuilt, never trusted.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{debug, warn};

use crate::classnum::ClassNumberCache;
use crate::curves::{hasse_bound, trace_distribution, BitTable, Membership, TraceDistribution};
use crate::error::Result;

const FLAG_HISTOGRAM: u32 = 1;
const FLAG_MEMBERSHIP: u32 = 2;
const HEADER_BYTES: u64 = 8;

/// Where each cached bitset of one prime file starts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrimeEntry {
    pub memberships: BTreeMap<i64, u64>,
}

#[derive(Debug)]
pub struct TraceCache {
    dir: Option<PathBuf>,
    index: BTreeMap<u64, PrimeEntry>,
}

/// Outcome of a cache lookup; `updated` is set when the prime file was
/// (re)written and the index needs the new entry.
#[derive(Debug)]
pub struct Fetched {
    pub distribution: TraceDistribution,
    pub updated: Option<PrimeEntry>,
}

impl TraceCache {
    /// A cache that only computes.
    pub fn disabled() -> Self {
        TraceCache { dir: None, index: BTreeMap::new() }
    }

    pub fn open(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let index = read_index(&dir.join("index.tsv")).unwrap_or_else(|e| {
            warn!("ignoring unreadable cache index in {}: {e}", dir.display());
            BTreeMap::new()
        });
        Ok(TraceCache { dir: Some(dir.to_path_buf()), index })
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn entry(&self, p: u64) -> Option<&PrimeEntry> {
        self.index.get(&p)
    }

    /// Histogram of `p` with the membership bitset for `r`, from disk when a
    /// valid copy exists. Safe to call concurrently for distinct primes.
    pub fn fetch(&self, p: u64, r: i64) -> Result<Fetched> {
        let Some(dir) = &self.dir else {
            return Ok(Fetched { distribution: trace_distribution(p, Some(r))?, updated: None });
        };
        let path = prime_path(dir, p);
        let stored = self.index.get(&p).and_then(|entry| match load_prime(&path, p, entry) {
            Ok(loaded) => Some(loaded),
            Err(reason) => {
                warn!("rebuilding cache entry for p = {p}: {reason}");
                None
            }
        });
        if let Some((counts, mut tables)) = stored.clone() {
            if let Some(table) = tables.remove(&r) {
                debug!("cache hit p = {p}, r = {r}");
                let membership = Membership { r, table };
                let distribution = TraceDistribution::from_parts(p, counts, Some(membership))
                    .expect("validated histogram length");
                return Ok(Fetched { distribution, updated: None });
            }
        }
        let distribution = trace_distribution(p, Some(r))?;
        let mut tables = stored.map(|(_, tables)| tables).unwrap_or_default();
        let membership = distribution.membership().expect("requested membership");
        tables.insert(r, membership.table.clone());
        let entry = write_prime(&path, p, distribution.raw_counts(), &tables)?;
        Ok(Fetched { distribution, updated: Some(entry) })
    }

    /// Records new entries and rewrites the index.
    pub fn commit(&mut self, updates: impl IntoIterator<Item = (u64, PrimeEntry)>) -> Result<()> {
        let Some(dir) = &self.dir else {
            return Ok(());
        };
        let mut changed = false;
        for (p, entry) in updates {
            self.index.insert(p, entry);
            changed = true;
        }
        if changed || !dir.join("index.tsv").exists() {
            write_index(&dir.join("index.tsv"), &self.index)?;
        }
        Ok(())
    }

    pub fn load_class_numbers(&self) -> Result<ClassNumberCache> {
        match &self.dir {
            Some(dir) => ClassNumberCache::load_tsv(&dir.join("classnum.tsv")),
            None => Ok(ClassNumberCache::new()),
        }
    }

    pub fn save_class_numbers(&self, cache: &ClassNumberCache) -> Result<()> {
        match &self.dir {
            Some(dir) => cache.save_tsv(&dir.join("classnum.tsv")),
            None => Ok(()),
        }
    }
}

fn prime_path(dir: &Path, p: u64) -> PathBuf {
    dir.join(format!("p_{p}.bin"))
}

fn read_index(path: &Path) -> Result<BTreeMap<u64, PrimeEntry>> {
    let mut index: BTreeMap<u64, PrimeEntry> = BTreeMap::new();
    if !path.exists() {
        return Ok(index);
    }
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        let fields: Vec<&str> = line.split('\t').collect();
        let [p, r, flags, offset] = fields[..] else {
            continue;
        };
        let (Ok(p), Ok(r), Ok(flags), Ok(offset)) =
            (p.parse::<u64>(), r.parse::<i64>(), flags.parse::<u32>(), offset.parse::<u64>())
        else {
            continue;
        };
        let entry = index.entry(p).or_default();
        if flags & FLAG_MEMBERSHIP != 0 {
            entry.memberships.insert(r, offset);
        }
    }
    Ok(index)
}

fn write_index(path: &Path, index: &BTreeMap<u64, PrimeEntry>) -> Result<()> {
    let tmp = path.with_extension("tsv.tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(out, "p\tr\tflags\toffset")?;
        for (&p, entry) in index {
            writeln!(out, "{p}\t{}\t{FLAG_HISTOGRAM}\t{HEADER_BYTES}", hasse_bound(p))?;
            for (r, offset) in &entry.memberships {
                writeln!(out, "{p}\t{r}\t{FLAG_MEMBERSHIP}\t{offset}")?;
            }
        }
        out.flush()?;
    }
    fs::rename(tmp, path)?;
    Ok(())
}

fn write_prime(path: &Path, p: u64, counts: &[u64], tables: &BTreeMap<i64, BitTable>) -> Result<PrimeEntry> {
    let mut bytes = Vec::with_capacity(HEADER_BYTES as usize + 8 * counts.len());
    bytes.extend_from_slice(&(p as u32).to_le_bytes());
    bytes.extend_from_slice(&(hasse_bound(p) as u32).to_le_bytes());
    for &c in counts {
        bytes.extend_from_slice(&(c as i64).to_le_bytes());
    }
    let mut entry = PrimeEntry::default();
    for (&r, table) in tables {
        entry.memberships.insert(r, bytes.len() as u64);
        for w in table.words() {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
    }
    let tmp = path.with_extension("bin.tmp");
    fs::write(&tmp, &bytes)?;
    fs::rename(tmp, path)?;
    Ok(entry)
}

type Loaded = (Vec<u64>, BTreeMap<i64, BitTable>);

fn load_prime(path: &Path, p: u64, entry: &PrimeEntry) -> std::result::Result<Loaded, String> {
    let bytes = fs::read(path).map_err(|e| e.to_string())?;
    let word = |at: usize| -> std::result::Result<[u8; 8], String> {
        bytes.get(at..at + 8).map(|s| s.try_into().unwrap()).ok_or_else(|| "truncated file".to_string())
    };
    if bytes.len() < HEADER_BYTES as usize {
        return Err("truncated header".into());
    }
    let stored_p = u32::from_le_bytes(bytes[0..4].try_into().unwrap()) as u64;
    let stored_hasse = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as i64;
    let hasse = hasse_bound(p);
    if stored_p != p || stored_hasse != hasse {
        return Err(format!("header ({stored_p}, {stored_hasse}) does not match ({p}, {hasse})"));
    }
    let len = (2 * hasse + 1) as usize;
    let mut counts = Vec::with_capacity(len);
    for i in 0..len {
        let c = i64::from_le_bytes(word(HEADER_BYTES as usize + 8 * i)?);
        if c < 0 {
            return Err("negative histogram entry".into());
        }
        counts.push(c as u64);
    }
    if counts.iter().sum::<u64>() != p * (p - 1) {
        return Err("histogram does not sum to p(p-1)".into());
    }
    let words = BitTable::word_count(p);
    let mut tables = BTreeMap::new();
    for (&r, &offset) in &entry.memberships {
        if r.abs() > hasse {
            return Err(format!("trace {r} outside the Hasse range"));
        }
        let start = offset as usize;
        let data: Vec<u64> =
            (0..words).map(|i| word(start + 8 * i).map(u64::from_le_bytes)).collect::<std::result::Result<_, _>>()?;
        let table = BitTable::from_words(p, data).ok_or("bitset of wrong length")?;
        if table.count_ones() != counts[(r + hasse) as usize] {
            return Err(format!("bitset for r = {r} disagrees with the histogram"));
        }
        tables.insert(r, table);
    }
    Ok((counts, tables))
}
