//! Distribution of constituent counts over pairs of faithful irreducibles.
//!
//! Exhaustive mode walks a symmetry-reduced stream of pairs of faithful
//! rotation classes; sample mode draws uniform faithful tuples from a seeded
//! per-pair RNG stream. Both are split into shards by pair index, and shard
//! reports merge into exactly the single-run report.
//!
//! Reductions used in exhaustive mode, each leaving the count unchanged:
//! * shift: rotating either tuple alone gives the same induced character,
//!   so pairs of rotation classes suffice;
//! * scale: multiplying both tuples by a unit `k` is a Galois conjugation,
//!   which permutes the constituents of the product;
//! * swap: the product is commutative.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decomposition::{count_distinct, DistinctCounter};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::prime::Prime;
use crate::tuple::{residue_sum, OrbitRep, Tuple};

pub const REPORT_FORMAT: &str = "wreath-search-report/1";
pub const RNG_NAME: &str = "ChaCha8Rng::seed_from_u64(seed), set_stream(pair_index)";
pub const DEFAULT_EXHAUSTIVE_BUDGET: u64 = 2_000_000_000;
const WARN_PAIRS: u128 = 1_000_000_000;
const SAMPLE_BLOCK: u64 = 4096;
/// Witnesses are re-checked by the oracle up to this prime.
const WITNESS_ORACLE_MAX_P: u32 = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Shard {
    pub index: u64,
    pub total: u64,
}

impl Shard {
    pub fn new(index: u64, total: u64) -> Result<Self> {
        if total == 0 || index >= total {
            return Err(Error::BadShard { index, total });
        }
        Ok(Shard { index, total })
    }

    pub fn full() -> Self {
        Shard { index: 0, total: 1 }
    }

    #[inline]
    pub fn contains(&self, pair_index: u64) -> bool {
        pair_index % self.total == self.index
    }

    fn validate(&self) -> Result<()> {
        Shard::new(self.index, self.total).map(|_| ())
    }
}

impl Default for Shard {
    fn default() -> Self {
        Shard::full()
    }
}

impl FromStr for Shard {
    type Err = Error;

    /// `"3/64"`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse {
            input: s.to_string(),
            reason: "expected INDEX/TOTAL".into(),
        };
        let (i, n) = s.split_once('/').ok_or_else(bad)?;
        let index = i.trim().parse().map_err(|_| bad())?;
        let total = n.trim().parse().map_err(|_| bad())?;
        Shard::new(index, total)
    }
}

impl std::fmt::Display for Shard {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.index, self.total)
    }
}

/// Which count-preserving symmetries the exhaustive stream divides out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub shift: bool,
    pub scale: bool,
    pub swap: bool,
}

impl Symmetry {
    pub fn all() -> Self {
        Symmetry { shift: true, scale: true, swap: true }
    }

    pub fn none() -> Self {
        Symmetry { shift: false, scale: false, swap: false }
    }
}

impl Default for Symmetry {
    fn default() -> Self {
        Symmetry::all()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    Exhaustive { symmetry: Symmetry, budget: u64 },
    Sample { n_pairs: u64, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub p: Prime,
    pub mode: SearchMode,
    pub shard: Shard,
    /// Worker threads; `None` uses the global rayon pool.
    pub workers: Option<usize>,
    /// Work units (exhaustive rows or sample blocks) between checkpoint lines.
    pub checkpoint_every: u64,
}

impl SearchConfig {
    pub fn exhaustive(p: Prime) -> Self {
        SearchConfig {
            p,
            mode: SearchMode::Exhaustive {
                symmetry: Symmetry::all(),
                budget: DEFAULT_EXHAUSTIVE_BUDGET,
            },
            shard: Shard::full(),
            workers: None,
            checkpoint_every: 256,
        }
    }

    pub fn sample(p: Prime, n_pairs: u64, seed: u64) -> Self {
        SearchConfig {
            mode: SearchMode::Sample { n_pairs, seed },
            ..SearchConfig::exhaustive(p)
        }
    }

    pub fn with_symmetry(mut self, s: Symmetry) -> Self {
        if let SearchMode::Exhaustive { symmetry, .. } = &mut self.mode {
            *symmetry = s;
        }
        self
    }

    pub fn with_budget(mut self, b: u64) -> Self {
        if let SearchMode::Exhaustive { budget, .. } = &mut self.mode {
            *budget = b;
        }
        self
    }

    pub fn with_shard(mut self, shard: Shard) -> Self {
        self.shard = shard;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    fn validate(&self) -> Result<()> {
        self.shard.validate()?;
        if self.checkpoint_every == 0 {
            return Err(Error::Invariant("checkpoint_every must be positive".into()));
        }
        Ok(())
    }

    fn echo(&self, stream_pairs: Option<u64>) -> ReportConfig {
        let (mode, symmetry, universe, n_pairs, seeds, rng) = match self.mode {
            SearchMode::Exhaustive { symmetry, .. } => (
                "exhaustive",
                Some(symmetry),
                Some(if symmetry.shift { "rotation-classes" } else { "tuples" }.to_string()),
                None,
                vec![],
                None,
            ),
            SearchMode::Sample { n_pairs, seed } => (
                "sample",
                None,
                None,
                Some(n_pairs),
                vec![seed],
                Some(RNG_NAME.to_string()),
            ),
        };
        ReportConfig {
            p: self.p,
            mode: mode.to_string(),
            symmetry,
            universe,
            n_pairs,
            seeds,
            rng,
            stream_pairs,
            shards: vec![self.shard],
        }
    }
}

// ---------------------------------------------------------------------------
// enumeration

/// Faithful rotation classes (entry sum `!= 0`), in lexicographic order.
pub fn enumerate_faithful_reps(p: Prime) -> Vec<OrbitRep> {
    let mut out = Vec::new();
    for_each_tuple(p, |entries| {
        if residue_sum(entries, p.get()) != 0 && crate::tuple::least_rotation_start(entries) == 0 {
            out.push(OrbitRep::new(Tuple::new(p, entries.to_vec()).unwrap()).unwrap());
        }
    });
    out
}

/// Faithful-inducing tuples, in lexicographic order.
pub fn enumerate_faithful_tuples(p: Prime) -> Vec<Tuple> {
    let mut out = Vec::new();
    for_each_tuple(p, |entries| {
        if residue_sum(entries, p.get()) != 0 {
            out.push(Tuple::new(p, entries.to_vec()).unwrap());
        }
    });
    out
}

/// Number of faithful rotation classes, `(p-1) p^{p-2}`: every faithful
/// tuple is non-constant, so its class has exactly `p` members.
pub fn faithful_class_count(p: Prime) -> u128 {
    let p = p.get() as u128;
    (p - 1) * p.pow(p as u32 - 2)
}

fn for_each_tuple(p: Prime, mut f: impl FnMut(&[u32])) {
    let n = p.as_usize();
    let mut e = vec![0u32; n];
    loop {
        f(&e);
        let mut j = n;
        loop {
            if j == 0 {
                return;
            }
            j -= 1;
            e[j] += 1;
            if e[j] == p.get() {
                e[j] = 0;
            } else {
                break;
            }
        }
    }
}

/// Uniform faithful tuple: `p - 1` free entries, then a last entry drawn
/// uniformly from the `p - 1` residues that keep the sum nonzero.
pub fn random_faithful_tuple<R: Rng>(p: Prime, rng: &mut R) -> Tuple {
    let m = p.get();
    let n = p.as_usize();
    let mut entries = Vec::with_capacity(n);
    let mut sum = 0u32;
    for _ in 0..n - 1 {
        let e = rng.gen_range(0..m);
        sum = (sum + e) % m;
        entries.push(e);
    }
    let forbidden = (m - sum) % m;
    let last = (forbidden + 1 + rng.gen_range(0..m - 1)) % m;
    entries.push(last);
    Tuple::new(p, entries).expect("sampled tuple is well formed")
}

fn sample_pair(p: Prime, seed: u64, index: u64) -> (Tuple, Tuple) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let a = random_faithful_tuple(p, &mut rng).canonical_rotation().into_tuple();
    let b = random_faithful_tuple(p, &mut rng).canonical_rotation().into_tuple();
    (a, b)
}

// ---------------------------------------------------------------------------
// reduced stream

/// One pair from the reduced stream; `weight` is the number of ordered pairs
/// of universe elements it stands for.
#[derive(Clone, Copy, Debug)]
pub struct StreamPair<'a> {
    pub index: u64,
    pub first: &'a Tuple,
    pub second: &'a Tuple,
    pub weight: u64,
}

/// The exhaustive pair stream with the configured symmetries divided out.
///
/// The universe is the faithful classes (shift on) or tuples (shift off).
/// With scale on, first elements are the least members of their scale
/// orbits, each row weighted by its orbit size. With swap on, `(f, s)` is
/// kept only when the scale key of `s` is at least `f`, and off-diagonal
/// pairs count twice.
pub struct ReducedPairs {
    p: Prime,
    symmetry: Symmetry,
    universe: Vec<Tuple>,
    /// Least index in each element's scale orbit (identity without scale).
    key: Vec<usize>,
    orbit_size: Vec<u64>,
    firsts: Vec<usize>,
    row_offsets: Vec<u64>,
    len: u64,
}

impl ReducedPairs {
    pub fn new(p: Prime, symmetry: Symmetry) -> Self {
        let universe: Vec<Tuple> = if symmetry.shift {
            enumerate_faithful_reps(p).into_iter().map(OrbitRep::into_tuple).collect()
        } else {
            enumerate_faithful_tuples(p)
        };
        let n = universe.len();
        let (key, orbit_size) = if symmetry.scale {
            let lookup = |t: &Tuple| -> usize {
                universe
                    .binary_search(t)
                    .expect("scaled faithful element stays in the universe")
            };
            let mut key = vec![0; n];
            let mut size = vec![0; n];
            for (i, u) in universe.iter().enumerate() {
                let mut orbit: Vec<usize> = (1..p.get() as u64)
                    .map(|k| {
                        let s = u.scale(k).expect("unit");
                        lookup(&if symmetry.shift { s.canonical_rotation().into_tuple() } else { s })
                    })
                    .collect();
                orbit.sort_unstable();
                orbit.dedup();
                key[i] = orbit[0];
                size[i] = orbit.len() as u64;
            }
            (key, size)
        } else {
            ((0..n).collect(), vec![1; n])
        };
        let firsts: Vec<usize> = (0..n).filter(|&i| key[i] == i).collect();

        let mut sorted_keys = key.clone();
        sorted_keys.sort_unstable();
        let mut row_offsets = Vec::with_capacity(firsts.len() + 1);
        let mut len = 0u64;
        for &f in &firsts {
            row_offsets.push(len);
            len += if symmetry.swap {
                (n - sorted_keys.partition_point(|&k| k < f)) as u64
            } else {
                n as u64
            };
        }
        row_offsets.push(len);

        ReducedPairs {
            p,
            symmetry,
            universe,
            key,
            orbit_size,
            firsts,
            row_offsets,
            len,
        }
    }

    pub fn p(&self) -> Prime {
        self.p
    }

    pub fn universe(&self) -> &[Tuple] {
        &self.universe
    }

    /// Scale-orbit representatives used as first elements.
    pub fn first_elements(&self) -> impl Iterator<Item = &Tuple> {
        self.firsts.iter().map(|&i| &self.universe[i])
    }

    pub fn rows(&self) -> usize {
        self.firsts.len()
    }

    /// Total pairs in the stream, across all shards.
    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Pairs of one row that fall in `shard`.
    pub fn row(&self, row: usize, shard: Shard) -> impl Iterator<Item = StreamPair<'_>> {
        let f = self.firsts[row];
        let base = self.orbit_size[f];
        let swap = self.symmetry.swap;
        let mut index = self.row_offsets[row];
        let first = &self.universe[f];
        self.universe.iter().enumerate().filter_map(move |(s, second)| {
            let k = self.key[s];
            if swap && k < f {
                return None;
            }
            let i = index;
            index += 1;
            if !shard.contains(i) {
                return None;
            }
            let weight = if swap && k != f { 2 * base } else { base };
            Some(StreamPair { index: i, first, second, weight })
        })
    }

    pub fn iter(&self, shard: Shard) -> impl Iterator<Item = StreamPair<'_>> {
        (0..self.rows()).flat_map(move |r| self.row(r, shard))
    }
}

fn estimate_pairs(p: Prime, symmetry: Symmetry) -> u128 {
    let mut n = faithful_class_count(p);
    if !symmetry.shift {
        n *= p.get() as u128;
    }
    let firsts = if symmetry.scale { n.div_ceil(p.get() as u128 - 1) } else { n };
    let pairs = firsts * n;
    if symmetry.swap {
        pairs.div_ceil(2)
    } else {
        pairs
    }
}

/// Builds the exhaustive stream for `cfg`, refusing configurations over budget.
pub fn reduced_pair_stream(cfg: &SearchConfig) -> Result<ReducedPairs> {
    cfg.validate()?;
    match cfg.mode {
        SearchMode::Exhaustive { symmetry, budget } => {
            let estimate = estimate_pairs(cfg.p, symmetry);
            if estimate > budget as u128 || cfg.p.base_order().is_none() {
                return Err(Error::BudgetExceeded { estimate, budget });
            }
            if estimate > WARN_PAIRS {
                log::warn!("exhaustive search at p = {} covers about {estimate} pairs", cfg.p);
            }
            Ok(ReducedPairs::new(cfg.p, symmetry))
        }
        SearchMode::Sample { .. } => Err(Error::ConfigMismatch(
            "sample mode has no reduced stream".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// tallies and reports

#[derive(Clone, Debug, Default)]
struct Tally {
    histogram: BTreeMap<usize, u64>,
    weighted: BTreeMap<usize, u64>,
    witnesses: BTreeMap<usize, (Tuple, Tuple)>,
    examined: u64,
}

impl Tally {
    fn record(&mut self, count: usize, a: &Tuple, b: &Tuple, weight: Option<u64>) {
        *self.histogram.entry(count).or_insert(0) += 1;
        if let Some(w) = weight {
            *self.weighted.entry(count).or_insert(0) += w;
        }
        self.examined += 1;
        match self.witnesses.get(&count) {
            Some((x, y)) if (x, y) <= (a, b) => {}
            _ => {
                self.witnesses.insert(count, (a.clone(), b.clone()));
            }
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (c, f) in other.histogram {
            *self.histogram.entry(c).or_insert(0) += f;
        }
        for (c, w) in other.weighted {
            *self.weighted.entry(c).or_insert(0) += w;
        }
        for (c, pair) in other.witnesses {
            match self.witnesses.get(&c) {
                Some(existing) if *existing <= pair => {}
                _ => {
                    self.witnesses.insert(c, pair);
                }
            }
        }
        self.examined += other.examined;
        self
    }

    fn from_report(r: &SearchReport) -> Tally {
        Tally {
            histogram: r.histogram.iter().map(|h| (h.count, h.frequency)).collect(),
            weighted: r
                .weighted_histogram
                .iter()
                .flatten()
                .map(|h| (h.count, h.ordered_pairs))
                .collect(),
            witnesses: r
                .witnesses
                .iter()
                .map(|w| (w.count, (w.phi.clone(), w.psi.clone())))
                .collect(),
            examined: r.pairs_examined,
        }
    }
}

/// Echo of the configuration that produced a report. Fields that depend on
/// the machine (worker count) live in [`Runtime`] instead.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub p: Prime,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symmetry: Option<Symmetry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub universe: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_pairs: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seeds: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rng: Option<String>,
    /// Length of the full (all-shard) exhaustive stream.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stream_pairs: Option<u64>,
    /// Residue classes of pair indices covered by this report.
    pub shards: Vec<Shard>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramEntry {
    pub count: usize,
    pub frequency: u64,
}

/// Ordered pairs of universe elements with a given count, undoing the reduction.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedEntry {
    pub count: usize,
    pub ordered_pairs: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub count: usize,
    pub phi: Tuple,
    pub psi: Tuple,
}

/// Every observed count above one should be at least `(p+1)/2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub threshold: f64,
    pub min_count_above_one: Option<usize>,
    pub count_one_observed: bool,
    pub holds: bool,
}

/// Observed counts strictly between `(p+1)/2` and `p-1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCheck {
    pub lower: f64,
    pub upper: usize,
    pub counts_in_gap: Vec<usize>,
    pub empty: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Progress {
    pub units_done: u64,
    pub units_total: u64,
    pub complete: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Runtime {
    pub wall_time_secs: f64,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub format: String,
    pub config: ReportConfig,
    pub pairs_examined: u64,
    pub histogram: Vec<HistogramEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weighted_histogram: Option<Vec<WeightedEntry>>,
    pub witnesses: Vec<Witness>,
    pub bound_check: BoundCheck,
    pub gap_check: GapCheck,
    pub progress: Progress,
    /// Timing and machine details; excluded from determinism guarantees.
    pub runtime: Runtime,
}

impl SearchReport {
    fn assemble(
        config: ReportConfig,
        tally: Tally,
        progress: Progress,
        runtime: Runtime,
        weighted: bool,
    ) -> Result<SearchReport> {
        let p = config.p;
        let histogram: Vec<HistogramEntry> = tally
            .histogram
            .iter()
            .map(|(&count, &frequency)| HistogramEntry { count, frequency })
            .collect();
        let witnesses: Vec<Witness> = tally
            .witnesses
            .into_iter()
            .map(|(count, (phi, psi))| Witness { count, phi, psi })
            .collect();
        verify_witnesses(p, &witnesses)?;

        let total: u64 = histogram.iter().map(|h| h.frequency).sum();
        if total != tally.examined {
            return Err(Error::Invariant(format!(
                "histogram total {total} != pairs examined {}",
                tally.examined
            )));
        }

        let threshold = p.half_bound();
        let min_above_one = tally.histogram.keys().copied().find(|&c| c > 1);
        let bound_check = BoundCheck {
            threshold,
            min_count_above_one: min_above_one,
            count_one_observed: tally.histogram.contains_key(&1),
            holds: min_above_one.is_none_or(|c| c as f64 >= threshold),
        };
        let upper = p.as_usize() - 1;
        let counts_in_gap: Vec<usize> = tally
            .histogram
            .keys()
            .copied()
            .filter(|&c| c as f64 > threshold && c < upper)
            .collect();
        let gap_check = GapCheck {
            lower: threshold,
            upper,
            empty: counts_in_gap.is_empty(),
            counts_in_gap,
        };
        Ok(SearchReport {
            format: REPORT_FORMAT.to_string(),
            config,
            pairs_examined: tally.examined,
            histogram,
            weighted_histogram: weighted.then(|| {
                tally
                    .weighted
                    .iter()
                    .map(|(&count, &ordered_pairs)| WeightedEntry { count, ordered_pairs })
                    .collect()
            }),
            witnesses,
            bound_check,
            gap_check,
            progress,
            runtime,
        })
    }

    pub fn frequency(&self, count: usize) -> u64 {
        self.histogram
            .iter()
            .find(|h| h.count == count)
            .map_or(0, |h| h.frequency)
    }

    pub fn witness(&self, count: usize) -> Option<&Witness> {
        self.witnesses.iter().find(|w| w.count == count)
    }

    /// True when some count lies strictly between `(p+1)/2` and `p-1`.
    pub fn gap_witness_found(&self) -> bool {
        !self.gap_check.empty
    }

    /// Pretty JSON of the full report.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the `runtime` section removed; byte-identical across
    /// repeated runs of the same configuration.
    pub fn machine_json(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(obj) = v.as_object_mut() {
            obj.remove("runtime");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn from_json(s: &str) -> Result<SearchReport> {
        Ok(serde_json::from_str(s)?)
    }

    /// `count,frequency` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("count,frequency\n");
        for h in &self.histogram {
            out.push_str(&format!("{},{}\n", h.count, h.frequency));
        }
        out
    }
}

fn verify_witnesses(p: Prime, witnesses: &[Witness]) -> Result<()> {
    let oracle = Oracle::default();
    for w in witnesses {
        let phi = w.phi.canonical_rotation();
        let psi = w.psi.canonical_rotation();
        let recount = count_distinct(&phi, &psi)?;
        if recount != w.count {
            return Err(Error::Invariant(format!(
                "witness ({}; {}) recounts to {recount}, recorded {}",
                w.phi, w.psi, w.count
            )));
        }
        if p.get() <= WITNESS_ORACLE_MAX_P {
            let d = oracle.oracle_decompose::<i64>(&phi, &psi)?;
            if d.distinct_count() != w.count {
                return Err(Error::Invariant(format!(
                    "oracle gives {} constituents for witness ({}; {}), recorded {}",
                    d.distinct_count(),
                    w.phi,
                    w.psi,
                    w.count
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// running

/// Runs the search in memory.
pub fn run_search(cfg: &SearchConfig) -> Result<SearchReport> {
    Runner::new(cfg)?.run(None)
}

/// Runs the search, appending a partial report to `checkpoint` (JSON lines)
/// after every `cfg.checkpoint_every` work units. An existing checkpoint for
/// the same configuration is resumed from its last complete line.
pub fn run_search_checkpointed(cfg: &SearchConfig, checkpoint: &Path) -> Result<SearchReport> {
    Runner::new(cfg)?.run(Some(checkpoint))
}

/// File name used for one shard's checkpoint inside a checkpoint directory.
pub fn checkpoint_file_name(cfg: &SearchConfig) -> String {
    let mode = match cfg.mode {
        SearchMode::Exhaustive { .. } => "exhaustive".to_string(),
        SearchMode::Sample { n_pairs, seed } => format!("sample-n{n_pairs}-seed{seed}"),
    };
    format!(
        "p{}-{mode}-shard-{}-of-{}.jsonl",
        cfg.p, cfg.shard.index, cfg.shard.total
    )
}

enum Work {
    Exhaustive(ReducedPairs),
    Sample { n_pairs: u64, seed: u64 },
}

struct Runner<'a> {
    cfg: &'a SearchConfig,
    work: Work,
}

impl<'a> Runner<'a> {
    fn new(cfg: &'a SearchConfig) -> Result<Self> {
        cfg.validate()?;
        let work = match cfg.mode {
            SearchMode::Exhaustive { .. } => Work::Exhaustive(reduced_pair_stream(cfg)?),
            SearchMode::Sample { n_pairs, seed } => Work::Sample { n_pairs, seed },
        };
        Ok(Runner { cfg, work })
    }

    fn units_total(&self) -> u64 {
        match &self.work {
            Work::Exhaustive(stream) => stream.rows() as u64,
            Work::Sample { n_pairs, .. } => n_pairs.div_ceil(SAMPLE_BLOCK),
        }
    }

    fn echo(&self) -> ReportConfig {
        let stream_pairs = match &self.work {
            Work::Exhaustive(stream) => Some(stream.len()),
            Work::Sample { .. } => None,
        };
        self.cfg.echo(stream_pairs)
    }

    fn unit(&self, unit: u64, counter: &mut DistinctCounter, tally: &mut Tally) {
        let shard = self.cfg.shard;
        match &self.work {
            Work::Exhaustive(stream) => {
                for pair in stream.row(unit as usize, shard) {
                    let c = counter.count(pair.first.entries(), pair.second.entries());
                    tally.record(c, pair.first, pair.second, Some(pair.weight));
                }
            }
            Work::Sample { n_pairs, seed } => {
                let start = unit * SAMPLE_BLOCK;
                let end = (start + SAMPLE_BLOCK).min(*n_pairs);
                for index in (start..end).filter(|&i| shard.contains(i)) {
                    let (a, b) = sample_pair(self.cfg.p, *seed, index);
                    let c = counter.count(a.entries(), b.entries());
                    tally.record(c, &a, &b, None);
                }
            }
        }
    }

    fn run_units(&self, range: std::ops::Range<u64>) -> Tally {
        let p = self.cfg.p;
        range
            .into_par_iter()
            .fold(
                || (DistinctCounter::new(p), Tally::default()),
                |(mut counter, mut tally), unit| {
                    self.unit(unit, &mut counter, &mut tally);
                    (counter, tally)
                },
            )
            .map(|(_, t)| t)
            .reduce(Tally::default, Tally::merge)
    }

    fn run(&self, checkpoint: Option<&Path>) -> Result<SearchReport> {
        match self.cfg.workers {
            Some(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Invariant(format!("thread pool: {e}")))?
                .install(|| self.run_inner(checkpoint)),
            None => self.run_inner(checkpoint),
        }
    }

    fn run_inner(&self, checkpoint: Option<&Path>) -> Result<SearchReport> {
        let started = Instant::now();
        let config = self.echo();
        let weighted = matches!(self.work, Work::Exhaustive(_));
        let units_total = self.units_total();
        let workers = rayon::current_num_threads();

        let (mut tally, mut done, prior_secs) = match checkpoint {
            Some(path) => match load_checkpoint(path, &config)? {
                Some(r) => (Tally::from_report(&r), r.progress.units_done, r.runtime.wall_time_secs),
                None => (Tally::default(), 0, 0.0),
            },
            None => (Tally::default(), 0, 0.0),
        };
        let mut sink = match checkpoint {
            Some(path) => Some(OpenOptions::new().create(true).append(true).open(path)?),
            None => None,
        };

        let snapshot = |tally: &Tally, done: u64| {
            SearchReport::assemble(
                config.clone(),
                tally.clone(),
                Progress {
                    units_done: done,
                    units_total,
                    complete: done == units_total,
                },
                Runtime {
                    wall_time_secs: prior_secs + started.elapsed().as_secs_f64(),
                    workers,
                },
                weighted,
            )
        };

        if done > 0 {
            log::info!("resuming at unit {done}/{units_total}");
        }
        if done >= units_total {
            // resumed from a finished checkpoint
            return snapshot(&tally, units_total);
        }
        while done < units_total {
            let end = (done + self.cfg.checkpoint_every).min(units_total);
            let chunk = self.run_units(done..end);
            tally = tally.merge(chunk);
            done = end;
            log::info!(
                "p = {}: {done}/{units_total} units, {:.1} s",
                self.cfg.p,
                started.elapsed().as_secs_f64()
            );
            if let Some(file) = sink.as_mut() {
                let line = serde_json::to_string(&snapshot(&tally, done)?)?;
                writeln!(file, "{line}")?;
                file.flush()?;
            }
        }
        snapshot(&tally, done)
    }
}

fn load_checkpoint(path: &Path, config: &ReportConfig) -> Result<Option<SearchReport>> {
    if !path.exists() {
        return Ok(None);
    }
    let reader = BufReader::new(File::open(path)?);
    let mut last = None;
    for line in reader.lines() {
        let line = line?;
        // a torn final line from an interrupted write is skipped
        if let Ok(r) = serde_json::from_str::<SearchReport>(&line) {
            last = Some(r);
        }
    }
    match last {
        Some(r) if r.config != *config => Err(Error::ConfigMismatch(format!(
            "checkpoint {} was written for a different configuration",
            path.display()
        ))),
        other => Ok(other),
    }
}

// ---------------------------------------------------------------------------
// merging

/// Combines reports over disjoint shards and/or independent seeds.
///
/// All parts must agree on everything but shards and seeds, and no
/// (seed, shard) cell may be covered twice.
pub fn merge_reports(parts: &[SearchReport]) -> Result<SearchReport> {
    let first = parts
        .first()
        .ok_or_else(|| Error::ConfigMismatch("nothing to merge".into()))?;
    if parts.len() == 1 {
        return Ok(first.clone());
    }
    let base = &first.config;
    for r in parts {
        let c = &r.config;
        if c.p != base.p
            || c.mode != base.mode
            || c.symmetry != base.symmetry
            || c.universe != base.universe
            || c.n_pairs != base.n_pairs
            || c.rng != base.rng
            || c.stream_pairs != base.stream_pairs
            || r.format != first.format
        {
            return Err(Error::ConfigMismatch(
                "reports differ in configuration beyond shard and seed".into(),
            ));
        }
    }

    // expand every report into (seed, shard) cells
    let seed_list = |c: &ReportConfig| -> Vec<Option<u64>> {
        if c.seeds.is_empty() {
            vec![None]
        } else {
            c.seeds.iter().copied().map(Some).collect()
        }
    };
    let mut cells: BTreeMap<Option<u64>, Vec<Shard>> = BTreeMap::new();
    for r in parts {
        for seed in seed_list(&r.config) {
            cells.entry(seed).or_default().extend(r.config.shards.iter().copied());
        }
    }
    let mut shard_sets: Vec<Vec<Shard>> = Vec::new();
    for shards in cells.values_mut() {
        *shards = normalize_shards(shards)?;
        shard_sets.push(shards.clone());
    }
    if shard_sets.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::ConfigMismatch(
            "seeds are covered by different shard sets".into(),
        ));
    }

    let mut config = base.clone();
    config.seeds = cells.keys().flatten().copied().collect();
    config.shards = shard_sets.pop().unwrap_or_default();

    let tally = parts
        .iter()
        .map(Tally::from_report)
        .reduce(Tally::merge)
        .unwrap_or_default();
    // every shard walks the same work units, so progress is counted per seed
    // and a seed is only as far along as its slowest shard
    let mut per_seed: BTreeMap<Option<u64>, (u64, u64)> = BTreeMap::new();
    for r in parts {
        let seeds = seed_list(&r.config);
        let n = seeds.len() as u64;
        for seed in seeds {
            let e = per_seed.entry(seed).or_insert((u64::MAX, 0));
            e.0 = e.0.min(r.progress.units_done / n);
            e.1 = e.1.max(r.progress.units_total / n);
        }
    }
    let progress = Progress {
        units_done: per_seed.values().map(|v| v.0).sum(),
        units_total: per_seed.values().map(|v| v.1).sum(),
        complete: parts.iter().all(|r| r.progress.complete),
    };
    let runtime = Runtime {
        wall_time_secs: parts.iter().map(|r| r.runtime.wall_time_secs).sum(),
        workers: parts.iter().map(|r| r.runtime.workers).max().unwrap_or(1),
    };
    let weighted = parts.iter().all(|r| r.weighted_histogram.is_some());
    SearchReport::assemble(config, tally, progress, runtime, weighted)
}

/// Rejects overlapping shards; a complete set `0..n` of `n` collapses to `0/1`.
fn normalize_shards(shards: &[Shard]) -> Result<Vec<Shard>> {
    let mut v = shards.to_vec();
    v.sort();
    let total = v[0].total;
    if v.iter().any(|s| s.total != total) {
        if v.contains(&Shard::full()) {
            return Err(Error::ConfigMismatch("overlapping shards".into()));
        }
        return Err(Error::ConfigMismatch("shards use different totals".into()));
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::ConfigMismatch(format!("shard {} appears twice", v[0])));
    }
    if v.len() as u64 == total {
        return Ok(vec![Shard::full()]);
    }
    Ok(v)
}
