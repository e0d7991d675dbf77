//! The `wreath` command line.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 invariant violation,
//! 3 search found a count strictly between `(p+1)/2` and `p-1`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::decomposition::{decompose, verify_theorem, CharacterId, Decomposition, TheoremReport};
use crate::error::{Error, Result};
use crate::oracle::{equivalence_campaign, Oracle, DEFAULT_ORACLE_CAP};
use crate::prime::Prime;
use crate::search::{
    self, checkpoint_file_name, merge_reports, run_search, run_search_checkpointed, SearchConfig,
    SearchReport, Shard, Symmetry, DEFAULT_EXHAUSTIVE_BUDGET,
};
use crate::tuple::{OrbitRep, Tuple};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEFECT: i32 = 2;
pub const EXIT_GAP_WITNESS: i32 = 3;

/// Environment variable consulted for the worker count when `--threads` is absent.
pub const THREADS_ENV: &str = "WREATH_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "wreath",
    version,
    about = "Constituents of products of irreducible characters of C_p wr C_p",
    long_about = "Constituents of products of irreducible characters of C_p wr C_p.\n\n\
        Tuples are comma-separated residues i_1,...,i_p. Only the rotation class \
        of a tuple matters; it is canonicalized to its least rotation."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decompose phi * psi into irreducible constituents.
    Decompose(DecomposeArgs),
    /// Reproduce the p - 1 constituent example for p >= 5.
    VerifyTheorem(VerifyArgs),
    /// Histogram of constituent counts over faithful pairs.
    Search(SearchArgs),
    /// Cross-check the tuple calculus against exact character sums.
    OracleCheck(OracleArgs),
    /// List faithful rotation classes.
    Enumerate(EnumerateArgs),
    /// Merge shard or seed reports written by `search`.
    Merge(MergeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Exhaustive,
    Sample,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    /// Prime; inferred from the tuple length when omitted.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub phi: String,
    #[arg(long)]
    pub psi: String,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    pub mode: Mode,
    /// Number of sampled pairs (sample mode).
    #[arg(long)]
    pub n: Option<u64>,
    /// RNG seed (sample mode).
    #[arg(long)]
    pub seed: Option<u64>,
    /// INDEX/TOTAL: keep pairs whose stream index is INDEX mod TOTAL.
    #[arg(long, default_value = "0/1")]
    pub shard: Shard,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Do not reduce by rotation classes (exhaustive mode).
    #[arg(long)]
    pub no_shift: bool,
    /// Do not reduce by simultaneous scaling (exhaustive mode).
    #[arg(long)]
    pub no_scale: bool,
    /// Do not reduce by swapping phi and psi (exhaustive mode).
    #[arg(long)]
    pub no_swap: bool,
    /// Refuse exhaustive runs estimated above this many pairs.
    #[arg(long, default_value_t = DEFAULT_EXHAUSTIVE_BUDGET)]
    pub budget: u64,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the count,frequency CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Append partial reports to a per-shard JSON-lines file in this directory and resume from it.
    #[arg(long)]
    pub checkpoint_dir: Option<PathBuf>,
    /// Work units between checkpoint lines.
    #[arg(long, default_value_t = 256)]
    pub checkpoint_every: u64,
    /// Format of the summary on standard output.
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct OracleArgs {
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 200)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
    pub cap: u32,
}

#[derive(Args, Debug)]
pub struct EnumerateArgs {
    #[arg(long)]
    pub p: u64,
    /// Only the least class of each simultaneous-scaling orbit.
    #[arg(long)]
    pub scale_reps: bool,
    /// Print only the number of classes.
    #[arg(long)]
    pub count: bool,
}

#[derive(Args, Debug)]
pub struct MergeArgs {
    /// Report files (JSON, or JSON lines whose last line is used).
    #[arg(required = true)]
    pub reports: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

/// Parses `args` (including the program name) and runs, returning the exit code.
pub fn run<I, S>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(stderr, "{rendered}");
            } else {
                let _ = write!(stdout, "{rendered}");
            }
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_defect() {
                EXIT_DEFECT
            } else {
                EXIT_USAGE
            }
        }
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Decompose(a) => cmd_decompose(a, stdout),
        Command::VerifyTheorem(a) => cmd_verify_theorem(a, stdout),
        Command::Search(a) => cmd_search(a, stdout, stderr),
        Command::OracleCheck(a) => cmd_oracle_check(a, stdout),
        Command::Enumerate(a) => cmd_enumerate(a, stdout),
        Command::Merge(a) => cmd_merge(a, stdout),
    }
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, body: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, body)?,
        None => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn parse_rep(s: &str, p: Option<Prime>) -> Result<(Tuple, OrbitRep)> {
    let t = match p {
        Some(p) => Tuple::parse_for(s, p)?,
        None => Tuple::parse(s)?,
    };
    let rep = t.canonical_rotation();
    rep.require_irreducible()
        .map_err(|_| Error::ConstantTuple(format!("{t} (not irreducible-inducing)")))?;
    Ok((t, rep))
}

fn cmd_decompose(a: DecomposeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let p = a.p.map(Prime::new).transpose()?;
    let (phi_t, phi) = parse_rep(&a.phi, p)?;
    let (psi_t, psi) = parse_rep(&a.psi, p)?;
    phi_t.same_prime(&psi_t)?;
    let d = decompose(&phi, &psi)?;
    let body = match a.format {
        Format::Json => {
            let v = serde_json::json!({
                "phi": phi_t,
                "psi": psi_t,
                "phi_class": phi,
                "psi_class": psi,
                "decomposition": d,
            });
            serde_json::to_string_pretty(&v)? + "\n"
        }
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "p = {}", d.p());
            let _ = writeln!(s, "phi = {phi_t}  (class {phi})");
            let _ = writeln!(s, "psi = {psi_t}  (class {psi})");
            s.push_str(&decomposition_text(&d));
            s
        }
    };
    emit(&a.out, stdout, &body)?;
    Ok(EXIT_OK)
}

fn decomposition_text(d: &Decomposition) -> String {
    let mut s = String::from("constituents:\n");
    for (id, m) in d.constituents() {
        let label = match id {
            CharacterId::Induced(rep) => format!("induced  {rep}"),
            CharacterId::LinearExt { c, e } => format!("linear   c={c} e={e}"),
        };
        let _ = writeln!(s, "  {label:<28} degree {:<3} multiplicity {m}", id.degree(d.p()));
    }
    let _ = writeln!(s, "distinct constituents: {}", d.distinct_count());
    let _ = writeln!(
        s,
        "degree total: {} (p^2 = {})",
        d.degree_total(),
        (d.p().get() as u64).pow(2)
    );
    s
}

fn theorem_text(r: &TheoremReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "p = {}", r.p);
    let _ = writeln!(s, "phi = {} (faithful: {})", r.phi, r.phi_faithful);
    let _ = writeln!(s, "psi = {} (faithful: {})", r.psi, r.psi_faithful);
    s.push_str("sum classes before collapsing:\n");
    for (i, (t, c)) in r.listed_sums.iter().zip(&r.listed_classes).enumerate() {
        let _ = writeln!(s, "  {:>2}. {t}  class {c}", i + 1);
    }
    for &(i, j) in &r.collisions {
        let _ = writeln!(
            s,
            "collision: #{} {} and #{} {} are conjugate",
            i + 1,
            r.listed_sums[i],
            j + 1,
            r.listed_sums[j]
        );
    }
    s.push_str(&decomposition_text(&r.decomposition));
    let _ = writeln!(
        s,
        "distinct constituents {} = p - 1: {}",
        r.count_distinct,
        if r.passed { "PASS" } else { "FAIL" }
    );
    s
}

fn cmd_verify_theorem(a: VerifyArgs, stdout: &mut dyn Write) -> Result<i32> {
    let p = Prime::new(a.p)?;
    let report = verify_theorem(p)?;
    let body = match a.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Text => theorem_text(&report),
    };
    emit(&a.out, stdout, &body)?;
    Ok(EXIT_OK)
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var(THREADS_ENV) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| Error::Parse {
            input: v,
            reason: format!("{THREADS_ENV} must be a positive integer"),
        }),
        Err(_) => Ok(None),
    }
}

fn search_config(a: &SearchArgs) -> Result<SearchConfig> {
    let p = Prime::new(a.p)?;
    let mut cfg = match a.mode {
        Mode::Exhaustive => {
            if a.n.is_some() || a.seed.is_some() {
                return Err(Error::Parse {
                    input: "--n/--seed".into(),
                    reason: "only valid with --mode sample".into(),
                });
            }
            SearchConfig::exhaustive(p)
                .with_symmetry(Symmetry {
                    shift: !a.no_shift,
                    scale: !a.no_scale,
                    swap: !a.no_swap,
                })
                .with_budget(a.budget)
        }
        Mode::Sample => {
            let missing = |flag: &str| Error::Parse {
                input: flag.into(),
                reason: "required with --mode sample".into(),
            };
            let n = a.n.ok_or_else(|| missing("--n"))?;
            let seed = a.seed.ok_or_else(|| missing("--seed"))?;
            SearchConfig::sample(p, n, seed)
        }
    };
    cfg = cfg.with_shard(a.shard);
    cfg.checkpoint_every = a.checkpoint_every.max(1);
    if let Some(w) = worker_count(a.threads)? {
        if w == 0 {
            return Err(Error::Parse {
                input: "0".into(),
                reason: "worker count must be positive".into(),
            });
        }
        cfg = cfg.with_workers(w);
    }
    Ok(cfg)
}

fn search_text(r: &SearchReport) -> String {
    let mut s = String::new();
    let c = &r.config;
    let shards: Vec<String> = c.shards.iter().map(Shard::to_string).collect();
    let _ = write!(s, "search p={} mode={}", c.p, c.mode);
    if let Some(n) = c.n_pairs {
        let _ = write!(s, " n={n} seeds={:?}", c.seeds);
    }
    if let Some(sym) = c.symmetry {
        let _ = write!(s, " shift={} scale={} swap={}", sym.shift, sym.scale, sym.swap);
    }
    let _ = writeln!(s, " shards={}", shards.join(","));
    let _ = write!(s, "pairs examined: {}", r.pairs_examined);
    if let Some(len) = c.stream_pairs {
        let _ = write!(s, " (stream length {len})");
    }
    s.push('\n');
    s.push_str("count  frequency");
    if r.weighted_histogram.is_some() {
        s.push_str("  ordered_pairs");
    }
    s.push('\n');
    for h in &r.histogram {
        let _ = write!(s, "{:>5}  {:>9}", h.count, h.frequency);
        if let Some(w) = &r.weighted_histogram {
            let ordered = w.iter().find(|e| e.count == h.count).map_or(0, |e| e.ordered_pairs);
            let _ = write!(s, "  {ordered:>13}");
        }
        s.push('\n');
    }
    s.push_str("witnesses:\n");
    for w in &r.witnesses {
        let _ = writeln!(s, "  {:>3}: {} ; {}", w.count, w.phi, w.psi);
    }
    let b = &r.bound_check;
    let _ = writeln!(
        s,
        "bound check: min count above one = {}, threshold (p+1)/2 = {} -> {}",
        b.min_count_above_one.map_or("none".to_string(), |c| c.to_string()),
        b.threshold,
        if b.holds { "holds" } else { "VIOLATED" }
    );
    let g = &r.gap_check;
    let _ = writeln!(
        s,
        "gap check: counts in ({}, {}) = {:?} -> {}",
        g.lower,
        g.upper,
        g.counts_in_gap,
        if g.empty { "empty" } else { "GAP WITNESS FOUND" }
    );
    let _ = writeln!(
        s,
        "progress: {}/{} units{}",
        r.progress.units_done,
        r.progress.units_total,
        if r.progress.complete { "" } else { " (partial)" }
    );
    let _ = writeln!(
        s,
        "wall time: {:.3} s, {} workers",
        r.runtime.wall_time_secs, r.runtime.workers
    );
    s
}

fn write_report_outputs(
    r: &SearchReport,
    out: &Option<PathBuf>,
    csv: &Option<PathBuf>,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<i32> {
    if let Some(path) = out {
        std::fs::write(path, r.to_json()? + "\n")?;
    }
    if let Some(path) = csv {
        std::fs::write(path, r.to_csv())?;
    }
    match format {
        Format::Text => stdout.write_all(search_text(r).as_bytes())?,
        Format::Json => stdout.write_all((r.to_json()? + "\n").as_bytes())?,
    }
    Ok(if r.gap_witness_found() { EXIT_GAP_WITNESS } else { EXIT_OK })
}

fn cmd_search(a: SearchArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    let cfg = search_config(&a)?;
    let report = match &a.checkpoint_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(checkpoint_file_name(&cfg));
            let _ = writeln!(stderr, "checkpoint: {}", path.display());
            run_search_checkpointed(&cfg, &path)?
        }
        None => run_search(&cfg)?,
    };
    write_report_outputs(&report, &a.out, &a.csv, a.format, stdout)
}

fn cmd_oracle_check(a: OracleArgs, stdout: &mut dyn Write) -> Result<i32> {
    let p = Prime::new(a.p)?;
    let oracle = Oracle::with_cap(a.cap);
    let campaign = equivalence_campaign(&oracle, p, a.trials, a.seed)?;
    match &campaign.first_disagreement {
        None => {
            writeln!(
                stdout,
                "oracle-check p={p} trials={} seed={}: {} agreements, PASS",
                campaign.trials, a.seed, campaign.agreed
            )?;
            Ok(EXIT_OK)
        }
        Some((phi, psi, calculus, brute)) => {
            writeln!(
                stdout,
                "oracle-check p={p}: disagreement after {} agreements at phi={phi} psi={psi}",
                campaign.agreed
            )?;
            writeln!(stdout, "tuple calculus:\n{}", decomposition_text(calculus))?;
            writeln!(stdout, "oracle:\n{}", decomposition_text(brute))?;
            Ok(EXIT_DEFECT)
        }
    }
}

fn cmd_enumerate(a: EnumerateArgs, stdout: &mut dyn Write) -> Result<i32> {
    let p = Prime::new(a.p)?;
    let estimate = search::faithful_class_count(p);
    if estimate > 50_000_000 {
        return Err(Error::BudgetExceeded {
            estimate,
            budget: 50_000_000,
        });
    }
    let reps: Vec<Tuple> = if a.scale_reps {
        let symmetry = Symmetry {
            shift: true,
            scale: true,
            swap: false,
        };
        search::ReducedPairs::new(p, symmetry)
            .first_elements()
            .cloned()
            .collect()
    } else {
        search::enumerate_faithful_reps(p)
            .into_iter()
            .map(OrbitRep::into_tuple)
            .collect()
    };
    if a.count {
        writeln!(stdout, "{}", reps.len())?;
    } else {
        let mut s = String::new();
        for r in &reps {
            let _ = writeln!(s, "{r}");
        }
        stdout.write_all(s.as_bytes())?;
    }
    Ok(EXIT_OK)
}

/// Reads a report file; for JSON-lines checkpoints the last line is used.
pub fn read_report(path: &Path) -> Result<SearchReport> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(r) = SearchReport::from_json(&text) {
        return Ok(r);
    }
    let last = text
        .lines()
        .rev()
        .find_map(|l| SearchReport::from_json(l).ok())
        .ok_or_else(|| Error::Parse {
            input: path.display().to_string(),
            reason: "no search report found".into(),
        })?;
    Ok(last)
}

fn cmd_merge(a: MergeArgs, stdout: &mut dyn Write) -> Result<i32> {
    let parts = a
        .reports
        .iter()
        .map(|p| read_report(p))
        .collect::<Result<Vec<_>>>()?;
    let merged = merge_reports(&parts)?;
    write_report_outputs(&merged, &a.out, &a.csv, a.format, stdout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("wreath").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn decompose_theorem_pair() {
        let (code, out, _) = call(&["decompose", "--p", "5", "--phi", "1,0,0,0,0", "--psi", "1,1,0,0,0"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("distinct constituents: 4"), "{out}");
    }

    #[test]
    fn decompose_rejects_constant() {
        let (code, _, err) = call(&["decompose", "--p", "5", "--phi", "2,2,2,2,2", "--psi", "1,0,0,0,0"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("not irreducible-inducing"), "{err}");
    }

    #[test]
    fn decompose_rejects_length_mismatch() {
        let (code, _, _) = call(&["decompose", "--phi", "1,0,0", "--psi", "1,0,0,0,0"]);
        assert_eq!(code, EXIT_USAGE);
        let (code, _, _) = call(&["decompose", "--p", "5", "--phi", "1,0,0", "--psi", "1,0,0,0,0"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn decompose_with_constant_sums() {
        let (code, out, _) = call(&["decompose", "--p", "3", "--phi", "1,0,0", "--psi", "2,0,0", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        let kinds: Vec<&str> = v["decomposition"]["constituents"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["kind"].as_str().unwrap())
            .collect();
        assert_eq!(kinds.iter().filter(|k| **k == "linear").count(), 3);
        assert_eq!(v["decomposition"]["degree_total"], 9);
    }

    #[test]
    fn verify_theorem_codes() {
        let (code, out, _) = call(&["verify-theorem", "--p", "5"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("collision: #3 1,1,1,0,0 and #5 1,1,0,0,1"), "{out}");
        assert_eq!(call(&["verify-theorem", "--p", "4"]).0, EXIT_USAGE);
        assert_eq!(call(&["verify-theorem", "--p", "3"]).0, EXIT_USAGE);
        let (code, out, _) = call(&["verify-theorem", "--p", "13", "--format", "json"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["count_distinct"], 12);
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["bogus"]).0, EXIT_USAGE);
        assert_eq!(call(&["search", "--p", "5", "--shard", "9/4"]).0, EXIT_USAGE);
        assert_eq!(call(&["search", "--p", "5", "--mode", "sample"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn oracle_check_cap() {
        let (code, out, _) = call(&["oracle-check", "--p", "3", "--trials", "20", "--seed", "7"]);
        assert_eq!(code, EXIT_OK, "{out}");
        let (code, _, err) = call(&["oracle-check", "--p", "11"]);
        assert_eq!(code, EXIT_USAGE);
        assert!(err.contains("cap"), "{err}");
    }

    #[test]
    fn enumerate_counts() {
        assert_eq!(call(&["enumerate", "--p", "5", "--count"]).1.trim(), "500");
        let (_, out, _) = call(&["enumerate", "--p", "3"]);
        assert_eq!(out.lines().count(), 6);
        assert_eq!(out.lines().next(), Some("0,0,1"));
    }
}
