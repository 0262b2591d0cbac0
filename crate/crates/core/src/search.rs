//! Exhaustive search for coefficient vectors giving submaximal rank of the
//! matrix of consequences.
//!
//! Candidates run over a Cartesian power of a finite coefficient set,
//! normalized so the first nonzero entry is positive. Each candidate is
//! screened by rank over a small prime field (sound for detecting
//! submaximal rational rank, since the modular rank never exceeds the
//! rational rank) and confirmed with exact rational arithmetic. The space
//! is split into contiguous index chunks processed in parallel and merged
//! in order, so output is identical for every thread count.

use std::collections::BTreeSet;
use std::io::Write;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::consequences::ConsequenceMatrix;
use crate::error::{Error, Result};
use crate::linalg::{
    bareiss_rank, generic_rank, lazy_reduction_fits, rank_rows_mod, rank_rows_mod_lazy,
    GenericRankReport,
};
use crate::linear_form::LinearForm;

/// The screening prime used throughout the tables.
pub const DEFAULT_SCREENING_PRIME: u64 = 1009;

/// The fixed specialization prime for randomized generic-rank computations
/// (the Mersenne prime 2^31 - 1).
pub const DEFAULT_SPECIALIZATION_PRIME: u64 = 2_147_483_647;

/// Environment variable overriding the worker thread count.
pub const THREADS_ENV_VAR: &str = "OPIDENT_THREADS";

/// A candidate coefficient tuple.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CoefficientVector(pub Vec<i64>);

impl CoefficientVector {
    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First nonzero entry is positive (and some entry is nonzero).
    pub fn is_leading_positive(&self) -> bool {
        match self.0.iter().find(|&&v| v != 0) {
            Some(&v) => v > 0,
            None => false,
        }
    }

    /// Greatest common divisor of the absolute values (0 for the zero tuple).
    pub fn gcd(&self) -> u64 {
        self.0
            .iter()
            .fold(0u64, |g, &v| num_integer::gcd(g, v.unsigned_abs()))
    }
}

impl std::fmt::Display for CoefficientVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

/// One submaximal-rank solution.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SolutionRecord {
    pub vector: CoefficientVector,
    pub rank_mod: usize,
    pub rank_rational: usize,
    pub prime_used: u64,
}

/// Where the coprimality filter is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GcdFilter {
    /// No filter; scalar multiples are reported separately.
    Off,
    /// Screen the full leading-positive space, keep only gcd-1 solutions.
    #[default]
    Solutions,
    /// Drop non-primitive candidates before screening.
    Prefilter,
}

/// Which arithmetic performs the screen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScreenMode {
    /// Rank over F_p first, rational confirmation for survivors.
    #[default]
    ModularFirst,
    /// Exact rational rank for every candidate.
    RationalOnly,
}

/// Search configuration. Defaults reproduce the reference tables.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub coefficient_set: Vec<i64>,
    pub gcd_filter: GcdFilter,
    pub screening_prime: u64,
    pub rational_confirmation: bool,
    pub screen_mode: ScreenMode,
    /// Trials/seed/prime for the generic-rank computation that fixes the
    /// submaximality threshold.
    pub trials: u32,
    pub seed: u64,
    pub specialization_prime: u64,
    /// Worker threads; `None` means the `OPIDENT_THREADS` variable or the
    /// rayon default.
    pub threads: Option<usize>,
    /// Emit a progress line to stderr once per second.
    pub progress: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            coefficient_set: vec![-2, -1, 0, 1, 2],
            gcd_filter: GcdFilter::default(),
            screening_prime: DEFAULT_SCREENING_PRIME,
            rational_confirmation: true,
            screen_mode: ScreenMode::default(),
            trials: 5,
            seed: 1,
            specialization_prime: DEFAULT_SPECIALIZATION_PRIME,
            threads: None,
            progress: false,
        }
    }
}

impl SearchConfig {
    /// The coefficient set sorted ascending with duplicates removed.
    fn normalized_set(&self) -> Result<Vec<i64>> {
        let mut set: Vec<i64> = self.coefficient_set.clone();
        set.sort_unstable();
        set.dedup();
        if set.is_empty() {
            return Err(Error::Parameter("coefficient set is empty".into()));
        }
        if !set.iter().any(|&v| v > 0) {
            return Err(Error::Parameter(
                "coefficient set contains no positive value".into(),
            ));
        }
        Ok(set)
    }

    fn thread_count(&self) -> Option<usize> {
        self.threads.or_else(|| {
            std::env::var(THREADS_ENV_VAR)
                .ok()
                .and_then(|s| s.parse().ok())
        })
    }
}

/// Number of tuples over `set` whose first nonzero entry is positive.
pub fn count_leading_positive(set: &[i64], len: usize) -> Result<u64> {
    let size = set.len() as u128;
    let zeros = u128::from(set.contains(&0));
    let positives = set.iter().filter(|&&v| v > 0).count() as u128;
    let mut total: u128 = 0;
    let mut prefix = 1u128; // zeros^k
    for k in 0..len {
        let tail = size.pow((len - 1 - k) as u32);
        total += prefix * positives * tail;
        prefix *= zeros;
    }
    total
        .to_u64()
        .ok_or_else(|| Error::Parameter("candidate space exceeds u64".into()))
}

/// Deterministic lexicographic stream of normalized candidates.
pub fn enumerate_candidates(
    cfg: &SearchConfig,
    len: usize,
) -> Result<impl Iterator<Item = CoefficientVector>> {
    if len == 0 {
        return Err(Error::Parameter("vector length must be at least 1".into()));
    }
    let set = cfg.normalized_set()?;
    let prefilter = matches!(cfg.gcd_filter, GcdFilter::Prefilter);
    let mut odometer = Odometer::new(set, len);
    Ok(std::iter::from_fn(move || loop {
        let values = odometer.next_tuple()?;
        let candidate = CoefficientVector(values);
        if !candidate.is_leading_positive() {
            continue;
        }
        if prefilter && candidate.gcd() != 1 {
            continue;
        }
        return Some(candidate);
    }))
}

/// Mixed-radix counter over `set^len` in lexicographic order.
struct Odometer {
    set: Vec<i64>,
    digits: Vec<usize>,
    started: bool,
    exhausted: bool,
}

impl Odometer {
    fn new(set: Vec<i64>, len: usize) -> Self {
        Odometer {
            set,
            digits: vec![0; len],
            started: false,
            exhausted: false,
        }
    }

    fn next_tuple(&mut self) -> Option<Vec<i64>> {
        if self.exhausted {
            return None;
        }
        if self.started {
            let mut pos = self.digits.len();
            loop {
                if pos == 0 {
                    self.exhausted = true;
                    return None;
                }
                pos -= 1;
                if self.digits[pos] + 1 < self.set.len() {
                    self.digits[pos] += 1;
                    for d in &mut self.digits[pos + 1..] {
                        *d = 0;
                    }
                    break;
                }
            }
        }
        self.started = true;
        Some(self.digits.iter().map(|&d| self.set[d]).collect())
    }
}

/// The template compiled into flat integer rows for fast instantiation.
struct CompiledTemplate {
    nrows: usize,
    ncols: usize,
    rows: Vec<Vec<(u32, Vec<(u16, i64)>)>>,
}

impl CompiledTemplate {
    fn new(template: &ConsequenceMatrix<LinearForm>) -> Result<Self> {
        let mut rows = Vec::with_capacity(template.row_count());
        for row in template.rows() {
            let mut out = Vec::with_capacity(row.len());
            for (col, form) in row {
                if !form.constant_part().is_zero() {
                    return Err(Error::Parameter(
                        "consequence template entries must have no constant term".into(),
                    ));
                }
                let mut terms = Vec::new();
                for (id, coeff) in form.terms() {
                    let coeff = coeff.to_i64().ok_or_else(|| {
                        Error::Parameter("template coefficient exceeds i64".into())
                    })?;
                    terms.push(((id - 1) as u16, coeff));
                }
                out.push((*col as u32, terms));
            }
            rows.push(out);
        }
        Ok(CompiledTemplate {
            nrows: template.row_count(),
            ncols: template.column_count(),
            rows,
        })
    }

    /// Scatters the candidate's residues into the dense scratch buffer.
    fn fill_mod(&self, values: &[i64], p: u64, data: &mut [u64]) {
        data.fill(0);
        let p_i = p as i64;
        for (r, row) in self.rows.iter().enumerate() {
            let base = r * self.ncols;
            for (col, terms) in row {
                let mut sum = 0i64;
                for &(sym, coeff) in terms {
                    sum += coeff * values[sym as usize];
                }
                data[base + *col as usize] = sum.rem_euclid(p_i) as u64;
            }
        }
    }

    fn integer_rows(&self, values: &[i64]) -> Vec<Vec<BigInt>> {
        let mut rows = vec![vec![BigInt::zero(); self.ncols]; self.nrows];
        for (r, row) in self.rows.iter().enumerate() {
            for (col, terms) in row {
                let mut sum = 0i64;
                for &(sym, coeff) in terms {
                    sum += coeff * values[sym as usize];
                }
                rows[r][*col as usize] = BigInt::from(sum);
            }
        }
        rows
    }
}

/// Everything a finished search reports.
#[derive(Debug, Clone)]
pub struct SearchReport {
    /// Solutions sorted lexicographically by vector.
    pub solutions: Vec<SolutionRecord>,
    /// Number of candidates screened (the leading-positive count unless the
    /// gcd prefilter is active).
    pub candidates_screened: u64,
    /// Size of the raw Cartesian space.
    pub space_size: u64,
    /// Generic (maximal) rank of the template with its confidence bound.
    pub generic: GenericRankReport,
    /// Solutions are ranks strictly below this value.
    pub threshold: usize,
    /// Observations that deserve attention (e.g. a modular rank strictly
    /// below the rational rank), not errors.
    pub findings: Vec<String>,
}

impl SearchReport {
    pub fn spectrum(&self) -> BTreeSet<usize> {
        rank_spectrum(&self.solutions)
    }
}

/// Distinct confirmed ranks among the solutions.
pub fn rank_spectrum(solutions: &[SolutionRecord]) -> BTreeSet<usize> {
    solutions.iter().map(|s| s.rank_rational).collect()
}

struct ChunkOutcome {
    screened: u64,
    solutions: Vec<SolutionRecord>,
    findings: Vec<String>,
}

/// Runs the exhaustive search over the template's coefficient space.
pub fn run_search(
    template: &ConsequenceMatrix<LinearForm>,
    cfg: &SearchConfig,
) -> Result<SearchReport> {
    let set = cfg.normalized_set()?;
    let len = template.source_dimension();
    let compiled = CompiledTemplate::new(template)?;
    if !crate::linalg::is_prime(cfg.screening_prime) {
        return Err(Error::Parameter(format!(
            "screening modulus {} is not prime",
            cfg.screening_prime
        )));
    }

    let all_free: BTreeSet<u32> = (1..=len as u32).collect();
    let generic = generic_rank(
        template,
        &all_free,
        &Default::default(),
        cfg.trials,
        cfg.seed,
        cfg.specialization_prime,
    )?;
    let threshold = generic.rank;

    let space_size = (set.len() as u128)
        .checked_pow(len as u32)
        .and_then(|s| s.to_u64())
        .ok_or_else(|| Error::Parameter("candidate space exceeds u64".into()))?;

    const CHUNK: u64 = 16_384;
    let chunk_count = space_size.div_ceil(CHUNK);

    let progress = ProgressMeter::new(cfg.progress, space_size);
    let worker = |chunk: u64| -> ChunkOutcome {
        let lo = chunk * CHUNK;
        let hi = (lo + CHUNK).min(space_size);
        let outcome = scan_range(&compiled, cfg, &set, len, lo, hi, threshold);
        progress.advance(hi - lo);
        outcome
    };

    let outcomes: Vec<ChunkOutcome> = match cfg.thread_count() {
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::Parameter(format!("thread pool: {e}")))?;
            pool.install(|| (0..chunk_count).into_par_iter().map(worker).collect())
        }
        None => (0..chunk_count).into_par_iter().map(worker).collect(),
    };
    progress.finish();

    let mut solutions = Vec::new();
    let mut findings = Vec::new();
    let mut screened = 0;
    for outcome in outcomes {
        screened += outcome.screened;
        solutions.extend(outcome.solutions);
        findings.extend(outcome.findings);
    }
    // Chunks are merged in index order, so this is already lexicographic;
    // sort anyway to pin the contract.
    solutions.sort_by(|a, b| a.vector.cmp(&b.vector));

    Ok(SearchReport {
        solutions,
        candidates_screened: screened,
        space_size,
        generic,
        threshold,
        findings,
    })
}

/// Scans one contiguous index range of the Cartesian space.
fn scan_range(
    compiled: &CompiledTemplate,
    cfg: &SearchConfig,
    set: &[i64],
    len: usize,
    lo: u64,
    hi: u64,
    threshold: usize,
) -> ChunkOutcome {
    let radix = set.len() as u64;
    let mut digits = vec![0usize; len];
    let mut rem = lo;
    for k in (0..len).rev() {
        digits[k] = (rem % radix) as usize;
        rem /= radix;
    }
    let mut values: Vec<i64> = digits.iter().map(|&d| set[d]).collect();

    let p = cfg.screening_prime;
    let use_lazy = lazy_reduction_fits(compiled.nrows, p);
    let mut scratch = vec![0u64; compiled.nrows * compiled.ncols];
    let mut outcome = ChunkOutcome {
        screened: 0,
        solutions: Vec::new(),
        findings: Vec::new(),
    };

    for index in lo..hi {
        if index > lo {
            // advance the odometer
            let mut k = len - 1;
            loop {
                if digits[k] + 1 < set.len() {
                    digits[k] += 1;
                    values[k] = set[digits[k]];
                    break;
                }
                digits[k] = 0;
                values[k] = set[0];
                k -= 1;
            }
        }
        let leading = values.iter().find(|&&v| v != 0);
        match leading {
            Some(&v) if v > 0 => {}
            _ => continue,
        }
        let gcd_of = || {
            values
                .iter()
                .fold(0u64, |g, &v| num_integer::gcd(g, v.unsigned_abs()))
        };
        if matches!(cfg.gcd_filter, GcdFilter::Prefilter) && gcd_of() != 1 {
            continue;
        }
        outcome.screened += 1;

        match cfg.screen_mode {
            ScreenMode::ModularFirst => {
                compiled.fill_mod(&values, p, &mut scratch);
                let rank_mod = if use_lazy {
                    rank_rows_mod_lazy(&mut scratch, compiled.nrows, compiled.ncols, p)
                } else {
                    rank_rows_mod(&mut scratch, compiled.nrows, compiled.ncols, p)
                };
                if rank_mod >= threshold {
                    continue;
                }
                if matches!(cfg.gcd_filter, GcdFilter::Solutions) && gcd_of() != 1 {
                    continue;
                }
                let rank_rational = if cfg.rational_confirmation {
                    bareiss_rank(compiled.integer_rows(&values))
                } else {
                    rank_mod
                };
                if rank_mod != rank_rational {
                    outcome.findings.push(format!(
                        "vector ({}) has modular rank {rank_mod} below rational rank {rank_rational}",
                        CoefficientVector(values.clone())
                    ));
                }
                if rank_rational < threshold {
                    outcome.solutions.push(SolutionRecord {
                        vector: CoefficientVector(values.clone()),
                        rank_mod,
                        rank_rational,
                        prime_used: p,
                    });
                }
            }
            ScreenMode::RationalOnly => {
                let rank_rational = bareiss_rank(compiled.integer_rows(&values));
                if rank_rational >= threshold {
                    continue;
                }
                if matches!(cfg.gcd_filter, GcdFilter::Solutions) && gcd_of() != 1 {
                    continue;
                }
                compiled.fill_mod(&values, p, &mut scratch);
                let rank_mod = if use_lazy {
                    rank_rows_mod_lazy(&mut scratch, compiled.nrows, compiled.ncols, p)
                } else {
                    rank_rows_mod(&mut scratch, compiled.nrows, compiled.ncols, p)
                };
                if rank_mod != rank_rational {
                    outcome.findings.push(format!(
                        "vector ({}) has modular rank {rank_mod} below rational rank {rank_rational}",
                        CoefficientVector(values.clone())
                    ));
                }
                outcome.solutions.push(SolutionRecord {
                    vector: CoefficientVector(values.clone()),
                    rank_mod,
                    rank_rational,
                    prime_used: p,
                });
            }
        }
    }
    outcome
}

struct ProgressMeter {
    enabled: bool,
    scanned: Arc<AtomicU64>,
    done: Arc<AtomicBool>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl ProgressMeter {
    fn new(enabled: bool, total: u64) -> Self {
        let scanned = Arc::new(AtomicU64::new(0));
        let done = Arc::new(AtomicBool::new(false));
        let handle = if enabled {
            let scanned = Arc::clone(&scanned);
            let done = Arc::clone(&done);
            Some(std::thread::spawn(move || {
                let start = std::time::Instant::now();
                loop {
                    std::thread::sleep(std::time::Duration::from_secs(1));
                    if done.load(Ordering::Relaxed) {
                        return;
                    }
                    let n = scanned.load(Ordering::Relaxed);
                    let secs = start.elapsed().as_secs_f64();
                    let rate = n as f64 / secs.max(1e-9);
                    let eta = if rate > 0.0 {
                        ((total - n) as f64 / rate).round() as u64
                    } else {
                        0
                    };
                    eprintln!(
                        "search: scanned {n}/{total} tuples ({:.0}/s, eta {eta}s)",
                        rate
                    );
                }
            }))
        } else {
            None
        };
        ProgressMeter {
            enabled,
            scanned,
            done,
            handle,
        }
    }

    fn advance(&self, n: u64) {
        if self.enabled {
            self.scanned.fetch_add(n, Ordering::Relaxed);
        }
    }

    fn finish(mut self) {
        self.done.store(true, Ordering::Relaxed);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

/// Writes solutions as CSV: header `a1,...,aN,rank_mod,rank_rational`,
/// integers only, LF line endings.
pub fn write_solutions_csv(
    solutions: &[SolutionRecord],
    len: usize,
    mut w: impl Write,
) -> std::io::Result<()> {
    let mut header: Vec<String> = (1..=len).map(|k| format!("a{k}")).collect();
    header.push("rank_mod".into());
    header.push("rank_rational".into());
    writeln!(w, "{}", header.join(","))?;
    for s in solutions {
        writeln!(w, "{},{},{}", s.vector, s.rank_mod, s.rank_rational)?;
    }
    Ok(())
}

/// Parses a CSV produced by [`write_solutions_csv`].
pub fn read_solutions_csv(input: &str) -> Result<Vec<SolutionRecord>> {
    let mut lines = input.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        line: 1,
        message: "empty solutions file".into(),
    })?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 3
        || columns[columns.len() - 2] != "rank_mod"
        || columns[columns.len() - 1] != "rank_rational"
    {
        return Err(Error::Parse {
            line: 1,
            message: "expected header a1,...,aN,rank_mod,rank_rational".into(),
        });
    }
    let len = columns.len() - 2;
    let mut out = Vec::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != len + 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected {} fields, found {}", len + 2, fields.len()),
            });
        }
        let parse = |s: &str| -> Result<i64> {
            s.trim().parse().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("invalid integer {s:?}"),
            })
        };
        let vector: Vec<i64> = fields[..len]
            .iter()
            .map(|s| parse(s))
            .collect::<Result<_>>()?;
        let rank_mod = parse(fields[len])? as usize;
        let rank_rational = parse(fields[len + 1])? as usize;
        out.push(SolutionRecord {
            vector: CoefficientVector(vector),
            rank_mod,
            rank_rational,
            prime_used: 0,
        });
    }
    Ok(out)
}
