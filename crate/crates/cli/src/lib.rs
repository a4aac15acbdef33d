//! Benchmark, verification, and simulation harness around the inference
//! library: pick algorithms and chain lengths, run each (algorithm, length,
//! repetition) cell on a fresh deterministically-seeded simulation, time the
//! inference (simulation excluded, potential construction included), and
//! emit machine-readable records. The `verify` entry point reruns paired
//! implementations and reports per-length agreement against tolerances.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::{bail, Context};
use hmm_parscan::{
    build_ge_model, build_potentials, map_from_potentials, max_backward_parallel,
    max_backward_sequential, max_forward_parallel, max_forward_sequential, simulate,
    smooth_parallel, smooth_sequential, viterbi_path_parallel, viterbi_sequential, GeParams,
    HmmError, HmmModel, PotentialSequence, ScanStats, SimulationOutput, DEFAULT_PATH_CAPACITY,
};
use serde::{Deserialize, Serialize};

/// Environment variable consulted for the default worker count.
pub const THREADS_ENV_VAR: &str = "HMM_PARSCAN_THREADS";
/// Default repetitions for sequential algorithms.
pub const DEFAULT_SEQUENTIAL_REPS: u32 = 10;
/// Default repetitions for parallel algorithms.
pub const DEFAULT_PARALLEL_REPS: u32 = 100;
/// Default verification bar for smoothing marginals.
pub const DEFAULT_MARGINAL_TOLERANCE: f64 = 1e-12;
/// Default verification bar for MAP joint log weights.
pub const DEFAULT_LOG_WEIGHT_TOLERANCE: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Algorithms
// ---------------------------------------------------------------------------

/// The six benchmarkable inference routes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    /// Smoothing marginals via sequential forward/backward recursions.
    SpSeq,
    /// Smoothing marginals via parallel scans.
    SpPar,
    /// MAP via sequential max-message recursions plus per-step argmax.
    MpSeq,
    /// MAP via parallel max-message scans plus per-step argmax.
    MpPar,
    /// MAP via the classic backpointer dynamic program.
    Viterbi,
    /// MAP via one parallel reduction of path-carrying elements.
    PathPar,
}

pub const ALL_ALGORITHMS: [Algorithm; 6] = [
    Algorithm::SpSeq,
    Algorithm::SpPar,
    Algorithm::MpSeq,
    Algorithm::MpPar,
    Algorithm::Viterbi,
    Algorithm::PathPar,
];

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::SpSeq => "sp-seq",
            Algorithm::SpPar => "sp-par",
            Algorithm::MpSeq => "mp-seq",
            Algorithm::MpPar => "mp-par",
            Algorithm::Viterbi => "viterbi",
            Algorithm::PathPar => "path-par",
        }
    }

    /// Whether the route uses the parallel executor (drives the default
    /// repetition count).
    pub fn is_parallel(self) -> bool {
        matches!(self, Algorithm::SpPar | Algorithm::MpPar | Algorithm::PathPar)
    }

    pub fn default_repetitions(self) -> u32 {
        if self.is_parallel() {
            DEFAULT_PARALLEL_REPS
        } else {
            DEFAULT_SEQUENTIAL_REPS
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ALL_ALGORITHMS
            .into_iter()
            .find(|a| a.tag() == s)
            .ok_or_else(|| {
                format!(
                    "unknown algorithm `{s}`; expected one of {}",
                    ALL_ALGORITHMS.map(Algorithm::tag).join(", ")
                )
            })
    }
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSource {
    /// Bursty-channel model built from parameters.
    Ge(GeParams),
    /// JSON model file.
    File(PathBuf),
}

impl ModelSource {
    pub fn load(&self) -> anyhow::Result<HmmModel> {
        match self {
            ModelSource::Ge(params) => {
                build_ge_model(params).context("building channel model")
            }
            ModelSource::File(path) => HmmModel::load_json(path)
                .with_context(|| format!("loading model from {}", path.display())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}`; expected csv or json")),
        }
    }
}

/// Worker-count request: a number or hardware detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThreadSpec {
    Auto,
    Count(usize),
}

impl FromStr for ThreadSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(ThreadSpec::Auto);
        }
        match s.parse::<usize>() {
            Ok(n) if n > 0 => Ok(ThreadSpec::Count(n)),
            _ => Err(format!("invalid thread count `{s}`; expected a positive integer or `auto`")),
        }
    }
}

/// Resolves the worker count: an explicit request wins, then the
/// `HMM_PARSCAN_THREADS` environment variable, then hardware detection.
pub fn resolve_threads(explicit: Option<ThreadSpec>) -> anyhow::Result<usize> {
    let hardware = || std::thread::available_parallelism().map_or(1, |n| n.get());
    match explicit {
        Some(ThreadSpec::Count(n)) => Ok(n),
        Some(ThreadSpec::Auto) => Ok(hardware()),
        None => match std::env::var(THREADS_ENV_VAR) {
            Ok(raw) => match raw.parse::<ThreadSpec>() {
                Ok(ThreadSpec::Count(n)) => Ok(n),
                Ok(ThreadSpec::Auto) => Ok(hardware()),
                Err(e) => bail!("{THREADS_ENV_VAR}: {e}"),
            },
            Err(_) => Ok(hardware()),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub lengths: Vec<usize>,
    /// Explicit repetition count for every algorithm; `None` applies the
    /// per-algorithm defaults (10 sequential, 100 parallel).
    pub repetitions: Option<u32>,
    pub seed: u64,
    pub threads: Option<ThreadSpec>,
    pub model_source: ModelSource,
    pub output_format: OutputFormat,
}

impl BenchConfig {
    fn validate(&self) -> anyhow::Result<()> {
        if self.algorithms.is_empty() {
            bail!("no algorithms selected");
        }
        if self.lengths.is_empty() {
            bail!("no chain lengths given");
        }
        if self.lengths.contains(&0) {
            bail!("chain lengths must be positive");
        }
        if self.repetitions == Some(0) {
            bail!("repetitions must be positive");
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

/// One benchmark cell. Timing fields are absent for cells that were skipped
/// (path-par beyond its capacity); agreement is absent for algorithms with
/// no sequential counterpart to compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub algorithm: String,
    #[serde(rename = "T")]
    pub t: usize,
    pub repetition: u32,
    pub wall_time_s: Option<f64>,
    pub combine_invocations: Option<u64>,
    pub threads: usize,
    pub agreement_max_abs_diff: Option<f64>,
}

/// Benchmark results plus any per-cell skip warnings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub records: Vec<BenchRecord>,
    pub warnings: Vec<String>,
}

/// Deterministic per-cell seed: FNV-1a over the run seed, algorithm tag,
/// length, and repetition index, so cells are independent yet reproducible.
pub fn cell_seed(seed: u64, algorithm: Algorithm, t: usize, repetition: u32) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
    };
    eat(&seed.to_le_bytes());
    eat(algorithm.tag().as_bytes());
    eat(&(t as u64).to_le_bytes());
    eat(&u64::from(repetition).to_le_bytes());
    h
}

// ---------------------------------------------------------------------------
// Cell execution
// ---------------------------------------------------------------------------

fn total_invocations(a: ScanStats, b: ScanStats) -> u64 {
    a.combine_invocations + b.combine_invocations
}

/// Largest log weight any state attains in the final forward max message:
/// the optimum joint log weight, defined whether or not it is unique.
fn best_final_log_weight(forward: &[Vec<f64>]) -> f64 {
    forward
        .last()
        .expect("messages are nonempty")
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// MAP joint log weight plus invocation count via max messages and per-step
/// argmax. When tied optima abort path assembly, the optimum itself (which
/// is still well defined) is reported instead of a decoded path's weight.
fn mp_log_weight(
    p: &PotentialSequence,
    parallel: bool,
) -> anyhow::Result<(f64, u64)> {
    let ((fwd, fs), (bwd, bs)) = if parallel {
        (max_forward_parallel(p), max_backward_parallel(p))
    } else {
        (max_forward_sequential(p), max_backward_sequential(p))
    };
    let invocations = total_invocations(fs, bs);
    match map_from_potentials(p, &fwd, &bwd) {
        Ok(result) => Ok((result.log_weight, invocations)),
        Err(HmmError::AmbiguousDecoding { .. }) => Ok((best_final_log_weight(&fwd), invocations)),
        Err(e) => Err(e.into()),
    }
}

/// Timed quantities of one executed cell.
struct CellMeasurement {
    wall_time_s: f64,
    combine_invocations: u64,
    agreement_max_abs_diff: Option<f64>,
}

/// Runs one benchmark cell: the timed region covers potential construction
/// and the algorithm itself; the agreement rerun of the sequential
/// counterpart on the same data happens outside the clock.
fn run_cell(
    model: &HmmModel,
    algorithm: Algorithm,
    sim: &SimulationOutput,
) -> anyhow::Result<CellMeasurement> {
    let start = Instant::now();
    let p = build_potentials(model, &sim.observations)?;
    let (combine_invocations, timed_result) = match algorithm {
        Algorithm::SpSeq => {
            let out = smooth_sequential(&p)?;
            (
                total_invocations(out.forward_stats, out.backward_stats),
                TimedResult::Marginals(out.marginals),
            )
        }
        Algorithm::SpPar => {
            let out = smooth_parallel(&p)?;
            (
                total_invocations(out.forward_stats, out.backward_stats),
                TimedResult::Marginals(out.marginals),
            )
        }
        Algorithm::MpSeq => {
            let (w, inv) = mp_log_weight(&p, false)?;
            (inv, TimedResult::LogWeight(w))
        }
        Algorithm::MpPar => {
            let (w, inv) = mp_log_weight(&p, true)?;
            (inv, TimedResult::LogWeight(w))
        }
        Algorithm::Viterbi => {
            let (r, stats) = viterbi_sequential(&p)?;
            (stats.combine_invocations, TimedResult::LogWeight(r.log_weight))
        }
        Algorithm::PathPar => {
            let (r, stats) = viterbi_path_parallel(&p)?;
            (stats.combine_invocations, TimedResult::LogWeight(r.log_weight))
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    // Untimed agreement rerun against the sequential counterpart.
    let agreement_max_abs_diff = match (algorithm, &timed_result) {
        (Algorithm::SpPar, TimedResult::Marginals(m)) => {
            let base = smooth_sequential(&p)?.marginals;
            Some(m.max_abs_difference(&base))
        }
        (Algorithm::MpPar, TimedResult::LogWeight(w)) => {
            let (base, _) = mp_log_weight(&p, false)?;
            Some((w - base).abs())
        }
        (Algorithm::PathPar, TimedResult::LogWeight(w)) => {
            let (base, _) = viterbi_sequential(&p)?;
            Some((w - base.log_weight).abs())
        }
        _ => None,
    };

    Ok(CellMeasurement {
        wall_time_s,
        combine_invocations,
        agreement_max_abs_diff,
    })
}

enum TimedResult {
    Marginals(hmm_parscan::MarginalSet),
    LogWeight(f64),
}

/// Runs every configured (length, algorithm, repetition) cell, one at a
/// time, inside a worker pool of the resolved size. Record order is
/// deterministic: lengths outermost, then algorithms in configuration
/// order, then repetitions.
pub fn run(config: &BenchConfig) -> anyhow::Result<RunOutput> {
    config.validate()?;
    let model = config.model_source.load()?;
    let threads = resolve_threads(config.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for &t in &config.lengths {
        for &algorithm in &config.algorithms {
            let reps = config.repetitions.unwrap_or_else(|| algorithm.default_repetitions());
            for repetition in 0..reps {
                let mut record = BenchRecord {
                    algorithm: algorithm.tag().to_string(),
                    t,
                    repetition,
                    wall_time_s: None,
                    combine_invocations: None,
                    threads,
                    agreement_max_abs_diff: None,
                };
                if algorithm == Algorithm::PathPar && t > DEFAULT_PATH_CAPACITY {
                    warnings.push(format!(
                        "skipping path-par at T={t}: exceeds the path-carrying capacity of {DEFAULT_PATH_CAPACITY} steps"
                    ));
                    records.push(record);
                    continue;
                }
                let seed = cell_seed(config.seed, algorithm, t, repetition);
                let sim = simulate(&model, t, seed)?;
                let m = pool.install(|| run_cell(&model, algorithm, &sim))?;
                record.wall_time_s = Some(m.wall_time_s);
                record.combine_invocations = Some(m.combine_invocations);
                record.agreement_max_abs_diff = m.agreement_max_abs_diff;
                records.push(record);
            }
        }
    }
    Ok(RunOutput { records, warnings })
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

/// Writes records as CSV with exactly the columns
/// `algorithm,T,repetition,wall_time_s,combine_invocations,threads,agreement_max_abs_diff`;
/// absent values become empty fields.
pub fn emit_csv(records: &[BenchRecord], out: &mut dyn Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    if records.is_empty() {
        // serde-driven headers only appear with the first record.
        w.write_record([
            "algorithm",
            "T",
            "repetition",
            "wall_time_s",
            "combine_invocations",
            "threads",
            "agreement_max_abs_diff",
        ])?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records as a JSON array of objects with the same keys as the CSV
/// columns, in the same stable order.
pub fn emit_json(records: &[BenchRecord], out: &mut dyn Write) -> anyhow::Result<()> {
    serde_json::to_writer_pretty(&mut *out, records)?;
    out.write_all(b"\n")?;
    Ok(())
}

pub fn emit(records: &[BenchRecord], format: OutputFormat, out: &mut dyn Write) -> anyhow::Result<()> {
    match format {
        OutputFormat::Csv => emit_csv(records, out),
        OutputFormat::Json => emit_json(records, out),
    }
}

// ---------------------------------------------------------------------------
// Verification
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyConfig {
    pub lengths: Vec<usize>,
    pub seed: u64,
    pub threads: Option<ThreadSpec>,
    pub model_source: ModelSource,
    pub marginal_tolerance: f64,
    pub log_weight_tolerance: f64,
}

/// Agreement maxima for one chain length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyRow {
    #[serde(rename = "T")]
    pub t: usize,
    /// Largest pointwise marginal difference, parallel vs sequential smoothing.
    pub marginal_max_abs: f64,
    /// Mean pointwise marginal difference over all steps and states.
    pub marginal_mean_abs: f64,
    /// Largest pairwise MAP log-weight difference among decoders.
    pub log_weight_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
    pub marginal_tolerance: f64,
    pub log_weight_tolerance: f64,
}

impl VerifyReport {
    /// Rows that breach a tolerance, with the offending quantity named.
    pub fn breaches(&self) -> Vec<String> {
        let mut out = Vec::new();
        for row in &self.rows {
            if row.marginal_max_abs > self.marginal_tolerance {
                out.push(format!(
                    "T={}: marginal max-abs {:.3e} exceeds {:.1e}",
                    row.t, row.marginal_max_abs, self.marginal_tolerance
                ));
            }
            if row.log_weight_max_abs > self.log_weight_tolerance {
                out.push(format!(
                    "T={}: log-weight max-abs {:.3e} exceeds {:.1e}",
                    row.t, row.log_weight_max_abs, self.log_weight_tolerance
                ));
            }
        }
        out
    }

    pub fn passed(&self) -> bool {
        self.breaches().is_empty()
    }

    /// Human-readable per-length table.
    pub fn render(&self) -> String {
        let mut s = String::from(
            "T,marginal_max_abs,marginal_mean_abs,log_weight_max_abs\n",
        );
        for row in &self.rows {
            s.push_str(&format!(
                "{},{:.3e},{:.3e},{:.3e}\n",
                row.t, row.marginal_max_abs, row.marginal_mean_abs, row.log_weight_max_abs
            ));
        }
        s
    }
}

/// Pure agreement computation for one potential sequence; separated from
/// the driver so it can be exercised directly in tests.
pub fn verify_cell(p: &PotentialSequence, t: usize) -> anyhow::Result<VerifyRow> {
    let seq = smooth_sequential(p)?.marginals;
    let par = smooth_parallel(p)?.marginals;
    let marginal_max_abs = seq.max_abs_difference(&par);
    let mut sum = 0.0f64;
    let mut n = 0usize;
    for k in 0..seq.len() {
        for (a, b) in seq.step(k).iter().zip(par.step(k)) {
            sum += (a - b).abs();
            n += 1;
        }
    }
    let marginal_mean_abs = sum / n as f64;

    let mut log_weights = Vec::new();
    let (viterbi, _) = viterbi_sequential(p)?;
    log_weights.push(viterbi.log_weight);
    log_weights.push(mp_log_weight(p, false)?.0);
    log_weights.push(mp_log_weight(p, true)?.0);
    if p.len() <= DEFAULT_PATH_CAPACITY {
        let (reduced, _) = viterbi_path_parallel(p)?;
        log_weights.push(reduced.log_weight);
    }
    let mut log_weight_max_abs = 0.0f64;
    for i in 0..log_weights.len() {
        for j in i + 1..log_weights.len() {
            log_weight_max_abs = log_weight_max_abs.max((log_weights[i] - log_weights[j]).abs());
        }
    }

    Ok(VerifyRow {
        t,
        marginal_max_abs,
        marginal_mean_abs,
        log_weight_max_abs,
    })
}

/// Reruns paired implementations on one fresh simulation per length and
/// collects the agreement maxima.
pub fn verify(config: &VerifyConfig) -> anyhow::Result<VerifyReport> {
    if config.lengths.is_empty() {
        bail!("no chain lengths given");
    }
    if config.lengths.contains(&0) {
        bail!("chain lengths must be positive");
    }
    let model = config.model_source.load()?;
    let threads = resolve_threads(config.threads)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .context("building worker pool")?;

    let mut rows = Vec::new();
    for &t in &config.lengths {
        let seed = cell_seed(config.seed, Algorithm::SpSeq, t, 0);
        let sim = simulate(&model, t, seed)?;
        let p = build_potentials(&model, &sim.observations)?;
        rows.push(pool.install(|| verify_cell(&p, t))?);
    }
    Ok(VerifyReport {
        rows,
        marginal_tolerance: config.marginal_tolerance,
        log_weight_tolerance: config.log_weight_tolerance,
    })
}

// ---------------------------------------------------------------------------
// Simulation output
// ---------------------------------------------------------------------------

/// Writes a simulated trajectory as CSV with columns `k,state,observation`,
/// `k` counting steps from zero.
pub fn emit_simulation(sim: &SimulationOutput, out: &mut dyn Write) -> anyhow::Result<()> {
    writeln!(out, "k,state,observation")?;
    for (k, (x, y)) in sim
        .states
        .states()
        .iter()
        .zip(sim.observations.symbols())
        .enumerate()
    {
        writeln!(out, "{k},{x},{y}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algorithm_tags_round_trip() {
        for a in ALL_ALGORITHMS {
            assert_eq!(a.tag().parse::<Algorithm>().unwrap(), a);
            assert_eq!(a.to_string(), a.tag());
        }
        assert!("sp_seq".parse::<Algorithm>().is_err());
        assert!("".parse::<Algorithm>().is_err());
    }

    #[test]
    fn cell_seeds_differ_across_every_coordinate() {
        let base = cell_seed(7, Algorithm::SpPar, 100, 3);
        assert_eq!(base, cell_seed(7, Algorithm::SpPar, 100, 3));
        assert_ne!(base, cell_seed(8, Algorithm::SpPar, 100, 3));
        assert_ne!(base, cell_seed(7, Algorithm::SpSeq, 100, 3));
        assert_ne!(base, cell_seed(7, Algorithm::SpPar, 101, 3));
        assert_ne!(base, cell_seed(7, Algorithm::SpPar, 100, 4));
    }

    #[test]
    fn thread_spec_parses_counts_and_auto() {
        assert_eq!("auto".parse::<ThreadSpec>().unwrap(), ThreadSpec::Auto);
        assert_eq!("4".parse::<ThreadSpec>().unwrap(), ThreadSpec::Count(4));
        assert!("0".parse::<ThreadSpec>().is_err());
        assert!("four".parse::<ThreadSpec>().is_err());
    }

    #[test]
    fn default_repetitions_follow_the_sequential_parallel_split() {
        assert_eq!(Algorithm::SpSeq.default_repetitions(), 10);
        assert_eq!(Algorithm::Viterbi.default_repetitions(), 10);
        assert_eq!(Algorithm::SpPar.default_repetitions(), 100);
        assert_eq!(Algorithm::PathPar.default_repetitions(), 100);
    }

    #[test]
    fn empty_record_stream_emits_header_only_csv() {
        let mut buf = Vec::new();
        emit_csv(&[], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "algorithm,T,repetition,wall_time_s,combine_invocations,threads,agreement_max_abs_diff\n"
        );
    }

    #[test]
    fn single_record_csv_round_trips() {
        let record = BenchRecord {
            algorithm: "sp-par".into(),
            t: 1000,
            repetition: 2,
            wall_time_s: Some(0.125),
            combine_invocations: Some(1990),
            threads: 4,
            agreement_max_abs_diff: Some(3.5e-15),
        };
        let mut buf = Vec::new();
        emit_csv(std::slice::from_ref(&record), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "algorithm,T,repetition,wall_time_s,combine_invocations,threads,agreement_max_abs_diff"
        );
        assert!(lines.next().is_some());
        assert!(lines.next().is_none());

        let mut reader = csv::Reader::from_reader(text.as_bytes());
        let parsed: BenchRecord = reader.deserialize().next().unwrap().unwrap();
        assert_eq!(parsed, record);
    }

    #[test]
    fn skipped_cells_serialise_with_empty_fields() {
        let record = BenchRecord {
            algorithm: "path-par".into(),
            t: 2048,
            repetition: 0,
            wall_time_s: None,
            combine_invocations: None,
            threads: 2,
            agreement_max_abs_diff: None,
        };
        let mut buf = Vec::new();
        emit_csv(&[record], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().nth(1).unwrap() == "path-par,2048,0,,,2,");
    }

    #[test]
    fn json_keys_follow_the_csv_column_order() {
        let record = BenchRecord {
            algorithm: "mp-seq".into(),
            t: 10,
            repetition: 0,
            wall_time_s: Some(0.5),
            combine_invocations: Some(18),
            threads: 1,
            agreement_max_abs_diff: None,
        };
        let mut buf = Vec::new();
        emit_json(&[record], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let order = [
            "\"algorithm\"",
            "\"T\"",
            "\"repetition\"",
            "\"wall_time_s\"",
            "\"combine_invocations\"",
            "\"threads\"",
            "\"agreement_max_abs_diff\"",
        ];
        let mut last = 0;
        for key in order {
            let pos = text.find(key).unwrap_or_else(|| panic!("{key} missing"));
            assert!(pos > last, "{key} out of order");
            last = pos;
        }
        assert!(text.trim_start().starts_with('['));
    }
}
