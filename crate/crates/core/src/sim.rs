//! Monte Carlo FER/ANV campaigns, spectrum and verification runs, and the
//! CSV formats they emit.
//!
//! Trial `t` at every SNR point draws its data bits and then its noise from
//! stream `t` of the master seed, so the points share common random numbers
//! and each row is a pure function of the config. Trials run in parallel in
//! fixed-size batches and are folded in trial order, which pins the stopping
//! point at exactly `min_errors` regardless of thread count.
//!
//! Every CSV starts with one `#` line holding the tool version and the
//! resolved config as JSON. Execution-only settings (worker count, chunk
//! count) are left out of that line so output bytes do not depend on them.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{llr, modulate, transmit, ChannelConfig, RngStream};
use crate::conv::ConnectionPolynomial;
use crate::cyclic::{verify_equivalence, verify_prop1, verify_theorem, Prop1Mode};
use crate::error::{Error, Result};
use crate::fano::{fano_decode, AnvDenominator, DecoderConfig, LlrDomain, DEFAULT_DELTA};
use crate::gf2::BitVec;
use crate::pac::PacCode;
use crate::polar::{bhattacharyya_profile, load_profile, rm_profile, PolarDim, RateProfile};
use crate::weights::{code_spectrum, min_distance, WeightSpectrum, DEFAULT_GUARD_K};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const FER_CSV_HEADER: &str =
    "ebn0_db,trials,frame_errors,fer,mean_anv,timeouts,wall_seconds,seed";

pub const DEFAULT_MIN_ERRORS: u64 = 100;
pub const DEFAULT_MAX_TRIALS: u64 = 10_000_000;
pub const DEFAULT_DESIGN_ERASURE: f64 = 0.5;

/// Trials evaluated per parallel batch.
const BATCH: u64 = 1024;

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    Rm {
        k: usize,
    },
    File {
        path: PathBuf,
    },
    Bhattacharyya {
        k: usize,
        #[serde(default = "default_erasure")]
        design_erasure: f64,
    },
}

fn default_erasure() -> f64 {
    DEFAULT_DESIGN_ERASURE
}

fn default_poly() -> String {
    "1".into()
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    /// `log2 N`.
    pub n: u32,
    pub profile: ProfileSource,
    /// Connection polynomial in octal; `"1"` is plain polar/RM coding.
    #[serde(default = "default_poly")]
    pub poly: String,
}

impl CodeSpec {
    pub fn profile(&self) -> Result<RateProfile> {
        let dim = PolarDim::new(self.n)?;
        match &self.profile {
            ProfileSource::Rm { k } => rm_profile(dim, *k),
            ProfileSource::Bhattacharyya { k, design_erasure } => {
                bhattacharyya_profile(dim, *k, *design_erasure)
            }
            ProfileSource::File { path } => {
                let profile = load_profile(path)?;
                if profile.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        profile: profile.dim().len(),
                        code: dim.len(),
                    });
                }
                Ok(profile)
            }
        }
    }

    pub fn build(&self) -> Result<PacCode> {
        let poly = ConnectionPolynomial::parse_octal(&self.poly)?;
        PacCode::new(self.profile()?, poly)
    }
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub ebn0_db: Vec<f64>,
    #[serde(default)]
    pub master_seed: u64,
    /// Test hook: no noise at any point.
    #[serde(default)]
    pub noiseless: bool,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSpec {
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Defaults to the code rate.
    #[serde(default)]
    pub bias: Option<f64>,
    /// Defaults to `10^6 N`.
    #[serde(default)]
    pub max_visits: Option<u64>,
    #[serde(default)]
    pub llr: LlrDomain,
    #[serde(default)]
    pub anv_denominator: AnvDenominator,
}

fn default_delta() -> f64 {
    DEFAULT_DELTA
}

impl Default for DecoderSpec {
    fn default() -> Self {
        Self {
            delta: DEFAULT_DELTA,
            bias: None,
            max_visits: None,
            llr: LlrDomain::Exact,
            anv_denominator: AnvDenominator::CodeLength,
        }
    }
}

impl DecoderSpec {
    pub fn resolve(&self, code: &PacCode) -> DecoderConfig {
        let base = DecoderConfig::for_code(code);
        DecoderConfig {
            delta: self.delta,
            bias: self.bias.unwrap_or(base.bias),
            max_visits: self.max_visits.unwrap_or(base.max_visits),
            llr_domain: self.llr,
            anv_denominator: self.anv_denominator,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingSpec {
    #[serde(default = "default_min_errors")]
    pub min_errors: u64,
    #[serde(default = "default_max_trials")]
    pub max_trials: u64,
}

fn default_min_errors() -> u64 {
    DEFAULT_MIN_ERRORS
}

fn default_max_trials() -> u64 {
    DEFAULT_MAX_TRIALS
}

impl Default for StoppingSpec {
    fn default() -> Self {
        Self {
            min_errors: DEFAULT_MIN_ERRORS,
            max_trials: DEFAULT_MAX_TRIALS,
        }
    }
}

/// FER campaign configuration, read from JSON.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub channel: ChannelSpec,
    #[serde(default)]
    pub decoder: DecoderSpec,
    #[serde(default)]
    pub stopping: StoppingSpec,
    /// Record real elapsed time in `wall_seconds`; otherwise the column is 0
    /// and the CSV is byte-reproducible.
    #[serde(default)]
    pub timing: bool,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("config JSON: {e}")))
    }

    pub fn load(path: impl Into<PathBuf>) -> Result<Self> {
        let path = path.into();
        let text = std::fs::read_to_string(&path).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
        Self::from_json(&text)
    }

    /// Checks the config and builds the code and decoder settings.
    pub fn validate(&self) -> Result<(PacCode, DecoderConfig)> {
        let code = self.code.build()?;
        let dec = self.decoder.resolve(&code);
        dec.validate(code.len())?;
        let s = self.stopping;
        if s.min_errors < 1 {
            return Err(Error::Config("min_errors must be at least 1".into()));
        }
        if s.max_trials < s.min_errors {
            return Err(Error::Config(format!(
                "max_trials {} below min_errors {}",
                s.max_trials, s.min_errors
            )));
        }
        if self.channel.ebn0_db.is_empty() {
            return Err(Error::Config("no Eb/N0 points".into()));
        }
        for &snr in &self.channel.ebn0_db {
            ChannelConfig::new(snr, code.rate())?;
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok((code, dec))
    }

    /// Copy with decoder defaults filled in, as written to CSV headers.
    pub fn resolved(&self) -> Result<Self> {
        let (_, dec) = self.validate()?;
        let mut out = self.clone();
        out.decoder.bias = Some(dec.bias);
        out.decoder.max_visits = Some(dec.max_visits);
        Ok(out)
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct SimResultRow {
    pub ebn0_db: f64,
    pub trials: u64,
    pub frame_errors: u64,
    pub fer: f64,
    pub mean_anv: f64,
    pub timeouts: u64,
    pub wall_seconds: f64,
    pub seed: u64,
}

impl SimResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.ebn0_db,
            self.trials,
            self.frame_errors,
            self.fer,
            self.mean_anv,
            self.timeouts,
            self.wall_seconds,
            self.seed
        )
    }

    /// 95% Wilson score interval for the FER.
    pub fn fer_interval(&self) -> (f64, f64) {
        wilson_interval(self.frame_errors, self.trials, 1.959963984540054)
    }
}

/// Wilson score interval for `successes / trials` at normal quantile `z`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

struct TrialOutcome {
    error: bool,
    timed_out: bool,
    anv: f64,
}

fn run_trial(
    code: &PacCode,
    dec: &DecoderConfig,
    channel: &ChannelConfig,
    seed: u64,
    trial: u64,
) -> Result<TrialOutcome> {
    let mut rng = RngStream::new(seed, trial).rng();
    let d = BitVec::from_bits((0..code.k()).map(|_| rng.random::<bool>()));
    let x = code.encode(&d)?;
    let y = transmit(&modulate(&x), channel, &mut rng);
    let r = fano_decode(&llr(&y, channel), code, dec)?;
    Ok(TrialOutcome {
        error: r.timed_out || r.d_hat != d,
        timed_out: r.timed_out,
        anv: r.anv,
    })
}

fn in_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// One row per Eb/N0 point, in config order.
pub fn run_fer(cfg: &SimConfig) -> Result<Vec<SimResultRow>> {
    let (code, dec) = cfg.validate()?;
    let seed = cfg.channel.master_seed;
    let stop = cfg.stopping;
    in_pool(cfg.workers, || {
        let mut rows = Vec::with_capacity(cfg.channel.ebn0_db.len());
        for &snr in &cfg.channel.ebn0_db {
            let channel = if cfg.channel.noiseless {
                ChannelConfig::noiseless(code.rate())?
            } else {
                ChannelConfig::new(snr, code.rate())?
            };
            let start = Instant::now();
            let (mut trials, mut errors, mut timeouts) = (0u64, 0u64, 0u64);
            let mut anv_sum = 0.0;
            'point: while trials < stop.max_trials && errors < stop.min_errors {
                let end = (trials + BATCH).min(stop.max_trials);
                let batch: Vec<TrialOutcome> = (trials..end)
                    .into_par_iter()
                    .map(|t| run_trial(&code, &dec, &channel, seed, t))
                    .collect::<Result<_>>()?;
                for o in batch {
                    trials += 1;
                    anv_sum += o.anv;
                    errors += o.error as u64;
                    timeouts += o.timed_out as u64;
                    if errors >= stop.min_errors {
                        break 'point;
                    }
                }
            }
            rows.push(SimResultRow {
                ebn0_db: snr,
                trials,
                frame_errors: errors,
                fer: errors as f64 / trials as f64,
                mean_anv: anv_sum / trials as f64,
                timeouts,
                wall_seconds: if cfg.timing {
                    start.elapsed().as_secs_f64()
                } else {
                    0.0
                },
                seed,
            });
        }
        Ok(rows)
    })?
}

fn comment_line(config_json: &str) -> String {
    format!("# pac {VERSION} config {config_json}\n")
}

/// Full FER CSV: comment line, header, rows.
pub fn fer_csv(cfg: &SimConfig, rows: &[SimResultRow]) -> Result<String> {
    let json = serde_json::to_string(&cfg.resolved()?)
        .map_err(|e| Error::Config(format!("config JSON: {e}")))?;
    let mut out = comment_line(&json);
    out.push_str(FER_CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    Ok(out)
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, name: &str, line: usize) -> Result<T> {
    field
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Config(format!("FER CSV line {line}: bad or missing {name}")))
}

/// Reads a FER CSV back, skipping `#` lines and checking the header.
pub fn parse_fer_csv(text: &str) -> Result<Vec<SimResultRow>> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == FER_CSV_HEADER => {}
        _ => return Err(Error::Config("FER CSV header missing or wrong".into())),
    }
    lines
        .map(|(idx, line)| {
            let n = idx + 1;
            let mut f = line.split(',');
            let row = SimResultRow {
                ebn0_db: parse_field(f.next(), "ebn0_db", n)?,
                trials: parse_field(f.next(), "trials", n)?,
                frame_errors: parse_field(f.next(), "frame_errors", n)?,
                fer: parse_field(f.next(), "fer", n)?,
                mean_anv: parse_field(f.next(), "mean_anv", n)?,
                timeouts: parse_field(f.next(), "timeouts", n)?,
                wall_seconds: parse_field(f.next(), "wall_seconds", n)?,
                seed: parse_field(f.next(), "seed", n)?,
            };
            if f.next().is_some() {
                return Err(Error::Config(format!("FER CSV line {n}: too many fields")));
            }
            Ok(row)
        })
        .collect()
}

fn default_guard() -> usize {
    DEFAULT_GUARD_K
}

fn default_chunks() -> usize {
    1
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub code: CodeSpec,
    #[serde(default = "default_guard")]
    pub guard_k: usize,
    #[serde(default = "default_chunks", skip_serializing)]
    pub chunks: usize,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

#[derive(Clone, PartialEq, Debug)]
pub struct SpectrumRun {
    pub spectrum: WeightSpectrum,
    pub csv: String,
    /// `d_min` and `A_dmin`, one line.
    pub summary: String,
}

pub fn run_spectrum(cfg: &SpectrumConfig) -> Result<SpectrumRun> {
    let code = cfg.code.build()?;
    if cfg.workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let spectrum = in_pool(cfg.workers, || {
        code_spectrum(&code, cfg.guard_k, cfg.chunks)
    })??;
    let json =
        serde_json::to_string(cfg).map_err(|e| Error::Config(format!("config JSON: {e}")))?;
    let mut csv = comment_line(&json);
    csv.push_str(&spectrum.to_csv());
    let summary = match min_distance(&spectrum) {
        Some((d, a)) => format!("N={} K={} d_min={d} A_dmin={a}", code.len(), code.k()),
        None => format!("N={} K={} zero code", code.len(), code.k()),
    };
    Ok(SpectrumRun {
        spectrum,
        csv,
        summary,
    })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Check {
    Theorem,
    Prop1,
    Equiv,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleMode {
    Exhaustive,
    Randomized,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub n: u32,
    pub check: Check,
    /// Defaults to exhaustive when `N` allows it.
    #[serde(default)]
    pub mode: Option<SampleMode>,
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Code for the encoder-equivalence check. Without one, every RM profile
    /// with `K <= 16` is tried with the polynomials 1, 133 and 3211 (those
    /// that fit).
    #[serde(default)]
    pub code: Option<CodeSpec>,
    #[serde(default, skip_serializing)]
    pub workers: Option<usize>,
}

fn default_samples() -> u64 {
    100_000
}

#[derive(Clone, PartialEq, Debug)]
pub struct VerifyOutcome {
    pub report: String,
    pub passed: bool,
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<VerifyOutcome> {
    let dim = PolarDim::new(cfg.n)?;
    if cfg.workers == Some(0) {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let codes: Vec<PacCode> = match &cfg.code {
        Some(spec) => {
            if spec.n != cfg.n {
                return Err(Error::Config(format!(
                    "code n={} differs from verify n={}",
                    spec.n, cfg.n
                )));
            }
            vec![spec.build()?]
        }
        None => {
            let mut codes = Vec::new();
            for k in 1..=dim.len().min(16) {
                for poly in ["1", "133", "3211"] {
                    let poly = ConnectionPolynomial::parse_octal(poly)?;
                    if poly.memory() < dim.len() {
                        codes.push(PacCode::new(rm_profile(dim, k)?, poly)?);
                    }
                }
            }
            codes
        }
    };
    let prop1_mode = match cfg.mode {
        Some(SampleMode::Exhaustive) => Prop1Mode::Exhaustive,
        Some(SampleMode::Randomized) => Prop1Mode::Randomized {
            samples: cfg.samples,
            seed: cfg.seed,
        },
        None if dim.len() <= crate::cyclic::EXHAUSTIVE_MAX_LEN => Prop1Mode::Exhaustive,
        None => Prop1Mode::Randomized {
            samples: cfg.samples,
            seed: cfg.seed,
        },
    };
    let run_theorem = matches!(cfg.check, Check::Theorem | Check::All);
    let run_prop1 = matches!(cfg.check, Check::Prop1 | Check::All);
    let run_equiv = matches!(cfg.check, Check::Equiv | Check::All);

    in_pool(cfg.workers, || {
        let mut report = String::new();
        let mut passed = true;
        if run_theorem {
            let r = verify_theorem(dim);
            passed &= r.passed();
            report.push_str(&r.to_string());
        }
        if run_prop1 {
            let r = verify_prop1(dim, prop1_mode)?;
            passed &= r.passed();
            report.push_str(&r.to_string());
        }
        if run_equiv {
            for code in &codes {
                let r = verify_equivalence(code, cfg.samples, cfg.seed)?;
                passed &= r.passed();
                let _ = write!(
                    report,
                    "[N={} K={} poly={}] {r}",
                    code.len(),
                    code.k(),
                    code.poly()
                );
            }
        }
        let _ = writeln!(report, "result: {}", if passed { "PASS" } else { "FAIL" });
        Ok(VerifyOutcome { report, passed })
    })?
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> SimConfig {
        SimConfig::from_json(
            r#"{
                "code": {"n": 3, "profile": {"rm": {"k": 4}}, "poly": "3"},
                "channel": {"ebn0_db": [1.0, 3.0], "master_seed": 7},
                "stopping": {"min_errors": 20, "max_trials": 5000}
            }"#,
        )
        .unwrap()
    }

    #[test]
    fn json_defaults() {
        let cfg = small_config();
        assert_eq!(cfg.decoder, DecoderSpec::default());
        assert!(!cfg.timing);
        let resolved = cfg.resolved().unwrap();
        assert_eq!(resolved.decoder.bias, Some(0.5));
        assert_eq!(resolved.decoder.max_visits, Some(8_000_000));
        assert!(SimConfig::from_json(r#"{"code": {}}"#).is_err());
    }

    #[test]
    fn invalid_configs() {
        let mut cfg = small_config();
        cfg.stopping.max_trials = 10;
        assert!(run_fer(&cfg).is_err());
        let mut cfg = small_config();
        cfg.stopping.min_errors = 0;
        assert!(run_fer(&cfg).is_err());
        let mut cfg = small_config();
        cfg.channel.ebn0_db.clear();
        assert!(run_fer(&cfg).is_err());
        let mut cfg = small_config();
        cfg.decoder.delta = -1.0;
        assert!(run_fer(&cfg).is_err());
        let mut cfg = small_config();
        cfg.code.poly = "8".into();
        assert!(run_fer(&cfg).is_err());
    }

    #[test]
    fn stopping_rule_and_row_invariants() {
        let cfg = small_config();
        let rows = run_fer(&cfg).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.trials <= 5000);
            assert!(row.frame_errors == 20 || row.trials == 5000);
            assert_eq!(row.fer, row.frame_errors as f64 / row.trials as f64);
            assert!(row.mean_anv >= 1.0);
            assert_eq!(row.wall_seconds, 0.0);
        }
        assert!(rows[0].fer >= rows[1].fer);
    }

    #[test]
    fn noiseless_hook() {
        let mut cfg = small_config();
        cfg.channel.noiseless = true;
        cfg.stopping.max_trials = 3000;
        for row in run_fer(&cfg).unwrap() {
            assert_eq!(row.frame_errors, 0);
            assert_eq!(row.trials, 3000);
            assert_eq!(row.mean_anv, 1.0);
        }
    }

    #[test]
    fn csv_round_trip_and_workers() {
        let mut cfg = small_config();
        let rows = run_fer(&cfg).unwrap();
        let csv = fer_csv(&cfg, &rows).unwrap();
        assert!(csv.starts_with("# pac "));
        assert_eq!(csv.lines().nth(1), Some(FER_CSV_HEADER));
        assert_eq!(parse_fer_csv(&csv).unwrap(), rows);

        cfg.workers = Some(1);
        let single = fer_csv(&cfg, &run_fer(&cfg).unwrap()).unwrap();
        assert_eq!(single, csv);
        assert!(parse_fer_csv("weight,count\n").is_err());
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn verify_small() {
        let cfg = VerifyConfig {
            n: 3,
            check: Check::All,
            mode: None,
            samples: 10,
            seed: 0,
            code: None,
            workers: Some(2),
        };
        let out = run_verify(&cfg).unwrap();
        assert!(out.passed, "{}", out.report);
        assert!(out.report.ends_with("result: PASS\n"));
    }

    #[test]
    fn spectrum_run() {
        let cfg = SpectrumConfig {
            code: CodeSpec {
                n: 3,
                profile: ProfileSource::Rm { k: 4 },
                poly: "1".into(),
            },
            guard_k: 30,
            chunks: 4,
            workers: None,
        };
        let run = run_spectrum(&cfg).unwrap();
        assert!(run.csv.ends_with("weight,count\n0,1\n4,14\n8,1\n"));
        assert_eq!(run.summary, "N=8 K=4 d_min=4 A_dmin=14");
    }
}
