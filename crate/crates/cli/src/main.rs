//! `pac`: encode, enumerate spectra, verify the cyclic-shift identities and
//! run Fano FER campaigns from the command line.
//!
//! Exit status is 0 on success, 1 when a verification finds a violation and
//! 2 for configuration or input errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pac_core::fano::AnvDenominator;
use pac_core::polar::{bhattacharyya_profile, rm_profile};
use pac_core::sim::{
    fer_csv, run_fer, run_spectrum, run_verify, Check, CodeSpec, ProfileSource, SampleMode,
    SimConfig, SpectrumConfig, VerifyConfig, DEFAULT_DESIGN_ERASURE,
};
use pac_core::weights::DEFAULT_GUARD_K;
use pac_core::{BitVec, Error, LlrDomain, PolarDim};

#[derive(Parser)]
#[command(name = "pac", version, about = "PAC code toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode one data word and print the codeword bits.
    Encode {
        #[command(flatten)]
        code: CodeArgs,
        /// Data bits d_1..d_K, e.g. 101.
        #[arg(long)]
        data: String,
    },
    /// Exact weight spectrum as CSV; d_min summary on stderr.
    Spectrum {
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long, default_value_t = DEFAULT_GUARD_K)]
        guard_k: usize,
        /// Independent enumeration chunks (rounded down to a power of two).
        #[arg(long, default_value_t = 64)]
        chunks: usize,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Machine-check the shift identities, the odd-shift weight bound and
    /// encoder equivalence.
    Verify {
        #[arg(long, value_enum, default_value_t = CheckArg::All)]
        check: CheckArg,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `--n` is required; the remaining code flags optionally pick the
        /// code for the equivalence check (default: a sweep of RM profiles).
        #[command(flatten)]
        code: CodeArgs,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Monte Carlo FER/ANV over BPSK-AWGN with Fano decoding.
    Simulate(SimulateArgs),
    /// Write a rate-profile file.
    ProfileGen {
        #[arg(long)]
        n: u32,
        #[arg(long, value_enum, default_value_t = ProfileKind::Rm)]
        profile: ProfileKind,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = DEFAULT_DESIGN_ERASURE)]
        design_erasure: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CodeArgs {
    /// log2 of the block length.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum)]
    profile: Option<ProfileKind>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, conflicts_with = "profile")]
    profile_file: Option<PathBuf>,
    #[arg(long)]
    design_erasure: Option<f64>,
    /// Connection polynomial in octal; 1 means no convolution.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON config; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    code: CodeArgs,
    /// Eb/N0 points in dB, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    ebn0: Option<Vec<f64>>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    bias: Option<f64>,
    #[arg(long)]
    max_visits: Option<u64>,
    #[arg(long, value_enum)]
    llr: Option<LlrArg>,
    #[arg(long, value_enum)]
    anv_denominator: Option<AnvArg>,
    #[arg(long)]
    min_errors: Option<u64>,
    #[arg(long)]
    max_trials: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    /// Record elapsed time in wall_seconds (output is then not byte-stable).
    #[arg(long)]
    timing: bool,
    /// Transmit without noise (test hook).
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProfileKind {
    Rm,
    Bhattacharyya,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Theorem,
    Prop1,
    Equiv,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Randomized,
}

#[derive(Clone, Copy, ValueEnum)]
enum LlrArg {
    Exact,
    Minsum,
}

#[derive(Clone, Copy, ValueEnum)]
enum AnvArg {
    #[value(name = "N")]
    N,
    #[value(name = "K")]
    K,
}

impl CodeArgs {
    /// True when nothing beyond `--n` was given.
    fn only_length(&self) -> bool {
        self.profile.is_none()
            && self.k.is_none()
            && self.profile_file.is_none()
            && self.design_erasure.is_none()
            && self.poly.is_none()
    }

    /// Merges these flags over `base`.
    fn resolve(&self, base: Option<CodeSpec>) -> Result<CodeSpec, Error> {
        let missing = |what: &str| Error::Config(format!("missing --{what}"));
        let n = self
            .n
            .or(base.as_ref().map(|b| b.n))
            .ok_or_else(|| missing("n"))?;
        let poly = self
            .poly
            .clone()
            .or(base.as_ref().map(|b| b.poly.clone()))
            .unwrap_or_else(|| "1".into());
        let base_profile = base.map(|b| b.profile);
        let base_k = match &base_profile {
            Some(ProfileSource::Rm { k }) | Some(ProfileSource::Bhattacharyya { k, .. }) => {
                Some(*k)
            }
            _ => None,
        };
        let profile = if let Some(path) = &self.profile_file {
            ProfileSource::File { path: path.clone() }
        } else {
            let kind = match (self.profile, &base_profile) {
                (Some(kind), _) => Some(kind),
                (None, Some(ProfileSource::Rm { .. })) => Some(ProfileKind::Rm),
                (None, Some(ProfileSource::Bhattacharyya { .. })) => {
                    Some(ProfileKind::Bhattacharyya)
                }
                (None, Some(ProfileSource::File { .. })) => None,
                (None, None) => Some(ProfileKind::Rm),
            };
            match kind {
                None => base_profile.clone().expect("file profile from base"),
                Some(ProfileKind::Rm) => ProfileSource::Rm {
                    k: self.k.or(base_k).ok_or_else(|| missing("k"))?,
                },
                Some(ProfileKind::Bhattacharyya) => {
                    let base_z = match &base_profile {
                        Some(ProfileSource::Bhattacharyya { design_erasure, .. }) => {
                            Some(*design_erasure)
                        }
                        _ => None,
                    };
                    ProfileSource::Bhattacharyya {
                        k: self.k.or(base_k).ok_or_else(|| missing("k"))?,
                        design_erasure: self
                            .design_erasure
                            .or(base_z)
                            .unwrap_or(DEFAULT_DESIGN_ERASURE),
                    }
                }
            }
        };
        Ok(CodeSpec { n, profile, poly })
    }
}

/// Failure classes mapped onto exit codes.
enum Failure {
    Verification,
    Config(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Config(e)
    }
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn simulate(args: &SimulateArgs) -> Result<(), Failure> {
    let base = args.config.as_ref().map(SimConfig::load).transpose()?;
    let mut cfg = match base {
        Some(cfg) => {
            let code = args.code.resolve(Some(cfg.code.clone()))?;
            SimConfig { code, ..cfg }
        }
        None => {
            let ebn0 = args
                .ebn0
                .clone()
                .ok_or_else(|| Error::Config("missing --ebn0 (or --config)".into()))?;
            SimConfig {
                code: args.code.resolve(None)?,
                channel: pac_core::sim::ChannelSpec {
                    ebn0_db: ebn0,
                    master_seed: 0,
                    noiseless: false,
                },
                decoder: Default::default(),
                stopping: Default::default(),
                timing: false,
                workers: None,
            }
        }
    };
    if let Some(ebn0) = &args.ebn0 {
        cfg.channel.ebn0_db = ebn0.clone();
    }
    if let Some(seed) = args.seed {
        cfg.channel.master_seed = seed;
    }
    cfg.channel.noiseless |= args.noiseless;
    if let Some(delta) = args.delta {
        cfg.decoder.delta = delta;
    }
    if args.bias.is_some() {
        cfg.decoder.bias = args.bias;
    }
    if args.max_visits.is_some() {
        cfg.decoder.max_visits = args.max_visits;
    }
    if let Some(llr) = args.llr {
        cfg.decoder.llr = match llr {
            LlrArg::Exact => LlrDomain::Exact,
            LlrArg::Minsum => LlrDomain::MinSum,
        };
    }
    if let Some(anv) = args.anv_denominator {
        cfg.decoder.anv_denominator = match anv {
            AnvArg::N => AnvDenominator::CodeLength,
            AnvArg::K => AnvDenominator::DataLength,
        };
    }
    if let Some(v) = args.min_errors {
        cfg.stopping.min_errors = v;
    }
    if let Some(v) = args.max_trials {
        cfg.stopping.max_trials = v;
    }
    if args.workers.is_some() {
        cfg.workers = args.workers;
    }
    cfg.timing |= args.timing;

    let rows = run_fer(&cfg)?;
    emit(&fer_csv(&cfg, &rows)?, args.out.as_ref())?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Encode { code, data } => {
            let code = code.resolve(None)?.build()?;
            let d: BitVec = data.parse()?;
            println!("{}", code.encode(&d)?);
        }
        Command::Spectrum {
            code,
            guard_k,
            chunks,
            workers,
            out,
        } => {
            let cfg = SpectrumConfig {
                code: code.resolve(None)?,
                guard_k,
                chunks,
                workers,
            };
            let run = run_spectrum(&cfg)?;
            emit(&run.csv, out.as_ref())?;
            eprintln!("{}", run.summary);
        }
        Command::Verify {
            check,
            mode,
            samples,
            seed,
            code,
            workers,
        } => {
            let n = code.n.ok_or_else(|| Error::Config("missing --n".into()))?;
            let code = if code.only_length() {
                None
            } else {
                Some(code.resolve(None)?)
            };
            let cfg = VerifyConfig {
                n,
                check: match check {
                    CheckArg::Theorem => Check::Theorem,
                    CheckArg::Prop1 => Check::Prop1,
                    CheckArg::Equiv => Check::Equiv,
                    CheckArg::All => Check::All,
                },
                mode: mode.map(|m| match m {
                    ModeArg::Exhaustive => SampleMode::Exhaustive,
                    ModeArg::Randomized => SampleMode::Randomized,
                }),
                samples,
                seed,
                code,
                workers,
            };
            let outcome = run_verify(&cfg)?;
            print!("{}", outcome.report);
            if !outcome.passed {
                return Err(Failure::Verification);
            }
        }
        Command::Simulate(args) => simulate(&args)?,
        Command::ProfileGen {
            n,
            profile,
            k,
            design_erasure,
            out,
        } => {
            let dim = PolarDim::new(n)?;
            let p = match profile {
                ProfileKind::Rm => rm_profile(dim, k)?,
                ProfileKind::Bhattacharyya => bhattacharyya_profile(dim, k, design_erasure)?,
            };
            emit(&p.to_file_string(), out.as_ref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
