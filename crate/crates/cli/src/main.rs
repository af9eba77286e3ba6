use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use cyclotile::{cyclo, reduce, search};
use cyclotile_cli::{CliError, InstanceFile, FORMAT_VERSION};

fn version() -> &'static str {
    static V: std::sync::OnceLock<String> = std::sync::OnceLock::new();
    V.get_or_init(|| format!("{} (library {}, format {FORMAT_VERSION})", env!("CARGO_PKG_VERSION"), cyclotile::VERSION))
}

#[derive(Parser)]
#[command(name = "cyclotile", version = version(), about = "Tilings of cyclic groups: verification, spectra, structure, search")]
struct Cli {
    /// Worker threads for commands that parallelize (0 = all cores).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    A,
    B,
}

#[derive(Subcommand)]
enum Command {
    /// Run the three tiling verifiers.
    Verify { file: PathBuf },
    /// Divisors s of m with Φ_s dividing the set; prime powers are starred.
    Spectrum {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "a")]
        set: Side,
    },
    /// Check (T1).
    T1 {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "a")]
        set: Side,
    },
    /// Check (T2).
    T2 {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "a")]
        set: Side,
    },
    /// Write the standard complement of `b` as `a`.
    Standardize {
        file: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Classify a tiling of Z_M, M = (p_i p_j p_k)^2; prints a JSON report.
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = reduce::DEFAULT_BUDGET)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Shift the M-fiber of `a` through `root` in the direction of prime `dir` to `to`.
    Shift {
        file: PathBuf,
        #[arg(long)]
        dir: u64,
        #[arg(long)]
        root: usize,
        #[arg(long)]
        to: usize,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// List complements of `a` containing 0, one instance per line.
    Search {
        file: PathBuf,
        #[arg(long, required = true)]
        complement: bool,
    },
    /// List normalized tilings of Z_m with |A| = size, one instance per line.
    Enumerate {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        size: usize,
        #[arg(long)]
        complement_cap: Option<usize>,
        #[arg(long, default_value_t = search::DEFAULT_CAP)]
        cap: usize,
    },
}

fn read_file(path: &Path) -> Result<InstanceFile, CliError> {
    let mut text = String::new();
    let res = if path == Path::new("-") {
        io::stdin().read_to_string(&mut text).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| text = t)
    };
    res.map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    InstanceFile::parse(&text)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|source| CliError::Io { path: p.clone(), source }),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn verdict(b: bool) -> ExitCode {
    if b {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn pick(file: &InstanceFile, side: Side) -> Result<cyclotile::Multiset, CliError> {
    match side {
        Side::A => file.set_a(),
        Side::B => file.set_b(),
    }
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    budget: usize,
    seed: u64,
    #[serde(flatten)]
    report: &'a reduce::ClassificationReport,
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    let mut out = io::stdout().lock();
    match cli.command {
        Command::Verify { file } => {
            let inst = read_file(&file)?.instance()?;
            let direct = inst.verify_direct();
            let poly = inst.verify_poly()?;
            let sands = match inst.verify_sands() {
                Ok(v) => v,
                Err(cyclotile::Error::CardinalityMismatch { .. }) => false,
                Err(e) => return Err(e.into()),
            };
            writeln!(out, "direct: {}\npoly: {}\nsands: {}", yes(direct), yes(poly), yes(sands))?;
            if direct != poly || direct != sands {
                writeln!(out, "agree: no")?;
                return Err(cyclotile::Error::Invariant("verifiers disagree".into()).into());
            }
            writeln!(out, "agree: yes\ntiling: {}", yes(direct))?;
            Ok(verdict(direct))
        }
        Command::Spectrum { file, set } => {
            let f = read_file(&file)?;
            let modulus = f.modulus()?;
            let spec = cyclo::spectrum(&modulus, &pick(&f, set)?)?;
            let marked: Vec<String> = spec
                .divisors
                .iter()
                .map(|s| if spec.prime_powers.contains(s) { format!("{s}*") } else { s.to_string() })
                .collect();
            writeln!(out, "divisors: {}", marked.join(" "))?;
            let sa: Vec<String> = spec.prime_powers.iter().map(|s| s.to_string()).collect();
            writeln!(out, "S: {}", sa.join(" "))?;
            Ok(ExitCode::SUCCESS)
        }
        Command::T1 { file, set } => {
            let f = read_file(&file)?;
            let ok = cyclo::t1_check(&f.modulus()?, &pick(&f, set)?)?;
            writeln!(out, "t1: {}", yes(ok))?;
            Ok(verdict(ok))
        }
        Command::T2 { file, set } => {
            let f = read_file(&file)?;
            match cyclo::t2_violation(&f.modulus()?, &pick(&f, set)?)? {
                None => {
                    writeln!(out, "t2: yes")?;
                    Ok(ExitCode::SUCCESS)
                }
                Some(s) => {
                    writeln!(out, "t2: no (Phi_{s} does not divide the set)")?;
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Standardize { file, out: dest } => {
            let f = read_file(&file)?;
            let modulus = f.modulus()?;
            let flat = cyclo::standard_complement_of(&modulus, &f.set_b()?)?;
            let mut g = InstanceFile::new(f.m, flat.support(), f.b.clone());
            g.primes = f.primes.clone();
            emit(&dest, &g.to_canonical())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Classify { file, budget, seed } => {
            let inst = read_file(&file)?.instance()?;
            let report = reduce::classify(&inst, budget)?;
            let text = serde_json::to_string(&ClassifyOutput { budget, seed, report: &report })?;
            writeln!(out, "{text}")?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Shift { file, dir, root, to, out: dest } => {
            let f = read_file(&file)?;
            let inst = f.instance()?;
            let direction = inst
                .modulus()
                .direction_of(dir)
                .ok_or_else(|| CliError::Invalid(format!("{dir} is not a prime factor of m")))?;
            let vt = inst.into_verified()?;
            let moved = reduce::fiber_shift(&vt, &reduce::ShiftMove { direction, root, target: to })?;
            let mut g = InstanceFile::from_instance(moved.instance());
            g.primes = f.primes.clone();
            emit(&dest, &g.to_canonical())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Search { file, .. } => {
            let f = read_file(&file)?;
            let found = search::find_complements(f.m as usize, &f.a)?;
            for b in &found {
                out.write_all(InstanceFile::new(f.m, f.a.clone(), Some(b.clone())).to_canonical().as_bytes())?;
            }
            Ok(verdict(!found.is_empty()))
        }
        Command::Enumerate { m, size, complement_cap, cap } => {
            let task = search::EnumerationTask { m, size, cap, complement_cap };
            let small = search::small_tiles(&task)?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cli.threads)
                .build()
                .map_err(|e| CliError::Invalid(e.to_string()))?;
            let mut pairs: Vec<search::TilingPair> =
                pool.install(|| small.par_iter().flat_map_iter(|s| search::pairs_for(&task, s)).collect());
            pairs.sort();
            pairs.dedup();
            for p in pairs {
                out.write_all(InstanceFile::new(m as u64, p.a, Some(p.b)).to_canonical().as_bytes())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(CliError::Write(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(2)
        }
    }
}
