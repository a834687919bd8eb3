//! `otsske` command-line tool.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error or bad input.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::ChaCha20Rng;
use rand_core::{OsRng, RngCore, SeedableRng};

use otsske::bench::{bench_run, BenchConfig};
use otsske::protocol::{run_demo, run_game, DemoConfig};
use otsske::scheme::{
    gen_session, keygen_setup, prp_select, sign_compressed, sign_full, verify, KeyGenMode,
    PublicKey, SchemeParams, SessionKeyMaterial, Signature,
};

const PARAMS_FILE: &str = "params.bin";
const PK_FILE: &str = "pk.bin";

#[derive(Parser)]
#[command(
    name = "otsske",
    version,
    about = "One-time signatures with secret key exposure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ParamArgs {
    /// Radix of the message digits.
    #[arg(long, default_value_t = 4)]
    t: u32,
    /// Number of digits, i.e. subkey blocks per session.
    #[arg(long, default_value_t = 32)]
    n: u32,
    /// Number of sessions.
    #[arg(long = "N", default_value_t = 8)]
    session_count: u64,
    /// Security level in bits (128 or 256).
    #[arg(long, default_value_t = 256)]
    lambda: u32,
}

impl ParamArgs {
    fn build(&self) -> Result<SchemeParams, Failure> {
        SchemeParams::new(self.session_count, self.n, self.t, self.lambda).map_err(usage)
    }
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Variant {
    Full,
    Compressed,
}

#[derive(Subcommand)]
enum Command {
    /// Validate parameters and write them to a file.
    Setup {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "out")]
        out: PathBuf,
    },
    /// Generate a public key and all session keys into a directory.
    Keygen {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long = "out")]
        out: PathBuf,
    },
    /// Sign a file with one session key. The session file is deleted.
    Sign {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        session: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long = "out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Variant::Compressed)]
        variant: Variant,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Verify a signature on a file.
    Verify {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        session: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        sig: PathBuf,
    },
    /// Run the attestation protocol in-process and write its transcript.
    Demo {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 3)]
        sessions: u64,
        /// Run the key generator on a separate thread.
        #[arg(long)]
        threaded: bool,
        #[arg(long = "out")]
        out: Option<PathBuf>,
    },
    /// Run every session honestly, then try to forge from the observed state.
    Game {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<u64>,
        /// Fresh target messages per session.
        #[arg(long, default_value_t = 1)]
        messages: usize,
    },
    /// Time key generation, signing and verification against ECDSA.
    Bench {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long, default_value_t = 3)]
        warmup: usize,
        #[arg(long = "out")]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Rejected(String),
    Usage(String),
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    match seed {
        Some(s) => s,
        None if std::env::var("OTSSKE_DETERMINISTIC").is_ok_and(|v| v == "1") => 0,
        None => OsRng.next_u64(),
    }
}

fn session_file(dir: &Path, session: u64) -> PathBuf {
    dir.join(format!("session-{session}.bin"))
}

fn load_public(dir: &Path) -> Result<(SchemeParams, PublicKey), Failure> {
    let params = SchemeParams::from_bytes(&read(&dir.join(PARAMS_FILE))?).map_err(usage)?;
    let pk = PublicKey::from_bytes(&read(&dir.join(PK_FILE))?).map_err(usage)?;
    pk.validate(&params).map_err(usage)?;
    Ok((params, pk))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Setup { params, out } => {
            let params = params.build()?;
            write(&out, &params.to_bytes())?;
            println!(
                "t={} n={} N={} lambda={} subkeys/session={}",
                params.radix(),
                params.symbols(),
                params.sessions(),
                params.lambda(),
                params.subkeys_per_session()
            );
        }
        Command::Keygen { params, seed, out } => {
            let params = params.build()?;
            let mut rng = ChaCha20Rng::seed_from_u64(resolve_seed(seed));
            fs::create_dir_all(&out)
                .map_err(|e| Failure::Usage(format!("{}: {e}", out.display())))?;
            let (pk, master) = keygen_setup(&params, &mut rng).map_err(usage)?;
            write(&out.join(PARAMS_FILE), &params.to_bytes())?;
            write(&out.join(PK_FILE), &pk.to_bytes())?;
            for i in 0..params.sessions() {
                let material =
                    gen_session(&pk, &master, &params, i, KeyGenMode::Production, &mut rng)
                        .map_err(usage)?;
                write(&session_file(&out, i), &material.to_bytes())?;
            }
            println!("wrote {} sessions to {}", params.sessions(), out.display());
        }
        Command::Sign {
            keys,
            session,
            input,
            out,
            variant,
            seed,
        } => {
            let (params, pk) = load_public(&keys)?;
            params.check_session(session).map_err(usage)?;
            let path = session_file(&keys, session);
            let material = SessionKeyMaterial::from_bytes(&params, &read(&path)?).map_err(usage)?;
            if material.session() != session {
                return Err(usage(format!(
                    "{} holds session {}",
                    path.display(),
                    material.session()
                )));
            }
            let msg = read(&input)?;
            let mut rng = ChaCha20Rng::seed_from_u64(resolve_seed(seed));
            let mut key = [0u8; 32];
            rng.fill_bytes(&mut key);
            let selection = prp_select(&params, &key, &msg);
            let subkeys = material.select(&selection);
            let sig = match variant {
                Variant::Full => sign_full(
                    &pk,
                    &params,
                    session,
                    &subkeys,
                    &selection,
                    material.aux(),
                    &msg,
                    &mut rng,
                ),
                Variant::Compressed => {
                    sign_compressed(&params, session, &subkeys, &selection, material.aux())
                }
            }
            .map_err(usage)?;
            write(&out, &sig.to_bytes())?;
            // One message per session: the key material goes away.
            fs::remove_file(&path)
                .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        }
        Command::Verify {
            keys,
            session,
            input,
            sig,
        } => {
            let (params, pk) = load_public(&keys)?;
            params.check_session(session).map_err(usage)?;
            let sig = Signature::from_bytes(&read(&sig)?).map_err(usage)?;
            let msg = read(&input)?;
            match verify(&pk, &params, session, &sig, &msg) {
                Ok(()) => println!("valid"),
                Err(e) => return Err(Failure::Rejected(e.to_string())),
            }
        }
        Command::Demo {
            params,
            seed,
            sessions,
            threaded,
            out,
        } => {
            let params = params.build()?;
            let config = DemoConfig {
                params,
                seed: resolve_seed(seed),
                sessions,
                threaded,
                mode: KeyGenMode::Production,
            };
            let run = run_demo(&config).map_err(usage)?;
            let text = run.transcript.to_text();
            match out {
                Some(path) => write(&path, text.as_bytes())?,
                None => print!("{text}"),
            }
            if run.verdicts.iter().any(|v| !v) {
                return Err(Failure::Rejected("a quote failed verification".into()));
            }
        }
        Command::Game {
            params,
            seed,
            messages,
        } => {
            let params = params.build()?;
            let report = run_game(&params, resolve_seed(seed), messages).map_err(usage)?;
            for line in report.lines() {
                println!("{line}");
            }
            println!(
                "{} forgery attempts over {} sessions",
                report.forgery_attempts(),
                report.sessions_used
            );
            if !report.passed() {
                return Err(Failure::Rejected("game failed".into()));
            }
        }
        Command::Bench {
            params,
            seed,
            reps,
            warmup,
            out,
        } => {
            let params = params.build()?;
            if reps == 0 {
                return Err(usage("--reps must be at least 1"));
            }
            let report = bench_run(&BenchConfig {
                params,
                reps,
                warmup,
                seed: resolve_seed(seed),
            })
            .map_err(usage)?;
            print!("{}", report.to_table());
            if let Some(path) = out {
                write(&path, report.to_kv().as_bytes())?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected(msg)) => {
            eprintln!("rejected: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
