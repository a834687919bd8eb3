use std::fmt::Write as _;
use std::sync::mpsc::sync_channel;
use std::thread;

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::protocol::adversary::{
    adversary_forge_attempts, AdversaryLog, Attempt, ForgeryTarget, Outcome, Strategy,
};
use crate::protocol::coprocessor::{CoProcessor, SessionHandoff, DEFAULT_QUEUE_DEPTH};
use crate::protocol::enclave::{AttestationRequest, RaEnclave};
use crate::protocol::quote::Quote;
use crate::protocol::verifier::Verifier;
use crate::protocol::{measure, Measurement};
use crate::scheme::{KeyGenMode, PublicKey, SchemeParams, SessionKeyMaterial};

const RA_DESCRIPTOR: &[u8] = b"otsske demo enclave: RAEnc+AppEnc v1";
const APP_DESCRIPTOR: &[u8] = b"otsske demo application v1";

const STREAM_GENERATOR: u64 = 1;
const STREAM_USER: u64 = 2;
const STREAM_APP: u64 = 3;
const STREAM_GAME: u64 = 4;

fn stream(seed: u64, id: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

pub fn demo_measurement() -> Measurement {
    measure(RA_DESCRIPTOR)
}

pub fn app_measurement() -> Measurement {
    measure(APP_DESCRIPTOR)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Record {
    PublicKey(PublicKey),
    Request(AttestationRequest),
    Quote(Quote),
    Verdict(bool),
}

/// Line-oriented log of a demo run: `PK`, `REQ`, `QUOTE` and `VERDICT`
/// lines, payloads in lowercase hex.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub records: Vec<Record>,
}

impl Transcript {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for record in &self.records {
            let _ = match record {
                Record::PublicKey(pk) => writeln!(out, "PK {}", hex::encode(pk.to_bytes())),
                Record::Request(req) => writeln!(out, "REQ {}", hex::encode(req.encode())),
                Record::Quote(q) => writeln!(out, "QUOTE {}", hex::encode(q.encode())),
                Record::Verdict(v) => writeln!(out, "VERDICT {v}"),
            };
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (kind, payload) = line
                .split_once(' ')
                .ok_or_else(|| Error::encoding(format!("line {}: missing payload", n + 1)))?;
            let bytes = || {
                hex::decode(payload).map_err(|e| Error::encoding(format!("line {}: {e}", n + 1)))
            };
            records.push(match kind {
                "PK" => Record::PublicKey(PublicKey::from_bytes(&bytes()?)?),
                "REQ" => Record::Request(AttestationRequest::decode(&bytes()?)?),
                "QUOTE" => Record::Quote(Quote::decode(&bytes()?)?),
                "VERDICT" => match payload {
                    "true" => Record::Verdict(true),
                    "false" => Record::Verdict(false),
                    other => {
                        return Err(Error::encoding(format!(
                            "line {}: verdict {other:?}",
                            n + 1
                        )))
                    }
                },
                other => {
                    return Err(Error::encoding(format!(
                        "line {}: unknown record {other:?}",
                        n + 1
                    )))
                }
            });
        }
        Ok(Transcript { records })
    }
}

#[derive(Clone, Debug)]
pub struct DemoConfig {
    pub params: SchemeParams,
    pub seed: u64,
    pub sessions: u64,
    /// Run the co-processor on its own thread, feeding the enclave through a
    /// bounded channel.
    pub threaded: bool,
    pub mode: KeyGenMode,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            params: SchemeParams::default_params(),
            seed: 0,
            sessions: 3,
            threaded: false,
            mode: KeyGenMode::Production,
        }
    }
}

pub struct DemoRun {
    pub pk: PublicKey,
    pub transcript: Transcript,
    pub log: AdversaryLog,
    pub exchanges: Vec<(AttestationRequest, Quote)>,
    pub verdicts: Vec<bool>,
    /// Full session material, present only in test mode.
    pub retained: Vec<SessionKeyMaterial>,
}

/// Runs `sessions` honest attestation exchanges end to end. Output depends
/// only on the config, threaded or not.
pub fn run_demo(config: &DemoConfig) -> Result<DemoRun> {
    let params = &config.params;
    if config.sessions > params.sessions() {
        return Err(Error::SessionsExhausted(params.sessions()));
    }
    let mut gen_rng = stream(config.seed, STREAM_GENERATOR);
    let mut user_rng = stream(config.seed, STREAM_USER);
    let mut app_rng = stream(config.seed, STREAM_APP);

    let log = AdversaryLog::new();
    let (mut cp, pk) = CoProcessor::init(params.clone(), config.mode, log.clone(), &mut gen_rng)?;
    let enclave = RaEnclave::new(params.clone(), demo_measurement(), log.clone());
    let mut verifier = Verifier::new(pk.clone(), params.clone(), demo_measurement());

    let mut transcript = Transcript {
        records: vec![Record::PublicKey(pk.clone())],
    };
    let mut exchanges = Vec::new();
    let mut verdicts = Vec::new();

    let mut exchange = |source: &mut dyn crate::protocol::SessionSource, i: u64| -> Result<()> {
        let mut noise = [0u8; 16];
        app_rng.fill_bytes(&mut noise);
        let result = format!("result #{i}: {}", hex::encode(noise)).into_bytes();
        let request = verifier.user_request(&mut user_rng, app_measurement(), result)?;
        let quote = enclave.handle(source, &request)?;
        let verdict = verifier.user_verify(&quote, &request.nonce).is_ok();
        transcript.records.push(Record::Request(request.clone()));
        transcript.records.push(Record::Quote(quote.clone()));
        transcript.records.push(Record::Verdict(verdict));
        exchanges.push((request, quote));
        verdicts.push(verdict);
        Ok(())
    };

    let retained = if config.threaded {
        let (tx, mut rx) = sync_channel::<SessionHandoff>(DEFAULT_QUEUE_DEPTH);
        let sessions = config.sessions;
        let producer = thread::spawn(move || -> Result<CoProcessor> {
            for _ in 0..sessions {
                let handoff = cp.generate_handoff(&mut gen_rng)?;
                if tx.send(handoff).is_err() {
                    break;
                }
            }
            Ok(cp)
        });
        let mut consumed = Ok(());
        for i in 1..=config.sessions {
            consumed = exchange(&mut rx, i);
            if consumed.is_err() {
                break;
            }
        }
        drop(rx);
        let cp = producer
            .join()
            .map_err(|_| Error::InvalidParams("co-processor thread panicked".into()))??;
        consumed?;
        cp.retained_sessions().to_vec()
    } else {
        for i in 1..=config.sessions {
            cp.generate_next(&mut gen_rng)?;
            exchange(&mut cp, i)?;
        }
        cp.retained_sessions().to_vec()
    };

    Ok(DemoRun {
        pk,
        transcript,
        log,
        exchanges,
        verdicts,
        retained,
    })
}

#[derive(Clone, Debug)]
pub struct GameReport {
    pub sessions_used: u64,
    pub attempts: Vec<Attempt>,
}

impl GameReport {
    pub fn forgery_attempts(&self) -> usize {
        self.attempts
            .iter()
            .filter(|a| a.strategy.is_forgery() && a.outcome != Outcome::InsufficientMaterial)
            .count()
    }

    /// No new-message strategy verified, and honest re-submission did.
    pub fn passed(&self) -> bool {
        let same: Vec<_> = self
            .attempts
            .iter()
            .filter(|a| !a.strategy.is_forgery())
            .collect();
        !self.attempts.iter().any(Attempt::is_break)
            && !same.is_empty()
            && same.iter().all(|a| a.outcome == Outcome::Verified)
    }

    /// One line per (counter, strategy) with attempt tallies.
    pub fn lines(&self) -> Vec<String> {
        let mut lines = Vec::new();
        let mut ctrs: Vec<u64> = self.attempts.iter().map(|a| a.session).collect();
        ctrs.dedup();
        for ctr in ctrs {
            for strategy in Strategy::ALL {
                let group: Vec<_> = self
                    .attempts
                    .iter()
                    .filter(|a| a.session == ctr && a.strategy == strategy)
                    .collect();
                let verified = group
                    .iter()
                    .filter(|a| a.outcome == Outcome::Verified)
                    .count();
                let rejected = group
                    .iter()
                    .filter(|a| matches!(a.outcome, Outcome::Rejected(_)))
                    .count();
                let verdict = if verified > 0 && strategy.is_forgery() {
                    "VERIFIED (forgery)"
                } else if verified > 0 {
                    "verified (allowed)"
                } else if rejected > 0 {
                    "rejected"
                } else {
                    "insufficient material"
                };
                lines.push(format!(
                    "ctr={ctr} {:<14} {verdict} ({verified}/{} verified)",
                    strategy.to_string(),
                    verified + rejected
                ));
            }
        }
        lines
    }
}

/// Runs honest exchanges on every session, then for each counter asks the
/// adversary to get `messages` fresh results accepted.
pub fn run_game(params: &SchemeParams, seed: u64, messages: usize) -> Result<GameReport> {
    let run = run_demo(&DemoConfig {
        params: params.clone(),
        seed,
        sessions: params.sessions(),
        threaded: false,
        mode: KeyGenMode::Production,
    })?;
    let mut rng = stream(seed, STREAM_GAME);
    let mut verifier = Verifier::new(run.pk.clone(), params.clone(), demo_measurement());
    let mut attempts = Vec::new();
    for ctr in 1..=params.sessions() {
        for m in 0..messages {
            let target = ForgeryTarget {
                session: ctr,
                mr_raenc: demo_measurement(),
                mr_app: app_measurement(),
                result: format!("forged result {m} for #{ctr}").into_bytes(),
                nonce: verifier.issue_nonce(&mut rng)?,
            };
            attempts.extend(adversary_forge_attempts(&run.log, &run.pk, params, &target));
        }
    }
    Ok(GameReport {
        sessions_used: params.sessions(),
        attempts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SchemeParams {
        SchemeParams::new(3, 16, 2, 256).unwrap()
    }

    #[test]
    fn demo_verifies_and_is_deterministic() {
        let cfg = DemoConfig {
            params: small(),
            seed: 5,
            sessions: 3,
            threaded: false,
            mode: KeyGenMode::Production,
        };
        let a = run_demo(&cfg).unwrap();
        assert_eq!(a.verdicts, vec![true; 3]);
        let b = run_demo(&DemoConfig {
            threaded: true,
            ..cfg.clone()
        })
        .unwrap();
        assert_eq!(a.transcript, b.transcript);
        let c = run_demo(&DemoConfig { seed: 6, ..cfg }).unwrap();
        assert_ne!(a.transcript, c.transcript);
    }

    #[test]
    fn transcript_round_trip() {
        let run = run_demo(&DemoConfig {
            params: small(),
            sessions: 2,
            ..DemoConfig::default()
        })
        .unwrap();
        let text = run.transcript.to_text();
        assert_eq!(text.lines().count(), 1 + 3 * 2);
        assert_eq!(Transcript::parse(&text).unwrap(), run.transcript);
        assert!(Transcript::parse("VERDICT maybe").is_err());
        assert!(Transcript::parse("BOGUS 00").is_err());
        assert!(Transcript::parse("QUOTE zz").is_err());
    }

    #[test]
    fn too_many_sessions() {
        for threaded in [false, true] {
            let err = run_demo(&DemoConfig {
                params: small(),
                sessions: 4,
                threaded,
                ..DemoConfig::default()
            });
            assert!(matches!(err, Err(Error::SessionsExhausted(3))));
        }
    }

    #[test]
    fn game_passes() {
        let report = run_game(&small(), 1, 1).unwrap();
        assert!(report.passed(), "{:#?}", report.lines());
        // Per counter: 1 replay, 1 reaggregate, 2 cross, 2 * 2 mix, 1 same.
        assert_eq!(report.attempts.len(), 3 * 9);
        assert_eq!(report.forgery_attempts(), 3 * 8);
        let same: Vec<_> = report
            .attempts
            .iter()
            .filter(|a| a.strategy == Strategy::SameMessage)
            .collect();
        assert!(same.iter().all(|a| a.outcome == Outcome::Verified));
    }
}
