//! Timing harness: OTS-SKE key generation, compressed signing and
//! verification against an ECDSA P-256 baseline.
//!
//! Timed regions:
//!
//! * `otsske.keygen.*`: one session's key material. `v` is the blinding
//!   vector (`n` G2 exponentiations), `aux` is `g^r` in both groups, `sk` is
//!   the `n * t` subkeys. The total wraps all three.
//! * `otsske.sign`: `sign_compressed` on already-selected subkeys.
//! * `otsske.verify`: `check_compressed`, including the selection hash.
//! * `ecdsa.keygen`: a random signing key plus its verifying key.
//! * `ecdsa.sign`: deterministic (RFC 6979) signing of a 16-byte message,
//!   SHA-256 included. No encoding.
//! * `ecdsa.verify`: verification of that signature, SHA-256 included.

use std::fmt::Write as _;
use std::time::Instant;

use p256::ecdsa::signature::{RandomizedSigner, Signer, Verifier};
use p256::ecdsa::{Signature as EcdsaSignature, SigningKey, VerifyingKey};
use rand_chacha::ChaCha20Rng;
use rand_core::{CryptoRng, RngCore, SeedableRng};

use crate::backend::{pairing_count, reset_pairing_count};
use crate::error::{Error, Result};
use crate::scheme::{
    check_compressed, derive_subkeys, gen_aux, gen_blinding, keygen_setup, prp_select,
    sign_compressed, SchemeParams,
};

pub struct EcdsaKeypair {
    pub signing: SigningKey,
    pub verifying: VerifyingKey,
}

pub fn ecdsa_keygen<R: RngCore + CryptoRng>(rng: &mut R) -> EcdsaKeypair {
    let signing = SigningKey::random(rng);
    let verifying = *signing.verifying_key();
    EcdsaKeypair { signing, verifying }
}

/// Deterministic-nonce signature.
pub fn ecdsa_sign(sk: &SigningKey, msg: &[u8]) -> EcdsaSignature {
    sk.sign(msg)
}

pub fn ecdsa_sign_randomized<R: RngCore + CryptoRng>(
    sk: &SigningKey,
    msg: &[u8],
    rng: &mut R,
) -> EcdsaSignature {
    sk.sign_with_rng(rng, msg)
}

pub fn ecdsa_verify(pk: &VerifyingKey, msg: &[u8], sig: &EcdsaSignature) -> bool {
    pk.verify(msg, sig).is_ok()
}

/// Verification from wire bytes: SEC1 public key, 64-byte `r || s`.
pub fn ecdsa_verify_bytes(pk: &[u8], msg: &[u8], sig: &[u8]) -> Result<bool> {
    let pk = VerifyingKey::from_sec1_bytes(pk).map_err(|_| Error::encoding("bad ECDSA key"))?;
    let sig =
        EcdsaSignature::from_slice(sig).map_err(|_| Error::encoding("bad ECDSA signature"))?;
    Ok(ecdsa_verify(&pk, msg, &sig))
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub params: SchemeParams,
    pub reps: usize,
    pub warmup: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            params: SchemeParams::default_params(),
            reps: 100,
            warmup: 3,
            seed: 0,
        }
    }
}

/// Summary of one operation's samples, in milliseconds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    /// Sample standard deviation; `None` with a single sample.
    pub stddev: Option<f64>,
}

impl Stats {
    pub fn from_samples(samples: &[f64]) -> Stats {
        assert!(!samples.is_empty());
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mid = sorted.len() / 2;
        let median = if sorted.len().is_multiple_of(2) {
            (sorted[mid - 1] + sorted[mid]) / 2.0
        } else {
            sorted[mid]
        };
        let stddev = (samples.len() > 1).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            var.sqrt()
        });
        Stats {
            mean,
            median,
            stddev,
        }
    }

    fn stddev_text(&self) -> String {
        match self.stddev {
            Some(s) => format!("{s:.3}"),
            None => "n/a".to_string(),
        }
    }
}

/// Published figures for the same rows, milliseconds. Shown, never checked.
pub const REFERENCE_MS: [(&str, f64); 9] = [
    ("otsske.keygen_ms", 388.6),
    ("otsske.keygen.v_ms", 131.4),
    ("otsske.keygen.aux_ms", 4.0),
    ("otsske.keygen.sk_ms", 253.2),
    ("otsske.sign_ms", 3.4),
    ("otsske.verify_ms", 127.3),
    ("ecdsa.keygen_ms", 21.2),
    ("ecdsa.sign_ms", 23.1),
    ("ecdsa.verify_ms", 74.2),
];

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub keygen_total: Stats,
    pub keygen_v: Stats,
    pub keygen_aux: Stats,
    pub keygen_sk: Stats,
    pub sign: Stats,
    pub verify: Stats,
    pub ecdsa_keygen: Stats,
    pub ecdsa_sign: Stats,
    pub ecdsa_verify: Stats,
    pub subkeys_per_session: usize,
    pub sign_pairings: u64,
    pub verify_pairings: u64,
    /// Every ECDSA signature produced during the run verified.
    pub ecdsa_roundtrip: bool,
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

pub fn bench_run(config: &BenchConfig) -> Result<BenchReport> {
    if config.reps == 0 {
        return Err(Error::InvalidParams(
            "repetitions must be at least 1".into(),
        ));
    }
    let params = &config.params;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let (pk, master) = keygen_setup(params, &mut rng)?;

    let mut total = Vec::new();
    let mut v = Vec::new();
    let mut aux_t = Vec::new();
    let mut sk_t = Vec::new();
    let mut sign_t = Vec::new();
    let mut verify_t = Vec::new();
    let mut sign_pairings = 0;
    let mut verify_pairings = 0;
    let mut subkeys_per_session = 0;

    for rep in 0..config.warmup + config.reps {
        let timed = rep >= config.warmup;
        let session = rep as u64 % params.sessions();

        let start = Instant::now();
        let t0 = Instant::now();
        let blinding = gen_blinding(params, &pk.g, &mut rng)?;
        let v_ms = ms(t0);
        let t1 = Instant::now();
        let (r, aux) = gen_aux(&pk.g, &mut rng)?;
        let aux_ms = ms(t1);
        let t2 = Instant::now();
        let subkeys = derive_subkeys(&pk, &master, params, session, &r, &blinding)?;
        let sk_ms = ms(t2);
        let total_ms = ms(start);
        subkeys_per_session = subkeys.len();

        let mut msg = [0u8; 16];
        rng.fill_bytes(&mut msg);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        let selection = prp_select(params, &key, &msg);
        let selected: Vec<_> = selection.indices().iter().map(|&i| subkeys[i]).collect();

        reset_pairing_count();
        let t3 = Instant::now();
        let sig = sign_compressed(params, session, &selected, &selection, &aux)?;
        let sign_ms = ms(t3);
        let sp = pairing_count();

        reset_pairing_count();
        let t4 = Instant::now();
        let ok = check_compressed(&pk, params, session, &sig, &msg).is_ok();
        let verify_ms = ms(t4);
        let vp = pairing_count();
        if !ok {
            return Err(Error::InvalidParams(
                "benchmark signature failed to verify".into(),
            ));
        }

        if timed {
            total.push(total_ms);
            v.push(v_ms);
            aux_t.push(aux_ms);
            sk_t.push(sk_ms);
            sign_t.push(sign_ms);
            verify_t.push(verify_ms);
            sign_pairings = sp;
            verify_pairings = vp;
        }
    }

    let mut ek = Vec::new();
    let mut es = Vec::new();
    let mut ev = Vec::new();
    let mut roundtrip = true;
    for rep in 0..config.warmup + config.reps {
        let mut msg = [0u8; 16];
        rng.fill_bytes(&mut msg);
        let t0 = Instant::now();
        let keys = ecdsa_keygen(&mut rng);
        let k_ms = ms(t0);
        let t1 = Instant::now();
        let sig = ecdsa_sign(&keys.signing, &msg);
        let s_ms = ms(t1);
        let t2 = Instant::now();
        let ok = ecdsa_verify(&keys.verifying, &msg, &sig);
        let v_ms = ms(t2);
        msg[0] ^= 1;
        roundtrip &= ok && !ecdsa_verify(&keys.verifying, &msg, &sig);
        if rep >= config.warmup {
            ek.push(k_ms);
            es.push(s_ms);
            ev.push(v_ms);
        }
    }

    Ok(BenchReport {
        config: config.clone(),
        keygen_total: Stats::from_samples(&total),
        keygen_v: Stats::from_samples(&v),
        keygen_aux: Stats::from_samples(&aux_t),
        keygen_sk: Stats::from_samples(&sk_t),
        sign: Stats::from_samples(&sign_t),
        verify: Stats::from_samples(&verify_t),
        ecdsa_keygen: Stats::from_samples(&ek),
        ecdsa_sign: Stats::from_samples(&es),
        ecdsa_verify: Stats::from_samples(&ev),
        subkeys_per_session,
        sign_pairings,
        verify_pairings,
        ecdsa_roundtrip: roundtrip,
    })
}

impl BenchReport {
    fn rows(&self) -> [(&'static str, &Stats); 9] {
        [
            ("otsske.keygen_ms", &self.keygen_total),
            ("otsske.keygen.v_ms", &self.keygen_v),
            ("otsske.keygen.aux_ms", &self.keygen_aux),
            ("otsske.keygen.sk_ms", &self.keygen_sk),
            ("otsske.sign_ms", &self.sign),
            ("otsske.verify_ms", &self.verify),
            ("ecdsa.keygen_ms", &self.ecdsa_keygen),
            ("ecdsa.sign_ms", &self.ecdsa_sign),
            ("ecdsa.verify_ms", &self.ecdsa_verify),
        ]
    }

    /// Relative gap between the keygen total and the sum of its phases.
    pub fn phase_gap(&self) -> f64 {
        let sum = self.keygen_v.mean + self.keygen_aux.mean + self.keygen_sk.mean;
        (self.keygen_total.mean - sum).abs() / self.keygen_total.mean
    }

    /// `key=value` lines. Means under the plain keys; medians, deviations
    /// and the reference figures under suffixed or `ref.` keys.
    pub fn to_kv(&self) -> String {
        let p = &self.config.params;
        let mut out = String::new();
        let _ = writeln!(out, "params.t={}", p.radix());
        let _ = writeln!(out, "params.n={}", p.symbols());
        let _ = writeln!(out, "params.N={}", p.sessions());
        let _ = writeln!(out, "params.lambda={}", p.lambda());
        let _ = writeln!(out, "reps={}", self.config.reps);
        let _ = writeln!(out, "warmup={}", self.config.warmup);
        for (key, stats) in self.rows() {
            let stem = key.trim_end_matches("_ms");
            let _ = writeln!(out, "{key}={:.3}", stats.mean);
            let _ = writeln!(out, "{stem}.median_ms={:.3}", stats.median);
            let _ = writeln!(out, "{stem}.stddev_ms={}", stats.stddev_text());
        }
        let _ = writeln!(out, "counts.subkeys={}", self.subkeys_per_session);
        let _ = writeln!(out, "counts.sign_pairings={}", self.sign_pairings);
        let _ = writeln!(out, "counts.verify_pairings={}", self.verify_pairings);
        let _ = writeln!(out, "ecdsa.roundtrip={}", self.ecdsa_roundtrip);
        for (key, value) in REFERENCE_MS {
            let _ = writeln!(out, "ref.{key}={value}");
        }
        out
    }

    pub fn to_table(&self) -> String {
        let p = &self.config.params;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "t={} n={} N={} lambda={} reps={} warmup={}",
            p.radix(),
            p.symbols(),
            p.sessions(),
            p.lambda(),
            self.config.reps,
            self.config.warmup
        );
        let _ = writeln!(
            out,
            "{:<22} {:>10} {:>10} {:>10} {:>12}",
            "operation", "mean ms", "median ms", "stddev", "reference ms"
        );
        for ((key, stats), (_, reference)) in self.rows().into_iter().zip(REFERENCE_MS) {
            let _ = writeln!(
                out,
                "{:<22} {:>10.3} {:>10.3} {:>10} {:>12.1}",
                key.trim_end_matches("_ms"),
                stats.mean,
                stats.median,
                stats.stddev_text(),
                reference
            );
        }
        let _ = writeln!(
            out,
            "subkeys per session: {}; pairings: sign {}, verify {}; ecdsa round trip: {}",
            self.subkeys_per_session,
            self.sign_pairings,
            self.verify_pairings,
            if self.ecdsa_roundtrip { "ok" } else { "FAILED" }
        );
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ecdsa_round_trip() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let keys = ecdsa_keygen(&mut rng);
        let msg = b"sixteen byte msg";
        let sig = ecdsa_sign(&keys.signing, msg);
        assert!(ecdsa_verify(&keys.verifying, msg, &sig));
        let mut flipped = *msg;
        flipped[3] ^= 0x10;
        assert!(!ecdsa_verify(&keys.verifying, &flipped, &sig));
        assert_eq!(sig, ecdsa_sign(&keys.signing, msg));
        let r1 = ecdsa_sign_randomized(&keys.signing, msg, &mut rng);
        let r2 = ecdsa_sign_randomized(&keys.signing, msg, &mut rng);
        assert_ne!(r1, r2);
        assert!(ecdsa_verify(&keys.verifying, msg, &r1));

        let pk = keys.verifying.to_encoded_point(true);
        assert!(ecdsa_verify_bytes(pk.as_bytes(), msg, &sig.to_bytes()).unwrap());
        assert!(ecdsa_verify_bytes(&[0; 33], msg, &sig.to_bytes()).is_err());
        assert!(ecdsa_verify_bytes(pk.as_bytes(), msg, &[0; 64]).is_err());
        assert!(ecdsa_verify_bytes(pk.as_bytes(), msg, &[1; 63]).is_err());
    }

    #[test]
    fn stats() {
        let s = Stats::from_samples(&[1.0, 2.0, 3.0, 10.0]);
        assert_eq!(s.mean, 4.0);
        assert_eq!(s.median, 2.5);
        assert!((s.stddev.unwrap() - 4.0826).abs() < 1e-3);
        let one = Stats::from_samples(&[5.0]);
        assert_eq!((one.mean, one.median, one.stddev), (5.0, 5.0, None));
    }

    #[test]
    fn small_run() {
        let cfg = BenchConfig {
            params: SchemeParams::new(2, 4, 4, 256).unwrap(),
            reps: 1,
            warmup: 0,
            seed: 3,
        };
        let report = bench_run(&cfg).unwrap();
        assert_eq!(report.subkeys_per_session, 16);
        assert_eq!((report.sign_pairings, report.verify_pairings), (0, 3));
        assert!(report.ecdsa_roundtrip);
        let kv = report.to_kv();
        assert!(kv.contains("otsske.sign.stddev_ms=n/a\n"));
        assert!(report.to_table().contains("n/a"));
        assert!(bench_run(&BenchConfig { reps: 0, ..cfg }).is_err());
    }
}
