//! In-process simulation of the attestation protocol.
//!
//! Actors:
//!
//! * [`CoProcessor`]: holds the master secret, counts sessions and fills one
//!   [`ObliviousBuffer`] per session. It takes no input from the processor.
//! * [`ObliviousBuffer`]: read-once memory. A read selects one subkey per
//!   digit position from the caller's input and measurement and erases every
//!   other slot.
//! * [`RaEnclave`]: the combined attestation + application enclave. It turns
//!   a request into a [`Quote`] by reading the next session's buffer and
//!   emitting a compressed signature.
//! * [`Verifier`]: the remote user. Issues nonces and checks quotes.
//! * [`AdversaryLog`]: everything an all-digital-state observer sees, plus a
//!   catalogue of forgery attempts built from it.
//!
//! Quote counters run from 1 to N; counter `c` signs with scheme session
//! `c - 1`.

mod adversary;
mod coprocessor;
mod demo;
mod enclave;
mod memory;
mod quote;
mod verifier;

pub use adversary::{
    adversary_forge_attempts, AdversaryLog, Attempt, ForgeryTarget, Observation, Outcome, Strategy,
};
pub use coprocessor::{CoProcessor, SessionHandoff, SessionSource, DEFAULT_QUEUE_DEPTH};
pub use demo::{
    app_measurement, demo_measurement, run_demo, run_game, DemoConfig, DemoRun, GameReport, Record,
    Transcript,
};
pub use enclave::{AttestationRequest, RaEnclave};
pub use memory::{ObliviousBuffer, ServedKeys, Slot};
pub use quote::{Quote, QUOTE_VERSION};
pub use verifier::{check_quote, QuoteRejection, Verifier};

use crate::backend::{digest256, TAG_EOT, TAG_MR};
use crate::error::{Error, Result};
use crate::scheme::{IndexSelection, SchemeParams};

const TAG_MESSAGE: &str = "OTSSKE/MSG";
const TAG_INPUT: &str = "OTSSKE/X";

pub const NONCE_BYTES: usize = 16;

/// Digest identifying an enclave build.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Measurement(pub [u8; 32]);

impl Measurement {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

pub fn measure(descriptor: &[u8]) -> Measurement {
    Measurement(digest256(TAG_MR, &[descriptor]))
}

/// Verifier-chosen freshness value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Nonce(pub [u8; NONCE_BYTES]);

/// `M = Hash(MR_RAEnc, MR_app, R)`.
pub fn message_digest(mr_raenc: &Measurement, mr_app: &Measurement, result: &[u8]) -> [u8; 32] {
    digest256(
        TAG_MESSAGE,
        &[mr_raenc.as_bytes(), mr_app.as_bytes(), result],
    )
}

/// `x = Hash(nonce, M)`, the enclave's input to the oblivious memory.
pub fn memory_input(nonce: &Nonce, message: &[u8; 32]) -> [u8; 32] {
    digest256(TAG_INPUT, &[&nonce.0, message])
}

/// `I = phi(Hash(x, MR_caller))`. The selection key is `x`.
pub fn eot_select(params: &SchemeParams, x: &[u8; 32], caller: &Measurement) -> IndexSelection {
    IndexSelection::derive(params, TAG_EOT, &[x, caller.as_bytes()], x.to_vec())
}

/// Maps a quote counter to its scheme session index.
pub fn scheme_session(params: &SchemeParams, ctr: u64) -> Result<u64> {
    if ctr == 0 || ctr > params.sessions() {
        return Err(Error::SessionOutOfRange {
            session: ctr,
            sessions: params.sessions(),
        });
    }
    Ok(ctr - 1)
}
