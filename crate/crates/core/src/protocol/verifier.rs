use std::collections::hash_map::Entry;
use std::collections::HashMap;

use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::error::Result;
use crate::protocol::enclave::AttestationRequest;
use crate::protocol::quote::Quote;
use crate::protocol::{
    eot_select, memory_input, message_digest, scheme_session, Measurement, Nonce, NONCE_BYTES,
};
use crate::scheme::{check_compressed_selected, PublicKey, Rejection, SchemeParams};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum QuoteRejection {
    #[error("nonce was never issued")]
    UnknownNonce,
    #[error("nonce was already used")]
    NonceAlreadyUsed,
    #[error("attestation enclave measurement mismatch")]
    MeasurementMismatch,
    #[error("application measurement mismatch")]
    AppMismatch,
    #[error("counter {0} out of range")]
    SessionOutOfRange(u64),
    #[error("signature rejected: {0}")]
    Signature(#[from] Rejection),
}

/// Stateless quote check: rebuilds `M`, `x` and the selection, then runs the
/// compressed verification equation for session `ctr - 1`.
pub fn check_quote(
    pk: &PublicKey,
    params: &SchemeParams,
    expected: Option<&Measurement>,
    quote: &Quote,
    nonce: &Nonce,
) -> std::result::Result<(), QuoteRejection> {
    if expected.is_some_and(|m| *m != quote.mr_raenc) {
        return Err(QuoteRejection::MeasurementMismatch);
    }
    let session = scheme_session(params, quote.ctr)
        .map_err(|_| QuoteRejection::SessionOutOfRange(quote.ctr))?;
    let message = message_digest(&quote.mr_raenc, &quote.mr_app, &quote.result);
    let x = memory_input(nonce, &message);
    let selection = eot_select(params, &x, &quote.mr_raenc);
    check_compressed_selected(pk, params, session, &quote.y, &quote.z, &selection)?;
    Ok(())
}

#[derive(Clone, Copy, Debug)]
struct Pending {
    mr_app: Option<Measurement>,
    used: bool,
}

/// Remote user. Accepts each issued nonce at most once.
pub struct Verifier {
    pk: PublicKey,
    params: SchemeParams,
    expected: Measurement,
    nonces: HashMap<Nonce, Pending>,
}

impl Verifier {
    pub fn new(pk: PublicKey, params: SchemeParams, expected: Measurement) -> Self {
        Verifier {
            pk,
            params,
            expected,
            nonces: HashMap::new(),
        }
    }

    pub fn issue_nonce<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Result<Nonce> {
        self.issue(rng, None)
    }

    fn issue<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
        mr_app: Option<Measurement>,
    ) -> Result<Nonce> {
        loop {
            let mut bytes = [0u8; NONCE_BYTES];
            rng.try_fill_bytes(&mut bytes)
                .map_err(|e| crate::Error::Rng(e.to_string()))?;
            let nonce = Nonce(bytes);
            if let Entry::Vacant(slot) = self.nonces.entry(nonce) {
                slot.insert(Pending {
                    mr_app,
                    used: false,
                });
                return Ok(nonce);
            }
        }
    }

    /// Builds the request the application forwards to the attestation
    /// enclave, with a fresh nonce bound to `mr_app`.
    pub fn user_request<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
        mr_app: Measurement,
        result: Vec<u8>,
    ) -> Result<AttestationRequest> {
        let nonce = self.issue(rng, Some(mr_app))?;
        Ok(AttestationRequest {
            nonce,
            mr_app,
            result,
        })
    }

    pub fn user_verify(
        &mut self,
        quote: &Quote,
        nonce: &Nonce,
    ) -> std::result::Result<(), QuoteRejection> {
        let pending = *self.nonces.get(nonce).ok_or(QuoteRejection::UnknownNonce)?;
        if pending.used {
            return Err(QuoteRejection::NonceAlreadyUsed);
        }
        if pending.mr_app.is_some_and(|m| m != quote.mr_app) {
            return Err(QuoteRejection::AppMismatch);
        }
        check_quote(&self.pk, &self.params, Some(&self.expected), quote, nonce)?;
        if let Some(p) = self.nonces.get_mut(nonce) {
            p.used = true;
        }
        Ok(())
    }
}
