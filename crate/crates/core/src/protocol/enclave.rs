use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::protocol::adversary::{AdversaryLog, Observation};
use crate::protocol::coprocessor::SessionSource;
use crate::protocol::quote::Quote;
use crate::protocol::{
    memory_input, message_digest, scheme_session, Measurement, Nonce, NONCE_BYTES,
};
use crate::scheme::{sign_compressed, SchemeParams, Signature};

/// What reaches the attestation enclave: the user's nonce plus the
/// application's measurement and result.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AttestationRequest {
    pub nonce: Nonce,
    pub mr_app: Measurement,
    pub result: Vec<u8>,
}

impl AttestationRequest {
    /// `[16B nonce][32B MR_app][u64 len][R]`.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(NONCE_BYTES + 32 + 8 + self.result.len());
        out.extend_from_slice(&self.nonce.0);
        out.extend_from_slice(self.mr_app.as_bytes());
        let mut w = Writer::new();
        w.field(&self.result);
        out.extend_from_slice(&w.finish());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let nonce = Nonce(r.array()?);
        let mr_app = Measurement(r.array()?);
        let result = r.field()?.to_vec();
        r.finish()?;
        Ok(AttestationRequest {
            nonce,
            mr_app,
            result,
        })
    }
}

/// Attestation enclave. Holds no long-term secret; everything it signs with
/// comes out of the session buffer.
pub struct RaEnclave {
    params: SchemeParams,
    measurement: Measurement,
    log: AdversaryLog,
}

impl RaEnclave {
    pub fn new(params: SchemeParams, measurement: Measurement, log: AdversaryLog) -> Self {
        RaEnclave {
            params,
            measurement,
            log,
        }
    }

    pub fn measurement(&self) -> &Measurement {
        &self.measurement
    }

    /// Signs the request with the next available session.
    pub fn handle<S: SessionSource + ?Sized>(
        &self,
        source: &mut S,
        request: &AttestationRequest,
    ) -> Result<Quote> {
        self.log.record(Observation::Request(request.clone()));
        let message = message_digest(&self.measurement, &request.mr_app, &request.result);
        let x = memory_input(&request.nonce, &message);
        let mut handoff = source.next_session().ok_or(Error::NoSession)?;
        let session = scheme_session(&self.params, handoff.ctr)?;
        let served = handoff
            .buffer
            .read(&self.params, &x, &self.measurement, &self.log)?;
        let sig = sign_compressed(
            &self.params,
            session,
            &served.subkeys,
            &served.selection,
            &handoff.aux,
        )?;
        let Signature::Compressed { y, z, .. } = sig else {
            unreachable!("sign_compressed returns the compressed variant")
        };
        let quote = Quote {
            ctr: handoff.ctr,
            y,
            z,
            mr_raenc: self.measurement,
            mr_app: request.mr_app,
            result: request.result.clone(),
        };
        self.log.record(Observation::Exchange {
            nonce: request.nonce,
            quote: quote.clone(),
        });
        Ok(quote)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{measure, CoProcessor};
    use crate::scheme::KeyGenMode;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    fn request(result: &[u8]) -> AttestationRequest {
        AttestationRequest {
            nonce: Nonce([9; NONCE_BYTES]),
            mr_app: measure(b"app"),
            result: result.to_vec(),
        }
    }

    #[test]
    fn request_encoding() {
        let req = request(b"abc");
        let bytes = req.encode();
        assert_eq!(bytes.len(), 16 + 32 + 8 + 3);
        assert_eq!(AttestationRequest::decode(&bytes).unwrap(), req);
        assert!(AttestationRequest::decode(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn no_session_available() {
        let params = SchemeParams::new(1, 2, 2, 256).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        let log = AdversaryLog::new();
        let (mut cp, _) = CoProcessor::init(
            params.clone(),
            KeyGenMode::Production,
            log.clone(),
            &mut rng,
        )
        .unwrap();
        let enclave = RaEnclave::new(params, measure(b"ra"), log);
        assert_eq!(
            enclave.handle(&mut cp, &request(b"r")).unwrap_err(),
            Error::NoSession
        );
        cp.generate_next(&mut rng).unwrap();
        let quote = enclave.handle(&mut cp, &request(b"r")).unwrap();
        assert_eq!(quote.ctr, 1);
        assert_eq!(quote.result, b"r");
        assert!(enclave.handle(&mut cp, &request(b"r")).is_err());
    }
}
