use std::collections::VecDeque;
use std::sync::mpsc::Receiver;

use rand_core::{CryptoRng, RngCore};

use crate::backend::SourceElement;
use crate::error::{Error, Result};
use crate::protocol::adversary::{AdversaryLog, Observation};
use crate::protocol::memory::ObliviousBuffer;
use crate::scheme::{
    gen_session, keygen_setup, KeyGenMode, MasterSecret, PublicKey, SchemeParams,
    SessionKeyMaterial,
};

pub const DEFAULT_QUEUE_DEPTH: usize = 2;

/// What the co-processor hands to the enclave for one session: the counter,
/// the public `aux`, and the filled oblivious buffer.
#[derive(Debug)]
pub struct SessionHandoff {
    pub ctr: u64,
    pub aux: SourceElement,
    pub buffer: ObliviousBuffer,
}

/// Anything the enclave can pull the next session from.
pub trait SessionSource {
    fn next_session(&mut self) -> Option<SessionHandoff>;
}

impl SessionSource for Receiver<SessionHandoff> {
    fn next_session(&mut self) -> Option<SessionHandoff> {
        self.recv().ok()
    }
}

/// Key-generation co-processor. The only holder of the master secret.
pub struct CoProcessor {
    params: SchemeParams,
    pk: PublicKey,
    master: MasterSecret,
    ctr: u64,
    queue: VecDeque<SessionHandoff>,
    depth: usize,
    mode: KeyGenMode,
    retained: Vec<SessionKeyMaterial>,
    log: AdversaryLog,
}

impl CoProcessor {
    /// Initialization mode: generate `pk` and set `ctr = 0`.
    pub fn init<R: RngCore + CryptoRng>(
        params: SchemeParams,
        mode: KeyGenMode,
        log: AdversaryLog,
        rng: &mut R,
    ) -> Result<(Self, PublicKey)> {
        let (pk, master) = keygen_setup(&params, rng)?;
        let cp = CoProcessor {
            params,
            pk: pk.clone(),
            master,
            ctr: 0,
            queue: VecDeque::new(),
            depth: DEFAULT_QUEUE_DEPTH,
            mode,
            retained: Vec::new(),
            log,
        };
        Ok((cp, pk))
    }

    pub fn with_queue_depth(mut self, depth: usize) -> Self {
        self.depth = depth.max(1);
        self
    }

    pub fn ctr(&self) -> u64 {
        self.ctr
    }

    pub fn public_key(&self) -> &PublicKey {
        &self.pk
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Full key material of generated sessions, kept only in test mode.
    pub fn retained_sessions(&self) -> &[SessionKeyMaterial] {
        &self.retained
    }

    /// Runtime mode: `ctr += 1`, generate session `ctr` and hand it over.
    /// Fails without touching state once all N sessions exist.
    pub fn generate_handoff<R: RngCore + CryptoRng>(
        &mut self,
        rng: &mut R,
    ) -> Result<SessionHandoff> {
        if self.ctr >= self.params.sessions() {
            return Err(Error::SessionsExhausted(self.ctr));
        }
        let ctr = self.ctr + 1;
        let material = gen_session(
            &self.pk,
            &self.master,
            &self.params,
            ctr - 1,
            self.mode,
            rng,
        )?;
        self.ctr = ctr;
        if self.mode == KeyGenMode::Test {
            self.retained.push(material.clone());
        }
        let aux = *material.aux();
        self.log.record(Observation::Aux { session: ctr, aux });
        Ok(SessionHandoff {
            ctr,
            aux,
            buffer: ObliviousBuffer::load(ctr, material.into_subkeys()),
        })
    }

    /// Generates the next session into the internal queue and returns its
    /// counter. Refuses when the queue is at depth.
    pub fn generate_next<R: RngCore + CryptoRng>(&mut self, rng: &mut R) -> Result<u64> {
        if self.queue.len() >= self.depth {
            return Err(Error::QueueFull(self.depth));
        }
        let handoff = self.generate_handoff(rng)?;
        let ctr = handoff.ctr;
        self.queue.push_back(handoff);
        Ok(ctr)
    }
}

impl SessionSource for CoProcessor {
    fn next_session(&mut self) -> Option<SessionHandoff> {
        self.queue.pop_front()
    }
}
