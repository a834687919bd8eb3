use std::fmt;
use std::sync::{Arc, Mutex};

use crate::backend::SourceElement;
use crate::protocol::enclave::AttestationRequest;
use crate::protocol::quote::Quote;
use crate::protocol::verifier::check_quote;
use crate::protocol::{eot_select, memory_input, message_digest, Measurement, Nonce};
use crate::scheme::{PublicKey, SchemeParams};

/// One piece of digital state the adversary got to see. Sessions are quote
/// counters.
#[derive(Clone, Debug)]
pub enum Observation {
    Aux {
        session: u64,
        aux: SourceElement,
    },
    Served {
        session: u64,
        indices: Vec<usize>,
        subkeys: Vec<SourceElement>,
    },
    Request(AttestationRequest),
    Exchange {
        nonce: Nonce,
        quote: Quote,
    },
}

/// Shared, append-only record of observations. Cheap to clone.
#[derive(Clone, Debug, Default)]
pub struct AdversaryLog {
    entries: Arc<Mutex<Vec<Observation>>>,
}

impl AdversaryLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, obs: Observation) {
        self.entries
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(obs);
    }

    pub fn snapshot(&self) -> Vec<Observation> {
        self.entries
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// The target session's observed quote re-submitted with the target
    /// result.
    Replay,
    /// Observed subkeys re-multiplied for the target selection.
    Reaggregate,
    /// Another session's `(y, z)` under the target counter.
    CrossSession,
    /// `y` from one session with `z` from another.
    MixAndMatch,
    /// An observed quote re-submitted unchanged with its own nonce.
    SameMessage,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::Replay,
        Strategy::Reaggregate,
        Strategy::CrossSession,
        Strategy::MixAndMatch,
        Strategy::SameMessage,
    ];

    /// Whether a verified outcome is a break. Re-sending an honest quote for
    /// the message it was made for is not.
    pub fn is_forgery(self) -> bool {
        self != Strategy::SameMessage
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Strategy::Replay => "replay",
            Strategy::Reaggregate => "reaggregate",
            Strategy::CrossSession => "cross-session",
            Strategy::MixAndMatch => "mix-and-match",
            Strategy::SameMessage => "same-message",
        };
        f.write_str(name)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Rejected(String),
    InsufficientMaterial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Attempt {
    pub strategy: Strategy,
    pub session: u64,
    pub outcome: Outcome,
}

impl Attempt {
    /// A verified attempt whose strategy counts as a forgery.
    pub fn is_break(&self) -> bool {
        self.strategy.is_forgery() && self.outcome == Outcome::Verified
    }
}

/// The quote the adversary wants accepted: counter `session`, result
/// `result`, under the verifier's fresh `nonce`.
#[derive(Clone, Debug)]
pub struct ForgeryTarget {
    pub session: u64,
    pub mr_raenc: Measurement,
    pub mr_app: Measurement,
    pub result: Vec<u8>,
    pub nonce: Nonce,
}

impl ForgeryTarget {
    fn quote(&self, y: SourceElement, z: SourceElement) -> Quote {
        Quote {
            ctr: self.session,
            y,
            z,
            mr_raenc: self.mr_raenc,
            mr_app: self.mr_app,
            result: self.result.clone(),
        }
    }
}

struct View {
    aux: Vec<(u64, SourceElement)>,
    served: Vec<(u64, Vec<usize>, Vec<SourceElement>)>,
    exchanges: Vec<(Nonce, Quote)>,
}

impl View {
    fn new(log: &AdversaryLog) -> Self {
        let mut view = View {
            aux: Vec::new(),
            served: Vec::new(),
            exchanges: Vec::new(),
        };
        for obs in log.snapshot() {
            match obs {
                Observation::Aux { session, aux } => view.aux.push((session, aux)),
                Observation::Served {
                    session,
                    indices,
                    subkeys,
                } => view.served.push((session, indices, subkeys)),
                Observation::Exchange { nonce, quote } => view.exchanges.push((nonce, quote)),
                Observation::Request(_) => {}
            }
        }
        view
    }

    fn aux_of(&self, session: u64) -> Option<SourceElement> {
        self.aux
            .iter()
            .find(|(s, _)| *s == session)
            .map(|(_, a)| *a)
    }

    /// A served subkey for flat index `index`: the exact slot from `session`,
    /// else the exact slot from any session, else any slot of the same block
    /// from `session`.
    fn subkey_for(&self, session: u64, index: usize, radix: usize) -> Option<SourceElement> {
        let exact = |want: Option<u64>| {
            self.served.iter().find_map(|(s, indices, keys)| {
                if want.is_some_and(|w| w != *s) {
                    return None;
                }
                indices.iter().position(|&i| i == index).map(|p| keys[p])
            })
        };
        exact(Some(session)).or_else(|| exact(None)).or_else(|| {
            self.served.iter().find_map(|(s, indices, keys)| {
                if *s != session {
                    return None;
                }
                indices
                    .iter()
                    .position(|&i| i / radix == index / radix)
                    .map(|p| keys[p])
            })
        })
    }
}

/// Runs every strategy against `target` using only what `log` holds.
///
/// Each candidate quote a strategy can build from the log is one attempt.
/// A strategy with no material yields a single
/// [`Outcome::InsufficientMaterial`] attempt. Attempts come grouped by
/// strategy in [`Strategy::ALL`] order.
pub fn adversary_forge_attempts(
    log: &AdversaryLog,
    pk: &PublicKey,
    params: &SchemeParams,
    target: &ForgeryTarget,
) -> Vec<Attempt> {
    let view = View::new(log);
    let judge = |quote: &Quote, nonce: &Nonce| match check_quote(
        pk,
        params,
        Some(&target.mr_raenc),
        quote,
        nonce,
    ) {
        Ok(()) => Outcome::Verified,
        Err(e) => Outcome::Rejected(e.to_string()),
    };
    let forged = |y: SourceElement, z: SourceElement| judge(&target.quote(y, z), &target.nonce);
    let own: Vec<&Quote> = view
        .exchanges
        .iter()
        .map(|(_, q)| q)
        .filter(|q| q.ctr == target.session)
        .collect();
    let others: Vec<&Quote> = view
        .exchanges
        .iter()
        .map(|(_, q)| q)
        .filter(|q| q.ctr != target.session)
        .collect();
    let target_y = view.aux_of(target.session).and_then(|a| a.to_first().ok());

    let replay: Vec<_> = own.iter().map(|q| forged(q.y, q.z)).collect();

    let reaggregate: Vec<_> = {
        let message = message_digest(&target.mr_raenc, &target.mr_app, &target.result);
        let x = memory_input(&target.nonce, &message);
        let selection = eot_select(params, &x, &target.mr_raenc);
        let radix = params.radix() as usize;
        let keys: Option<Vec<_>> = selection
            .indices()
            .iter()
            .map(|&i| view.subkey_for(target.session, i, radix))
            .collect();
        let z = keys.and_then(|keys| keys[1..].iter().try_fold(keys[0], |acc, k| acc.mul(k)).ok());
        match (target_y, z) {
            (Some(y), Some(z)) => vec![forged(y, z)],
            _ => vec![],
        }
    };

    let cross: Vec<_> = others.iter().map(|q| forged(q.y, q.z)).collect();

    let mut mix = Vec::new();
    for other in &others {
        if let Some(y) = target_y {
            mix.push(forged(y, other.z));
        }
        for mine in &own {
            mix.push(forged(other.y, mine.z));
        }
    }

    let same: Vec<_> = view
        .exchanges
        .iter()
        .filter(|(_, q)| q.ctr == target.session)
        .map(|(nonce, q)| judge(q, nonce))
        .collect();

    [replay, reaggregate, cross, mix, same]
        .into_iter()
        .zip(Strategy::ALL)
        .flat_map(|(outcomes, strategy)| {
            let outcomes = if outcomes.is_empty() {
                vec![Outcome::InsufficientMaterial]
            } else {
                outcomes
            };
            outcomes.into_iter().map(move |outcome| Attempt {
                strategy,
                session: target.session,
                outcome,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{measure, NONCE_BYTES};
    use crate::scheme::keygen_setup;
    use rand_chacha::ChaCha20Rng;
    use rand_core::SeedableRng;

    #[test]
    fn empty_log_has_nothing_to_work_with() {
        let params = SchemeParams::new(2, 2, 2, 256).unwrap();
        let (pk, _) = keygen_setup(&params, &mut ChaCha20Rng::seed_from_u64(1)).unwrap();
        let target = ForgeryTarget {
            session: 1,
            mr_raenc: measure(b"ra"),
            mr_app: measure(b"app"),
            result: b"forged".to_vec(),
            nonce: Nonce([1; NONCE_BYTES]),
        };
        let attempts = adversary_forge_attempts(&AdversaryLog::new(), &pk, &params, &target);
        assert_eq!(attempts.len(), 5);
        for (a, s) in attempts.iter().zip(Strategy::ALL) {
            assert_eq!(a.strategy, s);
            assert_eq!(a.outcome, Outcome::InsufficientMaterial);
            assert!(!a.is_break());
        }
    }

    #[test]
    fn log_is_shared_between_clones() {
        let log = AdversaryLog::new();
        let other = log.clone();
        other.record(Observation::Request(AttestationRequest {
            nonce: Nonce([0; NONCE_BYTES]),
            mr_app: measure(b"a"),
            result: vec![],
        }));
        assert_eq!(log.snapshot().len(), 1);
    }
}
