use rand_core::{CryptoRng, RngCore};
use thiserror::Error;

use crate::backend::{hash_to_scalar, pair, random_scalar, Repr, Scalar, SourceElement, TAG_H};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::scheme::keys::{f_map, PublicKey};
use crate::scheme::params::{encode_index, SchemeParams};
use crate::scheme::selection::{prp_select, IndexSelection};

const TAG_FULL: u8 = 0x01;
const TAG_COMPRESSED: u8 = 0x02;

/// A signature together with the selection key it was produced under.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Signature {
    /// `(x, y, z)`: x in G2, y dual, z in G2.
    Full {
        x: SourceElement,
        y: SourceElement,
        z: SourceElement,
        key: Vec<u8>,
    },
    /// `(y, z) = (aux, prod sk)`: y in G1, z in G2.
    Compressed {
        y: SourceElement,
        z: SourceElement,
        key: Vec<u8>,
    },
}

impl Signature {
    pub fn key(&self) -> &[u8] {
        match self {
            Signature::Full { key, .. } | Signature::Compressed { key, .. } => key,
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Signature::Full { .. })
    }

    /// `[u8 tag]` followed by length-prefixed fields in declaration order.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        match self {
            Signature::Full { x, y, z, key } => {
                w.u8(TAG_FULL).element(x).element(y).element(z).field(key);
            }
            Signature::Compressed { y, z, key } => {
                w.u8(TAG_COMPRESSED).element(y).element(z).field(key);
            }
        }
        w.finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let sig = match r.u8()? {
            TAG_FULL => Signature::Full {
                x: r.element(Repr::Second)?,
                y: r.element(Repr::Dual)?,
                z: r.element(Repr::Second)?,
                key: r.field()?.to_vec(),
            },
            TAG_COMPRESSED => Signature::Compressed {
                y: r.element(Repr::First)?,
                z: r.element(Repr::Second)?,
                key: r.field()?.to_vec(),
            },
            other => {
                return Err(Error::encoding(format!(
                    "unknown signature tag {other:#04x}"
                )))
            }
        };
        r.finish()?;
        Ok(sig)
    }
}

/// Why a signature was not accepted.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Rejection {
    #[error("signature variant does not match the verifier")]
    WrongVariant,
    #[error("malformed signature element: {0}")]
    Malformed(String),
    #[error("degenerate challenge: g2^(n*u) * x is the identity")]
    DegenerateChallenge,
    #[error("pairing equation does not hold")]
    EquationFailed,
    #[error(transparent)]
    Params(#[from] Error),
}

/// Product of the n selected subkeys, one per digit position.
pub fn aggregate(params: &SchemeParams, subkeys: &[SourceElement]) -> Result<SourceElement> {
    let n = params.symbols() as usize;
    if subkeys.len() != n {
        return Err(Error::SubkeyCount {
            expected: n,
            actual: subkeys.len(),
        });
    }
    let (first, rest) = subkeys.split_first().expect("n >= 1");
    rest.iter().try_fold(*first, |acc, sk| acc.mul(sk))
}

fn challenge(msg: &[u8], x: &SourceElement) -> Scalar {
    hash_to_scalar(TAG_H, &[msg, &x.to_bytes()])
}

#[allow(clippy::too_many_arguments)]
pub fn sign_full<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    subkeys: &[SourceElement],
    selection: &IndexSelection,
    aux: &SourceElement,
    msg: &[u8],
    rng: &mut R,
) -> Result<Signature> {
    sign_full_with(
        pk,
        params,
        session,
        subkeys,
        selection,
        aux,
        msg,
        || random_scalar(rng),
        challenge,
    )
}

/// Full signing with the nonce source and challenge hash injected.
#[allow(clippy::too_many_arguments)]
fn sign_full_with(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    subkeys: &[SourceElement],
    selection: &IndexSelection,
    aux: &SourceElement,
    msg: &[u8],
    mut draw: impl FnMut() -> Result<Scalar>,
    hash: impl Fn(&[u8], &SourceElement) -> Scalar,
) -> Result<Signature> {
    params.check_session(session)?;
    if aux.repr() != Repr::Dual {
        return Err(Error::MissingRepresentation("dual aux"));
    }
    let sk = aggregate(params, subkeys)?;
    let n = params.symbols_scalar();
    // s + u = 0 would give y = z = 1; resample.
    let (x, e) = loop {
        let s = draw()?;
        let x = pk.g2.exp(&(n * s));
        let u = hash(msg, &x);
        let e = s + u;
        if !e.is_zero() {
            break (x, e);
        }
    };
    Ok(Signature::Full {
        x,
        y: aux.exp(&(n * e)),
        z: sk.exp(&e),
        key: selection.key().to_vec(),
    })
}

/// Accepts iff `e(g, z) = e(g1, g2^{nu} x y^k) * e(y, h)` with
/// `u = H(M, x)`, `k = i t^n + B`.
///
/// Besides the equation, rejects `g2^{nu} x = 1` and a `y` whose two copies
/// disagree; the latter would otherwise let `y`'s G2 copy cancel the
/// challenge term.
pub fn check_full(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
) -> std::result::Result<(), Rejection> {
    check_full_with(pk, params, session, sig, msg, challenge)
}

fn check_full_with(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
    hash: impl Fn(&[u8], &SourceElement) -> Scalar,
) -> std::result::Result<(), Rejection> {
    let Signature::Full { x, y, z, key } = sig else {
        return Err(Rejection::WrongVariant);
    };
    if x.repr() != Repr::Second || y.repr() != Repr::Dual || z.repr() != Repr::Second {
        return Err(Rejection::Malformed(
            "unexpected element representation".into(),
        ));
    }
    let selection = prp_select(params, key, msg);
    let k = encode_index(params, session, selection.value())?;
    let n = params.symbols_scalar();
    let u = hash(msg, x);
    let w = pk.g2.exp(&(n * u)).mul(x)?;
    if w.is_identity() {
        return Err(Rejection::DegenerateChallenge);
    }
    if !y.is_consistent() {
        return Err(Rejection::Malformed("y copies disagree".into()));
    }
    let lhs = pair(&pk.g, z)?;
    let rhs = pair(&pk.g1, &w.mul(&y.to_second()?.exp(&k))?)?.mul(&pair(y, &pk.h)?);
    if lhs == rhs {
        Ok(())
    } else {
        Err(Rejection::EquationFailed)
    }
}

pub fn verify_full(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
) -> bool {
    check_full(pk, params, session, sig, msg).is_ok()
}

/// `(y, z) = (aux, prod sk)`. No randomness and no pairings.
pub fn sign_compressed(
    params: &SchemeParams,
    session: u64,
    subkeys: &[SourceElement],
    selection: &IndexSelection,
    aux: &SourceElement,
) -> Result<Signature> {
    params.check_session(session)?;
    Ok(Signature::Compressed {
        y: aux.to_first()?,
        z: aggregate(params, subkeys)?,
        key: selection.key().to_vec(),
    })
}

/// Accepts iff `e(g, z) = e(g1, g2^n) * e(y, (g1^k h)^n)` for the given
/// selection. Exactly three pairings.
pub fn check_compressed_selected(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    y: &SourceElement,
    z: &SourceElement,
    selection: &IndexSelection,
) -> std::result::Result<(), Rejection> {
    if y.repr() == Repr::Second || z.repr() == Repr::First {
        return Err(Rejection::Malformed(
            "unexpected element representation".into(),
        ));
    }
    let k = encode_index(params, session, selection.value())?;
    let n = params.symbols_scalar();
    let e1 = pair(&pk.g, z)?;
    let e2 = pair(&pk.g1, &pk.g2.exp(&n))?;
    let e3 = pair(y, &f_map(pk, &k).to_second()?.exp(&n))?;
    if e1 == e2.mul(&e3) {
        Ok(())
    } else {
        Err(Rejection::EquationFailed)
    }
}

pub fn check_compressed(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
) -> std::result::Result<(), Rejection> {
    let Signature::Compressed { y, z, key } = sig else {
        return Err(Rejection::WrongVariant);
    };
    let selection = prp_select(params, key, msg);
    check_compressed_selected(pk, params, session, y, z, &selection)
}

pub fn verify_compressed(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
) -> bool {
    check_compressed(pk, params, session, sig, msg).is_ok()
}

/// Dispatches on the signature variant.
pub fn verify(
    pk: &PublicKey,
    params: &SchemeParams,
    session: u64,
    sig: &Signature,
    msg: &[u8],
) -> std::result::Result<(), Rejection> {
    match sig {
        Signature::Full { .. } => check_full(pk, params, session, sig, msg),
        Signature::Compressed { .. } => check_compressed(pk, params, session, sig, msg),
    }
}
