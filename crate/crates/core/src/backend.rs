//! Pairing backend over BLS12-381.
//!
//! BLS12-381 has an asymmetric (Type-3) pairing `e: G1 x G2 -> GT`. The
//! signature equations are written for a symmetric group, so any element that
//! is used on both sides of a pairing is carried in a *dual* representation:
//! the same exponent applied to the G1 generator and to the G2 generator.
//! Elements that only ever appear as the second pairing argument live in G2
//! alone, and the compressed signature's `y` lives in G1 alone.
//!
//! Everything above this module only sees [`Scalar`], [`SourceElement`] and
//! [`TargetElement`].

use std::cell::Cell;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use bls12_381::hash_to_curve::{ExpandMessageState, ExpandMsgXmd, HashToCurve, InitExpandMessage};
use bls12_381::{pairing, G1Affine, G1Projective, G2Affine, G2Projective, Gt};
use num_bigint::BigUint;
use rand_core::{CryptoRng, RngCore};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const SCALAR_BYTES: usize = 32;
pub const G1_BYTES: usize = 48;
pub const G2_BYTES: usize = 96;

/// Hash domain tags.
pub const TAG_H: &str = "OTSSKE/H";
pub const TAG_PRP: &str = "OTSSKE/PRP";
pub const TAG_MR: &str = "OTSSKE/MR";
pub const TAG_EOT: &str = "OTSSKE/EOT";

const SECOND_GENERATOR_DST: &[u8] = b"OTSSKE/G2-GENERATOR/BLS12381G2_XMD:SHA-256_SSWU_RO_";

const CURVE_ORDER_HEX: &str = "73eda753299d7d483339d80809a1d80553bda402fffe5bfeffffffff00000001";

/// Published group parameters for a security level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupParams {
    pub curve: &'static str,
    pub lambda: u32,
    order: BigUint,
}

impl GroupParams {
    /// Prime order `p` of G1, G2 and GT.
    pub fn order(&self) -> &BigUint {
        &self.order
    }

    pub fn order_bits(&self) -> u64 {
        self.order.bits()
    }

    /// Dual-represented generator `g`.
    pub fn generator(&self) -> SourceElement {
        SourceElement::dual(G1Projective::generator(), G2Projective::generator())
    }

    /// Independent G2 generator `g2`, obtained by hashing to the curve so
    /// that nobody knows its discrete logarithm with respect to `g`.
    pub fn second_generator(&self) -> SourceElement {
        static G2_GEN: OnceLock<G2Projective> = OnceLock::new();
        let point = G2_GEN.get_or_init(|| {
            <G2Projective as HashToCurve<ExpandMsgXmd<Sha256>>>::hash_to_curve(
                b"g2",
                SECOND_GENERATOR_DST,
            )
        });
        SourceElement::second(*point)
    }
}

/// Returns the fixed parameters for the requested security level.
///
/// Both supported levels map onto BLS12-381, whose 255-bit group order is the
/// "256-bit" class used for the reference ECDSA comparison.
pub fn setup(lambda: u32) -> Result<GroupParams> {
    match lambda {
        128 | 256 => Ok(GroupParams {
            curve: "BLS12-381",
            lambda,
            order: curve_order().clone(),
        }),
        other => Err(Error::UnsupportedSecurityLevel(other)),
    }
}

pub(crate) fn curve_order() -> &'static BigUint {
    static ORDER: OnceLock<BigUint> = OnceLock::new();
    ORDER.get_or_init(|| BigUint::parse_bytes(CURVE_ORDER_HEX.as_bytes(), 16).expect("valid hex"))
}

/// Element of `Z_p`.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct Scalar(bls12_381::Scalar);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(bls12_381::Scalar::zero())
    }

    pub fn one() -> Self {
        Scalar(bls12_381::Scalar::one())
    }

    pub fn from_u64(v: u64) -> Self {
        Scalar(bls12_381::Scalar::from(v))
    }

    /// Reduces an arbitrary-precision integer modulo `p`.
    pub fn from_biguint(v: &BigUint) -> Self {
        let reduced = v % curve_order();
        let mut bytes = [0u8; SCALAR_BYTES];
        let le = reduced.to_bytes_le();
        bytes[..le.len()].copy_from_slice(&le);
        Scalar(bls12_381::Scalar::from_bytes(&bytes).unwrap())
    }

    pub fn to_biguint(&self) -> BigUint {
        BigUint::from_bytes_le(&self.to_bytes())
    }

    /// Canonical little-endian encoding.
    pub fn to_bytes(&self) -> [u8; SCALAR_BYTES] {
        self.0.to_bytes()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let arr: [u8; SCALAR_BYTES] = bytes
            .try_into()
            .map_err(|_| Error::encoding(format!("scalar must be {SCALAR_BYTES} bytes")))?;
        Option::from(bls12_381::Scalar::from_bytes(&arr))
            .map(Scalar)
            .ok_or_else(|| Error::encoding("non-canonical scalar"))
    }

    pub fn from_bytes_wide(bytes: &[u8; 64]) -> Self {
        Scalar(bls12_381::Scalar::from_bytes_wide(bytes))
    }

    pub fn is_zero(&self) -> bool {
        self.0 == bls12_381::Scalar::zero()
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({})", hex::encode(self.to_bytes()))
    }
}

impl Add for Scalar {
    type Output = Scalar;
    fn add(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 + rhs.0)
    }
}

impl Sub for Scalar {
    type Output = Scalar;
    fn sub(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 - rhs.0)
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        Scalar(self.0 * rhs.0)
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, s| acc + s)
    }
}

/// Uniform scalar in `[0, p)` from 64 bytes of generator output.
pub fn random_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Scalar> {
    let mut wide = [0u8; 64];
    rng.try_fill_bytes(&mut wide)
        .map_err(|e| Error::Rng(e.to_string()))?;
    Ok(Scalar::from_bytes_wide(&wide))
}

/// Uniform scalar in `[1, p)`.
pub fn random_nonzero_scalar<R: RngCore + CryptoRng>(rng: &mut R) -> Result<Scalar> {
    loop {
        let s = random_scalar(rng)?;
        if !s.is_zero() {
            return Ok(s);
        }
    }
}

/// Which source group(s) an element is carried in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Repr {
    First,
    Second,
    Dual,
}

impl Repr {
    pub fn encoded_len(self) -> usize {
        match self {
            Repr::First => G1_BYTES,
            Repr::Second => G2_BYTES,
            Repr::Dual => G1_BYTES + G2_BYTES,
        }
    }
}

/// Element of the pairing source group(s).
#[derive(Clone, Copy, Debug)]
pub struct SourceElement {
    first: Option<G1Projective>,
    second: Option<G2Projective>,
}

impl PartialEq for SourceElement {
    fn eq(&self, other: &Self) -> bool {
        self.first == other.first && self.second == other.second
    }
}

impl Eq for SourceElement {}

impl SourceElement {
    pub fn first(p: G1Projective) -> Self {
        SourceElement {
            first: Some(p),
            second: None,
        }
    }

    pub fn second(p: G2Projective) -> Self {
        SourceElement {
            first: None,
            second: Some(p),
        }
    }

    pub fn dual(p: G1Projective, q: G2Projective) -> Self {
        SourceElement {
            first: Some(p),
            second: Some(q),
        }
    }

    pub fn identity(repr: Repr) -> Self {
        match repr {
            Repr::First => Self::first(G1Projective::identity()),
            Repr::Second => Self::second(G2Projective::identity()),
            Repr::Dual => Self::dual(G1Projective::identity(), G2Projective::identity()),
        }
    }

    pub fn repr(&self) -> Repr {
        match (self.first.is_some(), self.second.is_some()) {
            (true, true) => Repr::Dual,
            (true, false) => Repr::First,
            (false, true) => Repr::Second,
            (false, false) => unreachable!("source element without representation"),
        }
    }

    pub fn first_part(&self) -> Result<&G1Projective> {
        self.first
            .as_ref()
            .ok_or(Error::MissingRepresentation("G1"))
    }

    pub fn second_part(&self) -> Result<&G2Projective> {
        self.second
            .as_ref()
            .ok_or(Error::MissingRepresentation("G2"))
    }

    /// Drops the G2 copy.
    pub fn to_first(&self) -> Result<SourceElement> {
        self.first_part().map(|p| Self::first(*p))
    }

    /// Drops the G1 copy.
    pub fn to_second(&self) -> Result<SourceElement> {
        self.second_part().map(|q| Self::second(*q))
    }

    pub fn is_identity(&self) -> bool {
        self.first.is_none_or(|p| bool::from(p.is_identity()))
            && self.second.is_none_or(|q| bool::from(q.is_identity()))
    }

    pub fn exp(&self, k: &Scalar) -> SourceElement {
        SourceElement {
            first: self.first.map(|p| p * k.0),
            second: self.second.map(|q| q * k.0),
        }
    }

    /// Group operation. Both operands must share a representation.
    pub fn mul(&self, other: &SourceElement) -> Result<SourceElement> {
        if self.repr() != other.repr() {
            return Err(Error::MixedRepresentation {
                left: self.repr(),
                right: other.repr(),
            });
        }
        Ok(SourceElement {
            first: self.first.zip(other.first).map(|(a, b)| a + b),
            second: self.second.zip(other.second).map(|(a, b)| a + b),
        })
    }

    pub fn inverse(&self) -> SourceElement {
        SourceElement {
            first: self.first.map(|p| -p),
            second: self.second.map(|q| -q),
        }
    }

    /// Checks that both copies of a dual element carry the same exponent,
    /// `e(P, g_2) = e(g_1, Q)`. Always true for single representations.
    pub fn is_consistent(&self) -> bool {
        match (self.first, self.second) {
            (Some(p), Some(q)) => {
                let lhs = pair_raw(&p, &G2Projective::generator());
                let rhs = pair_raw(&G1Projective::generator(), &q);
                lhs == rhs
            }
            _ => true,
        }
    }

    /// Canonical compressed encoding: the G1 copy (if any) followed by the G2
    /// copy (if any).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.repr().encoded_len());
        if let Some(p) = self.first {
            out.extend_from_slice(&G1Affine::from(p).to_compressed());
        }
        if let Some(q) = self.second {
            out.extend_from_slice(&G2Affine::from(q).to_compressed());
        }
        out
    }

    /// Decodes an element of the given representation, rejecting wrong
    /// lengths, points off the curve and points outside the prime-order
    /// subgroup.
    pub fn from_bytes(repr: Repr, bytes: &[u8]) -> Result<SourceElement> {
        if bytes.len() != repr.encoded_len() {
            return Err(Error::encoding(format!(
                "{repr:?} element must be {} bytes, got {}",
                repr.encoded_len(),
                bytes.len()
            )));
        }
        let decode_g1 = |b: &[u8]| -> Result<G1Projective> {
            let arr: [u8; G1_BYTES] = b.try_into().unwrap();
            Option::<G1Affine>::from(G1Affine::from_compressed(&arr))
                .map(G1Projective::from)
                .ok_or_else(|| Error::encoding("invalid G1 point"))
        };
        let decode_g2 = |b: &[u8]| -> Result<G2Projective> {
            let arr: [u8; G2_BYTES] = b.try_into().unwrap();
            Option::<G2Affine>::from(G2Affine::from_compressed(&arr))
                .map(G2Projective::from)
                .ok_or_else(|| Error::encoding("invalid G2 point"))
        };
        Ok(match repr {
            Repr::First => Self::first(decode_g1(bytes)?),
            Repr::Second => Self::second(decode_g2(bytes)?),
            Repr::Dual => Self::dual(
                decode_g1(&bytes[..G1_BYTES])?,
                decode_g2(&bytes[G1_BYTES..])?,
            ),
        })
    }
}

/// Element of the pairing target group GT, written multiplicatively.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TargetElement(Gt);

impl TargetElement {
    pub fn identity() -> Self {
        TargetElement(Gt::identity())
    }

    pub fn mul(&self, other: &TargetElement) -> TargetElement {
        TargetElement(self.0 + other.0)
    }

    pub fn pow(&self, k: &Scalar) -> TargetElement {
        TargetElement(self.0 * k.0)
    }

    pub fn is_identity(&self) -> bool {
        self.0 == Gt::identity()
    }
}

thread_local! {
    static PAIRINGS: Cell<u64> = const { Cell::new(0) };
}

/// Number of pairings evaluated on the current thread since the last
/// [`reset_pairing_count`].
pub fn pairing_count() -> u64 {
    PAIRINGS.with(Cell::get)
}

pub fn reset_pairing_count() {
    PAIRINGS.with(|c| c.set(0));
}

fn pair_raw(p: &G1Projective, q: &G2Projective) -> Gt {
    PAIRINGS.with(|c| c.set(c.get() + 1));
    pairing(&G1Affine::from(p), &G2Affine::from(q))
}

/// `e(a, b)`; `a` needs a G1 copy and `b` a G2 copy.
pub fn pair(a: &SourceElement, b: &SourceElement) -> Result<TargetElement> {
    let p = a.first_part()?;
    let q = b.second_part()?;
    Ok(TargetElement(pair_raw(p, q)))
}

/// Unambiguous multi-part encoding: every part is prefixed with its 8-byte
/// big-endian length.
pub fn length_prefixed(parts: &[&[u8]]) -> Vec<u8> {
    let total: usize = parts.iter().map(|p| p.len() + 8).sum();
    let mut out = Vec::with_capacity(total);
    for part in parts {
        out.extend_from_slice(&(part.len() as u64).to_be_bytes());
        out.extend_from_slice(part);
    }
    out
}

/// Hashes `parts` into `Z_p` with `expand_message_xmd` (SHA-256) producing
/// 512 bits that are reduced modulo the 255-bit order.
pub fn hash_to_scalar(domain_tag: &str, parts: &[&[u8]]) -> Scalar {
    let msg = length_prefixed(parts);
    let mut expander =
        <ExpandMsgXmd<Sha256> as InitExpandMessage>::init_expand(&msg, domain_tag.as_bytes(), 64);
    let mut wide = [0u8; 64];
    expander.read_into(&mut wide);
    Scalar::from_bytes_wide(&wide)
}

/// Domain-separated 256-bit digest used for measurements and protocol
/// messages.
pub fn digest256(domain_tag: &str, parts: &[&[u8]]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(length_prefixed(&[domain_tag.as_bytes()]));
    hasher.update(length_prefixed(parts));
    hasher.finalize().into()
}
