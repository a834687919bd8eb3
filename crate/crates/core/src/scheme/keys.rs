use std::fmt;

use rand_core::{CryptoRng, RngCore};

use crate::backend::{random_nonzero_scalar, random_scalar, Repr, Scalar, SourceElement};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::scheme::params::SchemeParams;
use crate::scheme::selection::IndexSelection;

/// Universal verification key `(g, g1, g2, h)`.
///
/// `g`, `g1` and `h` are dual-represented; `g2` lives in G2 only.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    pub lambda: u32,
    pub g: SourceElement,
    pub g1: SourceElement,
    pub g2: SourceElement,
    pub h: SourceElement,
}

impl PublicKey {
    /// Structural and dual-consistency checks for a key read from outside.
    /// Costs four pairings.
    pub fn validate(&self, params: &SchemeParams) -> Result<()> {
        if self.lambda != params.lambda() {
            return Err(Error::InvalidParams(format!(
                "public key is for lambda={}, parameters say {}",
                self.lambda,
                params.lambda()
            )));
        }
        if self.g != params.group().generator() || self.g2 != params.group().second_generator() {
            return Err(Error::encoding(
                "public key generators differ from the published ones",
            ));
        }
        for (name, e) in [("g1", &self.g1), ("h", &self.h)] {
            if e.repr() != Repr::Dual || !e.is_consistent() {
                return Err(Error::encoding(format!(
                    "{name} is not a consistent dual element"
                )));
            }
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        Writer::new()
            .u64(u64::from(self.lambda))
            .element(&self.g)
            .element(&self.g1)
            .element(&self.g2)
            .element(&self.h)
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let lambda = u32::try_from(r.u64()?).map_err(|_| Error::encoding("lambda overflow"))?;
        let pk = PublicKey {
            lambda,
            g: r.element(Repr::Dual)?,
            g1: r.element(Repr::Dual)?,
            g2: r.element(Repr::Second)?,
            h: r.element(Repr::Dual)?,
        };
        r.finish()?;
        Ok(pk)
    }
}

/// The nonzero exponent α with `g1 = g^α`.
#[derive(Clone, PartialEq, Eq)]
pub struct MasterSecret {
    alpha: Scalar,
}

impl MasterSecret {
    pub fn alpha(&self) -> &Scalar {
        &self.alpha
    }
}

impl fmt::Debug for MasterSecret {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("MasterSecret(..)")
    }
}

pub fn keygen_setup<R: RngCore + CryptoRng>(
    params: &SchemeParams,
    rng: &mut R,
) -> Result<(PublicKey, MasterSecret)> {
    let group = params.group();
    let g = group.generator();
    let alpha = random_nonzero_scalar(rng)?;
    // h = g^rho gives h in both groups at the cost of two exponentiations.
    let rho = random_scalar(rng)?;
    let pk = PublicKey {
        lambda: group.lambda,
        g,
        g1: g.exp(&alpha),
        g2: group.second_generator(),
        h: g.exp(&rho),
    };
    Ok((pk, MasterSecret { alpha }))
}

/// `F(k) = g1^k * h`.
pub fn f_map(pk: &PublicKey, k: &Scalar) -> SourceElement {
    pk.g1
        .exp(k)
        .mul(&pk.h)
        .expect("g1 and h share a representation")
}

/// Whether generation keeps its random intermediates around for inspection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum KeyGenMode {
    #[default]
    Production,
    Test,
}

/// Per-session blinding `v_j = g^{beta_j}` with `sum_j beta_j = 0`.
#[derive(Clone, Debug)]
pub struct Blinding {
    betas: Vec<Scalar>,
    v: Vec<SourceElement>,
}

impl Blinding {
    pub fn betas(&self) -> &[Scalar] {
        &self.betas
    }

    pub fn v(&self) -> &[SourceElement] {
        &self.v
    }
}

/// Session-level random values retained in [`KeyGenMode::Test`].
#[derive(Clone, Debug)]
pub struct SessionTransients {
    pub r: Scalar,
    pub betas: Vec<Scalar>,
    pub v: Vec<SourceElement>,
}

/// One session's `n x t` subkey matrix plus `aux = g^r`.
#[derive(Clone, Debug)]
pub struct SessionKeyMaterial {
    session: u64,
    symbols: usize,
    radix: usize,
    subkeys: Vec<SourceElement>,
    aux: SourceElement,
    transients: Option<SessionTransients>,
}

impl SessionKeyMaterial {
    pub fn session(&self) -> u64 {
        self.session
    }

    /// Subkey for digit position `j` and digit value `b`.
    pub fn subkey(&self, j: usize, b: usize) -> &SourceElement {
        assert!(
            j < self.symbols && b < self.radix,
            "subkey ({j}, {b}) out of range"
        );
        &self.subkeys[self.radix * j + b]
    }

    /// All `t*n` subkeys, flat index `t*j + b`.
    pub fn subkeys(&self) -> &[SourceElement] {
        &self.subkeys
    }

    pub fn into_subkeys(self) -> Vec<SourceElement> {
        self.subkeys
    }

    pub fn aux(&self) -> &SourceElement {
        &self.aux
    }

    pub fn transients(&self) -> Option<&SessionTransients> {
        self.transients.as_ref()
    }

    pub fn select(&self, selection: &IndexSelection) -> Vec<SourceElement> {
        selection
            .indices()
            .iter()
            .map(|&i| self.subkeys[i])
            .collect()
    }

    /// `[u64 session][u64 n][u64 t][t*n G2 fields][aux field]`.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u64(self.session)
            .u64(self.symbols as u64)
            .u64(self.radix as u64);
        for sk in &self.subkeys {
            w.element(sk);
        }
        w.element(&self.aux).finish()
    }

    pub fn from_bytes(params: &SchemeParams, bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let session = r.u64()?;
        params.check_session(session)?;
        let symbols = r.u64()?;
        let radix = r.u64()?;
        if symbols != u64::from(params.symbols()) || radix != u64::from(params.radix()) {
            return Err(Error::encoding(format!(
                "session key shape {symbols}x{radix} does not match parameters"
            )));
        }
        let subkeys = (0..params.subkeys_per_session())
            .map(|_| r.element(Repr::Second))
            .collect::<Result<Vec<_>>>()?;
        let aux = r.element(Repr::Dual)?;
        r.finish()?;
        Ok(SessionKeyMaterial {
            session,
            symbols: symbols as usize,
            radix: radix as usize,
            subkeys,
            aux,
            transients: None,
        })
    }
}

/// Samples `beta_0..beta_{n-2}` and forces `beta_{n-1}` so the sum is zero.
pub fn gen_blinding<R: RngCore + CryptoRng>(
    params: &SchemeParams,
    g: &SourceElement,
    rng: &mut R,
) -> Result<Blinding> {
    let n = params.symbols() as usize;
    let mut betas = (0..n - 1)
        .map(|_| random_scalar(rng))
        .collect::<Result<Vec<_>>>()?;
    let last = -betas.iter().copied().sum::<Scalar>();
    betas.push(last);
    let g = g.to_second()?;
    let v = betas.iter().map(|b| g.exp(b)).collect();
    Ok(Blinding { betas, v })
}

/// Samples `r` and returns it with the dual-represented `aux = g^r`.
pub fn gen_aux<R: RngCore + CryptoRng>(
    g: &SourceElement,
    rng: &mut R,
) -> Result<(Scalar, SourceElement)> {
    let r = random_scalar(rng)?;
    Ok((r, g.exp(&r)))
}

/// `sk_{i,j,b} = g2^α * F(i*t^n + b*n*t^j)^r * v_j` for every (j, b).
///
/// `F(e)^r` is expanded as `(g1^r)^e * h^r` so each subkey costs one G2
/// exponentiation.
pub fn derive_subkeys(
    pk: &PublicKey,
    master: &MasterSecret,
    params: &SchemeParams,
    session: u64,
    r: &Scalar,
    blinding: &Blinding,
) -> Result<Vec<SourceElement>> {
    params.check_session(session)?;
    let n = params.symbols() as usize;
    let t = params.radix();
    if blinding.v.len() != n {
        return Err(Error::SubkeyCount {
            expected: n,
            actual: blinding.v.len(),
        });
    }
    let base = pk.g2.exp(master.alpha());
    let g1_r = pk.g1.to_second()?.exp(r);
    let h_r = pk.h.to_second()?.exp(r);
    let offset = Scalar::from_biguint(&(num_bigint::BigUint::from(session) * params.span()));
    let n_scalar = params.symbols_scalar();
    let t_scalar = Scalar::from_u64(u64::from(t));

    let mut subkeys = Vec::with_capacity(params.subkeys_per_session());
    // t^j as a scalar, advanced per digit position.
    let mut t_pow = Scalar::one();
    for v_j in &blinding.v {
        let common = base.mul(&h_r)?.mul(v_j)?;
        for b in 0..t {
            let e = offset + Scalar::from_u64(u64::from(b)) * n_scalar * t_pow;
            subkeys.push(common.mul(&g1_r.exp(&e))?);
        }
        t_pow = t_pow * t_scalar;
    }
    Ok(subkeys)
}

/// Generates session `session`'s key material.
pub fn gen_session<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    master: &MasterSecret,
    params: &SchemeParams,
    session: u64,
    mode: KeyGenMode,
    rng: &mut R,
) -> Result<SessionKeyMaterial> {
    params.check_session(session)?;
    let blinding = gen_blinding(params, &pk.g, rng)?;
    let (r, aux) = gen_aux(&pk.g, rng)?;
    let subkeys = derive_subkeys(pk, master, params, session, &r, &blinding)?;
    let transients = match mode {
        KeyGenMode::Test => Some(SessionTransients {
            r,
            betas: blinding.betas,
            v: blinding.v,
        }),
        KeyGenMode::Production => None,
    };
    Ok(SessionKeyMaterial {
        session,
        symbols: params.symbols() as usize,
        radix: params.radix() as usize,
        subkeys,
        aux,
        transients,
    })
}
