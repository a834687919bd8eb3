use num_bigint::BigUint;

use crate::backend::{self, GroupParams, Scalar};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};

/// Scheme dimensions: `sessions` (N) one-time keys, each an `symbols` x
/// `radix` (n x t) matrix of subkeys.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SchemeParams {
    sessions: u64,
    symbols: u32,
    radix: u32,
    group: GroupParams,
    span: BigUint,
}

impl SchemeParams {
    pub fn new(sessions: u64, symbols: u32, radix: u32, lambda: u32) -> Result<Self> {
        let group = backend::setup(lambda)?;
        if sessions == 0 {
            return Err(Error::InvalidParams(
                "session count must be at least 1".into(),
            ));
        }
        if symbols == 0 {
            return Err(Error::InvalidParams(
                "symbol count n must be at least 1".into(),
            ));
        }
        if radix < 2 {
            return Err(Error::InvalidParams("radix t must be at least 2".into()));
        }
        // Cheap bound before the exact check so t^n never gets huge.
        let approx_bits = u64::from(symbols) * u64::from(32 - (radix - 1).leading_zeros());
        if approx_bits > group.order_bits() + 64 {
            return Err(Error::InvalidParams(format!(
                "t^n with t={radix}, n={symbols} exceeds the group order"
            )));
        }
        let span = BigUint::from(radix).pow(symbols);
        if BigUint::from(sessions) * &span >= *group.order() {
            return Err(Error::InvalidParams(format!(
                "N * t^n must be below the group order (N={sessions}, t={radix}, n={symbols})"
            )));
        }
        Ok(SchemeParams {
            sessions,
            symbols,
            radix,
            group,
            span,
        })
    }

    /// Parameters used throughout the benchmarks: t=4, n=32, N=8 at 256 bits.
    pub fn default_params() -> Self {
        Self::new(8, 32, 4, 256).expect("default parameters are valid")
    }

    pub fn sessions(&self) -> u64 {
        self.sessions
    }

    pub fn symbols(&self) -> u32 {
        self.symbols
    }

    pub fn radix(&self) -> u32 {
        self.radix
    }

    pub fn lambda(&self) -> u32 {
        self.group.lambda
    }

    pub fn group(&self) -> &GroupParams {
        &self.group
    }

    /// q = t * n.
    pub fn subkeys_per_session(&self) -> usize {
        self.symbols as usize * self.radix as usize
    }

    /// t^n, the number of distinct index values.
    pub fn span(&self) -> &BigUint {
        &self.span
    }

    pub fn check_session(&self, session: u64) -> Result<()> {
        if session < self.sessions {
            Ok(())
        } else {
            Err(Error::SessionOutOfRange {
                session,
                sessions: self.sessions,
            })
        }
    }

    pub(crate) fn symbols_scalar(&self) -> Scalar {
        Scalar::from_u64(u64::from(self.symbols))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        Writer::new()
            .u64(self.sessions)
            .u64(u64::from(self.symbols))
            .u64(u64::from(self.radix))
            .u64(u64::from(self.group.lambda))
            .finish()
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader::new(bytes);
        let sessions = r.u64()?;
        let narrow = |v: u64, what: &str| {
            u32::try_from(v).map_err(|_| Error::encoding(format!("{what} does not fit in 32 bits")))
        };
        let symbols = narrow(r.u64()?, "n")?;
        let radix = narrow(r.u64()?, "t")?;
        let lambda = narrow(r.u64()?, "lambda")?;
        r.finish()?;
        Self::new(sessions, symbols, radix, lambda)
    }
}

/// k = i * t^n + B, computed over the integers and then reduced.
pub fn encode_index(params: &SchemeParams, session: u64, value: &BigUint) -> Result<Scalar> {
    params.check_session(session)?;
    if value >= params.span() {
        return Err(Error::IndexOutOfRange(format!(
            "B={value} must be below t^n"
        )));
    }
    Ok(Scalar::from_biguint(
        &(BigUint::from(session) * params.span() + value),
    ))
}

/// Little-endian base-t digits of `value`, exactly n of them.
pub fn decompose(params: &SchemeParams, value: &BigUint) -> Result<Vec<u32>> {
    if value >= params.span() {
        return Err(Error::IndexOutOfRange(format!(
            "B={value} must be below t^n"
        )));
    }
    let t = BigUint::from(params.radix());
    let mut rest = value.clone();
    let mut digits = Vec::with_capacity(params.symbols() as usize);
    for _ in 0..params.symbols() {
        let d = &rest % &t;
        digits.push(d.to_u32_digits().first().copied().unwrap_or(0));
        rest /= &t;
    }
    Ok(digits)
}

pub fn recompose(params: &SchemeParams, digits: &[u32]) -> BigUint {
    let t = BigUint::from(params.radix());
    digits
        .iter()
        .rev()
        .fold(BigUint::from(0u8), |acc, &d| acc * &t + BigUint::from(d))
}
