use crate::backend::{Repr, SourceElement, G1_BYTES, G2_BYTES};
use crate::codec::{Reader, Writer};
use crate::error::{Error, Result};
use crate::protocol::Measurement;

pub const QUOTE_VERSION: u8 = 1;

/// Attestation response `(ctr, (y, z), MR_RAEnc, MR_app, R)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quote {
    pub ctr: u64,
    pub y: SourceElement,
    pub z: SourceElement,
    pub mr_raenc: Measurement,
    pub mr_app: Measurement,
    pub result: Vec<u8>,
}

impl Quote {
    /// `[u8 version][u64 ctr][32B MR_RAEnc][32B MR_app][u64 len][R][48B y][96B z]`,
    /// big-endian.
    pub fn encode(&self) -> Vec<u8> {
        let mut w = Writer::new();
        w.u8(QUOTE_VERSION).u64(self.ctr);
        let mut out = w.finish();
        out.extend_from_slice(self.mr_raenc.as_bytes());
        out.extend_from_slice(self.mr_app.as_bytes());
        out.extend_from_slice(&(self.result.len() as u64).to_be_bytes());
        out.extend_from_slice(&self.result);
        out.extend_from_slice(&self.y.to_bytes());
        out.extend_from_slice(&self.z.to_bytes());
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Quote> {
        let mut r = Reader::new(bytes);
        let version = r.u8()?;
        if version != QUOTE_VERSION {
            return Err(Error::encoding(format!(
                "unsupported quote version {version}"
            )));
        }
        let ctr = r.u64()?;
        let mr_raenc = Measurement(r.array()?);
        let mr_app = Measurement(r.array()?);
        let len = usize::try_from(r.u64()?).map_err(|_| Error::encoding("result too long"))?;
        let result = r.bytes(len)?.to_vec();
        let y = SourceElement::from_bytes(Repr::First, r.bytes(G1_BYTES)?)?;
        let z = SourceElement::from_bytes(Repr::Second, r.bytes(G2_BYTES)?)?;
        r.finish()?;
        Ok(Quote {
            ctr,
            y,
            z,
            mr_raenc,
            mr_app,
            result,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{setup, Scalar};
    use crate::protocol::measure;

    fn sample() -> Quote {
        let group = setup(256).unwrap();
        let g = group.generator();
        Quote {
            ctr: 3,
            y: g.to_first().unwrap().exp(&Scalar::from_u64(5)),
            z: group.second_generator().exp(&Scalar::from_u64(7)),
            mr_raenc: measure(b"ra"),
            mr_app: measure(b"app"),
            result: b"result bytes".to_vec(),
        }
    }

    #[test]
    fn layout() {
        let q = sample();
        let bytes = q.encode();
        assert_eq!(bytes.len(), 1 + 8 + 32 + 32 + 8 + 12 + 48 + 96);
        assert_eq!(bytes[0], 1);
        assert_eq!(&bytes[1..9], &3u64.to_be_bytes());
        assert_eq!(&bytes[9..41], measure(b"ra").as_bytes());
        assert_eq!(Quote::decode(&bytes).unwrap(), q);
    }

    #[test]
    fn decode_errors() {
        let bytes = sample().encode();
        assert!(Quote::decode(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes.clone();
        bad[0] = 2;
        assert!(Quote::decode(&bad).is_err());
        let mut trailing = bytes.clone();
        trailing.push(0);
        assert!(Quote::decode(&trailing).is_err());
        let mut bad_point = bytes.clone();
        let n = bad_point.len();
        bad_point[n - 96..].fill(0xff);
        assert!(Quote::decode(&bad_point).is_err());
        let mut huge = bytes;
        huge[73..81].copy_from_slice(&u64::MAX.to_be_bytes());
        assert!(Quote::decode(&huge).is_err());
    }
}
