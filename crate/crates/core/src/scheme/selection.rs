use num_bigint::BigUint;

use crate::backend::{hash_to_scalar, TAG_PRP};
use crate::error::Result;
use crate::scheme::params::{decompose, SchemeParams};

/// A message-dependent choice of one subkey per digit position.
///
/// `value` is B in `[0, t^n)`, `digits` its base-t expansion and `indices`
/// the flat subkey indices `t*j + b_j`. `key` is the selection key carried in
/// the signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexSelection {
    value: BigUint,
    digits: Vec<u32>,
    indices: Vec<usize>,
    key: Vec<u8>,
}

impl IndexSelection {
    pub fn from_value(params: &SchemeParams, value: BigUint, key: Vec<u8>) -> Result<Self> {
        let digits = decompose(params, &value)?;
        let indices = subset_indices(params, &digits);
        Ok(IndexSelection {
            value,
            digits,
            indices,
            key,
        })
    }

    /// Hashes `parts` under `tag` into a selection value. The scalar's
    /// canonical integer is reduced modulo t^n, which keeps its low
    /// `n * log2(t)` bits whenever t is a power of two.
    pub fn derive(params: &SchemeParams, tag: &str, parts: &[&[u8]], key: Vec<u8>) -> Self {
        let value = hash_to_scalar(tag, parts).to_biguint() % params.span();
        Self::from_value(params, value, key).expect("value reduced below t^n")
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn key(&self) -> &[u8] {
        &self.key
    }
}

/// φ: digit vector to the index set `{t*j + b_j}`.
pub fn subset_indices(params: &SchemeParams, digits: &[u32]) -> Vec<usize> {
    let t = params.radix() as usize;
    digits
        .iter()
        .enumerate()
        .map(|(j, &b)| t * j + b as usize)
        .collect()
}

/// Standalone selection: B = PRP(key; M).
pub fn prp_select(params: &SchemeParams, key: &[u8], msg: &[u8]) -> IndexSelection {
    IndexSelection::derive(params, TAG_PRP, &[key, msg], key.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Scalar;
    use proptest::prelude::*;

    #[test]
    fn phi_example() {
        let p = SchemeParams::new(1, 3, 4, 256).unwrap();
        let sel = IndexSelection::from_value(&p, BigUint::from(6u8), vec![]).unwrap();
        assert_eq!(sel.digits(), &[2, 1, 0]);
        assert_eq!(sel.indices(), &[2, 5, 8]);
    }

    #[test]
    fn deterministic() {
        let p = SchemeParams::default_params();
        assert_eq!(
            prp_select(&p, b"key", b"msg"),
            prp_select(&p, b"key", b"msg")
        );
        assert_ne!(
            prp_select(&p, b"key", b"msg").value(),
            prp_select(&p, b"key", b"msh").value()
        );
    }

    #[test]
    fn value_is_low_bits_of_hash() {
        // Oracle: recompute the PRP scalar and mask its canonical bytes.
        let p = SchemeParams::default_params();
        let (key, msg) = (b"0123456789abcdef", b"fedcba9876543210");
        let scalar: Scalar = hash_to_scalar(TAG_PRP, &[key, msg]);
        let low = u64::from_le_bytes(scalar.to_bytes()[..8].try_into().unwrap());
        assert_eq!(prp_select(&p, key, msg).value(), &BigUint::from(low));
    }

    proptest! {
        #[test]
        fn one_index_per_block(key in proptest::collection::vec(any::<u8>(), 0..32),
                               msg in proptest::collection::vec(any::<u8>(), 0..64),
                               t in 2u32..7, n in 1u32..40) {
            let p = SchemeParams::new(1, n, t, 256).unwrap();
            let sel = prp_select(&p, &key, &msg);
            prop_assert_eq!(sel.indices().len(), n as usize);
            for (j, &idx) in sel.indices().iter().enumerate() {
                prop_assert!(idx >= t as usize * j && idx < t as usize * (j + 1));
            }
            prop_assert!(sel.indices().iter().all(|&i| i < p.subkeys_per_session()));
        }
    }
}
