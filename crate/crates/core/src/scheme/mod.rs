//! One-time signatures with secret key exposure.
//!
//! A session key is an `n x t` matrix of subkeys. A message selects one
//! subkey per row through a keyed hash, and the product of the selected
//! subkeys (with the session's `aux = g^r`) is the signing key for that
//! message only. Leaking the selected subkeys does not help sign a different
//! message, because a different message selects different rows.

mod keys;
mod params;
mod selection;
mod sign;

pub use keys::{
    derive_subkeys, f_map, gen_aux, gen_blinding, gen_session, keygen_setup, Blinding, KeyGenMode,
    MasterSecret, PublicKey, SessionKeyMaterial, SessionTransients,
};
pub use params::{decompose, encode_index, recompose, SchemeParams};
pub use selection::{prp_select, subset_indices, IndexSelection};
pub use sign::{
    aggregate, check_compressed, check_compressed_selected, check_full, sign_compressed, sign_full,
    verify, verify_compressed, verify_full, Rejection, Signature,
};
