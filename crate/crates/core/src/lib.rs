//! One-time signatures with secret key exposure (OTS-SKE) over BLS12-381,
//! and a deterministic simulation of a remote-attestation protocol built on
//! them.
//!
//! * [`backend`]: pairing groups, hashing into the scalar field, encodings.
//! * [`scheme`]: key generation, index selection, full and compressed
//!   signatures.
//! * [`protocol`]: key-generation co-processor, read-once oblivious memory,
//!   attestation enclave, remote verifier and an adversary harness.
//! * [`bench`]: ECDSA baseline and the timing harness.

pub mod backend;
pub mod bench;
pub mod codec;
pub mod error;
pub mod protocol;
pub mod scheme;

pub use error::{Error, Result};
