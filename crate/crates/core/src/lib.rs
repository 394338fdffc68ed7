//! Multi-party simulator for arbitrated quantum signature protocols.
//!
//! The crate provides:
//!
//! * an exact state-vector register with entanglement-class tracking,
//!   Bell-basis measurement, and teleportation corrections ([`register`]);
//! * the quantum one-time pad, the keyed signing transform, and the
//!   Bell-state key-inference map ([`qotp`]);
//! * exact and swap-test state comparison ([`compare`]);
//! * deterministic runners for three signature protocols over interceptable
//!   channels and a public board, plus dispute resolution ([`protocol`]);
//! * the key-extraction, total-break, and disturbance adversaries as
//!   pluggable strategies ([`attack`]);
//! * named, reproducible scenarios for the command line and bindings
//!   ([`scenario`]).
//!
//! Every run is driven by a single seed: the same configuration produces a
//! byte-identical serialized transcript.

pub mod attack;
pub mod compare;
pub mod error;
pub mod pauli;
pub mod protocol;
pub mod qotp;
pub mod register;
pub mod scenario;

pub use error::{Error, Result};
pub use pauli::{PauliWord, Phase};
pub use register::{teleport_correction, BellKind, Party, QubitHandle, StateRegister};
