//! Arbitrated dispute resolution over a stored signature record: re-derive
//! the blinded message from (message, r) and check the signature equation
//! under the arbitrator's copy of K_A.

use crate::compare::state_compare;
use crate::error::{Error, Result};
use crate::qotp::{
    qotp_decrypt_at, qotp_encrypt_at, signing_transform, signing_untransform, KeyLabel,
    SigningMode,
};
use crate::register::StateRegister;

use super::{PartyState, ProtocolKind, SignatureRecord};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ruling {
    SignatureValid,
    SignatureInvalid,
}

impl Ruling {
    pub fn name(self) -> &'static str {
        match self {
            Ruling::SignatureValid => "signature_valid",
            Ruling::SignatureInvalid => "signature_invalid",
        }
    }
}

impl std::fmt::Display for Ruling {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Recompute |P'> from the stored message and r, check the signature
/// equation with K_A, and restore the record's states. Non-destructive in
/// exact comparison.
pub fn resolve_dispute(
    reg: &mut StateRegister,
    record: &SignatureRecord,
    arbitrator: &PartyState,
    tolerance: f64,
) -> Result<Ruling> {
    let r = record.r.as_ref().ok_or(Error::MissingDisputeKey)?;
    let k_a = arbitrator.key(KeyLabel::KA)?.clone();

    let blinded_forward = |reg: &mut StateRegister| -> Result<()> {
        match record.protocol {
            ProtocolKind::Zou => qotp_encrypt_at(reg, r, 0, &record.message),
            ProtocolKind::Improved => {
                signing_transform(reg, r, 0, &record.message, SigningMode::NonCommutative)
            }
            ProtocolKind::LiBell => Err(Error::MissingDisputeKey),
        }
    };
    let blinded_back = |reg: &mut StateRegister| -> Result<()> {
        match record.protocol {
            ProtocolKind::Zou => qotp_decrypt_at(reg, r, 0, &record.message),
            ProtocolKind::Improved => {
                signing_untransform(reg, r, 0, &record.message, SigningMode::NonCommutative)
            }
            ProtocolKind::LiBell => unreachable!(),
        }
    };

    blinded_forward(reg)?;
    qotp_encrypt_at(reg, &k_a, 0, &record.message)?;
    let valid = state_compare(reg, &record.signature, &record.message, tolerance)?;
    qotp_decrypt_at(reg, &k_a, 0, &record.message)?;
    blinded_back(reg)?;

    Ok(if valid {
        Ruling::SignatureValid
    } else {
        Ruling::SignatureInvalid
    })
}
