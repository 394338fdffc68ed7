//! Hardened entanglement-free protocol: the message is blinded with a
//! non-commutative keyed transform, Bob validates the signed message and the
//! two signature copies before anything reaches the arbitrator, keeps one
//! copy, and re-checks the returned copy against it.

use crate::error::Result;
use crate::qotp::{
    qotp_decrypt_at, qotp_encrypt_at, signing_transform, signing_untransform, KeyLabel,
    SigningMode,
};
use crate::register::Party;

use super::runner::{random_qubit_amps, RunCore, RunOutput, SigningPayload, Strategy};
use super::{Fault, Outcome, Part, ProtocolKind, RunConfig, SignatureRecord, StepTag};

const BLIND_MODE: SigningMode = SigningMode::NonCommutative;

pub fn run_improved(cfg: &RunConfig) -> Result<RunOutput> {
    run_improved_with(cfg, None)
}

pub(crate) fn run_improved_with(
    cfg: &RunConfig,
    mut strategy: Option<&mut dyn Strategy>,
) -> Result<RunOutput> {
    debug_assert_eq!(cfg.protocol, ProtocolKind::Improved);
    let n = cfg.n;
    let r_bits = BLIND_MODE.bits_per_qubit() * n;
    let mut core = RunCore::new(cfg, &|label| match label {
        KeyLabel::KA | KeyLabel::KAB => 2 * n,
        KeyLabel::KB => 8 * n,
        KeyLabel::R => r_bits,
        KeyLabel::Other => 0,
    })?;

    // S1: four copies, each blinded with the non-commutative M_r.
    // S2: R_AB plus two ciphertext copies of the signature, same pad.
    let payload = core.adversary_signing(&mut strategy, |core| {
        let r = core.alice.key(KeyLabel::R)?.clone();
        let k_ab = core.alice.key(KeyLabel::KAB)?.clone();
        let k_a = core.alice.key(KeyLabel::KA)?.clone();

        let mut copies = Vec::new();
        for _ in 0..4 {
            let copy = core.alloc_message_copy(Party::Alice)?;
            signing_transform(&mut core.reg, &r, 0, &copy, BLIND_MODE)?;
            copies.push(copy);
        }
        core.note_key_use(KeyLabel::R, 0, r_bits, "blind message copies (M_r)");

        let p_prime = copies.remove(0);
        let r_ab = copies.remove(0);
        qotp_encrypt_at(&mut core.reg, &k_ab, 0, &r_ab)?;
        core.note_key_use(KeyLabel::KAB, 0, 2 * n, "R_AB");
        let s_a1 = copies.remove(0);
        qotp_encrypt_at(&mut core.reg, &k_a, 0, &s_a1)?;
        let s_a2 = copies.remove(0);
        qotp_encrypt_at(&mut core.reg, &k_a, 0, &s_a2)?;
        core.note_key_use(KeyLabel::KA, 0, 2 * n, "S_A twice, same pad");

        Ok(SigningPayload::Improved {
            p_prime,
            r_ab,
            s_a1,
            s_a2,
        })
    })?;
    let SigningPayload::Improved {
        p_prime,
        r_ab,
        s_a1,
        s_a2,
    } = payload
    else {
        unreachable!("improved runner builds an improved payload");
    };

    let delivered = core.send(
        &mut strategy,
        Party::Alice,
        Party::Bob,
        StepTag::S2,
        vec![
            Part::qubits("P'", p_prime),
            Part::qubits("R_AB", r_ab),
            Part::qubits("S_A1", s_a1),
            Part::qubits("S_A2", s_a2),
        ],
    )?;
    let mut bob_p_prime = delivered[0].cloned_qubits();
    let bob_r_ab = delivered[1].cloned_qubits();
    let bob_s_a1 = delivered[2].cloned_qubits();
    let bob_s_a2 = delivered[3].cloned_qubits();

    if cfg.fault == Some(Fault::BobSubstitutesMessage) {
        let mut replaced = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = random_qubit_amps(&mut core.adv_rng);
            replaced.push(core.reg.alloc_qubit(Party::Bob, a, b)?);
        }
        bob_p_prime = replaced;
    }

    // V1 pre-send check: E_KAB|P'> must equal |R_AB> and the two signature
    // copies must be identical. Failure terminates before anything reaches
    // the arbitrator.
    let bob_k_ab = core.bob.key(KeyLabel::KAB)?.clone();
    qotp_encrypt_at(&mut core.reg, &bob_k_ab, 0, &bob_p_prime)?;
    let check_message = core.verdict_compare(&bob_p_prime, &bob_r_ab)?;
    qotp_decrypt_at(&mut core.reg, &bob_k_ab, 0, &bob_p_prime)?;
    let check_copies = core.verdict_compare(&bob_s_a1, &bob_s_a2)?;
    core.note_internal(
        Party::Bob,
        StepTag::V1,
        "pre-send check",
        format!(
            "message={} copies={}",
            u8::from(check_message),
            u8::from(check_copies)
        ),
    );
    if !(check_message && check_copies) {
        return Ok(core.finish(
            None,
            None,
            None,
            Outcome::Aborted,
            Some(StepTag::V1),
            None,
            None,
        ));
    }

    // Bob keeps |S_A>_2 and forwards E_KB(|P'>, |S_A>_1).
    core.bob.held.insert("s_a2".into(), bob_s_a2.clone());
    let k_b = core.bob.key(KeyLabel::KB)?.clone();
    qotp_encrypt_at(&mut core.reg, &k_b, 0, &bob_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &k_b, 2 * n, &bob_s_a1)?;
    core.note_key_use(KeyLabel::KB, 0, 4 * n, "Y_B");
    let delivered = core.send(
        &mut strategy,
        Party::Bob,
        Party::Arbitrator,
        StepTag::V1,
        vec![
            Part::qubits("E_KB(P')", bob_p_prime),
            Part::qubits("E_KB(S_A1)", bob_s_a1),
        ],
    )?;
    let arb_p_prime = delivered[0].cloned_qubits();
    let arb_s_a1 = delivered[1].cloned_qubits();

    // V2: arbitrated signature-equation check, verdict on the board, payload
    // returned under fresh pad bits.
    let arb_k_b = core.arb.key(KeyLabel::KB)?.clone();
    let arb_k_a = core.arb.key(KeyLabel::KA)?.clone();
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 0, &arb_p_prime)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 2 * n, &arb_s_a1)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_a, 0, &arb_s_a1)?;
    let v_t = core.verdict_compare(&arb_s_a1, &arb_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_a, 0, &arb_s_a1)?;
    core.post(Party::Arbitrator, format!("V_T={}", u8::from(v_t)));

    if !v_t {
        return Ok(core.finish(
            None,
            Some(false),
            None,
            Outcome::Aborted,
            Some(StepTag::V2),
            None,
            None,
        ));
    }

    qotp_encrypt_at(&mut core.reg, &arb_k_b, 4 * n, &arb_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 6 * n, &arb_s_a1)?;
    core.note_key_use(KeyLabel::KB, 4 * n, 4 * n, "regenerated Y_B");
    let delivered = core.send(
        &mut strategy,
        Party::Arbitrator,
        Party::Bob,
        StepTag::V2,
        vec![
            Part::qubits("E_KB(P')", arb_p_prime),
            Part::qubits("E_KB(S_A1)", arb_s_a1),
        ],
    )?;
    let ret_p_prime = delivered[0].cloned_qubits();
    let ret_s_a1 = delivered[1].cloned_qubits();

    // V3: Bob re-checks the message binding and compares the returned
    // signature copy against the one he kept.
    qotp_decrypt_at(&mut core.reg, &k_b, 4 * n, &ret_p_prime)?;
    qotp_decrypt_at(&mut core.reg, &k_b, 6 * n, &ret_s_a1)?;
    qotp_encrypt_at(&mut core.reg, &bob_k_ab, 0, &ret_p_prime)?;
    let check_message = core.verdict_compare(&ret_p_prime, &bob_r_ab)?;
    qotp_decrypt_at(&mut core.reg, &bob_k_ab, 0, &ret_p_prime)?;
    let check_copies = core.verdict_compare(&ret_s_a1, &bob_s_a2)?;
    let v_b = check_message && check_copies;
    core.post(Party::Bob, format!("V_B={}", u8::from(v_b)));

    if !v_b {
        return Ok(core.finish(
            None,
            Some(true),
            Some(false),
            Outcome::Rejected,
            Some(StepTag::V3),
            None,
            None,
        ));
    }

    // V4: Alice publishes r; Bob inverts M_r and stores the full record.
    if cfg.fault == Some(Fault::AliceWithholdsR) {
        return Ok(core.finish(
            None,
            Some(true),
            Some(true),
            Outcome::Aborted,
            None,
            None,
            None,
        ));
    }
    let r = core.alice.key(KeyLabel::R)?.clone();
    core.post(Party::Alice, format!("r={}", r.to_hex()));
    signing_untransform(&mut core.reg, &r, 0, &ret_p_prime, BLIND_MODE)?;
    let reference = core.message_reference();
    let fid = core.reg.fidelity(&ret_p_prime, &reference)?;

    core.bob.held.insert("message".into(), ret_p_prime.clone());
    core.bob.held.insert("signature".into(), ret_s_a1.clone());
    let record = SignatureRecord {
        protocol: ProtocolKind::Improved,
        message: ret_p_prime,
        signature: ret_s_a1,
        signature_extra: bob_s_a2,
        r: Some(r),
    };

    Ok(core.finish(
        None,
        Some(true),
        Some(true),
        Outcome::Accepted,
        None,
        Some(fid),
        Some(record),
    ))
}
