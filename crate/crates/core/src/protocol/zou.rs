//! Entanglement-free protocol runner: message blinded with a random key `r`,
//! arbitrated check of the signature equation, verdicts posted on the public
//! board, and `r` revealed only after both verdicts pass.

use crate::error::Result;
use crate::qotp::{qotp_decrypt_at, qotp_encrypt_at, KeyLabel};
use crate::register::Party;

use super::runner::{RunCore, RunOutput, SigningPayload, Strategy};
use super::{Fault, Outcome, Part, ProtocolKind, RunConfig, SignatureRecord, StepTag};

pub fn run_zou(cfg: &RunConfig) -> Result<RunOutput> {
    run_zou_with(cfg, None)
}

pub(crate) fn run_zou_with(
    cfg: &RunConfig,
    mut strategy: Option<&mut dyn Strategy>,
) -> Result<RunOutput> {
    debug_assert_eq!(cfg.protocol, ProtocolKind::Zou);
    let n = cfg.n;
    let mut core = RunCore::new(cfg, &|label| match label {
        KeyLabel::KA | KeyLabel::KAB | KeyLabel::R => 2 * n,
        KeyLabel::KB => 8 * n,
        KeyLabel::Other => 0,
    })?;

    // Signing phase. S1: three message copies, each blinded into |P'> with r.
    // S2: R_AB and S_A encryptions; everything goes to Bob.
    let payload = core.adversary_signing(&mut strategy, |core| {
        let r = core.alice.key(KeyLabel::R)?.clone();
        let k_ab = core.alice.key(KeyLabel::KAB)?.clone();
        let k_a = core.alice.key(KeyLabel::KA)?.clone();

        let mut copies = Vec::new();
        for _ in 0..3 {
            let copy = core.alloc_message_copy(Party::Alice)?;
            qotp_encrypt_at(&mut core.reg, &r, 0, &copy)?;
            copies.push(copy);
        }
        core.note_key_use(KeyLabel::R, 0, 2 * n, "blind message copies");

        let p_prime = copies.remove(0);
        let r_ab = copies.remove(0);
        qotp_encrypt_at(&mut core.reg, &k_ab, 0, &r_ab)?;
        core.note_key_use(KeyLabel::KAB, 0, 2 * n, "R_AB");
        let s_a = copies.remove(0);
        qotp_encrypt_at(&mut core.reg, &k_a, 0, &s_a)?;
        core.note_key_use(KeyLabel::KA, 0, 2 * n, "S_A");

        Ok(SigningPayload::Zou { p_prime, r_ab, s_a })
    })?;
    let SigningPayload::Zou { p_prime, r_ab, s_a } = payload else {
        unreachable!("zou runner builds a zou payload");
    };

    let delivered = core.send(
        &mut strategy,
        Party::Alice,
        Party::Bob,
        StepTag::S2,
        vec![
            Part::qubits("P'", p_prime),
            Part::qubits("R_AB", r_ab),
            Part::qubits("S_A", s_a),
        ],
    )?;
    let mut bob_p_prime = delivered[0].cloned_qubits();
    let bob_r_ab = delivered[1].cloned_qubits();
    let bob_s_a = delivered[2].cloned_qubits();

    if cfg.fault == Some(Fault::BobSubstitutesMessage) {
        let mut replaced = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = super::runner::random_qubit_amps(&mut core.adv_rng);
            replaced.push(core.reg.alloc_qubit(Party::Bob, a, b)?);
        }
        bob_p_prime = replaced;
    }

    // V1: Bob encrypts (|P'>, |S_A>) with K_B and sends the pair to the
    // arbitrator as one 2n-qubit payload.
    let k_b = core.bob.key(KeyLabel::KB)?.clone();
    qotp_encrypt_at(&mut core.reg, &k_b, 0, &bob_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &k_b, 2 * n, &bob_s_a)?;
    core.note_key_use(KeyLabel::KB, 0, 4 * n, "Y_B");
    let delivered = core.send(
        &mut strategy,
        Party::Bob,
        Party::Arbitrator,
        StepTag::V1,
        vec![
            Part::qubits("E_KB(P')", bob_p_prime),
            Part::qubits("E_KB(S_A)", bob_s_a),
        ],
    )?;
    let arb_p_prime = delivered[0].cloned_qubits();
    let arb_s_a = delivered[1].cloned_qubits();

    // V2: arbitrator decrypts and checks |S_A> = E_KA|P'> by decrypting the
    // signature copy and comparing it against the blinded message.
    let arb_k_b = core.arb.key(KeyLabel::KB)?.clone();
    let arb_k_a = core.arb.key(KeyLabel::KA)?.clone();
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 0, &arb_p_prime)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 2 * n, &arb_s_a)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_a, 0, &arb_s_a)?;
    let v_t = core.verdict_compare(&arb_s_a, &arb_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_a, 0, &arb_s_a)?;
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

    // The arbitrator regenerates Y_B with fresh pad bits and returns it.
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 4 * n, &arb_p_prime)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 6 * n, &arb_s_a)?;
    core.note_key_use(KeyLabel::KB, 4 * n, 4 * n, "regenerated Y_B");
    let delivered = core.send(
        &mut strategy,
        Party::Arbitrator,
        Party::Bob,
        StepTag::V2,
        vec![
            Part::qubits("E_KB(P')", arb_p_prime),
            Part::qubits("E_KB(S_A)", arb_s_a),
        ],
    )?;
    let ret_p_prime = delivered[0].cloned_qubits();
    let ret_s_a = delivered[1].cloned_qubits();

    // V3: Bob decrypts and checks E_KAB|P'> = |R_AB>.
    qotp_decrypt_at(&mut core.reg, &k_b, 4 * n, &ret_p_prime)?;
    qotp_decrypt_at(&mut core.reg, &k_b, 6 * n, &ret_s_a)?;
    let bob_k_ab = core.bob.key(KeyLabel::KAB)?.clone();
    qotp_encrypt_at(&mut core.reg, &bob_k_ab, 0, &ret_p_prime)?;
    let v_b = core.verdict_compare(&ret_p_prime, &bob_r_ab)?;
    qotp_decrypt_at(&mut core.reg, &bob_k_ab, 0, &ret_p_prime)?;
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

    // V4: Alice publishes r; Bob unblinds the message and stores (S_A, r).
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
    qotp_decrypt_at(&mut core.reg, &r, 0, &ret_p_prime)?;
    let reference = core.message_reference();
    let fid = core.reg.fidelity(&ret_p_prime, &reference)?;

    core.bob.held.insert("message".into(), ret_p_prime.clone());
    core.bob.held.insert("signature".into(), ret_s_a.clone());
    let record = SignatureRecord {
        protocol: ProtocolKind::Zou,
        message: ret_p_prime,
        signature: ret_s_a,
        signature_extra: Vec::new(),
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
