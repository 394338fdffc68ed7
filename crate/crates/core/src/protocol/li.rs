//! Bell-state protocol runner: shared pairs, keyed signing transform,
//! per-qubit Bell measurement of the second message copy, arbitrated
//! verification, and teleportation recovery on Bob's side.
//!
//! Measurement outcomes are carried both as classical transcript entries and
//! as fresh Bell pairs whenever they travel inside a quantum payload; the
//! four Bell states are mutually orthogonal, so the dual encoding is
//! faithful.

use crate::error::Result;
use crate::qotp::{
    qotp_decrypt_at, qotp_encrypt_at, signing_transform, signing_untransform, KeyLabel,
    SigningMode,
};
use crate::register::{teleport_correction, BellKind, Party, QubitHandle};

use super::runner::{random_qubit_amps, RunCore, RunOutput, SigningPayload, Strategy};
use super::{Fault, Outcome, Part, ProtocolKind, RunConfig, SignatureRecord, StepTag};

const MODE: SigningMode = SigningMode::PaperExample;

fn kinds_text(kinds: &[BellKind]) -> String {
    kinds
        .iter()
        .map(|k| k.label())
        .collect::<Vec<_>>()
        .join(",")
}

pub fn run_li_bell(cfg: &RunConfig) -> Result<RunOutput> {
    run_li_with(cfg, None)
}

pub(crate) fn run_li_with(
    cfg: &RunConfig,
    mut strategy: Option<&mut dyn Strategy>,
) -> Result<RunOutput> {
    debug_assert_eq!(cfg.protocol, ProtocolKind::LiBell);
    let n = cfg.n;
    let m_bits = MODE.bits_per_qubit() * n;
    let mut core = RunCore::new(cfg, &|label| match label {
        KeyLabel::KA => m_bits + 6 * n,
        KeyLabel::KB => 20 * n + 2,
        _ => 0,
    })?;

    // Initializing: n shared phi+ pairs, first half to Alice, second to Bob.
    let mut alice_halves = Vec::with_capacity(n);
    let mut bob_halves = Vec::with_capacity(n);
    for _ in 0..n {
        let (a, b) = core.reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
        alice_halves.push(a);
        bob_halves.push(b.owned_by(Party::Bob));
    }
    core.alice.held.insert("shared".into(), alice_halves.clone());
    core.bob.held.insert("shared".into(), bob_halves.clone());

    // Signing phase S1-S4 (honest), producing the S5 payload.
    let payload = core.adversary_signing(&mut strategy, |core| {
        let k_a = core.alice.key(KeyLabel::KA)?.clone();

        let copy1 = core.alloc_message_copy(Party::Alice)?;
        let copy2 = core.alloc_message_copy(Party::Alice)?;
        let copy3 = core.alloc_message_copy(Party::Alice)?;

        // S2: |R_A> = M_KA applied to the first copy.
        signing_transform(&mut core.reg, &k_a, 0, &copy1, MODE)?;
        core.note_key_use(KeyLabel::KA, 0, m_bits, "signing transform");
        let r_a = copy1;

        // S3: Bell-measure each (message qubit, own half) pair.
        let shared = core.alice.held.get("shared").cloned().unwrap_or_default();
        let mut kinds = Vec::with_capacity(n);
        for (m, a) in copy2.iter().zip(&shared) {
            kinds.push(core.reg.bell_measure(*m, *a)?);
        }
        core.note_internal(Party::Alice, StepTag::S3, "M_A", kinds_text(&kinds));

        // Outcomes as quantum payload: one fresh pair per measured kind.
        let mut m_a = Vec::with_capacity(2 * n);
        for &k in &kinds {
            let (x, y) = core.reg.make_bell_pair(Party::Alice, k);
            m_a.push(x);
            m_a.push(y);
        }

        // S4: |S> = E_KA(M_A, R_A).
        let mut s_qubits = m_a;
        s_qubits.extend_from_slice(&r_a);
        qotp_encrypt_at(&mut core.reg, &k_a, m_bits, &s_qubits)?;
        core.note_key_use(KeyLabel::KA, m_bits, 6 * n, "S");

        Ok(SigningPayload::Li {
            signature: s_qubits,
            message: copy3,
        })
    })?;
    let SigningPayload::Li { signature, message } = payload else {
        unreachable!("li runner builds a li payload");
    };

    // S5: signature and third message copy to Bob.
    let delivered = core.send(
        &mut strategy,
        Party::Alice,
        Party::Bob,
        StepTag::S5,
        vec![Part::qubits("S", signature), Part::qubits("P", message)],
    )?;
    let bob_s = delivered[0].cloned_qubits();
    let bob_p = delivered[1].cloned_qubits();

    // V1: Bob encrypts everything with K_B and forwards it.
    let k_b = core.bob.key(KeyLabel::KB)?.clone();
    qotp_encrypt_at(&mut core.reg, &k_b, 0, &bob_s)?;
    qotp_encrypt_at(&mut core.reg, &k_b, 6 * n, &bob_p)?;
    core.note_key_use(KeyLabel::KB, 0, 8 * n, "Y_B");
    let delivered = core.send(
        &mut strategy,
        Party::Bob,
        Party::Arbitrator,
        StepTag::V1,
        vec![
            Part::qubits("E_KB(S)", bob_s),
            Part::qubits("E_KB(P)", bob_p),
        ],
    )?;
    let arb_s = delivered[0].cloned_qubits();
    let arb_p = delivered[1].cloned_qubits();

    // V2: decrypt both layers, read the measurement outcomes, and compare
    // |R_A> against M_KA|P>.
    let arb_k_b = core.arb.key(KeyLabel::KB)?.clone();
    let arb_k_a = core.arb.key(KeyLabel::KA)?.clone();
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 0, &arb_s)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_b, 6 * n, &arb_p)?;
    qotp_decrypt_at(&mut core.reg, &arb_k_a, m_bits, &arb_s)?;

    let (m_a_qubits, r_a_qubits) = arb_s.split_at(2 * n);
    let mut kinds = Vec::with_capacity(n);
    for pair in m_a_qubits.chunks(2) {
        kinds.push(core.reg.bell_measure(pair[0], pair[1])?);
    }
    core.note_internal(Party::Arbitrator, StepTag::V2, "M_A", kinds_text(&kinds));

    let mut r_a_qubits: Vec<QubitHandle> = r_a_qubits.to_vec();
    if cfg.fault == Some(Fault::ArbitratorSubstitutesRa) {
        let mut replaced = Vec::with_capacity(n);
        for _ in 0..n {
            let (a, b) = random_qubit_amps(&mut core.adv_rng);
            replaced.push(core.reg.alloc_qubit(Party::Arbitrator, a, b)?);
        }
        r_a_qubits = replaced;
    }

    signing_transform(&mut core.reg, &arb_k_a, 0, &arb_p, MODE)?;
    let v = core.verdict_compare(&r_a_qubits, &arb_p)?;
    signing_untransform(&mut core.reg, &arb_k_a, 0, &arb_p, MODE)?;
    core.note_internal(Party::Arbitrator, StepTag::V2, "V", u8::from(v).to_string());

    // V3: rebuild the payload. Outcomes are re-prepared as fresh pairs, one
    // set for Bob and one inside the reassembled |S>; V rides along as one
    // encrypted qubit.
    let mut return_kinds = kinds.clone();
    if cfg.fault == Some(Fault::CorruptReturnedBellKind) {
        let (flip, phase) = return_kinds[0].flip_phase();
        return_kinds[0] = BellKind::from_flip_phase(!flip, phase);
    }
    let mut m_a_for_bob = Vec::with_capacity(2 * n);
    for &k in &return_kinds {
        let (x, y) = core.reg.make_bell_pair(Party::Arbitrator, k);
        m_a_for_bob.push(x);
        m_a_for_bob.push(y);
    }
    let mut s_rebuilt = Vec::with_capacity(3 * n);
    for &k in &kinds {
        let (x, y) = core.reg.make_bell_pair(Party::Arbitrator, k);
        s_rebuilt.push(x);
        s_rebuilt.push(y);
    }
    s_rebuilt.extend_from_slice(&r_a_qubits);
    qotp_encrypt_at(&mut core.reg, &arb_k_a, m_bits, &s_rebuilt)?;

    let one = num_complex::Complex64::new(1.0, 0.0);
    let zero = num_complex::Complex64::new(0.0, 0.0);
    let v_qubit = if v {
        core.reg.alloc_qubit(Party::Arbitrator, zero, one)?
    } else {
        core.reg.alloc_qubit(Party::Arbitrator, one, zero)?
    };

    qotp_encrypt_at(&mut core.reg, &arb_k_b, 8 * n, &m_a_for_bob)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 12 * n, &s_rebuilt)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 18 * n, &arb_p)?;
    qotp_encrypt_at(&mut core.reg, &arb_k_b, 20 * n, &[v_qubit])?;
    core.note_key_use(KeyLabel::KB, 8 * n, 12 * n + 2, "Y_TB");
    let delivered = core.send(
        &mut strategy,
        Party::Arbitrator,
        Party::Bob,
        StepTag::V3,
        vec![
            Part::qubits("E_KB(M_A)", m_a_for_bob),
            Part::qubits("E_KB(S)", s_rebuilt),
            Part::qubits("E_KB(P)", arb_p),
            Part::qubits("E_KB(V)", vec![v_qubit]),
        ],
    )?;
    let ret_m_a = delivered[0].cloned_qubits();
    let ret_s = delivered[1].cloned_qubits();
    let ret_p = delivered[2].cloned_qubits();
    let ret_v = delivered[3].cloned_qubits();

    // V4: Bob decrypts and checks the verification parameter.
    qotp_decrypt_at(&mut core.reg, &k_b, 8 * n, &ret_m_a)?;
    qotp_decrypt_at(&mut core.reg, &k_b, 12 * n, &ret_s)?;
    qotp_decrypt_at(&mut core.reg, &k_b, 18 * n, &ret_p)?;
    qotp_decrypt_at(&mut core.reg, &k_b, 20 * n, &ret_v)?;
    let v_bit = core.reg.measure_qubit(ret_v[0])?;
    core.note_internal(Party::Bob, StepTag::V4, "V", u8::from(v_bit).to_string());
    if !v_bit {
        return Ok(core.finish(
            Some(false),
            None,
            None,
            Outcome::Rejected,
            Some(StepTag::V4),
            None,
            None,
        ));
    }

    // V5: read the outcomes, correct the shared halves, and compare the
    // teleported copy with the returned one.
    let mut bob_kinds = Vec::with_capacity(n);
    for pair in ret_m_a.chunks(2) {
        bob_kinds.push(core.reg.bell_measure(pair[0], pair[1])?);
    }
    core.note_internal(Party::Bob, StepTag::V5, "M_A", kinds_text(&bob_kinds));
    let shared = core.bob.held.get("shared").cloned().unwrap_or_default();
    for (half, &kind) in shared.iter().zip(&bob_kinds) {
        core.reg.apply_pauli(*half, teleport_correction(kind))?;
    }
    let teleported = shared;
    let equal = core.verdict_compare(&teleported, &ret_p)?;
    if !equal {
        return Ok(core.finish(
            Some(true),
            None,
            None,
            Outcome::Rejected,
            Some(StepTag::V5),
            None,
            None,
        ));
    }

    let reference = core.message_reference();
    let fid = core.reg.fidelity(&teleported, &reference)?;
    core.bob.held.insert("message".into(), ret_p.clone());
    core.bob.held.insert("signature".into(), ret_s.clone());
    core.bob.held.insert("teleported".into(), teleported);
    let record = SignatureRecord {
        protocol: ProtocolKind::LiBell,
        message: ret_p,
        signature: ret_s,
        signature_extra: Vec::new(),
        r: None,
    };

    Ok(core.finish(
        Some(true),
        None,
        None,
        Outcome::Accepted,
        None,
        Some(fid),
        Some(record),
    ))
}
