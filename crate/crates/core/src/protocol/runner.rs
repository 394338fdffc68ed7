//! Shared run machinery: deterministic key/message setup, the channel tap,
//! verdict comparison under either compare mode, and transcript recording.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::compare::{state_compare, swap_test_compare};
use crate::error::Result;
use crate::qotp::{Key, KeyLabel};
use crate::register::{Party, QubitHandle, StateRegister};

use super::{
    ChannelMessage, CompareMode, Entry, KeyUse, MessageSpec, Outcome, Part, PartData, PartyState,
    PublicBoard, RecordedMessage, RunConfig, SignatureRecord, StepTag, Transcript,
};

/// Honest signing-phase output that an adversarial Alice may replace or
/// rewrite before it leaves her lab.
#[derive(Debug)]
pub enum SigningPayload {
    Li {
        signature: Vec<QubitHandle>,
        message: Vec<QubitHandle>,
    },
    Zou {
        p_prime: Vec<QubitHandle>,
        r_ab: Vec<QubitHandle>,
        s_a: Vec<QubitHandle>,
    },
    Improved {
        p_prime: Vec<QubitHandle>,
        r_ab: Vec<QubitHandle>,
        s_a1: Vec<QubitHandle>,
        s_a2: Vec<QubitHandle>,
    },
}

/// What an adversary strategy can see and touch: the register, Alice's own
/// state, its own seeded randomness, and the run parameters. Other parties'
/// keys are unreachable by construction, so anything a strategy recovers must
/// come from intercepted payloads and Alice's own material.
pub struct AdvCtx<'a> {
    pub reg: &'a mut StateRegister,
    pub alice: &'a mut PartyState,
    pub rng: &'a mut ChaCha12Rng,
    pub n: usize,
    pub message_amps: &'a [(Complex64, Complex64)],
}

/// Adversarial behavior plugged into a runner: a signing-phase override or
/// rewrite on Alice's side, plus a tap on every channel message. Honest runs
/// install no strategy.
pub trait Strategy {
    /// Replace Alice's entire signing phase. Returning `Some` skips the
    /// honest signing steps (the verifying phase still runs unchanged).
    fn preempt_signing(&mut self, _ctx: &mut AdvCtx<'_>) -> Result<Option<SigningPayload>> {
        Ok(None)
    }

    /// Rewrite parts of the honestly constructed signing payload before it is
    /// sent.
    fn mutate_signing(
        &mut self,
        _ctx: &mut AdvCtx<'_>,
        _payload: &mut SigningPayload,
    ) -> Result<()> {
        Ok(())
    }

    /// Observe or rewrite a message in flight.
    fn tap(&mut self, _ctx: &mut AdvCtx<'_>, _msg: &mut ChannelMessage) -> Result<()> {
        Ok(())
    }
}

/// Everything a completed run hands back: the transcript, the stored
/// signature record (accepted runs only), and the final world state needed
/// for dispute resolution and report checks.
pub struct RunOutput {
    pub transcript: Transcript,
    pub record: Option<SignatureRecord>,
    pub register: StateRegister,
    pub alice: PartyState,
    pub bob: PartyState,
    pub arbitrator: PartyState,
    pub message_amps: Vec<(Complex64, Complex64)>,
}

pub(crate) struct RunCore {
    pub reg: StateRegister,
    pub cfg: RunConfig,
    pub message_amps: Vec<(Complex64, Complex64)>,
    pub alice: PartyState,
    pub bob: PartyState,
    pub arb: PartyState,
    pub board: PublicBoard,
    pub messages: Vec<RecordedMessage>,
    pub key_uses: Vec<KeyUse>,
    pub adv_rng: ChaCha12Rng,
}

/// Haar-random single-qubit amplitudes with the global phase fixed so the
/// |0> amplitude is real and non-negative.
pub(crate) fn random_qubit_amps<R: Rng>(rng: &mut R) -> (Complex64, Complex64) {
    let cos_theta: f64 = 1.0 - 2.0 * rng.random::<f64>();
    let half = (cos_theta.clamp(-1.0, 1.0)).acos() / 2.0;
    let phi = rng.random::<f64>() * std::f64::consts::TAU;
    (
        Complex64::new(half.cos(), 0.0),
        Complex64::from_polar(half.sin(), phi),
    )
}

impl RunCore {
    /// Validate the config and set up parties, keys, and the message.
    /// `key_budget(label) -> bits` sizes each key for the protocol at hand.
    pub fn new(cfg: &RunConfig, key_budget: &dyn Fn(KeyLabel) -> usize) -> Result<RunCore> {
        cfg.validate()?;
        let reg = StateRegister::new(cfg.seed);
        // Keys and message amplitudes come from a stream separate from the
        // measurement RNG so transcripts stay stable under protocol edits.
        let mut data_rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(0x5e1f_5eed));
        let adv_rng = ChaCha12Rng::seed_from_u64(cfg.seed.wrapping_add(0x00ad_7e55));

        let message_amps: Vec<(Complex64, Complex64)> = match &cfg.message {
            MessageSpec::Random => (0..cfg.n).map(|_| random_qubit_amps(&mut data_rng)).collect(),
            MessageSpec::Explicit(amps) => amps.clone(),
        };

        let mut alice = PartyState::new(Party::Alice);
        let mut bob = PartyState::new(Party::Bob);
        let mut arb = PartyState::new(Party::Arbitrator);

        for label in [KeyLabel::KA, KeyLabel::KB, KeyLabel::KAB, KeyLabel::R] {
            let len = key_budget(label);
            if len == 0 {
                continue;
            }
            let key = Key::random(label, len, &mut data_rng);
            match label {
                KeyLabel::KA => {
                    alice.keys.insert(label, key.clone());
                    arb.keys.insert(label, key);
                }
                KeyLabel::KB => {
                    bob.keys.insert(label, key.clone());
                    arb.keys.insert(label, key);
                }
                KeyLabel::KAB => {
                    alice.keys.insert(label, key.clone());
                    bob.keys.insert(label, key);
                }
                KeyLabel::R => {
                    alice.keys.insert(label, key);
                }
                KeyLabel::Other => {}
            }
        }

        Ok(RunCore {
            reg,
            cfg: cfg.clone(),
            message_amps,
            alice,
            bob,
            arb,
            board: PublicBoard::default(),
            messages: Vec::new(),
            key_uses: Vec::new(),
            adv_rng,
        })
    }

    pub fn alloc_message_copy(&mut self, owner: Party) -> Result<Vec<QubitHandle>> {
        let amps = self.message_amps.clone();
        amps.iter()
            .map(|&(a, b)| self.reg.alloc_qubit(owner, a, b))
            .collect()
    }

    pub fn note_key_use(&mut self, label: KeyLabel, offset: usize, bits: usize, purpose: &str) {
        self.key_uses.push(KeyUse {
            label,
            offset,
            bits,
            purpose: purpose.to_string(),
        });
    }

    /// Record a party-internal event (a measurement outcome, a local check)
    /// as a self-addressed transcript entry. Does not pass the channel tap.
    pub fn note_internal(&mut self, party: Party, step: StepTag, label: &str, value: String) {
        self.messages.push(RecordedMessage {
            from: party,
            to: party,
            step,
            entries: vec![Entry::Classical {
                label: label.to_string(),
                value,
            }],
        });
    }

    /// Send a message through the channel: the strategy tap may rewrite it,
    /// then the delivered content is recorded and handed to the receiver with
    /// ownership re-tagged.
    pub fn send(
        &mut self,
        strategy: &mut Option<&mut dyn Strategy>,
        from: Party,
        to: Party,
        step: StepTag,
        parts: Vec<Part>,
    ) -> Result<Vec<Part>> {
        let mut msg = ChannelMessage {
            from,
            to,
            step,
            parts,
        };
        if let Some(s) = strategy.as_deref_mut() {
            let mut ctx = AdvCtx {
                reg: &mut self.reg,
                alice: &mut self.alice,
                rng: &mut self.adv_rng,
                n: self.cfg.n,
                message_amps: &self.message_amps,
            };
            s.tap(&mut ctx, &mut msg)?;
        }
        let mut entries = Vec::new();
        for part in &msg.parts {
            match &part.data {
                PartData::Qubits(handles) => {
                    entries.push(Entry::Quantum {
                        label: part.label.clone(),
                        ids: handles.iter().map(|h| h.id).collect(),
                        classes: self.reg.snapshot_classes(handles)?,
                    });
                }
                PartData::Bits(bits) => entries.push(Entry::Classical {
                    label: part.label.clone(),
                    value: super::format_bits(bits),
                }),
                PartData::Text(t) => entries.push(Entry::Classical {
                    label: part.label.clone(),
                    value: t.clone(),
                }),
            }
        }
        self.messages.push(RecordedMessage {
            from,
            to,
            step,
            entries,
        });
        let mut delivered = msg.parts;
        for part in &mut delivered {
            if let PartData::Qubits(handles) = &mut part.data {
                for h in handles.iter_mut() {
                    *h = h.owned_by(to);
                }
            }
        }
        Ok(delivered)
    }

    /// Let the strategy override or rewrite Alice's signing payload.
    pub fn adversary_signing(
        &mut self,
        strategy: &mut Option<&mut dyn Strategy>,
        honest: impl FnOnce(&mut RunCore) -> Result<SigningPayload>,
    ) -> Result<SigningPayload> {
        if let Some(s) = strategy.as_deref_mut() {
            let mut ctx = AdvCtx {
                reg: &mut self.reg,
                alice: &mut self.alice,
                rng: &mut self.adv_rng,
                n: self.cfg.n,
                message_amps: &self.message_amps,
            };
            if let Some(payload) = s.preempt_signing(&mut ctx)? {
                return Ok(payload);
            }
        }
        let mut payload = honest(self)?;
        if let Some(s) = strategy.as_deref_mut() {
            let mut ctx = AdvCtx {
                reg: &mut self.reg,
                alice: &mut self.alice,
                rng: &mut self.adv_rng,
                n: self.cfg.n,
                message_amps: &self.message_amps,
            };
            s.mutate_signing(&mut ctx, &mut payload)?;
        }
        Ok(payload)
    }

    /// Verdict comparison of two in-register sequences under the run's
    /// compare mode. Exact mode is non-destructive; swap-test mode samples
    /// destructive trials on simulator-made copies, leaving the originals in
    /// place.
    pub fn verdict_compare(&mut self, a: &[QubitHandle], b: &[QubitHandle]) -> Result<bool> {
        match self.cfg.compare {
            CompareMode::Exact => state_compare(&self.reg, a, b, self.cfg.tolerance),
            CompareMode::SwapTest { trials } => {
                let mut a_copies = Vec::with_capacity(trials);
                let mut b_copies = Vec::with_capacity(trials);
                for _ in 0..trials {
                    a_copies.push(self.reg.clone_subsystem(a)?);
                    b_copies.push(self.reg.clone_subsystem(b)?);
                }
                swap_test_compare(&mut self.reg, &a_copies, &b_copies, trials)
            }
        }
    }

    pub fn post(&mut self, party: Party, text: String) {
        self.board.post(party, text);
    }

    #[allow(clippy::too_many_arguments)]
    pub fn finish(
        self,
        v: Option<bool>,
        v_t: Option<bool>,
        v_b: Option<bool>,
        outcome: Outcome,
        detected_at: Option<StepTag>,
        recovered_fidelity: Option<f64>,
        record: Option<SignatureRecord>,
    ) -> RunOutput {
        let transcript = Transcript {
            protocol: self.cfg.protocol,
            n: self.cfg.n,
            seed: self.cfg.seed,
            compare: self.cfg.compare,
            tolerance: self.cfg.tolerance,
            message_amps: self.message_amps.clone(),
            messages: self.messages,
            board: self.board,
            v,
            v_t,
            v_b,
            outcome,
            detected_at,
            recovered_fidelity,
            key_uses: self.key_uses,
        };
        debug_assert!(transcript.verdicts_consistent());
        RunOutput {
            transcript,
            record,
            register: self.reg,
            alice: self.alice,
            bob: self.bob,
            arbitrator: self.arb,
            message_amps: self.message_amps,
        }
    }

    /// Reference vector for the configured message: tensor product of the
    /// per-qubit amplitude pairs.
    pub fn message_reference(&self) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(1.0, 0.0)];
        for &(a, b) in &self.message_amps {
            let mut next = Vec::with_capacity(out.len() * 2);
            for &x in &out {
                next.push(x * a);
                next.push(x * b);
            }
            out = next;
        }
        out
    }
}

