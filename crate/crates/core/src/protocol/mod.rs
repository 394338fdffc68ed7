//! Multi-party protocol engine: configs, transcripts, the public board,
//! interceptable channels, and the three signature-protocol runners.

mod improved;
mod li;
mod runner;
mod zou;

pub mod dispute;

pub use dispute::{resolve_dispute, Ruling};
pub use improved::run_improved;
pub use li::run_li_bell;
pub use runner::{AdvCtx, RunOutput, SigningPayload, Strategy};
pub(crate) use improved::run_improved_with;
pub(crate) use li::run_li_with;
pub(crate) use zou::run_zou_with;

/// Run the configured protocol with an adversary strategy plugged into
/// Alice's signing phase and the channel taps.
pub fn run_with_strategy(
    cfg: &RunConfig,
    strategy: &mut dyn Strategy,
) -> crate::error::Result<RunOutput> {
    match cfg.protocol {
        ProtocolKind::LiBell => run_li_with(cfg, Some(strategy)),
        ProtocolKind::Zou => run_zou_with(cfg, Some(strategy)),
        ProtocolKind::Improved => run_improved_with(cfg, Some(strategy)),
    }
}

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::qotp::{Key, KeyLabel};
use crate::register::{ClassSnapshot, Party, QubitHandle};

pub use zou::run_zou;

macro_rules! fmt_name {
    () => {
        fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
            write!(f, "{}", self.name())
        }
    };
}

/// Which signature protocol a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    /// Bell-state protocol with teleportation recovery.
    LiBell,
    /// Entanglement-free protocol with a public board.
    Zou,
    /// Entanglement-free protocol with Bob's pre-send check and dual
    /// signature copies.
    Improved,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::LiBell => "li_bell",
            ProtocolKind::Zou => "zou",
            ProtocolKind::Improved => "improved",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "li_bell" | "li-bell" | "li" => Ok(ProtocolKind::LiBell),
            "zou" => Ok(ProtocolKind::Zou),
            "improved" => Ok(ProtocolKind::Improved),
            other => Err(Error::InvalidConfig(format!("unknown protocol '{other}'"))),
        }
    }
}

impl std::fmt::Display for ProtocolKind {
    fmt_name!();
}

/// Protocol step labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StepTag {
    S1,
    S2,
    S3,
    S4,
    S5,
    V1,
    V2,
    V3,
    V4,
    V5,
}

impl StepTag {
    pub fn name(self) -> &'static str {
        match self {
            StepTag::S1 => "S1",
            StepTag::S2 => "S2",
            StepTag::S3 => "S3",
            StepTag::S4 => "S4",
            StepTag::S5 => "S5",
            StepTag::V1 => "V1",
            StepTag::V2 => "V2",
            StepTag::V3 => "V3",
            StepTag::V4 => "V4",
            StepTag::V5 => "V5",
        }
    }
}

impl std::fmt::Display for StepTag {
    fmt_name!();
}

/// Terminal state of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected,
    Aborted,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::Accepted => "accepted",
            Outcome::Rejected => "rejected",
            Outcome::Aborted => "aborted",
        }
    }
}

impl std::fmt::Display for Outcome {
    fmt_name!();
}

/// Verdict-comparison policy for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompareMode {
    /// Non-destructive fidelity comparison; the default for protocol verdicts.
    Exact,
    /// Destructive swap tests on simulator-made copies; models physical
    /// realizability and is statistical.
    SwapTest { trials: usize },
}

impl CompareMode {
    pub fn describe(self) -> String {
        match self {
            CompareMode::Exact => "exact".to_string(),
            CompareMode::SwapTest { trials } => format!("swap-test trials={trials}"),
        }
    }
}

/// Message to sign: seeded-random product state or explicit per-qubit
/// amplitudes.
#[derive(Debug, Clone)]
pub enum MessageSpec {
    Random,
    Explicit(Vec<(Complex64, Complex64)>),
}

/// One protocol-run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub seed: u64,
    pub compare: CompareMode,
    pub tolerance: f64,
    pub message: MessageSpec,
    pub fault: Option<Fault>,
}

impl RunConfig {
    pub fn new(protocol: ProtocolKind, n: usize, seed: u64) -> Self {
        RunConfig {
            protocol,
            n,
            seed,
            compare: CompareMode::Exact,
            tolerance: 1e-9,
            message: MessageSpec::Random,
            fault: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidConfig("n must be at least 1".into()));
        }
        if let CompareMode::SwapTest { trials } = self.compare {
            if trials == 0 {
                return Err(Error::InvalidConfig("swap trials must be at least 1".into()));
            }
        }
        if let MessageSpec::Explicit(amps) = &self.message {
            if amps.len() != self.n {
                return Err(Error::InvalidConfig(format!(
                    "explicit message has {} qubits, config says n={}",
                    amps.len(),
                    self.n
                )));
            }
            for (a, b) in amps {
                if a.norm_sqr() + b.norm_sqr() < 1e-12 {
                    return Err(Error::InvalidConfig("degenerate message amplitude pair".into()));
                }
            }
        }
        if let Some(fault) = self.fault {
            if !fault.applies_to(self.protocol) {
                return Err(Error::InvalidConfig(format!(
                    "fault {fault:?} does not apply to protocol {}",
                    self.protocol
                )));
            }
        }
        Ok(())
    }
}

/// Scripted misbehavior for exercising rejection paths in tests and
/// scenarios. These are single-party deviations, not full attack strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Arbitrator swaps the received signing transform image for a random
    /// state before comparing.
    ArbitratorSubstitutesRa,
    /// Arbitrator flips one measurement-outcome pair in the returned payload.
    CorruptReturnedBellKind,
    /// Bob forwards a random state in place of the received message at V1.
    BobSubstitutesMessage,
    /// Alice never publishes r, stalling the final step.
    AliceWithholdsR,
}

impl Fault {
    fn applies_to(self, protocol: ProtocolKind) -> bool {
        match self {
            Fault::ArbitratorSubstitutesRa | Fault::CorruptReturnedBellKind => {
                protocol == ProtocolKind::LiBell
            }
            Fault::BobSubstitutesMessage | Fault::AliceWithholdsR => {
                matches!(protocol, ProtocolKind::Zou | ProtocolKind::Improved)
            }
        }
    }
}

/// A protocol participant: keys plus named qubit sequences it holds.
#[derive(Debug, Clone)]
pub struct PartyState {
    pub name: Party,
    pub keys: BTreeMap<KeyLabel, Key>,
    pub held: BTreeMap<String, Vec<QubitHandle>>,
}

impl PartyState {
    pub fn new(name: Party) -> Self {
        PartyState {
            name,
            keys: BTreeMap::new(),
            held: BTreeMap::new(),
        }
    }

    pub fn key(&self, label: KeyLabel) -> Result<&Key> {
        self.keys
            .get(&label)
            .ok_or_else(|| Error::MissingKey(self.name.to_string(), label.to_string()))
    }
}

/// One payload element of a channel message.
#[derive(Debug, Clone)]
pub enum PartData {
    Qubits(Vec<QubitHandle>),
    Bits(Vec<bool>),
    Text(String),
}

#[derive(Debug, Clone)]
pub struct Part {
    pub label: String,
    pub data: PartData,
}

impl Part {
    pub fn qubits(label: &str, handles: Vec<QubitHandle>) -> Self {
        Part {
            label: label.to_string(),
            data: PartData::Qubits(handles),
        }
    }

    pub fn cloned_qubits(&self) -> Vec<QubitHandle> {
        match &self.data {
            PartData::Qubits(q) => q.clone(),
            _ => Vec::new(),
        }
    }
}

/// A message in flight between parties. Attack strategies may observe and
/// rewrite `parts` at the channel tap.
#[derive(Debug, Clone)]
pub struct ChannelMessage {
    pub from: Party,
    pub to: Party,
    pub step: StepTag,
    pub parts: Vec<Part>,
}

/// Transcript entry for one recorded message part.
#[derive(Debug, Clone)]
pub enum Entry {
    Classical {
        label: String,
        value: String,
    },
    Quantum {
        label: String,
        ids: Vec<u64>,
        classes: Vec<ClassSnapshot>,
    },
}

#[derive(Debug, Clone)]
pub struct RecordedMessage {
    pub from: Party,
    pub to: Party,
    pub step: StepTag,
    pub entries: Vec<Entry>,
}

/// Append-only authenticated broadcast: (party, text) posts readable by
/// everyone including the adversary.
#[derive(Debug, Clone, Default)]
pub struct PublicBoard {
    pub posts: Vec<(Party, String)>,
}

impl PublicBoard {
    pub fn post(&mut self, party: Party, text: String) {
        self.posts.push((party, text));
    }
}

/// Record of key-schedule consumption, part of the transcript.
#[derive(Debug, Clone)]
pub struct KeyUse {
    pub label: KeyLabel,
    pub offset: usize,
    pub bits: usize,
    pub purpose: String,
}

/// Complete record of one protocol run.
#[derive(Debug, Clone)]
pub struct Transcript {
    pub protocol: ProtocolKind,
    pub n: usize,
    pub seed: u64,
    pub compare: CompareMode,
    pub tolerance: f64,
    pub message_amps: Vec<(Complex64, Complex64)>,
    pub messages: Vec<RecordedMessage>,
    pub board: PublicBoard,
    pub v: Option<bool>,
    pub v_t: Option<bool>,
    pub v_b: Option<bool>,
    pub outcome: Outcome,
    pub detected_at: Option<StepTag>,
    pub recovered_fidelity: Option<f64>,
    pub key_uses: Vec<KeyUse>,
}

fn fmt_complex(c: Complex64) -> String {
    format!("({:+.12e}{:+.12e}i)", c.re, c.im)
}

fn fmt_verdict(v: Option<bool>) -> &'static str {
    match v {
        None => "-",
        Some(true) => "1",
        Some(false) => "0",
    }
}

pub(crate) fn format_bits(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

impl Transcript {
    /// Stable structured-text serialization; identical configs and seeds give
    /// byte-identical output.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        out.push_str("aqs-transcript v1\n");
        out.push_str(&format!("protocol: {}\n", self.protocol));
        out.push_str(&format!("n: {}\n", self.n));
        out.push_str(&format!("seed: {}\n", self.seed));
        out.push_str(&format!("compare: {}\n", self.compare.describe()));
        out.push_str(&format!("tolerance: {:e}\n", self.tolerance));
        for (i, (a, b)) in self.message_amps.iter().enumerate() {
            out.push_str(&format!(
                "message-qubit[{i}]: {} {}\n",
                fmt_complex(*a),
                fmt_complex(*b)
            ));
        }
        for (i, m) in self.messages.iter().enumerate() {
            out.push_str(&format!(
                "msg[{i}]: step={} from={} to={}\n",
                m.step, m.from, m.to
            ));
            for e in &m.entries {
                match e {
                    Entry::Classical { label, value } => {
                        out.push_str(&format!("  classical {label}: {value}\n"));
                    }
                    Entry::Quantum { label, ids, classes } => {
                        let id_list: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
                        out.push_str(&format!(
                            "  quantum {label}: qubits=[{}]\n",
                            id_list.join(",")
                        ));
                        for (members, amps) in classes {
                            let mlist: Vec<String> =
                                members.iter().map(|i| i.to_string()).collect();
                            let alist: Vec<String> =
                                amps.iter().map(|c| fmt_complex(*c)).collect();
                            out.push_str(&format!(
                                "    class[{}]: {}\n",
                                mlist.join(","),
                                alist.join(" ")
                            ));
                        }
                    }
                }
            }
        }
        for (i, (party, text)) in self.board.posts.iter().enumerate() {
            out.push_str(&format!("board[{i}]: {party} {text}\n"));
        }
        for (i, ku) in self.key_uses.iter().enumerate() {
            out.push_str(&format!(
                "key-use[{i}]: {} offset={} bits={} purpose={}\n",
                ku.label, ku.offset, ku.bits, ku.purpose
            ));
        }
        out.push_str(&format!("verdict V: {}\n", fmt_verdict(self.v)));
        out.push_str(&format!("verdict V_T: {}\n", fmt_verdict(self.v_t)));
        out.push_str(&format!("verdict V_B: {}\n", fmt_verdict(self.v_b)));
        out.push_str(&format!(
            "detected-at: {}\n",
            self.detected_at.map(|s| s.name()).unwrap_or("-")
        ));
        out.push_str(&format!("outcome: {}\n", self.outcome));
        match self.recovered_fidelity {
            Some(f) => out.push_str(&format!("recovered-fidelity: {f:.12}\n")),
            None => out.push_str("recovered-fidelity: -\n"),
        }
        out.push_str("end\n");
        out
    }

    /// All defined verdicts are 1 whenever the run was accepted.
    pub fn verdicts_consistent(&self) -> bool {
        if self.outcome != Outcome::Accepted {
            return true;
        }
        [self.v, self.v_t, self.v_b]
            .iter()
            .all(|v| v.unwrap_or(true))
    }
}

/// Stored signature material after an accepted run.
#[derive(Debug, Clone)]
pub struct SignatureRecord {
    pub protocol: ProtocolKind,
    pub message: Vec<QubitHandle>,
    pub signature: Vec<QubitHandle>,
    /// Second signature copy (Improved protocol only).
    pub signature_extra: Vec<QubitHandle>,
    pub r: Option<Key>,
}
