//! Named, reproducible scenarios: honest runs, the three attacks, and
//! dispute resolution. Each scenario carries an expected-outcome block; a run
//! reports whether reality matched it, which the CLI turns into the exit
//! status.

use crate::attack::{run_attack, AttackConfig, AttackKind, AttackReport};
use crate::error::{Error, Result};
use crate::protocol::{
    resolve_dispute, run_improved, run_li_bell, run_zou, CompareMode, MessageSpec, Outcome,
    ProtocolKind, RunConfig, RunOutput, Ruling, StepTag,
};

/// Scenario catalog entry names, alphabetical.
pub const SCENARIOS: [(&str, &str); 5] = [
    ("dispute", "honest run, then arbitrated dispute over the stored record"),
    (
        "gao-disturbance",
        "signature disturbed on the way back to Bob; disavowal vs. detection",
    ),
    ("honest", "all parties honest; run must be accepted with fidelity 1"),
    (
        "key-extraction",
        "Bell pairs in place of the message; pad recovery and disavowal",
    ),
    (
        "total-break",
        "full pad recovery and a forged message accepted end to end",
    ),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    Honest,
    KeyExtraction,
    TotalBreak,
    GaoDisturbance,
    Dispute,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Honest => "honest",
            ScenarioKind::KeyExtraction => "key-extraction",
            ScenarioKind::TotalBreak => "total-break",
            ScenarioKind::GaoDisturbance => "gao-disturbance",
            ScenarioKind::Dispute => "dispute",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "honest" => Ok(ScenarioKind::Honest),
            "key-extraction" | "key_extraction" => Ok(ScenarioKind::KeyExtraction),
            "total-break" | "total_break" => Ok(ScenarioKind::TotalBreak),
            "gao-disturbance" | "gao_disturbance" => Ok(ScenarioKind::GaoDisturbance),
            "dispute" => Ok(ScenarioKind::Dispute),
            other => Err(Error::UnknownScenario(other.to_string())),
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub scenario: ScenarioKind,
    pub protocol: ProtocolKind,
    pub n: usize,
    pub seed: u64,
    pub compare: CompareMode,
    pub tolerance: f64,
    pub message: MessageSpec,
}

impl ScenarioConfig {
    pub fn new(scenario: ScenarioKind, protocol: ProtocolKind, n: usize, seed: u64) -> Self {
        ScenarioConfig {
            scenario,
            protocol,
            n,
            seed,
            compare: CompareMode::Exact,
            tolerance: 1e-9,
            message: MessageSpec::Random,
        }
    }

    fn run_config(&self) -> RunConfig {
        RunConfig {
            protocol: self.protocol,
            n: self.n,
            seed: self.seed,
            compare: self.compare,
            tolerance: self.tolerance,
            message: self.message.clone(),
            fault: None,
        }
    }

    fn attack_config(&self, attack: AttackKind) -> AttackConfig {
        AttackConfig {
            attack,
            target: self.protocol,
            n: self.n,
            seed: self.seed,
            compare: self.compare,
            tolerance: self.tolerance,
            message: self.message.clone(),
            forged: crate::attack::ForgedMessageSpec::Random,
            disturbance: crate::attack::DisturbanceSpec::RandomNonIdentity,
        }
    }
}

/// Result of one scenario: a machine-parseable one-line summary, the full
/// serialized report, and whether the scenario's expected-outcome block held.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub summary: String,
    pub report: String,
    pub expected_met: bool,
}

fn verdict_field(name: &str, v: Option<bool>) -> String {
    match v {
        Some(b) => format!(" {name}={}", u8::from(b)),
        None => String::new(),
    }
}

fn run_summary(cfg: &ScenarioConfig, out: &RunOutput) -> String {
    let t = &out.transcript;
    let mut s = format!(
        "scenario={} protocol={} n={} seed={} outcome={}",
        cfg.scenario, cfg.protocol, cfg.n, cfg.seed, t.outcome
    );
    s.push_str(&verdict_field("V", t.v));
    s.push_str(&verdict_field("V_T", t.v_t));
    s.push_str(&verdict_field("V_B", t.v_b));
    if let Some(step) = t.detected_at {
        s.push_str(&format!(" detected_at={step}"));
    }
    if let Some(f) = t.recovered_fidelity {
        s.push_str(&format!(" fidelity={f:.9}"));
    }
    s
}

fn attack_summary(cfg: &ScenarioConfig, report: &AttackReport, expected_bits: usize) -> String {
    let t = &report.transcript;
    let mut s = format!(
        "scenario={} protocol={} n={} seed={} outcome={}",
        cfg.scenario, cfg.protocol, cfg.n, cfg.seed, t.outcome
    );
    if expected_bits > 0 {
        s.push_str(&format!(
            " recovered={}/{expected_bits} key_exact={}",
            report.recovered_key_bits.len(),
            u8::from(report.key_recovery_exact)
        ));
    }
    s.push_str(&format!(
        " forgery_accepted={}",
        u8::from(report.forgery_accepted)
    ));
    s.push_str(&format!(
        " disavowal_upheld={}",
        u8::from(report.disavowal_upheld)
    ));
    if let Some(step) = report.detected_at {
        s.push_str(&format!(" detected_at={step}"));
    }
    if let Some(ruling) = report.dispute_ruling {
        s.push_str(&format!(" dispute={ruling}"));
    }
    s
}

fn wrap_report(cfg: &ScenarioConfig, summary: &str, body: &str) -> String {
    format!(
        "aqs-report v1\nscenario: {}\nsummary: {}\n\n{}",
        cfg.scenario, summary, body
    )
}

fn run_protocol(cfg: &RunConfig) -> Result<RunOutput> {
    match cfg.protocol {
        ProtocolKind::LiBell => run_li_bell(cfg),
        ProtocolKind::Zou => run_zou(cfg),
        ProtocolKind::Improved => run_improved(cfg),
    }
}

/// Execute a named scenario and check its expected-outcome block.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult> {
    match cfg.scenario {
        ScenarioKind::Honest => {
            let out = run_protocol(&cfg.run_config())?;
            let expected = out.transcript.outcome == Outcome::Accepted
                && out.transcript.verdicts_consistent()
                && out.transcript.recovered_fidelity.unwrap_or(0.0) >= 1.0 - cfg.tolerance;
            let summary = run_summary(cfg, &out);
            let report = wrap_report(cfg, &summary, &out.transcript.serialize());
            Ok(ScenarioResult {
                summary,
                report,
                expected_met: expected,
            })
        }
        ScenarioKind::Dispute => {
            let mut out = run_protocol(&cfg.run_config())?;
            let record = out
                .record
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("run produced no signature record".into()))?;
            let ruling =
                resolve_dispute(&mut out.register, record, &out.arbitrator, cfg.tolerance)?;
            let expected = out.transcript.outcome == Outcome::Accepted
                && ruling == Ruling::SignatureValid;
            let mut summary = run_summary(cfg, &out);
            summary.push_str(&format!(" ruling={ruling}"));
            let report = wrap_report(cfg, &summary, &out.transcript.serialize());
            Ok(ScenarioResult {
                summary,
                report,
                expected_met: expected,
            })
        }
        ScenarioKind::KeyExtraction => {
            let report = run_attack(&cfg.attack_config(AttackKind::KeyExtraction))?;
            let expected = match cfg.protocol {
                ProtocolKind::Zou => {
                    report.key_recovery_exact
                        && report.transcript.outcome == Outcome::Accepted
                        && report.disavowal_upheld
                }
                ProtocolKind::Improved => report.detected_at == Some(StepTag::V1),
                ProtocolKind::LiBell => false,
            };
            let summary = attack_summary(cfg, &report, 2 * cfg.n);
            let text = wrap_report(cfg, &summary, &report.serialize());
            Ok(ScenarioResult {
                summary,
                report: text,
                expected_met: expected,
            })
        }
        ScenarioKind::TotalBreak => {
            let report = run_attack(&cfg.attack_config(AttackKind::TotalBreak))?;
            let expected = match cfg.protocol {
                ProtocolKind::LiBell => report.key_recovery_exact && report.forgery_accepted,
                ProtocolKind::Improved => report.detected_at == Some(StepTag::V1),
                ProtocolKind::Zou => false,
            };
            let summary = attack_summary(cfg, &report, 8 * cfg.n);
            let text = wrap_report(cfg, &summary, &report.serialize());
            Ok(ScenarioResult {
                summary,
                report: text,
                expected_met: expected,
            })
        }
        ScenarioKind::GaoDisturbance => {
            let report = run_attack(&cfg.attack_config(AttackKind::GaoDisturbance))?;
            let expected = match cfg.protocol {
                ProtocolKind::Zou => {
                    report.transcript.outcome == Outcome::Accepted && report.disavowal_upheld
                }
                ProtocolKind::Improved => report.detected_at == Some(StepTag::V3),
                ProtocolKind::LiBell => false,
            };
            let summary = attack_summary(cfg, &report, 0);
            let text = wrap_report(cfg, &summary, &report.serialize());
            Ok(ScenarioResult {
                summary,
                report: text,
                expected_met: expected,
            })
        }
    }
}

/// Stable alphabetical scenario catalog, filtered by substring. An unknown
/// filter yields an empty list, not an error.
pub fn list_scenarios(filter: &str) -> Vec<(&'static str, &'static str)> {
    SCENARIOS
        .iter()
        .filter(|(name, _)| name.contains(filter))
        .copied()
        .collect()
}
