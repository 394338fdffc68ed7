//! Python extension module `aqs_sim`: the state register, keys and pad
//! operations, and the scenario/attack entry points.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use aqs_core::attack::{run_attack, AttackConfig, AttackKind};
use aqs_core::compare::{sequence_fidelity, state_compare};
use aqs_core::protocol::{
    resolve_dispute, run_improved, run_li_bell, run_zou, CompareMode, ProtocolKind, RunConfig,
};
use aqs_core::qotp::{
    infer_key_pair, qotp_decrypt, qotp_encrypt, signing_transform, signing_untransform, Key,
    KeyLabel, SigningMode,
};
use aqs_core::register::{BellKind, Party, QubitHandle, StateRegister};
use aqs_core::scenario::{list_scenarios, run_scenario, ScenarioConfig, ScenarioKind};
use aqs_core::PauliWord;

fn to_py_err(e: aqs_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_bell_kind(name: &str) -> PyResult<BellKind> {
    match name {
        "phi+" => Ok(BellKind::PhiPlus),
        "phi-" => Ok(BellKind::PhiMinus),
        "psi+" => Ok(BellKind::PsiPlus),
        "psi-" => Ok(BellKind::PsiMinus),
        other => Err(PyValueError::new_err(format!(
            "unknown Bell kind {other:?}; use phi+/phi-/psi+/psi-"
        ))),
    }
}

fn parse_protocol(name: &str) -> PyResult<ProtocolKind> {
    ProtocolKind::parse(name).map_err(to_py_err)
}

fn handle(id: u64) -> QubitHandle {
    QubitHandle::new(id, Party::Channel)
}

/// Exact state-vector register. Qubits are referred to by integer ids;
/// measuring consumes them (ids are never reused).
#[pyclass(name = "StateRegister")]
struct PyStateRegister {
    inner: StateRegister,
}

#[pymethods]
impl PyStateRegister {
    #[new]
    fn new(seed: u64) -> Self {
        PyStateRegister {
            inner: StateRegister::new(seed),
        }
    }

    /// Allocate one qubit in the state alpha|0> + beta|1>; returns its id.
    fn alloc_qubit(&mut self, alpha: Complex64, beta: Complex64) -> PyResult<u64> {
        self.inner
            .alloc_qubit(Party::Channel, alpha, beta)
            .map(|h| h.id)
            .map_err(to_py_err)
    }

    /// Allocate a Bell pair of the named kind; returns (first, second) ids.
    fn make_bell_pair(&mut self, kind: &str) -> PyResult<(u64, u64)> {
        let kind = parse_bell_kind(kind)?;
        let (a, b) = self.inner.make_bell_pair(Party::Channel, kind);
        Ok((a.id, b.id))
    }

    /// Apply sigma_x^x sigma_z^z to one qubit (Z first).
    fn apply_pauli(&mut self, qubit: u64, x: bool, z: bool) -> PyResult<()> {
        self.inner
            .apply_pauli(handle(qubit), PauliWord::new(x, z))
            .map_err(to_py_err)
    }

    fn apply_hadamard(&mut self, qubit: u64) -> PyResult<()> {
        self.inner.apply_hadamard(handle(qubit)).map_err(to_py_err)
    }

    /// Bell-basis measurement of a pair; consumes both qubits and returns
    /// the kind label.
    fn bell_measure(&mut self, q1: u64, q2: u64) -> PyResult<String> {
        self.inner
            .bell_measure(handle(q1), handle(q2))
            .map(|k| k.label().to_string())
            .map_err(to_py_err)
    }

    /// Computational-basis measurement; collapses and returns the bit.
    fn measure_qubit(&mut self, qubit: u64) -> PyResult<bool> {
        self.inner.measure_qubit(handle(qubit)).map_err(to_py_err)
    }

    /// Overlap of the listed qubits' reduced state with a pure reference
    /// vector of matching dimension.
    fn fidelity(&self, qubits: Vec<u64>, reference: Vec<Complex64>) -> PyResult<f64> {
        let handles: Vec<QubitHandle> = qubits.into_iter().map(handle).collect();
        self.inner.fidelity(&handles, &reference).map_err(to_py_err)
    }

    /// Exact comparison verdict between two qubit sequences.
    fn compare(&self, a: Vec<u64>, b: Vec<u64>, tolerance: f64) -> PyResult<bool> {
        let ha: Vec<QubitHandle> = a.into_iter().map(handle).collect();
        let hb: Vec<QubitHandle> = b.into_iter().map(handle).collect();
        state_compare(&self.inner, &ha, &hb, tolerance).map_err(to_py_err)
    }

    /// Minimum group fidelity between two qubit sequences.
    fn sequence_fidelity(&self, a: Vec<u64>, b: Vec<u64>) -> PyResult<f64> {
        let ha: Vec<QubitHandle> = a.into_iter().map(handle).collect();
        let hb: Vec<QubitHandle> = b.into_iter().map(handle).collect();
        sequence_fidelity(&self.inner, &ha, &hb).map_err(to_py_err)
    }

    /// Pad a sequence of qubits with a hex key (encrypt direction).
    fn qotp_encrypt(&mut self, key_hex: &str, qubits: Vec<u64>) -> PyResult<()> {
        let key = Key::from_hex(KeyLabel::Other, key_hex).map_err(to_py_err)?;
        let handles: Vec<QubitHandle> = qubits.into_iter().map(handle).collect();
        qotp_encrypt(&mut self.inner, &key, &handles).map_err(to_py_err)
    }

    /// Invert the pad (decrypt direction).
    fn qotp_decrypt(&mut self, key_hex: &str, qubits: Vec<u64>) -> PyResult<()> {
        let key = Key::from_hex(KeyLabel::Other, key_hex).map_err(to_py_err)?;
        let handles: Vec<QubitHandle> = qubits.into_iter().map(handle).collect();
        qotp_decrypt(&mut self.inner, &key, &handles).map_err(to_py_err)
    }

    /// Keyed signing transform; mode is "paper_example" or "non_commutative".
    fn signing_transform(&mut self, key_hex: &str, qubits: Vec<u64>, mode: &str) -> PyResult<()> {
        let key = Key::from_hex(KeyLabel::Other, key_hex).map_err(to_py_err)?;
        let handles: Vec<QubitHandle> = qubits.into_iter().map(handle).collect();
        let mode = parse_mode(mode)?;
        signing_transform(&mut self.inner, &key, 0, &handles, mode).map_err(to_py_err)
    }

    fn signing_untransform(
        &mut self,
        key_hex: &str,
        qubits: Vec<u64>,
        mode: &str,
    ) -> PyResult<()> {
        let key = Key::from_hex(KeyLabel::Other, key_hex).map_err(to_py_err)?;
        let handles: Vec<QubitHandle> = qubits.into_iter().map(handle).collect();
        let mode = parse_mode(mode)?;
        signing_untransform(&mut self.inner, &key, 0, &handles, mode).map_err(to_py_err)
    }

    /// Class vector of the class containing the qubit: (member ids, amps).
    fn class_vector(&self, qubit: u64) -> PyResult<(Vec<u64>, Vec<Complex64>)> {
        self.inner.class_vector(handle(qubit)).map_err(to_py_err)
    }

    fn is_live(&self, qubit: u64) -> bool {
        self.inner.is_live(handle(qubit))
    }

    fn live_count(&self) -> usize {
        self.inner.live_count()
    }
}

fn parse_mode(mode: &str) -> PyResult<SigningMode> {
    match mode {
        "paper_example" => Ok(SigningMode::PaperExample),
        "non_commutative" => Ok(SigningMode::NonCommutative),
        other => Err(PyValueError::new_err(format!(
            "unknown signing mode {other:?}"
        ))),
    }
}

/// Pad-exponent pair explaining an observed Bell-state transition:
/// returns (z, x) for (initial, measured) kind labels.
#[pyfunction(name = "infer_key_pair")]
fn py_infer_key_pair(initial: &str, measured: &str) -> PyResult<(bool, bool)> {
    Ok(infer_key_pair(
        parse_bell_kind(initial)?,
        parse_bell_kind(measured)?,
    ))
}

/// Pauli correction restoring a teleported state, as (x, z, phase_sign).
#[pyfunction(name = "teleport_correction")]
fn py_teleport_correction(kind: &str) -> PyResult<(bool, bool, i8)> {
    let word = aqs_core::teleport_correction(parse_bell_kind(kind)?);
    let sign = match word.phase {
        aqs_core::Phase::MinusOne => -1,
        _ => 1,
    };
    Ok((word.x, word.z, sign))
}

fn scenario_dict<'py>(
    py: Python<'py>,
    summary: &str,
    report: &str,
    ok: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("summary", summary)?;
    d.set_item("report", report)?;
    d.set_item("ok", ok)?;
    Ok(d)
}

/// Run a named scenario; returns {"summary", "report", "ok"}.
#[pyfunction(name = "run_scenario")]
#[pyo3(signature = (scenario, protocol, n, seed, compare_mode = "exact", swap_trials = 16))]
fn py_run_scenario<'py>(
    py: Python<'py>,
    scenario: &str,
    protocol: &str,
    n: usize,
    seed: u64,
    compare_mode: &str,
    swap_trials: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let mut cfg = ScenarioConfig::new(
        ScenarioKind::parse(scenario).map_err(to_py_err)?,
        parse_protocol(protocol)?,
        n,
        seed,
    );
    cfg.compare = match compare_mode {
        "exact" => CompareMode::Exact,
        "swap-test" | "swap_test" => CompareMode::SwapTest {
            trials: swap_trials,
        },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown compare mode {other:?}"
            )))
        }
    };
    let result = run_scenario(&cfg).map_err(to_py_err)?;
    scenario_dict(py, &result.summary, &result.report, result.expected_met)
}

/// Run one honest protocol; returns outcome fields and the transcript text.
#[pyfunction(name = "run_protocol")]
fn py_run_protocol<'py>(
    py: Python<'py>,
    protocol: &str,
    n: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = parse_protocol(protocol)?;
    let cfg = RunConfig::new(kind, n, seed);
    let out = match kind {
        ProtocolKind::LiBell => run_li_bell(&cfg),
        ProtocolKind::Zou => run_zou(&cfg),
        ProtocolKind::Improved => run_improved(&cfg),
    }
    .map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("outcome", out.transcript.outcome.name())?;
    d.set_item("fidelity", out.transcript.recovered_fidelity)?;
    d.set_item("transcript", out.transcript.serialize())?;
    Ok(d)
}

/// Run one attack; returns the report fields and serialized text.
#[pyfunction(name = "run_attack")]
fn py_run_attack<'py>(
    py: Python<'py>,
    attack: &str,
    target: &str,
    n: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let kind = match attack {
        "key-extraction" | "key_extraction" => AttackKind::KeyExtraction,
        "total-break" | "total_break" => AttackKind::TotalBreak,
        "gao-disturbance" | "gao_disturbance" => AttackKind::GaoDisturbance,
        other => return Err(PyValueError::new_err(format!("unknown attack {other:?}"))),
    };
    let cfg = AttackConfig::new(kind, parse_protocol(target)?, n, seed);
    let report = run_attack(&cfg).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("attack", report.attack.name())?;
    d.set_item("target", report.target.name())?;
    d.set_item(
        "recovered_bits",
        report
            .recovered_key_bits
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect::<String>(),
    )?;
    d.set_item("key_recovery_exact", report.key_recovery_exact)?;
    d.set_item("forgery_accepted", report.forgery_accepted)?;
    d.set_item("disavowal_upheld", report.disavowal_upheld)?;
    d.set_item("detected_at", report.detected_at.map(|s| s.name()))?;
    d.set_item("dispute_ruling", report.dispute_ruling.map(|r| r.name()))?;
    d.set_item("report", report.serialize())?;
    Ok(d)
}

/// Run an honest protocol and immediately resolve a dispute over the stored
/// record; returns the ruling name.
#[pyfunction(name = "run_dispute")]
fn py_run_dispute(protocol: &str, n: usize, seed: u64) -> PyResult<String> {
    let kind = parse_protocol(protocol)?;
    let cfg = RunConfig::new(kind, n, seed);
    let mut out = match kind {
        ProtocolKind::LiBell => run_li_bell(&cfg),
        ProtocolKind::Zou => run_zou(&cfg),
        ProtocolKind::Improved => run_improved(&cfg),
    }
    .map_err(to_py_err)?;
    let record = out
        .record
        .ok_or_else(|| PyRuntimeError::new_err("run stored no signature record"))?;
    let ruling =
        resolve_dispute(&mut out.register, &record, &out.arbitrator, 1e-9).map_err(to_py_err)?;
    Ok(ruling.name().to_string())
}

/// Scenario catalog as (name, description) pairs, filtered by substring.
#[pyfunction(name = "list_scenarios")]
#[pyo3(signature = (filter = ""))]
fn py_list_scenarios(filter: &str) -> Vec<(String, String)> {
    list_scenarios(filter)
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect()
}

#[pymodule]
fn aqs_sim(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyStateRegister>()?;
    m.add_function(wrap_pyfunction!(py_infer_key_pair, m)?)?;
    m.add_function(wrap_pyfunction!(py_teleport_correction, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_protocol, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_attack, m)?)?;
    m.add_function(wrap_pyfunction!(py_run_dispute, m)?)?;
    m.add_function(wrap_pyfunction!(py_list_scenarios, m)?)?;
    Ok(())
}
