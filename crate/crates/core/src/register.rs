//! Exact state-vector register with entanglement-class tracking.
//!
//! Qubits are grouped into classes: a class holds the joint state vector of
//! qubits that may be entangled with each other. Classes merge when a joint
//! operation touches qubits from different classes and shrink when a
//! measurement consumes qubits. The protocols here never entangle more than a
//! handful of qubits, so class vectors stay tiny while remaining exact.
//!
//! Global phase is kept in the class vectors (so signed Bell-state identities
//! are checkable as vectors) but is unobservable through `bell_measure` and
//! `fidelity`.
//!
//! A register is a single mutable world: every operation takes `&mut self`,
//! which serializes all access. Distinct registers are independent and may be
//! driven in parallel.

use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::pauli::PauliWord;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// Protocol participant label, also used to tag qubit ownership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Party {
    Alice,
    Bob,
    Arbitrator,
    /// Qubits in flight or owned by no protocol party.
    Channel,
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
            Party::Arbitrator => "Arbitrator",
            Party::Channel => "Channel",
        };
        write!(f, "{s}")
    }
}

/// Opaque reference to a live qubit. Ids are never reused once a measurement
/// consumes the qubit. The owner tag is bookkeeping for protocol code; the
/// register itself resolves handles by id alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QubitHandle {
    pub id: u64,
    pub owner: Party,
}

impl QubitHandle {
    pub fn new(id: u64, owner: Party) -> Self {
        QubitHandle { id, owner }
    }

    /// Same qubit, re-tagged (e.g. after delivery over a channel).
    pub fn owned_by(self, owner: Party) -> Self {
        QubitHandle { id: self.id, owner }
    }
}

/// The four Bell states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// Two-qubit state vector over |00>, |01>, |10>, |11>.
    pub fn vector(self) -> [Complex64; 4] {
        let z = Complex64::new(0.0, 0.0);
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            BellKind::PhiPlus => [s, z, z, s],
            BellKind::PhiMinus => [s, z, z, -s],
            BellKind::PsiPlus => [z, s, s, z],
            BellKind::PsiMinus => [z, s, -s, z],
        }
    }

    /// (bit-flip, phase-flip) characterization: phi+ is (0,0), applying X to
    /// one qubit toggles the first component, Z the second.
    pub fn flip_phase(self) -> (bool, bool) {
        match self {
            BellKind::PhiPlus => (false, false),
            BellKind::PhiMinus => (false, true),
            BellKind::PsiPlus => (true, false),
            BellKind::PsiMinus => (true, true),
        }
    }

    pub fn from_flip_phase(flip: bool, phase: bool) -> Self {
        match (flip, phase) {
            (false, false) => BellKind::PhiPlus,
            (false, true) => BellKind::PhiMinus,
            (true, false) => BellKind::PsiPlus,
            (true, true) => BellKind::PsiMinus,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellKind::PhiPlus => "phi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PsiMinus => "psi-",
        }
    }
}

impl std::fmt::Display for BellKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Pauli correction that maps the post-measurement branch of the remote qubit
/// back to the teleported state, exactly (phase included).
pub fn teleport_correction(kind: BellKind) -> PauliWord {
    use crate::pauli::Phase;
    match kind {
        BellKind::PhiPlus => PauliWord::IDENTITY,
        BellKind::PhiMinus => PauliWord::Z,
        BellKind::PsiPlus => PauliWord::X,
        // sigma_z sigma_x in canonical form: -X Z
        BellKind::PsiMinus => PauliWord::with_phase(true, true, Phase::MinusOne),
    }
}

/// One entanglement class: qubit ids in tensor order (member 0 is the most
/// significant index bit) plus the joint amplitude vector of length
/// 2^members.
#[derive(Debug, Clone)]
struct EntClass {
    members: Vec<u64>,
    amps: Vec<Complex64>,
}

impl EntClass {
    fn slot_of(&self, id: u64) -> usize {
        self.members.iter().position(|&m| m == id).expect("member")
    }
}

/// Snapshot of one class for transcripts: (member ids, amplitude vector).
pub type ClassSnapshot = (Vec<u64>, Vec<Complex64>);

/// Global pool of qubits partitioned into entanglement classes.
pub struct StateRegister {
    classes: Vec<Option<EntClass>>,
    index: HashMap<u64, usize>,
    next_id: u64,
    rng: ChaCha12Rng,
    seed: u64,
}

impl StateRegister {
    pub fn new(seed: u64) -> Self {
        StateRegister {
            classes: Vec::new(),
            index: HashMap::new(),
            next_id: 0,
            rng: ChaCha12Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_live(&self, h: QubitHandle) -> bool {
        self.index.contains_key(&h.id)
    }

    pub fn live_count(&self) -> usize {
        self.index.len()
    }

    fn class_idx(&self, id: u64) -> Result<usize> {
        self.index.get(&id).copied().ok_or(Error::DeadHandle(id))
    }

    fn class(&self, idx: usize) -> &EntClass {
        self.classes[idx].as_ref().expect("live class")
    }

    fn class_mut(&mut self, idx: usize) -> &mut EntClass {
        self.classes[idx].as_mut().expect("live class")
    }

    fn push_class(&mut self, class: EntClass) -> usize {
        let idx = self.classes.len();
        for &m in &class.members {
            self.index.insert(m, idx);
        }
        self.classes.push(Some(class));
        idx
    }

    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Allocate a single qubit in state `alpha|0> + beta|1>`. Inputs off the
    /// unit sphere by more than 1e-9 are normalized; the zero vector is
    /// rejected.
    pub fn alloc_qubit(
        &mut self,
        owner: Party,
        alpha: Complex64,
        beta: Complex64,
    ) -> Result<QubitHandle> {
        let norm_sq = alpha.norm_sqr() + beta.norm_sqr();
        if norm_sq < 1e-12 {
            return Err(Error::DegenerateAmplitude);
        }
        let scale = 1.0 / norm_sq.sqrt();
        let id = self.fresh_id();
        self.push_class(EntClass {
            members: vec![id],
            amps: vec![alpha * scale, beta * scale],
        });
        Ok(QubitHandle::new(id, owner))
    }

    /// Allocate a fresh two-qubit class in the named Bell state. Handles are
    /// returned in tensor order (first, second).
    pub fn make_bell_pair(&mut self, owner: Party, kind: BellKind) -> (QubitHandle, QubitHandle) {
        let a = self.fresh_id();
        let b = self.fresh_id();
        self.push_class(EntClass {
            members: vec![a, b],
            amps: kind.vector().to_vec(),
        });
        (QubitHandle::new(a, owner), QubitHandle::new(b, owner))
    }

    fn apply_one_qubit(&mut self, h: QubitHandle, m: [[Complex64; 2]; 2]) -> Result<()> {
        let ci = self.class_idx(h.id)?;
        let class = self.class_mut(ci);
        let nq = class.members.len();
        let slot = class.slot_of(h.id);
        let mask = 1usize << (nq - 1 - slot);
        for i in 0..class.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let a0 = class.amps[i];
                let a1 = class.amps[j];
                class.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                class.amps[j] = m[1][0] * a0 + m[1][1] * a1;
            }
        }
        Ok(())
    }

    /// Apply `phase * sigma_x^x * sigma_z^z` to one qubit (Z acts first).
    /// Global phase is retained exactly in the class vector.
    pub fn apply_pauli(&mut self, h: QubitHandle, word: PauliWord) -> Result<()> {
        self.apply_one_qubit(h, word.matrix())
    }

    pub fn apply_hadamard(&mut self, h: QubitHandle) -> Result<()> {
        let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply_one_qubit(h, [[s, s], [s, -s]])
    }

    /// Merge the classes containing the given ids into one; returns its index.
    fn merge_of(&mut self, ids: &[u64]) -> Result<usize> {
        let mut targets: Vec<usize> = Vec::new();
        for &id in ids {
            let ci = self.class_idx(id)?;
            if !targets.contains(&ci) {
                targets.push(ci);
            }
        }
        let base = targets[0];
        for &other in &targets[1..] {
            let right = self.classes[other].take().expect("live class");
            let left = self.class_mut(base);
            let mut amps = Vec::with_capacity(left.amps.len() * right.amps.len());
            for &la in &left.amps {
                for &ra in &right.amps {
                    amps.push(la * ra);
                }
            }
            left.amps = amps;
            left.members.extend_from_slice(&right.members);
            for &m in &right.members {
                self.index.insert(m, base);
            }
        }
        Ok(base)
    }

    /// Controlled swap of `a` and `b` on `control` = |1>. Used by the swap
    /// test; merges the touched classes.
    pub fn apply_cswap(
        &mut self,
        control: QubitHandle,
        a: QubitHandle,
        b: QubitHandle,
    ) -> Result<()> {
        if control.id == a.id || control.id == b.id || a.id == b.id {
            return Err(Error::DuplicateHandle);
        }
        let ci = self.merge_of(&[control.id, a.id, b.id])?;
        let class = self.class_mut(ci);
        let nq = class.members.len();
        let mc = 1usize << (nq - 1 - class.slot_of(control.id));
        let ma = 1usize << (nq - 1 - class.slot_of(a.id));
        let mb = 1usize << (nq - 1 - class.slot_of(b.id));
        for i in 0..class.amps.len() {
            if i & mc != 0 && i & ma != 0 && i & mb == 0 {
                let j = i ^ ma ^ mb;
                class.amps.swap(i, j);
            }
        }
        Ok(())
    }

    /// Projective Bell-basis measurement of the pair `(h1, h2)`, sampled with
    /// Born probabilities from the register's seeded generator. Both qubits
    /// are consumed; any remaining qubits of the merged class are renormalized
    /// to the post-measurement state.
    pub fn bell_measure(&mut self, h1: QubitHandle, h2: QubitHandle) -> Result<BellKind> {
        if h1.id == h2.id {
            return Err(Error::DuplicateHandle);
        }
        let ci = self.merge_of(&[h1.id, h2.id])?;
        let class = self.class(ci);
        let nq = class.members.len();
        let s1 = class.slot_of(h1.id);
        let s2 = class.slot_of(h2.id);
        let rest_len = 1usize << (nq - 2);

        let mut residuals: Vec<Vec<Complex64>> =
            (0..4).map(|_| vec![Complex64::new(0.0, 0.0); rest_len]).collect();
        let bells: Vec<[Complex64; 4]> = BellKind::ALL.iter().map(|k| k.vector()).collect();

        for (i, &amp) in class.amps.iter().enumerate() {
            let b1 = (i >> (nq - 1 - s1)) & 1;
            let b2 = (i >> (nq - 1 - s2)) & 1;
            let e = compress_index(i, nq, &[s1, s2]);
            let pair = b1 * 2 + b2;
            for k in 0..4 {
                residuals[k][e] += bells[k][pair].conj() * amp;
            }
        }

        let probs: Vec<f64> = residuals
            .iter()
            .map(|r| r.iter().map(|c| c.norm_sqr()).sum())
            .collect();
        let total: f64 = probs.iter().sum();
        let u: f64 = self.rng.random::<f64>() * total;
        let mut cum = 0.0;
        let mut chosen = 0;
        for (k, &p) in probs.iter().enumerate() {
            if p <= 1e-14 {
                continue;
            }
            cum += p;
            chosen = k;
            if u < cum {
                break;
            }
        }
        let p = probs[chosen];
        let kind = BellKind::ALL[chosen];

        // Collapse: drop the measured pair, renormalize the remainder.
        let class = self.classes[ci].take().expect("live class");
        self.index.remove(&h1.id);
        self.index.remove(&h2.id);
        if nq > 2 {
            let scale = 1.0 / p.sqrt();
            let amps: Vec<Complex64> = residuals[chosen].iter().map(|&c| c * scale).collect();
            let members: Vec<u64> = class
                .members
                .iter()
                .copied()
                .filter(|&m| m != h1.id && m != h2.id)
                .collect();
            let new_idx = self.classes.len();
            for &m in &members {
                self.index.insert(m, new_idx);
            }
            self.classes.push(Some(EntClass { members, amps }));
        }
        Ok(kind)
    }

    /// Computational-basis measurement of one qubit. The qubit collapses and
    /// is split into its own single-qubit class; it stays live.
    pub fn measure_qubit(&mut self, h: QubitHandle) -> Result<bool> {
        let ci = self.class_idx(h.id)?;
        let class = self.class(ci);
        let nq = class.members.len();
        let slot = class.slot_of(h.id);
        let mask = 1usize << (nq - 1 - slot);

        let p1: f64 = class
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        let outcome = self.rng.random::<f64>() < p1;
        let p = if outcome { p1 } else { 1.0 - p1 };
        let scale = 1.0 / p.sqrt();

        if nq == 1 {
            let class = self.class_mut(ci);
            let zero = Complex64::new(0.0, 0.0);
            let one = Complex64::new(1.0, 0.0);
            class.amps = if outcome { vec![zero, one] } else { vec![one, zero] };
            return Ok(outcome);
        }

        let class = self.classes[ci].take().expect("live class");
        let want = if outcome { mask } else { 0 };
        let mut rest = vec![Complex64::new(0.0, 0.0); 1 << (nq - 1)];
        for (i, &amp) in class.amps.iter().enumerate() {
            if i & mask == want {
                rest[compress_index(i, nq, &[slot])] = amp * scale;
            }
        }
        let members: Vec<u64> = class
            .members
            .iter()
            .copied()
            .filter(|&m| m != h.id)
            .collect();
        self.index.remove(&h.id);
        let rest_idx = self.classes.len();
        for &m in &members {
            self.index.insert(m, rest_idx);
        }
        self.classes.push(Some(EntClass { members, amps: rest }));

        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let amps = if outcome { vec![zero, one] } else { vec![one, zero] };
        self.push_class(EntClass {
            members: vec![h.id],
            amps,
        });
        Ok(outcome)
    }

    /// Joint pure state of all classes touched by `handles`, as
    /// (member ids in tensor order, amplitudes). Non-destructive.
    fn joint_state(&self, handles: &[QubitHandle]) -> Result<(Vec<u64>, Vec<Complex64>)> {
        let mut order: Vec<usize> = Vec::new();
        for h in handles {
            let ci = self.class_idx(h.id)?;
            if !order.contains(&ci) {
                order.push(ci);
            }
        }
        let mut members: Vec<u64> = Vec::new();
        let mut amps: Vec<Complex64> = vec![Complex64::new(1.0, 0.0)];
        for &ci in &order {
            let class = self.class(ci);
            let mut next = Vec::with_capacity(amps.len() * class.amps.len());
            for &la in &amps {
                for &ra in &class.amps {
                    next.push(la * ra);
                }
            }
            amps = next;
            members.extend_from_slice(&class.members);
        }
        Ok((members, amps))
    }

    /// Overlap `<ref| rho |ref>` where `rho` is the reduced state of the
    /// listed handles (partial trace over the other qubits of their classes).
    /// Non-destructive; global phase drops out.
    pub fn fidelity(&self, handles: &[QubitHandle], reference: &[Complex64]) -> Result<f64> {
        let k = handles.len();
        if reference.len() != 1 << k {
            return Err(Error::DimensionMismatch {
                expected: 1 << k,
                got: reference.len(),
            });
        }
        let mut seen = std::collections::HashSet::new();
        for h in handles {
            if !seen.insert(h.id) {
                return Err(Error::DuplicateHandle);
            }
        }
        let ref_norm: f64 = reference.iter().map(|c| c.norm_sqr()).sum();
        if ref_norm < 1e-12 {
            return Err(Error::DegenerateAmplitude);
        }
        let (members, amps) = self.joint_state(handles)?;
        let nq = members.len();
        let req_slots: Vec<usize> = handles
            .iter()
            .map(|h| members.iter().position(|&m| m == h.id).expect("member"))
            .collect();
        let env_slots: Vec<usize> = (0..nq).filter(|s| !req_slots.contains(s)).collect();

        let mut acc = vec![Complex64::new(0.0, 0.0); 1 << env_slots.len()];
        for (i, &amp) in amps.iter().enumerate() {
            let mut r = 0usize;
            for (t, &s) in req_slots.iter().enumerate() {
                r |= ((i >> (nq - 1 - s)) & 1) << (k - 1 - t);
            }
            let mut e = 0usize;
            for (t, &s) in env_slots.iter().enumerate() {
                e |= ((i >> (nq - 1 - s)) & 1) << (env_slots.len() - 1 - t);
            }
            acc[e] += reference[r].conj() * amp;
        }
        let overlap: f64 = acc.iter().map(|c| c.norm_sqr()).sum();
        Ok((overlap / ref_norm).clamp(0.0, 1.0))
    }

    /// Reduced density matrix of the listed handles, row-major 2^k x 2^k.
    /// Non-destructive.
    pub fn reduced_density(&self, handles: &[QubitHandle]) -> Result<Vec<Complex64>> {
        let k = handles.len();
        let dim = 1usize << k;
        let (members, amps) = self.joint_state(handles)?;
        let nq = members.len();
        let req_slots: Vec<usize> = handles
            .iter()
            .map(|h| members.iter().position(|&m| m == h.id).expect("member"))
            .collect();
        let env_slots: Vec<usize> = (0..nq).filter(|s| !req_slots.contains(s)).collect();
        let env_dim = 1usize << env_slots.len();

        // psi[e][r]
        let mut by_env = vec![vec![Complex64::new(0.0, 0.0); dim]; env_dim];
        for (i, &amp) in amps.iter().enumerate() {
            let mut r = 0usize;
            for (t, &s) in req_slots.iter().enumerate() {
                r |= ((i >> (nq - 1 - s)) & 1) << (k - 1 - t);
            }
            let mut e = 0usize;
            for (t, &s) in env_slots.iter().enumerate() {
                e |= ((i >> (nq - 1 - s)) & 1) << (env_slots.len() - 1 - t);
            }
            by_env[e][r] = amp;
        }
        let mut rho = vec![Complex64::new(0.0, 0.0); dim * dim];
        for col in &by_env {
            for r1 in 0..dim {
                for r2 in 0..dim {
                    rho[r1 * dim + r2] += col[r1] * col[r2].conj();
                }
            }
        }
        Ok(rho)
    }

    /// Snapshot of the distinct classes touched by `handles`, in first-touch
    /// order, for transcript serialization.
    pub fn snapshot_classes(&self, handles: &[QubitHandle]) -> Result<Vec<ClassSnapshot>> {
        let mut order: Vec<usize> = Vec::new();
        for h in handles {
            let ci = self.class_idx(h.id)?;
            if !order.contains(&ci) {
                order.push(ci);
            }
        }
        Ok(order
            .into_iter()
            .map(|ci| {
                let class = self.class(ci);
                (class.members.clone(), class.amps.clone())
            })
            .collect())
    }

    /// Duplicate the full classes containing `handles` (fresh ids, same
    /// vectors) and return the handles mapped onto the copies.
    ///
    /// This is a simulator convenience used to model independently prepared
    /// copies for destructive comparisons; it is not a physical operation.
    pub fn clone_subsystem(&mut self, handles: &[QubitHandle]) -> Result<Vec<QubitHandle>> {
        let mut order: Vec<usize> = Vec::new();
        for h in handles {
            let ci = self.class_idx(h.id)?;
            if !order.contains(&ci) {
                order.push(ci);
            }
        }
        let mut id_map: HashMap<u64, u64> = HashMap::new();
        for ci in order {
            let (old_members, amps) = {
                let class = self.class(ci);
                (class.members.clone(), class.amps.clone())
            };
            let new_members: Vec<u64> = old_members.iter().map(|_| self.fresh_id()).collect();
            for (&old, &new) in old_members.iter().zip(&new_members) {
                id_map.insert(old, new);
            }
            self.push_class(EntClass {
                members: new_members,
                amps,
            });
        }
        Ok(handles
            .iter()
            .map(|h| QubitHandle::new(id_map[&h.id], h.owner))
            .collect())
    }

    /// Max deviation of any class norm from 1; test hook for the norm
    /// invariant.
    pub fn worst_norm_error(&self) -> f64 {
        self.classes
            .iter()
            .flatten()
            .map(|c| {
                let n: f64 = c.amps.iter().map(|a| a.norm_sqr()).sum();
                (n.sqrt() - 1.0).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Class vector of the class containing `h`, for tests and snapshots.
    pub fn class_vector(&self, h: QubitHandle) -> Result<(Vec<u64>, Vec<Complex64>)> {
        let ci = self.class_idx(h.id)?;
        let class = self.class(ci);
        Ok((class.members.clone(), class.amps.clone()))
    }
}

/// Drop the bits at `removed` slots (tensor positions) from index `i` of an
/// `nq`-qubit vector, packing the remaining bits in order.
fn compress_index(i: usize, nq: usize, removed: &[usize]) -> usize {
    let mut out = 0usize;
    for s in 0..nq {
        if removed.contains(&s) {
            continue;
        }
        out = (out << 1) | ((i >> (nq - 1 - s)) & 1);
    }
    out
}
