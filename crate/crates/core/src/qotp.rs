//! Quantum one-time pad, the keyed signing transform, and the Bell-state
//! key-inference map.
//!
//! Per-qubit pad convention: qubit `i` (0-based) is padded with the bit pair
//! `(z, x) = (bits[2i], bits[2i+1])`, encryption applies Z first and then X,
//! decryption applies X first and then Z. Two-bit table row labels read as
//! `(x, z)`: row "10" means a lone X, row "01" a lone Z. The canonical
//! internal form is always a [`PauliWord`]; bitstring parsing is confined to
//! [`KeySchedule`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Phase, PauliWord};
use crate::register::{BellKind, QubitHandle, StateRegister};

/// Role of a classical key in the protocols.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum KeyLabel {
    /// Alice <-> arbitrator.
    KA,
    /// Bob <-> arbitrator.
    KB,
    /// Alice <-> Bob.
    KAB,
    /// Alice's per-run random number.
    R,
    Other,
}

impl std::fmt::Display for KeyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            KeyLabel::KA => "K_A",
            KeyLabel::KB => "K_B",
            KeyLabel::KAB => "K_AB",
            KeyLabel::R => "r",
            KeyLabel::Other => "other",
        };
        write!(f, "{s}")
    }
}

/// Classical secret bitstring. Bit 0 is the key's first bit (K^1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Key {
    bits: Vec<bool>,
    label: KeyLabel,
}

impl Key {
    pub fn from_bits(label: KeyLabel, bits: Vec<bool>) -> Self {
        Key { bits, label }
    }

    pub fn random<R: Rng>(label: KeyLabel, len: usize, rng: &mut R) -> Self {
        let bits = (0..len).map(|_| rng.random_bool(0.5)).collect();
        Key { bits, label }
    }

    pub fn label(&self) -> KeyLabel {
        self.label
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn segment(&self, offset: usize, len: usize) -> Result<&[bool]> {
        if offset + len > self.bits.len() {
            return Err(Error::KeyExhausted {
                needed: len,
                offset,
                available: self.bits.len(),
            });
        }
        Ok(&self.bits[offset..offset + len])
    }

    /// Lowercase hex, most significant bit of the first digit = K^1. A length
    /// that is not a multiple of four is zero-padded on the right.
    pub fn to_hex(&self) -> String {
        let mut out = String::with_capacity(self.bits.len().div_ceil(4));
        for chunk in self.bits.chunks(4) {
            let mut nibble = 0u8;
            for (i, &b) in chunk.iter().enumerate() {
                if b {
                    nibble |= 1 << (3 - i);
                }
            }
            out.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        out
    }

    pub fn from_hex(label: KeyLabel, hex: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(hex.len() * 4);
        for ch in hex.chars() {
            let nibble = ch
                .to_digit(16)
                .ok_or_else(|| Error::InvalidHexKey(hex.to_string()))?;
            for i in 0..4 {
                bits.push(nibble & (1 << (3 - i)) != 0);
            }
        }
        Ok(Key { bits, label })
    }

    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }
}

/// Per-qubit (z, x) pad schedule carved out of a key at a bit offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeySchedule {
    pairs: Vec<(bool, bool)>,
}

impl KeySchedule {
    /// QOTP schedule: two bits per qubit, `(z, x) = (K^(2i-1), K^(2i))`.
    pub fn qotp(key: &Key, offset: usize, qubits: usize) -> Result<Self> {
        let seg = key.segment(offset, 2 * qubits)?;
        let pairs = seg.chunks(2).map(|p| (p[0], p[1])).collect();
        Ok(KeySchedule { pairs })
    }

    pub fn pairs(&self) -> &[(bool, bool)] {
        &self.pairs
    }
}

/// QOTP encryption at a schedule offset: qubit `i` gets
/// `sigma_x^(x_i) sigma_z^(z_i)` (Z first).
pub fn qotp_encrypt_at(
    reg: &mut StateRegister,
    key: &Key,
    offset: usize,
    qubits: &[QubitHandle],
) -> Result<()> {
    let sched = KeySchedule::qotp(key, offset, qubits.len())?;
    for (h, &(z, x)) in qubits.iter().zip(sched.pairs()) {
        reg.apply_pauli(*h, PauliWord::new(x, z))?;
    }
    Ok(())
}

/// QOTP decryption at a schedule offset: qubit `i` gets
/// `sigma_z^(z_i) sigma_x^(x_i)` (X first). `D . E` is exactly the identity.
pub fn qotp_decrypt_at(
    reg: &mut StateRegister,
    key: &Key,
    offset: usize,
    qubits: &[QubitHandle],
) -> Result<()> {
    let sched = KeySchedule::qotp(key, offset, qubits.len())?;
    for (h, &(z, x)) in qubits.iter().zip(sched.pairs()) {
        // Z^z X^x in canonical form picks up (-1)^(z&x).
        let phase = if z && x { Phase::MinusOne } else { Phase::PlusOne };
        reg.apply_pauli(*h, PauliWord::with_phase(x, z, phase))?;
    }
    Ok(())
}

pub fn qotp_encrypt(reg: &mut StateRegister, key: &Key, qubits: &[QubitHandle]) -> Result<()> {
    qotp_encrypt_at(reg, key, 0, qubits)
}

pub fn qotp_decrypt(reg: &mut StateRegister, key: &Key, qubits: &[QubitHandle]) -> Result<()> {
    qotp_decrypt_at(reg, key, 0, qubits)
}

/// Form of the keyed signing transform `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigningMode {
    /// One key bit `b` per qubit: `sigma_x^(1 xor b) sigma_z^b`. Commutes with
    /// Pauli pads up to phase.
    PaperExample,
    /// Three key bits `(b1, b2, b3)` per qubit:
    /// `H^(b3) sigma_x^(1 xor b1) sigma_z^(b1 xor b2)`. The keyed Hadamard
    /// layer breaks commutativity with Pauli words whenever `b3` is set.
    NonCommutative,
}

impl SigningMode {
    pub fn bits_per_qubit(self) -> usize {
        match self {
            SigningMode::PaperExample => 1,
            SigningMode::NonCommutative => 3,
        }
    }
}

/// Apply the signing transform `M_key` in place.
pub fn signing_transform(
    reg: &mut StateRegister,
    key: &Key,
    offset: usize,
    qubits: &[QubitHandle],
    mode: SigningMode,
) -> Result<()> {
    let per = mode.bits_per_qubit();
    let seg = key.segment(offset, per * qubits.len())?;
    for (i, h) in qubits.iter().enumerate() {
        match mode {
            SigningMode::PaperExample => {
                let b = seg[i];
                reg.apply_pauli(*h, PauliWord::new(!b, b))?;
            }
            SigningMode::NonCommutative => {
                let (b1, b2, b3) = (seg[3 * i], seg[3 * i + 1], seg[3 * i + 2]);
                reg.apply_pauli(*h, PauliWord::new(!b1, b1 ^ b2))?;
                if b3 {
                    reg.apply_hadamard(*h)?;
                }
            }
        }
    }
    Ok(())
}

/// Exact inverse of [`signing_transform`].
pub fn signing_untransform(
    reg: &mut StateRegister,
    key: &Key,
    offset: usize,
    qubits: &[QubitHandle],
    mode: SigningMode,
) -> Result<()> {
    let per = mode.bits_per_qubit();
    let seg = key.segment(offset, per * qubits.len())?;
    for (i, h) in qubits.iter().enumerate() {
        match mode {
            SigningMode::PaperExample => {
                let b = seg[i];
                reg.apply_pauli(*h, PauliWord::new(!b, b).inverse())?;
            }
            SigningMode::NonCommutative => {
                let (b1, b2, b3) = (seg[3 * i], seg[3 * i + 1], seg[3 * i + 2]);
                if b3 {
                    reg.apply_hadamard(*h)?;
                }
                reg.apply_pauli(*h, PauliWord::new(!b1, b1 ^ b2).inverse())?;
            }
        }
    }
    Ok(())
}

/// Given the Bell state a pair started in and the kind observed after one
/// half was padded, return the unique pad exponents `(z, x)` that explain the
/// transition. Total and bijective for fixed `initial`.
pub fn infer_key_pair(initial: BellKind, measured: BellKind) -> (bool, bool) {
    let (fi, pi) = initial.flip_phase();
    let (fm, pm) = measured.flip_phase();
    (pi ^ pm, fi ^ fm)
}

/// Forward direction of the same map: the kind obtained by padding one half
/// of `initial` with exponents `(z, x)`. Sign is dropped (unobservable).
pub fn pad_image_kind(initial: BellKind, z: bool, x: bool) -> BellKind {
    let (f, p) = initial.flip_phase();
    BellKind::from_flip_phase(f ^ x, p ^ z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::Party;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_pad_leaves_state() {
        let mut reg = StateRegister::new(1);
        let key = Key::from_bits(KeyLabel::Other, vec![false, false]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = reg.alloc_qubit(Party::Alice, c(s, 0.0), c(s, 0.0)).unwrap();
        qotp_encrypt(&mut reg, &key, &[h]).unwrap();
        let f = reg.fidelity(&[h], &[c(s, 0.0), c(s, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        qotp_decrypt(&mut reg, &key, &[h]).unwrap();
        let f = reg.fidelity(&[h], &[c(s, 0.0), c(s, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn x_pad_flips_zero() {
        let mut reg = StateRegister::new(1);
        // (z=0, x=1)
        let key = Key::from_bits(KeyLabel::Other, vec![false, true]);
        let h = reg.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        qotp_encrypt(&mut reg, &key, &[h]).unwrap();
        let f = reg.fidelity(&[h], &[c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zx_pad_on_bell_half_matches_signed_table_entry() {
        let mut reg = StateRegister::new(1);
        let key = Key::from_bits(KeyLabel::Other, vec![true, true]);
        let (a, _) = reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
        qotp_encrypt(&mut reg, &key, &[a]).unwrap();
        let (_, v) = reg.class_vector(a).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let want = [c(0.0, 0.0), c(-s, 0.0), c(s, 0.0), c(0.0, 0.0)];
        for (g, w) in v.iter().zip(&want) {
            assert!((g - w).norm() < 1e-12, "-psi- expected");
        }
    }

    #[test]
    fn decrypt_undoes_encrypt_exactly() {
        // D E = I as matrices, so the class vector is restored including
        // global phase.
        for bits in 0..16u8 {
            let key = Key::from_bits(
                KeyLabel::Other,
                (0..4).map(|i| bits & (1 << i) != 0).collect(),
            );
            let mut reg = StateRegister::new(9);
            let h0 = reg.alloc_qubit(Party::Alice, c(0.6, 0.0), c(0.0, 0.8)).unwrap();
            let h1 = reg.alloc_qubit(Party::Alice, c(0.28, -0.96), c(0.0, 0.0)).unwrap();
            let before0 = reg.class_vector(h0).unwrap().1;
            let before1 = reg.class_vector(h1).unwrap().1;
            qotp_encrypt(&mut reg, &key, &[h0, h1]).unwrap();
            qotp_decrypt(&mut reg, &key, &[h0, h1]).unwrap();
            for (g, w) in reg.class_vector(h0).unwrap().1.iter().zip(&before0) {
                assert!((g - w).norm() < 1e-12);
            }
            for (g, w) in reg.class_vector(h1).unwrap().1.iter().zip(&before1) {
                assert!((g - w).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn key_too_short_errors() {
        let mut reg = StateRegister::new(1);
        let key = Key::from_bits(KeyLabel::Other, vec![true]);
        let h = reg.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        assert!(matches!(
            qotp_encrypt(&mut reg, &key, &[h]),
            Err(Error::KeyExhausted { .. })
        ));
    }

    #[test]
    fn signing_paper_example() {
        // Key bit 0 -> sigma_x; key bit 1 on |0> -> sigma_z|0> = |0>.
        let mut reg = StateRegister::new(1);
        let key0 = Key::from_bits(KeyLabel::KA, vec![false]);
        let h = reg.alloc_qubit(Party::Alice, c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        signing_transform(&mut reg, &key0, 0, &[h], SigningMode::PaperExample).unwrap();
        let f = reg.fidelity(&[h], &[c(0.8, 0.0), c(0.6, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);

        let key1 = Key::from_bits(KeyLabel::KA, vec![true]);
        let h = reg.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        signing_transform(&mut reg, &key1, 0, &[h], SigningMode::PaperExample).unwrap();
        let f = reg.fidelity(&[h], &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signing_untransform_roundtrips() {
        for mode in [SigningMode::PaperExample, SigningMode::NonCommutative] {
            for pattern in 0..64u8 {
                let bits: Vec<bool> = (0..6).map(|i| pattern & (1 << i) != 0).collect();
                let key = Key::from_bits(KeyLabel::R, bits);
                let mut reg = StateRegister::new(2);
                let h0 = reg.alloc_qubit(Party::Alice, c(0.6, 0.0), c(0.0, 0.8)).unwrap();
                let h1 = reg.alloc_qubit(Party::Alice, c(0.0, 1.0), c(0.0, 0.0)).unwrap();
                let before0 = reg.class_vector(h0).unwrap().1;
                let before1 = reg.class_vector(h1).unwrap().1;
                signing_transform(&mut reg, &key, 0, &[h0, h1], mode).unwrap();
                signing_untransform(&mut reg, &key, 0, &[h0, h1], mode).unwrap();
                for (g, w) in reg.class_vector(h0).unwrap().1.iter().zip(&before0) {
                    assert!((g - w).norm() < 1e-12, "mode {mode:?} pattern {pattern}");
                }
                for (g, w) in reg.class_vector(h1).unwrap().1.iter().zip(&before1) {
                    assert!((g - w).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn non_commutative_mode_has_witness() {
        // With b3 = 1, M . X differs from X . M on |0> by more than phase.
        let key = Key::from_bits(KeyLabel::R, vec![false, false, true]);
        let mut reg_mx = StateRegister::new(1);
        let h_mx = reg_mx.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        reg_mx.apply_pauli(h_mx, PauliWord::X).unwrap();
        signing_transform(&mut reg_mx, &key, 0, &[h_mx], SigningMode::NonCommutative).unwrap();
        let (_, v_mx) = reg_mx.class_vector(h_mx).unwrap();

        let mut reg_xm = StateRegister::new(1);
        let h_xm = reg_xm.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        signing_transform(&mut reg_xm, &key, 0, &[h_xm], SigningMode::NonCommutative).unwrap();
        reg_xm.apply_pauli(h_xm, PauliWord::X).unwrap();
        let (_, v_xm) = reg_xm.class_vector(h_xm).unwrap();

        let overlap: Complex64 = v_mx.iter().zip(&v_xm).map(|(a, b)| a.conj() * b).sum();
        assert!(
            overlap.norm_sqr() < 1.0 - 1e-3,
            "fidelity {} should be well below 1",
            overlap.norm_sqr()
        );
    }

    #[test]
    fn infer_key_pair_examples() {
        assert_eq!(infer_key_pair(BellKind::PhiPlus, BellKind::PsiPlus), (false, true));
        assert_eq!(infer_key_pair(BellKind::PhiPlus, BellKind::PhiPlus), (false, false));
        assert_eq!(infer_key_pair(BellKind::PsiPlus, BellKind::PhiMinus), (true, true));
    }

    #[test]
    fn infer_key_pair_is_inverse_of_pad_image() {
        for initial in BellKind::ALL {
            let mut seen = std::collections::HashSet::new();
            for z in [false, true] {
                for x in [false, true] {
                    let measured = pad_image_kind(initial, z, x);
                    assert!(seen.insert(measured), "rows must be permutations");
                    assert_eq!(infer_key_pair(initial, measured), (z, x));
                }
            }
            assert_eq!(seen.len(), 4);
        }
    }

    #[test]
    fn hex_roundtrip_msb_first() {
        let key = Key::from_bits(
            KeyLabel::KB,
            vec![true, false, true, false, false, false, false, true],
        );
        assert_eq!(key.to_hex(), "a1");
        let back = Key::from_hex(KeyLabel::KB, "a1").unwrap();
        assert_eq!(back.bits(), key.bits());
        assert!(Key::from_hex(KeyLabel::KB, "zz").is_err());
    }
}
