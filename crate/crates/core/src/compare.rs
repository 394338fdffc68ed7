//! State comparison: exact (non-destructive, simulator-level) and the
//! destructive swap test.
//!
//! Exact mode partitions the compared sequences into groups of qubits that
//! are entangled within the sequence, reduces each group to a density matrix
//! and scores it with the superfidelity
//! `Tr(rho sigma) + sqrt((1 - Tr rho^2)(1 - Tr sigma^2))`,
//! which equals the Uhlmann fidelity whenever a group is a single qubit or
//! either side is pure — the only cases the protocols produce. The verdict is
//! the minimum group score.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::register::{Party, QubitHandle, StateRegister};

fn trace_product(a: &[Complex64], b: &[Complex64], dim: usize) -> f64 {
    let mut tr = Complex64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            tr += a[i * dim + j] * b[j * dim + i];
        }
    }
    tr.re
}

/// Superfidelity of two density matrices (row-major, same dimension).
pub fn superfidelity(rho: &[Complex64], sigma: &[Complex64], dim: usize) -> f64 {
    let tr_rs = trace_product(rho, sigma, dim);
    let pur_r = trace_product(rho, rho, dim);
    let pur_s = trace_product(sigma, sigma, dim);
    let extra = ((1.0 - pur_r).max(0.0) * (1.0 - pur_s).max(0.0)).sqrt();
    (tr_rs + extra).clamp(0.0, 1.0)
}

/// Positions 0..k grouped so that two positions fall in one group whenever
/// either sequence entangles them (same entanglement class).
fn joint_groups(
    reg: &StateRegister,
    a: &[QubitHandle],
    b: &[QubitHandle],
) -> Result<Vec<Vec<usize>>> {
    let k = a.len();
    let mut group_of: Vec<usize> = (0..k).collect();
    fn root(g: &mut [usize], mut i: usize) -> usize {
        while g[i] != i {
            g[i] = g[g[i]];
            i = g[i];
        }
        i
    }
    for seq in [a, b] {
        // Class identity is the (stable) id of the class's first member.
        let mut keys = Vec::with_capacity(k);
        for h in seq {
            let (members, _) = reg.class_vector(*h)?;
            keys.push(members[0]);
        }
        for i in 0..k {
            for j in (i + 1)..k {
                if keys[i] == keys[j] {
                    let (ri, rj) = (root(&mut group_of, i), root(&mut group_of, j));
                    if ri != rj {
                        group_of[rj] = ri;
                    }
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_index: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    for i in 0..k {
        let r = root(&mut group_of, i);
        let gi = *root_index.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[gi].push(i);
    }
    Ok(groups)
}

/// Minimum group fidelity between two in-register sequences of equal length.
/// Non-destructive.
pub fn sequence_fidelity(
    reg: &StateRegister,
    a: &[QubitHandle],
    b: &[QubitHandle],
) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(1.0);
    }
    let mut worst: f64 = 1.0;
    for group in joint_groups(reg, a, b)? {
        let ha: Vec<QubitHandle> = group.iter().map(|&i| a[i]).collect();
        let hb: Vec<QubitHandle> = group.iter().map(|&i| b[i]).collect();
        let dim = 1usize << ha.len();
        let rho = reg.reduced_density(&ha)?;
        let sigma = reg.reduced_density(&hb)?;
        worst = worst.min(superfidelity(&rho, &sigma, dim));
    }
    Ok(worst)
}

/// Exact comparison of two in-register sequences: true iff every group
/// fidelity reaches `1 - tolerance`.
pub fn state_compare(
    reg: &StateRegister,
    a: &[QubitHandle],
    b: &[QubitHandle],
    tolerance: f64,
) -> Result<bool> {
    Ok(sequence_fidelity(reg, a, b)? >= 1.0 - tolerance)
}

/// Exact comparison of an in-register sequence against a pure reference
/// vector of dimension 2^len.
pub fn state_compare_pure(
    reg: &StateRegister,
    a: &[QubitHandle],
    reference: &[Complex64],
    tolerance: f64,
) -> Result<bool> {
    Ok(reg.fidelity(a, reference)? >= 1.0 - tolerance)
}

/// One destructive swap-test sample over two equal-length sequences:
/// ancilla |+>, a controlled swap per qubit pair, Hadamard, measure. Passes
/// (ancilla 0) with probability `(1 + Tr(rho sigma)) / 2`. The compared
/// states are consumed as evidence carriers and must not be reused.
pub fn swap_test_once(
    reg: &mut StateRegister,
    a: &[QubitHandle],
    b: &[QubitHandle],
) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let anc = reg.alloc_qubit(Party::Channel, one, zero)?;
    reg.apply_hadamard(anc)?;
    for (x, y) in a.iter().zip(b) {
        reg.apply_cswap(anc, *x, *y)?;
    }
    reg.apply_hadamard(anc)?;
    Ok(!reg.measure_qubit(anc)?)
}

/// Swap-test comparison over caller-supplied fresh copies, one pair per
/// trial: true iff no trial fails.
pub fn swap_test_compare(
    reg: &mut StateRegister,
    a_copies: &[Vec<QubitHandle>],
    b_copies: &[Vec<QubitHandle>],
    trials: usize,
) -> Result<bool> {
    if a_copies.len() < trials || b_copies.len() < trials {
        return Err(Error::InsufficientCopies {
            needed: trials,
            available: a_copies.len().min(b_copies.len()),
        });
    }
    for t in 0..trials {
        if !swap_test_once(reg, &a_copies[t], &b_copies[t])? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::register::BellKind;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identical_product_states_compare_equal() {
        let mut reg = StateRegister::new(1);
        let a0 = reg.alloc_qubit(Party::Alice, c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let a1 = reg.alloc_qubit(Party::Alice, c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        let b0 = reg.alloc_qubit(Party::Bob, c(0.6, 0.0), c(0.0, 0.8)).unwrap();
        let b1 = reg.alloc_qubit(Party::Bob, c(0.0, 1.0), c(0.0, 0.0)).unwrap();
        assert!(state_compare(&reg, &[a0, a1], &[b0, b1], 1e-9).unwrap());
    }

    #[test]
    fn bell_half_vs_pure_compares_unequal() {
        let mut reg = StateRegister::new(1);
        let (half, _) = reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
        let pure = reg.alloc_qubit(Party::Bob, c(0.6, 0.0), c(0.8, 0.0)).unwrap();
        let fid = sequence_fidelity(&reg, &[half], &[pure]).unwrap();
        assert!((fid - 0.5).abs() < 1e-12, "I/2 against a pure state is 1/2");
        assert!(!state_compare(&reg, &[half], &[pure], 1e-9).unwrap());
    }

    #[test]
    fn two_maximally_mixed_halves_compare_equal() {
        // Identical density matrices are indistinguishable by any comparison.
        let mut reg = StateRegister::new(1);
        let (ha, _) = reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
        let (hb, _) = reg.make_bell_pair(Party::Bob, BellKind::PsiMinus);
        assert!(state_compare(&reg, &[ha], &[hb], 1e-9).unwrap());
    }

    #[test]
    fn entangled_pair_vs_product_pair_detected_jointly() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut reg = StateRegister::new(1);
        let (a0, a1) = reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
        let b0 = reg.alloc_qubit(Party::Bob, c(s, 0.0), c(s, 0.0)).unwrap();
        let b1 = reg.alloc_qubit(Party::Bob, c(s, 0.0), c(s, 0.0)).unwrap();
        // Per-qubit marginals are identical (I/2 each side of a would be
        // needed); the joint group comparison tells them apart.
        assert!(!state_compare(&reg, &[a0, a1], &[b0, b1], 1e-3).unwrap());
    }

    #[test]
    fn swap_test_equal_pure_states_always_pass() {
        let mut reg = StateRegister::new(5);
        for _ in 0..50 {
            let a = reg.alloc_qubit(Party::Alice, c(0.6, 0.0), c(0.8, 0.0)).unwrap();
            let b = reg.alloc_qubit(Party::Bob, c(0.6, 0.0), c(0.8, 0.0)).unwrap();
            assert!(swap_test_once(&mut reg, &[a], &[b]).unwrap());
        }
    }

    #[test]
    fn swap_test_orthogonal_states_pass_half_the_time() {
        let mut reg = StateRegister::new(5);
        let mut passes = 0;
        let trials = 2000;
        for _ in 0..trials {
            let a = reg.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
            let b = reg.alloc_qubit(Party::Bob, c(0.0, 0.0), c(1.0, 0.0)).unwrap();
            if swap_test_once(&mut reg, &[a], &[b]).unwrap() {
                passes += 1;
            }
        }
        let freq = passes as f64 / trials as f64;
        assert!((freq - 0.5).abs() < 0.05, "orthogonal pass rate {freq}");
    }

    #[test]
    fn swap_test_insufficient_copies_errors() {
        let mut reg = StateRegister::new(1);
        let a = reg.alloc_qubit(Party::Alice, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let b = reg.alloc_qubit(Party::Bob, c(1.0, 0.0), c(0.0, 0.0)).unwrap();
        let err = swap_test_compare(&mut reg, &[vec![a]], &[vec![b]], 2).unwrap_err();
        assert_eq!(err, Error::InsufficientCopies { needed: 2, available: 1 });
    }

    #[test]
    fn swap_test_detects_bell_half_over_trials() {
        // Pass probability per trial is 3/4; over 16 trials the chance that
        // every trial passes is (3/4)^16, so detection is ~0.99.
        let mut reg = StateRegister::new(13);
        let reps = 400;
        let trials = 16;
        let mut detected = 0;
        for _ in 0..reps {
            let mut a_copies = Vec::new();
            let mut b_copies = Vec::new();
            for _ in 0..trials {
                let (half, _) = reg.make_bell_pair(Party::Alice, BellKind::PhiPlus);
                let pure = reg.alloc_qubit(Party::Bob, c(0.6, 0.0), c(0.8, 0.0)).unwrap();
                a_copies.push(vec![half]);
                b_copies.push(vec![pure]);
            }
            if !swap_test_compare(&mut reg, &a_copies, &b_copies, trials).unwrap() {
                detected += 1;
            }
        }
        let rate = detected as f64 / reps as f64;
        let expected = 1.0 - 0.75f64.powi(16);
        assert!(
            (rate - expected).abs() < 0.03,
            "detection rate {rate}, expected about {expected}"
        );
    }
}
