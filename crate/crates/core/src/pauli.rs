//! Pauli words over a single qubit, with exact phase tracking.
//!
//! A word is stored in the canonical form `phase * X^x * Z^z`. Composition
//! keeps the anticommutation sign (`XZ = -ZX`) in the phase, so reordering
//! a product of words is exact rather than "up to global phase".

use num_complex::Complex64;

/// One of the fourth roots of unity carried by a Pauli word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    PlusOne,
    PlusI,
    MinusOne,
    MinusI,
}

impl Phase {
    pub fn as_complex(self) -> Complex64 {
        match self {
            Phase::PlusOne => Complex64::new(1.0, 0.0),
            Phase::PlusI => Complex64::new(0.0, 1.0),
            Phase::MinusOne => Complex64::new(-1.0, 0.0),
            Phase::MinusI => Complex64::new(0.0, -1.0),
        }
    }

    fn quarter_turns(self) -> u8 {
        match self {
            Phase::PlusOne => 0,
            Phase::PlusI => 1,
            Phase::MinusOne => 2,
            Phase::MinusI => 3,
        }
    }

    fn from_quarter_turns(t: u8) -> Self {
        match t % 4 {
            0 => Phase::PlusOne,
            1 => Phase::PlusI,
            2 => Phase::MinusOne,
            _ => Phase::MinusI,
        }
    }

    pub fn negate(self) -> Phase {
        self * Phase::MinusOne
    }

    pub fn inverse(self) -> Phase {
        Phase::from_quarter_turns(4 - self.quarter_turns() % 4)
    }
}

impl std::ops::Mul for Phase {
    type Output = Phase;

    // Multiplying roots of unity adds their exponents.
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, other: Phase) -> Phase {
        Phase::from_quarter_turns(self.quarter_turns() + other.quarter_turns())
    }
}

/// `phase * sigma_x^x * sigma_z^z` acting on one qubit.
///
/// In operator products the rightmost factor acts first, so applying a word
/// means: apply `sigma_z` if `z`, then `sigma_x` if `x`, then scale by `phase`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PauliWord {
    pub x: bool,
    pub z: bool,
    pub phase: Phase,
}

impl PauliWord {
    pub const IDENTITY: PauliWord = PauliWord {
        x: false,
        z: false,
        phase: Phase::PlusOne,
    };

    pub const X: PauliWord = PauliWord {
        x: true,
        z: false,
        phase: Phase::PlusOne,
    };

    pub const Z: PauliWord = PauliWord {
        x: false,
        z: true,
        phase: Phase::PlusOne,
    };

    pub fn new(x: bool, z: bool) -> Self {
        PauliWord {
            x,
            z,
            phase: Phase::PlusOne,
        }
    }

    pub fn with_phase(x: bool, z: bool, phase: Phase) -> Self {
        PauliWord { x, z, phase }
    }

    pub fn is_identity(&self) -> bool {
        !self.x && !self.z && self.phase == Phase::PlusOne
    }

    /// Operator product `self * rhs` (rhs acts first), normalized to canonical
    /// form. Moving `rhs`'s X past `self`'s Z picks up `(-1)^(z1 & x2)`.
    pub fn compose(self, rhs: PauliWord) -> PauliWord {
        let mut phase = self.phase * rhs.phase;
        if self.z && rhs.x {
            phase = phase.negate();
        }
        PauliWord {
            x: self.x ^ rhs.x,
            z: self.z ^ rhs.z,
            phase,
        }
    }

    /// Exact inverse: `(phase X^x Z^z)^-1 = phase^-1 (-1)^(x&z) X^x Z^z`.
    pub fn inverse(self) -> PauliWord {
        let mut phase = self.phase.inverse();
        if self.x && self.z {
            phase = phase.negate();
        }
        PauliWord {
            x: self.x,
            z: self.z,
            phase,
        }
    }

    /// 2x2 matrix, row-major: `m[row][col]`.
    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let p = self.phase.as_complex();
        let mut m = [[zero; 2]; 2];
        // X^x Z^z maps |0> -> |x>, |1> -> (-1)^z |1^x>.
        let out0 = usize::from(self.x);
        let out1 = 1 ^ out0;
        m[out0][0] = p;
        m[out1][1] = if self.z { -p } else { p };
        m
    }
}

impl std::fmt::Display for PauliWord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sign = match self.phase {
            Phase::PlusOne => "",
            Phase::PlusI => "i*",
            Phase::MinusOne => "-",
            Phase::MinusI => "-i*",
        };
        let body = match (self.x, self.z) {
            (false, false) => "I",
            (true, false) => "X",
            (false, true) => "Z",
            (true, true) => "XZ",
        };
        write!(f, "{sign}{body}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat_mul(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> [[Complex64; 2]; 2] {
        let zero = Complex64::new(0.0, 0.0);
        let mut out = [[zero; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                out[r][c] = a[r][0] * b[0][c] + a[r][1] * b[1][c];
            }
        }
        out
    }

    fn mat_close(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> bool {
        (0..2).all(|r| (0..2).all(|c| (a[r][c] - b[r][c]).norm() < 1e-12))
    }

    #[test]
    fn compose_matches_matrix_product() {
        let words = [
            PauliWord::IDENTITY,
            PauliWord::X,
            PauliWord::Z,
            PauliWord::new(true, true),
        ];
        for &a in &words {
            for &b in &words {
                let composed = a.compose(b).matrix();
                let product = mat_mul(a.matrix(), b.matrix());
                assert!(mat_close(composed, product), "{a} * {b}");
            }
        }
    }

    #[test]
    fn xz_anticommute_in_phase() {
        let xz = PauliWord::X.compose(PauliWord::Z);
        let zx = PauliWord::Z.compose(PauliWord::X);
        assert_eq!(xz.x, zx.x);
        assert_eq!(xz.z, zx.z);
        assert_eq!(xz.phase, Phase::PlusOne);
        assert_eq!(zx.phase, Phase::MinusOne);
    }

    #[test]
    fn inverse_composes_to_identity() {
        for x in [false, true] {
            for z in [false, true] {
                for phase in [Phase::PlusOne, Phase::PlusI, Phase::MinusOne, Phase::MinusI] {
                    let w = PauliWord::with_phase(x, z, phase);
                    assert!(w.compose(w.inverse()).is_identity(), "{w}");
                    assert!(w.inverse().compose(w).is_identity(), "{w}");
                }
            }
        }
    }

    #[test]
    fn phase_multiplication_table() {
        assert_eq!(Phase::PlusI * Phase::PlusI, Phase::MinusOne);
        assert_eq!(Phase::MinusI * Phase::PlusI, Phase::PlusOne);
        assert_eq!(Phase::MinusOne * Phase::MinusOne, Phase::PlusOne);
        assert_eq!(Phase::MinusI.inverse(), Phase::PlusI);
    }
}
