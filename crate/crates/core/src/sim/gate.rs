use crate::error::{Error, Result};

/// Measurement basis. `Z` is the computational basis; `X` conjugates by a
/// Hadamard on either side of a `Z` measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    Z,
    X,
}

/// One gate application. Angles are radians; qubit indices are little-endian
/// (qubit 0 is the least significant bit of a basis index).
#[derive(Debug, Clone, PartialEq)]
pub enum GateOp {
    H {
        qubit: usize,
    },
    X {
        qubit: usize,
    },
    Z {
        qubit: usize,
    },
    /// diag(1, e^{i theta}) on the target qubit.
    Phase {
        qubit: usize,
        theta: f64,
    },
    /// Rotation about Y: [[cos(t/2), -sin(t/2)], [sin(t/2), cos(t/2)]].
    Ry {
        qubit: usize,
        theta: f64,
    },
    /// Rotation about Z: diag(e^{-i t/2}, e^{i t/2}).
    Rz {
        qubit: usize,
        theta: f64,
    },
    Cz {
        a: usize,
        b: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
}

impl GateOp {
    /// Qubits the gate touches, in declaration order.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            GateOp::H { qubit }
            | GateOp::X { qubit }
            | GateOp::Z { qubit }
            | GateOp::Phase { qubit, .. }
            | GateOp::Ry { qubit, .. }
            | GateOp::Rz { qubit, .. } => vec![qubit],
            GateOp::Cz { a, b } => vec![a, b],
            GateOp::Cnot { control, target } => vec![control, target],
        }
    }

    /// Checks targets against a register width: in range, and distinct for
    /// two-qubit gates.
    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= n_qubits {
                return Err(Error::usage(format!(
                    "gate {self:?} targets qubit {q}, register has {n_qubits}"
                )));
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::usage(format!(
                "gate {self:?} uses the same qubit twice"
            )));
        }
        Ok(())
    }

    /// The gate whose application undoes this one.
    pub fn inverse(&self) -> GateOp {
        match *self {
            GateOp::Phase { qubit, theta } => GateOp::Phase {
                qubit,
                theta: -theta,
            },
            GateOp::Ry { qubit, theta } => GateOp::Ry {
                qubit,
                theta: -theta,
            },
            GateOp::Rz { qubit, theta } => GateOp::Rz {
                qubit,
                theta: -theta,
            },
            // H, X, Z, CZ, CNOT are involutions.
            ref g => g.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(GateOp::H { qubit: 3 }.validate(3).is_err());
        assert!(GateOp::H { qubit: 2 }.validate(3).is_ok());
    }

    #[test]
    fn validate_rejects_coincident_pair() {
        assert!(GateOp::Cnot {
            control: 1,
            target: 1
        }
        .validate(3)
        .is_err());
        assert!(GateOp::Cz { a: 0, b: 0 }.validate(2).is_err());
        assert!(GateOp::Cz { a: 0, b: 1 }.validate(2).is_ok());
    }

    #[test]
    fn inverse_negates_angles_and_fixes_involutions() {
        let ry = GateOp::Ry {
            qubit: 0,
            theta: 0.3,
        };
        assert_eq!(
            ry.inverse(),
            GateOp::Ry {
                qubit: 0,
                theta: -0.3
            }
        );
        let h = GateOp::H { qubit: 1 };
        assert_eq!(h.inverse(), h);
        let cnot = GateOp::Cnot {
            control: 0,
            target: 1,
        };
        assert_eq!(cnot.inverse(), cnot);
    }
}
