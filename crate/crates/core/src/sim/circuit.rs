use rand::Rng;

use crate::error::Result;
use crate::sim::state::check_width;
use crate::sim::{Basis, GateOp, Statevector};

/// Ordered gate list over a fixed register width. Gates are validated on
/// insertion, so a stored circuit always applies cleanly to a fresh register
/// of the same width.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<GateOp>,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(Circuit {
            n_qubits,
            gates: Vec::new(),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[GateOp] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn push(&mut self, gate: GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        self.gates.push(gate);
        Ok(())
    }

    /// Reversed gate order with each gate inverted; running `self` then
    /// `self.inverse()` is the identity.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(GateOp::inverse).collect(),
        }
    }

    /// Applies every gate, in order, to `state`.
    pub fn apply_to(&self, state: &mut Statevector) -> Result<()> {
        for gate in &self.gates {
            state.apply(gate)?;
        }
        Ok(())
    }

    /// Runs the circuit on |0...0> and returns the final state.
    pub fn run(&self) -> Result<Statevector> {
        let mut state = Statevector::new(self.n_qubits)?;
        self.apply_to(&mut state)?;
        Ok(state)
    }

    /// Runs on |0...0>, then measures every qubit in `basis`, low to high.
    pub fn run_and_measure(&self, basis: Basis, rng: &mut impl Rng) -> Result<Vec<bool>> {
        let mut state = self.run()?;
        (0..self.n_qubits)
            .map(|q| state.measure(q, basis, rng))
            .collect()
    }
}
