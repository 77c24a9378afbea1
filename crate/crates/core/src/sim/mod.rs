//! Dense statevector simulator.
//!
//! Registers hold 1..=12 qubits, indexed little-endian: qubit 0 is the least
//! significant bit of a basis index, so index 1 of a 6-qubit register is the
//! state with qubit 0 set. Gates act in place on amplitude pairs; nothing
//! here allocates per gate. Unitary gates preserve the norm to within 1e-10
//! over any sequence this crate produces, and measurements renormalize, so a
//! state is always safe to keep using.

mod circuit;
mod gate;
mod state;

pub use circuit::Circuit;
pub use gate::{Basis, GateOp};
pub use state::{Statevector, MAX_QUBITS, NORM_TOL};
