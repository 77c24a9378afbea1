//! Shared test oracle: a dense-matrix quantum simulator.
//!
//! Deliberately independent of the production kernels. Each gate becomes a
//! full 2^n x 2^n matrix built element-wise from its textbook 2x2 or 4x4
//! form, and circuits run by repeated matrix-vector products. Slow and
//! obvious on purpose; disagreements point at the fast path.

use num_complex::Complex64;
use qscada_core::sim::{Circuit, GateOp};
use rand::Rng;

pub type Matrix = Vec<Vec<Complex64>>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn single_qubit_unitary(gate: &GateOp) -> Option<(usize, [[Complex64; 2]; 2])> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match *gate {
        GateOp::H { qubit } => Some((qubit, [[c(r, 0.0), c(r, 0.0)], [c(r, 0.0), c(-r, 0.0)]])),
        GateOp::X { qubit } => Some((
            qubit,
            [
                [Complex64::ZERO, Complex64::ONE],
                [Complex64::ONE, Complex64::ZERO],
            ],
        )),
        GateOp::Z { qubit } => Some((
            qubit,
            [
                [Complex64::ONE, Complex64::ZERO],
                [Complex64::ZERO, -Complex64::ONE],
            ],
        )),
        GateOp::Phase { qubit, theta } => Some((
            qubit,
            [
                [Complex64::ONE, Complex64::ZERO],
                [Complex64::ZERO, Complex64::from_polar(1.0, theta)],
            ],
        )),
        GateOp::Ry { qubit, theta } => {
            let (s, co) = (theta / 2.0).sin_cos();
            Some((qubit, [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]))
        }
        GateOp::Rz { qubit, theta } => Some((
            qubit,
            [
                [Complex64::from_polar(1.0, -theta / 2.0), Complex64::ZERO],
                [Complex64::ZERO, Complex64::from_polar(1.0, theta / 2.0)],
            ],
        )),
        _ => None,
    }
}

/// Local basis index for a two-qubit gate: first qubit's bit is the high
/// bit, second qubit's bit the low bit.
fn two_qubit_unitary(gate: &GateOp) -> Option<(usize, usize, [[Complex64; 4]; 4])> {
    let mut u = [[Complex64::ZERO; 4]; 4];
    match *gate {
        GateOp::Cz { a, b } => {
            for (i, row) in u.iter_mut().enumerate() {
                row[i] = if i == 3 {
                    -Complex64::ONE
                } else {
                    Complex64::ONE
                };
            }
            Some((a, b, u))
        }
        GateOp::Cnot { control, target } => {
            // (c, t) -> (c, t xor c): 00->00, 01->01, 10->11, 11->10.
            u[0][0] = Complex64::ONE;
            u[1][1] = Complex64::ONE;
            u[3][2] = Complex64::ONE;
            u[2][3] = Complex64::ONE;
            Some((control, target, u))
        }
        _ => None,
    }
}

/// Full-register matrix for one gate.
#[allow(clippy::needless_range_loop)] // explicit (row, col) indexing is the point here
pub fn gate_matrix(gate: &GateOp, n_qubits: usize) -> Matrix {
    let dim = 1usize << n_qubits;
    let mut m = vec![vec![Complex64::ZERO; dim]; dim];
    if let Some((q, u)) = single_qubit_unitary(gate) {
        let mask = 1usize << q;
        for col in 0..dim {
            for row in 0..dim {
                if row & !mask != col & !mask {
                    continue;
                }
                let r = (row >> q) & 1;
                let cbit = (col >> q) & 1;
                m[row][col] = u[r][cbit];
            }
        }
    } else if let Some((a, b, u)) = two_qubit_unitary(gate) {
        let mask = (1usize << a) | (1usize << b);
        for col in 0..dim {
            for row in 0..dim {
                if row & !mask != col & !mask {
                    continue;
                }
                let r = ((row >> a) & 1) * 2 + ((row >> b) & 1);
                let cbit = ((col >> a) & 1) * 2 + ((col >> b) & 1);
                m[row][col] = u[r][cbit];
            }
        }
    } else {
        unreachable!("gate {gate:?} not covered by the oracle");
    }
    m
}

fn matvec(m: &Matrix, v: &[Complex64]) -> Vec<Complex64> {
    m.iter()
        .map(|row| row.iter().zip(v.iter()).map(|(a, b)| a * b).sum())
        .collect()
}

/// Runs `circuit` on |0...0> with dense matrix products.
pub fn oracle_run(circuit: &Circuit) -> Vec<Complex64> {
    let dim = 1usize << circuit.n_qubits();
    let mut state = vec![Complex64::ZERO; dim];
    state[0] = Complex64::ONE;
    for gate in circuit.gates() {
        state = matvec(&gate_matrix(gate, circuit.n_qubits()), &state);
    }
    state
}

pub fn max_amp_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Uniformly random circuit drawing from every supported gate kind.
pub fn random_circuit(n_qubits: usize, n_gates: usize, rng: &mut impl Rng) -> Circuit {
    let mut circuit = Circuit::new(n_qubits).expect("valid width");
    for _ in 0..n_gates {
        let q = rng.random_range(0..n_qubits);
        let theta = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
        let gate = match rng.random_range(0..8u8) {
            0 => GateOp::H { qubit: q },
            1 => GateOp::X { qubit: q },
            2 => GateOp::Z { qubit: q },
            3 => GateOp::Phase { qubit: q, theta },
            4 => GateOp::Ry { qubit: q, theta },
            5 => GateOp::Rz { qubit: q, theta },
            kind => {
                if n_qubits < 2 {
                    GateOp::H { qubit: q }
                } else {
                    let mut other = rng.random_range(0..n_qubits);
                    while other == q {
                        other = rng.random_range(0..n_qubits);
                    }
                    if kind == 6 {
                        GateOp::Cz { a: q, b: other }
                    } else {
                        GateOp::Cnot {
                            control: q,
                            target: other,
                        }
                    }
                }
            }
        };
        circuit.push(gate).expect("generated gate is valid");
    }
    circuit
}
