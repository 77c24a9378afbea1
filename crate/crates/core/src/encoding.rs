//! Amplitude encoding of normalized traffic features.
//!
//! Each of the six features drives one qubit: a Hadamard spreads the qubit
//! over |0> and |1>, then RY(theta_max * f) tilts the balance by the feature
//! value, and a CNOT ladder entangles neighbouring qubits. The ladder only
//! permutes basis states, so every amplitude magnitude is a product of
//! per-qubit factors (cos(t/2) +- sin(t/2)) / sqrt(2). With the default
//! theta_max the 64 magnitudes of a real traffic row stay in a narrow band
//! around 1/8; the spread widens monotonically as theta_max grows.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sim::{Circuit, GateOp, Statevector};

pub const FEATURE_COUNT: usize = 6;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "sport",
    "tot_pkts",
    "tot_bytes",
    "src_pkts",
    "dst_pkts",
    "src_bytes",
];

/// Rotation scale keeping encoded magnitudes near 1/8 for features in [0,1].
pub const DEFAULT_THETA_MAX: f64 = 0.05;

/// Six features normalized to [0,1], in `FEATURE_NAMES` order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureVector([f64; FEATURE_COUNT]);

impl FeatureVector {
    pub fn new(values: [f64; FEATURE_COUNT]) -> Result<Self> {
        for (i, v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::usage(format!(
                    "feature {} = {v} outside [0, 1]",
                    FEATURE_NAMES[i]
                )));
            }
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64; FEATURE_COUNT] {
        &self.0
    }
}

fn check_theta_max(theta_max: f64) -> Result<()> {
    if !(theta_max > 0.0 && theta_max <= std::f64::consts::PI) {
        return Err(Error::config(format!(
            "theta_max {theta_max} outside (0, pi]"
        )));
    }
    Ok(())
}

/// Encoding circuit over one qubit per feature: H layer, RY(theta_max * f_i)
/// layer, then a CNOT ladder i -> i+1. Features must lie in [0,1].
pub fn build_encoding_circuit(features: &[f64], theta_max: f64) -> Result<Circuit> {
    check_theta_max(theta_max)?;
    if features.is_empty() {
        return Err(Error::usage("no features to encode"));
    }
    for (i, f) in features.iter().enumerate() {
        if !(0.0..=1.0).contains(f) {
            return Err(Error::usage(format!("feature {i} = {f} outside [0, 1]")));
        }
    }
    let n = features.len();
    let mut circuit = Circuit::new(n)?;
    for q in 0..n {
        circuit.push(GateOp::H { qubit: q })?;
    }
    for (q, f) in features.iter().enumerate() {
        circuit.push(GateOp::Ry {
            qubit: q,
            theta: theta_max * f,
        })?;
    }
    for q in 0..n.saturating_sub(1) {
        circuit.push(GateOp::Cnot {
            control: q,
            target: q + 1,
        })?;
    }
    Ok(circuit)
}

/// Runs the encoding circuit for a traffic row and returns the 6-qubit state.
pub fn encode_features(features: &FeatureVector, theta_max: f64) -> Result<Statevector> {
    build_encoding_circuit(features.values(), theta_max)?.run()
}

/// Basis label for `index` in an `n_qubits` register: binary, highest qubit
/// leftmost, e.g. index 1 of 6 qubits is "000001".
pub fn basis_label(index: usize, n_qubits: usize) -> String {
    format!("{index:0n_qubits$b}")
}

/// Amplitudes labeled by basis string, ascending index order.
pub fn amplitude_table(state: &Statevector) -> Vec<(String, Complex64)> {
    let n = state.n_qubits();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| (basis_label(i, n), *a))
        .collect()
}

/// CSV rows `basis,re,im,probability`, one per basis index.
pub fn amplitude_csv(state: &Statevector) -> String {
    let mut out = String::from("basis,re,im,probability\n");
    for (label, amp) in amplitude_table(state) {
        let _ = writeln!(out, "{label},{},{},{}", amp.re, amp.im, amp.norm_sqr());
    }
    out
}

/// Signed text listing, one `+c | basis>` entry per line. Amplitudes with a
/// negligible imaginary part print as a bare signed real.
pub fn amplitude_listing(state: &Statevector) -> String {
    let mut out = String::new();
    for (label, amp) in amplitude_table(state) {
        if amp.im.abs() < 1e-12 {
            let _ = writeln!(out, "{:+.10} | {label}>", amp.re);
        } else {
            let _ = writeln!(out, "({:+.10}{:+.10}i) | {label}>", amp.re, amp.im);
        }
    }
    out
}
