use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::sim::{Basis, GateOp};

/// Widest register the dense simulator accepts. 2^12 amplitudes keeps every
/// operation comfortably in cache; nothing in this crate needs more.
pub const MAX_QUBITS: usize = 12;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOL: f64 = 1e-10;

/// Dense statevector over `n_qubits` qubits, little-endian: qubit `q`
/// contributes bit `q` of a basis index.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

pub(crate) fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::config(format!(
            "register width {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

impl Statevector {
    /// All-zeros basis state |0...0> on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[0] = Complex64::ONE;
        Ok(Statevector { n_qubits, amps })
    }

    /// Wraps raw amplitudes. Length must be 2^n_qubits and the norm must
    /// already be 1 within `NORM_TOL`.
    pub fn from_amplitudes(n_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_width(n_qubits)?;
        if amps.len() != 1 << n_qubits {
            return Err(Error::usage(format!(
                "expected {} amplitudes for {} qubits, got {}",
                1usize << n_qubits,
                n_qubits,
                amps.len()
            )));
        }
        let state = Statevector { n_qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::usage(format!("amplitudes have norm {norm}, want 1")));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// |amplitude|^2 per basis index, ascending index order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.validate(self.n_qubits)?;
        match *gate {
            GateOp::H { qubit } => self.map_pairs(qubit, |a, b| {
                ((a + b) * FRAC_1_SQRT_2, (a - b) * FRAC_1_SQRT_2)
            }),
            GateOp::X { qubit } => self.map_pairs(qubit, |a, b| (b, a)),
            GateOp::Z { qubit } => self.map_pairs(qubit, |a, b| (a, -b)),
            GateOp::Phase { qubit, theta } => {
                let w = Complex64::from_polar(1.0, theta);
                self.map_pairs(qubit, |a, b| (a, b * w));
            }
            GateOp::Ry { qubit, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                self.map_pairs(qubit, |a, b| (a * c - b * s, a * s + b * c));
            }
            GateOp::Rz { qubit, theta } => {
                let w0 = Complex64::from_polar(1.0, -theta / 2.0);
                let w1 = Complex64::from_polar(1.0, theta / 2.0);
                self.map_pairs(qubit, |a, b| (a * w0, b * w1));
            }
            GateOp::Cz { a, b } => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            GateOp::Cnot { control, target } => {
                let cmask = 1usize << control;
                let tmask = 1usize << target;
                for i in 0..self.amps.len() {
                    if i & cmask != 0 && i & tmask == 0 {
                        self.amps.swap(i, i | tmask);
                    }
                }
            }
        }
        Ok(())
    }

    /// Applies `f` to every (bit=0, bit=1) amplitude pair of `qubit`.
    fn map_pairs<F>(&mut self, qubit: usize, f: F)
    where
        F: Fn(Complex64, Complex64) -> (Complex64, Complex64),
    {
        let mask = 1usize << qubit;
        for i in 0..self.amps.len() {
            if i & mask == 0 {
                let j = i | mask;
                let (a, b) = f(self.amps[i], self.amps[j]);
                self.amps[i] = a;
                self.amps[j] = b;
            }
        }
    }

    /// Projective measurement of one qubit. Collapses the state, renormalizes,
    /// and returns the observed bit. `Basis::X` measures after rotating the
    /// qubit into the computational basis and rotates back afterwards.
    pub fn measure(&mut self, qubit: usize, basis: Basis, rng: &mut impl Rng) -> Result<bool> {
        if qubit >= self.n_qubits {
            return Err(Error::usage(format!(
                "measured qubit {qubit}, register has {}",
                self.n_qubits
            )));
        }
        if basis == Basis::X {
            self.apply(&GateOp::H { qubit })?;
        }
        let mask = 1usize << qubit;
        let prob_zero: f64 = self
            .amps
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == 0)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let outcome = rng.random::<f64>() >= prob_zero;
        let keep = if outcome { mask } else { 0 };
        let p_outcome = if outcome { 1.0 - prob_zero } else { prob_zero };
        let scale = 1.0 / p_outcome.sqrt();
        for (i, amp) in self.amps.iter_mut().enumerate() {
            if i & mask == keep {
                *amp *= scale;
            } else {
                *amp = Complex64::ZERO;
            }
        }
        if basis == Basis::X {
            self.apply(&GateOp::H { qubit })?;
        }
        Ok(outcome)
    }

    /// One full-register Z-basis measurement: draws a basis index from the
    /// probability distribution and collapses onto it.
    pub fn measure_all(&mut self, rng: &mut impl Rng) -> usize {
        let index = self.sample_index(rng);
        for amp in self.amps.iter_mut() {
            *amp = Complex64::ZERO;
        }
        self.amps[index] = Complex64::ONE;
        index
    }

    /// Draws a basis index from |amplitude|^2 without collapsing. Equivalent
    /// to a full-register Z measurement on a fresh copy.
    pub fn sample_index(&self, rng: &mut impl Rng) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, amp) in self.amps.iter().enumerate() {
            acc += amp.norm_sqr();
            if u < acc {
                return i;
            }
        }
        // Rounding left acc slightly below 1; the draw belongs to the tail.
        self.amps.len() - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;

    #[test]
    fn new_single_qubit_is_ket_zero() {
        let sv = Statevector::new(1).unwrap();
        assert_eq!(sv.amplitudes(), &[Complex64::ONE, Complex64::ZERO]);
    }

    #[test]
    fn new_six_qubits_concentrates_on_index_zero() {
        let sv = Statevector::new(6).unwrap();
        assert_eq!(sv.amplitudes().len(), 64);
        assert_eq!(sv.amplitudes()[0], Complex64::ONE);
        assert!(sv.amplitudes()[1..].iter().all(|a| *a == Complex64::ZERO));
    }

    #[test]
    fn new_rejects_width_outside_bounds() {
        assert!(matches!(Statevector::new(0), Err(Error::Config(_))));
        assert!(matches!(Statevector::new(13), Err(Error::Config(_))));
        assert!(Statevector::new(12).is_ok());
    }

    #[test]
    fn from_amplitudes_checks_length_and_norm() {
        let bad_len = Statevector::from_amplitudes(2, vec![Complex64::ONE; 3]);
        assert!(matches!(bad_len, Err(Error::Usage(_))));
        let bad_norm = Statevector::from_amplitudes(1, vec![Complex64::ONE, Complex64::ONE]);
        assert!(matches!(bad_norm, Err(Error::Usage(_))));
    }

    #[test]
    fn hadamard_on_zero_gives_plus() {
        let mut sv = Statevector::new(1).unwrap();
        sv.apply(&GateOp::H { qubit: 0 }).unwrap();
        let r = FRAC_1_SQRT_2;
        assert!((sv.amplitudes()[0].re - r).abs() < 1e-15);
        assert!((sv.amplitudes()[1].re - r).abs() < 1e-15);
    }

    #[test]
    fn cz_flips_sign_of_one_one_only() {
        let mut sv = Statevector::new(2).unwrap();
        sv.apply(&GateOp::X { qubit: 0 }).unwrap();
        sv.apply(&GateOp::X { qubit: 1 }).unwrap();
        sv.apply(&GateOp::Cz { a: 0, b: 1 }).unwrap();
        assert!((sv.amplitudes()[3].re + 1.0).abs() < 1e-15);
        assert_eq!(sv.amplitudes()[0], Complex64::ZERO);
    }

    #[test]
    fn cnot_respects_little_endian_indexing() {
        // Set qubit 0 (index 1), CNOT 0 -> 1 must land on index 3.
        let mut sv = Statevector::new(2).unwrap();
        sv.apply(&GateOp::X { qubit: 0 }).unwrap();
        sv.apply(&GateOp::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        assert!((sv.amplitudes()[3].re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn measure_eigenstate_is_deterministic() {
        let mut rng = seeded_rng(3);
        let mut sv = Statevector::new(1).unwrap();
        sv.apply(&GateOp::X { qubit: 0 }).unwrap();
        for _ in 0..32 {
            assert!(sv.measure(0, Basis::Z, &mut rng).unwrap());
        }

        // H|0> is the +1 eigenstate of X.
        let mut plus = Statevector::new(1).unwrap();
        plus.apply(&GateOp::H { qubit: 0 }).unwrap();
        for _ in 0..32 {
            assert!(!plus.measure(0, Basis::X, &mut rng).unwrap());
        }
    }

    #[test]
    fn measure_plus_state_in_z_is_unbiased() {
        let mut rng = seeded_rng(11);
        let mut zeros = 0usize;
        let shots = 10_000;
        for _ in 0..shots {
            let mut sv = Statevector::new(1).unwrap();
            sv.apply(&GateOp::H { qubit: 0 }).unwrap();
            if !sv.measure(0, Basis::Z, &mut rng).unwrap() {
                zeros += 1;
            }
        }
        let freq = zeros as f64 / shots as f64;
        assert!((0.48..=0.52).contains(&freq), "freq {freq}");
    }

    #[test]
    fn measure_collapses_and_renormalizes() {
        let mut rng = seeded_rng(5);
        let mut sv = Statevector::new(2).unwrap();
        sv.apply(&GateOp::H { qubit: 0 }).unwrap();
        sv.apply(&GateOp::Cnot {
            control: 0,
            target: 1,
        })
        .unwrap();
        let bit = sv.measure(0, Basis::Z, &mut rng).unwrap();
        // Bell state: second qubit must agree with the first.
        let probs = sv.probabilities();
        let expect = if bit { 3 } else { 0 };
        assert!((probs[expect] - 1.0).abs() < 1e-12);
        assert!((sv.norm() - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn measurement_stream_is_seed_deterministic() {
        let run = |seed: u64| -> Vec<bool> {
            let mut rng = seeded_rng(seed);
            let mut out = Vec::new();
            for _ in 0..64 {
                let mut sv = Statevector::new(3).unwrap();
                for q in 0..3 {
                    sv.apply(&GateOp::H { qubit: q }).unwrap();
                }
                out.push(sv.measure(1, Basis::Z, &mut rng).unwrap());
            }
            out
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn probabilities_of_uniform_state_are_flat() {
        let mut sv = Statevector::new(6).unwrap();
        for q in 0..6 {
            sv.apply(&GateOp::H { qubit: q }).unwrap();
        }
        for p in sv.probabilities() {
            assert!((p - 1.0 / 64.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sample_index_matches_distribution() {
        let mut sv = Statevector::new(1).unwrap();
        sv.apply(&GateOp::Ry {
            qubit: 0,
            theta: 1.0,
        })
        .unwrap();
        let p1 = sv.probabilities()[1];
        let mut rng = seeded_rng(17);
        let shots = 20_000;
        let ones = (0..shots)
            .filter(|_| sv.sample_index(&mut rng) == 1)
            .count();
        assert!((ones as f64 / shots as f64 - p1).abs() < 0.01);
    }

    #[test]
    fn measure_all_collapses_to_sampled_index() {
        let mut rng = seeded_rng(23);
        let mut sv = Statevector::new(4).unwrap();
        for q in 0..4 {
            sv.apply(&GateOp::H { qubit: q }).unwrap();
        }
        let idx = sv.measure_all(&mut rng);
        assert!((sv.probabilities()[idx] - 1.0).abs() < 1e-12);
    }
}
