//! BB84 key exchange over simulated qubits.
//!
//! Alice encodes random bits in randomly chosen Z/X bases, an optional
//! intercept-resend eavesdropper measures some fraction of the qubits in her
//! own random bases, and Bob measures in his. Sifting keeps positions where
//! Alice's and Bob's bases agree; a disclosed subsample estimates the error
//! rate, and the remainder is reconciled with parity passes. An intercepted
//! qubit whose bases all disagree lands wrong for Bob half the time, which
//! pins the sifted error rate under full interception at 25% in expectation
//! and is what the detection threshold is calibrated against.

mod reconcile;

pub use reconcile::{error_correct, RECONCILE_BLOCK, RECONCILE_PASSES};

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, seeded_rng};
use crate::sim::{Basis, GateOp, Statevector};

/// Default share of the sifted key disclosed for error estimation.
pub const DEFAULT_SAMPLE_FRACTION: f64 = 0.5;

/// Default abort threshold on the estimated error rate, strictly below the
/// 25% an intercept-resend attacker induces.
pub const DEFAULT_QBER_THRESHOLD: f64 = 0.11;

pub const DEFAULT_RAW_BITS: usize = 128;

/// Minimum qubits per session; below this sifting and sampling degenerate.
pub const MIN_RAW_BITS: usize = 8;

/// Interception behaviour for one session.
#[derive(Debug, Clone, PartialEq)]
pub enum EvePolicy {
    Off,
    /// Each qubit is intercepted independently with this probability.
    Uniform(f64),
    /// Per-qubit interception probabilities; length must match the raw
    /// qubit count when used.
    PerQubit(Vec<f64>),
}

impl EvePolicy {
    pub fn off() -> Self {
        EvePolicy::Off
    }

    /// Intercept every qubit.
    pub fn full() -> Self {
        EvePolicy::Uniform(1.0)
    }

    pub fn uniform(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::config(format!(
                "intercept probability {p} outside [0, 1]"
            )));
        }
        Ok(EvePolicy::Uniform(p))
    }

    pub fn per_qubit(probs: Vec<f64>) -> Result<Self> {
        for p in &probs {
            if !(0.0..=1.0).contains(p) {
                return Err(Error::config(format!(
                    "intercept probability {p} outside [0, 1]"
                )));
            }
        }
        Ok(EvePolicy::PerQubit(probs))
    }

    pub fn is_active(&self) -> bool {
        match self {
            EvePolicy::Off => false,
            EvePolicy::Uniform(p) => *p > 0.0,
            EvePolicy::PerQubit(v) => v.iter().any(|p| *p > 0.0),
        }
    }

    fn prob(&self, qubit: usize) -> f64 {
        match self {
            EvePolicy::Off => 0.0,
            EvePolicy::Uniform(p) => *p,
            EvePolicy::PerQubit(v) => v[qubit],
        }
    }
}

/// What the eavesdropper saw: per raw qubit, her basis and measured bit
/// where she intercepted, `None` elsewhere.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EveRecord {
    pub bases: Vec<Option<Basis>>,
    pub bits: Vec<Option<bool>>,
    pub hits: usize,
}

/// Prepares one BB84 qubit: |bit> in the Z basis, H|bit> in the X basis.
pub fn prepare_qubit(bit: bool, basis: Basis) -> Statevector {
    let mut state = Statevector::new(1).expect("single qubit is in range");
    if bit {
        state.apply(&GateOp::X { qubit: 0 }).expect("valid gate");
    }
    if basis == Basis::X {
        state.apply(&GateOp::H { qubit: 0 }).expect("valid gate");
    }
    state
}

fn random_basis(rng: &mut impl Rng) -> Basis {
    if rng.random() {
        Basis::X
    } else {
        Basis::Z
    }
}

/// Draws `n` random bits and bases and prepares the matching qubit states.
pub fn alice_prepare(
    n: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<bool>, Vec<Basis>, Vec<Statevector>)> {
    if n == 0 {
        return Err(Error::usage("cannot prepare zero qubits"));
    }
    let mut bits = Vec::with_capacity(n);
    let mut bases = Vec::with_capacity(n);
    let mut states = Vec::with_capacity(n);
    for _ in 0..n {
        let bit: bool = rng.random();
        let basis = random_basis(rng);
        bits.push(bit);
        bases.push(basis);
        states.push(prepare_qubit(bit, basis));
    }
    Ok((bits, bases, states))
}

/// Intercept-resend attack: each qubit is measured (and thereby collapsed)
/// in a random basis with the policy's probability. States are mutated in
/// place; what Bob receives afterwards is what Eve resent.
pub fn eve_intercept(
    states: &mut [Statevector],
    policy: &EvePolicy,
    rng: &mut impl Rng,
) -> Result<EveRecord> {
    if let EvePolicy::PerQubit(v) = policy {
        if v.len() != states.len() {
            return Err(Error::usage(format!(
                "per-qubit policy covers {} qubits, stream has {}",
                v.len(),
                states.len()
            )));
        }
    }
    let mut record = EveRecord {
        bases: vec![None; states.len()],
        bits: vec![None; states.len()],
        hits: 0,
    };
    for (i, state) in states.iter_mut().enumerate() {
        let p = policy.prob(i);
        if p > 0.0 && rng.random::<f64>() < p {
            let basis = random_basis(rng);
            let bit = state.measure(0, basis, rng)?;
            record.bases[i] = Some(basis);
            record.bits[i] = Some(bit);
            record.hits += 1;
        }
    }
    Ok(record)
}

/// Measures every incoming qubit in a fresh random basis.
pub fn bob_measure(
    states: &mut [Statevector],
    rng: &mut impl Rng,
) -> Result<(Vec<Basis>, Vec<bool>)> {
    let mut bases = Vec::with_capacity(states.len());
    let mut bits = Vec::with_capacity(states.len());
    for state in states.iter_mut() {
        let basis = random_basis(rng);
        bits.push(state.measure(0, basis, rng)?);
        bases.push(basis);
    }
    Ok((bases, bits))
}

/// Positions surviving basis comparison, with both parties' bits there.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Sifted {
    pub indices: Vec<usize>,
    pub alice_key: Vec<bool>,
    pub bob_key: Vec<bool>,
}

/// Keeps the positions where the two basis strings agree.
pub fn sift(
    alice_bases: &[Basis],
    bob_bases: &[Basis],
    alice_bits: &[bool],
    bob_bits: &[bool],
) -> Result<Sifted> {
    let n = alice_bases.len();
    if bob_bases.len() != n || alice_bits.len() != n || bob_bits.len() != n {
        return Err(Error::usage("bit and basis streams differ in length"));
    }
    let mut sifted = Sifted::default();
    for i in 0..n {
        if alice_bases[i] == bob_bases[i] {
            sifted.indices.push(i);
            sifted.alice_key.push(alice_bits[i]);
            sifted.bob_key.push(bob_bits[i]);
        }
    }
    Ok(sifted)
}

/// Discloses a random subsample of the sifted key and returns the observed
/// error rate plus the disclosed positions (sorted, as indices into the
/// sifted key). The sample holds `max(1, round(fraction * len))` positions.
pub fn estimate_qber(
    alice_key: &[bool],
    bob_key: &[bool],
    sample_fraction: f64,
    rng: &mut impl Rng,
) -> Result<(f64, Vec<usize>)> {
    if alice_key.len() != bob_key.len() {
        return Err(Error::usage(format!(
            "key length mismatch: {} vs {}",
            alice_key.len(),
            bob_key.len()
        )));
    }
    if alice_key.is_empty() {
        return Err(Error::usage("cannot estimate error rate of an empty key"));
    }
    if !(sample_fraction > 0.0 && sample_fraction <= 1.0) {
        return Err(Error::config(format!(
            "sample fraction {sample_fraction} outside (0, 1]"
        )));
    }
    let n = alice_key.len();
    let k = ((sample_fraction * n as f64).round() as usize).clamp(1, n);
    let mut disclosed = rand::seq::index::sample(rng, n, k).into_vec();
    disclosed.sort_unstable();
    let mismatches = disclosed
        .iter()
        .filter(|&&i| alice_key[i] != bob_key[i])
        .count();
    Ok((mismatches as f64 / k as f64, disclosed))
}

/// Strict comparison against the abort threshold.
pub fn detect_eavesdropping(qber: f64, threshold: f64) -> bool {
    qber > threshold
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionConfig {
    pub raw_bits: usize,
    pub eve: EvePolicy,
    pub threshold: f64,
    pub sample_fraction: f64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            raw_bits: DEFAULT_RAW_BITS,
            eve: EvePolicy::Off,
            threshold: DEFAULT_QBER_THRESHOLD,
            sample_fraction: DEFAULT_SAMPLE_FRACTION,
        }
    }
}

impl SessionConfig {
    fn validate(&self) -> Result<()> {
        if self.raw_bits < MIN_RAW_BITS {
            return Err(Error::config(format!(
                "raw_bits {} below minimum {MIN_RAW_BITS}",
                self.raw_bits
            )));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(Error::config(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction <= 1.0) {
            return Err(Error::config(format!(
                "sample fraction {} outside (0, 1]",
                self.sample_fraction
            )));
        }
        Ok(())
    }
}

/// Everything one session produced. Keys are post-disclosure: positions
/// burned for error estimation are already removed, so `alice_key`,
/// `bob_key_raw` and `bob_key_corrected` all have the same length and
/// `key_indices` maps each kept bit back to its raw qubit position.
#[derive(Debug, Clone, PartialEq)]
pub struct QkdSessionResult {
    pub alice_bits: Vec<bool>,
    pub alice_bases: Vec<Basis>,
    pub bob_bits: Vec<bool>,
    pub bob_bases: Vec<Basis>,
    pub sifted_indices: Vec<usize>,
    pub alice_key: Vec<bool>,
    pub bob_key_raw: Vec<bool>,
    pub bob_key_corrected: Vec<bool>,
    pub key_indices: Vec<usize>,
    pub qber: f64,
    pub eve: EveRecord,
    pub eve_hits: usize,
    pub eve_active: bool,
    pub flagged: bool,
    pub leaked_bits: usize,
    pub converged: bool,
}

/// Runs one full session: prepare, intercept, measure, sift, estimate,
/// reconcile, detect. Fails if sifting leaves nothing to sample, which for
/// sane `raw_bits` only happens with astronomically unlucky bases.
pub fn run_session(config: &SessionConfig, rng: &mut impl Rng) -> Result<QkdSessionResult> {
    config.validate()?;
    let (alice_bits, alice_bases, mut states) = alice_prepare(config.raw_bits, rng)?;
    let eve = eve_intercept(&mut states, &config.eve, rng)?;
    let (bob_bases, bob_bits) = bob_measure(&mut states, rng)?;
    let sifted = sift(&alice_bases, &bob_bases, &alice_bits, &bob_bits)?;
    let (qber, disclosed) = estimate_qber(
        &sifted.alice_key,
        &sifted.bob_key,
        config.sample_fraction,
        rng,
    )?;

    let mut alice_key = Vec::new();
    let mut bob_key_raw = Vec::new();
    let mut key_indices = Vec::new();
    let mut burn = disclosed.iter().peekable();
    for (j, &raw_index) in sifted.indices.iter().enumerate() {
        if burn.peek() == Some(&&j) {
            burn.next();
            continue;
        }
        alice_key.push(sifted.alice_key[j]);
        bob_key_raw.push(sifted.bob_key[j]);
        key_indices.push(raw_index);
    }

    let (bob_key_corrected, leaked_bits, converged) = error_correct(&alice_key, &bob_key_raw, rng)?;
    let flagged = detect_eavesdropping(qber, config.threshold);
    let eve_hits = eve.hits;
    let eve_active = config.eve.is_active();
    Ok(QkdSessionResult {
        alice_bits,
        alice_bases,
        bob_bits,
        bob_bases,
        sifted_indices: sifted.indices,
        alice_key,
        bob_key_raw,
        bob_key_corrected,
        key_indices,
        qber,
        eve,
        eve_hits,
        eve_active,
        flagged,
        leaked_bits,
        converged,
    })
}

/// Which sessions of a series the eavesdropper is present in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EveSchedule {
    Off,
    All,
    /// Inclusive range of session indices.
    Range {
        start: usize,
        end: usize,
    },
}

impl EveSchedule {
    pub fn active(&self, session: usize) -> bool {
        match *self {
            EveSchedule::Off => false,
            EveSchedule::All => true,
            EveSchedule::Range { start, end } => (start..=end).contains(&session),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesConfig {
    pub sessions: usize,
    pub raw_bits: usize,
    pub threshold: f64,
    pub sample_fraction: f64,
    pub eve_policy: EvePolicy,
    pub eve_schedule: EveSchedule,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            sessions: 1,
            raw_bits: DEFAULT_RAW_BITS,
            threshold: DEFAULT_QBER_THRESHOLD,
            sample_fraction: DEFAULT_SAMPLE_FRACTION,
            eve_policy: EvePolicy::full(),
            eve_schedule: EveSchedule::Off,
        }
    }
}

impl SeriesConfig {
    fn session_config(&self, session: usize) -> SessionConfig {
        SessionConfig {
            raw_bits: self.raw_bits,
            eve: if self.eve_schedule.active(session) {
                self.eve_policy.clone()
            } else {
                EvePolicy::Off
            },
            threshold: self.threshold,
            sample_fraction: self.sample_fraction,
        }
    }
}

/// Runs a series of sessions. Each session's RNG is derived from the master
/// seed and the session index alone, so any session can be reproduced in
/// isolation and results do not depend on execution order.
pub fn run_sessions(config: &SeriesConfig, master_seed: u64) -> Result<Vec<QkdSessionResult>> {
    if config.sessions == 0 {
        return Err(Error::usage("series needs at least one session"));
    }
    (0..config.sessions)
        .map(|i| {
            let mut rng = seeded_rng(derive_seed(master_seed, i as u64));
            run_session(&config.session_config(i), &mut rng)
        })
        .collect()
}
