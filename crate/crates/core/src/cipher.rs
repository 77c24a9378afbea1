//! Key-driven complement cipher over normalized features.
//!
//! Where the key bit is 1 the feature is replaced by its complement 1 - v;
//! where it is 0 the feature passes through. The map is an involution, so
//! decryption is the same call with the same key. In f64 the round trip can
//! drift below 1e-15 for features near 0, never more: both subtractions are
//! exact to half an ulp of 1.

use std::fmt;

use crate::encoding::{FeatureVector, FEATURE_COUNT};
use crate::error::{Error, Result};

/// Non-empty bit key. Displays as a bare bitstring, e.g. "111111".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Key(Vec<bool>);

impl Key {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::usage("key must not be empty"));
        }
        Ok(Key(bits))
    }

    /// Parses a string of '0'/'1' characters.
    pub fn from_str_bits(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::usage(format!("key character `{other}` is not 0/1"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        Key::new(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty keys
    }
}

impl fmt::Display for Key {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

/// Cyclically repeats `key` out to exactly `n` bits.
pub fn expand_key(key: &Key, n: usize) -> Result<Key> {
    if n == 0 {
        return Err(Error::usage("cannot expand a key to zero bits"));
    }
    let bits = key.bits().iter().cycle().copied().take(n).collect();
    Key::new(bits)
}

/// Complements `values[i]` where `key` bit i is set. Key length must equal
/// the value count; use `expand_key` first if it does not.
pub fn transform_slice(values: &[f64], key: &Key) -> Result<Vec<f64>> {
    if values.len() != key.len() {
        return Err(Error::usage(format!(
            "key covers {} values, got {}",
            key.len(),
            values.len()
        )));
    }
    Ok(values
        .iter()
        .zip(key.bits())
        .map(|(&v, &k)| if k { 1.0 - v } else { v })
        .collect())
}

/// Encrypts or decrypts one feature vector; the cipher is its own inverse.
pub fn transform(features: &FeatureVector, key: &Key) -> Result<FeatureVector> {
    let out = transform_slice(features.values(), key)?;
    let mut values = [0.0; FEATURE_COUNT];
    values.copy_from_slice(&out);
    FeatureVector::new(values)
}

/// Eve's decryption attempt with her guessed key. Bits she guessed right
/// recover the plaintext feature; wrong bits leave the complement.
pub fn eve_reconstruct(encrypted: &FeatureVector, eve_key: &Key) -> Result<FeatureVector> {
    transform(encrypted, eve_key)
}
