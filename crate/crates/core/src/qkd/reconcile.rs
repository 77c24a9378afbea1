//! Parity-based key reconciliation.
//!
//! A trimmed cascade: a fixed number of passes, each shuffling the key with
//! the session RNG, splitting it into blocks, and comparing block parities
//! over the public channel. An odd block is bisected, halving the disclosed
//! range until the single offending bit is found and flipped on Bob's side.
//! Every parity sent over the channel counts toward `leaked_bits`, including
//! the final verification pass, since an eavesdropper sees them all.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Shuffle-and-compare passes before the verification pass.
pub const RECONCILE_PASSES: usize = 4;

/// Bits per parity block.
pub const RECONCILE_BLOCK: usize = 8;

fn parity(bits: &[bool], positions: &[usize]) -> bool {
    positions.iter().fold(false, |acc, &i| acc ^ bits[i])
}

/// Fixes one erroneous position inside `block`, known to have odd parity
/// mismatch. Returns parities disclosed during the bisection.
fn bisect_and_flip(alice: &[bool], bob: &mut [bool], block: &[usize]) -> usize {
    let mut disclosed = 0;
    let (mut lo, mut hi) = (0, block.len());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        disclosed += 1;
        if parity(alice, &block[lo..mid]) != parity(bob, &block[lo..mid]) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    bob[block[lo]] = !bob[block[lo]];
    disclosed
}

/// Reconciles Bob's key against Alice's. Returns the corrected key, the
/// number of parity bits disclosed, and whether the final verification pass
/// found the keys parity-consistent.
pub fn error_correct(
    alice: &[bool],
    bob: &[bool],
    rng: &mut impl Rng,
) -> Result<(Vec<bool>, usize, bool)> {
    if alice.len() != bob.len() {
        return Err(Error::usage(format!(
            "key length mismatch: {} vs {}",
            alice.len(),
            bob.len()
        )));
    }
    let n = alice.len();
    let mut corrected = bob.to_vec();
    if n == 0 {
        return Ok((corrected, 0, true));
    }

    let mut leaked = 0usize;
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..RECONCILE_PASSES {
        order.shuffle(rng);
        for block in order.chunks(RECONCILE_BLOCK) {
            leaked += 1;
            if parity(alice, block) != parity(&corrected, block) {
                leaked += bisect_and_flip(alice, &mut corrected, block);
            }
        }
    }

    order.shuffle(rng);
    let mut converged = true;
    for block in order.chunks(RECONCILE_BLOCK) {
        leaked += 1;
        if parity(alice, block) != parity(&corrected, block) {
            converged = false;
        }
    }
    Ok((corrected, leaked, converged))
}
