//! Trash genes: fitness-neutral bit vectors that record relatedness.
//!
//! Every individual carries a vector of `tau` bits. It is drawn uniformly at
//! random when the individual is created from scratch, gets exactly one bit
//! flipped when the individual is produced by mutation, and is the uniform
//! crossover of both parents' vectors when produced by recombination. Because
//! selection never looks at these bits, their normalized Hamming distance
//! ([`TrashVector::tdist`]) estimates how recently two individuals shared an
//! ancestor: about `0.5` for unrelated individuals, `1/tau` across a mutation,
//! about `0.25` between a recombination child and one of its parents.

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Trash vector length used by the reference experiment.
pub const DEFAULT_TAU: usize = 32;

const WORD_BITS: usize = 64;

/// A bit vector of fixed length `tau`, packed into 64-bit words.
///
/// Bits past `tau` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TrashVector {
    words: Vec<u64>,
    tau: usize,
}

impl TrashVector {
    /// All-zero vector of length `tau`.
    pub fn zeros(tau: usize) -> Result<Self> {
        check_tau(tau)?;
        Ok(Self {
            words: alloc::vec![0; words_for(tau)],
            tau,
        })
    }

    /// Uniformly random vector; each bit is an independent fair coin.
    pub fn random<R: Rng + ?Sized>(tau: usize, rng: &mut R) -> Result<Self> {
        check_tau(tau)?;
        let mut words: Vec<u64> = (0..words_for(tau)).map(|_| rng.random()).collect();
        mask_tail(&mut words, tau);
        Ok(Self { words, tau })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        let mut v = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.words[i / WORD_BITS] |= 1 << (i % WORD_BITS);
            }
        }
        Ok(v)
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    /// Bit `i` as 0/1. Panics if `i >= tau`.
    pub fn bit(&self, i: usize) -> u8 {
        assert!(
            i < self.tau,
            "bit index {i} out of range for tau {}",
            self.tau
        );
        ((self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1) as u8
    }

    pub fn bits(&self) -> impl Iterator<Item = u8> + '_ {
        (0..self.tau).map(move |i| self.bit(i))
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Copy with exactly one uniformly chosen bit inverted.
    pub fn flip_one_bit<R: Rng + ?Sized>(&self, rng: &mut R) -> Self {
        let i = rng.random_range(0..self.tau);
        let mut out = self.clone();
        out.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
        out
    }

    /// Uniform crossover: each bit comes from `self` or `other` with probability 1/2.
    pub fn uniform_cross<R: Rng + ?Sized>(&self, other: &Self, rng: &mut R) -> Result<Self> {
        self.check_same_len(other)?;
        let mut words: Vec<u64> = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(&a, &b)| {
                let take_a: u64 = rng.random();
                (a & take_a) | (b & !take_a)
            })
            .collect();
        mask_tail(&mut words, self.tau);
        Ok(Self {
            words,
            tau: self.tau,
        })
    }

    /// Number of positions at which the two vectors differ.
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        self.check_same_len(other)?;
        Ok(self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum())
    }

    /// Hamming distance divided by `tau`, in `[0, 1]`.
    pub fn tdist(&self, other: &Self) -> Result<f64> {
        Ok(self.hamming(other)? as f64 / self.tau as f64)
    }

    fn check_same_len(&self, other: &Self) -> Result<()> {
        if self.tau != other.tau {
            return Err(Error::LengthMismatch {
                left: self.tau,
                right: other.tau,
            });
        }
        Ok(())
    }
}

impl fmt::Debug for TrashVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TrashVector(")?;
        for b in self.bits() {
            write!(f, "{b}")?;
        }
        write!(f, ")")
    }
}

fn check_tau(tau: usize) -> Result<()> {
    if tau == 0 {
        return Err(Error::invalid("tau", "must be at least 1"));
    }
    Ok(())
}

fn words_for(tau: usize) -> usize {
    tau.div_ceil(WORD_BITS)
}

fn mask_tail(words: &mut [u64], tau: usize) {
    let rem = tau % WORD_BITS;
    if rem != 0 {
        if let Some(last) = words.last_mut() {
            *last &= (1u64 << rem) - 1;
        }
    }
}
