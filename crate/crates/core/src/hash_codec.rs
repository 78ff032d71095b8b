//! Digest values, length-prefixed framing, the counted hash, and seeded
//! randomness.
//!
//! Every protocol value (masked passwords, nonces, message fields, session
//! keys) is a [`Digest`] of the configured hash width. Hash inputs are framed
//! with [`encode_concat`] so that concatenating variable-length parts is
//! injective.

use std::cell::Cell;
use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

/// Length of the random value `N` stored on the card, in bytes.
pub const NONCE_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("cannot encode an empty part list")]
    EmptyParts,
    #[error("part {index} is {len} bytes, exceeding the 4-byte length prefix")]
    OversizedPart { index: usize, len: usize },
    #[error("digest length mismatch: {left} vs {right} bytes")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid digest hex: {0}")]
    InvalidHex(String),
}

/// A fixed-width hash output, or any value of the same width.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Digest(Vec<u8>);

impl Digest {
    pub fn from_bytes(bytes: impl Into<Vec<u8>>) -> Self {
        Digest(bytes.into())
    }

    pub fn zero(len: usize) -> Self {
        Digest(vec![0; len])
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&b| b == 0)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }

    pub fn from_hex(s: &str) -> Result<Self, CodecError> {
        if s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(CodecError::InvalidHex(s.to_owned()));
        }
        hex::decode(s)
            .map(Digest)
            .map_err(|_| CodecError::InvalidHex(s.to_owned()))
    }

    /// Flips a single bit, counted from the most significant bit of byte 0.
    pub fn flip_bit(&mut self, bit: usize) {
        self.0[bit / 8] ^= 0x80 >> (bit % 8);
    }
}

impl AsRef<[u8]> for Digest {
    fn as_ref(&self) -> &[u8] {
        &self.0
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({})", self.to_hex())
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// Bytewise XOR of two equal-width digests.
pub fn xor(a: &Digest, b: &Digest) -> Result<Digest, CodecError> {
    if a.len() != b.len() {
        return Err(CodecError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(Digest(a.0.iter().zip(&b.0).map(|(x, y)| x ^ y).collect()))
}

/// Frames each part as a 4-byte big-endian length followed by the bytes.
pub fn encode_concat(parts: &[&[u8]]) -> Result<Vec<u8>, CodecError> {
    if parts.is_empty() {
        return Err(CodecError::EmptyParts);
    }
    let total: usize = parts.iter().map(|p| p.len() + 4).sum();
    let mut out = Vec::with_capacity(total);
    for (index, part) in parts.iter().enumerate() {
        let len = u32::try_from(part.len()).map_err(|_| CodecError::OversizedPart {
            index,
            len: part.len(),
        })?;
        out.extend_from_slice(&len.to_be_bytes());
        out.extend_from_slice(part);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum HashAlgorithm {
    /// SHA-256, the default for every scenario run.
    #[default]
    Sha256,
    /// SHA-256 truncated to one byte. Exhaustive-oracle tests only.
    Toy8,
    /// SHA-256 truncated to two bytes. Exhaustive-oracle tests only.
    Toy16,
}

impl HashAlgorithm {
    pub fn digest_len(self) -> usize {
        match self {
            HashAlgorithm::Sha256 => 32,
            HashAlgorithm::Toy8 => 1,
            HashAlgorithm::Toy16 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            HashAlgorithm::Sha256 => "sha256",
            HashAlgorithm::Toy8 => "toy8",
            HashAlgorithm::Toy16 => "toy16",
        }
    }
}

impl fmt::Display for HashAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HashAlgorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sha256" | "standard" => Ok(HashAlgorithm::Sha256),
            "toy8" | "toy-8" => Ok(HashAlgorithm::Toy8),
            "toy16" | "toy-16" => Ok(HashAlgorithm::Toy16),
            other => Err(format!(
                "unknown hash algorithm `{other}` (expected sha256, toy8, toy16)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HashConfig {
    pub algorithm: HashAlgorithm,
    pub counting: bool,
}

impl HashConfig {
    pub fn new(algorithm: HashAlgorithm) -> Self {
        HashConfig {
            algorithm,
            counting: true,
        }
    }

    pub fn digest_len(&self) -> usize {
        self.algorithm.digest_len()
    }
}

impl Default for HashConfig {
    fn default() -> Self {
        HashConfig::new(HashAlgorithm::Sha256)
    }
}

/// The one-way hash `h`, with an invocation counter.
///
/// The counter lives in a `Cell`, so a `Hasher` can be shared by reference
/// within one actor but is not `Sync`.
#[derive(Debug)]
pub struct Hasher {
    config: HashConfig,
    count: Cell<u64>,
}

impl Hasher {
    pub fn new(config: HashConfig) -> Self {
        Hasher {
            config,
            count: Cell::new(0),
        }
    }

    pub fn config(&self) -> HashConfig {
        self.config
    }

    pub fn digest_len(&self) -> usize {
        self.config.digest_len()
    }

    /// `h(p_1 ‖ ... ‖ p_n)` over the length-prefixed framing.
    pub fn hash(&self, parts: &[&[u8]]) -> Result<Digest, CodecError> {
        let digest = self.hash_uncounted(parts)?;
        if self.config.counting {
            self.count.set(self.count.get() + 1);
        }
        Ok(digest)
    }

    /// Same as [`Hasher::hash`] but never touches the counter. Used for the
    /// biometric template match, which sits outside the measured phases.
    pub fn hash_uncounted(&self, parts: &[&[u8]]) -> Result<Digest, CodecError> {
        let framed = encode_concat(parts)?;
        let full = Sha256::digest(&framed);
        Ok(Digest(full[..self.digest_len()].to_vec()))
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }

    pub fn reset(&self) {
        self.count.set(0);
    }

    pub fn random_digest(&self, rng: &mut SeededRng) -> Digest {
        rng.digest(self.digest_len())
    }
}

/// Deterministic ChaCha20 generator. Same seed and stream give the same draws.
#[derive(Debug, Clone)]
pub struct SeededRng(ChaCha20Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha20Rng::seed_from_u64(seed))
    }

    /// An independent generator for one actor of a scenario.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        SeededRng(inner)
    }

    pub fn bytes(&mut self, len: usize) -> Vec<u8> {
        let mut out = vec![0; len];
        self.0.fill_bytes(&mut out);
        out
    }

    pub fn digest(&mut self, len: usize) -> Digest {
        Digest(self.bytes(len))
    }

    pub fn nonce(&mut self) -> [u8; NONCE_LEN] {
        let mut out = [0; NONCE_LEN];
        self.0.fill_bytes(&mut out);
        out
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        use rand::Rng;
        self.0.gen_range(0..bound)
    }
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.0.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), rand::Error> {
        self.0.try_fill_bytes(dest)
    }
}
