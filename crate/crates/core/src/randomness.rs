//! The common random string.
//!
//! All randomness used by the algorithms is derived from a single 64-bit
//! master seed. A [`Label`] names one independent stream; the stream is a
//! ChaCha8 generator keyed by `SHA-256(master_seed || label)`, so the bits a
//! probe sees depend only on the seed and the label and never on probe order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use sha2::{Digest, Sha256};

/// Namespace of a random stream. Distinct tags never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Tag {
    Generator = 1,
    WarmupSetSample = 2,
    WarmupElementSample = 3,
    DegreeSample = 4,
    WeightSample = 5,
    Rounding = 6,
    Truncation = 7,
    EstimatorSample = 8,
    SlackPolicy = 9,
    Scratch = 10,
}

/// Fixed-width structured stream name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label {
    pub tag: Tag,
    pub i: u32,
    pub j: u32,
    pub i_star: u32,
    pub j_star: u32,
    pub vertex: u64,
    pub counter: u64,
}

impl Label {
    pub const ENCODED_LEN: usize = 1 + 4 * 4 + 8 + 8;

    pub fn new(tag: Tag) -> Self {
        Label { tag, i: 0, j: 0, i_star: 0, j_star: 0, vertex: 0, counter: 0 }
    }

    pub fn iteration(mut self, i: u32, j: u32) -> Self {
        self.i = i;
        self.j = j;
        self
    }

    pub fn boost(mut self, i_star: u32, j_star: u32) -> Self {
        self.i_star = i_star;
        self.j_star = j_star;
        self
    }

    pub fn vertex(mut self, vertex: u64) -> Self {
        self.vertex = vertex;
        self
    }

    pub fn counter(mut self, counter: u64) -> Self {
        self.counter = counter;
        self
    }

    pub fn encode(&self) -> [u8; Self::ENCODED_LEN] {
        let mut out = [0u8; Self::ENCODED_LEN];
        out[0] = self.tag as u8;
        out[1..5].copy_from_slice(&self.i.to_le_bytes());
        out[5..9].copy_from_slice(&self.j.to_le_bytes());
        out[9..13].copy_from_slice(&self.i_star.to_le_bytes());
        out[13..17].copy_from_slice(&self.j_star.to_le_bytes());
        out[17..25].copy_from_slice(&self.vertex.to_le_bytes());
        out[25..33].copy_from_slice(&self.counter.to_le_bytes());
        out
    }
}

/// Deterministic keyed source of randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomTape {
    master_seed: u64,
}

impl RandomTape {
    pub fn new(master_seed: u64) -> Self {
        RandomTape { master_seed }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Restartable stream for `label`.
    pub fn stream(&self, label: &Label) -> Stream {
        let mut hasher = Sha256::new();
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update(label.encode());
        let digest = hasher.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        Stream { rng: ChaCha8Rng::from_seed(key) }
    }

    pub fn rounding(&self, f: usize) -> RoundingTape {
        RoundingTape { tape: *self, f: f.max(1) as u64 }
    }
}

/// Alias kept for call sites that read better as a verb.
pub fn derive_stream(tape: &RandomTape, label: &Label) -> Stream {
    tape.stream(label)
}

/// One labelled random stream.
#[derive(Debug, Clone)]
pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    /// Uniform integer in `[0, bound)`. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        self.rng.random_range(0..bound)
    }

    /// Uniform real in `[0, 1)`.
    pub fn unit(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn next_u64(&mut self) -> u64 {
        self.rng.random::<u64>()
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

/// One distinct position of a sampled multiset together with its multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleEntry {
    pub position: u32,
    pub count: u64,
}

/// Result of the generic sampling procedure: `draws` independent uniform
/// indices over `[0, range)`, kept only when they land on a position of the
/// list. Entries are in position order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampledMultiset {
    pub entries: Vec<SampleEntry>,
    pub draws: u64,
    pub range: u64,
}

impl SampledMultiset {
    /// Multiset size, repetitions counted.
    pub fn size(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Samples `draws` indices uniformly from `[0, range)` and keeps those that
/// fall on one of the first `len` positions.
///
/// The per-position counts are drawn directly from the multinomial
/// distribution through a chain of conditional binomials, which has the same
/// law as `draws` separate uniform draws but costs `O(len)` instead of
/// `O(draws)`.
pub fn sample_positions(tape: &RandomTape, label: &Label, len: usize, draws: u64, range: u64) -> SampledMultiset {
    assert!(len as u64 <= range, "list longer than sampling range");
    let mut entries = Vec::new();
    let mut remaining = draws;
    if remaining > 0 && len > 0 {
        let mut stream = tape.stream(label);
        for k in 0..len {
            if remaining == 0 {
                break;
            }
            let categories_left = range - k as u64;
            let count = if categories_left == 1 {
                remaining
            } else {
                let p = 1.0 / categories_left as f64;
                Binomial::new(remaining, p).expect("valid binomial").sample(stream.rng())
            };
            if count > 0 {
                entries.push(SampleEntry { position: k as u32, count });
                remaining -= count;
            }
        }
    }
    SampledMultiset { entries, draws, range }
}

/// Samples from an explicit ordered list; returns `(item, multiplicity)` pairs
/// in list order.
pub fn sample_multiset<T: Copy>(tape: &RandomTape, label: &Label, items: &[T], draws: u64, range: u64) -> Vec<(T, u64)> {
    sample_positions(tape, label, items.len(), draws, range)
        .entries
        .iter()
        .map(|e| (items[e.position as usize], e.count))
        .collect()
}

/// Pre-sampled Bernoulli bits `t[S, i, j]` with success probability
/// `min(1, 2^j / f)`.
#[derive(Debug, Clone, Copy)]
pub struct RoundingTape {
    tape: RandomTape,
    f: u64,
}

impl RoundingTape {
    pub fn probability(&self, j: u32) -> f64 {
        ((1u64 << j) as f64 / self.f as f64).min(1.0)
    }

    pub fn bit(&self, set: u32, i: u32, j: u32) -> bool {
        let numerator = 1u64 << j;
        if numerator >= self.f {
            return true;
        }
        let label = Label::new(Tag::Rounding).iteration(i, j).vertex(set as u64);
        self.tape.stream(&label).below(self.f) < numerator
    }
}
