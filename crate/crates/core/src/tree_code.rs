//! Branching profiles, staircase generator matrices and prefix encoding.
//!
//! Times and message-bit positions are 1-based in the public accessors that
//! mirror the profile notation (`s(t)`, `a_j`, `b_h`, `r_l`). Messages are packed
//! into a `u64` with bit `j - 1` holding `m_j`, so a node at level `l` is the low
//! `l` bits of the word.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::rng::{derive_key, CounterRng};

/// Largest message length supported by the generator and decoder.
pub const MAX_MESSAGE_BITS: usize = 64;

const TAG_GENERATOR: u64 = 0x6765_6E65_7261_746F;

/// Branching profile of an `(n, k)` random tree code.
///
/// The `s` vector is the only input; every other index is derived from it at
/// construction and cannot be set independently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeProfile {
    n: usize,
    k: usize,
    s: Vec<usize>,
    arrivals: Vec<usize>,
    /// `b_1..b_{h_f}`.
    branch_times: Vec<usize>,
    /// `r_l` for `l = 1..=k`.
    last_same_level: Vec<usize>,
}

impl TreeProfile {
    /// Validates `s` (length `n`, non-decreasing, `s(1) >= 1`, `s(n) = k`).
    pub fn from_s(n: usize, k: usize, s: &[usize]) -> Result<Self> {
        if n == 0 {
            return Err(param("n", "block length must be positive"));
        }
        if k == 0 {
            return Err(param("k", "message length must be positive"));
        }
        if s.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: s.len(),
            });
        }
        if s[0] == 0 {
            return Err(invalid(1, "s(1) must be at least 1"));
        }
        for t in 1..n {
            if s[t] < s[t - 1] {
                return Err(invalid(t + 1, format!("s is decreasing ({} -> {})", s[t - 1], s[t])));
            }
        }
        if let Some(t) = s.iter().position(|&v| v > k) {
            return Err(invalid(t + 1, format!("s(t) = {} exceeds k = {k}", s[t])));
        }
        if s[n - 1] != k {
            return Err(invalid(n, format!("s(n) = {} but k = {k}", s[n - 1])));
        }

        let mut arrivals = Vec::with_capacity(k);
        let mut branch_times = Vec::new();
        let mut prev = 0;
        for (i, &v) in s.iter().enumerate() {
            if v > prev {
                branch_times.push(i + 1);
                arrivals.extend(std::iter::repeat_n(i + 1, v - prev));
            }
            prev = v;
        }
        let mut last_same_level = vec![0; k];
        for (i, &v) in s.iter().enumerate() {
            for l in v..=k {
                last_same_level[l - 1] = i + 1;
            }
        }
        // last_same_level[l-1] = max{t : s(t) <= l}, which is r_l whenever level l is attained.
        Ok(Self {
            n,
            k,
            s: s.to_vec(),
            arrivals,
            branch_times,
            last_same_level,
        })
    }

    /// Builds the profile with `s(t) = #{j : a_j <= t}`. Arrival times are 1-based.
    pub fn from_arrivals(n: usize, arrivals: &[usize]) -> Result<Self> {
        if arrivals.is_empty() {
            return Err(param("arrivals", "at least one message bit is required"));
        }
        if arrivals[0] != 1 {
            return Err(invalid(1, "the first arrival time must be 1"));
        }
        for (j, &a) in arrivals.iter().enumerate() {
            if a == 0 || a > n {
                return Err(invalid(j + 1, format!("arrival time {a} outside 1..={n}")));
            }
            if j > 0 && a < arrivals[j - 1] {
                return Err(invalid(j + 1, "arrival times must be non-decreasing"));
            }
        }
        let s: Vec<usize> = (1..=n).map(|t| arrivals.iter().filter(|&&a| a <= t).count()).collect();
        Self::from_s(n, arrivals.len(), &s)
    }

    /// The single-stage code with all `k` bits arriving at `t = 1`.
    pub fn pure(n: usize, k: usize) -> Result<Self> {
        Self::from_s(n, k, &vec![k; n])
    }

    /// The profile `s(t) = 1` for every `t`, the starting point of bit placement.
    pub fn single_bit(n: usize) -> Result<Self> {
        Self::from_s(n, 1, &vec![1; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// The `s` vector; `s()[t - 1] = s(t)`.
    pub fn s(&self) -> &[usize] {
        &self.s
    }

    /// `s(t)` for `t` in `0..=n`, with `s(0) = 0`.
    pub fn s_at(&self, t: usize) -> usize {
        if t == 0 {
            0
        } else {
            self.s[t - 1]
        }
    }

    /// Arrival times `a_1..a_k` (1-based times).
    pub fn arrivals(&self) -> &[usize] {
        &self.arrivals
    }

    /// Number of branching stages `h_f`.
    pub fn num_stages(&self) -> usize {
        self.branch_times.len()
    }

    /// Branching times `b_1..b_{h_f}`.
    pub fn branch_times(&self) -> &[usize] {
        &self.branch_times
    }

    /// `b_h` for `h` in `0..=h_f + 1`, with `b_0 = 0` and the sentinel `b_{h_f+1} = n`.
    pub fn branch_time(&self, h: usize) -> usize {
        let hf = self.num_stages();
        assert!(h <= hf + 1, "stage {h} beyond h_f + 1 = {}", hf + 1);
        match h {
            0 => 0,
            h if h == hf + 1 => self.n,
            h => self.branch_times[h - 1],
        }
    }

    /// First time index of stage `h + 1`'s symbols, `b_{h+1}` for `h < h_f`.
    pub(crate) fn stage_start(&self, h: usize) -> usize {
        debug_assert!(h < self.num_stages());
        self.branch_times[h]
    }

    /// Node level `s(b_h)` at stage `h`; the root (`h = 0`) has level 0.
    pub fn stage_level(&self, h: usize) -> usize {
        if h == 0 {
            0
        } else {
            self.s[self.branch_times[h - 1] - 1]
        }
    }

    /// `log2(c_h) = s(b_{h+1}) - s(b_h)` for `h` in `0..h_f`.
    pub fn fanout_bits(&self, h: usize) -> usize {
        assert!(h < self.num_stages(), "no fanout beyond the last stage");
        self.stage_level(h + 1) - self.stage_level(h)
    }

    /// `c_h` as a float; exact for all supported sizes.
    pub fn fanout(&self, h: usize) -> f64 {
        (self.fanout_bits(h) as f64).exp2()
    }

    /// `c_0, ..., c_{h_f - 1}`.
    pub fn branch_fanout(&self) -> Vec<f64> {
        (0..self.num_stages()).map(|h| self.fanout(h)).collect()
    }

    /// `r_l = max{t : s(t) <= l}` for `l = 1..=k`; equals `max{t : s(t) = l}` on attained levels.
    pub fn last_same_level(&self) -> &[usize] {
        &self.last_same_level
    }

    /// `r_[h] = r_{s(b_h)}`, the last time covered by a stage-`h` node; 0 for the root.
    pub fn stage_end(&self, h: usize) -> usize {
        if h == 0 {
            0
        } else {
            self.last_same_level[self.stage_level(h) - 1]
        }
    }

    /// Stage index whose level equals `level`, if any (`0` for the root).
    pub fn stage_of_level(&self, level: usize) -> Option<usize> {
        if level == 0 {
            return Some(0);
        }
        (1..=self.num_stages()).find(|&h| self.stage_level(h) == level)
    }

    pub fn is_pure(&self) -> bool {
        self.s[0] == self.k
    }

    /// Profile JSON document with 1-based arrival times.
    pub fn to_doc(&self) -> ProfileDoc {
        ProfileDoc {
            n: self.n,
            k: self.k,
            s: self.s.clone(),
            arrivals: Some(self.arrivals.clone()),
        }
    }

    pub fn from_doc(doc: &ProfileDoc) -> Result<Self> {
        let p = Self::from_s(doc.n, doc.k, &doc.s)?;
        if let Some(a) = &doc.arrivals {
            if a != &p.arrivals {
                return Err(param("arrivals", "inconsistent with s"));
            }
        }
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("profile serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_doc(&serde_json::from_str(text)?)
    }
}

fn invalid(index: usize, reason: impl Into<String>) -> Error {
    Error::InvalidProfile {
        index,
        reason: reason.into(),
    }
}

/// Serialized profile. Readers require only `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileDoc {
    pub n: usize,
    pub k: usize,
    pub s: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arrivals: Option<Vec<usize>>,
}

/// Free-function form of [`TreeProfile::from_s`].
pub fn profile_from_s(n: usize, k: usize, s: &[usize]) -> Result<TreeProfile> {
    TreeProfile::from_s(n, k, s)
}

/// Free-function form of [`TreeProfile::from_arrivals`].
pub fn profile_from_arrivals(n: usize, arrivals: &[usize]) -> Result<TreeProfile> {
    TreeProfile::from_arrivals(n, arrivals)
}

/// Children of a node at a given level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Children {
    /// Stage of the parent node (0 for the root).
    pub parent_stage: usize,
    pub parent_level: usize,
    pub child_level: usize,
}

impl Children {
    /// Number of appended bits, `log2(c_h)`.
    pub fn suffix_bits(&self) -> usize {
        self.child_level - self.parent_level
    }

    pub fn count(&self) -> u128 {
        1u128 << self.suffix_bits()
    }

    /// Suffix words in increasing order; bit `i` of a suffix is message bit `parent_level + i + 1`.
    pub fn suffixes(&self) -> impl Iterator<Item = u64> {
        assert!(self.suffix_bits() < 64, "fanout too large to enumerate");
        0..(1u64 << self.suffix_bits())
    }
}

/// Child descriptor set for a node at `node_level`, which must be 0 or some `s(b_h)` with `h < h_f`.
pub fn children(profile: &TreeProfile, node_level: usize) -> Result<Children> {
    let h = profile
        .stage_of_level(node_level)
        .ok_or_else(|| param("node_level", format!("{node_level} is not a stage level")))?;
    if h >= profile.num_stages() {
        return Err(param("node_level", "terminal nodes have no children"));
    }
    Ok(Children {
        parent_stage: h,
        parent_level: node_level,
        child_level: profile.stage_level(h + 1),
    })
}

/// A sampled staircase generator matrix.
///
/// Row `t` is stored as a `u64` mask over message bits; only bits `0..s(t)` may be set.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    profile: Arc<TreeProfile>,
    rows: Vec<u64>,
    seed: u64,
}

impl GeneratorMatrix {
    /// Draws every free entry from a [`CounterRng`] keyed by `seed`, one word per row
    /// masked to its first `s(t)` columns.
    pub fn sample(profile: Arc<TreeProfile>, seed: u64) -> Result<Self> {
        if profile.k() > MAX_MESSAGE_BITS {
            return Err(param(
                "k",
                format!("at most {MAX_MESSAGE_BITS} message bits are supported"),
            ));
        }
        let mut rng = CounterRng::new(derive_key(seed, TAG_GENERATOR));
        let rows = profile.s().iter().map(|&w| rng.bits(w)).collect();
        Ok(Self { profile, rows, seed })
    }

    /// Builds a matrix from explicit columns (`columns[j][t - 1] = G_{t,j+1}`),
    /// rejecting entries outside the staircase support.
    pub fn from_columns(profile: Arc<TreeProfile>, columns: &[Vec<u8>]) -> Result<Self> {
        if columns.len() != profile.k() {
            return Err(Error::LengthMismatch {
                expected: profile.k(),
                found: columns.len(),
            });
        }
        if profile.k() > MAX_MESSAGE_BITS {
            return Err(param(
                "k",
                format!("at most {MAX_MESSAGE_BITS} message bits are supported"),
            ));
        }
        let n = profile.n();
        let mut rows = vec![0u64; n];
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: col.len(),
                });
            }
            for (i, &b) in col.iter().enumerate() {
                if b & 1 == 1 {
                    if i + 1 < profile.arrivals()[j] {
                        return Err(invalid(
                            i + 1,
                            format!("entry in column {} precedes its arrival", j + 1),
                        ));
                    }
                    rows[i] |= 1 << j;
                }
            }
        }
        Ok(Self { profile, rows, seed: 0 })
    }

    pub fn profile(&self) -> &TreeProfile {
        &self.profile
    }

    pub fn shared_profile(&self) -> &Arc<TreeProfile> {
        &self.profile
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Entry `G_{t,j}` with 1-based `t` and `j`.
    pub fn bit(&self, t: usize, j: usize) -> u8 {
        ((self.rows[t - 1] >> (j - 1)) & 1) as u8
    }

    /// Row masks; row `t - 1` holds `G_{t,·}`.
    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    /// Coded symbol `x_t` (1-based `t`) for the packed message `m`.
    #[inline]
    pub fn symbol(&self, t: usize, m: u64) -> u8 {
        ((self.rows[t - 1] & m).count_ones() & 1) as u8
    }

    /// Full codeword for the packed message `m`.
    pub fn codeword(&self, m: u64) -> Vec<u8> {
        (1..=self.profile.n()).map(|t| self.symbol(t, m)).collect()
    }

    /// `x_{1:t} = G[1:t, 1:s(t)] m_{1:s(t)}` over GF(2).
    pub fn encode_prefix(&self, message_prefix: &[u8], t: usize) -> Result<Vec<u8>> {
        if t == 0 || t > self.profile.n() {
            return Err(param("t", format!("must lie in 1..={}", self.profile.n())));
        }
        let need = self.profile.s_at(t);
        if message_prefix.len() < need {
            return Err(Error::LengthMismatch {
                expected: need,
                found: message_prefix.len(),
            });
        }
        let m = pack_bits(&message_prefix[..need]);
        Ok((1..=t).map(|i| self.symbol(i, m)).collect())
    }
}

/// Free-function form of [`GeneratorMatrix::sample`].
pub fn sample_generator(profile: Arc<TreeProfile>, seed: u64) -> Result<GeneratorMatrix> {
    GeneratorMatrix::sample(profile, seed)
}

/// Packs a bit slice (`bits[0] = m_1`) into a word.
pub fn pack_bits(bits: &[u8]) -> u64 {
    assert!(bits.len() <= 64, "at most 64 bits fit in a word");
    bits.iter()
        .enumerate()
        .fold(0u64, |acc, (i, &b)| acc | (((b & 1) as u64) << i))
}

/// Unpacks the low `len` bits of `word` (`m_1` first).
pub fn unpack_bits(word: u64, len: usize) -> Vec<u8> {
    (0..len).map(|i| ((word >> i) & 1) as u8).collect()
}
