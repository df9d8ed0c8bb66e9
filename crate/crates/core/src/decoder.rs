//! Stack-based sequential decoding with give-up.
//!
//! The stack is a binary heap ordered by cost, then depth (deeper first), then
//! message prefix in lexicographic order (`m_1` most significant). Children are
//! pushed before the budget test, so the stack may transiently exceed the
//! budget by at most one fanout.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::Serialize;

use crate::error::{param, Error, Result};
use crate::measure::CostModel;
use crate::tree_code::{unpack_bits, GeneratorMatrix};

/// Largest per-stage fanout, in bits, the decoder will enumerate.
pub const MAX_FANOUT_BITS: usize = 24;

/// Largest message length for brute-force oracles.
pub const MAX_BRUTE_FORCE_BITS: usize = 20;

/// A node of the code tree held on the stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StackEntry {
    /// Packed message prefix; only the low `level` bits are meaningful.
    pub prefix: u64,
    /// Prefix length `s(b_stage)`.
    pub level: usize,
    /// Branching stage `h`.
    pub stage: usize,
    /// Cost of the encoded prefix through `r_[h]`.
    pub cost: f64,
}

impl StackEntry {
    pub fn message_prefix(&self) -> Vec<u8> {
        unpack_bits(self.prefix, self.level)
    }

    /// Whether the terminal `m` descends from this node.
    pub fn covers(&self, m: u64) -> bool {
        self.level == 0 || (m ^ self.prefix) & low_mask(self.level) == 0
    }
}

impl Eq for StackEntry {}

impl Ord for StackEntry {
    /// Greater means popped first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .total_cmp(&self.cost)
            .then(self.level.cmp(&other.level))
            .then(lex_key(other.prefix).cmp(&lex_key(self.prefix)))
    }
}

impl PartialOrd for StackEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sort key giving lexicographic order on equal-length packed prefixes.
#[inline]
pub(crate) fn lex_key(prefix: u64) -> u64 {
    prefix.reverse_bits()
}

#[inline]
fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// Decoder output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecodeResult {
    /// Packed decoded message.
    Message(u64),
    /// The budget ran out.
    GiveUp,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeOutcome {
    pub result: DecodeResult,
    pub nodes_checked: u64,
    pub max_stack_size: usize,
    /// Full-path cost of the decoded message.
    pub cost: Option<f64>,
}

impl DecodeOutcome {
    pub fn message(&self) -> Option<u64> {
        match self.result {
            DecodeResult::Message(m) => Some(m),
            DecodeResult::GiveUp => None,
        }
    }

    pub fn is_give_up(&self) -> bool {
        self.result == DecodeResult::GiveUp
    }
}

/// One loop iteration as emitted in JSON-lines traces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: u64,
    /// Popped prefix as a `0`/`1` string, `m_1` first.
    pub popped_prefix: String,
    pub cost: f64,
    /// `N_c` before the popped node's children are counted.
    pub nodes_checked: u64,
}

/// View handed to observers after each pop.
pub struct Iteration<'a> {
    pub record: TraceRecord,
    pub popped: StackEntry,
    stack: &'a BinaryHeap<StackEntry>,
}

impl Iteration<'_> {
    /// Entries remaining on the stack after the pop.
    pub fn stack(&self) -> impl Iterator<Item = &StackEntry> {
        self.stack.iter()
    }
}

/// Sequential decoder bound to one code, cost model and node-check budget.
#[derive(Debug, Clone, Copy)]
pub struct Ssdgu<'a> {
    code: &'a GeneratorMatrix,
    cost: &'a CostModel,
    limit: u64,
}

impl<'a> Ssdgu<'a> {
    pub fn new(code: &'a GeneratorMatrix, cost: &'a CostModel, limit: u64) -> Result<Self> {
        let profile = code.profile();
        if cost.n() != profile.n() {
            return Err(Error::LengthMismatch {
                expected: profile.n(),
                found: cost.n(),
            });
        }
        let widest = (0..profile.num_stages())
            .map(|h| profile.fanout_bits(h))
            .max()
            .unwrap_or(0);
        if widest > MAX_FANOUT_BITS {
            return Err(Error::Config(format!(
                "stage fanout 2^{widest} exceeds the enumerable maximum 2^{MAX_FANOUT_BITS}"
            )));
        }
        let c0 = 1u64 << profile.fanout_bits(0);
        if limit < c0 {
            return Err(Error::Config(format!(
                "limit {limit} is below the root fanout c_0 = {c0}"
            )));
        }
        Ok(Self { code, cost, limit })
    }

    pub fn decode(&self, y: &[u8]) -> Result<DecodeOutcome> {
        self.run(y, None)
    }

    /// Decodes while passing every iteration to `observer`.
    pub fn decode_observed(&self, y: &[u8], observer: &mut dyn FnMut(&Iteration<'_>)) -> Result<DecodeOutcome> {
        self.run(y, Some(observer))
    }

    /// Decodes and writes one JSON object per iteration to `out`.
    pub fn decode_traced(&self, y: &[u8], out: &mut dyn std::io::Write) -> Result<DecodeOutcome> {
        let mut io_err = None;
        let outcome = self.run(
            y,
            Some(&mut |it: &Iteration<'_>| {
                if io_err.is_none() {
                    let line = serde_json::to_string(&it.record).expect("trace serializes");
                    if let Err(e) = writeln!(out, "{line}") {
                        io_err = Some(e);
                    }
                }
            }),
        )?;
        match io_err {
            Some(e) => Err(e.into()),
            None => Ok(outcome),
        }
    }

    fn run(&self, y: &[u8], mut observer: Option<&mut dyn FnMut(&Iteration<'_>)>) -> Result<DecodeOutcome> {
        let profile = self.code.profile();
        if y.len() != profile.n() {
            return Err(Error::LengthMismatch {
                expected: profile.n(),
                found: y.len(),
            });
        }
        let hf = profile.num_stages();
        let mut stack = BinaryHeap::new();
        let root = StackEntry {
            prefix: 0,
            level: 0,
            stage: 0,
            cost: 0.0,
        };
        let mut nodes_checked = self.push_children(&mut stack, &root, y) as u128;
        let mut max_stack_size = stack.len();
        let mut iteration = 0u64;

        while nodes_checked <= self.limit as u128 {
            let top = stack.pop().expect("the stack covers every terminal node");
            iteration += 1;
            if let Some(obs) = observer.as_mut() {
                obs(&Iteration {
                    record: TraceRecord {
                        iteration,
                        popped_prefix: top.message_prefix().iter().map(|b| char::from(b'0' + b)).collect(),
                        cost: top.cost,
                        nodes_checked: nodes_checked as u64,
                    },
                    popped: top,
                    stack: &stack,
                });
            }
            if top.stage == hf {
                return Ok(DecodeOutcome {
                    result: DecodeResult::Message(top.prefix),
                    nodes_checked: nodes_checked as u64,
                    max_stack_size,
                    cost: Some(top.cost),
                });
            }
            nodes_checked += self.push_children(&mut stack, &top, y) as u128;
            max_stack_size = max_stack_size.max(stack.len());
        }
        Ok(DecodeOutcome {
            result: DecodeResult::GiveUp,
            nodes_checked: nodes_checked.min(u64::MAX as u128) as u64,
            max_stack_size,
            cost: None,
        })
    }

    fn push_children(&self, stack: &mut BinaryHeap<StackEntry>, parent: &StackEntry, y: &[u8]) -> u64 {
        let profile = self.code.profile();
        let h = parent.stage;
        let bits = profile.fanout_bits(h);
        let child_level = parent.level + bits;
        let from = profile.stage_start(h);
        let to = profile.stage_end(h + 1);
        let count = 1u64 << bits;
        for suffix in 0..count {
            let prefix = parent.prefix | (suffix << parent.level);
            let cost = self
                .cost
                .accumulate(parent.cost, from, to, |t| self.code.symbol(t, prefix) != y[t - 1]);
            stack.push(StackEntry {
                prefix,
                level: child_level,
                stage: h + 1,
                cost,
            });
        }
        count
    }
}

/// Runs the sequential decoder on `y` with node-check budget `limit`.
pub fn ssdgu_decode(g: &GeneratorMatrix, y: &[u8], cm: &CostModel, limit: u64) -> Result<DecodeOutcome> {
    Ssdgu::new(g, cm, limit)?.decode(y)
}

/// Full-path cost of the packed message `m`.
pub fn message_cost(g: &GeneratorMatrix, y: &[u8], cm: &CostModel, m: u64) -> f64 {
    cm.accumulate(0.0, 1, g.profile().n(), |t| g.symbol(t, m) != y[t - 1])
}

/// Minimum full-path cost over all `2^k` messages; ties go to the lexicographically smallest message.
pub(crate) fn exhaustive_min(g: &GeneratorMatrix, y: &[u8], cm: &CostModel) -> Result<(u64, f64)> {
    let k = g.profile().k();
    if k > MAX_BRUTE_FORCE_BITS {
        return Err(param(
            "k",
            format!("brute force is limited to k <= {MAX_BRUTE_FORCE_BITS}"),
        ));
    }
    if y.len() != g.profile().n() {
        return Err(Error::LengthMismatch {
            expected: g.profile().n(),
            found: y.len(),
        });
    }
    let mut best = (0u64, message_cost(g, y, cm, 0));
    for m in 1..(1u64 << k) {
        let c = message_cost(g, y, cm, m);
        if c < best.1 || (c == best.1 && lex_key(m) < lex_key(best.0)) {
            best = (m, c);
        }
    }
    Ok(best)
}

/// Whether a decoded message attains the minimum full-path cost over all messages.
pub fn ml_consistency_check(g: &GeneratorMatrix, y: &[u8], cm: &CostModel, outcome: &DecodeOutcome) -> Result<bool> {
    let m = outcome
        .message()
        .ok_or_else(|| param("outcome", "give-up outcomes carry no message"))?;
    let (_, best) = exhaustive_min(g, y, cm)?;
    let got = message_cost(g, y, cm, m);
    Ok((got - best).abs() <= 1e-12 * best.abs().max(1.0))
}
