//! Sample a tree code, send one frame through a BSC and decode it.
//!
//! ```text
//! cargo run --release --example encode_decode
//! ```

use std::sync::Arc;

use cort::channel::BscChannel;
use cort::decoder::{ml_consistency_check, Ssdgu};
use cort::measure::CostModel;
use cort::tree_code::{unpack_bits, GeneratorMatrix, TreeProfile};

fn bits(v: &[u8]) -> String {
    v.iter().map(|b| char::from(b'0' + b)).collect()
}

fn main() -> cort::Result<()> {
    // Two message bits arrive every three channel uses.
    let (n, k, p): (usize, usize, f64) = (24, 16, 0.04);
    let s: Vec<usize> = (1..=n).map(|t| (2 * t).div_ceil(3).min(k)).collect();
    let profile = Arc::new(TreeProfile::from_s(n, k, &s)?);
    println!("s(t)         = {:?}", profile.s());
    println!("branch times = {:?}", profile.branch_times());

    let code = GeneratorMatrix::sample(profile.clone(), 2024)?;
    let message = 0xB3C5u64;
    let x = code.codeword(message);
    let y = BscChannel::new(p)?.transmit(&x, 2);
    let flips = x.iter().zip(&y).filter(|(a, b)| a != b).count();
    println!("message      = {}", bits(&unpack_bits(message, k)));
    println!("codeword     = {}", bits(&x));
    println!("received     = {} ({flips} flips)", bits(&y));

    let cost = CostModel::bsc(p, 1.0, n)?;
    let decoder = Ssdgu::new(&code, &cost, 4096)?;
    let mut trace = Vec::new();
    let outcome = decoder.decode_traced(&y, &mut trace)?;
    match outcome.message() {
        Some(m) => println!(
            "decoded      = {} ({})",
            bits(&unpack_bits(m, k)),
            if m == message { "correct" } else { "wrong" }
        ),
        None => println!("decoder gave up"),
    }
    println!(
        "node checks  = {}, peak stack = {}, trace lines = {}",
        outcome.nodes_checked,
        outcome.max_stack_size,
        trace.iter().filter(|&&b| b == b'\n').count()
    );
    println!("minimum cost = {}", ml_consistency_check(&code, &y, &cost, &outcome)?);
    Ok(())
}
