//! Random tree codes with sequential decoding.
//!
//! Tree codes whose message bits arrive gradually, decoded by a stack decoder
//! with a hard node-check budget on the binary symmetric channel.
//!
//! - [`tree_code`]: branching profiles and staircase generators
//! - [`channel`], [`measure`]: the channel and the discounted cost measure
//! - [`decoder`]: the budgeted stack decoder
//! - [`bounds`]: closed-form achievability bounds
//! - [`sbp`]: greedy profile optimization
//! - [`montecarlo`]: ensemble simulation
//! - [`cli`]: reproducible commands with persisted run records
//!
//! The `examples/` directory is the main entry point:
//!
//! ```text
//! cargo run --release --example encode_decode    # sample a code, transmit, decode
//! cargo run --release --example bounds           # bound values for a profile
//! cargo run --release --example optimize_profile # successive bit placement
//! cargo run --release --example simulate         # ensemble simulation vs bounds
//! cargo run --release --example reference_tables # regenerate the reference tables
//! ```

pub mod bounds;
pub mod channel;
pub mod cli;
pub mod decoder;
pub mod error;
pub mod measure;
pub mod montecarlo;
pub mod rng;
pub mod sbp;
pub mod stats;
pub mod tree_code;

pub use error::{Error, Result};
