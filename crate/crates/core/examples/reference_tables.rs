//! Regenerate the (128, 64) reference tables and show them next to the published values.
//!
//! ```text
//! cargo run --release --example reference_tables
//! ```

use cort::cli::{cmd_tables, render_tables, TablesArgs, REFERENCE_TABLES};

fn main() -> cort::Result<()> {
    for table in REFERENCE_TABLES {
        let out = cmd_tables(&TablesArgs {
            table: Some(table.number),
            n: 128,
            k: 64,
            p: vec![],
            gamma: vec![1.0],
            limits: vec![],
            grid_points: 10,
            out: None,
        })?;
        println!("table {} (p = {}, gamma = {})", table.number, table.p, table.gamma);
        print!("{}", render_tables(&out));
        println!();
    }
    Ok(())
}
