//! Regenerates `data/lilliefors_critical.txt`.
//!
//! cargo run --release -p tikhonov-picard --example lilliefors_table [OUT]

use std::fs::File;
use std::io::{BufWriter, Write};

use tikhonov_picard::picard::{
    simulate_critical_values, table_sizes, TABLE_CONFIDENCES, TABLE_SEED, TABLE_TRIALS, TABLE_VERSION,
};

fn main() -> std::io::Result<()> {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/data/lilliefors_critical.txt").to_string());
    let mut w = BufWriter::new(File::create(&out)?);
    writeln!(w, "# Lilliefors critical values for the normal family, mean and variance estimated")?;
    writeln!(w, "# version {TABLE_VERSION}")?;
    writeln!(w, "# trials {TABLE_TRIALS} seed {TABLE_SEED} (ChaCha8, stream = n)")?;
    writeln!(w, "# columns: n confidence critical_value")?;
    for n in table_sizes() {
        let values = simulate_critical_values(n, TABLE_TRIALS, TABLE_SEED, &TABLE_CONFIDENCES);
        for (c, v) in TABLE_CONFIDENCES.iter().zip(values) {
            writeln!(w, "{n} {c} {v:.17e}")?;
        }
        eprintln!("n = {n}");
    }
    w.flush()
}
