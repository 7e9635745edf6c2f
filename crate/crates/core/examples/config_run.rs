//! Loads a TOML scenario, runs it into a directory and prints the rendered
//! report.
//!
//! cargo run --release --example config_run -- configs/gradient_linear.toml /tmp/ppflow-run

use std::path::PathBuf;

use ppflow::harness::{load_config, render_report, run_to_dir};

fn main() -> ppflow::Result<()> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/sigma2_mode.toml"));
    let out = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("ppflow-config-run"));
    let cfg = load_config(&config)?;
    let report = run_to_dir(&cfg, &out)?;
    print!("{}", render_report(&report));
    Ok(())
}
