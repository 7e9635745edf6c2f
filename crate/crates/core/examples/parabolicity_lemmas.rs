//! Runs the sampled pointwise property suites for one (n, p).
//!
//! cargo run --release --example parabolicity_lemmas -- 4 3 2000

use ppflow::harness::lemmas::check_lemmas;

fn main() -> ppflow::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, p, samples) = match args[..] {
        [n, p, s, ..] => (n, p, s),
        [n, p] => (n, p, 1000),
        _ => (3, 2, 1000),
    };
    let report = check_lemmas(n, p, samples, 7)?;
    for o in &report.outcomes {
        println!("{}", o.line());
    }
    println!("all passed: {}", report.all_passed());
    Ok(())
}
