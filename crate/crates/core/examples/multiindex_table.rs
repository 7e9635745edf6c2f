//! Lists the ordered p-tuples of {1..n} and how each one arises from a
//! (p-1)-tuple by inserting an index.
//!
//! cargo run --example multiindex_table -- 4 2

use ppflow::multiindex::{binomial, insert, position, MultiIndex, MultiIndexTable};

fn main() -> ppflow::Result<()> {
    let args: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (n, p) = match args[..] {
        [n, p, ..] => (n, p),
        _ => (4, 2),
    };
    let table = MultiIndexTable::enumerate(n, p)?;
    println!("n = {n}, p = {p}: N = C({n},{p}) = {}, alpha = C({},{}) = {}", binomial(n, p), n - 1, p - 1, table.alpha());
    for idx in table.list() {
        println!("  {:>3}  {idx}", table.rank_of(idx)?);
    }

    let prime = MultiIndex::new((1..p).collect(), n)?;
    println!("insertions into {prime}:");
    for i in (1..=n).filter(|i| !prime.contains(*i)) {
        let full = insert(&prime, i)?;
        let at = position(i, &full)?;
        let sign = if at % 2 == 0 { '+' } else { '-' };
        println!("  i = {i}: {full}, rank {}, (i|I) = {at}, sign {sign}", table.rank_of(&full)?);
    }
    Ok(())
}
