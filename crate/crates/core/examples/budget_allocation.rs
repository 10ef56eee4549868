//! Splitting a probing budget across patterns by their measured hit rates.
//!
//! ```bash
//! cargo run --example budget_allocation
//! ```

use sixgan::metrics::allocate_budget;

fn main() {
    let rates = [11.0, 3.0, 3.0, 1.0, 19.0, 10.0];
    for total in [47, 100, 50_000] {
        let b = allocate_budget(&rates, total).unwrap();
        println!("{total:>6} -> {b:?}");
    }
    println!("{}", allocate_budget(&[0.0, 0.0], 10).unwrap_err());
}
