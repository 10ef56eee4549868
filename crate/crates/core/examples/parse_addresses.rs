//! Address codec: text to nybble sequence and back, plus prefix parsing.
//!
//! ```bash
//! cargo run --example parse_addresses
//! ```

use sixgan::addr::{format_address, parse_address, parse_prefix};
use sixgan::classify::{classify_rfc, DEFAULT_PORTS};

fn main() {
    for text in [
        "2001:db8:ff01:2::c8c3:8c07",
        "2001:DB8::80",
        "2001:db8:900::21e:67ff:fe31:4cdf",
        "2001:0db8:0100:0100:0000:0000:0000:0001",
        "2001:db8:8:68d3:b791:8741:c127:a75",
    ] {
        let seq = parse_address(text).expect("valid address");
        println!("{text:<42} {}  {:<14} {}", seq.to_hex(), classify_rfc(&seq, &DEFAULT_PORTS).name(), format_address(&seq));
    }
    for text in ["2001:db8::/32", "2001:db8:ff00::/40", "2001:db8::/33"] {
        let p = parse_prefix(text).expect("valid prefix");
        println!("{text:<20} {} nybbles, rounded down: {}", p.prefix.len(), p.was_rounded());
    }
    println!("bad input: {}", parse_address("2001:db8::1::2").unwrap_err());
}
