//! IPv6 text codec, nybble sequences, and the aliased-prefix trie.

mod io;
mod prefix;
mod seq;
mod trie;

pub use io::{
    parse_prefix_list, parse_seed_list, read_prefix_file, read_seed_file, write_address_file,
    write_prefix_file,
};
pub use prefix::{parse_prefix, NybblePrefix, ParsedPrefix};
pub use seq::{format_address, parse_address, NybbleSeq, SEQ_LEN};
pub use trie::{alias_match, AliasTrie};

#[derive(Debug, thiserror::Error)]
pub enum AddrError {
    #[error("invalid IPv6 address at position {position}: {reason}")]
    Parse { position: usize, reason: &'static str },
    #[error("invalid CIDR: {0}")]
    Cidr(String),
    #[error("nybble at position {position} has value {value} (must be 0..=15)")]
    NybbleRange { position: usize, value: u8 },
    #[error("expected 32 nybbles, got {0}")]
    SeqLength(usize),
    #[error("prefix length {0} nybbles outside 1..=32")]
    PrefixLength(usize),
    #[error("line {line}: {source}")]
    Line {
        line: usize,
        #[source]
        source: Box<AddrError>,
    },
    #[error("reading {0}: {1}")]
    Io(String, #[source] std::io::Error),
}
