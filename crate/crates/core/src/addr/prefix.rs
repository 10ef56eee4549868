use std::fmt;

use super::{parse_address, AddrError, NybbleSeq, SEQ_LEN};

/// A leading run of 1 to 32 nybbles, e.g. the `/32` prefix `2001:0db8`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NybblePrefix(Vec<u8>);

impl NybblePrefix {
    pub fn new(nybbles: Vec<u8>) -> Result<Self, AddrError> {
        if nybbles.is_empty() || nybbles.len() > SEQ_LEN {
            return Err(AddrError::PrefixLength(nybbles.len()));
        }
        if let Some(pos) = nybbles.iter().position(|&n| n > 15) {
            return Err(AddrError::NybbleRange { position: pos, value: nybbles[pos] });
        }
        Ok(NybblePrefix(nybbles))
    }

    /// First `len` nybbles of `seq`.
    pub fn of(seq: &NybbleSeq, len: usize) -> Result<Self, AddrError> {
        if len == 0 || len > SEQ_LEN {
            return Err(AddrError::PrefixLength(len));
        }
        Ok(NybblePrefix(seq.nybbles()[..len].to_vec()))
    }

    pub fn nybbles(&self) -> &[u8] {
        &self.0
    }

    /// Length in nybbles.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> u32 {
        4 * self.0.len() as u32
    }

    pub fn contains(&self, seq: &NybbleSeq) -> bool {
        seq.starts_with(&self.0)
    }

    /// True when one prefix is a prefix of the other.
    pub fn overlaps(&self, other: &NybblePrefix) -> bool {
        let n = self.len().min(other.len());
        self.0[..n] == other.0[..n]
    }

    /// The prefix padded with zeros to a full address.
    pub fn network(&self) -> NybbleSeq {
        let mut out = [0u8; SEQ_LEN];
        out[..self.len()].copy_from_slice(&self.0);
        NybbleSeq::new(out).unwrap()
    }
}

impl fmt::Display for NybblePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.network(), self.bits())
    }
}

impl fmt::Debug for NybblePrefix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NybblePrefix({self})")
    }
}

/// Result of [`parse_prefix`]. `requested_bits` differs from `prefix.bits()`
/// when the length was rounded down to a nybble boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedPrefix {
    pub prefix: NybblePrefix,
    pub requested_bits: u32,
}

impl ParsedPrefix {
    pub fn was_rounded(&self) -> bool {
        self.requested_bits != self.prefix.bits()
    }
}

/// Parses `addr/len`. Lengths that are not a multiple of 4 are truncated to
/// the containing nybble boundary, which widens the prefix.
pub fn parse_prefix(text: &str) -> Result<ParsedPrefix, AddrError> {
    let (addr, len) = text
        .split_once('/')
        .ok_or_else(|| AddrError::Cidr(format!("missing '/' in {text:?}")))?;
    let bits: u32 = len
        .trim()
        .parse()
        .map_err(|_| AddrError::Cidr(format!("bad prefix length in {text:?}")))?;
    if !(4..=128).contains(&bits) {
        return Err(AddrError::Cidr(format!("prefix length {bits} outside 4..=128 in {text:?}")));
    }
    let seq = parse_address(addr.trim())?;
    let prefix = NybblePrefix::of(&seq, (bits / 4) as usize)?;
    Ok(ParsedPrefix { prefix, requested_bits: bits })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_slash_32() {
        let p = parse_prefix("2001:db8::/32").unwrap();
        assert_eq!(p.prefix.nybbles(), &[2, 0, 0, 1, 0, 0xd, 0xb, 8]);
        assert_eq!(p.prefix.len(), 8);
        assert!(!p.was_rounded());
    }

    #[test]
    fn parses_shortest() {
        let p = parse_prefix("::/4").unwrap();
        assert_eq!(p.prefix.nybbles(), &[0]);
    }

    #[test]
    fn rounds_down_to_nybble() {
        let p = parse_prefix("2001:db8::/30").unwrap();
        assert_eq!(p.prefix.nybbles(), &[2, 0, 0, 1, 0, 0xd, 0xb]);
        assert_eq!(p.prefix.len(), 7);
        assert!(p.was_rounded());
        assert_eq!(p.requested_bits, 30);
    }

    #[test]
    fn rejects_bad_cidr() {
        assert!(parse_prefix("2001:db8::").is_err());
        assert!(parse_prefix("2001:db8::/x").is_err());
        assert!(parse_prefix("2001:db8::/0").is_err());
        assert!(parse_prefix("2001:db8::/129").is_err());
        assert!(parse_prefix("2001:zz8::/32").is_err());
    }

    #[test]
    fn display_roundtrip() {
        let p = parse_prefix("2001:db8:ff00::/40").unwrap();
        assert_eq!(p.prefix.to_string(), "2001:db8:ff00::/40");
        assert_eq!(parse_prefix(&p.prefix.to_string()).unwrap().prefix, p.prefix);
    }
}
