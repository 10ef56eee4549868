use std::fmt;
use std::str::FromStr;

use super::AddrError;

/// Number of nybbles in an IPv6 address.
pub const SEQ_LEN: usize = 32;

/// An IPv6 address as 32 hexadecimal digits, most significant first.
///
/// This is the representation every model and metric in the crate works on.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NybbleSeq([u8; SEQ_LEN]);

impl NybbleSeq {
    pub const ZERO: NybbleSeq = NybbleSeq([0; SEQ_LEN]);

    /// Builds a sequence from raw nybble values, rejecting anything above 15.
    pub fn new(nybbles: [u8; SEQ_LEN]) -> Result<Self, AddrError> {
        if let Some(pos) = nybbles.iter().position(|&n| n > 15) {
            return Err(AddrError::NybbleRange {
                position: pos,
                value: nybbles[pos],
            });
        }
        Ok(NybbleSeq(nybbles))
    }

    pub fn from_slice(nybbles: &[u8]) -> Result<Self, AddrError> {
        let arr: [u8; SEQ_LEN] = nybbles
            .try_into()
            .map_err(|_| AddrError::SeqLength(nybbles.len()))?;
        Self::new(arr)
    }

    /// Parses 32 bare hex digits (no colons), e.g. `20010db8000000000000000000000080`.
    pub fn from_hex(hex: &str) -> Result<Self, AddrError> {
        let mut out = [0u8; SEQ_LEN];
        let mut count = 0;
        for (pos, ch) in hex.chars().enumerate() {
            let v = ch
                .to_digit(16)
                .ok_or(AddrError::Parse { position: pos, reason: "expected hex digit" })?;
            if count == SEQ_LEN {
                return Err(AddrError::SeqLength(hex.chars().count()));
            }
            out[count] = v as u8;
            count += 1;
        }
        if count != SEQ_LEN {
            return Err(AddrError::SeqLength(count));
        }
        Ok(NybbleSeq(out))
    }

    pub fn from_u128(value: u128) -> Self {
        let mut out = [0u8; SEQ_LEN];
        for (i, n) in out.iter_mut().enumerate() {
            *n = ((value >> (4 * (SEQ_LEN - 1 - i))) & 0xf) as u8;
        }
        NybbleSeq(out)
    }

    pub fn to_u128(&self) -> u128 {
        self.0.iter().fold(0u128, |acc, &n| (acc << 4) | n as u128)
    }

    pub fn from_octets(octets: [u8; 16]) -> Self {
        Self::from_u128(u128::from_be_bytes(octets))
    }

    pub fn octets(&self) -> [u8; 16] {
        self.to_u128().to_be_bytes()
    }

    pub fn nybbles(&self) -> &[u8; SEQ_LEN] {
        &self.0
    }

    pub fn get(&self, idx: usize) -> u8 {
        self.0[idx]
    }

    /// The eight 16-bit groups of the textual form.
    pub fn groups(&self) -> [u16; 8] {
        let mut g = [0u16; 8];
        for (i, chunk) in self.0.chunks(4).enumerate() {
            g[i] = chunk.iter().fold(0u16, |acc, &n| (acc << 4) | n as u16);
        }
        g
    }

    /// Interface identifier bytes (the low 64 bits).
    pub fn iid_bytes(&self) -> [u8; 8] {
        let o = self.octets();
        o[8..16].try_into().unwrap()
    }

    pub fn to_hex(&self) -> String {
        self.0
            .iter()
            .map(|&n| char::from_digit(n as u32, 16).unwrap())
            .collect()
    }

    pub fn starts_with(&self, prefix: &[u8]) -> bool {
        prefix.len() <= SEQ_LEN && self.0[..prefix.len()] == *prefix
    }
}

impl From<std::net::Ipv6Addr> for NybbleSeq {
    fn from(a: std::net::Ipv6Addr) -> Self {
        NybbleSeq::from_octets(a.octets())
    }
}

impl From<NybbleSeq> for std::net::Ipv6Addr {
    fn from(s: NybbleSeq) -> Self {
        std::net::Ipv6Addr::from(s.octets())
    }
}

impl fmt::Display for NybbleSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_address(self))
    }
}

impl fmt::Debug for NybbleSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NybbleSeq({})", format_address(self))
    }
}

impl FromStr for NybbleSeq {
    type Err = AddrError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_address(s)
    }
}

/// Parses IPv6 text in full, `::`-compressed, or dotted-quad-tail form.
///
/// Hex digits are case-insensitive. Errors carry the character offset at
/// which parsing failed.
pub fn parse_address(text: &str) -> Result<NybbleSeq, AddrError> {
    let bytes = text.as_bytes();
    if bytes.is_empty() {
        return Err(AddrError::Parse { position: 0, reason: "empty address" });
    }

    let mut head: Vec<u16> = Vec::with_capacity(8);
    let mut tail: Vec<u16> = Vec::with_capacity(8);
    let mut seen_gap = false;
    let mut pos = 0;

    if bytes.starts_with(b"::") {
        seen_gap = true;
        pos = 2;
        if pos == bytes.len() {
            return Ok(NybbleSeq::ZERO);
        }
    } else if bytes[0] == b':' {
        return Err(AddrError::Parse { position: 0, reason: "leading single colon" });
    }

    loop {
        let groups = if seen_gap { &mut tail } else { &mut head };
        if groups.len() >= 8 {
            return Err(AddrError::Parse { position: pos, reason: "too many groups" });
        }

        // Dotted quad must be the final component.
        let rest = &text[pos..];
        let comp_end = rest.find(':').map(|i| pos + i).unwrap_or(bytes.len());
        if text[pos..comp_end].contains('.') {
            if comp_end != bytes.len() {
                return Err(AddrError::Parse { position: comp_end, reason: "dotted quad must be last" });
            }
            let v4 = parse_dotted_quad(&text[pos..], pos)?;
            groups.push(((v4[0] as u16) << 8) | v4[1] as u16);
            groups.push(((v4[2] as u16) << 8) | v4[3] as u16);
            break;
        }

        let mut value: u16 = 0;
        let mut digits = 0;
        while pos < bytes.len() && bytes[pos] != b':' {
            let d = (bytes[pos] as char)
                .to_digit(16)
                .ok_or(AddrError::Parse { position: pos, reason: "invalid character" })?;
            digits += 1;
            if digits > 4 {
                return Err(AddrError::Parse { position: pos, reason: "group longer than four digits" });
            }
            value = (value << 4) | d as u16;
            pos += 1;
        }
        if digits == 0 {
            return Err(AddrError::Parse { position: pos, reason: "empty group" });
        }
        groups.push(value);

        if pos == bytes.len() {
            break;
        }
        // bytes[pos] == ':'
        if pos + 1 < bytes.len() && bytes[pos + 1] == b':' {
            if seen_gap {
                return Err(AddrError::Parse { position: pos, reason: "multiple '::'" });
            }
            seen_gap = true;
            pos += 2;
            if pos == bytes.len() {
                break;
            }
        } else {
            pos += 1;
            if pos == bytes.len() {
                return Err(AddrError::Parse { position: pos, reason: "trailing colon" });
            }
        }
    }

    let total = head.len() + tail.len();
    let groups: Vec<u16> = if seen_gap {
        if total > 7 {
            return Err(AddrError::Parse { position: text.len(), reason: "'::' must stand for at least one group" });
        }
        let mut g = head;
        g.extend(std::iter::repeat_n(0, 8 - total));
        g.extend(tail);
        g
    } else {
        if total != 8 {
            return Err(AddrError::Parse { position: text.len(), reason: "expected eight groups" });
        }
        head
    };

    let value = groups.iter().fold(0u128, |acc, &g| (acc << 16) | g as u128);
    Ok(NybbleSeq::from_u128(value))
}

fn parse_dotted_quad(text: &str, offset: usize) -> Result<[u8; 4], AddrError> {
    let mut out = [0u8; 4];
    let mut idx = 0;
    let mut start = 0;
    for (i, part) in text.split('.').enumerate() {
        let at = offset + start;
        if i >= 4 {
            return Err(AddrError::Parse { position: at, reason: "too many dotted-quad parts" });
        }
        if part.is_empty() || part.len() > 3 {
            return Err(AddrError::Parse { position: at, reason: "bad dotted-quad part" });
        }
        if let Some(bad) = part.bytes().position(|b| !b.is_ascii_digit()) {
            return Err(AddrError::Parse { position: at + bad, reason: "invalid character" });
        }
        if part.len() > 1 && part.starts_with('0') {
            return Err(AddrError::Parse { position: at, reason: "leading zero in dotted quad" });
        }
        let v: u16 = part.parse().unwrap();
        if v > 255 {
            return Err(AddrError::Parse { position: at, reason: "dotted-quad part above 255" });
        }
        out[i] = v as u8;
        idx = i + 1;
        start += part.len() + 1;
    }
    if idx != 4 {
        return Err(AddrError::Parse { position: offset + text.len(), reason: "dotted quad needs four parts" });
    }
    Ok(out)
}

/// Canonical compressed text: lowercase, the longest run of two or more
/// zero groups replaced by `::` (leftmost on ties).
pub fn format_address(seq: &NybbleSeq) -> String {
    let groups = seq.groups();

    let mut best: Option<(usize, usize)> = None;
    let mut i = 0;
    while i < 8 {
        if groups[i] == 0 {
            let start = i;
            while i < 8 && groups[i] == 0 {
                i += 1;
            }
            let len = i - start;
            if len >= 2 && best.is_none_or(|(_, l)| len > l) {
                best = Some((start, len));
            }
        } else {
            i += 1;
        }
    }

    let hex = |gs: &[u16]| gs.iter().map(|g| format!("{g:x}")).collect::<Vec<_>>().join(":");
    match best {
        None => hex(&groups),
        Some((start, len)) => {
            format!("{}::{}", hex(&groups[..start]), hex(&groups[start + len..]))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::net::Ipv6Addr;

    #[test]
    fn parses_documented_examples() {
        let a = parse_address("2001:db8::80").unwrap();
        assert_eq!(a.to_hex(), "20010db8000000000000000000000080");
        assert_eq!(parse_address("::").unwrap(), NybbleSeq::ZERO);
        let b = parse_address("2001:db8:900::21e:67ff:fe31:4cdf").unwrap();
        assert_eq!(b.to_hex(), "20010db809000000021e67fffe314cdf");
    }

    #[test]
    fn formats_documented_examples() {
        assert_eq!(format_address(&NybbleSeq::ZERO), "::");
        let a = NybbleSeq::from_hex("20010db8000000000000000000000080").unwrap();
        assert_eq!(format_address(&a), "2001:db8::80");
        let b = NybbleSeq::from_hex("20010db8000868d3b7918741c1270a75").unwrap();
        assert_eq!(format_address(&b), "2001:db8:8:68d3:b791:8741:c127:a75");
    }

    #[test]
    fn case_insensitive_and_dotted_tail() {
        assert_eq!(
            parse_address("2001:DB8::C8C3:8C07").unwrap(),
            parse_address("2001:db8::c8c3:8c07").unwrap()
        );
        assert_eq!(
            parse_address("::ffff:192.168.2.10").unwrap(),
            parse_address("::ffff:c0a8:20a").unwrap()
        );
        assert_eq!(
            parse_address("1:2:3:4:5:6:1.2.3.4").unwrap(),
            parse_address("1:2:3:4:5:6:102:304").unwrap()
        );
    }

    #[test]
    fn single_zero_group_is_not_compressed() {
        let a = parse_address("1:0:2:3:4:5:6:7").unwrap();
        assert_eq!(format_address(&a), "1:0:2:3:4:5:6:7");
    }

    #[test]
    fn leftmost_run_wins_ties() {
        let a = parse_address("1:0:0:2:0:0:3:4").unwrap();
        assert_eq!(format_address(&a), "1::2:0:0:3:4");
        let b = parse_address("1:0:0:2:0:0:0:4").unwrap();
        assert_eq!(format_address(&b), "1:0:0:2::4");
    }

    #[test]
    fn rejects_malformed() {
        let err = |s: &str| parse_address(s).unwrap_err();
        assert!(matches!(err("1::2::3"), AddrError::Parse { reason: "multiple '::'", .. }));
        assert!(matches!(err("2001:db8::g"), AddrError::Parse { position: 10, .. }));
        assert!(matches!(err("1:2:3:4:5:6:7"), AddrError::Parse { .. }));
        assert!(matches!(err("1:2:3:4:5:6:7:8:9"), AddrError::Parse { .. }));
        assert!(matches!(err("12345::"), AddrError::Parse { position: 4, .. }));
        assert!(matches!(err(":1::"), AddrError::Parse { position: 0, .. }));
        assert!(matches!(err("1:"), AddrError::Parse { .. }));
        assert!(matches!(err("1:2:3:4:5:6:7:8::"), AddrError::Parse { .. }));
        assert!(matches!(err("::1.2.3"), AddrError::Parse { .. }));
        assert!(matches!(err("::1.2.3.256"), AddrError::Parse { .. }));
        assert!(matches!(err(""), AddrError::Parse { .. }));
        assert!(matches!(err("fe80::1%eth0"), AddrError::Parse { position: 7, .. }));
    }

    #[test]
    fn agrees_with_std_on_fixed_cases() {
        for s in ["::1", "1::", "fe80::1:2", "2001:db8:ff01:2::c8c3:8c07", "a:b:c:d:e:f:1:2", "::ffff:1.2.3.4"] {
            let std: Ipv6Addr = s.parse().unwrap();
            assert_eq!(parse_address(s).unwrap(), NybbleSeq::from(std), "{s}");
        }
    }
}
