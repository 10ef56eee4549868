use std::fmt;

use crate::addr::NybbleSeq;

pub const DEFAULT_PORTS: [u16; 13] = [21, 22, 23, 25, 53, 80, 110, 123, 143, 443, 993, 995, 8080];

/// Structural interface-identifier shapes, in reporting order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RfcPattern {
    EmbeddedIpv4,
    EmbeddedPort,
    IeeeDerived,
    LowByte,
    PatternBytes,
    Randomized,
}

impl RfcPattern {
    pub const ALL: [RfcPattern; 6] = [
        RfcPattern::EmbeddedIpv4,
        RfcPattern::EmbeddedPort,
        RfcPattern::IeeeDerived,
        RfcPattern::LowByte,
        RfcPattern::PatternBytes,
        RfcPattern::Randomized,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            RfcPattern::EmbeddedIpv4 => "Embedded-IPv4",
            RfcPattern::EmbeddedPort => "Embedded-port",
            RfcPattern::IeeeDerived => "IEEE-derived",
            RfcPattern::LowByte => "Low-byte",
            RfcPattern::PatternBytes => "Pattern-bytes",
            RfcPattern::Randomized => "Randomized",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(name))
    }
}

impl fmt::Display for RfcPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn is_ieee_derived(iid: &[u8]) -> bool {
    iid[6..10] == [0xf, 0xf, 0xf, 0xe]
}

/// The last group as a port: its hex value, or its digits read in decimal
/// when they are all 0-9 (so `::80` means port 80).
fn port_candidates(group: u16) -> [Option<u16>; 2] {
    let digits = format!("{group:x}");
    let decimal = if digits.bytes().all(|b| b.is_ascii_digit()) { digits.parse().ok() } else { None };
    [Some(group), decimal]
}

fn is_embedded_port(bytes: &[u8; 8], groups: &[u16], ports: &[u16]) -> bool {
    bytes[..6].iter().all(|&b| b == 0)
        && port_candidates(groups[3]).iter().flatten().any(|p| ports.contains(p))
}

fn is_embedded_ipv4(bytes: &[u8; 8], groups: &[u16]) -> bool {
    let low32 = bytes[..4].iter().all(|&b| b == 0)
        && bytes[4] != 0
        && bytes[4..].iter().any(|&b| b >= 0x20);
    let per_group = groups.iter().all(|&g| g <= 0xff)
        && groups[0] != 0
        && groups.iter().filter(|&&g| g != 0).count() >= 2;
    low32 || per_group
}

fn is_low_byte(groups: &[u16]) -> bool {
    groups[0] == 0 && groups[1] == 0 && groups[2] <= 0xff && groups[3] <= 0xff && (groups[2] | groups[3]) != 0
}

fn is_pattern_bytes(bytes: &[u8; 8]) -> bool {
    if bytes.iter().all(|&b| b == 0) {
        return false;
    }
    let mut counts = [0u8; 256];
    bytes.iter().for_each(|&b| counts[b as usize] += 1);
    counts.iter().any(|&c| c >= 3)
}

/// Assigns the first matching shape in the order IEEE-derived, embedded
/// port, embedded IPv4, low-byte, pattern-bytes, randomized.
pub fn classify_rfc(seq: &NybbleSeq, ports: &[u16]) -> RfcPattern {
    let iid = &seq.nybbles()[16..];
    let bytes = seq.iid_bytes();
    let groups = &seq.groups()[4..];
    if is_ieee_derived(iid) {
        RfcPattern::IeeeDerived
    } else if is_embedded_port(&bytes, groups, ports) {
        RfcPattern::EmbeddedPort
    } else if is_embedded_ipv4(&bytes, groups) {
        RfcPattern::EmbeddedIpv4
    } else if is_low_byte(groups) {
        RfcPattern::LowByte
    } else if is_pattern_bytes(&bytes) {
        RfcPattern::PatternBytes
    } else {
        RfcPattern::Randomized
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::addr::parse_address;

    fn rfc(text: &str) -> RfcPattern {
        classify_rfc(&parse_address(text).unwrap(), &DEFAULT_PORTS)
    }

    #[test]
    fn published_examples() {
        assert_eq!(rfc("2001:db8:900::21e:67ff:fe31:4cdf"), RfcPattern::IeeeDerived);
        assert_eq!(rfc("2001:db8::80"), RfcPattern::EmbeddedPort);
        assert_eq!(rfc("2001:db8:ff01:2::c8c3:8c07"), RfcPattern::EmbeddedIpv4);
        assert_eq!(rfc("2001:db8:100:100::1"), RfcPattern::LowByte);
        assert_eq!(rfc("2001:db8:8:68d3:b791:8741:c127:a75"), RfcPattern::Randomized);
        assert_eq!(rfc("2001:db8:ff01:4:face:b00c::a7"), RfcPattern::PatternBytes);
    }

    #[test]
    fn iid_shape_examples() {
        assert_eq!(rfc("2001:db8::c0a8:20a"), RfcPattern::EmbeddedIpv4);
        assert_eq!(rfc("2001:db8::c0:a8:2:a"), RfcPattern::EmbeddedIpv4);
        assert_eq!(rfc("2001:db8::a"), RfcPattern::LowByte);
        assert_eq!(rfc("2001:db8::1:a"), RfcPattern::LowByte);
        assert_eq!(rfc("2001:db8::1bb"), RfcPattern::EmbeddedPort);
        assert_eq!(rfc("2001:db8::443"), RfcPattern::EmbeddedPort);
    }

    #[test]
    fn all_zero_iid_is_randomized() {
        assert_eq!(rfc("2001:db8::"), RfcPattern::Randomized);
    }

    #[test]
    fn custom_port_list() {
        let s = parse_address("2001:db8::1f90").unwrap();
        assert_eq!(classify_rfc(&s, &[8080]), RfcPattern::EmbeddedPort);
        assert_eq!(classify_rfc(&s, &[]), RfcPattern::PatternBytes);
    }

    #[test]
    fn names_round_trip() {
        for p in RfcPattern::ALL {
            assert_eq!(RfcPattern::from_name(p.name()), Some(p));
        }
    }
}
