use rand::Rng;

use super::spec::FamilyRule;
use crate::addr::NybbleSeq;
use crate::classify::{classify_rfc, RfcPattern, DEFAULT_PORTS};

impl FamilyRule {
    pub fn pattern(&self) -> RfcPattern {
        match self {
            FamilyRule::LowByte => RfcPattern::LowByte,
            FamilyRule::EmbeddedIpv4 => RfcPattern::EmbeddedIpv4,
            FamilyRule::EmbeddedPort { .. } => RfcPattern::EmbeddedPort,
            FamilyRule::IeeeDerived { .. } => RfcPattern::IeeeDerived,
            FamilyRule::PatternBytes { .. } => RfcPattern::PatternBytes,
            FamilyRule::Randomized => RfcPattern::Randomized,
        }
    }

    /// Port list used for classification: the family's own for port
    /// families, the classifier default otherwise.
    fn ports(&self) -> &[u16] {
        match self {
            FamilyRule::EmbeddedPort { ports } => ports,
            _ => &DEFAULT_PORTS,
        }
    }

    /// Whether the IID of `seq` has this rule's shape.
    pub fn conforms(&self, seq: &NybbleSeq) -> bool {
        if classify_rfc(seq, self.ports()) != self.pattern() {
            return false;
        }
        let iid = seq.iid_bytes();
        match self {
            FamilyRule::IeeeDerived { ouis } if !ouis.is_empty() => {
                let oui = (((iid[0] ^ 0x02) as u32) << 16) | ((iid[1] as u32) << 8) | iid[2] as u32;
                ouis.contains(&oui)
            }
            FamilyRule::PatternBytes { tag } => iid.iter().filter(|&&b| b == *tag).count() >= 3,
            _ => true,
        }
    }

    /// Draws an IID of this shape. May return a non-conforming IID for
    /// rules with rare collisions; callers re-check with [`Self::conforms`].
    pub fn sample_iid(&self, rng: &mut impl Rng) -> [u8; 8] {
        let mut b = [0u8; 8];
        match self {
            FamilyRule::LowByte => {
                if rng.random_bool(0.75) {
                    b[7] = rng.random_range(1..=0xff);
                } else {
                    b[5] = rng.random_range(1..=0x0f);
                    b[7] = rng.random_range(0..=0xff);
                }
            }
            FamilyRule::EmbeddedIpv4 => {
                b[4] = rng.random_range(0x20..=0xdf);
                for x in &mut b[5..] {
                    *x = rng.random();
                }
            }
            FamilyRule::EmbeddedPort { ports } => {
                let port = ports[rng.random_range(0..ports.len())];
                // Either the port's hex value or its decimal digits as hex.
                let group = if rng.random_bool(0.5) {
                    port
                } else {
                    u16::from_str_radix(&port.to_string(), 16).unwrap_or(port)
                };
                b[6..].copy_from_slice(&group.to_be_bytes());
            }
            FamilyRule::IeeeDerived { ouis } => {
                let oui = if ouis.is_empty() {
                    rng.random_range(0..1u32 << 24) & !0x0002_0000
                } else {
                    ouis[rng.random_range(0..ouis.len())]
                };
                b[0] = ((oui >> 16) as u8) ^ 0x02;
                b[1] = (oui >> 8) as u8;
                b[2] = oui as u8;
                b[3] = 0xff;
                b[4] = 0xfe;
                for x in &mut b[5..] {
                    *x = rng.random();
                }
            }
            FamilyRule::PatternBytes { tag } => {
                for x in &mut b {
                    *x = rng.random();
                }
                let mut positions = [0usize, 1, 2, 3, 4, 5, 6, 7];
                for i in 0..3 {
                    let j = rng.random_range(i..8);
                    positions.swap(i, j);
                    b[positions[i]] = *tag;
                }
            }
            FamilyRule::Randomized => {
                for x in &mut b {
                    *x = rng.random();
                }
            }
        }
        b
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn with_iid(iid: [u8; 8]) -> NybbleSeq {
        let mut o = [0u8; 16];
        o[0] = 0x20;
        o[1] = 0x01;
        o[8..].copy_from_slice(&iid);
        NybbleSeq::from_octets(o)
    }

    #[test]
    fn samplers_mostly_conform() {
        let rules = [
            FamilyRule::LowByte,
            FamilyRule::EmbeddedIpv4,
            FamilyRule::EmbeddedPort { ports: vec![22, 80, 443] },
            FamilyRule::IeeeDerived { ouis: vec![0x001b21] },
            FamilyRule::IeeeDerived { ouis: vec![] },
            FamilyRule::PatternBytes { tag: 0x5a },
            FamilyRule::Randomized,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for rule in rules {
            let ok = (0..1000).filter(|_| rule.conforms(&with_iid(rule.sample_iid(&mut rng)))).count();
            assert!(ok >= 950, "{rule:?}: {ok}/1000");
        }
    }
}
