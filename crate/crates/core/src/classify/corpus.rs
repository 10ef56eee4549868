use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::rfc::{classify_rfc, RfcPattern};
use super::ClassifyError;
use crate::addr::{parse_address, NybbleSeq};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rfc,
    Entropy,
    Ipv62vec,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rfc => "rfc",
            Method::Entropy => "entropy",
            Method::Ipv62vec => "ipv62vec",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rfc" => Ok(Method::Rfc),
            "entropy" => Ok(Method::Entropy),
            "ipv62vec" => Ok(Method::Ipv62vec),
            other => Err(format!("unknown method {other:?} (expected rfc, entropy or ipv62vec)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PatternLabel {
    pub method: Method,
    pub class_id: usize,
    pub class_name: String,
}

/// Seeds partitioned into `k` non-empty classes numbered `0..k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledSeedCorpus {
    method: Method,
    seeds: Vec<NybbleSeq>,
    class_of: Vec<usize>,
    names: Vec<String>,
    members: Vec<Vec<usize>>,
}

impl LabeledSeedCorpus {
    /// Builds a corpus from arbitrary raw class ids. Raw ids that never occur
    /// are dropped and the rest renumbered in increasing raw-id order.
    pub fn from_raw(
        method: Method,
        seeds: Vec<NybbleSeq>,
        raw: &[usize],
        name_of: impl Fn(usize) -> String,
    ) -> Result<Self, ClassifyError> {
        if seeds.len() != raw.len() {
            return Err(ClassifyError::Invalid(format!(
                "{} seeds but {} labels",
                seeds.len(),
                raw.len()
            )));
        }
        let mut used: Vec<usize> = raw.to_vec();
        used.sort_unstable();
        used.dedup();
        let class_of: Vec<usize> = raw.iter().map(|r| used.binary_search(r).unwrap()).collect();
        let mut members = vec![Vec::new(); used.len()];
        for (i, &c) in class_of.iter().enumerate() {
            members[c].push(i);
        }
        let names = used.iter().map(|&r| name_of(r)).collect();
        Ok(LabeledSeedCorpus { method, seeds, class_of, names, members })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn seeds(&self) -> &[NybbleSeq] {
        &self.seeds
    }

    pub fn len(&self) -> usize {
        self.seeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seeds.is_empty()
    }

    pub fn k(&self) -> usize {
        self.members.len()
    }

    pub fn class_ids(&self) -> &[usize] {
        &self.class_of
    }

    pub fn label(&self, i: usize) -> PatternLabel {
        let c = self.class_of[i];
        PatternLabel { method: self.method, class_id: c, class_name: self.names[c].clone() }
    }

    pub fn class_name(&self, class: usize) -> &str {
        &self.names[class]
    }

    pub fn class_names(&self) -> &[String] {
        &self.names
    }

    /// Seed indices of `class`.
    pub fn members(&self, class: usize) -> &[usize] {
        &self.members[class]
    }

    pub fn class_seeds(&self, class: usize) -> Vec<NybbleSeq> {
        self.members[class].iter().map(|&i| self.seeds[i]).collect()
    }

    pub fn class_sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    /// `address<TAB>method<TAB>class_id<TAB>class_name` lines.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (i, s) in self.seeds.iter().enumerate() {
            let c = self.class_of[i];
            out.push_str(&format!("{s}\t{}\t{c}\t{}\n", self.method, self.names[c]));
        }
        out
    }

    pub fn write_labels(&self, path: &Path) -> Result<(), ClassifyError> {
        std::fs::write(path, self.to_tsv())
            .map_err(|e| ClassifyError::Io(path.display().to_string(), e))
    }

    pub fn parse_tsv(text: &str) -> Result<Self, ClassifyError> {
        let mut seeds = Vec::new();
        let mut raw = Vec::new();
        let mut names: Vec<Option<String>> = Vec::new();
        let mut method = None;
        for (n, line) in text.lines().enumerate() {
            let line_no = n + 1;
            let bad = |reason: String| ClassifyError::LabelLine { line: line_no, reason };
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [addr, m, id, name] = fields[..] else {
                return Err(bad(format!("expected 4 tab-separated fields, got {}", fields.len())));
            };
            let m: Method = m.parse().map_err(bad)?;
            if *method.get_or_insert(m) != m {
                return Err(bad("mixed classification methods".into()));
            }
            let id: usize = id.parse().map_err(|_| bad(format!("bad class id {id:?}")))?;
            seeds.push(parse_address(addr).map_err(|e| bad(e.to_string()))?);
            if names.len() <= id {
                names.resize(id + 1, None);
            }
            match &names[id] {
                Some(existing) if existing != name => {
                    return Err(bad(format!("class {id} named both {existing:?} and {name:?}")))
                }
                _ => names[id] = Some(name.to_string()),
            }
            raw.push(id);
        }
        let method = method.ok_or(ClassifyError::Empty)?;
        Self::from_raw(method, seeds, &raw, |r| names[r].clone().unwrap_or_default())
    }
}

pub fn read_labels(path: &Path) -> Result<LabeledSeedCorpus, ClassifyError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ClassifyError::Io(path.display().to_string(), e))?;
    LabeledSeedCorpus::parse_tsv(&text)
}

/// Labels every seed with its RFC shape; shapes with no seeds are dropped.
pub fn classify_rfc_corpus(seeds: Vec<NybbleSeq>, ports: &[u16]) -> Result<LabeledSeedCorpus, ClassifyError> {
    if seeds.is_empty() {
        return Err(ClassifyError::Empty);
    }
    let raw: Vec<usize> = seeds.iter().map(|s| classify_rfc(s, ports).index()).collect();
    LabeledSeedCorpus::from_raw(Method::Rfc, seeds, &raw, |r| RfcPattern::ALL[r].name().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::DEFAULT_PORTS;

    fn seeds(texts: &[&str]) -> Vec<NybbleSeq> {
        texts.iter().map(|t| parse_address(t).unwrap()).collect()
    }

    #[test]
    fn empty_classes_are_dropped_and_renumbered() {
        let c = LabeledSeedCorpus::from_raw(Method::Entropy, seeds(&["::1", "::2", "::3"]), &[7, 2, 7], |r| {
            format!("c{r}")
        })
        .unwrap();
        assert_eq!(c.k(), 2);
        assert_eq!(c.class_ids(), &[1, 0, 1]);
        assert_eq!(c.class_name(1), "c7");
        assert_eq!(c.members(1), &[0, 2]);
    }

    #[test]
    fn tsv_round_trip() {
        let c = classify_rfc_corpus(
            seeds(&["2001:db8::80", "2001:db8:100:100::1", "2001:db8::c0a8:20a"]),
            &DEFAULT_PORTS,
        )
        .unwrap();
        let back = LabeledSeedCorpus::parse_tsv(&c.to_tsv()).unwrap();
        assert_eq!(back, c);
        assert_eq!(c.label(0).class_name, "Embedded-port");
    }

    #[test]
    fn rejects_malformed_tsv() {
        assert!(LabeledSeedCorpus::parse_tsv("::1\trfc\t0\n").is_err());
        assert!(LabeledSeedCorpus::parse_tsv("::1\tfoo\t0\tx\n").is_err());
        assert!(LabeledSeedCorpus::parse_tsv("::1\trfc\t0\ta\n::2\trfc\t0\tb\n").is_err());
        assert!(matches!(LabeledSeedCorpus::parse_tsv(""), Err(ClassifyError::Empty)));
    }

    #[test]
    fn empty_seed_list_is_an_error() {
        assert!(matches!(classify_rfc_corpus(vec![], &DEFAULT_PORTS), Err(ClassifyError::Empty)));
    }
}
