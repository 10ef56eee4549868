use super::{NybblePrefix, NybbleSeq};

const NONE: u32 = u32::MAX;

#[derive(Clone, Debug)]
struct Node {
    children: [u32; 16],
    terminal: bool,
}

impl Node {
    fn empty() -> Self {
        Node { children: [NONE; 16], terminal: false }
    }
}

/// Nybble-granular prefix tree of aliased prefixes.
///
/// Nodes live in a flat arena; a node at depth `d` marked terminal means an
/// inserted prefix of length `d` ends there.
#[derive(Clone, Debug)]
pub struct AliasTrie {
    nodes: Vec<Node>,
    prefixes: Vec<NybblePrefix>,
}

impl Default for AliasTrie {
    fn default() -> Self {
        Self::new()
    }
}

impl AliasTrie {
    pub fn new() -> Self {
        AliasTrie { nodes: vec![Node::empty()], prefixes: Vec::new() }
    }

    pub fn from_prefixes<'a>(prefixes: impl IntoIterator<Item = &'a NybblePrefix>) -> Self {
        let mut trie = Self::new();
        for p in prefixes {
            trie.insert(p);
        }
        trie
    }

    pub fn insert(&mut self, prefix: &NybblePrefix) {
        let mut cur = 0usize;
        for &n in prefix.nybbles() {
            let next = self.nodes[cur].children[n as usize];
            cur = if next == NONE {
                self.nodes.push(Node::empty());
                let id = (self.nodes.len() - 1) as u32;
                self.nodes[cur].children[n as usize] = id;
                id as usize
            } else {
                next as usize
            };
        }
        if !self.nodes[cur].terminal {
            self.nodes[cur].terminal = true;
            self.prefixes.push(prefix.clone());
        }
    }

    /// Length of the longest inserted prefix that `seq` starts with.
    pub fn longest_match(&self, seq: &NybbleSeq) -> Option<usize> {
        let mut cur = 0usize;
        let mut best = None;
        for (depth, &n) in seq.nybbles().iter().enumerate() {
            let next = self.nodes[cur].children[n as usize];
            if next == NONE {
                break;
            }
            cur = next as usize;
            if self.nodes[cur].terminal {
                best = Some(depth + 1);
            }
        }
        best
    }

    /// Distinct inserted prefixes in insertion order.
    pub fn prefixes(&self) -> &[NybblePrefix] {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }
}

impl PartialEq for AliasTrie {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.prefixes.clone();
        let mut b = other.prefixes.clone();
        a.sort();
        b.sort();
        a == b
    }
}

/// Longest aliased-prefix match for `seq`, or `None`.
pub fn alias_match(trie: &AliasTrie, seq: &NybbleSeq) -> Option<usize> {
    trie.longest_match(seq)
}
