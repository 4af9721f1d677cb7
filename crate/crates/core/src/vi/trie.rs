//! Character trie over syllables, plus the separated-syllable merger.

#[derive(Debug, Clone, Default)]
struct Node {
    // Sorted by char; syllable alphabets are small so a vec beats a map.
    children: Vec<(char, u32)>,
    terminal: bool,
}

/// Prefix tree over the characters of inserted syllables.
#[derive(Debug, Clone)]
pub struct SyllableTrie {
    nodes: Vec<Node>,
    len: usize,
}

impl Default for SyllableTrie {
    fn default() -> Self {
        SyllableTrie {
            nodes: vec![Node::default()],
            len: 0,
        }
    }
}

/// Position of a walk through the trie.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Cursor(u32);

impl SyllableTrie {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: &str) {
        let mut node = 0usize;
        for c in s.chars() {
            node = match self.nodes[node].children.binary_search_by_key(&c, |e| e.0) {
                Ok(i) => self.nodes[node].children[i].1 as usize,
                Err(i) => {
                    let id = self.nodes.len();
                    self.nodes.push(Node::default());
                    self.nodes[node].children.insert(i, (c, id as u32));
                    id
                }
            };
        }
        if !self.nodes[node].terminal {
            self.nodes[node].terminal = true;
            self.len += 1;
        }
    }

    pub fn root(&self) -> Cursor {
        Cursor(0)
    }

    /// Follows `s` from `from`; `None` once the path dies.
    pub fn walk(&self, from: Cursor, s: &str) -> Option<Cursor> {
        let mut node = from.0 as usize;
        for c in s.chars() {
            let children = &self.nodes[node].children;
            let i = children.binary_search_by_key(&c, |e| e.0).ok()?;
            node = children[i].1 as usize;
        }
        Some(Cursor(node as u32))
    }

    pub fn is_terminal(&self, at: Cursor) -> bool {
        self.nodes[at.0 as usize].terminal
    }

    pub fn contains(&self, s: &str) -> bool {
        self.walk(self.root(), s)
            .is_some_and(|c| self.is_terminal(c))
    }

    pub fn has_prefix(&self, s: &str) -> bool {
        self.walk(self.root(), s).is_some()
    }

    /// Number of distinct inserted strings.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

impl<S: AsRef<str>> FromIterator<S> for SyllableTrie {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut t = SyllableTrie::new();
        for s in iter {
            t.insert(s.as_ref());
        }
        t
    }
}

/// Rejoins syllables that were split by stray spaces (`h ô m` → `hôm`).
///
/// Scans left to right and, at each position, takes the longest run of two
/// or more tokens whose concatenation is a complete syllable in `trie`,
/// provided at least one token of the run is not itself a syllable.
/// Everything else passes through unchanged.
pub fn merge_separated<S: AsRef<str>>(tokens: &[S], trie: &SyllableTrie) -> Vec<String> {
    let mut out = Vec::with_capacity(tokens.len());
    let mut i = 0;
    while i < tokens.len() {
        let mut cursor = trie.root();
        let mut has_fragment = false;
        let mut best_end = None;
        for (j, tok) in tokens.iter().enumerate().skip(i) {
            let tok = tok.as_ref();
            match trie.walk(cursor, tok) {
                Some(c) => cursor = c,
                None => break,
            }
            has_fragment |= !trie.contains(tok);
            if j > i && has_fragment && trie.is_terminal(cursor) {
                best_end = Some(j + 1);
            }
        }
        match best_end {
            Some(end) => {
                out.push(tokens[i..end].iter().map(AsRef::as_ref).collect());
                i = end;
            }
            None => {
                out.push(tokens[i].as_ref().to_string());
                i += 1;
            }
        }
    }
    out
}
