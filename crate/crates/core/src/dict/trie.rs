//! Token-sequence trie for phrase dictionaries.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[derive(Debug, Clone, Default)]
struct TrieNode {
    children: BTreeMap<String, usize>,
    entry: Option<usize>,
}

/// Maps token sequences to entry indices; lookups are longest-prefix.
#[derive(Debug, Clone)]
pub(crate) struct TokenTrie {
    nodes: Vec<TrieNode>,
}

impl TokenTrie {
    pub fn new() -> Self {
        TokenTrie {
            nodes: vec![TrieNode::default()],
        }
    }

    /// Inserts a phrase. Returns the previous entry index if the exact
    /// phrase was already present; the old value is kept in that case.
    pub fn insert(&mut self, phrase: &[String], entry: usize) -> Option<usize> {
        let mut cur = 0;
        for token in phrase {
            let next = match self.nodes[cur].children.get(token) {
                Some(&n) => n,
                None => {
                    self.nodes.push(TrieNode::default());
                    let n = self.nodes.len() - 1;
                    self.nodes[cur].children.insert(token.clone(), n);
                    n
                }
            };
            cur = next;
        }
        match self.nodes[cur].entry {
            Some(existing) => Some(existing),
            None => {
                self.nodes[cur].entry = Some(entry);
                None
            }
        }
    }

    /// Longest prefix of `tokens` that is a stored phrase, as
    /// `(entry, tokens consumed)`.
    pub fn longest_prefix(&self, tokens: &[&str]) -> Option<(usize, usize)> {
        let mut cur = 0;
        let mut best = self.nodes[0].entry.map(|e| (e, 0));
        for (i, token) in tokens.iter().enumerate() {
            match self.nodes[cur].children.get(*token) {
                Some(&next) => {
                    cur = next;
                    if let Some(entry) = self.nodes[cur].entry {
                        best = Some((entry, i + 1));
                    }
                }
                None => break,
            }
        }
        best
    }

    /// True if any stored phrase occurs as a contiguous subsequence.
    pub fn contains_anywhere(&self, tokens: &[&str]) -> bool {
        (0..tokens.len()).any(|i| self.longest_prefix(&tokens[i..]).is_some())
    }
}
