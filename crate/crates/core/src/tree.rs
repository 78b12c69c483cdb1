//! Phrase trees ingested from Penn Treebank bracketings.
//!
//! A sentence arrives as one S-expression, e.g.
//! `(S (NP (NN PROTESTERS)) (VP (VBD DESTROYED) (NP (DT THE) (NN MONUMENT))) (. .))`,
//! and is stored as an arena of nodes with parent links. A preterminal such
//! as `(NN PROTESTERS)` collapses into a single word node carrying both the
//! tag and the (uppercased) token. Besides navigation, this module answers
//! the structural questions the meaning engine keeps asking: what is the
//! head word of this phrase, which clause am I in, and where is the subject.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::date::Date;

/// Coarse constituent classes. Every label maps to exactly one kind.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Kind {
    /// Clause level: `S` and `SBAR`.
    Clause,
    NounPhrase,
    VerbPhrase,
    PrepPhrase,
    /// A preterminal: part-of-speech tag plus surface token.
    Word,
    /// Everything else (ADVP, ADJP, PRT, ...); treated as a transparent
    /// container by the scans below.
    Other,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct NodeId(usize);

impl NodeId {
    pub const fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone)]
pub struct ParseNode {
    label: String,
    kind: Kind,
    token: Option<String>,
    children: Vec<NodeId>,
    parent: Option<NodeId>,
    /// Position among the parent's children.
    index: usize,
}

impl ParseNode {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn token(&self) -> Option<&str> {
        self.token.as_deref()
    }

    pub fn children(&self) -> &[NodeId] {
        &self.children
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn sibling_index(&self) -> usize {
        self.index
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("unbalanced parenthesis at byte {0}")]
    UnbalancedParens(usize),
    #[error("input contains no tree")]
    EmptyTree,
    #[error("input contains more than one top-level tree")]
    MultipleRoots,
    #[error("malformed constituent at byte {pos}: {reason}")]
    Malformed { pos: usize, reason: &'static str },
}

/// An immutable sentence parse. Construction is single-threaded; afterwards
/// the tree is safe to share read-only across threads.
#[derive(Debug, Clone)]
pub struct ParseTree {
    nodes: Vec<ParseNode>,
    root: NodeId,
    sentence_id: String,
    date: Date,
}

impl ParseTree {
    /// Reads one Penn Treebank bracketing. Tokens are uppercased; labels are
    /// kept verbatim. A `ROOT`/`TOP`/unlabeled wrapper around a single
    /// constituent is dropped.
    pub fn from_sexpr(text: &str, sentence_id: &str, date: Date) -> Result<Self, ParseError> {
        let raw = parse_raw(text)?;
        let mut tree = ParseTree {
            nodes: Vec::new(),
            root: NodeId(0),
            sentence_id: sentence_id.to_string(),
            date,
        };
        tree.flatten(&raw, None, 0)?;
        Ok(tree)
    }

    fn flatten(
        &mut self,
        raw: &RawNode,
        parent: Option<NodeId>,
        index: usize,
    ) -> Result<NodeId, ParseError> {
        let kind = classify(&raw.label);
        match (&raw.token, kind) {
            (Some(_), k) if k != Kind::Word => {
                return Err(ParseError::Malformed {
                    pos: raw.pos,
                    reason: "token under a non-lexical label",
                })
            }
            (None, Kind::Word) => {
                return Err(ParseError::Malformed {
                    pos: raw.pos,
                    reason: "part-of-speech tag used as a phrase label",
                })
            }
            _ => {}
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(ParseNode {
            label: raw.label.clone(),
            kind,
            token: raw.token.clone(),
            children: Vec::new(),
            parent,
            index,
        });
        for (i, child) in raw.children.iter().enumerate() {
            let child_id = self.flatten(child, Some(id), i)?;
            self.nodes[id.0].children.push(child_id);
        }
        Ok(id)
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &ParseNode {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn sentence_id(&self) -> &str {
        &self.sentence_id
    }

    pub fn date(&self) -> Date {
        self.date
    }

    pub fn kind(&self, id: NodeId) -> Kind {
        self.node(id).kind
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.node(id).label
    }

    pub fn token(&self, id: NodeId) -> Option<&str> {
        self.node(id).token()
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.node(id).parent
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.node(id).children
    }

    /// All word nodes in surface order.
    pub fn words(&self) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.collect_words(self.root, &mut out);
        out
    }

    fn collect_words(&self, id: NodeId, out: &mut Vec<NodeId>) {
        let node = self.node(id);
        if node.kind == Kind::Word {
            out.push(id);
        }
        for &c in &node.children {
            self.collect_words(c, out);
        }
    }

    /// The sentence's tokens in surface order.
    pub fn tokens(&self) -> Vec<&str> {
        self.words().iter().filter_map(|&w| self.token(w)).collect()
    }

    /// Canonical S-expression form. Round-trips the leaf tokens exactly.
    pub fn to_sexpr(&self) -> String {
        let mut out = String::new();
        self.write_sexpr(self.root, &mut out);
        out
    }

    fn write_sexpr(&self, id: NodeId, out: &mut String) {
        let node = self.node(id);
        out.push('(');
        out.push_str(&node.label);
        if let Some(token) = &node.token {
            out.push(' ');
            out.push_str(token);
        }
        for &c in &node.children {
            out.push(' ');
            self.write_sexpr(c, out);
        }
        out.push(')');
    }

    /// The head word of a phrase: the lowest word reachable through an
    /// unbroken chain of same-kind phrase nodes, rightmost at every branch.
    /// The word itself must belong to the phrase's lexical class (`N*` under
    /// an NP, `V*` under a VP). A word node is its own head; clause and
    /// `Other` nodes have none.
    pub fn head_of(&self, id: NodeId) -> Option<NodeId> {
        let node = self.node(id);
        match node.kind {
            Kind::Word => Some(id),
            Kind::NounPhrase | Kind::VerbPhrase | Kind::PrepPhrase => {
                self.head_search(id, node.kind)
            }
            _ => None,
        }
    }

    fn head_search(&self, id: NodeId, kind: Kind) -> Option<NodeId> {
        for &child in self.node(id).children.iter().rev() {
            let c = self.node(child);
            if c.kind == Kind::Word && head_class_matches(kind, &c.label) {
                return Some(child);
            }
            if c.kind == kind {
                if let Some(head) = self.head_search(child, kind) {
                    return Some(head);
                }
            }
        }
        None
    }

    /// Nearest clause node at or above `id`.
    pub fn clause_of(&self, id: NodeId) -> Option<NodeId> {
        let mut cur = Some(id);
        while let Some(n) = cur {
            if self.kind(n) == Kind::Clause {
                return Some(n);
            }
            cur = self.parent(n);
        }
        None
    }

    /// Topmost verb phrase of the chain `vp` sits in: ascends while the
    /// parent is also a VP, so a modal or auxiliary chain resolves to its
    /// outermost link.
    pub fn verb_chain_top(&self, vp: NodeId) -> NodeId {
        let mut cur = vp;
        while let Some(p) = self.parent(cur) {
            if self.kind(p) == Kind::VerbPhrase {
                cur = p;
            } else {
                break;
            }
        }
        cur
    }

    /// The NP holding the grammatical subject of `vp`: the nearest NP
    /// sibling preceding the top of the verb chain under its clause. Empty
    /// when the chain does not sit under a clause or no NP precedes it.
    pub fn subject_np(&self, vp: NodeId) -> Option<NodeId> {
        let top = self.verb_chain_top(vp);
        let parent = self.parent(top)?;
        if self.kind(parent) != Kind::Clause {
            return None;
        }
        let idx = self.node(top).index;
        self.children(parent)[..idx]
            .iter()
            .rev()
            .copied()
            .find(|&c| self.kind(c) == Kind::NounPhrase)
    }

    /// The verb phrase's own verb: the leftmost word child tagged `V*` or
    /// `MD`, looking through transparent containers.
    pub fn verb_word(&self, vp: NodeId) -> Option<NodeId> {
        self.word_children(vp).into_iter().find(|&w| {
            let label = self.label(w);
            label.starts_with('V') || label == "MD"
        })
    }

    /// Direct word children, plus words inside `Other` containers. Does not
    /// descend into NP/VP/PP/clause children.
    pub fn word_children(&self, id: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.collect_shallow(id, &mut out, &|k| k == Kind::Word);
        out
    }

    /// Direct children of `kind`, plus matches inside `Other` containers.
    pub fn phrase_children(&self, id: NodeId, kind: Kind) -> Vec<NodeId> {
        let mut out = Vec::new();
        self.collect_shallow(id, &mut out, &|k| k == kind);
        out
    }

    fn collect_shallow(&self, id: NodeId, out: &mut Vec<NodeId>, want: &dyn Fn(Kind) -> bool) {
        for &child in self.node(id).children() {
            let k = self.kind(child);
            if want(k) {
                out.push(child);
            } else if k == Kind::Other {
                self.collect_shallow(child, out, want);
            }
        }
    }

    /// Word tokens visible from `id` without entering phrase children: the
    /// phrase's own lexical material.
    pub fn surface_tokens(&self, id: NodeId) -> Vec<(NodeId, &str)> {
        self.word_children(id)
            .into_iter()
            .filter_map(|w| self.token(w).map(|t| (w, t)))
            .collect()
    }

    /// All word tokens below `id`, in surface order.
    pub fn subtree_tokens(&self, id: NodeId) -> Vec<(NodeId, &str)> {
        let mut words = Vec::new();
        self.collect_words(id, &mut words);
        words
            .into_iter()
            .filter_map(|w| self.token(w).map(|t| (w, t)))
            .collect()
    }

    /// Short human-readable node reference for diagnostics, e.g. `NP#4` or
    /// `VBN#9 LAUNCHED`.
    pub fn describe(&self, id: NodeId) -> String {
        let node = self.node(id);
        let mut s = String::new();
        s.push_str(&node.label);
        s.push('#');
        s.push_str(&id.0.to_string());
        if let Some(t) = &node.token {
            s.push(' ');
            s.push_str(t);
        }
        s
    }
}

/// Classifies a label. Functional tags and indices (`NP-SBJ`, `NP=2`) are
/// stripped to the bare category first; punctuation pseudo-tags that start
/// with `-` (`-LRB-`) are kept whole.
pub fn classify(label: &str) -> Kind {
    let bare = bare_category(label);
    if bare == "S" || bare == "SBAR" {
        return Kind::Clause;
    }
    if bare.starts_with("NP") {
        return Kind::NounPhrase;
    }
    if bare.starts_with("VP") {
        return Kind::VerbPhrase;
    }
    if bare.starts_with("PP") {
        return Kind::PrepPhrase;
    }
    if is_pos_tag(bare) {
        return Kind::Word;
    }
    Kind::Other
}

fn bare_category(label: &str) -> &str {
    if label.starts_with('-') {
        return label;
    }
    label.split(['-', '=']).next().unwrap_or(label)
}

fn is_pos_tag(label: &str) -> bool {
    matches!(
        label,
        "CC" | "CD"
            | "DT"
            | "EX"
            | "FW"
            | "IN"
            | "JJ"
            | "JJR"
            | "JJS"
            | "LS"
            | "MD"
            | "NN"
            | "NNS"
            | "NNP"
            | "NNPS"
            | "PDT"
            | "POS"
            | "PRP"
            | "PRP$"
            | "RB"
            | "RBR"
            | "RBS"
            | "RP"
            | "SYM"
            | "TO"
            | "UH"
            | "VB"
            | "VBD"
            | "VBG"
            | "VBN"
            | "VBP"
            | "VBZ"
            | "WDT"
            | "WP"
            | "WP$"
            | "WRB"
            | "."
            | ","
            | ":"
            | "``"
            | "''"
            | "$"
            | "#"
            | "-LRB-"
            | "-RRB-"
            | "-LSB-"
            | "-RSB-"
            | "-LCB-"
            | "-RCB-"
    )
}

fn head_class_matches(kind: Kind, label: &str) -> bool {
    match kind {
        Kind::NounPhrase => label.starts_with('N'),
        Kind::VerbPhrase => label.starts_with('V'),
        Kind::PrepPhrase => matches!(label, "IN" | "TO" | "RP"),
        _ => false,
    }
}

struct RawNode {
    label: String,
    token: Option<String>,
    children: Vec<RawNode>,
    pos: usize,
}

struct Frame {
    label: Option<String>,
    token: Option<String>,
    children: Vec<RawNode>,
    pos: usize,
}

fn parse_raw(text: &str) -> Result<RawNode, ParseError> {
    let mut stack: Vec<Frame> = Vec::new();
    let mut roots: Vec<RawNode> = Vec::new();
    let bytes = text.as_bytes();
    let mut i = 0;

    while i < bytes.len() {
        match bytes[i] {
            b if (b as char).is_whitespace() => i += 1,
            b'(' => {
                stack.push(Frame {
                    label: None,
                    token: None,
                    children: Vec::new(),
                    pos: i,
                });
                i += 1;
            }
            b')' => {
                let frame = stack.pop().ok_or(ParseError::UnbalancedParens(i))?;
                let node = close_frame(frame, i)?;
                match stack.last_mut() {
                    Some(parent) => {
                        if parent.label.is_none() {
                            // "( (S ...))": an unlabeled wrapper.
                            parent.label = Some(String::new());
                        }
                        if parent.token.is_some() {
                            return Err(ParseError::Malformed {
                                pos: i,
                                reason: "constituent mixed with a bare token",
                            });
                        }
                        parent.children.push(node);
                    }
                    None => roots.push(node),
                }
                i += 1;
            }
            _ => {
                let start = i;
                while i < bytes.len()
                    && bytes[i] != b'('
                    && bytes[i] != b')'
                    && !(bytes[i] as char).is_whitespace()
                {
                    i += 1;
                }
                let atom = &text[start..i];
                match stack.last_mut() {
                    Some(frame) => {
                        if frame.label.is_none() {
                            frame.label = Some(atom.to_string());
                        } else if !frame.children.is_empty() {
                            return Err(ParseError::Malformed {
                                pos: start,
                                reason: "bare token mixed with constituents",
                            });
                        } else if frame.token.is_some() {
                            return Err(ParseError::Malformed {
                                pos: start,
                                reason: "more than one token under a tag",
                            });
                        } else {
                            frame.token = Some(atom.to_uppercase());
                        }
                    }
                    None => {
                        return Err(ParseError::Malformed {
                            pos: start,
                            reason: "token outside parentheses",
                        })
                    }
                }
            }
        }
    }

    if !stack.is_empty() {
        return Err(ParseError::UnbalancedParens(text.len()));
    }
    match roots.len() {
        0 => Err(ParseError::EmptyTree),
        1 => Ok(unwrap_root(roots.pop().unwrap())),
        _ => Err(ParseError::MultipleRoots),
    }
}

fn close_frame(frame: Frame, close_pos: usize) -> Result<RawNode, ParseError> {
    let label = frame.label.unwrap_or_default();
    match (&frame.token, frame.children.is_empty()) {
        (None, true) => Err(ParseError::Malformed {
            pos: frame.pos,
            reason: "empty constituent",
        }),
        (Some(_), false) => Err(ParseError::Malformed {
            pos: close_pos,
            reason: "constituent mixed with a bare token",
        }),
        _ => Ok(RawNode {
            label,
            token: frame.token,
            children: frame.children,
            pos: frame.pos,
        }),
    }
}

fn unwrap_root(mut node: RawNode) -> RawNode {
    while node.token.is_none()
        && node.children.len() == 1
        && matches!(node.label.as_str(), "" | "ROOT" | "TOP")
    {
        node = node.children.pop().unwrap();
    }
    node
}
