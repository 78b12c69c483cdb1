//! The recursive meaning engine.
//!
//! Every node in a phrase tree has a meaning built from the meanings of its
//! children. Noun phrases resolve to actor codes (word-level dictionary
//! matches outrank embedded NPs, which outrank PPs, which outrank VPs).
//! Prepositional phrases pass their inner constituent's meaning through.
//! Verb phrases do the real work: find a subject, find a verb code via
//! dictionary patterns (with separate active and passive search positions),
//! find targets or a nested event below, and compose verb+verb either by
//! code addition or by a reported-speech transformation rule. Pronouns bind
//! to an antecedent NP within the sentence, reflexives locally and plain
//! pronouns outside their own clause.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::codes::{self, InternalCode};
use crate::dict::{DictionaryStore, NounSpec, TokenPhrase, VerbPattern};
use crate::tree::{Kind, NodeId, ParseTree};

/// Prepositions that may carry the demoted agent of a passive verb, in the
/// priority order they are searched.
const AGENT_PREPS: [&str; 3] = ["BY", "FROM", "IN"];

fn is_be_form(token: &str) -> bool {
    matches!(
        token,
        "BE" | "AM" | "IS" | "ARE" | "WAS" | "WERE" | "BEEN" | "BEING"
    )
}

fn is_negation(token: &str) -> bool {
    token == "NOT" || token == "N'T"
}

/// An event triple in the making. Placeholder sides are `None` and render
/// as `---`; an event is complete once both actors are bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub source: Option<String>,
    pub target: Option<String>,
    pub code: InternalCode,
    /// Set when a transformation rule produced the event; such events are
    /// exempt from self-event suppression.
    pub from_transform: bool,
}

impl Event {
    pub fn new(source: Option<String>, target: Option<String>, code: InternalCode) -> Self {
        Event {
            source,
            target,
            code,
            from_transform: false,
        }
    }

    /// All three parts bound.
    pub fn complete(&self) -> bool {
        self.source.is_some() && self.target.is_some()
    }
}

impl fmt::Display for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({} {} {})",
            self.source.as_deref().unwrap_or("---"),
            self.target.as_deref().unwrap_or("---"),
            self.code
        )
    }
}

/// The coded value of a subtree: actor codes flowing upward, or events once
/// a verb has bound them. A node contributes one or the other, never both.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Meaning {
    pub actors: Vec<String>,
    pub events: Vec<Event>,
    /// Set by verb-phrase analysis when a negation word attaches to the
    /// phrase; consumed by the level above when it composes codes.
    pub negated: bool,
    /// The token the meaning hangs off: a matched head word, or the
    /// preposition for PP meanings.
    pub head_token: Option<String>,
}

impl Meaning {
    pub fn empty() -> Self {
        Meaning::default()
    }

    pub fn with_actors(actors: Vec<String>) -> Self {
        Meaning {
            actors,
            ..Meaning::default()
        }
    }

    pub fn with_events(events: Vec<Event>) -> Self {
        Meaning {
            events,
            ..Meaning::default()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.actors.is_empty() && self.events.is_empty()
    }
}

/// A verb-code decision from the dictionary.
#[derive(Debug, Clone)]
pub struct PatternHit {
    pub code: InternalCode,
    pub lemma: String,
    /// The matched pattern's dictionary line, absent on base-code fallback.
    pub pattern_text: Option<String>,
    /// NP the pattern's post-noun part matched; preferred target position.
    pub target_np: Option<NodeId>,
    pub from_base_code: bool,
}

/// Per-sentence meaning extraction. Holds the shared tree and dictionaries
/// plus a trace log; one analyzer serves one sentence on one thread, and any
/// number of analyzers may share the same store.
pub struct Analyzer<'a> {
    tree: &'a ParseTree,
    store: &'a DictionaryStore,
    trace_enabled: bool,
    trace: Vec<String>,
    pronoun_guard: Vec<NodeId>,
}

impl<'a> Analyzer<'a> {
    pub fn new(tree: &'a ParseTree, store: &'a DictionaryStore) -> Self {
        Analyzer {
            tree,
            store,
            trace_enabled: false,
            trace: Vec::new(),
            pronoun_guard: Vec::new(),
        }
    }

    pub fn with_trace(tree: &'a ParseTree, store: &'a DictionaryStore) -> Self {
        let mut a = Analyzer::new(tree, store);
        a.trace_enabled = true;
        a
    }

    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<String> {
        self.trace
    }

    fn note(&mut self, make: impl FnOnce(&ParseTree) -> String) {
        if self.trace_enabled {
            let line = make(self.tree);
            self.trace.push(line);
        }
    }

    /// Meaning of an arbitrary node, dispatched on its kind.
    pub fn meaning_of(&mut self, node: NodeId) -> Meaning {
        match self.tree.kind(node) {
            Kind::NounPhrase => self.np_meaning(node),
            Kind::PrepPhrase => self.pp_meaning(node),
            Kind::VerbPhrase => self.vp_meaning(node),
            Kind::Clause => self.clause_meaning(node),
            Kind::Word => Meaning::empty(),
            Kind::Other => self.scan_tiers(node, None),
        }
    }

    /// Meaning of a clause: the meaning of its predicate verb phrase.
    pub fn clause_meaning(&mut self, clause: NodeId) -> Meaning {
        if let Some(vp) = self
            .tree
            .phrase_children(clause, Kind::VerbPhrase)
            .first()
            .copied()
        {
            return self.vp_meaning(vp);
        }
        if let Some(inner) = self
            .tree
            .phrase_children(clause, Kind::Clause)
            .first()
            .copied()
        {
            return self.clause_meaning(inner);
        }
        Meaning::empty()
    }

    // ----- noun phrases -------------------------------------------------

    /// Noun-phrase meaning: word-level actor and agent matches first, then
    /// embedded NPs, then PPs, then VPs. An agent without an actor waits for
    /// a lower tier to supply one and otherwise stands alone.
    pub fn np_meaning(&mut self, np: NodeId) -> Meaning {
        let (actor, agent, head_token) = self.word_tier(np);
        if let Some(actor) = actor {
            let code = attach_agent(actor, agent.as_deref());
            self.note(|t| format!("{}: actor code {code}", t.describe(np)));
            return Meaning {
                actors: alloc::vec![code],
                head_token,
                ..Meaning::default()
            };
        }

        for kind in [Kind::NounPhrase, Kind::PrepPhrase, Kind::VerbPhrase] {
            for child in self.tree.phrase_children(np, kind) {
                let meaning = match kind {
                    Kind::NounPhrase => self.np_meaning(child),
                    Kind::PrepPhrase => self.pp_meaning(child),
                    _ => self.vp_meaning(child),
                };
                if meaning.is_empty() {
                    continue;
                }
                if meaning.actors.is_empty() {
                    // A lower phrase coded events; pass them through.
                    return meaning;
                }
                let actors: Vec<String> = match &agent {
                    Some(agent_code) => meaning
                        .actors
                        .iter()
                        .map(|a| attach_agent(a.clone(), Some(agent_code)))
                        .collect(),
                    None => meaning.actors.clone(),
                };
                if agent.is_some() {
                    self.note(|t| {
                        format!(
                            "{}: agent suffix attached to lower actor -> {}",
                            t.describe(np),
                            actors.join(", ")
                        )
                    });
                }
                return Meaning {
                    actors,
                    head_token: meaning.head_token,
                    ..Meaning::default()
                };
            }
        }

        if let Some(agent_code) = agent {
            self.note(|t| format!("{}: bare agent code {agent_code}", t.describe(np)));
            return Meaning {
                actors: alloc::vec![agent_code],
                head_token,
                ..Meaning::default()
            };
        }
        Meaning::empty()
    }

    /// Word-level tier of an NP: dictionary matches over the phrase's own
    /// tokens, with a pronoun standing in for the actor when present.
    fn word_tier(&mut self, np: NodeId) -> (Option<String>, Option<String>, Option<String>) {
        let words = self.tree.surface_tokens(np);
        // Determiners are invisible to dictionary matching; the tag decides,
        // so an actor literally tagged (NNP A) still matches.
        let content: Vec<(NodeId, &str)> = words
            .iter()
            .copied()
            .filter(|(w, _)| self.tree.label(*w) != "DT")
            .collect();
        let tokens: Vec<&str> = content.iter().map(|(_, t)| *t).collect();
        let date = self.tree.date();

        let mut actor: Option<String> = None;
        let mut actor_span = 0..0;
        for i in 0..tokens.len() {
            if let Some((entry, len)) = self.store.actor_entry_at(&tokens[i..]) {
                let code = entry
                    .spans
                    .iter()
                    .find(|s| {
                        s.start.is_none_or(|st| st <= date) && s.end.is_none_or(|e| date <= e)
                    })
                    .map(|s| s.code.clone())
                    .or_else(|| entry.default_code.clone());
                if let Some(code) = code {
                    let phrase = tokens[i..i + len].join(" ");
                    let line = entry.line;
                    self.note(|t| {
                        format!(
                            "{}: actor match `{phrase}` -> {code} (actors line {line})",
                            t.describe(np)
                        )
                    });
                    actor = Some(code);
                    actor_span = i..i + len;
                    break;
                }
            }
        }

        let mut agent: Option<String> = None;
        for i in 0..tokens.len() {
            if actor_span.contains(&i) {
                continue;
            }
            if let Some((entry, len)) = self.store.agent_entry_at(&tokens[i..]) {
                if i < actor_span.start && i + len > actor_span.start {
                    continue;
                }
                let phrase = tokens[i..i + len].join(" ");
                let code = entry.code.clone();
                let line = entry.line;
                self.note(|t| {
                    format!(
                        "{}: agent match `{phrase}` -> {code} (agents line {line})",
                        t.describe(np)
                    )
                });
                agent = Some(code);
                break;
            }
        }

        if actor.is_none() {
            if let Some(&(pronoun, _)) = content
                .iter()
                .find(|(w, _)| matches!(self.tree.label(*w), "PRP" | "PRP$"))
            {
                let meaning = self.resolve_pronoun(pronoun);
                actor = meaning.actors.first().cloned();
            }
        }

        let head_token = self
            .tree
            .head_of(np)
            .and_then(|h| self.tree.token(h))
            .map(str::to_string);
        (actor, agent, head_token)
    }

    // ----- prepositional phrases ----------------------------------------

    /// PP meaning: the meaning of the non-preposition constituent. The
    /// preposition itself is reported as the meaning's head token so callers
    /// can filter by it.
    pub fn pp_meaning(&mut self, pp: NodeId) -> Meaning {
        let prep = self.preposition(pp);
        let inner = self
            .tree
            .children(pp)
            .iter()
            .copied()
            .find(|&c| !matches!(self.tree.kind(c), Kind::Word));
        let mut meaning = match inner {
            Some(constituent) => self.meaning_of(constituent),
            None => Meaning::empty(),
        };
        meaning.head_token = prep;
        meaning
    }

    /// The PP's preposition: its first word child.
    pub fn preposition(&self, pp: NodeId) -> Option<String> {
        self.tree
            .word_children(pp)
            .first()
            .and_then(|&w| self.tree.token(w))
            .map(str::to_string)
    }

    // ----- pronouns ------------------------------------------------------

    /// Binds a pronoun to an antecedent within the sentence. Reflexives
    /// (-SELF/-SELVES) search their own clause: the nearest preceding coded
    /// NP, or the subject of an enclosing verb phrase. Plain pronouns first
    /// climb past their clause and then search the higher clause for the
    /// closest preceding coded NP. No number or gender agreement is applied.
    pub fn resolve_pronoun(&mut self, word: NodeId) -> Meaning {
        if self.pronoun_guard.contains(&word) {
            return Meaning::empty();
        }
        self.pronoun_guard.push(word);
        let meaning = self.resolve_pronoun_inner(word);
        self.pronoun_guard.pop();
        meaning
    }

    fn resolve_pronoun_inner(&mut self, word: NodeId) -> Meaning {
        let token = match self.tree.token(word) {
            Some(t) => t.to_string(),
            None => return Meaning::empty(),
        };
        let reflexive = token.ends_with("SELF") || token.ends_with("SELVES");

        let start = if reflexive {
            word
        } else {
            match self.tree.clause_of(word) {
                Some(clause) => clause,
                None => return Meaning::empty(),
            }
        };

        let mut child = start;
        while let Some(parent) = self.tree.parent(child) {
            let idx = self.tree.node(child).sibling_index();
            let left: Vec<NodeId> = self.tree.children(parent)[..idx].to_vec();
            for sibling in left.into_iter().rev() {
                if let Some(meaning) = self.nearest_coded_np(sibling) {
                    self.note(|t| {
                        format!(
                            "pronoun {token} ({}) bound to {}",
                            t.describe(word),
                            meaning.actors.join(", ")
                        )
                    });
                    return meaning;
                }
            }
            if reflexive && self.tree.kind(parent) == Kind::VerbPhrase {
                if let Some(subject) = self.tree.subject_np(parent) {
                    let meaning = self.np_meaning(subject);
                    if !meaning.actors.is_empty() {
                        self.note(|t| {
                            format!(
                                "pronoun {token} ({}) bound to subject {}",
                                t.describe(word),
                                meaning.actors.join(", ")
                            )
                        });
                        return meaning;
                    }
                }
            }
            child = parent;
        }
        self.note(|_| format!("pronoun {token}: no antecedent found"));
        Meaning::empty()
    }

    /// The rightmost (closest preceding) coded NP inside `node`, searching
    /// the node itself first and then its children right to left.
    fn nearest_coded_np(&mut self, node: NodeId) -> Option<Meaning> {
        if self.tree.kind(node) == Kind::NounPhrase {
            let meaning = self.np_meaning(node);
            if !meaning.actors.is_empty() {
                return Some(meaning);
            }
        }
        let children: Vec<NodeId> = self.tree.children(node).to_vec();
        for child in children.into_iter().rev() {
            if let Some(m) = self.nearest_coded_np(child) {
                return Some(m);
            }
        }
        None
    }

    // ----- verb phrases --------------------------------------------------

    /// The subject actor of a verb phrase: the coded meaning of its NP
    /// specifier, if any.
    pub fn subject_actor(&mut self, vp: NodeId) -> Option<String> {
        let subject = self.tree.subject_np(vp)?;
        let meaning = self.np_meaning(subject);
        meaning.actors.first().cloned()
    }

    /// True when the verb is a past participle riding on a BE auxiliary
    /// somewhere up its verb chain.
    pub fn is_passive(&self, vp: NodeId) -> bool {
        let verb = match self.tree.verb_word(vp) {
            Some(v) => v,
            None => return false,
        };
        if self.tree.label(verb) != "VBN" {
            return false;
        }
        let mut cur = vp;
        while let Some(parent) = self.tree.parent(cur) {
            if self.tree.kind(parent) != Kind::VerbPhrase {
                break;
            }
            let has_be = self
                .tree
                .surface_tokens(parent)
                .iter()
                .any(|(_, t)| is_be_form(t));
            if has_be {
                return true;
            }
            cur = parent;
        }
        false
    }

    /// Screens out the CoreNLP misparse where a prenominal past participle
    /// is bracketed as a verb: a bare `VBN` immediately followed by an NP,
    /// with no auxiliary above and no clause role of its own, is not an
    /// event phrase and its subtree reads as a noun phrase instead.
    pub fn is_event_phrase(&self, vp: NodeId) -> bool {
        let verb = match self.tree.verb_word(vp) {
            Some(v) => v,
            None => return true,
        };
        if self.tree.label(verb) != "VBN" {
            return true;
        }
        if self
            .tree
            .parent(vp)
            .is_some_and(|p| self.tree.kind(p) == Kind::VerbPhrase)
        {
            return true;
        }
        let children = self.tree.children(vp);
        let verb_pos = match children.iter().position(|&c| c == verb) {
            Some(p) => p,
            None => return true,
        };
        let next_is_np = children
            .get(verb_pos + 1)
            .is_some_and(|&c| self.tree.kind(c) == Kind::NounPhrase);
        if !next_is_np {
            return true;
        }
        let only_participle_and_nps = children
            .iter()
            .all(|&c| c == verb || self.tree.kind(c) == Kind::NounPhrase);
        if !only_participle_and_nps {
            return true;
        }
        let inside_np = self
            .tree
            .parent(vp)
            .is_some_and(|p| self.tree.kind(p) == Kind::NounPhrase);
        let has_subject = self.tree.subject_np(vp).is_some();
        !(inside_np || !has_subject)
    }

    /// The demoted agent of a passive verb: the first BY/FROM/IN child PP
    /// whose NP codes an actor, in that preposition order.
    fn passive_agent(&mut self, vp: NodeId) -> Option<(NodeId, String)> {
        let pps = self.tree.phrase_children(vp, Kind::PrepPhrase);
        for prep in AGENT_PREPS {
            for &pp in &pps {
                if self.preposition(pp).as_deref() != Some(prep) {
                    continue;
                }
                let meaning = self.pp_meaning(pp);
                if let Some(actor) = meaning.actors.first().cloned() {
                    self.note(|t| {
                        format!("{}: passive source {actor} under {prep}-PP", t.describe(vp))
                    });
                    return Some((pp, actor));
                }
            }
        }
        None
    }

    /// Lower meaning of a verb phrase. A VP child (modal or auxiliary
    /// chains) contributes its whole meaning, with negation flagged when a
    /// NOT/N'T rides alongside. A clause child likewise. Otherwise child
    /// NPs, then child PPs, are scanned for coded actors — the candidate
    /// targets.
    pub fn complement_meaning(&mut self, vp: NodeId) -> Meaning {
        self.complement_meaning_excluding(vp, None)
    }

    fn complement_meaning_excluding(&mut self, vp: NodeId, exclude_pp: Option<NodeId>) -> Meaning {
        let negated = self
            .tree
            .surface_tokens(vp)
            .iter()
            .any(|(_, t)| is_negation(t));

        if let Some(child_vp) = self
            .tree
            .phrase_children(vp, Kind::VerbPhrase)
            .first()
            .copied()
        {
            let mut meaning = self.vp_meaning(child_vp);
            meaning.negated |= negated;
            if meaning.negated {
                self.note(|t| format!("{}: negation word attaches below", t.describe(vp)));
            }
            return meaning;
        }
        if let Some(clause) = self.tree.phrase_children(vp, Kind::Clause).first().copied() {
            let mut meaning = self.clause_meaning(clause);
            meaning.negated |= negated;
            return meaning;
        }
        self.scan_tiers_excluding(vp, exclude_pp)
    }

    /// NP-tier then PP-tier actor scan; every coded phrase in the winning
    /// tier contributes (targets fan out).
    fn scan_tiers(&mut self, node: NodeId, exclude_pp: Option<NodeId>) -> Meaning {
        self.scan_tiers_excluding(node, exclude_pp)
    }

    fn scan_tiers_excluding(&mut self, node: NodeId, exclude_pp: Option<NodeId>) -> Meaning {
        let mut actors = Vec::new();
        for np in self.tree.phrase_children(node, Kind::NounPhrase) {
            actors.extend(self.np_meaning(np).actors);
        }
        if !actors.is_empty() {
            return Meaning::with_actors(actors);
        }
        for pp in self.tree.phrase_children(node, Kind::PrepPhrase) {
            if Some(pp) == exclude_pp {
                continue;
            }
            actors.extend(self.pp_meaning(pp).actors);
        }
        Meaning::with_actors(actors)
    }

    // ----- pattern matching ----------------------------------------------

    /// The verb's code by dictionary pattern, most specific pattern first
    /// (most parts, then most tokens, then file order); falls back to the
    /// verb's base code when no pattern survives.
    pub fn verb_pattern_code(&mut self, vp: NodeId) -> Option<PatternHit> {
        let verb = self.tree.verb_word(vp)?;
        let token = self.tree.token(verb)?.to_string();
        let entry = match self.store.verb_for_form(&token) {
            Some(e) => e,
            None => {
                self.note(|t| format!("{}: `{token}` not in verb dictionary", t.describe(vp)));
                return None;
            }
        };
        let lemma = entry.lemma.clone();
        let passive = self.is_passive(vp);

        let mut order: Vec<usize> = (0..entry.patterns.len()).collect();
        let keys: Vec<(usize, usize, usize)> = entry
            .patterns
            .iter()
            .map(|p| (p.part_count(), p.token_weight(), p.line))
            .collect();
        order.sort_by(|&a, &b| {
            let (parts_a, tokens_a, line_a) = keys[a];
            let (parts_b, tokens_b, line_b) = keys[b];
            parts_b
                .cmp(&parts_a)
                .then(tokens_b.cmp(&tokens_a))
                .then(line_a.cmp(&line_b))
        });

        let patterns = entry.patterns.clone();
        for idx in order {
            let pattern = &patterns[idx];
            match self.match_pattern(vp, pattern, passive) {
                Ok(target_np) => {
                    let text = pattern.source_text.clone();
                    let code = pattern.code;
                    self.note(|t| {
                        format!("{}: pattern matched `{text}` -> {code}", t.describe(vp))
                    });
                    return Some(PatternHit {
                        code,
                        lemma,
                        pattern_text: Some(text),
                        target_np,
                        from_base_code: false,
                    });
                }
                Err(part) => {
                    let text = pattern.source_text.clone();
                    self.note(|t| format!("{}: pattern `{text}` failed at {part}", t.describe(vp)));
                }
            }
        }

        match entry.base_code {
            Some(code) => {
                self.note(|t| format!("{}: base code {code} for {lemma}", t.describe(vp)));
                Some(PatternHit {
                    code,
                    lemma,
                    pattern_text: None,
                    target_np: None,
                    from_base_code: true,
                })
            }
            None => None,
        }
    }

    /// Tries one pattern in the voice-appropriate positions. Returns the NP
    /// the post-noun part matched (the preferred target position) or the
    /// name of the failing part.
    fn match_pattern(
        &mut self,
        vp: NodeId,
        pattern: &VerbPattern,
        passive: bool,
    ) -> Result<Option<NodeId>, &'static str> {
        let subject = self.tree.subject_np(vp);
        let child_nps = self.tree.phrase_children(vp, Kind::NounPhrase);
        let child_pps = self.tree.phrase_children(vp, Kind::PrepPhrase);
        let clause_pps = self.clause_level_pps(vp);

        // Part 1: pre-verb nouns. Active verbs look at the subject NP;
        // passives look inside agent PPs and go without when none matches.
        if !pattern.pre_nouns.is_empty() {
            let locations: Vec<NodeId> = if passive {
                child_pps
                    .iter()
                    .copied()
                    .filter(|&pp| {
                        self.preposition(pp)
                            .as_deref()
                            .is_some_and(|p| AGENT_PREPS.contains(&p))
                    })
                    .filter_map(|pp| self.pp_inner_np(pp))
                    .collect()
            } else {
                subject.into_iter().collect()
            };
            for spec in &pattern.pre_nouns {
                if !locations.iter().any(|&np| self.noun_spec_matches(np, spec)) {
                    return Err("pre-verb noun");
                }
            }
        }

        // Part 2: pre-verb prepositional phrases, at the clause level.
        for spec in &pattern.pre_preps {
            let hit = clause_pps
                .iter()
                .any(|&pp| self.prep_spec_matches(pp, spec));
            if !hit {
                return Err("pre-verb preposition");
            }
        }

        // Part 3: post-verb nouns. Active verbs look at child NPs (and the
        // verb's own particles); passives look at the surface subject.
        let mut target_np = None;
        if !pattern.post_nouns.is_empty() {
            let locations: Vec<NodeId> = if passive {
                subject.into_iter().collect()
            } else {
                child_nps.clone()
            };
            for spec in &pattern.post_nouns {
                let noun_hit = locations
                    .iter()
                    .copied()
                    .find(|&np| self.noun_spec_matches(np, spec));
                match noun_hit {
                    Some(np) => {
                        if target_np.is_none() {
                            target_np = Some(np);
                        }
                    }
                    None => {
                        if !(!passive && self.particle_matches(vp, spec)) {
                            return Err("post-verb noun");
                        }
                    }
                }
            }
        }

        // Part 4: post-verb prepositional phrases, among child PPs.
        for spec in &pattern.post_preps {
            let hit = child_pps.iter().any(|&pp| self.prep_spec_matches(pp, spec));
            if !hit {
                return Err("post-verb preposition");
            }
        }

        Ok(target_np)
    }

    /// PPs that are clause-level siblings of the verb chain.
    fn clause_level_pps(&self, vp: NodeId) -> Vec<NodeId> {
        let top = self.tree.verb_chain_top(vp);
        match self.tree.parent(top) {
            Some(clause) if self.tree.kind(clause) == Kind::Clause => {
                self.tree.phrase_children(clause, Kind::PrepPhrase)
            }
            _ => Vec::new(),
        }
    }

    fn pp_inner_np(&self, pp: NodeId) -> Option<NodeId> {
        self.tree
            .phrase_children(pp, Kind::NounPhrase)
            .first()
            .copied()
    }

    /// A noun spec matches an NP when the NP's head equals the spec head
    /// and, for multi-token specs, the NP's tokens leading up to the head
    /// end with the spec's qualifier words.
    fn noun_spec_matches(&self, np: NodeId, spec: &NounSpec) -> bool {
        let head = match self.tree.head_of(np) {
            Some(h) => h,
            None => return false,
        };
        let head_token = match self.tree.token(head) {
            Some(t) => t,
            None => return false,
        };
        spec.alts.iter().any(|alt| {
            if alt.head != head_token {
                return false;
            }
            if alt.extra.is_empty() {
                return true;
            }
            self.phrase_ends_at_head(np, head, alt)
        })
    }

    fn phrase_ends_at_head(&self, np: NodeId, head: NodeId, alt: &TokenPhrase) -> bool {
        let tokens = self.tree.subtree_tokens(np);
        let head_pos = match tokens.iter().position(|(w, _)| *w == head) {
            Some(p) => p,
            None => return false,
        };
        if head_pos < alt.extra.len() {
            return false;
        }
        alt.extra
            .iter()
            .rev()
            .zip(tokens[..head_pos].iter().rev())
            .all(|(want, (_, have))| want == have)
    }

    /// Single-token post-noun specs may also match a particle among the
    /// verb's own words (BLEW * UP).
    fn particle_matches(&self, vp: NodeId, spec: &NounSpec) -> bool {
        let verb = match self.tree.verb_word(vp) {
            Some(v) => v,
            None => return false,
        };
        let words = self.tree.surface_tokens(vp);
        let verb_pos = words.iter().position(|(w, _)| *w == verb);
        let after: &[(NodeId, &str)] = match verb_pos {
            Some(p) => &words[p + 1..],
            None => return false,
        };
        spec.alts
            .iter()
            .filter(|alt| alt.extra.is_empty())
            .any(|alt| after.iter().any(|(_, t)| *t == alt.head))
    }

    fn prep_spec_matches(&self, pp: NodeId, spec: &crate::dict::PrepSpec) -> bool {
        if self.preposition(pp).as_deref() != Some(spec.prep.as_str()) {
            return false;
        }
        match self.pp_inner_np(pp) {
            Some(np) => self.noun_spec_matches(np, &spec.noun),
            None => false,
        }
    }

    // ----- transformations ----------------------------------------------

    /// First transformation rule (in file order) that unifies with the
    /// nested event, rewritten to a flat triple.
    pub fn apply_transforms(
        &mut self,
        outer_source: &str,
        outer_code: InternalCode,
        inner: &Event,
    ) -> Option<Event> {
        for rule in self.store.transforms() {
            if let Some((source, target, code)) = rule.apply(
                outer_source,
                outer_code,
                inner.source.as_deref(),
                inner.target.as_deref(),
                inner.code,
            ) {
                let text = rule.source_text.clone();
                self.note(|_| format!("transformation `{text}` -> ({source} {target} {code})"));
                return Some(Event {
                    source: Some(source),
                    target: Some(target),
                    code,
                    from_transform: true,
                });
            }
        }
        None
    }

    // ----- verb phrase meaning -------------------------------------------

    /// Full verb-phrase meaning: source from the subject (or the agent PP
    /// when passive), code from the dictionary, targets or a nested event
    /// from below, composed into events.
    pub fn vp_meaning(&mut self, vp: NodeId) -> Meaning {
        if !self.is_event_phrase(vp) {
            self.note(|t| {
                format!(
                    "{}: prenominal participle, treated as a noun phrase",
                    t.describe(vp)
                )
            });
            return self.scan_tiers(vp, None);
        }

        let passive = self.is_passive(vp);
        if let Some(verb) = self.tree.verb_word(vp) {
            let voice = if passive { "passive" } else { "active" };
            self.note(|t| format!("{}: voice {voice}", t.describe(verb)));
        }

        let (source, agent_pp) = if passive {
            match self.passive_agent(vp) {
                Some((pp, actor)) => (Some(actor), Some(pp)),
                None => {
                    self.note(|t| {
                        format!("{}: passive without agent PP, no subject", t.describe(vp))
                    });
                    (None, None)
                }
            }
        } else {
            (self.subject_actor(vp), None)
        };

        let hit = self.verb_pattern_code(vp);
        let lower = self.complement_meaning_excluding(vp, agent_pp);
        let negated = lower.negated;

        let mut out = Meaning::empty();
        if !lower.events.is_empty() {
            match &hit {
                Some(hit) => {
                    for inner in &lower.events {
                        self.compose(&mut out, source.as_deref(), hit, inner, negated);
                    }
                }
                None => {
                    // No verb information of our own; pass the lower events
                    // upward, negating if a negation attached here.
                    for inner in &lower.events {
                        let mut ev = inner.clone();
                        if negated {
                            ev.code = apply_negation(ev.code);
                            let code = ev.code;
                            self.note(|_| format!("negation applied -> {code}"));
                        }
                        out.events.push(ev);
                    }
                }
            }
            return out;
        }

        let hit = match hit {
            Some(h) => h,
            None => {
                // No code: hand the lower actors upward unchanged.
                return Meaning {
                    actors: lower.actors,
                    head_token: lower.head_token,
                    ..Meaning::default()
                };
            }
        };

        let mut targets: Vec<String> = Vec::new();
        if let Some(np) = hit.target_np {
            targets = self.np_meaning(np).actors;
        }
        if targets.is_empty() {
            targets = lower.actors.clone();
        }
        if targets.is_empty() && passive {
            // Passive with no coded complement: the surface subject is the
            // deep object.
            if let Some(subject) = self.tree.subject_np(vp) {
                targets = self.np_meaning(subject).actors;
            }
        }

        let code = if negated {
            let negated_code = apply_negation(hit.code);
            self.note(|_| format!("negation applied -> {negated_code}"));
            negated_code
        } else {
            hit.code
        };

        if targets.is_empty() {
            let event = Event::new(source.clone(), None, code);
            self.note(|_| format!("incomplete event {event} passed upward"));
            out.events.push(event);
        } else {
            for target in targets {
                let event = Event::new(source.clone(), Some(target), code);
                self.note(|_| format!("event {event}"));
                out.events.push(event);
            }
        }
        out
    }

    /// Composes this verb's (source, code) with one nested event: a
    /// transformation rule if any fires, otherwise code combination with
    /// the inner target.
    fn compose(
        &mut self,
        out: &mut Meaning,
        source: Option<&str>,
        hit: &PatternHit,
        inner: &Event,
        negated: bool,
    ) {
        if let Some(src) = source {
            if let Some(transformed) = self.apply_transforms(src, hit.code, inner) {
                let mut ev = transformed;
                if negated {
                    ev.code = apply_negation(ev.code);
                }
                out.events.push(ev);
                return;
            }
        }
        match codes::combine(hit.code, inner.code) {
            Ok(combined) => {
                let code = if negated {
                    apply_negation(combined)
                } else {
                    combined
                };
                let event = Event::new(source.map(str::to_string), inner.target.clone(), code);
                self.note(|_| format!("codes combined -> {event}"));
                out.events.push(event);
            }
            Err(_) => {
                // Incompatible codes: keep the inner event as it stands and
                // report this verb's own, incomplete, event alongside.
                self.note(|_| "code combination collided; events kept separate".to_string());
                out.events.push(inner.clone());
                let code = if negated {
                    apply_negation(hit.code)
                } else {
                    hit.code
                };
                out.events
                    .push(Event::new(source.map(str::to_string), None, code));
            }
        }
    }
}

/// Negation at the verb level: embed a cooperative code as its refusal, or
/// cancel an embedding that is already there (two negations annul).
fn apply_negation(code: InternalCode) -> InternalCode {
    match codes::negate(code) {
        Ok(negated) => negated,
        Err(_) => code
            .cooperative()
            .expect("negative codes always have a cooperative form"),
    }
}

/// Suffixes an agent code onto an actor code, unless it is already there.
fn attach_agent(actor: String, agent: Option<&str>) -> String {
    match agent {
        Some(suffix) if !actor.ends_with(suffix) => {
            let mut code = actor;
            code.push_str(suffix);
            code
        }
        _ => actor,
    }
}
