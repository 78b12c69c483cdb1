//! Dictionary loading and lookup.
//!
//! Four plain-text dictionaries drive the coder:
//!
//! * **Actors** — `PHRASE ; CODE [START END]` lines. A phrase may repeat
//!   with different dated codes; a line without dates supplies the default
//!   code. Open span ends are written `-`.
//! * **Agents** — `PHRASE ; CODE` lines; generic role nouns whose codes
//!   suffix actor codes (`USA` + `MIL` -> `USAMIL`).
//! * **Verbs** — `--- LEMMA [CODE] ---` block headers followed by `+FORM`
//!   inflections, `- pattern [CODE]` pattern lines, `~ rule` transformation
//!   lines, and `&NAME` synset blocks whose `+` lines list member phrases.
//! * **Discard** — one phrase per line; a sentence containing any of them is
//!   skipped.
//!
//! Everything is case-insensitive (`#` starts a comment); phrases index into
//! token tries and lookups are longest-match with determiners skipped.

mod pattern;
mod transform;
mod trie;

pub use pattern::{compile_pattern, NounSpec, PatternError, PrepSpec, TokenPhrase, VerbPattern};
pub use transform::{ActorSlot, TransformError, TransformRule};

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::codes::{CameoMapping, CodeError, InternalCode};
use crate::date::Date;
use crate::tree::ParseTree;
use trie::TokenTrie;

/// Determiners are invisible to phrase matching on both the entry and the
/// query side.
fn is_determiner(token: &str) -> bool {
    matches!(token, "THE" | "A" | "AN")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DictFile {
    Actors,
    Agents,
    Verbs,
    Discard,
    CodeMap,
}

impl fmt::Display for DictFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            DictFile::Actors => "actors",
            DictFile::Agents => "agents",
            DictFile::Verbs => "verbs",
            DictFile::Discard => "discard",
            DictFile::CodeMap => "code mapping",
        };
        write!(f, "{name} dictionary")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DictError {
    #[error("{file} line {line}: {reason}")]
    Syntax {
        file: DictFile,
        line: usize,
        reason: String,
    },
    #[error("{file} line {line}: duplicate entry for `{phrase}` with a conflicting code")]
    Duplicate {
        file: DictFile,
        line: usize,
        phrase: String,
    },
}

fn syntax(file: DictFile, line: usize, reason: impl fmt::Display) -> DictError {
    DictError::Syntax {
        file,
        line,
        reason: reason.to_string(),
    }
}

/// One dated actor code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatedCode {
    pub code: String,
    pub start: Option<Date>,
    pub end: Option<Date>,
}

impl DatedCode {
    fn contains(&self, date: Date) -> bool {
        self.start.is_none_or(|s| s <= date) && self.end.is_none_or(|e| date <= e)
    }

    fn overlaps(&self, other: &DatedCode) -> bool {
        let start_a = self.start.map_or(0, Date::as_u32);
        let end_a = self.end.map_or(u32::MAX, Date::as_u32);
        let start_b = other.start.map_or(0, Date::as_u32);
        let end_b = other.end.map_or(u32::MAX, Date::as_u32);
        start_a.max(start_b) <= end_a.min(end_b)
    }
}

#[derive(Debug, Clone)]
pub struct ActorEntry {
    pub phrase: Vec<String>,
    pub spans: Vec<DatedCode>,
    pub default_code: Option<String>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct AgentEntry {
    pub phrase: Vec<String>,
    pub code: String,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct VerbEntry {
    pub lemma: String,
    pub base_code: Option<InternalCode>,
    pub forms: Vec<String>,
    pub patterns: Vec<VerbPattern>,
    pub line: usize,
}

#[derive(Debug, Clone)]
pub struct DiscardEntry {
    pub phrase: Vec<String>,
    pub line: usize,
}

/// The dictionary texts to load; reading files is the caller's business.
#[derive(Debug, Clone, Copy)]
pub struct DictionaryTexts<'a> {
    pub actors: &'a str,
    pub agents: &'a str,
    pub verbs: &'a str,
    pub discard: &'a str,
    pub code_map: &'a str,
}

/// Immutable indexed dictionaries plus the CAMEO code mapping. Safe to share
/// read-only across any number of coder threads.
#[derive(Debug, Clone)]
pub struct DictionaryStore {
    actors: Vec<ActorEntry>,
    agents: Vec<AgentEntry>,
    verbs: Vec<VerbEntry>,
    discards: Vec<DiscardEntry>,
    transforms: Vec<TransformRule>,
    synsets: BTreeMap<String, Vec<TokenPhrase>>,
    actor_trie: TokenTrie,
    agent_trie: TokenTrie,
    discard_trie: TokenTrie,
    form_index: BTreeMap<String, usize>,
    mapping: CameoMapping,
}

impl DictionaryStore {
    pub fn load(texts: &DictionaryTexts<'_>) -> Result<Self, DictError> {
        let mapping = CameoMapping::parse(texts.code_map).map_err(|e| match e {
            CodeError::MappingSyntax { line, reason } => syntax(DictFile::CodeMap, line, reason),
            other => syntax(DictFile::CodeMap, 0, other),
        })?;

        let actors = parse_actors(texts.actors)?;
        let agents = parse_agents(texts.agents)?;
        let discards = parse_discard(texts.discard)?;
        let VerbFile {
            verbs,
            synsets,
            transforms,
        } = parse_verbs(texts.verbs, &mapping)?;

        let mut actor_trie = TokenTrie::new();
        for (i, entry) in actors.iter().enumerate() {
            actor_trie.insert(&entry.phrase, i);
        }
        let mut agent_trie = TokenTrie::new();
        for (i, entry) in agents.iter().enumerate() {
            agent_trie.insert(&entry.phrase, i);
        }
        let mut discard_trie = TokenTrie::new();
        for (i, entry) in discards.iter().enumerate() {
            discard_trie.insert(&entry.phrase, i);
        }
        let mut form_index = BTreeMap::new();
        for (i, verb) in verbs.iter().enumerate() {
            for form in &verb.forms {
                // First definition of a surface form wins.
                form_index.entry(form.clone()).or_insert(i);
            }
        }

        Ok(DictionaryStore {
            actors,
            agents,
            verbs,
            discards,
            transforms,
            synsets,
            actor_trie,
            agent_trie,
            discard_trie,
            form_index,
            mapping,
        })
    }

    pub fn mapping(&self) -> &CameoMapping {
        &self.mapping
    }

    pub fn actors(&self) -> &[ActorEntry] {
        &self.actors
    }

    pub fn agents(&self) -> &[AgentEntry] {
        &self.agents
    }

    pub fn verbs(&self) -> &[VerbEntry] {
        &self.verbs
    }

    pub fn discards(&self) -> &[DiscardEntry] {
        &self.discards
    }

    pub fn transforms(&self) -> &[TransformRule] {
        &self.transforms
    }

    pub fn synset(&self, name: &str) -> Option<&[TokenPhrase]> {
        self.synsets.get(name).map(Vec::as_slice)
    }

    pub fn synset_count(&self) -> usize {
        self.synsets.len()
    }

    /// The verb entry a surface form belongs to, with its dictionary line.
    pub fn verb_for_form(&self, token: &str) -> Option<&VerbEntry> {
        self.form_index.get(token).map(|&i| &self.verbs[i])
    }

    /// Longest-prefix actor lookup with the entry's date logic applied:
    /// the dated span containing `date` wins, else the default code.
    /// Determiners in `tokens` are skipped.
    pub fn resolve_actor(&self, tokens: &[&str], date: Date) -> Option<String> {
        let filtered: Vec<&str> = tokens
            .iter()
            .copied()
            .filter(|t| !is_determiner(t))
            .collect();
        self.actor_prefix(&filtered, date).map(|(code, _)| code)
    }

    /// Longest-prefix actor match at the start of `tokens` (already
    /// determiner-free), as `(code, tokens consumed)`.
    pub(crate) fn actor_prefix(&self, tokens: &[&str], date: Date) -> Option<(String, usize)> {
        let (idx, len) = self.actor_trie.longest_prefix(tokens)?;
        let entry = &self.actors[idx];
        let code = entry
            .spans
            .iter()
            .find(|s| s.contains(date))
            .map(|s| s.code.clone())
            .or_else(|| entry.default_code.clone())?;
        Some((code, len))
    }

    pub(crate) fn actor_entry_at(&self, tokens: &[&str]) -> Option<(&ActorEntry, usize)> {
        let (idx, len) = self.actor_trie.longest_prefix(tokens)?;
        Some((&self.actors[idx], len))
    }

    /// Longest agent match anywhere in `tokens`; leftmost start wins.
    pub fn match_agent(&self, tokens: &[&str]) -> Option<String> {
        let filtered: Vec<&str> = tokens
            .iter()
            .copied()
            .filter(|t| !is_determiner(t))
            .collect();
        (0..filtered.len())
            .find_map(|i| self.agent_prefix(&filtered[i..]))
            .map(|(code, _)| code)
    }

    /// Longest agent match at the start of `tokens` (determiner-free).
    pub(crate) fn agent_prefix(&self, tokens: &[&str]) -> Option<(String, usize)> {
        let (idx, len) = self.agent_trie.longest_prefix(tokens)?;
        Some((self.agents[idx].code.clone(), len))
    }

    pub(crate) fn agent_entry_at(&self, tokens: &[&str]) -> Option<(&AgentEntry, usize)> {
        let (idx, len) = self.agent_trie.longest_prefix(tokens)?;
        Some((&self.agents[idx], len))
    }

    /// True if any discard phrase occurs contiguously in the sentence.
    pub fn is_discard(&self, tree: &ParseTree) -> bool {
        let tokens = tree.tokens();
        self.discard_trie.contains_anywhere(&tokens)
    }

    /// Compiles a pattern line against this store's mapping and synsets.
    pub fn compile_pattern(&self, line: &str) -> Result<VerbPattern, PatternError> {
        compile_pattern(line, 0, &|c| self.mapping.internal(c).ok(), &|name| {
            self.synsets.get(name).cloned()
        })
    }
}

fn strip_comment(raw: &str) -> &str {
    raw.split('#').next().unwrap_or("").trim()
}

fn phrase_tokens(text: &str) -> Vec<String> {
    let all: Vec<String> = text.split_whitespace().map(|t| t.to_uppercase()).collect();
    let filtered: Vec<String> = all.iter().filter(|t| !is_determiner(t)).cloned().collect();
    // A phrase that is nothing but determiner-shaped tokens (an actor
    // literally named "A") is kept as written.
    if filtered.is_empty() {
        all
    } else {
        filtered
    }
}

fn parse_actors(text: &str) -> Result<Vec<ActorEntry>, DictError> {
    const FILE: DictFile = DictFile::Actors;
    let mut entries: Vec<ActorEntry> = Vec::new();
    let mut by_phrase: BTreeMap<Vec<String>, usize> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (phrase_text, rhs) = line
            .split_once(';')
            .ok_or_else(|| syntax(FILE, line_no, "expected `PHRASE ; CODE`"))?;
        let phrase = phrase_tokens(phrase_text);
        if phrase.is_empty() {
            return Err(syntax(
                FILE,
                line_no,
                "phrase needs at least one content token",
            ));
        }
        let rhs = rhs.trim();
        let (code, span) = match rhs.split_once('[') {
            Some((code, dates)) => {
                let dates = dates
                    .strip_suffix(']')
                    .ok_or_else(|| syntax(FILE, line_no, "unterminated `[START END]`"))?;
                let mut parts = dates.split_whitespace();
                let (start, end) = match (parts.next(), parts.next(), parts.next()) {
                    (Some(s), Some(e), None) => (
                        parse_span_date(s, FILE, line_no)?,
                        parse_span_date(e, FILE, line_no)?,
                    ),
                    _ => {
                        return Err(syntax(
                            FILE,
                            line_no,
                            "expected `[START END]` with two fields",
                        ))
                    }
                };
                (code.trim(), Some((start, end)))
            }
            None => (rhs, None),
        };
        if code.is_empty() {
            return Err(syntax(FILE, line_no, "missing actor code"));
        }
        let code = code.to_uppercase();

        let slot = *by_phrase.entry(phrase.clone()).or_insert_with(|| {
            entries.push(ActorEntry {
                phrase: phrase.clone(),
                spans: Vec::new(),
                default_code: None,
                line: line_no,
            });
            entries.len() - 1
        });
        let entry = &mut entries[slot];
        match span {
            Some((start, end)) => {
                if let (Some(s), Some(e)) = (start, end) {
                    if e < s {
                        return Err(syntax(FILE, line_no, "span ends before it starts"));
                    }
                }
                let dated = DatedCode { code, start, end };
                if entry.spans.iter().any(|s| s.overlaps(&dated)) {
                    return Err(syntax(
                        FILE,
                        line_no,
                        "dated spans overlap within one entry",
                    ));
                }
                entry.spans.push(dated);
            }
            None => match &entry.default_code {
                Some(existing) if *existing != code => {
                    return Err(DictError::Duplicate {
                        file: FILE,
                        line: line_no,
                        phrase: phrase.join(" "),
                    })
                }
                _ => entry.default_code = Some(code),
            },
        }
    }
    Ok(entries)
}

fn parse_span_date(text: &str, file: DictFile, line_no: usize) -> Result<Option<Date>, DictError> {
    if text == "-" {
        return Ok(None);
    }
    Date::parse(text)
        .map(Some)
        .ok_or_else(|| syntax(file, line_no, format!("bad date `{text}`")))
}

fn parse_agents(text: &str) -> Result<Vec<AgentEntry>, DictError> {
    const FILE: DictFile = DictFile::Agents;
    let mut entries: Vec<AgentEntry> = Vec::new();
    let mut by_phrase: BTreeMap<Vec<String>, String> = BTreeMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let (phrase_text, code) = line
            .split_once(';')
            .ok_or_else(|| syntax(FILE, line_no, "expected `PHRASE ; CODE`"))?;
        let phrase = phrase_tokens(phrase_text);
        let code = code.trim().to_uppercase();
        if phrase.is_empty() || code.is_empty() {
            return Err(syntax(FILE, line_no, "expected `PHRASE ; CODE`"));
        }
        match by_phrase.get(&phrase) {
            Some(existing) if *existing == code => continue,
            Some(_) => {
                return Err(DictError::Duplicate {
                    file: FILE,
                    line: line_no,
                    phrase: phrase.join(" "),
                })
            }
            None => {
                by_phrase.insert(phrase.clone(), code.clone());
                entries.push(AgentEntry {
                    phrase,
                    code,
                    line: line_no,
                });
            }
        }
    }
    Ok(entries)
}

fn parse_discard(text: &str) -> Result<Vec<DiscardEntry>, DictError> {
    let mut entries = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let phrase: Vec<String> = line.split_whitespace().map(|t| t.to_uppercase()).collect();
        entries.push(DiscardEntry {
            phrase,
            line: line_no,
        });
    }
    Ok(entries)
}

enum RawVerbLine {
    Pattern { text: String, line: usize },
    Transform { text: String, line: usize },
}

enum Block {
    None,
    Verb(usize),
    Synset(String),
}

struct VerbFile {
    verbs: Vec<VerbEntry>,
    synsets: BTreeMap<String, Vec<TokenPhrase>>,
    transforms: Vec<TransformRule>,
}

fn parse_verbs(text: &str, mapping: &CameoMapping) -> Result<VerbFile, DictError> {
    const FILE: DictFile = DictFile::Verbs;
    let mut verbs: Vec<VerbEntry> = Vec::new();
    let mut synsets: BTreeMap<String, Vec<TokenPhrase>> = BTreeMap::new();
    let mut raw_lines: Vec<(usize, RawVerbLine)> = Vec::new();
    let mut block = Block::None;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        if line.starts_with("---") {
            let inner = line.trim_matches('-').trim();
            let (lemma_text, code_text) = match inner.split_once('[') {
                Some((lemma, rest)) => {
                    let code = rest.split(']').next().map(str::trim).unwrap_or("");
                    (lemma.trim(), code)
                }
                None => (inner, ""),
            };
            let lemma = lemma_text.to_uppercase();
            if lemma.is_empty() || lemma.split_whitespace().count() != 1 {
                return Err(syntax(FILE, line_no, "header needs `--- LEMMA [CODE] ---`"));
            }
            let base_code = match code_text {
                "" | "---" => None,
                c => Some(
                    mapping
                        .internal(c)
                        .map_err(|_| syntax(FILE, line_no, format!("unknown base code `{c}`")))?,
                ),
            };
            verbs.push(VerbEntry {
                lemma: lemma.clone(),
                base_code,
                forms: alloc::vec![lemma],
                patterns: Vec::new(),
                line: line_no,
            });
            block = Block::Verb(verbs.len() - 1);
        } else if let Some(rest) = line.strip_prefix('&') {
            let name = rest.trim().to_uppercase();
            if name.is_empty() || name.split_whitespace().count() != 1 {
                return Err(syntax(FILE, line_no, "synset header needs a single name"));
            }
            if synsets.contains_key(&name) {
                return Err(DictError::Duplicate {
                    file: FILE,
                    line: line_no,
                    phrase: name,
                });
            }
            synsets.insert(name.clone(), Vec::new());
            block = Block::Synset(name);
        } else if let Some(rest) = line.strip_prefix('+') {
            let tokens: Vec<String> = rest.split_whitespace().map(|t| t.to_uppercase()).collect();
            if tokens.is_empty() {
                return Err(syntax(FILE, line_no, "`+` line needs a token"));
            }
            match &block {
                Block::Verb(i) => {
                    if tokens.len() != 1 {
                        return Err(syntax(FILE, line_no, "a verb form is a single token"));
                    }
                    verbs[*i].forms.push(tokens[0].clone());
                }
                Block::Synset(name) => {
                    let mut tokens = tokens;
                    let head = tokens.pop().unwrap();
                    synsets.get_mut(name).unwrap().push(TokenPhrase {
                        extra: tokens,
                        head,
                    });
                }
                Block::None => {
                    return Err(syntax(FILE, line_no, "`+` line outside a block"));
                }
            }
        } else if let Some(rest) = line.strip_prefix('-') {
            match &block {
                Block::Verb(i) => raw_lines.push((
                    *i,
                    RawVerbLine::Pattern {
                        text: rest.trim().to_string(),
                        line: line_no,
                    },
                )),
                _ => return Err(syntax(FILE, line_no, "pattern line outside a verb block")),
            }
        } else if let Some(rest) = line.strip_prefix('~') {
            match &block {
                Block::Verb(i) => raw_lines.push((
                    *i,
                    RawVerbLine::Transform {
                        text: rest.trim().to_string(),
                        line: line_no,
                    },
                )),
                _ => {
                    return Err(syntax(
                        FILE,
                        line_no,
                        "transformation line outside a verb block",
                    ))
                }
            }
        } else {
            return Err(syntax(FILE, line_no, "unrecognized line"));
        }
    }

    // Compile patterns and transformations once all synsets and verb base
    // codes are known (forward references are allowed).
    let lemma_codes: BTreeMap<String, Option<InternalCode>> = verbs
        .iter()
        .map(|v| (v.lemma.clone(), v.base_code))
        .collect();
    let symbol_codes = |symbol: &str| -> Option<Vec<InternalCode>> {
        resolve_symbol(symbol, mapping, &lemma_codes, &synsets, 0)
    };

    let mut transforms = Vec::new();
    for (owner_idx, raw) in &raw_lines {
        match raw {
            RawVerbLine::Pattern { text, line } => {
                let compiled =
                    compile_pattern(text, *line, &|c| mapping.internal(c).ok(), &|name| {
                        synsets.get(name).cloned()
                    })
                    .map_err(|e| syntax(FILE, *line, e))?;
                verbs[*owner_idx].patterns.push(compiled);
            }
            RawVerbLine::Transform { text, line } => {
                let rule =
                    TransformRule::parse(text, *line, &symbol_codes, &|c| mapping.internal(c).ok())
                        .map_err(|e| syntax(FILE, *line, e))?;
                transforms.push(rule);
            }
        }
    }

    Ok(VerbFile {
        verbs,
        synsets,
        transforms,
    })
}

/// Resolves a transformation verb symbol to the internal codes it covers: a
/// CAMEO code from the mapping, a verb lemma's base code, or a synset whose
/// members resolve the same way.
fn resolve_symbol(
    symbol: &str,
    mapping: &CameoMapping,
    lemmas: &BTreeMap<String, Option<InternalCode>>,
    synsets: &BTreeMap<String, Vec<TokenPhrase>>,
    depth: usize,
) -> Option<Vec<InternalCode>> {
    if depth > 4 {
        return None;
    }
    let symbol = symbol.trim_start_matches('&');
    if let Ok(code) = mapping.internal(symbol) {
        return Some(alloc::vec![code]);
    }
    if let Some(Some(code)) = lemmas.get(symbol) {
        return Some(alloc::vec![*code]);
    }
    if let Some(members) = synsets.get(symbol) {
        let mut out = Vec::new();
        for member in members {
            if !member.extra.is_empty() {
                continue;
            }
            if let Some(codes) = resolve_symbol(&member.head, mapping, lemmas, synsets, depth + 1) {
                for c in codes {
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        if !out.is_empty() {
            return Some(out);
        }
    }
    None
}

/// Standalone transformation-line parser wired to a mapping only; verb
/// symbols must be CAMEO codes. The store's loader resolves lemmas and
/// synsets as well.
pub fn parse_transformation(
    line: &str,
    mapping: &CameoMapping,
) -> Result<TransformRule, TransformError> {
    TransformRule::parse(
        line,
        0,
        &|sym| mapping.internal(sym).ok().map(|c| alloc::vec![c]),
        &|c| mapping.internal(c).ok(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    const CODE_MAP: &str =
        "010\t1000\n030\t3000\n070\t0040\n112\t70A0\n138\t60A0\n145\t50A0\n190\t00A0\n";

    fn store() -> DictionaryStore {
        DictionaryStore::load(&DictionaryTexts {
            actors: "\
# fixture actors
ISRAEL ; ISR
THE GAZA STRIP ; PSEGZA
AMERICAN ; USA
IRAQ ; IRQ
RUSSIA ; RUS [20000101 -]
RUSSIA ; SUN [19900101 19991231]
",
            agents: "TROOPS ; MIL\nPROTESTERS ; OPP\nPOLICE ; COP\n",
            verbs: "\
--- SAY [010] ---
+SAID
+SAYS
~ a (a b WILL_ATTACK) SAY = a b 138
~ a (b . ATTACK) SAY = a b 112

--- ATTACK [190] ---
+ATTACKED

--- LAUNCH [---] ---
+LAUNCHED
- * {MORTAR BOMB} [190]

--- DESTROY [---] ---
+DESTROYED
- PROTESTERS * MONUMENT [145]

&WILL_ATTACK
+ATTACK
",
            discard: "WORLD CUP\nOLYMPICS\n",
            code_map: CODE_MAP,
        })
        .unwrap()
    }

    fn date(s: &str) -> Date {
        Date::parse(s).unwrap()
    }

    #[test]
    fn fixture_store_is_fully_queryable() {
        let s = store();
        assert_eq!(s.actors().len(), 5);
        assert_eq!(s.agents().len(), 3);
        assert_eq!(s.verbs().len(), 4);
        assert_eq!(s.discards().len(), 2);
        assert_eq!(s.transforms().len(), 2);
        assert_eq!(s.synset_count(), 1);
        assert_eq!(s.verb_for_form("LAUNCHED").unwrap().lemma, "LAUNCH");
        assert_eq!(s.verb_for_form("SAY").unwrap().lemma, "SAY");
        assert_eq!(s.verbs()[3].patterns.len(), 1);
    }

    #[test]
    fn actor_resolution_skips_determiners() {
        let s = store();
        let d = date("20040605");
        assert_eq!(s.resolve_actor(&["ISRAEL"], d), Some("ISR".into()));
        assert_eq!(
            s.resolve_actor(&["THE", "GAZA", "STRIP"], d),
            Some("PSEGZA".into())
        );
        assert_eq!(
            s.resolve_actor(&["GAZA", "STRIP"], d),
            Some("PSEGZA".into())
        );
        assert_eq!(s.resolve_actor(&["XYZZY"], d), None);
    }

    #[test]
    fn dated_codes_honor_the_story_date() {
        let s = store();
        assert_eq!(
            s.resolve_actor(&["RUSSIA"], date("19950601")),
            Some("SUN".into())
        );
        assert_eq!(
            s.resolve_actor(&["RUSSIA"], date("20050601")),
            Some("RUS".into())
        );
        // Outside every span, with no default code.
        assert_eq!(s.resolve_actor(&["RUSSIA"], date("19800101")), None);
    }

    #[test]
    fn agents_match_anywhere() {
        let s = store();
        assert_eq!(s.match_agent(&["TROOPS"]), Some("MIL".into()));
        assert_eq!(s.match_agent(&["ANGRY", "PROTESTERS"]), Some("OPP".into()));
        assert_eq!(s.match_agent(&["XYZZY"]), None);
    }

    #[test]
    fn overlapping_actor_spans_are_rejected() {
        let err = DictionaryStore::load(&DictionaryTexts {
            actors: "RUSSIA ; RUS [19950101 -]\nRUSSIA ; SUN [19900101 19991231]\n",
            agents: "",
            verbs: "",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap_err();
        assert!(matches!(
            err,
            DictError::Syntax {
                file: DictFile::Actors,
                ..
            }
        ));
    }

    #[test]
    fn conflicting_duplicate_entries_are_rejected() {
        let err = DictionaryStore::load(&DictionaryTexts {
            actors: "ISRAEL ; ISR\nISRAEL ; ZZZ\n",
            agents: "",
            verbs: "",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap_err();
        assert!(matches!(
            err,
            DictError::Duplicate {
                file: DictFile::Actors,
                ..
            }
        ));
        let err = DictionaryStore::load(&DictionaryTexts {
            actors: "",
            agents: "TROOPS ; MIL\nTROOPS ; COP\n",
            verbs: "",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap_err();
        assert!(matches!(
            err,
            DictError::Duplicate {
                file: DictFile::Agents,
                ..
            }
        ));
    }

    #[test]
    fn discard_scans_token_subsequences() {
        use crate::tree::ParseTree;
        let s = store();
        let d = date("20040605");
        let hit = ParseTree::from_sexpr(
            "(S (NP (DT THE) (NNP WORLD) (NNP CUP)) (VP (VBD BEGAN)))",
            "t",
            d,
        )
        .unwrap();
        assert!(s.is_discard(&hit));
        let miss = ParseTree::from_sexpr("(S (NP (NNP ISRAEL)) (VP (VBD SPOKE)))", "t", d).unwrap();
        assert!(!s.is_discard(&miss));
    }

    #[test]
    fn discard_agrees_with_a_naive_scan_across_constituents() {
        use crate::tree::ParseTree;
        let s = store();
        let d = date("20040605");
        // The phrase straddles the NP/VP boundary but the tokens are
        // contiguous in surface order.
        let trees = [
            "(S (NP (NNP WORLD)) (VP (VBZ CUP) (NP (NN FEVER))))",
            "(S (NP (NNP ISRAEL)) (VP (VBD WATCHED) (NP (DT THE) (NNP WORLD))) (. .))",
            "(S (NP (NNP CUP) (NNP WORLD)) (VP (VBD SPOKE)))",
        ];
        let naive = |tokens: &[&str]| -> bool {
            s.discards().iter().any(|entry| {
                tokens.windows(entry.phrase.len()).any(|window| {
                    window
                        .iter()
                        .zip(entry.phrase.iter())
                        .all(|(have, want)| *have == want)
                })
            })
        };
        for text in trees {
            let tree = ParseTree::from_sexpr(text, "t", d).unwrap();
            let tokens = tree.tokens();
            assert_eq!(s.is_discard(&tree), naive(&tokens), "tree {text}");
        }
        let straddle = ParseTree::from_sexpr(trees[0], "t", d).unwrap();
        assert!(s.is_discard(&straddle));
    }

    #[test]
    fn longest_match_is_stable_under_shorter_entries() {
        // Adding a shorter-prefix entry never changes the result for inputs
        // the longer entry matches.
        let base = DictionaryStore::load(&DictionaryTexts {
            actors: "GAZA STRIP ; PSEGZA\n",
            agents: "",
            verbs: "",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap();
        let extended = DictionaryStore::load(&DictionaryTexts {
            actors: "GAZA STRIP ; PSEGZA\nGAZA ; PSE\n",
            agents: "",
            verbs: "",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap();
        let d = date("20040605");
        assert_eq!(
            base.resolve_actor(&["GAZA", "STRIP"], d),
            extended.resolve_actor(&["GAZA", "STRIP"], d)
        );
        assert_eq!(
            extended.resolve_actor(&["GAZA", "CITY"], d),
            Some("PSE".into())
        );
    }

    #[test]
    fn transformation_symbols_resolve_through_synsets() {
        let s = store();
        let will_attack = &s.transforms()[0];
        assert_eq!(
            will_attack.inner_codes,
            [InternalCode::new(0x00A0).unwrap()]
        );
        assert_eq!(
            will_attack.outer_codes,
            [InternalCode::new(0x1000).unwrap()]
        );
        assert_eq!(will_attack.result_code.value(), 0x60A0);
    }

    #[test]
    fn standalone_transformation_parser_uses_cameo_symbols() {
        let mapping = CameoMapping::parse(CODE_MAP).unwrap();
        let rule = parse_transformation("a (b . 190) 010 = a b 112", &mapping).unwrap();
        assert_eq!(rule.result_code.value(), 0x70A0);
        assert!(matches!(
            parse_transformation("a (b c 190) 010 = a d 112", &mapping),
            Err(TransformError::UnboundVariable('d'))
        ));
    }

    #[test]
    fn verb_file_errors_carry_line_numbers() {
        let bad_pattern = DictionaryStore::load(&DictionaryTexts {
            actors: "",
            agents: "",
            verbs: "--- HIT [---] ---\n- protesters monument [145]\n",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap_err();
        match bad_pattern {
            DictError::Syntax { file, line, .. } => {
                assert_eq!(file, DictFile::Verbs);
                assert_eq!(line, 2);
            }
            other => panic!("unexpected error {other:?}"),
        }
        let stray = DictionaryStore::load(&DictionaryTexts {
            actors: "",
            agents: "",
            verbs: "+FORM\n",
            discard: "",
            code_map: CODE_MAP,
        })
        .unwrap_err();
        assert!(matches!(stray, DictError::Syntax { line: 1, .. }));
    }
}
