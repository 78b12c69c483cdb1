//! Verb pattern compilation.
//!
//! A pattern line constrains the phrases around one verb and names the event
//! code the constellation produces, e.g.
//!
//! ```text
//! PROTESTERS * MONUMENT [145]
//! * {NUCLEAR WEAPON} (AGAINST ISRAEL) [190]
//! ```
//!
//! `*` marks the verb slot (exactly one per pattern). Unmarked words are
//! noun heads or particles. `{Braced phrases}` spell out multi-word nouns,
//! head last. `(Parenthesized groups)` are prepositional: the first word is
//! the preposition, the rest a noun as above. `&NAME` references a synset
//! anywhere a noun may stand. The bracketed code ends the line.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::codes::InternalCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PatternError {
    #[error("pattern has no `*` verb marker")]
    NoVerbMarker,
    #[error("pattern has more than one `*` verb marker")]
    MultipleVerbMarkers,
    #[error("braces may not nest")]
    NestedBraces,
    #[error("unclosed `{{` group")]
    UnclosedBrace,
    #[error("unclosed `(` group")]
    UnclosedParen,
    #[error("bad event code: {0}")]
    BadCode(String),
    #[error("a `(...)` group needs a preposition followed by a noun")]
    BadPrepGroup,
    #[error("empty `{{}}` group")]
    EmptyGroup,
    #[error("unknown synset `&{0}`")]
    UnknownSynset(String),
    #[error("pattern constrains nothing besides the verb")]
    EmptyPattern,
}

/// A concrete multi-token noun: optional qualifiers then the head.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenPhrase {
    pub extra: Vec<String>,
    pub head: String,
}

impl TokenPhrase {
    pub fn single(head: String) -> Self {
        TokenPhrase {
            extra: Vec::new(),
            head,
        }
    }

    pub fn len(&self) -> usize {
        self.extra.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// One noun slot: either a literal phrase or any member of a synset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NounSpec {
    /// Synset name when the slot came from `&NAME`.
    pub synset: Option<String>,
    /// Acceptable phrases; a literal slot has exactly one.
    pub alts: Vec<TokenPhrase>,
}

impl NounSpec {
    fn literal(phrase: TokenPhrase) -> Self {
        NounSpec {
            synset: None,
            alts: alloc::vec![phrase],
        }
    }

    /// Token weight for specificity ranking; synset slots count as one.
    pub fn weight(&self) -> usize {
        if self.synset.is_some() {
            1
        } else {
            self.alts.first().map_or(1, TokenPhrase::len)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrepSpec {
    pub prep: String,
    pub noun: NounSpec,
}

/// A compiled pattern: the four part-lists around the verb plus its code.
#[derive(Debug, Clone)]
pub struct VerbPattern {
    pub pre_nouns: Vec<NounSpec>,
    pub pre_preps: Vec<PrepSpec>,
    pub post_nouns: Vec<NounSpec>,
    pub post_preps: Vec<PrepSpec>,
    pub code: InternalCode,
    /// Code text as written in the dictionary (a CAMEO code).
    pub code_text: String,
    /// Original dictionary line.
    pub source_text: String,
    pub line: usize,
}

impl VerbPattern {
    pub fn part_count(&self) -> usize {
        usize::from(!self.pre_nouns.is_empty())
            + usize::from(!self.pre_preps.is_empty())
            + usize::from(!self.post_nouns.is_empty())
            + usize::from(!self.post_preps.is_empty())
    }

    pub fn token_weight(&self) -> usize {
        let nouns = |specs: &[NounSpec]| specs.iter().map(NounSpec::weight).sum::<usize>();
        let preps = |specs: &[PrepSpec]| specs.iter().map(|p| 1 + p.noun.weight()).sum::<usize>();
        nouns(&self.pre_nouns)
            + preps(&self.pre_preps)
            + nouns(&self.post_nouns)
            + preps(&self.post_preps)
    }
}

/// Equality on the matching behavior; provenance fields are ignored.
impl PartialEq for VerbPattern {
    fn eq(&self, other: &Self) -> bool {
        self.pre_nouns == other.pre_nouns
            && self.pre_preps == other.pre_preps
            && self.post_nouns == other.post_nouns
            && self.post_preps == other.post_preps
            && self.code == other.code
    }
}

impl Eq for VerbPattern {}

impl fmt::Display for VerbPattern {
    /// Canonical dictionary form; `compile` on the output reproduces the
    /// same pattern.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        for n in &self.pre_nouns {
            parts.push(noun_text(n));
        }
        for p in &self.pre_preps {
            parts.push(prep_text(p));
        }
        parts.push("*".to_string());
        for n in &self.post_nouns {
            parts.push(noun_text(n));
        }
        for p in &self.post_preps {
            parts.push(prep_text(p));
        }
        write!(f, "{} [{}]", parts.join(" "), self.code_text)
    }
}

fn noun_text(spec: &NounSpec) -> String {
    if let Some(name) = &spec.synset {
        return format!("&{name}");
    }
    let phrase = &spec.alts[0];
    if phrase.extra.is_empty() {
        phrase.head.clone()
    } else {
        format!("{{{} {}}}", phrase.extra.join(" "), phrase.head)
    }
}

fn prep_text(spec: &PrepSpec) -> String {
    format!("({} {})", spec.prep, noun_text(&spec.noun))
}

enum Unit {
    Star,
    Noun(NounSpec),
    Prep(PrepSpec),
}

/// Compiles a pattern line. `code_of` maps the bracketed CAMEO text to an
/// internal code; `synset_of` resolves `&NAME` slots.
pub fn compile_pattern(
    line: &str,
    line_no: usize,
    code_of: &dyn Fn(&str) -> Option<InternalCode>,
    synset_of: &dyn Fn(&str) -> Option<Vec<TokenPhrase>>,
) -> Result<VerbPattern, PatternError> {
    let text = line.trim();
    let (body, code_text) = split_code(text)?;
    let code = code_of(&code_text).ok_or_else(|| PatternError::BadCode(code_text.clone()))?;

    let mut units = Vec::new();
    let mut chars = body.char_indices().peekable();
    while let Some((_, c)) = chars.peek().copied() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        match c {
            '*' => {
                chars.next();
                units.push(Unit::Star);
            }
            '{' => {
                chars.next();
                let phrase = read_braced(&mut chars)?;
                units.push(Unit::Noun(NounSpec::literal(phrase)));
            }
            '(' => {
                chars.next();
                units.push(Unit::Prep(read_prep(&mut chars, synset_of)?));
            }
            '}' => return Err(PatternError::NestedBraces),
            ')' => return Err(PatternError::BadPrepGroup),
            '&' => {
                chars.next();
                let name = read_atom(&mut chars);
                units.push(Unit::Noun(resolve_synset(&name, synset_of)?));
            }
            _ => {
                let word = read_atom(&mut chars);
                units.push(Unit::Noun(NounSpec::literal(TokenPhrase::single(
                    word.to_uppercase(),
                ))));
            }
        }
    }

    let mut pattern = VerbPattern {
        pre_nouns: Vec::new(),
        pre_preps: Vec::new(),
        post_nouns: Vec::new(),
        post_preps: Vec::new(),
        code,
        code_text,
        source_text: text.to_string(),
        line: line_no,
    };
    let mut seen_star = false;
    for unit in units {
        match unit {
            Unit::Star => {
                if seen_star {
                    return Err(PatternError::MultipleVerbMarkers);
                }
                seen_star = true;
            }
            Unit::Noun(n) if seen_star => pattern.post_nouns.push(n),
            Unit::Noun(n) => pattern.pre_nouns.push(n),
            Unit::Prep(p) if seen_star => pattern.post_preps.push(p),
            Unit::Prep(p) => pattern.pre_preps.push(p),
        }
    }
    if !seen_star {
        return Err(PatternError::NoVerbMarker);
    }
    if pattern.part_count() == 0 {
        return Err(PatternError::EmptyPattern);
    }
    Ok(pattern)
}

/// Splits the trailing `[CODE]` off the pattern body.
fn split_code(text: &str) -> Result<(&str, String), PatternError> {
    let open = text
        .rfind('[')
        .ok_or_else(|| PatternError::BadCode("missing [code]".to_string()))?;
    let rest = &text[open + 1..];
    let close = rest
        .find(']')
        .ok_or_else(|| PatternError::BadCode("unterminated [code]".to_string()))?;
    if !rest[close + 1..].trim().is_empty() {
        return Err(PatternError::BadCode("text after [code]".to_string()));
    }
    let code = rest[..close].trim();
    if code.is_empty() {
        return Err(PatternError::BadCode("empty [code]".to_string()));
    }
    Ok((&text[..open], code.to_string()))
}

fn read_atom(chars: &mut core::iter::Peekable<core::str::CharIndices<'_>>) -> String {
    let mut out = String::new();
    while let Some((_, c)) = chars.peek().copied() {
        if c.is_whitespace() || matches!(c, '{' | '}' | '(' | ')' | '*' | '[') {
            break;
        }
        out.push(c);
        chars.next();
    }
    out
}

fn read_braced(
    chars: &mut core::iter::Peekable<core::str::CharIndices<'_>>,
) -> Result<TokenPhrase, PatternError> {
    let mut content = String::new();
    loop {
        match chars.next() {
            Some((_, '}')) => break,
            Some((_, '{')) => return Err(PatternError::NestedBraces),
            Some((_, c)) => content.push(c),
            None => return Err(PatternError::UnclosedBrace),
        }
    }
    let mut tokens: Vec<String> = content
        .split_whitespace()
        .map(|t| t.to_uppercase())
        .collect();
    let head = tokens.pop().ok_or(PatternError::EmptyGroup)?;
    Ok(TokenPhrase {
        extra: tokens,
        head,
    })
}

fn read_prep(
    chars: &mut core::iter::Peekable<core::str::CharIndices<'_>>,
    synset_of: &dyn Fn(&str) -> Option<Vec<TokenPhrase>>,
) -> Result<PrepSpec, PatternError> {
    // Capture everything up to the matching close paren; braces may appear
    // inside, nested parens may not.
    let mut content = String::new();
    loop {
        match chars.next() {
            Some((_, ')')) => break,
            Some((_, '(')) => return Err(PatternError::BadPrepGroup),
            Some((_, c)) => content.push(c),
            None => return Err(PatternError::UnclosedParen),
        }
    }
    let content = content.trim();
    let mut words = content.split_whitespace();
    let prep = words
        .next()
        .ok_or(PatternError::BadPrepGroup)?
        .to_uppercase();
    let rest = content
        .split_once(char::is_whitespace)
        .map(|(_, r)| r.trim())
        .unwrap_or("");
    if rest.is_empty() {
        return Err(PatternError::BadPrepGroup);
    }
    let noun = if let Some(stripped) = rest.strip_prefix('&') {
        resolve_synset(stripped.trim(), synset_of)?
    } else if let Some(stripped) = rest.strip_prefix('{') {
        let inner = stripped
            .strip_suffix('}')
            .ok_or(PatternError::UnclosedBrace)?;
        if inner.contains('{') {
            return Err(PatternError::NestedBraces);
        }
        let mut tokens: Vec<String> = inner.split_whitespace().map(|t| t.to_uppercase()).collect();
        let head = tokens.pop().ok_or(PatternError::EmptyGroup)?;
        NounSpec::literal(TokenPhrase {
            extra: tokens,
            head,
        })
    } else {
        let mut tokens: Vec<String> = rest.split_whitespace().map(|t| t.to_uppercase()).collect();
        let head = tokens.pop().ok_or(PatternError::BadPrepGroup)?;
        NounSpec::literal(TokenPhrase {
            extra: tokens,
            head,
        })
    };
    Ok(PrepSpec { prep, noun })
}

fn resolve_synset(
    name: &str,
    synset_of: &dyn Fn(&str) -> Option<Vec<TokenPhrase>>,
) -> Result<NounSpec, PatternError> {
    let name = name.to_uppercase();
    let alts = synset_of(&name).ok_or_else(|| PatternError::UnknownSynset(name.clone()))?;
    Ok(NounSpec {
        synset: Some(name),
        alts,
    })
}
