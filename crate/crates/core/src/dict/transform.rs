//! Reported-speech transformation rules.
//!
//! A rule rewrites a nested event — an outer verb over an inner event — into
//! a flat triple, in postfix form:
//!
//! ```text
//! a (b . ATTACK) SAY = a b 112
//! ```
//!
//! reads "someone `a` SAYs that `b` ATTACKed anyone: code that as `a`
//! accusing `b`, CAMEO 112". Lowercase letters are actor variables and must
//! bind consistently; `.` matches any actor without binding. The verb
//! symbols resolve at load time to sets of internal codes.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use thiserror::Error;

use crate::codes::InternalCode;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("result variable `{0}` is not bound by the pattern")]
    UnboundVariable(char),
    #[error("malformed rule: {0}")]
    MalformedPostfix(String),
    #[error("unknown verb symbol `{0}`")]
    UnknownSymbol(String),
    #[error("bad result code `{0}`")]
    BadCode(String),
}

/// An actor slot in a rule pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActorSlot {
    Var(char),
    /// `.`: matches anything, binds nothing.
    Any,
}

impl fmt::Display for ActorSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActorSlot::Var(v) => write!(f, "{v}"),
            ActorSlot::Any => write!(f, "."),
        }
    }
}

/// A compiled transformation rule. The pattern side is one level of nesting:
/// `outer_source (inner_source inner_target INNER_VERB) OUTER_VERB`.
#[derive(Debug, Clone)]
pub struct TransformRule {
    pub outer_source: ActorSlot,
    pub inner_source: ActorSlot,
    pub inner_target: ActorSlot,
    /// Internal codes the inner event may carry.
    pub inner_codes: Vec<InternalCode>,
    /// Internal codes the outer verb may carry.
    pub outer_codes: Vec<InternalCode>,
    pub result_source: char,
    pub result_target: char,
    pub result_code: InternalCode,
    pub source_text: String,
    pub line: usize,
}

impl TransformRule {
    /// Parses one rule line. `symbol_codes` resolves a verb symbol (a CAMEO
    /// code, a verb lemma, or a synset name) to the internal codes it
    /// covers; `code_of` maps the result CAMEO code.
    pub fn parse(
        line: &str,
        line_no: usize,
        symbol_codes: &dyn Fn(&str) -> Option<Vec<InternalCode>>,
        code_of: &dyn Fn(&str) -> Option<InternalCode>,
    ) -> Result<Self, TransformError> {
        let text = line.trim();
        let tokens = tokenize(text);
        let mut t = tokens.iter().map(String::as_str);

        let outer_source = expect_slot(t.next(), "outer source")?;
        expect_exact(t.next(), "(")?;
        let inner_source = expect_slot(t.next(), "inner source")?;
        let inner_target = expect_slot(t.next(), "inner target")?;
        let inner_symbol = expect_symbol(t.next(), "inner verb symbol")?;
        expect_exact(t.next(), ")")?;
        let outer_symbol = expect_symbol(t.next(), "outer verb symbol")?;
        expect_exact(t.next(), "=")?;
        let result_source = expect_var(t.next(), "result source")?;
        let result_target = expect_var(t.next(), "result target")?;
        let code_text = t
            .next()
            .ok_or_else(|| TransformError::MalformedPostfix("missing result code".to_string()))?;
        if let Some(extra) = t.next() {
            return Err(TransformError::MalformedPostfix(format!(
                "unexpected `{extra}` after result"
            )));
        }

        let bound = [outer_source, inner_source, inner_target];
        for var in [result_source, result_target] {
            if !bound.contains(&ActorSlot::Var(var)) {
                return Err(TransformError::UnboundVariable(var));
            }
        }

        let inner_codes = symbol_codes(&inner_symbol)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| TransformError::UnknownSymbol(inner_symbol.clone()))?;
        let outer_codes = symbol_codes(&outer_symbol)
            .filter(|v| !v.is_empty())
            .ok_or_else(|| TransformError::UnknownSymbol(outer_symbol.clone()))?;
        let result_code =
            code_of(code_text).ok_or_else(|| TransformError::BadCode(code_text.to_string()))?;

        Ok(TransformRule {
            outer_source,
            inner_source,
            inner_target,
            inner_codes,
            outer_codes,
            result_source,
            result_target,
            result_code,
            source_text: text.to_string(),
            line: line_no,
        })
    }

    /// Unifies the rule against an outer (source, code) over an inner
    /// (source, target, code) and returns the rewritten triple. Variables
    /// bind at most once; a repeated letter must see the same actor.
    pub fn apply(
        &self,
        outer_source: &str,
        outer_code: InternalCode,
        inner_source: Option<&str>,
        inner_target: Option<&str>,
        inner_code: InternalCode,
    ) -> Option<(String, String, InternalCode)> {
        if !self.outer_codes.contains(&outer_code) || !self.inner_codes.contains(&inner_code) {
            return None;
        }
        let mut bindings: Vec<(char, &str)> = Vec::new();
        bind(&mut bindings, self.outer_source, Some(outer_source))?;
        bind(&mut bindings, self.inner_source, inner_source)?;
        bind(&mut bindings, self.inner_target, inner_target)?;
        let lookup = |var: char| {
            bindings
                .iter()
                .find(|(v, _)| *v == var)
                .map(|(_, a)| a.to_string())
        };
        Some((
            lookup(self.result_source)?,
            lookup(self.result_target)?,
            self.result_code,
        ))
    }
}

fn bind<'a>(
    bindings: &mut Vec<(char, &'a str)>,
    slot: ActorSlot,
    actor: Option<&'a str>,
) -> Option<()> {
    match slot {
        ActorSlot::Any => Some(()),
        ActorSlot::Var(v) => {
            let actor = actor?;
            match bindings.iter().find(|(b, _)| *b == v) {
                Some((_, existing)) => (*existing == actor).then_some(()),
                None => {
                    bindings.push((v, actor));
                    Some(())
                }
            }
        }
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' | '=' => {
                if !cur.is_empty() {
                    out.push(core::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(core::mem::take(&mut cur));
                }
            }
            _ => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn expect_exact(token: Option<&str>, want: &str) -> Result<(), TransformError> {
    match token {
        Some(t) if t == want => Ok(()),
        Some(t) => Err(TransformError::MalformedPostfix(format!(
            "expected `{want}`, found `{t}`"
        ))),
        None => Err(TransformError::MalformedPostfix(format!(
            "expected `{want}`, found end of line"
        ))),
    }
}

fn expect_slot(token: Option<&str>, what: &str) -> Result<ActorSlot, TransformError> {
    match token {
        Some(".") => Ok(ActorSlot::Any),
        Some(t) => {
            let mut chars = t.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_lowercase() => Ok(ActorSlot::Var(c)),
                _ => Err(TransformError::MalformedPostfix(format!(
                    "{what} must be a lowercase variable or `.`, found `{t}`"
                ))),
            }
        }
        None => Err(TransformError::MalformedPostfix(format!("missing {what}"))),
    }
}

fn expect_var(token: Option<&str>, what: &str) -> Result<char, TransformError> {
    match expect_slot(token, what)? {
        ActorSlot::Var(v) => Ok(v),
        ActorSlot::Any => Err(TransformError::MalformedPostfix(format!(
            "{what} must be a variable, not `.`"
        ))),
    }
}

fn expect_symbol(token: Option<&str>, what: &str) -> Result<String, TransformError> {
    match token {
        Some(t) if !t.is_empty() && t != "(" && t != ")" && t != "=" => Ok(t.to_uppercase()),
        Some(t) => Err(TransformError::MalformedPostfix(format!(
            "{what} expected, found `{t}`"
        ))),
        None => Err(TransformError::MalformedPostfix(format!("missing {what}"))),
    }
}
