//! Deterministic political-event coding over constituency parses.
//!
//! Given a Penn Treebank parse of an English sentence and a set of
//! CAMEO-style dictionaries, this crate extracts "who did what to whom"
//! triples: a source actor, a target actor, and a verb code. The sentence's
//! meaning is computed recursively over the syntax tree — noun phrases
//! resolve to actor codes, prepositional phrases pass their constituent
//! through, and verb phrases bind subjects, match dictionary patterns with
//! separate active and passive search positions, and compose nested verbs
//! by code addition or reported-speech transformation rules.
//!
//! The crate is `no_std` (with `alloc`): it never touches the filesystem or
//! spawns threads. Feeding it input records and dictionaries is the calling
//! binary's business.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod codes;
pub mod date;
pub mod dict;
pub mod pipeline;
pub mod semantics;
pub mod tree;

pub use codes::{CameoMapping, CodeError, InternalCode};
pub use date::Date;
pub use dict::{DictError, DictionaryStore, DictionaryTexts};
pub use pipeline::{code_sentence, get_events, CodeOptions, CodedSentence, OutputEvent, Status};
pub use semantics::{Analyzer, Event, Meaning};
pub use tree::{Kind, NodeId, ParseError, ParseTree};
