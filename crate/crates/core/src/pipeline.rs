//! Sentence-level orchestration: discard filtering, the root verb-phrase
//! meaning cascade, the completeness check, and CAMEO back-conversion.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::date::Date;
use crate::dict::DictionaryStore;
use crate::semantics::Analyzer;
use crate::tree::{Kind, NodeId, ParseTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Coded,
    NoEvents,
    Discarded,
    ParseError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Coded => "coded",
            Status::NoEvents => "no_events",
            Status::Discarded => "discarded",
            Status::ParseError => "parse_error",
        }
    }
}

impl core::fmt::Display for Status {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A finished event with its code written back as CAMEO.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputEvent {
    pub source: String,
    pub target: String,
    pub code: String,
}

/// The per-sentence result record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodedSentence {
    pub sentence_id: String,
    pub date: Date,
    pub status: Status,
    pub events: Vec<OutputEvent>,
}

impl CodedSentence {
    /// Record for input that never parsed; the batch goes on.
    pub fn parse_failure(sentence_id: &str, date: Date) -> Self {
        CodedSentence {
            sentence_id: sentence_id.to_string(),
            date,
            status: Status::ParseError,
            events: Vec::new(),
        }
    }
}

/// Extraction knobs. The default keeps only complete events, which is what
/// the coder is for; the incomplete variants exist for diagnostics.
#[derive(Debug, Clone, Copy, Default)]
pub struct CodeOptions {
    pub trace: bool,
    /// Emit events whose source never bound (written `---`).
    pub keep_incomplete_source: bool,
    /// Emit events whose target never bound (written `---`).
    pub keep_incomplete_target: bool,
}

/// Codes one sentence: discard check, meaning of the uppermost verb phrase
/// of each top-level clause, completeness filter, CAMEO conversion, and
/// order-preserving deduplication.
pub fn get_events(tree: &ParseTree, store: &DictionaryStore) -> CodedSentence {
    code_sentence(tree, store, CodeOptions::default()).0
}

pub fn code_sentence(
    tree: &ParseTree,
    store: &DictionaryStore,
    options: CodeOptions,
) -> (CodedSentence, Vec<String>) {
    let mut analyzer = if options.trace {
        Analyzer::with_trace(tree, store)
    } else {
        Analyzer::new(tree, store)
    };

    if store.is_discard(tree) {
        let sentence = CodedSentence {
            sentence_id: tree.sentence_id().to_string(),
            date: tree.date(),
            status: Status::Discarded,
            events: Vec::new(),
        };
        let trace = if options.trace {
            alloc::vec!["sentence contains a discard phrase".to_string()]
        } else {
            Vec::new()
        };
        return (sentence, trace);
    }

    let mut events = Vec::new();
    for clause in clause_roots(tree) {
        if let Some(vp) = tree
            .phrase_children(clause, Kind::VerbPhrase)
            .first()
            .copied()
        {
            events.extend(analyzer.vp_meaning(vp).events);
        }
    }

    let mut out: Vec<OutputEvent> = Vec::new();
    for event in &events {
        let source_ok = event.source.is_some() || options.keep_incomplete_source;
        let target_ok = event.target.is_some() || options.keep_incomplete_target;
        if !source_ok || !target_ok {
            continue;
        }
        if event.source == event.target && !event.from_transform {
            // Fan-out can pair an actor with itself; only a transformation
            // rule may claim a self-event deliberately.
            continue;
        }
        let code = match store.mapping().cameo(event.code) {
            Ok(c) => c,
            Err(_) => continue,
        };
        let candidate = OutputEvent {
            source: event.source.clone().unwrap_or_else(|| "---".to_string()),
            target: event.target.clone().unwrap_or_else(|| "---".to_string()),
            code,
        };
        if !out.contains(&candidate) {
            out.push(candidate);
        }
    }

    let status = if out.is_empty() {
        Status::NoEvents
    } else {
        Status::Coded
    };
    let mut trace = analyzer.into_trace();
    if options.trace {
        trace.push(format!(
            "result: {status}{}",
            if out.is_empty() {
                String::new()
            } else {
                let listed: Vec<String> = out
                    .iter()
                    .map(|e| format!("({} {} {})", e.source, e.target, e.code))
                    .collect();
                format!(" {}", listed.join(" "))
            }
        ));
    }
    (
        CodedSentence {
            sentence_id: tree.sentence_id().to_string(),
            date: tree.date(),
            status,
            events: out,
        },
        trace,
    )
}

/// Top-level clauses to code: the root itself when it is a clause with a
/// predicate, otherwise its clause children (coordinated top-level
/// sentences), each coded once.
fn clause_roots(tree: &ParseTree) -> Vec<NodeId> {
    let root = tree.root();
    let has_vp = |n: NodeId| !tree.phrase_children(n, Kind::VerbPhrase).is_empty();
    if tree.kind(root) == Kind::Clause && has_vp(root) {
        return alloc::vec![root];
    }
    let mut out: Vec<NodeId> = Vec::new();
    if tree.kind(root) == Kind::Clause || tree.kind(root) == Kind::Other {
        for child in tree.phrase_children(root, Kind::Clause) {
            if has_vp(child) {
                out.push(child);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dict::DictionaryTexts;

    const CODE_MAP: &str = "010\t1000\n112\t70A0\n145\t50A0\n180\t0090\n190\t00A0\n";

    fn store() -> DictionaryStore {
        DictionaryStore::load(&DictionaryTexts {
            actors: "ISRAEL ; ISR\nGAZA STRIP ; PSEGZA\nMONUMENT ; MNT\nIRAQ ; IRQ\n",
            agents: "PROTESTERS ; OPP\n",
            verbs: "\
--- SAY [010] ---
+SAID
~ a (b . ATTACK) SAY = a b 112

--- ATTACK [190] ---
+ATTACKED

--- LAUNCH [---] ---
+LAUNCHED
- * {MORTAR BOMB} [190]

--- DESTROY [---] ---
+DESTROYED
- PROTESTERS * MONUMENT [145]

--- HURT [180] ---
+HURT
",
            discard: "WORLD CUP\n",
            code_map: CODE_MAP,
        })
        .unwrap()
    }

    fn tree(text: &str) -> ParseTree {
        ParseTree::from_sexpr(text, "t", Date::parse("20040605").unwrap()).unwrap()
    }

    const GOLDEN: &str = "(S (NP (NNP ISRAEL)) (VP (VBD SAID) (SBAR (S (NP (DT A) (JJ MORTAR) (NN BOMB)) (VP (VBD WAS) (VP (VBN LAUNCHED) (PP (IN AT) (NP (PRP IT))) (PP (IN FROM) (NP (NP (DT THE) (NNP GAZA) (NNP STRIP)) (PP (IN ON) (NP (NNP TUESDAY)))))))))) (. .))";

    #[test]
    fn golden_sentence_codes_one_event() {
        let s = store();
        let coded = get_events(&tree(GOLDEN), &s);
        assert_eq!(coded.status, Status::Coded);
        assert_eq!(
            coded.events,
            [OutputEvent {
                source: "ISR".into(),
                target: "PSEGZA".into(),
                code: "112".into(),
            }]
        );
    }

    #[test]
    fn monument_sentence_codes_145() {
        let s = store();
        let coded = get_events(
            &tree(
                "(S (NP (NNS PROTESTERS)) (VP (VBD DESTROYED) (NP (DT THE) (NN MONUMENT))) (. .))",
            ),
            &s,
        );
        assert_eq!(coded.status, Status::Coded);
        assert_eq!(coded.events.len(), 1);
        assert_eq!(coded.events[0].code, "145");
        assert_eq!(coded.events[0].source, "OPP");
        assert_eq!(coded.events[0].target, "MNT");
    }

    #[test]
    fn sentence_without_a_vp_has_no_events() {
        let s = store();
        let coded = get_events(&tree("(NP (DT THE) (NN MONUMENT))"), &s);
        assert_eq!(coded.status, Status::NoEvents);
        assert!(coded.events.is_empty());
    }

    #[test]
    fn discard_phrases_skip_the_sentence() {
        let s = store();
        let coded = get_events(
            &tree("(S (NP (DT THE) (NNP WORLD) (NNP CUP)) (VP (VBD HURT) (NP (NNP ISRAEL))))"),
            &s,
        );
        assert_eq!(coded.status, Status::Discarded);
        assert!(coded.events.is_empty());
    }

    #[test]
    fn incomplete_events_are_dropped_by_default() {
        let s = store();
        // HURT has a base code but the subject is uncoded.
        let text = "(S (NP (DT A) (NN CROWD)) (VP (VBD HURT) (NP (NNP ISRAEL))))";
        let coded = get_events(&tree(text), &s);
        assert_eq!(coded.status, Status::NoEvents);
        // Kept when asked for.
        let (coded, _) = code_sentence(
            &tree(text),
            &s,
            CodeOptions {
                keep_incomplete_source: true,
                ..CodeOptions::default()
            },
        );
        assert_eq!(coded.status, Status::Coded);
        assert_eq!(coded.events[0].source, "---");
        assert_eq!(coded.events[0].target, "ISR");
    }

    #[test]
    fn self_events_are_suppressed() {
        let s = store();
        let coded = get_events(
            &tree("(S (NP (NNP ISRAEL)) (VP (VBD HURT) (NP (NNP ISRAEL))))"),
            &s,
        );
        assert_eq!(coded.status, Status::NoEvents);
    }

    #[test]
    fn coordinated_clauses_each_code() {
        let s = store();
        let coded = get_events(
            &tree(
                "(S (S (NP (NNP ISRAEL)) (VP (VBD HURT) (NP (NNP IRAQ)))) (CC AND) (S (NP (NNP IRAQ)) (VP (VBD HURT) (NP (NNP ISRAEL)))))",
            ),
            &s,
        );
        assert_eq!(coded.status, Status::Coded);
        assert_eq!(coded.events.len(), 2);
        assert_eq!(coded.events[0].source, "ISR");
        assert_eq!(coded.events[1].source, "IRQ");
    }

    #[test]
    fn duplicate_triples_are_deduplicated_in_order() {
        let s = store();
        // Both coordinated clauses produce the identical triple.
        let coded = get_events(
            &tree(
                "(S (S (NP (NNP ISRAEL)) (VP (VBD HURT) (NP (NNP IRAQ)))) (CC AND) (S (NP (NNP ISRAEL)) (VP (VBD HURT) (NP (NNP IRAQ)))))",
            ),
            &s,
        );
        assert_eq!(coded.events.len(), 1);
    }

    #[test]
    fn trace_narrates_the_golden_derivation() {
        let s = store();
        let (_, trace) = code_sentence(
            &tree(GOLDEN),
            &s,
            CodeOptions {
                trace: true,
                ..CodeOptions::default()
            },
        );
        let text = trace.join("\n");
        assert!(text.contains("passive"), "trace:\n{text}");
        assert!(text.contains("FROM"), "trace:\n{text}");
        assert!(text.contains("112"), "trace:\n{text}");
        assert!(text.contains("transformation"), "trace:\n{text}");
    }
}
