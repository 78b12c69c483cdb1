//! Record input and output formats.
//!
//! Input is JSON Lines (`{"id": ..., "date": "YYYYMMDD", "parse": ...}`) or
//! plain text with one bare S-expression per line; the mode is detected per
//! file from its first non-blank character. Output is JSON Lines or flat
//! CSV (`id,date,source,target,code`, one row per event).

use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use treecoder_core::pipeline::CodedSentence;

#[derive(Debug, Deserialize)]
struct InRecord {
    id: String,
    date: String,
    parse: String,
}

/// One input line, not yet parsed into a tree.
#[derive(Debug, Clone)]
pub struct RawRecord {
    pub seq: u64,
    pub id: String,
    pub date_text: String,
    pub parse: String,
    /// Malformed JSON noted at read time; coded as a parse error.
    pub broken: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputMode {
    Jsonl,
    Plain,
}

/// Streams records out of one input file.
pub struct RecordReader<R: BufRead> {
    lines: std::io::Lines<R>,
    mode: Option<InputMode>,
    stem: String,
    default_date: String,
    line_no: u64,
    next_seq: u64,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(reader: R, path: &Path, default_date: &str, first_seq: u64) -> Self {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "input".to_string());
        RecordReader {
            lines: reader.lines(),
            mode: None,
            stem,
            default_date: default_date.to_string(),
            line_no: 0,
            next_seq: first_seq,
        }
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<RawRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let line = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(e).context("reading input")),
            };
            self.line_no += 1;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let mode = *self.mode.get_or_insert(if trimmed.starts_with('{') {
                InputMode::Jsonl
            } else {
                InputMode::Plain
            });
            let seq = self.next_seq;
            self.next_seq += 1;
            let record = match mode {
                InputMode::Jsonl => match serde_json::from_str::<InRecord>(trimmed) {
                    Ok(r) => RawRecord {
                        seq,
                        id: r.id,
                        date_text: r.date,
                        parse: r.parse,
                        broken: None,
                    },
                    Err(e) => RawRecord {
                        seq,
                        id: format!("{}-{}", self.stem, self.line_no),
                        date_text: self.default_date.clone(),
                        parse: String::new(),
                        broken: Some(format!("bad JSON record: {e}")),
                    },
                },
                InputMode::Plain => RawRecord {
                    seq,
                    id: format!("{}-{}", self.stem, self.line_no),
                    date_text: self.default_date.clone(),
                    parse: trimmed.to_string(),
                    broken: None,
                },
            };
            return Some(Ok(record));
        }
    }
}

#[derive(Serialize)]
struct OutEvent<'a> {
    source: &'a str,
    target: &'a str,
    code: &'a str,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    date: String,
    status: &'a str,
    events: Vec<OutEvent<'a>>,
}

pub trait RecordWriter {
    fn write_record(&mut self, sentence: &CodedSentence) -> Result<()>;
    fn finish(&mut self) -> Result<()>;
}

pub struct JsonlWriter<W: Write>(pub W);

impl<W: Write> RecordWriter for JsonlWriter<W> {
    fn write_record(&mut self, sentence: &CodedSentence) -> Result<()> {
        let record = OutRecord {
            id: &sentence.sentence_id,
            date: sentence.date.to_string(),
            status: sentence.status.as_str(),
            events: sentence
                .events
                .iter()
                .map(|e| OutEvent {
                    source: &e.source,
                    target: &e.target,
                    code: &e.code,
                })
                .collect(),
        };
        serde_json::to_writer(&mut self.0, &record)?;
        self.0.write_all(b"\n")?;
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        self.0.flush()?;
        Ok(())
    }
}

pub struct CsvWriter<W: Write> {
    out: W,
    header_written: bool,
}

impl<W: Write> CsvWriter<W> {
    pub fn new(out: W) -> Self {
        CsvWriter {
            out,
            header_written: false,
        }
    }
}

fn csv_field(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

impl<W: Write> RecordWriter for CsvWriter<W> {
    fn write_record(&mut self, sentence: &CodedSentence) -> Result<()> {
        if !self.header_written {
            writeln!(self.out, "id,date,source,target,code")?;
            self.header_written = true;
        }
        for event in &sentence.events {
            writeln!(
                self.out,
                "{},{},{},{},{}",
                csv_field(&sentence.sentence_id),
                sentence.date,
                csv_field(&event.source),
                csv_field(&event.target),
                csv_field(&event.code),
            )?;
        }
        Ok(())
    }

    fn finish(&mut self) -> Result<()> {
        if !self.header_written {
            writeln!(self.out, "id,date,source,target,code")?;
            self.header_written = true;
        }
        self.out.flush()?;
        Ok(())
    }
}
