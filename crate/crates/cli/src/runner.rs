//! The batch engine: a reader thread feeds a bounded channel, a worker pool
//! codes sentences against the shared dictionaries, and the writer restores
//! input order before anything is emitted. Per-record failures become
//! `parse_error` records; they never stop the batch.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::sync::mpsc;
use std::sync::Mutex;

use anyhow::{Context, Result};
use treecoder_core::pipeline::{code_sentence, CodeOptions, CodedSentence, Status};
use treecoder_core::{Date, DictionaryStore, DictionaryTexts, ParseTree};

use crate::config::{OutputFormat, RunConfig};
use crate::io::{CsvWriter, JsonlWriter, RawRecord, RecordReader, RecordWriter};

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct Summary {
    pub coded: u64,
    pub no_events: u64,
    pub discarded: u64,
    pub parse_errors: u64,
}

impl Summary {
    pub fn total(&self) -> u64 {
        self.coded + self.no_events + self.discarded + self.parse_errors
    }

    fn tally(&mut self, status: Status) {
        match status {
            Status::Coded => self.coded += 1,
            Status::NoEvents => self.no_events += 1,
            Status::Discarded => self.discarded += 1,
            Status::ParseError => self.parse_errors += 1,
        }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "coded={} no_events={} discarded={} parse_errors={} total={}",
            self.coded,
            self.no_events,
            self.discarded,
            self.parse_errors,
            self.total()
        )
    }
}

struct Processed {
    seq: u64,
    sentence: CodedSentence,
    trace: Vec<String>,
}

pub fn load_store(config: &RunConfig) -> Result<DictionaryStore> {
    let read = |path: &std::path::Path| -> Result<String> {
        std::fs::read_to_string(path)
            .with_context(|| format!("dictionary error: cannot read {}", path.display()))
    };
    let actors = read(&config.actors)?;
    let agents = read(&config.agents)?;
    let verbs = read(&config.verbs)?;
    let discard = read(&config.discard)?;
    let code_map = read(&config.code_map)?;
    DictionaryStore::load(&DictionaryTexts {
        actors: &actors,
        agents: &agents,
        verbs: &verbs,
        discard: &discard,
        code_map: &code_map,
    })
    .map_err(|e| anyhow::anyhow!("dictionary error: {e}"))
}

/// Codes one raw record; every failure path yields a `parse_error` record.
fn process(record: &RawRecord, store: &DictionaryStore, options: CodeOptions) -> Processed {
    let date = Date::parse(&record.date_text);
    let mut trace = Vec::new();
    if options.trace {
        trace.push(format!("--- {} ---", record.id));
    }
    let fallback_date = Date::parse("20000101").unwrap();

    if let Some(reason) = &record.broken {
        if options.trace {
            trace.push(reason.clone());
        }
        return Processed {
            seq: record.seq,
            sentence: CodedSentence::parse_failure(&record.id, date.unwrap_or(fallback_date)),
            trace,
        };
    }
    let date = match date {
        Some(d) => d,
        None => {
            if options.trace {
                trace.push(format!("bad date `{}`", record.date_text));
            }
            return Processed {
                seq: record.seq,
                sentence: CodedSentence::parse_failure(&record.id, fallback_date),
                trace,
            };
        }
    };
    let tree = match ParseTree::from_sexpr(&record.parse, &record.id, date) {
        Ok(t) => t,
        Err(e) => {
            if options.trace {
                trace.push(format!("parse failed: {e}"));
            }
            return Processed {
                seq: record.seq,
                sentence: CodedSentence::parse_failure(&record.id, date),
                trace,
            };
        }
    };
    let (sentence, mut sentence_trace) = code_sentence(&tree, store, options);
    trace.append(&mut sentence_trace);
    Processed {
        seq: record.seq,
        sentence,
        trace,
    }
}

pub fn run(config: &RunConfig) -> Result<Summary> {
    let store = load_store(config)?;

    let out_file = File::create(&config.output).with_context(|| {
        format!(
            "config error: cannot create output {}",
            config.output.display()
        )
    })?;
    let buffered = BufWriter::new(out_file);
    let mut writer: Box<dyn RecordWriter> = match config.format {
        OutputFormat::Jsonl => Box::new(JsonlWriter(buffered)),
        OutputFormat::Csv => Box::new(CsvWriter::new(buffered)),
    };

    let options = CodeOptions {
        trace: config.trace,
        keep_incomplete_source: !config.require_source,
        keep_incomplete_target: !config.require_target,
    };

    let (job_tx, job_rx) = mpsc::sync_channel::<RawRecord>(config.workers * 8);
    let (done_tx, done_rx) = mpsc::channel::<Processed>();
    // Bounds records in flight (read but not yet written), which keeps the
    // writer's reorder buffer finite no matter how records skew across
    // workers. The reader takes a token per record; the writer returns it.
    let (token_tx, token_rx) = mpsc::sync_channel::<()>(config.workers * 16);
    let job_rx = Mutex::new(job_rx);

    let mut summary = Summary::default();
    let stderr = std::io::stderr();

    std::thread::scope(|scope| -> Result<()> {
        let store_ref = &store;
        let job_rx_ref = &job_rx;
        for _ in 0..config.workers {
            let done_tx = done_tx.clone();
            scope.spawn(move || loop {
                let job = match job_rx_ref.lock().unwrap().recv() {
                    Ok(j) => j,
                    Err(_) => break,
                };
                let processed = process(&job, store_ref, options);
                if done_tx.send(processed).is_err() {
                    break;
                }
            });
        }
        drop(done_tx);

        let inputs = config.inputs.clone();
        let default_date = config.default_date.to_string();
        let reader_handle = scope.spawn(move || -> Result<u64> {
            let mut seq = 0u64;
            for path in &inputs {
                let file = File::open(path).with_context(|| {
                    format!("config error: cannot open input {}", path.display())
                })?;
                let reader: Box<dyn BufRead> = Box::new(BufReader::new(file));
                let mut records = RecordReader::new(reader, path, &default_date, seq);
                for record in &mut records {
                    let record = record?;
                    if token_tx.send(()).is_err() || job_tx.send(record).is_err() {
                        break;
                    }
                }
                seq = records.next_seq();
            }
            drop(job_tx);
            Ok(seq)
        });

        // Order-restoring writer: emit in sequence number order. On a write
        // failure the loop keeps draining results (and freeing tokens) so
        // the reader and workers can run out instead of deadlocking.
        let mut pending: BTreeMap<u64, Processed> = BTreeMap::new();
        let mut next_to_write = 0u64;
        let mut failure: Option<anyhow::Error> = None;
        for processed in done_rx {
            if failure.is_some() {
                while token_rx.try_recv().is_ok() {}
                continue;
            }
            pending.insert(processed.seq, processed);
            while let Some(ready) = pending.remove(&next_to_write) {
                if let Err(e) = emit(writer.as_mut(), &ready, &mut summary, config.trace, &stderr) {
                    failure = Some(e);
                    pending.clear();
                    while token_rx.try_recv().is_ok() {}
                    break;
                }
                let _ = token_rx.try_recv();
                next_to_write += 1;
            }
        }
        let total_read = reader_handle.join().expect("reader thread panicked")?;
        if let Some(e) = failure {
            return Err(e);
        }
        anyhow::ensure!(
            pending.is_empty() && next_to_write == total_read,
            "writer lost records: wrote {next_to_write} of {total_read}"
        );
        Ok(())
    })?;

    writer.finish()?;
    Ok(summary)
}

fn emit(
    writer: &mut dyn RecordWriter,
    ready: &Processed,
    summary: &mut Summary,
    trace: bool,
    stderr: &std::io::Stderr,
) -> Result<()> {
    writer.write_record(&ready.sentence)?;
    summary.tally(ready.sentence.status);
    if trace {
        let mut err = stderr.lock();
        for line in &ready.trace {
            writeln!(err, "{line}")?;
        }
    }
    Ok(())
}
