//! Run configuration: command line, optional config file, environment.
//!
//! Precedence is command line over config file over the `TREECODER_DICTS`
//! directory default over built-in defaults. The config file is plain
//! `key = value` lines using the long flag names without dashes prefixed,
//! e.g. `workers = 8` or `code-map = data/cameo_codes.tsv`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use treecoder_core::Date;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Jsonl,
    Csv,
}

impl OutputFormat {
    fn parse(text: &str) -> Result<Self> {
        match text.to_ascii_lowercase().as_str() {
            "jsonl" => Ok(OutputFormat::Jsonl),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("config error: unknown output format `{other}` (jsonl|csv)"),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Jsonl => "jsonl",
            OutputFormat::Csv => "csv",
        })
    }
}

/// Everything a run needs, fully resolved.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub output: PathBuf,
    pub actors: PathBuf,
    pub agents: PathBuf,
    pub verbs: PathBuf,
    pub discard: PathBuf,
    pub code_map: PathBuf,
    pub default_date: Date,
    pub format: OutputFormat,
    pub require_source: bool,
    pub require_target: bool,
    pub workers: usize,
    pub trace: bool,
}

/// Raw option values before resolution; `None` means "not given here".
#[derive(Debug, Default, Clone)]
pub struct RawOptions {
    pub inputs: Vec<PathBuf>,
    pub output: Option<PathBuf>,
    pub actors: Option<PathBuf>,
    pub agents: Option<PathBuf>,
    pub verbs: Option<PathBuf>,
    pub discard: Option<PathBuf>,
    pub code_map: Option<PathBuf>,
    pub default_date: Option<String>,
    pub format: Option<String>,
    pub require_source: Option<bool>,
    pub require_target: Option<bool>,
    pub workers: Option<usize>,
    pub trace: Option<bool>,
}

impl RawOptions {
    /// Later layers fill only what is still unset.
    fn merge_under(&mut self, lower: RawOptions) {
        if self.inputs.is_empty() {
            self.inputs = lower.inputs;
        }
        self.output = self.output.take().or(lower.output);
        self.actors = self.actors.take().or(lower.actors);
        self.agents = self.agents.take().or(lower.agents);
        self.verbs = self.verbs.take().or(lower.verbs);
        self.discard = self.discard.take().or(lower.discard);
        self.code_map = self.code_map.take().or(lower.code_map);
        self.default_date = self.default_date.take().or(lower.default_date);
        self.format = self.format.take().or(lower.format);
        self.require_source = self.require_source.take().or(lower.require_source);
        self.require_target = self.require_target.take().or(lower.require_target);
        self.workers = self.workers.take().or(lower.workers);
        self.trace = self.trace.take().or(lower.trace);
    }
}

/// Parses a `key = value` config file.
pub fn parse_config_file(path: &Path) -> Result<RawOptions> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("config error: cannot read {}", path.display()))?;
    let mut pairs: BTreeMap<String, String> = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            anyhow!(
                "config error: {} line {}: expected `key = value`",
                path.display(),
                idx + 1
            )
        })?;
        pairs.insert(key.trim().to_string(), value.trim().to_string());
    }

    let mut out = RawOptions::default();
    for (key, value) in pairs {
        match key.as_str() {
            "input" => {
                out.inputs = value.split_whitespace().map(PathBuf::from).collect();
            }
            "output" => out.output = Some(PathBuf::from(value)),
            "actors" => out.actors = Some(PathBuf::from(value)),
            "agents" => out.agents = Some(PathBuf::from(value)),
            "verbs" => out.verbs = Some(PathBuf::from(value)),
            "discard" => out.discard = Some(PathBuf::from(value)),
            "code-map" => out.code_map = Some(PathBuf::from(value)),
            "default-date" => out.default_date = Some(value),
            "format" => out.format = Some(value),
            "require-source" => out.require_source = Some(parse_bool(&key, &value)?),
            "require-target" => out.require_target = Some(parse_bool(&key, &value)?),
            "workers" => {
                out.workers = Some(
                    value
                        .parse()
                        .map_err(|_| anyhow!("config error: bad worker count `{value}`"))?,
                )
            }
            "trace" => out.trace = Some(parse_bool(&key, &value)?),
            other => bail!("config error: unknown config key `{other}`"),
        }
    }
    Ok(out)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        other => bail!("config error: `{key}` wants true/false, got `{other}`"),
    }
}

/// Dictionary defaults from a `TREECODER_DICTS` directory.
fn env_defaults() -> RawOptions {
    let mut out = RawOptions::default();
    if let Ok(dir) = std::env::var("TREECODER_DICTS") {
        let dir = PathBuf::from(dir);
        out.actors = Some(dir.join("actors.txt"));
        out.agents = Some(dir.join("agents.txt"));
        out.verbs = Some(dir.join("verbs.txt"));
        out.discard = Some(dir.join("discard.txt"));
        out.code_map = Some(dir.join("cameo_codes.tsv"));
    }
    out
}

/// Resolves the layered options into a runnable configuration. All
/// dictionary paths must exist before processing starts.
pub fn resolve(mut cli: RawOptions, config_file: Option<&Path>) -> Result<RunConfig> {
    if let Some(path) = config_file {
        cli.merge_under(parse_config_file(path)?);
    }
    cli.merge_under(env_defaults());

    if cli.inputs.is_empty() {
        bail!("config error: no --input given");
    }
    let output = cli
        .output
        .ok_or_else(|| anyhow!("config error: no --output given"))?;

    let need = |what: &str, path: Option<PathBuf>| -> Result<PathBuf> {
        let path = path.ok_or_else(|| {
            anyhow!("config error: no --{what} path given and TREECODER_DICTS is not set")
        })?;
        if !path.is_file() {
            bail!(
                "config error: {} file {} does not exist",
                what,
                path.display()
            );
        }
        Ok(path)
    };

    let default_date = match &cli.default_date {
        Some(text) => Date::parse(text)
            .ok_or_else(|| anyhow!("config error: bad --default-date `{text}` (YYYYMMDD)"))?,
        None => Date::parse("20000101").unwrap(),
    };
    let format = match &cli.format {
        Some(text) => OutputFormat::parse(text)?,
        None => OutputFormat::Jsonl,
    };
    let workers = cli.workers.unwrap_or(1);
    if workers == 0 {
        bail!("config error: --workers must be at least 1");
    }

    for input in &cli.inputs {
        if !input.is_file() {
            bail!(
                "config error: input file {} does not exist",
                input.display()
            );
        }
    }

    Ok(RunConfig {
        inputs: cli.inputs,
        output,
        actors: need("actors", cli.actors)?,
        agents: need("agents", cli.agents)?,
        verbs: need("verbs", cli.verbs)?,
        discard: need("discard", cli.discard)?,
        code_map: need("code-map", cli.code_map)?,
        default_date,
        format,
        require_source: cli.require_source.unwrap_or(true),
        require_target: cli.require_target.unwrap_or(true),
        workers,
        trace: cli.trace.unwrap_or(false),
    })
}
