//! Behavior of the `treecoder` binary: summary accounting, pre-flight
//! errors, config layering, format equivalence, and trace output.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    format!("{}/../../data/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("treecoder-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn treecoder(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treecoder"))
        .args(args)
        .env_remove("TREECODER_DICTS")
        .output()
        .expect("binary runs")
}

fn dict_args(out: &mut Vec<String>) {
    for (flag, file) in [
        ("--actors", "dictionaries/actors.txt"),
        ("--agents", "dictionaries/agents.txt"),
        ("--verbs", "dictionaries/verbs.txt"),
        ("--discard", "dictionaries/discard.txt"),
        ("--code-map", "cameo_codes.tsv"),
    ] {
        out.push(flag.to_string());
        out.push(data(file));
    }
}

const GOLDEN_PARSE: &str = "(S (NP (NNP ISRAEL)) (VP (VBD SAID) (SBAR (S (NP (DT A) (JJ MORTAR) (NN BOMB)) (VP (VBD WAS) (VP (VBN LAUNCHED) (PP (IN AT) (NP (PRP IT))) (PP (IN FROM) (NP (NP (DT THE) (NNP GAZA) (NNP STRIP)) (PP (IN ON) (NP (NNP TUESDAY)))))))))) (. .))";

fn fixture_corpus() -> String {
    let records = [
        ("golden-1", GOLDEN_PARSE),
        (
            "attack-2",
            "(S (NP (NNP IRAQ)) (VP (VBD ATTACKED) (NP (NNP ISRAEL))) (. .))",
        ),
        ("noverb-3", "(NP (DT THE) (NN MONUMENT))"),
        (
            "discard-4",
            "(S (NP (DT THE) (NNP WORLD) (NNP CUP)) (VP (VBD BEGAN)))",
        ),
        ("broken-5", "(S (NP"),
    ];
    records
        .iter()
        .map(|(id, parse)| {
            format!("{{\"id\": \"{id}\", \"date\": \"20040605\", \"parse\": \"{parse}\"}}\n")
        })
        .collect()
}

#[test]
fn summary_counts_sum_to_the_input_size() {
    let dir = scratch("summary");
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let output = dir.join("out.jsonl");

    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );

    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(
        stdout.contains("coded=2 no_events=1 discarded=1 parse_errors=1 total=5"),
        "summary was: {stdout}"
    );

    let lines: Vec<String> = fs::read_to_string(&output)
        .unwrap()
        .lines()
        .map(str::to_string)
        .collect();
    assert_eq!(lines.len(), 5);
    // Output order equals input order.
    for (line, id) in
        lines
            .iter()
            .zip(["golden-1", "attack-2", "noverb-3", "discard-4", "broken-5"])
    {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(record["id"], id);
    }
    let golden: serde_json::Value = serde_json::from_str(&lines[0]).unwrap();
    assert_eq!(golden["events"][0]["source"], "ISR");
    assert_eq!(golden["events"][0]["target"], "PSEGZA");
    assert_eq!(golden["events"][0]["code"], "112");
}

#[test]
fn missing_dictionary_fails_before_reading_input() {
    let dir = scratch("missing-dict");
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let output = dir.join("out.jsonl");

    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
        "--verbs".into(),
        dir.join("no-such-verbs.txt").display().to_string(),
    ];
    for (flag, file) in [
        ("--actors", "dictionaries/actors.txt"),
        ("--agents", "dictionaries/agents.txt"),
        ("--discard", "dictionaries/discard.txt"),
        ("--code-map", "cameo_codes.tsv"),
    ] {
        args.push(flag.to_string());
        args.push(data(file));
    }
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(!result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(stderr.contains("verbs"), "stderr: {stderr}");
    // Nothing was written.
    assert!(!output.exists());
}

#[test]
fn zero_workers_is_a_config_error() {
    let dir = scratch("zero-workers");
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let output = dir.join("out.jsonl");
    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
        "--workers".into(),
        "0".into(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(!result.status.success());
    assert!(String::from_utf8(result.stderr)
        .unwrap()
        .contains("workers"));
}

#[test]
fn empty_input_writes_empty_output_and_exits_zero() {
    let dir = scratch("empty");
    let input = dir.join("empty.jsonl");
    fs::write(&input, "").unwrap();
    let output = dir.join("out.jsonl");

    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(result.status.success());
    let stdout = String::from_utf8(result.stdout).unwrap();
    assert!(stdout.contains("coded=0 no_events=0 discarded=0 parse_errors=0 total=0"));
    assert_eq!(fs::read_to_string(&output).unwrap(), "");
}

#[test]
fn env_var_supplies_dictionary_defaults() {
    let dir = scratch("envdir");
    for name in ["actors.txt", "agents.txt", "verbs.txt", "discard.txt"] {
        fs::copy(data(&format!("dictionaries/{name}")), dir.join(name)).unwrap();
    }
    fs::copy(data("cameo_codes.tsv"), dir.join("cameo_codes.tsv")).unwrap();
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let output = dir.join("out.jsonl");

    let result = Command::new(env!("CARGO_BIN_EXE_treecoder"))
        .args([
            "--input",
            &input.display().to_string(),
            "--output",
            &output.display().to_string(),
        ])
        .env("TREECODER_DICTS", &dir)
        .output()
        .unwrap();
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(String::from_utf8(result.stdout)
        .unwrap()
        .contains("total=5"));
}

#[test]
fn config_file_supplies_flags_and_command_line_wins() {
    let dir = scratch("config");
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let file_output = dir.join("from-file.jsonl");
    let cli_output = dir.join("from-cli.jsonl");

    let config = dir.join("run.conf");
    fs::write(
        &config,
        format!(
            "# run configuration\n\
             input = {}\n\
             output = {}\n\
             actors = {}\n\
             agents = {}\n\
             verbs = {}\n\
             discard = {}\n\
             code-map = {}\n\
             workers = 2\n",
            input.display(),
            file_output.display(),
            data("dictionaries/actors.txt"),
            data("dictionaries/agents.txt"),
            data("dictionaries/verbs.txt"),
            data("dictionaries/discard.txt"),
            data("cameo_codes.tsv"),
        ),
    )
    .unwrap();

    // Config file alone.
    let result = treecoder(&["--config", &config.display().to_string()]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(file_output.exists());

    // Command line overrides the file's output path.
    let result = treecoder(&[
        "--config",
        &config.display().to_string(),
        "--output",
        &cli_output.display().to_string(),
    ]);
    assert!(result.status.success());
    assert!(cli_output.exists());
    assert_eq!(
        fs::read_to_string(&file_output).unwrap(),
        fs::read_to_string(&cli_output).unwrap()
    );
}

#[test]
fn csv_and_jsonl_hold_the_same_events() {
    let dir = scratch("formats");
    let input = dir.join("input.jsonl");
    fs::write(&input, fixture_corpus()).unwrap();
    let jsonl_out = dir.join("out.jsonl");
    let csv_out = dir.join("out.csv");

    for (format, path) in [("jsonl", &jsonl_out), ("csv", &csv_out)] {
        let mut args: Vec<String> = vec![
            "--input".into(),
            input.display().to_string(),
            "--output".into(),
            path.display().to_string(),
            "--format".into(),
            format.into(),
        ];
        dict_args(&mut args);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        assert!(treecoder(&args).status.success());
    }

    let mut jsonl_events: Vec<(String, String, String, String)> = Vec::new();
    for line in fs::read_to_string(&jsonl_out).unwrap().lines() {
        let record: serde_json::Value = serde_json::from_str(line).unwrap();
        for event in record["events"].as_array().unwrap() {
            jsonl_events.push((
                record["id"].as_str().unwrap().to_string(),
                event["source"].as_str().unwrap().to_string(),
                event["target"].as_str().unwrap().to_string(),
                event["code"].as_str().unwrap().to_string(),
            ));
        }
    }
    let csv_text = fs::read_to_string(&csv_out).unwrap();
    let mut csv_events: Vec<(String, String, String, String)> = Vec::new();
    for line in csv_text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "row: {line}");
        csv_events.push((
            fields[0].to_string(),
            fields[2].to_string(),
            fields[3].to_string(),
            fields[4].to_string(),
        ));
    }
    jsonl_events.sort();
    csv_events.sort();
    assert_eq!(jsonl_events, csv_events);
    assert!(!csv_events.is_empty());
}

#[test]
fn plain_text_mode_synthesizes_ids_and_uses_the_default_date() {
    let dir = scratch("plain");
    let input = dir.join("sentences.txt");
    fs::write(
        &input,
        "(S (NP (NNP IRAQ)) (VP (VBD ATTACKED) (NP (NNP ISRAEL))) (. .))\n",
    )
    .unwrap();
    let output = dir.join("out.jsonl");

    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
        "--default-date".into(),
        "19990315".into(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    assert!(treecoder(&args).status.success());

    let record: serde_json::Value =
        serde_json::from_str(fs::read_to_string(&output).unwrap().lines().next().unwrap()).unwrap();
    assert_eq!(record["id"], "sentences-1");
    assert_eq!(record["date"], "19990315");
    assert_eq!(record["status"], "coded");
    assert_eq!(record["events"][0]["code"], "190");
}

#[test]
fn trace_shows_pattern_near_misses() {
    let dir = scratch("nearmiss");
    let input = dir.join("input.jsonl");
    // LAUNCHED with a rocket pattern in the dictionary but a non-matching
    // object: the trace must show the candidate pattern and failing part.
    fs::write(
        &input,
        "{\"id\": \"miss-1\", \"date\": \"20040605\", \"parse\": \"(S (NP (NNP IRAQ)) (VP (VBD LAUNCHED) (NP (DT A) (NN CAMPAIGN))) (. .))\"}\n",
    )
    .unwrap();
    let output = dir.join("out.jsonl");

    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
        "--trace".into(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(
        stderr.contains("failed at post-verb noun"),
        "trace: {stderr}"
    );
    assert!(stderr.contains("MORTAR BOMB"), "trace: {stderr}");
}

#[test]
fn one_word_sentence_traces_no_verb_sections() {
    let dir = scratch("oneword");
    let input = dir.join("input.jsonl");
    fs::write(
        &input,
        "{\"id\": \"word-1\", \"date\": \"20040605\", \"parse\": \"(NN DOG)\"}\n",
    )
    .unwrap();
    let output = dir.join("out.jsonl");
    let mut args: Vec<String> = vec![
        "--input".into(),
        input.display().to_string(),
        "--output".into(),
        output.display().to_string(),
        "--trace".into(),
    ];
    dict_args(&mut args);
    let args: Vec<&str> = args.iter().map(String::as_str).collect();
    let result = treecoder(&args);
    assert!(result.status.success());
    let stderr = String::from_utf8(result.stderr).unwrap();
    assert!(!stderr.contains("voice"), "trace: {stderr}");
    assert!(!stderr.contains("pattern"), "trace: {stderr}");
    assert!(stderr.contains("no_events"), "trace: {stderr}");
}

#[test]
fn relaxed_filters_admit_incomplete_events() {
    let dir = scratch("filters");
    let input = dir.join("input.jsonl");
    // Uncoded subject: the event has a target and code but no source.
    fs::write(
        &input,
        "{\"id\": \"inc-1\", \"date\": \"20040605\", \"parse\": \"(S (NP (DT A) (NN CROWD)) (VP (VBD ATTACKED) (NP (NNP ISRAEL))) (. .))\"}\n",
    )
    .unwrap();

    let strict_out = dir.join("strict.jsonl");
    let relaxed_out = dir.join("relaxed.jsonl");

    let mut base: Vec<String> = vec!["--input".into(), input.display().to_string()];
    dict_args(&mut base);

    let mut strict = base.clone();
    strict.extend(["--output".into(), strict_out.display().to_string()]);
    let strict: Vec<&str> = strict.iter().map(String::as_str).collect();
    assert!(treecoder(&strict).status.success());
    let record: serde_json::Value = serde_json::from_str(
        fs::read_to_string(&strict_out)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(record["status"], "no_events");

    let mut relaxed = base.clone();
    relaxed.extend([
        "--output".into(),
        relaxed_out.display().to_string(),
        "--require-source".into(),
        "false".into(),
    ]);
    let relaxed: Vec<&str> = relaxed.iter().map(String::as_str).collect();
    assert!(treecoder(&relaxed).status.success());
    let record: serde_json::Value = serde_json::from_str(
        fs::read_to_string(&relaxed_out)
            .unwrap()
            .lines()
            .next()
            .unwrap(),
    )
    .unwrap();
    assert_eq!(record["status"], "coded");
    assert_eq!(record["events"][0]["source"], "---");
    assert_eq!(record["events"][0]["target"], "ISR");
}
