//! Canonical and released-layout corpus files.
//!
//! Canonical layout:
//!
//! ```json
//! {"schema_version": "...",
//!  "dialogues": [{"id": "...", "turns": [{"speaker": "...", "text": "..."}]}],
//!  "instances": [{"dialogue_id", "instance_id", "subject", "subject_class",
//!                 "object", "object_class", "labels": [..], "triggers": [..]}],
//!  "splits": {"<dialogue id>": "train" | "dev" | "test"} | null}
//! ```
//!
//! The released layout is an array of `[turns, instances]` pairs where every
//! turn is `"NAME: utterance"` and instances use the `x`/`y`/`x_type`/`y_type`/
//! `r`/`t` field names. Field-name mapping lives only in this file.

use std::collections::BTreeMap;
use std::fmt;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use super::{Corpus, Dialogue, RawInstance, SplitTag, ValidationError, Violation};

pub const CANONICAL_VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Canonical,
    Released,
    /// Released if the top-level JSON value is an array, else canonical.
    Auto,
}

/// Malformed input located by byte offset.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.offset, self.message)
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

/// How released-layout dialogues are named and tagged.
#[derive(Debug, Clone, Default)]
pub struct ReleasedOptions {
    /// Dialogue ids are `{id_prefix}{position}`.
    pub id_prefix: String,
    /// Tag every dialogue with this split.
    pub split: Option<SplitTag>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalFile {
    #[allow(dead_code)]
    schema_version: String,
    dialogues: Vec<CanonicalDialogue>,
    instances: Vec<CanonicalInstance>,
    #[serde(default)]
    splits: Option<BTreeMap<String, String>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalDialogue {
    id: String,
    turns: Vec<CanonicalTurn>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalTurn {
    speaker: String,
    text: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CanonicalInstance {
    dialogue_id: String,
    instance_id: String,
    subject: String,
    subject_class: Option<String>,
    object: String,
    object_class: Option<String>,
    labels: Vec<String>,
    triggers: Vec<String>,
}

#[derive(Deserialize)]
struct ReleasedInstance {
    x: String,
    y: String,
    #[serde(default)]
    x_type: Option<String>,
    #[serde(default)]
    y_type: Option<String>,
    r: Vec<String>,
    t: Vec<String>,
    #[serde(default)]
    #[allow(dead_code)]
    rid: Option<Vec<u32>>,
}

type ReleasedEntry = (Vec<String>, Vec<ReleasedInstance>);

fn utf8(source: &[u8]) -> Result<&str, ParseError> {
    std::str::from_utf8(source).map_err(|e| ParseError {
        offset: e.valid_up_to(),
        message: "invalid UTF-8".into(),
    })
}

fn json_error(src: &str, e: serde_json::Error) -> ParseError {
    // serde_json reports 1-based line and byte column.
    let line_start: usize = src
        .split_inclusive('\n')
        .take(e.line().saturating_sub(1))
        .map(str::len)
        .sum();
    ParseError {
        offset: (line_start + e.column().saturating_sub(1)).min(src.len()),
        message: e.to_string(),
    }
}

/// Parses a corpus file. Released-layout input uses default naming.
pub fn parse_corpus(source: &[u8], format: Format) -> Result<Corpus, CorpusError> {
    let src = utf8(source)?;
    match format {
        Format::Canonical => parse_canonical(src),
        Format::Released => parse_released_str(src, &ReleasedOptions::default()),
        Format::Auto => {
            if src.trim_start().starts_with('[') {
                parse_released_str(src, &ReleasedOptions::default())
            } else {
                parse_canonical(src)
            }
        }
    }
}

/// Parses a released-layout file.
pub fn parse_released(source: &[u8], opts: &ReleasedOptions) -> Result<Corpus, CorpusError> {
    parse_released_str(utf8(source)?, opts)
}

fn parse_canonical(src: &str) -> Result<Corpus, CorpusError> {
    let file: CanonicalFile = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
    let dialogues = file
        .dialogues
        .into_iter()
        .map(|d| Dialogue::new(d.id, d.turns.into_iter().map(|t| (t.speaker, t.text))))
        .collect();
    let raw = file
        .instances
        .into_iter()
        .map(|i| RawInstance {
            dialogue_id: i.dialogue_id,
            instance_id: i.instance_id,
            subject: i.subject,
            subject_class: i.subject_class,
            object: i.object,
            object_class: i.object_class,
            labels: i.labels,
            triggers: i.triggers,
        })
        .collect();
    let mut violations = Vec::new();
    let splits = file.splits.map(|s| {
        s.into_iter()
            .filter_map(|(id, tag)| match tag.parse::<SplitTag>() {
                Ok(t) => Some((id, t)),
                Err(_) => {
                    violations.push(Violation::UnknownSplitTag { dialogue_id: id, tag });
                    None
                }
            })
            .collect()
    });
    build(dialogues, raw, splits, violations)
}

fn parse_released_str(src: &str, opts: &ReleasedOptions) -> Result<Corpus, CorpusError> {
    let entries: Vec<ReleasedEntry> = serde_json::from_str(src).map_err(|e| json_error(src, e))?;
    let mut violations = Vec::new();
    let mut dialogues = Vec::with_capacity(entries.len());
    let mut raw = Vec::new();
    for (pos, (turns, instances)) in entries.into_iter().enumerate() {
        let id = format!("{}{}", opts.id_prefix, pos);
        let mut parsed = Vec::with_capacity(turns.len());
        for (t, line) in turns.iter().enumerate() {
            match line.split_once(": ") {
                Some((speaker, text)) => parsed.push((speaker.to_string(), text.to_string())),
                None => {
                    violations.push(Violation::MissingSpeakerSeparator { dialogue_id: id.clone(), turn: t + 1 });
                    parsed.push((String::new(), line.clone()));
                }
            }
        }
        for (k, inst) in instances.into_iter().enumerate() {
            raw.push(RawInstance {
                dialogue_id: id.clone(),
                instance_id: format!("{id}-{k}"),
                subject: inst.x,
                subject_class: inst.x_type,
                object: inst.y,
                object_class: inst.y_type,
                labels: inst.r,
                triggers: inst.t,
            });
        }
        dialogues.push(Dialogue::new(id, parsed));
    }
    let splits = opts
        .split
        .map(|tag| dialogues.iter().map(|d| (d.id.clone(), tag)).collect());
    // A missing separator already produced an empty-speaker turn; report it once.
    let missing: Vec<(String, usize)> = violations
        .iter()
        .filter_map(|v| match v {
            Violation::MissingSpeakerSeparator { dialogue_id, turn } => Some((dialogue_id.clone(), *turn)),
            _ => None,
        })
        .collect();
    match build(dialogues, raw, splits, violations) {
        Err(CorpusError::Validation(mut e)) => {
            e.violations.retain(|v| match v {
                Violation::EmptySpeaker { dialogue_id, turn } => {
                    !missing.iter().any(|(d, t)| d == dialogue_id && t == turn)
                }
                _ => true,
            });
            Err(e.into())
        }
        other => other,
    }
}

fn build(
    dialogues: Vec<Dialogue>,
    raw: Vec<RawInstance>,
    splits: Option<BTreeMap<String, SplitTag>>,
    mut violations: Vec<Violation>,
) -> Result<Corpus, CorpusError> {
    let instances: Vec<_> = raw.into_iter().filter_map(|r| r.resolve(&mut violations)).collect();
    match Corpus::new(dialogues, instances, splits) {
        Ok(c) if violations.is_empty() => Ok(c),
        Ok(_) => Err(ValidationError { violations }.into()),
        Err(mut e) => {
            violations.append(&mut e.violations);
            Err(ValidationError { violations }.into())
        }
    }
}

/// Writes the canonical layout: sorted keys, two-space indent, `\n` endings.
pub fn serialize_corpus(corpus: &Corpus) -> String {
    let dialogues: Vec<Value> = corpus
        .dialogues()
        .map(|d| {
            json!({
                "id": d.id,
                "turns": d.turns().iter().map(|t| json!({"speaker": t.speaker, "text": t.text})).collect::<Vec<_>>(),
            })
        })
        .collect();
    let instances: Vec<Value> = corpus
        .instances()
        .iter()
        .map(|i| {
            json!({
                "dialogue_id": i.dialogue_id,
                "instance_id": i.instance_id,
                "subject": i.subject,
                "subject_class": i.subject_class.map(|c| c.as_str()),
                "object": i.object,
                "object_class": i.object_class.map(|c| c.as_str()),
                "labels": i.labels.iter().map(|l| l.name()).collect::<Vec<_>>(),
                "triggers": i.triggers,
            })
        })
        .collect();
    let splits = corpus.splits().map(|s| {
        s.iter()
            .map(|(k, v)| (k.clone(), Value::from(v.as_str())))
            .collect::<serde_json::Map<_, _>>()
    });
    let doc = json!({
        "schema_version": CANONICAL_VERSION,
        "dialogues": dialogues,
        "instances": instances,
        "splits": splits,
    });
    let mut out = serde_json::to_string_pretty(&doc).expect("corpus serializes");
    out.push('\n');
    out
}
