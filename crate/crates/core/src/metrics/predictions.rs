//! Prediction records and their JSON Lines encoding.
//!
//! Standard: `{"dialogue_id", "instance_id", "relations": [...]}` per instance.
//! Conversational: the same plus `"prefix_len"`, one line per prefix length.
//! `unanswerable` is not a valid prediction; abstaining is the empty list.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use super::MetricsError;
use crate::corpus::InstanceKey;
use crate::schema::{LabelSet, Schema};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StandardPrediction {
    pub dialogue_id: String,
    pub instance_id: String,
    pub labels: LabelSet,
}

impl StandardPrediction {
    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(&self.dialogue_id, &self.instance_id)
    }
}

/// Predicted label sets `O_i` for every prefix length `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConversationalPrediction {
    pub dialogue_id: String,
    pub instance_id: String,
    pub per_prefix: BTreeMap<usize, LabelSet>,
}

impl ConversationalPrediction {
    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(&self.dialogue_id, &self.instance_id)
    }

    /// The same set at every prefix `1..=m`.
    pub fn constant(dialogue_id: &str, instance_id: &str, m: usize, labels: LabelSet) -> Self {
        ConversationalPrediction {
            dialogue_id: dialogue_id.to_string(),
            instance_id: instance_id.to_string(),
            per_prefix: (1..=m).map(|i| (i, labels)).collect(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Record {
    dialogue_id: String,
    instance_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    prefix_len: Option<usize>,
    relations: Vec<String>,
}

fn labels_from(names: &[String], line: usize, key: &InstanceKey) -> Result<LabelSet, MetricsError> {
    let schema = Schema::embedded();
    let mut set = LabelSet::EMPTY;
    for n in names {
        let id = schema
            .id_of(n)
            .map_err(|_| MetricsError::UnknownLabel { line, label: n.clone() })?;
        if id.is_unanswerable() {
            return Err(MetricsError::UnanswerablePredicted { key: key.clone() });
        }
        set.insert(id);
    }
    Ok(set)
}

fn names(set: LabelSet) -> Vec<String> {
    set.iter().map(|id| id.name().to_string()).collect()
}

fn records<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, Record), MetricsError>> {
    reader.lines().enumerate().filter_map(|(n, line)| {
        let line_no = n + 1;
        match line {
            Err(e) => Some(Err(MetricsError::Io(e.to_string()))),
            Ok(l) if l.trim().is_empty() => None,
            Ok(l) => Some(
                serde_json::from_str::<Record>(&l)
                    .map(|r| (line_no, r))
                    .map_err(|e| MetricsError::Jsonl { line: line_no, message: e.to_string() }),
            ),
        }
    })
}

pub fn read_standard_predictions<R: BufRead>(reader: R) -> Result<Vec<StandardPrediction>, MetricsError> {
    records(reader)
        .map(|r| {
            let (line, rec) = r?;
            if rec.prefix_len.is_some() {
                return Err(MetricsError::ModeMismatch { line, expected: "standard" });
            }
            let key = InstanceKey::new(&rec.dialogue_id, &rec.instance_id);
            Ok(StandardPrediction {
                labels: labels_from(&rec.relations, line, &key)?,
                dialogue_id: rec.dialogue_id,
                instance_id: rec.instance_id,
            })
        })
        .collect()
}

/// Groups per-prefix lines by instance, in order of first appearance.
pub fn read_conversational_predictions<R: BufRead>(
    reader: R,
) -> Result<Vec<ConversationalPrediction>, MetricsError> {
    let mut grouped: IndexMap<InstanceKey, BTreeMap<usize, LabelSet>> = IndexMap::new();
    for r in records(reader) {
        let (line, rec) = r?;
        let Some(prefix) = rec.prefix_len else {
            return Err(MetricsError::ModeMismatch { line, expected: "conversational" });
        };
        let key = InstanceKey::new(&rec.dialogue_id, &rec.instance_id);
        let labels = labels_from(&rec.relations, line, &key)?;
        if grouped.entry(key.clone()).or_default().insert(prefix, labels).is_some() {
            return Err(MetricsError::DuplicatePrediction { key, prefix: Some(prefix) });
        }
    }
    Ok(grouped
        .into_iter()
        .map(|(k, per_prefix)| ConversationalPrediction {
            dialogue_id: k.dialogue_id,
            instance_id: k.instance_id,
            per_prefix,
        })
        .collect())
}

fn write_record<W: Write>(w: &mut W, rec: &Record) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, rec)?;
    w.write_all(b"\n")
}

pub fn write_standard_predictions<W: Write>(mut w: W, preds: &[StandardPrediction]) -> std::io::Result<()> {
    for p in preds {
        let rec = Record {
            dialogue_id: p.dialogue_id.clone(),
            instance_id: p.instance_id.clone(),
            prefix_len: None,
            relations: names(p.labels),
        };
        write_record(&mut w, &rec)?;
    }
    Ok(())
}

pub fn write_conversational_predictions<W: Write>(
    mut w: W,
    preds: &[ConversationalPrediction],
) -> std::io::Result<()> {
    for p in preds {
        for (&i, &labels) in &p.per_prefix {
            let rec = Record {
                dialogue_id: p.dialogue_id.clone(),
                instance_id: p.instance_id.clone(),
                prefix_len: Some(i),
                relations: names(labels),
            };
            write_record(&mut w, &rec)?;
        }
    }
    Ok(())
}
