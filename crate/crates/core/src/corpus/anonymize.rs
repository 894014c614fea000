use indexmap::IndexMap;
use thiserror::Error;

use super::{Corpus, Dialogue, RelationInstance, Turn, ValidationError};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnonymizeError {
    #[error("speaker `{name}` already looks like the alias assigned to `{other}`")]
    AliasCollision { name: String, other: String },
    #[error("{dialogue}: {source}")]
    InDialogue {
        dialogue: String,
        #[source]
        source: Box<AnonymizeError>,
    },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Anonymized {
    pub dialogue: Dialogue,
    pub instances: Vec<RelationInstance>,
    /// Original speaker label to alias, in order of first appearance.
    pub aliases: IndexMap<String, String>,
}

fn alias(k: usize) -> String {
    format!("Speaker {k}")
}

fn is_alias(label: &str) -> bool {
    label
        .strip_prefix("Speaker ")
        .is_some_and(|n| !n.is_empty() && n.bytes().all(|b| b.is_ascii_digit()) && !n.starts_with('0'))
}

/// Renames speakers to `Speaker 1`, `Speaker 2`, ... by first turn, and
/// rewrites whole-word occurrences of each original label (and of its first
/// token, when that token is unambiguous) in turn texts and in instance
/// arguments and triggers.
pub fn anonymize(d: &Dialogue, instances: &[RelationInstance]) -> Result<Anonymized, AnonymizeError> {
    let speakers = d.speakers();
    let aliases: IndexMap<String, String> = speakers
        .iter()
        .enumerate()
        .map(|(k, s)| (s.to_string(), alias(k + 1)))
        .collect();
    for (name, a) in &aliases {
        if let Some((other, _)) = aliases.iter().find(|(o, oa)| *o == a && *oa != a) {
            debug_assert_ne!(other, name);
            return Err(AnonymizeError::AliasCollision { name: other.clone(), other: name.clone() });
        }
    }

    let mut needles: Vec<String> = Vec::new();
    let mut replacements: Vec<String> = Vec::new();
    for (name, a) in &aliases {
        needles.push(name.clone());
        replacements.push(a.clone());
    }
    for (name, a) in &aliases {
        if is_alias(name) {
            continue;
        }
        let mut toks = name.split_whitespace();
        let (Some(first), Some(_)) = (toks.next(), toks.next()) else { continue };
        let clashes = aliases.keys().any(|other| {
            other != name && (other == first || other.split_whitespace().next() == Some(first))
        });
        if !clashes {
            needles.push(first.to_string());
            replacements.push(a.clone());
        }
    }
    let needles: Vec<&str> = needles.iter().map(String::as_str).collect();
    let replacements: Vec<&str> = replacements.iter().map(String::as_str).collect();
    let rewrite = |s: &str| text::replace_all(s, &needles, &replacements);

    let turns = d
        .turns()
        .iter()
        .map(|t| Turn { index: t.index, speaker: aliases[&t.speaker].clone(), text: rewrite(&t.text) })
        .collect();
    let instances = instances
        .iter()
        .map(|i| RelationInstance {
            subject: rewrite(&i.subject),
            object: rewrite(&i.object),
            triggers: i.triggers.iter().map(|t| rewrite(t)).collect(),
            ..i.clone()
        })
        .collect();
    Ok(Anonymized { dialogue: d.with_turns(turns), instances, aliases })
}

/// Dialogue id to that dialogue's alias map.
pub type AliasMaps = IndexMap<String, IndexMap<String, String>>;

/// Anonymizes every dialogue of a corpus. Returns the new corpus and the
/// alias map of each dialogue.
pub fn anonymize_corpus(c: &Corpus) -> Result<(Corpus, AliasMaps), AnonymizeError> {
    let by_dialogue = c.instances_by_dialogue();
    let mut dialogues = Vec::with_capacity(c.num_dialogues());
    let mut instances = Vec::with_capacity(c.instances().len());
    let mut maps = IndexMap::new();
    for d in c.dialogues() {
        let own: Vec<RelationInstance> =
            by_dialogue.get(d.id.as_str()).map(|v| v.iter().map(|i| (*i).clone()).collect()).unwrap_or_default();
        let a = anonymize(d, &own)
            .map_err(|e| AnonymizeError::InDialogue { dialogue: d.id.clone(), source: Box::new(e) })?;
        dialogues.push(a.dialogue);
        instances.extend(a.instances);
        maps.insert(d.id.clone(), a.aliases);
    }
    Ok((Corpus::new(dialogues, instances, c.splits().cloned())?, maps))
}
