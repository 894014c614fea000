//! Corpus data model: dialogues, relation instances and split tags.
//!
//! A [`Corpus`] can only be built through [`Corpus::new`], which checks every
//! structural invariant and reports all violations at once.

mod anonymize;
mod format;
mod inverses;
mod negatives;
mod split;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::schema::{ArgClass, LabelSet, RelationId, Schema};

pub use anonymize::{anonymize, anonymize_corpus, AliasMaps, AnonymizeError, Anonymized};
pub use format::{
    parse_corpus, parse_released, serialize_corpus, CorpusError, Format, ParseError,
    ReleasedOptions, CANONICAL_VERSION,
};
pub use inverses::complete_inverses;
pub use negatives::generate_negative_candidates;
pub use split::{split_corpus, split_sizes};

/// One speaker turn. `index` is 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Turn {
    pub index: usize,
    pub speaker: String,
    pub text: String,
}

impl Turn {
    /// `"speaker: text"`, the form in which mentions are searched.
    pub fn rendered(&self) -> String {
        format!("{}: {}", self.speaker, self.text)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dialogue {
    pub id: String,
    turns: Vec<Turn>,
}

impl Dialogue {
    /// Builds a dialogue from `(speaker, text)` pairs, numbering turns from 1.
    pub fn new<S, T>(id: impl Into<String>, turns: impl IntoIterator<Item = (S, T)>) -> Self
    where
        S: Into<String>,
        T: Into<String>,
    {
        let turns = turns
            .into_iter()
            .enumerate()
            .map(|(i, (s, t))| Turn { index: i + 1, speaker: s.into(), text: t.into() })
            .collect();
        Dialogue { id: id.into(), turns }
    }

    pub fn turns(&self) -> &[Turn] {
        &self.turns
    }

    /// Turn `index` (1-based).
    pub fn turn(&self, index: usize) -> Option<&Turn> {
        index.checked_sub(1).and_then(|i| self.turns.get(i))
    }

    /// Number of turns, `m`.
    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Distinct speakers in order of first appearance.
    pub fn speakers(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.turns
            .iter()
            .map(|t| t.speaker.as_str())
            .filter(|s| seen.insert(*s))
            .collect()
    }

    pub fn is_speaker(&self, name: &str) -> bool {
        self.turns.iter().any(|t| t.speaker == name)
    }

    /// First turn spoken by `speaker`.
    pub fn first_turn_of(&self, speaker: &str) -> Option<usize> {
        self.turns.iter().find(|t| t.speaker == speaker).map(|t| t.index)
    }

    /// All turns rendered and joined by single spaces.
    pub fn rendered(&self) -> String {
        self.turns.iter().map(Turn::rendered).collect::<Vec<_>>().join(" ")
    }

    pub(crate) fn with_turns(&self, turns: Vec<Turn>) -> Dialogue {
        Dialogue { id: self.id.clone(), turns }
    }
}

/// An argument pair with its gold relation labels and per-label triggers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationInstance {
    pub dialogue_id: String,
    pub instance_id: String,
    pub subject: String,
    pub subject_class: Option<ArgClass>,
    pub object: String,
    pub object_class: Option<ArgClass>,
    /// Parallel to `triggers`; an empty trigger means "no trigger".
    pub labels: Vec<RelationId>,
    pub triggers: Vec<String>,
}

impl RelationInstance {
    pub fn label_set(&self) -> LabelSet {
        self.labels.iter().copied().collect()
    }

    /// Gold labels without `unanswerable`.
    pub fn gold_relations(&self) -> LabelSet {
        let mut set = self.label_set();
        set.remove(RelationId::UNANSWERABLE);
        set
    }

    pub fn is_unanswerable(&self) -> bool {
        self.labels.iter().all(|l| l.is_unanswerable())
    }

    /// The non-empty trigger annotated for `label`, if any.
    pub fn trigger_for(&self, label: RelationId) -> Option<&str> {
        self.labels
            .iter()
            .position(|&l| l == label)
            .and_then(|i| self.triggers.get(i))
            .map(String::as_str)
            .filter(|t| !t.is_empty())
    }

    /// `(label, trigger)` triples of this instance.
    pub fn triples(&self) -> impl Iterator<Item = (RelationId, &str)> {
        self.labels.iter().copied().zip(self.triggers.iter().map(String::as_str))
    }

    pub fn key(&self) -> InstanceKey {
        InstanceKey::new(&self.dialogue_id, &self.instance_id)
    }
}

/// Corpus-wide identity of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstanceKey {
    pub dialogue_id: String,
    pub instance_id: String,
}

impl InstanceKey {
    pub fn new(dialogue_id: &str, instance_id: &str) -> Self {
        InstanceKey { dialogue_id: dialogue_id.to_string(), instance_id: instance_id.to_string() }
    }
}

impl fmt::Display for InstanceKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.dialogue_id, self.instance_id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Dev,
    Test,
}

impl SplitTag {
    pub const ALL: [SplitTag; 3] = [SplitTag::Train, SplitTag::Dev, SplitTag::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitTag::Train => "train",
            SplitTag::Dev => "dev",
            SplitTag::Test => "test",
        }
    }
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SplitTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SplitTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown split tag `{s}` (expected train, dev or test)"))
    }
}

/// One violated corpus invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptyDialogue { dialogue_id: String },
    DuplicateDialogue { dialogue_id: String },
    EmptySpeaker { dialogue_id: String, turn: usize },
    MissingSpeakerSeparator { dialogue_id: String, turn: usize },
    UnknownLabel { instance: String, label: String },
    UnknownClass { instance: String, class: String },
    EmptyArgument { instance: String },
    NoLabels { instance: String },
    ArityMismatch { instance: String, labels: usize, triggers: usize },
    DuplicateLabel { instance: String, label: String },
    UnanswerableWithRelations { instance: String },
    DanglingDialogue { instance: String, dialogue_id: String },
    DuplicateInstance { instance: String },
    UnknownSplitTag { dialogue_id: String, tag: String },
    SplitForUnknownDialogue { dialogue_id: String },
    DialogueWithoutSplit { dialogue_id: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use Violation::*;
        match self {
            EmptyDialogue { dialogue_id } => write!(f, "dialogue {dialogue_id}: no turns"),
            DuplicateDialogue { dialogue_id } => write!(f, "dialogue {dialogue_id}: duplicate id"),
            EmptySpeaker { dialogue_id, turn } => {
                write!(f, "dialogue {dialogue_id}, turn {turn}: empty speaker label")
            }
            MissingSpeakerSeparator { dialogue_id, turn } => {
                write!(f, "dialogue {dialogue_id}, turn {turn}: no `: ` after the speaker label")
            }
            UnknownLabel { instance, label } => {
                write!(f, "instance {instance}: unknown label `{label}`")
            }
            UnknownClass { instance, class } => {
                write!(f, "instance {instance}: unknown argument class `{class}`")
            }
            EmptyArgument { instance } => write!(f, "instance {instance}: empty argument text"),
            NoLabels { instance } => write!(f, "instance {instance}: no labels"),
            ArityMismatch { instance, labels, triggers } => write!(
                f,
                "instance {instance}: {labels} labels but {triggers} triggers"
            ),
            DuplicateLabel { instance, label } => {
                write!(f, "instance {instance}: label `{label}` repeated")
            }
            UnanswerableWithRelations { instance } => {
                write!(f, "instance {instance}: `unanswerable` combined with other labels")
            }
            DanglingDialogue { instance, dialogue_id } => {
                write!(f, "instance {instance}: dialogue `{dialogue_id}` does not exist")
            }
            DuplicateInstance { instance } => write!(f, "instance {instance}: duplicate id"),
            UnknownSplitTag { dialogue_id, tag } => {
                write!(f, "split of {dialogue_id}: unknown tag `{tag}`")
            }
            SplitForUnknownDialogue { dialogue_id } => {
                write!(f, "split tag for unknown dialogue `{dialogue_id}`")
            }
            DialogueWithoutSplit { dialogue_id } => {
                write!(f, "dialogue {dialogue_id}: no split tag")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    pub violations: Vec<Violation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} invariant violation(s)", self.violations.len())?;
        for v in &self.violations {
            write!(f, "\n  {v}")?;
        }
        Ok(())
    }
}

/// Relation instance with labels still as text, as read from a file.
#[derive(Debug, Clone, Default)]
pub(crate) struct RawInstance {
    pub dialogue_id: String,
    pub instance_id: String,
    pub subject: String,
    pub subject_class: Option<String>,
    pub object: String,
    pub object_class: Option<String>,
    pub labels: Vec<String>,
    pub triggers: Vec<String>,
}

impl RawInstance {
    /// Resolves labels and classes, appending any problems to `out`.
    pub(crate) fn resolve(self, out: &mut Vec<Violation>) -> Option<RelationInstance> {
        let schema = Schema::embedded();
        let name = format!("{}/{}", self.dialogue_id, self.instance_id);
        let before = out.len();
        let mut class = |c: Option<String>| {
            c.and_then(|c| match c.parse::<ArgClass>() {
                Ok(k) => Some(k),
                Err(_) => {
                    out.push(Violation::UnknownClass { instance: name.clone(), class: c });
                    None
                }
            })
        };
        let subject_class = class(self.subject_class);
        let object_class = class(self.object_class);
        let mut labels = Vec::with_capacity(self.labels.len());
        for l in &self.labels {
            match schema.id_of(l) {
                Ok(id) => labels.push(id),
                Err(_) => out.push(Violation::UnknownLabel { instance: name.clone(), label: l.clone() }),
            }
        }
        (out.len() == before).then_some(RelationInstance {
            dialogue_id: self.dialogue_id,
            instance_id: self.instance_id,
            subject: self.subject,
            subject_class,
            object: self.object,
            object_class,
            labels,
            triggers: self.triggers,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    dialogues: IndexMap<String, Dialogue>,
    instances: Vec<RelationInstance>,
    splits: Option<BTreeMap<String, SplitTag>>,
}

impl Corpus {
    /// Builds a corpus, checking every invariant.
    pub fn new(
        dialogues: Vec<Dialogue>,
        instances: Vec<RelationInstance>,
        splits: Option<BTreeMap<String, SplitTag>>,
    ) -> Result<Corpus, ValidationError> {
        let mut violations = Vec::new();
        let mut map = IndexMap::with_capacity(dialogues.len());
        for d in dialogues {
            check_dialogue(&d, &mut violations);
            if map.contains_key(&d.id) {
                violations.push(Violation::DuplicateDialogue { dialogue_id: d.id.clone() });
            } else {
                map.insert(d.id.clone(), d);
            }
        }
        let mut seen = HashSet::new();
        for inst in &instances {
            check_instance(inst, &map, &mut violations);
            if !seen.insert(inst.key()) {
                violations.push(Violation::DuplicateInstance { instance: inst.key().to_string() });
            }
        }
        if let Some(splits) = &splits {
            for id in splits.keys() {
                if !map.contains_key(id) {
                    violations.push(Violation::SplitForUnknownDialogue { dialogue_id: id.clone() });
                }
            }
            for id in map.keys() {
                if !splits.contains_key(id) {
                    violations.push(Violation::DialogueWithoutSplit { dialogue_id: id.clone() });
                }
            }
        }
        if violations.is_empty() {
            Ok(Corpus { dialogues: map, instances, splits })
        } else {
            Err(ValidationError { violations })
        }
    }

    pub fn empty() -> Corpus {
        Corpus { dialogues: IndexMap::new(), instances: Vec::new(), splits: None }
    }

    pub fn dialogues(&self) -> impl ExactSizeIterator<Item = &Dialogue> {
        self.dialogues.values()
    }

    pub fn dialogue(&self, id: &str) -> Option<&Dialogue> {
        self.dialogues.get(id)
    }

    pub fn num_dialogues(&self) -> usize {
        self.dialogues.len()
    }

    pub fn instances(&self) -> &[RelationInstance] {
        &self.instances
    }

    /// Number of `(instance, label)` triples, counting `unanswerable`.
    pub fn num_triples(&self) -> usize {
        self.instances.iter().map(|i| i.labels.len()).sum()
    }

    /// Instances paired with their dialogue.
    pub fn scored_pairs(&self) -> impl Iterator<Item = (&RelationInstance, &Dialogue)> {
        self.instances.iter().map(|i| (i, &self.dialogues[&i.dialogue_id]))
    }

    pub fn splits(&self) -> Option<&BTreeMap<String, SplitTag>> {
        self.splits.as_ref()
    }

    pub fn split_of(&self, dialogue_id: &str) -> Option<SplitTag> {
        self.splits.as_ref().and_then(|s| s.get(dialogue_id).copied())
    }

    /// The dialogues tagged `tag` and their instances. Split tags are dropped.
    pub fn select_split(&self, tag: SplitTag) -> Corpus {
        let keep = |id: &str| self.split_of(id) == Some(tag);
        Corpus {
            dialogues: self
                .dialogues
                .iter()
                .filter(|(id, _)| keep(id))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
            instances: self.instances.iter().filter(|i| keep(&i.dialogue_id)).cloned().collect(),
            splits: None,
        }
    }

    /// Replaces the instance sequence, revalidating.
    pub fn with_instances(self, instances: Vec<RelationInstance>) -> Result<Corpus, ValidationError> {
        Corpus::new(self.dialogues.into_values().collect(), instances, self.splits)
    }

    pub fn with_splits(mut self, splits: Option<BTreeMap<String, SplitTag>>) -> Result<Corpus, ValidationError> {
        self.splits = splits;
        let Corpus { dialogues, instances, splits } = self;
        Corpus::new(dialogues.into_values().collect(), instances, splits)
    }

    /// Concatenates corpora. Dialogue ids must be disjoint; split tags are
    /// kept only if every part carries them.
    pub fn merge(parts: Vec<Corpus>) -> Result<Corpus, ValidationError> {
        let all_split = parts.iter().all(|p| p.splits.is_some());
        let mut dialogues = Vec::new();
        let mut instances = Vec::new();
        let mut splits = BTreeMap::new();
        for p in parts {
            if let Some(s) = p.splits {
                splits.extend(s);
            }
            dialogues.extend(p.dialogues.into_values());
            instances.extend(p.instances);
        }
        Corpus::new(dialogues, instances, all_split.then_some(splits))
    }

    pub fn into_parts(self) -> (Vec<Dialogue>, Vec<RelationInstance>, Option<BTreeMap<String, SplitTag>>) {
        (self.dialogues.into_values().collect(), self.instances, self.splits)
    }

    /// Instances grouped by dialogue id (dialogue order, instance order kept).
    pub fn instances_by_dialogue(&self) -> IndexMap<&str, Vec<&RelationInstance>> {
        let mut out: IndexMap<&str, Vec<&RelationInstance>> =
            self.dialogues.keys().map(|k| (k.as_str(), Vec::new())).collect();
        for i in &self.instances {
            out.entry(i.dialogue_id.as_str()).or_default().push(i);
        }
        out
    }

    pub(crate) fn instance_index(&self) -> HashMap<InstanceKey, usize> {
        self.instances.iter().enumerate().map(|(i, inst)| (inst.key(), i)).collect()
    }
}

fn check_dialogue(d: &Dialogue, out: &mut Vec<Violation>) {
    if d.turns.is_empty() {
        out.push(Violation::EmptyDialogue { dialogue_id: d.id.clone() });
    }
    for (pos, t) in d.turns.iter().enumerate() {
        debug_assert_eq!(t.index, pos + 1);
        if t.speaker.trim().is_empty() {
            out.push(Violation::EmptySpeaker { dialogue_id: d.id.clone(), turn: t.index });
        }
    }
}

fn check_instance(inst: &RelationInstance, dialogues: &IndexMap<String, Dialogue>, out: &mut Vec<Violation>) {
    let name = inst.key().to_string();
    if !dialogues.contains_key(&inst.dialogue_id) {
        out.push(Violation::DanglingDialogue {
            instance: name.clone(),
            dialogue_id: inst.dialogue_id.clone(),
        });
    }
    if inst.subject.is_empty() || inst.object.is_empty() {
        out.push(Violation::EmptyArgument { instance: name.clone() });
    }
    if inst.labels.is_empty() {
        out.push(Violation::NoLabels { instance: name.clone() });
    }
    if inst.labels.len() != inst.triggers.len() {
        out.push(Violation::ArityMismatch {
            instance: name.clone(),
            labels: inst.labels.len(),
            triggers: inst.triggers.len(),
        });
    }
    let mut seen = LabelSet::EMPTY;
    for &l in &inst.labels {
        if !seen.insert(l) {
            out.push(Violation::DuplicateLabel { instance: name.clone(), label: l.name().to_string() });
        }
    }
    if seen.contains(RelationId::UNANSWERABLE) && seen.len() > 1 {
        out.push(Violation::UnanswerableWithRelations { instance: name });
    }
}
