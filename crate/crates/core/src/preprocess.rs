//! Model input sequences built from a dialogue and an argument pair.
//!
//! Every [`ModelInput`] is a flat sequence of whitespace tokens joined by
//! single spaces, starting with `[CLS]` and ending with `[SEP]`. The dialogue
//! part always starts right after `[CLS]`. Inserted argument markers are
//! separate tokens; a substituted speaker field keeps the `:` that follows
//! every speaker field (`[S1]: Hey!`).

use std::collections::BTreeSet;
use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dialogue, RelationInstance, Turn};
use crate::schema::ArgClass;
use crate::text;

pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";
pub const S1: &str = "[S1]";
pub const S2: &str = "[S2]";

/// Fixed marker vocabulary. `[SUBJ-*]` and `[OBJ-*]` take an argument class.
pub fn marker_vocabulary() -> Vec<String> {
    let mut v: Vec<String> = ["[CLS]", "[SEP]", "[S1]", "[S2]", "[SUBJ]", "[OBJ]", "[A1]", "[/A1]", "[A2]", "[/A2]"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    v.extend(ArgClass::ALL.iter().map(|c| type_token(*c)));
    for prefix in ["SUBJ", "OBJ"] {
        v.extend(ArgClass::ALL.iter().map(|c| format!("[{prefix}-{}]", c.as_str())));
    }
    v
}

fn type_token(c: ArgClass) -> String {
    format!("[{}]", c.as_str())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InputVariant {
    Base,
    Speaker,
    Typed,
    SpeakerTyped,
    MentionReplaced,
    MentionReplacedArgs,
    SubjObj,
    SubjObjArgs,
    BoundaryMarked,
    TriggerAppended,
}

impl InputVariant {
    pub const ALL: [InputVariant; 10] = [
        InputVariant::Base,
        InputVariant::Speaker,
        InputVariant::Typed,
        InputVariant::SpeakerTyped,
        InputVariant::MentionReplaced,
        InputVariant::MentionReplacedArgs,
        InputVariant::SubjObj,
        InputVariant::SubjObjArgs,
        InputVariant::BoundaryMarked,
        InputVariant::TriggerAppended,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InputVariant::Base => "BASE",
            InputVariant::Speaker => "SPEAKER",
            InputVariant::Typed => "TYPED",
            InputVariant::SpeakerTyped => "SPEAKER_TYPED",
            InputVariant::MentionReplaced => "MENTION_REPLACED",
            InputVariant::MentionReplacedArgs => "MENTION_REPLACED_ARGS",
            InputVariant::SubjObj => "SUBJ_OBJ",
            InputVariant::SubjObjArgs => "SUBJ_OBJ_ARGS",
            InputVariant::BoundaryMarked => "BOUNDARY_MARKED",
            InputVariant::TriggerAppended => "TRIGGER_APPENDED",
        }
    }

    /// Whether the argument pair is repeated after the dialogue.
    pub fn has_argument_tail(self) -> bool {
        !matches!(self, InputVariant::MentionReplaced | InputVariant::SubjObj | InputVariant::BoundaryMarked)
    }

    fn needs_classes(self) -> bool {
        matches!(
            self,
            InputVariant::Typed
                | InputVariant::SpeakerTyped
                | InputVariant::MentionReplaced
                | InputVariant::MentionReplacedArgs
        )
    }
}

impl fmt::Display for InputVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Accepts `SPEAKER_TYPED`, `speaker_typed` and `speaker-typed`.
impl FromStr for InputVariant {
    type Err = PreprocessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        InputVariant::ALL
            .into_iter()
            .find(|v| v.as_str() == norm)
            .ok_or_else(|| PreprocessError::UnknownVariant(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PreprocessError {
    #[error("unknown input variant `{0}`")]
    UnknownVariant(String),
    #[error("{instance}: {variant} needs the {argument} class")]
    MissingClass { instance: String, variant: InputVariant, argument: &'static str },
    #[error("{instance}: TRIGGER_APPENDED needs at least one non-empty trigger")]
    MissingTrigger { instance: String },
    #[error("{instance}: belongs to dialogue `{expected}`, got `{got}`")]
    DialogueMismatch { instance: String, expected: String, got: String },
    #[error("budget {budget} is below the {required} tokens outside the dialogue")]
    BudgetTooSmall { budget: usize, required: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelInput {
    pub text: String,
    /// Distinct marker tokens present in `text`.
    pub markers_used: BTreeSet<String>,
    /// Token index range of the dialogue part.
    pub dialogue: Range<usize>,
}

impl ModelInput {
    fn from_parts(dialogue: Vec<String>, tail: Vec<String>, markers_used: BTreeSet<String>) -> Self {
        let n = dialogue.len();
        let mut tokens = Vec::with_capacity(n + tail.len() + 1);
        tokens.push(CLS.to_string());
        tokens.extend(dialogue);
        tokens.extend(tail);
        ModelInput { text: tokens.join(" "), markers_used, dialogue: 1..1 + n }
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        text::tokens(&self.text)
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens().count()
    }

    /// Number of occurrences of `marker` in the text.
    pub fn count(&self, marker: &str) -> usize {
        self.text.matches(marker).count()
    }
}

/// One mention: turn index and byte span in that turn's `"speaker: text"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Mention {
    pub turn: usize,
    pub span: Range<usize>,
}

/// Word-boundary, case-sensitive, non-overlapping occurrences of `a` in the
/// rendered turns, sorted by (turn, offset). A speaker label is matched in
/// the speaker field of each of its turns since that field starts the
/// rendered turn.
pub fn find_mentions(d: &Dialogue, a: &str) -> Vec<Mention> {
    d.turns()
        .iter()
        .flat_map(|t| {
            text::find_all(&t.rendered(), &[a])
                .into_iter()
                .map(move |m| Mention { turn: t.index, span: m.span })
        })
        .collect()
}

fn push_tokens(out: &mut Vec<String>, s: &str) {
    out.extend(text::tokens(s).map(str::to_string));
}

/// Turns with an optional speaker-field substitution.
fn render_turns(d: &Dialogue, speaker_field: impl Fn(&Turn) -> Option<&'static str>) -> (Vec<String>, BTreeSet<String>) {
    let mut tokens = Vec::new();
    let mut used = BTreeSet::new();
    for t in d.turns() {
        match speaker_field(t) {
            Some(tok) => {
                used.insert(tok.to_string());
                tokens.push(format!("{tok}:"));
            }
            None => push_tokens(&mut tokens, &format!("{}:", t.speaker)),
        }
        push_tokens(&mut tokens, &t.text);
    }
    (tokens, used)
}

/// Turns with every joint match of the arguments rewritten by `rewrite`,
/// which receives the argument index (0 or 1) and the matched text.
fn rewrite_mentions(
    d: &Dialogue,
    args: &[&str],
    mut rewrite: impl FnMut(usize, &str, &mut Vec<String>),
) -> Vec<String> {
    let mut tokens = Vec::new();
    for t in d.turns() {
        let rendered = t.rendered();
        let mut last = 0;
        for m in text::find_all(&rendered, args) {
            push_tokens(&mut tokens, &rendered[last..m.span.start]);
            rewrite(m.needle, &rendered[m.span.clone()], &mut tokens);
            last = m.span.end;
        }
        push_tokens(&mut tokens, &rendered[last..]);
    }
    tokens
}

fn class_of(
    instance: &RelationInstance,
    variant: InputVariant,
    argument: &'static str,
    c: Option<ArgClass>,
) -> Result<ArgClass, PreprocessError> {
    c.ok_or_else(|| PreprocessError::MissingClass { instance: instance.instance_id.clone(), variant, argument })
}

pub fn build_input(variant: InputVariant, d: &Dialogue, instance: &RelationInstance) -> Result<ModelInput, PreprocessError> {
    if instance.dialogue_id != d.id {
        return Err(PreprocessError::DialogueMismatch {
            instance: instance.instance_id.clone(),
            expected: instance.dialogue_id.clone(),
            got: d.id.clone(),
        });
    }
    let (a1, a2) = (instance.subject.as_str(), instance.object.as_str());
    let classes = if variant.needs_classes() {
        Some((
            class_of(instance, variant, "subject", instance.subject_class)?,
            class_of(instance, variant, "object", instance.object_class)?,
        ))
    } else {
        None
    };
    // Identical arguments collapse to a single needle matched as `a1`.
    let args: Vec<&str> = if a1 == a2 { vec![a1] } else { vec![a1, a2] };
    let mut used = BTreeSet::from([CLS.to_string(), SEP.to_string()]);

    let speaker = matches!(variant, InputVariant::Speaker | InputVariant::SpeakerTyped);
    let dialogue = match variant {
        InputVariant::Speaker | InputVariant::SpeakerTyped => {
            let (tokens, u) = render_turns(d, |t| {
                if t.speaker == a1 {
                    Some(S1)
                } else if t.speaker == a2 {
                    Some(S2)
                } else {
                    None
                }
            });
            used.extend(u);
            tokens
        }
        InputVariant::MentionReplaced | InputVariant::MentionReplacedArgs => {
            let (c1, c2) = classes.expect("classes checked");
            let marks = [format!("[SUBJ-{}]", c1.as_str()), format!("[OBJ-{}]", c2.as_str())];
            rewrite_mentions(d, &args, |k, _, out| {
                used.insert(marks[k].clone());
                out.push(marks[k].clone());
            })
        }
        InputVariant::SubjObj | InputVariant::SubjObjArgs => {
            let marks = ["[SUBJ]", "[OBJ]"];
            rewrite_mentions(d, &args, |k, _, out| {
                used.insert(marks[k].to_string());
                out.push(marks[k].to_string());
            })
        }
        InputVariant::BoundaryMarked => {
            let marks = [("[A1]", "[/A1]"), ("[A2]", "[/A2]")];
            rewrite_mentions(d, &args, |k, matched, out| {
                let (open, close) = marks[k];
                used.insert(open.to_string());
                used.insert(close.to_string());
                out.push(open.to_string());
                push_tokens(out, matched);
                out.push(close.to_string());
            })
        }
        InputVariant::Base | InputVariant::Typed | InputVariant::TriggerAppended => render_turns(d, |_| None).0,
    };

    let mut tail = vec![SEP.to_string()];
    if variant.has_argument_tail() {
        let mut shown = |a: &str, tok: &'static str| {
            if speaker && d.is_speaker(a) {
                used.insert(tok.to_string());
                vec![tok.to_string()]
            } else {
                text::tokens(a).map(str::to_string).collect()
            }
        };
        let hat1 = shown(a1, S1);
        let hat2 = if a1 == a2 { hat1.clone() } else { shown(a2, S2) };
        let typed = matches!(variant, InputVariant::Typed | InputVariant::SpeakerTyped);
        for (hat, class) in [(hat1, classes.map(|c| c.0)), (hat2, classes.map(|c| c.1))] {
            if let (true, Some(c)) = (typed, class) {
                used.insert(type_token(c));
                tail.push(type_token(c));
            }
            tail.extend(hat);
            tail.push(SEP.to_string());
        }
        if variant == InputVariant::TriggerAppended {
            let mut seen = BTreeSet::new();
            let triggers: Vec<&str> = instance
                .triggers
                .iter()
                .map(|t| t.trim())
                .filter(|t| !t.is_empty() && seen.insert(*t))
                .collect();
            if triggers.is_empty() {
                return Err(PreprocessError::MissingTrigger { instance: instance.instance_id.clone() });
            }
            for t in triggers {
                push_tokens(&mut tail, t);
                tail.push(SEP.to_string());
            }
        }
    }
    Ok(ModelInput::from_parts(dialogue, tail, used))
}

/// Drops trailing dialogue tokens until at most `budget` whitespace tokens
/// remain. A cut never leaves an `[A1]`/`[A2]` span without its closing
/// marker.
pub fn truncate(input: &ModelInput, budget: usize) -> Result<ModelInput, PreprocessError> {
    let tokens: Vec<&str> = input.tokens().collect();
    if tokens.len() <= budget {
        return Ok(input.clone());
    }
    let d = input.dialogue.clone();
    let required = tokens.len() - d.len();
    if budget < required {
        return Err(PreprocessError::BudgetTooSmall { budget, required });
    }
    let mut keep = budget - required;
    let mut open: Option<usize> = None;
    for (k, tok) in tokens[d.start..d.start + keep].iter().enumerate() {
        match *tok {
            "[A1]" | "[A2]" => open = Some(k),
            "[/A1]" | "[/A2]" => open = None,
            _ => {}
        }
    }
    if let Some(k) = open {
        keep = k;
    }
    let kept: Vec<&str> = tokens[..d.start + keep].iter().chain(&tokens[d.end..]).copied().collect();
    let text = kept.join(" ");
    let markers_used = input.markers_used.iter().filter(|m| text.contains(m.as_str())).cloned().collect();
    Ok(ModelInput { text, markers_used, dialogue: d.start..d.start + keep })
}
