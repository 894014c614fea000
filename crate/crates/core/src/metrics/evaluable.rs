//! Turn-level auxiliary functions behind the conversational metric.

use crate::corpus::{Dialogue, RelationInstance};
use crate::schema::{LabelSet, RelationId, Schema};
use crate::text;

/// Index of the turn where `x` first appears, or `m` if it never does.
///
/// A speaker label resolves to that speaker's first turn. Any other mention is
/// searched case-sensitively, at word boundaries, in `"speaker: text"` of each
/// turn.
pub fn first_appearance(d: &Dialogue, x: &str) -> usize {
    let m = d.len();
    if x.is_empty() {
        return m;
    }
    if let Some(i) = d.first_turn_of(x) {
        return i;
    }
    d.turns()
        .iter()
        .find(|t| text::contains_word(&t.rendered(), x))
        .map_or(m, |t| t.index)
}

/// Turn by which relation `r` becomes judgeable for `instance`: the first
/// appearance of its trigger for gold labels with a trigger, `m` for gold
/// labels without one, and 1 for labels outside the gold set.
pub fn relation_ready_turn(r: RelationId, instance: &RelationInstance, d: &Dialogue) -> usize {
    if !instance.labels.contains(&r) {
        return 1;
    }
    match instance.trigger_for(r) {
        Some(trigger) => first_appearance(d, trigger),
        None => d.len(),
    }
}

/// Per-relation thresholds `max(ȷ(a1), ȷ(a2), ı(r))` for one instance.
#[derive(Debug, Clone)]
pub struct Evaluability {
    m: usize,
    threshold: [usize; 38],
}

impl Evaluability {
    pub fn new(instance: &RelationInstance, d: &Dialogue) -> Self {
        let args = first_appearance(d, &instance.subject).max(first_appearance(d, &instance.object));
        let mut threshold = [usize::MAX; 38];
        for r in Schema::embedded().relations() {
            threshold[usize::from(r.id.get())] = args.max(relation_ready_turn(r.id, instance, d));
        }
        Evaluability { m: d.len(), threshold }
    }

    pub fn turns(&self) -> usize {
        self.m
    }

    /// Earliest prefix length at which `r` is evaluable.
    pub fn threshold(&self, r: RelationId) -> usize {
        self.threshold[usize::from(r.get())]
    }

    /// `E_i`: relation types evaluable from the first `i` turns.
    pub fn set(&self, i: usize) -> LabelSet {
        Schema::embedded()
            .relations()
            .iter()
            .map(|r| r.id)
            .filter(|&r| self.threshold(r) <= i)
            .collect()
    }
}

/// `E_i` for one instance.
pub fn evaluable_set(i: usize, instance: &RelationInstance, d: &Dialogue) -> LabelSet {
    Evaluability::new(instance, d).set(i)
}
