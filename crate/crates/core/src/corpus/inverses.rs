use std::collections::HashMap;

use super::RelationInstance;
use crate::schema::{RelationId, Schema};

type PairKey = (String, String, String);

fn pair_key(dialogue: &str, subject: &str, object: &str) -> PairKey {
    (dialogue.to_string(), subject.to_string(), object.to_string())
}

/// Adds the mirror triple `(o, inverse(r), s)` for every invertible `(s, r, o)`
/// that lacks one, carrying the same trigger.
///
/// Mirror labels for a pair that already has an instance are appended to that
/// instance (an `unanswerable` mirror instance is relabeled); otherwise a new
/// instance `<source id>-inv` is appended after the input.
pub fn complete_inverses(instances: &[RelationInstance]) -> Vec<RelationInstance> {
    let schema = Schema::embedded();
    let mut out: Vec<RelationInstance> = instances.to_vec();
    let mut index: HashMap<PairKey, usize> = HashMap::new();
    for (pos, inst) in out.iter().enumerate() {
        index.entry(pair_key(&inst.dialogue_id, &inst.subject, &inst.object)).or_insert(pos);
    }
    for inst in instances {
        for (label, trigger) in inst.triples() {
            let Some(inv) = schema.inverse(label) else { continue };
            let key = pair_key(&inst.dialogue_id, &inst.object, &inst.subject);
            match index.get(&key) {
                Some(&at) => add_label(&mut out[at], inv, trigger),
                None => {
                    let mirror = RelationInstance {
                        dialogue_id: inst.dialogue_id.clone(),
                        instance_id: format!("{}-inv", inst.instance_id),
                        subject: inst.object.clone(),
                        subject_class: inst.object_class,
                        object: inst.subject.clone(),
                        object_class: inst.subject_class,
                        labels: vec![inv],
                        triggers: vec![trigger.to_string()],
                    };
                    index.insert(key, out.len());
                    out.push(mirror);
                }
            }
        }
    }
    out
}

fn add_label(target: &mut RelationInstance, label: RelationId, trigger: &str) {
    if target.labels.contains(&label) {
        return;
    }
    if target.is_unanswerable() {
        target.labels.clear();
        target.triggers.clear();
    }
    target.labels.push(label);
    target.triggers.push(trigger.to_string());
}
