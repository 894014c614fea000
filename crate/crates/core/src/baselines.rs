//! Majority baseline: the most frequent label of the argument pair in
//! training, falling back to the most frequent label overall.

use std::collections::BTreeMap;
use std::str::FromStr;

use thiserror::Error;

use crate::corpus::{Corpus, Dialogue, RelationInstance};
use crate::metrics::{ConversationalPrediction, StandardPrediction};
use crate::schema::{LabelSet, RelationId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BaselineError {
    #[error("training corpus has no labelled instances")]
    EmptyTrainingSet,
    #[error("unknown prediction mode `{0}` (expected standard or conversational)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredictionMode {
    Standard,
    Conversational,
}

impl FromStr for PredictionMode {
    type Err = BaselineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "standard" => Ok(PredictionMode::Standard),
            "conversational" => Ok(PredictionMode::Conversational),
            _ => Err(BaselineError::UnknownMode(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Prediction {
    Standard(StandardPrediction),
    Conversational(ConversationalPrediction),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MajorityModel {
    pub global_majority: RelationId,
    pub pair_table: BTreeMap<(String, String), RelationId>,
}

/// Label with the highest count, lowest id on ties.
fn argmax(counts: &[u64; 38]) -> Option<RelationId> {
    let (best, &n) = counts.iter().enumerate().rev().max_by_key(|&(_, n)| n)?;
    (n > 0).then(|| RelationId::new(best as u8).expect("valid id"))
}

/// Counts every label occurrence: an instance with `k` labels adds `k`.
pub fn train_majority(train: &Corpus) -> Result<MajorityModel, BaselineError> {
    let mut global = [0u64; 38];
    let mut pairs: BTreeMap<(String, String), [u64; 38]> = BTreeMap::new();
    for inst in train.instances() {
        let per_pair = pairs.entry((inst.subject.clone(), inst.object.clone())).or_insert([0; 38]);
        for r in &inst.labels {
            global[usize::from(r.get())] += 1;
            per_pair[usize::from(r.get())] += 1;
        }
    }
    let global_majority = argmax(&global).ok_or(BaselineError::EmptyTrainingSet)?;
    let pair_table = pairs
        .into_iter()
        .filter_map(|(k, c)| argmax(&c).map(|r| (k, r)))
        .collect();
    Ok(MajorityModel { global_majority, pair_table })
}

impl MajorityModel {
    /// Predicted label for an argument pair; `unanswerable` is the empty set.
    pub fn labels_for(&self, subject: &str, object: &str) -> LabelSet {
        let r = self
            .pair_table
            .get(&(subject.to_string(), object.to_string()))
            .copied()
            .unwrap_or(self.global_majority);
        let mut set = LabelSet::EMPTY;
        if !r.is_unanswerable() {
            set.insert(r);
        }
        set
    }
}

/// Conversational mode repeats the same set for every prefix `1..=m`.
pub fn predict_majority(
    model: &MajorityModel,
    instance: &RelationInstance,
    mode: PredictionMode,
    d: &Dialogue,
) -> Prediction {
    let labels = model.labels_for(&instance.subject, &instance.object);
    match mode {
        PredictionMode::Standard => Prediction::Standard(StandardPrediction {
            dialogue_id: instance.dialogue_id.clone(),
            instance_id: instance.instance_id.clone(),
            labels,
        }),
        PredictionMode::Conversational => Prediction::Conversational(ConversationalPrediction::constant(
            &instance.dialogue_id,
            &instance.instance_id,
            d.len(),
            labels,
        )),
    }
}

/// Standard predictions for every instance in corpus order.
pub fn predict_standard(model: &MajorityModel, corpus: &Corpus) -> Vec<StandardPrediction> {
    corpus
        .scored_pairs()
        .map(|(i, d)| match predict_majority(model, i, PredictionMode::Standard, d) {
            Prediction::Standard(p) => p,
            Prediction::Conversational(_) => unreachable!(),
        })
        .collect()
}

/// Conversational predictions for every instance in corpus order.
pub fn predict_conversational(model: &MajorityModel, corpus: &Corpus) -> Vec<ConversationalPrediction> {
    corpus
        .scored_pairs()
        .map(|(i, d)| match predict_majority(model, i, PredictionMode::Conversational, d) {
            Prediction::Conversational(p) => p,
            Prediction::Standard(_) => unreachable!(),
        })
        .collect()
}
