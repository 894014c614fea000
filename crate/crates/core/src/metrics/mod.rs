//! Standard micro-averaged F1 and the conversational metric F1c.
//!
//! Conventions:
//! - `unanswerable` is abstention. It is stripped from gold label sets and may
//!   not be predicted.
//! - A per-instance ratio with a zero denominator is left out of the
//!   corresponding mean and counted in `instances_skipped_p` /
//!   `instances_skipped_r`. A mean over zero instances is 0.
//! - Means are accumulated as exact integer numerators grouped by
//!   denominator, so the result does not depend on instance order or on how
//!   work is split across threads.

mod evaluable;
mod predictions;

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Corpus, Dialogue, InstanceKey, RelationInstance};
use crate::schema::{RelationId, Schema};

pub use evaluable::{evaluable_set, first_appearance, relation_ready_turn, Evaluability};
pub use predictions::{
    read_conversational_predictions, read_standard_predictions, write_conversational_predictions,
    write_standard_predictions, ConversationalPrediction, StandardPrediction,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("line {line}: {message}")]
    Jsonl { line: usize, message: String },
    #[error("read failed: {0}")]
    Io(String),
    #[error("line {line}: unknown relation label `{label}`")]
    UnknownLabel { line: usize, label: String },
    #[error("line {line}: expected a {expected} prediction record")]
    ModeMismatch { line: usize, expected: &'static str },
    #[error("{key}: `unanswerable` cannot be predicted; use an empty list to abstain")]
    UnanswerablePredicted { key: InstanceKey },
    #[error("{key}: duplicate prediction{}", .prefix.map(|p| format!(" for prefix {p}")).unwrap_or_default())]
    DuplicatePrediction { key: InstanceKey, prefix: Option<usize> },
    #[error("{key}: prediction does not match any instance")]
    UnmatchedInstance { key: InstanceKey },
    #[error("{key}: no prediction")]
    MissingPrediction { key: InstanceKey },
    #[error("{key}: no prediction for prefix {prefix}")]
    MissingPrefix { key: InstanceKey, prefix: usize },
    #[error("{key}: prefix {prefix} outside 1..={m}")]
    PrefixOutOfRange { key: InstanceKey, prefix: usize, m: usize },
}

/// Summed counts of one instance over all prefixes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct InstanceScore {
    /// `Σ_i |O_i ∩ L ∩ E_i|`
    pub num: u64,
    /// `Σ_i |O_i ∩ E_i|`
    pub p_den: u64,
    /// `Σ_i |L ∩ E_i|`
    pub r_den: u64,
}

impl InstanceScore {
    pub fn precision(&self) -> Option<f64> {
        (self.p_den > 0).then(|| self.num as f64 / self.p_den as f64)
    }

    pub fn recall(&self) -> Option<f64> {
        (self.r_den > 0).then(|| self.num as f64 / self.r_den as f64)
    }
}

/// Conversational counts of one instance against per-prefix predictions.
pub fn conversational_instance_score(
    instance: &RelationInstance,
    d: &Dialogue,
    p: &ConversationalPrediction,
) -> Result<InstanceScore, MetricsError> {
    let m = d.len();
    if let Some((&bad, _)) = p.per_prefix.iter().find(|(&i, _)| i == 0 || i > m) {
        return Err(MetricsError::PrefixOutOfRange { key: p.key(), prefix: bad, m });
    }
    let ev = Evaluability::new(instance, d);
    let gold = instance.gold_relations();
    let mut score = InstanceScore::default();
    for i in 1..=m {
        let predicted = *p
            .per_prefix
            .get(&i)
            .ok_or_else(|| MetricsError::MissingPrefix { key: p.key(), prefix: i })?;
        if predicted.contains(RelationId::UNANSWERABLE) {
            return Err(MetricsError::UnanswerablePredicted { key: p.key() });
        }
        let evaluable = ev.set(i);
        let pe = predicted.intersection(evaluable);
        score.num += pe.intersection(gold).len() as u64;
        score.p_den += pe.len() as u64;
        score.r_den += gold.intersection(evaluable).len() as u64;
    }
    Ok(score)
}

/// Order-independent mean of ratios `num / den`.
#[derive(Debug, Default, Clone)]
struct RatioMean {
    by_den: BTreeMap<u64, u64>,
    count: u64,
}

impl RatioMean {
    fn add(&mut self, num: u64, den: u64) {
        *self.by_den.entry(den).or_default() += num;
        self.count += 1;
    }

    fn mean(&self) -> f64 {
        if self.count == 0 {
            return 0.0;
        }
        let sum: f64 = self.by_den.iter().map(|(&den, &num)| num as f64 / den as f64).sum();
        sum / self.count as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversationalScores {
    pub p_c: f64,
    pub r_c: f64,
    pub f1_c: f64,
    pub instances_scored: usize,
    pub instances_skipped_p: usize,
    pub instances_skipped_r: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationCounts {
    pub relation: String,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl RelationCounts {
    pub fn f1(&self) -> f64 {
        micro(self.tp, self.fp, self.fn_).2
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub instances_scored: usize,
    /// Diagnostic breakdown, relations with any count only, in id order.
    pub per_relation: Vec<RelationCounts>,
}

/// Scores in either or both settings.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub standard: Option<StandardScores>,
    pub conversational: Option<ConversationalScores>,
}

fn micro(tp: u64, fp: u64, fn_: u64) -> (f64, f64, f64) {
    let ratio = |a: u64, b: u64| if a + b == 0 { 0.0 } else { a as f64 / (a + b) as f64 };
    let p = ratio(tp, fp);
    let r = ratio(tp, fn_);
    (p, r, harmonic(p, r))
}

/// Pairs every corpus instance with exactly one prediction.
fn match_predictions<'a, P>(
    corpus: &'a Corpus,
    preds: &'a [P],
    key: impl Fn(&P) -> InstanceKey,
) -> Result<Vec<(&'a RelationInstance, &'a Dialogue, &'a P)>, MetricsError> {
    let index = corpus.instance_index();
    let mut slot: Vec<Option<&P>> = vec![None; corpus.instances().len()];
    for p in preds {
        let k = key(p);
        let &at = index.get(&k).ok_or_else(|| MetricsError::UnmatchedInstance { key: k.clone() })?;
        if slot[at].replace(p).is_some() {
            return Err(MetricsError::DuplicatePrediction { key: k, prefix: None });
        }
    }
    corpus
        .scored_pairs()
        .zip(slot)
        .map(|((inst, d), p)| p.map(|p| (inst, d, p)).ok_or_else(|| MetricsError::MissingPrediction { key: inst.key() }))
        .collect()
}

/// Mean per-instance conversational precision and recall over the corpus.
pub fn conversational_f1(corpus: &Corpus, preds: &[ConversationalPrediction]) -> Result<EvalReport, MetricsError> {
    let matched = match_predictions(corpus, preds, ConversationalPrediction::key)?;
    let scores: Vec<InstanceScore> = matched
        .par_iter()
        .map(|(inst, d, p)| conversational_instance_score(inst, d, p))
        .collect::<Result<_, _>>()?;
    let mut p_mean = RatioMean::default();
    let mut r_mean = RatioMean::default();
    let (mut skipped_p, mut skipped_r) = (0, 0);
    for s in &scores {
        if s.p_den == 0 {
            skipped_p += 1;
        } else {
            p_mean.add(s.num, s.p_den);
        }
        if s.r_den == 0 {
            skipped_r += 1;
        } else {
            r_mean.add(s.num, s.r_den);
        }
    }
    let (p_c, r_c) = (p_mean.mean(), r_mean.mean());
    Ok(EvalReport {
        standard: None,
        conversational: Some(ConversationalScores {
            p_c,
            r_c,
            f1_c: harmonic(p_c, r_c),
            instances_scored: scores.len(),
            instances_skipped_p: skipped_p,
            instances_skipped_r: skipped_r,
        }),
    })
}

/// Micro-averaged precision, recall and F1 over all instances.
pub fn standard_f1(corpus: &Corpus, preds: &[StandardPrediction]) -> Result<EvalReport, MetricsError> {
    let matched = match_predictions(corpus, preds, StandardPrediction::key)?;
    let mut per: HashMap<RelationId, [u64; 3]> = HashMap::new();
    for (inst, _, p) in &matched {
        if p.labels.contains(RelationId::UNANSWERABLE) {
            return Err(MetricsError::UnanswerablePredicted { key: p.key() });
        }
        let gold = inst.gold_relations();
        for r in p.labels.intersection(gold).iter() {
            per.entry(r).or_default()[0] += 1;
        }
        for r in p.labels.difference(gold).iter() {
            per.entry(r).or_default()[1] += 1;
        }
        for r in gold.difference(p.labels).iter() {
            per.entry(r).or_default()[2] += 1;
        }
    }
    let per_relation: Vec<RelationCounts> = Schema::embedded()
        .relations()
        .iter()
        .filter_map(|r| {
            per.get(&r.id).map(|&[tp, fp, fn_]| RelationCounts { relation: r.name.clone(), tp, fp, fn_ })
        })
        .collect();
    let sum = |k: usize| per.values().map(|c| c[k]).sum::<u64>();
    let (tp, fp, fn_) = (sum(0), sum(1), sum(2));
    let (precision, recall, f1) = micro(tp, fp, fn_);
    Ok(EvalReport {
        standard: Some(StandardScores {
            precision,
            recall,
            f1,
            tp,
            fp,
            fn_,
            instances_scored: matched.len(),
            per_relation,
        }),
        conversational: None,
    })
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Aligned plain-text table, percentages with one decimal.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let pct = |x: f64| format!("{:.1}", 100.0 * x);
        if let Some(s) = &self.standard {
            let _ = writeln!(out, "{:<24}{:>10}", "setting", "standard");
            for (k, v) in [("precision", pct(s.precision)), ("recall", pct(s.recall)), ("f1", pct(s.f1))] {
                let _ = writeln!(out, "{k:<24}{v:>10}");
            }
            for (k, v) in [("tp", s.tp), ("fp", s.fp), ("fn", s.fn_)] {
                let _ = writeln!(out, "{k:<24}{v:>10}");
            }
            let _ = writeln!(out, "{:<24}{:>10}", "instances", s.instances_scored);
            if !s.per_relation.is_empty() {
                let _ = writeln!(out, "\n{:<28}{:>6}{:>6}{:>6}{:>8}", "relation", "tp", "fp", "fn", "f1");
                for r in &s.per_relation {
                    let _ = writeln!(out, "{:<28}{:>6}{:>6}{:>6}{:>8}", r.relation, r.tp, r.fp, r.fn_, pct(r.f1()));
                }
            }
        }
        if let Some(c) = &self.conversational {
            if !out.is_empty() {
                out.push('\n');
            }
            let _ = writeln!(out, "{:<24}{:>10}", "setting", "conversational");
            for (k, v) in [("p_c", pct(c.p_c)), ("r_c", pct(c.r_c)), ("f1_c", pct(c.f1_c))] {
                let _ = writeln!(out, "{k:<24}{v:>10}");
            }
            for (k, v) in [
                ("instances", c.instances_scored),
                ("skipped (precision)", c.instances_skipped_p),
                ("skipped (recall)", c.instances_skipped_r),
            ] {
                let _ = writeln!(out, "{k:<24}{v:>10}");
            }
        }
        out
    }
}
