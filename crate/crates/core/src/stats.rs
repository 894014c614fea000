//! Corpus statistics.
//!
//! Counting units:
//! - dialogue averages are over dialogues;
//! - relation, trigger, object class and distance figures are over triples,
//!   i.e. `(instance, label)` occurrences.
//!
//! Tokens are Unicode-whitespace tokens of the rendered turns. A sentence
//! is a non-blank segment of a turn's text ended by a run of `.`, `!` or `?`
//! (or by the end of the turn).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::corpus::{Corpus, Dialogue, RelationInstance};
use crate::preprocess::find_mentions;
use crate::schema::{ArgClass, Schema};
use crate::text;

pub const DISTANCE_BUCKET: usize = 5;
pub const FAR_THRESHOLD: usize = 7;

/// Number of sentences in a turn text.
pub fn count_sentences(s: &str) -> usize {
    s.split(['.', '!', '?']).filter(|seg| !seg.trim().is_empty()).count()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassShare {
    pub percent: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistanceReport {
    /// Relational triples whose two arguments both have a mention.
    pub triples_measured: usize,
    /// Relational triples with an argument that has no mention.
    pub triples_excluded: usize,
    pub fraction_min_at_least_7: f64,
    pub fraction_avg_at_least_7: f64,
    pub mean_min_distance: f64,
    pub mean_avg_distance: f64,
    pub mean_avg_distance_with_trigger: Option<f64>,
    pub mean_avg_distance_without_trigger: Option<f64>,
    /// Bucket start → count, buckets of [`DISTANCE_BUCKET`] tokens.
    pub min_histogram: BTreeMap<usize, usize>,
    pub avg_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub dialogues: usize,
    pub instances: usize,
    pub triples: usize,
    pub relational_triples: usize,
    pub norelation_triples: usize,
    pub avg_dialogue_tokens: f64,
    pub avg_turns: f64,
    pub avg_speakers: f64,
    pub avg_sentences: f64,
    pub avg_relational_instances: f64,
    pub avg_norelation_instances: f64,
    /// Triples per label in schema order, zero counts omitted.
    pub relation_type_histogram: IndexMap<String, usize>,
    /// Over relational triples with a known object class.
    pub object_class_distribution: IndexMap<String, ClassShare>,
    pub trigger_ratio: IndexMap<String, f64>,
    pub distances: DistanceReport,
}

#[derive(Default)]
struct DialogueCounts {
    tokens: usize,
    turns: usize,
    speakers: usize,
    sentences: usize,
}

fn dialogue_counts(d: &Dialogue) -> DialogueCounts {
    DialogueCounts {
        tokens: d.turns().iter().map(|t| text::tokens(&t.rendered()).count()).sum(),
        turns: d.len(),
        speakers: d.speakers().len(),
        sentences: d.turns().iter().map(|t| count_sentences(&t.text)).sum(),
    }
}

/// Sum independent of the order of `values`.
fn stable_sum(mut values: Vec<f64>) -> f64 {
    values.sort_by(f64::total_cmp);
    values.into_iter().sum()
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Coarse object class: PER, GPE, ORG and NAME are entities.
pub fn coarse_class(c: ArgClass) -> &'static str {
    match c {
        ArgClass::String => "String",
        ArgClass::Value => "Value",
        _ => "Entity",
    }
}

pub fn relation_histogram(c: &Corpus) -> IndexMap<String, usize> {
    let mut counts = [0usize; 38];
    for inst in c.instances() {
        for r in &inst.labels {
            counts[usize::from(r.get())] += 1;
        }
    }
    Schema::embedded()
        .entries()
        .iter()
        .filter(|r| counts[usize::from(r.id.get())] > 0)
        .map(|r| (r.name.clone(), counts[usize::from(r.id.get())]))
        .collect()
}

/// Percentage of triples of each relation type with a non-empty trigger.
pub fn trigger_ratios(c: &Corpus) -> IndexMap<String, f64> {
    let mut with = [0usize; 38];
    let mut all = [0usize; 38];
    for inst in c.instances() {
        for (r, trig) in inst.triples().filter(|(r, _)| !r.is_unanswerable()) {
            all[usize::from(r.get())] += 1;
            if !trig.trim().is_empty() {
                with[usize::from(r.get())] += 1;
            }
        }
    }
    Schema::embedded()
        .relations()
        .iter()
        .map(|r| usize::from(r.id.get()))
        .filter(|&i| all[i] > 0)
        .map(|i| (Schema::embedded().entries()[i - 1].name.clone(), 100.0 * ratio(with[i], all[i])))
        .collect()
}

pub fn object_class_distribution(c: &Corpus) -> IndexMap<String, ClassShare> {
    let mut counts: IndexMap<String, usize> = ["Entity", "String", "Value"].iter().map(|k| (k.to_string(), 0)).collect();
    for inst in c.instances() {
        let Some(oc) = inst.object_class else { continue };
        let n = inst.labels.iter().filter(|r| !r.is_unanswerable()).count();
        counts[coarse_class(oc)] += n;
    }
    let total: usize = counts.values().sum();
    counts
        .into_iter()
        .map(|(k, count)| (k, ClassShare { percent: 100.0 * ratio(count, total), count }))
        .collect()
}

/// Whitespace-token positions of the mentions of `a` in the rendered dialogue.
pub fn mention_token_positions(d: &Dialogue, a: &str) -> Vec<usize> {
    let full = d.rendered();
    let starts = text::token_starts(&full);
    let mut turn_offset = Vec::with_capacity(d.len() + 1);
    let mut off = 0;
    for t in d.turns() {
        turn_offset.push(off);
        off += t.rendered().len() + 1;
    }
    find_mentions(d, a)
        .into_iter()
        .map(|m| text::token_index_at(&starts, turn_offset[m.turn - 1] + m.span.start))
        .collect()
}

/// `(min, average)` token gap over all mention pairs, `None` when an
/// argument has no mention.
pub fn instance_distance(d: &Dialogue, inst: &RelationInstance) -> Option<(usize, f64)> {
    let p = mention_token_positions(d, &inst.subject);
    let q = mention_token_positions(d, &inst.object);
    if p.is_empty() || q.is_empty() {
        return None;
    }
    let gaps = p.iter().flat_map(|&x| q.iter().map(move |&y| x.abs_diff(y)));
    let (min, sum, n) = gaps.fold((usize::MAX, 0usize, 0usize), |(m, s, n), g| (m.min(g), s + g, n + 1));
    Some((min, sum as f64 / n as f64))
}

struct TripleDistance {
    min: usize,
    avg: f64,
    triggered: bool,
}

pub fn argument_distances(c: &Corpus) -> DistanceReport {
    let per_instance: Vec<(Option<(usize, f64)>, &RelationInstance)> = c
        .scored_pairs()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(inst, d)| (instance_distance(d, inst), *inst))
        .collect();
    let mut measured = Vec::new();
    let mut excluded = 0;
    for (dist, inst) in per_instance {
        for (_, trig) in inst.triples().filter(|(r, _)| !r.is_unanswerable()) {
            match dist {
                Some((min, avg)) => measured.push(TripleDistance { min, avg, triggered: !trig.trim().is_empty() }),
                None => excluded += 1,
            }
        }
    }
    let n = measured.len();
    let bucket = |x: usize| x / DISTANCE_BUCKET * DISTANCE_BUCKET;
    let mut min_histogram = BTreeMap::new();
    let mut avg_histogram = BTreeMap::new();
    for t in &measured {
        *min_histogram.entry(bucket(t.min)).or_insert(0) += 1;
        *avg_histogram.entry(bucket(t.avg as usize)).or_insert(0) += 1;
    }
    let mean_where = |keep: &dyn Fn(&TripleDistance) -> bool| {
        let vals: Vec<f64> = measured.iter().filter(|t| keep(t)).map(|t| t.avg).collect();
        let k = vals.len();
        (k > 0).then(|| stable_sum(vals) / k as f64)
    };
    DistanceReport {
        triples_measured: n,
        triples_excluded: excluded,
        fraction_min_at_least_7: ratio(measured.iter().filter(|t| t.min >= FAR_THRESHOLD).count(), n),
        fraction_avg_at_least_7: ratio(measured.iter().filter(|t| t.avg >= FAR_THRESHOLD as f64).count(), n),
        mean_min_distance: ratio(measured.iter().map(|t| t.min).sum(), n),
        mean_avg_distance: mean_where(&|_| true).unwrap_or(0.0),
        mean_avg_distance_with_trigger: mean_where(&|t| t.triggered),
        mean_avg_distance_without_trigger: mean_where(&|t| !t.triggered),
        min_histogram,
        avg_histogram,
    }
}

pub fn summarize(c: &Corpus) -> CorpusSummary {
    let dialogues: Vec<&Dialogue> = c.dialogues().collect();
    let totals = dialogues
        .par_iter()
        .map(|d| dialogue_counts(d))
        .reduce(DialogueCounts::default, |a, b| DialogueCounts {
            tokens: a.tokens + b.tokens,
            turns: a.turns + b.turns,
            speakers: a.speakers + b.speakers,
            sentences: a.sentences + b.sentences,
        });
    let triples = c.num_triples();
    let norelation = c.instances().iter().flat_map(|i| &i.labels).filter(|r| r.is_unanswerable()).count();
    let nd = dialogues.len();
    CorpusSummary {
        dialogues: nd,
        instances: c.instances().len(),
        triples,
        relational_triples: triples - norelation,
        norelation_triples: norelation,
        avg_dialogue_tokens: ratio(totals.tokens, nd),
        avg_turns: ratio(totals.turns, nd),
        avg_speakers: ratio(totals.speakers, nd),
        avg_sentences: ratio(totals.sentences, nd),
        avg_relational_instances: ratio(triples - norelation, nd),
        avg_norelation_instances: ratio(norelation, nd),
        relation_type_histogram: relation_histogram(c),
        object_class_distribution: object_class_distribution(c),
        trigger_ratio: trigger_ratios(c),
        distances: argument_distances(c),
    }
}

/// `bucket_start,bucket_end,count` rows, contiguous from 0 to the last
/// non-empty bucket.
pub fn distance_histogram_csv(h: &BTreeMap<usize, usize>) -> String {
    let mut out = String::from("bucket_start,bucket_end,count\n");
    if let Some(&last) = h.keys().next_back() {
        for start in (0..=last).step_by(DISTANCE_BUCKET) {
            let _ = writeln!(out, "{start},{},{}", start + DISTANCE_BUCKET - 1, h.get(&start).copied().unwrap_or(0));
        }
    }
    out
}

/// `id,relation,count` rows for all 37 labels.
pub fn relation_histogram_csv(h: &IndexMap<String, usize>) -> String {
    let mut out = String::from("id,relation,count\n");
    for r in Schema::embedded().entries() {
        let _ = writeln!(out, "{},{},{}", r.id.get(), r.name, h.get(&r.name).copied().unwrap_or(0));
    }
    out
}

impl CorpusSummary {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{instance, sample_corpus};
    use crate::schema::ArgClass::*;

    #[test]
    fn single_turn_dialogue() {
        let c = Corpus::new(vec![Dialogue::new("d0", [("Speaker 1", "Hi.")])], vec![], None).unwrap();
        let s = summarize(&c);
        // "Speaker 1: Hi." is three whitespace tokens; the turn text alone is one.
        assert_eq!(
            (s.avg_dialogue_tokens, s.avg_turns, s.avg_speakers, s.avg_sentences),
            (3.0, 1.0, 1.0, 1.0)
        );
        assert_eq!((s.avg_relational_instances, s.avg_norelation_instances), (0.0, 0.0));
    }

    #[test]
    fn sentences() {
        assert_eq!(count_sentences("Hi."), 1);
        assert_eq!(count_sentences("Yeah, I did. I think so!!! Really?"), 3);
        assert_eq!(count_sentences("no punctuation"), 1);
        assert_eq!(count_sentences("..."), 0);
        assert_eq!(count_sentences(""), 0);
    }

    #[test]
    fn sample_summary() {
        let s = summarize(&sample_corpus());
        assert_eq!((s.relational_triples, s.norelation_triples), (3, 1));
        assert_eq!(s.relation_type_histogram.values().sum::<usize>(), s.triples);
        assert_eq!(s.trigger_ratio["per:siblings"], 100.0);
        assert_eq!(s.trigger_ratio["per:alternate_names"], 0.0);
        assert!(!s.trigger_ratio.contains_key("unanswerable"));
        assert_eq!(s.object_class_distribution["Entity"].count, 3);
        assert_eq!(s.avg_speakers, 2.0);
        assert_eq!(s.avg_turns, 7.0);
    }

    #[test]
    fn adjacent_arguments() {
        let d = Dialogue::new("d0", [("X", "Ann Bob")]);
        let inst = instance("a", "Ann", Per, "Bob", Per, &[("per:friends", "")]);
        assert_eq!(instance_distance(&d, &inst), Some((1, 1.0)));
    }

    #[test]
    fn speaker_positions() {
        let c = sample_corpus();
        let d = c.dialogue("d0").unwrap();
        let pos = mention_token_positions(d, "Speaker 2");
        let full = d.rendered();
        let tokens: Vec<&str> = text::tokens(&full).collect();
        assert_eq!(pos.len(), 3);
        assert!(pos.iter().all(|&p| tokens[p] == "Speaker" && tokens[p + 1] == "2:"));
        assert_eq!(tokens[mention_token_positions(d, "Frank")[0]], "'Frank's");
    }

    #[test]
    fn distance_report_on_sample() {
        let r = argument_distances(&sample_corpus());
        // r1, r2 and r3 are relational; all arguments are mentioned.
        assert_eq!((r.triples_measured, r.triples_excluded), (3, 0));
        assert_eq!(r.min_histogram.values().sum::<usize>(), 3);
        assert!(r.mean_avg_distance_with_trigger.is_some());
    }

    #[test]
    fn csv_layout() {
        let h = BTreeMap::from([(0, 2), (10, 1)]);
        assert_eq!(distance_histogram_csv(&h), "bucket_start,bucket_end,count\n0,4,2\n5,9,0\n10,14,1\n");
        let csv = relation_histogram_csv(&relation_histogram(&sample_corpus()));
        assert_eq!(csv.lines().count(), 38);
        assert!(csv.contains("\n1,per:positive_impression,0\n"));
    }
}
