//! Random corpus generation with known first appearances, and a brute-force
//! conversational scorer that materializes every set directly.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use dialogre::corpus::{Corpus, Dialogue, RelationInstance, SplitTag};
use dialogre::metrics::ConversationalPrediction;
use dialogre::schema::{ArgClass, LabelSet, RelationId};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const SPEAKERS: [&str; 3] = ["Speaker 1", "Speaker 2", "Speaker 3"];
pub const NAMES: [&str; 4] = ["Ann", "Bob", "Cy", "Dee Dee"];
/// Words that contain a name without matching it at a word boundary.
pub const DECOYS: [&str; 4] = ["Annie", "Bobby", "Cyan", "DeeDee"];
pub const TRIGGERS: [&str; 3] = ["trigx", "trigy", "big sis"];
pub const FILLER: [&str; 6] = ["so", "well", "okay", "yes", "no", "maybe"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One dialogue and one instance with generation-time first appearances.
#[derive(Debug, Clone)]
pub struct Case {
    pub dialogue: Dialogue,
    pub instance: RelationInstance,
    /// First turn of each argument, `m` when it never appears.
    pub first_subject: usize,
    pub first_object: usize,
    /// Turn at which each gold relation (ids 1..=36) becomes ready.
    pub ready: BTreeMap<u8, usize>,
}

impl Case {
    pub fn m(&self) -> usize {
        self.dialogue.len()
    }

    pub fn gold36(&self) -> BTreeSet<u8> {
        self.ready.keys().copied().collect()
    }
}

enum Arg {
    Speaker(&'static str),
    Name(&'static str, Vec<usize>),
}

fn decorate(rng: &mut ChaCha8Rng, word: &str) -> String {
    match rng.random_range(0..4) {
        0 => format!("{word},"),
        1 => format!("'{word}'s"),
        2 => format!("({word})"),
        _ => word.to_string(),
    }
}

/// Turns (1-based) in which an item is placed; each turn with probability 0.3.
fn placements(rng: &mut ChaCha8Rng, m: usize) -> Vec<usize> {
    (1..=m).filter(|_| rng.random_bool(0.3)).collect()
}

/// A random case with `m ≤ 6` turns and at most 4 gold labels.
pub fn gen_case(rng: &mut ChaCha8Rng, dialogue_id: &str) -> Case {
    let m = rng.random_range(1..=6);
    let speakers: Vec<&str> = (0..m).map(|_| *SPEAKERS.choose(rng).unwrap()).collect();
    let mut words: Vec<Vec<String>> = (0..m)
        .map(|_| {
            let n = rng.random_range(1..=4);
            (0..n).map(|_| FILLER.choose(rng).unwrap().to_string()).collect()
        })
        .collect();
    for w in words.iter_mut() {
        if rng.random_bool(0.3) {
            w.push(DECOYS.choose(rng).unwrap().to_string());
        }
    }

    let pick_arg = |rng: &mut ChaCha8Rng, taken: Option<&str>| loop {
        let a = if rng.random_bool(0.5) {
            Arg::Speaker(SPEAKERS.choose(rng).unwrap())
        } else {
            Arg::Name(NAMES.choose(rng).unwrap(), placements(rng, m))
        };
        let text = match &a {
            Arg::Speaker(s) | Arg::Name(s, _) => *s,
        };
        if Some(text) != taken {
            return a;
        }
    };
    let a1 = pick_arg(rng, None);
    let a1_text = match &a1 {
        Arg::Speaker(s) | Arg::Name(s, _) => *s,
    };
    let a2 = pick_arg(rng, Some(a1_text));

    let first_of = |a: &Arg| -> usize {
        match a {
            Arg::Speaker(s) => speakers.iter().position(|x| x == s).map_or(m, |p| p + 1),
            Arg::Name(_, at) => at.first().copied().unwrap_or(m),
        }
    };
    let (first_subject, first_object) = (first_of(&a1), first_of(&a2));
    for a in [&a1, &a2] {
        if let Arg::Name(n, at) = a {
            for &t in at {
                let w = decorate(rng, n);
                words[t - 1].push(w);
            }
        }
    }

    let mut trigger_turns: BTreeMap<&str, usize> = BTreeMap::new();
    for t in TRIGGERS {
        let at = placements(rng, m);
        for &k in &at {
            words[k - 1].push(t.to_string());
        }
        trigger_turns.insert(t, at.first().copied().unwrap_or(m));
    }
    for w in words.iter_mut() {
        w.shuffle(rng);
    }

    let (labels, triggers, ready) = if rng.random_bool(0.15) {
        (vec![RelationId::UNANSWERABLE], vec![String::new()], BTreeMap::new())
    } else {
        let k = rng.random_range(1..=4);
        let mut ids: Vec<u8> = (1..=36).collect();
        ids.shuffle(rng);
        let mut labels = Vec::new();
        let mut triggers = Vec::new();
        let mut ready = BTreeMap::new();
        for &id in &ids[..k] {
            labels.push(RelationId::new(id).unwrap());
            if rng.random_bool(0.4) {
                triggers.push(String::new());
                ready.insert(id, m);
            } else {
                let t = *TRIGGERS.choose(rng).unwrap();
                triggers.push(t.to_string());
                ready.insert(id, trigger_turns[t]);
            }
        }
        (labels, triggers, ready)
    };

    let class_of = |a: &Arg, rng: &mut ChaCha8Rng| match a {
        Arg::Speaker(_) => ArgClass::Per,
        Arg::Name(..) => *[ArgClass::Per, ArgClass::Name, ArgClass::Gpe, ArgClass::Org].choose(rng).unwrap(),
    };
    let subject_class = class_of(&a1, rng);
    let object_class = class_of(&a2, rng);
    let a2_text = match &a2 {
        Arg::Speaker(s) | Arg::Name(s, _) => *s,
    };
    let dialogue = Dialogue::new(dialogue_id, speakers.iter().zip(&words).map(|(s, w)| (*s, w.join(" "))));
    let instance = RelationInstance {
        dialogue_id: dialogue_id.to_string(),
        instance_id: format!("{dialogue_id}-0"),
        subject: a1_text.to_string(),
        subject_class: Some(subject_class),
        object: a2_text.to_string(),
        object_class: Some(object_class),
        labels,
        triggers,
    };
    Case { dialogue, instance, first_subject, first_object, ready }
}

/// `n` cases, each in its own dialogue `d{k}`.
pub fn gen_cases(rng: &mut ChaCha8Rng, n: usize) -> Vec<Case> {
    (0..n).map(|k| gen_case(rng, &format!("d{k}"))).collect()
}

pub fn corpus_of(cases: &[Case]) -> Corpus {
    Corpus::new(
        cases.iter().map(|c| c.dialogue.clone()).collect(),
        cases.iter().map(|c| c.instance.clone()).collect(),
        None,
    )
    .expect("generated corpus is valid")
}

/// Random per-prefix predictions drawn mostly from the gold labels plus a
/// few random relation types.
pub fn gen_prediction(rng: &mut ChaCha8Rng, case: &Case) -> ConversationalPrediction {
    let mut pool: Vec<u8> = case.gold36().into_iter().collect();
    for _ in 0..3 {
        pool.push(rng.random_range(1..=36));
    }
    let per_prefix = (1..=case.m())
        .map(|i| {
            let set: LabelSet =
                pool.iter().filter(|_| rng.random_bool(0.5)).map(|&id| RelationId::new(id).unwrap()).collect();
            (i, set)
        })
        .collect();
    ConversationalPrediction {
        dialogue_id: case.instance.dialogue_id.clone(),
        instance_id: case.instance.instance_id.clone(),
        per_prefix,
    }
}

pub fn to_ids(s: LabelSet) -> BTreeSet<u8> {
    s.iter().map(|r| r.get()).collect()
}

/// `E_i` by direct enumeration of the 36 relation types.
pub fn oracle_evaluable(case: &Case, i: usize) -> BTreeSet<u8> {
    (1..=36u8)
        .filter(|r| {
            let iota = case.ready.get(r).copied().unwrap_or(1);
            i >= case.first_subject.max(case.first_object).max(iota)
        })
        .collect()
}

/// `(num, p_den, r_den)` by materializing `O_i`, `L36` and `E_i` as sets.
pub fn oracle_instance(case: &Case, pred: &BTreeMap<usize, BTreeSet<u8>>) -> (u64, u64, u64) {
    let gold = case.gold36();
    let (mut num, mut p_den, mut r_den) = (0u64, 0u64, 0u64);
    for i in 1..=case.m() {
        let e = oracle_evaluable(case, i);
        let o = &pred[&i];
        let oe: BTreeSet<u8> = o.intersection(&e).copied().collect();
        num += oe.intersection(&gold).count() as u64;
        p_den += oe.len() as u64;
        r_den += gold.intersection(&e).count() as u64;
    }
    (num, p_den, r_den)
}

/// `(P_c, R_c, F1_c, skipped_p, skipped_r)`.
pub fn oracle_corpus(cases: &[Case], preds: &[ConversationalPrediction]) -> (f64, f64, f64, usize, usize) {
    let (mut ps, mut rs) = (Vec::new(), Vec::new());
    let (mut sp, mut sr) = (0, 0);
    for (c, p) in cases.iter().zip(preds) {
        let sets = p.per_prefix.iter().map(|(&i, &s)| (i, to_ids(s))).collect();
        let (num, pd, rd) = oracle_instance(c, &sets);
        if pd == 0 { sp += 1 } else { ps.push(num as f64 / pd as f64) }
        if rd == 0 { sr += 1 } else { rs.push(num as f64 / rd as f64) }
    }
    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let (p, r) = (mean(&ps), mean(&rs));
    let f = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
    (p, r, f, sp, sr)
}

/// Corpus with several instances per dialogue, optional classes, original
/// speaker names and an optional split.
pub fn gen_corpus(rng: &mut ChaCha8Rng, n_dialogues: usize, with_splits: bool) -> Corpus {
    const PEOPLE: [&str; 5] = ["Rachel", "Phoebe Buffay", "Ross", "Monica", "Joey"];
    let mut dialogues = Vec::new();
    let mut instances = Vec::new();
    let mut splits = BTreeMap::new();
    for k in 0..n_dialogues {
        let id = format!("dlg{k}");
        let m = rng.random_range(1..=8);
        let turns: Vec<(String, String)> = (0..m)
            .map(|_| {
                let speaker = PEOPLE.choose(rng).unwrap().to_string();
                let n = rng.random_range(1..=6);
                let text: Vec<String> = (0..n)
                    .map(|_| match rng.random_range(0..6) {
                        0 => PEOPLE.choose(rng).unwrap().split(' ').next().unwrap().to_string(),
                        1 => NAMES.choose(rng).unwrap().to_string(),
                        2 => "Paris".to_string(),
                        _ => FILLER.choose(rng).unwrap().to_string(),
                    })
                    .collect();
                (speaker, text.join(" "))
            })
            .collect();
        let d = Dialogue::new(id.clone(), turns);
        let mut args: Vec<(String, Option<ArgClass>)> =
            d.speakers().into_iter().map(|s| (s.to_string(), Some(ArgClass::Per))).collect();
        args.push(("Paris".into(), Some(ArgClass::Gpe)));
        args.push(("33".into(), Some(ArgClass::Value)));
        args.push(("chef".into(), if rng.random_bool(0.8) { Some(ArgClass::String) } else { None }));
        args.push((NAMES.choose(rng).unwrap().to_string(), Some(ArgClass::Name)));
        let mut used = BTreeSet::new();
        let n_inst = rng.random_range(0..=5);
        for j in 0..n_inst {
            let (s, sc) = args.choose(rng).unwrap().clone();
            let (o, oc) = args.choose(rng).unwrap().clone();
            if s == o || !used.insert((s.clone(), o.clone())) {
                continue;
            }
            let (labels, triggers) = if rng.random_bool(0.2) {
                (vec![RelationId::UNANSWERABLE], vec![String::new()])
            } else {
                let mut ids: Vec<u8> = (1..=36).collect();
                ids.shuffle(rng);
                let k = rng.random_range(1..=3);
                let labels: Vec<RelationId> = ids[..k].iter().map(|&i| RelationId::new(i).unwrap()).collect();
                let triggers = labels
                    .iter()
                    .map(|_| if rng.random_bool(0.5) { String::new() } else { FILLER.choose(rng).unwrap().to_string() })
                    .collect();
                (labels, triggers)
            };
            instances.push(RelationInstance {
                dialogue_id: id.clone(),
                instance_id: format!("{id}-{j}"),
                subject: s,
                subject_class: sc,
                object: o,
                object_class: oc,
                labels,
                triggers,
            });
        }
        splits.insert(id, *SplitTag::ALL.choose(rng).unwrap());
        dialogues.push(d);
    }
    Corpus::new(dialogues, instances, with_splits.then_some(splits)).expect("generated corpus is valid")
}

/// The seven-turn example dialogue in which Speaker 2 mentions a brother, Frank.
pub fn example_dialogue() -> Dialogue {
    Dialogue::new(
        "t1",
        [
            ("Speaker 1", "Hey Pheebs."),
            ("Speaker 2", "Hey!"),
            ("Speaker 1", "Any sign of your brother?"),
            ("Speaker 2", "No, but he's always late."),
            ("Speaker 1", "I thought you only met him once?"),
            ("Speaker 2", "Yeah, I did. I think it sounds y'know big sistery, y'know, 'Frank's always late.'"),
            ("Speaker 1", "Well relax, he'll be here."),
        ],
    )
}

pub const EXAMPLE_SPEAKER_INPUT: &str = "[CLS] Speaker 1: Hey Pheebs. [S1]: Hey! Speaker 1: Any sign of your brother? \
    [S1]: No, but he's always late. Speaker 1: I thought you only met him once? \
    [S1]: Yeah, I did. I think it sounds y'know big sistery, y'know, 'Frank's always late.' \
    Speaker 1: Well relax, he'll be here. [SEP] [S1] [SEP] Frank [SEP]";

pub fn example_instance() -> RelationInstance {
    RelationInstance {
        dialogue_id: "t1".into(),
        instance_id: "t1-0".into(),
        subject: "Speaker 2".into(),
        subject_class: Some(ArgClass::Per),
        object: "Frank".into(),
        object_class: Some(ArgClass::Per),
        labels: vec![dialogre::schema::Schema::embedded().id_of("per:siblings").unwrap()],
        triggers: vec!["brother".into()],
    }
}

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok { Ok(()) } else { Err(what()) }
}

/// Checks the shape of every input variant for one case.
pub fn check_variant_shapes(d: &Dialogue, inst: &RelationInstance) -> Result<(), String> {
    use dialogre::preprocess::{build_input, find_mentions, marker_vocabulary, InputVariant, PreprocessError};
    use dialogre::text::{contains_word, tokens};

    let vocab: BTreeSet<String> = marker_vocabulary().into_iter().collect();
    let (a1, a2) = (inst.subject.as_str(), inst.object.as_str());
    let turns_of = |a: &str| d.turns().iter().filter(|t| t.speaker == a).count();
    let full = d.rendered();
    let rendered = tokens(&full).collect::<Vec<_>>().join(" ");
    let arg_tokens = |a: &str| tokens(a).collect::<Vec<_>>().join(" ");
    let triggers: BTreeSet<&str> = inst.triggers.iter().map(|t| t.trim()).filter(|t| !t.is_empty()).collect();
    let (c1, c2) = (inst.subject_class.unwrap().as_str(), inst.object_class.unwrap().as_str());

    for v in InputVariant::ALL {
        let ctx = |msg: &str| format!("{v} on {}: {msg}", inst.instance_id);
        let m = match build_input(v, d, inst) {
            Ok(m) => m,
            Err(PreprocessError::MissingTrigger { .. }) if v == InputVariant::TriggerAppended && triggers.is_empty() => {
                continue
            }
            Err(e) => return Err(ctx(&e.to_string())),
        };
        let toks: Vec<&str> = m.tokens().collect();
        ensure(toks.first() == Some(&"[CLS]") && toks.last() == Some(&"[SEP]"), || ctx("not [CLS] ... [SEP]"))?;
        ensure(m.markers_used.is_subset(&vocab), || ctx("marker outside vocabulary"))?;
        ensure(m.count("[CLS]") == 1, || ctx("[CLS] count"))?;
        let seps = match v {
            InputVariant::MentionReplaced | InputVariant::SubjObj | InputVariant::BoundaryMarked => 1,
            InputVariant::TriggerAppended => 3 + triggers.len(),
            _ => 3,
        };
        ensure(m.count("[SEP]") == seps, || ctx(&format!("[SEP] count {} != {seps}", m.count("[SEP]"))))?;
        let body = toks[m.dialogue.clone()].join(" ");
        ensure(toks[m.dialogue.end] == "[SEP]", || ctx("dialogue range does not end at [SEP]"))?;

        let speaker = matches!(v, InputVariant::Speaker | InputVariant::SpeakerTyped);
        let (s1, s2) = if speaker { (turns_of(a1), turns_of(a2)) } else { (0, 0) };
        ensure(body.matches("[S1]:").count() == s1, || ctx("[S1] count != a1 turn count"))?;
        ensure(body.matches("[S2]:").count() == s2, || ctx("[S2] count != a2 turn count"))?;
        let hat = |a: &str, tok: &str| if speaker && turns_of(a) > 0 { tok.to_string() } else { arg_tokens(a) };
        let tail = &toks[m.dialogue.end..].join(" ");
        match v {
            InputVariant::Base | InputVariant::Speaker | InputVariant::MentionReplacedArgs | InputVariant::SubjObjArgs => {
                let want = format!("[SEP] {} [SEP] {} [SEP]", hat(a1, "[S1]"), hat(a2, "[S2]"));
                ensure(*tail == want, || ctx(&format!("tail `{tail}` != `{want}`")))?;
            }
            InputVariant::Typed | InputVariant::SpeakerTyped => {
                let want = format!("[SEP] [{c1}] {} [SEP] [{c2}] {} [SEP]", hat(a1, "[S1]"), hat(a2, "[S2]"));
                ensure(*tail == want, || ctx(&format!("tail `{tail}` != `{want}`")))?;
            }
            InputVariant::TriggerAppended => {
                let prefix = format!("[SEP] {} [SEP] {} [SEP]", arg_tokens(a1), arg_tokens(a2));
                ensure(tail.starts_with(&prefix), || ctx("trigger tail prefix"))?;
            }
            _ => ensure(*tail == "[SEP]", || ctx("unexpected argument tail"))?,
        }
        if matches!(v, InputVariant::Base | InputVariant::Typed | InputVariant::TriggerAppended) {
            ensure(body == rendered, || ctx("dialogue differs from rendering"))?;
        }
        let (n1, n2) = (find_mentions(d, a1).len(), find_mentions(d, a2).len());
        let replaced = match v {
            InputVariant::MentionReplaced | InputVariant::MentionReplacedArgs => {
                Some((format!("[SUBJ-{c1}]"), format!("[OBJ-{c2}]")))
            }
            InputVariant::SubjObj | InputVariant::SubjObjArgs => Some(("[SUBJ]".to_string(), "[OBJ]".to_string())),
            _ => None,
        };
        if let Some((t1, t2)) = replaced {
            ensure(!contains_word(&body, a1) && !contains_word(&body, a2), || ctx("argument left in d'"))?;
            ensure(body.matches(t1.as_str()).count() == n1, || ctx("subject replacement count"))?;
            ensure(body.matches(t2.as_str()).count() == n2, || ctx("object replacement count"))?;
        }
        if v == InputVariant::BoundaryMarked {
            for (open, close, n) in [("[A1]", "[/A1]", n1), ("[A2]", "[/A2]", n2)] {
                ensure(m.count(open) == n && m.count(close) == n, || ctx(&format!("{open} count != mentions")))?;
            }
        }
    }
    Ok(())
}
