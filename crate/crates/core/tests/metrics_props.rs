mod common;

use std::collections::BTreeSet;

use common::*;
use dialogre::metrics::{conversational_f1, conversational_instance_score, evaluable_set, first_appearance};
use dialogre::schema::{LabelSet, RelationId};
use proptest::prelude::*;
use rand::seq::SliceRandom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn first_appearance_matches_generation(seed: u64) {
        let c = gen_case(&mut rng(seed), "d");
        prop_assert_eq!(first_appearance(&c.dialogue, &c.instance.subject), c.first_subject);
        prop_assert_eq!(first_appearance(&c.dialogue, &c.instance.object), c.first_object);
    }

    #[test]
    fn evaluable_set_matches_oracle(seed: u64) {
        let c = gen_case(&mut rng(seed), "d");
        for i in 1..=c.m() {
            prop_assert_eq!(to_ids(evaluable_set(i, &c.instance, &c.dialogue)), oracle_evaluable(&c, i));
        }
    }

    #[test]
    fn evaluable_sets_grow_and_end_full(seed: u64) {
        let c = gen_case(&mut rng(seed), "d");
        for i in 1..c.m() {
            let (a, b) = (evaluable_set(i, &c.instance, &c.dialogue), evaluable_set(i + 1, &c.instance, &c.dialogue));
            prop_assert!(a.is_subset(b));
        }
        prop_assert_eq!(evaluable_set(c.m(), &c.instance, &c.dialogue), LabelSet::all_relations());
    }

    #[test]
    fn instance_counts_match_oracle(seed: u64) {
        let mut r = rng(seed);
        let c = gen_case(&mut r, "d");
        let p = gen_prediction(&mut r, &c);
        let s = conversational_instance_score(&c.instance, &c.dialogue, &p).unwrap();
        let sets = p.per_prefix.iter().map(|(&i, &s)| (i, to_ids(s))).collect();
        prop_assert_eq!((s.num, s.p_den, s.r_den), oracle_instance(&c, &sets));
    }

    #[test]
    fn corpus_scores_match_oracle(seed: u64, n in 1usize..40) {
        let mut r = rng(seed);
        let cases = gen_cases(&mut r, n);
        let preds: Vec<_> = cases.iter().map(|c| gen_prediction(&mut r, c)).collect();
        let got = conversational_f1(&corpus_of(&cases), &preds).unwrap().conversational.unwrap();
        let (p, rc, f, sp, sr) = oracle_corpus(&cases, &preds);
        prop_assert!((got.p_c - p).abs() < 1e-12);
        prop_assert!((got.r_c - rc).abs() < 1e-12);
        prop_assert!((got.f1_c - f).abs() < 1e-12);
        prop_assert_eq!((got.instances_skipped_p, got.instances_skipped_r), (sp, sr));
    }

    #[test]
    fn perfect_predictor(seed: u64, n in 1usize..30) {
        let mut r = rng(seed);
        let mut cases = gen_cases(&mut r, n);
        // Guarantee one instance with a gold relation.
        while cases[0].ready.is_empty() {
            cases[0] = gen_case(&mut r, "d0");
        }
        let preds: Vec<_> = cases
            .iter()
            .map(|c| {
                let mut p = gen_prediction(&mut r, c);
                for (&i, set) in p.per_prefix.iter_mut() {
                    *set = c.instance.gold_relations().intersection(evaluable_set(i, &c.instance, &c.dialogue));
                }
                p
            })
            .collect();
        let s = conversational_f1(&corpus_of(&cases), &preds).unwrap().conversational.unwrap();
        prop_assert!((s.f1_c - 1.0).abs() < 1e-12, "{s:?}");
    }

    #[test]
    fn dropping_a_gold_label_never_raises_recall(seed: u64, pick: usize) {
        let mut r = rng(seed);
        let c = gen_case(&mut r, "d");
        let p = gen_prediction(&mut r, &c);
        let before = conversational_instance_score(&c.instance, &c.dialogue, &p).unwrap();
        let mut q = p.clone();
        let i = 1 + pick % c.m();
        let hit: Vec<RelationId> = q.per_prefix[&i].intersection(c.instance.gold_relations()).iter().collect();
        if let Some(&g) = hit.first() {
            q.per_prefix.get_mut(&i).unwrap().remove(g);
        }
        let after = conversational_instance_score(&c.instance, &c.dialogue, &q).unwrap();
        prop_assert!(after.num <= before.num);
        prop_assert_eq!(after.r_den, before.r_den);
    }

    #[test]
    fn non_evaluable_predictions_are_ignored(seed: u64) {
        let mut r = rng(seed);
        let c = gen_case(&mut r, "d");
        let p = gen_prediction(&mut r, &c);
        let mut q = p.clone();
        for (&i, set) in q.per_prefix.iter_mut() {
            let outside = LabelSet::all_relations().difference(evaluable_set(i, &c.instance, &c.dialogue));
            *set = set.union(outside);
        }
        prop_assert_eq!(
            conversational_instance_score(&c.instance, &c.dialogue, &p).unwrap(),
            conversational_instance_score(&c.instance, &c.dialogue, &q).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn order_and_thread_count_do_not_change_scores(seed: u64, n in 1usize..60) {
        let mut r = rng(seed);
        let cases = gen_cases(&mut r, n);
        let preds: Vec<_> = cases.iter().map(|c| gen_prediction(&mut r, c)).collect();
        let base = conversational_f1(&corpus_of(&cases), &preds).unwrap();

        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut r);
        let shuffled: Vec<_> = order.iter().map(|&k| cases[k].clone()).collect();
        let mut shuffled_preds: Vec<_> = order.iter().map(|&k| preds[k].clone()).collect();
        shuffled_preds.reverse();
        let corpus = corpus_of(&shuffled);
        for threads in [1, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let got = pool.install(|| conversational_f1(&corpus, &shuffled_preds)).unwrap();
            prop_assert_eq!(&got.to_json(), &base.to_json());
        }
    }
}

#[test]
fn unknown_instance_is_rejected() {
    let mut r = rng(7);
    let cases = gen_cases(&mut r, 3);
    let mut preds: Vec<_> = cases.iter().map(|c| gen_prediction(&mut r, c)).collect();
    preds[1].instance_id = "nope".into();
    assert!(conversational_f1(&corpus_of(&cases), &preds).is_err());
}

#[test]
fn oracle_sanity_on_fixed_seed() {
    let c = gen_case(&mut rng(1), "d");
    let full: BTreeSet<u8> = (1..=36).collect();
    assert_eq!(oracle_evaluable(&c, c.m()), full);
}
