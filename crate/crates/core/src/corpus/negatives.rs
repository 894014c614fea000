use std::collections::{BTreeMap, HashSet};

use super::{Corpus, RelationInstance};
use crate::schema::{ArgClass, RelationId, Schema};

/// Candidate no-relation instances: every ordered pair of distinct annotated
/// arguments of a dialogue that is not already an annotated pair and that at
/// least one relation type could connect given the argument classes.
///
/// An argument may be observed with several classes; the first admissible
/// `(subject class, object class)` combination is recorded. Output is sorted by
/// dialogue id, subject, object.
pub fn generate_negative_candidates(corpus: &Corpus) -> Vec<RelationInstance> {
    let schema = Schema::embedded();
    let mut by_dialogue: BTreeMap<&str, Vec<&RelationInstance>> = BTreeMap::new();
    for inst in corpus.instances() {
        by_dialogue.entry(&inst.dialogue_id).or_default().push(inst);
    }
    let mut out = Vec::new();
    for (dialogue_id, instances) in by_dialogue {
        let mut classes: BTreeMap<&str, Vec<ArgClass>> = BTreeMap::new();
        let mut gold: HashSet<(&str, &str)> = HashSet::new();
        for inst in &instances {
            gold.insert((&inst.subject, &inst.object));
            for (arg, class) in [(&inst.subject, inst.subject_class), (&inst.object, inst.object_class)] {
                let seen = classes.entry(arg).or_default();
                if let Some(c) = class {
                    if !seen.contains(&c) {
                        seen.push(c);
                    }
                }
            }
        }
        let mut k = 0;
        for (&x, xc) in &classes {
            for (&y, yc) in &classes {
                if x == y || gold.contains(&(x, y)) {
                    continue;
                }
                let admissible = xc
                    .iter()
                    .flat_map(|&a| yc.iter().map(move |&b| (a, b)))
                    .find(|&(a, b)| schema.any_relation_admits(a, b));
                if let Some((sc, oc)) = admissible {
                    out.push(RelationInstance {
                        dialogue_id: dialogue_id.to_string(),
                        instance_id: format!("{dialogue_id}-neg-{k}"),
                        subject: x.to_string(),
                        subject_class: Some(sc),
                        object: y.to_string(),
                        object_class: Some(oc),
                        labels: vec![RelationId::UNANSWERABLE],
                        triggers: vec![String::new()],
                    });
                    k += 1;
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::fixtures::{instance, sample_dialogue};
    use crate::corpus::Dialogue;
    use crate::schema::ArgClass::*;
    use crate::schema::type_constraint_ok;

    fn corpus(instances: Vec<RelationInstance>) -> Corpus {
        Corpus::new(vec![sample_dialogue()], instances, None).unwrap()
    }

    #[test]
    fn pairs_speaker_one_with_pheebs() {
        let c = corpus(vec![
            instance("r2", "Speaker 2", Per, "Frank", Per, &[("per:siblings", "brother")]),
            instance("r3", "Speaker 2", Per, "Pheebs", Name, &[("per:alternate_names", "")]),
            instance("r5", "Speaker 1", Per, "Speaker 2", Per, &[("per:friends", "")]),
        ]);
        let cands = generate_negative_candidates(&c);
        let pairs: Vec<_> = cands.iter().map(|i| (i.subject.as_str(), i.object.as_str())).collect();
        assert!(pairs.contains(&("Speaker 1", "Pheebs")));
        // NAME-only arguments never act as subjects.
        assert!(!pairs.iter().any(|(s, _)| *s == "Pheebs"));
        assert!(cands.iter().all(|i| i.is_unanswerable()));
        let mut sorted = pairs.clone();
        sorted.sort();
        assert_eq!(pairs, sorted);
    }

    #[test]
    fn gpe_value_pair_excluded() {
        let c = corpus(vec![
            instance("a", "Speaker 1", Per, "Paris", Gpe, &[("per:place_of_residence", "")]),
            instance("b", "Speaker 1", Per, "33", Value, &[("per:age", "")]),
        ]);
        let cands = generate_negative_candidates(&c);
        assert!(!cands.iter().any(|i| i.subject == "Paris" && i.object == "33"));
        assert!(cands.iter().any(|i| i.subject == "Paris" && i.object == "Speaker 1"));
    }

    /// Brute force: enumerate all ordered pairs and check the constraint table directly.
    fn brute_force(args: &[(&str, ArgClass)], gold: &[(&str, &str)]) -> usize {
        let schema = Schema::embedded();
        let mut n = 0;
        for &(x, xc) in args {
            for &(y, yc) in args {
                let admitted = schema.relations().iter().any(|r| type_constraint_ok(xc, yc, r));
                if x != y && !gold.contains(&(x, y)) && admitted {
                    n += 1;
                }
            }
        }
        n
    }

    #[test]
    fn three_person_arguments() {
        let args = [("A", Per), ("B", Per), ("C", Per)];
        let d = Dialogue::new("d0", [("A", "hi B and C")]);
        let both = vec![
            instance("g", "A", Per, "B", Per, &[("per:friends", "")]),
            instance("h", "B", Per, "A", Per, &[("per:friends", "")]),
            instance("i", "A", Per, "C", Per, &[("unanswerable", "")]),
        ];
        let c = Corpus::new(vec![d.clone()], both, None).unwrap();
        let expected = brute_force(&args, &[("A", "B"), ("B", "A"), ("A", "C")]);
        assert_eq!(expected, 3);
        assert_eq!(generate_negative_candidates(&c).len(), expected);

        let one = vec![instance("g", "A", Per, "B", Per, &[("per:boss", "")]), instance("i", "C", Per, "A", Per, &[("unanswerable", "")])];
        let c = Corpus::new(vec![d], one, None).unwrap();
        assert_eq!(generate_negative_candidates(&c).len(), brute_force(&args, &[("A", "B"), ("C", "A")]));
    }
}
