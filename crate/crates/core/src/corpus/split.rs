use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Corpus, SplitTag, ValidationError};

/// `(train, dev, test)` sizes for `n` dialogues: `⌊0.6n⌋`, `⌊0.2n⌋`, rest.
pub fn split_sizes(n: usize) -> (usize, usize, usize) {
    let train = n * 6 / 10;
    let dev = n * 2 / 10;
    (train, dev, n - train - dev)
}

/// Tags every dialogue train/dev/test with a seeded shuffle of the sorted
/// dialogue ids, so the result depends only on the id set and the seed.
/// Existing tags are replaced.
pub fn split_corpus(corpus: Corpus, seed: u64) -> Result<Corpus, ValidationError> {
    let mut ids: Vec<String> = corpus.dialogues().map(|d| d.id.clone()).collect();
    ids.sort();
    ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let (train, dev, _) = split_sizes(ids.len());
    let tags: BTreeMap<String, SplitTag> = ids
        .into_iter()
        .enumerate()
        .map(|(pos, id)| {
            let tag = if pos < train {
                SplitTag::Train
            } else if pos < train + dev {
                SplitTag::Dev
            } else {
                SplitTag::Test
            };
            (id, tag)
        })
        .collect();
    corpus.with_splits(Some(tags))
}
