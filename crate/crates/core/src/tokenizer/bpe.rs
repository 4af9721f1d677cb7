use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{BpeModel, MergeRule, TokenizerMode, EOW, SPECIALS};
use crate::preprocess::SyllableSequence;

// Stands in for `/` inside training words; never takes part in a merge.
const NO_MERGE: u32 = u32::MAX;

/// One training iteration: the pair merged and how often it occurred.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeTrace {
    pub left: String,
    pub right: String,
    pub count: u64,
}

pub(super) fn syllable_frequencies<'a>(
    corpus: impl IntoIterator<Item = &'a SyllableSequence>,
) -> BTreeMap<String, u64> {
    let mut freqs = BTreeMap::new();
    for seq in corpus {
        for s in seq {
            *freqs.entry(s.as_str().to_string()).or_insert(0) += 1;
        }
    }
    freqs
}

/// Sorted initial symbols: every character seen, plus the marker.
pub(super) fn alphabet(freqs: &BTreeMap<String, u64>) -> Vec<String> {
    let mut set: BTreeSet<String> = freqs
        .keys()
        .flat_map(|s| s.chars())
        .filter(|&c| c != '/')
        .map(String::from)
        .collect();
    set.insert(EOW.to_string());
    set.into_iter().collect()
}

/// Replaces non-overlapping occurrences of (left, right), scanning left
/// to right.
pub(super) fn merge_pair(ids: &[u32], left: u32, right: u32, merged: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(ids.len());
    let mut i = 0;
    while i < ids.len() {
        if i + 1 < ids.len() && ids[i] == left && ids[i + 1] == right {
            out.push(merged);
            i += 2;
        } else {
            out.push(ids[i]);
            i += 1;
        }
    }
    out
}

/// Pair counts as the merge would see them: overlapping repeats such as
/// the middle pair of `a a a` are not counted twice.
fn count_pairs(words: &[(Vec<u32>, u64)]) -> HashMap<(u32, u32), u64> {
    let mut counts: HashMap<(u32, u32), u64> = HashMap::new();
    for (w, f) in words {
        let mut last: Option<((u32, u32), usize)> = None;
        for i in 0..w.len().saturating_sub(1) {
            let pair = (w[i], w[i + 1]);
            if pair.0 == NO_MERGE || pair.1 == NO_MERGE {
                continue;
            }
            if let Some((p, at)) = last {
                if p == pair && at + 1 == i {
                    last = None;
                    continue;
                }
            }
            *counts.entry(pair).or_insert(0) += f;
            last = Some((pair, i));
        }
    }
    counts
}

pub(super) fn train_bpe_from_freqs(
    freqs: &BTreeMap<String, u64>,
    num_merges: usize,
) -> crate::Result<(BpeModel, Vec<MergeTrace>)> {
    let initial = alphabet(freqs);
    let initial_count = initial.len();
    let mut tokens: Vec<String> = SPECIALS.iter().map(|s| s.to_string()).collect();
    tokens.extend(initial);
    let mut vocab: HashMap<String, u32> = tokens
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let eow = vocab[EOW];

    let mut words: Vec<(Vec<u32>, u64)> = freqs
        .iter()
        .map(|(s, &f)| {
            let mut ids: Vec<u32> = s
                .chars()
                .map(|c| {
                    if c == '/' {
                        NO_MERGE
                    } else {
                        vocab[&c.to_string()]
                    }
                })
                .collect();
            ids.push(eow);
            (ids, f)
        })
        .collect();

    let mut merges = Vec::new();
    let mut trace = Vec::new();
    for rank in 0..num_merges {
        let counts = count_pairs(&words);
        // Most frequent first; ties go to the smallest (right, left).
        let best = counts
            .into_iter()
            .filter(|((l, r), _)| {
                !vocab.contains_key(&format!("{}{}", tokens[*l as usize], tokens[*r as usize]))
            })
            .min_by(|((l1, r1), c1), ((l2, r2), c2)| {
                c2.cmp(c1)
                    .then_with(|| tokens[*r1 as usize].cmp(&tokens[*r2 as usize]))
                    .then_with(|| tokens[*l1 as usize].cmp(&tokens[*l2 as usize]))
            });
        let Some(((l, r), count)) = best else {
            break;
        };
        let (left, right) = (tokens[l as usize].clone(), tokens[r as usize].clone());
        let merged_str = format!("{left}{right}");
        let merged = tokens.len() as u32;
        vocab.insert(merged_str.clone(), merged);
        tokens.push(merged_str);
        for (w, _) in &mut words {
            if w.windows(2).any(|p| p[0] == l && p[1] == r) {
                *w = merge_pair(w, l, r, merged);
            }
        }
        trace.push(MergeTrace {
            left: left.clone(),
            right: right.clone(),
            count,
        });
        merges.push(MergeRule { left, right, rank });
    }

    let model = BpeModel::from_parts(TokenizerMode::Bpe, tokens, merges, initial_count)?;
    Ok((model, trace))
}
