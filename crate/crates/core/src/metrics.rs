//! Syllable-level detection and correction scores over
//! (source, hypothesis, reference) triples.
//!
//! Hypothesis and reference are each aligned to the source with unit-cost
//! Levenshtein alignment. The two alignments are then merged on source
//! positions; syllables inserted before the same source position are
//! paired up in order. Each resulting column is one counting unit.

use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::preprocess::{Preprocessor, SyllableSequence};
use crate::vi::Syllable;

/// One alignment step from the source's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// Source position i against other position j (equal or substituted).
    Sub(usize, usize),
    /// Source position i has no counterpart.
    Del(usize),
    /// Other position j has no source counterpart.
    Ins(usize),
}

/// Minimum-cost alignment of `a` (source) to `b`. On ties the traceback
/// prefers substitution, then deletion, then insertion.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> Vec<Step> {
    let (n, m) = (a.len(), b.len());
    let w = m + 1;
    let mut d = vec![0u32; (n + 1) * w];
    for i in 0..=n {
        d[i * w] = i as u32;
    }
    for j in 0..=m {
        d[j] = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[(i - 1) * w + j - 1] + (a[i - 1] != b[j - 1]) as u32;
            let del = d[(i - 1) * w + j] + 1;
            let ins = d[i * w + j - 1] + 1;
            d[i * w + j] = sub.min(del).min(ins);
        }
    }
    let mut steps = Vec::with_capacity(n.max(m));
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 && d[(i - 1) * w + j - 1] + (a[i - 1] != b[j - 1]) as u32 == here {
            steps.push(Step::Sub(i - 1, j - 1));
            i -= 1;
            j -= 1;
        } else if i > 0 && d[(i - 1) * w + j] + 1 == here {
            steps.push(Step::Del(i - 1));
            i -= 1;
        } else {
            steps.push(Step::Ins(j - 1));
            j -= 1;
        }
    }
    steps.reverse();
    steps
}

/// Per source position, the aligned counterpart, plus the insertions
/// that come before each source position (index n collects the tail).
struct Pivot<'a, T> {
    at: Vec<Option<&'a T>>,
    before: Vec<Vec<&'a T>>,
}

fn pivot<'a, T>(n: usize, other: &'a [T], steps: &[Step]) -> Pivot<'a, T> {
    let mut p = Pivot {
        at: vec![None; n],
        before: vec![Vec::new(); n + 1],
    };
    let mut next_src = 0;
    for s in steps {
        match *s {
            Step::Sub(i, j) => {
                p.at[i] = Some(&other[j]);
                next_src = i + 1;
            }
            Step::Del(i) => next_src = i + 1,
            Step::Ins(j) => p.before[next_src].push(&other[j]),
        }
    }
    p
}

/// A column of the three-way alignment; `None` is a gap.
pub type Column<T> = (Option<T>, Option<T>, Option<T>);

/// Three-way alignment pivoted on source positions. No column is all gaps.
pub fn align<T: PartialEq + Clone>(src: &[T], hyp: &[T], reference: &[T]) -> Vec<Column<T>> {
    let h = pivot(src.len(), hyp, &levenshtein(src, hyp));
    let r = pivot(src.len(), reference, &levenshtein(src, reference));
    let mut cols = Vec::new();
    for i in 0..=src.len() {
        let (hi, ri) = (&h.before[i], &r.before[i]);
        for k in 0..hi.len().max(ri.len()) {
            cols.push((
                None,
                hi.get(k).map(|&x| x.clone()),
                ri.get(k).map(|&x| x.clone()),
            ));
        }
        if i < src.len() {
            cols.push((Some(src[i].clone()), h.at[i].cloned(), r.at[i].cloned()));
        }
    }
    cols
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub actual_errors: u64,
    pub detected: u64,
    pub true_detections: u64,
    pub true_corrections: u64,
}

impl Counts {
    pub fn add(&mut self, o: &Counts) {
        self.actual_errors += o.actual_errors;
        self.detected += o.detected;
        self.true_detections += o.true_detections;
        self.true_corrections += o.true_corrections;
    }

    /// Column rules: an actual error is src != ref, a detection is
    /// hyp != src, a true detection is both, a true correction is a
    /// detection with hyp == ref.
    pub fn from_columns<T: PartialEq>(cols: &[Column<T>]) -> Counts {
        let mut c = Counts::default();
        for (s, h, r) in cols {
            let error = s != r;
            let flagged = h != s;
            c.actual_errors += error as u64;
            c.detected += flagged as u64;
            c.true_detections += (error && flagged) as u64;
            c.true_corrections += (flagged && h == r) as u64;
        }
        c
    }

    pub fn of_triple<T: PartialEq + Clone>(src: &[T], hyp: &[T], reference: &[T]) -> Counts {
        Counts::from_columns(&align(src, hyp, reference))
    }
}

/// `num / den`; with `den = 0` the ratio is 1.0 when `bound` (the
/// largest value `num` could take) is also 0, else 0.0.
pub fn ratio(num: u64, den: u64, bound: u64) -> f64 {
    if den == 0 {
        if bound == 0 {
            1.0
        } else {
            0.0
        }
    } else {
        num as f64 / den as f64
    }
}

/// Harmonic mean, 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub dp: f64,
    pub dr: f64,
    pub df: f64,
    pub cp: f64,
    pub cr: f64,
    pub cf: f64,
    pub counts: Counts,
}

impl MetricsReport {
    pub fn from_counts(c: Counts) -> MetricsReport {
        // A true detection needs both a detection and an actual error.
        let bound = c.detected.min(c.actual_errors);
        let dp = ratio(c.true_detections, c.detected, bound);
        let dr = ratio(c.true_detections, c.actual_errors, bound);
        let cp = ratio(c.true_corrections, c.detected, bound);
        let cr = ratio(c.true_corrections, c.actual_errors, bound);
        MetricsReport {
            dp,
            dr,
            df: f1(dp, dr),
            cp,
            cr,
            cf: f1(cp, cr),
            counts: c,
        }
    }
}

/// Scores a dataset of (source, hypothesis, reference) triples.
pub fn evaluate(
    triples: &[(SyllableSequence, SyllableSequence, SyllableSequence)],
) -> Result<MetricsReport> {
    if triples.is_empty() {
        return Err(Error::InvalidInput("evaluation set is empty".into()));
    }
    let per: Vec<Counts> = triples
        .par_iter()
        .map(|(s, h, r)| Counts::of_triple::<Syllable>(s.as_slice(), h.as_slice(), r.as_slice()))
        .collect();
    let mut total = Counts::default();
    for c in &per {
        total.add(c);
    }
    Ok(MetricsReport::from_counts(total))
}

/// One line of a scored test file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Triple {
    pub text: String,
    pub predict: String,
    pub correct: String,
}

/// Reads `{"text", "predict", "correct"}` lines. Blank lines are skipped.
pub fn read_triples(reader: impl BufRead) -> Result<Vec<Triple>> {
    let mut out = Vec::new();
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            what: "evaluation triples",
            line: n + 1,
            msg: e.to_string(),
        })?);
    }
    Ok(out)
}

/// Runs every side of every triple through the preprocessor, so
/// normalization differences are not counted, then scores.
pub fn evaluate_texts(triples: &[Triple], pre: &Preprocessor) -> Result<MetricsReport> {
    let seqs: Vec<_> = triples
        .par_iter()
        .map(|t| {
            (
                pre.preprocess_sentence(&t.text),
                pre.preprocess_sentence(&t.predict),
                pre.preprocess_sentence(&t.correct),
            )
        })
        .collect();
    evaluate(&seqs)
}

#[cfg(test)]
mod tests;
