//! Brute-force alignment oracle for the metrics.

use std::collections::HashSet;

use vsec_core::metrics::Counts;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Op {
    Diag,
    Del,
    Ins,
}

/// Exhaustive search over monotone alignments of `a` to `b`, iterative
/// deepening on cost. Paths are built from the end and tried in the order
/// Diag, Del, Ins, so the first path found at the smallest feasible
/// budget is the preferred one among all minimal-cost paths. Dead ends
/// are memoized.
pub fn alignment(a: &[u8], b: &[u8]) -> Vec<Op> {
    fn search(
        a: &[u8],
        b: &[u8],
        i: usize,
        j: usize,
        budget: u32,
        dead: &mut HashSet<(usize, usize, u32)>,
        path: &mut Vec<Op>,
    ) -> bool {
        if i == 0 && j == 0 {
            return true;
        }
        if (i.abs_diff(j) as u32) > budget || dead.contains(&(i, j, budget)) {
            return false;
        }
        if i > 0 && j > 0 {
            let c = (a[i - 1] != b[j - 1]) as u32;
            if c <= budget {
                path.push(Op::Diag);
                if search(a, b, i - 1, j - 1, budget - c, dead, path) {
                    return true;
                }
                path.pop();
            }
        }
        if i > 0 && budget >= 1 {
            path.push(Op::Del);
            if search(a, b, i - 1, j, budget - 1, dead, path) {
                return true;
            }
            path.pop();
        }
        if j > 0 && budget >= 1 {
            path.push(Op::Ins);
            if search(a, b, i, j - 1, budget - 1, dead, path) {
                return true;
            }
            path.pop();
        }
        dead.insert((i, j, budget));
        false
    }
    for budget in 0.. {
        let mut path = Vec::new();
        if search(
            a,
            b,
            a.len(),
            b.len(),
            budget,
            &mut HashSet::new(),
            &mut path,
        ) {
            path.reverse();
            return path;
        }
    }
    unreachable!()
}

pub fn cost(a: &[u8], b: &[u8], ops: &[Op]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    for op in ops {
        match op {
            Op::Diag => {
                c += (a[i] != b[j]) as usize;
                i += 1;
                j += 1;
            }
            Op::Del => {
                c += 1;
                i += 1;
            }
            Op::Ins => {
                c += 1;
                j += 1;
            }
        }
    }
    c
}

/// For each source position: its counterpart, and the symbols inserted
/// just before it (slot n holds trailing insertions).
fn slots(a: &[u8], b: &[u8]) -> (Vec<Option<u8>>, Vec<Vec<u8>>) {
    let mut at = Vec::new();
    let mut ins = vec![Vec::new()];
    let mut j = 0;
    for op in alignment(a, b) {
        match op {
            Op::Diag => {
                at.push(Some(b[j]));
                ins.push(Vec::new());
                j += 1;
            }
            Op::Del => {
                at.push(None);
                ins.push(Vec::new());
            }
            Op::Ins => {
                ins.last_mut().unwrap().push(b[j]);
                j += 1;
            }
        }
    }
    (at, ins)
}

/// Column counts from the oracle alignments, paired insertions included.
pub fn counts(src: &[u8], hyp: &[u8], r: &[u8]) -> Counts {
    let (h_at, h_ins) = slots(src, hyp);
    let (r_at, r_ins) = slots(src, r);
    let mut c = Counts::default();
    let mut tally = |s: Option<u8>, h: Option<u8>, r: Option<u8>| {
        c.actual_errors += (s != r) as u64;
        c.detected += (h != s) as u64;
        c.true_detections += (s != r && h != s) as u64;
        c.true_corrections += (h != s && h == r) as u64;
    };
    for k in 0..=src.len() {
        let (hi, ri) = (&h_ins[k], &r_ins[k]);
        for m in 0..hi.len().max(ri.len()) {
            tally(None, hi.get(m).copied(), ri.get(m).copied());
        }
        if k < src.len() {
            tally(Some(src[k]), h_at[k], r_at[k]);
        }
    }
    c
}
