use proptest::prelude::*;

use super::*;

fn s(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

fn seqs(src: &str, hyp: &str, r: &str) -> (SyllableSequence, SyllableSequence, SyllableSequence) {
    (
        SyllableSequence::from_spaced(src),
        SyllableSequence::from_spaced(hyp),
        SyllableSequence::from_spaced(r),
    )
}

#[test]
fn hand_case() {
    let c = Counts::of_triple(&s("a b c"), &s("a x d"), &s("a x c"));
    assert_eq!(
        c,
        Counts {
            actual_errors: 1,
            detected: 2,
            true_detections: 1,
            true_corrections: 1
        }
    );
    let m = evaluate(&[seqs("a b c", "a x d", "a x c")]).unwrap();
    assert_eq!((m.dp, m.dr, m.cp, m.cr), (0.5, 1.0, 0.5, 1.0));
    assert!((m.df - 2.0 / 3.0).abs() < 1e-12);
    assert!((m.cf - 2.0 / 3.0).abs() < 1e-12);
}

#[test]
fn alignment_shapes() {
    let a = s("một hai ba bốn");
    let cols = align(&a, &a, &a);
    assert_eq!(cols.len(), 4);
    assert!(cols
        .iter()
        .all(|(x, y, z)| x.is_some() && y.is_some() && z.is_some()));

    // A delete error: the reference has one more syllable.
    let cols = align(&s("tôi đi học"), &s("tôi đi học"), &s("tôi đã đi học"));
    assert_eq!(cols.iter().filter(|c| c.0.is_none()).count(), 1);
    let c = Counts::from_columns(&cols);
    assert_eq!((c.actual_errors, c.detected), (1, 0));

    // A duplicate error fixed by deleting it.
    let c = Counts::of_triple(&s("tôi tôi đi"), &s("tôi đi"), &s("tôi đi"));
    assert_eq!(
        c,
        Counts {
            actual_errors: 1,
            detected: 1,
            true_detections: 1,
            true_corrections: 1
        }
    );
}

#[test]
fn tie_break_prefers_substitution() {
    // "a b" -> "b": deleting "a" and matching "b" costs 1, as does
    // substituting a->b and deleting b. The traceback works from the end,
    // so the last pair is compared first: (b, b) matches.
    let steps = levenshtein(&s("a b"), &s("b"));
    assert_eq!(steps, vec![Step::Del(0), Step::Sub(1, 0)]);
    // "a" -> "b c": both cost 2; substitution wins at the end.
    let steps = levenshtein(&s("a"), &s("b c"));
    assert_eq!(steps, vec![Step::Ins(0), Step::Sub(0, 1)]);
    assert_eq!(levenshtein::<&str>(&[], &[]), vec![]);
}

#[test]
fn perfect_and_do_nothing_correctors() {
    let data = [
        seqs("tôi đi hoc", "tôi đi học", "tôi đi học"),
        seqs(
            "trời hôm nay nay đẹp",
            "trời hôm nay đẹp",
            "trời hôm nay đẹp",
        ),
        seqs("không lỗi", "không lỗi", "không lỗi"),
    ];
    let m = evaluate(&data).unwrap();
    assert_eq!(
        (m.dp, m.dr, m.df, m.cp, m.cr, m.cf),
        (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    );
    assert_eq!(m.counts.actual_errors, 2);

    let lazy: Vec<_> = data
        .iter()
        .map(|(a, _, r)| (a.clone(), a.clone(), r.clone()))
        .collect();
    let m = evaluate(&lazy).unwrap();
    assert_eq!(m.counts.detected, 0);
    assert_eq!((m.dr, m.cr, m.df, m.cf), (0.0, 0.0, 0.0, 0.0));
    // Nothing claimed: precision is vacuously 1.
    assert_eq!((m.dp, m.cp), (1.0, 1.0));

    let same = [seqs("a b", "a b", "a b")];
    let m = evaluate(&same).unwrap();
    assert_eq!(m.counts, Counts::default());
    assert_eq!((m.dp, m.dr, m.cp, m.cr), (1.0, 1.0, 1.0, 1.0));

    assert!(evaluate(&[]).is_err());
}

#[test]
fn ratio_conventions() {
    assert_eq!(ratio(0, 0, 0), 1.0);
    assert_eq!(ratio(0, 0, 3), 0.0);
    assert_eq!(ratio(1, 4, 4), 0.25);
    assert_eq!(f1(0.0, 0.0), 0.0);
    assert_eq!(f1(1.0, 0.5), 2.0 / 3.0);
}

#[test]
fn report_json_shape() {
    let m = evaluate(&[seqs("a b c", "a x d", "a x c")]).unwrap();
    let v: serde_json::Value = serde_json::to_value(m).unwrap();
    for k in ["dp", "dr", "df", "cp", "cr", "cf"] {
        assert!(v[k].is_f64(), "{k}");
    }
    assert_eq!(v["counts"]["true_corrections"], 1);
}

#[test]
fn triples_file() {
    let text =
        "{\"text\":\"tôi đi hoc\",\"predict\":\"tôi đi học\",\"correct\":\"tôi đi học\"}\n\n";
    let t = read_triples(text.as_bytes()).unwrap();
    assert_eq!(t.len(), 1);
    let bad = format!("{text}{{\"text\":1}}\n");
    match read_triples(bad.as_bytes()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
}

fn small_seq() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0..5u8, 0..10)
}

proptest! {
    #[test]
    fn alignment_invariants(src in small_seq(), hyp in small_seq(), r in small_seq()) {
        let cols = align(&src, &hyp, &r);
        prop_assert!(cols.iter().all(|c| c.0.is_some() || c.1.is_some() || c.2.is_some()));
        let strip = |k: usize| -> Vec<u8> {
            cols.iter().filter_map(|c| [c.0, c.1, c.2][k]).collect()
        };
        prop_assert_eq!(strip(0), src.clone());
        prop_assert_eq!(strip(1), hyp.clone());
        prop_assert_eq!(strip(2), r.clone());

        let c = Counts::from_columns(&cols);
        prop_assert!(c.true_corrections <= c.true_detections);
        prop_assert!(c.true_detections <= c.detected.min(c.actual_errors));
    }

    #[test]
    fn report_laws(triples in prop::collection::vec((small_seq(), small_seq(), small_seq()), 1..8)) {
        let to_seq = |v: &Vec<u8>| SyllableSequence::from_spaced(
            &v.iter().map(|x| ["ba", "be", "bi", "bo", "bu"][*x as usize]).collect::<Vec<_>>().join(" "),
        );
        let data: Vec<_> = triples.iter().map(|(a, b, c)| (to_seq(a), to_seq(b), to_seq(c))).collect();
        let m = evaluate(&data).unwrap();
        prop_assert!(m.cp <= m.dp && m.cr <= m.dr);
        for x in [m.dp, m.dr, m.df, m.cp, m.cr, m.cf] {
            prop_assert!((0.0..=1.0).contains(&x));
        }
        let hm = |p: f64, r: f64| if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        prop_assert!((m.df - hm(m.dp, m.dr)).abs() < 1e-12);
        prop_assert!((m.cf - hm(m.cp, m.cr)).abs() < 1e-12);

        let mut rev = data.clone();
        rev.reverse();
        prop_assert_eq!(evaluate(&rev).unwrap(), m);
    }
}
