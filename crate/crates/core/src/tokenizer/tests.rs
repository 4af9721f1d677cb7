use proptest::prelude::*;

use super::*;

fn seq(s: &str) -> SyllableSequence {
    SyllableSequence::from_spaced(s)
}

fn pair(l: &str, r: &str) -> (String, String) {
    (l.to_string(), r.to_string())
}

#[test]
fn table_two_trace() {
    let corpus = [seq("ate at")];
    let (model, trace) = train_bpe_traced(&corpus, 4).unwrap();
    let got: Vec<_> = trace.iter().map(|t| pair(&t.left, &t.right)).collect();
    assert_eq!(
        got,
        [
            pair("a", "t"),
            pair("at", "/w"),
            pair("e", "/w"),
            pair("at", "e/w")
        ]
    );
    let mut vocab: Vec<&str> = model.tokens()[SPECIALS.len()..]
        .iter()
        .map(String::as_str)
        .collect();
    vocab.sort_unstable();
    let mut want = vec!["a", "t", "e", "/w", "at", "at/w", "e/w", "ate/w"];
    want.sort_unstable();
    assert_eq!(vocab, want);
    assert_eq!(model.token_strings(&seq("ate at")), ["ate/w", "at/w"]);
}

#[test]
fn zero_merges_is_alphabet_plus_marker() {
    let model = train_bpe(&[seq("ate at")], 0).unwrap();
    assert!(model.merges().is_empty());
    assert_eq!(model.vocab_size(), SPECIALS.len() + 4);
    assert_eq!(&model.tokens()[..4], &SPECIALS.map(String::from));
}

#[test]
fn merges_do_not_overlap() {
    let model = train_bpe(&[seq("aaaa")], 1).unwrap();
    assert_eq!(model.merges()[0].output(), "aa");
    assert_eq!(model.token_strings(&seq("aaaa")), ["aa", "aa", "/w"]);
    // Three a's: one merge, one leftover.
    assert_eq!(model.token_strings(&seq("aaa")), ["aa", "a", "/w"]);
}

#[test]
fn stops_early_when_pairs_run_out() {
    let model = train_bpe(&[seq("ab")], 50).unwrap();
    // a b /w -> ab /w -> ab/w, then nothing left to merge
    assert_eq!(model.merges().len(), 2);
}

#[test]
fn specials_are_stable() {
    let model = train_bpe(&[seq("ate at")], 4).unwrap();
    assert_eq!(model.id("<pad>"), Some(PAD));
    assert_eq!(model.id("<s>"), Some(BOS));
    assert_eq!(model.id("</s>"), Some(EOS));
    assert_eq!(model.id("<unk>"), Some(UNK));
}

#[test]
fn empty_sequence_encodes_to_framing() {
    let model = train_bpe(&[seq("ate at")], 4).unwrap();
    let ts = model.encode(&SyllableSequence::default());
    assert_eq!(ts.ids, [BOS, EOS]);
    assert!(model.decode(&ts).is_empty());
}

#[test]
fn table_two_decode() {
    let model = train_bpe(&[seq("ate at")], 4).unwrap();
    let ids = vec![
        BOS,
        model.id("ate/w").unwrap(),
        model.id("at/w").unwrap(),
        EOS,
    ];
    assert_eq!(model.decode(&TokenSequence::new(ids)).join(), "ate at");
}

#[test]
fn nghanh_splits_into_two_subwords() {
    // Corpus where "ngh" and "ành" are frequent but never adjacent.
    let text = "nghe nghĩ nghiêng nghề ngh ngh ành ành ành thành hành lành";
    let corpus: Vec<_> = (0..20).map(|_| seq(text)).collect();
    let model = train_bpe(&corpus, 40).unwrap();
    assert!(model.id("ngh").is_some() && model.id("ành/w").is_some());
    assert_eq!(model.token_strings(&seq("nghành")), ["ngh", "ành/w"]);
}

#[test]
fn unknown_characters_become_unk() {
    let mut model = train_bpe(&[seq("ab ba")], 2).unwrap();
    let ts = model.encode(&seq("abz"));
    assert!(ts.ids.contains(&UNK));
    assert_eq!(model.decode(&ts).join(), "ab\u{fffd}");
    model.set_unk_placeholder('?');
    assert_eq!(model.decode(&ts).join(), "ab?");
    // The marker's slash is reserved.
    assert!(model.encode(&seq("a/b")).ids.contains(&UNK));
}

#[test]
fn encoding_applies_ranks_in_increasing_order() {
    let corpus: Vec<_> = ["trời hôm nay đẹp quá", "hôm qua trời mưa", "người ta nói"]
        .iter()
        .map(|s| seq(s))
        .collect();
    let model = train_bpe(&corpus, 60).unwrap();
    for s in ["trời", "người", "hôm", "xyz", "mưa"] {
        let (_, ranks) = model.encode_syllable_traced(s);
        assert!(ranks.windows(2).all(|w| w[0] < w[1]), "{s}: {ranks:?}");
    }
}

#[test]
fn syllable_and_char_modes() {
    let corpus = [seq("trời hôm nay trời"), seq("hôm nay")];
    let syl = train(&corpus, TokenizerMode::Syllable, 0).unwrap();
    assert_eq!(syl.token_strings(&seq("trời nay")), ["trời", "nay"]);
    let ts = syl.encode(&seq("trời mưa"));
    assert_eq!(ts.ids[2], UNK);
    assert_eq!(syl.decode(&ts).join(), "trời \u{fffd}");
    assert_eq!(syl.vocab_size(), SPECIALS.len() + 3);

    let capped = train(&corpus, TokenizerMode::Syllable, 2).unwrap();
    assert_eq!(capped.vocab_size(), SPECIALS.len() + 2);

    let ch = train(&corpus, TokenizerMode::Char, 0).unwrap();
    assert_eq!(ch.token_strings(&seq("nay")), ["n", "a", "y", "/w"]);
    let s = seq("trời hôm nay");
    assert_eq!(ch.decode(&ch.encode(&s)), s);
}

#[test]
fn model_file_round_trip_and_determinism() {
    let corpus: Vec<_> = ["trời hôm nay đẹp quá", "hôm qua trời mưa"]
        .iter()
        .map(|s| seq(s))
        .collect();
    for mode in [
        TokenizerMode::Bpe,
        TokenizerMode::Syllable,
        TokenizerMode::Char,
    ] {
        let a = train(&corpus, mode, 30).unwrap();
        let b = train(&corpus, mode, 30).unwrap();
        let (mut fa, mut fb) = (Vec::new(), Vec::new());
        a.write(&mut fa).unwrap();
        b.write(&mut fb).unwrap();
        assert_eq!(fa, fb);
        let back = BpeModel::read(fa.as_slice()).unwrap();
        assert_eq!(back, a);
        assert_eq!(back.initial_count(), a.initial_count());
        let mut again = Vec::new();
        back.write(&mut again).unwrap();
        assert_eq!(again, fa);
    }
    let text = String::from_utf8({
        let mut v = Vec::new();
        train(&corpus, TokenizerMode::Bpe, 3)
            .unwrap()
            .write(&mut v)
            .unwrap();
        v
    })
    .unwrap();
    assert!(text.starts_with("vsec-bpe v1 mode=bpe\nspecials <pad>=0 <s>=1 </s>=2 <unk>=3\n"));
}

#[test]
fn malformed_model_files_are_rejected() {
    assert!(BpeModel::read("nope\n".as_bytes()).is_err());
    let bad = "vsec-bpe v1 mode=bpe\nspecials <pad>=0 <s>=1 </s>=2 <unk>=3\nx y\n#vocab\n<pad>\t0\n<s>\t1\n</s>\t2\n<unk>\t3\n";
    let err = BpeModel::read(bad.as_bytes()).unwrap_err();
    assert!(
        err.to_string().contains("vocabulary") || err.to_string().contains("unknown token"),
        "{err}"
    );
}

fn vi_sentence() -> impl Strategy<Value = String> {
    let syl = prop::sample::select(vec![
        "trời", "hôm", "nay", "đẹp", "quá", "người", "việt", "nam", "của", "tôi", "nghiêng", "x",
    ]);
    prop::collection::vec(syl, 0..8).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn vocab_count_law(corpus in prop::collection::vec(vi_sentence(), 1..6), merges in 0usize..40) {
        let corpus: Vec<_> = corpus.iter().map(|s| seq(s)).collect();
        prop_assume!(corpus.iter().any(|s| !s.is_empty()));
        let m = train_bpe(&corpus, merges).unwrap();
        prop_assert!(m.merges().len() <= merges);
        prop_assert_eq!(m.vocab_size() - SPECIALS.len(), m.initial_count() + m.merges().len());
        for rule in m.merges() {
            prop_assert!(m.id(&rule.output()).is_some());
        }
    }

    #[test]
    fn bpe_round_trip(train_text in vi_sentence(), text in vi_sentence()) {
        let base = seq("trời hôm nay đẹp quá người việt nam của tôi nghiêng x");
        let corpus = [base, seq(&train_text)];
        let m = train_bpe(&corpus, 25).unwrap();
        let s = seq(&text);
        let ts = m.encode(&s);
        prop_assert!(ts.ids.iter().all(|&id| (id as usize) < m.vocab_size()));
        prop_assert_eq!(m.decode(&ts), s.clone());
        prop_assert_eq!(m.encode(&m.decode(&ts)), ts);
    }
}
