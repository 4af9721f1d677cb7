use std::sync::OnceLock;

use proptest::prelude::*;
use rand::Rng;
use unicode_normalization::UnicodeNormalization;

use super::*;
use crate::vi::{is_valid_syllable, syllable_inventory};

const NEW: ToneStyle = ToneStyle::MainVowel;

fn default_table() -> &'static FusionTable {
    static T: OnceLock<FusionTable> = OnceLock::new();
    T.get_or_init(|| FusionTable::default_rules(NEW))
}

fn table(rules: &str) -> FusionTable {
    FusionTable::from_rules(rules, NEW).unwrap()
}

fn strs(v: &[Syllable]) -> Vec<&str> {
    v.iter().map(Syllable::as_str).collect()
}

fn seq(s: &str) -> SyllableSequence {
    SyllableSequence::from_spaced(s)
}

#[test]
fn initial_l_n() {
    let t = table("class\tinitial l<->n\n");
    assert!(strs(t.candidates("neo")).contains(&"leo"));
    assert!(strs(t.candidates("leo")).contains(&"neo"));
    assert!(t.candidates("hôm").is_empty());
}

#[test]
fn tone_hoi_nga() {
    let t = table("class\ttone hỏi<->ngã\n");
    assert_eq!(strs(t.candidates("sẵn")), ["sẳn"]);
    assert_eq!(strs(t.candidates("sẳn")), ["sẵn"]);
    assert!(t.candidates("săn").is_empty());
}

#[test]
fn d_gi_r_share_the_i() {
    let t = table("class\tinitial d<->gi<->r\n");
    assert_eq!(strs(t.candidates("gia")), ["da", "ra"]);
    assert_eq!(strs(t.candidates("dì")), ["gì", "rì"]);
    assert_eq!(strs(t.candidates("gì")), ["dì", "rì"]);
    assert_eq!(strs(t.candidates("giữ")), ["dữ", "rữ"]);
}

#[test]
fn finals_and_consonants() {
    let t = table(
        "class\tfinal n<->ng\nclass\tfinal c<->t\nclass\tinitial tr<->ch\nclass\tinitial s<->x\n",
    );
    assert!(strs(t.candidates("bàn")).contains(&"bàng"));
    assert!(strs(t.candidates("các")).contains(&"cát"));
    assert!(strs(t.candidates("trời")).contains(&"chời"));
    assert!(strs(t.candidates("sương")).contains(&"xương"));
}

#[test]
fn keyboard_class_keeps_only_syllables() {
    let t = table("class\tkeyboard\n");
    let c = strs(t.candidates("trời"));
    assert!(!c.is_empty());
    assert!(c.iter().all(|s| is_valid_syllable(s)), "{c:?}");
    // `trowif` with the `w` left out
    assert!(c.contains(&"tròi"), "{c:?}");
}

#[test]
fn explicit_pairs_are_symmetric() {
    let t = table("pair\ttrời\ttrới\n# comment\n\npair\tneo\tleo\n");
    assert_eq!(strs(t.candidates("trới")), ["trời"]);
    assert_eq!(strs(t.candidates("leo")), ["neo"]);
    assert_eq!(t.len(), 4);
}

#[test]
fn malformed_rules_report_the_line() {
    for (text, line) in [
        ("class\tkeyboard\nbogus line\n", 2),
        ("\n\nclass\tinitial l<->\n", 3),
        ("class\tinitial l<->q\n", 1),
        ("class\ttone hỏi<->ngá\n", 1),
        ("class\tvowel a<->e\n", 1),
        ("pair\ta\n", 1),
        ("pair\tneo\tneo\n", 1),
    ] {
        match FusionTable::from_rules(text, NEW) {
            Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text:?}"),
            other => panic!("{text:?}: {other:?}"),
        }
    }
}

#[test]
fn default_table_invariants() {
    let t = default_table();
    assert!(t.len() > 1000);
    for (k, cands) in t.iter() {
        assert!(!cands.is_empty());
        assert!(!cands.contains(k), "{k}");
        assert_eq!(k.as_str().nfc().collect::<String>(), k.as_str());
        for c in cands {
            assert_eq!(c.as_str().nfc().collect::<String>(), c.as_str());
        }
    }
    assert!(strs(t.candidates("neo")).contains(&"leo"));
    let sawn = strs(t.candidates("sẵn"));
    assert!(sawn.contains(&"sẳn") && sawn.contains(&"sãn"), "{sawn:?}");
}

#[test]
fn zero_rate_changes_nothing() {
    let cfg = CorruptionConfig {
        select_rate: 0.0,
        ..Default::default()
    };
    let s = seq("trời hôm nay đẹp quá");
    let r = corrupt(&s, default_table(), &cfg, 3);
    assert_eq!(r.source, s);
    assert!(r.edits.is_empty());
}

#[test]
fn forced_delete_empties_the_sentence() {
    let cfg = CorruptionConfig {
        select_rate: 1.0,
        op_weights: OpWeights {
            replace: 0.0,
            delete: 1.0,
            duplicate: 0.0,
        },
        ..Default::default()
    };
    cfg.validate().unwrap();
    let s = seq("trời hôm nay đẹp quá");
    let r = corrupt(&s, default_table(), &cfg, 0);
    assert!(r.source.is_empty());
    assert_eq!(r.edits.len(), 5);
    assert!(r.edits.iter().all(|e| e.op == EditOp::Delete));
}

#[test]
fn config_validation() {
    let mut cfg = CorruptionConfig::default();
    cfg.validate().unwrap();
    cfg.select_rate = 1.5;
    assert!(cfg.validate().is_err());
    cfg.select_rate = 0.1;
    cfg.op_weights.delete = 0.2;
    assert!(cfg.validate().is_err());
    let parsed: CorruptionConfig =
        toml::from_str("select_rate = 0.1\nseed = 9\n[op_weights]\nreplace = 0.5\ndelete = 0.25\nduplicate = 0.25\n").unwrap();
    parsed.validate().unwrap();
    assert_eq!(parsed.seed, 9);
    assert!(toml::from_str::<CorruptionConfig>("rate = 0.1\n").is_err());
}

#[test]
fn dataset_edge_cases() {
    let cfg = CorruptionConfig {
        seed: 5,
        ..Default::default()
    };
    let mut out = Vec::new();
    assert_eq!(
        generate_dataset("".as_bytes(), default_table(), &cfg, &mut out).unwrap(),
        0
    );
    assert!(out.is_empty());

    let mut out = Vec::new();
    let n = generate_dataset(
        "trời hôm nay đẹp quá\n".as_bytes(),
        default_table(),
        &cfg,
        &mut out,
    )
    .unwrap();
    assert_eq!(n, 1);
    let pairs = read_pairs(out.as_slice()).unwrap();
    assert_eq!(pairs[0].correct, "trời hôm nay đẹp quá");
}

fn synthetic_corpus(lines: usize) -> String {
    let inv = syllable_inventory(NEW);
    let mut rng = sentence_rng(99, 0);
    let mut text = String::new();
    for _ in 0..lines {
        let n = rng.gen_range(1..15);
        let words: Vec<&str> = (0..n)
            .map(|_| inv[rng.gen_range(0..inv.len())].as_str())
            .collect();
        text.push_str(&words.join(" "));
        text.push('\n');
    }
    text
}

#[test]
fn dataset_is_deterministic_and_seed_dependent() {
    let corpus = synthetic_corpus(300);
    let run = |seed| {
        let cfg = CorruptionConfig {
            seed,
            ..Default::default()
        };
        let mut out = Vec::new();
        generate_dataset(corpus.as_bytes(), default_table(), &cfg, &mut out).unwrap();
        out
    };
    assert_eq!(run(1), run(1));
    assert_ne!(run(1), run(2));
}

#[test]
fn rates_are_close_to_config() {
    let corpus = synthetic_corpus(3000);
    let cfg = CorruptionConfig {
        seed: 11,
        ..Default::default()
    };
    let mut stats = CorruptionStats::default();
    for (i, line) in corpus.lines().enumerate() {
        stats.add(&corrupt(&seq(line), default_table(), &cfg, i as u64));
    }
    let rate = stats.selected() as f64 / stats.syllables as f64;
    // ~22k syllables: sigma of the rate is under 0.002
    assert!((rate - 0.08).abs() < 0.01, "{rate}");
    let replace = stats.replace as f64 / stats.selected() as f64;
    assert!((replace - 0.9).abs() < 0.04, "{replace}");
}

fn sentence() -> impl Strategy<Value = String> {
    let words = prop::sample::select(vec![
        "trời", "hôm", "nay", "đẹp", "quá", "neo", "sẵn", "gì", ",", "2020", "của", "người",
        "thuyền",
    ]);
    prop::collection::vec(words, 1..20).prop_map(|v| v.join(" "))
}

proptest! {
    #[test]
    fn replay_and_length_law(text in sentence(), seed in any::<u64>(), idx in 0u64..1000, rate in 0.0f64..=1.0) {
        let cfg = CorruptionConfig { seed, select_rate: rate, ..Default::default() };
        let clean = seq(&text);
        let r = corrupt(&clean, default_table(), &cfg, idx);
        prop_assert_eq!(r.replay(), r.source.clone());
        let dels = r.edits.iter().filter(|e| e.op == EditOp::Delete).count();
        let dups = r.edits.iter().filter(|e| e.op == EditOp::Duplicate).count();
        prop_assert_eq!(r.source.len(), r.target.len() - dels + dups);
        for e in &r.edits {
            prop_assert_eq!(&clean.as_slice()[e.target_index], &e.original);
            if e.op == EditOp::Replace {
                prop_assert_ne!(&e.produced[0], &e.original);
            }
        }
        prop_assert_eq!(corrupt(&clean, default_table(), &cfg, idx), r);
    }
}
