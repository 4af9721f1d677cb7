//! Browser bindings for the demo page. Every function returns a JSON
//! string; errors come back as `{"error": "..."}`.

use std::sync::OnceLock;

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use vsec_core::error_gen::{corrupt, CorruptionConfig, EditOp, FusionTable};
use vsec_core::preprocess::{count_unigrams, PreprocessConfig, Preprocessor, SyllableSequence};
use vsec_core::tokenizer::{self, TokenizerMode};
use vsec_core::vi::ToneStyle;

fn style(name: &str) -> Result<ToneStyle, String> {
    name.parse()
}

fn reply(r: Result<Value, String>) -> String {
    r.unwrap_or_else(|e| json!({ "error": e })).to_string()
}

fn fusion_table(style: ToneStyle) -> &'static FusionTable {
    static NEW: OnceLock<FusionTable> = OnceLock::new();
    static OLD: OnceLock<FusionTable> = OnceLock::new();
    let cell = match style {
        ToneStyle::MainVowel => &NEW,
        ToneStyle::LastVowel => &OLD,
    };
    cell.get_or_init(|| FusionTable::default_rules(style))
}

/// Normalizes each line of `text`. The lines themselves supply the
/// syllable counts used to split merged words.
#[wasm_bindgen]
pub fn preprocess(text: &str, tone_style: &str, keep_punct: bool) -> String {
    reply((|| {
        let cfg = PreprocessConfig {
            keep_punct,
            tone_style: style(tone_style)?,
            ..PreprocessConfig::default()
        };
        let pre = Preprocessor::new(cfg.clone(), count_unigrams(text.lines(), &cfg));
        let lines: Vec<Value> = text
            .lines()
            .map(|l| {
                json!({
                    "input": l,
                    "tokens": pre.standardized_tokens(l),
                    "syllables": pre.preprocess_sentence(l).to_strings(),
                })
            })
            .collect();
        Ok(json!({ "lines": lines }))
    })())
}

/// Trains BPE with `merges` merges on the preprocessed `corpus` and
/// segments `sentence` with it.
#[wasm_bindgen]
pub fn tokenize(corpus: &str, merges: usize, sentence: &str) -> String {
    reply((|| {
        let cfg = PreprocessConfig::default();
        let pre = Preprocessor::new(cfg.clone(), count_unigrams(corpus.lines(), &cfg));
        let seqs: Vec<SyllableSequence> =
            corpus.lines().map(|l| pre.preprocess_sentence(l)).collect();
        let model =
            tokenizer::train(&seqs, TokenizerMode::Bpe, merges).map_err(|e| e.to_string())?;
        let s = pre.preprocess_sentence(sentence);
        let ids = model.encode(&s).ids;
        Ok(json!({
            "vocab_size": model.vocab_size(),
            "merges": model.merges().iter().map(|m| [m.left.as_str(), m.right.as_str()]).collect::<Vec<_>>(),
            "tokens": model.token_strings(&s),
            "ids": ids,
            "decoded": model.decode(&vsec_core::tokenizer::TokenSequence::new(ids.clone())).join(),
        }))
    })())
}

/// Corrupts each preprocessed line of `text` with the built-in rules.
#[wasm_bindgen]
pub fn corrupt_text(text: &str, rate: f64, seed: u64, tone_style: &str) -> String {
    reply((|| {
        let style = style(tone_style)?;
        let cfg = CorruptionConfig {
            select_rate: rate,
            seed,
            tone_style: style,
            ..CorruptionConfig::default()
        };
        cfg.validate().map_err(|e| e.to_string())?;
        let pcfg = PreprocessConfig {
            tone_style: style,
            ..PreprocessConfig::default()
        };
        let pre = Preprocessor::new(pcfg.clone(), count_unigrams(text.lines(), &pcfg));
        let table = fusion_table(style);
        let lines: Vec<Value> = text
            .lines()
            .enumerate()
            .map(|(i, l)| {
                let rec = corrupt(&pre.preprocess_sentence(l), table, &cfg, i as u64);
                let edits: Vec<Value> = rec
                    .edits
                    .iter()
                    .map(|e| {
                        json!({
                            "index": e.target_index,
                            "op": match e.op {
                                EditOp::Replace => "replace",
                                EditOp::Delete => "delete",
                                EditOp::Duplicate => "duplicate",
                            },
                            "original": e.original.as_str(),
                            "produced": e.produced.iter().map(|s| s.as_str()).collect::<Vec<_>>(),
                        })
                    })
                    .collect();
                json!({ "correct": rec.target.join(), "text": rec.source.join(), "edits": edits })
            })
            .collect();
        Ok(json!({ "lines": lines }))
    })())
}
