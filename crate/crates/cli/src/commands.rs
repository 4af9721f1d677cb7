use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde_json::{json, Value};

use vsec_core::error_gen::{self, CorruptionConfig, FusionTable};
use vsec_core::metrics::{self, MetricsReport};
use vsec_core::pipeline::{self, Corrector};
use vsec_core::preprocess::{count_unigrams, PreprocessConfig, Preprocessor, SyllableSequence};
use vsec_core::tokenizer::{self, BpeModel};
use vsec_core::transformer::{train_to_file, Checkpoint, Dataset, Model, TrainConfig, Trainer};
use vsec_core::vi::UnigramModel;
use vsec_core::{Error, Result};

use crate::{
    CorrectArgs, CorruptArgs, EvaluateArgs, Normalize, PreprocessArgs, TrainArgs,
    TrainTokenizerArgs,
};

pub fn init_logging(filter: &str) {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(filter))
        .format(|buf, r| {
            writeln!(
                buf,
                "level={} {}",
                r.level().as_str().to_lowercase(),
                r.args()
            )
        })
        .init();
}

fn flatten(prefix: &str, v: &Value, out: &mut String) {
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten(&key, x, out);
            }
        }
        Value::String(s) if !s.is_empty() && !s.contains([' ', '"', '=']) => {
            out.push_str(&format!(" {prefix}={s}"));
        }
        other => out.push_str(&format!(" {prefix}={other}")),
    }
}

/// Logs one `event=<name> key=value ...` line; nested objects get dotted keys.
fn record(event: &str, fields: Value) {
    let mut line = format!("event={event}");
    flatten("", &fields, &mut line);
    info!("{line}");
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn load_unigram(path: &Path) -> Result<UnigramModel> {
    UnigramModel::read(BufReader::new(File::open(path)?))
}

fn save_unigram(model: &UnigramModel, path: &Path) -> Result<()> {
    let mut w = create(path)?;
    model.write(&mut w)?;
    w.flush()?;
    Ok(())
}

impl Normalize {
    fn config(&self) -> PreprocessConfig {
        PreprocessConfig {
            keep_punct: self.keep_punct,
            tone_style: self.tone_style,
            ..PreprocessConfig::default()
        }
    }

    /// The given unigram file, or counts over `fallback` lines.
    fn preprocessor<'a>(
        &self,
        fallback: impl IntoIterator<Item = &'a str>,
    ) -> Result<Preprocessor> {
        let cfg = self.config();
        let unigram = match &self.unigram {
            Some(p) => load_unigram(p)?,
            None => count_unigrams(fallback, &cfg),
        };
        Ok(Preprocessor::new(cfg, unigram))
    }

    fn echo(&self) -> Value {
        json!({
            "keep_punct": self.keep_punct,
            "tone_style": self.tone_style.to_string(),
            "unigram": self.unigram.as_ref().map(|p| p.display().to_string()),
        })
    }
}

pub fn preprocess(a: PreprocessArgs) -> Result<()> {
    record(
        "config",
        json!({"command": "preprocess", "in": a.input.display().to_string(), "normalize": a.norm.echo()}),
    );
    let text = fs::read_to_string(&a.input)?;
    let pre = a.norm.preprocessor(text.lines())?;
    if let Some(p) = &a.unigram_out {
        save_unigram(pre.unigram(), p)?;
    }
    let mut out = create(&a.out)?;
    let n = pre.preprocess_corpus(text.as_bytes(), &mut out)?;
    out.flush()?;
    record(
        "done",
        json!({"lines": n, "unigram_types": pre.unigram().len(), "out": a.out.display().to_string()}),
    );
    Ok(())
}

fn read_corpus(path: &Path) -> Result<Vec<SyllableSequence>> {
    Ok(fs::read_to_string(path)?
        .lines()
        .map(SyllableSequence::from_spaced)
        .collect())
}

pub fn train_tokenizer(a: TrainTokenizerArgs) -> Result<()> {
    record(
        "config",
        json!({"command": "train-tokenizer", "in": a.input.display().to_string(), "merges": a.merges, "mode": a.mode.to_string()}),
    );
    let corpus = read_corpus(&a.input)?;
    let model = tokenizer::train(&corpus, a.mode, a.merges)?;
    model.save(&a.out)?;
    record(
        "done",
        json!({"vocab_size": model.vocab_size(), "merges": model.merges().len(), "out": a.out.display().to_string()}),
    );
    Ok(())
}

fn parse_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    let parsed = if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

pub fn corrupt(a: CorruptArgs) -> Result<()> {
    let mut cfg: CorruptionConfig = match &a.config {
        Some(p) => parse_config(p)?,
        None => CorruptionConfig::default(),
    };
    if let Some(r) = a.rate {
        cfg.select_rate = r;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.tone_style = a.tone_style;
    cfg.validate()?;
    let rules = a.rules.as_ref().map(|p| p.display().to_string());
    let mut effective = serde_json::to_value(cfg)?;
    effective["tone_style"] = json!(a.tone_style.to_string());
    effective["rules"] = json!(rules);
    effective["in"] = json!(a.input.display().to_string());
    record(
        "config",
        json!({"command": "corrupt", "corruption": effective}),
    );

    let table = match &a.rules {
        Some(p) => FusionTable::load(p, a.tone_style)?,
        None => FusionTable::default_rules(a.tone_style),
    };
    let pairs = error_gen::generate_dataset_file(&a.input, &table, &cfg, &a.out)?;
    effective["pairs"] = json!(pairs);
    let meta = sidecar(&a.out, ".meta.json");
    fs::write(&meta, serde_json::to_string_pretty(&effective)? + "\n")?;
    record(
        "done",
        json!({"pairs": pairs, "fusion_entries": table.len(), "out": a.out.display().to_string(), "meta": meta.display().to_string()}),
    );
    Ok(())
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut c = match &a.config {
        Some(p) => TrainConfig::load(p).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", p.display())),
            e => e,
        })?,
        None => TrainConfig::default(),
    };
    macro_rules! set {
        ($($f:ident),*) => { $(if let Some(v) = a.$f { c.$f = v; })* };
    }
    set!(
        embedding_dimension,
        sequence_length,
        num_heads,
        num_layers,
        batch_size,
        learning_rate,
        dropout_rate,
        epochs
    );
    c.hyperparams().validate()?;
    Ok(c)
}

pub fn train(a: TrainArgs) -> Result<()> {
    let cfg = train_config(&a)?;
    record(
        "config",
        json!({
            "command": "train",
            "data": a.data.display().to_string(),
            "tokenizer": a.tokenizer.display().to_string(),
            "seed": a.seed,
            "train": serde_json::to_value(cfg)?,
            "normalize": a.norm.echo(),
        }),
    );
    let pairs = error_gen::read_pairs_file(&a.data)?;
    let tok = BpeModel::load(&a.tokenizer)?;
    let pre = a
        .norm
        .preprocessor(pairs.iter().map(|p| p.correct.as_str()))?;
    // Correction has to split merged words the same way.
    let unigram_path = sidecar(&a.out, ".unigram");
    save_unigram(pre.unigram(), &unigram_path)?;

    let hp = cfg.hyperparams();
    let data = Dataset::from_pairs(
        &pipeline::training_pairs(&pairs, &pre),
        &tok,
        hp.max_seq_len,
    );
    record(
        "data",
        json!({"pairs": data.len(), "truncated": data.truncated, "vocab_size": tok.vocab_size()}),
    );
    let model = Model::<f32>::init(hp, tok.vocab_size(), a.seed)?;
    let mut trainer = Trainer::new(Checkpoint::new(model, tok.mode(), a.seed), data)?;
    let every = a.log_every.max(1);
    train_to_file(
        &mut trainer,
        cfg.epochs,
        &a.out,
        |s| {
            if s.step % every == 0 {
                info!(
                    "event=step epoch={} step={} loss={:.6}",
                    s.epoch, s.step, s.loss
                );
            }
        },
        |r| {
            info!(
                "event=epoch epoch={} steps={} loss={:.6}",
                r.epoch, r.steps, r.mean_loss
            )
        },
    )?;
    record(
        "done",
        json!({"out": a.out.display().to_string(), "unigram": unigram_path.display().to_string()}),
    );
    Ok(())
}

/// Tokenizer, checkpoint and the unigram counts saved next to it by `train`.
fn corrector(tokenizer: &Path, ckpt: &Path, norm: &Normalize) -> Result<Corrector> {
    let tok = BpeModel::load(tokenizer)?;
    let ck = Checkpoint::load(ckpt)?;
    let unigram = match &norm.unigram {
        Some(p) => load_unigram(p)?,
        None => {
            let p = sidecar(ckpt, ".unigram");
            if p.exists() {
                load_unigram(&p)?
            } else {
                warn!(
                    "event=no_unigram path={} note=merged_words_stay_unsplit",
                    p.display()
                );
                UnigramModel::new()
            }
        }
    };
    Corrector::new(Preprocessor::new(norm.config(), unigram), tok, ck)
}

pub fn correct(a: CorrectArgs) -> Result<()> {
    record(
        "config",
        json!({
            "command": "correct",
            "tokenizer": a.tokenizer.display().to_string(),
            "ckpt": a.ckpt.display().to_string(),
            "normalize": a.norm.echo(),
        }),
    );
    let c = corrector(&a.tokenizer, &a.ckpt, &a.norm)?;
    match (&a.text, &a.input, &a.out) {
        (Some(text), _, _) => {
            let r = c.correct(text)?;
            record("done", json!({"flags": serde_json::to_value(r.flags)?}));
            println!("{}", r.output);
        }
        (None, Some(input), Some(out)) => {
            let counts = c.correct_file(input, out)?;
            record("done", serde_json::to_value(counts)?);
        }
        _ => {
            return Err(Error::Config(
                "give either --text or both --in and --out".into(),
            ))
        }
    }
    Ok(())
}

fn write_report(report: &MetricsReport, path: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    println!("{text}");
    if let Some(p) = path {
        fs::write(p, text + "\n")?;
    }
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    record(
        "config",
        json!({
            "command": "evaluate",
            "test": a.test.display().to_string(),
            "tokenizer": a.tokenizer.as_ref().map(|p| p.display().to_string()),
            "ckpt": a.ckpt.as_ref().map(|p| p.display().to_string()),
            "normalize": a.norm.echo(),
        }),
    );
    let report = match (&a.tokenizer, &a.ckpt) {
        (Some(tok), Some(ckpt)) => {
            let pairs = error_gen::read_pairs_file(&a.test)?;
            let c = corrector(tok, ckpt, &a.norm)?;
            pipeline::score(&c.predict(&pairs)?)?
        }
        _ => {
            let triples = metrics::read_triples(BufReader::new(File::open(&a.test)?))?;
            let pre = a
                .norm
                .preprocessor(triples.iter().map(|t| t.correct.as_str()))?;
            metrics::evaluate_texts(&triples, &pre)?
        }
    };
    write_report(&report, a.report.as_deref())
}
