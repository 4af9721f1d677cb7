//! Text model file:
//!
//! ```text
//! vsec-bpe v1 mode=bpe
//! specials <pad>=0 <s>=1 </s>=2 <unk>=3
//! a t
//! at /w
//! #vocab
//! <pad>	0
//! ...
//! ```

use std::io::{BufRead, Write};

use super::{BpeModel, MergeRule, TokenizerMode, SPECIALS};
use crate::error::{Error, Result};

const MAGIC: &str = "vsec-bpe v1";

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        what: "tokenizer model",
        line,
        msg: msg.into(),
    }
}

impl BpeModel {
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "{MAGIC} mode={}", self.mode)?;
        let specials: Vec<String> = SPECIALS
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s}={i}"))
            .collect();
        writeln!(w, "specials {}", specials.join(" "))?;
        for m in &self.merges {
            writeln!(w, "{} {}", m.left, m.right)?;
        }
        writeln!(w, "#vocab")?;
        for (id, t) in self.tokens.iter().enumerate() {
            writeln!(w, "{t}\t{id}")?;
        }
        Ok(())
    }

    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((i, l)) => Ok((i + 1, l?)),
                None => Err(parse_err(
                    0,
                    format!("unexpected end of file, expected {what}"),
                )),
            }
        };

        let (n, header) = next("header")?;
        let mode = header
            .strip_prefix(MAGIC)
            .and_then(|rest| rest.trim().strip_prefix("mode="))
            .ok_or_else(|| parse_err(n, format!("bad header {header:?}")))?
            .parse::<TokenizerMode>()
            .map_err(|e| parse_err(n, e))?;

        let (n, specials) = next("specials line")?;
        let expected: Vec<String> = SPECIALS
            .iter()
            .enumerate()
            .map(|(i, s)| format!("{s}={i}"))
            .collect();
        if specials != format!("specials {}", expected.join(" ")) {
            return Err(parse_err(
                n,
                format!("unsupported specials line {specials:?}"),
            ));
        }

        let mut merges = Vec::new();
        loop {
            let (n, line) = next("#vocab")?;
            if line == "#vocab" {
                break;
            }
            let (left, right) = line
                .split_once(' ')
                .filter(|(l, r)| !l.is_empty() && !r.is_empty() && !r.contains(' '))
                .ok_or_else(|| parse_err(n, format!("bad merge line {line:?}")))?;
            merges.push(MergeRule {
                left: left.to_string(),
                right: right.to_string(),
                rank: merges.len(),
            });
        }

        let mut tokens = Vec::new();
        for (i, line) in lines.by_ref() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let (tok, id) = line
                .rsplit_once('\t')
                .ok_or_else(|| parse_err(i + 1, format!("bad vocab line {line:?}")))?;
            let id: usize = id
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad token id in {line:?}")))?;
            if id != tokens.len() {
                return Err(parse_err(
                    i + 1,
                    format!("token ids must be dense, got {id}"),
                ));
            }
            tokens.push(tok.to_string());
        }
        if tokens.len() < SPECIALS.len() + merges.len() || tokens[..SPECIALS.len()] != SPECIALS {
            return Err(parse_err(
                0,
                "vocabulary must start with the special tokens",
            ));
        }
        let initial_count = tokens.len() - SPECIALS.len() - merges.len();
        BpeModel::from_parts(mode, tokens, merges, initial_count)
    }

    pub fn save(&self, path: impl AsRef<std::path::Path>) -> Result<()> {
        let f = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(f);
        self.write(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: impl AsRef<std::path::Path>) -> Result<Self> {
        let f = std::fs::File::open(path)?;
        BpeModel::read(std::io::BufReader::new(f))
    }
}
