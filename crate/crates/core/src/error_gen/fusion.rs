use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::keyboard::slip_typings;
use crate::error::{Error, Result};
use crate::vi::{
    canonical, parts_are_valid, render, split_letters, strip_tones, syllable_inventory, Syllable,
    Tone, ToneStyle, CODAS, INITIALS,
};

/// Rules shipped with the crate.
pub const DEFAULT_RULES: &str = include_str!("../../data/fusion_rules.tsv");

/// A generative confusion class, expanded over the syllable inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RuleClass {
    /// One telex key left out or replaced by a QWERTY neighbor.
    Keyboard,
    Initial(Vec<&'static str>),
    Final(Vec<&'static str>),
    Tone(Vec<Tone>),
}

impl RuleClass {
    /// Parses `keyboard`, `initial l<->n`, `final c<->t`, `tone hỏi<->ngã`, ...
    pub fn parse(name: &str) -> std::result::Result<RuleClass, String> {
        let name = name.trim();
        if name == "keyboard" {
            return Ok(RuleClass::Keyboard);
        }
        let (kind, members) = name
            .split_once(' ')
            .ok_or_else(|| format!("unknown rule class `{name}`"))?;
        let members: Vec<&str> = members.trim().split("<->").map(str::trim).collect();
        if members.len() < 2 {
            return Err(format!(
                "rule class `{name}` needs at least two members joined by <->"
            ));
        }
        let unique: BTreeSet<&str> = members.iter().copied().collect();
        if unique.len() != members.len() {
            return Err(format!("rule class `{name}` repeats a member"));
        }
        let pick = |set: &[&'static str], what: &str| {
            members
                .iter()
                .map(|m| {
                    set.iter()
                        .copied()
                        .find(|s| s == m && !s.is_empty())
                        .ok_or_else(|| format!("`{m}` is not {what}"))
                })
                .collect::<std::result::Result<Vec<_>, _>>()
        };
        match kind {
            "initial" => Ok(RuleClass::Initial(pick(&INITIALS, "an initial consonant")?)),
            "final" => Ok(RuleClass::Final(pick(&CODAS, "a final consonant")?)),
            "tone" => members
                .iter()
                .map(|m| Tone::from_name(m).ok_or_else(|| format!("`{m}` is not a tone name")))
                .collect::<std::result::Result<Vec<_>, _>>()
                .map(RuleClass::Tone),
            other => Err(format!("unknown rule class kind `{other}`")),
        }
    }

    /// Valid syllables this class relates to `s` (not including `s`).
    pub fn expand(&self, s: &str, style: ToneStyle) -> Vec<String> {
        let Some((letters, tone)) = strip_tones(s) else {
            return Vec::new();
        };
        let Some(parts) = split_letters(&letters) else {
            return Vec::new();
        };
        let build = |letters: &str, tone: Tone| -> Option<String> {
            let p = split_letters(letters)?;
            parts_are_valid(&p, tone).then(|| render(&p, tone, style))
        };
        let mut out = Vec::new();
        match self {
            RuleClass::Keyboard => {
                out = slip_typings(s, style)
                    .into_iter()
                    .filter(|t| canonical(t, style).as_deref() == Some(t.as_str()))
                    .collect();
            }
            RuleClass::Initial(group) => {
                let rest = format!("{}{}", parts.nucleus, parts.coda);
                let mut readings = vec![(parts.initial, rest.clone())];
                // `gì`, `gìn`: the `i` is shared between `gi` and the rhyme.
                if parts.initial == "g" && rest.starts_with('i') {
                    readings.push(("gi", rest));
                }
                for (onset, rest) in readings {
                    if !group.contains(&onset) {
                        continue;
                    }
                    for &m in group.iter().filter(|&&m| m != onset) {
                        out.extend(build(&format!("{m}{rest}"), tone));
                        if m == "gi" && rest.starts_with('i') {
                            out.extend(build(&format!("g{rest}"), tone));
                        }
                    }
                }
            }
            RuleClass::Final(group) => {
                if group.contains(&parts.coda) {
                    for &m in group.iter().filter(|&&m| m != parts.coda) {
                        out.extend(build(
                            &format!("{}{}{m}", parts.initial, parts.nucleus),
                            tone,
                        ));
                    }
                }
            }
            RuleClass::Tone(group) => {
                if group.contains(&tone) {
                    for &t in group.iter().filter(|&&t| t != tone) {
                        out.extend(build(&letters, t));
                    }
                }
            }
        }
        out.retain(|c| c != s);
        out
    }
}

/// Syllable -> confusable candidates. Keys and candidates are NFC; no list
/// contains its own key. Immutable once built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FusionTable {
    entries: BTreeMap<Syllable, Vec<Syllable>>,
}

impl FusionTable {
    /// Parses a rules file and expands its classes over every syllable of
    /// the inventory rendered in `style`.
    pub fn from_rules(text: &str, style: ToneStyle) -> Result<FusionTable> {
        let mut classes = Vec::new();
        let mut pairs = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::Parse {
                what: "fusion rules",
                line: i + 1,
                msg,
            };
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                ["class", name] => classes.push(RuleClass::parse(name).map_err(err)?),
                ["pair", a, b] => {
                    let norm = |s: &str| {
                        let syl = Syllable::new(s)
                            .ok_or_else(|| err(format!("`{s}` is not a single token")))?;
                        Ok::<_, Error>(match canonical(syl.as_str(), style) {
                            Some(c) => Syllable::new(&c).expect("canonical syllable"),
                            None => syl,
                        })
                    };
                    let (a, b) = (norm(a)?, norm(b)?);
                    if a == b {
                        return Err(err(format!("pair `{a}` maps a syllable to itself")));
                    }
                    pairs.push((a, b));
                }
                _ => {
                    return Err(err(format!(
                        "expected `class<TAB>name` or `pair<TAB>a<TAB>b`, got {line:?}"
                    )))
                }
            }
        }

        let mut map: BTreeMap<Syllable, BTreeSet<Syllable>> = BTreeMap::new();
        if !classes.is_empty() {
            for s in syllable_inventory(style) {
                let mut cands = BTreeSet::new();
                for class in &classes {
                    cands.extend(
                        class
                            .expand(&s, style)
                            .iter()
                            .filter_map(|c| Syllable::new(c)),
                    );
                }
                if !cands.is_empty() {
                    map.insert(Syllable::new(&s).expect("inventory syllable"), cands);
                }
            }
        }
        for (a, b) in pairs {
            map.entry(a.clone()).or_default().insert(b.clone());
            map.entry(b).or_default().insert(a);
        }
        Ok(FusionTable {
            entries: map
                .into_iter()
                .map(|(k, v)| (k, v.into_iter().collect()))
                .collect(),
        })
    }

    pub fn load(path: impl AsRef<Path>, style: ToneStyle) -> Result<FusionTable> {
        let text = std::fs::read_to_string(path)?;
        FusionTable::from_rules(&text, style)
    }

    /// The table built from [`DEFAULT_RULES`].
    pub fn default_rules(style: ToneStyle) -> FusionTable {
        FusionTable::from_rules(DEFAULT_RULES, style).expect("bundled rules parse")
    }

    pub fn candidates(&self, syllable: &str) -> &[Syllable] {
        Syllable::new(syllable)
            .and_then(|s| self.entries.get(&s))
            .map_or(&[], Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Syllable, &[Syllable])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

/// Loads a rules file into a table (rules rendered in `style`).
pub fn build_fusion_table(rules_file: impl AsRef<Path>, style: ToneStyle) -> Result<FusionTable> {
    FusionTable::load(rules_file, style)
}
