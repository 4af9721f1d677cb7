//! Syllable grammar: initial consonant, vowel nucleus, final consonant, tone.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use super::letters::{is_modified_vowel, is_vowel, split_tone, with_tone, Tone};

/// Where the tone mark goes in the open nuclei `oa`, `oe` and `uy`.
///
/// `MainVowel` writes `hòa`, `thủy`; `LastVowel` writes `hoà`, `thuỷ`.
/// All other nuclei are placed identically by both styles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ToneStyle {
    #[default]
    MainVowel,
    LastVowel,
}

impl FromStr for ToneStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "new" | "main-vowel" => Ok(ToneStyle::MainVowel),
            "old" | "last-vowel" => Ok(ToneStyle::LastVowel),
            other => Err(format!(
                "unknown tone style `{other}` (expected new|old|main-vowel|last-vowel)"
            )),
        }
    }
}

impl fmt::Display for ToneStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ToneStyle::MainVowel => "new",
            ToneStyle::LastVowel => "old",
        })
    }
}

pub const INITIALS: [&str; 27] = [
    "ngh", "ch", "gh", "gi", "kh", "ng", "nh", "ph", "qu", "th", "tr", "b", "c", "d", "đ", "g",
    "h", "k", "l", "m", "n", "p", "r", "s", "t", "v", "x",
];

pub const CODAS: [&str; 9] = ["", "c", "ch", "m", "n", "ng", "nh", "p", "t"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CodaPolicy {
    Open,
    Closed,
    Either,
}

const NUCLEI: [(&str, CodaPolicy); 52] = [
    ("a", CodaPolicy::Either),
    ("ă", CodaPolicy::Closed),
    ("â", CodaPolicy::Closed),
    ("e", CodaPolicy::Either),
    ("ê", CodaPolicy::Either),
    ("i", CodaPolicy::Either),
    ("o", CodaPolicy::Either),
    ("ô", CodaPolicy::Either),
    ("ơ", CodaPolicy::Either),
    ("u", CodaPolicy::Either),
    ("ư", CodaPolicy::Either),
    ("y", CodaPolicy::Open),
    ("ai", CodaPolicy::Open),
    ("ao", CodaPolicy::Open),
    ("au", CodaPolicy::Open),
    ("ay", CodaPolicy::Open),
    ("âu", CodaPolicy::Open),
    ("ây", CodaPolicy::Open),
    ("eo", CodaPolicy::Open),
    ("êu", CodaPolicy::Open),
    ("ia", CodaPolicy::Open),
    ("iu", CodaPolicy::Open),
    ("oi", CodaPolicy::Open),
    ("ôi", CodaPolicy::Open),
    ("ơi", CodaPolicy::Open),
    ("ua", CodaPolicy::Open),
    ("ui", CodaPolicy::Open),
    ("ưa", CodaPolicy::Open),
    ("ưi", CodaPolicy::Open),
    ("ưu", CodaPolicy::Open),
    ("iê", CodaPolicy::Closed),
    ("yê", CodaPolicy::Closed),
    ("uô", CodaPolicy::Closed),
    ("ươ", CodaPolicy::Closed),
    ("oa", CodaPolicy::Either),
    ("oă", CodaPolicy::Closed),
    ("oe", CodaPolicy::Either),
    ("uâ", CodaPolicy::Closed),
    ("uê", CodaPolicy::Either),
    ("uy", CodaPolicy::Either),
    ("oai", CodaPolicy::Open),
    ("oay", CodaPolicy::Open),
    ("oeo", CodaPolicy::Open),
    ("uây", CodaPolicy::Open),
    ("uôi", CodaPolicy::Open),
    ("ươi", CodaPolicy::Open),
    ("ươu", CodaPolicy::Open),
    ("iêu", CodaPolicy::Open),
    ("yêu", CodaPolicy::Open),
    ("uya", CodaPolicy::Open),
    ("uyu", CodaPolicy::Open),
    ("uyê", CodaPolicy::Closed),
];

// Nuclei that may follow `qu` (whose `u` is the glide).
const AFTER_QU: [&str; 13] = [
    "a", "ă", "â", "e", "ê", "i", "y", "ơ", "ai", "ay", "ây", "eo", "yê",
];

/// A toneless syllable split into its three segments.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parts {
    pub initial: &'static str,
    pub nucleus: String,
    pub coda: &'static str,
}

impl Parts {
    pub fn letters(&self) -> String {
        format!("{}{}{}", self.initial, self.nucleus, self.coda)
    }
}

fn is_front(nucleus: &str) -> bool {
    matches!(nucleus.chars().next(), Some('i' | 'e' | 'ê' | 'y'))
}

/// Splits toneless lowercase letters into initial/nucleus/coda.
/// Only the segmentation is checked here, not the phonotactics.
pub fn split_letters(letters: &str) -> Option<Parts> {
    let chars: Vec<char> = letters.chars().collect();
    let vowel_at = |i: usize| chars.get(i).copied().is_some_and(is_vowel);

    let initial: &'static str = if letters.starts_with("qu") {
        if !vowel_at(2) {
            return None;
        }
        "qu"
    } else if letters.starts_with("gi") && vowel_at(2) {
        "gi"
    } else {
        INITIALS
            .iter()
            .copied()
            .filter(|i| *i != "qu" && *i != "gi")
            .find(|i| letters.starts_with(i))
            .unwrap_or("")
    };
    let start = initial.chars().count();
    let mut end = start;
    while vowel_at(end) {
        end += 1;
    }
    if end == start {
        return None;
    }
    let nucleus: String = chars[start..end].iter().collect();
    let rest: String = chars[end..].iter().collect();
    let coda = CODAS.iter().copied().find(|c| *c == rest)?;
    Some(Parts {
        initial,
        nucleus,
        coda,
    })
}

/// Phonotactic check of a segmented syllable carrying `tone`.
pub fn parts_are_valid(parts: &Parts, tone: Tone) -> bool {
    let nucleus = parts.nucleus.as_str();
    let Some(&(_, policy)) = NUCLEI.iter().find(|(n, _)| *n == nucleus) else {
        return false;
    };
    let coda = parts.coda;
    if matches!(
        (policy, coda.is_empty()),
        (CodaPolicy::Open, false) | (CodaPolicy::Closed, true)
    ) {
        return false;
    }
    // `gi` + ê spells the closed nucleus iê (giếng, giết).
    let gi_ie = parts.initial == "gi" && nucleus == "ê";
    if gi_ie && coda.is_empty() {
        return false;
    }

    match coda {
        "ch" | "nh" => {
            if !matches!(nucleus, "a" | "ê" | "i" | "uy" | "oa" | "uê") {
                return false;
            }
        }
        "c" | "ng" => {
            if !gi_ie && matches!(nucleus, "ê" | "i" | "y" | "ơ" | "uy" | "uê" | "oe") {
                return false;
            }
        }
        _ => {}
    }
    if matches!(coda, "c" | "ch" | "p" | "t") && !matches!(tone, Tone::Acute | Tone::Dot) {
        return false;
    }

    match parts.initial {
        "c" | "ng" if is_front(nucleus) => return false,
        "g" if is_front(nucleus) && nucleus != "i" => return false,
        "k" | "gh" | "ngh" if !is_front(nucleus) => return false,
        "qu" if !AFTER_QU.contains(&nucleus) => return false,
        "gi" if nucleus.starts_with('i') => return false,
        _ => {}
    }
    match nucleus {
        "iê" | "iêu" if parts.initial.is_empty() => false,
        "yê" | "yêu" if !(parts.initial.is_empty() || parts.initial == "qu") => false,
        _ => true,
    }
}

/// Removes tone marks. Fails when more than one tone mark is present.
pub fn strip_tones(s: &str) -> Option<(String, Tone)> {
    let mut tone = Tone::Level;
    let mut letters = String::with_capacity(s.len());
    for c in s.chars() {
        let (base, t) = split_tone(c);
        if t != Tone::Level {
            if tone != Tone::Level {
                return None;
            }
            tone = t;
        }
        letters.push(base);
    }
    Some((letters, tone))
}

/// True iff `s` is a well-formed Vietnamese syllable (lowercase, NFC).
/// The tone mark may sit on any vowel; placement is not checked here.
pub fn is_valid_syllable(s: &str) -> bool {
    let Some((letters, tone)) = strip_tones(s) else {
        return false;
    };
    split_letters(&letters).is_some_and(|p| parts_are_valid(&p, tone))
}

/// Index (within the nucleus) of the vowel that carries the tone mark.
pub fn tone_position(nucleus: &str, has_coda: bool, style: ToneStyle) -> usize {
    let chars: Vec<char> = nucleus.chars().collect();
    if let Some(i) = chars.iter().rposition(|&c| is_modified_vowel(c)) {
        return i;
    }
    if has_coda {
        return chars.len() - 1;
    }
    match chars.len() {
        3 => 1,
        2 if matches!(nucleus, "oa" | "oe" | "uy") => match style {
            ToneStyle::MainVowel => 0,
            ToneStyle::LastVowel => 1,
        },
        _ => 0,
    }
}

/// Writes the syllable with its tone on the canonical vowel.
pub fn render(parts: &Parts, tone: Tone, style: ToneStyle) -> String {
    let pos = parts.initial.chars().count()
        + tone_position(&parts.nucleus, !parts.coda.is_empty(), style);
    parts
        .letters()
        .chars()
        .enumerate()
        .map(|(i, c)| if i == pos { with_tone(c, tone) } else { c })
        .collect()
}

/// Canonical spelling of a syllable under `style`, or `None` when it is
/// not a valid syllable.
pub fn canonical(s: &str, style: ToneStyle) -> Option<String> {
    let (letters, tone) = strip_tones(s)?;
    let parts = split_letters(&letters)?;
    parts_are_valid(&parts, tone).then(|| render(&parts, tone, style))
}

/// Every valid syllable, generated from initials × nuclei × codas × tones
/// and rendered canonically. Sorted.
pub fn syllable_inventory(style: ToneStyle) -> Vec<String> {
    let mut out = BTreeSet::new();
    for initial in std::iter::once("").chain(INITIALS) {
        for (nucleus, _) in NUCLEI {
            for coda in CODAS {
                let letters = format!("{initial}{nucleus}{coda}");
                // Keep only spellings that segment back the same way.
                let Some(parts) = split_letters(&letters) else {
                    continue;
                };
                if parts.initial != initial || parts.nucleus != nucleus {
                    continue;
                }
                for tone in Tone::ALL {
                    if parts_are_valid(&parts, tone) {
                        out.insert(render(&parts, tone, style));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validity_examples() {
        assert!(is_valid_syllable("trời"));
        assert!(!is_valid_syllable("nghành"));
        assert!(!is_valid_syllable("xyz"));
        for s in [
            "của",
            "trường",
            "nghiêng",
            "giếng",
            "quyết",
            "khuya",
            "huỳnh",
            "gì",
            "già",
            "yêu",
            "tiêu",
            "hoặc",
            "người",
            "việt",
            "nam",
            "sẵn",
            "sàng",
            "ký",
            "kỹ",
            "thủy",
            "oanh",
        ] {
            assert!(is_valid_syllable(s), "{s} should be valid");
        }
        for s in [
            "", "ngà ", "ka", "ce", "ghang", "iên", "tyên", "cátt", "àc", "ắnh", "áá",
        ] {
            assert!(!is_valid_syllable(s), "{s:?} should be invalid");
        }
    }

    #[test]
    fn stop_codas_take_only_two_tones() {
        assert!(is_valid_syllable("các"));
        assert!(is_valid_syllable("học"));
        assert!(!is_valid_syllable("càc"));
        assert!(!is_valid_syllable("hỏc"));
    }

    #[test]
    fn tone_placement_per_style() {
        assert_eq!(canonical("hoà", ToneStyle::MainVowel).unwrap(), "hòa");
        assert_eq!(canonical("hòa", ToneStyle::LastVowel).unwrap(), "hoà");
        assert_eq!(canonical("cuả", ToneStyle::MainVowel).unwrap(), "của");
        assert_eq!(canonical("cuả", ToneStyle::LastVowel).unwrap(), "của");
        assert_eq!(canonical("hoàn", ToneStyle::MainVowel).unwrap(), "hoàn");
        assert_eq!(canonical("thuỷ", ToneStyle::MainVowel).unwrap(), "thủy");
        assert_eq!(canonical("qúa", ToneStyle::MainVowel).unwrap(), "quá");
        assert_eq!(canonical("ngòai", ToneStyle::MainVowel).unwrap(), "ngoài");
    }

    #[test]
    fn inventory_is_valid_and_canonical() {
        let inv = syllable_inventory(ToneStyle::MainVowel);
        assert!(inv.len() > 5000, "inventory only has {} entries", inv.len());
        for s in &inv {
            assert!(is_valid_syllable(s), "{s}");
            assert_eq!(
                canonical(s, ToneStyle::MainVowel).as_deref(),
                Some(s.as_str())
            );
        }
        for s in ["của", "trời", "hòa", "nghiêng", "người"] {
            assert!(inv.binary_search(&s.to_string()).is_ok(), "{s} missing");
        }
        assert!(inv.binary_search(&"nghành".to_string()).is_err());
    }
}
