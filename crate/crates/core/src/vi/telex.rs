//! Telex conversion in both directions.
//!
//! The composer follows the usual telex conventions: `aa`/`ee`/`oo` add a
//! circumflex, `w` adds a breve or horn (`uow` gives `ươ`), `dd` gives `đ`,
//! and a trailing `s f r x j` sets the tone (`z` clears it). Circumflex and
//! horn keys may be typed after the final consonant (`homo` → `hôm`), and
//! repeating a key right after it took effect undoes it (`ooo` → `oo`).

use std::fmt;

use super::grammar::{parts_are_valid, render, split_letters, ToneStyle};
use super::letters::{is_vowel, letter_keys, split_tone, Tone};

/// An ASCII telex spelling such as `truwowngf`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TelexForm(String);

impl TelexForm {
    pub fn new(s: impl Into<String>) -> Self {
        TelexForm(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True when the form uses only the keys `a`–`z`.
    pub fn is_plain_ascii(&self) -> bool {
        self.0.chars().all(|c| c.is_ascii_lowercase())
    }
}

impl fmt::Display for TelexForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Result of rendering a telex string back to a marked syllable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Standardized {
    pub text: String,
    /// False when the keys did not compose to a valid syllable; `text` is
    /// then the input, verbatim.
    pub standardizable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Undo {
    Letters {
        key: char,
        first: (usize, char),
        second: Option<(usize, char)>,
    },
    Tone {
        key: char,
        previous: Tone,
    },
    Push {
        key: char,
        at: usize,
    },
}

impl Undo {
    fn key(&self) -> char {
        match *self {
            Undo::Letters { key, .. } | Undo::Tone { key, .. } | Undo::Push { key, .. } => key,
        }
    }
}

/// Toneless letters plus tone, as produced by feeding keys.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Composition {
    pub letters: Vec<char>,
    pub tone: Tone,
    last: Option<Undo>,
}

impl Composition {
    pub fn letters_string(&self) -> String {
        self.letters.iter().collect()
    }

    fn has_vowel(&self) -> bool {
        self.letters.iter().any(|&c| is_vowel(c))
    }

    /// Index of the nearest vowel, looking back over consonant letters only.
    fn nearest_vowel(&self) -> Option<usize> {
        for (i, &c) in self.letters.iter().enumerate().rev() {
            if is_vowel(c) {
                return Some(i);
            }
            if !c.is_alphabetic() {
                return None;
            }
        }
        None
    }

    /// Bounds of the vowel run ending at `end`, skipping the `u` of `qu`.
    fn vowel_run(&self, end: usize) -> (usize, usize) {
        let mut start = end;
        while start > 0 && is_vowel(self.letters[start - 1]) {
            start -= 1;
        }
        if start > 0 && self.letters[start - 1] == 'q' && self.letters[start] == 'u' && start < end
        {
            start += 1;
        }
        (start, end)
    }

    pub fn feed(&mut self, key: char) {
        if let Some(undo) = self.last.take() {
            if undo.key() == key {
                self.revert(undo);
                self.letters.push(key);
                return;
            }
        }
        let (base, tone) = split_tone(key);
        if tone != Tone::Level {
            self.letters.push(base);
            self.tone = tone;
            return;
        }
        match key {
            'a' | 'e' | 'o' => self.circumflex(key),
            'w' => self.horn(),
            'd' => self.stroke(),
            'z' if self.has_vowel() => {
                self.last = Some(Undo::Tone {
                    key,
                    previous: self.tone,
                });
                self.tone = Tone::Level;
            }
            _ => match Tone::from_telex_key(key) {
                Some(t) if self.has_vowel() => {
                    self.last = Some(Undo::Tone {
                        key,
                        previous: self.tone,
                    });
                    self.tone = t;
                }
                _ => self.letters.push(key),
            },
        }
    }

    fn revert(&mut self, undo: Undo) {
        match undo {
            Undo::Letters { first, second, .. } => {
                self.letters[first.0] = first.1;
                if let Some((i, c)) = second {
                    self.letters[i] = c;
                }
            }
            Undo::Tone { previous, .. } => self.tone = previous,
            Undo::Push { at, .. } => {
                self.letters.truncate(at);
            }
        }
    }

    fn circumflex(&mut self, key: char) {
        let target = match key {
            'a' => 'â',
            'e' => 'ê',
            _ => 'ô',
        };
        match self.nearest_vowel() {
            Some(i) if self.letters[i] == key => {
                self.letters[i] = target;
                self.last = Some(Undo::Letters {
                    key,
                    first: (i, key),
                    second: None,
                });
            }
            _ => self.letters.push(key),
        }
    }

    fn horn(&mut self) {
        let Some(end) = self.nearest_vowel() else {
            let at = self.letters.len();
            self.letters.push('ư');
            self.last = Some(Undo::Push { key: 'w', at });
            return;
        };
        let (start, end) = self.vowel_run(end);
        let run = &self.letters[start..=end];

        // u+o together take the horn: uo, ưo, uơ -> ươ
        if let Some(k) = (0..run.len().saturating_sub(1))
            .find(|&k| matches!(run[k], 'u' | 'ư') && matches!(run[k + 1], 'o' | 'ơ'))
        {
            let (i, j) = (start + k, start + k + 1);
            if self.letters[i] != 'ư' || self.letters[j] != 'ơ' {
                self.last = Some(Undo::Letters {
                    key: 'w',
                    first: (i, self.letters[i]),
                    second: Some((j, self.letters[j])),
                });
                self.letters[i] = 'ư';
                self.letters[j] = 'ơ';
                return;
            }
        }

        let run_str: String = run.iter().collect();
        let target = if matches!(run_str.as_str(), "ua" | "ui" | "uu") {
            Some(start)
        } else {
            run.iter()
                .rposition(|c| matches!(c, 'a' | 'o' | 'u'))
                .map(|k| start + k)
        };
        match target {
            Some(i) => {
                let old = self.letters[i];
                self.letters[i] = match old {
                    'a' => 'ă',
                    'o' => 'ơ',
                    _ => 'ư',
                };
                self.last = Some(Undo::Letters {
                    key: 'w',
                    first: (i, old),
                    second: None,
                });
            }
            None => self.letters.push('w'),
        }
    }

    fn stroke(&mut self) {
        if self.letters.first() == Some(&'d') {
            self.letters[0] = 'đ';
            self.last = Some(Undo::Letters {
                key: 'd',
                first: (0, 'd'),
                second: None,
            });
        } else {
            self.letters.push('d');
        }
    }
}

/// Feeds every character of `keys` through the composer.
pub fn compose(keys: &str) -> Composition {
    let mut c = Composition::default();
    for k in keys.chars() {
        c.feed(k);
    }
    c
}

/// Converts a marked syllable to its telex spelling: modifier keys follow
/// their vowel and the tone key goes last (`trường` → `truwowngf`).
///
/// Characters outside the Vietnamese alphabet pass through. Where the
/// composer would otherwise reinterpret a literal letter, the key is
/// doubled so the form still composes back to the same letters.
pub fn to_telex(s: &str) -> TelexForm {
    let mut letters = Vec::new();
    let mut tone = Tone::Level;
    for c in s.chars() {
        let (base, t) = split_tone(c);
        if t != Tone::Level {
            tone = t;
        }
        letters.push(base);
    }

    let mut out = String::with_capacity(s.len() + 3);
    for (i, &c) in letters.iter().enumerate() {
        let keys = letter_keys(c).unwrap_or("");
        if keys.is_empty() {
            out.push(c);
        } else {
            out.push_str(keys);
        }
        let want = &letters[..=i];
        if compose(&out).letters != want {
            let last = out.chars().last().unwrap_or(c);
            out.push(last);
        }
    }
    if let Some(key) = tone.telex_key() {
        out.push(key);
    }
    TelexForm(out)
}

/// Composes telex (or already-marked) keys into a syllable with the tone
/// on its canonical vowel. `cuar` → `của`, `hoaf` → `hòa` (main-vowel style).
pub fn standardize_marks(keys: &str, style: ToneStyle) -> Standardized {
    let comp = compose(keys);
    let letters = comp.letters_string();
    match split_letters(&letters) {
        Some(parts) if parts_are_valid(&parts, comp.tone) => Standardized {
            text: render(&parts, comp.tone, style),
            standardizable: true,
        },
        _ => Standardized {
            text: keys.to_string(),
            standardizable: false,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vi::grammar::syllable_inventory;

    const NEW: ToneStyle = ToneStyle::MainVowel;

    #[test]
    fn telex_examples() {
        assert_eq!(to_telex("của").as_str(), "cuar");
        assert_eq!(to_telex("an").as_str(), "an");
        assert_eq!(to_telex("trường").as_str(), "truwowngf");
        assert_eq!(to_telex("đẹp").as_str(), "ddepj");
    }

    #[test]
    fn standardize_examples() {
        assert_eq!(standardize_marks("cuar", NEW).text, "của");
        assert_eq!(standardize_marks("an", NEW).text, "an");
        assert_eq!(standardize_marks("hoaf", NEW).text, "hòa");
        assert_eq!(standardize_marks("hoaf", ToneStyle::LastVowel).text, "hoà");
        assert_eq!(standardize_marks("cuả", NEW).text, "của");
        assert_eq!(standardize_marks("homo", NEW).text, "hôm");
        assert_eq!(standardize_marks("truwowngf", NEW).text, "trường");
        assert_eq!(standardize_marks("nguoiwf", NEW).text, "người");
    }

    #[test]
    fn unstandardizable_input_is_verbatim() {
        let r = standardize_marks("xyzq", NEW);
        assert!(!r.standardizable);
        assert_eq!(r.text, "xyzq");
    }

    #[test]
    fn repeated_key_undoes() {
        assert_eq!(compose("ooo").letters_string(), "oo");
        assert_eq!(compose("ass").letters_string(), "as");
        assert_eq!(compose("ass").tone, Tone::Level);
        assert_eq!(to_telex("bus").as_str(), "buss");
        assert_eq!(to_telex("xoong").as_str(), "xooong");
    }

    #[test]
    fn hoa_has_exactly_one_canonical_placement() {
        // Both placements are enumerated; only the configured one survives.
        let candidates = ["hòa", "hoà"];
        let outputs: Vec<_> = candidates
            .iter()
            .map(|c| standardize_marks(&to_telex(c).0, NEW).text)
            .collect();
        assert!(outputs.iter().all(|o| o == "hòa"));
    }

    #[test]
    fn round_trip_over_inventory() {
        for style in [ToneStyle::MainVowel, ToneStyle::LastVowel] {
            for s in syllable_inventory(style) {
                let t = to_telex(&s);
                assert!(t.is_plain_ascii(), "{s} -> {t}");
                let back = standardize_marks(t.as_str(), style);
                assert!(back.standardizable, "{s} -> {t}");
                assert_eq!(back.text, s, "{s} -> {t}");
                assert_eq!(to_telex(&back.text), t);
            }
        }
    }
}
