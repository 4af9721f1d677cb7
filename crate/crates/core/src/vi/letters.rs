//! Vietnamese letter tables: tone marks, vowel modifiers and their telex keys.

use std::fmt;

/// The six Vietnamese tones, in the conventional order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Tone {
    #[default]
    Level,
    Acute,
    Grave,
    Hook,
    Tilde,
    Dot,
}

impl Tone {
    pub const ALL: [Tone; 6] = [
        Tone::Level,
        Tone::Acute,
        Tone::Grave,
        Tone::Hook,
        Tone::Tilde,
        Tone::Dot,
    ];

    fn index(self) -> usize {
        self as usize
    }

    /// Trailing telex key for this tone; `None` for the level tone.
    pub fn telex_key(self) -> Option<char> {
        match self {
            Tone::Level => None,
            Tone::Acute => Some('s'),
            Tone::Grave => Some('f'),
            Tone::Hook => Some('r'),
            Tone::Tilde => Some('x'),
            Tone::Dot => Some('j'),
        }
    }

    pub fn from_telex_key(key: char) -> Option<Tone> {
        match key {
            's' => Some(Tone::Acute),
            'f' => Some(Tone::Grave),
            'r' => Some(Tone::Hook),
            'x' => Some(Tone::Tilde),
            'j' => Some(Tone::Dot),
            _ => None,
        }
    }

    /// Vietnamese name (ngang, sắc, huyền, hỏi, ngã, nặng).
    pub fn name(self) -> &'static str {
        match self {
            Tone::Level => "ngang",
            Tone::Acute => "sắc",
            Tone::Grave => "huyền",
            Tone::Hook => "hỏi",
            Tone::Tilde => "ngã",
            Tone::Dot => "nặng",
        }
    }

    pub fn from_name(name: &str) -> Option<Tone> {
        Tone::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for Tone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

// Rows: base vowel (possibly with modifier) followed by its five toned forms.
const VOWEL_TABLE: [[char; 6]; 12] = [
    ['a', 'á', 'à', 'ả', 'ã', 'ạ'],
    ['ă', 'ắ', 'ằ', 'ẳ', 'ẵ', 'ặ'],
    ['â', 'ấ', 'ầ', 'ẩ', 'ẫ', 'ậ'],
    ['e', 'é', 'è', 'ẻ', 'ẽ', 'ẹ'],
    ['ê', 'ế', 'ề', 'ể', 'ễ', 'ệ'],
    ['i', 'í', 'ì', 'ỉ', 'ĩ', 'ị'],
    ['o', 'ó', 'ò', 'ỏ', 'õ', 'ọ'],
    ['ô', 'ố', 'ồ', 'ổ', 'ỗ', 'ộ'],
    ['ơ', 'ớ', 'ờ', 'ở', 'ỡ', 'ợ'],
    ['u', 'ú', 'ù', 'ủ', 'ũ', 'ụ'],
    ['ư', 'ứ', 'ừ', 'ử', 'ữ', 'ự'],
    ['y', 'ý', 'ỳ', 'ỷ', 'ỹ', 'ỵ'],
];

/// Splits a (lowercase) character into its toneless letter and tone.
/// Non-vowels come back unchanged with the level tone.
pub fn split_tone(c: char) -> (char, Tone) {
    for row in &VOWEL_TABLE {
        if let Some(i) = row.iter().position(|&x| x == c) {
            return (row[0], Tone::ALL[i]);
        }
    }
    (c, Tone::Level)
}

/// Puts `tone` on a toneless vowel. Non-vowels are returned unchanged.
pub fn with_tone(c: char, tone: Tone) -> char {
    VOWEL_TABLE
        .iter()
        .find(|row| row[0] == c)
        .map_or(c, |row| row[tone.index()])
}

/// True for any toneless Vietnamese vowel letter.
pub fn is_vowel(c: char) -> bool {
    matches!(
        c,
        'a' | 'ă' | 'â' | 'e' | 'ê' | 'i' | 'o' | 'ô' | 'ơ' | 'u' | 'ư' | 'y'
    )
}

/// True for vowels carrying a breve, circumflex or horn.
pub fn is_modified_vowel(c: char) -> bool {
    matches!(c, 'ă' | 'â' | 'ê' | 'ô' | 'ơ' | 'ư')
}

/// True for any letter of the Vietnamese alphabet, toned or not
/// (plus f, j, w, z which occur in loanwords and telex).
pub fn is_vietnamese_letter(c: char) -> bool {
    let (base, _) = split_tone(c);
    base.is_ascii_lowercase() || is_modified_vowel(base) || base == 'đ'
}

/// Telex keys for a toneless letter: `â` -> "aa", `ư` -> "uw", `đ` -> "dd".
pub fn letter_keys(c: char) -> Option<&'static str> {
    Some(match c {
        'ă' => "aw",
        'â' => "aa",
        'ê' => "ee",
        'ô' => "oo",
        'ơ' => "ow",
        'ư' => "uw",
        'đ' => "dd",
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tone_split_and_join_agree() {
        for row in &VOWEL_TABLE {
            for (i, &c) in row.iter().enumerate() {
                assert_eq!(split_tone(c), (row[0], Tone::ALL[i]));
                assert_eq!(with_tone(row[0], Tone::ALL[i]), c);
            }
        }
    }

    #[test]
    fn table_is_nfc() {
        use unicode_normalization::UnicodeNormalization;
        for row in &VOWEL_TABLE {
            for &c in row {
                let s = c.to_string();
                assert_eq!(s.nfc().collect::<String>(), s);
            }
        }
    }

    #[test]
    fn consonants_pass_through() {
        assert_eq!(split_tone('đ'), ('đ', Tone::Level));
        assert_eq!(with_tone('n', Tone::Acute), 'n');
    }
}
