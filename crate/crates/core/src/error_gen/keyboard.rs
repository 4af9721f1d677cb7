//! QWERTY adjacency and mistyped-telex perturbation.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::vi::{
    compose, is_vowel, standardize_marks, to_telex, with_tone, Syllable, Tone, ToneStyle,
};

const ROWS: [&str; 4] = ["1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm"];

/// Keys physically next to `c` on a QWERTY layout (same row, and the two
/// overlapping keys on the rows above and below). Empty for other keys.
pub fn keyboard_neighbors(c: char) -> Vec<char> {
    let Some((r, col)) = ROWS
        .iter()
        .enumerate()
        .find_map(|(r, row)| row.chars().position(|k| k == c).map(|i| (r, i)))
    else {
        return Vec::new();
    };
    let at = |r: usize, i: isize| -> Option<char> {
        if i < 0 {
            return None;
        }
        ROWS.get(r)?.chars().nth(i as usize)
    };
    let col = col as isize;
    let mut out = Vec::with_capacity(6);
    out.extend(at(r, col - 1));
    out.extend(at(r, col + 1));
    if r > 0 {
        out.extend(at(r - 1, col));
        out.extend(at(r - 1, col + 1));
    }
    out.extend(at(r + 1, col - 1));
    out.extend(at(r + 1, col));
    out
}

/// What a composer shows for `keys`: the canonical syllable when the keys
/// compose to one, otherwise the letters with the tone on the last vowel.
pub fn typed_surface(keys: &str, style: ToneStyle) -> String {
    let std = standardize_marks(keys, style);
    if std.standardizable {
        return std.text;
    }
    let comp = compose(keys);
    let mut letters = comp.letters.clone();
    if comp.tone != Tone::Level {
        if let Some(i) = letters.iter().rposition(|&c| is_vowel(c)) {
            letters[i] = with_tone(letters[i], comp.tone);
        }
    }
    letters.into_iter().collect()
}

/// What the syllable turns into when one key of its telex form is left
/// out or replaced by a keyboard neighbor.
pub fn slip_typings(syllable: &str, style: ToneStyle) -> Vec<String> {
    let keys: Vec<char> = to_telex(syllable).as_str().chars().collect();
    let mut out = Vec::new();
    for i in 0..keys.len() {
        if keys.len() > 1 {
            let typed: String = keys[..i].iter().chain(&keys[i + 1..]).collect();
            out.push(typed_surface(&typed, style));
        }
        for n in keyboard_neighbors(keys[i]) {
            let mut k = keys.clone();
            k[i] = n;
            let typed: String = k.into_iter().collect();
            out.push(typed_surface(&typed, style));
        }
    }
    out
}

/// A random mistyping of `s`, always different from it.
pub fn mistype(s: &Syllable, style: ToneStyle, rng: &mut impl Rng) -> Syllable {
    let keys: Vec<char> = to_telex(s.as_str()).as_str().chars().collect();
    let mut slots: Vec<(usize, char)> = keys
        .iter()
        .enumerate()
        .flat_map(|(i, &c)| keyboard_neighbors(c).into_iter().map(move |n| (i, n)))
        .collect();
    slots.shuffle(rng);
    for (i, n) in slots {
        let mut k = keys.clone();
        k[i] = n;
        let typed: String = k.into_iter().collect();
        if let Some(out) = Syllable::new(&typed_surface(&typed, style)) {
            if &out != s {
                return out;
            }
        }
    }
    // Nothing on the keyboard nearby: an extra stray keystroke.
    let extra = (b'a' + rng.gen_range(0..26u8)) as char;
    Syllable::new(&format!("{s}{extra}")).expect("non-empty token")
}
