//! Double Metaphone phonetic encoding.
//!
//! Produces a primary and an alternate code for a single word. Codes are
//! not truncated, so multi-syllable titles keep enough signal to be compared
//! against a domain vocabulary during ASR correction.

/// Primary and alternate Double Metaphone codes for one token.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PhoneticCode {
    pub primary: String,
    pub secondary: String,
}

impl PhoneticCode {
    pub fn is_empty(&self) -> bool {
        self.primary.is_empty() && self.secondary.is_empty()
    }
}

/// Encodes `token` (case-insensitive). Non-letter characters other than
/// spaces are dropped before encoding; an empty token yields empty codes.
pub fn phonetic_encode(token: &str) -> PhoneticCode {
    let word: Vec<char> = token
        .chars()
        .flat_map(char::to_uppercase)
        .filter(|c| c.is_alphabetic() || *c == ' ')
        .collect();
    if word.iter().all(|c| *c == ' ') {
        return PhoneticCode::default();
    }
    Encoder::new(word).run()
}

struct Encoder {
    word: Vec<char>,
    len: isize,
    last: isize,
    slavo_germanic: bool,
    primary: String,
    secondary: String,
}

impl Encoder {
    fn new(word: Vec<char>) -> Self {
        let s: String = word.iter().collect();
        let slavo_germanic =
            s.contains('W') || s.contains('K') || s.contains("CZ") || s.contains("WITZ");
        let len = word.len() as isize;
        Self {
            word,
            len,
            last: len - 1,
            slavo_germanic,
            primary: String::new(),
            secondary: String::new(),
        }
    }

    fn at(&self, i: isize) -> char {
        if i < 0 || i >= self.len {
            '\0'
        } else {
            self.word[i as usize]
        }
    }

    fn is_vowel(&self, i: isize) -> bool {
        matches!(self.at(i), 'A' | 'E' | 'I' | 'O' | 'U' | 'Y')
    }

    /// True when the `n` characters starting at `start` equal one of `options`.
    fn matches(&self, start: isize, n: isize, options: &[&str]) -> bool {
        if start < 0 || start + n > self.len {
            return false;
        }
        let slice = &self.word[start as usize..(start + n) as usize];
        options
            .iter()
            .any(|o| o.chars().count() == slice.len() && o.chars().zip(slice).all(|(a, b)| a == *b))
    }

    fn add(&mut self, code: &str) {
        self.primary.push_str(code);
        self.secondary.push_str(code);
    }

    fn add2(&mut self, primary: &str, secondary: &str) {
        self.primary.push_str(primary);
        self.secondary.push_str(secondary);
    }

    fn germanic_prefix(&self) -> bool {
        self.matches(0, 4, &["VAN ", "VON "]) || self.matches(0, 3, &["SCH"])
    }

    fn run(mut self) -> PhoneticCode {
        let mut cur: isize = 0;
        if self.matches(0, 2, &["GN", "KN", "PN", "WR", "PS"]) {
            cur += 1;
        }
        // initial X sounds like S, e.g. "xavier"
        if self.at(0) == 'X' {
            self.add("S");
            cur += 1;
        }
        while cur < self.len {
            cur = match self.at(cur) {
                'A' | 'E' | 'I' | 'O' | 'U' | 'Y' => {
                    if cur == 0 {
                        self.add("A");
                    }
                    cur + 1
                }
                'B' => {
                    self.add("P");
                    if self.at(cur + 1) == 'B' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'Ç' => {
                    self.add("S");
                    cur + 1
                }
                'C' => self.c(cur),
                'D' => self.d(cur),
                'F' => {
                    self.add("F");
                    self.skip_double(cur, 'F')
                }
                'G' => self.g(cur),
                'H' => {
                    if (cur == 0 || self.is_vowel(cur - 1)) && self.is_vowel(cur + 1) {
                        self.add("H");
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'J' => self.j(cur),
                'K' => {
                    self.add("K");
                    self.skip_double(cur, 'K')
                }
                'L' => self.l(cur),
                'M' => {
                    let umb = self.matches(cur - 1, 3, &["UMB"])
                        && (cur + 1 == self.last || self.matches(cur + 2, 2, &["ER"]));
                    self.add("M");
                    if umb || self.at(cur + 1) == 'M' {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'N' => {
                    self.add("N");
                    self.skip_double(cur, 'N')
                }
                'Ñ' => {
                    self.add("N");
                    cur + 1
                }
                'P' => {
                    if self.at(cur + 1) == 'H' {
                        self.add("F");
                        cur + 2
                    } else {
                        self.add("P");
                        if matches!(self.at(cur + 1), 'P' | 'B') {
                            cur + 2
                        } else {
                            cur + 1
                        }
                    }
                }
                'Q' => {
                    self.add("K");
                    self.skip_double(cur, 'Q')
                }
                'R' => {
                    if cur == self.last
                        && !self.slavo_germanic
                        && self.matches(cur - 2, 2, &["IE"])
                        && !self.matches(cur - 4, 2, &["ME", "MA"])
                    {
                        self.add2("", "R");
                    } else {
                        self.add("R");
                    }
                    self.skip_double(cur, 'R')
                }
                'S' => self.s(cur),
                'T' => self.t(cur),
                'V' => {
                    self.add("F");
                    self.skip_double(cur, 'V')
                }
                'W' => self.w(cur),
                'X' => {
                    let silent_french = cur == self.last
                        && (self.matches(cur - 3, 3, &["IAU", "EAU"])
                            || self.matches(cur - 2, 2, &["AU", "OU"]));
                    if !silent_french {
                        self.add("KS");
                    }
                    if matches!(self.at(cur + 1), 'C' | 'X') {
                        cur + 2
                    } else {
                        cur + 1
                    }
                }
                'Z' => self.z(cur),
                _ => cur + 1,
            };
        }
        PhoneticCode {
            primary: self.primary,
            secondary: self.secondary,
        }
    }

    fn skip_double(&self, cur: isize, c: char) -> isize {
        if self.at(cur + 1) == c {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn c(&mut self, cur: isize) -> isize {
        // germanic "ach", e.g. "bacher", "macher"
        if cur > 1
            && !self.is_vowel(cur - 2)
            && self.matches(cur - 1, 3, &["ACH"])
            && self.at(cur + 2) != 'I'
            && (self.at(cur + 2) != 'E' || self.matches(cur - 2, 6, &["BACHER", "MACHER"]))
        {
            self.add("K");
            return cur + 2;
        }
        if cur == 0 && self.matches(cur, 6, &["CAESAR"]) {
            self.add("S");
            return cur + 2;
        }
        if self.matches(cur, 4, &["CHIA"]) {
            self.add("K");
            return cur + 2;
        }
        if self.matches(cur, 2, &["CH"]) {
            if cur > 0 && self.matches(cur, 4, &["CHAE"]) {
                self.add2("K", "X");
                return cur + 2;
            }
            // greek roots, e.g. "chemistry", "chorus"
            if cur == 0
                && (self.matches(cur + 1, 5, &["HARAC", "HARIS"])
                    || self.matches(cur + 1, 3, &["HOR", "HYM", "HIA", "HEM"]))
                && !self.matches(0, 5, &["CHORE"])
            {
                self.add("K");
                return cur + 2;
            }
            let hard = self.germanic_prefix()
                || self.matches(cur - 2, 6, &["ORCHES", "ARCHIT", "ORCHID"])
                || self.matches(cur + 2, 1, &["T", "S"])
                || ((self.matches(cur - 1, 1, &["A", "O", "U", "E"]) || cur == 0)
                    && (self.matches(cur + 2, 1, &["L", "R", "N", "M", "B", "H", "F", "V", "W", " "])
                        || cur + 1 == self.last));
            if hard {
                self.add("K");
            } else if cur > 0 {
                if self.matches(0, 2, &["MC"]) {
                    self.add("K");
                } else {
                    self.add2("X", "K");
                }
            } else {
                self.add("X");
            }
            return cur + 2;
        }
        if self.matches(cur, 2, &["CZ"]) && !self.matches(cur - 2, 4, &["WICZ"]) {
            self.add2("S", "X");
            return cur + 2;
        }
        if self.matches(cur + 1, 3, &["CIA"]) {
            self.add("X");
            return cur + 3;
        }
        // double C, but not "mcclellan"
        if self.matches(cur, 2, &["CC"]) && !(cur == 1 && self.at(0) == 'M') {
            if self.matches(cur + 2, 1, &["I", "E", "H"]) && !self.matches(cur + 2, 2, &["HU"]) {
                if (cur == 1 && self.at(cur - 1) == 'A') || self.matches(cur - 1, 5, &["UCCEE", "UCCES"])
                {
                    self.add("KS");
                } else {
                    self.add("X");
                }
                return cur + 3;
            }
            self.add("K");
            return cur + 2;
        }
        if self.matches(cur, 2, &["CK", "CG", "CQ"]) {
            self.add("K");
            return cur + 2;
        }
        if self.matches(cur, 2, &["CI", "CE", "CY"]) {
            if self.matches(cur, 3, &["CIO", "CIE", "CIA"]) {
                self.add2("S", "X");
            } else {
                self.add("S");
            }
            return cur + 2;
        }
        self.add("K");
        if self.matches(cur + 1, 2, &[" C", " Q", " G"]) {
            cur + 3
        } else if self.matches(cur + 1, 1, &["C", "K", "Q"]) && !self.matches(cur + 1, 2, &["CE", "CI"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn d(&mut self, cur: isize) -> isize {
        if self.matches(cur, 2, &["DG"]) {
            if self.matches(cur + 2, 1, &["I", "E", "Y"]) {
                self.add("J");
                return cur + 3;
            }
            self.add("TK");
            return cur + 2;
        }
        self.add("T");
        if self.matches(cur, 2, &["DT", "DD"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn g(&mut self, cur: isize) -> isize {
        if self.at(cur + 1) == 'H' {
            if cur > 0 && !self.is_vowel(cur - 1) {
                self.add("K");
                return cur + 2;
            }
            if cur == 0 {
                if self.at(cur + 2) == 'I' {
                    self.add("J");
                } else {
                    self.add("K");
                }
                return cur + 2;
            }
            // silent, e.g. "hugh", "bough", "broughton"
            if (cur > 1 && self.matches(cur - 2, 1, &["B", "H", "D"]))
                || (cur > 2 && self.matches(cur - 3, 1, &["B", "H", "D"]))
                || (cur > 3 && self.matches(cur - 4, 1, &["B", "H"]))
            {
                return cur + 2;
            }
            // "laugh", "cough", "rough", "tough"
            if cur > 2 && self.at(cur - 1) == 'U' && self.matches(cur - 3, 1, &["C", "G", "L", "R", "T"]) {
                self.add("F");
            } else if cur > 0 && self.at(cur - 1) != 'I' {
                self.add("K");
            }
            return cur + 2;
        }
        if self.at(cur + 1) == 'N' {
            if cur == 1 && self.is_vowel(0) && !self.slavo_germanic {
                self.add2("KN", "N");
            } else if !self.matches(cur + 2, 2, &["EY"])
                && self.at(cur + 1) != 'Y'
                && !self.slavo_germanic
            {
                self.add2("N", "KN");
            } else {
                self.add("KN");
            }
            return cur + 2;
        }
        // "tagliaro"
        if self.matches(cur + 1, 2, &["LI"]) && !self.slavo_germanic {
            self.add2("KL", "L");
            return cur + 2;
        }
        if cur == 0
            && (self.at(cur + 1) == 'Y'
                || self.matches(
                    cur + 1,
                    2,
                    &["ES", "EP", "EB", "EL", "EY", "IB", "IL", "IN", "IE", "EI", "ER"],
                ))
        {
            self.add2("K", "J");
            return cur + 2;
        }
        if (self.matches(cur + 1, 2, &["ER"]) || self.at(cur + 1) == 'Y')
            && !self.matches(0, 6, &["DANGER", "RANGER", "MANGER"])
            && !self.matches(cur - 1, 1, &["E", "I"])
            && !self.matches(cur - 1, 3, &["RGY", "OGY"])
        {
            self.add2("K", "J");
            return cur + 2;
        }
        // italian, e.g. "biaggi"
        if self.matches(cur + 1, 1, &["E", "I", "Y"]) || self.matches(cur - 1, 4, &["AGGI", "OGGI"]) {
            if self.germanic_prefix() || self.matches(cur + 1, 2, &["ET"]) {
                self.add("K");
            } else if self.matches(cur + 1, 3, &["IER"]) {
                self.add("J");
            } else {
                self.add2("J", "K");
            }
            return cur + 2;
        }
        self.add("K");
        self.skip_double(cur, 'G')
    }

    fn j(&mut self, cur: isize) -> isize {
        // spanish, e.g. "jose", "san jacinto"
        if self.matches(cur, 4, &["JOSE"]) || self.matches(0, 4, &["SAN "]) {
            if (cur == 0 && (self.at(cur + 4) == ' ' || self.len == 4)) || self.matches(0, 4, &["SAN "]) {
                self.add("H");
            } else {
                self.add2("J", "H");
            }
            return cur + 1;
        }
        if cur == 0 && !self.matches(cur, 4, &["JOSE"]) {
            self.add2("J", "A");
        } else if self.is_vowel(cur - 1)
            && !self.slavo_germanic
            && matches!(self.at(cur + 1), 'A' | 'O')
        {
            self.add2("J", "H");
        } else if cur == self.last {
            self.add2("J", "");
        } else if !self.matches(cur + 1, 1, &["L", "T", "K", "S", "N", "M", "B", "Z"])
            && !self.matches(cur - 1, 1, &["S", "K", "L"])
        {
            self.add("J");
        }
        self.skip_double(cur, 'J')
    }

    fn l(&mut self, cur: isize) -> isize {
        if self.at(cur + 1) == 'L' {
            // spanish, e.g. "cabrillo", "gallegos"
            let spanish = (cur == self.len - 3 && self.matches(cur - 1, 4, &["ILLO", "ILLA", "ALLE"]))
                || ((self.matches(self.last - 1, 2, &["AS", "OS"]) || self.matches(self.last, 1, &["A", "O"]))
                    && self.matches(cur - 1, 4, &["ALLE"]));
            if spanish {
                self.add2("L", "");
            } else {
                self.add("L");
            }
            return cur + 2;
        }
        self.add("L");
        cur + 1
    }

    fn s(&mut self, cur: isize) -> isize {
        // silent in "island", "isle", "carlisle"
        if self.matches(cur - 1, 3, &["ISL", "YSL"]) {
            return cur + 1;
        }
        if cur == 0 && self.matches(cur, 5, &["SUGAR"]) {
            self.add2("X", "S");
            return cur + 1;
        }
        if self.matches(cur, 2, &["SH"]) {
            if self.matches(cur + 1, 4, &["HEIM", "HOEK", "HOLM", "HOLZ"]) {
                self.add("S");
            } else {
                self.add("X");
            }
            return cur + 2;
        }
        if self.matches(cur, 3, &["SIO", "SIA"]) || self.matches(cur, 4, &["SIAN"]) {
            if self.slavo_germanic {
                self.add("S");
            } else {
                self.add2("S", "X");
            }
            return cur + 3;
        }
        // "smith" vs "schmidt", "snider" vs "schneider", slavic -sz-
        if (cur == 0 && self.matches(cur + 1, 1, &["M", "N", "L", "W"])) || self.matches(cur + 1, 1, &["Z"]) {
            self.add2("S", "X");
            return if self.matches(cur + 1, 1, &["Z"]) { cur + 2 } else { cur + 1 };
        }
        if self.matches(cur, 2, &["SC"]) {
            if self.at(cur + 2) == 'H' {
                // dutch, e.g. "school", "schooner"
                if self.matches(cur + 3, 2, &["OO", "ER", "EN", "UY", "ED", "EM"]) {
                    if self.matches(cur + 3, 2, &["ER", "EN"]) {
                        self.add2("X", "SK");
                    } else {
                        self.add("SK");
                    }
                    return cur + 3;
                }
                if cur == 0 && !self.is_vowel(3) && self.at(3) != 'W' {
                    self.add2("X", "S");
                } else {
                    self.add("X");
                }
                return cur + 3;
            }
            if self.matches(cur + 2, 1, &["I", "E", "Y"]) {
                self.add("S");
                return cur + 3;
            }
            self.add("SK");
            return cur + 3;
        }
        // french, e.g. "artois"
        if cur == self.last && self.matches(cur - 2, 2, &["AI", "OI"]) {
            self.add2("", "S");
        } else {
            self.add("S");
        }
        if self.matches(cur + 1, 1, &["S", "Z"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn t(&mut self, cur: isize) -> isize {
        if self.matches(cur, 4, &["TION"]) {
            self.add("X");
            return cur + 3;
        }
        if self.matches(cur, 3, &["TIA", "TCH"]) {
            self.add("X");
            return cur + 3;
        }
        if self.matches(cur, 2, &["TH"]) || self.matches(cur, 3, &["TTH"]) {
            if self.matches(cur + 2, 2, &["OM", "AM"]) || self.germanic_prefix() {
                self.add("T");
            } else {
                self.add2("0", "T");
            }
            return cur + 2;
        }
        self.add("T");
        if self.matches(cur + 1, 1, &["T", "D"]) {
            cur + 2
        } else {
            cur + 1
        }
    }

    fn w(&mut self, cur: isize) -> isize {
        if self.matches(cur, 2, &["WR"]) {
            self.add("R");
            return cur + 2;
        }
        if cur == 0 && (self.is_vowel(cur + 1) || self.matches(cur, 2, &["WH"])) {
            if self.is_vowel(cur + 1) {
                self.add2("A", "F");
            } else {
                self.add("A");
            }
        }
        // "arnow" vs "arnoff"
        if (cur == self.last && self.is_vowel(cur - 1))
            || self.matches(cur - 1, 5, &["EWSKI", "EWSKY", "OWSKI", "OWSKY"])
            || self.matches(0, 3, &["SCH"])
        {
            self.add2("", "F");
            return cur + 1;
        }
        // polish, e.g. "filipowicz"
        if self.matches(cur, 4, &["WICZ", "WITZ"]) {
            self.add2("TS", "FX");
            return cur + 4;
        }
        cur + 1
    }

    fn z(&mut self, cur: isize) -> isize {
        // pinyin, e.g. "zhao"
        if self.at(cur + 1) == 'H' {
            self.add("J");
            return cur + 2;
        }
        if self.matches(cur + 1, 2, &["ZO", "ZI", "ZA"])
            || (self.slavo_germanic && cur > 0 && self.at(cur - 1) != 'T')
        {
            self.add2("S", "TS");
        } else {
            self.add("S");
        }
        self.skip_double(cur, 'Z')
    }
}

/// Phonetic key for a multi-word phrase: per-word codes joined by spaces.
pub fn phrase_codes(phrase: &str) -> (String, String) {
    let mut primary = Vec::new();
    let mut secondary = Vec::new();
    for word in phrase.split_whitespace() {
        let code = phonetic_encode(word);
        primary.push(code.primary);
        secondary.push(code.secondary);
    }
    (primary.join(" "), secondary.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_token_has_empty_codes() {
        assert!(phonetic_encode("").is_empty());
        assert!(phonetic_encode("  ").is_empty());
    }

    #[test]
    fn knight_and_night_share_primary() {
        assert_eq!(phonetic_encode("knight").primary, phonetic_encode("night").primary);
    }

    #[test]
    fn case_insensitive() {
        assert_eq!(phonetic_encode("Smith"), phonetic_encode("sMITH"));
    }
}
