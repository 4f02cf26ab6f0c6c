//! Character alphabets mapped onto symbol ranks `1..=sigma`.

use thiserror::Error;

use crate::bitseq::{Sym, SENTINEL};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlphabetError {
    #[error("alphabet is empty")]
    Empty,
    #[error("alphabet has {0} symbols, at most 255 are supported")]
    TooLarge(usize),
    #[error("duplicate character {0:?} in alphabet")]
    Duplicate(char),
    #[error("character '$' is reserved for the sentinel")]
    Reserved,
    #[error("character {ch:?} at offset {offset} is not in the alphabet")]
    Unknown { ch: char, offset: usize },
}

/// Ordered set of characters; the `i`-th character (0-based) maps to symbol `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    chars: Vec<char>,
}

impl Alphabet {
    pub fn new(chars: &str) -> Result<Self, AlphabetError> {
        let chars: Vec<char> = chars.chars().collect();
        if chars.is_empty() {
            return Err(AlphabetError::Empty);
        }
        if chars.len() > 255 {
            return Err(AlphabetError::TooLarge(chars.len()));
        }
        for (i, &c) in chars.iter().enumerate() {
            if c == '$' {
                return Err(AlphabetError::Reserved);
            }
            if chars[..i].contains(&c) {
                return Err(AlphabetError::Duplicate(c));
            }
        }
        let mut sorted = chars.clone();
        sorted.sort_unstable();
        Ok(Self { chars: sorted })
    }

    pub fn dna() -> Self {
        Self { chars: vec!['A', 'C', 'G', 'T'] }
    }

    pub fn sigma(&self) -> usize {
        self.chars.len()
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn symbol(&self, ch: char) -> Option<Sym> {
        self.chars.binary_search(&ch).ok().map(|i| (i + 1) as Sym)
    }

    pub fn encode(&self, text: &str) -> Result<Vec<Sym>, AlphabetError> {
        text.chars()
            .enumerate()
            .map(|(offset, ch)| self.symbol(ch).ok_or(AlphabetError::Unknown { ch, offset }))
            .collect()
    }

    /// Character for `sym`; `$` for the sentinel and `?` for symbols out of range.
    pub fn char_of(&self, sym: Sym) -> char {
        if sym == SENTINEL {
            return '$';
        }
        self.chars.get(sym as usize - 1).copied().unwrap_or('?')
    }

    pub fn decode(&self, syms: &[Sym]) -> String {
        syms.iter().map(|&s| self.char_of(s)).collect()
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::dna()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dna_round_trip() {
        let a = Alphabet::dna();
        assert_eq!(a.encode("GATTACA").unwrap(), vec![3, 1, 4, 4, 1, 2, 1]);
        assert_eq!(a.decode(&[0, 1, 2, 3, 4]), "$ACGT");
        assert_eq!(a.encode("ACN"), Err(AlphabetError::Unknown { ch: 'N', offset: 2 }));
    }

    #[test]
    fn custom_alphabet_is_sorted() {
        let a = Alphabet::new("cba").unwrap();
        assert_eq!(a.symbol('a'), Some(1));
        assert_eq!(a.symbol('c'), Some(3));
        assert!(Alphabet::new("aa").is_err());
        assert!(Alphabet::new("a$").is_err());
    }
}
