//! Classical sequences, alphabet mapping and power-of-two padding.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("sequence is empty")]
    Empty,
    #[error("symbol `{symbol}` at position {position} is not in the alphabet")]
    InvalidSymbol { symbol: char, position: usize },
    #[error("code {code} does not fit in {d} data bits")]
    CodeTooWide { code: u32, d: u32 },
}

/// Number of bits needed to represent `count` distinct codes (at least 1).
pub fn bits_for(count: usize) -> u32 {
    if count <= 2 {
        1
    } else {
        usize::BITS - (count - 1).leading_zeros()
    }
}

/// Ordered symbol table; a symbol's code is its position.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabet {
    symbols: Vec<char>,
    fixed: bool,
}

impl Alphabet {
    /// A=0, C=1, G=2, T=3.
    pub fn dna() -> Self {
        Self {
            symbols: vec!['A', 'C', 'G', 'T'],
            fixed: true,
        }
    }

    pub fn fixed(symbols: impl IntoIterator<Item = char>) -> Self {
        let mut out = Vec::new();
        for s in symbols {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Self {
            symbols: out,
            fixed: true,
        }
    }

    /// Codes assigned in order of first appearance.
    pub fn from_first_appearance<'a>(symbols: impl IntoIterator<Item = &'a char>) -> Self {
        let mut out = Vec::new();
        for &s in symbols {
            if !out.contains(&s) {
                out.push(s);
            }
        }
        Self {
            symbols: out,
            fixed: false,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn is_fixed(&self) -> bool {
        self.fixed
    }

    pub fn code(&self, symbol: char) -> Option<u32> {
        self.symbols.iter().position(|&s| s == symbol).map(|p| p as u32)
    }

    pub fn symbol(&self, code: u32) -> Option<char> {
        self.symbols.get(code as usize).copied()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }
}

/// A classical sequence of alphabet codes, possibly padded to a power of two.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolSequence {
    codes: Vec<u32>,
    alphabet: Alphabet,
    d: u32,
    original_length: usize,
    pad_code: Option<u32>,
}

impl SymbolSequence {
    /// Builds an unpadded sequence directly from codes. `d` bits must hold
    /// every code.
    pub fn from_codes(codes: Vec<u32>, d: u32) -> Result<Self, SequenceError> {
        if codes.is_empty() {
            return Err(SequenceError::Empty);
        }
        let max = *codes.iter().max().unwrap();
        let alphabet = Alphabet {
            symbols: (0..=max)
                .map(|c| char::from_digit(c % 36, 36).unwrap_or('?'))
                .collect(),
            fixed: false,
        };
        let seq = Self {
            original_length: codes.len(),
            codes,
            alphabet,
            d: d.max(1),
            pad_code: None,
        };
        seq.check_codes()?;
        Ok(seq)
    }

    fn check_codes(&self) -> Result<(), SequenceError> {
        let limit = 1u64 << self.d;
        for &c in &self.codes {
            if c as u64 >= limit {
                return Err(SequenceError::CodeTooWide { code: c, d: self.d });
            }
        }
        Ok(())
    }

    pub fn codes(&self) -> &[u32] {
        &self.codes
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Data bits per element.
    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn original_length(&self) -> usize {
        self.original_length
    }

    pub fn padded_length(&self) -> usize {
        self.codes.len()
    }

    pub fn pad_code(&self) -> Option<u32> {
        self.pad_code
    }

    pub fn is_padded(&self) -> bool {
        self.codes.len().is_power_of_two()
    }

    /// Index-register width: `log2(padded_length)`, at least one qubit.
    pub fn index_bits(&self) -> u32 {
        self.codes.len().next_power_of_two().trailing_zeros().max(1)
    }

    /// Same codes with a wider data register.
    pub fn with_d(&self, d: u32) -> Result<Self, SequenceError> {
        let mut out = self.clone();
        out.d = d.max(1);
        out.check_codes()?;
        Ok(out)
    }
}

/// Maps raw symbols to codes. With a fixed alphabet every symbol must belong
/// to it; otherwise codes follow first appearance.
pub fn map_alphabet(raw: &[char], fixed: Option<&Alphabet>) -> Result<SymbolSequence, SequenceError> {
    if raw.is_empty() {
        return Err(SequenceError::Empty);
    }
    let alphabet = match fixed {
        Some(a) => a.clone(),
        None => Alphabet::from_first_appearance(raw),
    };
    map_with(raw, &alphabet)
}

/// Maps both sequences onto one shared alphabet.
pub fn map_pair(
    r: &[char],
    q: &[char],
    fixed: Option<&Alphabet>,
) -> Result<(SymbolSequence, SymbolSequence), SequenceError> {
    if r.is_empty() || q.is_empty() {
        return Err(SequenceError::Empty);
    }
    let alphabet = match fixed {
        Some(a) => a.clone(),
        None => Alphabet::from_first_appearance(r.iter().chain(q)),
    };
    Ok((map_with(r, &alphabet)?, map_with(q, &alphabet)?))
}

fn map_with(raw: &[char], alphabet: &Alphabet) -> Result<SymbolSequence, SequenceError> {
    let codes = raw
        .iter()
        .enumerate()
        .map(|(position, &symbol)| {
            alphabet
                .code(symbol)
                .ok_or(SequenceError::InvalidSymbol { symbol, position })
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SymbolSequence {
        original_length: codes.len(),
        codes,
        d: bits_for(alphabet.len()),
        alphabet: alphabet.clone(),
        pad_code: None,
    })
}

/// Pads each sequence to its next power of two (at least 2, so the one-qubit
/// index register never addresses an unset slot) with a code that occurs in
/// neither sequence. The reference pad and the query pad differ, so padded
/// positions never match anything. Both sequences end up with the same `d`.
pub fn pad_pair(r: &SymbolSequence, q: &SymbolSequence) -> (SymbolSequence, SymbolSequence) {
    let mut next_code = r
        .alphabet
        .len()
        .max(q.alphabet.len())
        .max(r.codes.iter().chain(&q.codes).map(|&c| c as usize + 1).max().unwrap_or(0))
        as u32;
    let mut pad = |s: &SymbolSequence| -> SymbolSequence {
        let mut out = s.clone();
        let target = s.codes.len().next_power_of_two().max(2);
        if target != s.codes.len() {
            let code = next_code;
            next_code += 1;
            out.codes.resize(target, code);
            out.pad_code = Some(code);
        }
        out
    };
    let mut r2 = pad(r);
    let mut q2 = pad(q);
    let max_code = r2.codes.iter().chain(&q2.codes).copied().max().unwrap_or(0);
    let d = r.d.max(q.d).max(bits_for(max_code as usize + 1));
    r2.d = d;
    q2.d = d;
    (r2, q2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    #[test]
    fn dna_preset_codes() {
        let s = map_alphabet(&chars("ACGT"), Some(&Alphabet::dna())).unwrap();
        assert_eq!(s.codes(), &[0, 1, 2, 3]);
        assert_eq!(s.d(), 2);
    }

    #[test]
    fn single_symbol_alphabet_needs_one_bit() {
        let s = map_alphabet(&chars("AAAA"), None).unwrap();
        assert_eq!(s.codes(), &[0, 0, 0, 0]);
        assert_eq!(s.d(), 1);
    }

    #[test]
    fn five_symbols_need_three_bits() {
        let s = map_alphabet(&chars("ABCDE"), None).unwrap();
        assert_eq!(s.d(), 3);
        assert_eq!(bits_for(5), 3);
        assert_eq!(bits_for(4), 2);
        assert_eq!(bits_for(1), 1);
        assert_eq!(bits_for(9), 4);
    }

    #[test]
    fn fixed_alphabet_rejects_unknown_symbol() {
        let err = map_alphabet(&chars("ACGN"), Some(&Alphabet::dna())).unwrap_err();
        assert_eq!(
            err,
            SequenceError::InvalidSymbol {
                symbol: 'N',
                position: 3
            }
        );
    }

    #[test]
    fn pads_with_distinct_fresh_codes() {
        let dna = Alphabet::dna();
        let (r, q) = map_pair(&chars("ACGTA"), &chars("TTG"), Some(&dna)).unwrap();
        let (r, q) = pad_pair(&r, &q);
        assert_eq!(r.padded_length(), 8);
        assert_eq!(q.padded_length(), 4);
        assert_eq!(r.pad_code(), Some(4));
        assert_eq!(q.pad_code(), Some(5));
        assert_eq!(r.d(), 3);
        assert_eq!(q.d(), 3);
        assert_eq!(&r.codes()[5..], &[4, 4, 4]);
        assert_eq!(&q.codes()[3..], &[5]);
    }

    #[test]
    fn power_of_two_lengths_left_alone() {
        let dna = Alphabet::dna();
        let (r, q) = map_pair(&chars("ACGT"), &chars("GATTACAA"), Some(&dna)).unwrap();
        let (r2, q2) = pad_pair(&r, &q);
        assert_eq!(r2, r);
        assert_eq!(q2, q);
        assert_eq!(r2.d(), 2);
    }

    #[test]
    fn length_three_gets_one_trailing_pad() {
        let (r, q) = map_pair(&chars("ACG"), &chars("ACGT"), Some(&Alphabet::dna())).unwrap();
        let (r, q) = pad_pair(&r, &q);
        assert_eq!(r.codes(), &[0, 1, 2, 4]);
        assert_eq!(r.original_length(), 3);
        assert!(q.pad_code().is_none());
        assert_eq!(q.d(), 3);
    }

    #[test]
    fn index_bits_has_floor_of_one() {
        assert_eq!(SymbolSequence::from_codes(vec![1], 1).unwrap().index_bits(), 1);
        assert_eq!(SymbolSequence::from_codes(vec![0; 8], 1).unwrap().index_bits(), 3);
    }

    #[test]
    fn from_codes_checks_width() {
        assert!(SymbolSequence::from_codes(vec![4], 2).is_err());
        assert!(SymbolSequence::from_codes(vec![], 2).is_err());
    }
}
