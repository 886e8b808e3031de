//! Sequence ingestion: FASTA (first record only) or raw text.

use std::path::Path;

use thiserror::Error;

use crate::sequence::Alphabet;

#[derive(Debug, Error)]
pub enum FastaError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("first record has no sequence data")]
    EmptyRecord,
    #[error("symbol `{symbol}` at position {position} is not in the alphabet")]
    InvalidSymbol { symbol: char, position: usize },
}

/// Symbols of the first record. Header lines (`>`) and `;` comments are
/// skipped, whitespace is dropped and letters are uppercased. Text without
/// any header is read as one raw sequence.
///
/// With a fixed alphabet every symbol must belong to it; otherwise any
/// ASCII letter is accepted.
pub fn parse_fasta(text: &str, alphabet: Option<&Alphabet>) -> Result<Vec<char>, FastaError> {
    let mut out = Vec::new();
    let mut seen_header = false;
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('>') {
            if seen_header {
                break;
            }
            seen_header = true;
            continue;
        }
        if line.starts_with(';') {
            continue;
        }
        for ch in line.chars().filter(|c| !c.is_whitespace()) {
            let symbol = ch.to_ascii_uppercase();
            let ok = match alphabet {
                Some(a) => a.code(symbol).is_some(),
                None => symbol.is_ascii_alphabetic(),
            };
            if !ok {
                return Err(FastaError::InvalidSymbol {
                    symbol,
                    position: out.len(),
                });
            }
            out.push(symbol);
        }
    }
    if out.is_empty() {
        return Err(FastaError::EmptyRecord);
    }
    Ok(out)
}

pub fn read_fasta(path: &Path, alphabet: Option<&Alphabet>) -> Result<Vec<char>, FastaError> {
    let text = std::fs::read_to_string(path).map_err(|source| FastaError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_fasta(&text, alphabet)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn concatenates_first_record() {
        let s = parse_fasta(">r1\nACGT\nAC\n", Some(&Alphabet::dna())).unwrap();
        assert_eq!(s, vec!['A', 'C', 'G', 'T', 'A', 'C']);
        let s = parse_fasta(">a\nac gt\n>b\nTTTT\n", None).unwrap();
        assert_eq!(s.iter().collect::<String>(), "ACGT");
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(parse_fasta(">only\n", None), Err(FastaError::EmptyRecord)));
    }

    #[test]
    fn strict_dna_names_position() {
        let err = parse_fasta("ACGN", Some(&Alphabet::dna())).unwrap_err();
        assert!(matches!(err, FastaError::InvalidSymbol { symbol: 'N', position: 3 }));
        assert!(parse_fasta("ACGN", None).is_ok());
        assert!(parse_fasta("AC-G", None).is_err());
    }
}
