//! Fixed-length numeric encodings of residue strings.
//!
//! Two views of the same folded sequence: a zero-padded one-hot matrix that
//! feeds the spiking network, and a 1-based integer series (0 = pad) that
//! feeds the imaging transforms.

use crate::error::{Error, Result};

/// The 20 canonical amino acids in lexicographic order.
pub const CANONICAL_RESIDUES: &str = "ACDEFGHIKLMNPQRSTVWY";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    fallback: Option<usize>,
    lookup: [Option<u8>; 128],
}

impl Default for Alphabet {
    /// Canonical 20 followed by `X`; every other character folds to `X`.
    fn default() -> Self {
        let symbols = format!("{CANONICAL_RESIDUES}X");
        Self::new(&symbols, Some('X')).expect("default alphabet is valid")
    }
}

impl Alphabet {
    /// `fallback`, when set, must be one of `symbols` and absorbs every
    /// character outside the alphabet.
    pub fn new(symbols: &str, fallback: Option<char>) -> Result<Self> {
        let symbols: Vec<char> = symbols.chars().collect();
        if symbols.is_empty() {
            return Err(Error::param("alphabet must not be empty"));
        }
        if symbols.len() > u8::MAX as usize {
            return Err(Error::param("alphabet too large"));
        }
        let mut lookup = [None; 128];
        for (i, &c) in symbols.iter().enumerate() {
            if !c.is_ascii() {
                return Err(Error::param(format!("non-ASCII alphabet symbol {c:?}")));
            }
            if lookup[c as usize].is_some() {
                return Err(Error::param(format!("duplicate alphabet symbol {c:?}")));
            }
            lookup[c as usize] = Some(i as u8);
        }
        let fallback = match fallback {
            Some(f) => Some(
                symbols
                    .iter()
                    .position(|&s| s == f)
                    .ok_or_else(|| Error::param(format!("fallback {f:?} is not an alphabet symbol")))?,
            ),
            None => None,
        };
        Ok(Self {
            symbols,
            fallback,
            lookup,
        })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn symbol_string(&self) -> String {
        self.symbols.iter().collect()
    }

    pub fn fallback(&self) -> Option<char> {
        self.fallback.map(|i| self.symbols[i])
    }

    /// 0-based index of the folded symbol for a raw character.
    pub fn index_of(&self, c: char) -> Result<usize> {
        let direct = if c.is_ascii() {
            self.lookup[c as usize].map(usize::from)
        } else {
            None
        };
        direct.or(self.fallback).ok_or(Error::UnknownSymbol(c))
    }

    pub fn fold(&self, seq: &str) -> Result<String> {
        seq.chars()
            .map(|c| self.index_of(c).map(|i| self.symbols[i]))
            .collect()
    }
}

/// Row-major `rows x cols` 0/1 matrix; rows past `true_length` are zero.
#[derive(Clone, Debug, PartialEq)]
pub struct OneHotTensor {
    rows: usize,
    cols: usize,
    true_length: usize,
    /// Active column per non-pad row.
    active: Vec<usize>,
}

impl OneHotTensor {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn true_length(&self) -> usize {
        self.true_length
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        match self.active.get(row) {
            Some(&c) if c == col => 1.0,
            _ => 0.0,
        }
    }

    /// Flat indices (row * cols + col) of the non-zero entries, ascending.
    pub fn nonzero_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .enumerate()
            .map(move |(r, &c)| r * self.cols + c)
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for i in self.nonzero_indices() {
            out[i] = 1.0;
        }
        out
    }

    pub fn decode(&self, alphabet: &Alphabet) -> String {
        self.active.iter().map(|&c| alphabet.symbols()[c]).collect()
    }
}

/// Integer series, 1-based alphabet index per residue, 0 past the end.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignalSeries {
    pub values: Vec<u32>,
    pub true_length: usize,
}

impl SignalSeries {
    pub fn to_f64(&self) -> Vec<f64> {
        self.values.iter().map(|&v| f64::from(v)).collect()
    }

    pub fn trimmed_f64(&self) -> Vec<f64> {
        self.values[..self.true_length]
            .iter()
            .map(|&v| f64::from(v))
            .collect()
    }

    pub fn decode(&self, alphabet: &Alphabet) -> String {
        self.values[..self.true_length]
            .iter()
            .map(|&v| alphabet.symbols()[v as usize - 1])
            .collect()
    }
}

fn check_len(seq: &str, max_len: usize) -> Result<()> {
    let len = seq.chars().count();
    if len > max_len {
        return Err(Error::SequenceTooLong { len, max_len });
    }
    Ok(())
}

pub fn one_hot_encode(seq: &str, alphabet: &Alphabet, max_len: usize) -> Result<OneHotTensor> {
    check_len(seq, max_len)?;
    let active = seq
        .chars()
        .map(|c| alphabet.index_of(c))
        .collect::<Result<Vec<_>>>()?;
    Ok(OneHotTensor {
        rows: max_len,
        cols: alphabet.len(),
        true_length: active.len(),
        active,
    })
}

pub fn signal_encode(seq: &str, alphabet: &Alphabet, max_len: usize) -> Result<SignalSeries> {
    check_len(seq, max_len)?;
    let mut values = vec![0u32; max_len];
    let mut true_length = 0;
    for (slot, c) in values.iter_mut().zip(seq.chars()) {
        *slot = alphabet.index_of(c)? as u32 + 1;
        true_length += 1;
    }
    Ok(SignalSeries {
        values,
        true_length,
    })
}
