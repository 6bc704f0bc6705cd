//! Alphabets, symbols and finite words.
//!
//! A [`Word`] stores a finite stretch of the past with the most recent symbol
//! last: position `j` of a word of length `k` is coordinate `-(k-1)+j`, so the
//! final entry is coordinate 0. The empty word stands for the whole space.

use std::borrow::Borrow;
use std::fmt;
use std::ops::Deref;

use crate::error::{Error, Result};

/// Index of a symbol inside its [`Alphabet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(pub u8);

impl Symbol {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered finite set of single-character symbol labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alphabet {
    labels: Vec<char>,
}

impl Alphabet {
    pub fn new(labels: impl IntoIterator<Item = char>) -> Result<Self> {
        let labels: Vec<char> = labels.into_iter().collect();
        if labels.len() < 2 {
            return Err(Error::input(format!("alphabet needs at least 2 symbols, got {}", labels.len())));
        }
        if labels.len() > u8::MAX as usize {
            return Err(Error::input("alphabet larger than 255 symbols"));
        }
        for (i, c) in labels.iter().enumerate() {
            if labels[..i].contains(c) {
                return Err(Error::input(format!("duplicate symbol label {c:?}")));
            }
        }
        Ok(Self { labels })
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        Self { labels: vec!['0', '1'] }
    }

    /// `{0, 1, 2}`.
    pub fn ternary() -> Self {
        Self { labels: vec!['0', '1', '2'] }
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[char] {
        &self.labels
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + Clone {
        (0..self.labels.len() as u8).map(Symbol)
    }

    pub fn symbol(&self, label: char) -> Result<Symbol> {
        self.labels
            .iter()
            .position(|&c| c == label)
            .map(|i| Symbol(i as u8))
            .ok_or_else(|| Error::input(format!("symbol {label:?} not in alphabet")))
    }

    pub fn label(&self, s: Symbol) -> char {
        self.labels[s.index()]
    }

    pub fn contains(&self, s: Symbol) -> bool {
        s.index() < self.labels.len()
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        text.chars().map(|c| self.symbol(c)).collect::<Result<Vec<_>>>().map(Word)
    }

    pub fn render(&self, w: &[Symbol]) -> String {
        w.iter().map(|&s| self.label(s)).collect()
    }

    /// Appends the label `a` as the new coordinate 0.
    pub fn extend(&self, w: &Word, a: char) -> Result<Word> {
        Ok(w.extend(self.symbol(a)?))
    }

    /// All words of length `n` in lexicographic rank order.
    pub fn words(&self, n: usize) -> WordIter {
        WordIter::new(self.size(), n)
    }

    /// Lexicographic rank of `w` among words of its length.
    pub fn rank(&self, w: &[Symbol]) -> usize {
        let m = self.size();
        w.iter().fold(0, |acc, s| acc * m + s.index())
    }

    /// Inverse of [`Alphabet::rank`].
    pub fn unrank(&self, mut rank: usize, len: usize) -> Word {
        let m = self.size();
        let mut out = vec![Symbol(0); len];
        for slot in out.iter_mut().rev() {
            *slot = Symbol((rank % m) as u8);
            rank /= m;
        }
        Word(out)
    }
}

/// Odometer over `A^n`, first coordinate most significant.
#[derive(Debug, Clone)]
pub struct WordIter {
    m: u8,
    current: Option<Vec<Symbol>>,
}

impl WordIter {
    fn new(m: usize, n: usize) -> Self {
        Self { m: m as u8, current: Some(vec![Symbol(0); n]) }
    }
}

impl Iterator for WordIter {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        let cur = self.current.as_mut()?;
        let out = Word(cur.clone());
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i].0 + 1 < self.m {
                cur[i].0 += 1;
                break;
            }
            cur[i] = Symbol(0);
        }
        Some(out)
    }
}

/// Finite word, most recent symbol last.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(Vec<Symbol>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_symbols(symbols: Vec<Symbol>) -> Self {
        Self(symbols)
    }

    pub fn repeat(s: Symbol, n: usize) -> Self {
        Self(vec![s; n])
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.0
    }

    pub fn into_symbols(self) -> Vec<Symbol> {
        self.0
    }

    /// New word whose coordinate 0 is `a`; the old coordinates shift one step
    /// into the past.
    pub fn extend(&self, a: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.extend_from_slice(&self.0);
        v.push(a);
        Word(v)
    }

    /// Removes coordinate 0 (the action of the shift on cylinders).
    pub fn drop_last(&self) -> Result<Word> {
        match self.0.split_last() {
            Some((_, rest)) => Ok(Word(rest.to_vec())),
            None => Err(Error::input("drop_last on the empty word")),
        }
    }

    /// Adds `a` as the new oldest coordinate.
    pub fn prepend(&self, a: Symbol) -> Word {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend_from_slice(&self.0);
        Word(v)
    }

    /// The most recent `n` coordinates.
    pub fn suffix(&self, n: usize) -> &[Symbol] {
        &self.0[self.0.len() - n.min(self.0.len())..]
    }

    pub fn last(&self) -> Option<Symbol> {
        self.0.last().copied()
    }
}

impl Deref for Word {
    type Target = [Symbol];

    fn deref(&self) -> &[Symbol] {
        &self.0
    }
}

// `Word` hashes exactly as its symbol slice.
impl Borrow<[Symbol]> for Word {
    fn borrow(&self) -> &[Symbol] {
        &self.0
    }
}

impl From<&[Symbol]> for Word {
    fn from(s: &[Symbol]) -> Self {
        Word(s.to_vec())
    }
}

impl fmt::Display for Word {
    /// Renders symbol indices; use [`Alphabet::render`] for labels.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "{}", s.0)?;
        }
        Ok(())
    }
}
