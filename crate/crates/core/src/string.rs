//! d-non-repeating strings over `Z_n = [1, n]` and the window oracle `B_S`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite string over the alphabet `[1, alphabet_n]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolString {
    pub symbols: Vec<i64>,
    pub alphabet_n: i64,
}

impl SymbolString {
    pub fn new(symbols: Vec<i64>, alphabet_n: i64) -> Result<Self> {
        if let Some(&bad) = symbols.iter().find(|&&a| !(1..=alphabet_n).contains(&a)) {
            return Err(Error::SymbolOutOfRange(bad));
        }
        Ok(SymbolString { symbols, alphabet_n })
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses the text format: a `d=<d> n=<n>` header line, then one line of
    /// whitespace-separated symbols. Returns the string and `d`.
    pub fn parse_text(text: &str) -> Result<(Self, usize)> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty input".into()))?;
        let mut d = None;
        let mut n = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("d", v)) => d = v.parse::<usize>().ok(),
                Some(("n", v)) => n = v.parse::<i64>().ok(),
                _ => return Err(Error::Parse(format!("bad header token {tok:?}"))),
            }
        }
        let (d, n) = d.zip(n).ok_or_else(|| Error::Parse("header needs d= and n=".into()))?;
        let body = lines.next().ok_or_else(|| Error::Parse("missing symbol line".into()))?;
        let symbols = body
            .split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((SymbolString::new(symbols, n)?, d))
    }

    pub fn to_text(&self, d: usize) -> String {
        format!("d={d} n={}\n{self}\n", self.alphabet_n)
    }
}

impl fmt::Display for SymbolString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.symbols.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// `B_S` reply: the symbols just before and just after a window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StringAnswer {
    pub left: Option<i64>,
    pub right: Option<i64>,
}

impl StringAnswer {
    pub const ABSENT: StringAnswer = StringAnswer { left: None, right: None };
}

/// Checks the three conditions of d-non-repetition. Positions are 1-based:
/// `a_i` must be odd exactly when `d | i`.
pub fn is_d_non_repeating(s: &SymbolString, d: usize) -> bool {
    assert!(d >= 1, "window length must be positive");
    let a = &s.symbols;
    if a.len() % d != 0 {
        return false;
    }
    let parity_ok = a
        .iter()
        .enumerate()
        .all(|(i, &x)| (x.rem_euclid(2) == 1) == ((i + 1) % d == 0));
    if !parity_ok {
        return false;
    }
    let mut seen = std::collections::HashSet::new();
    a.windows(d).all(|w| seen.insert(w))
}

/// The last `d` symbols.
pub fn end_d(s: &SymbolString, d: usize) -> Result<Vec<i64>> {
    if !is_d_non_repeating(s, d) || s.is_empty() {
        return Err(Error::Precondition("end_d requires a non-empty d-non-repeating string".into()));
    }
    Ok(s.symbols[s.len() - d..].to_vec())
}

/// Query access to a d-non-repeating string.
pub trait StringOracle {
    /// Window length `d`.
    fn window(&self) -> usize;
    fn alphabet(&self) -> i64;
    /// The first `d` symbols; public instance data.
    fn start_window(&self) -> Vec<i64>;
    fn query(&self, w: &[i64]) -> StringAnswer;
}

impl<T: StringOracle + ?Sized> StringOracle for &T {
    fn window(&self) -> usize {
        (**self).window()
    }
    fn alphabet(&self) -> i64 {
        (**self).alphabet()
    }
    fn start_window(&self) -> Vec<i64> {
        (**self).start_window()
    }
    fn query(&self, w: &[i64]) -> StringAnswer {
        (**self).query(w)
    }
}

impl<O: StringOracle> StringOracle for crate::counter::Counted<O> {
    fn window(&self) -> usize {
        self.inner.window()
    }
    fn alphabet(&self) -> i64 {
        self.inner.alphabet()
    }
    fn start_window(&self) -> Vec<i64> {
        self.inner.start_window()
    }
    fn query(&self, w: &[i64]) -> StringAnswer {
        self.tick();
        self.inner.query(w)
    }
}

/// A materialized string with every window indexed.
#[derive(Debug, Clone)]
pub struct IndexedString {
    s: SymbolString,
    d: usize,
    index: HashMap<Vec<i64>, usize>,
}

impl IndexedString {
    pub fn new(s: SymbolString, d: usize) -> Result<Self> {
        if !is_d_non_repeating(&s, d) || s.len() < d {
            return Err(Error::Precondition("string is not d-non-repeating".into()));
        }
        let index = s.symbols.windows(d).enumerate().map(|(k, w)| (w.to_vec(), k)).collect();
        Ok(IndexedString { s, d, index })
    }

    pub fn string(&self) -> &SymbolString {
        &self.s
    }
}

impl StringOracle for IndexedString {
    fn window(&self) -> usize {
        self.d
    }

    fn alphabet(&self) -> i64 {
        self.s.alphabet_n
    }

    fn start_window(&self) -> Vec<i64> {
        self.s.symbols[..self.d].to_vec()
    }

    fn query(&self, w: &[i64]) -> StringAnswer {
        string_oracle_indexed(&self.s.symbols, self.d, &self.index, w)
    }
}

fn string_oracle_indexed(a: &[i64], d: usize, index: &HashMap<Vec<i64>, usize>, w: &[i64]) -> StringAnswer {
    if w.len() != d {
        return StringAnswer::ABSENT;
    }
    match index.get(w) {
        None => StringAnswer::ABSENT,
        Some(&k) => StringAnswer {
            left: k.checked_sub(1).map(|i| a[i]),
            right: a.get(k + d).copied(),
        },
    }
}

/// One-shot `B_S` by direct scan; the reference the indexed oracle is tested
/// against.
pub fn string_oracle(s: &SymbolString, d: usize, query: &[i64]) -> Result<StringAnswer> {
    if !is_d_non_repeating(s, d) {
        return Err(Error::Precondition("string is not d-non-repeating".into()));
    }
    if query.len() != d {
        return Err(Error::Precondition(format!("query length {} != {d}", query.len())));
    }
    let a = &s.symbols;
    Ok(match a.windows(d).position(|w| w == query) {
        None => StringAnswer::ABSENT,
        Some(k) => StringAnswer { left: k.checked_sub(1).map(|i| a[i]), right: a.get(k + d).copied() },
    })
}
