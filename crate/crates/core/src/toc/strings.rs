//! The string encodings `S[T]`, `Q[T]` of a ToC and their window oracle
//! answered with at most one `B_T` query.

use std::sync::Arc;

use super::{Name, Subtree, Toc, TocAnswer, TocOracle, TocSpec};
use crate::error::{Error, Result};
use crate::string::{IndexedString, StringAnswer, StringOracle, SymbolString};

/// `F(p) = (2p_1, ..., 2p_{d-1}, 2p_d - 1)`: a leaf name as a string window.
pub fn nt_embed(p: &[i64]) -> Vec<i64> {
    let mut w: Vec<i64> = p.iter().map(|&x| 2 * x).collect();
    if let Some(last) = w.last_mut() {
        *last -= 1;
    }
    w
}

/// `s_d = (2, ..., 2, 1)`.
fn s_block(d: usize) -> Vec<i64> {
    let mut v = vec![2; d];
    v[d - 1] = 1;
    v
}

fn insert_raw(s: &[i64], d: usize, t: i64) -> Result<Vec<i64>> {
    if d == 0 || s.len() % d != 0 {
        return Err(Error::Precondition(format!("length {} not divisible by {d}", s.len())));
    }
    let mut out = Vec::with_capacity(s.len() + s.len() / d);
    for (i, block) in s.chunks(d).enumerate() {
        if i > 0 {
            out.push(t);
        }
        out.extend_from_slice(block);
    }
    Ok(out)
}

fn concat_raw(mut a: Vec<i64>, b: &[i64], d: usize) -> Result<Vec<i64>> {
    if a.len() < d || b.len() < d || a[a.len() - d..] != b[..d] {
        return Err(Error::OverlapMismatch);
    }
    a.extend_from_slice(&b[d..]);
    Ok(a)
}

/// `insert_d(S, t)`: `t` between consecutive `d`-blocks of `S`.
pub fn insert_d(s: &SymbolString, d: usize, t: i64) -> Result<SymbolString> {
    let n = s.alphabet_n.max(t);
    SymbolString::new(insert_raw(&s.symbols, d, t)?, n)
}

/// `S1 ∘_d S2`: merge on an overlap of `d` symbols.
pub fn concat_d(s1: &SymbolString, s2: &SymbolString, d: usize) -> Result<SymbolString> {
    let n = s1.alphabet_n.max(s2.alphabet_n);
    SymbolString::new(concat_raw(s1.symbols.clone(), &s2.symbols, d)?, n)
}

/// Selects `S[T]` or `Q[T]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Which {
    S,
    Q,
}

impl Which {
    /// The string of the `a`-successor spliced into this one: `S` uses `S`
    /// below even labels and `Q` below odd ones; `Q` the reverse.
    fn below(self, a: i64) -> Which {
        match (self, a % 2 == 0) {
            (Which::S, true) | (Which::Q, false) => Which::S,
            _ => Which::Q,
        }
    }
}

fn build(toc: &Toc, v: &[i64], which: Which) -> Result<Vec<i64>> {
    let m = toc.spec().d - v.len();
    let conn = toc.connector(v)?;
    let c = conn.string();
    if m == 1 {
        let b = c.iter().map(|&a| 2 * a - 1);
        return Ok(match which {
            Which::S => std::iter::once(1).chain(b).collect(),
            Which::Q => b.rev().chain(std::iter::once(1)).collect(),
        });
    }
    let piece = |a: i64| -> Result<Vec<i64>> {
        let mut w: Name = v.to_vec();
        w.push(a);
        insert_raw(&build(toc, &w, which.below(a))?, m - 1, 2 * a)
    };
    match which {
        Which::S => {
            let mut acc = s_block(m);
            for &a in c {
                acc = concat_raw(acc, &piece(a)?, m - 1)?;
            }
            Ok(acc)
        }
        Which::Q => {
            let mut acc = vec![2 * conn.r()];
            acc.extend(piece(conn.r())?);
            for &a in c.iter().rev().skip(1) {
                acc = concat_raw(acc, &piece(a)?, m - 1)?;
            }
            acc.extend(s_block(m));
            Ok(acc)
        }
    }
}

/// Materializes `S[T]`. Fails with `OverlapMismatch` on an invalid ToC.
pub fn build_s(toc: &Toc) -> Result<SymbolString> {
    SymbolString::new(build(toc, &[], Which::S)?, toc.spec().alphabet())
}

/// Materializes `Q[T]`.
pub fn build_q(toc: &Toc) -> Result<SymbolString> {
    SymbolString::new(build(toc, &[], Which::Q)?, toc.spec().alphabet())
}

/// Indexed strings of the identity ToC; they answer every window that
/// contains a 1 or a 2 for all valid ToCs alike.
#[derive(Debug, Clone)]
pub struct IdentityStrings {
    pub s: IndexedString,
    pub q: IndexedString,
}

pub fn identity_strings(spec: TocSpec) -> Result<Arc<IdentityStrings>> {
    let t = Toc::identity(spec);
    Ok(Arc::new(IdentityStrings {
        s: IndexedString::new(build_s(&t)?, spec.d)?,
        q: IndexedString::new(build_q(&t)?, spec.d)?,
    }))
}

/// What the evaluator may learn about connectors on the query path: `φ` of
/// label `a` at node `path`, `None` when `a` is the last label.
trait PathKnowledge {
    fn phi(&self, path: &[i64], a: i64) -> Result<Option<i64>>;
}

struct Full<'a>(&'a Toc);

impl PathKnowledge for Full<'_> {
    fn phi(&self, path: &[i64], a: i64) -> Result<Option<i64>> {
        Ok(self.0.connector(path)?.phi(a))
    }
}

/// Knowledge granted by one `B_T(q)` reply.
struct Granted<'a> {
    d: usize,
    q: &'a [i64],
    ans: &'a TocAnswer,
}

impl PathKnowledge for Granted<'_> {
    fn phi(&self, path: &[i64], a: i64) -> Result<Option<i64>> {
        let not_derivable = || Error::Inconsistent(format!("phi({a}) at {} not granted by B_T", super::fmt_name(path)));
        let in_subtree = |t: &Subtree| -> Result<Option<i64>> {
            let rel = path.strip_prefix(t.root()).ok_or_else(not_derivable)?;
            Ok(t.connector(rel)?.phi(a))
        };
        match self.ans {
            TocAnswer::WholeTree(t) => in_subtree(t),
            TocAnswer::Partial { h, phi, t1, .. } => {
                let head = self.d - h;
                if path.len() >= head {
                    in_subtree(t1)
                } else if path.len() + 1 == head && path == &self.q[..head - 1] && a == self.q[head - 1] {
                    Ok(Some(*phi))
                } else {
                    Err(not_derivable())
                }
            }
        }
    }
}

/// `B_{X}(w)` for `X` the `which`-string of the subtree at `path`, for
/// windows free of the symbols 1 and 2. Walks down one level per symbol:
/// every window holds exactly one inserted symbol, which names the subtree
/// the rest of the window lives in.
fn eval<K: PathKnowledge>(k: &K, n: i64, path: &mut Vec<i64>, which: Which, w: &[i64]) -> Result<StringAnswer> {
    let m = w.len();
    let absent = Ok(StringAnswer::ABSENT);
    if m == 1 {
        let x = w[0];
        if x % 2 == 0 || !(3..=4 * n + 3).contains(&x) {
            return absent;
        }
        let a = (x + 1) / 2;
        // Neighbours of `a` in the connector; `None` on the left means the
        // leading 1 of `S`.
        let (left, right) = if a % 2 == 0 {
            let left = (a != 2).then_some(a - 1);
            (left, k.phi(path, a)?)
        } else {
            let p = k.phi(path, a)?.ok_or_else(|| Error::Inconsistent("odd label without partner".into()))?;
            (Some(p), Some(a + 1))
        };
        let ls = Some(left.map_or(1, |l| 2 * l - 1));
        let rs = right.map(|r| 2 * r - 1);
        return Ok(match which {
            Which::S => StringAnswer { left: ls, right: rs },
            Which::Q => StringAnswer { left: rs, right: ls },
        });
    }
    let mut odd = w.iter().enumerate().filter(|(_, &x)| x % 2 != 0);
    let (Some((o, _)), None) = (odd.next(), odd.next()) else {
        return absent;
    };
    let kt = (o + 1) % m;
    let t = w[kt];
    if !(4..=4 * n + 4).contains(&t) {
        return absent;
    }
    let a = t / 2;
    let mut sub: Vec<i64> = w.to_vec();
    sub.remove(kt);
    path.push(a);
    let inner = eval(k, n, path, which.below(a), &sub);
    path.pop();
    let inner = inner?;
    if inner == StringAnswer::ABSENT {
        return absent;
    }
    // Inserted symbols of the connector neighbours of `a`: the label before
    // it (the leading 2 of `S` for a = 2) and the one after it.
    let before = |k: &K, path: &[i64]| -> Result<Option<i64>> {
        if a % 2 == 0 {
            Ok(Some(if a == 2 { 2 } else { 2 * (a - 1) }))
        } else {
            Ok(k.phi(path, a)?.map(|p| 2 * p))
        }
    };
    let after = |k: &K, path: &[i64]| -> Result<Option<i64>> {
        if a % 2 == 0 {
            Ok(k.phi(path, a)?.map(|p| 2 * p))
        } else {
            Ok(Some(2 * (a + 1)))
        }
    };
    if kt == 0 {
        // (t, block): t precedes every block of its piece but the first,
        // except at the very start of Q.
        if inner.left.is_none() && (which == Which::S || k.phi(path, a)?.is_some()) {
            return absent;
        }
        let right = if inner.right.is_some() {
            Some(t)
        } else {
            match which {
                Which::S => after(k, path)?,
                Which::Q => before(k, path)?,
            }
        };
        Ok(StringAnswer { left: inner.left, right })
    } else if kt == m - 1 {
        // (block, t): t follows every block but the last.
        if inner.right.is_none() {
            return absent;
        }
        let left = if inner.left.is_some() {
            Some(t)
        } else {
            match which {
                Which::S => before(k, path)?,
                // Q opens with 2·r[C], so the first piece is preceded by t.
                Which::Q => after(k, path)?.or(Some(t)),
            }
        };
        Ok(StringAnswer { left, right: inner.right })
    } else {
        Ok(inner)
    }
}

fn check_window(spec: TocSpec, u: &[i64]) -> Result<()> {
    if u.len() != spec.d {
        return Err(Error::DimensionMismatch(u.len(), spec.d));
    }
    if let Some(&x) = u.iter().find(|&&x| !(1..=spec.alphabet()).contains(&x)) {
        return Err(Error::SymbolOutOfRange(x));
    }
    Ok(())
}

/// Classification shared by both entry points. `Ok(Some(..))` settles the
/// window without touching the ToC.
fn prefilter(ident: &IdentityStrings, u: &[i64]) -> Option<(StringAnswer, StringAnswer)> {
    if u.iter().filter(|&&x| x % 2 != 0).count() != 1 {
        return Some((StringAnswer::ABSENT, StringAnswer::ABSENT));
    }
    if u.iter().any(|&x| x <= 2) {
        return Some((ident.s.query(u), ident.q.query(u)));
    }
    None
}

/// The leaf a window of `U_k` refers to: rotate the odd entry to the end,
/// then invert `F`.
fn leaf_of(u: &[i64]) -> Vec<i64> {
    let d = u.len();
    let o = u.iter().position(|&x| x % 2 != 0).expect("one odd entry");
    (0..d).map(|i| (u[(o + 1 + i) % d] + 1) / 2).collect()
}

/// `(B_{S[T]}(u), B_{Q[T]}(u))` with at most one call to `oracle`.
pub fn string_answers_from_toc<O: TocOracle>(
    oracle: &O,
    ident: &IdentityStrings,
    u: &[i64],
) -> Result<(StringAnswer, StringAnswer)> {
    let spec = oracle.spec();
    check_window(spec, u)?;
    if let Some(ans) = prefilter(ident, u) {
        return Ok(ans);
    }
    let q = leaf_of(u);
    let ans = oracle.query(&q)?;
    let k = Granted { d: spec.d, q: &q, ans: &ans };
    let n = spec.n as i64;
    Ok((eval(&k, n, &mut Vec::new(), Which::S, u)?, eval(&k, n, &mut Vec::new(), Which::Q, u)?))
}

/// Same answers computed with unrestricted access to `toc`; the reference
/// for the one-query version.
pub fn string_answers_full(toc: &Toc, ident: &IdentityStrings, u: &[i64]) -> Result<(StringAnswer, StringAnswer)> {
    let spec = toc.spec();
    check_window(spec, u)?;
    if let Some(ans) = prefilter(ident, u) {
        return Ok(ans);
    }
    let n = spec.n as i64;
    let k = Full(toc);
    Ok((eval(&k, n, &mut Vec::new(), Which::S, u)?, eval(&k, n, &mut Vec::new(), Which::Q, u)?))
}

/// `S[T]` (or `Q[T]`) as a string oracle backed by `B_T`.
#[derive(Debug, Clone)]
pub struct TocStrings<O> {
    oracle: O,
    ident: Arc<IdentityStrings>,
    which: Which,
}

impl<O: TocOracle> TocStrings<O> {
    pub fn new(oracle: O, which: Which) -> Result<Self> {
        let ident = identity_strings(oracle.spec())?;
        Ok(TocStrings { oracle, ident, which })
    }

    pub fn oracle(&self) -> &O {
        &self.oracle
    }
}

impl<O: TocOracle> StringOracle for TocStrings<O> {
    fn window(&self) -> usize {
        self.oracle.spec().d
    }

    fn alphabet(&self) -> i64 {
        self.oracle.spec().alphabet()
    }

    /// `s_d` for `S`. For `Q` the first window encodes the tail, which is
    /// not public; callers use `S`.
    fn start_window(&self) -> Vec<i64> {
        match self.which {
            Which::S => s_block(self.window()),
            Which::Q => panic!("the start of Q[T] is not public data"),
        }
    }

    fn query(&self, w: &[i64]) -> StringAnswer {
        if w.len() != self.window() || w.iter().any(|&x| !(1..=self.alphabet()).contains(&x)) {
            return StringAnswer::ABSENT;
        }
        let (s, q) = string_answers_from_toc(&self.oracle, &self.ident, w)
            .unwrap_or_else(|e| panic!("string answer from ToC failed on {w:?}: {e}"));
        match self.which {
            Which::S => s,
            Which::Q => q,
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::counter::{Counted, Layer, QueryCounter};
    use crate::lattice::LexPoints;
    use crate::string::{end_d, is_d_non_repeating};

    fn spec(n: usize, d: usize) -> TocSpec {
        TocSpec::new(n, d).unwrap()
    }

    pub(crate) const FIG4_S: [i64; 52] = [
        2, 1, 4, 3, 4, 5, 4, 7, 4, 9, 4, 11, 10, 9, 10, 7, 10, 5, 10, 3, 10, 1, 12, 3, 12, 9, 12, 11, 12, 5, 12, 7, 6,
        5, 6, 11, 6, 9, 6, 3, 6, 1, 8, 3, 8, 5, 8, 7, 8, 9, 8, 11,
    ];
    pub(crate) const FIG4_Q: [i64; 54] = [
        8, 11, 8, 9, 8, 7, 8, 5, 8, 3, 8, 1, 6, 3, 6, 9, 6, 11, 6, 5, 6, 7, 12, 5, 12, 11, 12, 9, 12, 3, 12, 1, 10, 3,
        10, 5, 10, 7, 10, 9, 10, 11, 4, 9, 4, 7, 4, 5, 4, 3, 4, 1, 2, 1,
    ];

    /// The (2,2) tree whose strings are printed as the worked example: root
    /// permutation (2,1); successors 6 and 3 also use (2,1), the rest the
    /// identity.
    fn fig4_tree() -> Toc {
        let s = spec(2, 2);
        let mut table: BTreeMap<Name, Vec<usize>> = s.internal_names().into_iter().map(|v| (v, vec![1, 2])).collect();
        for v in [vec![], vec![6], vec![3]] {
            table.insert(v, vec![2, 1]);
        }
        Toc::from_table(s, table).unwrap()
    }

    #[test]
    fn insert_and_concat_examples() {
        let st = |v: &[i64]| SymbolString::new(v.to_vec(), 9).unwrap();
        assert_eq!(insert_d(&st(&[1, 3]), 1, 4).unwrap().symbols, vec![1, 4, 3]);
        assert_eq!(insert_d(&st(&[1, 2, 3, 4]), 2, 9).unwrap().symbols, vec![1, 2, 9, 3, 4]);
        assert_eq!(insert_d(&st(&[5]), 1, 2).unwrap().symbols, vec![5]);
        assert!(insert_d(&st(&[1, 2, 3]), 2, 9).is_err());
        assert_eq!(concat_d(&st(&[1, 2, 3]), &st(&[3, 4]), 1).unwrap().symbols, vec![1, 2, 3, 4]);
        assert_eq!(concat_d(&st(&[2, 1]), &st(&[2, 1]), 2).unwrap().symbols, vec![2, 1]);
        assert_eq!(concat_d(&st(&[1, 2]), &st(&[3, 4]), 1), Err(Error::OverlapMismatch));
    }

    #[test]
    fn base_case_strings() {
        let t = Toc::random(spec(1, 1), 0);
        assert_eq!(build_s(&t).unwrap().symbols, vec![1, 3, 5, 7]);
        assert_eq!(build_q(&t).unwrap().symbols, vec![7, 5, 3, 1]);
        assert_eq!(nt_embed(&[4]), vec![7]);
        assert_eq!(nt_embed(&[4, 6]), vec![8, 11]);
    }

    #[test]
    fn worked_example_strings_are_reproduced() {
        let t = fig4_tree();
        assert!(t.is_valid());
        assert_eq!(t.tail(), vec![4, 6]);
        assert_eq!(build_s(&t).unwrap().symbols, FIG4_S.to_vec());
        assert_eq!(build_q(&t).unwrap().symbols, FIG4_Q.to_vec());
        let s = build_s(&t).unwrap();
        assert_eq!(end_d(&s, 2).unwrap(), vec![8, 11]);
    }

    #[test]
    fn encodings_are_non_repeating_with_the_right_ends() {
        for (n, d) in [(1, 1), (2, 1), (1, 2), (2, 2), (3, 2), (1, 3), (2, 3), (3, 3)] {
            for seed in 0..6 {
                let t = Toc::random(spec(n, d), seed);
                let (s, q) = (build_s(&t).unwrap(), build_q(&t).unwrap());
                assert!(is_d_non_repeating(&s, d), "S n={n} d={d} seed={seed}");
                assert!(is_d_non_repeating(&q, d), "Q n={n} d={d} seed={seed}");
                let f = nt_embed(&t.tail());
                assert_eq!(s.symbols[..d], s_block(d)[..]);
                assert_eq!(end_d(&s, d).unwrap(), f);
                assert_eq!(q.symbols[..d], f[..]);
                assert_eq!(end_d(&q, d).unwrap(), s_block(d));
            }
        }
    }

    #[test]
    fn invalid_tree_fails_to_encode() {
        // Root (1,2) pairs successors 2 and 3; their tails must agree.
        let s = spec(2, 2);
        let mut table: BTreeMap<Name, Vec<usize>> = s.internal_names().into_iter().map(|v| (v, vec![1, 2])).collect();
        table.insert(vec![3], vec![2, 1]);
        let t = Toc::from_table(s, table).unwrap();
        assert!(!t.is_valid());
        assert_eq!(build_s(&t), Err(Error::OverlapMismatch));
    }

    /// Exhaustive comparison of both answer paths against the materialized
    /// strings, plus the one-query bound.
    fn cross_check(t: &Toc) {
        let sp = t.spec();
        let ident = identity_strings(sp).unwrap();
        let s = IndexedString::new(build_s(t).unwrap(), sp.d).unwrap();
        let q = IndexedString::new(build_q(t).unwrap(), sp.d).unwrap();
        let counter = QueryCounter::new();
        let counted = Counted::new(t.clone(), counter.clone(), Layer::Toc);
        for u in LexPoints::cube(sp.d, 1, sp.alphabet()) {
            let u = u.coords();
            let want = (s.query(u), q.query(u));
            let before = counter.get(Layer::Toc);
            assert_eq!(string_answers_from_toc(&counted, &ident, u).unwrap(), want, "{t:?} u={u:?}");
            assert!(counter.get(Layer::Toc) - before <= 1);
            assert_eq!(string_answers_full(t, &ident, u).unwrap(), want, "{t:?} u={u:?}");
        }
    }

    #[test]
    fn one_query_answers_match_materialized_strings_exhaustively() {
        for (n, d) in [(1, 1), (2, 1), (3, 1), (1, 2), (1, 3)] {
            for seed in 0..4 {
                cross_check(&Toc::random(spec(n, d), seed));
            }
        }
        for t in super::super::enumerate_valid(spec(2, 2), 1000).unwrap() {
            cross_check(&t);
        }
        cross_check(&fig4_tree());
    }

    #[test]
    fn one_query_answers_match_at_larger_sizes() {
        for (n, d) in [(3, 2), (2, 3)] {
            for seed in 0..3 {
                cross_check(&Toc::random(spec(n, d), seed));
            }
        }
    }

    #[test]
    fn windows_with_small_symbols_agree_across_trees() {
        let sp = spec(2, 2);
        let all = super::super::enumerate_valid(sp, 1000).unwrap();
        let strings: Vec<_> = all
            .iter()
            .map(|t| {
                (
                    IndexedString::new(build_s(t).unwrap(), 2).unwrap(),
                    IndexedString::new(build_q(t).unwrap(), 2).unwrap(),
                )
            })
            .collect();
        for u in LexPoints::cube(2, 1, sp.alphabet()) {
            let u = u.coords();
            let odd = u.iter().filter(|&&x| x % 2 != 0).count();
            if odd != 1 {
                assert!(strings.iter().all(|(s, q)| s.query(u) == StringAnswer::ABSENT && q.query(u) == StringAnswer::ABSENT));
            } else if u.iter().any(|&x| x <= 2) {
                let first = (strings[0].0.query(u), strings[0].1.query(u));
                assert!(strings.iter().all(|(s, q)| (s.query(u), q.query(u)) == first), "u={u:?}");
            }
        }
    }

    #[test]
    fn toc_strings_oracle() {
        let t = Toc::random(spec(2, 2), 3);
        let o = TocStrings::new(t.clone(), Which::S).unwrap();
        assert_eq!(o.start_window(), vec![2, 1]);
        let s = build_s(&t).unwrap();
        let mut w = o.start_window();
        let mut walked = w.clone();
        while let Some(r) = o.query(&w).right {
            walked.push(r);
            w = walked[walked.len() - 2..].to_vec();
        }
        assert_eq!(walked, s.symbols);
    }
}
