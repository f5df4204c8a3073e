//! Partial connectors, Trees of Partial Connectors and the exact tail
//! statistics `F[T]`, `N[T, p]` at enumeration scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{fmt_name, Connector, Name, Subtree, Toc, TocSpec};
use crate::error::{Error, Result};

/// A set of segments covering `J_n`; the segment holding 2 starts with it.
#[derive(Clone, PartialEq, Eq)]
pub struct PartialConnector {
    /// `segments[0]` starts with 2.
    segments: Vec<Vec<i64>>,
}

impl fmt::Debug for PartialConnector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.segments.iter().map(|s| fmt_name(s)).collect();
        write!(f, "{{{}}}", parts.join(" "))
    }
}

impl PartialConnector {
    /// The empty connector `{2, 3∘4, ..., (2n+1)∘(2n+2)}`.
    pub fn empty(n: usize) -> Self {
        let mut segments = vec![vec![2]];
        for k in 1..=n as i64 {
            segments.push(vec![2 * k + 1, 2 * k + 2]);
        }
        PartialConnector { segments }
    }

    pub fn from_connector(c: &Connector) -> Self {
        PartialConnector { segments: vec![c.string().to_vec()] }
    }

    pub fn segments(&self) -> &[Vec<i64>] {
        &self.segments
    }

    pub fn num_segments(&self) -> usize {
        self.segments.len()
    }

    /// `r[C]`: last symbol of the segment starting with 2.
    pub fn r(&self) -> i64 {
        *self.segments[0].last().expect("segments are non-empty")
    }

    /// `L[C]`: first symbols of the other segments.
    pub fn l_set(&self) -> BTreeSet<i64> {
        self.segments[1..].iter().map(|s| s[0]).collect()
    }

    /// `R[C]`: last symbols of the other segments.
    pub fn r_set(&self) -> BTreeSet<i64> {
        self.segments[1..].iter().map(|s| *s.last().expect("non-empty")).collect()
    }

    /// At least `(1 - β)n + 1` segments.
    pub fn is_beta_partial(&self, n: usize, beta: f64) -> bool {
        self.segments.len() as f64 + 1e-12 >= (1.0 - beta) * n as f64 + 1.0
    }

    /// `φ_C(s)` when both neighbours of `s` are known.
    pub fn phi(&self, s: i64) -> Option<i64> {
        for seg in &self.segments {
            if let Some(i) = seg.iter().position(|&x| x == s) {
                return if s % 2 == 0 { seg.get(i + 1).copied() } else { i.checked_sub(1).map(|j| seg[j]) };
            }
        }
        None
    }

    pub fn consistent_with(&self, c: &Connector) -> bool {
        let full = c.string();
        self.segments.iter().all(|seg| full.windows(seg.len()).any(|w| w == &seg[..]))
    }

    /// Joins the segment ending with `end` to the one starting with `start`.
    pub fn join(&mut self, end: i64, start: i64) -> Result<()> {
        let i = self.segments.iter().position(|s| s.last() == Some(&end));
        let j = self.segments.iter().position(|s| s[0] == start);
        match (i, j) {
            (Some(i), Some(j)) if i != j && j != 0 => {
                let tail = self.segments.remove(j);
                let i = if j < i { i - 1 } else { i };
                self.segments[i].extend(tail);
                Ok(())
            }
            _ => Err(Error::Inconsistent(format!("cannot join {end} -> {start} in {self:?}"))),
        }
    }
}

/// An algorithm's knowledge of a hidden ToC: a partial connector per
/// internal node, plus subtrees known completely.
#[derive(Clone)]
pub struct Topc {
    spec: TocSpec,
    partials: BTreeMap<Name, PartialConnector>,
    grafts: Vec<Subtree>,
}

impl fmt::Debug for Topc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Topc").field("partials", &self.partials).field("grafts", &self.grafts).finish()
    }
}

impl Topc {
    /// Every connector empty.
    pub fn new(spec: TocSpec) -> Self {
        Topc { spec, partials: BTreeMap::new(), grafts: Vec::new() }
    }

    /// Complete knowledge of `t`.
    pub fn whole(t: &Toc) -> Self {
        let mut p = Self::new(t.spec());
        p.graft(t.subtree(&[]).expect("root"));
        p
    }

    pub fn spec(&self) -> TocSpec {
        self.spec
    }

    fn graft_of(&self, v: &[i64]) -> Option<&Subtree> {
        self.grafts.iter().find(|g| v.starts_with(g.root()))
    }

    /// Whether the subtree at `v` is completely known.
    pub fn is_known(&self, v: &[i64]) -> bool {
        self.graft_of(v).is_some()
    }

    pub fn is_complete(&self) -> bool {
        self.is_known(&[])
    }

    pub fn partial(&self, v: &[i64]) -> PartialConnector {
        if let Some(g) = self.graft_of(v) {
            let c = g.connector(&v[g.root().len()..]).expect("graft covers node");
            return PartialConnector::from_connector(&c);
        }
        self.partials.get(v).cloned().unwrap_or_else(|| PartialConnector::empty(self.spec.n))
    }

    pub fn partial_mut(&mut self, v: &[i64]) -> Result<&mut PartialConnector> {
        if self.is_known(v) {
            return Err(Error::Inconsistent(format!("node {} is already fully known", fmt_name(v))));
        }
        let n = self.spec.n;
        Ok(self.partials.entry(v.to_vec()).or_insert_with(|| PartialConnector::empty(n)))
    }

    /// Replaces the subtree at `t.root()` by the known subtree `t`.
    pub fn graft(&mut self, t: Subtree) {
        let root = t.root().to_vec();
        self.grafts.retain(|g| !g.root().starts_with(&root));
        self.partials.retain(|k, _| !k.starts_with(&root));
        self.grafts.push(t);
    }

    /// `T ⊨ T*`.
    pub fn consistent_with(&self, t: &Toc) -> bool {
        self.consistent_below(&[], t)
    }

    /// Whether `t`, a tree of height `d - prefix.len()`, is consistent with
    /// the knowledge held about the subtree at `prefix`.
    pub fn consistent_below(&self, prefix: &[i64], t: &Toc) -> bool {
        let full = |w: &[i64]| -> Name { prefix.iter().chain(w).copied().collect() };
        let partial_ok = self
            .partials
            .iter()
            .filter(|(v, _)| v.starts_with(prefix))
            .all(|(v, p)| p.consistent_with(&t.connector(&v[prefix.len()..]).expect("internal")));
        partial_ok
            && t.spec().internal_names().iter().all(|w| {
                let v = full(w);
                match self.graft_of(&v) {
                    Some(g) => {
                        g.connector(&v[g.root().len()..]).expect("internal") == t.connector(w).expect("internal")
                    }
                    None => true,
                }
            })
    }

    /// Validity of a tree of partial connectors: every known pair below a
    /// non-bottom node joins two completely known subtrees with equal tails.
    pub fn is_valid(&self) -> bool {
        let d = self.spec.d;
        self.internal_with_knowledge().into_iter().filter(|v| v.len() + 2 <= d).all(|v| {
            let p = self.partial(&v);
            self.spec.labels().all(|s| match p.phi(s) {
                None => true,
                Some(t) => {
                    let child = |a: i64| {
                        let mut w = v.clone();
                        w.push(a);
                        w
                    };
                    let (vs, vt) = (child(s), child(t));
                    match (self.graft_of(&vs), self.graft_of(&vt)) {
                        (Some(gs), Some(gt)) => {
                            let tail = |g: &Subtree, w: &[i64]| {
                                let mut full = g.root().to_vec();
                                full.extend(g.rel_tail());
                                full[w.len()..].to_vec()
                            };
                            tail(gs, &vs) == tail(gt, &vt)
                        }
                        _ => false,
                    }
                }
            })
        })
    }

    /// Validity with the `β`-partial closure condition.
    pub fn is_valid_beta(&self, beta: f64) -> bool {
        let (n, d) = (self.spec.n, self.spec.d);
        if !self.is_valid() || !self.partial(&[]).is_beta_partial(n, beta) {
            return false;
        }
        self.spec.internal_names().into_iter().filter(|v| v.len() + 2 <= d).all(|v| {
            let p = self.partial(&v);
            if !p.is_beta_partial(n, beta) {
                return true;
            }
            let mut labels = p.l_set();
            labels.extend(p.r_set());
            labels.insert(p.r());
            labels.into_iter().all(|s| {
                let mut w = v.clone();
                w.push(s);
                self.partial(&w).is_beta_partial(n, beta)
            })
        })
    }

    /// Internal nodes carrying any non-default knowledge, plus the root.
    fn internal_with_knowledge(&self) -> Vec<Name> {
        if self.grafts.is_empty() && self.partials.is_empty() {
            return vec![Vec::new()];
        }
        self.spec.internal_names()
    }

    /// All valid ToCs consistent with this knowledge.
    pub fn enumerate_consistent(&self, cap: u128) -> Result<Vec<Toc>> {
        Ok(enumerate_valid(self.spec, cap)?.into_iter().filter(|t| self.consistent_with(t)).collect())
    }

    /// `N[T, p]` for every tail `p` with a positive count.
    pub fn count_tails(&self, cap: u128) -> Result<TailCounts> {
        Ok(TailCounts::of(&self.enumerate_consistent(cap)?))
    }
}

/// Tail multiplicities over a set of ToCs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TailCounts {
    pub counts: BTreeMap<Name, u64>,
}

impl TailCounts {
    pub fn of(tocs: &[Toc]) -> Self {
        let mut counts = BTreeMap::new();
        for t in tocs {
            *counts.entry(t.tail()).or_insert(0) += 1;
        }
        TailCounts { counts }
    }

    /// `|F[T]|`.
    pub fn support(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    /// `max N / min N` over the support; `None` when empty.
    pub fn ratio(&self) -> Option<f64> {
        let max = self.counts.values().max()?;
        let min = self.counts.values().min()?;
        Some(*max as f64 / *min as f64)
    }
}

/// Number of valid ToCs with one fixed tail: `c_h = (n-1)! c_{h-1} (n^{h-1} c_{h-1}^2)^n`.
fn valid_per_tail(n: usize, h: usize) -> u128 {
    let fact: u128 = (1..n as u128).product();
    let mut c: u128 = 1;
    for level in 1..=h {
        let pairs = (n as u128).saturating_pow(level as u32 - 1).saturating_mul(c.saturating_mul(c));
        c = fact.saturating_mul(c).saturating_mul(pairs.saturating_pow(n as u32));
    }
    c
}

/// Every valid `(n, d)`-ToC, as explicit tables. Fails when there are more
/// than `cap`.
pub fn enumerate_valid(spec: TocSpec, cap: u128) -> Result<Vec<Toc>> {
    let (n, d) = (spec.n, spec.d);
    let needed = (n as u128).saturating_pow(d as u32).saturating_mul(valid_per_tail(n, d));
    if needed > cap {
        return Err(Error::CapExceeded { needed, cap });
    }
    let tables = subtrees(spec, d, None);
    tables
        .into_iter()
        .map(|rel| Toc::from_table(spec, rel.into_iter().collect()))
        .collect()
}

type Table = Vec<(Name, Vec<usize>)>;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        let n = used.len();
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for k in 1..=n {
            if !used[k - 1] {
                used[k - 1] = true;
                prefix.push(k);
                go(prefix, used, out);
                prefix.pop();
                used[k - 1] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

fn tails(spec: TocSpec, len: usize) -> Vec<Name> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p| {
                spec.tail_labels().map(move |a| {
                    let mut q: Name = p.clone();
                    q.push(a);
                    q
                })
            })
            .collect();
    }
    out
}

/// Valid subtrees of height `h` (relative names), optionally with a
/// prescribed relative tail.
fn subtrees(spec: TocSpec, h: usize, tail: Option<&[i64]>) -> Vec<Table> {
    if h == 0 {
        return vec![Vec::new()];
    }
    let prefixed = |a: i64, t: Table| -> Table {
        t.into_iter()
            .map(|(mut k, v)| {
                k.insert(0, a);
                (k, v)
            })
            .collect()
    };
    let product = |acc: Vec<Table>, more: Vec<Table>| -> Vec<Table> {
        acc.iter()
            .flat_map(|a| {
                more.iter().map(move |b| {
                    let mut c = a.clone();
                    c.extend(b.iter().cloned());
                    c
                })
            })
            .collect()
    };
    let mut out = Vec::new();
    for perm in permutations(spec.n) {
        let c = Connector::from_perm(&perm).expect("permutation");
        if tail.is_some_and(|t| t[0] != c.r()) {
            continue;
        }
        let mut acc: Vec<Table> = vec![vec![(Vec::new(), perm.clone())]];
        let last: Vec<Table> = subtrees(spec, h - 1, tail.map(|t| &t[1..]))
            .into_iter()
            .map(|t| prefixed(c.r(), t))
            .collect();
        acc = product(acc, last);
        for s in spec.labels().filter(|&s| s != c.r()) {
            let t = c.phi(s).expect("paired");
            if s > t {
                continue;
            }
            let mut pair = Vec::new();
            for sigma in tails(spec, h - 1) {
                let left: Vec<Table> =
                    subtrees(spec, h - 1, Some(&sigma)).into_iter().map(|x| prefixed(s, x)).collect();
                let right: Vec<Table> =
                    subtrees(spec, h - 1, Some(&sigma)).into_iter().map(|x| prefixed(t, x)).collect();
                pair.extend(product(left, right));
            }
            acc = product(acc, pair);
        }
        out.extend(acc);
    }
    out
}

/// `α_d(β)` of the tail-uniformity bound. Requires `0 <= β <= 24^{-d}`.
pub fn alpha_bound(d: usize, beta: f64) -> Result<f64> {
    if d == 0 || !(0.0..=24f64.powi(-(d as i32))).contains(&beta) {
        return Err(Error::Precondition(format!("beta {beta} outside [0, 24^-{d}]")));
    }
    let mut a = 1.0f64;
    for k in 2..=d {
        a = a.powi(7) / (2.0 * (1.0 - beta).powi(k as i32 - 1) - 1.0).powi(3);
    }
    Ok(a)
}

/// The closed-form upper bound `exp(2 · 24^{d-1} β)` on `α_d(β)`.
pub fn alpha_exp_bound(d: usize, beta: f64) -> f64 {
    (2.0 * 24f64.powi(d as i32 - 1) * beta).exp()
}
