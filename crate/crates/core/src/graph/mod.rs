//! Grid graphs built from a non-repeating string: the generalized graph
//! `G*`, the grid PPAD graph `G'` and its canonical form.

mod canonical;
mod gadget;
mod gprime;
mod gstar;
mod random;

pub mod audit;

pub use canonical::{check_local, is_canonical_pair, p_end, p_move, Canonical, LocalPaths};
pub use gadget::gadget_edges;
pub use gprime::GPrime;
pub use gstar::{consistent, f_embed, f_embed_inv, GStar, GenGraphOracle, Neighborhood};
pub use random::{random_canonical, ExplicitGraph};

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU16, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::counter::Counted;
use crate::lattice::{Direction, GridPoint, GridSpec};

/// Reply of a PPAD-graph oracle: `pred` is `v - pred(v)` and `succ` is
/// `succ(v) - v`; `None` stands for "no".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct GraphAnswer {
    pub pred: Option<Direction>,
    pub succ: Option<Direction>,
}

impl GraphAnswer {
    pub const NONE: GraphAnswer = GraphAnswer { pred: None, succ: None };

    pub fn new(pred: Option<Direction>, succ: Option<Direction>) -> Self {
        GraphAnswer { pred, succ }
    }

    pub fn is_isolated(&self) -> bool {
        self.pred.is_none() && self.succ.is_none()
    }

    pub fn is_start(&self) -> bool {
        self.pred.is_none() && self.succ.is_some()
    }

    pub fn is_end(&self) -> bool {
        self.pred.is_some() && self.succ.is_none()
    }
}

impl fmt::Display for GraphAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |s: Option<Direction>| s.map_or_else(|| "no".to_string(), |d| d.to_string());
        write!(f, "({}, {})", show(self.pred), show(self.succ))
    }
}

/// Query access to a grid PPAD graph over `Z_n^d`.
pub trait GraphOracle {
    fn spec(&self) -> GridSpec;
    /// The starting vertex; public instance data.
    fn start(&self) -> GridPoint;
    /// Vertices outside the grid answer `(no, no)`.
    fn query(&self, v: &GridPoint) -> GraphAnswer;
}

impl<T: GraphOracle + ?Sized> GraphOracle for &T {
    fn spec(&self) -> GridSpec {
        (**self).spec()
    }
    fn start(&self) -> GridPoint {
        (**self).start()
    }
    fn query(&self, v: &GridPoint) -> GraphAnswer {
        (**self).query(v)
    }
}

impl<T: GraphOracle + ?Sized> GraphOracle for Box<T> {
    fn spec(&self) -> GridSpec {
        (**self).spec()
    }
    fn start(&self) -> GridPoint {
        (**self).start()
    }
    fn query(&self, v: &GridPoint) -> GraphAnswer {
        (**self).query(v)
    }
}

impl<O: GraphOracle> GraphOracle for Counted<O> {
    fn spec(&self) -> GridSpec {
        self.inner.spec()
    }
    fn start(&self) -> GridPoint {
        self.inner.start()
    }
    fn query(&self, v: &GridPoint) -> GraphAnswer {
        self.tick();
        self.inner.query(v)
    }
}

/// Opt-in answer cache for full-grid audits and zero searches. Place it
/// inside a counter to count issued queries, outside to count misses.
#[derive(Debug)]
pub struct Memo<O> {
    inner: O,
    spec: GridSpec,
    store: Store,
}

#[derive(Debug)]
enum Store {
    Off,
    /// `0` is unknown, otherwise `1 + pack(answer)`.
    Dense(Vec<AtomicU16>),
    Sparse(Mutex<HashMap<GridPoint, GraphAnswer>>),
}

/// Grids up to this many cells get a dense table.
const DENSE_CELLS: u64 = 1 << 25;

fn pack(a: &GraphAnswer) -> u16 {
    let c = |s: Option<Direction>| s.map_or(0, |s| s.code() as u16);
    c(a.pred) * 32 + c(a.succ)
}

fn unpack(x: u16) -> GraphAnswer {
    let c = |v: u16| (v != 0).then(|| Direction::from_code(v as usize));
    GraphAnswer::new(c(x / 32), c(x % 32))
}

impl<O: GraphOracle> Memo<O> {
    pub fn new(inner: O) -> Self {
        let spec = inner.spec();
        let store = match spec.cells() {
            Some(c) if c <= DENSE_CELLS => Store::Dense((0..c).map(|_| AtomicU16::new(0)).collect()),
            _ => Store::Sparse(Mutex::new(HashMap::new())),
        };
        Memo { inner, spec, store }
    }

    /// A pass-through wrapper, so stacks keep one type with or without
    /// caching.
    pub fn off(inner: O) -> Self {
        let spec = inner.spec();
        Memo { inner, spec, store: Store::Off }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: GraphOracle> GraphOracle for Memo<O> {
    fn spec(&self) -> GridSpec {
        self.spec
    }
    fn start(&self) -> GridPoint {
        self.inner.start()
    }
    fn query(&self, v: &GridPoint) -> GraphAnswer {
        if !self.spec.contains(v) {
            return self.inner.query(v);
        }
        match &self.store {
            Store::Off => self.inner.query(v),
            Store::Dense(t) => {
                let slot = &t[self.spec.rank(v) as usize];
                match slot.load(Ordering::Relaxed) {
                    0 => {
                        let a = self.inner.query(v);
                        slot.store(pack(&a) + 1, Ordering::Relaxed);
                        a
                    }
                    x => unpack(x - 1),
                }
            }
            Store::Sparse(m) => {
                if let Some(a) = m.lock().expect("memo lock").get(v) {
                    return *a;
                }
                let a = self.inner.query(v);
                m.lock().expect("memo lock").insert(*v, a);
                a
            }
        }
    }
}

/// Cache for a generalized graph oracle; same placement rules as [`Memo`].
#[derive(Debug)]
pub struct GenMemo<O> {
    inner: O,
    cache: Option<Mutex<HashMap<GridPoint, Neighborhood>>>,
}

impl<O: GenGraphOracle> GenMemo<O> {
    pub fn new(inner: O) -> Self {
        GenMemo { inner, cache: Some(Mutex::new(HashMap::new())) }
    }

    pub fn off(inner: O) -> Self {
        GenMemo { inner, cache: None }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

impl<O: GenGraphOracle> GenGraphOracle for GenMemo<O> {
    fn spec(&self) -> GridSpec {
        self.inner.spec()
    }
    fn start(&self) -> GridPoint {
        self.inner.start()
    }
    fn query(&self, u: &GridPoint) -> Neighborhood {
        let Some(m) = &self.cache else { return self.inner.query(u) };
        if let Some(nb) = m.lock().expect("memo lock").get(u) {
            return nb.clone();
        }
        let nb = self.inner.query(u);
        m.lock().expect("memo lock").insert(*u, nb.clone());
        nb
    }
}

/// Lex-smallest in-grid `u` with `|v - (k u - c)|_inf <= r`, coordinatewise.
pub fn lex_smallest_preimage(v: &GridPoint, k: i64, c: i64, r: i64, n: i64) -> Option<GridPoint> {
    let mut u = GridPoint::zeros(v.dim());
    for (ui, &vi) in u.coords_mut().iter_mut().zip(v.coords()) {
        // Smallest u with k u - c >= vi - r.
        let lo = (vi - r + c).div_euclid(k) + i64::from((vi - r + c).rem_euclid(k) != 0);
        let lo = lo.max(1);
        if lo > n || k * lo - c > vi + r {
            return None;
        }
        *ui = lo;
    }
    Some(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn memo_is_transparent() {
        let g = random_canonical(GridSpec::new(3, 3).unwrap(), 5, 2).unwrap();
        for m in [Memo::new(&g), Memo::off(&g)] {
            for _ in 0..2 {
                for v in GridSpec::new(3, 5).unwrap().points() {
                    assert_eq!(m.query(&v), g.query(&v), "{v}");
                }
            }
        }
        for d in 1..=crate::lattice::MAX_DIM {
            for p in std::iter::once(None).chain(Direction::all(d).map(Some)) {
                for q in std::iter::once(None).chain(Direction::all(d).map(Some)) {
                    let a = GraphAnswer::new(p, q);
                    assert_eq!(unpack(pack(&a)), a);
                }
            }
        }
    }

    #[test]
    fn preimage_is_lex_smallest() {
        let n = 5;
        for v in GridSpec::new(2, 4 * n + 2).unwrap().points() {
            let brute = GridSpec::new(2, n)
                .unwrap()
                .points()
                .find(|u| v.sub(&u.scale(4)).linf() <= 2);
            assert_eq!(lex_smallest_preimage(&v, 4, 0, 2, n), brute, "{v}");
        }
        for v in GridSpec::new(2, 6 * n + 1).unwrap().points() {
            let brute = GridSpec::new(2, n)
                .unwrap()
                .points()
                .find(|u| v.sub(&u.scale(6).sub(&GridPoint::splat(2, 2))).linf() <= 3);
            assert_eq!(lex_smallest_preimage(&v, 6, 2, 3, n), brute, "{v}");
        }
    }
}
