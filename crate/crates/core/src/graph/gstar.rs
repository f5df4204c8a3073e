//! The generalized grid graph `G*` over `Z_{2n}^d` traced by consecutive
//! blocks of a `(d-1)`-non-repeating string over `Z_n`.

use std::cell::RefCell;

use crate::counter::Counted;
use crate::lattice::{Direction, GridPoint, GridSpec};
use crate::string::{StringAnswer, StringOracle};

/// `F_d(a)` for a block `a` of length `d - 1`.
pub fn f_embed(a: &[i64]) -> GridPoint {
    let d = a.len() + 1;
    let mut x = GridPoint::zeros(d);
    x.set(1, a[0]);
    for i in 2..d {
        x.set(i, a[i - 2] + a[i - 1]);
    }
    x.set(d, a[d - 2]);
    x
}

/// Inverse of [`f_embed`]; `None` if `x` is not an image.
pub fn f_embed_inv(x: &GridPoint) -> Option<Vec<i64>> {
    let d = x.dim();
    let mut a = vec![0; d - 1];
    a[d - 2] = x.get(d);
    for j in (1..d - 1).rev() {
        a[j - 1] = x.get(j + 1) - a[j];
    }
    (f_embed(&a) == *x).then_some(a)
}

/// Whether `(v, s)` is consistent with `(m1, m2)`: the step from `v` in
/// direction `s` lies on the segment walked from `m1` to `m2`.
pub fn consistent(v: i64, s: i8, m1: i64, m2: i64) -> bool {
    if s > 0 {
        m1 <= v && v < m2
    } else {
        m2 < v && v <= m1
    }
}

/// In- and out-directions of one vertex of `G*`, each in lex order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Neighborhood {
    /// `e` with `(u - e, u)` an edge.
    pub h_in: Vec<Direction>,
    /// `e` with `(u, u + e)` an edge.
    pub h_out: Vec<Direction>,
}

/// Query access to a generalized grid PPAD graph.
pub trait GenGraphOracle {
    fn spec(&self) -> GridSpec;
    fn start(&self) -> GridPoint;
    fn query(&self, u: &GridPoint) -> Neighborhood;
}

impl<T: GenGraphOracle + ?Sized> GenGraphOracle for &T {
    fn spec(&self) -> GridSpec {
        (**self).spec()
    }
    fn start(&self) -> GridPoint {
        (**self).start()
    }
    fn query(&self, u: &GridPoint) -> Neighborhood {
        (**self).query(u)
    }
}

impl<O: GenGraphOracle> GenGraphOracle for Counted<O> {
    fn spec(&self) -> GridSpec {
        self.inner.spec()
    }
    fn start(&self) -> GridPoint {
        self.inner.start()
    }
    fn query(&self, u: &GridPoint) -> Neighborhood {
        self.tick();
        self.inner.query(u)
    }
}

/// `G*` answered from a string oracle with at most `4d` string queries per
/// vertex query.
#[derive(Debug, Clone)]
pub struct GStar<S> {
    string: S,
    spec: GridSpec,
    start: GridPoint,
}

impl<S: StringOracle> GStar<S> {
    pub fn new(string: S) -> Self {
        let d = string.window() + 1;
        let spec = GridSpec { d, n: 2 * string.alphabet() };
        let start = f_embed(&string.start_window());
        GStar { string, spec, start }
    }

    pub fn string(&self) -> &S {
        &self.string
    }

    fn ask(&self, w: &[i64], cache: &RefCell<Vec<(Vec<i64>, StringAnswer)>>) -> StringAnswer {
        if let Some((_, a)) = cache.borrow().iter().find(|(k, _)| k == w) {
            return *a;
        }
        let a = self.string.query(w);
        cache.borrow_mut().push((w.to_vec(), a));
        a
    }

    /// Whether `(x, x + s e_k)` is an edge; at most one string query.
    fn edge(&self, x: &GridPoint, k: usize, s: i8, cache: &RefCell<Vec<(Vec<i64>, StringAnswer)>>) -> bool {
        let d = self.spec.d;
        let n = self.string.alphabet();
        let ok = |v: i64| (1..=n).contains(&v);
        if !self.spec.contains(x) || !self.spec.contains(&x.step(Direction::new(k, s))) {
            return false;
        }
        // Tail a_k..a_{d-1} of the left block from x_{k+1}..x_d.
        let left_tail = |from: usize| -> Option<Vec<i64>> {
            let mut a = vec![0; d - 1];
            a[d - 2] = x.get(d);
            for j in (from..d - 1).rev() {
                a[j - 1] = x.get(j + 1) - a[j];
            }
            let t = a[from - 1..].to_vec();
            t.iter().all(|&v| ok(v)).then_some(t)
        };
        // Head b_1..b_{upto} of the right block from x_1..x_{upto}.
        let right_head = |upto: usize| -> Option<Vec<i64>> {
            let mut b = Vec::with_capacity(upto);
            for i in 1..=upto {
                b.push(if i == 1 { x.get(1) } else { x.get(i) - b[i - 2] });
            }
            b.iter().all(|&v| ok(v)).then_some(b)
        };
        let vk = x.get(k);
        if k == 1 {
            let Some(a) = left_tail(1) else { return false };
            if a[d - 2] % 2 == 0 {
                return false;
            }
            let Some(b1) = self.ask(&a, cache).right else { return false };
            consistent(vk, s, a[0], b1)
        } else if k == d {
            let Some(b) = right_head(d - 1) else { return false };
            if b[d - 2] % 2 == 0 {
                return false;
            }
            let Some(a_last) = self.ask(&b, cache).left else { return false };
            consistent(vk, s, a_last, b[d - 2])
        } else {
            let Some(a) = left_tail(k) else { return false };
            let Some(b) = right_head(k - 1) else { return false };
            if a[a.len() - 1] % 2 == 0 {
                return false;
            }
            let mut w = a.clone();
            w.extend_from_slice(&b);
            let ans = self.ask(&w, cache);
            let (Some(a_prev), Some(b_k)) = (ans.left, ans.right) else { return false };
            consistent(vk, s, a_prev + a[0], b[k - 2] + b_k)
        }
    }

    fn neighborhood(&self, u: &GridPoint) -> Neighborhood {
        let mut nb = Neighborhood::default();
        if !self.spec.contains(u) {
            return nb;
        }
        let cache = RefCell::new(Vec::new());
        for e in Direction::all(self.spec.d) {
            let back = u.step(e.opposite());
            if self.edge(&back, e.axis(), e.sign(), &cache) {
                nb.h_in.push(e);
            }
            if self.edge(u, e.axis(), e.sign(), &cache) {
                nb.h_out.push(e);
            }
        }
        nb.h_in.sort_by(|a, b| a.lex_cmp(b));
        nb.h_out.sort_by(|a, b| a.lex_cmp(b));
        nb
    }

}

impl<S: StringOracle> GenGraphOracle for GStar<S> {
    fn spec(&self) -> GridSpec {
        self.spec
    }
    fn start(&self) -> GridPoint {
        self.start
    }
    fn query(&self, u: &GridPoint) -> Neighborhood {
        self.neighborhood(u)
    }
}

impl<S> GStar<S> {
    /// Edges of `P(a, b)` in walking order.
    pub fn block_path(a: &[i64], b: &[i64]) -> Vec<(GridPoint, GridPoint)> {
        let (u, w) = (f_embed(a), f_embed(b));
        let mut x = u;
        let mut out = Vec::new();
        for i in 1..=u.dim() {
            let s = if w.get(i) > x.get(i) { 1 } else { -1 };
            while x.get(i) != w.get(i) {
                let y = x.step(Direction::new(i, s));
                out.push((x, y));
                x = y;
            }
        }
        out
    }
}
