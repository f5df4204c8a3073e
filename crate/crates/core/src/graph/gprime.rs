//! The grid PPAD graph `G'` over `Z_{4N+1}^d` obtained from `G*` over
//! `Z_N^d` by blowing each vertex up into a switch gadget.

use crate::lattice::{Direction, GridPoint, GridSpec};

use super::gadget::gadget_edges;
use super::gstar::GenGraphOracle;
use super::{lex_smallest_preimage, GraphAnswer, GraphOracle};

/// `Γ(u) = 4u - 1`; one `G*` query per `G'` query.
#[derive(Debug, Clone)]
pub struct GPrime<O> {
    inner: O,
    spec: GridSpec,
    start: GridPoint,
}

impl<O: GenGraphOracle> GPrime<O> {
    pub fn new(inner: O) -> Self {
        let s = inner.spec();
        let spec = GridSpec { d: s.d, n: 4 * s.n + 1 };
        let start = gamma(&inner.start()).step_by(Direction::neg(s.d), 2);
        GPrime { inner, spec, start }
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }

    /// Every `G'` edge with an endpoint within distance 2 of `Γ(u)`.
    fn local_edges(&self, u: &GridPoint) -> Vec<(GridPoint, GridPoint)> {
        let d = self.spec.d;
        let nb = self.inner.query(u);
        let c = gamma(u);
        let mut edges = Vec::new();
        let mut h1 = nb.h_in.clone();
        if *u == self.inner.start() {
            h1.push(Direction::pos(d));
            h1.sort_by(|a, b| a.lex_cmp(b));
            let ed = Direction::pos(d);
            edges.push((c.step_by(ed, -2), c.step_by(ed, -1)));
        } else if nb.h_in.len() == nb.h_out.len() + 1 {
            h1.remove(0);
        }
        let gadget = gadget_edges(d, &h1, &nb.h_out)
            .unwrap_or_else(|e| panic!("G* vertex {u} violates the Euler condition: {e}"));
        edges.extend(gadget.into_iter().map(|(a, b)| (c.add(&a), c.add(&b))));
        for e in &nb.h_out {
            edges.push((c.step_by(*e, 1), c.step_by(*e, 2)));
            edges.push((c.step_by(*e, 2), c.step_by(*e, 3)));
        }
        for e in &nb.h_in {
            edges.push((c.step_by(*e, -3), c.step_by(*e, -2)));
            edges.push((c.step_by(*e, -2), c.step_by(*e, -1)));
        }
        edges
    }
}

fn gamma(u: &GridPoint) -> GridPoint {
    u.scale(4).sub(&GridPoint::splat(u.dim(), 1))
}

impl<O: GenGraphOracle> GraphOracle for GPrime<O> {
    fn spec(&self) -> GridSpec {
        self.spec
    }

    fn start(&self) -> GridPoint {
        self.start
    }

    fn query(&self, v: &GridPoint) -> GraphAnswer {
        if !self.spec.contains(v) {
            return GraphAnswer::NONE;
        }
        let Some(u) = lex_smallest_preimage(v, 4, 1, 2, self.inner.spec().n) else {
            return GraphAnswer::NONE;
        };
        let edges = self.local_edges(&u);
        let pred = edges.iter().find(|(_, b)| b == v).and_then(|(a, _)| v.sub(a).as_direction());
        let succ = edges.iter().find(|(a, _)| a == v).and_then(|(_, b)| b.sub(v).as_direction());
        GraphAnswer { pred, succ }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::audit::audit_ppad;
    use crate::graph::GStar;
    use crate::string::{IndexedString, SymbolString};

    fn gprime(sym: &[i64], n: i64, w: usize) -> GPrime<GStar<IndexedString>> {
        let s = SymbolString::new(sym.to_vec(), n).unwrap();
        GPrime::new(GStar::new(IndexedString::new(s, w).unwrap()))
    }

    #[test]
    fn ppad_with_expected_ends() {
        let cases: [(&[i64], i64, usize); 3] = [
            (&[1, 5, 3, 7], 8, 1),
            (&[2, 1, 4, 3, 4, 5, 4, 7, 6, 5, 2, 3], 8, 2),
            (&[2, 1, 8, 7, 4, 5, 6, 3], 8, 2),
        ];
        for (sym, n, w) in cases {
            let g = gprime(sym, n, w);
            let r = audit_ppad(&g).unwrap_or_else(|e| panic!("{sym:?}: {e}"));
            assert_eq!(r.start, g.start());
            let last = crate::graph::f_embed(&sym[sym.len() - w..]);
            let end_centre = gamma(&last);
            assert!(r.end.sub(&end_centre).linf() <= 1, "{sym:?}: end {} vs {end_centre}", r.end);
        }
    }
}
