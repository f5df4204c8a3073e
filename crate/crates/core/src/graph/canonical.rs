//! Canonical local paths and the canonicalized graph over `Z_{6N+1}^d`.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::lattice::{Direction, GridPoint, GridSpec};

use super::{lex_smallest_preimage, GraphAnswer, GraphOracle};

/// Membership in the set `S^d` of allowed `(pred, succ)` pairs.
pub fn is_canonical_pair(d: usize, a: &GraphAnswer) -> bool {
    let ed = Direction::pos(d);
    let (s1, s2) = match (a.pred, a.succ) {
        (None, None) => return true,
        (None, Some(s)) | (Some(s), None) => return s == ed,
        (Some(s1), Some(s2)) => (s1, s2),
    };
    if d == 2 {
        return s1 != s2.opposite();
    }
    let k = s1.axis();
    let pos = |i: usize| Direction::pos(i);
    let neg = |i: usize| Direction::neg(i);
    let allowed: Vec<Direction> = if s1.sign() > 0 {
        match k {
            1 => vec![pos(1), pos(2), neg(2)],
            2 => vec![pos(1), neg(1), pos(2), pos(3), neg(3)],
            _ if k == d => vec![pos(d - 1), pos(d)],
            _ => vec![pos(k - 1), pos(k), pos(k + 1), neg(k + 1)],
        }
    } else {
        match k {
            1 => vec![neg(1), pos(2), neg(2)],
            2 => vec![pos(1), neg(1), neg(2)],
            _ => vec![pos(k - 1), neg(k)],
        }
    };
    allowed.contains(&s2)
}

fn pt(d: usize, terms: &[(Direction, i64)]) -> GridPoint {
    terms.iter().fold(GridPoint::zeros(d), |p, &(s, k)| p.step_by(s, k))
}

/// The ending path `P[d, s]`: from `-3s`, last step `e_d`.
pub fn p_end(d: usize, s: Direction) -> Vec<GridPoint> {
    let l = s.axis();
    let mut path = if s.sign() > 0 {
        vec![pt(d, &[(s, -3)]), pt(d, &[(s, -2)])]
    } else if l == 1 {
        vec![pt(d, &[(s, -3)]), pt(d, &[(s, -2)])]
    } else {
        vec![pt(d, &[(s, -3)]), pt(d, &[(s, -2)]), pt(d, &[(s, -1)])]
    };
    let steps: Vec<usize> = if s.sign() > 0 {
        (l + 1..=d).collect()
    } else if l == 1 {
        (2..=d).collect()
    } else {
        std::iter::once(l - 1).chain(l..=d).collect()
    };
    for a in steps {
        let next = path[path.len() - 1].step(Direction::pos(a));
        path.push(next);
    }
    path
}

/// Two-dimensional base: a shortest detour inside `{-2..2}^2` that avoids
/// `±e_2`, with the forced openings when a side is `-e_2`.
fn p_move_2d(s1: Direction, s2: Direction) -> Vec<GridPoint> {
    let e1 = Direction::pos(1);
    let e2 = Direction::pos(2);
    let mut prefix = vec![pt(2, &[(s1, -3)]), pt(2, &[(s1, -2)])];
    if s1 == e2.opposite() {
        prefix.push(pt(2, &[(e1, 1), (e2, 2)]));
    }
    let mut suffix = vec![pt(2, &[(s2, 2)]), pt(2, &[(s2, 3)])];
    if s2 == e2.opposite() {
        suffix.insert(0, pt(2, &[(e1, -1), (e2, -2)]));
    }
    let (src, dst) = (prefix[prefix.len() - 1], suffix[0]);
    let blocked = |p: &GridPoint| {
        p.linf() > 2
            || *p == e2.to_point(2)
            || *p == e2.opposite().to_point(2)
            || (prefix.contains(p) && *p != src)
            || (suffix.contains(p) && *p != dst)
    };
    let mut prev: HashMap<GridPoint, GridPoint> = HashMap::new();
    let mut queue = VecDeque::from([src]);
    prev.insert(src, src);
    while let Some(p) = queue.pop_front() {
        if p == dst {
            break;
        }
        for s in Direction::all(2) {
            let q = p.step(s);
            if !blocked(&q) && !prev.contains_key(&q) {
                prev.insert(q, p);
                queue.push_back(q);
            }
        }
    }
    let mut mid = vec![dst];
    while mid[mid.len() - 1] != src {
        let p = prev[&mid[mid.len() - 1]];
        mid.push(p);
    }
    mid.reverse();
    let mut path = prefix;
    path.extend_from_slice(&mid[1..]);
    path.extend_from_slice(&suffix[1..]);
    path
}

fn lift(p: &GridPoint) -> GridPoint {
    p.push(0)
}

/// The moving path `P[d, s1, s2]` from `-3 s1` to `3 s2`.
pub fn p_move(d: usize, s1: Direction, s2: Direction) -> Result<Vec<GridPoint>> {
    if s1 == s2.opposite() {
        return Err(Error::Precondition(format!("canceling pair ({s1}, {s2})")));
    }
    if d < 2 || s1.axis() > d || s2.axis() > d {
        return Err(Error::Precondition(format!("({s1}, {s2}) outside dimension {d}")));
    }
    if d == 2 {
        return Ok(p_move_2d(s1, s2));
    }
    let ed = Direction::pos(d);
    let em = Direction::pos(d - 1);
    let down = Direction::neg(d - 1);
    let (head, s1p) = if s1.axis() < d {
        (vec![pt(d, &[(s1, -3)]), pt(d, &[(s1, -2)])], s1)
    } else {
        // P+ for e_d and its mirror P- for -e_d.
        let z = s1.sign() as i64;
        (
            vec![
                pt(d, &[(ed, -3 * z)]),
                pt(d, &[(ed, -2 * z)]),
                pt(d, &[(em, 1), (ed, -2 * z)]),
                pt(d, &[(em, 1), (ed, -z)]),
                pt(d, &[(em, 1)]),
                pt(d, &[(em, 2)]),
            ],
            down,
        )
    };
    let (tail, s2p) = if s2.axis() < d {
        (vec![pt(d, &[(s2, 2)]), pt(d, &[(s2, 3)])], s2)
    } else {
        let z = s2.sign() as i64;
        (
            vec![
                pt(d, &[(em, -2)]),
                pt(d, &[(em, -1)]),
                pt(d, &[(em, -1), (ed, z)]),
                pt(d, &[(em, -1), (ed, 2 * z)]),
                pt(d, &[(ed, 2 * z)]),
                pt(d, &[(ed, 3 * z)]),
            ],
            down,
        )
    };
    let mut path = head;
    if s1p == s2p.opposite() {
        // The outer pieces already meet at -2 s1' = 2 s2'.
        debug_assert_eq!(path[path.len() - 1], tail[0]);
        path.pop();
    } else {
        let inner = p_move(d - 1, s1p, s2p)?;
        let mid: Vec<GridPoint> = inner[1..inner.len() - 1].iter().map(lift).collect();
        debug_assert_eq!(path[path.len() - 1], mid[0]);
        debug_assert_eq!(mid[mid.len() - 1], tail[0]);
        path.extend_from_slice(&mid[1..mid.len() - 1]);
    }
    path.extend_from_slice(&tail);
    Ok(path)
}

/// Which local path a vertex of the input graph expands into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Kind {
    Start(Direction),
    End(Direction),
    Move(Direction, Direction),
}

/// Every local path for one dimension, precomputed.
#[derive(Debug, Clone)]
pub struct LocalPaths {
    d: usize,
    paths: HashMap<Kind, Vec<GridPoint>>,
}

impl LocalPaths {
    pub fn new(d: usize) -> Result<Self> {
        let ed = Direction::pos(d);
        let mut paths = HashMap::new();
        for s1 in Direction::all(d) {
            paths.insert(Kind::End(s1), p_end(d, s1));
            if s1 != ed.opposite() {
                paths.insert(Kind::Start(s1), p_move(d, ed, s1)?);
            }
            for s2 in Direction::all(d).filter(|s2| *s2 != s1.opposite()) {
                paths.insert(Kind::Move(s1, s2), p_move(d, s1, s2)?);
            }
        }
        Ok(LocalPaths { d, paths })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Local path for a vertex answering `a`, and whether its first vertex
    /// is the global start.
    fn for_answer(&self, a: &GraphAnswer) -> Option<(&[GridPoint], bool)> {
        let kind = match (a.pred, a.succ) {
            (None, None) => return None,
            (None, Some(s)) => Kind::Start(s),
            (Some(s), None) => Kind::End(s),
            (Some(s1), Some(s2)) => Kind::Move(s1, s2),
        };
        let p = self.paths.get(&kind).unwrap_or_else(|| panic!("no local path for {a}"));
        Some((p.as_slice(), matches!(kind, Kind::Start(_))))
    }
}

/// `Γ(u) = 6u - 2`; one query to the input graph per query.
#[derive(Debug, Clone)]
pub struct Canonical<O> {
    inner: O,
    spec: GridSpec,
    start: GridPoint,
    paths: LocalPaths,
}

impl<O: GraphOracle> Canonical<O> {
    pub fn new(inner: O) -> Result<Self> {
        let s = inner.spec();
        if s.d < 2 {
            return Err(Error::InvalidSpec("canonicalization needs d >= 2".into()));
        }
        let spec = GridSpec { d: s.d, n: 6 * s.n + 1 };
        let start = gamma(&inner.start()).step_by(Direction::neg(s.d), 3);
        Ok(Canonical { inner, spec, start, paths: LocalPaths::new(s.d)? })
    }

    pub fn inner(&self) -> &O {
        &self.inner
    }
}

fn gamma(u: &GridPoint) -> GridPoint {
    u.scale(6).sub(&GridPoint::splat(u.dim(), 2))
}

impl<O: GraphOracle> GraphOracle for Canonical<O> {
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
        let Some(u) = lex_smallest_preimage(v, 6, 2, 3, self.inner.spec().n) else {
            return GraphAnswer::NONE;
        };
        let a = self.inner.query(&u);
        let Some((path, is_start)) = self.paths.for_answer(&a) else {
            return GraphAnswer::NONE;
        };
        let o = v.sub(&gamma(&u));
        let Some(i) = path.iter().position(|p| *p == o) else {
            return GraphAnswer::NONE;
        };
        let pred = if i > 0 {
            path[i].sub(&path[i - 1]).as_direction()
        } else if is_start {
            None
        } else {
            a.pred
        };
        let succ = if i + 1 < path.len() {
            path[i + 1].sub(&path[i]).as_direction()
        } else {
            a.succ
        };
        GraphAnswer { pred, succ }
    }
}

/// Checks a vertex sequence: distinct vertices, unit steps, every interior
/// `(in, out)` pair in `S^d`.
pub fn check_local(d: usize, path: &[GridPoint]) -> Result<()> {
    let bad = |m: String| Err(Error::InvalidInstance(m));
    for (i, p) in path.iter().enumerate() {
        if path[..i].contains(p) {
            return bad(format!("repeated vertex {p}"));
        }
    }
    for w in path.windows(3) {
        let a = GraphAnswer::new(w[1].sub(&w[0]).as_direction(), w[2].sub(&w[1]).as_direction());
        if a.pred.is_none() || a.succ.is_none() {
            return bad(format!("non-unit step around {}", w[1]));
        }
        if !is_canonical_pair(d, &a) {
            return bad(format!("pair {a} at {} not canonical", w[1]));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_set_sizes() {
        let count = |d: usize| {
            let opts: Vec<Option<Direction>> =
                std::iter::once(None).chain(Direction::all(d).map(Some)).collect();
            opts.iter()
                .flat_map(|a| opts.iter().map(move |b| GraphAnswer::new(*a, *b)))
                .filter(|p| is_canonical_pair(d, p))
                .count()
        };
        // d = 2: three special pairs plus 16 - 4 non-canceling pairs.
        assert_eq!(count(2), 15);
        // d = 3: 3 + 4 (rule 2) + 8 (e_2, -e_2) + 6 (e_1, -e_1).
        assert_eq!(count(3), 21);
    }

    #[test]
    fn end_paths() {
        for d in 2..=5 {
            for s in Direction::all(d) {
                let p = p_end(d, s);
                assert_eq!(p[0], pt(d, &[(s, -3)]));
                assert_eq!(p[1], pt(d, &[(s, -2)]));
                assert_eq!(p[p.len() - 1].sub(&p[p.len() - 2]).as_direction(), Some(Direction::pos(d)));
                assert!(p[1..].iter().all(|x| x.linf() <= 2));
                assert!(p.iter().all(|x| x.linf() <= 3));
                let mut full = vec![pt(d, &[(s, -4)])];
                full.extend(p);
                check_local(d, &full).unwrap_or_else(|e| panic!("d={d} s={s}: {e}"));
            }
        }
    }

    #[test]
    fn move_paths_satisfy_all_conditions() {
        for d in 2..=5 {
            let ed = Direction::pos(d);
            for s1 in Direction::all(d) {
                for s2 in Direction::all(d).filter(|s| *s != s1.opposite()) {
                    let p = p_move(d, s1, s2).unwrap();
                    let m = p.len();
                    assert_eq!(&p[..2], &[pt(d, &[(s1, -3)]), pt(d, &[(s1, -2)])]);
                    assert_eq!(&p[m - 2..], &[pt(d, &[(s2, 2)]), pt(d, &[(s2, 3)])]);
                    assert!(p[1..m - 1].iter().all(|x| x.linf() <= 2));
                    let mut full = vec![pt(d, &[(s1, -4)])];
                    full.extend(p.iter().copied());
                    full.push(pt(d, &[(s2, 4)]));
                    check_local(d, &full).unwrap_or_else(|e| panic!("d={d} ({s1},{s2}): {e}"));
                    assert!(!p.contains(&ed.to_point(d)) && !p.contains(&ed.opposite().to_point(d)));
                    if s1 == ed.opposite() {
                        assert_eq!(p[2], pt(d, &[(Direction::pos(d - 1), 1), (ed, 2)]));
                    }
                    if s2 == ed.opposite() {
                        assert_eq!(p[m - 3], pt(d, &[(Direction::pos(d - 1), -1), (ed, -2)]));
                    }
                }
            }
        }
    }

    #[test]
    fn canceling_pair_rejected() {
        assert!(p_move(3, Direction::pos(1), Direction::neg(1)).is_err());
    }

    fn random_walk(spec: GridSpec, seed: u64) -> Vec<GridPoint> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut path = vec![GridPoint::splat(spec.d, 1)];
        for _ in 0..(spec.n * spec.n) {
            let cur = path[path.len() - 1];
            let mut opts: Vec<GridPoint> =
                Direction::all(spec.d).map(|s| cur.step(s)).filter(|q| spec.contains(q) && !path.contains(q)).collect();
            opts.shuffle(&mut rng);
            match opts.first() {
                Some(q) => path.push(*q),
                None => break,
            }
        }
        path
    }

    #[test]
    fn canonicalized_random_graphs() {
        use crate::graph::audit::audit_canonical;
        use crate::graph::ExplicitGraph;
        for (d, n) in [(2, 4), (3, 3)] {
            let spec = GridSpec::new(d, n).unwrap();
            for seed in 0..6 {
                let walk = random_walk(spec, seed);
                let g = ExplicitGraph::from_walks(spec, &walk, &[]).unwrap();
                let c = Canonical::new(&g).unwrap();
                let r = audit_canonical(&c).unwrap_or_else(|e| panic!("d={d} seed={seed}: {e}"));
                assert_eq!(r.start, gamma(&walk[0]).step_by(Direction::neg(d), 3));
                assert!(r.end.sub(&gamma(&walk[walk.len() - 1])).linf() <= 2);
            }
        }
    }

    #[test]
    fn canonicalized_string_graph() {
        use crate::graph::audit::{audit_canonical, audit_generalized};
        use crate::graph::{GPrime, GStar};
        use crate::string::{IndexedString, SymbolString};
        let s = SymbolString::new(vec![1, 5, 3, 7], 8).unwrap();
        let gs = GStar::new(IndexedString::new(s, 1).unwrap());
        audit_generalized(&gs).unwrap();
        let c = Canonical::new(GPrime::new(&gs)).unwrap();
        let r = audit_canonical(&c).unwrap();
        let w = crate::graph::f_embed(&[7]);
        let w_prime = w.scale(4).sub(&GridPoint::splat(2, 1));
        let ends: Vec<GridPoint> =
            GridSpec::new(2, 65).unwrap().points().filter(|u| r.end.sub(&gamma(u)).linf() <= 2).collect();
        assert_eq!(ends.len(), 1);
        assert!(ends[0].sub(&w_prime).linf() <= 1);
    }
}
