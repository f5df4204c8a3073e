//! Full-grid structural checks for graph oracles.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::GridPoint;

use super::canonical::is_canonical_pair;
use super::gstar::GenGraphOracle;
use super::GraphOracle;

#[derive(Debug, Clone, Serialize)]
pub struct PpadReport {
    pub start: GridPoint,
    pub end: GridPoint,
    /// Vertices on the start-to-end path.
    pub path_len: usize,
    pub edges: usize,
}

fn bad<T>(m: String) -> Result<T> {
    Err(Error::InvalidInstance(m))
}

/// Checks that pred/succ answers agree across every edge, that exactly one
/// vertex is a start (the published one) and exactly one an end, and that
/// following successors from the start reaches the end.
pub fn audit_ppad<G: GraphOracle>(g: &G) -> Result<PpadReport> {
    let spec = g.spec();
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    let mut edges = 0;
    for v in spec.points() {
        let a = g.query(&v);
        if let Some(s) = a.succ {
            let w = v.step(s);
            if !spec.contains(&w) {
                return bad(format!("{v} points outside the grid"));
            }
            if g.query(&w).pred != Some(s) {
                return bad(format!("succ({v}) = {w} but pred({w}) disagrees"));
            }
            edges += 1;
        }
        if let Some(s) = a.pred {
            let u = v.step(s.opposite());
            if !spec.contains(&u) || g.query(&u).succ != Some(s) {
                return bad(format!("pred of {v} disagrees with its neighbour"));
            }
        }
        if a.is_start() {
            starts.push(v);
        }
        if a.is_end() {
            ends.push(v);
        }
    }
    if starts != [g.start()] {
        return bad(format!("starts {starts:?}, published {}", g.start()));
    }
    let [end] = ends[..] else {
        return bad(format!("ends {ends:?}"));
    };
    let mut cur = g.start();
    let mut path_len = 1;
    while let Some(s) = g.query(&cur).succ {
        cur = cur.step(s);
        path_len += 1;
        if path_len > edges + 1 {
            return bad("the start does not lead to an end".into());
        }
    }
    Ok(PpadReport { start: g.start(), end, path_len, edges })
}

/// [`audit_ppad`] plus every answer in `S^d` and a start on the bottom face.
pub fn audit_canonical<G: GraphOracle>(g: &G) -> Result<PpadReport> {
    let spec = g.spec();
    for v in spec.points() {
        let a = g.query(&v);
        if !is_canonical_pair(spec.d, &a) {
            return bad(format!("answer {a} at {v} is not canonical"));
        }
    }
    if g.start().get(spec.d) != 1 {
        return bad(format!("start {} is not on the bottom face", g.start()));
    }
    audit_ppad(g)
}

#[derive(Debug, Clone, Serialize)]
pub struct GeneralizedReport {
    pub edges: usize,
    pub max_in: usize,
    pub max_out: usize,
}

/// Checks a generalized PPAD graph: in/out answers agree across edges, no
/// edge runs both ways, every vertex is balanced except the start (one more
/// out) and one end (one more in).
pub fn audit_generalized<G: GenGraphOracle>(g: &G) -> Result<GeneralizedReport> {
    let spec = g.spec();
    let mut imbalance: HashMap<GridPoint, i64> = HashMap::new();
    let (mut edges, mut max_in, mut max_out) = (0, 0, 0);
    for u in spec.points() {
        let nb = g.query(&u);
        max_in = max_in.max(nb.h_in.len());
        max_out = max_out.max(nb.h_out.len());
        for e in &nb.h_out {
            let w = u.step(*e);
            if !g.query(&w).h_in.contains(e) {
                return bad(format!("edge {u} -> {w} missing at its head"));
            }
            if nb.h_in.contains(&e.opposite()) {
                return bad(format!("edge {u} <-> {w} runs both ways"));
            }
            edges += 1;
        }
        let diff = nb.h_out.len() as i64 - nb.h_in.len() as i64;
        if diff != 0 {
            imbalance.insert(u, diff);
        }
    }
    let start = g.start();
    if imbalance.remove(&start) != Some(1) {
        return bad(format!("start {start} is not a source"));
    }
    let rest: Vec<_> = imbalance.into_iter().collect();
    if rest.len() != 1 || rest[0].1 != -1 {
        return bad(format!("unbalanced vertices {rest:?}"));
    }
    Ok(GeneralizedReport { edges, max_in, max_out })
}
