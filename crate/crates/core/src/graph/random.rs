//! Explicit graphs and a random generator of canonical instances.

use std::collections::{HashMap, HashSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::{Direction, GridPoint, GridSpec};

use super::canonical::is_canonical_pair;
use super::{GraphAnswer, GraphOracle};

/// A grid PPAD graph held as an answer table; absent vertices are isolated.
#[derive(Debug, Clone)]
pub struct ExplicitGraph {
    spec: GridSpec,
    start: GridPoint,
    answers: HashMap<GridPoint, GraphAnswer>,
}

impl ExplicitGraph {
    /// One directed path plus vertex-disjoint directed cycles (each listed
    /// without repeating its first vertex).
    pub fn from_walks(spec: GridSpec, path: &[GridPoint], cycles: &[Vec<GridPoint>]) -> Result<Self> {
        if path.len() < 2 {
            return Err(Error::InvalidInstance("the path needs at least one edge".into()));
        }
        let mut answers: HashMap<GridPoint, GraphAnswer> = HashMap::new();
        let mut link = |a: &GridPoint, b: &GridPoint| -> Result<()> {
            let s = b
                .sub(a)
                .as_direction()
                .ok_or_else(|| Error::InvalidInstance(format!("{a} -> {b} is not a unit step")))?;
            for p in [a, b] {
                if !spec.contains(p) {
                    return Err(Error::InvalidInstance(format!("{p} outside the grid")));
                }
            }
            let ea = answers.entry(*a).or_default();
            if ea.succ.replace(s).is_some() {
                return Err(Error::InvalidInstance(format!("{a} has two successors")));
            }
            let eb = answers.entry(*b).or_default();
            if eb.pred.replace(s).is_some() {
                return Err(Error::InvalidInstance(format!("{b} has two predecessors")));
            }
            Ok(())
        };
        for w in path.windows(2) {
            link(&w[0], &w[1])?;
        }
        for c in cycles {
            for i in 0..c.len() {
                link(&c[i], &c[(i + 1) % c.len()])?;
            }
        }
        Ok(ExplicitGraph { spec, start: path[0], answers })
    }

    /// The unique vertex with a predecessor and no successor.
    pub fn end(&self) -> GridPoint {
        *self.answers.iter().find(|(_, a)| a.is_end()).expect("path has an end").0
    }

    pub fn edges(&self) -> usize {
        self.answers.values().filter(|a| a.succ.is_some()).count()
    }
}

impl GraphOracle for ExplicitGraph {
    fn spec(&self) -> GridSpec {
        self.spec
    }

    fn start(&self) -> GridPoint {
        self.start
    }

    fn query(&self, v: &GridPoint) -> GraphAnswer {
        self.answers.get(v).copied().unwrap_or(GraphAnswer::NONE)
    }
}

/// A random canonical graph over `spec`: a self-avoiding walk that starts
/// on the bottom face with a step `e_d` and ends with a step `e_d`, every
/// turn in `S^d`, plus up to `cycles` axis-1/2 rectangles off the path.
pub fn random_canonical(spec: GridSpec, seed: u64, cycles: usize) -> Result<ExplicitGraph> {
    let (d, n) = (spec.d, spec.n);
    if d < 2 || n < 2 {
        return Err(Error::InvalidSpec(format!("canonical instances need d, n >= 2, got d={d} n={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ed = Direction::pos(d);
    let cells = spec.cells().ok_or(Error::Overflow)? as usize;
    let mut best: Option<Vec<GridPoint>> = None;
    for _ in 0..64 {
        let mut start = GridPoint::zeros(d);
        for i in 1..d {
            start.set(i, rng.gen_range(1..=n));
        }
        start.set(d, 1);
        let mut path = vec![start, start.step(ed)];
        let mut seen: HashSet<GridPoint> = path.iter().copied().collect();
        let target = rng.gen_range(2..=(cells / 2).max(2));
        loop {
            let cur = path[path.len() - 1];
            let last = cur.sub(&path[path.len() - 2]).as_direction().expect("unit step");
            if path.len() >= target && last == ed {
                break;
            }
            let mut options: Vec<Direction> = Direction::all(d)
                .filter(|s| is_canonical_pair(d, &GraphAnswer::new(Some(last), Some(*s))))
                .filter(|s| {
                    let q = cur.step(*s);
                    spec.contains(&q) && !seen.contains(&q)
                })
                .collect();
            options.shuffle(&mut rng);
            let Some(s) = options.first() else { break };
            let q = cur.step(*s);
            seen.insert(q);
            path.push(q);
        }
        // Trim back to the last vertex entered by an `e_d` step.
        while path.len() > 2 && path[path.len() - 1].sub(&path[path.len() - 2]).as_direction() != Some(ed) {
            path.pop();
        }
        let better = best.as_ref().map_or(true, |b| (path.len() as i64 - target as i64).abs() < (b.len() as i64 - target as i64).abs());
        if better {
            best = Some(path);
        }
        if best.as_ref().is_some_and(|b| b.len() >= target) {
            break;
        }
    }
    let path = best.expect("at least one attempt");
    let mut used: HashSet<GridPoint> = path.iter().copied().collect();
    let mut rects = Vec::new();
    for _ in 0..cycles {
        for _ in 0..32 {
            let w = rng.gen_range(2..=n.min(4));
            let h = rng.gen_range(2..=n.min(4));
            let mut corner = GridPoint::zeros(d);
            for i in 1..=d {
                let span = match i {
                    1 => n - w + 1,
                    2 => n - h + 1,
                    _ => n,
                };
                corner.set(i, rng.gen_range(1..=span));
            }
            let ring = rectangle(&corner, w, h, rng.gen_bool(0.5));
            if ring.iter().all(|p| !used.contains(p)) {
                used.extend(ring.iter().copied());
                rects.push(ring);
                break;
            }
        }
    }
    ExplicitGraph::from_walks(spec, &path, &rects)
}

/// Boundary of a `w x h` rectangle in the axis-1/2 plane through `corner`.
fn rectangle(corner: &GridPoint, w: i64, h: i64, reverse: bool) -> Vec<GridPoint> {
    let (e1, e2) = (Direction::pos(1), Direction::pos(2));
    let mut ring = Vec::new();
    let mut p = *corner;
    for (s, k) in [(e1, w - 1), (e2, h - 1), (e1.opposite(), w - 1), (e2.opposite(), h - 1)] {
        for _ in 0..k {
            ring.push(p);
            p = p.step(s);
        }
    }
    if reverse {
        ring.reverse();
    }
    ring
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::audit::audit_canonical;

    #[test]
    fn generated_instances_are_canonical() {
        for (d, n) in [(2, 2), (2, 5), (2, 8), (3, 2), (3, 4), (4, 3)] {
            for seed in 0..20 {
                let g = random_canonical(GridSpec::new(d, n).unwrap(), seed, 2).unwrap();
                let r = audit_canonical(&g).unwrap_or_else(|e| panic!("d={d} n={n} seed={seed}: {e}"));
                assert_eq!(r.end, g.end());
            }
        }
    }

    #[test]
    fn ends_spread_over_the_grid() {
        let spec = GridSpec::new(2, 6).unwrap();
        let ends: HashSet<GridPoint> = (0..40).map(|s| random_canonical(spec, s, 0).unwrap().end()).collect();
        assert!(ends.len() >= 10, "only {} distinct ends", ends.len());
    }
}
