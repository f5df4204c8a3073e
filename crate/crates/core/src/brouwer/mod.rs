//! Discrete Brouwer functions over `Z_{4n+2}^d` built from canonical grid
//! PPAD graphs over `Z_n^d`.
//!
//! Vertex `u` of the graph is placed at `Ψ(u) = 4u`. Along the path the
//! function pushes `+e_d` inside a thin pipe and rotates around it just
//! outside; everywhere else it points down and then towards the pipe
//! entrance. The only zero sits on the image of the path's end.

mod local;

pub use local::{f_base, Cell, Pattern, Patterns};

use std::sync::Arc;

use serde::Serialize;

use crate::counter::Counted;
use crate::error::{Error, Result};
use crate::graph::{lex_smallest_preimage, GraphOracle};
use crate::lattice::{Direction, GridPoint, GridSpec, LexPoints};

/// A discrete function `Z_n^d -> {0} ∪ {±e_i}`; `None` is the zero vector.
pub trait BrouwerOracle {
    fn spec(&self) -> GridSpec;
    /// `r` must lie in the grid.
    fn eval(&self, r: &GridPoint) -> Option<Direction>;
}

impl<T: BrouwerOracle + ?Sized> BrouwerOracle for &T {
    fn spec(&self) -> GridSpec {
        (**self).spec()
    }
    fn eval(&self, r: &GridPoint) -> Option<Direction> {
        (**self).eval(r)
    }
}

impl<O: BrouwerOracle> BrouwerOracle for Counted<O> {
    fn spec(&self) -> GridSpec {
        self.inner.spec()
    }
    fn eval(&self, r: &GridPoint) -> Option<Direction> {
        self.tick();
        self.inner.eval(r)
    }
}

/// The Brouwer function of a canonical graph; one graph query per
/// evaluation.
#[derive(Debug, Clone)]
pub struct BrouwerFn<G> {
    graph: G,
    spec: GridSpec,
    p_star: GridPoint,
    patterns: Arc<Patterns>,
}

/// `Ψ(u) = 4u`.
pub fn psi(u: &GridPoint) -> GridPoint {
    u.scale(4)
}

impl<G: GraphOracle> BrouwerFn<G> {
    pub fn new(graph: G) -> Result<Self> {
        let patterns = Arc::new(Patterns::new(graph.spec().d)?);
        Self::with_patterns(graph, patterns)
    }

    /// Shares one pattern table between many functions of the same
    /// dimension.
    pub fn with_patterns(graph: G, patterns: Arc<Patterns>) -> Result<Self> {
        let g = graph.spec();
        if patterns.dim() != g.d {
            return Err(Error::DimensionMismatch(patterns.dim(), g.d));
        }
        let spec = GridSpec::new(g.d, 4 * g.n + 2)?;
        let p_star = psi(&graph.start());
        Ok(BrouwerFn { graph, spec, p_star, patterns })
    }

    pub fn graph(&self) -> &G {
        &self.graph
    }

    /// `Ψ` of the graph's start.
    pub fn p_star(&self) -> GridPoint {
        self.p_star
    }

    fn towards_p_star(&self, r: &GridPoint) -> Option<Direction> {
        let d = self.spec.d;
        (1..d)
            .find(|&k| r.get(k) != self.p_star.get(k))
            .map(|k| Direction::new(k, (self.p_star.get(k) - r.get(k)).signum() as i8))
    }
}

impl<G: GraphOracle> BrouwerOracle for BrouwerFn<G> {
    fn spec(&self) -> GridSpec {
        self.spec
    }

    fn eval(&self, r: &GridPoint) -> Option<Direction> {
        assert!(self.spec.contains(r), "{r} is outside the Brouwer grid");
        let d = self.spec.d;
        let ed = Direction::pos(d);
        let rd = r.get(d);
        let (dr, dp) = (r.drop_last(), self.p_star.drop_last());
        let bottom = rd == 1 || rd == 2;
        if bottom {
            match dr.sub(&dp).linf() {
                0 => return Some(ed),
                1 => return self.towards_p_star(r),
                _ => {}
            }
        }
        if let Some(u) = lex_smallest_preimage(r, 4, 0, 2, self.graph.spec().n) {
            let a = self.graph.query(&u);
            let off = r.sub(&psi(&u));
            if a.is_end() {
                if off.is_zero() {
                    return None;
                }
                if off == ed.to_point(d) {
                    return Some(ed.opposite());
                }
            }
            match self.patterns.cell(&a, &off) {
                Cell::Kernel => return Some(ed),
                Cell::Boundary(v) => return Some(v),
                Cell::Outside => {}
            }
        }
        if rd == 1 {
            return self.towards_p_star(r);
        }
        Some(ed.opposite())
    }
}

/// Full-grid scan of a Brouwer function.
#[derive(Debug, Clone, Serialize)]
pub struct BrouwerReport {
    pub cells: u64,
    /// Points with `r + f(r)` outside the grid.
    pub out_of_bounds: Vec<GridPoint>,
    /// Pairs at distance 1 with opposite values.
    pub dp_violations: u64,
    pub first_violation: Option<(GridPoint, GridPoint)>,
    pub zeros: Vec<GridPoint>,
}

impl BrouwerReport {
    pub fn is_valid(&self) -> bool {
        self.out_of_bounds.is_empty() && self.dp_violations == 0 && self.zeros.len() == 1
    }
}

fn encode(v: Option<Direction>) -> i8 {
    v.map_or(0, |s| s.axis() as i8 * s.sign())
}

/// Evaluates `f` everywhere once and checks boundedness, direction
/// preservation and the number of zeros.
pub fn audit_brouwer<F: BrouwerOracle>(f: &F) -> Result<BrouwerReport> {
    let spec = f.spec();
    let cells = spec.cells().ok_or(Error::Overflow)?;
    if cells > 1 << 28 {
        return Err(Error::CapExceeded { needed: cells as u128, cap: 1 << 28 });
    }
    let (d, n) = (spec.d, spec.n);
    let index = |p: &GridPoint| p.coords().iter().fold(0usize, |acc, &c| acc * n as usize + (c - 1) as usize);
    let mut table = vec![0i8; cells as usize];
    let mut out_of_bounds = Vec::new();
    let mut zeros = Vec::new();
    for r in spec.points() {
        let v = f.eval(&r);
        match v {
            None => zeros.push(r),
            Some(s) if !spec.contains(&r.step(s)) => out_of_bounds.push(r),
            _ => {}
        }
        table[index(&r)] = encode(v);
    }
    // Half of the offsets suffice: lex-positive ones.
    let offsets: Vec<GridPoint> =
        LexPoints::cube(d, -1, 1).filter(|o| o.coords().iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)).collect();
    let mut dp_violations = 0;
    let mut first_violation = None;
    for r in spec.points() {
        let a = table[index(&r)];
        if a == 0 {
            continue;
        }
        for o in &offsets {
            let q = r.add(o);
            if spec.contains(&q) && table[index(&q)] == -a {
                dp_violations += 1;
                first_violation.get_or_insert((r, q));
            }
        }
    }
    Ok(BrouwerReport { cells, out_of_bounds, dp_violations, first_violation, zeros })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{random_canonical, ExplicitGraph};

    fn check(g: ExplicitGraph, what: &str) {
        let end = g.end();
        let f = BrouwerFn::new(g).unwrap();
        let rep = audit_brouwer(&f).unwrap();
        assert!(rep.out_of_bounds.is_empty(), "{what}: leaves the grid at {:?}", &rep.out_of_bounds[..1]);
        assert_eq!(rep.dp_violations, 0, "{what}: {:?}", rep.first_violation);
        assert_eq!(rep.zeros, vec![psi(&end)], "{what}");
    }

    #[test]
    fn random_instances_in_two_dimensions() {
        for n in [2, 3, 4] {
            for seed in 0..10 {
                let g = random_canonical(GridSpec::new(2, n).unwrap(), seed, 1).unwrap();
                check(g, &format!("d=2 n={n} seed={seed}"));
            }
        }
    }

    #[test]
    fn random_instances_in_three_dimensions() {
        for (n, seeds) in [(2, 6), (3, 4)] {
            for seed in 0..seeds {
                let g = random_canonical(GridSpec::new(3, n).unwrap(), seed, 1).unwrap();
                check(g, &format!("d=3 n={n} seed={seed}"));
            }
        }
    }

    #[test]
    fn random_instances_in_four_dimensions() {
        for seed in 0..3 {
            let g = random_canonical(GridSpec::new(4, 2).unwrap(), seed, 0).unwrap();
            check(g, &format!("d=4 n=2 seed={seed}"));
        }
    }

    #[test]
    fn bottom_rows_lead_to_the_entrance() {
        let g = random_canonical(GridSpec::new(2, 3).unwrap(), 7, 0).unwrap();
        let f = BrouwerFn::new(g).unwrap();
        let p = f.p_star();
        let mut r = GridPoint::new(&[1, 1]);
        for _ in 0..100 {
            if r.get(2) == 3 {
                break;
            }
            r = r.step(f.eval(&r).unwrap());
        }
        assert_eq!(r, p.step_by(Direction::pos(2), -1));
    }
}
