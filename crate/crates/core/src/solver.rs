//! Query-model solvers: lexicographic zero scan, path following and
//! uniform sampling.

use std::collections::HashSet;
use std::time::Instant;

use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::brouwer::BrouwerOracle;
use crate::error::{Error, Result};
use crate::graph::GraphOracle;
use crate::lattice::GridPoint;

#[derive(Debug, Clone, Serialize)]
pub struct SolveResult {
    pub solver: &'static str,
    /// The zero or end vertex; `None` when a sampler ran out of budget.
    pub answer: Option<GridPoint>,
    /// Queries issued to the oracle handed to the solver.
    pub queries: u64,
    pub wall_time_s: f64,
}

/// Evaluates `f` in lexicographic order and stops at the first zero.
pub fn brute_force_zero<F: BrouwerOracle>(f: &F) -> Result<SolveResult> {
    let t = Instant::now();
    let mut queries = 0;
    for r in f.spec().points() {
        queries += 1;
        if f.eval(&r).is_none() {
            return Ok(SolveResult { solver: "brute", answer: Some(r), queries, wall_time_s: t.elapsed().as_secs_f64() });
        }
    }
    Err(Error::InvalidInstance("no zero in the grid".into()))
}

/// Walks successors from the published start; one query per vertex.
pub fn follow_path<G: GraphOracle>(g: &G) -> Result<SolveResult> {
    let t = Instant::now();
    let spec = g.spec();
    let cap = spec.cells().unwrap_or(u64::MAX);
    let mut cur = g.start();
    let mut seen = HashSet::from([cur]);
    let mut queries = 0;
    loop {
        queries += 1;
        let Some(s) = g.query(&cur).succ else { break };
        cur = cur.step(s);
        if !seen.insert(cur) || seen.len() as u64 > cap {
            return Err(Error::InvalidInstance(format!("the path from the start revisits {cur}")));
        }
    }
    Ok(SolveResult { solver: "follow", answer: Some(cur), queries, wall_time_s: t.elapsed().as_secs_f64() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    WithReplacement,
    /// Distinct points; a budget at least the grid size always succeeds.
    WithoutReplacement,
}

/// Evaluates `f` at up to `budget` uniform points.
pub fn sample_solver<F: BrouwerOracle, R: Rng>(f: &F, budget: u64, mode: Sampling, rng: &mut R) -> Result<SolveResult> {
    if budget == 0 {
        return Err(Error::Precondition("sampling budget must be at least 1".into()));
    }
    let t = Instant::now();
    let spec = f.spec();
    let cells = spec.cells().ok_or(Error::Overflow)?;
    let points: Box<dyn Iterator<Item = GridPoint>> = match mode {
        Sampling::WithReplacement => Box::new((0..budget).map(|_| spec.point_at(rng.gen_range(0..cells)))),
        Sampling::WithoutReplacement => {
            let k = budget.min(cells) as usize;
            let picks = index::sample(rng, cells as usize, k);
            Box::new(picks.into_iter().map(|i| spec.point_at(i as u64)).collect::<Vec<_>>().into_iter())
        }
    };
    let mut queries = 0;
    let mut answer = None;
    for r in points {
        queries += 1;
        if f.eval(&r).is_none() {
            answer = Some(r);
            break;
        }
    }
    Ok(SolveResult { solver: "sample", answer, queries, wall_time_s: t.elapsed().as_secs_f64() })
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::brouwer::{psi, BrouwerFn};
    use crate::graph::{audit::audit_ppad, random_canonical};
    use crate::lattice::{Direction, GridSpec};

    /// Zero only at the lex-first point.
    struct Corner(GridSpec);

    impl BrouwerOracle for Corner {
        fn spec(&self) -> GridSpec {
            self.0
        }
        fn eval(&self, r: &GridPoint) -> Option<Direction> {
            (r.get(1) != 1 || r.get(2) != 1).then_some(Direction::neg(1))
        }
    }

    #[test]
    fn zero_at_first_point_costs_one_query() {
        let r = brute_force_zero(&Corner(GridSpec::new(2, 5).unwrap())).unwrap();
        assert_eq!((r.answer, r.queries), (Some(GridPoint::new(&[1, 1])), 1));
    }

    #[test]
    fn scan_finds_image_of_end() {
        for seed in 0..10 {
            let g = random_canonical(GridSpec::new(2, 4).unwrap(), seed, 1).unwrap();
            let end = g.end();
            let f = BrouwerFn::new(&g).unwrap();
            let r = brute_force_zero(&f).unwrap();
            assert_eq!(r.answer, Some(psi(&end)));
            assert_eq!(r.queries, f.spec().rank(&psi(&end)) + 1);
        }
    }

    #[test]
    fn follow_path_costs_edges_plus_one() {
        for seed in 0..10 {
            let g = random_canonical(GridSpec::new(3, 3).unwrap(), seed, 2).unwrap();
            let rep = audit_ppad(&g).unwrap();
            let r = follow_path(&g).unwrap();
            assert_eq!(r.answer, Some(rep.end));
            assert_eq!(r.queries as usize, rep.path_len);
        }
    }

    #[test]
    fn sampling_budgets() {
        let g = random_canonical(GridSpec::new(2, 2).unwrap(), 1, 0).unwrap();
        let f = BrouwerFn::new(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        assert!(sample_solver(&f, 0, Sampling::WithReplacement, &mut rng).is_err());
        let cells = f.spec().cells().unwrap();
        for _ in 0..5 {
            let r = sample_solver(&f, cells, Sampling::WithoutReplacement, &mut rng).unwrap();
            assert_eq!(r.answer, Some(psi(&g.end())));
        }
    }

    /// Hit rate of `b` distinct samples is `b / N`; checked to three
    /// standard errors.
    #[test]
    fn sampling_hit_rate() {
        let g = random_canonical(GridSpec::new(2, 2).unwrap(), 3, 0).unwrap();
        let f = BrouwerFn::new(&g).unwrap();
        let (budget, trials) = (20u64, 4000);
        let p = budget as f64 / f.spec().cells().unwrap() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let hits = (0..trials)
            .filter(|_| sample_solver(&f, budget, Sampling::WithoutReplacement, &mut rng).unwrap().answer.is_some())
            .count();
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits as f64 / trials as f64 - p).abs() <= 3.0 * se, "hits {hits}, p {p}");
    }
}
