//! The local switch `G[H1, H2]` on `{-1, 0, 1}^d` that pairs each incoming
//! direction with an outgoing one.

use crate::error::{Error, Result};
use crate::lattice::{Direction, GridPoint};

/// Edges of `G[H1, H2]` as offsets from the centre. `(H1, H2)` must be a
/// balanced non-canceling pair.
pub fn gadget_edges(d: usize, h1: &[Direction], h2: &[Direction]) -> Result<Vec<(GridPoint, GridPoint)>> {
    if h1.len() != h2.len() {
        return Err(Error::Precondition(format!("unbalanced pair {h1:?} / {h2:?}")));
    }
    if h1.iter().any(|a| h2.contains(&a.opposite())) {
        return Err(Error::Precondition(format!("canceling pair {h1:?} / {h2:?}")));
    }
    let mut a: Vec<Direction> = h1.to_vec();
    let mut b: Vec<Direction> = h2.to_vec();
    a.sort_by(|x, y| x.lex_cmp(y));
    b.sort_by(|x, y| y.lex_cmp(x));
    let mut out = Vec::with_capacity(2 * a.len());
    for (s1, s2) in a.iter().zip(&b) {
        let from = s1.opposite().to_point(d);
        let mid = from.step(*s2);
        out.push((from, mid));
        out.push((mid, s2.to_point(d)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::lattice::LexPoints;

    fn subsets(all: &[Direction]) -> Vec<Vec<Direction>> {
        (0u32..1 << all.len())
            .map(|m| all.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, d)| *d).collect())
            .collect()
    }

    /// The three degree properties, over every balanced non-canceling pair
    /// for `d <= 3`.
    #[test]
    fn exhaustive_degree_properties() {
        for d in 2..=3 {
            let all: Vec<Direction> = Direction::all(d).collect();
            let subs = subsets(&all);
            let mut pairs = 0;
            for h1 in &subs {
                for h2 in subs.iter().filter(|h2| h2.len() == h1.len()) {
                    if h1.iter().any(|a| h2.contains(&a.opposite())) {
                        assert!(gadget_edges(d, h1, h2).is_err());
                        continue;
                    }
                    pairs += 1;
                    let edges = gadget_edges(d, h1, h2).unwrap();
                    let mut din: HashMap<GridPoint, usize> = HashMap::new();
                    let mut dout: HashMap<GridPoint, usize> = HashMap::new();
                    for (x, y) in &edges {
                        assert!(x.linf() <= 1 && y.linf() <= 1);
                        *dout.entry(*x).or_default() += 1;
                        *din.entry(*y).or_default() += 1;
                    }
                    for u in LexPoints::cube(d, -1, 1) {
                        let (i, o) = (din.get(&u).copied().unwrap_or(0), dout.get(&u).copied().unwrap_or(0));
                        assert!(i <= 1 && o <= 1, "{h1:?} {h2:?} at {u}");
                        let is_src = h1.iter().any(|e| e.opposite().to_point(d) == u);
                        let is_snk = h2.iter().any(|e| e.to_point(d) == u);
                        assert_eq!(i == 0 && o == 1, is_src, "{h1:?} {h2:?} at {u}");
                        assert_eq!(i == 1 && o == 0, is_snk, "{h1:?} {h2:?} at {u}");
                    }
                }
            }
            assert!(pairs > 0);
        }
    }

    #[test]
    fn rejects_unbalanced() {
        assert!(gadget_edges(2, &[Direction::pos(1)], &[]).is_err());
    }
}
