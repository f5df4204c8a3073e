//! The query-and-update procedure that keeps an algorithm's knowledge a
//! valid `(n, d, β)`-ToPC, with its analysis counters.

use serde::Serialize;

use super::partial::Topc;
use super::{fmt_name, Toc, TocAnswer, TocSpec};
use crate::error::{Error, Result};

/// What one call to [`KnowledgeState::query_and_update`] did.
#[derive(Debug, Clone)]
pub enum QueryOutcome {
    /// The answer was already determined by the knowledge; no query made.
    AlreadyKnown,
    /// The root connector sat at the threshold: the whole tree is granted.
    Revealed,
    /// `B_T*` was asked on the first `m` labels of the query.
    Granted { m: usize, answer: TocAnswer },
}

/// Knowledge plus the analysis variables `I`, `A_m`, `B_m[·]`, `B_{m,k}[·]`.
#[derive(Debug, Clone)]
pub struct KnowledgeState {
    pub topc: Topc,
    pub beta: f64,
    pub i_flag: bool,
    /// `a[m - 1] = A_m`.
    pub a: Vec<u64>,
    /// `b[m - 1] = B_m`.
    pub b: Vec<Vec<u8>>,
    /// `bk[m - 1][k] = B_{m,k}`, `k < m`.
    pub bk: Vec<Vec<Vec<u8>>>,
}

/// Counter summary for reports.
#[derive(Debug, Clone, Serialize)]
pub struct AnalysisSummary {
    pub i_flag: bool,
    pub a: Vec<u64>,
    pub b_ones: Vec<u64>,
    /// `b_ones_k[m - 1][k]`: number of 1s in `B_{m,k}`.
    pub bk_ones: Vec<Vec<u64>>,
}

impl KnowledgeState {
    pub fn new(spec: TocSpec, beta: f64) -> Self {
        let d = spec.d;
        KnowledgeState {
            topc: Topc::new(spec),
            beta,
            i_flag: false,
            a: vec![0; d],
            b: vec![Vec::new(); d],
            bk: (1..=d).map(|m| vec![Vec::new(); m]).collect(),
        }
    }

    fn spec(&self) -> TocSpec {
        self.topc.spec()
    }

    /// A connector on the path is at the threshold when one more join would
    /// take it below `(1 - β)n + 1` segments.
    fn at_threshold(&self, r_size: usize) -> bool {
        (r_size as f64) - 1.0 < (1.0 - self.beta) * self.spec().n as f64 - 1e-12
    }

    /// Whether `B_T*(q)` is already determined: some node on the path is
    /// completely known, or the next label is interior to a segment.
    pub fn knows(&self, q: &[i64]) -> bool {
        if self.topc.is_complete() {
            return true;
        }
        (0..q.len()).any(|i| {
            let v = &q[..i];
            if self.topc.is_known(v) {
                return true;
            }
            let p = self.topc.partial(v);
            let s = q[i];
            !(p.l_set().contains(&s) || p.r_set().contains(&s) || p.r() == s)
        })
    }

    /// One round: possibly truncate `q`, ask the relaxed oracle, merge the
    /// granted pair and graft the two granted subtrees.
    pub fn query_and_update(&mut self, truth: &Toc, q: &[i64]) -> Result<QueryOutcome> {
        let spec = self.spec();
        if q.len() != spec.d || q.iter().any(|&s| !spec.is_label(s)) {
            return Err(Error::InvalidNode(fmt_name(q)));
        }
        if self.knows(q) {
            return Ok(QueryOutcome::AlreadyKnown);
        }
        let m = (0..spec.d)
            .find(|&i| self.at_threshold(self.topc.partial(&q[..i]).r_set().len()))
            .unwrap_or(spec.d);
        if m == 0 {
            self.topc.graft(truth.subtree(&[])?);
            self.i_flag = true;
            return Ok(QueryOutcome::Revealed);
        }
        let answer = truth.oracle(&q[..m])?;
        self.a[m - 1] += 1;
        self.b[m - 1].push(0);
        for k in 0..m {
            self.bk[m - 1][k].push(0);
        }
        match &answer {
            TocAnswer::WholeTree(t) => {
                *self.b[m - 1].last_mut().expect("pushed") = 1;
                self.topc.graft(t.clone());
            }
            TocAnswer::Partial { h, phi, t1, t2 } => {
                let mp = spec.d - h - 1;
                if mp >= m {
                    return Err(Error::Inconsistent(format!("answer height {h} for a length-{m} query")));
                }
                let v = &q[..mp];
                let s = q[mp];
                let (end, start) = if s % 2 == 0 { (s, *phi) } else { (*phi, s) };
                self.topc.partial_mut(v)?.join(end, start)?;
                *self.bk[m - 1][mp].last_mut().expect("pushed") = 1;
                self.topc.graft(t1.clone());
                self.topc.graft(t2.clone());
            }
        }
        Ok(QueryOutcome::Granted { m, answer })
    }

    pub fn summary(&self) -> AnalysisSummary {
        let ones = |v: &Vec<u8>| v.iter().map(|&x| x as u64).sum();
        AnalysisSummary {
            i_flag: self.i_flag,
            a: self.a.clone(),
            b_ones: self.b.iter().map(ones).collect(),
            bk_ones: self.bk.iter().map(|row| row.iter().map(ones).collect()).collect(),
        }
    }

    /// `A_m <= (1/(βn)) Σ_{i>m} B_{i,m}` for `1 <= m <= d-1`; vacuous when
    /// `βn < 1`.
    pub fn bookkeeping_bound_holds(&self) -> bool {
        let spec = self.spec();
        let bn = self.beta * spec.n as f64;
        if bn < 1.0 {
            return true;
        }
        let s = self.summary();
        (1..spec.d).all(|m| {
            let merges: u64 = (m + 1..=spec.d).map(|i| s.bk_ones[i - 1][m]).sum();
            s.a[m - 1] as f64 <= merges as f64 / bn + 1e-9
        })
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn spec(n: usize, d: usize) -> TocSpec {
        TocSpec::new(n, d).unwrap()
    }

    fn random_query(spec: TocSpec, rng: &mut ChaCha8Rng) -> Vec<i64> {
        (0..spec.d).map(|_| rng.gen_range(2..=2 * spec.n as i64 + 2)).collect()
    }

    #[test]
    fn first_query_with_half_beta_then_reveal() {
        let s = spec(2, 1);
        for seed in 0..2 {
            let t = Toc::random(s, seed);
            let mut ks = KnowledgeState::new(s, 0.5);
            // Any label in L, R or r of the empty connector forces a query.
            let q = [3];
            match ks.query_and_update(&t, &q).unwrap() {
                QueryOutcome::Granted { m: 1, .. } => {}
                o => panic!("{o:?}"),
            }
            if ks.topc.is_complete() {
                continue;
            }
            assert_eq!(ks.topc.partial(&[]).num_segments(), 2);
            let q2 = ks.topc.partial(&[]).r_set().into_iter().next().unwrap();
            assert!(matches!(ks.query_and_update(&t, &[q2]).unwrap(), QueryOutcome::Revealed));
            assert!(ks.i_flag);
        }
    }

    #[test]
    fn whole_tree_sets_b_flag() {
        let s = spec(4, 2);
        let t = Toc::random(s, 5);
        let mut ks = KnowledgeState::new(s, 0.25);
        ks.query_and_update(&t, &t.tail()).unwrap();
        assert_eq!(ks.b[1], vec![1]);
        assert!(ks.topc.is_complete());
        assert!(ks.knows(&[2, 2]));
    }

    #[test]
    fn knowledge_stays_valid_and_consistent() {
        for (n, d, beta) in [(2, 2, 0.5), (3, 2, 1.0 / 3.0), (4, 2, 0.25), (4, 2, 0.5), (3, 3, 1.0 / 3.0)] {
            let s = spec(n, d);
            for seed in 0..10 {
                let t = Toc::random(s, seed);
                let mut ks = KnowledgeState::new(s, beta);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                for _ in 0..60 {
                    let q = random_query(s, &mut rng);
                    ks.query_and_update(&t, &q).unwrap();
                    assert!(ks.topc.consistent_with(&t));
                    assert!(ks.topc.is_complete() || ks.topc.is_valid_beta(beta), "n={n} d={d} seed={seed}");
                    assert!(ks.bookkeeping_bound_holds(), "{:?}", ks.summary());
                    if ks.topc.is_complete() {
                        break;
                    }
                }
            }
        }
    }
}
