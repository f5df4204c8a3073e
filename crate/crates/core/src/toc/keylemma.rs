//! A random prober that drives the knowledge state and measures the tail
//! statistics `F[T]`, `N[T, p]` by exact enumeration after every query.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::knowledge::{KnowledgeState, QueryOutcome};
use super::partial::{alpha_bound, enumerate_valid, TailCounts, Topc};
use super::{Name, Toc, TocSpec};
use crate::error::Result;

/// `α_d(β)`, with `α_1 = 1` for every `β`.
pub fn alpha(d: usize, beta: f64) -> Result<f64> {
    if d == 1 {
        Ok(1.0)
    } else {
        alpha_bound(d, beta)
    }
}

/// Statistics of one knowledge state.
#[derive(Debug, Clone, Serialize)]
pub struct ProbeRecord {
    pub step: usize,
    pub outcome: &'static str,
    /// A valid `(n, d, β)`-ToPC, where the lemma applies.
    pub valid: bool,
    pub support: usize,
    pub min: u64,
    pub max: u64,
    /// `F[T] = ∪_{k ∈ R[C]} k ∘ F[T_k]`, with `R[C]` read as `{r[C]}` once
    /// the root connector is complete.
    pub decomposition: bool,
}

impl ProbeRecord {
    pub fn ratio(&self) -> f64 {
        self.max as f64 / self.min as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub d: usize,
    pub beta: f64,
    pub seed: u64,
    pub records: Vec<ProbeRecord>,
}

impl ProbeReport {
    /// Violations of the lemma at valid states, plus `ratio = 1` at every
    /// state when `d = 1`.
    pub fn violations(&self) -> Result<Vec<String>> {
        let a = alpha(self.d, self.beta)?;
        let floor = ((1.0 - self.beta) * self.n as f64).powi(self.d as i32);
        let mut out = Vec::new();
        for r in &self.records {
            if r.support == 0 {
                out.push(format!("step {}: no consistent tree", r.step));
                continue;
            }
            if self.d == 1 && r.max != r.min {
                out.push(format!("step {}: d = 1 ratio {}", r.step, r.ratio()));
            }
            if !r.valid {
                continue;
            }
            if (r.support as f64) < floor - 1e-9 {
                out.push(format!("step {}: |F| = {} < {floor}", r.step, r.support));
            }
            if r.ratio() > a + 1e-12 {
                out.push(format!("step {}: ratio {} > {a}", r.step, r.ratio()));
            }
            if !r.decomposition {
                out.push(format!("step {}: decomposition of F fails", r.step));
            }
        }
        Ok(out)
    }
}

/// Tails of valid trees of the child spec consistent with the knowledge
/// below `prefix`.
fn child_tails(topc: &Topc, children: &[Toc], prefix: &[i64]) -> BTreeSet<Name> {
    children.iter().filter(|t| topc.consistent_below(prefix, t)).map(Toc::tail).collect()
}

fn decomposition_holds(topc: &Topc, counts: &TailCounts, cap: u128) -> Result<bool> {
    let spec = topc.spec();
    let root = topc.partial(&[]);
    let mut firsts = root.r_set();
    if firsts.is_empty() {
        firsts.insert(root.r());
    }
    let support: BTreeSet<Name> = counts.counts.keys().cloned().collect();
    if spec.d == 1 {
        return Ok(support == firsts.into_iter().map(|k| vec![k]).collect());
    }
    let children = enumerate_valid(TocSpec::new(spec.n, spec.d - 1)?, cap)?;
    let mut predicted = BTreeSet::new();
    for k in firsts {
        for t in child_tails(topc, &children, &[k]) {
            let mut p = vec![k];
            p.extend(t);
            predicted.insert(p);
        }
    }
    Ok(support == predicted)
}

/// Runs `steps` uniformly random leaf queries against `Toc::random(spec,
/// seed)`, recording the exact statistics before the first query and after
/// each one.
pub fn probe(spec: TocSpec, beta: f64, steps: usize, seed: u64, cap: u128) -> Result<ProbeReport> {
    let truth = Toc::random(spec, seed);
    let mut ks = KnowledgeState::new(spec, beta);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6b65_796c);
    let all = enumerate_valid(spec, cap)?;
    let record = |ks: &KnowledgeState, step: usize, outcome: &'static str| -> Result<ProbeRecord> {
        let tocs: Vec<Toc> = all.iter().filter(|t| ks.topc.consistent_with(t)).cloned().collect();
        let counts = TailCounts::of(&tocs);
        Ok(ProbeRecord {
            step,
            outcome,
            valid: !ks.topc.is_complete() && ks.topc.is_valid_beta(beta),
            support: counts.support(),
            min: counts.counts.values().copied().min().unwrap_or(0),
            max: counts.counts.values().copied().max().unwrap_or(0),
            decomposition: decomposition_holds(&ks.topc, &counts, cap)?,
        })
    };
    let mut records = vec![record(&ks, 0, "initial")?];
    for step in 1..=steps {
        let q: Vec<i64> = (0..spec.d).map(|_| rng.gen_range(2..=2 * spec.n as i64 + 2)).collect();
        let outcome = match ks.query_and_update(&truth, &q)? {
            QueryOutcome::AlreadyKnown => "known",
            QueryOutcome::Revealed => "revealed",
            QueryOutcome::Granted { .. } => "granted",
        };
        records.push(record(&ks, step, outcome)?);
    }
    Ok(ProbeReport { n: spec.n, d: spec.d, beta, seed, records })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_beta_reveals_on_first_query() {
        for d in [1, 2] {
            let spec = TocSpec::new(2, d).unwrap();
            let r = probe(spec, 0.0, 50, 3, 1000).unwrap();
            assert!(r.records[0].valid);
            assert_eq!(r.records[0].support, 2usize.pow(d as u32));
            assert_eq!(r.records[1].outcome, "revealed");
            assert!(r.records[2..].iter().all(|x| x.outcome == "known" && x.support == 1));
            assert!(r.violations().unwrap().is_empty(), "{:?}", r.violations());
        }
    }

    /// With thresholds disabled the prober reaches partially joined
    /// connectors; for `d = 1` every such state is still exactly uniform.
    #[test]
    fn plain_updates_keep_d1_uniform() {
        for seed in 0..20 {
            let r = probe(TocSpec::new(4, 1).unwrap(), 1.0, 12, seed, 1000).unwrap();
            assert!(r.records.iter().all(|x| x.min == x.max && x.decomposition));
        }
    }

    #[test]
    fn plain_updates_decompose_at_d2() {
        let mut joined = 0;
        for seed in 0..10 {
            let r = probe(TocSpec::new(3, 2).unwrap(), 1.0, 6, seed, 100_000).unwrap();
            for x in &r.records {
                assert!(x.support >= 1);
                joined += usize::from(x.outcome == "granted");
                if x.valid {
                    assert!(x.decomposition, "seed {seed} step {}", x.step);
                }
            }
        }
        assert!(joined > 0);
    }
}
