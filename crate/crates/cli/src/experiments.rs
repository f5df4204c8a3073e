//! Solver runs, benchmark tables, Key Lemma probes and chain summaries.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use brouwer_core::brouwer::psi;
use brouwer_core::pipeline::invert_chain;
use brouwer_core::solver::{brute_force_zero, follow_path, sample_solver, Sampling};
use brouwer_core::toc::{probe, Name, TocDescriptor};
use brouwer_core::{GridPoint, GridSpec, SolveResult, TocSpec};
use clap::ValueEnum;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::instance::{
    Built, Descriptor, Instance, LayerSel, RandomDescriptor, Source, SourceKind,
};
use crate::{flag_name, Fail};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverSel {
    /// Lexicographic scan for a zero of the Brouwer function.
    Brute,
    /// Successor walk from the start of a graph layer.
    Follow,
    /// Uniform sampling of the Brouwer function.
    Sample,
}

impl SolverSel {
    pub fn default_layer(self) -> LayerSel {
        match self {
            SolverSel::Follow => LayerSel::Cgp,
            SolverSel::Brute | SolverSel::Sample => LayerSel::Zp,
        }
    }

    fn accepts(self, layer: LayerSel) -> bool {
        match self {
            SolverSel::Follow => matches!(layer, LayerSel::Gp | LayerSel::Cgp),
            SolverSel::Brute | SolverSel::Sample => layer == LayerSel::Zp,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub solver: SolverSel,
    pub layer: LayerSel,
    pub budget: u64,
    pub sampling: Sampling,
    pub cache: bool,
}

impl SolveConfig {
    pub fn check(&self, inst: &Instance) -> Result<(), Fail> {
        if !self.solver.accepts(self.layer) {
            return Err(Fail::usage(format!(
                "solver {} cannot run on layer {}",
                flag_name(&self.solver),
                flag_name(&self.layer)
            )));
        }
        if !inst.supports(self.layer) {
            return Err(Fail::usage(format!(
                "layer {} needs a ToC-sourced instance",
                flag_name(&self.layer)
            )));
        }
        if self.solver == SolverSel::Sample && self.budget == 0 {
            return Err(Fail::usage("--budget must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Serialize)]
pub struct SolveRecord {
    pub solver: SolverSel,
    pub layer: LayerSel,
    pub grid: GridSpec,
    pub rep: u64,
    pub answer: Option<GridPoint>,
    pub success: bool,
    /// Queries the solver issued to its own layer.
    pub queries: u64,
    /// Queries seen by every layer's counter during the run.
    pub counts: BTreeMap<&'static str, u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_leaf: Option<Name>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_s: Option<f64>,
}

/// One solver run on a fresh stack, so counters start at zero.
pub fn solve_once(
    inst: &Instance,
    cfg: &SolveConfig,
    rep: u64,
    rng_seed: u64,
) -> Result<SolveRecord, Fail> {
    let built = inst.build(cfg.cache)?;
    let grid = match cfg.layer {
        LayerSel::Zp => built.brouwer().spec(),
        l => built.graph(l).expect("checked by SolveConfig").spec(),
    };
    let before = built.counter().snapshot();
    let r: SolveResult = match cfg.solver {
        SolverSel::Brute => brute_force_zero(&built.brouwer())?,
        SolverSel::Sample => {
            let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
            rng.set_stream(rep);
            sample_solver(&built.brouwer(), cfg.budget, cfg.sampling, &mut rng)?
        }
        SolverSel::Follow => follow_path(&built.graph(cfg.layer).expect("checked by SolveConfig"))?,
    };
    let counts = built.counter().snapshot().since(&before).as_map();
    let recovered_leaf = recover(&built, cfg.layer, r.answer.as_ref());
    let success = match (&recovered_leaf, built.tail()) {
        (Some(leaf), Some(tail)) => *leaf == tail,
        _ => r.answer.is_some(),
    };
    Ok(SolveRecord {
        solver: cfg.solver,
        layer: cfg.layer,
        grid,
        rep,
        answer: r.answer,
        success,
        queries: r.queries,
        counts,
        recovered_leaf,
        wall_time_s: Some(r.wall_time_s),
    })
}

/// The ToC leaf an answer maps back to, where the chain is invertible.
fn recover(built: &Built, layer: LayerSel, answer: Option<&GridPoint>) -> Option<Name> {
    built.tail()?;
    let zero = match layer {
        LayerSel::Zp => *answer?,
        LayerSel::Cgp => psi(answer?),
        _ => return None,
    };
    invert_chain(&zero).ok()
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub source: SourceKind,
    pub ns: Vec<i64>,
    pub d: Option<usize>,
    pub cycles: usize,
    pub first_seed: u64,
    pub reps: u64,
    pub jobs: usize,
    pub solve: SolveConfig,
}

#[derive(Debug, Clone, Serialize)]
pub struct BenchRow {
    pub n: i64,
    pub d: usize,
    pub source: SourceKind,
    pub solver: SolverSel,
    pub layer: LayerSel,
    pub seed: u64,
    pub cells: u64,
    pub toc: u64,
    pub string: u64,
    pub gstar: u64,
    pub gprime: u64,
    pub canonical: u64,
    pub brouwer: u64,
    pub queries: u64,
    pub success: bool,
}

fn descriptor_for(
    source: SourceKind,
    n: i64,
    d: Option<usize>,
    seed: u64,
    cycles: usize,
) -> Result<Descriptor, Fail> {
    let source = match source {
        SourceKind::Toc => Source::Toc(TocDescriptor {
            n: usize::try_from(n).map_err(|_| Fail::usage(format!("bad --n {n}")))?,
            d: d.unwrap_or(1),
            seed: Some(seed),
            connectors: None,
        }),
        SourceKind::Random => Source::Random(RandomDescriptor {
            d: d.unwrap_or(2),
            n,
            seed,
            cycles,
        }),
    };
    Ok(Descriptor {
        source,
        layer: None,
    })
}

/// Runs every `(n, seed)` job on a pool of `jobs` workers. Each worker
/// builds its own stack; rows come back in job order.
pub fn bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>, Fail> {
    let jobs: Vec<(i64, u64)> = cfg
        .ns
        .iter()
        .flat_map(|&n| (0..cfg.reps).map(move |k| (n, cfg.first_seed + k)))
        .collect();
    if cfg.ns.is_empty() {
        return Err(Fail::usage("--n needs at least one size"));
    }
    // Usage errors surface before any worker starts.
    for &n in &cfg.ns {
        let inst = Instance::load(&descriptor_for(
            cfg.source,
            n,
            cfg.d,
            cfg.first_seed,
            cfg.cycles,
        )?)?;
        cfg.solve.check(&inst)?;
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<Result<BenchRow, Fail>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let run = |n: i64, seed: u64| -> Result<BenchRow, Fail> {
        let inst = Instance::load(&descriptor_for(cfg.source, n, cfg.d, seed, cfg.cycles)?)?;
        cfg.solve.check(&inst)?;
        let rec = solve_once(&inst, &cfg.solve, 0, seed)?;
        let c = |k: &str| rec.counts.get(k).copied().unwrap_or(0);
        Ok(BenchRow {
            n,
            d: rec.grid.d,
            source: cfg.source,
            solver: cfg.solve.solver,
            layer: cfg.solve.layer,
            seed,
            cells: rec.grid.cells().unwrap_or(u64::MAX),
            toc: c("toc"),
            string: c("string"),
            gstar: c("gstar"),
            gprime: c("gprime"),
            canonical: c("canonical"),
            brouwer: c("brouwer"),
            queries: rec.queries,
            success: rec.success,
        })
    };
    std::thread::scope(|s| {
        for _ in 0..cfg.jobs.max(1) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, seed)) = jobs.get(i) else { break };
                let row = run(n, seed);
                slots
                    .lock()
                    .expect("no worker panics while holding the lock")[i] = Some(row);
            });
        }
    });
    slots
        .into_inner()
        .expect("workers joined")
        .into_iter()
        .map(|r| r.expect("every job ran"))
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BenchSummary {
    pub n: i64,
    pub d: usize,
    pub source: SourceKind,
    pub solver: SolverSel,
    pub layer: LayerSel,
    pub runs: usize,
    pub cells: u64,
    pub mean_queries: f64,
    pub median_queries: f64,
    pub success_rate: f64,
    /// `budget / cells`, the hit rate of distinct uniform samples.
    pub expected_hit_rate: Option<f64>,
}

pub fn median(mut v: Vec<u64>) -> f64 {
    v.sort_unstable();
    let k = v.len();
    match k {
        0 => f64::NAN,
        _ if k % 2 == 1 => v[k / 2] as f64,
        _ => (v[k / 2 - 1] + v[k / 2]) as f64 / 2.0,
    }
}

pub fn aggregate(rows: &[BenchRow], cfg: &BenchConfig) -> Vec<BenchSummary> {
    let mut groups: BTreeMap<i64, Vec<&BenchRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.n).or_default().push(r);
    }
    groups
        .into_values()
        .map(|g| {
            let q: Vec<u64> = g.iter().map(|r| r.queries).collect();
            let first = g[0];
            BenchSummary {
                n: first.n,
                d: first.d,
                source: first.source,
                solver: first.solver,
                layer: first.layer,
                runs: g.len(),
                cells: first.cells,
                mean_queries: q.iter().sum::<u64>() as f64 / q.len() as f64,
                median_queries: median(q),
                success_rate: g.iter().filter(|r| r.success).count() as f64 / g.len() as f64,
                expected_hit_rate: (cfg.solve.solver == SolverSel::Sample)
                    .then(|| (cfg.solve.budget as f64 / first.cells as f64).min(1.0)),
            }
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ProbeSummary {
    pub n: usize,
    pub d: usize,
    pub beta: f64,
    pub seed: u64,
    pub states: usize,
    pub valid_states: usize,
    pub max_ratio: f64,
    pub violations: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<brouwer_core::toc::ProbeRecord>>,
}

pub fn keylemma(
    spec: TocSpec,
    beta: f64,
    steps: usize,
    seeds: std::ops::Range<u64>,
    cap: u128,
    with_records: bool,
) -> Result<Vec<ProbeSummary>, Fail> {
    if !(0.0..1.0).contains(&beta) {
        return Err(Fail::usage(format!(
            "--beta must lie in [0, 1), got {beta}"
        )));
    }
    seeds
        .map(|seed| {
            let rep = probe(spec, beta, steps, seed, cap)?;
            let violations = rep.violations()?;
            let valid: Vec<_> = rep.records.iter().filter(|r| r.valid).collect();
            Ok(ProbeSummary {
                n: rep.n,
                d: rep.d,
                beta,
                seed,
                states: rep.records.len(),
                valid_states: valid.len(),
                max_ratio: valid.iter().map(|r| r.ratio()).fold(1.0, f64::max),
                violations,
                records: with_records.then(|| rep.records.clone()),
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct ChainSummary {
    pub instance: Descriptor,
    /// Side of each layer's grid, bottom to top.
    pub sides: BTreeMap<&'static str, i64>,
    pub starts: BTreeMap<&'static str, GridPoint>,
    pub ends: BTreeMap<&'static str, GridPoint>,
    pub zero: GridPoint,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail: Option<Name>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub recovered_leaf: Option<Name>,
    pub consistent: bool,
}

/// Walks each graph layer from its start and maps the zero back down.
pub fn reduce(desc: &Descriptor) -> Result<ChainSummary, Fail> {
    let inst = Instance::load(desc)?;
    let built = inst.build(true)?;
    let mut sides = BTreeMap::new();
    let mut starts = BTreeMap::new();
    let mut ends = BTreeMap::new();
    if let (Some(s), Some(gs), Some(gp)) = (built.strings(), built.gstar(), built.gprime()) {
        sides.insert("string", s.alphabet());
        sides.insert("gstar", gs.spec().n);
        sides.insert("gprime", gp.spec().n);
        starts.insert("gstar", gs.start());
        starts.insert("gprime", gp.start());
        ends.insert(
            "gprime",
            follow_path(&gp)?.answer.expect("follow_path answers"),
        );
    }
    let cg = built.canonical();
    sides.insert("canonical", cg.spec().n);
    sides.insert("brouwer", built.brouwer().spec().n);
    starts.insert("canonical", cg.start());
    starts.insert("brouwer", psi(&cg.start()));
    let end = built.canonical_end()?;
    ends.insert("canonical", end);
    let zero = psi(&end);
    let tail = built.tail();
    let recovered_leaf = tail.as_ref().and_then(|_| invert_chain(&zero).ok());
    let consistent = built.brouwer().eval(&zero).is_none() && recovered_leaf == tail;
    Ok(ChainSummary {
        instance: desc.clone(),
        sides,
        starts,
        ends,
        zero,
        tail,
        recovered_leaf,
        consistent,
    })
}
