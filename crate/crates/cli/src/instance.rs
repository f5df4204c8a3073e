//! Instance descriptors and the oracle stacks built from them.

use std::path::Path;
use std::sync::Arc;

use brouwer_core::brouwer::psi;
use brouwer_core::graph::{random_canonical, ExplicitGraph, GenGraphOracle};
use brouwer_core::pipeline::Stack;
use brouwer_core::solver::follow_path;
use brouwer_core::toc::{Name, TocDescriptor};
use brouwer_core::{
    BrouwerFn, BrouwerOracle, Counted, GraphOracle, GridPoint, GridSpec, Layer, QueryCounter,
    StringOracle, Toc,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::Fail;

/// Which oracle of the stack a command targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerSel {
    /// The Tree-of-Connectors itself.
    Nt,
    /// The non-repeating string `S[T]`.
    Es,
    /// The grid PPAD graph `G'`.
    Gp,
    /// The canonical grid PPAD graph.
    Cgp,
    /// The Brouwer function.
    Zp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceKind {
    /// A random Tree-of-Connectors pushed through every reduction.
    Toc,
    /// A random canonical graph on `Z_n^d`, without the lower layers.
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomDescriptor {
    pub d: usize,
    pub n: i64,
    pub seed: u64,
    pub cycles: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum Source {
    Toc(TocDescriptor),
    Random(RandomDescriptor),
}

/// What `generate` writes: enough to rebuild every oracle bit for bit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Descriptor {
    #[serde(flatten)]
    pub source: Source,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer: Option<LayerSel>,
}

#[derive(Debug, Clone, Args)]
pub struct InstanceArgs {
    /// Load the instance from a descriptor written by `generate`.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["source", "n", "d", "seed", "cycles"])]
    pub descriptor: Option<std::path::PathBuf>,
    #[arg(long, value_enum, default_value = "toc")]
    pub source: SourceKind,
    /// Branching factor of the ToC, or the side of a random canonical grid.
    /// Defaults: 2 (toc), 4 (random).
    #[arg(long)]
    pub n: Option<i64>,
    /// Depth of the ToC, or the dimension of a random canonical grid.
    /// Defaults: 1 (toc), 2 (random).
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Extra cycles in a random canonical graph.
    #[arg(long)]
    pub cycles: Option<usize>,
}

impl InstanceArgs {
    pub fn descriptor(&self) -> Result<Descriptor, Fail> {
        if let Some(path) = &self.descriptor {
            return read_descriptor(path);
        }
        let source = match self.source {
            SourceKind::Toc => {
                let n = self.n.unwrap_or(2);
                let n = usize::try_from(n)
                    .map_err(|_| Fail::usage(format!("--n must be positive, got {n}")))?;
                Source::Toc(TocDescriptor {
                    n,
                    d: self.d.unwrap_or(1),
                    seed: Some(self.seed),
                    connectors: None,
                })
            }
            SourceKind::Random => Source::Random(RandomDescriptor {
                d: self.d.unwrap_or(2),
                n: self.n.unwrap_or(4),
                seed: self.seed,
                cycles: self.cycles.unwrap_or(1),
            }),
        };
        Ok(Descriptor {
            source,
            layer: None,
        })
    }
}

pub fn read_descriptor(path: &Path) -> Result<Descriptor, Fail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Fail::usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Fail::usage(format!("{}: {e}", path.display())))
}

/// A parsed instance, before any oracle stack is built.
pub enum Instance {
    Toc(Toc),
    Random(RandomDescriptor),
}

impl Instance {
    pub fn load(desc: &Descriptor) -> Result<Self, Fail> {
        match &desc.source {
            Source::Toc(t) => Ok(Instance::Toc(Toc::from_descriptor(t)?)),
            Source::Random(r) => {
                GridSpec::new(r.d, r.n)?;
                Ok(Instance::Random(r.clone()))
            }
        }
    }

    pub fn toc(&self) -> Option<&Toc> {
        match self {
            Instance::Toc(t) => Some(t),
            Instance::Random(_) => None,
        }
    }

    /// Layers this instance has an oracle for.
    pub fn supports(&self, layer: LayerSel) -> bool {
        matches!(self, Instance::Toc(_)) || matches!(layer, LayerSel::Cgp | LayerSel::Zp)
    }

    pub fn build(&self, cache: bool) -> Result<Built, Fail> {
        match self {
            Instance::Toc(t) => {
                if !t.is_valid() {
                    return Err(Fail::invariant(
                        "the ToC is not valid; run `verify --layer nt` for details",
                    ));
                }
                Ok(Built::Toc(Stack::new(t.clone(), cache)?))
            }
            Instance::Random(r) => {
                let graph = random_canonical(GridSpec::new(r.d, r.n)?, r.seed, r.cycles)?;
                let end = graph.end();
                let counter = QueryCounter::new();
                let graph = Counted::new(graph, counter.clone(), Layer::Canonical);
                let top = Counted::new(BrouwerFn::new(graph)?, counter.clone(), Layer::Brouwer);
                Ok(Built::Random(RandomStack { top, counter, end }))
            }
        }
    }
}

pub struct RandomStack {
    top: Counted<BrouwerFn<Counted<ExplicitGraph>>>,
    counter: Arc<QueryCounter>,
    end: GridPoint,
}

/// The oracles of one instance behind trait objects, each counted at its
/// own layer.
pub enum Built {
    Toc(Stack),
    Random(RandomStack),
}

impl Built {
    pub fn counter(&self) -> &Arc<QueryCounter> {
        match self {
            Built::Toc(s) => s.counter(),
            Built::Random(r) => &r.counter,
        }
    }

    pub fn brouwer(&self) -> &dyn BrouwerOracle {
        match self {
            Built::Toc(s) => s.brouwer(),
            Built::Random(r) => &r.top,
        }
    }

    pub fn canonical(&self) -> &dyn GraphOracle {
        match self {
            Built::Toc(s) => s.canonical(),
            Built::Random(r) => r.top.inner.graph(),
        }
    }

    pub fn gprime(&self) -> Option<&dyn GraphOracle> {
        match self {
            Built::Toc(s) => Some(s.gprime()),
            Built::Random(_) => None,
        }
    }

    pub fn gstar(&self) -> Option<&dyn GenGraphOracle> {
        match self {
            Built::Toc(s) => Some(s.gstar()),
            Built::Random(_) => None,
        }
    }

    pub fn strings(&self) -> Option<&dyn StringOracle> {
        match self {
            Built::Toc(s) => Some(s.strings()),
            Built::Random(_) => None,
        }
    }

    pub fn graph(&self, layer: LayerSel) -> Option<&dyn GraphOracle> {
        match layer {
            LayerSel::Gp => self.gprime(),
            LayerSel::Cgp => Some(self.canonical()),
            _ => None,
        }
    }

    pub fn tail(&self) -> Option<Name> {
        match self {
            Built::Toc(s) => Some(s.toc().tail()),
            Built::Random(_) => None,
        }
    }

    /// The end of the canonical graph: known for random instances, found by
    /// walking the path otherwise. The walk bypasses the canonical counter
    /// but not the layers below it.
    pub fn canonical_end(&self) -> Result<GridPoint, Fail> {
        match self {
            Built::Toc(s) => Ok(follow_path(&s.canonical().inner)?
                .answer
                .expect("follow_path answers")),
            Built::Random(r) => Ok(r.end),
        }
    }

    /// Where the Brouwer function must vanish.
    pub fn expected_zero(&self) -> Result<GridPoint, Fail> {
        Ok(psi(&self.canonical_end()?))
    }
}
